import logging
from pathlib import Path

import numpy as np
import pytest

from core.bundle_io import BundleStore
from core.subspaces import SearchOptions
from logger.logger_config import APP_LOGGER_NAME

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def load_fixture():
    """Load a MatrixFile from the shipped fixtures directory."""

    def _load(name: str) -> np.ndarray:
        return BundleStore.load_matrix(FIXTURE_DIR / name)

    return _load


@pytest.fixture
def fixture_path():
    def _path(name: str) -> Path:
        return FIXTURE_DIR / name

    return _path


@pytest.fixture
def fast_opts() -> SearchOptions:
    # fewer starts for loops that run the search many times
    return SearchOptions(starts=16, max_iter=100)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20261018)


@pytest.fixture
def preservers_caplog(caplog):
    """caplog that also sees records of the non-propagating app logger."""
    log = logging.getLogger(APP_LOGGER_NAME)
    log.addHandler(caplog.handler)
    caplog.set_level(logging.DEBUG, logger=APP_LOGGER_NAME)
    yield caplog
    log.removeHandler(caplog.handler)


@pytest.fixture(autouse=True)
def _reset_app_logger():
    # handlers set up by one CLI test would otherwise write to a closed capture stream
    yield
    log = logging.getLogger(APP_LOGGER_NAME)
    for handler in list(log.handlers):
        log.removeHandler(handler)
        handler.close()
    log.propagate = True
