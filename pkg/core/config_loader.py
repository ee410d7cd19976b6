"""
config_loader.py
----------------
Loads the numerical defaults of the solver from a JSON file and validates
them. Every value can be overridden through an environment variable named
``PRESERVERS_<SECTION>_<KEY>``, e.g. ``PRESERVERS_SEARCH_WORKERS=4``.

The `SolverConfigLoader` class turns the sections into the option objects
the library functions take.

Author: infoyouth
Date: 2026-10-18
"""
import json
import os
from pathlib import Path
from typing import Optional, Union

from core.subspaces import SearchOptions
from logger.logger_config import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "configs" / "solver_config.json"
REQUIRED_SECTIONS = ("search", "synthesis", "verify", "recover")
ENV_PREFIX = "PRESERVERS"


class SolverConfigLoader:
    """
    Handles loading and validation of the solver configuration.

    Attributes:
        config_path (Path): Path to the configuration file.
        config (dict): Loaded configuration data, environment overrides applied.
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize the SolverConfigLoader.

        Args:
            config_path (str): Path to the configuration file; the shipped
                ``configs/solver_config.json`` when omitted.
        """
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
        self.config = self._load_config()

    def _load_config(self) -> dict:
        """
        Load the solver configuration from a JSON file.

        Returns:
            dict: Parsed configuration data.

        Raises:
            FileNotFoundError: If the configuration file is not found.
            json.JSONDecodeError: If the configuration file is not valid JSON.
            ValueError: If a section is missing or a value has the wrong type.
        """
        try:
            with open(self.config_path, "r") as file:
                config = json.load(file)
        except FileNotFoundError:
            logger.error(f"Configuration file not found: {self.config_path}")
            raise
        except json.JSONDecodeError:
            logger.error(f"Error decoding JSON configuration file: {self.config_path}")
            raise

        for section in REQUIRED_SECTIONS:
            if not isinstance(config.get(section), dict):
                logger.error(f"Missing '{section}' section in {self.config_path}")
                raise ValueError(f"Missing '{section}' section in {self.config_path}")
            for key, value in config[section].items():
                config[section][key] = self._override(section, key, value)
        logger.debug(f"Solver configuration loaded from {self.config_path}")
        return config

    @staticmethod
    def _override(section: str, key: str, value):
        env_name = f"{ENV_PREFIX}_{section}_{key}".upper()
        raw = os.getenv(env_name)
        if raw is None:
            return value
        try:
            converted = int(raw) if isinstance(value, int) and not isinstance(value, bool) else float(raw)
        except ValueError:
            logger.error(f"Environment variable {env_name}={raw!r} is not a number")
            raise ValueError(f"Environment variable {env_name}={raw!r} is not a number")
        logger.debug(f"Overriding {section}.{key} with {env_name}={converted}")
        return converted

    def get_section(self, name: str) -> dict:
        """
        Retrieve one configuration section.

        Raises:
            KeyError: If the section does not exist.
        """
        if name not in self.config:
            logger.error(f"Unknown configuration section: {name}")
            raise KeyError(name)
        return dict(self.config[name])

    def search_options(self, seed: Optional[int] = 0) -> SearchOptions:
        section = self.get_section("search")
        try:
            return SearchOptions(seed=seed, **section)
        except TypeError as e:
            logger.error(f"Invalid 'search' section: {e}")
            raise ValueError(f"Invalid 'search' section: {e}") from e

    def synthesis_retries(self) -> int:
        return int(self.get_section("synthesis").get("retries", 32))

    def verify_settings(self) -> dict:
        return self.get_section("verify")

    def recover_settings(self) -> dict:
        return self.get_section("recover")
