"""
bundle_io.py
------------
Reading and writing the JSON interchange files: MatrixFile (a complex matrix
as rows of [re, im] pairs) and MapBundle (dims, partition, M, N and an
optional vec-action phi).

Files are written in one canonical layout (sorted keys, 2-space indent, one
matrix row per line, floats with 17 significant digits) so that reading and
re-writing a file reproduces it byte for byte.

Author: infoyouth
Date: 2026-10-18
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from core.errors import BundleFormatError, DimensionError, InvalidPartitionError
from core.preserver_forms import MapOrigin, Partition, PreserverMap, assemble_phi, factor_shapes
from core.subspaces import SearchOptions
from core.tensor_core import DimsProfile
from logger.logger_config import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _depth(value: Any) -> int:
    """Nesting depth of lists; objects inside a list force the multi-line layout."""
    if isinstance(value, dict):
        return 99
    if isinstance(value, list):
        return 1 + max((_depth(v) for v in value), default=0)
    return 0


def _render(value: Any, indent: int) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(key))}: {_render(value[key], indent + 1)}'
            for key in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, list):
        if _depth(value) <= 2:
            return "[" + ", ".join(_render(v, indent) for v in value) + "]"
        items = [f"{pad}  {_render(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise BundleFormatError(f"Cannot write non-finite number {value}")
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise BundleFormatError(f"Cannot write value of type {type(value).__name__}")


def canonical_dumps(payload: Any) -> str:
    """Serialize in the canonical interchange layout (trailing newline included)."""
    return _render(payload, 0) + "\n"


def matrix_to_payload(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"Expected a 2-D matrix, got shape {a.shape}")
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        # no "-0" in files: it reads back as the integer 0
        "data": [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in a],
    }


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def matrix_from_payload(payload: Any, name: str = "matrix") -> np.ndarray:
    """
    Parse a MatrixFile object.

    Raises:
        BundleFormatError: If fields are missing, dimensions disagree or an
            entry is not a finite [re, im] pair.
    """
    if not isinstance(payload, dict) or not {"rows", "cols", "data"} <= set(payload):
        logger.error(f"{name} must be an object with rows, cols and data")
        raise BundleFormatError(f"{name} must be an object with rows, cols and data")
    rows, cols, data = payload["rows"], payload["cols"], payload["data"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise BundleFormatError(f"{name} needs positive integer rows and cols")
    if not isinstance(data, list) or len(data) != rows:
        raise BundleFormatError(f"{name} declares {rows} rows but data has a different count")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise BundleFormatError(f"{name} row {i + 1} does not have {cols} entries")
        for j, entry in enumerate(row):
            if not (isinstance(entry, list) and len(entry) == 2 and all(_is_number(v) for v in entry)):
                logger.error(f"{name} entry ({i + 1}, {j + 1}) is not a finite [re, im] pair")
                raise BundleFormatError(f"{name} entry ({i + 1}, {j + 1}) is not a finite [re, im] pair")
            out[i, j] = complex(entry[0], entry[1])
    return out


@dataclass(frozen=True, eq=False)
class MapBundle:
    """
    A preserver on disk. Generated bundles carry everything; bundles handed
    to recovery may carry only ``dims`` and ``phi``.
    """

    dims: DimsProfile
    partition: Optional[Partition] = None
    M: Optional[np.ndarray] = None
    N: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        has_form = self.partition is not None
        if has_form != (self.M is not None) or has_form != (self.N is not None):
            raise BundleFormatError("partition, M and N must be given together")
        if not has_form and self.phi is None:
            raise BundleFormatError("A bundle needs phi or a partition with M and N")
        if has_form:
            if self.partition.k != self.dims.k:
                raise BundleFormatError(
                    f"Partition {self.partition} does not fit dims {list(self.dims.factors)}"
                )
            m_shape, n_shape = factor_shapes(self.dims, self.partition)
            if self.M.shape != m_shape or self.N.shape != n_shape:
                raise BundleFormatError(
                    f"Partition {self.partition} needs M {m_shape} and N {n_shape}, "
                    f"got {self.M.shape} and {self.N.shape}"
                )
        if self.phi is not None and self.phi.shape != (self.dims.m**2, self.dims.m**2):
            raise BundleFormatError(f"phi must be {self.dims.m ** 2} square, got {self.phi.shape}")

    @classmethod
    def from_map(cls, phi_map: PreserverMap, include_phi: bool = True) -> "MapBundle":
        origin = phi_map.origin
        return cls(
            dims=phi_map.dims,
            partition=origin.partition if origin else None,
            M=origin.M if origin else None,
            N=origin.N if origin else None,
            phi=phi_map.phi if include_phi or origin is None else None,
        )

    def to_map(self, strict: bool = False, opts: Optional[SearchOptions] = None) -> PreserverMap:
        """The stored phi when present, otherwise the assembled partition form."""
        if self.phi is not None:
            origin = MapOrigin(self.partition, self.M, self.N) if self.partition is not None else None
            return PreserverMap(self.dims, self.phi, origin)
        return assemble_phi(self.dims, self.partition, self.M, self.N, strict=strict, opts=opts)

    def to_payload(self) -> dict:
        payload: dict = {"dims": list(self.dims.factors)}
        if self.partition is not None:
            payload["partition"] = [[i + 1 for i in block] for block in self.partition.blocks]
            payload["M"] = matrix_to_payload(self.M)
            payload["N"] = matrix_to_payload(self.N)
        if self.phi is not None:
            payload["phi"] = matrix_to_payload(self.phi)
        return payload

    @classmethod
    def from_payload(cls, payload: Any) -> "MapBundle":
        """
        Parse a MapBundle object.

        Raises:
            BundleFormatError: If the document is malformed.
        """
        if not isinstance(payload, dict) or "dims" not in payload:
            raise BundleFormatError("A bundle must be an object with a dims field")
        dims_raw = payload["dims"]
        if not isinstance(dims_raw, list) or not all(isinstance(n, int) for n in dims_raw):
            raise BundleFormatError("dims must be a list of integers")
        try:
            dims = DimsProfile(tuple(dims_raw))
        except DimensionError as e:
            raise BundleFormatError(str(e)) from e

        partition = None
        if "partition" in payload:
            blocks = payload["partition"]
            if (
                not isinstance(blocks, list)
                or len(blocks) != 4
                or not all(isinstance(b, list) and all(isinstance(i, int) for i in b) for b in blocks)
            ):
                raise BundleFormatError("partition must be four lists of 1-based indices")
            try:
                partition = Partition(dims.k, *(tuple(i - 1 for i in b) for b in blocks))
            except InvalidPartitionError as e:
                raise BundleFormatError(str(e)) from e
        m = matrix_from_payload(payload["M"], "M") if "M" in payload else None
        n = matrix_from_payload(payload["N"], "N") if "N" in payload else None
        phi = matrix_from_payload(payload["phi"], "phi") if "phi" in payload else None
        return cls(dims, partition, m, n, phi)


class BundleStore:
    """
    Handles saving and loading interchange documents.
    """

    @staticmethod
    def save_document(payload: Any, output_file: Optional[PathLike]) -> str:
        """
        Write ``payload`` canonically to ``output_file``; return the text.

        Args:
            payload: JSON-compatible data.
            output_file (str): Target path; nothing is written when None.
        """
        text = canonical_dumps(payload)
        if output_file is None:
            return text
        try:
            with open(output_file, "w") as file:
                file.write(text)
            logger.info(f"Saved document to {output_file}.")
        except OSError as e:
            logger.error(f"Error saving document to {output_file}: {e}")
            raise
        return text

    @staticmethod
    def load_document(input_file: PathLike) -> Any:
        """
        Raises:
            BundleFormatError: If the file is missing or not valid JSON.
        """
        try:
            with open(input_file, "r") as file:
                return json.load(file)
        except FileNotFoundError as e:
            logger.error(f"File not found: {input_file}")
            raise BundleFormatError(f"File not found: {input_file}") from e
        except json.JSONDecodeError as e:
            logger.error(f"Error decoding JSON file {input_file}: {e}")
            raise BundleFormatError(f"{input_file} is not valid JSON: {e}") from e

    @staticmethod
    def save_matrix(a, output_file: Optional[PathLike]) -> str:
        return BundleStore.save_document(matrix_to_payload(a), output_file)

    @staticmethod
    def load_matrix(input_file: PathLike) -> np.ndarray:
        return matrix_from_payload(BundleStore.load_document(input_file), str(input_file))

    @staticmethod
    def save_bundle(bundle: MapBundle, output_file: Optional[PathLike]) -> str:
        return BundleStore.save_document(bundle.to_payload(), output_file)

    @staticmethod
    def load_bundle(input_file: PathLike) -> MapBundle:
        return MapBundle.from_payload(BundleStore.load_document(input_file))
