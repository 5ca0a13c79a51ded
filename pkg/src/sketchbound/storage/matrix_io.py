"""Matrix file storage: CSV and the SKBM little-endian binary format.

SKBM layout::

    b"SKBM" | u32 rows | u32 cols | rows*cols float64, column-major
"""
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from sketchbound.core.linalg import as_matrix
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidMatrix, MatrixFormatError
from sketchbound.utils.serialization import format_number

MAGIC = b"SKBM"
HEADER = struct.Struct("<4sII")
FORMATS = ("csv", "bin")

PathLike = Union[str, Path]


def infer_format(path: PathLike) -> str:
    """Guess the format from the extension (``.csv`` or anything else = bin)."""
    return "csv" if Path(path).suffix.lower() == ".csv" else "bin"


def read_matrix(path: PathLike, fmt: Optional[str] = None) -> np.ndarray:
    """Load a matrix from CSV or SKBM.

    Raises:
        MatrixFormatError: unreadable file, bad magic or truncated payload
        InvalidMatrix: non-finite entries
    """
    fmt = fmt or infer_format(path)
    if fmt == "csv":
        return _read_csv(Path(path))
    if fmt == "bin":
        return _read_bin(Path(path))
    raise MatrixFormatError(f"unknown matrix format '{fmt}' (expected one of {FORMATS})")


def write_matrix(path: PathLike, A: np.ndarray, fmt: Optional[str] = None) -> Path:
    """Store a finite matrix as CSV or SKBM."""
    A = as_matrix(A)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = fmt or infer_format(path)
    if fmt == "csv":
        with open(path, "w") as f:
            for row in A:
                f.write(",".join(format_number(v) for v in row))
                f.write("\n")
    elif fmt == "bin":
        rows, cols = A.shape
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, rows, cols))
            f.write(A.astype("<f8").tobytes(order="F"))
    else:
        raise MatrixFormatError(f"unknown matrix format '{fmt}' (expected one of {FORMATS})")
    return path


def read_vector(path: PathLike, fmt: Optional[str] = None) -> np.ndarray:
    """Load a vector stored as a one-row or one-column matrix file."""
    A = read_matrix(path, fmt)
    if min(A.shape) != 1:
        raise MatrixFormatError(f"expected a single row or column, got shape {A.shape}")
    return A.reshape(-1)


def read_spectrum(path: PathLike, fmt: Optional[str] = None) -> Spectrum:
    """Load a tail spectrum; values are sorted non-increasing."""
    return Spectrum.from_unsorted(read_vector(path, fmt))


def _read_csv(path: Path) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise MatrixFormatError(f"cannot parse CSV matrix {path}: {e}") from e
    if data.size == 0:
        raise MatrixFormatError(f"CSV matrix {path} is empty")
    return _validated(data, path)


def _read_bin(path: Path) -> np.ndarray:
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise MatrixFormatError(f"cannot read {path}: {e}") from e
    if len(payload) < HEADER.size:
        raise MatrixFormatError(f"{path}: file shorter than the SKBM header")

    magic, rows, cols = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = HEADER.size + 8 * rows * cols
    if len(payload) != expected:
        raise MatrixFormatError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(payload)}")

    values = np.frombuffer(payload, dtype="<f8", offset=HEADER.size, count=rows * cols)
    return _validated(values.reshape((rows, cols), order="F").astype(np.float64), path)


def _validated(A: np.ndarray, path: Path) -> np.ndarray:
    try:
        return as_matrix(A)
    except InvalidMatrix as e:
        raise InvalidMatrix(f"{path}: {e}") from e
