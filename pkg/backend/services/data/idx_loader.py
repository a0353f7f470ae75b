"""
IDX binary reader (MNIST / Fashion-MNIST)

Layout: two zero bytes, a data-type byte, a dimension-count byte, then one big-endian
uint32 per dimension followed by the data in row-major order. Labels use magic
0x00000801, images 0x00000803. Gzip-compressed files are detected by their header.
"""
import gzip
import struct
import sys
from pathlib import Path

import numpy as np

from ..common.errors import DataError, IdxParseError
from ..common.logger import get_logger

logger = get_logger("idx_loader")

IDX_DTYPES = {
    0x08: np.dtype("u1"),
    0x09: np.dtype("i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
GZIP_MAGIC = b"\x1f\x8b"


def _read_bytes(path: Path) -> bytes:
    if not path.exists():
        raise DataError(f"IDX file not found: {path}")
    raw = path.read_bytes()
    if raw[:2] == GZIP_MAGIC:
        try:
            return gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise IdxParseError(f"corrupt gzip stream ({e})", 0, str(path)) from e
    return raw


def parse_idx(raw: bytes, source: str | None = None) -> np.ndarray:
    """Parse IDX bytes into a float64 matrix: n x prod(other dims), or n x 1 for 1-D data"""
    if len(raw) < 4:
        raise IdxParseError("truncated magic number", len(raw), source)
    zero, type_code, ndim = struct.unpack(">HBB", raw[:4])
    if zero != 0:
        raise IdxParseError(f"bad magic 0x{int.from_bytes(raw[:4], 'big'):08x}", 0, source)
    if type_code not in IDX_DTYPES:
        raise IdxParseError(f"unknown data type 0x{type_code:02x}", 2, source)
    if ndim == 0:
        raise IdxParseError("zero dimensions", 3, source)

    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise IdxParseError("truncated dimension header", len(raw), source)
    dims = struct.unpack(f">{ndim}I", raw[4:header_end])

    dtype = IDX_DTYPES[type_code]
    count = 1
    for size in dims:
        count *= size
    n_bytes = count * dtype.itemsize
    if n_bytes > sys.maxsize:
        raise IdxParseError(f"dimensions {dims} overflow", 4, source)

    available = len(raw) - header_end
    if available < n_bytes:
        raise IdxParseError(
            f"truncated data: expected {n_bytes} bytes for dimensions {dims}, found {available}",
            len(raw), source,
        )
    if available > n_bytes:
        raise IdxParseError(f"{available - n_bytes} trailing bytes", header_end + n_bytes, source)

    data = np.frombuffer(raw, dtype=dtype, count=count, offset=header_end).astype(np.float64)
    if ndim == 1:
        return data.reshape(-1, 1)
    return data.reshape(dims[0], -1)


def load_idx(path) -> np.ndarray:
    """Read an IDX (optionally gzipped) file"""
    path = Path(path)
    matrix = parse_idx(_read_bytes(path), str(path))
    logger.debug(f"Loaded IDX file {path.name}", extra={'path': str(path), 'count': matrix.shape[0]})
    return matrix
