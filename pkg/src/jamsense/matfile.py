"""Binary sample-set file (``.jdmx``).

Layout, all little-endian::

    offset  size  field
    0       5     magic b"JDMX1"
    5       3     zero padding
    8       8     K      (uint64)
    16      8     N      (uint64)
    24      8     count  (uint64)
    32      ...   count matrices, each K x N complex values stored row-major
                  (row = sensing node) as float64 pairs (real, imaginary)

The file length is exactly ``32 + count * K * N * 16`` bytes.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

MAGIC = b"JDMX1"
HEADER = struct.Struct("<5s3xQQQ")
HEADER_SIZE = HEADER.size
_DTYPE = np.dtype("<c16")


class MatrixFileError(InvalidArgument):
    pass


def file_size(K: int, N: int, count: int) -> int:
    return HEADER_SIZE + count * K * N * _DTYPE.itemsize


def atomic_write_bytes(path, chunks) -> None:
    """Write ``chunks`` to a temporary sibling and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            for c in chunks:
                fh.write(c)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_matrices(path, matrices) -> None:
    A = np.asarray(matrices)
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3:
        raise MatrixFileError("expected a (count, K, N) stack")
    count, K, N = A.shape
    body = np.ascontiguousarray(A, dtype=_DTYPE)
    atomic_write_bytes(path, [HEADER.pack(MAGIC, K, N, count), body.tobytes()])


def read_header(path) -> tuple[int, int, int]:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) != HEADER_SIZE:
        raise MatrixFileError(f"{path}: truncated header")
    magic, K, N, count = HEADER.unpack(raw)
    if magic != MAGIC:
        raise MatrixFileError(f"{path}: bad magic {magic!r}")
    return K, N, count


def read_matrices(path) -> np.ndarray:
    K, N, count = read_header(path)
    size = os.path.getsize(path)
    if size != file_size(K, N, count):
        raise MatrixFileError(f"{path}: length {size} does not match header ({file_size(K, N, count)})")
    data = np.fromfile(path, dtype=_DTYPE, offset=HEADER_SIZE)
    return data.reshape(count, K, N).astype(complex)
