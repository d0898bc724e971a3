"""DMCT binary tensor container.

Layout: magic ``DMCT`` (0x44 0x4D 0x43 0x54), version byte 0x01, dtype byte
(0x01 = float64, 0x02 = complex128 stored as interleaved re/im float64 pairs),
rank byte, ``rank`` u64 little-endian dims, then the row-major little-endian
payload.
"""

import struct
from pathlib import Path

import numpy as np

from dmcest.errors import DmcError

MAGIC = b"DMCT"
VERSION = 1

_DTYPE_F64 = 0x01
_DTYPE_C128 = 0x02


class DmctFormatError(DmcError):
    """File is not a valid DMCT container."""


def write_tensor(path, arr):
    """Write a real or complex array to `path` in DMCT format.

    Real inputs are stored as float64, complex inputs as complex128. Integer
    and lower-precision float inputs are upcast.
    """
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        arr = np.ascontiguousarray(arr, dtype=np.complex128)
        code = _DTYPE_C128
        payload = arr.view(np.float64)
    else:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        code = _DTYPE_F64
        payload = arr
    header = MAGIC + struct.pack("<BBB", VERSION, code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.astype("<f8", copy=False).tobytes())


def read_tensor(path):
    """Read a DMCT file, returning a float64 or complex128 array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 7 or raw[:4] != MAGIC:
        raise DmctFormatError(f"{path}: missing DMCT magic")
    version, code, rank = struct.unpack("<BBB", raw[4:7])
    if version != VERSION:
        raise DmctFormatError(f"{path}: unsupported version {version}")
    if code not in (_DTYPE_F64, _DTYPE_C128):
        raise DmctFormatError(f"{path}: unknown dtype code {code:#x}")
    offset = 7 + 8 * rank
    if len(raw) < offset:
        raise DmctFormatError(f"{path}: truncated header")
    dims = struct.unpack(f"<{rank}Q", raw[7:offset])
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    scalars = count * (2 if code == _DTYPE_C128 else 1)
    data = np.frombuffer(raw, dtype="<f8", count=scalars, offset=offset)
    if data.size != scalars:
        raise DmctFormatError(f"{path}: truncated payload")
    if code == _DTYPE_C128:
        data = data.view(np.complex128)
    return data.reshape(dims).copy()
