"""
Reading the spectrum cache format written by DataOutputStream.
Little-endian throughout; short reads raise CacheFormatError.
"""

from io import BufferedIOBase
import struct

import numpy as np

from .errors import CacheFormatError
from .types import FloatArray, IntArray, float64, int64


class DataInputStream:
    def __init__(self, stream: BufferedIOBase):
        self.stream = stream

    def _read(self, size: int) -> bytes:
        data = self.stream.read(size)
        if len(data) != size:
            raise CacheFormatError(f"truncated cache: wanted {size} bytes, got {len(data)}")
        return data

    def read_boolean(self) -> bool:
        return struct.unpack('<?', self._read(1))[0]

    def read_bytes(self, size: int) -> bytes:
        return self._read(size)

    def read_unsigned_short(self) -> int:
        return struct.unpack('<H', self._read(2))[0]

    def read_int(self) -> int:
        return struct.unpack('<i', self._read(4))[0]

    def read_long(self) -> int64:
        return struct.unpack('<q', self._read(8))[0]

    def read_unsigned_long(self) -> int64:
        return struct.unpack('<Q', self._read(8))[0]

    def read_double(self) -> float64:
        return struct.unpack('<d', self._read(8))[0]

    def read_utf(self) -> str:
        utf_length = struct.unpack('<H', self._read(2))[0]
        return self._read(utf_length).decode("utf-8")

    def read_double_array(self, count: int) -> FloatArray:
        return np.frombuffer(self._read(8 * count), dtype='<f8').astype(np.float64)

    def read_long_array(self, count: int) -> IntArray:
        return np.frombuffer(self._read(8 * count), dtype='<i8').astype(np.int64)
