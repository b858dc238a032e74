"""
Writing the spectrum cache format.
Scalars use struct with explicit little-endian codes, arrays are written as
contiguous little-endian numpy buffers.
"""

from io import BufferedIOBase
import struct

import numpy as np


class DataOutputStream:
    def __init__(self, stream: BufferedIOBase):
        self.stream = stream

    def write_boolean(self, boolean: bool) -> None:
        self.stream.write(struct.pack('<?', boolean))

    def write_bytes(self, val: bytes) -> None:
        self.stream.write(val)

    def write_unsigned_short(self, val: int) -> None:
        self.stream.write(struct.pack('<H', val))

    def write_int(self, val: int) -> None:
        self.stream.write(struct.pack('<i', val))

    def write_long(self, val: int) -> None:
        self.stream.write(struct.pack('<q', val))

    def write_unsigned_long(self, val: int) -> None:
        self.stream.write(struct.pack('<Q', val))

    def write_double(self, val: float) -> None:
        self.stream.write(struct.pack('<d', val))

    def write_utf(self, string: str) -> None:
        data = string.encode("utf-8")
        self.stream.write(struct.pack('<H', len(data)))
        self.stream.write(data)

    def write_double_array(self, values: np.ndarray) -> None:
        self.stream.write(np.ascontiguousarray(values, dtype='<f8').tobytes())

    def write_long_array(self, values: np.ndarray) -> None:
        self.stream.write(np.ascontiguousarray(values, dtype='<i8').tobytes())
