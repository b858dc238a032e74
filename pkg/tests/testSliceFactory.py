#!python

import io
import os
import struct
import tempfile
import unittest
from fractions import Fraction

import numpy as np

from pairtheta.DataOutputStream import DataOutputStream
from pairtheta.SliceFactory import (createSlice, createSliceFromFilePath, sliceToBytes,
                                    writeSliceToFilePath)
from pairtheta.errors import CacheFormatError
from pairtheta.spectrum import MAGIC, enumerate_spectrum
from pairtheta.torus import TorusSpec


class TestSliceFactory(unittest.TestCase):

    def setUp(self):
        self.rational = enumerate_spectrum(TorusSpec(3, (Fraction(1, 2), Fraction(1, 3), 0)), 6.0)
        self.irrational = enumerate_spectrum(TorusSpec(2, (0.25992104989487, 0.5874010519682)), 30.0)

    def test_parse_rational_slice(self):
        slice = createSlice(sliceToBytes(self.rational))
        self.assertEqual(slice.spec, self.rational.spec)
        self.assertEqual(slice.cutoff, 6.0)
        self.assertTrue(np.array_equal(slice.lambdas, self.rational.lambdas))
        self.assertTrue(np.array_equal(slice.exact_keys, self.rational.exact_keys))

    def test_parse_irrational_slice(self):
        slice = createSlice(sliceToBytes(self.irrational))
        self.assertEqual(slice.spec.alpha, self.irrational.spec.alpha)
        self.assertIsNone(slice.exact_keys)
        self.assertTrue(np.array_equal(slice.rescaled, self.irrational.rescaled))

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "slice.bin")
            writeSliceToFilePath(self.rational, path)
            slice = createSliceFromFilePath(path)
        self.assertEqual(slice.spec.digest(), self.rational.spec.digest())
        self.assertEqual(len(slice), len(self.rational))

    def test_version_one_body(self):
        data = bytearray(sliceToBytes(self.irrational))
        # a version 1 file is the version 2 file without the exact section
        data[len(MAGIC):len(MAGIC) + 2] = (1).to_bytes(2, "little")
        slice = createSlice(bytes(data))
        self.assertTrue(np.array_equal(slice.lambdas, self.irrational.lambdas))
        self.assertIsNone(slice.spec.alpha_exact)

    def test_bad_magic(self):
        data = b"NOTPTS" + sliceToBytes(self.rational)[len(MAGIC):]
        with self.assertRaises(CacheFormatError):
            createSlice(data)

    def test_unknown_version(self):
        data = bytearray(sliceToBytes(self.rational))
        data[len(MAGIC):len(MAGIC) + 2] = (9).to_bytes(2, "little")
        with self.assertRaises(CacheFormatError):
            createSlice(bytes(data))

    def test_truncated(self):
        data = sliceToBytes(self.rational)
        with self.assertRaises(CacheFormatError):
            createSlice(data[:len(data) // 2])

    def test_output_stream_layout(self):
        buffer = io.BytesIO()
        stream = DataOutputStream(buffer)
        stream.write_unsigned_short(2)
        stream.write_double(1.5)
        self.assertEqual(buffer.getvalue(), b"\x02\x00" + struct.pack("<d", 1.5))


if __name__ == '__main__':
    unittest.main()
