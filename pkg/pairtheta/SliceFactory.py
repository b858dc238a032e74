"""Reading and writing spectrum cache files.

A cache starts with the magic bytes and a version number; the rest of the
file is decoded by the parser registered for that version.
"""

from io import BytesIO
from os import PathLike
import io
import logging

from .DataInputStream import DataInputStream
from .DataOutputStream import DataOutputStream
from .errors import CacheFormatError
from .spectrum import MAGIC, SpectrumSlice

logger = logging.getLogger(__name__)

SliceVersionDecoders = {
      1 : SpectrumSlice.parse_v1
    , 2 : SpectrumSlice.parse_v2
 }


def getSlice(inputStream: DataInputStream) -> SpectrumSlice:
    magic = inputStream.read_bytes(len(MAGIC))
    if magic != MAGIC:
        raise CacheFormatError(f"not a spectrum cache (magic {magic!r})")
    version = inputStream.read_unsigned_short()

    if version not in SliceVersionDecoders:
        raise CacheFormatError(f"unsupported spectrum cache version {version}")
    slice = SliceVersionDecoders[version](inputStream)
    logger.debug("read cache version %d: k=%d, %d values", version, slice.k, len(slice))
    return slice


def createSlice(data: bytes) -> SpectrumSlice:
    """ Decode a spectrum slice from the bytes of a cache file."""
    memoryStream = BytesIO(data)
    inputStream = DataInputStream(memoryStream)

    return getSlice(inputStream)


def sliceToBytes(slice: SpectrumSlice) -> bytes:
    memoryStream = BytesIO()
    slice.serialize(DataOutputStream(memoryStream))
    return memoryStream.getvalue()


def createSliceFromFilePath(filePath: PathLike) -> SpectrumSlice:
    with io.open(filePath, "rb") as f:
        inputStream = DataInputStream(f)
        slice = getSlice(inputStream)
    return slice


def writeSliceToFilePath(slice: SpectrumSlice, filePath: PathLike) -> None:
    with io.open(filePath, "wb") as f:
        slice.serialize(DataOutputStream(f))
    logger.info("wrote spectrum cache %s (%d values)", filePath, len(slice))
