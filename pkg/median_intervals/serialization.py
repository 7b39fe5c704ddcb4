"""
Median Intervals - Index Persistence
====================================

This module provides:
1. save_index: write a built index to a versioned binary file
2. load_index: read it back, checking magic, version and checksum

File layout: header "<5sHQI" (magic, version u16, body length u64, crc32 u32)
followed by a pickle of the index. Only load files you trust.

Usage:
    save_index(index, "grid.cfmg")
    index = load_index("grid.cfmg")
"""

import logging
import pickle
import struct
import zlib
from pathlib import Path
from typing import Union

from .config import FORMAT_VERSION, MAGIC
from .errors import SerializationError
from .interval_engine import RecursiveIntervalIndex

logger = logging.getLogger(__name__)

HEADER = struct.Struct("<5sHQI")


def save_index(index: RecursiveIntervalIndex, path: Union[str, Path]) -> int:
    """
    Write an index to disk

    Returns:
        Number of bytes written
    """
    body = pickle.dumps(index, protocol=pickle.HIGHEST_PROTOCOL)
    header = HEADER.pack(MAGIC, FORMAT_VERSION, len(body), zlib.crc32(body))
    path = Path(path)
    path.write_bytes(header + body)
    logger.info(f"✓ Saved index ({index.graph.n} vertices) to {path}")
    return len(header) + len(body)


def load_index(path: Union[str, Path]) -> RecursiveIntervalIndex:
    """
    Read an index written by save_index

    Raises:
        SerializationError: Truncated file, bad magic, unknown version or
            checksum mismatch
    """
    path = Path(path)
    logger.info(f"Loading index from {path}...")
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise SerializationError(f"{path}: file too short for a header")
    magic, version, length, crc = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SerializationError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise SerializationError(f"{path}: unsupported format version {version}")
    body = data[HEADER.size:]
    if len(body) != length:
        raise SerializationError(f"{path}: body has {len(body)} bytes, header says {length}")
    if zlib.crc32(body) != crc:
        raise SerializationError(f"{path}: checksum mismatch")
    index = pickle.loads(body)
    if not isinstance(index, RecursiveIntervalIndex):
        raise SerializationError(f"{path}: body is not an interval index")
    return index
