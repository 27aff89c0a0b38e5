"""Little-endian binary framing shared by the model and classifier files.

Every file is ``magic (4 bytes) | u16 version | body | u32 CRC32`` where the
CRC covers everything before it.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from pointhop.errors import ChecksumFailure, TruncatedFile, UnknownMagic, VersionMismatch


class Writer:
    def __init__(self, magic: bytes, version: int) -> None:
        self._parts: list[bytes] = [magic, struct.pack("<H", version)]

    def pack(self, fmt: str, *values) -> None:
        self._parts.append(struct.pack("<" + fmt, *values))

    def raw(self, data: bytes) -> None:
        self.pack("I", len(data))
        self._parts.append(data)

    def array(self, values: np.ndarray, dtype: str = "<f8") -> None:
        self._parts.append(np.ascontiguousarray(values, dtype=dtype).tobytes())

    def finish(self) -> bytes:
        body = b"".join(self._parts)
        return body + struct.pack("<I", zlib.crc32(body))


class Reader:
    def __init__(self, data: bytes, magic: bytes, version: int) -> None:
        if len(data) < len(magic) + 2 + 4:
            raise TruncatedFile("file shorter than its framing")
        (stored,) = struct.unpack_from("<I", data, len(data) - 4)
        if zlib.crc32(data[:-4]) != stored:
            raise ChecksumFailure("CRC32 mismatch; file is corrupted")
        if data[: len(magic)] != magic:
            raise UnknownMagic(f"expected magic {magic!r}, got {data[: len(magic)]!r}")
        self._data = data[:-4]
        self._pos = len(magic)
        (self.version,) = self.unpack("H")
        if self.version != version:
            raise VersionMismatch(f"file version {self.version}, reader supports {version}")

    def unpack(self, fmt: str) -> tuple:
        fmt = "<" + fmt
        size = struct.calcsize(fmt)
        if self._pos + size > len(self._data):
            raise TruncatedFile("unexpected end of file")
        values = struct.unpack_from(fmt, self._data, self._pos)
        self._pos += size
        return values

    def raw(self) -> bytes:
        (length,) = self.unpack("I")
        if self._pos + length > len(self._data):
            raise TruncatedFile("unexpected end of file")
        out = self._data[self._pos : self._pos + length]
        self._pos += length
        return out

    def array(self, shape: tuple[int, ...], dtype: str = "<f8") -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        size = count * np.dtype(dtype).itemsize
        if self._pos + size > len(self._data):
            raise TruncatedFile("unexpected end of file")
        out = np.frombuffer(self._data, dtype=dtype, count=count, offset=self._pos)
        self._pos += size
        return out.reshape(shape).astype(np.dtype(dtype).newbyteorder("="))

    def done(self) -> None:
        if self._pos != len(self._data):
            raise TruncatedFile(f"{len(self._data) - self._pos} trailing bytes")
