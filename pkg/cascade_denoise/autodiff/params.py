"""
Named parameter collections and their flat binary file format.

File layout, all integers little-endian uint32:
    magic b"CDPS" | version | count
    per parameter: name length | utf-8 name | rank | extents... | float64 LE data
"""
from pathlib import Path
import logging
import struct

import numpy as np

from .exceptions import ParameterError, ParseError
from .tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b"CDPS"
VERSION = 1


class ParamSet:
    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def add(self, name, data):
        if name in self._params:
            raise ParameterError(f"parameter {name!r} already registered")
        tensor = Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name):
        try:
            return self._params[name]
        except KeyError:
            raise ParameterError(f"unknown parameter {name!r}") from None

    def __contains__(self, name):
        return name in self._params

    def __iter__(self):
        return iter(self._params)

    def __len__(self):
        return len(self._params)

    def items(self):
        return self._params.items()

    def names(self, prefix=""):
        return [name for name in self._params if name.startswith(prefix)]

    def count(self):
        return int(sum(t.size for t in self._params.values()))

    def zero_grad(self):
        for tensor in self._params.values():
            tensor.zero_grad()

    def state(self):
        return {name: tensor.data.copy() for name, tensor in self._params.items()}

    def save(self, path):
        chunks = [MAGIC, struct.pack("<II", VERSION, len(self._params))]
        for name, tensor in self._params.items():
            encoded = name.encode("utf-8")
            chunks.append(struct.pack("<I", len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack(f"<I{tensor.ndim}I", tensor.ndim, *tensor.shape))
            chunks.append(tensor.data.astype("<f8").tobytes())
        Path(path).write_bytes(b"".join(chunks))
        logger.info(f"saved {len(self._params)} parameters ({self.count()} scalars) to {path}")

    @classmethod
    def load(cls, path):
        return cls.from_bytes(Path(path).read_bytes())

    @classmethod
    def from_bytes(cls, blob):
        reader = _Reader(blob)
        if reader.read(4) != MAGIC:
            raise ParseError("bad magic, not a parameter file", offset=0)
        version, count = reader.unpack("<II")
        if version != VERSION:
            raise ParseError(f"unsupported parameter file version {version}", offset=4)
        params = cls()
        for _ in range(count):
            (length,) = reader.unpack("<I")
            offset = reader.offset
            try:
                name = reader.read(length).decode("utf-8")
            except UnicodeDecodeError:
                raise ParseError("parameter name is not utf-8", offset=offset) from None
            (rank,) = reader.unpack("<I")
            shape = reader.unpack(f"<{rank}I") if rank else ()
            n = int(np.prod(shape)) if rank else 1
            data = np.frombuffer(reader.read(8 * n), dtype="<f8").reshape(shape)
            params.add(name, data.astype(np.float64))
        if reader.offset != len(blob):
            raise ParseError("trailing bytes after last parameter", offset=reader.offset)
        return params


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.offset = 0

    def read(self, n):
        if self.offset + n > len(self.blob):
            raise ParseError(f"truncated file, wanted {n} bytes", offset=self.offset)
        chunk = self.blob[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))


def init_conv(params, name, in_channels, out_channels, kernel, rng, scale=1.0):
    """Register ``name.weight`` [O,C,k,k] and ``name.bias`` [O], uniform in ±sqrt(1/fan_in)."""
    bound = np.sqrt(1.0 / (in_channels * kernel * kernel))
    params.add(f"{name}.weight", scale * rng.uniform(-bound, bound, (out_channels, in_channels, kernel, kernel)))
    params.add(f"{name}.bias", scale * rng.uniform(-bound, bound, (out_channels,)))
