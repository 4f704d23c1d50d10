"""
Binary Netpbm frames: P5 (grey) and P6 (RGB).

Frames are written with maxval 65535 and big-endian samples; 8-bit files
(maxval < 256) are accepted on read.
"""
from pathlib import Path
import logging

import numpy as np

from autodiff.exceptions import ParseError
from autodiff.tensor import Tensor

logger = logging.getLogger(__name__)

MAXVAL = 65535


def write_frame(path, frame):
    """Write a [C,H,W] frame with values in [0,1]; C must be 1 or 3."""
    data = frame.data if isinstance(frame, Tensor) else np.asarray(frame, dtype=np.float64)
    if data.ndim != 3 or data.shape[0] not in (1, 3):
        raise ParseError(f"frame must be [1|3,H,W], got shape {data.shape}")
    channels, height, width = data.shape
    magic = b"P5" if channels == 1 else b"P6"
    samples = np.round(np.clip(data, 0.0, 1.0) * MAXVAL).astype(">u2")
    body = samples.transpose(1, 2, 0).tobytes()
    header = magic + f"\n{width} {height}\n{MAXVAL}\n".encode("ascii")
    Path(path).write_bytes(header + body)


def read_frame(path):
    return parse_frame(Path(path).read_bytes())


def parse_frame(blob):
    if blob[:2] not in (b"P5", b"P6"):
        raise ParseError("expected P5 or P6 magic", offset=0)
    channels = 1 if blob[:2] == b"P5" else 3
    offset = 2
    values = []
    for field in ("width", "height", "maxval"):
        token, start, offset = _next_token(blob, offset)
        if not token.isdigit():
            raise ParseError(f"invalid {field} {token!r}", offset=start)
        values.append(int(token))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise ParseError(f"invalid extents {width}x{height}", offset=offset)
    if not 0 < maxval <= MAXVAL:
        raise ParseError(f"maxval {maxval} out of range", offset=offset)
    if offset >= len(blob) or blob[offset:offset + 1] not in (b" ", b"\t", b"\r", b"\n"):
        raise ParseError("missing whitespace before raster", offset=offset)
    offset += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * channels * dtype.itemsize
    if len(blob) - offset < expected:
        raise ParseError(f"truncated raster: need {expected} bytes, have {len(blob) - offset}", offset=len(blob))
    raster = np.frombuffer(blob, dtype=dtype, count=width * height * channels, offset=offset)
    pixels = raster.reshape(height, width, channels).transpose(2, 0, 1).astype(np.float64) / maxval
    return Tensor(pixels)


def _next_token(blob, offset):
    while offset < len(blob):
        ch = blob[offset:offset + 1]
        if ch == b"#":
            while offset < len(blob) and blob[offset:offset + 1] != b"\n":
                offset += 1
        elif ch in (b" ", b"\t", b"\r", b"\n"):
            offset += 1
        else:
            break
    start = offset
    while offset < len(blob) and blob[offset:offset + 1] not in (b" ", b"\t", b"\r", b"\n", b"#"):
        offset += 1
    if start == offset:
        raise ParseError("unexpected end of header", offset=offset)
    return blob[start:offset].decode("ascii", errors="replace"), start, offset
