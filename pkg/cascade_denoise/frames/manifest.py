"""Sequence manifests: one frame path per line, relative to the manifest's directory."""
from pathlib import Path
import logging

from autodiff.exceptions import ParseError

from .netpbm import read_frame, write_frame
from .synth import VideoSequence

logger = logging.getLogger(__name__)

FRAME_SUFFIXES = (".pgm", ".ppm")


def read_manifest(path):
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    frames = []
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        frame = path.parent / line
        if frame.suffix.lower() not in FRAME_SUFFIXES:
            raise ParseError(f"{line!r} is not a .pgm/.ppm frame", line=number)
        if not frame.is_file():
            raise ParseError(f"frame file not found: {line!r}", line=number)
        frames.append(frame)
    if not frames:
        raise ParseError(f"manifest {path} lists no frames")
    return frames


def write_manifest(path, frame_paths):
    path = Path(path)
    names = [Path(p).relative_to(path.parent).as_posix() for p in frame_paths]
    path.write_text("".join(f"{name}\n" for name in names), encoding="utf-8")


def load_sequence(manifest):
    frames = [read_frame(p) for p in read_manifest(manifest)]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise ParseError(f"manifest {manifest} mixes frame shapes {sorted(shapes)}")
    logger.info(f"loaded {len(frames)} frames of shape {frames[0].shape} from {manifest}")
    return VideoSequence(frames=frames)


def save_sequence(sequence, directory, stem="frame"):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ext = ".pgm" if sequence.frames[0].shape[0] == 1 else ".ppm"
    paths = []
    for index, frame in enumerate(sequence.frames):
        target = directory / f"{stem}_{index:04d}{ext}"
        write_frame(target, frame)
        paths.append(target)
    manifest = directory / f"{stem}.txt"
    write_manifest(manifest, paths)
    return manifest
