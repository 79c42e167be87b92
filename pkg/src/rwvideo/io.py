"""Netpbm and raw frame I/O, logo files and the synthetic test corpus."""

from __future__ import annotations

import glob
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import (
    InvalidSpec,
    MalformedPBM,
    MalformedPGM,
    MixedDimensions,
    SizeMismatch,
)
from .video_model import FrameSequence, WatermarkLogo

_WS = b" \t\n\r\v\f"

# 64-bit LCG (Knuth's MMIX constants); each sample is the top byte of the state
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407

RECT_BACKGROUND = 40
RECT_FOREGROUND = 200


def _parse_header(blob: bytes, n_fields: int, error):
    """Read ``n_fields`` decimal header fields after the magic number, skipping
    ``#`` comments. Returns the fields and the offset of the raster."""
    pos = 2
    fields = []
    while len(fields) < n_fields:
        if pos >= len(blob):
            raise error("truncated header")
        ch = blob[pos]
        if ch == ord("#"):
            end = blob.find(b"\n", pos)
            if end < 0:
                raise error("unterminated comment in header")
            pos = end + 1
        elif ch in _WS:
            pos += 1
        else:
            start = pos
            while pos < len(blob) and blob[pos] not in _WS and blob[pos] != ord("#"):
                pos += 1
            tok = blob[start:pos]
            if not tok.isdigit():
                raise error(f"non-numeric header field {tok!r}")
            fields.append(int(tok))
    # a single whitespace byte separates the header from the raster
    if pos >= len(blob) or blob[pos] not in _WS:
        raise error("missing whitespace after header")
    return fields, pos + 1


def decode_pgm(blob: bytes) -> np.ndarray:
    if blob[:2] != b"P5":
        raise MalformedPGM(f"expected binary PGM magic P5, got {blob[:2]!r}")
    (width, height, maxval), offset = _parse_header(blob, 3, MalformedPGM)
    if width < 1 or height < 1:
        raise MalformedPGM(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise MalformedPGM(f"only 8-bit PGM (maxval 255) is supported, got maxval {maxval}")
    raster = blob[offset:]
    if len(raster) != width * height:
        raise MalformedPGM(f"raster holds {len(raster)} bytes, expected {width * height}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(samples: np.ndarray) -> bytes:
    samples = np.ascontiguousarray(samples, dtype=np.uint8)
    height, width = samples.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + samples.tobytes()


def decode_pbm(blob: bytes) -> np.ndarray:
    if blob[:2] != b"P4":
        raise MalformedPBM(f"expected binary PBM magic P4, got {blob[:2]!r}")
    (width, height), offset = _parse_header(blob, 2, MalformedPBM)
    if width < 1 or height < 1:
        raise MalformedPBM(f"invalid dimensions {width}x{height}")
    stride = (width + 7) // 8
    raster = blob[offset:]
    if len(raster) != stride * height:
        raise MalformedPBM(f"raster holds {len(raster)} bytes, expected {stride * height}")
    packed = np.frombuffer(raster, dtype=np.uint8).reshape(height, stride)
    return np.unpackbits(packed, axis=1)[:, :width].copy()


def encode_pbm(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    height, width = bits.shape
    return f"P4\n{width} {height}\n".encode("ascii") + np.packbits(bits, axis=1).tobytes()


def read_logo(path) -> WatermarkLogo:
    path = Path(path)
    try:
        return WatermarkLogo(decode_pbm(path.read_bytes()))
    except MalformedPBM as exc:
        raise MalformedPBM(f"{path}: {exc}") from None


def write_logo(logo: WatermarkLogo, path) -> None:
    Path(path).write_bytes(encode_pbm(logo.bits))


def _frame_index(path: str) -> tuple:
    nums = re.findall(r"\d+", os.path.basename(path))
    return (int(nums[-1]) if nums else -1, path)


def _list_frames(source: str) -> list[str]:
    if os.path.isdir(source):
        paths = glob.glob(os.path.join(source, "*.pgm"))
    elif "%" in source:
        paths = []
        start = 0 if os.path.exists(source % 0) else 1
        idx = start
        while os.path.exists(source % idx):
            paths.append(source % idx)
            idx += 1
    else:
        paths = glob.glob(source)
    return sorted(paths, key=_frame_index)


def is_raw_path(source) -> bool:
    return str(source).lower().endswith((".raw", ".y", ".gray"))


def read_raw(path, width: int, height: int, n_frames: int) -> FrameSequence:
    blob = Path(path).read_bytes()
    if len(blob) != n_frames * width * height:
        raise SizeMismatch(
            f"{path}: {len(blob)} bytes, expected {n_frames}x{width}x{height} = "
            f"{n_frames * width * height}"
        )
    return FrameSequence(np.frombuffer(blob, dtype=np.uint8).reshape(n_frames, height, width).copy())


def read_sequence(source, dims: tuple[int, int] | None = None, n_frames: int | None = None) -> FrameSequence:
    """Load frames from a directory of PGMs, a printf pattern, a glob, or a raw file.

    Raw files need ``dims`` as (width, height) and ``n_frames``.
    """
    source = str(source)
    if dims is not None or is_raw_path(source):
        if dims is None or n_frames is None:
            raise SizeMismatch(f"{source}: raw input needs frame dimensions and a frame count")
        return read_raw(source, dims[0], dims[1], n_frames)
    paths = _list_frames(source)
    if not paths:
        raise FileNotFoundError(f"no PGM frames found at {source}")
    frames = []
    for p in paths:
        try:
            frames.append(decode_pgm(Path(p).read_bytes()))
        except MalformedPGM as exc:
            raise MalformedPGM(f"{p}: {exc}") from None
        if frames[-1].shape != frames[0].shape:
            raise MixedDimensions(
                f"{p} is {frames[-1].shape[1]}x{frames[-1].shape[0]}, "
                f"{paths[0]} is {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
    return FrameSequence(np.stack(frames))


def write_sequence(seq: FrameSequence, target) -> list[Path]:
    """Write frames as PGMs (directory or printf pattern) or as one raw file."""
    if seq is None or seq.n_frames == 0:
        raise ValueError("refusing to write an empty sequence")
    target = str(target)
    if is_raw_path(target):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_bytes(seq.data.tobytes())
        return [Path(target)]
    if "%" in target:
        paths = [Path(target % k) for k in range(seq.n_frames)]
    else:
        paths = [Path(target) / f"frame_{k:04d}.pgm" for k in range(seq.n_frames)]
    for path, frame in zip(paths, seq.data):
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(encode_pgm(frame))
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return paths


@dataclass(frozen=True)
class CorpusSpec:
    """Synthetic sequence description.

    kind is one of ``constant``, ``h-ramp``, ``v-ramp``, ``moving-rect`` and
    ``noise``. ``level`` applies to constant; ``speed`` and ``size`` to
    moving-rect (size 0 picks a quarter of the smaller side); ``seed`` to noise.
    """

    kind: str
    n_frames: int
    width: int
    height: int
    level: int = 100
    speed: int = 1
    size: int = 0
    seed: int = 1


KINDS = ("constant", "h-ramp", "v-ramp", "moving-rect", "noise")


@njit(cache=True)
def _lcg_bytes(seed, count):
    out = np.empty(count, dtype=np.uint8)
    state = np.uint64(seed)
    a = np.uint64(LCG_MULTIPLIER)
    c = np.uint64(LCG_INCREMENT)
    for n in range(count):
        state = state * a + c
        out[n] = np.uint8(state >> np.uint64(56))
    return out


def lcg_bytes(seed: int, count: int) -> np.ndarray:
    """``count`` bytes from the corpus LCG: s <- s*a + c mod 2**64, emit s >> 56."""
    return _lcg_bytes(seed & 0xFFFFFFFFFFFFFFFF, count)


def generate_corpus(spec: CorpusSpec) -> FrameSequence:
    n, w, h = spec.n_frames, spec.width, spec.height
    if n < 1 or w < 1 or h < 1:
        raise InvalidSpec(f"invalid corpus shape {n}x{w}x{h}")
    if spec.kind == "constant":
        if not 0 <= spec.level <= 255:
            raise InvalidSpec(f"level {spec.level} outside [0, 255]")
        data = np.full((n, h, w), spec.level, dtype=np.uint8)
    elif spec.kind == "h-ramp":
        row = np.minimum(np.arange(w), 255).astype(np.uint8)
        data = np.broadcast_to(row, (n, h, w)).copy()
    elif spec.kind == "v-ramp":
        col = np.minimum(np.arange(h), 255).astype(np.uint8)[:, None]
        data = np.broadcast_to(col, (n, h, w)).copy()
    elif spec.kind == "moving-rect":
        size = spec.size or max(1, min(w, h) // 4)
        if size > w or size > h or size < 1:
            raise InvalidSpec(f"rectangle of side {size} does not fit a {w}x{h} frame")
        if spec.speed < 0:
            raise InvalidSpec("speed must be non-negative")
        data = np.full((n, h, w), RECT_BACKGROUND, dtype=np.uint8)
        top = (h - size) // 2
        for k in range(n):
            # the rectangle travels right and wraps around the frame edge
            cols = (np.arange(size) + (w - size) // 4 + spec.speed * k) % w
            data[k, top : top + size, cols] = RECT_FOREGROUND
    elif spec.kind == "noise":
        data = lcg_bytes(spec.seed, n * w * h).reshape(n, h, w)
    else:
        raise InvalidSpec(f"unknown corpus kind {spec.kind!r}; expected one of {KINDS}")
    return FrameSequence(data)
