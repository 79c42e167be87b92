"""Raster types, checkerboard traversal and the frame-triple rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, EmptyLogo, SequenceTooShort

BORDER = 2


class ParitySet(enum.IntEnum):
    """Checkerboard class of a pixel; the value is the sidecar "set" bit."""

    DOT = 0  # (row + col) even
    CROSS = 1  # (row + col) odd


class PixelCoord(NamedTuple):
    frame: int
    row: int
    col: int


def _as_uint8(samples, ndim: int) -> np.ndarray:
    arr = np.asarray(samples)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return np.ascontiguousarray(arr)


@dataclass(eq=False)
class Frame:
    """One 8-bit luma raster, stored as a (height, width) uint8 array."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = _as_uint8(self.samples, 2)
        if self.samples.size == 0:
            raise DimensionMismatch("frame must have at least one sample")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return np.array_equal(self.samples, other.samples)


@dataclass(eq=False)
class FrameSequence:
    """Equal-sized frames stacked into one contiguous (N, H, W) uint8 array.

    The codec mutates ``data`` in place, so callers that need the input
    afterwards should pass a :meth:`copy`.
    """

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_uint8(self.data, 3)
        if self.data.shape[0] < 1 or self.data.shape[1] < 1 or self.data.shape[2] < 1:
            raise DimensionMismatch(f"empty sequence of shape {self.data.shape}")

    @classmethod
    def from_frames(cls, frames) -> FrameSequence:
        frames = [f if isinstance(f, Frame) else Frame(f) for f in frames]
        if not frames:
            raise DimensionMismatch("a sequence needs at least one frame")
        shape = frames[0].samples.shape
        for idx, f in enumerate(frames):
            if f.samples.shape != shape:
                raise DimensionMismatch(
                    f"frame {idx} is {f.width}x{f.height}, expected {shape[1]}x{shape[0]}"
                )
        return cls(np.stack([f.samples for f in frames]))

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def frames(self) -> list[Frame]:
        return [Frame(f) for f in self.data]

    def __len__(self):
        return self.n_frames

    def __getitem__(self, k) -> Frame:
        return Frame(self.data[k])

    def copy(self) -> FrameSequence:
        return FrameSequence(self.data.copy())

    def __eq__(self, other):
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return np.array_equal(self.data, other.data)


@dataclass(eq=False)
class WatermarkLogo:
    """Binary bitmap; ``bits`` is (height, width) with values in {0, 1}."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or arr.size == 0:
            raise EmptyLogo(f"logo must be a non-empty 2-d bitmap, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("logo bits must be 0 or 1")
        self.bits = np.ascontiguousarray(arr, dtype=np.uint8)

    @classmethod
    def from_payload(cls, payload, width: int, height: int) -> WatermarkLogo:
        payload = np.asarray(payload, dtype=np.uint8)
        if payload.size != width * height:
            raise DimensionMismatch(
                f"{payload.size} bits cannot fill a {width}x{height} logo"
            )
        return cls(payload.reshape(height, width))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def payload(self) -> np.ndarray:
        """Row-major bit string, top-left first."""
        return self.bits.ravel()

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, WatermarkLogo):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


def traversal_order(width: int, height: int, parity: ParitySet) -> list[tuple[int, int]]:
    """Interior pixels of one checkerboard class in raster order."""
    return [tuple(rc) for rc in traversal_array(width, height, parity).tolist()]


@lru_cache(maxsize=64)
def _traversal_cached(width: int, height: int, parity: int) -> np.ndarray:
    rows, cols = np.mgrid[BORDER : height - BORDER, BORDER : width - BORDER]
    mask = (rows + cols) % 2 == parity
    coords = np.stack([rows[mask], cols[mask]], axis=1).astype(np.int64)
    coords.setflags(write=False)
    return coords


def traversal_array(width: int, height: int, parity: ParitySet) -> np.ndarray:
    """Same as :func:`traversal_order` as a read-only (n, 2) int64 array."""
    if width < 1 or height < 1:
        raise ValueError("frame dimensions must be positive")
    if width <= 2 * BORDER or height <= 2 * BORDER:
        return np.empty((0, 2), dtype=np.int64)
    return _traversal_cached(width, height, int(parity))


def context_frames(k: int, n: int) -> tuple[int, int]:
    """Return the two partner frames (primary first) supplying temporal context.

    Frames are read forward while two successors exist; the last two frames
    look backwards. For ``n == 3`` the middle frame has only one predecessor,
    so it pairs its predecessor with its successor.
    """
    if n < 3:
        raise SequenceTooShort(f"temporal prediction needs at least 3 frames, got {n}")
    if not 0 <= k < n:
        raise IndexError(f"frame index {k} outside 0..{n - 1}")
    if k <= n - 3:
        return k + 1, k + 2
    if k - 2 >= 0:
        return k - 1, k - 2
    return k - 1, k + 1
