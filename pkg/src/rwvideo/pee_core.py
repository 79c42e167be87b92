"""Per-pixel prediction-error expansion and its inverse.

The ``_``-prefixed functions are numba kernels shared with the frame walk in
:mod:`rwvideo.codec_pipeline`; the public functions wrap them for Python use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from numba import njit

from .errors import CorruptStream, MissingFlag

T_MIN = 1
T_MAX = 8

EMBEDDED = 0
SHIFTED = 1
SKIPPED = 2
UNCHANGED = 3


class Outcome(enum.IntEnum):
    EMBEDDED = EMBEDDED
    SHIFTED = SHIFTED
    SKIPPED = SKIPPED
    UNCHANGED = UNCHANGED


@dataclass(frozen=True)
class PixelOutcome:
    tag: Outcome
    new_value: int
    bit: int | None = None
    needs_flag: bool = False
    flag_value: int | None = None


def check_threshold(t: int) -> int:
    if not T_MIN <= t <= T_MAX:
        raise ValueError(f"threshold must be in [{T_MIN}, {T_MAX}], got {t}")
    return int(t)


@njit(cache=True)
def _is_ambiguous(v, t):
    return v <= t - 2 or v >= 256 - t


@njit(cache=True)
def _embed_pixel(x, xhat, t, b):
    e = x - xhat
    if -t < e < t:
        cand = x + e + b
        tag = EMBEDDED
    elif e >= t:
        cand = x + t
        tag = SHIFTED
    else:
        cand = x - (t - 1)
        tag = SHIFTED
    if cand < 0 or cand > 255:
        return SKIPPED, x
    return tag, cand


@njit(cache=True)
def _classify(xw, xhat, t, flag):
    # flag: -1 when the pixel is not ambiguous
    if flag == 0:
        return UNCHANGED
    e = xw - xhat
    if -2 * t + 2 <= e <= 2 * t - 1:
        return EMBEDDED
    return SHIFTED


@njit(cache=True)
def _recover(xw, xhat, t, cls):
    """Return (original, bit); bit is -1 when the pixel carried none."""
    if cls == UNCHANGED:
        return xw, -1
    e = xw - xhat
    if cls == EMBEDDED:
        b = e % 2  # floored mod keeps b in {0, 1} for negative e
        return (xw + xhat - b) // 2, b
    if e >= 2 * t:
        return xw - t, -1
    return xw + (t - 1), -1


def prediction_error(x: int, xhat: int) -> int:
    return int(x) - int(xhat)


def is_ambiguous(v: int, t: int) -> bool:
    """True when ``v`` could be an overflow-skipped pixel at threshold ``t``."""
    return bool(_is_ambiguous(int(v), int(t)))


def embed_pixel(x: int, xhat: int, t: int, b: int | None = None) -> PixelOutcome:
    """Expand, shift or skip one sample.

    ``b`` is required whenever the prediction error is small enough to carry
    a bit; otherwise it is ignored.
    """
    x, xhat, t = int(x), int(xhat), check_threshold(t)
    embeddable = abs(x - xhat) < t
    if embeddable and b not in (0, 1):
        raise ValueError("an embeddable pixel needs a payload bit")
    tag, new_value = _embed_pixel(x, xhat, t, int(b) if embeddable else 0)
    if tag == SKIPPED:
        return PixelOutcome(Outcome.SKIPPED, int(new_value), None, True, 0)
    needs_flag = is_ambiguous(new_value, t)
    return PixelOutcome(
        Outcome(tag),
        int(new_value),
        int(b) if tag == EMBEDDED else None,
        needs_flag,
        1 if needs_flag else None,
    )


def classify_extract(xw: int, xhat: int, t: int, flag: int | None = None) -> Outcome:
    xw, xhat, t = int(xw), int(xhat), check_threshold(t)
    if is_ambiguous(xw, t):
        if flag is None:
            raise MissingFlag(f"value {xw} is ambiguous at t={t} but no flag is available")
        if flag not in (0, 1):
            raise ValueError("flag must be 0 or 1")
    elif flag is not None:
        raise ValueError(f"value {xw} is not ambiguous at t={t}; no flag expected")
    return Outcome(_classify(xw, xhat, t, -1 if flag is None else int(flag)))


def recover_pixel(xw: int, xhat: int, t: int, cls: Outcome) -> tuple[int, int | None]:
    """Undo :func:`embed_pixel` for a pixel classified as ``cls``."""
    xw, xhat, t = int(xw), int(xhat), check_threshold(t)
    if cls == Outcome.SKIPPED:
        cls = Outcome.UNCHANGED
    if (xw + xhat - ((xw - xhat) % 2)) % 2:
        raise CorruptStream("non-integer reconstruction")  # unreachable on valid input
    x, b = _recover(xw, xhat, t, int(cls))
    if not 0 <= x <= 255:
        raise CorruptStream(f"reconstructed value {x} is out of range")
    return int(x), (None if b < 0 else int(b))
