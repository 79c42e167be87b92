"""Adaptive least-squares spatiotemporal predictor.

Each interior pixel is predicted from six context samples: its four rhombus
neighbours and the co-located samples in the two partner frames. The weights
come from a 6x6 least-squares system whose rows are the contexts of those six
context pixels. Wherever the pixel being predicted would appear inside that
system it is replaced by a fixed five-tap estimate, so the prediction never
depends on the pixel's own value and extraction can reproduce it exactly.

All arithmetic runs in numba-compiled scalar loops with a fixed evaluation
order; embedding and extraction call the same kernels, so predictions agree
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .video_model import BORDER, FrameSequence, PixelCoord, context_frames

ORDER = 6
PIVOT_EPS = 1e-9


class SingularSystem:
    """Returned by :func:`solve_coefficients` when a pivot falls below ``PIVOT_EPS``."""

    def __repr__(self):
        return "SINGULAR"


SINGULAR = SingularSystem()


@dataclass(frozen=True)
class TrainingSystem:
    X: np.ndarray  # (6, 6) float64
    y: np.ndarray  # (6,) float64


@njit(cache=True)
def _fixed_estimate(state, k, ka, i, j):
    s = (
        np.int64(state[k, i - 1, j])
        + np.int64(state[k, i + 1, j])
        + np.int64(state[k, i, j - 1])
        + np.int64(state[k, i, j + 1])
        + np.int64(state[ka, i, j])
    )
    # round(s / 5) half away from zero; s >= 0
    p = (2 * s + 5) // 10
    if p < 0:
        p = 0
    elif p > 255:
        p = 255
    return p


@njit(cache=True)
def _gather_context(state, k, ka, kb, i, j, out):
    out[0] = state[k, i - 1, j]
    out[1] = state[k, i + 1, j]
    out[2] = state[k, i, j - 1]
    out[3] = state[k, i, j + 1]
    out[4] = state[ka, i, j]
    out[5] = state[kb, i, j]


@njit(cache=True)
def _sample(state, f, r, c, k, i, j, p):
    if f == k and r == i and c == j:
        return p
    return state[f, r, c]


@njit(cache=True)
def _build_training_system(state, k, ka, kb, i, j, X, y):
    p = _fixed_estimate(state, k, ka, i, j)
    # context pixels in ContextVector order: frame, row, col
    frames = (k, k, k, k, ka, kb)
    rows = (i - 1, i + 1, i, i, i, i)
    cols = (j, j, j - 1, j + 1, j, j)
    for m in range(ORDER):
        f = frames[m]
        r = rows[m]
        c = cols[m]
        # temporal partners of a context pixel: the other two frames of the triple
        if f == k:
            fa, fb = ka, kb
        elif f == ka:
            fa, fb = k, kb
        else:
            fa, fb = k, ka
        X[m, 0] = _sample(state, f, r - 1, c, k, i, j, p)
        X[m, 1] = _sample(state, f, r + 1, c, k, i, j, p)
        X[m, 2] = _sample(state, f, r, c - 1, k, i, j, p)
        X[m, 3] = _sample(state, f, r, c + 1, k, i, j, p)
        X[m, 4] = _sample(state, fa, r, c, k, i, j, p)
        X[m, 5] = _sample(state, fb, r, c, k, i, j, p)
        y[m] = state[f, r, c]
    return p


@njit(cache=True)
def _solve_normal(X, y, V):
    """Solve (X^T X) V = X^T y by Gaussian elimination with partial pivoting.

    Returns False (V undefined) when a pivot magnitude is below PIVOT_EPS or
    the solution is not finite.
    """
    n = X.shape[1]
    rows = X.shape[0]
    A = np.empty((n, n + 1))
    for a in range(n):
        for b in range(n):
            acc = 0.0
            for r in range(rows):
                acc = acc + X[r, a] * X[r, b]
            A[a, b] = acc
        acc = 0.0
        for r in range(rows):
            acc = acc + X[r, a] * y[r]
        A[a, n] = acc

    for col in range(n):
        piv = col
        best = abs(A[col, col])
        for r in range(col + 1, n):
            v = abs(A[r, col])
            if v > best:
                best = v
                piv = r
        if best < PIVOT_EPS:
            return False
        if piv != col:
            for c in range(col, n + 1):
                tmp = A[col, c]
                A[col, c] = A[piv, c]
                A[piv, c] = tmp
        for r in range(col + 1, n):
            f = A[r, col] / A[col, col]
            if f != 0.0:
                for c in range(col, n + 1):
                    A[r, c] = A[r, c] - f * A[col, c]

    for r in range(n - 1, -1, -1):
        acc = A[r, n]
        for c in range(r + 1, n):
            acc = acc - A[r, c] * V[c]
        V[r] = acc / A[r, r]
        if not np.isfinite(V[r]):
            return False
    return True


@njit(cache=True)
def _predict(V, ctx):
    acc = 0.0
    for m in range(ctx.shape[0]):
        acc = acc + V[m] * ctx[m]
    if not acc >= 0.0:  # also catches NaN
        return 0
    if acc >= 255.0:
        return 255
    return np.int64(np.floor(acc))


@njit(cache=True)
def _adaptive_predict(state, k, ka, kb, i, j):
    X = np.empty((ORDER, ORDER))
    y = np.empty(ORDER)
    V = np.empty(ORDER)
    p = _build_training_system(state, k, ka, kb, i, j, X, y)
    if not _solve_normal(X, y, V):
        return p
    ctx = np.empty(ORDER)
    _gather_context(state, k, ka, kb, i, j, ctx)
    return _predict(V, ctx)


def _state_array(state) -> np.ndarray:
    if isinstance(state, FrameSequence):
        return state.data
    arr = np.asarray(state)
    if arr.ndim != 3 or arr.dtype != np.uint8:
        raise TypeError("state must be a FrameSequence or an (N, H, W) uint8 array")
    return arr


def _triple(data: np.ndarray, coord: PixelCoord) -> tuple[int, int, int, int, int]:
    k, i, j = (int(v) for v in coord)
    n, h, w = data.shape
    if not (BORDER <= i < h - BORDER and BORDER <= j < w - BORDER):
        raise ValueError(f"({i}, {j}) is not an interior pixel of a {w}x{h} frame")
    ka, kb = context_frames(k, n)
    return k, ka, kb, i, j


def fixed_estimate(state, coord: PixelCoord) -> int:
    """Rounded mean of the four rhombus neighbours and the primary temporal partner."""
    data = _state_array(state)
    k, ka, _, i, j = _triple(data, coord)
    return int(_fixed_estimate(data, k, ka, i, j))


def gather_context(state, coord: PixelCoord) -> np.ndarray:
    """Context vector [north, south, west, east, temporal-a, temporal-b]."""
    data = _state_array(state)
    ctx = np.empty(ORDER)
    _gather_context(data, *_triple(data, coord), ctx)
    return ctx


def build_training_system(state, coord: PixelCoord) -> TrainingSystem:
    data = _state_array(state)
    X = np.empty((ORDER, ORDER))
    y = np.empty(ORDER)
    _build_training_system(data, *_triple(data, coord), X, y)
    return TrainingSystem(X, y)


def solve_coefficients(system: TrainingSystem) -> np.ndarray | SingularSystem:
    X = np.ascontiguousarray(system.X, dtype=np.float64)
    y = np.ascontiguousarray(system.y, dtype=np.float64)
    V = np.empty(X.shape[1])
    if not _solve_normal(X, y, V):
        return SINGULAR
    return V


def predict(V, ctx) -> int:
    """floor(V . ctx) clamped to [0, 255]."""
    return int(_predict(np.asarray(V, dtype=np.float64), np.asarray(ctx, dtype=np.float64)))


def adaptive_predict(state, coord: PixelCoord) -> int:
    data = _state_array(state)
    return int(_adaptive_predict(data, *_triple(data, coord)))
