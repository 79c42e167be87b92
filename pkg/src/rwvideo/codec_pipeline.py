"""Frame and sequence level embedding and extraction.

A frame is walked over its dot pixels and then its cross pixels. Every
pixel is predicted, then expanded, shifted or left alone, and the result is
written back in place. Overflow-prone pixels queue a flag bit on a LIFO stack;
pending flags take priority over payload bits in the next pixel able to carry
one. Extraction replays the walk backwards from the last embedded pixel,
which turns the flag stack into "the most recently extracted unconsumed bit".
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numba import njit

from .errors import (
    CapacityExceeded,
    CorruptStream,
    DimensionMismatch,
    EmptyLogo,
    FrameCapacityExceeded,
    HeaderMismatch,
    MalformedRecord,
    MalformedSidecar,
    MissingFlag,
    PayloadDisagreement,
    RecordOutOfBounds,
)
from .pee_core import (
    EMBEDDED,
    SHIFTED,
    SKIPPED,
    T_MAX,
    T_MIN,
    UNCHANGED,
    _classify,
    _embed_pixel,
    _is_ambiguous,
    _recover,
    check_threshold,
)
from .predictor import _adaptive_predict
from .video_model import (
    FrameSequence,
    ParitySet,
    WatermarkLogo,
    context_frames,
    traversal_array,
)

MAGIC = 0x52574D31  # "RWM1"
VERSION = 1
_HEADER = struct.Struct(">IHHIIIII")

ROW_BITS = 9
COL_BITS = 10
T_BITS = 3
MAX_ROW = (1 << ROW_BITS) - 1
MAX_COL = (1 << COL_BITS) - 1

_OK = 0
_MISSING_FLAG = 1
_CORRUPT = 2


@dataclass(frozen=True)
class SidecarRecord:
    """Where extraction of one frame starts, packed into a 32-bit word.

    Layout, most significant bit first: row (9) | col (10) | t-1 (3) |
    set (1) | reserved zero (9).
    """

    row: int
    col: int
    t: int
    parity: ParitySet

    def __post_init__(self):
        if not 0 <= self.row <= MAX_ROW or not 0 <= self.col <= MAX_COL:
            raise MalformedRecord(f"coordinate ({self.row}, {self.col}) does not fit the record")
        if not T_MIN <= self.t <= T_MAX:
            raise MalformedRecord(f"threshold {self.t} does not fit the record")
        object.__setattr__(self, "parity", ParitySet(self.parity))

    def pack(self) -> int:
        return (
            (self.row << 23)
            | (self.col << 13)
            | ((self.t - 1) << 10)
            | (int(self.parity) << 9)
        )

    @classmethod
    def unpack(cls, word: int) -> SidecarRecord:
        if not 0 <= word <= 0xFFFFFFFF:
            raise MalformedRecord(f"record {word!r} is not a 32-bit word")
        if word & 0x1FF:
            raise MalformedRecord(f"record {word:#010x} has non-zero reserved bits")
        return cls(
            row=(word >> 23) & MAX_ROW,
            col=(word >> 13) & MAX_COL,
            t=((word >> 10) & 0x7) + 1,
            parity=ParitySet((word >> 9) & 1),
        )


@dataclass
class SidecarFile:
    n_frames: int
    width: int
    height: int
    logo_width: int
    logo_height: int
    records: list[SidecarRecord] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        if len(self.records) != self.n_frames:
            raise MalformedSidecar(
                f"{len(self.records)} records for {self.n_frames} frames"
            )
        head = _HEADER.pack(
            MAGIC, VERSION, 0, self.n_frames, self.width, self.height,
            self.logo_width, self.logo_height,
        )
        body = struct.pack(f">{self.n_frames}I", *(r.pack() for r in self.records))
        return head + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> SidecarFile:
        if len(blob) < _HEADER.size:
            raise MalformedSidecar(f"sidecar is {len(blob)} bytes, header needs {_HEADER.size}")
        magic, version, _reserved, n, w, h, lw, lh = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise MalformedSidecar(f"bad magic {magic:#010x}")
        if version != VERSION:
            raise MalformedSidecar(f"unsupported sidecar version {version}")
        if len(blob) != _HEADER.size + 4 * n:
            raise MalformedSidecar(
                f"sidecar declares {n} records but holds {len(blob) - _HEADER.size} bytes of them"
            )
        words = struct.unpack_from(f">{n}I", blob, _HEADER.size)
        return cls(n, w, h, lw, lh, [SidecarRecord.unpack(wd) for wd in words])

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def read(cls, path) -> SidecarFile:
        return cls.from_bytes(Path(path).read_bytes())


@dataclass
class FrameResult:
    """Bookkeeping for one successfully embedded frame."""

    frame: int
    t: int
    row: int
    col: int
    parity: ParitySet
    last_step: int  # index of the last embedded pixel in walk order
    payload_bits: int
    flag_bits: int
    shifted: int
    skipped: int

    @property
    def record(self) -> SidecarRecord:
        return SidecarRecord(self.row, self.col, self.t, self.parity)


@dataclass
class FrameTrace:
    """Per-pixel log of one walk, in the order the pixels were visited.

    ``tag`` uses the pee_core outcome codes; extraction reports a skipped
    pixel as UNCHANGED. ``bit`` is -1 for pixels that carried none.
    """

    frame: int
    coords: np.ndarray
    xhat: np.ndarray
    tag: np.ndarray
    bit: np.ndarray


@dataclass
class EmbedReport:
    frames: list[FrameResult]
    width: int
    height: int
    logo_bits: int
    bpp: float
    psnr: float

    @property
    def t_max(self) -> int:
        return max(f.t for f in self.frames)


@lru_cache(maxsize=32)
def walk_order(width: int, height: int) -> tuple[np.ndarray, int]:
    """Dot then cross interior pixels as one (n, 2) array, plus the dot count."""
    dot = traversal_array(width, height, ParitySet.DOT)
    cross = traversal_array(width, height, ParitySet.CROSS)
    coords = np.concatenate([dot, cross])
    coords.setflags(write=False)
    return coords, len(dot)


@njit(cache=True)
def _embed_walk(state, k, ka, kb, coords, payload, t, tr_xhat, tr_tag, tr_bit):
    """Returns (last_step or -1, payload used, flags pending, flags embedded,
    shifted, skipped, capacity mark)."""
    n = coords.shape[0]
    length = payload.shape[0]
    stack = np.empty(n + 1, dtype=np.uint8)
    sp = 0
    pos = 0
    flags_embedded = 0
    shifted = 0
    skipped = 0
    cap_mark = 0
    for step in range(n):
        i = coords[step, 0]
        j = coords[step, 1]
        x = np.int64(state[k, i, j])
        xhat = _adaptive_predict(state, k, ka, kb, i, j)
        e = x - xhat
        b = 0
        from_stack = False
        if -t < e < t:
            if sp > 0:
                b = stack[sp - 1]
                from_stack = True
            else:
                b = payload[pos]
        tag, newv = _embed_pixel(x, xhat, t, np.int64(b))
        state[k, i, j] = newv
        tr_xhat[step] = xhat
        tr_tag[step] = tag
        tr_bit[step] = -1
        if tag == EMBEDDED:
            tr_bit[step] = b
            if from_stack:
                sp -= 1
                flags_embedded += 1
            else:
                pos += 1
        elif tag == SHIFTED:
            shifted += 1
        if tag == SKIPPED:
            skipped += 1
            stack[sp] = 0
            sp += 1
        elif _is_ambiguous(newv, t):
            stack[sp] = 1
            sp += 1
        if sp == 0:
            cap_mark = pos
            if pos == length:
                return step, pos, sp, flags_embedded, shifted, skipped, cap_mark
    return -1, pos, sp, flags_embedded, shifted, skipped, cap_mark


@njit(cache=True)
def _extract_walk(state, k, ka, kb, coords, last_step, t, bits, tr_xhat, tr_tag, tr_bit):
    """Returns (status, bit count, failing step). ``bits`` holds extracted bits
    in extraction order; the surviving prefix reversed is the payload."""
    nb = 0
    for n_done in range(last_step + 1):
        step = last_step - n_done
        i = coords[step, 0]
        j = coords[step, 1]
        xw = np.int64(state[k, i, j])
        xhat = _adaptive_predict(state, k, ka, kb, i, j)
        flag = -1
        if _is_ambiguous(xw, t):
            if nb == 0:
                return _MISSING_FLAG, nb, step
            nb -= 1
            flag = bits[nb]
        cls = _classify(xw, xhat, t, flag)
        x, b = _recover(xw, xhat, t, cls)
        if x < 0 or x > 255:
            return _CORRUPT, nb, step
        if cls == UNCHANGED:
            # only a pixel whose change would overflow may be left alone
            e = x - xhat
            if -t < e < t:
                lo = x + e
                if 0 <= lo and lo + 1 <= 255:
                    return _CORRUPT, nb, step
            elif e >= t:
                if x + t <= 255:
                    return _CORRUPT, nb, step
            elif x - (t - 1) >= 0:
                return _CORRUPT, nb, step
        state[k, i, j] = x
        tr_xhat[n_done] = xhat
        tr_tag[n_done] = cls
        tr_bit[n_done] = b
        if cls == EMBEDDED:
            bits[nb] = b
            nb += 1
    return _OK, nb, -1


def embed_frame(state, k: int, payload, t: int, trace: list | None = None) -> FrameResult:
    """Embed ``payload`` into frame ``k`` of ``state`` in place at threshold ``t``.

    Raises FrameCapacityExceeded when the walk ends with payload bits or flags
    still pending; ``state`` is then partially modified and must be restored
    by the caller. A failed walk still appends its full trace.
    """
    data = state.data if isinstance(state, FrameSequence) else state
    t = check_threshold(t)
    bits = np.ascontiguousarray(payload, dtype=np.uint8).ravel()
    if bits.size == 0:
        raise EmptyLogo("payload is empty")
    n_frames, height, width = data.shape
    ka, kb = context_frames(k, n_frames)
    coords, n_dot = walk_order(width, height)
    n = len(coords)
    tr_xhat = np.empty(n, dtype=np.int64)
    tr_tag = np.empty(n, dtype=np.int8)
    tr_bit = np.empty(n, dtype=np.int8)
    last, used, pending, flags, shifted, skipped, _ = _embed_walk(
        data, k, ka, kb, coords, bits, t, tr_xhat, tr_tag, tr_bit
    )
    if trace is not None:
        m = last + 1 if last >= 0 else n
        trace.append(FrameTrace(k, coords[:m], tr_xhat[:m], tr_tag[:m], tr_bit[:m]))
    if last < 0:
        raise FrameCapacityExceeded(k, t, bits.size - used, pending)
    row, col = (int(v) for v in coords[last])
    return FrameResult(
        frame=k,
        t=t,
        row=row,
        col=col,
        parity=ParitySet.DOT if last < n_dot else ParitySet.CROSS,
        last_step=int(last),
        payload_bits=int(used),
        flag_bits=int(flags),
        shifted=int(shifted),
        skipped=int(skipped),
    )


def frame_capacity(state, k: int, t: int, payload) -> int:
    """Largest prefix of ``payload`` that frame ``k`` can carry at threshold ``t``.

    Works on a copy. The walk for a prefix is identical to the walk for the
    full payload until the prefix runs out, so one pass suffices.
    """
    data = (state.data if isinstance(state, FrameSequence) else state).copy()
    bits = np.ascontiguousarray(payload, dtype=np.uint8).ravel()
    n_frames, height, width = data.shape
    ka, kb = context_frames(k, n_frames)
    coords, _ = walk_order(width, height)
    n = len(coords)
    if bits.size < n + 1:
        raise ValueError("capacity probe needs a payload longer than the walk")
    scratch = np.empty(n, dtype=np.int64), np.empty(n, dtype=np.int8), np.empty(n, dtype=np.int8)
    *_, cap = _embed_walk(data, k, ka, kb, coords, bits, check_threshold(t), *scratch)
    return int(cap)


def _check_embeddable_dims(seq: FrameSequence) -> None:
    if seq.height - 3 > MAX_ROW or seq.width - 3 > MAX_COL:
        raise DimensionMismatch(
            f"{seq.width}x{seq.height} frames exceed the record's coordinate range"
        )


def embed_sequence(
    seq: FrameSequence,
    logo: WatermarkLogo,
    t_max: int = T_MAX,
    trace: list | None = None,
) -> tuple[FrameSequence, SidecarFile, EmbedReport]:
    """Embed the whole logo into every frame; ``seq`` itself is left untouched.

    Frames are processed first to last. Each frame starts at t=1 and is
    restored and retried with t+1 until the logo fits or ``t_max`` fails.
    """
    from .metrics import bpp, psnr

    t_max = check_threshold(t_max)
    context_frames(0, seq.n_frames)  # raises SequenceTooShort
    if len(logo) == 0:
        raise EmptyLogo("logo is empty")
    _check_embeddable_dims(seq)
    work = seq.copy()
    payload = logo.payload
    results = []
    for k in range(seq.n_frames):
        snapshot = work.data[k].copy()
        for t in range(T_MIN, t_max + 1):
            attempt = [] if trace is not None else None
            try:
                res = embed_frame(work.data, k, payload, t, trace=attempt)
            except FrameCapacityExceeded:
                work.data[k] = snapshot
                continue
            if trace is not None:
                trace.extend(attempt)
            results.append(res)
            break
        else:
            raise CapacityExceeded(k, t_max)
    sidecar = SidecarFile(
        seq.n_frames, seq.width, seq.height, logo.width, logo.height,
        [r.record for r in results],
    )
    report = EmbedReport(
        frames=results,
        width=seq.width,
        height=seq.height,
        logo_bits=len(logo),
        bpp=bpp(len(logo), seq.width, seq.height),
        psnr=psnr(seq, work),
    )
    return work, sidecar, report


def _record_step(record: SidecarRecord, width: int, height: int) -> int:
    coords, n_dot = walk_order(width, height)
    if record.parity == ParitySet.DOT:
        part, offset = coords[:n_dot], 0
    else:
        part, offset = coords[n_dot:], n_dot
    hit = np.flatnonzero((part[:, 0] == record.row) & (part[:, 1] == record.col))
    if hit.size == 0:
        raise RecordOutOfBounds(
            f"({record.row}, {record.col}) is not an interior {record.parity.name} pixel "
            f"of a {width}x{height} frame"
        )
    return offset + int(hit[0])


def extract_frame(state, k: int, record: SidecarRecord, trace: list | None = None):
    """Restore frame ``k`` of ``state`` in place and return its payload bits."""
    data = state.data if isinstance(state, FrameSequence) else state
    n_frames, height, width = data.shape
    ka, kb = context_frames(k, n_frames)
    last = _record_step(record, width, height)
    coords, _ = walk_order(width, height)
    m = last + 1
    bits = np.empty(m, dtype=np.uint8)
    tr_xhat = np.empty(m, dtype=np.int64)
    tr_tag = np.empty(m, dtype=np.int8)
    tr_bit = np.empty(m, dtype=np.int8)
    status, nb, bad = _extract_walk(
        data, k, ka, kb, coords, last, record.t, bits, tr_xhat, tr_tag, tr_bit
    )
    if status == _MISSING_FLAG:
        r, c = coords[bad]
        raise MissingFlag(f"frame {k}: no flag bit left for pixel ({r}, {c})")
    if status == _CORRUPT:
        r, c = coords[bad]
        raise CorruptStream(f"frame {k}: pixel ({r}, {c}) cannot be reconstructed")
    if trace is not None:
        trace.append(FrameTrace(k, coords[last::-1], tr_xhat, tr_tag, tr_bit))
    return bits[:nb][::-1].copy(), data[k]


def extract_sequence(
    wseq: FrameSequence, sidecar: SidecarFile, trace: list | None = None
) -> tuple[FrameSequence, WatermarkLogo]:
    """Recover the original frames and the logo; ``wseq`` is left untouched.

    Frames are restored last to first so every frame sees its partner frames
    exactly as they were when it was embedded.
    """
    if (sidecar.n_frames, sidecar.width, sidecar.height) != (
        wseq.n_frames, wseq.width, wseq.height
    ):
        raise HeaderMismatch(
            f"sidecar describes {sidecar.n_frames} frames of {sidecar.width}x{sidecar.height}, "
            f"video has {wseq.n_frames} frames of {wseq.width}x{wseq.height}"
        )
    if len(sidecar.records) != wseq.n_frames:
        raise HeaderMismatch("record count does not match the frame count")
    expected = sidecar.logo_width * sidecar.logo_height
    if expected == 0:
        raise HeaderMismatch("sidecar declares an empty logo")
    work = wseq.copy()
    payload = None
    for k in range(wseq.n_frames - 1, -1, -1):
        bits, _ = extract_frame(work.data, k, sidecar.records[k], trace=trace)
        if bits.size != expected:
            raise PayloadDisagreement(
                f"frame {k} carries {bits.size} bits, header expects {expected}"
            )
        if payload is None:
            payload = bits
        elif not np.array_equal(payload, bits):
            raise PayloadDisagreement(f"frame {k} payload differs from frame {k + 1}")
    logo = WatermarkLogo.from_payload(payload, sidecar.logo_width, sidecar.logo_height)
    return work, logo
