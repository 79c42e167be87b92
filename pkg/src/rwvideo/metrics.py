"""Capacity and distortion measures, and the capacity-distortion sweep."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DimensionMismatch
from .video_model import FrameSequence, WatermarkLogo

GROUP_SIZE = 6
PEAK = 255.0


def bpp(n_bits: int, width: int, height: int) -> float:
    """Payload bits per frame pixel."""
    if width < 1 or height < 1:
        raise ValueError("frame dimensions must be positive")
    return n_bits / (width * height)


def _data(seq) -> np.ndarray:
    return seq.data if isinstance(seq, FrameSequence) else np.asarray(seq)


def mse(original, watermarked) -> float:
    a, b = _data(original), _data(watermarked)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    diff = a.astype(np.int64) - b.astype(np.int64)
    return float(np.mean(diff * diff))


def psnr(original, watermarked) -> float:
    """Sequence PSNR in dB; ``math.inf`` for identical inputs."""
    err = mse(original, watermarked)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def frame_groups(n_frames: int, size: int = GROUP_SIZE) -> list[range]:
    """Consecutive groups of ``size`` frames; a short remainder joins the last group."""
    if n_frames < 1:
        return []
    n_groups = max(1, n_frames // size)
    groups = [range(g * size, (g + 1) * size) for g in range(n_groups)]
    groups[-1] = range(groups[-1].start, n_frames)
    return groups


def group_psnrs(original, watermarked, size: int = GROUP_SIZE) -> list[float]:
    a, b = _data(original), _data(watermarked)
    return [psnr(a[g.start : g.stop], b[g.start : g.stop]) for g in frame_groups(len(a), size)]


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


def balanced_logo(width: int, height: int, ones_fraction: float = 0.49, seed: int = 0) -> WatermarkLogo:
    """Binary logo with exactly round(ones_fraction * size) ones, deterministically shuffled."""
    size = width * height
    n_ones = int(round(ones_fraction * size))
    bits = np.zeros(size, dtype=np.uint8)
    bits[:n_ones] = 1
    np.random.default_rng(seed).shuffle(bits)
    return WatermarkLogo(bits.reshape(height, width))


@dataclass
class SweepRow:
    logo_width: int
    logo_height: int
    bits: int
    bpp: float
    psnr: float = math.nan
    group_psnrs: list[float] = field(default_factory=list)
    t_max: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def capacity_distortion_sweep(
    seq: FrameSequence,
    sizes,
    t_max: int = 8,
    seed: int = 0,
) -> list[SweepRow]:
    """Embed a balanced logo of each (width, height) and record BPP and PSNR.

    Sizes that do not fit are reported as failed rows.
    """
    from .codec_pipeline import embed_sequence

    rows = []
    for w, h in sizes:
        logo = balanced_logo(w, h, seed=seed)
        row = SweepRow(w, h, w * h, bpp(w * h, seq.width, seq.height))
        try:
            wseq, _, report = embed_sequence(seq, logo, t_max=t_max)
        except CapacityError as exc:
            row.status = f"failed: {exc}"
        else:
            row.psnr = report.psnr
            row.group_psnrs = group_psnrs(seq, wseq)
            row.t_max = report.t_max
        rows.append(row)
    return rows


def write_sweep_csv(rows: list[SweepRow], fh) -> None:
    n_groups = max((len(r.group_psnrs) for r in rows), default=0)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(
        ["logo_w", "logo_h", "bits", "bpp", "psnr_db"]
        + [f"group{g + 1}_psnr_db" for g in range(n_groups)]
        + ["status"]
    )
    for r in rows:
        groups = [format_db(v) for v in r.group_psnrs]
        groups += [""] * (n_groups - len(groups))
        writer.writerow(
            [r.logo_width, r.logo_height, r.bits, f"{r.bpp:.6f}",
             format_db(r.psnr) if r.ok else ""]
            + groups
            + [r.status]
        )


def max_payload(seq: FrameSequence, t: int, seed: int = 0) -> int:
    """Largest balanced payload that every frame accepts at fixed threshold ``t``.

    The last two frames predict from already watermarked predecessors, so
    their capacity depends on the payload length; the estimate is lowered
    until a full codec-order pass succeeds.
    """
    from .codec_pipeline import embed_frame, frame_capacity, walk_order
    from .errors import FrameCapacityExceeded

    n_walk = len(walk_order(seq.width, seq.height)[0])
    probe = balanced_logo(n_walk + 1, 1, seed=seed).payload
    cap = min(frame_capacity(seq.data, k, t, probe) for k in range(seq.n_frames))
    while cap > 0:
        work = seq.copy()
        for k in range(seq.n_frames):
            snapshot = work.data[k].copy()
            try:
                embed_frame(work.data, k, probe[:cap], t)
            except FrameCapacityExceeded:
                work.data[k] = snapshot
                cap = min(cap - 1, frame_capacity(work.data, k, t, probe))
                break
        else:
            return cap
    return 0
