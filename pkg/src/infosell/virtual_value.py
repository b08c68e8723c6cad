"""Virtual value curves on a discrete type grid and their ironing."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .model import TypeGrid


class BadMixWeight(ValueError):
    pass


def lower_virtual(grid: TypeGrid) -> np.ndarray:
    """t_k - (t_{k+1} - t_k) (1 - F(t_k)) / f(t_k); equals t_N at the top type."""
    return grid.t - grid.gap_next * (1.0 - grid.cdf) / grid.f


def upper_virtual(grid: TypeGrid) -> np.ndarray:
    """t_k + (t_k - t_{k-1}) F(t_{k-1}) / f(t_k); equals t_1 at the bottom type."""
    return grid.t + grid.gap_prev * grid.cdf_before / grid.f


def _check_weight(c: float) -> float:
    c = float(c)
    if not 0.0 <= c <= 1.0:
        raise BadMixWeight(f"mixing weight must lie in [0, 1], got {c!r}")
    return c


def mixed_virtual(grid: TypeGrid, c: float) -> np.ndarray:
    """Convex combination c * lower + (1 - c) * upper."""
    c = _check_weight(c)
    return c * lower_virtual(grid) + (1.0 - c) * upper_virtual(grid)


def split_virtual(grid: TypeGrid, c: float) -> np.ndarray:
    """Grid-exact mixed virtual value used by the optimal mechanism.

    Types with F(t_k) < c are charged the lower-boundary information rent with
    budget share (c - F(t_k)); types with F(t_{k-1}) > c the upper-boundary one
    with share (F(t_{k-1}) - c); the crossing type keeps t_k.  Both this and
    :func:`mixed_virtual` tend to t - (c - F(t)) / f(t) as the grid is refined,
    and the two agree with the lower/upper curves at c = 1 and c = 0.
    """
    c = _check_weight(c)
    below = np.maximum(c - grid.cdf, 0.0)
    above = np.maximum(grid.cdf_before - c, 0.0)
    return grid.t - grid.gap_next * below / grid.f + grid.gap_prev * above / grid.f


@dataclass(frozen=True)
class VirtualCurve:
    kind: str
    c: float | None
    raw: np.ndarray
    ironed: np.ndarray
    z: np.ndarray  # breakpoints 0, F(t_1), ..., F(t_N)
    H: np.ndarray  # integral of the raw curve at the breakpoints
    L: np.ndarray  # its lower convex hull at the breakpoints

    @property
    def pooled(self) -> np.ndarray:
        """Boolean mask of types whose ironed value differs from the raw one."""
        return self.ironed != self.raw


def _pool_blocks(raw: np.ndarray, w: np.ndarray) -> list[tuple[int, int, float, float]]:
    # Monotone chain over the cumulative-sum diagram: each block is a hull edge
    # (start, stop, weight, slope).  Strict comparison keeps collinear vertices.
    blocks: list[tuple[int, int, float, float]] = []
    for i in range(raw.size):
        start, stop, weight, slope = i, i + 1, float(w[i]), float(raw[i])
        while blocks and blocks[-1][3] > slope:
            p_start, _, p_weight, p_slope = blocks.pop()
            total = p_weight + weight
            slope = (p_weight * p_slope + weight * slope) / total
            start, weight = p_start, total
        blocks.append((start, stop, weight, slope))
    return blocks


def iron(raw, grid: TypeGrid, kind: str = "custom", c: float | None = None) -> VirtualCurve:
    """Iron ``raw`` in quantile space.

    H is piecewise linear on the breakpoints z_i = F(t_i) with slope raw(t_i)
    on (z_{i-1}, z_i]; the ironed value of type i is the slope of the lower
    convex hull of H over that cell.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} virtual values, got shape {raw.shape}")
    ironed = np.empty_like(raw)
    for start, stop, _, slope in _pool_blocks(raw, grid.f):
        if stop - start == 1:
            ironed[start] = raw[start]
        else:
            ironed[start:stop] = slope
    z = np.concatenate(([0.0], grid.cdf))
    H = np.concatenate(([0.0], np.cumsum(grid.f * raw)))
    L = np.concatenate(([0.0], np.cumsum(grid.f * ironed)))
    for arr in (raw, ironed, z, H, L):
        arr.setflags(write=False)
    return VirtualCurve(kind=kind, c=c, raw=raw, ironed=ironed, z=z, H=H, L=L)


def lower_curve(grid: TypeGrid) -> VirtualCurve:
    return iron(lower_virtual(grid), grid, kind="lower")


def upper_curve(grid: TypeGrid) -> VirtualCurve:
    return iron(upper_virtual(grid), grid, kind="upper")


def mixed_curve(grid: TypeGrid, c: float) -> VirtualCurve:
    return iron(mixed_virtual(grid, c), grid, kind="mixed", c=float(c))


def split_curve(grid: TypeGrid, c: float) -> VirtualCurve:
    return iron(split_virtual(grid, c), grid, kind="split", c=float(c))


def crossing_type(grid: TypeGrid, c: float) -> int:
    """Zero-based index of the first type with F(t_i) >= c."""
    c = _check_weight(c)
    return int(min(np.searchsorted(grid.cdf, c, side="left"), grid.n - 1))


def curve_to_csv(curve: VirtualCurve, grid: TypeGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "F", "raw", "ironed"])
    for row in zip(grid.t, grid.cdf, curve.raw, curve.ironed):
        writer.writerow([f"{x:.12g}" for x in row])
    return buf.getvalue()
