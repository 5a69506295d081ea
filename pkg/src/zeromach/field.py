"""Piecewise-constant fields on the real line with exact integrals and jump sums."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PiecewiseConstantField:
    """A right-continuous step function ``R -> R^k``.

    ``values[0]`` holds on ``(-inf, breakpoints[0])``, ``values[i]`` on
    ``[breakpoints[i-1], breakpoints[i])`` and ``values[-1]`` beyond the last
    breakpoint. Breakpoints are strictly increasing.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != bp.size + 1:
            raise ValueError(
                f"need len(values) == len(breakpoints) + 1, got {vals.shape[0]} and {bp.size}"
            )
        if bp.size > 1 and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value) -> "PiecewiseConstantField":
        return cls(np.empty(0), np.atleast_2d(np.asarray(value, dtype=float)))

    @classmethod
    def from_steps(cls, positions, states, tol: float = 0.0) -> "PiecewiseConstantField":
        """Build from possibly repeated jump positions.

        ``states`` has one more row than ``positions``. Jumps closer than
        ``tol`` collapse onto one breakpoint keeping the outer states, and
        breakpoints with no actual jump are dropped.
        """
        pos = np.asarray(positions, dtype=float).reshape(-1)
        st = np.asarray(states, dtype=float)
        if st.ndim == 1:
            st = st[:, None]
        keep_bp = []
        keep_val = [st[0]]
        for i, x in enumerate(pos):
            if keep_bp and x - keep_bp[-1] <= tol:
                keep_val[-1] = st[i + 1]
                continue
            keep_bp.append(x)
            keep_val.append(st[i + 1])
        bp = np.asarray(keep_bp)
        vals = np.asarray(keep_val)
        # drop breakpoints between equal states (zero-width fans, repeated values)
        if bp.size:
            jump = np.any(vals[1:] != vals[:-1], axis=1)
            bp = bp[jump]
            vals = np.concatenate([vals[:1], vals[1:][jump]])
        return cls(bp, vals)

    @property
    def ncomp(self) -> int:
        return self.values.shape[1]

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right")
        return self.values[idx]

    def left_limit(self, x: float) -> np.ndarray:
        return self.values[np.searchsorted(self.breakpoints, x, side="left")]

    def right_limit(self, x: float) -> np.ndarray:
        return self.values[np.searchsorted(self.breakpoints, x, side="right")]

    def map(self, fn) -> "PiecewiseConstantField":
        """Apply ``fn`` row-wise to the values."""
        return PiecewiseConstantField(
            self.breakpoints, np.array([np.atleast_1d(fn(row)) for row in self.values])
        )

    def component(self, i: int) -> "PiecewiseConstantField":
        return PiecewiseConstantField(self.breakpoints, self.values[:, i : i + 1])

    def restrict(self, lo: float, hi: float) -> "PiecewiseConstantField":
        """Same function, breakpoints outside ``(lo, hi)`` removed.

        Values outside the window are clamped to the traces at ``lo+``/``hi-``.
        """
        bp = self.breakpoints
        inside = (bp > lo) & (bp < hi)
        first = np.searchsorted(bp, lo, side="right")
        vals = self.values[first : first + inside.sum() + 1]
        return PiecewiseConstantField(bp[inside], vals)

    def integral(self, lo: float, hi: float) -> np.ndarray:
        """Exact ``int_lo^hi f``; requires a finite window."""
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("integral needs a finite window")
        if hi <= lo:
            return np.zeros(self.ncomp)
        r = self.restrict(lo, hi)
        edges = np.concatenate([[lo], r.breakpoints, [hi]])
        return (np.diff(edges)[:, None] * r.values).sum(axis=0)

    def shift(self, dx: float) -> "PiecewiseConstantField":
        return PiecewiseConstantField(self.breakpoints + dx, self.values)

    def reflect(self) -> "PiecewiseConstantField":
        """``x -> f(-x)`` (right-continuity is lost only on a null set)."""
        return PiecewiseConstantField(-self.breakpoints[::-1], self.values[::-1])


def merged_breakpoints(*fields: PiecewiseConstantField) -> np.ndarray:
    return np.unique(np.concatenate([f.breakpoints for f in fields]))


def l1_distance(
    f: PiecewiseConstantField,
    g: PiecewiseConstantField,
    lo: float = -np.inf,
    hi: float = np.inf,
    per_component: bool = False,
):
    """Exact ``int_lo^hi |f - g|_1`` on merged breakpoints.

    Returns ``inf`` when the difference does not vanish on an unbounded
    piece of the window.
    """
    bp = merged_breakpoints(f, g)
    bp = bp[(bp > lo) & (bp < hi)]
    edges = np.concatenate([[lo], bp, [hi]])
    # sample each cell at an interior point
    left = edges[:-1]
    right = edges[1:]
    mid = np.zeros_like(left)
    both = np.isfinite(left) & np.isfinite(right)
    mid[both] = 0.5 * (left[both] + right[both])
    only_left = np.isfinite(left) & ~np.isfinite(right)
    only_right = ~np.isfinite(left) & np.isfinite(right)
    mid[only_left] = left[only_left] + 1.0
    mid[only_right] = right[only_right] - 1.0
    diff = np.abs(f(mid) - g(mid))
    width = right - left
    total = np.zeros(diff.shape[1])
    for j in range(diff.shape[1]):
        nz = diff[:, j] > 0
        if np.any(nz & ~np.isfinite(width)):
            total[j] = np.inf
        else:
            total[j] = float(np.sum(diff[nz, j] * width[nz]))
    return total if per_component else float(total.sum())


def total_variation(f: PiecewiseConstantField, lo: float = -np.inf, hi: float = np.inf) -> float:
    """Jump sum over breakpoints strictly inside ``(lo, hi)``, 1-norm across components."""
    bp = f.breakpoints
    idx = np.nonzero((bp > lo) & (bp < hi))[0]
    if idx.size == 0:
        return 0.0
    jumps = f.values[idx + 1] - f.values[idx]
    return float(np.abs(jumps).sum())


def cell_averages(f: PiecewiseConstantField, edges) -> np.ndarray:
    """Exact averages of ``f`` over the cells ``[edges[i], edges[i+1]]``.

    Cells without an interior breakpoint get the piece value bit for bit.
    """
    edges = np.asarray(edges, dtype=float)
    out = f(0.5 * (edges[:-1] + edges[1:])).copy()
    bp = f.breakpoints
    cells = np.searchsorted(edges, bp, side="right") - 1
    inner = (cells >= 0) & (cells < edges.size - 1)
    inner &= bp > edges[np.clip(cells, 0, edges.size - 1)]
    for i in np.unique(cells[inner]):
        lo, hi = edges[i], edges[i + 1]
        out[i] = f.integral(lo, hi) / (hi - lo)
    return out
