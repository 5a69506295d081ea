"""First-order Godunov scheme for the two-fluid Lagrangian p-system.

Serves as an independent finite-volume reference for the front tracker.
Cells carry averages of ``(tau, v)``; each face flux ``(-v*, p*)`` comes from
the exact Riemann solution sampled on the face, solved for all faces at once
with a vectorised safeguarded Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eos import P_MIN, PressureLaw
from .field import PiecewiseConstantField, cell_averages
from .riemann import MAX_ITER, NonConvergence, VacuumError

CFL = 0.5


class CFLViolation(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    """Uniform cells on ``[-Z, m + Z]`` with faces on the interfaces.

    ``laws[law_index[i]]`` is the pressure law of cell ``i``. With no liquid
    (``m == 0``) the whole mesh uses ``laws[0]``.
    """

    edges: np.ndarray
    law_index: np.ndarray
    laws: tuple
    m: float = 0.0

    @property
    def dz(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def n_cells(self) -> int:
        return self.edges.size - 1

    def coefficients(self) -> tuple[np.ndarray, ...]:
        """Per-cell ``(A, g, a, b)`` of the power-law form."""
        table = np.array([[law.A, law.g, law.a, law.b] for law in self.laws])
        rows = table[self.law_index]
        return rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]

    def region_names(self) -> np.ndarray:
        names = np.array(["gas_left", "liquid", "gas_right"], dtype=object)
        c = self.centers
        return names[np.where(c < 0.0, 0, np.where(c < self.m, 1, 2))]


def make_mesh(dz: float, half_width: float, gas: PressureLaw, liquid: PressureLaw | None = None, m: float = 0.0) -> Mesh:
    """Mesh whose outer gas columns have at least ``half_width`` of length."""
    k = int(math.ceil(half_width / dz - 1e-9))
    left = -dz * np.arange(k, 0, -1)
    if liquid is None:
        edges = np.concatenate([left, dz * np.arange(0, k + 1)])
        return Mesh(edges, np.zeros(edges.size - 1, dtype=int), (gas,), 0.0)
    j = m / dz
    if abs(j - round(j)) > 1e-9 or round(j) < 1:
        raise ValueError(f"liquid mass {m} must be a positive multiple of dz={dz}")
    j = int(round(j))
    edges = np.concatenate([left, np.linspace(0.0, m, j + 1), m + dz * np.arange(1, k + 1)])
    idx = np.concatenate([np.zeros(k, int), np.ones(j, int), np.zeros(k, int)])
    return Mesh(edges, idx, (gas, liquid), float(m))


# --- vectorised wave curves -------------------------------------------------


def _wave_curve(p, p0, A, g, a, b):
    """``W(p; p0)`` and its derivative for arrays of power-law coefficients."""
    q0 = a + b * p0
    q = a + b * p
    lg = np.log1p(b * (p - p0) / q0)
    dp = p - p0
    drop = -A * q0 ** (-1.0 / g) * np.expm1(-lg / g)
    w_shock = np.sqrt(np.maximum(dp * drop, 0.0))
    beta = (g - 1.0) / (2.0 * g)
    scale = np.sqrt(A / (g * b))
    safe_beta = np.where(beta == 0.0, 1.0, beta)
    w_rar = np.where(beta == 0.0, scale * lg, scale / safe_beta * q0**beta * np.expm1(beta * lg))
    dtau = -b * A / g * q ** (-1.0 / g - 1.0)
    d_rar = np.sqrt(-dtau)
    shock = dp > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        d_shock = np.where(w_shock > 0.0, (drop - dp * dtau) / (2.0 * w_shock), d_rar)
    return np.where(shock, w_shock, w_rar), np.where(shock, d_shock, d_rar)


def _p_lower(a, b):
    return np.maximum(P_MIN, np.where(a < 0.0, -a / b, 0.0))


def face_states(pl, vl, pr, vr, left_coef, right_coef):
    """Middle states ``(p*, v*)`` of many Riemann problems at once.

    ``left_coef`` / ``right_coef`` are tuples ``(A, g, a, b)`` of arrays.
    """
    pl, vl, pr, vr = (np.asarray(x, dtype=float) for x in (pl, vl, pr, vr))
    p_star = pl.copy()
    v_star = vl.copy()
    active = (pl != pr) | (vl != vr)
    if not np.any(active):
        return p_star, v_star
    cl = tuple(np.broadcast_to(c, pl.shape)[active] for c in left_coef)
    cr = tuple(np.broadcast_to(c, pl.shape)[active] for c in right_coef)
    p_l, p_r = pl[active], pr[active]
    target = vl[active] - vr[active]

    def f(p):
        wl, dl = _wave_curve(p, p_l, *cl)
        wr, dr = _wave_curve(p, p_r, *cr)
        return wl + wr - target, dl + dr

    lo = np.maximum(_p_lower(cl[2], cl[3]), _p_lower(cr[2], cr[3])) * (1.0 + 1e-12)
    if np.any(f(lo)[0] >= 0.0):
        raise VacuumError("face Riemann problem opens a vacuum")
    hi = 2.0 * np.maximum(p_l, p_r)
    r_hi = f(hi)[0]
    for _ in range(200):
        low = r_hi < 0.0
        if not np.any(low):
            break
        lo = np.where(low, hi, lo)
        hi = np.where(low, 2.0 * hi, hi)
        r_hi = f(hi)[0]
    x = np.clip(0.5 * (p_l + p_r), lo, hi)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(MAX_ITER):
        r, d = f(x)
        done = np.abs(r) <= 1e-13
        if np.all(done):
            break
        lo = np.where(r < 0.0, x, lo)
        hi = np.where(r > 0.0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = x - r / d
        bad = ~((x_new > lo) & (x_new < hi))
        mid = np.where(hi > 4.0 * lo, np.sqrt(lo * hi), 0.5 * (lo + hi))
        x_new = np.where(bad, mid, x_new)
        x = np.where(done, x, x_new)
        if np.all(done | (hi - lo <= 4e-16 * hi)):
            break
    r, _ = f(x)
    if np.any(np.abs(r) > 1e-12):
        raise NonConvergence(f"face solve residual {np.abs(r).max():.3e}")
    p_star[active] = x
    v_star[active] = vl[active] - _wave_curve(x, p_l, *cl)[0]
    return p_star, v_star


# --- scheme -------------------------------------------------------------------


def _pressure(tau, A, g, a, b):
    if np.any(tau <= 0.0):
        raise VacuumError("non-positive specific volume in a cell")
    return ((tau / A) ** (-g) - a) / b


def _char_speed(p, A, g, a, b):
    q = a + b * p
    return 1.0 / np.sqrt(b * A / g * q ** (-1.0 / g - 1.0))


def max_speed(cells: np.ndarray, mesh: Mesh) -> float:
    coef = mesh.coefficients()
    return float(np.max(_char_speed(_pressure(cells[:, 0], *coef), *coef)))


def godunov_step(cells: np.ndarray, mesh: Mesh, dt: float) -> np.ndarray:
    """One conservative update of the ``(n, 2)`` array of ``(tau, v)`` averages.

    Copy (zero-gradient) conditions at both ends of the mesh.
    """
    coef = mesh.coefficients()
    tau, v = cells[:, 0], cells[:, 1]
    p = _pressure(tau, *coef)
    c_max = float(np.max(_char_speed(p, *coef)))
    if dt * c_max / mesh.dz > CFL * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:g} exceeds the CFL limit {CFL * mesh.dz / c_max:g}")
    # faces 0..n, ghost cells copy their neighbour
    pe = np.concatenate([p[:1], p, p[-1:]])
    ve = np.concatenate([v[:1], v, v[-1:]])
    ce = tuple(np.concatenate([c[:1], c, c[-1:]]) for c in coef)
    p_star, v_star = face_states(
        pe[:-1], ve[:-1], pe[1:], ve[1:], tuple(c[:-1] for c in ce), tuple(c[1:] for c in ce)
    )
    ratio = dt / mesh.dz
    out = np.empty_like(cells)
    out[:, 0] = tau + ratio * (v_star[1:] - v_star[:-1])
    out[:, 1] = v - ratio * (p_star[1:] - p_star[:-1])
    return out


def godunov_run(cells: np.ndarray, mesh: Mesh, t_end: float, snapshot_times=()) -> dict[float, np.ndarray]:
    """March to ``t_end`` at CFL 0.5, landing exactly on every snapshot time.

    Returns a mapping from time to cell array; ``t_end`` is always included.
    """
    targets = sorted({float(t) for t in snapshot_times if 0.0 <= t <= t_end} | {float(t_end)})
    out = {}
    t = 0.0
    u = np.array(cells, dtype=float)
    for target in targets:
        while t < target:
            dt = CFL * mesh.dz / max_speed(u, mesh)
            if t + dt >= target * (1.0 - 1e-14):
                dt = target - t
            if dt > 0.0:
                u = godunov_step(u, mesh, dt)
            t = target if dt == target - t else t + dt
        out[target] = u.copy()
    return out


def initial_cells(datum: PiecewiseConstantField, mesh: Mesh) -> np.ndarray:
    """Exact cell averages of ``(tau, v)`` for a ``(p, v)`` step datum."""
    edges = mesh.edges
    cuts = np.unique(np.concatenate([datum.breakpoints, [0.0, mesh.m] if mesh.m else []]))
    rows = []
    bounds = np.concatenate([[edges[0] - 1.0], cuts, [edges[-1] + 1.0]])
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (lo + hi)
        p, v = datum(mid)
        law = mesh.laws[1] if (mesh.m and 0.0 < mid < mesh.m) else mesh.laws[0]
        rows.append((law.tau(p), v))
    tau_v = PiecewiseConstantField.from_steps(cuts, rows)
    return cell_averages(tau_v, edges)


def cells_to_field(cells: np.ndarray, mesh: Mesh) -> PiecewiseConstantField:
    """Step function of the cell values, extended by the end cells."""
    vals = np.concatenate([cells[:1], cells, cells[-1:]])
    return PiecewiseConstantField(mesh.edges, vals)


def cell_pressures(cells: np.ndarray, mesh: Mesh) -> np.ndarray:
    return _pressure(cells[:, 0], *mesh.coefficients())


__all__ = [
    "CFL",
    "CFLViolation",
    "Mesh",
    "cell_pressures",
    "cells_to_field",
    "face_states",
    "godunov_run",
    "godunov_step",
    "initial_cells",
    "make_mesh",
    "max_speed",
]
