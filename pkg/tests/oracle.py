"""Slow, independent reference computations used to pin test fixtures.

Nothing here shares code with the package: specific volume is written out
per law, rarefaction curves are integrated by quadrature and middle states
are bracketed with Brent's method.
"""

import math

from scipy.integrate import quad
from scipy.optimize import brentq


def gas_tau(p, k=1.0, gamma=1.4):
    return (k / p) ** (1.0 / gamma)


def tait_tau(p, n=7.0, p_bar=1.0, kappa=0.1):
    return (p_bar + kappa**2 * (p - p_bar)) ** (-1.0 / n)


def sound_speed(tau_fn, p, dp=1e-6):
    """``sqrt(-1/tau'(p))`` with a central difference."""
    slope = (tau_fn(p + dp) - tau_fn(p - dp)) / (2 * dp)
    return math.sqrt(-1.0 / slope)


def wave_curve(tau_fn, p, p0):
    """Velocity jump along the admissible Lax curve through ``p0``."""
    if p >= p0:
        return math.sqrt((p - p0) * (tau_fn(p0) - tau_fn(p)))
    val, _ = quad(lambda s: 1.0 / sound_speed(tau_fn, s), p0, p, epsabs=1e-14, epsrel=1e-13)
    return val


def middle_pressure(tau_l, pl, vl, tau_r, pr, vr):
    fn = lambda p: wave_curve(tau_l, p, pl) + wave_curve(tau_r, p, pr) - (vl - vr)
    return brentq(fn, 1e-3, 50.0, xtol=1e-15, rtol=1e-15)


def tau_by_bisection(p, k, gamma):
    """Invert ``P(tau) = k tau^-gamma`` without using the closed form."""
    return brentq(lambda tau: k * tau ** (-gamma) - p, 1e-6, 1e6, xtol=1e-16, rtol=1e-15)


def boundary_pressure(tau_fn, p_trace, target):
    """``W(p_b; p_trace) = target`` for a single entering wave."""
    return brentq(lambda p: wave_curve(tau_fn, p, p_trace) - target, 1e-3, 50.0, xtol=1e-15, rtol=1e-15)


def fixtures():
    g2 = lambda p: gas_tau(p, 1.0, 2.0)
    t7 = lambda p: tait_tau(p)
    out = {}
    out["tau_k2_g14_p3"] = tau_by_bisection(3.0, 2.0, 1.4)
    out["W_g2_2_1"] = wave_curve(g2, 2.0, 1.0)
    out["W_g2_half_1"] = wave_curve(g2, 0.5, 1.0)
    out["p_star_symmetric"] = middle_pressure(g2, 1.0, 0.2, g2, 1.0, -0.2)
    ps = middle_pressure(g2, 1.2, 0.0, t7, 1.0, 0.0)
    out["p_star_interface"] = ps
    out["v_star_interface"] = -wave_curve(g2, ps, 1.2)
    out["p_b_left_wall"] = boundary_pressure(g2, 1.0, 0.1)
    out["p_b_right_wall"] = boundary_pressure(g2, 1.0, -0.1)
    return out


if __name__ == "__main__":
    for key, val in fixtures().items():
        print(f"{key} = {val!r}")
