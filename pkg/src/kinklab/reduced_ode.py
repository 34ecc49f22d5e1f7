"""Reduced dynamics of interacting kink positions.

Projecting the field equation onto translates of the front profile
leaves an ODE for the positions eta_1 > ... > eta_n: each kink is
pushed rightward by its right neighbor through the fast tail (rate
lambda < 0 in the gap) and leftward by its left neighbor through the
slow tail (rate -mu).  Normalizing the pairwise distances by mu and
rescaling time turns the gap dynamics into the exponential system

    d_1' = exp(-d_1) + g_1 * exp(-(1+eps) d_min)
    d_j' = exp(-d_j) - exp(-d_{j-1}) + g_j * exp(-(1+eps) d_min)

whose unperturbed version has the explicit solution d_j = log(t/j) on
its attracting ray.  This module integrates both systems, carries an
optional bounded remainder model, and compares distance series from
different sources (e.g. full field simulation vs reduced ODE).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "BoundedRemainder",
    "ReducedSystem",
    "NormalizedDistances",
    "Trajectory",
    "ComparisonReport",
    "integrate_eta",
    "integrate_normalized",
    "integrate_fixed_rk4",
    "fit_decay_rate",
    "compare_pde_ode",
]


@dataclass(frozen=True)
class BoundedRemainder:
    """Smooth bounded forcing g_j = A sin(omega x_j + phase_j), scaled
    by exp(-(1+epsilon) * mu * min gap) in the position system."""

    epsilon: float = 0.5
    amplitude: float = 1.0
    omega: float = 1.0
    phases: tuple = ()

    def g(self, x: np.ndarray) -> np.ndarray:
        ph = np.zeros(x.size)
        if self.phases:
            ph[: len(self.phases)] = self.phases[: x.size]
        return self.amplitude * np.sin(self.omega * x + ph)


@dataclass(frozen=True)
class ReducedSystem:
    """Position dynamics for n kinks with tail rates mu > 0 > lambda."""

    n: int
    a_L: float
    a_R: float
    mu: float
    lam: float
    remainder: BoundedRemainder | None = None

    def __post_init__(self):
        if self.a_L <= 0 or self.a_R <= 0:
            raise ValueError("interaction coefficients must be positive")
        if not (self.mu > 0 > self.lam):
            raise ValueError("need mu > 0 > lambda")

    @classmethod
    def from_front(cls, profile, n: int, remainder=None):
        return cls(
            n=n,
            a_L=profile.a_L,
            a_R=profile.a_R,
            mu=profile.mu,
            lam=profile.lam,
            remainder=remainder,
        )

    def field(self, eta: np.ndarray) -> np.ndarray:
        gaps = -np.diff(eta)
        deta = np.zeros_like(eta)
        deta[:-1] += self.a_L * np.exp(self.lam * gaps)
        deta[1:] -= self.a_R * np.exp(-self.mu * gaps)
        if self.remainder is not None and gaps.size:
            decay = np.exp(-(1.0 + self.remainder.epsilon) * self.mu * gaps.min())
            deta += self.remainder.g(self.mu * eta) * decay
        return deta


@dataclass(frozen=True)
class NormalizedDistances:
    """Initial data and forcing for the normalized gap system."""

    delta0: tuple
    epsilon: float = 0.5
    g: object = None  # callable delta -> vector, or None

    def __post_init__(self):
        if np.min(self.delta0) < 0:
            raise ValueError("distances must be nonnegative")

    def field(self, delta: np.ndarray) -> np.ndarray:
        z = np.exp(-delta)
        out = z.copy()
        out[1:] -= z[:-1]
        if self.g is not None:
            out += np.asarray(self.g(delta)) * np.exp(-(1.0 + self.epsilon) * delta.min())
        return out


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    complete: bool = True
    message: str = ""


def integrate_eta(
    sys: ReducedSystem,
    eta0,
    t_end: float,
    delta_star: float | None = None,
    t_eval=None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Trajectory:
    """Integrate the position system until t_end or until the smallest
    gap drops below the validity threshold delta_star (default 8/mu),
    in which case the partial trajectory is returned with a diagnostic.
    """
    eta0 = np.asarray(eta0, dtype=float)
    if eta0.size != sys.n:
        raise ValueError("initial data size does not match system")
    if np.any(np.diff(eta0) >= 0):
        raise ValueError("positions must be strictly decreasing")
    if delta_star is None:
        delta_star = 8.0 / sys.mu
    if eta0.size > 1 and -np.diff(eta0).min() < delta_star:
        return Trajectory(
            t=np.array([0.0]),
            y=eta0[:, None].copy(),
            complete=False,
            message=f"initial min gap below validity threshold {delta_star:.3g}",
        )

    def too_close(t, y):
        return (-np.diff(y)).min() - delta_star

    too_close.terminal = True
    too_close.direction = -1
    events = [too_close] if eta0.size > 1 else None

    sol = solve_ivp(
        lambda t, y: sys.field(y),
        (0.0, float(t_end)),
        eta0,
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
        events=events,
        dense_output=False,
    )
    halted = bool(events) and len(sol.t_events[0]) > 0
    return Trajectory(
        t=sol.t,
        y=sol.y,
        complete=not halted,
        message=f"min gap reached validity threshold {delta_star:.3g}" if halted else "",
    )


def integrate_normalized(
    nd: NormalizedDistances,
    t_end: float,
    t_eval=None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Trajectory:
    sol = solve_ivp(
        lambda t, y: nd.field(y),
        (0.0, float(t_end)),
        np.asarray(nd.delta0, dtype=float),
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    return Trajectory(t=sol.t, y=sol.y, complete=True)


def integrate_fixed_rk4(field, y0, t_end: float, n_steps: int) -> np.ndarray:
    """Classical fixed-step fourth-order Runge-Kutta; returns the final
    state.  Used to verify integrator order against closed forms."""
    y = np.asarray(y0, dtype=float).copy()
    h = float(t_end) / n_steps
    for _ in range(n_steps):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        y += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def fit_decay_rate(t: np.ndarray, d: np.ndarray) -> float:
    """Slope of log(d') against d; for a gap driven by one exponential
    tail this recovers minus the tail rate."""
    ddot = np.gradient(d, t)
    mask = ddot > 0
    if mask.sum() < 5:
        raise ValueError("not enough growing samples to fit a rate")
    return float(np.polyfit(d[mask], np.log(ddot[mask]), 1)[0])


@dataclass(frozen=True)
class ComparisonReport:
    max_rel_error: float
    rate_first: float
    rate_second: float
    window: tuple
    n_samples: int


def compare_pde_ode(t_pde, d_pde, t_ode, d_ode, window=None) -> ComparisonReport:
    """Compare two distance-versus-time series on a common window.

    The second series is interpolated onto the sample times of the
    first; the window restricts to distances of the first series inside
    [lo, hi].  Reports the maximum relative discrepancy and the fitted
    exponential decay rate of each series on the window.
    """
    t_pde = np.asarray(t_pde, dtype=float)
    d_pde = np.asarray(d_pde, dtype=float)
    t_ode = np.asarray(t_ode, dtype=float)
    d_ode = np.asarray(d_ode, dtype=float)
    lo, hi = window if window is not None else (-np.inf, np.inf)
    mask = (d_pde >= lo) & (d_pde <= hi)
    mask &= (t_pde >= t_ode[0]) & (t_pde <= t_ode[-1])
    if mask.sum() < 5:
        raise ValueError("comparison window contains too few samples")
    t_w = t_pde[mask]
    a = d_pde[mask]
    b = np.interp(t_w, t_ode, d_ode)
    err = float(np.max(np.abs(a - b) / np.abs(a)))
    return ComparisonReport(
        max_rel_error=err,
        rate_first=fit_decay_rate(t_w, a),
        rate_second=fit_decay_rate(t_w, b),
        window=(float(lo), float(hi)),
        n_samples=int(mask.sum()),
    )
