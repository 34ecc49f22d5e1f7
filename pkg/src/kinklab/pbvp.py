"""Periodic traveling waves: speed selection on a bounded window.

The wave profile solves u'' + a u' + f(u) = 0 on [-ell, ell] with
u(-ell) = 2*pi*j and u(ell) = 0.  For each damping a the Dirichlet
problem has a unique monotone solution (solved here by damped Newton on
the second-order finite-difference system); the wave speed a(ell, j) is
the unique a at which the end slopes match, found by bisection and a
secant polish on a monotone matching function.

The discrete matching function is the interior finite-difference
equation evaluated at a virtual junction node carrying the value
2*pi*j: writing r = u(-ell+h), s = u(ell-h),

    m(a) = (r + s - 2*pi*j)/h^2 + a*(r - 2*pi*j - s)/(2h),

which equals [u'(-ell) - u'(ell)]/h + O(h) (the end-slope mismatch) and
has the exact property that gluing j phase-shifted copies of the
(ell/j, 1) solution solves the (ell, j) system on the same mesh, so the
copy law a(ell, j) = a(ell/j, 1) holds to solver tolerance rather than
discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import pde, positions
from .front import compute_speed

__all__ = [
    "PBVPSolution",
    "CopyReport",
    "WashoutResult",
    "solve_fixed_a",
    "solve_speed",
    "verify_copy_structure",
    "washout_experiment",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PBVPSolution:
    ell: float
    j: int
    a: float
    grid: np.ndarray
    profile: np.ndarray

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def end_derivatives(self):
        """One-sided second-order slopes at both ends."""
        u, h = self.profile, self.h
        left = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
        right = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
        return float(left), float(right)

    def energy_residual(self, nl) -> float:
        """|a * int (u')^2 - (F(2 pi j) - F(0))|, central-difference slopes."""
        u, h = self.profile, self.h
        du = np.gradient(u, h, edge_order=2)
        integral = np.trapezoid(du * du, dx=h)
        drop = nl.F(TWO_PI * self.j) - nl.F(0.0)
        return float(abs(self.a * integral - drop))


def _newton_bvp(nl, z, a, u, tol, max_iter):
    """Damped Newton on the interior equations; u holds the full profile
    including the Dirichlet end values and is updated in place."""
    h = z[1] - z[0]
    n = u.size
    sub = 1.0 / h**2 - a / (2 * h)
    sup = 1.0 / h**2 + a / (2 * h)

    def residual(v):
        return (
            (v[:-2] - 2 * v[1:-1] + v[2:]) / h**2
            + a * (v[2:] - v[:-2]) / (2 * h)
            + nl.f(v[1:-1])
        )

    g = residual(u)
    norm = np.abs(g).max()
    for _ in range(max_iter):
        if norm <= tol:
            return u
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = sup
        ab[1, :] = -2.0 / h**2 + nl.f_prime(u[1:-1])
        ab[2, :-1] = sub
        step = solve_banded((1, 1), ab, -g, check_finite=False)
        if norm <= 1e-8 and np.abs(step).max() <= 1e-12 * max(1.0, np.abs(u).max()):
            # the 1/h^2-amplified residual has hit its rounding floor; the
            # Newton correction is below machine noise, so this is converged
            u[1:-1] += step
            return u
        lam = 1.0
        for _ in range(40):
            trial = u.copy()
            trial[1:-1] += lam * step
            g_new = residual(trial)
            norm_new = np.abs(g_new).max()
            if norm_new < norm:
                u, g, norm = trial, g_new, norm_new
                break
            lam *= 0.5
        else:
            return None
    return u if norm <= tol else None


def solve_fixed_a(nl, ell, j, a, h=None, tol=1e-10, max_iter=60, guess=None):
    """Monotone Dirichlet profile at prescribed damping a.

    Starts Newton from a linear ramp (or a caller-supplied guess); if
    that fails, walks a up from zero in stages, reusing each profile.
    """
    if h is None:
        h = ell / 500.0
    n = int(round(2 * ell / h))
    z = -ell + (2 * ell / n) * np.arange(n + 1)
    starts = []
    if guess is not None:
        starts.append(guess.copy())
    starts.append(TWO_PI * j * (ell - z) / (2 * ell))  # linear ramp
    starts.append(_staircase_start(z, ell, j))
    out = None
    for u in starts:
        u[0], u[-1] = TWO_PI * j, 0.0
        out = _newton_bvp(nl, z, a, u, tol, max_iter)
        if out is not None:
            break
    if out is None:
        # continuation: walk the damping up from zero with an adaptive
        # step — near the largest solvable a the inner layer translates
        # almost freely and Newton needs a close warm start
        u = _newton_bvp(nl, z, 0.0, _staircase_start(z, ell, j), tol, max_iter)
        if u is None or a == 0.0:
            if u is not None:
                return z, u
            raise RuntimeError(
                f"Dirichlet solve failed for ell={ell}, j={j}, a={a}"
            )
        a_cur, da = 0.0, a / 8.0
        while a_cur < a:
            da = min(da, a - a_cur)
            trial = _newton_bvp(nl, z, a_cur + da, u.copy(), tol, max_iter)
            if trial is None:
                da *= 0.5
                if da < 1e-5 * max(a, 0.1):
                    raise RuntimeError(
                        f"Dirichlet continuation stalled for ell={ell}, "
                        f"j={j} at a={a_cur} (target {a})"
                    )
                continue
            u, a_cur = trial, a_cur + da
            da *= 1.7
        out = u
    return z, out


def _staircase_start(z, ell, j):
    """Kink-shaped initial iterate: j mollified steps, equally spaced."""
    eps = min(1.0, ell / (2.0 * j))
    u = np.zeros_like(z)
    for k in range(j):
        xi = -ell + (k + 0.5) * (2 * ell / j)
        u += TWO_PI * (1.0 - pde.smooth_step((z - xi) / eps))
    return u


def _junction_mismatch(u, h, j, a):
    r, s = u[1], u[-2]
    return (r + s - TWO_PI * j) / h**2 + a * (r - TWO_PI * j - s) / (2 * h)


def solve_speed(nl, ell, j, tol=1e-12, h=None, bracket=None) -> PBVPSolution:
    """Wave speed and profile by root-finding the end-slope mismatch.

    The mismatch is monotone decreasing in a (comparison ordering), so
    plain bisection brackets the root; a secant polish finishes it off.
    """
    if h is None:
        h = ell / 500.0
    if bracket is None:
        bracket = (0.0, 2.0 * compute_speed(nl))
    cache = {}

    def m_of(a):
        if a not in cache:
            guess = None
            solvable = {v: zu for v, zu in cache.items() if zu is not None}
            if solvable:
                nearest = min(solvable, key=lambda v: abs(v - a))
                guess = solvable[nearest][1]
            try:
                cache[a] = solve_fixed_a(nl, ell, j, a, h=h, guess=guess)
            except RuntimeError:
                # no profile at this damping: past the fold, so the root
                # must lie below — report a negative mismatch
                cache[a] = None
        if cache[a] is None:
            return -np.inf
        z, u = cache[a]
        return _junction_mismatch(u, z[1] - z[0], j, a)

    lo, hi = bracket
    m_lo, m_hi = m_of(lo), m_of(hi)
    if not (m_lo > 0 > m_hi):
        raise RuntimeError(
            f"no sign change on the a-bracket [{lo}, {hi}]: m = {m_lo}, {m_hi}"
        )
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if m_of(mid) > 0:
            lo, m_lo = mid, m_of(mid)
        else:
            hi, m_hi = mid, m_of(mid)
    a0, a1, f0_, f1_ = lo, hi, m_lo, m_hi
    if np.isfinite(f0_) and np.isfinite(f1_):
        for _ in range(20):
            if f1_ == f0_:
                break
            a2 = a1 - f1_ * (a1 - a0) / (f1_ - f0_)
            a0, f0_ = a1, f1_
            a1, f1_ = a2, m_of(a2)
            if not np.isfinite(f1_) or abs(a1 - a0) <= tol * max(1.0, abs(a1)):
                break
    solvable = {v: zu for v, zu in cache.items() if zu is not None}
    a_best = min(
        solvable,
        key=lambda v: abs(
            _junction_mismatch(solvable[v][1], solvable[v][0][1] - solvable[v][0][0], j, v)
        ),
    )
    z, u = solvable[a_best]
    return PBVPSolution(ell=float(ell), j=int(j), a=float(a_best), grid=z, profile=u)


@dataclass(frozen=True)
class CopyReport:
    a_full: float
    a_unit: float
    max_deviation: float
    end_derivative_gap: float


def verify_copy_structure(sol: PBVPSolution, nl) -> CopyReport:
    """Compare a j-winding solution with glued copies of the unit one.

    The unit problem on [-ell/j, ell/j] is solved on the same mesh
    width; its profile, phase-shifted by 2*pi per copy, is laid
    side-by-side and compared nodewise against sol.profile.
    """
    j = sol.j
    if j < 1:
        raise ValueError("winding count must be positive")
    unit = solve_speed(nl, sol.ell / j, 1, h=sol.h)
    nu = unit.profile.size - 1
    tiled = np.empty_like(sol.profile)
    for k in range(j):
        block = unit.profile + TWO_PI * (j - 1 - k)
        tiled[k * nu : (k + 1) * nu + 1] = block
    dev = float(np.abs(sol.profile - tiled).max())
    dl_full, dr_full = sol.end_derivatives()
    dl_unit, dr_unit = unit.end_derivatives()
    gap = max(abs(dl_full - dl_unit), abs(dr_full - dr_unit))
    return CopyReport(
        a_full=sol.a, a_unit=unit.a, max_deviation=dev, end_derivative_gap=gap
    )


@dataclass(frozen=True)
class WashoutResult:
    times: np.ndarray
    variances: np.ndarray
    drift_speed: float
    initial_variance: float


def washout_experiment(
    nl,
    ell,
    kink_positions,
    t_end,
    dt=0.1,
    h=0.04,
    cadence=100,
    epsilon=None,
) -> WashoutResult:
    """Relaxation of a winding kink train toward the equidistant state.

    Runs the field on the circle of circumference 2*ell with winding
    number j = len(kink_positions) and returns the variance of the j
    cyclic neighbor distances over time, plus the mean drift speed of
    the train over the second half of the run.
    """
    ki = np.asarray(kink_positions, dtype=float)
    j = ki.size
    if j < 2:
        raise ValueError("need at least two kinks for distance variance")
    spec = pde.InitialDataSpec(
        kink_positions=tuple(np.sort(ki)[::-1]), epsilon=epsilon
    )
    n = int(round(2 * ell / h))
    field = pde.make_initial_data(
        spec, -ell, n, h=h, boundary="periodic-jump", jump=j
    )
    _, log = pde.run(field, t_end, dt, nl=nl, cadence=cadence)
    period = 2 * ell
    variances = []
    means = []
    for snap_u, t in zip(log.snapshots, log.times):
        # append the wrapped first node so the seam cell is scanned too
        ext = pde.Field1D(
            x0=field.x0,
            h=h,
            values=np.concatenate([snap_u, [snap_u[0] - TWO_PI * j]]),
            t=t,
        )
        snap = positions.extract_positions(ext)
        xs = [cr.x for cr in snap.crossings if cr.direction == "falling"]
        xs = np.sort(np.mod(np.asarray(xs) - field.x0, period) + field.x0)
        if xs.size != j:
            variances.append(np.nan)
            means.append(np.nan)
            continue
        gaps = np.diff(np.concatenate([xs, [xs[0] + period]]))
        variances.append(float(np.var(gaps)))
        means.append(float(np.mean(xs)))
    variances = np.array(variances)
    means = np.array(means)
    # unwrap the drifting mean: one kink leaving through the seam moves
    # the mean by period/j; frames with a missed crossing are skipped
    ok = np.isfinite(means)
    t_ok, m_ok = log.times[ok], means[ok]
    dm = np.diff(m_ok)
    wrap = period / j
    dm = np.where(dm < -0.5 * wrap, dm + wrap, dm)
    dm = np.where(dm > 0.5 * wrap, dm - wrap, dm)
    path = np.concatenate([[m_ok[0]], m_ok[0] + np.cumsum(dm)])
    half = path.size // 2
    drift = float(np.polyfit(t_ok[half:], path[half:], 1)[0])
    return WashoutResult(
        times=log.times,
        variances=variances,
        drift_speed=drift,
        initial_variance=float(variances[0]),
    )
