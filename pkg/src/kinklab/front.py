"""Single traveling kink: speed, profile, tail data, interaction coefficients.

The kink is the heteroclinic orbit of the planar system

    u' = phi,   phi' = -c*phi - f(u)

from the saddle (2*pi, 0) to the saddle (0, 0), strictly decreasing in
between and pinned by the normalization phi(0) = pi.  The wave speed c is
the unique damping for which the orbit leaves one saddle and lands on the
other; we find it by bisection on a shooting criterion.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .nonlinearity import Nonlinearity

LAUNCH_OFFSET = 1e-8  # distance from the saddle along the unstable eigenvector


def tail_rates(nl: Nonlinearity, c: float):
    """Linearization rates at the rest states: mu > 0 (unstable), lambda < 0 (stable).

    Roots of nu^2 + c*nu + f'(0) = 0; since f'(0) < 0 they are real with
    opposite signs, and lambda + mu = -c, lambda*mu = f'(0).
    """
    disc = np.sqrt(c * c - 4.0 * nl.fprime0)
    mu = 0.5 * (-c + disc)
    lam = 0.5 * (-c - disc)
    return mu, lam


def _launch_state(nl: Nonlinearity, c: float):
    # start just off the saddle (2pi, 0), along its unstable eigenvector (1, mu),
    # heading down in u (phi < 0)
    mu, _ = tail_rates(nl, c)
    norm = np.hypot(1.0, mu)
    du = LAUNCH_OFFSET / norm
    return np.array([2.0 * np.pi - du, -mu * du]), du


def _shoot(nl: Nonlinearity, c: float, rtol=1e-13, atol=1e-14, dense=False,
           u_floor=0.0):
    """Integrate one shot; terminate on u=u_floor (overshoot) or phi=0 (turnback)."""
    y0, _ = _launch_state(nl, c)
    mu, _ = tail_rates(nl, c)

    def rhs(s, y):
        return [y[1], -c * y[1] - nl.f(y[0])]

    def hit_floor(s, y):
        return y[0] - u_floor

    hit_floor.terminal = True
    hit_floor.direction = -1

    def turn_back(s, y):
        return y[1]

    turn_back.terminal = True
    turn_back.direction = 1

    # generous span: traversal takes ~log(2pi/offset)/mu plus an O(1/c) tail
    s_max = (np.log(2 * np.pi / LAUNCH_OFFSET) + 30.0) / min(mu, 1.0) + 200.0
    sol = solve_ivp(rhs, (0.0, s_max), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=(hit_floor, turn_back), dense_output=dense)
    overshoot = len(sol.t_events[0]) > 0
    turnback = len(sol.t_events[1]) > 0
    return sol, overshoot, turnback


def _classify(nl, c) -> int:
    """+1 if the shot turns back before reaching u=0, -1 if it overshoots."""
    sol, overshoot, turnback = _shoot(nl, c)
    if overshoot:
        return -1
    if turnback:
        return +1
    # neither event fired: ran out of span, treat final phi sign as verdict
    return +1 if sol.y[1, -1] > -1e-12 else -1


def compute_speed(nl: Nonlinearity, tol: float = 1e-10,
                  c_range=(1e-4, 5.0)) -> float:
    """Wave speed by bisection on the phase-plane shooting criterion.

    Bisects until the c-bracket is at rounding level, then checks that the
    converged shot passes within `tol` of the target saddle (0, 0).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = c_range
    s_lo, s_hi = _classify(nl, lo), _classify(nl, hi)
    if s_lo == s_hi:
        raise RuntimeError(
            f"no shooting bracket in c_range={c_range} (both ends classify {s_lo:+d}); "
            "widen the range or check the nonlinearity parameters")
    while hi - lo > 1e-15 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _classify(nl, mid) == s_lo:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    resid = shooting_residual(nl, c)
    if resid > tol:
        raise RuntimeError(f"shooting residual {resid:.3e} exceeds tol {tol:.1e}")
    return c


def shooting_residual(nl: Nonlinearity, c: float, u_sect: float = 1e-4) -> float:
    """Unstable-mode amplitude of the shot at the section u = u_sect.

    Decomposing the state near the target saddle into stable/unstable
    eigenmodes, the miss shows up as the coefficient b_u = (phi - phi_s(u))
    / (mu - lambda), which is linear in c - c* (the raw closest-approach
    distance only scales as its square root and saturates in doubles).
    phi_s(u) = lambda*u + q*u^2 is the stable manifold through second
    order, leaving an O(u_sect^3) bias on the heteroclinic itself.
    """
    mu, lam = tail_rates(nl, c)
    # quadratic coefficient of the stable manifold: q*(3*lambda+c) = -f''(0)/2
    q = -nl.f0 / (2.0 * (3.0 * lam + c))
    sol, _, _ = _shoot(nl, c, u_floor=u_sect)
    u, phi = sol.y[0, -1], sol.y[1, -1]
    return float(abs(phi - lam * u - q * u * u) / (mu - lam))


@dataclass
class FrontProfile:
    """Sampled kink profile with tail and interaction data.

    Fields beyond (grid, values, deriv, c) are filled in by fit_tails and
    compute_interaction_coefficients; eval/eval_deriv extend the samples by
    the linear tail formulas once the amplitudes are known.
    """

    c: float
    f0: float
    grid: np.ndarray
    values: np.ndarray
    deriv: np.ndarray
    mu: float | None = None
    lam: float | None = None
    a_plus: float | None = None
    a_minus: float | None = None
    capital_lambda: float | None = None
    a_L: float | None = None
    a_R: float | None = None
    _spline: CubicSpline = field(default=None, repr=False, compare=False)
    _dspline: CubicSpline = field(default=None, repr=False, compare=False)

    def _splines(self):
        if self._spline is None:
            self._spline = CubicSpline(self.grid, self.values)
            self._dspline = CubicSpline(self.grid, self.deriv)
        return self._spline, self._dspline

    def eval(self, z):
        """phi(z): cubic interpolation inside the grid, linear tails outside."""
        sp, _ = self._splines()
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < self.grid[0]
        right = z > self.grid[-1]
        mid = ~(left | right)
        out[mid] = sp(z[mid])
        out[left] = 2 * np.pi - self.a_minus * np.exp(self.mu * z[left])
        out[right] = self.a_plus * np.exp(self.lam * z[right])
        return out

    def eval_deriv(self, z):
        _, dsp = self._splines()
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < self.grid[0]
        right = z > self.grid[-1]
        mid = ~(left | right)
        out[mid] = dsp(z[mid])
        out[left] = -self.mu * self.a_minus * np.exp(self.mu * z[left])
        out[right] = self.lam * self.a_plus * np.exp(self.lam * z[right])
        return out


def compute_profile(nl: Nonlinearity, c: float, half_width: float | None = None,
                    h: float = 0.01) -> FrontProfile:
    """Integrate the kink and sample it on [-half_width, half_width], phi(0)=pi.

    The trajectory is launched off the saddle at (2pi,0); left of the launch
    point and right of the floor event the exact linearizations at the two
    saddles stand in for the integration (relative error O(launch offset)).
    """
    mu, lam = tail_rates(nl, c)
    if half_width is None:
        half_width = 10.0 / mu
    y0, du = _launch_state(nl, c)

    def rhs(s, y):
        return [y[1], -c * y[1] - nl.f(y[0])]

    u_floor = 1e-7

    def hit_floor(s, y):
        return y[0] - u_floor

    hit_floor.terminal = True
    hit_floor.direction = -1

    s_max = (np.log(2 * np.pi / LAUNCH_OFFSET) + np.log(2 * np.pi / u_floor)) \
        / min(mu, -lam) + 50.0 / min(-lam, 1.0)
    # tolerance tight enough that the shot tracks the stable manifold down to
    # u_floor before the inevitable veer-off along the unstable direction
    sol = solve_ivp(rhs, (0.0, s_max), y0, method="DOP853",
                    rtol=1e-13, atol=1e-14, events=hit_floor, dense_output=True)
    if not sol.t_events[0].size:
        raise RuntimeError("profile integration never reached the far tail; "
                           "c is off the heteroclinic value")
    s_end = sol.t_events[0][0]
    u_end, phi_end = sol.y_events[0][0]

    # translate so that u(s_pi) = pi
    s_pi = brentq(lambda s: sol.sol(s)[0] - np.pi, 0.0, s_end, xtol=1e-14)

    n_half = int(round(half_width / h))
    z = np.arange(-n_half, n_half + 1) * h
    s = z + s_pi
    u = np.empty_like(z)
    up = np.empty_like(z)

    pre = s < 0.0  # left of the launch point: saddle linearization at 2pi
    grow = np.exp(mu * s[pre])
    u[pre] = 2 * np.pi - du * grow
    up[pre] = -mu * du * grow

    post = s > s_end  # beyond the floor: stable linearization at 0
    decay = np.exp(lam * (s[post] - s_end))
    u[post] = u_end * decay
    up[post] = phi_end * decay

    mid = ~(pre | post)
    u[mid], up[mid] = sol.sol(s[mid])

    return FrontProfile(c=c, f0=nl.f0, grid=z, values=u, deriv=up)


@dataclass
class TailFit:
    mu: float
    lam: float
    a_plus: float
    a_minus: float
    slope_right: float  # free-slope regression, should match lam
    slope_left: float   # should match mu
    resid_right: float
    resid_left: float


def fit_tails(profile: FrontProfile, window=(1e-6, 1e-3)) -> TailFit:
    """Tail rates from the closed forms, amplitudes by log-linear fits.

    mu and lambda come from the characteristic roots (exact given c); the
    window selects samples whose distance to the rest state lies in
    [window[0], window[1]], where the linear tail dominates.
    """
    nl_fp0 = -np.sqrt(1.0 - profile.f0**2)
    c = profile.c
    disc = np.sqrt(c * c - 4.0 * nl_fp0)
    mu, lam = 0.5 * (-c + disc), 0.5 * (-c - disc)

    z, u = profile.grid, profile.values
    right = (u > window[0]) & (u < window[1])
    left_dev = 2 * np.pi - u
    left = (left_dev > window[0]) & (left_dev < window[1])
    if right.sum() < 10 or left.sum() < 10:
        raise RuntimeError("tail window contains too few samples; "
                           "increase half_width")

    def logfit(zs, ws, rate):
        slope, icpt = np.polyfit(zs, np.log(ws), 1)
        amp = np.exp(np.mean(np.log(ws) - rate * zs))
        resid = float(np.sqrt(np.mean((np.log(ws) - rate * zs - np.log(amp)) ** 2)))
        return slope, amp, resid

    slope_r, a_plus, resid_r = logfit(z[right], u[right], lam)
    slope_l, a_minus, resid_l = logfit(z[left], left_dev[left], mu)
    if max(resid_r, resid_l) > 1e-2:
        raise RuntimeError("tail fit residual too large; tails not in the "
                           "linear regime (increase half_width)")

    profile.mu, profile.lam = mu, lam
    profile.a_plus, profile.a_minus = a_plus, a_minus
    return TailFit(mu, lam, a_plus, a_minus, slope_r, slope_l, resid_r, resid_l)


def compute_interaction_coefficients(profile: FrontProfile):
    """Adjoint normalization and neighbor-interaction coefficients.

    capital_lambda = 1 / int e^{cz} phi'(z)^2 dz; the integrand decays like
    e^{-(2mu+c)|z|} on both sides, so the trapezoid on the sampled grid
    converges; the reported truncation bound integrates the end values of
    the integrand analytically.
    """
    if profile.mu is None:
        raise RuntimeError("fit_tails must run first")
    c, mu, lam = profile.c, profile.mu, profile.lam
    z, up = profile.grid, profile.deriv
    integrand = np.exp(c * z) * up**2
    if not np.all(np.isfinite(integrand)):
        raise RuntimeError("non-finite quadrature integrand")
    quad = np.trapezoid(integrand, z)
    trunc = integrand[-1] / (2 * mu + c) + integrand[0] / (2 * mu + c)
    capital_lambda = 1.0 / quad
    pref = capital_lambda * profile.a_plus * profile.a_minus
    a_L = pref * mu * (2 * mu + c)
    a_R = pref * lam * (2 * lam + c)
    if a_L <= 0 or a_R <= 0:
        raise RuntimeError("interaction coefficients came out non-positive")
    profile.capital_lambda = capital_lambda
    profile.a_L, profile.a_R = a_L, a_R
    profile.trunc_bound = trunc
    return capital_lambda, a_L, a_R


def compute_front(nl: Nonlinearity, tol: float = 1e-10, half_width=None,
                  h: float = 0.01) -> FrontProfile:
    """Full pipeline: speed, profile, tails, interaction coefficients."""
    c = compute_speed(nl, tol)
    profile = compute_profile(nl, c, half_width=half_width, h=h)
    fit_tails(profile)
    compute_interaction_coefficients(profile)
    return profile
