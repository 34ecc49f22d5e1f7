"""Geometry of kink trains: level crossings, tracks, events, decomposition.

Positions are read off a sampled field as the interpolated crossings of
the half-levels (2k+1)*pi: falling crossings are kinks, rising ones
antikinks.  Crossings are chained over time into labeled tracks, from
which speeds and neighbor distances follow.  Collisions and
annihilations are located from the rise of the field minimum through
odd and even multiples of pi, refined by re-integrating between stored
frames.  The analytic position notion -- a superposition of front
profiles plus a remainder orthogonal to the weighted translation modes
-- is computed by Newton iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import pde

__all__ = [
    "Crossing",
    "PositionSnapshot",
    "TrackSet",
    "EventLog",
    "AnalyticDecomposition",
    "extract_positions",
    "assemble_tracks",
    "detect_events",
    "decompose_analytic",
]


@dataclass(frozen=True)
class Crossing:
    x: float
    level_index: int  # crossed level is (2*level_index + 1)*pi
    direction: str  # "falling" -> kink, "rising" -> antikink


@dataclass(frozen=True)
class PositionSnapshot:
    t: float
    crossings: tuple


def extract_positions(field) -> PositionSnapshot:
    """All interpolated crossings of levels (2k+1)*pi, ordered by location."""
    u = field.values
    x = field.x
    h = field.h
    lo, hi = float(u.min()), float(u.max())
    k_lo = int(np.ceil((lo / np.pi - 1.0) / 2.0))
    k_hi = int(np.floor((hi / np.pi - 1.0) / 2.0))
    found = []
    for k in range(k_lo, k_hi + 1):
        w = u - (2 * k + 1) * np.pi
        falling = np.where((w[:-1] > 0) & (w[1:] <= 0))[0]
        rising = np.where((w[:-1] < 0) & (w[1:] >= 0))[0]
        for idx, direction in ((falling, "falling"), (rising, "rising")):
            for i in idx:
                xi = x[i] + h * w[i] / (w[i] - w[i + 1])
                found.append(Crossing(x=float(xi), level_index=k, direction=direction))
    found.sort(key=lambda cr: cr.x)
    return PositionSnapshot(t=field.t, crossings=tuple(found))


# --- track assembly -------------------------------------------------------


@dataclass
class TrackSet:
    """Crossing positions chained over time.

    Columns of `kinks` are ordered innermost-first (rightmost kink
    first); columns of `antikinks` likewise (leftmost first).  Entries
    are NaN outside a track's lifetime.
    """

    times: np.ndarray
    kinks: np.ndarray  # (frames, m)
    antikinks: np.ndarray  # (frames, n)
    kink_levels: tuple
    antikink_levels: tuple
    flagged_frames: tuple

    def speeds(self, group: str = "kink") -> np.ndarray:
        xi = self.kinks if group == "kink" else self.antikinks
        v = np.full_like(xi, np.nan)
        if len(self.times) > 2:
            dtf = self.times[2:] - self.times[:-2]
            v[1:-1] = (xi[2:] - xi[:-2]) / dtf[:, None]
        return v

    def distances(self, group: str = "kink") -> np.ndarray:
        """Neighbor gaps d_j = |xi_j - xi_{j+1}|, innermost pair first."""
        xi = self.kinks if group == "kink" else self.antikinks
        return np.abs(np.diff(xi, axis=1))

    def d_min(self, group: str = "kink") -> np.ndarray:
        d = self.distances(group)
        if d.shape[1] == 0:
            return np.full(len(self.times), np.nan)
        return np.nanmin(d, axis=1)

    def pair_spans(self) -> np.ndarray:
        """|xi^-_j - xi^+_j| for matched kink/antikink labels."""
        p = min(self.kinks.shape[1], self.antikinks.shape[1])
        return np.abs(self.kinks[:, :p] - self.antikinks[:, :p])


def _match_frame(prev, current, max_jump):
    """Order-preserving nearest matching within one (level, direction) bin.

    Returns (assignment list: index into current or None, ambiguous flag).
    A frame is ambiguous when a track sees several candidates in its
    window, or several tracks compete for the same crossing.
    """
    lists = []
    for px in prev:
        cands = sorted(
            (abs(cx - px), j)
            for j, cx in enumerate(current)
            if max_jump is None or abs(cx - px) <= max_jump
        )
        lists.append(cands)
    ambiguous = any(len(c) > 1 for c in lists)
    best = [c[0][1] for c in lists if c]
    ambiguous |= len(best) != len(set(best))
    taken = set()
    assignment = []
    for cands in lists:
        pick = next((j for _, j in cands if j not in taken), None)
        assignment.append(pick)
        if pick is not None:
            taken.add(pick)
    return assignment, ambiguous


def assemble_tracks(snapshots, max_jump: float | None = None) -> TrackSet:
    """Chain snapshots into per-label tracks.

    Matching is nearest-neighbor within the same level and direction,
    limited to max_jump when given; frames where a bin offers several
    candidates inside the window are flagged (ties are broken in
    spatial order).  A crossing with no continuation ends its track; a
    crossing with no ancestor starts a new one.
    """
    times = np.array([s.t for s in snapshots])
    tracks = []  # dicts: level, direction, data {frame: x}
    live = {}  # (level, direction) -> list of track indices, spatial order
    flagged = []
    for fi, snap in enumerate(snapshots):
        bins = {}
        for cr in snap.crossings:
            bins.setdefault((cr.level_index, cr.direction), []).append(cr.x)
        new_live = {}
        keys = set(bins) | set(live)
        frame_flag = False
        for key in keys:
            xs = sorted(bins.get(key, []))
            prev_ids = live.get(key, [])
            prev_xs = [tracks[i]["data"][fi - 1] for i in prev_ids]
            assignment, amb = _match_frame(prev_xs, xs, max_jump)
            frame_flag |= amb
            used = set()
            cur_ids = {}
            for pi, j in zip(prev_ids, assignment):
                if j is not None:
                    tracks[pi]["data"][fi] = xs[j]
                    cur_ids[j] = pi
                    used.add(j)
            for j, xv in enumerate(xs):
                if j not in used:
                    tracks.append(
                        {"level": key[0], "direction": key[1], "data": {fi: xv}}
                    )
                    cur_ids[j] = len(tracks) - 1
            if cur_ids:
                new_live[key] = [cur_ids[j] for j in sorted(cur_ids)]
        live = new_live
        if frame_flag:
            flagged.append(fi)

    def build(direction):
        sel = [tr for tr in tracks if tr["direction"] == direction]
        # innermost first: kinks descend from the lowest half-level upward
        sel.sort(key=lambda tr: (tr["level"], min(tr["data"])))
        arr = np.full((len(times), len(sel)), np.nan)
        for col, tr in enumerate(sel):
            for fi, xv in tr["data"].items():
                arr[fi, col] = xv
        return arr, tuple(tr["level"] for tr in sel)

    kinks, kink_levels = build("falling")
    antikinks, antikink_levels = build("rising")
    return TrackSet(
        times=times,
        kinks=kinks,
        antikinks=antikinks,
        kink_levels=kink_levels,
        antikink_levels=antikink_levels,
        flagged_frames=tuple(flagged),
    )


# --- events ---------------------------------------------------------------


@dataclass(frozen=True)
class EventLog:
    collisions: tuple  # (t, x, level i)
    annihilations: tuple  # (t, level i)


def _first_upcross(times, series, level):
    """Index k with series[k] < level <= series[k+1], or None."""
    below = series[:-1] < level
    above = series[1:] >= level
    hits = np.where(below & above)[0]
    return int(hits[0]) if hits.size else None


def _refine_upcross(field0, snap, t_a, span, dt_fine, nl, level):
    """Re-integrate from a stored frame and interpolate the crossing."""
    f = field0.with_values(snap, t=t_a)
    _, fine = pde.run(f, t_a + span, dt_fine, nl=nl, cadence=1)
    k = _first_upcross(fine.times, fine.min_u, level)
    if k is None:  # crossing sits at the coarse frame boundary
        k = len(fine.times) - 2
    t0, t1 = fine.times[k], fine.times[k + 1]
    m0, m1 = fine.min_u[k], fine.min_u[k + 1]
    frac = 0.0 if m1 == m0 else (level - m0) / (m1 - m0)
    t_star = t0 + frac * (t1 - t0)
    u_star = fine.snapshots[k if frac < 0.5 else k + 1]
    return float(t_star), u_star


def _argmin_location(field0, u):
    """Sub-cell minimum location by parabolic refinement."""
    i = int(np.argmin(u))
    x = field0.x0 + field0.h * i
    if 0 < i < u.size - 1:
        a, b, c = u[i - 1], u[i], u[i + 1]
        denom = a - 2 * b + c
        if denom > 0:
            x += 0.5 * field0.h * (a - c) / denom
    return float(x)


def detect_events(field0, log, nl, dt: float, refine: int = 16, top_slack: float = 0.0) -> EventLog:
    """Collision and annihilation times from the rise of the field minimum.

    Collision i: the minimum rises through (2i-1)*pi; its location is
    the (refined) minimizer there.  Annihilation i: the minimum rises
    through 2*pi*i.  The top annihilation level is only approached
    asymptotically when the counts balance, so it may be given a small
    slack.  Each event time is refined by re-running from the last
    stored frame with step dt/refine.
    """
    first = log.snapshots[0]
    snap0 = extract_positions(field0.with_values(first, t=log.times[0]))
    m = sum(1 for cr in snap0.crossings if cr.direction == "falling")
    n = sum(1 for cr in snap0.crossings if cr.direction == "rising")
    pairs = min(m, n)
    if pairs == 0:
        return EventLog(collisions=(), annihilations=())
    dt_fine = dt / refine
    collisions, annihilations = [], []
    for i in range(1, pairs + 1):
        targets = [("collision", (2 * i - 1) * np.pi)]
        lvl = 2 * np.pi * i
        if i == pairs and top_slack > 0:
            lvl -= top_slack
        targets.append(("annihilation", lvl))
        for kind, level in targets:
            k = _first_upcross(log.times, log.min_u, level)
            if k is None:
                continue
            span = log.times[k + 1] - log.times[k]
            t_star, u_star = _refine_upcross(
                field0, log.snapshots[k], log.times[k], span, dt_fine, nl, level
            )
            if kind == "collision":
                collisions.append((t_star, _argmin_location(field0, u_star), i))
            else:
                annihilations.append((t_star, i))
    return EventLog(collisions=tuple(collisions), annihilations=tuple(annihilations))


# --- analytic positions ---------------------------------------------------


@dataclass(frozen=True)
class AnalyticDecomposition:
    eta: np.ndarray  # positions, decreasing (rightmost first is eta[0]? see below)
    w: np.ndarray  # remainder on the field mesh
    residuals: np.ndarray  # orthogonality conditions at the solution


class _DerivSpline:
    """phi' interpolant with its exact exponential tails."""

    def __init__(self, front):
        self.front = front
        self.spl = CubicSpline(front.grid, front.deriv)
        self.z0, self.z1 = front.grid[0], front.grid[-1]

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < self.z0
        right = z > self.z1
        mid = ~(left | right)
        fr = self.front
        out[mid] = self.spl(z[mid])
        out[left] = -fr.mu * fr.a_minus * np.exp(fr.mu * z[left])
        out[right] = fr.lam * fr.a_plus * np.exp(fr.lam * z[right])
        return out


def decompose_analytic(
    field,
    front,
    eta_guess,
    tol: float = 1e-10,
    max_iter: int = 40,
    delta_star: float | None = None,
) -> AnalyticDecomposition:
    """Split a comoving-frame field into front superposition + remainder.

    Solves the orthogonality conditions <u - sum phi(.-eta_j), e_i*> = 0
    with weights e_i* = exp(c(z-eta_i)) phi'(z-eta_i) by Newton iteration
    with finite-difference Jacobian; integrals are trapezoid sums on the
    field mesh, each weight centered at its own kink so the exponential
    stays bounded.
    """
    eta = np.sort(np.asarray(eta_guess, dtype=float))[::-1].copy()
    n = eta.size
    if delta_star is not None and n > 1:
        gap = float(np.min(-np.diff(eta)))
        if gap < delta_star:
            raise ValueError(
                f"minimum gap {gap:.3f} below the validity threshold {delta_star:.3f}"
            )
    z = field.x
    u = field.values
    c = front.c
    dphi = _DerivSpline(front)
    # normalization <e^{cs} phi'(s), phi'(s)> on a dedicated fine mesh
    s = np.arange(front.grid[0], front.grid[-1] + 1e-12, field.h)
    ds = dphi(s)
    norm = np.trapezoid(np.exp(c * s) * ds * ds, s)

    def conditions(et):
        resid = u - sum(front.eval(z - e) for e in et)
        out = np.empty(n)
        for i, e in enumerate(et):
            s_i = z - e
            w_i = np.exp(c * s_i) * dphi(s_i)
            out[i] = np.trapezoid(resid * w_i, z) / norm
        return out, resid

    phi_vals, resid = conditions(eta)
    step = 1e-7
    for _ in range(max_iter):
        if np.abs(phi_vals).max() <= tol:
            return AnalyticDecomposition(eta=eta, w=resid, residuals=phi_vals)
        jac = np.empty((n, n))
        for j in range(n):
            bumped = eta.copy()
            bumped[j] += step
            jac[:, j] = (conditions(bumped)[0] - phi_vals) / step
        try:
            delta = np.linalg.solve(jac, -phi_vals)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(delta)) or np.abs(delta).max() > 5.0:
            break
        eta = eta + delta
        phi_vals, resid = conditions(eta)
    gap = float(np.min(-np.diff(np.sort(eta)[::-1]))) if n > 1 else np.inf
    raise RuntimeError(
        f"decomposition did not converge (min gap {gap:.3f}); "
        "separation is likely below the validity regime"
    )
