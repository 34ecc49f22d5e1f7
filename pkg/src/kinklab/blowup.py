"""Polar blow-up of the pairwise-distance system.

With z_j = exp(-normalized distance j), the distance dynamics become a
quadratic vector field on the nonnegative orthant with its interesting
behaviour concentrated at the origin.  Writing z = r * Psi with Psi on
the unit sphere and rescaling time by r desingularizes the origin: the
radius obeys r' = -Sigma(Psi) r while the angular part becomes an
autonomous cubic flow on the sphere whose equilibria organize the
large-time ordering of the distances.  This module evaluates the fields,
enumerates every angular equilibrium in closed form, and checks the
spectrum at the attracting ray against its integer normal form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

__all__ = [
    "EquilibriumPoint",
    "sigma",
    "sigma_batch",
    "angular_field",
    "angular_jacobian",
    "cartesian_field",
    "vector_field_polar",
    "beta",
    "equilibrium_E",
    "eigenvalues_at_E",
    "enumerate_equilibria",
]


def _left(psi: np.ndarray) -> np.ndarray:
    """Shift right by one, zero-padded: entry j holds psi_{j-1}."""
    out = np.zeros_like(psi)
    out[1:] = psi[:-1]
    return out


def sigma(psi) -> float:
    """Sigma(Psi) = sum_j Psi_j^2 (Psi_j - Psi_{j-1}), with Psi_0 = 0."""
    psi = np.asarray(psi, dtype=float)
    return float(np.sum(psi**2 * (psi - _left(psi))))


def sigma_batch(points: np.ndarray) -> np.ndarray:
    """sigma for an array of points, one per row."""
    points = np.asarray(points, dtype=float)
    left = np.zeros_like(points)
    left[:, 1:] = points[:, :-1]
    return np.sum(points**2 * (points - left), axis=1)


def angular_field(psi) -> np.ndarray:
    """Angular part of the desingularized flow on the unit sphere."""
    psi = np.asarray(psi, dtype=float)
    return psi * (sigma(psi) - psi + _left(psi))


def angular_jacobian(psi) -> np.ndarray:
    """Exact Jacobian of angular_field (the cubic extension off the sphere)."""
    psi = np.asarray(psi, dtype=float)
    n = psi.size
    left = _left(psi)
    right = np.zeros_like(psi)
    right[:-1] = psi[1:]
    s = sigma(psi)
    dsigma = 3 * psi**2 - 2 * psi * left - right**2
    jac = np.diag(s - psi + left) + np.outer(psi, dsigma)
    jac -= np.diag(psi)
    jac[1:, :-1] += np.diag(psi[1:])
    return jac


def cartesian_field(z, epsilon: float = 0.5, g=None) -> np.ndarray:
    """z_j' = -z_j^2 + z_{j-1} z_j - g_j z_j z_max^(1+eps), z_0 = 0."""
    z = np.asarray(z, dtype=float)
    out = z * (_left(z) - z)
    if g is not None:
        out -= np.asarray(g(z)) * z * np.max(z) ** (1.0 + epsilon)
    return out


def vector_field_polar(r: float, psi, epsilon: float = 0.5, g=None):
    """Desingularized radial and angular derivatives at (r, Psi).

    With g supplied, the same perturbation as in cartesian_field is
    carried through the substitution z = r Psi exactly, so the two
    fields agree after the time rescaling by r.
    """
    psi = np.asarray(psi, dtype=float)
    s = sigma(psi)
    rdot = -s * r
    psidot = psi * (s - psi + _left(psi))
    if g is not None:
        gv = np.asarray(g(r * psi), dtype=float)
        corr = np.max(psi) ** (1.0 + epsilon) * r**epsilon
        weight = float(gv @ psi**2)
        rdot -= r * corr * weight
        psidot += corr * psi * (weight - gv)
    return rdot, psidot


def beta(n: int) -> float:
    """n(n+1)(2n+1)/6, the square norm of the vector (1, 2, ..., n)."""
    return n * (n + 1) * (2 * n + 1) / 6.0


def equilibrium_E(n: int) -> np.ndarray:
    """The fully ordered equilibrium, proportional to (1, 2, ..., n)."""
    v = np.arange(1.0, n + 1.0)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class EquilibriumPoint:
    psi: np.ndarray
    zero_pattern: tuple
    sigma_value: float
    tangential_eigenvalues: np.ndarray | None = None
    transverse_eigenvalue: float | None = None


def _chain_vector(pattern) -> np.ndarray:
    """Integer chain values 1, 2, ... along each nonzero run."""
    v = np.zeros(len(pattern))
    run = 0
    for j, on in enumerate(pattern):
        run = run + 1 if on else 0
        v[j] = run
    return v


def _point_eigenvalues(psi: np.ndarray):
    jac = angular_jacobian(psi)
    basis = null_space(psi[None, :])
    tangential = np.linalg.eigvals(basis.T @ jac @ basis)
    transverse = float(psi @ jac @ psi)
    return np.sort_complex(tangential), transverse


def enumerate_equilibria(n: int, with_eigenvalues: bool = False):
    """All 2(2^n - 1) equilibria of the angular flow, in closed form.

    An equilibrium needs, for every j, either Psi_j = 0 or
    Psi_j = Psi_{j-1} + Sigma, so the nonzero entries climb in
    arithmetic runs Sigma, 2 Sigma, ... that restart after each zero.
    Given the zero pattern that fixes the direction completely, and
    normalization puts Sigma = +-1/||chain||; no root finding needed.
    """
    if not 1 <= n <= 12:
        raise ValueError("n must be between 1 and 12")
    points = []
    for mask in range(1, 2**n):
        pattern = tuple((mask >> j) & 1 == 1 for j in range(n))
        v = _chain_vector(pattern)
        psi = v / np.linalg.norm(v)
        for sign in (+1.0, -1.0):
            p = sign * psi
            tang, trans = _point_eigenvalues(p) if with_eigenvalues else (None, None)
            p.setflags(write=False)
            points.append(
                EquilibriumPoint(
                    psi=p,
                    zero_pattern=pattern,
                    sigma_value=sigma(p),
                    tangential_eigenvalues=tang,
                    transverse_eigenvalue=trans,
                )
            )
    return points


def eigenvalues_at_E(n: int):
    """Spectrum of the scaled linearization at the ordered equilibrium.

    The Jacobian is evaluated at E and scaled by E_1^{-3} = beta^{3/2},
    which turns its eigenvalues into integers: -k*beta for k = 2..n on
    the tangent space of the sphere, and +2*beta along E itself.  The
    tangent basis is built by Gram-Schmidt from the vectors
    j*e_1 - e_j, which are orthogonal to E by construction.
    """
    if n < 2:
        raise ValueError("need at least two distances")
    e_point = equilibrium_E(n)
    scale = beta(n) ** 1.5
    jac = angular_jacobian(e_point) * scale
    raw = np.zeros((n, n - 1))
    for j in range(2, n + 1):
        raw[0, j - 2] = j
        raw[j - 1, j - 2] = -1.0
    basis, _ = np.linalg.qr(raw)
    tangential = np.sort(np.linalg.eigvals(basis.T @ jac @ basis).real)
    transverse = float(e_point @ jac @ e_point)
    return tangential, transverse
