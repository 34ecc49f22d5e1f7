"""Excitable reaction term f(theta) = cos(theta + theta0) + f0 and friends.

The phase offset theta0 is always derived from the excitability parameter
f0 so that f(0) = 0 with f'(0) < 0: theta0 = arccos(-f0), which lies in
(pi/2, pi) for f0 in (0, 1).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Nonlinearity:
    """Reaction term of the excitable phase equation.

    f0 is the dimensionless excitability parameter in (0, 1); theta0 is
    derived, never set independently (see make_nonlinearity).
    """

    f0: float
    theta0: float

    def f(self, theta):
        """Reaction term cos(theta + theta0) + f0; 2pi-periodic, f(0) = 0."""
        return np.cos(theta + self.theta0) + self.f0

    def f_prime(self, theta):
        """Derivative -sin(theta + theta0); f_prime(0) = -sqrt(1 - f0^2) < 0."""
        return -np.sin(theta + self.theta0)

    def F(self, theta):
        """Antiderivative of f normalized to F(0) = 0.

        Closed form sin(theta + theta0) - sin(theta0) + f0*theta, so that
        F(2*pi*j) - F(0) = 2*pi*j*f0 exactly; the speed identities of the
        periodic BVP rely on these exact differences.
        """
        return np.sin(theta + self.theta0) - np.sin(self.theta0) + self.f0 * theta

    @property
    def fprime0(self) -> float:
        """f'(0) = -sqrt(1 - f0^2), the linearization rate at the rest state."""
        return -float(np.sqrt(1.0 - self.f0**2))

    @property
    def unstable_zero(self) -> float:
        """The second zero of f in (0, 2pi): 2*pi - 2*theta0, where f' > 0."""
        return 2.0 * np.pi - 2.0 * self.theta0


def make_nonlinearity(f0: float) -> Nonlinearity:
    """Build the reaction term for a given excitability parameter.

    Rejects f0 outside (0, 1): at the endpoints the two zeros of f collide
    (saddle-node) and the medium stops being excitable.
    """
    if not 0.0 < f0 < 1.0:
        raise ValueError(f"f0 must lie in (0, 1), got {f0}")
    return Nonlinearity(f0=float(f0), theta0=float(np.arccos(-f0)))
