"""Numerical laboratory for kink/antikink dynamics in a 1D excitable phase equation.

Subpackages cover the reaction term, the traveling front, the discretized
PDE with position tracking, the reduced interaction ODEs and their polar
blow-up, the periodic boundary value problem, and a Greenberg-Hastings
cellular automaton used as a discrete reference.
"""

__version__ = "0.1.0"
