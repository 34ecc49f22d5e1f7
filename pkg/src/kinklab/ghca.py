"""Excitable cellular automaton on a line of cells.

Each cell holds a state in {0, ..., e+r}: 0 is rest, {1, ..., e} are
excited, and the remaining r states are refractory.  A resting cell
fires when a nearest neighbor is excited; every nonzero state counts
up once per step and e+r relaxes back to rest.  Localized pulse blocks
travel at unit speed, carry their direction in their shape, and
annihilate pairwise on head-on collision, which makes the automaton a
convenient discrete reference for annihilation-event bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CARule",
    "CAConfiguration",
    "CollisionEvent",
    "CollisionSequence",
    "right_pulse_block",
    "left_pulse_block",
    "place_pulses",
    "pulse_positions",
    "step",
    "run",
    "extract_collisions",
]


@dataclass(frozen=True)
class CARule:
    """Counts of excited and refractory states; alphabet {0, ..., e+r}."""

    e: int = 2
    r: int = 4

    def __post_init__(self):
        if self.e < 1 or self.r < 1:
            raise ValueError("need at least one excited and one refractory state")

    @property
    def n_states(self) -> int:
        return self.e + self.r + 1


@dataclass(frozen=True)
class CAConfiguration:
    """A row of cells plus the boundary convention ('rest' or 'periodic')."""

    cells: np.ndarray
    boundary: str = "rest"

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        if self.boundary not in ("rest", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if cells.ndim != 1:
            raise ValueError("cells must be one-dimensional")

    def validate(self, rule: CARule) -> None:
        if self.cells.size and (self.cells.min() < 0 or self.cells.max() > rule.e + rule.r):
            raise ValueError("cell state outside rule alphabet")


@dataclass(frozen=True)
class CollisionEvent:
    position: int
    time: int


@dataclass(frozen=True)
class CollisionSequence:
    events: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.events)

    def positions(self) -> np.ndarray:
        return np.array([ev.position for ev in self.events], dtype=np.int64)

    def times(self) -> np.ndarray:
        return np.array([ev.time for ev in self.events], dtype=np.int64)


def right_pulse_block(rule: CARule) -> np.ndarray:
    """Block of a right-moving pulse, oldest state first.

    Read left to right the states descend e+r, ..., 2, 1: the excited
    head sits at the right edge and recruits the resting cell beyond it,
    so the whole block translates one cell rightward per step.
    """
    return np.arange(rule.e + rule.r, 0, -1, dtype=np.int64)


def left_pulse_block(rule: CARule) -> np.ndarray:
    return right_pulse_block(rule)[::-1].copy()


def place_pulses(n_cells, placements, rule: CARule | None = None, boundary="rest"):
    """Build a configuration with pulses whose heads sit at given cells.

    placements: iterable of (head_index, direction) with direction +1 for
    a right-mover, -1 for a left-mover.  The head is the cell holding
    state 1.  Raises if blocks would overlap or fall off a rest boundary.
    """
    rule = rule or CARule()
    cells = np.zeros(int(n_cells), dtype=np.int64)
    width = rule.e + rule.r
    for head, direction in placements:
        head = int(head)
        if direction == 1:
            idx = np.arange(head - width + 1, head + 1)
            block = right_pulse_block(rule)
        elif direction == -1:
            idx = np.arange(head, head + width)
            block = left_pulse_block(rule)
        else:
            raise ValueError("direction must be +1 or -1")
        if boundary == "periodic":
            idx = idx % cells.size
        elif idx[0] < 0 or idx[-1] >= cells.size:
            raise ValueError("pulse block falls outside the domain")
        if np.any(cells[idx]):
            raise ValueError("pulse blocks overlap")
        cells[idx] = block
    return CAConfiguration(cells, boundary)


def pulse_positions(config: CAConfiguration) -> np.ndarray:
    """Head cells (state 1) of free pulses, in index order."""
    return np.flatnonzero(config.cells == 1)


def step(rule: CARule, config: CAConfiguration) -> CAConfiguration:
    """One synchronous update of every cell."""
    cells = config.cells
    nxt = np.where(cells > 0, cells + 1, 0)
    nxt[cells == rule.e + rule.r] = 0
    excited = (cells >= 1) & (cells <= rule.e)
    if config.boundary == "periodic":
        neighbor_excited = np.roll(excited, 1) | np.roll(excited, -1)
    else:
        neighbor_excited = np.zeros_like(excited)
        neighbor_excited[1:] |= excited[:-1]
        neighbor_excited[:-1] |= excited[1:]
    nxt[(cells == 0) & neighbor_excited] = 1
    return CAConfiguration(nxt, config.boundary)


def run(rule: CARule, config: CAConfiguration, steps: int) -> list:
    """Orbit [config, step(config), ...] of length steps + 1."""
    config.validate(rule)
    orbit = [config]
    for _ in range(int(steps)):
        config = step(rule, config)
        orbit.append(config)
    return orbit


def _excited_clusters(rule: CARule, config: CAConfiguration):
    """Maximal runs of excited cells as (start, stop) index pairs,
    stop exclusive; on a periodic domain a wrapping run is reported
    with stop > n so that it stays a single cluster."""
    excited = (config.cells >= 1) & (config.cells <= rule.e)
    n = excited.size
    if not excited.any():
        return []
    idx = np.flatnonzero(excited)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    stops = np.concatenate((idx[breaks] + 1, [idx[-1] + 1]))
    clusters = list(zip(starts.tolist(), stops.tolist()))
    if config.boundary == "periodic" and len(clusters) > 1:
        first, last = clusters[0], clusters[-1]
        if first[0] == 0 and last[1] == n:
            clusters = clusters[1:-1] + [(last[0], first[1] + n)]
    return clusters


def _touches(a, b, n, periodic):
    """Whether index ranges a and b overlap or sit within one cell."""
    lo_a, hi_a = a
    lo_b, hi_b = b
    shifts = (0,) if not periodic else (0, n, -n)
    return any(lo_a < hi_b + 1 + s and lo_b + s < hi_a + 1 for s in shifts)


def extract_collisions(rule: CARule, orbit) -> CollisionSequence:
    """Annihilation events from an orbit.

    Excited-cell clusters are tracked step to step (a pulse moves at
    most one cell, so identity is overlap within one cell).  When the
    clusters of two pulses merge and the merged excitation then dies
    out, that is one annihilation: the event time is the first step
    with the excitation gone and the position is the midpoint of the
    cells excited on the last step, rounded toward the left.
    """
    n = orbit[0].cells.size if orbit else 0
    periodic = bool(orbit) and orbit[0].boundary == "periodic"
    # lineage: [cluster at the previous step, number of original pulses]
    lineages = []
    events = []
    for t, config in enumerate(orbit):
        clusters = _excited_clusters(rule, config)
        matched = [[] for _ in clusters]
        for lin in lineages:
            hits = [k for k, cl in enumerate(clusters) if _touches(lin[0], cl, n, periodic)]
            if not hits:
                if lin[1] >= 2:
                    lo, hi = lin[0]
                    pos = (lo + hi - 1) // 2
                    events.append(CollisionEvent(position=pos % n if periodic else pos, time=t))
                continue
            for k in hits:
                matched[k].append(lin)
        lineages = [
            [cl, sum(p[1] for p in matched[k]) if matched[k] else 1]
            for k, cl in enumerate(clusters)
        ]
    return CollisionSequence(events=tuple(sorted(events, key=lambda ev: (ev.time, ev.position))))
