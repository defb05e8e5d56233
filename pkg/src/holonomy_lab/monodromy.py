"""Holonomy representations of the punctured plane's loop group.

Generators of the fundamental group are realized as lassos: a spoke from
the basepoint toward a puncture, one counterclockwise circle around it, and
the spoke reversed.  Lasso j winds once around puncture j and zero times
around the others; spokes bend around intervening punctures, which cannot
change any winding number because a spoke exactly cancels its own reverse.

Generator labels follow the puncture labels in sorted order, so the
representation's generator ordering is reproducible.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import transport as _transport
from .connection import ConnectionSpec
from .errors import (
    DegenerateConfiguration,
    DimensionMismatch,
    FlatnessUnverified,
    NonCommutingResidues,
    UnknownLabel,
)
from .geometry import (
    Circle,
    Concat,
    PathSpec,
    PlanePoint,
    Polyline,
    PunctureSet,
    _as_complex,
    winding_number,
)
from .util import parallel_map

#: lasso circles never exceed this radius
MAX_LASSO_RADIUS = 0.5
#: lasso circles below this radius are numerically degenerate
MIN_LASSO_RADIUS = 1e-9
#: residues with pairwise commutators above this are not "commuting"
COMMUTATOR_TOL = 1e-10


@dataclass
class Representation:
    """Loop-generator matrices of a flat connection's holonomy."""

    rank: int
    generators: dict
    basepoint: PlanePoint
    error_estimates: dict = field(default_factory=dict)

    def labels(self):
        return list(self.generators.keys())


@dataclass
class LoopWord:
    """Word in the loop generators: letters (label, +1 | -1), first letter
    traversed first."""

    letters: list

    def __post_init__(self):
        for label, exp in self.letters:
            if exp not in (1, -1):
                raise ValueError(f"exponent must be +1 or -1, got {exp}")


def _auto_basepoint(punctures: PunctureSet) -> PlanePoint:
    xs = punctures.positions.real
    ys = punctures.positions.imag
    return PlanePoint(float(xs.min()) - 1.0, float(ys.min()) - 1.0)


def _bend_spoke(a, b, obstacles, depth=0):
    """Waypoints from a to b giving each obstacle (center, radius) a wide
    berth; returns the points after a."""
    worst = None
    seg = b - a
    seglen2 = abs(seg) ** 2
    for zk, rk in obstacles:
        s = min(max(((zk - a) * seg.conjugate()).real / seglen2, 0.0), 1.0)
        q = a + s * seg
        d = abs(q - zk)
        if d < 0.8 * rk and (worst is None or d - 0.8 * rk < worst[0]):
            worst = (d - 0.8 * rk, zk, rk, q, d)
    if worst is None:
        return [b]
    if depth >= 12:
        raise DegenerateConfiguration(
            "could not route a generator spoke clear of the punctures")
    _, zk, rk, q, d = worst
    if d > 1e-12:
        normal = (q - zk) / d
    else:
        normal = 1j * seg / abs(seg)
    w = zk + 1.1 * rk * normal
    return (_bend_spoke(a, w, obstacles, depth + 1)
            + _bend_spoke(w, b, obstacles, depth + 1))


def generator_loops(punctures: PunctureSet, basepoint: PlanePoint | None = None):
    """One lasso per puncture, keyed and ordered by sorted puncture label."""
    if len(punctures) == 0:
        return {}
    if basepoint is None:
        basepoint = _auto_basepoint(punctures)
    bz = _as_complex(basepoint)
    pos = punctures.positions

    radii = {}
    order = sorted(range(len(punctures)), key=lambda i: punctures.labels[i])
    for i in order:
        others = [abs(pos[i] - pos[j]) for j in range(len(pos)) if j != i]
        r = min(MAX_LASSO_RADIUS, 0.5 * min(others)) if others else MAX_LASSO_RADIUS
        if r < MIN_LASSO_RADIUS:
            raise DegenerateConfiguration(
                f"punctures too close for disjoint lassos (radius {r:.3e})")
        if abs(bz - pos[i]) <= r:
            raise DegenerateConfiguration(
                f"basepoint inside the lasso disc of {punctures.labels[i]!r}")
        radii[i] = r

    loops = {}
    for i in order:
        label = punctures.labels[i]
        obstacles = [(pos[j], radii[j]) for j in range(len(pos)) if j != i]
        # aim the spoke at the circle entry point facing the basepoint
        toward = bz - pos[i]
        entry_angle = math.atan2(toward.imag, toward.real)
        entry = pos[i] + radii[i] * np.exp(1j * entry_angle)
        waypoints = [bz] + _bend_spoke(bz, entry, obstacles)
        # recompute the entry angle from the last waypoint actually used
        last_leg = waypoints[-2] - pos[i] if len(waypoints) > 1 else toward
        entry_angle = math.atan2(last_leg.imag, last_leg.real)
        entry = pos[i] + radii[i] * np.exp(1j * entry_angle)
        waypoints[-1] = entry
        spoke = Polyline(waypoints)
        circle = Circle(PlanePoint.from_complex(pos[i]), radii[i], 1, entry_angle)
        loops[label] = Concat([spoke, circle, spoke.reverse()])

    for label, loop in loops.items():
        for j, zk in enumerate(pos):
            expected = 1 if punctures.labels[j] == label else 0
            if winding_number(loop, zk) != expected:
                raise DegenerateConfiguration(
                    f"lasso for {label!r} winds unexpectedly around "
                    f"{punctures.labels[j]!r}")
    return loops


def monodromy_representation(conn: ConnectionSpec,
                             basepoint: PlanePoint | None = None,
                             tol: float = 1e-9,
                             assume_flat: bool = False) -> Representation:
    """Transport every generator loop and collect the holonomy matrices."""
    if not conn.flat_known and not assume_flat:
        raise FlatnessUnverified(
            "connection flatness is not known; pass assume_flat=True to "
            "acknowledge it")
    loops = generator_loops(conn.punctures, basepoint)
    if basepoint is None and len(conn.punctures):
        basepoint = _auto_basepoint(conn.punctures)
    elif basepoint is None:
        basepoint = PlanePoint(0.0, 0.0)
    labels = list(loops.keys())
    results = parallel_map(
        lambda lb: _transport.parallel_transport(conn, loops[lb], tol), labels)
    return Representation(
        rank=conn.rank,
        generators={lb: res.matrix for lb, res in zip(labels, results)},
        basepoint=basepoint,
        error_estimates={lb: res.error_estimate for lb, res in zip(labels, results)},
    )


def abelian_oracle(residues, windings) -> np.ndarray:
    """Closed-form monodromy exp(2 pi i sum_j w_j R_j) for commuting residues."""
    res = np.asarray(residues, dtype=complex)
    if res.ndim == 2:
        res = res[None]
    w = [int(x) for x in windings]
    if len(w) != len(res):
        raise DimensionMismatch(f"{len(w)} windings for {len(res)} residues")
    for i in range(len(res)):
        for j in range(i + 1, len(res)):
            comm = res[i] @ res[j] - res[j] @ res[i]
            norm = float(np.linalg.norm(comm))
            if norm > COMMUTATOR_TOL:
                raise NonCommutingResidues(
                    f"residues {i} and {j} have commutator norm {norm:.3e}")
    total = np.tensordot(np.asarray(w, dtype=complex), res, axes=([0], [0]))
    return scipy.linalg.expm(2j * math.pi * total)


def evaluate_word(rep: Representation, word: LoopWord) -> np.ndarray:
    """Product of generator matrices; later letters multiply on the left."""
    acc = np.eye(rep.rank, dtype=complex)
    for label, exp in word.letters:
        if label not in rep.generators:
            raise UnknownLabel(f"no generator labeled {label!r}")
        g = rep.generators[label]
        acc = (g if exp == 1 else np.linalg.inv(g)) @ acc
    return acc


def winding_vector(loop: PathSpec, punctures: PunctureSet):
    """Winding numbers of the loop about each puncture, in puncture order."""
    return [winding_number(loop, p.z) for _, p in punctures]


def ab_phase_predict(fluxes, loop: PathSpec, punctures: PunctureSet) -> complex:
    """Geometric prediction exp(-i sum_j w_j Phi_j); no ODE involved."""
    fluxes = [float(f) for f in fluxes]
    if len(fluxes) != len(punctures):
        raise DimensionMismatch(
            f"{len(fluxes)} fluxes for {len(punctures)} punctures")
    ws = winding_vector(loop, punctures)
    return cmath.exp(-1j * sum(w * f for w, f in zip(ws, fluxes)))
