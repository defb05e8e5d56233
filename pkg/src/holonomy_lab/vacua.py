"""Canonical forms of unitary loop representations.

For an infinite cyclic loop group a representation is one unitary matrix up
to conjugacy, hence (matrices being normal) exactly a multiset of
eigenphases: the maximal torus modulo permutations.  For the order-two
group the single generator is an involution, classified by its +1/-1
eigenvalue multiplicities, giving m + 1 classes in rank m.  Phases are
always compared on the circle so values near 0 and near 2 pi match.

The classification is applied here to punctured-plane monodromy, the
desk-scale stand-in for a space with the corresponding loop group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .connection import ConnectionSpec
from .errors import DimensionMismatch, NotInvolution, NotUnitary
from .monodromy import monodromy_representation

_TWO_PI = 2.0 * math.pi


@dataclass
class VacuumClassCyclic:
    """Sorted eigenphases in [0, 2 pi): a point of the torus mod permutation."""

    eigenphases: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.eigenphases, dtype=float)
        if np.any(p < 0.0) or np.any(p >= _TWO_PI) or np.any(np.diff(p) < 0):
            raise ValueError("eigenphases must be sorted into [0, 2*pi)")
        object.__setattr__(self, "eigenphases", p)


@dataclass(frozen=True)
class VacuumClassZ2:
    """Multiplicities (i, j) of the +1 and -1 eigenvalues, i + j = m."""

    multiplicity_pair: tuple

    def __post_init__(self):
        i, j = self.multiplicity_pair
        if i < 0 or j < 0:
            raise ValueError("multiplicities must be nonnegative")


def _require_unitary(u, tol):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    drift = float(np.linalg.norm(u.conj().T @ u - np.eye(len(u))))
    if drift >= tol:
        raise NotUnitary(f"||U^H U - I|| = {drift:.3e} exceeds {tol}")
    return u


def circle_distance(a: float, b: float) -> float:
    d = abs(a - b) % _TWO_PI
    return min(d, _TWO_PI - d)


def phase_multiset_gap(phases_a, phases_b) -> float:
    """Best worst-case circular matching of two sorted phase multisets.

    On the circle the optimal bijection between sorted multisets is a
    rotation of one of them, so all m rotations are tried.
    """
    pa = np.asarray(phases_a, dtype=float)
    pb = np.asarray(phases_b, dtype=float)
    if pa.shape != pb.shape:
        raise DimensionMismatch("phase multisets differ in size")
    m = len(pa)
    if m == 0:
        return 0.0
    best = math.inf
    for r in range(m):
        worst = max(circle_distance(pa[i], pb[(i + r) % m]) for i in range(m))
        best = min(best, worst)
    return best


def canonical_vacuum_cyclic(u, tol: float = 1e-8) -> VacuumClassCyclic:
    """Eigenphases of a unitary matrix, reduced mod 2 pi and sorted."""
    u = _require_unitary(u, tol)
    phases = np.sort(np.angle(np.linalg.eigvals(u)) % _TWO_PI)
    return VacuumClassCyclic(phases)


def equivalent_reps_cyclic(u, v, tol: float = 1e-8) -> bool:
    """Whether two unitaries generate equivalent cyclic representations
    (same eigenphase multiset on the circle)."""
    u = _require_unitary(u, tol)
    v = _require_unitary(v, tol)
    if u.shape != v.shape:
        raise DimensionMismatch("matrices differ in size")
    gap = phase_multiset_gap(canonical_vacuum_cyclic(u, tol).eigenphases,
                             canonical_vacuum_cyclic(v, tol).eigenphases)
    return gap < tol


def classify_z2(u, tol: float = 1e-8) -> VacuumClassZ2:
    """Multiplicities of the +1/-1 eigenvalues of an involution."""
    u = _require_unitary(u, tol)
    sq_defect = float(np.linalg.norm(u @ u - np.eye(len(u))))
    if sq_defect >= tol:
        raise NotInvolution(f"||U^2 - I|| = {sq_defect:.3e} exceeds {tol}")
    eigs = np.linalg.eigvals(u)
    plus = 0
    for lam in eigs:
        snap = 1.0 if abs(lam - 1.0) <= abs(lam + 1.0) else -1.0
        if abs(lam - snap) >= tol:
            raise NotInvolution(
                f"eigenvalue {lam} is {abs(lam - snap):.3e} from +-1")
        plus += snap > 0
    return VacuumClassZ2((plus, len(eigs) - plus))


def enumerate_vacua_z2(m: int):
    """All m + 1 classes (i, m - i) for rank m, in order of i."""
    if m < 0:
        raise ValueError("rank must be nonnegative")
    return [VacuumClassZ2((i, m - i)) for i in range(m + 1)]


def vacuum_from_connection(conn: ConnectionSpec, tol: float = 1e-8) -> VacuumClassCyclic:
    """Canonical class of the single monodromy generator of a one-puncture
    connection (the loop group there is infinite cyclic)."""
    if len(conn.punctures) != 1:
        raise ValueError("vacuum classification needs exactly one puncture")
    transport_tol = min(max(tol * 1e-2, 1e-13), 1e-9)
    rep = monodromy_representation(conn, tol=transport_tol)
    (u,) = rep.generators.values()
    return canonical_vacuum_cyclic(u, tol)


def random_unitary(m: int, rng) -> np.ndarray:
    """Haar-ish unitary from QR of a complex Gaussian matrix; rng is a
    numpy Generator or a seed."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
