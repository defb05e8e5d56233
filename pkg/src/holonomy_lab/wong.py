"""Transport of a Lie-algebra-valued spin variable: dI/dt = [G(t), I].

The stepping rule conjugates by the midpoint step exponentials,
I -> exp(dt G) I exp(-dt G), which is the Lax form of the equation: each
step preserves the spectrum of I up to matrix-exponential accuracy, so the
reported spectral drift measures pure path-sampling error.  The same
refinement contract as transport applies (double steps until two levels
agree).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import transport as _transport
from .connection import ConnectionSpec, LieBasis
from .errors import BasisMismatch, NonClosedPath, NonFinite, NoConvergence, Singular
from .geometry import PathSpec
from .transport import (
    MAX_STEPS,
    _chunk_products,
    _guard_path,
    _level_steps,
    _smooth_pieces,
    _validate_tol,
)
from .util import parallel_map

#: residual bound for expanding matrices in a Lie-algebra basis
SPAN_TOL = 1e-8
#: eigenvalues are tracked at at least this many checkpoints
N_CHECKPOINTS = 32


@dataclass
class SpinState:
    """Spin variable as a matrix together with its basis components."""

    matrix: np.ndarray
    components: np.ndarray

    @classmethod
    def from_components(cls, basis: LieBasis, components) -> "SpinState":
        comps = np.asarray(components, dtype=complex).reshape(-1)
        if len(comps) != basis.dim:
            raise BasisMismatch(
                f"{len(comps)} components for a {basis.dim}-dimensional basis")
        return cls(basis.combine(comps), comps)

    @classmethod
    def from_matrix(cls, basis: LieBasis, matrix) -> "SpinState":
        matrix = np.asarray(matrix, dtype=complex)
        comps, resid = basis.expand(matrix)
        if resid > SPAN_TOL:
            raise BasisMismatch(
                f"matrix lies {resid:.3e} outside the basis span (tol {SPAN_TOL})")
        return cls(matrix, comps)

    def consistency_error(self, basis: LieBasis) -> float:
        return float(np.linalg.norm(self.matrix - basis.combine(self.components)))


@dataclass
class WongResult:
    """Final spin state with the worst eigenvalue movement along the way."""

    I_final: SpinState
    spectral_drift: float
    error_estimate: float


def _greedy_eig_distance(ref, eigs):
    """Max distance under greedy nearest pairing of two eigenvalue multisets."""
    ref = list(ref)
    worst = 0.0
    for e in eigs:
        k = min(range(len(ref)), key=lambda i: abs(ref[i] - e))
        worst = max(worst, abs(ref[k] - e))
        ref.pop(k)
    return worst


def _check_span(conn, basis, path):
    """Generator samples must lie in the basis span (precondition guard)."""
    ts = np.linspace(0.0, 1.0, 257)
    z, w = path.eval_many(ts)
    gens = conn.generator_many(z, w)
    _, resid = basis.expand(gens)
    worst = float(np.max(resid))
    if worst > SPAN_TOL:
        raise BasisMismatch(
            f"generator leaves the basis span by {worst:.3e} (tol {SPAN_TOL})")


class _ConjugationEngine:
    """Caches the per-level step products of one (connection, path) pair.

    Products do not depend on the transported spin, so repeated solves over
    the same path (as in verify_ad_rho) reuse them; results are identical
    to a fresh integration.
    """

    def __init__(self, conn, path, n_chk=N_CHECKPOINTS):
        self.conn = conn
        self.path = path
        self.n_chk = n_chk
        self.pieces = _smooth_pieces(path, n_chk)
        self._cache = {}
        self._lock = threading.Lock()

    def products(self, level):
        with self._lock:
            if level not in self._cache:
                fwd = _chunk_products(self.conn, self.path, self.pieces,
                                      level, self.n_chk)
                bwd = _chunk_products(self.conn, self.path, self.pieces,
                                      level, self.n_chk,
                                      sign=-1.0, later_on_left=False)
                self._cache[level] = (fwd, bwd)
            return self._cache[level]

    def solve(self, basis, I0, tol):
        def run(level):
            fwd, bwd = self.products(level)
            mats = np.empty((self.n_chk + 1,) + I0.matrix.shape, dtype=complex)
            mats[0] = I0.matrix
            for k in range(self.n_chk):
                mats[k + 1] = fwd[k] @ mats[k] @ bwd[k]
            return mats

        level = 0
        prev = run(level)
        while True:
            level += 1
            if _level_steps(self.pieces, level) > MAX_STEPS:
                raise NoConvergence(
                    f"no convergence to {tol} within {MAX_STEPS} steps")
            cur = run(level)
            if not np.all(np.isfinite(cur)):
                raise NonFinite("spin transport produced non-finite entries")
            diff = float(np.linalg.norm(cur[-1] - prev[-1]))
            if diff < tol:
                break
            prev = cur

        ref = np.linalg.eigvals(cur[0])
        drift = max(_greedy_eig_distance(ref, np.linalg.eigvals(m)) for m in cur)
        return WongResult(SpinState.from_matrix(basis, cur[-1]),
                          float(drift), diff)


def wong_transport(conn: ConnectionSpec, basis: LieBasis, I0: SpinState,
                   path: PathSpec, tol: float = 1e-9) -> WongResult:
    """Integrate the commutator equation by exact conjugation stepping."""
    _validate_tol(tol)
    if I0.consistency_error(basis) > 1e-10:
        raise BasisMismatch("I0 matrix and components disagree")
    _guard_path(conn, path)
    _check_span(conn, basis, path)
    return _ConjugationEngine(conn, path).solve(basis, I0, tol)


class _ComponentGenerator(ConnectionSpec):
    """Component-space form of the same equation:
    dI^a/dt = sum_bc f^a_bc G^b I^c."""

    def __init__(self, conn, basis):
        self._conn = conn
        self._basis = basis
        self.rank = basis.dim
        self.punctures = conn.punctures

    def generator_many(self, z, w):
        gens = self._conn.generator_many(z, w)
        comps, resid = self._basis.expand(gens)
        worst = float(np.max(resid, initial=0.0))
        if worst > SPAN_TOL:
            raise BasisMismatch(
                f"generator leaves the basis span by {worst:.3e} (tol {SPAN_TOL})")
        return np.einsum("abc,nb->nac", self._basis.structure_constants, comps)


def wong_transport_components(conn: ConnectionSpec, basis: LieBasis,
                              I0_components, path: PathSpec,
                              tol: float = 1e-9) -> np.ndarray:
    """Integrate the structure-constant form; returns final components."""
    _validate_tol(tol)
    comps0 = np.asarray(I0_components, dtype=complex).reshape(-1)
    if len(comps0) != basis.dim:
        raise BasisMismatch(
            f"{len(comps0)} components for a {basis.dim}-dimensional basis")
    _guard_path(conn, path)
    ode = _ComponentGenerator(conn, basis)
    pieces = _smooth_pieces(path)
    level = 0
    prev = _chunk_products(ode, path, pieces, level)[0] @ comps0
    while True:
        level += 1
        if _level_steps(pieces, level) > MAX_STEPS:
            raise NoConvergence(f"no convergence to {tol} within {MAX_STEPS} steps")
        cur = _chunk_products(ode, path, pieces, level)[0] @ comps0
        if not np.all(np.isfinite(cur)):
            raise NonFinite("component transport produced non-finite entries")
        if float(np.linalg.norm(cur - prev)) < tol:
            return cur
        prev = cur


@dataclass
class AdRhoReport:
    """Comparison of spin conjugation against the holonomy representation."""

    max_deviation: float
    threshold: float
    passed: bool
    trials: int
    max_spectral_drift: float


def verify_ad_rho(conn: ConnectionSpec, basis: LieBasis, path: PathSpec,
                  trials: int = 20, tol: float = 1e-9,
                  seed: int = 0) -> AdRhoReport:
    """Check I(1) = rho I(0) rho^-1 for random spins against one transport.

    rho is computed once; each trial integrates the commutator equation
    independently and compares with direct conjugation.
    """
    if not path.is_closed():
        raise NonClosedPath("the adjoint-representation check needs a closed loop")
    rho = _transport.parallel_transport(conn, path, tol).matrix
    try:
        rho_inv = np.linalg.inv(rho)
    except np.linalg.LinAlgError as exc:
        raise Singular("holonomy matrix is singular") from exc

    rng = np.random.default_rng(seed)
    draws = [rng.uniform(-1.0, 1.0, basis.dim) for _ in range(trials)]
    _check_span(conn, basis, path)
    engine = _ConjugationEngine(conn, path)

    def one_trial(comps):
        I0 = SpinState.from_components(basis, comps)
        res = engine.solve(basis, I0, tol)
        expected = rho @ I0.matrix @ rho_inv
        dev = float(np.linalg.norm(res.I_final.matrix - expected))
        return dev, res.spectral_drift

    outcomes = parallel_map(one_trial, draws)
    max_dev = max((d for d, _ in outcomes), default=0.0)
    max_drift = max((s for _, s in outcomes), default=0.0)
    threshold = 10.0 * (tol + tol) + 1e-8
    return AdRhoReport(max_dev, threshold, max_dev < threshold, trials, max_drift)


def isospectrality_report(result: WongResult) -> float:
    """The worst eigenvalue movement recorded along the trajectory."""
    return result.spectral_drift
