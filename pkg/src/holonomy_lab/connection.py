"""Connection specifications on the punctured plane.

Every variant defines a transport generator G(x, v), the m x m matrix such
that parallel transport solves dv/dt = G v along a path with velocity v.
For 1-forms A = A1 dx1 + A2 dx2 the generator is A1 vx + A2 vy; for
holomorphic dz-type forms M(z) dz it is M(z) (vx + i vy).  Holomorphic
variants are flat away from their punctures; user-supplied samplers are
checked, never assumed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PoleProximity, PoleProximityWarning
from .geometry import PlanePoint, PunctureSet, _as_complex

#: hard pole guard: evaluation inside this radius raises
POLE_GUARD = 1e-9
#: soft pole guard: evaluation inside this radius warns
POLE_SOFT_GUARD = 1e-3

_TWO_PI = 2.0 * math.pi

#: Pauli matrices sigma_1, sigma_2, sigma_3
SIGMA = np.array([
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, -1.0j], [1.0j, 0.0]],
    [[1.0, 0.0], [0.0, -1.0]],
], dtype=complex)

#: tau_a = (-i/2) sigma_a, the standard su(2) generators
TAU = -0.5j * SIGMA


class LieBasis:
    """Basis of a matrix Lie algebra with structure constants.

    structure_constants[a, b, c] is the coefficient of tau_a in
    [tau_b, tau_c].
    """

    def __init__(self, generators, structure_constants):
        gens = np.asarray(generators, dtype=complex)
        if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
            raise DimensionMismatch("generators must be a stack of square matrices")
        f = np.asarray(structure_constants, dtype=float)
        if f.shape != (len(gens),) * 3:
            raise DimensionMismatch("structure constants must be dim^3")
        self.generators = gens
        self.structure_constants = f
        self.dim = len(gens)
        self.matrix_size = gens.shape[1]
        # flattened generators as columns, plus pseudoinverse for expansions
        self._flat = gens.reshape(self.dim, -1).T
        self._flat_pinv = np.linalg.pinv(self._flat)

    def expand(self, mats):
        """Least-squares components of a stack of matrices in this basis.

        Returns (components, residuals) with shapes (n, dim) and (n,).
        """
        mats = np.asarray(mats, dtype=complex)
        squeeze = mats.ndim == 2
        if squeeze:
            mats = mats[None]
        vec = mats.reshape(len(mats), -1).T
        comps = (self._flat_pinv @ vec).T
        resid = np.linalg.norm(self._flat @ comps.T - vec, axis=0)
        if squeeze:
            return comps[0], float(resid[0])
        return comps, resid

    def combine(self, components):
        """Matrix (or stack) from components w.r.t. this basis."""
        comps = np.asarray(components, dtype=complex)
        return np.tensordot(comps, self.generators, axes=([-1], [0]))

    @classmethod
    def su2(cls):
        """su(2) with tau_a = (-i/2) sigma_a; structure constants are the
        Levi-Civita symbols."""
        eps = np.zeros((3, 3, 3))
        for (a, b, c), sign in {(0, 1, 2): 1.0, (1, 2, 0): 1.0, (2, 0, 1): 1.0,
                                (0, 2, 1): -1.0, (2, 1, 0): -1.0, (1, 0, 2): -1.0}.items():
            eps[a, b, c] = sign
        return cls(TAU, eps)

    @classmethod
    def u1(cls):
        """One-dimensional abelian algebra spanned by i."""
        return cls(np.array([[[1j]]]), np.zeros((1, 1, 1)))


@dataclass
class LieBasisReport:
    max_bracket_violation: float
    max_antisymmetry_violation: float
    max_jacobi_violation: float


def verify_lie_basis(basis: LieBasis) -> LieBasisReport:
    """Worst-case violations of the bracket table, antisymmetry and Jacobi."""
    g, f = basis.generators, basis.structure_constants
    bracket = np.einsum("bij,cjk->bcik", g, g) - np.einsum("cij,bjk->bcik", g, g)
    reconstructed = np.einsum("abc,aik->bcik", f, g)
    max_bracket = float(np.max(np.abs(bracket - reconstructed), initial=0.0))
    max_antisym = float(np.max(np.abs(f + np.swapaxes(f, 1, 2)), initial=0.0))
    jac = (np.einsum("ebc,dae->dabc", f, f)
           + np.einsum("eca,dbe->dabc", f, f)
           + np.einsum("eab,dce->dabc", f, f))
    max_jacobi = float(np.max(np.abs(jac), initial=0.0))
    return LieBasisReport(max_bracket, max_antisym, max_jacobi)


class ConnectionSpec:
    """Base class: rank m, a puncture set, and a vectorized generator."""

    rank: int
    punctures: PunctureSet
    #: True when flatness is guaranteed by construction
    flat_known: bool = True

    def generator_many(self, z: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Generators at positions z with velocities w, shape (n, m, m).

        Unguarded; callers are responsible for the pole guard.
        """
        raise NotImplementedError


class MultiSolenoid(ConnectionSpec):
    """Scalar field of idealized flux lines: -(1/2pi) sum_j Phi_j dz/(z - z_j)."""

    rank = 1

    def __init__(self, punctures: PunctureSet, fluxes):
        fluxes = np.asarray(fluxes, dtype=float)
        if fluxes.ndim != 1 or len(fluxes) != len(punctures):
            raise DimensionMismatch(
                f"{len(fluxes)} fluxes for {len(punctures)} punctures")
        self.punctures = punctures
        self.fluxes = fluxes

    def generator_many(self, z, w):
        diff = z[:, None] - self.punctures.positions[None, :]
        vals = (self.fluxes[None, :] / diff).sum(axis=1)
        return (-(1.0 / _TWO_PI) * vals * w).reshape(-1, 1, 1)


class FuchsianLog(ConnectionSpec):
    """Matrix form with first-order poles: [sum_j R_j/(z - z_j) + P(z)] dz."""

    def __init__(self, punctures: PunctureSet, residues, polynomial_part=None):
        res = np.asarray(residues, dtype=complex)
        if res.ndim != 3 or res.shape[1] != res.shape[2]:
            raise DimensionMismatch("residues must be a stack of square matrices")
        if len(res) != len(punctures):
            raise DimensionMismatch(
                f"{len(res)} residues for {len(punctures)} punctures")
        self.punctures = punctures
        self.residues = res
        self.rank = res.shape[1]
        if polynomial_part is not None:
            poly = np.asarray(polynomial_part, dtype=complex)
            if poly.ndim != 3 or poly.shape[1:] != (self.rank, self.rank):
                raise DimensionMismatch("polynomial coefficients must be m x m")
            self.polynomial_part = poly
        else:
            self.polynomial_part = None

    def generator_many(self, z, w):
        weights = 1.0 / (z[:, None] - self.punctures.positions[None, :])
        m_of_z = np.einsum("nj,jkl->nkl", weights, self.residues)
        if self.polynomial_part is not None:
            powers = z[:, None] ** np.arange(len(self.polynomial_part))[None, :]
            m_of_z = m_of_z + np.einsum("nj,jkl->nkl", powers, self.polynomial_part)
        return m_of_z * w[:, None, None]


class AharonovCasher(ConnectionSpec):
    """Spin-carrier field of a charged line: i*Lambda (dz/z) tau_3, rank 2."""

    rank = 2

    def __init__(self, coupling: float):
        self.coupling = float(coupling)
        self.punctures = PunctureSet([PlanePoint(0.0, 0.0)])

    def generator_many(self, z, w):
        return (1j * self.coupling) * (w / z)[:, None, None] * TAU[2]


class ConstantField(ConnectionSpec):
    """Uniform field strength B on rank 1: i (B/2)(-x2 dx1 + x1 dx2).

    Wrapped with the factor i so the generator is u(1)-valued; not flat
    unless B = 0.
    """

    rank = 1

    def __init__(self, strength: float):
        self.strength = float(strength)
        self.punctures = PunctureSet.empty()

    @property
    def flat_known(self):
        return self.strength == 0.0

    def generator_many(self, z, w):
        val = 0.5j * self.strength * (-z.imag * w.real + z.real * w.imag)
        return val.astype(complex).reshape(-1, 1, 1)


class CustomSampler(ConnectionSpec):
    """User-supplied components A1(x), A2(x); flatness is never assumed."""

    flat_known = False

    def __init__(self, a1, a2, rank: int, punctures: PunctureSet | None = None):
        self.a1 = a1
        self.a2 = a2
        self.rank = int(rank)
        self.punctures = punctures if punctures is not None else PunctureSet.empty()

    def generator_many(self, z, w):
        out = np.empty((len(z), self.rank, self.rank), dtype=complex)
        for i in range(len(z)):
            p = PlanePoint(float(z[i].real), float(z[i].imag))
            out[i] = (np.asarray(self.a1(p), dtype=complex) * w[i].real
                      + np.asarray(self.a2(p), dtype=complex) * w[i].imag)
        return out


def _hard_guard(conn, z):
    """Raise when any position is inside the hard pole guard."""
    if len(conn.punctures) == 0:
        return math.inf
    d = float(np.min(np.abs(np.asarray(z)[:, None]
                            - conn.punctures.positions[None, :])))
    if d <= POLE_GUARD:
        raise PoleProximity(
            f"evaluation {d:.3e} from a puncture (guard {POLE_GUARD})")
    return d


def _check_guard(conn, z):
    """Hard/soft pole guard for an array of evaluation positions."""
    d = _hard_guard(conn, z)
    if d < POLE_SOFT_GUARD:
        warnings.warn(
            f"evaluation only {d:.3e} from a puncture; log-pole generators "
            f"grow like 1/r and degrade step control", PoleProximityWarning)


def evaluate_generator(conn: ConnectionSpec, point: PlanePoint, velocity) -> np.ndarray:
    """The matrix G with transport equation dv/dt = G v at (point, velocity)."""
    z = np.asarray([_as_complex(point)])
    _check_guard(conn, z)
    w = np.asarray([_as_complex(velocity)])
    return conn.generator_many(z, w)[0]


@dataclass(frozen=True)
class GridRegion:
    """Rectangle with a sampling resolution for field-strength integrals."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("degenerate rectangle")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("resolution must be at least 2 x 2")

    def cell_centers(self):
        dx = (self.xmax - self.xmin) / self.nx
        dy = (self.ymax - self.ymin) / self.ny
        xs = self.xmin + dx * (np.arange(self.nx) + 0.5)
        ys = self.ymin + dy * (np.arange(self.ny) + 0.5)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return (gx + 1j * gy).ravel(), dx, dy


def _curvature_grid(conn, z, h):
    """Central-difference C12 = d1 A2 - d2 A1 - [A1, A2] on positions z."""
    ones = np.ones(len(z))
    ex = ones.astype(complex)
    ey = 1j * ones
    for shift in (0.0, h, -h, 1j * h, -1j * h):
        _hard_guard(conn, z + shift)
    a2_xp = conn.generator_many(z + h, ey)
    a2_xm = conn.generator_many(z - h, ey)
    a1_yp = conn.generator_many(z + 1j * h, ex)
    a1_ym = conn.generator_many(z - 1j * h, ex)
    a1 = conn.generator_many(z, ex)
    a2 = conn.generator_many(z, ey)
    return ((a2_xp - a2_xm) - (a1_yp - a1_ym)) / (2.0 * h) - (a1 @ a2 - a2 @ a1)


def curvature_fd(conn: ConnectionSpec, point: PlanePoint, h: float) -> np.ndarray:
    """Finite-difference field strength C12 at a point, step h."""
    if not h > 0:
        raise ValueError("difference step must be positive")
    z = np.asarray([_as_complex(point)])
    return _curvature_grid(conn, z, h)[0]


def ym_energy(conn: ConnectionSpec, region: GridRegion) -> float:
    """Riemann sum of ||C12||_F^2 over the region (difference step: half the
    grid spacing)."""
    z, dx, dy = region.cell_centers()
    if len(conn.punctures):
        node_dist = np.min(np.abs(z[:, None] - conn.punctures.positions[None, :]))
        if node_dist < 1e-6:
            raise PoleProximity(
                f"puncture {node_dist:.3e} from a grid node (needs >= 1e-6)")
    h = 0.5 * min(dx, dy)
    c = _curvature_grid(conn, z, h)
    dens = np.sum(np.abs(c) ** 2, axis=(1, 2))
    return float(np.sum(dens) * dx * dy)
