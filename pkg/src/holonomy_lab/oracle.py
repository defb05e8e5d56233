"""Brute-force verification engines.

These deliberately share no integration machinery with the adaptive
transport code: the reference integrator below resamples the path itself,
exponentiates steps through the common matrix-exponential kernel only, and
accumulates the product by plain left-multiplication in step order.  Its
results serve as ground truth for quantities with no closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import monodromy, transport, vacua, wong
from .connection import (
    SIGMA,
    AharonovCasher,
    ConnectionSpec,
    ConstantField,
    GridRegion,
    LieBasis,
    MultiSolenoid,
    FuchsianLog,
    ym_energy,
)
from .errors import PoleProximity, Singular
from .geometry import Circle, PathSpec, PlanePoint, Polyline, PunctureSet, min_distance
from .matexp import expm_stack

#: contractual step count for baseline-quality reference transports
FINE_STEPS = 2 ** 20
_EXP_BLOCK = 1 << 14


@dataclass
class OracleReport:
    """One verified quantity: main route vs independent oracle."""

    quantity: str
    main_value: object
    oracle_value: object
    deviation: float
    bound: float
    passed: bool

    @classmethod
    def compare(cls, quantity, main_value, oracle_value, bound):
        deviation = float(np.linalg.norm(
            np.asarray(main_value, dtype=complex)
            - np.asarray(oracle_value, dtype=complex)))
        return cls(quantity, main_value, oracle_value, deviation,
                   bound, deviation < bound)


def fine_step_transport(conn: ConnectionSpec, path: PathSpec,
                        n_steps: int = FINE_STEPS) -> np.ndarray:
    """Fixed n-step midpoint-exponential product; no adaptivity.

    The step budget is spread over the path's smooth pieces in proportion
    to their parameter width (steps that straddle a velocity jump would
    converge only to first order).  The contract assumes n_steps >= 2**20
    for baseline-quality values; smaller counts are accepted for
    convergence studies.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    if min_distance(path, conn.punctures) <= 1e-9:
        raise PoleProximity("path touches the pole guard")
    cuts = sorted({0.0, 1.0} | {float(b) for b in path.breakpoints()})
    total = np.eye(conn.rank, dtype=complex)
    for a, b in zip(cuts, cuts[1:]):
        n = max(1, round(n_steps * (b - a)))
        dt = (b - a) / n
        for b0 in range(0, n, _EXP_BLOCK):
            b1 = min(b0 + _EXP_BLOCK, n)
            ts = a + (np.arange(b0, b1) + 0.5) * dt
            z, w = path.eval_many(ts)
            exps = expm_stack(dt * conn.generator_many(z, w))
            for e in exps:
                total = e @ total
    return total


def conjugation_oracle(rho: np.ndarray, I0: np.ndarray) -> np.ndarray:
    """rho I0 rho^-1, the closed-form shift of a spin variable."""
    rho = np.asarray(rho, dtype=complex)
    I0 = np.asarray(I0, dtype=complex)
    try:
        rho_inv = np.linalg.inv(rho)
    except np.linalg.LinAlgError as exc:
        raise Singular("conjugation by a singular matrix") from exc
    return rho @ I0 @ rho_inv


# --- reference scenes used by the verification suite -----------------------

def ab_scene():
    """Single flux 1.7 at the origin with a radius-2 circle around it."""
    conn = MultiSolenoid(PunctureSet([PlanePoint(0.0, 0.0)]), [1.7])
    return conn, Circle((0.0, 0.0), 2.0)


def multi_solenoid_scene():
    """Three fluxes on the real axis; the loop encloses the first two."""
    punctures = PunctureSet([(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)])
    fluxes = [0.7, 1.1, -0.4]
    conn = MultiSolenoid(punctures, fluxes)
    loop = Circle((1.0, 0.0), 1.7)
    return conn, fluxes, loop


def ac_scene(coupling=0.3):
    return AharonovCasher(coupling), Circle((0.0, 0.0), 1.0)


def single_pole_hermitian_spec():
    """One log pole with a Hermitian traceless residue: unitary monodromy."""
    res = 0.35 * SIGMA[0] + 0.15 * SIGMA[2]
    return FuchsianLog(PunctureSet([(0.0, 0.0)]), [res])


def two_pole_noncommuting_spec():
    """Two log poles with noncommuting Hermitian traceless residues."""
    punctures = PunctureSet([(-1.0, 0.0), (1.0, 0.0)])
    return FuchsianLog(punctures, [0.25 * SIGMA[2], 0.20 * SIGMA[0]])


def random_diagonal_fuchsian(rng, n_poles=2, m=2):
    """Random commuting-residue spec: diagonal real entries in [-1, 1].

    Real diagonal residues exponentiate to unitary monodromy
    exp(2 pi i R), the matrix analogue of a unit scalar phase.
    """
    while True:
        pts = rng.uniform(-2.0, 2.0, (n_poles, 2))
        ok = all(np.hypot(*(pts[i] - pts[j])) > 0.5
                 for i in range(n_poles) for j in range(i + 1, n_poles))
        if ok:
            break
    punctures = PunctureSet([tuple(p) for p in pts])
    residues = [np.diag(rng.uniform(-1.0, 1.0, m)).astype(complex)
                for _ in range(n_poles)]
    return FuchsianLog(punctures, residues)


def run_verification_suite(seed: int = 0, tol: float = 1e-9,
                           fine_steps: int = FINE_STEPS):
    """The full battery of oracle comparisons; returns OracleReports."""
    rng = np.random.default_rng(seed)
    reports = []
    unitary_transports = []

    # scalar flux phase against the closed form e^{-i Phi}
    conn, loop = ab_scene()
    res = transport.parallel_transport(conn, loop, min(tol, 1e-10))
    unitary_transports.append(("ab_phase", res.matrix))
    reports.append(OracleReport.compare(
        "ab_phase_circle", complex(res.matrix[0, 0]), cmath.exp(-1.7j), 1e-8))
    fine = fine_step_transport(conn, loop, fine_steps)
    reports.append(OracleReport.compare(
        "ab_phase_fine_step", complex(fine[0, 0]), complex(res.matrix[0, 0]), 1e-8))

    # multiple fluxes: transport vs winding arithmetic
    conn, fluxes, loop = multi_solenoid_scene()
    res = transport.parallel_transport(conn, loop, tol)
    unitary_transports.append(("multi_solenoid", res.matrix))
    predicted = monodromy.ab_phase_predict(fluxes, loop, conn.punctures)
    reports.append(OracleReport.compare(
        "multi_solenoid_subset", complex(res.matrix[0, 0]), predicted, 1e-6))

    # spin-carrier matrix phase against the closed form
    conn, loop = ac_scene(0.3)
    res = transport.parallel_transport(conn, loop, min(tol, 1e-10))
    unitary_transports.append(("aharonov_casher", res.matrix))
    closed_form = np.diag([cmath.exp(0.3j * math.pi), cmath.exp(-0.3j * math.pi)])
    reports.append(OracleReport.compare(
        "aharonov_casher_matrix", res.matrix, closed_form, 1e-8))
    fine = fine_step_transport(conn, loop, fine_steps)
    reports.append(OracleReport.compare(
        "aharonov_casher_fine_step", fine, closed_form, 1e-8))

    # commuting-residue monodromy against the closed form, random draws
    worst = 0.0
    for _ in range(5):
        spec = random_diagonal_fuchsian(rng)
        rep = monodromy.monodromy_representation(spec, tol=tol)
        for j, label in enumerate(spec.punctures.labels):
            expected = monodromy.abelian_oracle(
                spec.residues, [1 if k == j else 0 for k in range(len(spec.residues))])
            worst = max(worst, float(np.linalg.norm(
                rep.generators[label] - expected)))
            unitary_transports.append(("abelian_monodromy", rep.generators[label]))
    reports.append(OracleReport(
        "abelian_monodromy", worst, 0.0, worst, 1e-7, worst < 1e-7))

    # spin conjugation against the holonomy, three field types
    basis = LieBasis.su2()
    ad_tol = 1e-8
    drift_worst = 0.0
    for name, spec, path in [
        ("ad_rho_aharonov_casher", AharonovCasher(0.3), Circle((0, 0), 1.0)),
        ("ad_rho_single_pole", single_pole_hermitian_spec(), Circle((0, 0), 1.0)),
        ("ad_rho_two_pole",
         two_pole_noncommuting_spec(),
         next(iter(monodromy.generator_loops(
             two_pole_noncommuting_spec().punctures).values()))),
    ]:
        rep = wong.verify_ad_rho(spec, basis, path, trials=20, tol=ad_tol, seed=seed)
        drift_worst = max(drift_worst, rep.max_spectral_drift)
        reports.append(OracleReport(
            name, rep.max_deviation, 0.0, rep.max_deviation,
            rep.threshold, rep.passed))
    reports.append(OracleReport(
        "isospectral_drift", drift_worst, 0.0, drift_worst, 1e-8,
        drift_worst < 1e-8))

    # homotopy invariance: circle vs square through the same basepoint
    spec = two_pole_noncommuting_spec()
    loose = max(tol, 1e-8)
    square = Polyline([(2, 2), (-2, 2), (-2, -2), (2, -2), (2, 2)])
    circle = Circle((0.0, 0.0), 2.0 * math.sqrt(2.0), 1, math.pi / 4.0)
    t_sq = transport.parallel_transport(spec, square, loose)
    t_ci = transport.parallel_transport(spec, circle, loose)
    reports.append(OracleReport.compare(
        "homotopy_circle_vs_square", t_ci.matrix, t_sq.matrix, 1e-6))

    # constant gauge change conjugates every generator
    h = vacua.random_unitary(2, rng)
    base_rep = monodromy.monodromy_representation(spec, tol=loose)
    conj_spec = FuchsianLog(spec.punctures,
                            [h @ r @ h.conj().T for r in spec.residues])
    conj_rep = monodromy.monodromy_representation(conj_spec, tol=loose)
    gauge_dev = max(
        float(np.linalg.norm(conj_rep.generators[lb] - h @ g @ h.conj().T))
        for lb, g in base_rep.generators.items())
    reports.append(OracleReport(
        "gauge_covariance", gauge_dev, 0.0, gauge_dev, 1e-6, gauge_dev < 1e-6))

    # field energy: flat fields vanish, constant fields integrate exactly
    flat = MultiSolenoid(PunctureSet([(0.0, 0.0)]), [1.3])
    e_flat = ym_energy(flat, GridRegion(1.0, 2.0, 1.0, 2.0, 100, 100))
    reports.append(OracleReport(
        "ym_energy_flat", e_flat, 0.0, e_flat, 1e-8, e_flat < 1e-8))
    e_const = ym_energy(ConstantField(1.5), GridRegion(0.0, 2.0, 0.0, 3.0, 200, 200))
    reports.append(OracleReport.compare(
        "ym_energy_constant", e_const, 1.5 ** 2 * 6.0, 0.01 * 1.5 ** 2 * 6.0))

    # vacuum classes: counting and conjugation invariance
    count_ok = all(len(vacua.enumerate_vacua_z2(m)) == m + 1 for m in range(17))
    reports.append(OracleReport(
        "vacua_count_z2", "m+1 classes" if count_ok else "wrong count",
        "m+1 classes", 0.0 if count_ok else 1.0, 0.5, count_ok))
    worst_phase = 0.0
    for _ in range(100):
        u = vacua.random_unitary(3, rng)
        s = vacua.random_unitary(3, rng)
        a = vacua.canonical_vacuum_cyclic(u).eigenphases
        b = vacua.canonical_vacuum_cyclic(s @ u @ s.conj().T).eigenphases
        worst_phase = max(worst_phase, vacua.phase_multiset_gap(a, b))
    reports.append(OracleReport(
        "vacua_conjugation_invariance", worst_phase, 0.0, worst_phase,
        1e-8, worst_phase < 1e-8))

    # transports of anti-Hermitian-sampled fields stay unitary
    unit_dev = max(
        float(np.linalg.norm(t.conj().T @ t - np.eye(len(t))))
        for _, t in unitary_transports)
    reports.append(OracleReport(
        "unitarity", unit_dev, 0.0, unit_dev, 1e-8, unit_dev < 1e-8))

    return reports
