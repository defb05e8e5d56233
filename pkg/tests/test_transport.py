import cmath
import math

import numpy as np
import pytest

from holonomy_lab import transport as transport_mod
from holonomy_lab.connection import (
    SIGMA,
    AharonovCasher,
    CustomSampler,
    FuchsianLog,
    MultiSolenoid,
)
from holonomy_lab.errors import (
    DimensionMismatch,
    NoConvergence,
    NonFinite,
    PoleProximity,
)
from holonomy_lab.geometry import Circle, Polyline, PunctureSet, reverse
from holonomy_lab.monodromy import abelian_oracle, generator_loops
from holonomy_lab.transport import (
    compose_transport,
    parallel_transport,
    transport_trajectory,
)

ORIGIN = PunctureSet([(0.0, 0.0)])
AB = MultiSolenoid(ORIGIN, [1.7])
UNIT_CIRCLE = Circle((0.0, 0.0), 1.0)


def zero_connection(rank=2):
    z = np.zeros((rank, rank))
    return CustomSampler(lambda p: z, lambda p: z, rank=rank)


def test_zero_connection_gives_identity_exactly():
    res = parallel_transport(zero_connection(), Circle((3.0, 0.0), 1.0), 1e-9)
    assert np.all(res.matrix == np.eye(2))
    assert res.path_closed


def test_flux_phase_factor():
    res = parallel_transport(AB, Circle((0.0, 0.0), 2.0), 1e-10)
    assert abs(res.matrix[0, 0] - cmath.exp(-1.7j)) < 10 * 1e-10
    assert res.error_estimate >= 0.0
    assert res.min_pole_distance == pytest.approx(2.0, abs=1e-6)


def test_spin_coupling_phase_matrix():
    res = parallel_transport(AharonovCasher(0.3), UNIT_CIRCLE, 1e-10)
    expected = np.diag([cmath.exp(0.3j * math.pi), cmath.exp(-0.3j * math.pi)])
    assert np.linalg.norm(res.matrix - expected) < 10 * 1e-10


def test_non_enclosing_loop_is_trivial():
    res = parallel_transport(AB, Circle((5.0, 0.0), 1.0), 1e-10)
    assert abs(res.matrix[0, 0] - 1.0) < 10 * 1e-10


def test_unitarity_tracks_error_estimate():
    for conn, loop in [(AB, Circle((0.0, 0.0), 2.0)),
                       (AharonovCasher(0.8), UNIT_CIRCLE)]:
        res = parallel_transport(conn, loop, 1e-9)
        t = res.matrix
        defect = np.linalg.norm(t.conj().T @ t - np.eye(len(t)))
        assert defect <= 10 * res.error_estimate + 1e-10


def test_reverse_path_inverts_transport():
    spec = FuchsianLog(PunctureSet([(-1.0, 0.0), (1.0, 0.0)]),
                       [0.25 * SIGMA[2], 0.2 * SIGMA[0]])
    loop = Circle((0.0, 0.0), 2.0)
    fwd = parallel_transport(spec, loop, 1e-9)
    bwd = parallel_transport(spec, reverse(loop), 1e-9)
    defect = np.linalg.norm(bwd.matrix @ fwd.matrix - np.eye(2))
    assert defect < 10 * (fwd.error_estimate + bwd.error_estimate) + 1e-9


def test_homotopy_invariance_circle_vs_square():
    spec = FuchsianLog(PunctureSet([(-1.0, 0.0), (1.0, 0.0)]),
                       [0.25 * SIGMA[2], 0.2 * SIGMA[0]])
    square = Polyline([(2, 2), (-2, 2), (-2, -2), (2, -2), (2, 2)])
    circle = Circle((0.0, 0.0), 2.0 * math.sqrt(2.0), 1, math.pi / 4.0)
    a = parallel_transport(spec, square, 1e-9)
    b = parallel_transport(spec, circle, 1e-9)
    dev = np.linalg.norm(a.matrix - b.matrix)
    assert dev < 10 * (a.error_estimate + b.error_estimate) + 1e-9


def test_refinement_monotone_against_abelian_oracle():
    spec = FuchsianLog(ORIGIN, [np.diag([0.31, -0.17]).astype(complex)])
    loop = next(iter(generator_loops(spec.punctures).values()))
    expected = abelian_oracle(spec.residues, [1])
    devs = []
    for tol in (1e-5, 1e-7, 1e-9, 1e-11):
        res = parallel_transport(spec, loop, tol)
        devs.append(np.linalg.norm(res.matrix - expected))
    for coarse, fine in zip(devs, devs[1:]):
        assert fine <= coarse + 1e-14


def test_circle_resolution_floor():
    res = parallel_transport(zero_connection(1), Circle((0.0, 0.0), 1.0, turns=3),
                             1e-9)
    assert res.steps_used >= 2 * 64 * 3


def test_tolerance_range_enforced():
    with pytest.raises(ValueError):
        parallel_transport(AB, UNIT_CIRCLE, 1e-14)
    with pytest.raises(ValueError):
        parallel_transport(AB, UNIT_CIRCLE, 0.5)


def test_path_through_pole_rejected():
    with pytest.raises(PoleProximity):
        parallel_transport(AB, Polyline([(-1.0, 0.0), (1.0, 0.0)]), 1e-9)


def test_no_convergence_budget(monkeypatch):
    monkeypatch.setattr(transport_mod, "MAX_STEPS", 256)
    spec = FuchsianLog(PunctureSet([(-1.0, 0.0), (1.0, 0.0)]),
                       [0.25 * SIGMA[2], 0.2 * SIGMA[0]])
    lasso = next(iter(generator_loops(spec.punctures).values()))
    with pytest.raises(NoConvergence):
        parallel_transport(spec, lasso, 1e-13)


def test_non_finite_generator_detected():
    bad = CustomSampler(lambda p: np.array([[np.inf]]),
                        lambda p: np.array([[0.0]]), rank=1)
    with pytest.raises(NonFinite):
        parallel_transport(bad, UNIT_CIRCLE, 1e-9)


def test_trajectory_constant_for_zero_connection():
    traj = transport_trajectory(zero_connection(), UNIT_CIRCLE, [1.0, 2.0], 9, 1e-9)
    assert np.all(traj.values == np.array([1.0, 2.0]))
    assert traj.ts[0] == 0.0 and traj.ts[-1] == 1.0
    assert np.all(np.diff(traj.ts) > 0)


def test_trajectory_preserves_norm_for_flux_spec():
    traj = transport_trajectory(AB, Circle((0.0, 0.0), 2.0), [1.0], 33, 1e-10)
    mags = np.abs(traj.values[:, 0])
    assert np.abs(mags - 1.0).max() < 10 * 1e-10


def test_trajectory_endpoint_matches_transport():
    conn = AharonovCasher(0.45)
    v0 = np.array([0.6, -0.8j])
    traj = transport_trajectory(conn, UNIT_CIRCLE, v0, 17, 1e-10)
    res = parallel_transport(conn, UNIT_CIRCLE, 1e-10)
    assert np.linalg.norm(traj.values[-1] - res.matrix @ v0) < 10 * 1e-10


def test_trajectory_validates_inputs():
    with pytest.raises(DimensionMismatch):
        transport_trajectory(AB, UNIT_CIRCLE, [1.0, 0.0], 9, 1e-9)
    with pytest.raises(ValueError):
        transport_trajectory(AB, UNIT_CIRCLE, [1.0], 1, 1e-9)


def test_compose_with_identity():
    res = parallel_transport(AharonovCasher(0.3), UNIT_CIRCLE, 1e-10)
    ident = transport_mod.HolonomyResult(np.eye(2), 0.0, 0, True, math.inf)
    combined = compose_transport(res, ident)
    np.testing.assert_allclose(combined.matrix, res.matrix, atol=1e-15)
    assert combined.error_estimate == res.error_estimate


def test_compose_path_with_its_reverse():
    arc = Circle((0.0, 0.0), 2.0, turns=0.5)
    a = parallel_transport(AB, arc, 1e-10)
    b = parallel_transport(AB, reverse(arc), 1e-10)
    combined = compose_transport(a, b)
    assert abs(combined.matrix[0, 0] - 1.0) < 10 * combined.error_estimate + 1e-9


def test_compose_quarter_circles_matches_half_circle():
    spec = AharonovCasher(0.6)
    q1 = Circle((0.0, 0.0), 1.0, turns=0.25, start_angle=0.0)
    q2 = Circle((0.0, 0.0), 1.0, turns=0.25, start_angle=math.pi / 2)
    half = Circle((0.0, 0.0), 1.0, turns=0.5, start_angle=0.0)
    composed = compose_transport(parallel_transport(spec, q1, 1e-10),
                                 parallel_transport(spec, q2, 1e-10))
    direct = parallel_transport(spec, half, 1e-10)
    dev = np.linalg.norm(composed.matrix - direct.matrix)
    assert dev < 10 * (composed.error_estimate + direct.error_estimate) + 1e-10


def test_compose_dimension_mismatch():
    a = parallel_transport(AB, UNIT_CIRCLE, 1e-9)
    b = parallel_transport(AharonovCasher(0.3), UNIT_CIRCLE, 1e-9)
    with pytest.raises(DimensionMismatch):
        compose_transport(a, b)
