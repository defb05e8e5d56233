import math

import numpy as np
import pytest

from holonomy_lab.connection import (
    SIGMA,
    TAU,
    AharonovCasher,
    ConstantField,
    CustomSampler,
    FuchsianLog,
    GridRegion,
    LieBasis,
    MultiSolenoid,
    curvature_fd,
    evaluate_generator,
    verify_lie_basis,
    ym_energy,
)
from holonomy_lab.errors import DimensionMismatch, PoleProximity
from holonomy_lab.geometry import PlanePoint, PunctureSet

ORIGIN = PunctureSet([(0.0, 0.0)])


def test_multi_solenoid_generator_value():
    # alpha = -(Phi/2pi) dz/z with Phi = 2pi at z=1, velocity i: G = -i
    conn = MultiSolenoid(ORIGIN, [2 * math.pi])
    g = evaluate_generator(conn, PlanePoint(1.0, 0.0), (0.0, 1.0))
    assert abs(g[0, 0] - (-1j)) < 1e-12


def test_zero_velocity_gives_zero_matrix():
    for conn in (MultiSolenoid(ORIGIN, [1.3]),
                 AharonovCasher(0.7),
                 ConstantField(2.0)):
        g = evaluate_generator(conn, PlanePoint(1.0, 2.0), (0.0, 0.0))
        assert np.all(g == 0)


def test_aharonov_casher_generator_value():
    # i*Lam*(zdot/z)*tau3 at z=i, zdot=-1: zdot/z = i, so G = (i*Lam/2) sigma3
    lam = 0.3
    g = evaluate_generator(AharonovCasher(lam), PlanePoint(0.0, 1.0), (-1.0, 0.0))
    np.testing.assert_allclose(g, np.diag([0.15j, -0.15j]), atol=1e-14)


def test_generator_linear_in_velocity():
    rng = np.random.default_rng(7)
    conns = [MultiSolenoid(ORIGIN, [1.1]),
             AharonovCasher(0.4),
             ConstantField(0.9),
             FuchsianLog(ORIGIN, [0.2 * SIGMA[0] + 0.1j * SIGMA[2]])]
    for conn in conns:
        for _ in range(10):
            p = PlanePoint(rng.uniform(1, 2), rng.uniform(1, 2))
            v = rng.standard_normal(2)
            u = rng.standard_normal(2)
            a, b = rng.standard_normal(2)
            lhs = evaluate_generator(conn, p, a * v + b * u)
            rhs = (a * evaluate_generator(conn, p, v)
                   + b * evaluate_generator(conn, p, u))
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_ac_generator_anti_hermitian_on_circle_samples():
    conn = AharonovCasher(0.8)
    for theta in np.linspace(0, 2 * math.pi, 17):
        z = complex(math.cos(theta), math.sin(theta))
        v = (-math.sin(theta), math.cos(theta))
        g = evaluate_generator(conn, PlanePoint(z.real, z.imag), v)
        np.testing.assert_allclose(g + g.conj().T, 0, atol=1e-14)


def test_pole_guard():
    conn = MultiSolenoid(ORIGIN, [1.0])
    with pytest.raises(PoleProximity):
        evaluate_generator(conn, PlanePoint(0.0, 1e-10), (1.0, 0.0))


def test_flux_count_must_match_punctures():
    with pytest.raises(DimensionMismatch):
        MultiSolenoid(ORIGIN, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        FuchsianLog(ORIGIN, [np.eye(2), np.eye(2)])


def test_curvature_flat_for_holomorphic_specs():
    points = [PlanePoint(1.0, 0.5), PlanePoint(-0.7, 1.1), PlanePoint(0.3, -2.0)]
    specs = [MultiSolenoid(ORIGIN, [1.7]),
             AharonovCasher(0.3),
             FuchsianLog(ORIGIN, [0.25 * SIGMA[2]], [0.1 * SIGMA[0], 0.05 * SIGMA[1]])]
    for conn in specs:
        for p in points:
            c = curvature_fd(conn, p, 1e-4)
            assert np.linalg.norm(c) < 1e-6


def test_curvature_constant_field():
    b = 1.5
    c = curvature_fd(ConstantField(b), PlanePoint(0.3, -0.8), 1e-4)
    assert abs(c[0, 0] - 1j * b) < 1e-7


def test_curvature_zero_sampler_exact():
    zero = CustomSampler(lambda p: np.zeros((2, 2)), lambda p: np.zeros((2, 2)),
                         rank=2)
    c = curvature_fd(zero, PlanePoint(0.1, 0.2), 1e-3)
    assert np.all(c == 0)


def test_curvature_stencil_pole_guard():
    conn = MultiSolenoid(ORIGIN, [1.0])
    with pytest.raises(PoleProximity):
        curvature_fd(conn, PlanePoint(1e-3, 0.0), 1e-3)


def test_ym_energy_flat_spec():
    conn = MultiSolenoid(ORIGIN, [1.3])
    e = ym_energy(conn, GridRegion(1.0, 2.0, 1.0, 2.0, 50, 50))
    assert 0.0 <= e < 1e-8


def test_ym_energy_constant_field():
    e = ym_energy(ConstantField(1.5), GridRegion(0.0, 2.0, 0.0, 3.0, 200, 200))
    assert abs(e - 13.5) < 0.01 * 13.5


def test_ym_energy_zero_sampler():
    zero = CustomSampler(lambda p: np.zeros((1, 1)), lambda p: np.zeros((1, 1)),
                         rank=1)
    assert ym_energy(zero, GridRegion(0.0, 1.0, 0.0, 1.0, 8, 8)) == 0.0


def test_ym_energy_guards_nodes_near_punctures():
    # cell centers for a 10x10 grid on the unit square sit at 0.05, 0.15, ...
    conn = MultiSolenoid(PunctureSet([(0.55 + 1e-8, 0.55)]), [1.0])
    with pytest.raises(PoleProximity):
        ym_energy(conn, GridRegion(0.0, 1.0, 0.0, 1.0, 10, 10))


def test_grid_region_validation():
    with pytest.raises(ValueError):
        GridRegion(1.0, 0.0, 0.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        GridRegion(0.0, 1.0, 0.0, 1.0, 1, 4)


def test_su2_basis_verifies():
    report = verify_lie_basis(LieBasis.su2())
    assert report.max_bracket_violation < 1e-14
    assert report.max_antisymmetry_violation < 1e-14
    assert report.max_jacobi_violation < 1e-14


def test_su2_bracket_table_is_levi_civita():
    basis = LieBasis.su2()
    comm = TAU[0] @ TAU[1] - TAU[1] @ TAU[0]
    np.testing.assert_allclose(comm, TAU[2], atol=1e-15)
    assert basis.structure_constants[2, 0, 1] == 1.0
    assert basis.structure_constants[2, 1, 0] == -1.0


def test_zeroed_structure_constants_fail_bracket_check():
    basis = LieBasis(TAU, np.zeros((3, 3, 3)))
    report = verify_lie_basis(basis)
    assert report.max_bracket_violation > 0.1


def test_abelian_basis_all_zero():
    report = verify_lie_basis(LieBasis.u1())
    assert report.max_bracket_violation == 0.0
    assert report.max_antisymmetry_violation == 0.0
    assert report.max_jacobi_violation == 0.0


def test_basis_expand_roundtrip():
    basis = LieBasis.su2()
    comps = np.array([0.3, -1.2, 0.5 + 0.25j])
    mat = basis.combine(comps)
    got, resid = basis.expand(mat)
    np.testing.assert_allclose(got, comps, atol=1e-12)
    assert resid < 1e-12
