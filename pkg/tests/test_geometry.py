import math

import numpy as np
import pytest

from holonomy_lab.errors import (
    DegenerateConfiguration,
    NonClosedPath,
    NonContiguous,
    NonFinite,
    PointOnPath,
)
from holonomy_lab.geometry import (
    Circle,
    Concat,
    PlanePoint,
    Polyline,
    PunctureSet,
    concat,
    min_distance,
    reverse,
    sample_path,
    winding_number,
)


def test_plane_point_rejects_non_finite():
    with pytest.raises(NonFinite):
        PlanePoint(math.nan, 0.0)
    with pytest.raises(NonFinite):
        PlanePoint(0.0, math.inf)


def test_circle_samples_hit_quarter_angles():
    samples = sample_path(Circle((0.0, 0.0), 1.0, turns=1), 5)
    expected = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 0)]
    for (t, p, _), (x, y) in zip(samples, expected):
        assert abs(p.x - x) < 1e-12 and abs(p.y - y) < 1e-12
    assert [t for t, _, _ in samples] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_polyline_velocity_constant_per_segment():
    samples = sample_path(Polyline([(0.0, 0.0), (1.0, 0.0)]), 2)
    for _, _, v in samples:
        assert abs(v.x - 1.0) < 1e-12 and abs(v.y) < 1e-12


def test_concat_positions_continuous_at_seam():
    a = Circle((0.0, 0.0), 1.0, turns=0.25, start_angle=0.0)
    b = Circle((0.0, 0.0), 1.0, turns=0.25, start_angle=math.pi / 2)
    path = Concat([a, b])
    ts = np.linspace(0.0, 1.0, 401)
    z, _ = path.eval_many(ts)
    gaps = np.abs(np.diff(z))
    assert gaps.max() < 2 * gaps.min() + 1e-12


def test_concat_requires_contiguous_parts():
    a = Polyline([(0.0, 0.0), (1.0, 0.0)])
    b = Polyline([(2.0, 0.0), (3.0, 0.0)])
    with pytest.raises(NonContiguous):
        concat(a, b)


def test_winding_basic_examples():
    loop = Circle((0.0, 0.0), 1.0, turns=1)
    assert winding_number(loop, 0j) == 1
    assert winding_number(loop, 3 + 0j) == 0
    assert winding_number(Circle((0.0, 0.0), 1.0, turns=-2), 0j) == -2


def test_winding_guards():
    loop = Circle((0.0, 0.0), 1.0, turns=1)
    with pytest.raises(PointOnPath):
        winding_number(loop, 1 + 0j)
    with pytest.raises(NonClosedPath):
        winding_number(Polyline([(0.0, 0.0), (1.0, 0.0)]), 5 + 0j)


def test_reverse_negates_winding():
    loop = Circle((0.5, -0.25), 1.0, turns=1)
    assert winding_number(reverse(loop), (0.5 - 0.25j)) == -1


def test_concat_with_reverse_is_closed():
    gamma = Polyline([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)])
    assert not gamma.is_closed()
    assert concat(gamma, reverse(gamma)).is_closed()


def test_reverse_is_involutive_on_samples():
    gamma = Concat([Polyline([(2.0, 0.0), (1.0, 0.0)]),
                    Circle((0.0, 0.0), 1.0, turns=1)])
    back = reverse(reverse(gamma))
    ts = np.linspace(0.0, 1.0, 57)
    z0, w0 = gamma.eval_many(ts)
    z1, w1 = back.eval_many(ts)
    np.testing.assert_allclose(z0, z1, atol=1e-14)
    np.testing.assert_allclose(w0, w1, atol=1e-12)


def test_min_distance_examples():
    loop = Circle((0.0, 0.0), 1.0, turns=1)
    assert abs(min_distance(loop, PunctureSet([(0.0, 0.0)])) - 1.0) < 1e-9
    assert abs(min_distance(loop, PunctureSet([(2.0, 0.0)])) - 1.0) < 1e-3
    assert min_distance(loop, PunctureSet.empty()) == math.inf


def test_puncture_set_rejects_coincident_points():
    with pytest.raises(DegenerateConfiguration):
        PunctureSet([(0.0, 0.0), (0.0, 5e-10)])


def test_puncture_set_labels():
    ps = PunctureSet([(0.0, 0.0), (1.0, 0.0)], ["a", "b"])
    assert ps.labels == ["a", "b"]
    with pytest.raises(ValueError):
        PunctureSet([(0.0, 0.0), (1.0, 0.0)], ["a", "a"])


def _random_loop(rng):
    kind = rng.integers(0, 2)
    if kind == 0:
        turns = int(rng.choice([-2, -1, 1, 2]))
        return Circle((rng.uniform(-2, 2), rng.uniform(-2, 2)),
                      rng.uniform(0.5, 2.0), turns, rng.uniform(0, 2 * math.pi))
    corners = rng.integers(3, 7)
    angles = np.sort(rng.uniform(0, 2 * math.pi, corners))
    center = rng.uniform(-2, 2, 2)
    pts = [(center[0] + 2 * math.cos(a), center[1] + 2 * math.sin(a))
           for a in angles]
    return Polyline(pts + [pts[0]])


def test_winding_reversal_property():
    rng = np.random.default_rng(3)
    for _ in range(25):
        loop = _random_loop(rng)
        p = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
        if loop.distance_to_point(p) < 1e-3:
            continue
        assert winding_number(loop, p) + winding_number(reverse(loop), p) == 0


def test_winding_additive_over_concat_at_shared_basepoint():
    # two circles through the origin, one around each lobe
    left = Circle((-1.0, 0.0), 1.0, turns=1, start_angle=0.0)
    right = Circle((1.0, 0.0), 1.0, turns=1, start_angle=math.pi)
    eight = concat(left, right)
    rng = np.random.default_rng(4)
    for _ in range(25):
        p = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if eight.distance_to_point(p) < 1e-3:
            continue
        assert winding_number(eight, p) == (winding_number(left, p)
                                            + winding_number(right, p))


def test_winding_invariant_under_resampling_density():
    loop = Circle((0.3, 0.1), 1.2, turns=3)
    p = 0.3 + 0.1j
    for n in (64, 1024, 16384):
        ts = np.linspace(0.0, 1.0, n + 1)
        z, _ = loop.eval_many(ts)
        rel = z - p
        total = np.sum(np.angle(rel[1:] / rel[:-1])) / (2 * math.pi)
        assert abs(total - 3) < 0.01


def test_sample_path_needs_two_points():
    with pytest.raises(ValueError):
        sample_path(Circle((0.0, 0.0), 1.0), 1)


def test_fractional_turns_make_arcs():
    arc = Circle((0.0, 0.0), 1.0, turns=0.25)
    assert not arc.is_closed()
    assert abs(arc.end.x) < 1e-12 and abs(arc.end.y - 1.0) < 1e-12
    # arc distance: a point near the far side is closest to an endpoint
    assert abs(arc.distance_to_point(-2 + 0j) - math.sqrt(5)) < 1e-12
    assert abs(arc.distance_to_point(2 + 0j) - 1.0) < 1e-12


def test_velocity_matches_position_derivative():
    lasso = Concat([Polyline([(-2.0, -1.0), (-0.5, 0.0)]),
                    Circle((0.0, 0.0), 0.5, 1, math.pi),
                    Polyline([(-0.5, 0.0), (-2.0, -1.0)])])
    ts = np.linspace(0.01, 0.99, 997)
    z, w = lasso.eval_many(ts)
    eps = 1e-7
    zp, _ = lasso.eval_many(ts + eps)
    zm, _ = lasso.eval_many(ts - eps)
    np.testing.assert_allclose((zp - zm) / (2 * eps), w, atol=1e-6)
