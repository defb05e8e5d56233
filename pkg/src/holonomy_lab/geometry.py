"""Parametrized paths and loops in the plane.

Paths are built from three primitives: polylines, circles (whole turns or
arcs) and concatenations.  Every path is parametrized by t in [0, 1],
arc-length-proportionally within each primitive, so velocities have constant
speed along a primitive.  Counterclockwise is the positive orientation; all
phase conventions downstream rely on this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateConfiguration,
    NoConvergence,
    NonClosedPath,
    NonContiguous,
    NonFinite,
    PointOnPath,
)

#: endpoint == start point within this distance <=> the path is closed
CLOSED_TOL = 1e-12
#: concatenated pieces must share endpoints within this distance
CONTIG_TOL = 1e-9
#: query points closer than this to a curve count as "on" it
ON_PATH_GUARD = 1e-9
#: punctures closer than this are considered coincident
PUNCTURE_SEPARATION = 1e-9

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PlanePoint:
    """A point of the plane, identified with the complex number x + iy."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise NonFinite(f"plane point must be finite, got ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z) -> "PlanePoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __iter__(self):
        yield self.x
        yield self.y


def _as_complex(p) -> complex:
    """Accept PlanePoint, complex, or an (x, y) pair."""
    if isinstance(p, PlanePoint):
        return p.z
    if isinstance(p, complex):
        return p
    if isinstance(p, (int, float)):
        return complex(p)
    x, y = p
    return complex(x, y)


class PathSpec:
    """Base class for parametrized paths; subclasses implement eval_many."""

    # subclasses set these in __init__
    _length: float

    @property
    def length(self) -> float:
        return self._length

    @property
    def start(self) -> PlanePoint:
        return PlanePoint.from_complex(self._start_z())

    @property
    def end(self) -> PlanePoint:
        return PlanePoint.from_complex(self._end_z())

    def is_closed(self) -> bool:
        return abs(self._end_z() - self._start_z()) <= CLOSED_TOL

    def point(self, t: float) -> PlanePoint:
        z, _ = self.eval_many(np.asarray([float(t)]))
        return PlanePoint.from_complex(z[0])

    def velocity(self, t: float) -> PlanePoint:
        _, w = self.eval_many(np.asarray([float(t)]))
        return PlanePoint.from_complex(w[0])

    # --- interface for subclasses -------------------------------------

    def eval_many(self, ts: np.ndarray):
        """Positions and velocities at parameters ts, as complex arrays."""
        raise NotImplementedError

    def reverse(self) -> "PathSpec":
        raise NotImplementedError

    def distance_to_point(self, p) -> float:
        """Exact distance from the point to the traced curve."""
        raise NotImplementedError

    def _start_z(self) -> complex:
        raise NotImplementedError

    def _end_z(self) -> complex:
        raise NotImplementedError

    def _primitives(self):
        """Yield (primitive, t0, t1) for the flattened pieces of the path."""
        yield (self, 0.0, 1.0)

    def min_coarse_steps(self) -> int:
        """Smallest uniform step count that resolves the path's curvature.

        Circles get >= 64 steps per full turn; polylines >= 2 per segment.
        """
        n = 16
        for prim, t0, t1 in self._primitives():
            width = t1 - t0
            n = max(n, math.ceil(prim._own_min_steps() / width))
        return n

    def breakpoints(self):
        """Interior parameters where the velocity jumps (corners and seams).

        Integrators align their partitions with these; a step straddling a
        velocity jump would degrade convergence to first order.
        """
        return []

    def _own_min_steps(self) -> int:
        return 2


class Polyline(PathSpec):
    """Straight segments through an ordered list of points."""

    def __init__(self, points):
        pts = np.asarray([_as_complex(p) for p in points], dtype=complex)
        if pts.size < 2:
            raise ValueError("polyline needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise NonFinite("polyline points must be finite")
        seg = np.diff(pts)
        seglen = np.abs(seg)
        if np.any(seglen == 0.0):
            raise ValueError("polyline has a zero-length segment")
        self.points = [PlanePoint.from_complex(z) for z in pts]
        self._pts = pts
        self._seg = seg
        self._length = float(seglen.sum())
        # cumulative arc-length fractions, one entry per vertex
        cum = np.concatenate([[0.0], np.cumsum(seglen)]) / self._length
        cum[-1] = 1.0
        self._cum = cum

    def eval_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        idx = np.clip(np.searchsorted(self._cum, ts, side="right") - 1,
                      0, len(self._seg) - 1)
        width = self._cum[idx + 1] - self._cum[idx]
        s = (ts - self._cum[idx]) / width
        z = self._pts[idx] + s * self._seg[idx]
        w = self._seg[idx] / width
        return z, w

    def reverse(self):
        return Polyline(self.points[::-1])

    def distance_to_point(self, p):
        p = _as_complex(p)
        a = self._pts[:-1]
        seg = self._seg
        s = np.clip(((p - a) * np.conj(seg)).real / np.abs(seg) ** 2, 0.0, 1.0)
        return float(np.min(np.abs(a + s * seg - p)))

    def _start_z(self):
        return self._pts[0]

    def _end_z(self):
        return self._pts[-1]

    def breakpoints(self):
        return [float(c) for c in self._cum[1:-1]]

    def _own_min_steps(self):
        return 2 * len(self._seg)


class Circle(PathSpec):
    """Circular path: turns > 0 winds counterclockwise, < 0 clockwise.

    Integer turns give closed circles; fractional turns give arcs.
    """

    def __init__(self, center, radius, turns=1, start_angle=0.0):
        if not radius > 0:
            raise ValueError("circle radius must be positive")
        if turns == 0:
            raise ValueError("circle turns must be nonzero")
        self.center = PlanePoint.from_complex(_as_complex(center))
        self.radius = float(radius)
        self.turns = float(turns) if float(turns) != int(turns) else int(turns)
        self.start_angle = float(start_angle)
        self._c = self.center.z
        self._length = _TWO_PI * self.radius * abs(self.turns)

    def eval_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        ang = self.start_angle + _TWO_PI * self.turns * ts
        e = np.exp(1j * ang)
        z = self._c + self.radius * e
        w = (_TWO_PI * self.turns * self.radius * 1j) * e
        return z, w

    def reverse(self):
        # same start point and trace for integer turns; arcs start at the old end
        return Circle(self.center,
                      self.radius,
                      -self.turns,
                      self.start_angle + _TWO_PI * self.turns)

    def distance_to_point(self, p):
        p = _as_complex(p)
        radial = abs(abs(p - self._c) - self.radius)
        if abs(self.turns) >= 1.0:
            return radial
        # arc: radial distance only counts inside the swept sector
        phi = math.atan2((p - self._c).imag, (p - self._c).real)
        a, b = self.start_angle, self.start_angle + _TWO_PI * self.turns
        lo, hi = min(a, b), max(a, b)
        k = math.floor((lo - phi) / _TWO_PI)
        inside = any(lo <= phi + _TWO_PI * (k + j) <= hi for j in (0, 1, 2))
        if inside:
            return radial
        za, _ = self.eval_many(np.asarray([0.0, 1.0]))
        return float(np.min(np.abs(za - p)))

    def _start_z(self):
        return self._c + self.radius * np.exp(1j * self.start_angle)

    def _end_z(self):
        return self._c + self.radius * np.exp(
            1j * (self.start_angle + _TWO_PI * self.turns))

    def _own_min_steps(self):
        return max(2, math.ceil(64 * abs(self.turns)))


class Concat(PathSpec):
    """Concatenation of endpoint-contiguous paths."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise ValueError("concat needs at least one part")
        for a, b in zip(parts, parts[1:]):
            gap = abs(a._end_z() - b._start_z())
            if gap > CONTIG_TOL:
                raise NonContiguous(
                    f"concat pieces not contiguous: gap {gap:.3e} exceeds {CONTIG_TOL}")
        self.parts = parts
        flat = []
        for part in parts:
            if isinstance(part, Concat):
                flat.extend(part._flat)
            else:
                flat.append(part)
        self._flat = flat
        lengths = np.asarray([p.length for p in flat])
        self._length = float(lengths.sum())
        cum = np.concatenate([[0.0], np.cumsum(lengths)]) / self._length
        cum[-1] = 1.0
        self._cum = cum

    def eval_many(self, ts):
        ts = np.asarray(ts, dtype=float)
        idx = np.clip(np.searchsorted(self._cum, ts, side="right") - 1,
                      0, len(self._flat) - 1)
        z = np.empty(ts.shape, dtype=complex)
        w = np.empty(ts.shape, dtype=complex)
        for i, part in enumerate(self._flat):
            sel = idx == i
            if not np.any(sel):
                continue
            width = self._cum[i + 1] - self._cum[i]
            local = (ts[sel] - self._cum[i]) / width
            zp, wp = part.eval_many(local)
            z[sel] = zp
            w[sel] = wp / width
        return z, w

    def reverse(self):
        return Concat([p.reverse() for p in reversed(self.parts)])

    def distance_to_point(self, p):
        return min(part.distance_to_point(p) for part in self._flat)

    def _start_z(self):
        return self._flat[0]._start_z()

    def _end_z(self):
        return self._flat[-1]._end_z()

    def breakpoints(self):
        out = []
        for i, part in enumerate(self._flat):
            t0, t1 = self._cum[i], self._cum[i + 1]
            if i > 0:
                out.append(float(t0))
            out.extend(float(t0 + b * (t1 - t0)) for b in part.breakpoints())
        return out

    def _primitives(self):
        for i, part in enumerate(self._flat):
            yield (part, self._cum[i], self._cum[i + 1])


class PunctureSet:
    """Marked points removed from the plane, with pairwise-distinct positions."""

    def __init__(self, points, labels=None):
        pts = [PlanePoint.from_complex(_as_complex(p)) for p in points]
        if labels is None:
            labels = [f"p{i}" for i in range(len(pts))]
        labels = [str(s) for s in labels]
        if len(labels) != len(pts):
            raise ValueError("labels and points must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError("puncture labels must be unique")
        pos = np.asarray([p.z for p in pts], dtype=complex)
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if abs(pos[i] - pos[j]) <= PUNCTURE_SEPARATION:
                    raise DegenerateConfiguration(
                        f"punctures {labels[i]!r} and {labels[j]!r} are closer "
                        f"than {PUNCTURE_SEPARATION}")
        self.points = pts
        self.labels = labels
        self.positions = pos

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.labels, self.points))

    @classmethod
    def empty(cls):
        return cls([], [])


def sample_path(path: PathSpec, n: int):
    """Sample (t, point, velocity) at n equally spaced parameters.

    Velocities are exact derivatives of the parametrization: analytic for
    circles, constant per polyline segment.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    ts = np.linspace(0.0, 1.0, n)
    z, w = path.eval_many(ts)
    return [(float(t), PlanePoint.from_complex(zi), PlanePoint.from_complex(wi))
            for t, zi, wi in zip(ts, z, w)]


_WINDING_RESIDUAL = 0.01
_WINDING_MAX_SAMPLES = 2 ** 22


def winding_number(loop: PathSpec, p) -> int:
    """Signed number of turns of a closed path around the point p.

    Computed by summing argument increments over adaptively refined samples;
    the sample count doubles until the total is within 0.01 of an integer.
    """
    if not loop.is_closed():
        raise NonClosedPath("winding number requires a closed path")
    pz = _as_complex(p)
    if loop.distance_to_point(pz) <= ON_PATH_GUARD:
        raise PointOnPath(f"point {pz} lies on the path (guard {ON_PATH_GUARD})")
    n = max(256, loop.min_coarse_steps())
    while True:
        ts = np.linspace(0.0, 1.0, n + 1)
        z, _ = loop.eval_many(ts)
        rel = z - pz
        total = float(np.sum(np.angle(rel[1:] / rel[:-1]))) / _TWO_PI
        w = round(total)
        if abs(total - w) < _WINDING_RESIDUAL:
            return int(w)
        n *= 2
        if n > _WINDING_MAX_SAMPLES:
            raise NoConvergence(
                f"winding number failed to settle below residual "
                f"{_WINDING_RESIDUAL} at {n} samples")


def reverse(path: PathSpec) -> PathSpec:
    """The same trace in the opposite orientation; windings negate."""
    return path.reverse()


def concat(a: PathSpec, b: PathSpec) -> PathSpec:
    """Concatenate two paths; the end of a must equal the start of b."""
    return Concat([a, b])


def min_distance(path: PathSpec, punctures: PunctureSet) -> float:
    """Minimum sampled distance (>= 1024 samples per primitive) to a puncture."""
    if len(punctures) == 0:
        return math.inf
    n_prims = sum(1 for _ in path._primitives())
    ts = np.linspace(0.0, 1.0, 1024 * n_prims + 1)
    z, _ = path.eval_many(ts)
    return float(np.min(np.abs(z[:, None] - punctures.positions[None, :])))
