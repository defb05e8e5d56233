"""Adaptive integration of the parallel-transport equation dv/dt = G v.

Scheme: partition [0, 1], multiply the accumulated matrix on the left by
exp(step length x generator at the step midpoint), then halve all steps
until two successive full-path results agree below tolerance
(Richardson-style control on the whole path, which stays honest near log
poles where local error estimates mislead).  The partition always aligns
with the path's velocity jumps (polyline corners, concatenation seams): a
step straddling a jump costs an O(step) error that oscillates with the
refinement level and can fool the convergence test.  Midpoint-sampled
exponential stepping keeps each step exactly unitary for anti-Hermitian
samples, so transports of u(m)-valued fields do not drift off the group.

Composition order is fixed repo-wide: later path pieces multiply on the
left.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry
from .connection import POLE_GUARD, POLE_SOFT_GUARD, ConnectionSpec
from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonFinite,
    PoleProximity,
    PoleProximityWarning,
)
from .geometry import PathSpec
from .matexp import expm_stack

#: refinement aborts once a level would exceed this many steps
MAX_STEPS = 2 ** 24
#: steps are evaluated in blocks of this size to bound memory
_BLOCK = 1 << 16

TOL_MIN, TOL_MAX = 1e-13, 1e-2


def _validate_tol(tol):
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tol must lie in [{TOL_MIN}, {TOL_MAX}], got {tol}")


@dataclass
class HolonomyResult:
    """Transport matrix with its refinement error estimate and path metadata."""

    matrix: np.ndarray
    error_estimate: float
    steps_used: int
    path_closed: bool
    min_pole_distance: float


@dataclass
class TransportTrajectory:
    """Dense output v(t_i) of a transport solve; ts strictly increasing 0..1."""

    ts: np.ndarray
    values: np.ndarray

    @property
    def samples(self):
        return [(float(t), v) for t, v in zip(self.ts, self.values)]


def _tree_product(mats, later_on_left=True):
    """Ordered product of a stack of matrices by pairwise reduction."""
    while len(mats) > 1:
        odd = None
        if len(mats) % 2 == 1:
            odd = mats[-1]
            mats = mats[:-1]
        if later_on_left:
            mats = mats[1::2] @ mats[0::2]
        else:
            mats = mats[0::2] @ mats[1::2]
        if odd is not None:
            mats = np.concatenate([mats, odd[None]])
    return mats[0]


def _smooth_pieces(path: PathSpec, n_chunks: int = 1):
    """Partition [0, 1] into smooth pieces with per-piece coarse step counts.

    Breakpoints are the path's velocity jumps plus the requested chunk
    boundaries, so chunk products later align exactly with output times.
    Returns a list of (a, b, coarse_steps).
    """
    breaks = {0.0, 1.0}
    breaks.update(float(b) for b in path.breakpoints())
    for j in range(1, n_chunks):
        breaks.add(j / n_chunks)
    bs = sorted(breaks)
    merged = [bs[0]]
    for b in bs[1:]:
        if b - merged[-1] > 1e-12:
            merged.append(b)
    merged[-1] = 1.0

    prims = list(path._primitives())
    pieces = []
    for a, b in zip(merged, merged[1:]):
        mid = 0.5 * (a + b)
        n0 = 1
        for prim, t0, t1 in prims:
            if t0 <= mid <= t1:
                frac = (b - a) / (t1 - t0)
                n0 = max(1, math.ceil(prim._own_min_steps() * frac))
                break
        n0 = max(n0, math.ceil(16 * (b - a)))
        pieces.append((a, b, n0))
    return pieces


def _level_steps(pieces, level):
    return sum(n0 << level for _, _, n0 in pieces)


def _chunk_products(conn, path, pieces, level, n_chunks=1,
                    sign=1.0, later_on_left=True):
    """Transport products over the n_chunks equal t-ranges of the partition.

    With sign=-1 and later_on_left=False this yields the inverse products.
    """
    m = conn.rank
    out = np.empty((n_chunks, m, m), dtype=complex)
    out[:] = np.eye(m, dtype=complex)
    for a, b, n0 in pieces:
        k = min(n_chunks - 1, int(0.5 * (a + b) * n_chunks))
        n = n0 << level
        dt = (b - a) / n
        for i0 in range(0, n, _BLOCK):
            i1 = min(i0 + _BLOCK, n)
            ts = a + (np.arange(i0, i1) + 0.5) * dt
            z, w = path.eval_many(ts)
            gen = conn.generator_many(z, w)
            if not np.all(np.isfinite(gen)):
                raise NonFinite("generator produced non-finite samples")
            exps = expm_stack((sign * dt) * gen)
            block = _tree_product(exps, later_on_left)
            out[k] = block @ out[k] if later_on_left else out[k] @ block
    return out


def _guard_path(conn, path):
    mind = geometry.min_distance(path, conn.punctures)
    if mind <= POLE_GUARD:
        raise PoleProximity(
            f"path comes within {mind:.3e} of a puncture (guard {POLE_GUARD})")
    if mind < POLE_SOFT_GUARD:
        warnings.warn(
            f"path comes within {mind:.3e} of a puncture; accuracy degrades",
            PoleProximityWarning)
    return mind


def parallel_transport(conn: ConnectionSpec, path: PathSpec,
                       tol: float = 1e-9) -> HolonomyResult:
    """Fundamental transport matrix T with v(1) = T v(0) along the path."""
    _validate_tol(tol)
    mind = _guard_path(conn, path)
    pieces = _smooth_pieces(path)
    level = 0
    t_prev = _chunk_products(conn, path, pieces, level)[0]
    if not np.all(np.isfinite(t_prev)):
        raise NonFinite("transport produced non-finite entries")
    while True:
        level += 1
        if _level_steps(pieces, level) > MAX_STEPS:
            raise NoConvergence(f"no convergence to {tol} within {MAX_STEPS} steps")
        t_cur = _chunk_products(conn, path, pieces, level)[0]
        if not np.all(np.isfinite(t_cur)):
            raise NonFinite("transport produced non-finite entries")
        diff = float(np.linalg.norm(t_cur - t_prev))
        if diff < tol:
            return HolonomyResult(t_cur, diff, _level_steps(pieces, level),
                                  path.is_closed(), mind)
        t_prev = t_cur


def transport_trajectory(conn: ConnectionSpec, path: PathSpec, v0,
                         n_out: int, tol: float = 1e-9) -> TransportTrajectory:
    """Solution samples v(t_i) at n_out equally spaced times."""
    _validate_tol(tol)
    if n_out < 2:
        raise ValueError("need at least 2 output samples")
    v0 = np.asarray(v0, dtype=complex).reshape(-1)
    if v0.shape[0] != conn.rank:
        raise DimensionMismatch(f"v0 has length {len(v0)}, rank is {conn.rank}")
    _guard_path(conn, path)
    n_chunks = n_out - 1
    pieces = _smooth_pieces(path, n_chunks)

    def run(level):
        prods = _chunk_products(conn, path, pieces, level, n_chunks)
        vals = np.empty((n_out, conn.rank), dtype=complex)
        vals[0] = v0
        for k in range(n_chunks):
            vals[k + 1] = prods[k] @ vals[k]
        return vals

    level = 0
    prev = run(level)
    while True:
        level += 1
        if _level_steps(pieces, level) > MAX_STEPS:
            raise NoConvergence(f"no convergence to {tol} within {MAX_STEPS} steps")
        cur = run(level)
        if not np.all(np.isfinite(cur)):
            raise NonFinite("transport produced non-finite entries")
        diff = float(np.max(np.linalg.norm(cur - prev, axis=1)))
        if diff < tol:
            return TransportTrajectory(np.linspace(0.0, 1.0, n_out), cur)
        prev = cur


def compose_transport(a: HolonomyResult, b: HolonomyResult) -> HolonomyResult:
    """Transport along a followed by b (a is traversed first)."""
    if a.matrix.shape != b.matrix.shape:
        raise DimensionMismatch(
            f"cannot compose {a.matrix.shape} with {b.matrix.shape}")
    return HolonomyResult(
        matrix=b.matrix @ a.matrix,
        error_estimate=a.error_estimate + b.error_estimate,
        steps_used=a.steps_used + b.steps_used,
        path_closed=a.path_closed and b.path_closed,
        min_pole_distance=min(a.min_pole_distance, b.min_pole_distance),
    )
