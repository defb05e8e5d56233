"""Batched matrix exponential.

Scaling-and-squaring with the degree-13 Pade approximant, evaluated on a
whole stack of small matrices at once.  Relative error is below 1e-13 for
arguments scaled to norm <= 1, which the integrators guarantee by
subdividing steps.  This kernel is the single piece of numerics shared
between the adaptive integrators and the brute-force reference integrator.
"""

from __future__ import annotations

import numpy as np

# Pade-13 coefficients b_0..b_13
_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)


def expm_stack(a: np.ndarray) -> np.ndarray:
    """exp(A) for every matrix in a stack of shape (..., m, m)."""
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError("matrices must be square")
    m = a.shape[-1]
    if m == 1:
        return np.exp(a)

    # scale the whole stack by a common power of two so every 1-norm is <= 1
    norms = np.abs(a).sum(axis=-2).max(axis=-1)
    maxnorm = float(norms.max(initial=0.0))
    if not np.isfinite(maxnorm):
        raise FloatingPointError("non-finite entries in expm_stack input")
    s = max(0, int(np.ceil(np.log2(maxnorm)))) if maxnorm > 1.0 else 0
    a = a / (2.0 ** s)

    eye = np.broadcast_to(np.eye(m, dtype=complex), a.shape)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (_B[13] * a6 + _B[11] * a4 + _B[9] * a2)
             + _B[7] * a6 + _B[5] * a4 + _B[3] * a2 + _B[1] * eye)
    v = (a6 @ (_B[12] * a6 + _B[10] * a4 + _B[8] * a2)
         + _B[6] * a6 + _B[4] * a4 + _B[2] * a2 + _B[0] * eye)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    # exp(0) = I exactly; the Pade solve leaves an ulp of noise there
    zero = norms == 0.0
    if a.ndim == 2:
        return np.eye(m, dtype=complex) if zero else r
    if np.any(zero):
        r[zero] = np.eye(m, dtype=complex)
    return r
