"""Operator norms between weighted sequence spaces.

Weights are absorbed by conjugation: M acting l^p_{w1} -> l^p_{w2} has
the same norm as diag(w2) M diag(1/w1) acting between the unweighted
spaces, so everything below works on the conjugated matrix.
"""

import math

import numpy as np

from .errors import InvalidInputError

_INF = math.inf


def weighted_matrix(m, w_out=None, w_in=None):
    """diag(w_out) @ m @ diag(1/w_in)."""
    m = np.asarray(m)
    if w_out is not None:
        m = np.asarray(w_out)[:, None] * m
    if w_in is not None:
        m = m / np.asarray(w_in)[None, :]
    return m


def exact_operator_norm(m, p_in, p_out):
    """Exact l^{p_in} -> l^{p_out} norm for the classically computable cases.

    Supported: 1 -> p (max column p-norm), inf -> inf (max row sum),
    2 -> 2 (largest singular value).  p = 0 is treated as sup-norm.
    """
    m = np.abs(np.asarray(m))
    p_in = _INF if p_in == 0 else float(p_in)
    p_out = _INF if p_out == 0 else float(p_out)
    if p_in == 1.0:
        if p_out == _INF:
            return float(m.max())
        if p_out == 1.0:
            return float(m.sum(axis=0).max())
        return float((m**p_out).sum(axis=0).max() ** (1.0 / p_out))
    if p_in == _INF and p_out == _INF:
        return float(m.sum(axis=1).max())
    if p_in == 2.0 and p_out == 2.0:
        return float(np.linalg.norm(m, 2))
    raise InvalidInputError(f"no exact formula for l^{p_in} -> l^{p_out}")


def interpolation_upper(m):
    """Upper bound for every l^p -> l^p norm, 1 <= p <= inf."""
    return max(exact_operator_norm(m, 1, 1), exact_operator_norm(m, _INF, _INF))


def rayleigh_lower_l2(m, iters=60, seed=0):
    """Power-iteration lower estimate of the l^2 -> l^2 norm."""
    m = np.asarray(m)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    g = np.conj(m.T) @ m
    for _ in range(iters):
        v = g @ v
        n = np.linalg.norm(v)
        if n == 0:
            return 0.0
        v /= n
    return float(np.sqrt(np.real(np.vdot(v, g @ v))))


def weighted_operator_norm(m, p, weight, exact_l2=True):
    """Norm of ``m`` on l^p_w; exact for p in {1, 2, inf, 0}.

    For other p the Riesz-Thorin style interpolation upper bound
    max(||.||_1, ||.||_inf) is returned.
    """
    mb = weighted_matrix(m, weight.values, weight.values)
    p = _INF if p == 0 else float(p)
    if p in (1.0, _INF):
        return exact_operator_norm(mb, p, p)
    if p == 2.0 and exact_l2:
        return exact_operator_norm(mb, 2, 2)
    return interpolation_upper(mb)
