"""SVD-based pseudo-inversion and generalized condition numbers."""

import numpy as np

from .errors import InvalidInputError

DEFAULT_RANK_TOL = 1e-10


def pseudo_inverse(m, rank_tol=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudoinverse with a relative singular-value cutoff.

    Singular values below ``rank_tol * sigma_max`` are treated as zero.
    """
    m = np.asarray(m)
    if not 0.0 < rank_tol < 1.0:
        raise InvalidInputError("rank_tol must lie in (0, 1)")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=m.dtype)
    inv = np.where(s > rank_tol * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return np.conj(vh.T) @ (inv[:, None] * np.conj(u.T))


def numerical_rank(m, rank_tol=DEFAULT_RANK_TOL):
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def generalized_condition_number(m, rank_tol=DEFAULT_RANK_TOL):
    """Ratio of the largest to the smallest nonzero singular value."""
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        raise InvalidInputError("condition number of the zero matrix is undefined")
    pos = s[s > rank_tol * s[0]]
    return float(pos[0] / pos[-1])
