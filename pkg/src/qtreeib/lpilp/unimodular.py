"""Total unimodularity checks by determinant enumeration or sampling."""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse as sp

EXHAUSTIVE_MAX_ROWS = 6
DET_TOL = 1e-6


def _as_integer_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    Af = A.astype(float)
    if not np.all(np.isfinite(Af)) or np.any(Af != np.round(Af)):
        raise ValueError("matrix has non-integer entries")
    return Af


def _dets_ok(subs: np.ndarray) -> bool:
    if subs.size == 0:
        return True
    d = np.linalg.det(subs)
    r = np.round(d)
    return bool(np.all(np.abs(d - r) <= DET_TOL) and np.all(np.abs(r) <= 1))


def tu_check(A, mode: str = "exhaustive", n_samples: int = 100_000, rng=None) -> bool:
    """True iff every checked square submatrix has determinant in {−1, 0, 1}.

    ``mode="exhaustive"`` checks all of them (at most 6 rows);
    ``mode="sampled"`` draws ``n_samples`` submatrices, size uniform over
    1..min(m, n), rows and columns uniform without replacement.
    """
    A = _as_integer_matrix(A)
    m, n = A.shape
    if np.any(np.abs(A) > 1):
        return False
    if mode == "exhaustive":
        if m > EXHAUSTIVE_MAX_ROWS:
            raise ValueError(f"exhaustive mode is limited to {EXHAUSTIVE_MAX_ROWS} rows")
        for k in range(2, min(m, n) + 1):
            cols = np.array(list(combinations(range(n), k)))
            for rows in combinations(range(m), k):
                subs = A[np.array(rows)][:, cols].transpose(1, 0, 2)
                if not _dets_ok(subs):
                    return False
        return True
    if mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        kmax = min(m, n)
        if kmax == 0:
            return True
        sizes = rng.integers(1, kmax + 1, size=n_samples)
        for k in np.unique(sizes):
            count = int(np.sum(sizes == k))
            rows = np.argsort(rng.random((count, m)), axis=1)[:, :k]
            cols = np.argsort(rng.random((count, n)), axis=1)[:, :k]
            subs = A[rows[:, :, None], cols[:, None, :]]
            if not _dets_ok(subs):
                return False
        return True
    raise ValueError(f"unknown mode {mode!r}")


def incidence_witness(A) -> bool:
    """Every row has exactly one +1, one −1 and zeros elsewhere.

    Such a matrix is the transpose of a directed-graph incidence matrix, which
    is totally unimodular: put all columns in one class of the column-partition
    criterion and each row sums to zero. Accepts dense or scipy sparse input.
    """
    if sp.issparse(A):
        A = sp.csr_matrix(A)
        A.eliminate_zeros()
        vals = A.data
        if np.any(vals != np.round(vals)):
            raise ValueError("matrix has non-integer entries")
        plus = np.asarray((A == 1).sum(axis=1)).ravel()
        minus = np.asarray((A == -1).sum(axis=1)).ravel()
        nnz = np.diff(A.indptr)
        return bool(np.all(plus == 1) and np.all(minus == 1) and np.all(nnz == 2))
    A = _as_integer_matrix(A)
    if A.shape[0] == 0:
        return True
    return bool(
        np.all((A == 1).sum(axis=1) == 1)
        and np.all((A == -1).sum(axis=1) == 1)
        and np.all((A == 0).sum(axis=1) == A.shape[1] - 2)
    )
