"""Compiled inner loops for dominance counting.

Every kernel counts, for each row i, the rows j != i with X[j] <= X[i]
coordinatewise.  Inputs are C-contiguous float64 arrays.
"""
import numpy as np
from numba import njit

# Two cut points per coordinate, packed into a 64-bit word.
SIGNATURE_COORDS = 32
_LOW = 1.0 / 3.0
_HIGH = 2.0 / 3.0


@njit(cache=True)
def signatures(X):
    # bin(X[j, k]) <= bin(X[i, k]) is necessary for X[j, k] <= X[i, k], so
    # sig[j] & ~sig[i] != 0 rules a pair out without touching coordinates.
    n, d = X.shape
    m = min(d, SIGNATURE_COORDS)
    sig = np.zeros(n, np.uint64)
    for i in range(n):
        s = np.uint64(0)
        for k in range(m):
            v = X[i, k]
            if v > _LOW:
                s |= np.uint64(1) << np.uint64(2 * k)
            if v > _HIGH:
                s |= np.uint64(1) << np.uint64(2 * k + 1)
        sig[i] = s
    return sig


@njit(cache=True)
def _below(X, j, i, d):
    for k in range(d):
        if X[j, k] > X[i, k]:
            return False
    return True


@njit(cache=True)
def counts_naive(X):
    n, d = X.shape
    out = np.zeros(n, np.int64)
    for i in range(n):
        c = 0
        for j in range(n):
            if j != i and _below(X, j, i, d):
                c += 1
        out[i] = c
    return out


@njit(cache=True)
def row_sums(X):
    # Fixed left-to-right order: rounding is monotone, so X[j] <= X[i]
    # implies sums[j] <= sums[i] exactly.
    n, d = X.shape
    s = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for k in range(d):
            acc += X[i, k]
        s[i] = acc
    return s


@njit(cache=True)
def counts_sum_pruned(X):
    n, d = X.shape
    out = np.zeros(n, np.int64)
    if n < 2:
        return out
    sums = row_sums(X)
    order = np.argsort(sums, kind="mergesort")
    sorted_sums = sums[order]
    Xs = X[order]
    sig = signatures(Xs)
    for p in range(n):
        hi = np.searchsorted(sorted_sums, sorted_sums[p], side="right")
        not_sig = ~sig[p]
        c = 0
        for q in range(hi):
            if q != p and (sig[q] & not_sig) == 0 and _below(Xs, q, p, d):
                c += 1
        out[order[p]] = c
    return out


@njit(cache=True)
def counts_batch(B):
    """Sum-pruned counts for a stack of samples of shape (reps, n, d)."""
    reps, n, d = B.shape
    out = np.zeros((reps, n), np.int64)
    for r in range(reps):
        out[r] = counts_sum_pruned(np.ascontiguousarray(B[r]))
    return out
