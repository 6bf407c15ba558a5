"""Column-major vec / Kronecker utilities shared by every condition formula.

All vectorization in this package is column-major: for an m x n matrix A,
vec(A)[j*m + i] = A[i, j] (0-based).  Vec-permutations are applied as index
maps and Kronecker products act through their factors; neither the
permutation matrix nor the Kronecker product is ever materialized here.
"""

from dataclasses import dataclass

import numpy as np


def entrywise_div(a, b):
    """Divide a by b entrywise, passing entries through where b is zero.

    Zero divisors follow the convention 0^ddagger = 1: result[i] = a[i]
    whenever b[i] == 0, so a zero denominator never produces inf or nan.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    safe = np.where(b != 0.0, b, 1.0)
    return np.where(b != 0.0, a / safe, a)


def ddagger(b):
    """Entrywise pseudo-reciprocal: 1/b[i] where b[i] != 0, else 1."""
    b = np.asarray(b, dtype=float)
    safe = np.where(b != 0.0, b, 1.0)
    return np.where(b != 0.0, 1.0 / safe, 1.0)


def vec(A):
    """Stack the columns of A into one vector."""
    return np.asarray(A, dtype=float).ravel(order="F")


def unvec(v, shape):
    """Inverse of vec: reshape a length m*n vector into an m x n matrix."""
    m, n = shape
    v = np.asarray(v, dtype=float)
    if v.size != m * n:
        raise ValueError(f"cannot reshape length {v.size} into {m}x{n}")
    return v.reshape((m, n), order="F")


@dataclass(frozen=True)
class VecPermutation:
    """Index-map form of the vec-permutation matrix for m x n matrices.

    Applying it sends vec(A) to vec(A^T); applying the swapped-dimension
    permutation afterwards restores the input.
    """

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("dimensions must be positive")

    @property
    def size(self):
        return self.rows * self.cols

    def apply(self, v):
        A = unvec(v, (self.rows, self.cols))
        return vec(A.T)

    def swapped(self):
        return VecPermutation(self.cols, self.rows)


def vec_perm_apply(perm, v):
    """Apply the vec-permutation: returns vec(A^T) when v = vec(A)."""
    return perm.apply(v)


def kron_apply(K1, K2, z):
    """Apply (K1 kron K2) to z without forming the Kronecker product.

    Uses the identity (K1 kron K2) vec(Z) = vec(K2 Z K1^T), where Z is the
    unvec of z with K2.shape[1] rows and K1.shape[1] columns.
    """
    K1 = np.atleast_2d(np.asarray(K1, dtype=float))
    K2 = np.atleast_2d(np.asarray(K2, dtype=float))
    z = np.asarray(z, dtype=float)
    if z.size != K1.shape[1] * K2.shape[1]:
        raise ValueError(
            f"operand length {z.size} does not conform to "
            f"({K1.shape[0]}x{K1.shape[1]}) kron ({K2.shape[0]}x{K2.shape[1]})"
        )
    Z = unvec(z, (K2.shape[1], K1.shape[1]))
    return vec(K2 @ Z @ K1.T)
