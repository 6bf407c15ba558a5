"""Indefinite least squares instances: definiteness check, solve, M^{-1} products.

An instance minimizes (b - Ax)^T J (b - Ax) with J = diag(I_p, -I_q).  It has
a unique solution x = M^{-1} A^T J b exactly when M = A^T J A is positive
definite; construction certifies this by Cholesky and caches the factor,
which every subsequent M^{-1} application reuses.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NotPositiveDefinite(np.linalg.LinAlgError):
    """A^T J A is not positive definite: the ILS problem has no unique solution."""


class IllConditionedWarning(UserWarning):
    """A^T J A is numerically close to singular; results may lose accuracy."""


@dataclass(frozen=True)
class SignatureSplit:
    """Signature (p, q): +1 on the first p coordinates, -1 on the last q.

    The signature matrix is never materialized; products with it are sign
    flips of the trailing q rows.
    """

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.q < 0:
            raise ValueError("q must be nonnegative")

    @property
    def m(self):
        return self.p + self.q

    def apply(self, v):
        """Multiply by the signature matrix (flip the sign of the last q rows)."""
        out = np.array(v, dtype=float, copy=True)
        out[self.p:] = -out[self.p:]
        return out

    def signs(self):
        s = np.ones(self.m)
        s[self.p:] = -1.0
        return s


def check_spd(A, split, diagnose=False):
    """Form M = A^T J A and certify positive definiteness.

    M is assembled as Ap^T Ap - Aq^T Aq from the signed row blocks.  Returns
    (M, chol) with chol the lower Cholesky factor.  Raises NotPositiveDefinite
    on breakdown; with diagnose=True the error carries the smallest eigenvalue
    of M for debugging near-singular cases.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if split.m != m:
        raise ValueError(f"signature split p+q={split.m} does not match m={m}")
    Ap = A[: split.p]
    Aq = A[split.p:]
    M = Ap.T @ Ap - Aq.T @ Aq
    M = 0.5 * (M + M.T)
    try:
        chol = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        msg = "A^T J A is not positive definite; the ILS problem has no unique solution"
        if diagnose:
            lam = float(np.linalg.eigvalsh(M)[0])
            msg += f" (smallest eigenvalue {lam:.3e})"
        raise NotPositiveDefinite(msg) from exc
    return M, chol


@dataclass(frozen=True)
class IlsSolution:
    """Solution x of M x = A^T J b and its plain residual r = b - A x."""

    x: np.ndarray
    r: np.ndarray


class IlsProblem:
    """An indefinite least squares instance with cached normal matrix.

    Parameters
    ----------
    A : (m, n) array
    b : (m,) array
    split : SignatureSplit
        Counts (p, q) of +1 and -1 signature entries; p + q = m.
    diagnose : bool
        Report the smallest eigenvalue of A^T J A when definiteness fails.

    Raises NotPositiveDefinite when A^T J A has no Cholesky factorization.
    When the factorization succeeds but M is close to singular (reciprocal
    condition below 1e3 * machine epsilon) an IllConditionedWarning is issued
    and ``ill_conditioned`` is set; computation proceeds, since problems near
    the definiteness boundary are exactly the interesting regime.
    """

    def __init__(self, A, b, split, diagnose=False):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float).ravel()
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        m, n = A.shape
        if b.size != m:
            raise ValueError(f"b has length {b.size}, expected {m}")
        if m < n or (split.q > 0 and m == n):
            warnings.warn(
                "a genuinely indefinite problem needs m > n (and m >= n always); "
                "proceeding anyway",
                UserWarning,
                stacklevel=2,
            )
        self.A = A
        self.b = b
        self.split = split
        self.m = m
        self.n = n
        self.M, self.chol = check_spd(A, split, diagnose=diagnose)

        # cond(M) = cond(chol)^2; cheap to read off the factor's singular values
        sv = np.linalg.svd(self.chol, compute_uv=False)
        rcond = (sv[-1] / sv[0]) ** 2 if sv[0] > 0 else 0.0
        self.rcond = float(rcond)
        self.ill_conditioned = rcond < 1e3 * np.finfo(float).eps
        if self.ill_conditioned:
            warnings.warn(
                f"A^T J A is nearly singular (rcond ~ {rcond:.2e}); "
                "condition numbers remain computable but lose accuracy",
                IllConditionedWarning,
                stacklevel=2,
            )
        self._solution = None

    @property
    def p(self):
        return self.split.p

    @property
    def q(self):
        return self.split.q

    def j_apply(self, v):
        """Product of the signature matrix with a vector or matrix of m rows."""
        return self.split.apply(v)

    def apply_minv(self, V):
        """Compute M^{-1} V through two triangular solves per column."""
        V = np.asarray(V, dtype=float)
        single = V.ndim == 1
        if single:
            V = V[:, None]
        if V.shape[0] != self.n:
            raise ValueError(f"operand has {V.shape[0]} rows, expected {self.n}")
        if V.shape[1] == 0:
            return V.copy()
        out = scipy.linalg.cho_solve((self.chol, True), V)
        return out[:, 0] if single else out

    @property
    def solution(self):
        if self._solution is None:
            self._solution = solve_ils(self)
        return self._solution


def solve_ils(problem):
    """Solve M x = A^T J b with the cached Cholesky factor; r = b - A x."""
    rhs = problem.A.T @ problem.j_apply(problem.b)
    x = problem.apply_minv(rhs)
    r = problem.b - problem.A @ x
    return IlsSolution(x=x, r=r)


def apply_minv(problem, V):
    """Module-level alias for IlsProblem.apply_minv."""
    return problem.apply_minv(V)
