"""Shared generators and independent oracles for the test suite."""

import numpy as np
import pytest

from ilscond import CondParams, IlsProblem, NotPositiveDefinite, SignatureSplit


def random_ils(rng, m=None, n=None, damp=0.35, rho=None):
    """A well-scaled random ILS instance (retries until positive definite).

    Scaling the negative-signature rows by damp < 1 keeps A^T J A positive
    definite for most draws; shapes are redrawn between attempts.
    """
    for _ in range(200):
        nn = int(rng.integers(2, 13)) if n is None else n
        mm = int(rng.integers(nn + 2, max(nn + 3, 31))) if m is None else m
        p = int(rng.integers(min(nn + 1, mm - 1), mm))
        q = mm - p
        A = rng.standard_normal((mm, nn))
        A[p:] *= damp
        if rho is None:
            b = rng.standard_normal(mm)
        else:
            x = rng.standard_normal(nn)
            r = rng.standard_normal(mm)
            r *= rho / np.linalg.norm(r)
            b = A @ x + r
        try:
            return IlsProblem(A, b, SignatureSplit(p, q))
        except NotPositiveDefinite:
            continue
    raise RuntimeError("could not draw a positive definite instance")


def dense_vec_perm(m, n):
    """Dense vec-permutation matrix, built entry by entry from its definition."""
    P = np.zeros((m * n, m * n))
    for i in range(m):
        for j in range(n):
            P[i * n + j, j * m + i] = 1.0
    return P


def dense_mg_oracle(problem, L=None):
    """Dense first-order map assembled from explicit Kronecker products.

    Independent of the row-structured assembly: everything is built from
    np.kron, a dense vec-permutation matrix, and LU solves.
    """
    A, b = problem.A, problem.b
    m, n = problem.m, problem.n
    if L is None:
        L = np.eye(n)
    sol = problem.solution
    x, r = sol.x, sol.r
    Jr = problem.j_apply(r)
    LtMinv = np.linalg.solve(problem.M, L).T
    LtMinvAtJ = LtMinv @ (A.T * problem.split.signs()[None, :])
    P = dense_vec_perm(m, n)
    blockA = np.kron(Jr[None, :], LtMinv) @ P - np.kron(x[None, :], LtMinvAtJ)
    return np.hstack([blockA, LtMinvAtJ])


def directional_derivative(problem, L, dA, db):
    """Analytic derivative of L^T x along (dA, db), from its defining formula.

    Uses plain LU solves so it shares nothing with the Cholesky path.
    """
    sol = problem.solution
    x, r = sol.x, sol.r
    A = problem.A
    term1 = np.linalg.solve(problem.M, dA.T @ problem.j_apply(r))
    term2 = np.linalg.solve(problem.M, A.T @ problem.j_apply(dA @ x))
    term3 = np.linalg.solve(problem.M, A.T @ problem.j_apply(db))
    return L.T @ (term1 - term2 + term3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def params():
    return CondParams()
