"""Backward Euler stepping cores: u_k = (I - tau A)^-1 (u_{k-1} + tau gamma_k g).

The 1D operator is tridiagonal, so the hot path is a Thomas solve with the
elimination coefficients factored once and a jitted loop over all steps.  2D
matrices (or missing numba) fall back to a sparse LU reused across steps.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _thomas_factor(sub, diag, sup):
    n = diag.shape[0]
    mult = np.zeros(n)
    dhat = np.empty(n)
    dhat[0] = diag[0]
    for i in range(1, n):
        mult[i] = sub[i] / dhat[i - 1]
        dhat[i] = diag[i] - mult[i] * sup[i - 1]
    return mult, dhat


@njit(cache=True)
def _thomas_march(sub, diag, sup, u0, g, gamma, tau, weights, traj, acc,
                  want_traj):
    n = u0.shape[0]
    steps = gamma.shape[0] - 1
    mult, dhat = _thomas_factor(sub, diag, sup)
    u = u0.copy()
    y = np.empty(n)
    if want_traj:
        traj[0, :] = u
    for j in range(n):
        acc[j] = weights[0] * u[j]
    for k in range(1, steps + 1):
        gk = tau * gamma[k]
        y[0] = u[0] + gk * g[0]
        for i in range(1, n):
            y[i] = u[i] + gk * g[i] - mult[i] * y[i - 1]
        u[n - 1] = y[n - 1] / dhat[n - 1]
        for i in range(n - 2, -1, -1):
            u[i] = (y[i] - sup[i] * u[i + 1]) / dhat[i]
        wk = weights[k]
        for j in range(n):
            acc[j] += wk * u[j]
        if want_traj:
            traj[k, :] = u
    return u


def _tridiagonal_parts(A: sp.spmatrix, tau: float):
    sub = np.zeros(A.shape[0])
    sup = np.zeros(A.shape[0])
    sub[1:] = -tau * A.diagonal(-1)
    sup[:-1] = -tau * A.diagonal(1)
    diag = 1.0 - tau * A.diagonal(0)
    return sub, diag, sup


class Stepper:
    """March driver for a fixed generator matrix and step size."""

    def __init__(self, A: sp.spmatrix, tau: float, tridiagonal: bool):
        if tau <= 0:
            raise ValueError(f"step size must be positive, got {tau}")
        self.A = A
        self.tau = float(tau)
        self.n = A.shape[0]
        self.is_tridiagonal = bool(tridiagonal)
        self.use_thomas = self.is_tridiagonal and HAVE_NUMBA
        if self.use_thomas:
            self._parts = _tridiagonal_parts(A, self.tau)
            self._lu = None
        else:
            M = sp.eye(self.n, format="csc") - self.tau * sp.csc_matrix(A)
            self._lu = spla.splu(M)
            self._parts = None

    def run(self, u0, g=None, gamma=None, steps=None, weights=None,
            collect: bool = False):
        """March ``steps`` backward Euler steps.

        Returns ``(final, weighted_sum, trajectory)``; ``weighted_sum`` is
        ``sum_k weights[k] u_k`` (zeros when ``weights`` is None) and
        ``trajectory`` is the full (steps+1, n) array when ``collect``.
        """
        if steps is None:
            raise ValueError("steps must be given")
        steps = int(steps)
        if steps < 1:
            raise ValueError(f"steps must be >= 1, got {steps}")
        u0 = np.ascontiguousarray(u0, dtype=float)
        if g is None or gamma is None:
            g = np.zeros(self.n)
            gamma = np.zeros(steps + 1)
        else:
            g = np.ascontiguousarray(g, dtype=float)
            gamma = np.ascontiguousarray(gamma, dtype=float)
        if gamma.shape[0] != steps + 1:
            raise ValueError("gamma must hold one value per time node")
        if weights is None:
            weights = np.zeros(steps + 1)
        else:
            weights = np.ascontiguousarray(weights, dtype=float)

        acc = np.zeros(self.n)
        traj = np.empty((steps + 1 if collect else 1, self.n))

        if self.use_thomas:
            sub, diag, sup = self._parts
            final = _thomas_march(sub, diag, sup, u0, g, gamma, self.tau,
                                  weights, traj, acc, collect)
        else:
            u = u0.copy()
            if collect:
                traj[0, :] = u
            acc += weights[0] * u
            for k in range(1, steps + 1):
                u = self._lu.solve(u + (self.tau * gamma[k]) * g)
                acc += weights[k] * u
                if collect:
                    traj[k, :] = u
            final = u

        return final, acc, (traj if collect else None)

    def single_step(self, u, tau: float, rhs_add=None):
        """One backward Euler step of an arbitrary size (used for remainders)."""
        if tau <= 0:
            raise ValueError(f"step size must be positive, got {tau}")
        r = np.asarray(u if rhs_add is None else u + rhs_add, dtype=float)
        if self.is_tridiagonal:
            from scipy.linalg import solve_banded

            sub, diag, sup = _tridiagonal_parts(self.A, tau)
            ab = np.zeros((3, self.n))
            ab[0, 1:] = sup[:-1]
            ab[1, :] = diag
            ab[2, :-1] = sub[1:]
            return solve_banded((1, 1), ab, r)
        M = sp.eye(self.n, format="csc") - tau * sp.csc_matrix(self.A)
        return spla.splu(M).solve(r)
