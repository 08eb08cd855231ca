"""Dense numeric kernels: Jacobi eigendecomposition, spectral powers,
power iteration and the matrix exponential."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConvergenceError(ArithmeticError):
    """An iterative kernel did not reach its tolerance within the cap."""


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    basis: np.ndarray  # orthogonal, columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        b = self.basis
        return (b * self.eigenvalues) @ b.T


def _square(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def eig_symmetric(m, tol: float = 1e-10, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Sweeps rotate every off-diagonal pair to zero until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||M||_F)``.

    Raises:
        ValueError: if ``m`` is not symmetric within ``tol``.
        ConvergenceError: if ``max_sweeps`` sweeps are not enough.
    """
    a = _square(m)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    if n and np.max(np.abs(a - a.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    for _ in range(max_sweeps):
        if np.linalg.norm(a - np.diag(np.diag(a))) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return EigenDecomposition(vals[order], v[:, order])


def spectral_power(m, t: int, tol: float = 1e-10) -> np.ndarray:
    """``M**t`` evaluated as ``B diag(lambda**t) B^T``."""
    t = int(t)
    if t < 0:
        raise ValueError("power must be non-negative")
    a = _square(m)
    if t == 0:
        return np.eye(a.shape[0])
    dec = eig_symmetric(a, tol=tol)
    return (dec.basis * dec.eigenvalues**t) @ dec.basis.T


def _power_iterate(b: np.ndarray, x: np.ndarray, tol: float, max_iter: int) -> float | None:
    res_tol = math.sqrt(tol)
    lam_prev = math.nan
    for _ in range(max_iter):
        y = b @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        bx = b @ x
        lam = float(x @ bx)
        resid = float(np.linalg.norm(bx - lam * x))
        scale = max(1.0, abs(lam))
        if abs(lam - lam_prev) <= 1e-3 * tol * scale and resid <= res_tol * scale:
            return lam
        lam_prev = lam
    return None


def dominant_eigenvalue(m, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest-magnitude eigenvalue by shifted power iteration.

    Iterates on ``M + sI`` and ``M - sI`` with ``s`` a quarter of the
    infinity norm, so that a ``+lambda/-lambda`` pair (bipartite graphs)
    does not stall the iteration. The Rayleigh-quotient estimate with the
    larger magnitude wins; magnitudes equal within ``sqrt(tol)`` count as a
    tie, which the positive value takes.
    """
    a = _square(m)
    n = a.shape[0]
    if n == 0 or not np.any(a):
        raise ValueError("matrix must be non-zero")
    shift = 0.25 * float(np.max(np.sum(np.abs(a), axis=1)))
    x0 = np.random.default_rng(seed).random(n) + 0.5
    x0 /= np.linalg.norm(x0)
    found = []
    for s in (shift, -shift):
        lam = _power_iterate(a + s * np.eye(n), x0, tol, max_iter)
        if lam is not None:
            found.append(lam - s)
    if not found:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    best = max(found, key=abs)
    pos = max(found)
    if abs(abs(best) - pos) <= math.sqrt(tol) * max(1.0, abs(best)):
        return pos
    return best


def matrix_exponential(m, t: float = 1.0) -> np.ndarray:
    """``exp(M t)`` by scaling and squaring of a truncated Taylor series.

    The argument is halved until its 1-norm is at most 0.5, the series is
    summed to machine precision and the result squared back.

    Raises:
        ValueError: for non-finite input.
        OverflowError: if the result does not fit in float64.
    """
    a = _square(m) * float(t)
    n = a.shape[0]
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix exponential of non-finite input")
    norm = float(np.linalg.norm(a, 1)) if n else 0.0
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    a = a / 2.0**squarings
    result = np.eye(n)
    term = np.eye(n)
    eps = np.finfo(float).eps
    for k in range(1, 40):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) <= eps * np.linalg.norm(result, 1):
            break
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(squarings):
            result = result @ result
    if not np.all(np.isfinite(result)):
        raise OverflowError(f"exp(M t) overflows float64 (||M t||_1 = {norm:.3g})")
    return result
