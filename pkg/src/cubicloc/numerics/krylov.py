"""Lanczos propagation of state vectors under a Hermitian operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class KrylovConvergenceError(RuntimeError):
    pass


@dataclass
class EvolveInfo:
    substeps: int = 0
    matvecs: int = 0
    error_estimate: float = 0.0


def _lanczos(apply, v: np.ndarray, m: int):
    """Orthonormal Krylov basis (fully reorthogonalised) and tridiagonal matrix.

    Returns ``(V, T, beta_next)``; ``beta_next`` is 0 on an invariant subspace.
    """
    n = v.shape[0]
    basis = np.zeros((m + 1, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    basis[0] = v
    k = m
    for j in range(m):
        w = apply(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w = w - alpha[j] * basis[j] - (beta[j - 1] * basis[j - 1] if j else 0.0)
        w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-13:
            k = j + 1
            beta[j] = 0.0
            break
        basis[j + 1] = w / beta[j]
    t = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    return basis[:k], t, beta[k - 1] if k == m else 0.0


def evolve(H, state: np.ndarray, t: float, tol: float = 1e-10, krylov_dim: int = 30,
           max_substeps: int = 100_000, info: EvolveInfo | None = None) -> np.ndarray:
    """Krylov approximation of exp(-i t H) |state>.

    Each substep is accepted only when the a-posteriori Lanczos error estimate
    ``beta_m |[exp(-i h T)]_{m-1, 0}|`` (times the vector norm) is below ``tol``.
    """
    info = info if info is not None else EvolveInfo()
    apply = H.matvec if hasattr(H, "matvec") and not hasattr(H, "toarray") else (lambda x: H @ x)
    psi = np.asarray(state, dtype=complex).copy()
    if t == 0:
        return psi
    remaining = float(t)
    h = remaining
    while abs(remaining) > 0:
        if info.substeps >= max_substeps:
            raise KrylovConvergenceError(f"evolution to t={t} exceeded {max_substeps} substeps")
        norm = np.linalg.norm(psi)
        if norm == 0:
            return psi
        m = min(krylov_dim, psi.shape[0])
        basis, tri, beta_next = _lanczos(apply, psi / norm, m)
        info.matvecs += tri.shape[0]
        h = np.sign(remaining) * min(abs(h), abs(remaining))
        while True:
            small = sla.expm(-1j * h * tri)[:, 0]
            err = norm * beta_next * abs(small[-1])
            if err <= tol or beta_next == 0.0:
                break
            shrink = 0.9 * (tol / err) ** (1.0 / max(tri.shape[0], 1))
            h *= min(0.5, shrink)
            if abs(h) < 1e-14 * max(1.0, abs(t)):
                raise KrylovConvergenceError(f"step size underflow while evolving to t={t}")
        psi = norm * (basis.T @ small)
        remaining -= h
        info.substeps += 1
        info.error_estimate += err
        if beta_next == 0.0:
            h = remaining
        else:
            h = h * 1.5
    return psi


def evolve_dense(h: np.ndarray, state: np.ndarray, t: float) -> np.ndarray:
    """Reference propagator via a full eigendecomposition."""
    e, v = np.linalg.eigh(h)
    return v @ (np.exp(-1j * t * e) * (v.conj().T @ state))
