"""Single-particle hopping chain: the survival amplitude of a site-localised particle is J0(lambda t)."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .krylov import evolve


def hopping_chain(L: int, lam: float = 1.0, periodic: bool = False) -> sp.csr_matrix:
    """H = -(lam/2) sum_j (|j><j+1| + h.c.), dispersion -lam cos k."""
    if L < 2:
        raise ValueError("chain needs at least two sites")
    off = np.full(L - 1, -lam / 2)
    h = sp.diags([off, off], [1, -1], shape=(L, L), format="lil", dtype=complex)
    if periodic:
        h[0, L - 1] = h[L - 1, 0] = -lam / 2
    return h.tocsr()


def survival_amplitudes(L: int, lam: float, times, tol: float = 1e-12) -> np.ndarray:
    """<j0| exp(-i t H) |j0> for the middle site j0, times in increasing order."""
    h = hopping_chain(L, lam)
    start = np.zeros(L, dtype=complex)
    start[L // 2] = 1.0
    psi = start.copy()
    out = []
    last = 0.0
    for t in times:
        psi = evolve(h, psi, t - last, tol=tol)
        last = t
        out.append(psi[L // 2])
    return np.asarray(out)


def bessel_j0_series(x: float, terms: int = 120) -> float:
    """J0 from its power series, summed in exact rational arithmetic."""
    q = Fraction(x) ** 2 / 4
    total = Fraction(0)
    term = Fraction(1)
    for k in range(terms):
        total += term
        term = -term * q / ((k + 1) ** 2)
    return float(total)
