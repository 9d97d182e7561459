"""Quasi-adiabatic flow U_s with dU/ds = i K(s) U and band projectors P_s = U_s P_0 U_s^dagger.

K(s) is built in the instantaneous eigenbasis of H_s.  Between different bands
the kernel is fixed, ``K_ab = i Y_ab / (E_a - E_b)``.  Within a band it is a
gauge choice: ``"zero"`` or ``"bump"``, the latter being
``Y_ab (w(omega) - 1) / (i omega)`` with ``w(omega) = (1 - (omega/gamma)**2)**2``
inside ``|omega| < gamma``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import eigsh

from ..gf2 import PauliOperator
from .bands import BlockSpectra, GapClosedError, cluster_levels
from .paulisum import PerturbedHamiltonian, apply_pauli
from .symmetry import MomentumBlocks

WITHIN_BAND = ("zero", "bump")


class FlowToleranceError(RuntimeError):
    pass


def bump(omega: np.ndarray, gamma: float) -> np.ndarray:
    x = omega / gamma
    return np.where(np.abs(x) < 1.0, (1.0 - x**2) ** 2, 0.0)


def eigenbasis_generator(energies, vectors, y, labels, gamma: float, within: str = "zero") -> np.ndarray:
    """K in the original basis from an eigensystem of H_s, the perturbation Y and band labels."""
    if within not in WITHIN_BAND:
        raise ValueError(f"within-band kernel must be one of {WITHIN_BAND}")
    yt = vectors.conj().T @ y @ vectors
    omega = energies[:, None] - energies[None, :]
    cross = labels[:, None] != labels[None, :]
    if cross.any() and np.abs(omega[cross]).min() <= gamma:
        raise GapClosedError(f"gamma={gamma} is not below the smallest inter-band spacing {np.abs(omega[cross]).min():.4g}")
    kt = np.zeros_like(yt, dtype=complex)
    kt[cross] = 1j * yt[cross] / omega[cross]
    if within == "bump":
        inner = ~cross & (np.abs(omega) > 1e-12)
        kt[inner] = yt[inner] * (bump(omega[inner], gamma) - 1.0) / (1j * omega[inner])
    return vectors @ kt @ vectors.conj().T


def flow_generator(h: np.ndarray, y: np.ndarray, gamma: float, within: str = "zero", band_gap: float | None = None):
    """Dense K(s) for a Hamiltonian matrix ``h`` (= H_s) and perturbation ``y``.

    Bands are the clusters of the spectrum separated by at least ``band_gap``
    (default ``gamma``).  Refuses when gamma is not below the band spacing.
    """
    e, v = np.linalg.eigh(h)
    labels = cluster_levels(e, gamma if band_gap is None else band_gap)
    return eigenbasis_generator(e, v, y, labels, gamma, within)


def _magnus4(k1: np.ndarray, k2: np.ndarray, h: float) -> np.ndarray:
    a1, a2 = 1j * k1, 1j * k2
    omega = 0.5 * h * (a1 + a2) + (np.sqrt(3.0) / 12.0) * h * h * (a2 @ a1 - a1 @ a2)
    return sla.expm(omega)


_C1 = 0.5 - np.sqrt(3.0) / 6.0
_C2 = 0.5 + np.sqrt(3.0) / 6.0


@dataclass
class FlowState:
    """U_s stored blockwise in the momentum basis."""

    s: float
    blocks: MomentumBlocks
    unitaries: list[np.ndarray]
    steps: int = 0
    rejected: int = 0
    error_estimate: float = 0.0
    history: list[float] = field(default_factory=list)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        parts = self.blocks.to_blocks(vec)
        return self.blocks.from_blocks([u @ p for u, p in zip(self.unitaries, parts)])

    def apply_adjoint(self, vec: np.ndarray) -> np.ndarray:
        parts = self.blocks.to_blocks(vec)
        return self.blocks.from_blocks([u.conj().T @ p for u, p in zip(self.unitaries, parts)])

    def unitarity_defect(self) -> float:
        return max(np.linalg.norm(u.conj().T @ u - np.eye(len(u)), 2) for u in self.unitaries)

    def dense(self) -> np.ndarray:
        return self.blocks.assemble(self.unitaries)


class SpectralFlow:
    """Integrates the flow for one perturbed Hamiltonian family H0 + s Y."""

    def __init__(self, ham: PerturbedHamiltonian, gamma: float | None = None, within: str = "zero", spectra: BlockSpectra | None = None):
        self.ham = ham
        self.spectra = spectra if spectra is not None else BlockSpectra(ham)
        self.gamma = ham.model.J if gamma is None else float(gamma)
        if within not in WITHIN_BAND:
            raise ValueError(f"within-band kernel must be one of {WITHIN_BAND}")
        self.within = within

    @property
    def blocks(self) -> MomentumBlocks:
        return self.spectra.blocks

    def generator(self, s: float) -> list[np.ndarray]:
        spec = self.spectra.spectrum(s)
        if spec.min_gap <= self.gamma:
            raise GapClosedError(f"band gap {spec.min_gap:.4g} at s={s} is not above gamma={self.gamma}")
        return [
            eigenbasis_generator(e, v, y, labels, self.gamma, self.within)
            for (e, v, labels), y in zip(self.spectra.eig(s), self.spectra.Y)
        ]

    def _step(self, s: float, h: float) -> list[np.ndarray]:
        k1 = self.generator(s + _C1 * h)
        k2 = self.generator(s + _C2 * h)
        return [_magnus4(a, b, h) for a, b in zip(k1, k2)]

    def integrate(self, s_target: float, tol: float = 1e-9, h_init: float = 0.01, max_steps: int = 10_000) -> FlowState:
        """Adaptive 4th-order Magnus integration from s = 0 with step doubling."""
        blocks = self.blocks
        us = [np.eye(n, dtype=complex) for n in blocks.sizes]
        state = FlowState(0.0, blocks, us)
        if s_target == 0:
            return state
        direction = np.sign(s_target)
        s = 0.0
        h = min(abs(h_init), abs(s_target)) * direction
        while abs(s_target - s) > 1e-15:
            if state.steps + state.rejected >= max_steps:
                raise FlowToleranceError(f"flow to s={s_target} not finished within {max_steps} steps")
            if abs(h) > abs(s_target - s):
                h = s_target - s
            big = self._step(s, h)
            half1 = self._step(s, h / 2)
            half2 = self._step(s + h / 2, h / 2)
            fine = [b2 @ b1 for b1, b2 in zip(half1, half2)]
            err = max(np.abs(f - g).max() for f, g in zip(fine, big))
            if err <= tol or abs(h) < 1e-12:
                state.unitaries = [f @ u for f, u in zip(fine, state.unitaries)]
                s += h
                state.steps += 1
                state.error_estimate += err
                state.history.append(s)
            else:
                state.rejected += 1
            factor = 2.0 if err == 0 else min(2.0, max(0.2, 0.9 * (tol / err) ** 0.2))
            h *= factor
        state.s = float(s_target)
        return state

    def projector_defect(self, state: FlowState, bands=None) -> float:
        """max over bands of || U_s P_0 U_s^dagger - P_s || (exact P_s from the eigensolver)."""
        bands = range(len(self.spectra.levels)) if bands is None else bands
        worst = 0.0
        for n in bands:
            p0 = self.spectra.projector(0.0, n)
            ps = self.spectra.projector(state.s, n)
            for u, a, b in zip(state.unitaries, p0, ps):
                if not a.any() and not b.any():
                    continue
                worst = max(worst, np.linalg.norm(u @ a @ u.conj().T - b, 2))
        return worst

    def projector_derivative_check(self, s: float, band: int, ds: float = 1e-4) -> tuple[float, float]:
        """Largest entrywise gap between a central difference of P_s and i[K(s), P_s], plus the allowed slack."""
        if s < ds:
            raise ValueError("central difference needs s >= ds")
        worst = 0.0
        parts = zip(
            self.generator(s),
            self.spectra.projector(s, band),
            self.spectra.projector(s + ds, band),
            self.spectra.projector(s - ds, band),
        )
        for k, p, plus, minus in parts:
            fd = (plus - minus) / (2 * ds)
            worst = max(worst, np.abs(fd - 1j * (k @ p - p @ k)).max())
        return worst, ds + 1e-8


@dataclass(frozen=True)
class DecayProfile:
    """Raw profile; fits are annotations only."""

    abscissa: np.ndarray
    ordinate: np.ndarray
    label: str = ""
    tags: dict = field(default_factory=dict)

    def strictly_decreasing(self, count: int | None = None) -> bool:
        y = self.ordinate if count is None else self.ordinate[:count]
        return bool(np.all(np.diff(y) < 0))


def _axis_order(qubits, n):
    # state index bit q sits on tensor axis n - 1 - q
    return [n - 1 - q for q in qubits]


def reduce_to(op: np.ndarray, keep: list[int], n: int) -> np.ndarray:
    """Normalised partial trace onto qubits ``keep`` (in the given order)."""
    rest = [q for q in range(n) if q not in set(keep)]
    t = op.reshape((2,) * (2 * n))
    rows = _axis_order(keep, n) + _axis_order(rest, n)
    cols = [a + n for a in rows]
    t = t.transpose(rows + cols)
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("iaja->ij", t) / dr


def embed(op: np.ndarray, inner: list[int], outer: list[int]) -> np.ndarray:
    """``op`` on qubits ``inner`` tensored with identity, as a matrix on ``outer`` (inner is a subset)."""
    extra = [q for q in outer if q not in set(inner)]
    full = np.kron(op, np.eye(2 ** len(extra)))
    m = len(outer)
    order = inner + extra  # tensor axis j <-> qubit order[j] in this kron layout
    t = full.reshape((2,) * (2 * m))
    # want axis for qubit outer[i] at position i
    perm = [order.index(q) for q in outer]
    t = t.transpose(perm + [p + m for p in perm])
    return t.reshape(2**m, 2**m)


def _op_norm(a: np.ndarray) -> float:
    fro = float(np.linalg.norm(a))
    if fro < 1e-12:
        # Lanczos stalls on a numerically zero matrix; Frobenius bounds the operator norm
        return fro
    if a.shape[0] <= 1024:
        return float(np.abs(np.linalg.eigvalsh(a)).max())
    vals = eigsh(a, k=2, which="LM", tol=1e-10, return_eigenvectors=False)
    return float(np.abs(vals).max())


def heisenberg(state: FlowState, op: PauliOperator) -> np.ndarray:
    """Dense U_s^dagger O U_s."""
    u = state.dense()
    ou = apply_pauli(op, u)
    return u.conj().T @ ou


def locality_profile(state: FlowState, op: PauliOperator, center_site: int | None = None, radii=None) -> DecayProfile:
    """Shell norms ||O'_r|| of U_s^dagger O U_s on L-infinity balls around ``center_site``.

    ``O_r`` is the normalised partial trace of the evolved operator onto the
    ball of radius r (tensored with identity); ``O'_0 = O_0`` and
    ``O'_r = O_r - O_{r-1}``.
    """
    lat = op.lattice
    n = lat.n_qubits
    if center_site is None:
        support = op.support()
        center_site = lat.qubit_site(support[0])[0] if support else 0
    dist = lat.distance(center_site, np.arange(lat.n_sites))
    r_full = int(dist.max())
    radii = list(range(r_full + 1)) if radii is None else list(radii)
    evolved = heisenberg(state, op)
    norms = []
    prev, prev_q = None, None
    for r in radii:
        sites = np.flatnonzero(dist <= r)
        qubits = [int(q) for q in lat.site_qubits(sites)]
        if len(qubits) == n:
            qubits, approx = list(range(n - 1, -1, -1)), evolved
        else:
            approx = reduce_to(evolved, qubits, n)
        shell = approx if prev is None else approx - embed(prev, prev_q, qubits)
        norms.append(_op_norm(shell))
        prev, prev_q = approx, qubits
    return DecayProfile(np.asarray(radii), np.asarray(norms), "shell_norm", {"center_site": int(center_site), "s": state.s})
