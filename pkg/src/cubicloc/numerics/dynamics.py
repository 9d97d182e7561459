"""Band-restricted dynamics: off-diagonal sums, the survival-amplitude bound and integrals of motion.

Band states are ``U_s |q>`` for H0 eigenstates ``|q>`` of definite defect
configuration.  In that basis ``Htilde_uv = <u~| H_s |v~>``.  The truncated
matrix Q drops the couplings of the reference state, so ``P_s (Q - H_s) P_s``
is an arrow matrix with zero diagonal and its norm is the Euclidean norm of
the dropped column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import DecayProfile, FlowState, SpectralFlow
from .states import BasisState


class BandIdentificationError(RuntimeError):
    pass


@dataclass
class FlowedBand:
    flow: SpectralFlow
    state: FlowState
    labels: list[BasisState]
    vectors: np.ndarray  # flowed band basis as columns
    htilde: np.ndarray
    leakage: float

    @classmethod
    def build(cls, flow: SpectralFlow, state: FlowState, labels, basis0: np.ndarray, leak_tol: float = 1e-6):
        """Flow the unperturbed band basis and check that H_s maps its span into itself."""
        ham = flow.ham.at(state.s)
        h = ham.sparse()
        vecs = np.stack([state.apply(basis0[:, i]) for i in range(basis0.shape[1])], axis=1)
        hv = h @ vecs
        htilde = vecs.conj().T @ hv
        leakage = float(np.linalg.norm(hv - vecs @ htilde, 2))
        scale = max(1.0, float(np.abs(htilde).max()))
        if leakage > leak_tol * scale:
            raise BandIdentificationError(f"flowed band is not invariant under H_s (leakage {leakage:.3g})")
        return cls(flow, state, list(labels), vecs, htilde, leakage)

    @property
    def size(self) -> int:
        return len(self.labels)

    def evolve(self, psi: np.ndarray, t: float) -> np.ndarray:
        """exp(-i t H_s) psi from the block eigensystems."""
        blocks = self.flow.blocks
        parts = blocks.to_blocks(psi)
        out = []
        for (e, v, _), p in zip(self.flow.spectra.eig(self.state.s), parts):
            out.append(v @ (np.exp(-1j * t * e) * (v.conj().T @ p)))
        return blocks.from_blocks(out)


@dataclass(frozen=True)
class OffDiagonal:
    reference: int
    abs_sum: float
    truncation_norm: float

    def survival_bound(self, t):
        return 1.0 - np.abs(np.asarray(t)) * self.truncation_norm


def offdiagonal_sum(band: FlowedBand, reference: int) -> OffDiagonal:
    """sum_{q != ref} |<q~|H_s|ref~>| and ||P_s (Q - H_s) P_s||."""
    col = band.htilde[:, reference].copy()
    col[reference] = 0.0
    return OffDiagonal(reference, float(np.abs(col).sum()), float(np.linalg.norm(col)))


def truncated_matrix(band: FlowedBand, reference: int) -> np.ndarray:
    q = band.htilde.copy()
    keep = q[reference, reference]
    q[reference, :] = 0.0
    q[:, reference] = 0.0
    q[reference, reference] = keep
    return q


@dataclass(frozen=True)
class SurvivalCheck:
    times: np.ndarray
    amplitude: np.ndarray
    bound: np.ndarray

    def holds(self, atol: float = 1e-12) -> bool:
        """Pointwise inequality; ``atol`` only absorbs floating-point rounding of |<psi|psi>| at t = 0."""
        return bool(np.all(self.amplitude >= self.bound - atol))

    @property
    def margin(self) -> float:
        return float((self.amplitude - self.bound).min())


def survival_check(band: FlowedBand, reference: int, times) -> SurvivalCheck:
    """|<psi_s| exp(-i t H_s) |psi_s>| against 1 - t ||P_s (Q - H_s) P_s||."""
    times = np.asarray(times, dtype=float)
    psi = band.vectors[:, reference]
    amps = np.array([abs(np.vdot(psi, band.evolve(psi, t))) for t in times])
    od = offdiagonal_sum(band, reference)
    return SurvivalCheck(times, amps, od.survival_bound(times))


@dataclass(frozen=True)
class IOMDrift:
    term: int
    commutator_local: float
    commutator_band: float
    profile: DecayProfile

    @property
    def drift(self) -> np.ndarray:
        return np.abs(self.profile.ordinate - self.profile.ordinate[0])

    def holds_local(self) -> bool:
        return bool(np.all(self.drift <= self.profile.abscissa * self.commutator_local + 1e-12))

    def holds_band(self) -> bool:
        return bool(np.all(self.drift <= self.profile.abscissa * self.commutator_band + 1e-12))


def iom_drift(band: FlowedBand, term: int, local: list[int], start: int, times) -> IOMDrift:
    """Track <I_j(s)> for I_j(s) = U_s G_j U_s^dagger along exp(-i t H_s) U_s|start>.

    ``local`` indexes the band states spanning P_loc.  Two commutator norms are
    reported: restricted to P_loc, and restricted to the whole band (which the
    evolved state never leaves).
    """
    if start not in local:
        raise ValueError("the initial state must lie in P_loc")
    ell = np.array([-1.0 if lab.config.bits[term] else 1.0 for lab in band.labels])
    comm = (ell[None, :] - ell[:, None]) * band.htilde
    loc = np.asarray(local)
    gram = band.vectors[:, loc].conj().T @ band.vectors[:, loc]
    if np.linalg.norm(gram - np.eye(len(loc)), 2) > 1e-8:
        raise BandIdentificationError("flowed P_loc states are not orthonormal")
    c_loc = float(np.linalg.norm(comm[np.ix_(loc, loc)], 2))
    c_band = float(np.linalg.norm(comm, 2))
    times = np.asarray(times, dtype=float)
    psi0 = band.vectors[:, start]
    values = []
    for t in times:
        coords = band.vectors.conj().T @ band.evolve(psi0, t)
        values.append(float(np.sum(ell * np.abs(coords) ** 2)))
    profile = DecayProfile(times, np.asarray(values), "iom_expectation", {"term": term})
    return IOMDrift(term, c_loc, c_band, profile)
