"""Band structure of H_s: levels of H0 continued to s > 0 by counting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paulisum import PerturbedHamiltonian
from .symmetry import MomentumBlocks


class GapClosedError(RuntimeError):
    pass


def cluster_levels(energies: np.ndarray, min_gap: float) -> np.ndarray:
    """Label sorted-or-not eigenvalues by cluster: a new cluster starts at every gap >= min_gap."""
    order = np.argsort(energies)
    jumps = np.diff(energies[order]) >= min_gap
    labels_sorted = np.concatenate([[0], np.cumsum(jumps)])
    labels = np.empty(len(energies), dtype=np.int64)
    labels[order] = labels_sorted
    return labels


@dataclass(frozen=True)
class BandSpectrum:
    """Band intervals ``[lower[n], upper[n]]`` and the gaps between consecutive bands."""

    s: float
    levels: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    gaps: np.ndarray
    threshold: float

    @property
    def collision(self) -> bool:
        return bool(len(self.gaps) and self.gaps.min() < self.threshold)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min()) if len(self.gaps) else float("inf")


class BlockSpectra:
    """Per-block eigensystems of H_s with band labels inherited from s = 0.

    At s = 0 the levels are ``-J n_gen + 2 J e``; each block keeps its own
    count of states per level, and at s > 0 the sorted eigenvalues of a block
    are handed out to the bands in that order.
    """

    def __init__(self, ham: PerturbedHamiltonian, blocks: MomentumBlocks | None = None, threshold: float | None = None):
        self.ham = ham
        self.blocks = blocks if blocks is not None else MomentumBlocks.for_operators(ham.model.lattice, ham.H0, ham.Y)
        J = ham.model.J
        self.threshold = 0.2 * 2 * J if threshold is None else threshold
        self.H0 = self.blocks.project(ham.H0.to_sparse())
        self.Y = self.blocks.project(ham.Y.simplified().to_sparse())
        self.levels, self.counts = self._level_counts()
        self._cache: dict[float, list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = {}

    def _level_counts(self):
        e0 = [np.linalg.eigvalsh(h) for h in self.H0]
        J = self.ham.model.J
        allv = np.concatenate(e0)
        levels = np.unique(np.round(allv / J, 6)) * J
        counts = np.zeros((len(self.H0), len(levels)), dtype=np.int64)
        for b, e in enumerate(e0):
            idx = np.abs(e[:, None] - levels[None, :]).argmin(axis=1)
            counts[b] = np.bincount(idx, minlength=len(levels))
        return levels, counts

    def hamiltonian_blocks(self, s: float) -> list[np.ndarray]:
        return [h0 + s * y for h0, y in zip(self.H0, self.Y)]

    def eig(self, s: float):
        """List of ``(E, V, band)`` per block at strength ``s``."""
        key = float(s)
        if key not in self._cache:
            out = []
            for b, h in enumerate(self.hamiltonian_blocks(s)):
                e, v = np.linalg.eigh(h)
                labels = np.repeat(np.arange(len(self.levels)), self.counts[b])
                out.append((e, v, labels))
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = out
        return self._cache[key]

    def spectrum(self, s: float) -> BandSpectrum:
        lower = np.full(len(self.levels), np.inf)
        upper = np.full(len(self.levels), -np.inf)
        for e, _, labels in self.eig(s):
            for n in np.unique(labels):
                sel = e[labels == n]
                lower[n] = min(lower[n], sel.min())
                upper[n] = max(upper[n], sel.max())
        gaps = lower[1:] - upper[:-1]
        return BandSpectrum(float(s), self.levels.copy(), lower, upper, gaps, self.threshold)

    def projector(self, s: float, band: int) -> list[np.ndarray]:
        out = []
        for e, v, labels in self.eig(s):
            w = v[:, labels == band]
            out.append(w @ w.conj().T)
        return out

    def band_index(self, energy: float) -> int:
        idx = int(np.abs(self.levels - energy).argmin())
        if abs(self.levels[idx] - energy) > 1e-8 * max(1.0, abs(energy)):
            raise ValueError(f"energy {energy} is not an unperturbed level")
        return idx


def band_spectrum(ham: PerturbedHamiltonian, n_bands: int | None = None, s_values=None, blocks=None, threshold=None):
    """Band edges and gaps along a sweep of s (default: just ``ham.s``); each entry carries a collision flag."""
    spectra = BlockSpectra(ham, blocks, threshold)
    s_values = [ham.s] if s_values is None else list(s_values)
    out = []
    for s in s_values:
        spec = spectra.spectrum(s)
        if n_bands is not None:
            k = min(n_bands, len(spec.levels))
            spec = BandSpectrum(spec.s, spec.levels[:k], spec.lower[:k], spec.upper[:k], spec.gaps[: k - 1], spec.threshold)
        out.append(spec)
    return out
