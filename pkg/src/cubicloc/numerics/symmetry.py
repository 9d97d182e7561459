"""Lattice-momentum block decomposition of translation-invariant operators.

The 12-qubit dense work would otherwise need repeated 4096-dimensional
eigensolves; in momentum blocks it splits into pieces of a few hundred.
"""
from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from ..gf2 import Lattice
from .paulisum import PauliSum


def _translations(lattice: Lattice) -> list[tuple[int, int, int]]:
    return list(itertools.product(*(range(d) for d in lattice.dims)))


def qubit_permutation(lattice: Lattice, shift) -> np.ndarray:
    perm = np.empty(lattice.n_qubits, dtype=np.int64)
    for q in range(lattice.n_qubits):
        site, flavor = lattice.qubit_site(q)
        perm[q] = lattice.qubit(lattice.translate_site(site, shift), flavor)
    return perm


def state_permutation(n_qubits: int, qperm: np.ndarray) -> np.ndarray:
    basis = np.arange(1 << n_qubits, dtype=np.int64)
    out = np.zeros_like(basis)
    for q, target in enumerate(qperm):
        out |= ((basis >> q) & 1) << int(target)
    return out


def is_translation_invariant(lattice: Lattice, op: PauliSum, atol: float = 1e-12) -> bool:
    terms = {(x, z): c for x, z, c in op.simplified().terms}
    for axis in lattice.active_axes:
        shift = [0, 0, 0]
        shift[axis] = 1
        perm = qubit_permutation(lattice, shift)
        for (x, z), c in terms.items():
            tx = sum(1 << int(perm[q]) for q in range(lattice.n_qubits) if (x >> q) & 1)
            tz = sum(1 << int(perm[q]) for q in range(lattice.n_qubits) if (z >> q) & 1)
            if abs(terms.get((tx, tz), 0.0) - c) > atol:
                return False
    return True


class MomentumBlocks:
    """Orthonormal momentum eigenbasis, stored as one sparse isometry per momentum.

    ``trivial=True`` gives a single identity block, used when the operators at
    hand are not translation invariant.
    """

    def __init__(self, lattice: Lattice, trivial: bool = False):
        self.lattice = lattice
        n = lattice.n_qubits
        self.dim = 1 << n
        if trivial:
            self.momenta = [(0, 0, 0)]
            self.isometries = [sp.identity(self.dim, dtype=complex, format="csc")]
            return
        shifts = _translations(lattice)
        perms = np.stack([state_permutation(n, qubit_permutation(lattice, g)) for g in shifts])
        g = np.asarray(shifts, dtype=float)
        momenta = _translations(lattice)
        k = np.asarray(momenta, dtype=float) / np.asarray(lattice.dims, dtype=float)
        phases = np.exp(-2j * np.pi * (k @ g.T))  # (n_k, n_g)
        columns = [([], []) for _ in momenta]
        seen = np.zeros(self.dim, dtype=bool)
        for rep in range(self.dim):
            if seen[rep]:
                continue
            images = perms[:, rep]
            seen[images] = True
            uniq, inverse = np.unique(images, return_inverse=True)
            coeff = np.zeros((len(momenta), len(uniq)), dtype=complex)
            for j in range(len(shifts)):
                coeff[:, inverse[j]] += phases[:, j]
            norms = np.linalg.norm(coeff, axis=1)
            for ik in np.flatnonzero(norms > 1e-9):
                columns[ik][0].append(uniq)
                columns[ik][1].append(coeff[ik] / norms[ik])
        self.momenta = []
        self.isometries = []
        for ik, (rows, vals) in enumerate(columns):
            if not rows:
                continue
            col_idx = np.concatenate([np.full(len(r), c) for c, r in enumerate(rows)])
            f = sp.csc_matrix(
                (np.concatenate(vals), (np.concatenate(rows), col_idx)), shape=(self.dim, len(rows))
            )
            self.momenta.append(momenta[ik])
            self.isometries.append(f)

    @classmethod
    def for_operators(cls, lattice: Lattice, *ops: PauliSum) -> MomentumBlocks:
        trivial = not all(is_translation_invariant(lattice, op) for op in ops)
        return cls(lattice, trivial=trivial)

    @property
    def sizes(self) -> list[int]:
        return [f.shape[1] for f in self.isometries]

    def __len__(self) -> int:
        return len(self.isometries)

    def project(self, op: sp.spmatrix) -> list[np.ndarray]:
        """Dense blocks ``F_k^dagger op F_k``."""
        out = []
        for f in self.isometries:
            out.append(np.asarray((f.conj().T @ (op @ f)).todense()))
        return out

    def to_blocks(self, vec: np.ndarray) -> list[np.ndarray]:
        return [f.conj().T @ vec for f in self.isometries]

    def from_blocks(self, parts: list[np.ndarray]) -> np.ndarray:
        out = None
        for f, p in zip(self.isometries, parts):
            term = f @ p
            out = term if out is None else out + term
        return out

    def assemble(self, blocks: list[np.ndarray]) -> np.ndarray:
        """Full dense operator ``sum_k F_k B_k F_k^dagger``."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for f, b in zip(self.isometries, blocks):
            left = np.asarray(f @ b)
            out += np.asarray(f @ left.conj().T).conj().T
        return out
