"""Syndromes, validity of defect configurations, degeneracy and logical operators."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2 import LatticeMismatchError, LinearSolver, PauliOperator, independent_rows
from .models import StabilizerModel


class DefectConfiguration:
    """Violated generators of a model, one bit per (type, site)."""

    __slots__ = ("model", "bits")

    def __init__(self, model: StabilizerModel, bits):
        bits = np.asarray(bits, dtype=np.uint8) & 1
        if bits.shape != (model.n_generators,):
            raise ValueError(f"expected {model.n_generators} syndrome bits, got {bits.shape}")
        bits.flags.writeable = False
        self.model = model
        self.bits = bits

    @classmethod
    def empty(cls, model: StabilizerModel) -> DefectConfiguration:
        return cls(model, np.zeros(model.n_generators, dtype=np.uint8))

    @classmethod
    def from_defects(cls, model: StabilizerModel, defects) -> DefectConfiguration:
        """Build from ``(site, type_index)`` pairs; repeated pairs cancel."""
        bits = np.zeros(model.n_generators, dtype=np.uint8)
        for site, t in defects:
            bits[model.generator_index(int(site), int(t))] ^= 1
        return cls(model, bits)

    def defects(self) -> list[tuple[int, int]]:
        return [self.model.generator_site_type(int(g)) for g in np.flatnonzero(self.bits)]

    def count(self, label: str) -> int:
        t = self.model.type_index(label)
        ns = self.model.lattice.n_sites
        return int(self.bits[t * ns : (t + 1) * ns].sum())

    @property
    def m_X(self) -> int:
        return self.count("X") if "X" in self.model.stencil.type_labels else 0

    @property
    def m_Z(self) -> int:
        return self.count("Z") if "Z" in self.model.stencil.type_labels else 0

    @property
    def n_defects(self) -> int:
        return int(self.bits.sum())

    @property
    def energy(self) -> float:
        """Energy above the ground level: each violated term costs 2J."""
        return 2.0 * self.model.J * self.n_defects

    def __xor__(self, other: DefectConfiguration) -> DefectConfiguration:
        if other.model is not self.model:
            raise LatticeMismatchError("configurations belong to different models")
        return DefectConfiguration(self.model, self.bits ^ other.bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DefectConfiguration):
            return NotImplemented
        return self.model is other.model and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return f"DefectConfiguration({self.model.name}, defects={self.defects()})"


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    witness: PauliOperator | None
    rank: int
    augmented_rank: int


def _check_lattice(model: StabilizerModel, p: PauliOperator):
    if p.lattice != model.lattice:
        raise LatticeMismatchError(f"operator on {p.lattice.dims}, model on {model.lattice.dims}")


def syndrome(model: StabilizerModel, p: PauliOperator) -> DefectConfiguration:
    """Bit (t, i) is set iff the generator of type t at site i anticommutes with ``p``."""
    _check_lattice(model, p)
    return DefectConfiguration(model, model.syndrome_matrix.matvec(p.to_symplectic()))


def syndrome_bits_sparse(model: StabilizerModel, p: PauliOperator) -> int:
    """Syndrome as an integer bitset over generator indices (fast path for small supports)."""
    out = 0
    for q in p.support():
        out ^= single_qubit_syndromes(model)[q][_letter_code(p, q)]
    return out


def _letter_code(p: PauliOperator, q: int) -> int:
    return ((p.x >> q) & 1) | (((p.z >> q) & 1) << 1)


@lru_cache(maxsize=16)
def single_qubit_syndromes(model: StabilizerModel) -> list[dict[int, int]]:
    """For each qubit, map letter code (1=X, 2=Z, 3=Y) to its syndrome bitset."""
    m = model.syndrome_matrix.to_dense()
    n = model.n_qubits
    out = []
    for q in range(n):
        sx = _bitset(np.flatnonzero(m[:, q]))
        sz = _bitset(np.flatnonzero(m[:, n + q]))
        out.append({1: sx, 2: sz, 3: sx ^ sz})
    return out


def _bitset(indices) -> int:
    v = 0
    for i in indices:
        v |= 1 << int(i)
    return v


@lru_cache(maxsize=16)
def _solver(model: StabilizerModel) -> LinearSolver:
    return LinearSolver(model.syndrome_matrix)


def is_valid(model: StabilizerModel, config: DefectConfiguration) -> ValidityResult:
    """Decide whether some Pauli operator produces exactly ``config``."""
    if config.model is not model:
        raise LatticeMismatchError("configuration belongs to a different model")
    result = _solver(model).solve(config.bits)
    if not result.feasible:
        return ValidityResult(False, None, result.rank, result.augmented_rank)
    witness = PauliOperator.from_symplectic(model.lattice, result.witness)
    return ValidityResult(True, witness, result.rank, result.augmented_rank)


def degeneracy(model: StabilizerModel) -> int:
    """Number of encoded qubits k; the ground space has dimension 2**k."""
    return model.n_qubits - model.stabilizer_matrix.rank()


@lru_cache(maxsize=16)
def logical_operators(model: StabilizerModel) -> tuple[tuple[PauliOperator, PauliOperator], ...]:
    """Symplectic pairs of logical operators, a byproduct of the rank computation.

    Each pair anticommutes internally and commutes with every other pair and
    with all generators.
    """
    n = model.n_qubits
    centralizer = LinearSolver(model.syndrome_matrix).nullspace()
    stab = model.stabilizer_matrix
    stacked = stab.vstack(centralizer) if centralizer.nrows else stab
    keep = independent_rows(stacked)
    reps = [stacked.row(int(i)) for i in keep if i >= stab.nrows]
    pairs = []
    while reps:
        a = reps.pop(0)
        partner = next((j for j, b in enumerate(reps) if _symp(a, b, n)), None)
        if partner is None:
            raise RuntimeError("logical representatives are not symplectically paired")
        b = reps.pop(partner)
        updated = []
        for c in reps:
            if _symp(c, b, n):
                c = c ^ a
            if _symp(c, a, n):
                c = c ^ b
            updated.append(c)
        reps = updated
        pairs.append((PauliOperator.from_symplectic(model.lattice, a), PauliOperator.from_symplectic(model.lattice, b)))
    return tuple(pairs)


def _symp(a: np.ndarray, b: np.ndarray, n: int) -> int:
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    return int((a[:n] @ b[n:] + a[n:] @ b[:n]) & 1)
