"""Sums of Pauli strings acting on computational-basis state vectors.

A term is stored as two qubit bitmasks plus a real coefficient and stands for
the Hermitian string ``i**popcount(x & z) * X**x Z**z`` (so a Y is a genuine
Pauli Y). Qubit ``q`` is bit ``q`` of the basis-state index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..gf2 import Lattice, PauliOperator
from ..models import StabilizerModel

DENSE_QUBIT_CAP = 13
SPARSE_QUBIT_CAP = 24


class HilbertSpaceTooLarge(ValueError):
    pass


def _parity(values: np.ndarray) -> np.ndarray:
    """Bit parity of each entry of an unsigned array."""
    v = values.astype(np.uint64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.int64)


def string_action(n_qubits: int, x: int, z: int):
    """Return ``(target, phase)`` with ``P|b> = phase[b] |target[b]>``."""
    basis = np.arange(1 << n_qubits, dtype=np.uint64)
    sign = 1 - 2 * _parity(basis & np.uint64(z))
    phase = sign * (1j ** ((x & z).bit_count() % 4))
    return (basis ^ np.uint64(x)).astype(np.int64), phase


@dataclass
class PauliSum:
    """Real linear combination of Hermitian Pauli strings on ``n_qubits`` qubits."""

    n_qubits: int
    terms: list[tuple[int, int, float]] = field(default_factory=list)

    @classmethod
    def from_operators(cls, n_qubits: int, ops, coeffs) -> PauliSum:
        return cls(n_qubits, [(p.x, p.z, float(c)) for p, c in zip(ops, coeffs)])

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> PauliSum:
        return PauliSum(self.n_qubits, [(x, z, c * factor) for x, z, c in self.terms])

    def simplified(self, atol: float = 0.0) -> PauliSum:
        acc: dict[tuple[int, int], float] = {}
        for x, z, c in self.terms:
            acc[(x, z)] = acc.get((x, z), 0.0) + c
        return PauliSum(self.n_qubits, [(x, z, c) for (x, z), c in sorted(acc.items()) if abs(c) > atol])

    @property
    def strength(self) -> float:
        """Largest term norm."""
        return max((abs(c) for _, _, c in self.terms), default=0.0)

    def term_supports(self) -> list[list[int]]:
        out = []
        for x, z, _ in self.terms:
            m = x | z
            out.append([q for q in range(self.n_qubits) if (m >> q) & 1])
        return out

    def to_sparse(self) -> sp.csr_matrix:
        if self.n_qubits > SPARSE_QUBIT_CAP:
            raise HilbertSpaceTooLarge(f"{self.n_qubits} qubits exceeds the sparse cap of {SPARSE_QUBIT_CAP}")
        dim = 1 << self.n_qubits
        rows, cols, vals = [], [], []
        cols_all = np.arange(dim)
        for x, z, c in self.simplified().terms:
            target, phase = string_action(self.n_qubits, x, z)
            rows.append(target)
            cols.append(cols_all)
            vals.append(c * phase)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        m = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        ).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        return m

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > DENSE_QUBIT_CAP:
            raise HilbertSpaceTooLarge(f"{self.n_qubits} qubits exceeds the dense cap of {DENSE_QUBIT_CAP}")
        return self.to_sparse().toarray()


def apply_pauli(op: PauliOperator, vec: np.ndarray) -> np.ndarray:
    """Apply the Hermitian Pauli string ``op`` to a state vector (or columns of a matrix)."""
    n = op.lattice.n_qubits
    target, phase = string_action(n, op.x, op.z)
    out = np.empty_like(vec, dtype=complex)
    if vec.ndim == 1:
        out[target] = phase * vec
    else:
        out[target] = phase[:, None] * vec
    return out


def model_hamiltonian(model: StabilizerModel) -> PauliSum:
    """H0 = -J * sum of all generators."""
    gens = list(model.generators())
    return PauliSum.from_operators(model.n_qubits, gens, [-model.J] * len(gens))


def field_perturbation(lattice: Lattice, hx: float = 1.0, hz: float = 1.0) -> PauliSum:
    """Uniform single-qubit fields sum_i (hx X_i + hz Z_i)."""
    terms = []
    for q in range(lattice.n_qubits):
        if hx:
            terms.append((1 << q, 0, float(hx)))
        if hz:
            terms.append((0, 1 << q, float(hz)))
    return PauliSum(lattice.n_qubits, terms)


def perturbation_from_config(lattice: Lattice, spec: list[dict]) -> PauliSum:
    """Parse ``[{"letters": {"0": "X", "1": "Z"}, "coeff": 0.5}, ...]`` into a PauliSum."""
    ops, coeffs = [], []
    for item in spec:
        letters = {int(q): str(l) for q, l in item["letters"].items()}
        if any(not 0 <= q < lattice.n_qubits for q in letters):
            raise ValueError(f"perturbation term {item} acts outside the lattice")
        ops.append(PauliOperator.from_letters(lattice, letters))
        coeffs.append(item.get("coeff", 1.0))
    return PauliSum.from_operators(lattice.n_qubits, ops, coeffs)


def support_diameter(lattice: Lattice, support: list[int]) -> int:
    sites = sorted({lattice.qubit_site(q)[0] for q in support})
    if len(sites) < 2:
        return 0
    return int(max(lattice.distance(a, sites).max() for a in sites))


@dataclass
class PerturbedHamiltonian:
    """H_s = H0 + s Y for a stabilizer model and a local perturbation Y."""

    model: StabilizerModel
    Y: PauliSum
    s: float = 0.0
    max_term_diameter: int | None = None

    def __post_init__(self):
        if self.Y.n_qubits != self.model.n_qubits:
            raise ValueError("perturbation and model act on different numbers of qubits")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"strength s={self.s} outside [0, 1]")
        if self.max_term_diameter is not None:
            lat = self.model.lattice
            for support in self.Y.term_supports():
                if support_diameter(lat, support) > self.max_term_diameter:
                    raise ValueError(f"perturbation term on qubits {support} exceeds diameter {self.max_term_diameter}")
        self.H0 = model_hamiltonian(self.model)

    @classmethod
    def with_fields(cls, model: StabilizerModel, s: float = 0.0, hx: float = 1.0, hz: float = 1.0):
        return cls(model, field_perturbation(model.lattice, hx, hz), s)

    def at(self, s: float) -> PerturbedHamiltonian:
        return PerturbedHamiltonian(self.model, self.Y, s, self.max_term_diameter)

    @property
    def n_qubits(self) -> int:
        return self.model.n_qubits

    def pauli_sum(self) -> PauliSum:
        return (self.H0 + self.Y.scaled(self.s)).simplified()

    def sparse(self) -> sp.csr_matrix:
        return self.pauli_sum().to_sparse()

    def dense(self) -> np.ndarray:
        return self.pauli_sum().to_dense()
