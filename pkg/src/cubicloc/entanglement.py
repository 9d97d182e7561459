"""Entanglement entropy of stabilizer eigenstates from GF(2) ranks.

For a pure stabilizer state with stabilizer group S on n qubits,
``S(M) = |M| - log2 |S_M|`` where ``S_M`` holds the elements supported in M.
Equivalently ``S(M) = rank(S restricted to M) - |M|``, which is what is
computed.  Pauli excitations only flip signs of the group, so they leave
every entropy unchanged.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .gf2 import BitMatrix, LatticeMismatchError, PauliOperator
from .models import StabilizerModel
from .syndrome import logical_operators


class SectorLabelError(ValueError):
    pass


class SamplingBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class Region:
    """A set of qubits with an optional geometric descriptor."""

    n_qubits: int
    qubits: frozenset[int]
    descriptor: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if any(not 0 <= q < self.n_qubits for q in self.qubits):
            raise ValueError("region contains qubits outside the lattice")

    @classmethod
    def from_qubits(cls, n_qubits: int, qubits, **descriptor) -> Region:
        return cls(n_qubits, frozenset(int(q) for q in qubits), descriptor)

    @classmethod
    def box(cls, model: StabilizerModel, corner, side: int) -> Region:
        lat = model.lattice
        sites = lat.box_sites(corner, side - 1)
        return cls(lat.n_qubits, frozenset(int(q) for q in lat.site_qubits(sites)),
                   {"kind": "box", "corner": tuple(int(c) for c in corner), "side": int(side)})

    @classmethod
    def random(cls, model: StabilizerModel, rng: np.random.Generator, size: int | None = None) -> Region:
        n = model.n_qubits
        size = int(rng.integers(0, n + 1)) if size is None else size
        return cls(n, frozenset(int(q) for q in rng.choice(n, size=size, replace=False)), {"kind": "random"})

    def complement(self) -> Region:
        return Region(self.n_qubits, frozenset(range(self.n_qubits)) - self.qubits, {"kind": "complement"})

    def __len__(self) -> int:
        return len(self.qubits)

    def sorted(self) -> list[int]:
        return sorted(self.qubits)


def parse_sector(model: StabilizerModel, label) -> tuple[str, ...]:
    """Which logical of each pair joins the stabilizer group: a string such as "ZZ" or "XZ".

    ``None`` means logical Z for every pair.
    """
    k = len(logical_operators(model))
    if label is None:
        return ("Z",) * k
    letters = tuple(str(label).upper())
    if len(letters) != k or any(c not in "XZ" for c in letters):
        raise SectorLabelError(f"sector label {label!r} must name X or Z for each of {k} logical qubits")
    return letters


def state_stabilizers(model: StabilizerModel, sector=None) -> BitMatrix:
    """Generators of the stabilizer group of the chosen ground state, rows [x | z]."""
    letters = parse_sector(model, sector)
    rows = [model.stabilizer_matrix]
    pairs = logical_operators(model)
    if pairs:
        extra = [(zbar if c == "Z" else xbar).to_symplectic() for (zbar, xbar), c in zip(pairs, letters)]
        rows.append(BitMatrix.from_dense(np.array(extra, dtype=np.uint8)))
    out = rows[0]
    for r in rows[1:]:
        out = out.vstack(r)
    return out


def _restricted_rank(stab: BitMatrix, n: int, qubits: list[int]) -> int:
    if not qubits:
        return 0
    cols = list(qubits) + [n + q for q in qubits]
    return stab.columns(cols).rank()


def stabilizer_entropy(model: StabilizerModel, region: Region, excitation: PauliOperator | None = None,
                       sector=None) -> int:
    """Entropy in bits of region M for ``excitation |Omega_sector>``."""
    if region.n_qubits != model.n_qubits:
        raise LatticeMismatchError("region and model have different qubit counts")
    if excitation is not None and excitation.lattice != model.lattice:
        raise LatticeMismatchError("excitation lives on a different lattice")
    n = model.n_qubits
    stab = state_stabilizers(model, sector)
    if stab.rank() != n:
        raise SectorLabelError("chosen logical operators do not complete a maximal stabilizer group")
    if not region.qubits:
        return 0
    return _restricted_rank(stab, n, region.sorted()) - len(region)


def entropy_diagnostics(model: StabilizerModel, region: Region, sector=None) -> dict:
    n = model.n_qubits
    stab = state_stabilizers(model, sector)
    r_in = _restricted_rank(stab, n, region.sorted())
    r_out = _restricted_rank(stab, n, region.complement().sorted())
    return {
        "size": len(region),
        "rank_region": r_in,
        "rank_complement": r_out,
        "group_rank": stab.rank(),
        "log2_local_group": n - r_out,
        "S_bits": r_in - len(region),
    }


def reduced_density_matrix(psi: np.ndarray, qubits: list[int], n: int) -> np.ndarray:
    """Partial trace of |psi><psi| onto ``qubits`` (qubit q is bit q of the basis index)."""
    keep = [n - 1 - q for q in qubits]
    rest = [a for a in range(n) if a not in set(keep)]
    t = psi.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    return t @ t.conj().T


def dense_entropy(psi: np.ndarray, qubits: list[int], n: int) -> float:
    """Von Neumann entropy in bits from the reduced density matrix."""
    if not qubits or len(qubits) == n:
        return 0.0
    w = np.linalg.eigvalsh(reduced_density_matrix(psi, qubits, n))
    w = w[w > 1e-14]
    return float(-(w * np.log2(w)).sum())


def schmidt_rank(psi: np.ndarray, qubits: list[int], n: int, tol: float = 1e-10) -> int:
    keep = [n - 1 - q for q in qubits]
    rest = [a for a in range(n) if a not in set(keep)]
    mat = psi.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    return int((sv > tol * sv[0]).sum())


@dataclass(frozen=True)
class SchmidtCheck:
    observed_max: int
    bound: int
    ground_entropy: int
    volume: int
    band: int
    samples: int

    @property
    def holds(self) -> bool:
        return self.observed_max <= self.bound


def schmidt_rank_bound_check(model: StabilizerModel, band: int, region: Region, samples: int = 20,
                             max_terms: int = 4, seed: int = 0, states=None) -> SchmidtCheck:
    """Largest Schmidt rank over random superpositions of at most ``max_terms`` band basis states.

    The bound reported is ``(Vol M)**m * 2**S0`` with Vol M counted in sites
    and the constant set to 1.  ``states`` may pass a precomputed
    ``(labels, vectors)`` band basis.
    """
    from .numerics.paulisum import DENSE_QUBIT_CAP
    from .numerics.states import ConfigurationBasis

    n = model.n_qubits
    if n > DENSE_QUBIT_CAP:
        raise SamplingBudgetError(f"dense Schmidt decomposition limited to {DENSE_QUBIT_CAP} qubits")
    if states is None:
        states = ConfigurationBasis(model, seed=seed).band(band)
    labels, vectors = states
    if not labels:
        raise SamplingBudgetError(f"no valid configurations with {band} defects")
    rng = np.random.default_rng(seed)
    s0 = stabilizer_entropy(model, region)
    qubits = region.sorted()
    worst = 0
    for _ in range(samples):
        k = int(rng.integers(1, min(max_terms, len(labels)) + 1))
        pick = rng.choice(len(labels), size=k, replace=False)
        coeff = rng.normal(size=k) + 1j * rng.normal(size=k)
        psi = vectors[:, pick] @ coeff
        psi /= np.linalg.norm(psi)
        worst = max(worst, schmidt_rank(psi, qubits, n))
    vol = len({model.lattice.qubit_site(q)[0] for q in qubits})
    return SchmidtCheck(worst, vol**band * 2**s0, s0, vol, band, samples)


def area_law_profile(model: StabilizerModel, sides=(1, 2, 3), corner=(0, 0, 0), sector=None) -> list[dict]:
    """Entropy of cubic boxes of each side length, next to boundary area and volume."""
    out = []
    for a in sides:
        region = Region.box(model, corner, a)
        s = stabilizer_entropy(model, region, sector=sector)
        out.append({"side": a, "qubits": len(region), "S_bits": s, "area": a * a, "volume": a**3})
    return out


def all_bipartitions(n: int):
    """Every subset of qubits that contains qubit 0 (one per bipartition), plus the empty set."""
    yield ()
    for size in range(1, n + 1):
        for rest in itertools.combinations(range(1, n), size - 1):
            yield (0,) + rest
