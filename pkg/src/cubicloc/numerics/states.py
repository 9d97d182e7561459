"""Eigenstates of H0 with definite defect configuration and logical sector."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..gf2 import PauliOperator
from ..models import StabilizerModel
from ..syndrome import DefectConfiguration, is_valid, logical_operators
from .paulisum import SPARSE_QUBIT_CAP, HilbertSpaceTooLarge, apply_pauli


class SectorError(ValueError):
    pass


def _check_size(model: StabilizerModel):
    if model.n_qubits > SPARSE_QUBIT_CAP:
        raise HilbertSpaceTooLarge(f"{model.n_qubits} qubits is beyond state-vector reach")


def stabilized_state(n_qubits: int, ops, signs=None, seed: int = 0) -> np.ndarray:
    """Normalised state with ``op |psi> = (-1)**sign |psi>`` for every listed Pauli operator.

    Obtained by projecting a random vector, so the result is unique only when
    the operators generate a maximal stabilizer group.
    """
    if n_qubits > SPARSE_QUBIT_CAP:
        raise HilbertSpaceTooLarge(f"{n_qubits} qubits is beyond state-vector reach")
    ops = list(ops)
    signs = [0] * len(ops) if signs is None else list(signs)
    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    for _ in range(8):
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        for op, b in zip(ops, signs):
            psi = 0.5 * (psi + (-1) ** b * apply_pauli(op, psi))
        norm = np.linalg.norm(psi)
        if norm > 1e-6:
            return psi / norm
    raise SectorError("projection vanished; the operators are inconsistent (frustrated)")


def sector_state(model: StabilizerModel, sector=None, seed: int = 0) -> np.ndarray:
    """Defect-free state in which the i-th logical Z has eigenvalue (-1)**sector[i].

    The logical Z of pair i is the first operator of ``logical_operators(model)[i]``.
    """
    _check_size(model)
    pairs = logical_operators(model)
    sector = tuple(sector) if sector is not None else (0,) * len(pairs)
    if len(sector) != len(pairs) or any(b not in (0, 1) for b in sector):
        raise SectorError(f"sector {sector} does not match {len(pairs)} logical qubits")
    gens = list(model.generators())
    ops = gens + [zbar for zbar, _ in pairs]
    return stabilized_state(model.n_qubits, ops, [0] * len(gens) + list(sector), seed)


def _flips(model: StabilizerModel, p: PauliOperator) -> tuple[int, ...]:
    return tuple(int(not p.commutes(zbar)) for zbar, _ in logical_operators(model))


@dataclass(frozen=True)
class BasisState:
    config: DefectConfiguration
    sector: tuple[int, ...]


class ConfigurationBasis:
    """Orthonormal eigenvectors of H0, each with one defect configuration and one sector.

    Every state is ``P |Omega_sigma>`` for a Pauli ``P`` realising the
    configuration, so they are exact simultaneous eigenvectors of all
    generators and logical Z operators.
    """

    def __init__(self, model: StabilizerModel, seed: int = 0):
        _check_size(model)
        self.model = model
        self.seed = seed
        self._ground: dict[tuple[int, ...], np.ndarray] = {}
        self.n_logical = len(logical_operators(model))

    def ground(self, sector) -> np.ndarray:
        sector = tuple(sector)
        if sector not in self._ground:
            self._ground[sector] = sector_state(self.model, sector, self.seed)
        return self._ground[sector]

    def sectors(self):
        return list(itertools.product((0, 1), repeat=self.n_logical))

    def state(self, config: DefectConfiguration, sector=None) -> np.ndarray:
        sector = tuple(sector) if sector is not None else (0,) * self.n_logical
        res = is_valid(self.model, config)
        if not res.valid:
            raise ValueError(f"defect configuration {config.defects()} is not realisable")
        p = res.witness
        start = tuple(a ^ b for a, b in zip(sector, _flips(self.model, p)))
        return apply_pauli(p, self.ground(start))

    def band(self, n_defects: int, max_states: int = 4096):
        """All basis states with exactly ``n_defects`` violated generators.

        Returns ``(labels, vectors)`` with vectors as columns.
        """
        labels = []
        n_gen = self.model.n_generators
        for combo in itertools.combinations(range(n_gen), n_defects):
            bits = np.zeros(n_gen, dtype=np.uint8)
            bits[list(combo)] = 1
            config = DefectConfiguration(self.model, bits)
            if not is_valid(self.model, config).valid:
                continue
            for sector in self.sectors():
                labels.append(BasisState(config, sector))
                if len(labels) > max_states:
                    raise HilbertSpaceTooLarge(f"band with {n_defects} defects exceeds {max_states} states")
        if not labels:
            return labels, np.zeros((1 << self.model.n_qubits, 0), dtype=complex)
        vectors = np.stack([self.state(b.config, b.sector) for b in labels], axis=1)
        return labels, vectors


def min_separation(config: DefectConfiguration) -> int:
    """Smallest L-infinity distance between two defects (lattice size if fewer than two)."""
    sites = [site for site, _ in config.defects()]
    lat = config.model.lattice
    if len(sites) < 2:
        return max(lat.dims)
    return min(lat.distance(a, b) for a, b in itertools.combinations(sites, 2))
