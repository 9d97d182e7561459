"""Defect transport inside bounded boxes, decided exactly over GF(2).

A transporter for the pair (i, i') of generator type t inside a box is a
Pauli operator supported on the box whose syndrome is exactly
``e_(i,t) + e_(i',t)`` on the whole torus. Its existence is a linear
feasibility question on the box-restricted syndrome matrix: a witness
re-verifies by recomputing its syndrome, a refusal carries the ranks
``(rank M_box, rank [M_box | target])`` with the second one larger.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2 import BitMatrix, LinearSolver, PauliOperator
from .models import StabilizerModel
from .syndrome import DefectConfiguration, is_valid, single_qubit_syndromes, syndrome

FORMAT_VERSION = 1


class VacuousQueryError(ValueError):
    """The box covers the whole torus, so every operator counts as local."""


@dataclass(frozen=True)
class Box:
    """Sites ``corner + [0, diameter - 1]`` along each active axis.

    ``diameter`` counts sites per side, so two sites fit in a common box of
    diameter d iff their L-infinity separation is below d.
    """

    corner: tuple[int, int, int]
    diameter: int

    @property
    def center(self) -> tuple[int, ...]:
        return tuple(c + (self.diameter - 1) // 2 for c in self.corner)

    def sites(self, model: StabilizerModel) -> np.ndarray:
        return model.lattice.box_sites(self.corner, self.diameter - 1)

    def qubits(self, model: StabilizerModel) -> np.ndarray:
        return model.lattice.site_qubits(self.sites(model))

    def check_proper(self, model: StabilizerModel):
        if self.diameter < 1:
            raise ValueError("box diameter must be positive")
        if self.diameter >= model.lattice.min_dim:
            raise VacuousQueryError(
                f"box of diameter {self.diameter} covers the {model.lattice.dims} torus along every axis"
            )

    def contains(self, model: StabilizerModel, site: int) -> bool:
        return bool(np.isin(site, self.sites(model)))


@dataclass(frozen=True)
class TransporterCertificate:
    source: int
    target: int
    type_index: int
    box: Box
    exists: bool
    witness: PauliOperator | None = None
    rank: int | None = None
    augmented_rank: int | None = None

    @property
    def verdict(self) -> str:
        return "exists" if self.exists else "none"

    def verify(self, model: StabilizerModel) -> bool:
        """Independent recheck: a witness by its support and exact syndrome, a refusal by recomputing both ranks."""
        if not self.exists:
            if self.rank is None or self.augmented_rank != self.rank + 1:
                return False
            n = model.n_qubits
            q = self.box.qubits(model)
            restricted = model.syndrome_matrix.columns(np.concatenate([q, n + q]))
            want = DefectConfiguration.from_defects(model, [(self.source, self.type_index), (self.target, self.type_index)])
            augmented = restricted.hstack(BitMatrix.from_dense(want.bits[:, None]))
            return restricted.rank() == self.rank and augmented.rank() == self.augmented_rank
        allowed = set(int(q) for q in self.box.qubits(model))
        if not set(self.witness.support()) <= allowed:
            return False
        want = DefectConfiguration.from_defects(model, [(self.source, self.type_index), (self.target, self.type_index)])
        return syndrome(model, self.witness) == want

    def to_json(self) -> dict:
        out = {
            "format_version": FORMAT_VERSION,
            "query": {
                "source": self.source,
                "target": self.target,
                "type_index": self.type_index,
                "box": {"corner": list(self.box.corner), "diameter": self.box.diameter},
            },
            "verdict": self.verdict,
        }
        if self.exists:
            out["witness"] = {str(q): letter for q, letter in self.witness.letters().items()}
        else:
            out["ranks"] = {"restricted": self.rank, "augmented": self.augmented_rank}
        return out

    @classmethod
    def from_json(cls, model: StabilizerModel, data: dict) -> TransporterCertificate:
        q = data["query"]
        box = Box(tuple(q["box"]["corner"]), int(q["box"]["diameter"]))
        if data["verdict"] == "exists":
            witness = PauliOperator.from_letters(model.lattice, {int(k): v for k, v in data["witness"].items()})
            return cls(q["source"], q["target"], q["type_index"], box, True, witness)
        r = data["ranks"]
        return cls(q["source"], q["target"], q["type_index"], box, False, None, r["restricted"], r["augmented"])


class _BoxSolver:
    """Factored syndrome matrix restricted to the columns of one box at the origin."""

    def __init__(self, model: StabilizerModel, diameter: int):
        self.model = model
        self.box = Box((0, 0, 0), diameter)
        n = model.n_qubits
        qubits = self.box.qubits(model)
        self.qubits = qubits
        cols = np.concatenate([qubits, n + qubits])
        self.solver = LinearSolver(model.syndrome_matrix.columns(cols))

    def query(self, source: int, target: int, type_index: int, corner) -> TransporterCertificate:
        model = self.model
        lat = model.lattice
        shift = -np.asarray(corner)
        s0 = lat.translate_site(source, shift)
        t0 = lat.translate_site(target, shift)
        res = self.solver.solve_support([model.generator_index(s0, type_index), model.generator_index(t0, type_index)])
        box = Box(tuple(int(c) for c in corner), self.box.diameter)
        if not res.feasible:
            return TransporterCertificate(source, target, type_index, box, False, None, res.rank, res.augmented_rank)
        nq = len(self.qubits)
        letters = {}
        for j, q in enumerate(self.qubits):
            bx, bz = int(res.witness[j]), int(res.witness[nq + j])
            if bx or bz:
                letters[int(q)] = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(bx, bz)]
        witness = PauliOperator.from_letters(lat, letters).translate(tuple(int(c) for c in corner))
        return TransporterCertificate(source, target, type_index, box, True, witness)


@lru_cache(maxsize=32)
def _box_solver(model: StabilizerModel, diameter: int) -> _BoxSolver:
    return _BoxSolver(model, diameter)


def transporter_exists(model: StabilizerModel, source: int, target: int, type_index: int, box: Box) -> TransporterCertificate:
    """Decide whether a Pauli operator inside ``box`` moves a defect from ``source`` to ``target``."""
    box.check_proper(model)
    if source == target:
        raise ValueError("source and target defects must differ")
    if not 0 <= type_index < model.n_types:
        raise IndexError(f"type index {type_index} out of range")
    return _box_solver(model, box.diameter).query(source, target, type_index, box.corner)


def _placements(lattice, delta, diameter):
    """Corners of diameter-``diameter`` boxes containing the origin and ``delta``."""
    axes = []
    for axis in range(3):
        L = lattice.dims[axis]
        if L == 1:
            axes.append([0])
            continue
        reps = {delta[axis]}
        if 2 * abs(delta[axis]) == L:
            reps.add(-delta[axis])  # both minimal images are valid
        corners = set()
        for v in reps:
            lo = max(0, v) - (diameter - 1)
            hi = min(0, v)
            corners.update(c % L for c in range(lo, hi + 1))
        axes.append(sorted(corners))
    return itertools.product(*axes)


def inequivalent_offsets(lattice, d_max: int) -> list[tuple[int, int, int]]:
    """Nonzero minimal-image offsets with L-infinity norm <= d_max, one per +-pair."""
    ranges = []
    for axis in range(3):
        L = lattice.dims[axis]
        if L == 1:
            ranges.append([0])
        else:
            r = min(d_max, L // 2)
            ranges.append([v for v in range(-r, r + 1) if not (L % 2 == 0 and v == -(L // 2))])
    seen = set()
    out = []
    for delta in itertools.product(*ranges):
        if delta == (0, 0, 0):
            continue
        site = lattice.site_index(delta)
        neg = lattice.site_index(tuple(-v for v in delta))
        key = min(site, neg)
        if key in seen:
            continue
        seen.add(key)
        out.append(delta)
    return out


@dataclass
class NoStringsRow:
    type_index: int
    offset: tuple[int, int, int]
    separation: int
    diameter: int
    verdict: str
    placements: int
    certificate: TransporterCertificate = field(repr=False)
    all_certified: bool = True

    def as_csv(self) -> dict:
        c = self.certificate
        return {
            "type": self.type_index,
            "dx": self.offset[0],
            "dy": self.offset[1],
            "dz": self.offset[2],
            "separation": self.separation,
            "diameter": self.diameter,
            "verdict": self.verdict,
            "placements": self.placements,
            "rank_restricted": "" if c.exists else c.rank,
            "rank_augmented": "" if c.exists else c.augmented_rank,
            "witness_weight": c.witness.weight if c.exists else "",
        }


def certify_no_strings(model: StabilizerModel, d_max: int, type_indices=None) -> list[NoStringsRow]:
    """Sweep translation-inequivalent defect pairs that fit in boxes of diameter <= ``d_max``.

    For each pair and each diameter from separation + 1 to ``d_max``,
    every box placement containing both defects is decided. A row reports
    "exists" if any placement admits a transporter (with that witness), else
    "none" with the rank proof of a placement; ``all_certified`` records
    that every placement produced a valid rank gap.
    """
    lat = model.lattice
    if d_max >= lat.min_dim:
        raise VacuousQueryError(f"d_max={d_max} leaves no proper box on a torus of dims {lat.dims}")
    if d_max <= 1:
        return []
    types = range(model.n_types) if type_indices is None else type_indices
    rows = []
    for t in types:
        for delta in inequivalent_offsets(lat, d_max - 1):
            sep = max(abs(v) for v in delta)
            target = lat.site_index(delta)
            for diameter in range(sep + 1, d_max + 1):
                solver = _box_solver(model, diameter)
                found = None
                first_none = None
                count = 0
                certified = True
                for corner in _placements(lat, delta, diameter):
                    count += 1
                    cert = solver.query(0, target, t, corner)
                    if cert.exists:
                        found = cert
                        break
                    certified &= cert.augmented_rank == cert.rank + 1
                    if first_none is None:
                        first_none = cert
                cert = found or first_none
                rows.append(NoStringsRow(t, tuple(delta), sep, diameter, cert.verdict, count, cert, certified))
    rows.sort(key=lambda r: (r.type_index, r.separation, r.offset, r.diameter))
    return rows


@lru_cache(maxsize=64)
def certified_diameter(model: StabilizerModel, d_limit: int) -> int:
    """Largest d <= d_limit such that no box of diameter <= d holds a transporter."""
    d_limit = min(d_limit, model.lattice.min_dim - 1)
    if d_limit < 1:
        return 0
    rows = certify_no_strings(model, d_limit)
    moving = [r.diameter for r in rows if r.verdict == "exists"]
    return min(moving) - 1 if moving else d_limit


@dataclass(frozen=True)
class LocalGapCertificate:
    config: DefectConfiguration
    certified_diameter: int
    energy_gap: float
    min_separation: int | None


def local_gap_certificate(model: StabilizerModel, config: DefectConfiguration) -> LocalGapCertificate:
    """Diameter and energy gap for which ``config`` is locally gapped.

    The diameter is the smallest L-infinity separation between defects,
    capped by the largest diameter the model is certified free of
    transporters. A configuration without defect pairs gets L - 1.
    """
    if config.model is not model:
        raise ValueError("configuration belongs to a different model")
    if not is_valid(model, config).valid:
        raise ValueError(f"invalid configuration {config.defects()}")
    lat = model.lattice
    sites = [s for s, _ in config.defects()]
    gap = 2.0 * model.J
    if len(sites) < 2:
        return LocalGapCertificate(config, lat.min_dim - 1, gap, None)
    dmat = lat.distance(np.asarray(sites)[:, None], np.asarray(sites)[None, :])
    off = dmat[~np.eye(len(sites), dtype=bool)]
    min_sep = int(off.min())
    if min_sep == 0:
        return LocalGapCertificate(config, 0, gap, 0)
    cap = certified_diameter(model, min_sep)
    return LocalGapCertificate(config, min(min_sep, cap), gap, min_sep)


@dataclass(frozen=True)
class RealizerResult:
    found: bool
    operator: PauliOperator | None
    weight_searched: int
    nodes: int


class SearchBudgetExceeded(RuntimeError):
    pass


def min_weight_realizer(
    model: StabilizerModel, config: DefectConfiguration, weight_cutoff: int, node_budget: int = 2_000_000
) -> RealizerResult:
    """Minimal-weight Pauli operator with syndrome exactly ``config``, up to ``weight_cutoff``.

    Iterative deepening over supports: the lowest unexplained defect must be
    flipped by a new qubit of its generator, so branching only ever adds a
    qubit from that generator with a letter anticommuting with it. Every
    solution of weight <= cutoff is reachable, so a miss certifies absence.
    """
    if config.model is not model:
        raise ValueError("configuration belongs to a different model")
    table = single_qubit_syndromes(model)
    target = 0
    for g in np.flatnonzero(config.bits):
        target |= 1 << int(g)
    lat = model.lattice
    if target == 0:
        return RealizerResult(True, PauliOperator.identity(lat), 0, 1)
    gen_qubits = {}
    nodes = 0

    def qubits_of(g):
        if g not in gen_qubits:
            gen_qubits[g] = [int(q) for q in model.generator_qubits(g)]
        return gen_qubits[g]

    def search(residual, used, letters, depth_left, seen):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise SearchBudgetExceeded(f"realizer search exceeded {node_budget} nodes at cutoff {weight_cutoff}")
        if residual == 0:
            return dict(letters)
        if depth_left == 0:
            return None
        g = (residual & -residual).bit_length() - 1
        for q in qubits_of(g):
            if q in used:
                continue
            for code, letter in ((1, "X"), (2, "Z"), (3, "Y")):
                syn = table[q][code]
                if not (syn >> g) & 1:
                    continue
                key = frozenset(letters.items() | {(q, letter)})
                if key in seen:
                    continue
                seen.add(key)
                used.add(q)
                letters[q] = letter
                hit = search(residual ^ syn, used, letters, depth_left - 1, seen)
                del letters[q]
                used.discard(q)
                if hit is not None:
                    return hit
        return None

    for w in range(1, weight_cutoff + 1):
        hit = search(target, set(), {}, w, set())
        if hit is not None:
            return RealizerResult(True, PauliOperator.from_letters(lat, hit), w, nodes)
    return RealizerResult(False, None, weight_cutoff, nodes)


def certificates_to_json(rows: list[NoStringsRow]) -> str:
    return json.dumps(
        {"format_version": FORMAT_VERSION, "certificates": [r.certificate.to_json() for r in rows]}, indent=1
    )
