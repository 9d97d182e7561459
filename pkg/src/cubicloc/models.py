"""Translation-invariant stabilizer models as stencils instantiated on tori."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .gf2 import BitMatrix, Lattice, PauliOperator

LETTER_BITS = {"X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class StencilError(ValueError):
    pass


@dataclass(frozen=True)
class StencilEntry:
    offset: tuple[int, int, int]
    qubit: int
    letter: str


@dataclass(frozen=True)
class Stencil:
    """Generator shapes relative to a base site.

    ``type_labels`` name each generator type by the defect it produces when
    violated ("X" for an all-X term, "Z" for an all-Z term, "XZ" for mixed).
    """

    name: str
    qubits_per_site: int
    dims_required: int
    generator_types: tuple[tuple[StencilEntry, ...], ...]
    type_labels: tuple[str, ...]

    def __post_init__(self):
        if not self.generator_types:
            raise StencilError(f"stencil {self.name!r} has no generator types")
        if len(self.type_labels) != len(self.generator_types):
            raise StencilError("one label per generator type required")
        for entries in self.generator_types:
            if not entries:
                raise StencilError(f"stencil {self.name!r} has an empty generator type")
            for e in entries:
                if e.letter not in LETTER_BITS:
                    raise StencilError(f"bad Pauli letter {e.letter!r}")
                if not 0 <= e.qubit < self.qubits_per_site:
                    raise StencilError(f"qubit index {e.qubit} out of range")

    @property
    def radius(self) -> int:
        return max(abs(c) for entries in self.generator_types for e in entries for c in e.offset)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dims_required": self.dims_required,
            "qubits_per_site": self.qubits_per_site,
            "type_labels": list(self.type_labels),
            "generators": [
                [
                    {"dx": e.offset[0], "dy": e.offset[1], "dz": e.offset[2], "qubit": e.qubit, "letter": e.letter}
                    for e in entries
                ]
                for entries in self.generator_types
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> Stencil:
        try:
            types = tuple(
                tuple(
                    StencilEntry(
                        (int(e.get("dx", 0)), int(e.get("dy", 0)), int(e.get("dz", 0))),
                        int(e["qubit"]),
                        str(e["letter"]).upper(),
                    )
                    for e in entries
                )
                for entries in data["generators"]
            )
            labels = data.get("type_labels")
            if labels is None:
                labels = ["".join(sorted({e.letter for e in entries})) for entries in types]
            return cls(
                name=str(data["name"]),
                qubits_per_site=int(data["qubits_per_site"]),
                dims_required=int(data["dims_required"]),
                generator_types=types,
                type_labels=tuple(labels),
            )
        except (KeyError, TypeError) as exc:
            raise StencilError(f"malformed stencil JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> Stencil:
        return cls.from_json(json.loads(Path(path).read_text()))


def _entries(spec, letter):
    return tuple(StencilEntry(off, q, letter) for off, q in spec)


CUBIC_CODE = Stencil(
    name="cubic_code",
    qubits_per_site=2,
    dims_required=3,
    generator_types=(
        _entries(
            [((0, 0, 0), 0), ((0, 0, 0), 1), ((-1, 0, 0), 0), ((0, -1, 0), 0), ((0, 0, -1), 0),
             ((0, -1, -1), 1), ((-1, 0, -1), 1), ((-1, -1, 0), 1)],
            "Z",
        ),
        _entries(
            [((0, 0, 0), 0), ((0, 0, 0), 1), ((1, 0, 0), 1), ((0, 1, 0), 1), ((0, 0, 1), 1),
             ((0, 1, 1), 0), ((1, 0, 1), 0), ((1, 1, 0), 0)],
            "X",
        ),
    ),
    type_labels=("Z", "X"),
)

# qubit 0 lives on the edge (i, i+x), qubit 1 on the edge (i, i+y)
TORIC_CODE_2D = Stencil(
    name="toric_code_2d",
    qubits_per_site=2,
    dims_required=2,
    generator_types=(
        _entries([((0, 0, 0), 0), ((0, 1, 0), 0), ((0, 0, 0), 1), ((1, 0, 0), 1)], "Z"),
        _entries([((0, 0, 0), 0), ((0, 0, 0), 1), ((-1, 0, 0), 0), ((0, -1, 0), 1)], "X"),
    ),
    type_labels=("Z", "X"),
)

WEN_PLAQUETTE = Stencil(
    name="wen_plaquette",
    qubits_per_site=1,
    dims_required=2,
    generator_types=(
        (
            StencilEntry((0, 0, 0), 0, "X"),
            StencilEntry((1, 0, 0), 0, "Z"),
            StencilEntry((1, 1, 0), 0, "X"),
            StencilEntry((0, 1, 0), 0, "Z"),
        ),
    ),
    type_labels=("XZ",),
)

ISING_CHAIN = Stencil(
    name="ising_chain",
    qubits_per_site=1,
    dims_required=1,
    generator_types=((StencilEntry((0, 0, 0), 0, "Z"),),),
    type_labels=("Z",),
)

BUILTIN_STENCILS = {s.name: s for s in (CUBIC_CODE, TORIC_CODE_2D, WEN_PLAQUETTE, ISING_CHAIN)}

# extra model facts consumed by the mobility and numerics layers
_METADATA = {
    "cubic_code": {"no_strings_expected": True},
    "wen_plaquette": {"defect_sublattice": "checkerboard"},
}


class StabilizerModel:
    """Commuting Pauli Hamiltonian H0 = -J * (sum of all generators) on a torus.

    Generators are indexed type-major: ``g = type_index * n_sites + site``.
    """

    def __init__(self, lattice: Lattice, stencil: Stencil, J: float = 1.0, metadata: dict | None = None):
        if J <= 0:
            raise ValueError("coupling J must be positive")
        if lattice.qubits_per_site != stencil.qubits_per_site:
            raise StencilError(
                f"stencil {stencil.name!r} needs {stencil.qubits_per_site} qubits per site, "
                f"lattice has {lattice.qubits_per_site}"
            )
        if len(lattice.active_axes) > stencil.dims_required:
            raise StencilError(f"stencil {stencil.name!r} is {stencil.dims_required}D but lattice dims are {lattice.dims}")
        self.lattice = lattice
        self.stencil = stencil
        self.J = float(J)
        self.metadata = dict(_METADATA.get(stencil.name, {}))
        if metadata:
            self.metadata.update(metadata)
        self._check_commutation()

    @property
    def name(self) -> str:
        return self.stencil.name

    @property
    def n_types(self) -> int:
        return len(self.stencil.generator_types)

    @property
    def n_generators(self) -> int:
        return self.n_types * self.lattice.n_sites

    @property
    def n_qubits(self) -> int:
        return self.lattice.n_qubits

    def type_label(self, type_index: int) -> str:
        return self.stencil.type_labels[type_index]

    def type_index(self, label: str) -> int:
        try:
            return self.stencil.type_labels.index(label)
        except ValueError:
            raise ValueError(f"model {self.name!r} has no generator type {label!r}") from None

    def generator_index(self, site: int, type_index: int) -> int:
        return type_index * self.lattice.n_sites + site

    def generator_site_type(self, g: int) -> tuple[int, int]:
        t, site = divmod(g, self.lattice.n_sites)
        return site, t

    @cached_property
    def _symplectic(self) -> np.ndarray:
        """(n_generators, 2N) uint8 rows laid out as [x | z]."""
        lat = self.lattice
        n, ns = lat.n_qubits, lat.n_sites
        out = np.zeros((self.n_generators, 2 * n), dtype=np.uint8)
        coords = lat.coords
        for t, entries in enumerate(self.stencil.generator_types):
            rows = t * ns + np.arange(ns)
            for e in entries:
                q = lat.site_index(coords + np.asarray(e.offset)) * lat.qubits_per_site + e.qubit
                bx, bz = LETTER_BITS[e.letter]
                if bx:
                    np.bitwise_xor.at(out, (rows, q), 1)
                if bz:
                    np.bitwise_xor.at(out, (rows, n + q), 1)
        out.flags.writeable = False
        return out

    @cached_property
    def stabilizer_matrix(self) -> BitMatrix:
        """Generators as rows [x | z]."""
        return BitMatrix.from_dense(self._symplectic)

    @cached_property
    def syndrome_matrix(self) -> BitMatrix:
        """Rows [z | x], so that ``syndrome_matrix @ [px | pz]`` is the syndrome of P."""
        n = self.n_qubits
        s = self._symplectic
        return BitMatrix.from_dense(np.hstack([s[:, n:], s[:, :n]]))

    @cached_property
    def generator_masks(self) -> list[tuple[int, int]]:
        """Per generator, (x bitset, z bitset) as Python ints."""
        out = []
        for row in self._symplectic:
            p = PauliOperator.from_symplectic(self.lattice, row)
            out.append((p.x, p.z))
        return out

    def generator_at(self, site: int, type_index: int) -> PauliOperator:
        if not 0 <= type_index < self.n_types:
            raise IndexError(f"type index {type_index} out of range for {self.name!r}")
        if not 0 <= site < self.lattice.n_sites:
            raise IndexError(f"site {site} outside lattice")
        x, z = self.generator_masks[self.generator_index(site, type_index)]
        return PauliOperator(self.lattice, x, z)

    def generators(self):
        for g in range(self.n_generators):
            x, z = self.generator_masks[g]
            yield PauliOperator(self.lattice, x, z)

    def generator_qubits(self, g: int) -> np.ndarray:
        n = self.n_qubits
        row = self._symplectic[g]
        return np.flatnonzero(row[:n] | row[n:])

    def _check_commutation(self):
        # translation invariance: testing generators at the origin against all others covers every pair
        s = self._symplectic
        n = self.n_qubits
        x, z = s[:, :n].astype(np.int64), s[:, n:].astype(np.int64)
        for t in range(self.n_types):
            g = self.generator_index(0, t)
            prod = (x @ z[g] + z @ x[g]) & 1
            bad = np.flatnonzero(prod)
            if bad.size:
                other_site, other_t = self.generator_site_type(int(bad[0]))
                raise StencilError(
                    f"{self.name}: generator type {t} at site 0 anticommutes with type {other_t} "
                    f"at site {self.lattice.site_coords(other_site)}"
                )

    def sublattice(self, site: int) -> int | None:
        if self.metadata.get("defect_sublattice") == "checkerboard":
            x, y, _ = self.lattice.site_coords(site)
            return (x + y) % 2
        return None

    def ground_energy_level(self) -> float:
        return -self.J * self.n_generators

    def describe(self) -> dict:
        return {
            "model": self.name,
            "dims": list(self.lattice.dims),
            "qubits_per_site": self.lattice.qubits_per_site,
            "n_qubits": self.n_qubits,
            "n_generators": self.n_generators,
            "generator_weights": [int(len(self.generator_qubits(self.generator_index(0, t)))) for t in range(self.n_types)],
            "type_labels": list(self.stencil.type_labels),
            "J": self.J,
        }

    def __repr__(self) -> str:
        return f"StabilizerModel({self.name!r}, dims={self.lattice.dims}, J={self.J})"


def _normalize_dims(name: str, dims, required: int) -> tuple[int, int, int]:
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),) * required
    dims = tuple(int(d) for d in dims)
    if len(dims) != required:
        raise ValueError(f"{name} needs {required} dims, got {dims}")
    if any(d < 2 for d in dims):
        raise ValueError(f"{name}: every dimension must be >= 2, got {dims}")
    return dims + (1,) * (3 - len(dims))


def build_model(name: str, dims, J: float = 1.0) -> StabilizerModel:
    """Instantiate a built-in model (cubic_code, toric_code_2d, wen_plaquette, ising_chain)."""
    try:
        stencil = BUILTIN_STENCILS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(BUILTIN_STENCILS)}") from None
    full = _normalize_dims(name, dims, stencil.dims_required)
    return StabilizerModel(Lattice(full, stencil.qubits_per_site), stencil, J)


def model_from_stencil(stencil: Stencil, dims, J: float = 1.0) -> StabilizerModel:
    full = _normalize_dims(stencil.name, dims, stencil.dims_required)
    return StabilizerModel(Lattice(full, stencil.qubits_per_site), stencil, J)


def bundled_stencil(name: str) -> Stencil:
    """Stencil shipped as JSON inside the package (``stencils/<name>.json``)."""
    text = resources.files("cubicloc").joinpath("stencils", f"{name}.json").read_text()
    return Stencil.from_json(json.loads(text))
