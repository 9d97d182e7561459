"""Periodic lattices and phase-free Pauli operators in symplectic form."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np


class LatticeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Periodic box of ``dims`` sites with ``qubits_per_site`` qubits each.

    Axes of length 1 are inactive (2D and 1D models). Distances are
    Chebyshev (L-infinity) with wraparound.
    """

    dims: tuple[int, int, int]
    qubits_per_site: int = 1
    metric: str = "linf"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 3:
            dims = dims + (1,) * (3 - len(dims))
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"invalid lattice dims {self.dims}")
        if all(d == 1 for d in dims):
            raise ValueError("lattice needs at least one axis of length >= 2")
        if self.qubits_per_site < 1:
            raise ValueError("qubits_per_site must be positive")
        if self.metric != "linf":
            raise ValueError(f"unsupported metric {self.metric!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def n_qubits(self) -> int:
        return self.n_sites * self.qubits_per_site

    @property
    def active_axes(self) -> tuple[int, ...]:
        return tuple(a for a, d in enumerate(self.dims) if d > 1)

    @property
    def min_dim(self) -> int:
        return min(self.dims[a] for a in self.active_axes)

    @cached_property
    def coords(self) -> np.ndarray:
        """(n_sites, 3) integer coordinates, x fastest."""
        lx, ly, lz = self.dims
        idx = np.arange(self.n_sites)
        return np.stack([idx % lx, (idx // lx) % ly, idx // (lx * ly)], axis=1)

    def site_index(self, coords) -> int | np.ndarray:
        c = np.asarray(coords, dtype=np.int64)
        d = np.asarray(self.dims)
        c = np.mod(c, d)
        out = c[..., 0] + d[0] * (c[..., 1] + d[1] * c[..., 2])
        return int(out) if out.ndim == 0 else out

    def site_coords(self, site: int) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.coords[site])

    def translate_site(self, site: int, shift) -> int:
        return self.site_index(np.asarray(self.site_coords(site)) + np.asarray(shift))

    def qubit(self, site: int, flavor: int = 0) -> int:
        if not 0 <= flavor < self.qubits_per_site:
            raise ValueError(f"flavor {flavor} out of range")
        return site * self.qubits_per_site + flavor

    def qubit_site(self, qubit: int) -> tuple[int, int]:
        return divmod(qubit, self.qubits_per_site)

    def displacement(self, a, b) -> np.ndarray:
        """Minimal-image vector from site ``a`` to site ``b`` (components in (-L/2, L/2])."""
        d = np.asarray(self.dims)
        delta = np.mod(self.coords[b] - self.coords[a], d)
        return np.where(delta > d // 2, delta - d, delta)

    def distance(self, a, b) -> int | np.ndarray:
        d = np.asarray(self.dims)
        delta = np.mod(self.coords[b] - self.coords[a], d)
        delta = np.minimum(delta, d - delta)
        out = delta.max(axis=-1)
        return int(out) if np.ndim(out) == 0 else out

    def distance_matrix(self) -> np.ndarray:
        c = self.coords
        d = np.asarray(self.dims)
        delta = np.mod(c[:, None, :] - c[None, :, :], d)
        return np.minimum(delta, d - delta).max(axis=-1)

    def box_sites(self, corner, extent) -> np.ndarray:
        """Sites ``corner + [0, extent]`` per active axis (extent clipped to the torus)."""
        ranges = []
        for axis in range(3):
            if self.dims[axis] == 1:
                ranges.append(np.array([0]))
            else:
                span = min(int(extent), self.dims[axis] - 1)
                ranges.append(np.arange(span + 1))
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, 3)
        return np.unique(self.site_index(grid + np.asarray(corner)))

    def site_qubits(self, sites) -> np.ndarray:
        sites = np.asarray(sites, dtype=np.int64).reshape(-1)
        q = self.qubits_per_site
        return (sites[:, None] * q + np.arange(q)[None, :]).reshape(-1)


_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def _bits_to_int(bits) -> int:
    bits = np.asarray(bits, dtype=np.uint8)
    if not bits.any():
        return 0
    packed = np.packbits(bits, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _int_to_bits(value: int, n: int) -> np.ndarray:
    raw = value.to_bytes((n + 7) // 8 or 1, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n]


@dataclass(frozen=True)
class PauliOperator:
    """Pauli operator modulo phase: X-part and Z-part as integer bitsets over qubits."""

    lattice: Lattice
    x: int = 0
    z: int = 0

    @classmethod
    def identity(cls, lattice: Lattice) -> PauliOperator:
        return cls(lattice)

    @classmethod
    def single(cls, lattice: Lattice, qubit: int, letter: str) -> PauliOperator:
        if not 0 <= qubit < lattice.n_qubits:
            raise ValueError(f"qubit {qubit} outside lattice")
        bx, bz = _BITS[letter.upper()]
        return cls(lattice, bx << qubit, bz << qubit)

    @classmethod
    def from_letters(cls, lattice: Lattice, letters: dict[int, str]) -> PauliOperator:
        x = z = 0
        for q, letter in letters.items():
            bx, bz = _BITS[letter.upper()]
            x ^= bx << q
            z ^= bz << q
        return cls(lattice, x, z)

    @classmethod
    def from_symplectic(cls, lattice: Lattice, vec) -> PauliOperator:
        """Inverse of :meth:`to_symplectic` (layout ``[x | z]``)."""
        vec = np.asarray(vec)
        n = lattice.n_qubits
        if vec.shape != (2 * n,):
            raise ValueError(f"symplectic vector of length {vec.shape} for {n} qubits")
        return cls(lattice, _bits_to_int(vec[:n]), _bits_to_int(vec[n:]))

    def to_symplectic(self) -> np.ndarray:
        n = self.lattice.n_qubits
        return np.concatenate([_int_to_bits(self.x, n), _int_to_bits(self.z, n)])

    def _check(self, other: PauliOperator):
        if self.lattice != other.lattice:
            raise LatticeMismatchError(f"lattices differ: {self.lattice.dims} vs {other.lattice.dims}")

    def compose(self, other: PauliOperator) -> PauliOperator:
        self._check(other)
        return PauliOperator(self.lattice, self.x ^ other.x, self.z ^ other.z)

    __mul__ = compose

    def commutes(self, other: PauliOperator) -> bool:
        self._check(other)
        return ((self.x & other.z) ^ (self.z & other.x)).bit_count() % 2 == 0

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    def support(self) -> list[int]:
        mask = self.support_mask
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    @property
    def weight(self) -> int:
        return self.support_mask.bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    def letters(self) -> dict[int, str]:
        return {q: self.letter(q) for q in self.support()}

    def translate(self, shift) -> PauliOperator:
        lat = self.lattice
        letters = {}
        for q in self.support():
            site, flavor = lat.qubit_site(q)
            letters[lat.qubit(lat.translate_site(site, shift), flavor)] = self.letter(q)
        return PauliOperator.from_letters(lat, letters)

    def restricted_to(self, qubits: Iterable[int]) -> PauliOperator:
        mask = 0
        for q in qubits:
            mask |= 1 << int(q)
        return PauliOperator(self.lattice, self.x & mask, self.z & mask)

    def __str__(self) -> str:
        if self.is_identity():
            return "I"
        return " ".join(f"{letter}{q}" for q, letter in self.letters().items())


def random_pauli(lattice: Lattice, rng: np.random.Generator, density: float = 0.5) -> PauliOperator:
    n = lattice.n_qubits
    x = (rng.random(n) < density).astype(np.uint8)
    z = (rng.random(n) < density).astype(np.uint8)
    return PauliOperator(lattice, _bits_to_int(x), _bits_to_int(z))
