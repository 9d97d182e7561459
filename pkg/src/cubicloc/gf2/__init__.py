"""Exact GF(2) linear algebra and symplectic Pauli operators."""
from .backend import use_backend
from .bitmatrix import (
    BitMatrix,
    LinearSolver,
    SolveResult,
    independent_rows,
    nullspace,
    pack_rows,
    rank,
    solve,
    unpack_rows,
)
from .pauli import Lattice, LatticeMismatchError, PauliOperator, random_pauli

__all__ = [
    "BitMatrix",
    "Lattice",
    "LatticeMismatchError",
    "LinearSolver",
    "PauliOperator",
    "SolveResult",
    "independent_rows",
    "nullspace",
    "pack_rows",
    "random_pauli",
    "rank",
    "solve",
    "unpack_rows",
    "use_backend",
]


def backend_name() -> str:
    from . import backend

    return backend.BACKEND
