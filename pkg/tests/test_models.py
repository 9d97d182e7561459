import json

import numpy as np
import pytest

from cubicloc.gf2 import PauliOperator
from cubicloc.models import (
    BUILTIN_STENCILS,
    Stencil,
    StencilError,
    build_model,
    bundled_stencil,
    model_from_stencil,
)


def pairwise_commute(model) -> bool:
    s = model.stabilizer_matrix.to_dense().astype(np.int64)
    n = model.n_qubits
    form = (s[:, :n] @ s[:, n:].T + s[:, n:] @ s[:, :n].T) % 2
    return not form.any()


def test_cubic_code_counts():
    m = build_model("cubic_code", 3)
    assert m.n_qubits == 54
    assert m.n_generators == 54
    assert all(len(m.generator_qubits(g)) == 8 for g in range(m.n_generators))


def test_cubic_stencil_offsets():
    m = build_model("cubic_code", 5)
    lat = m.lattice

    def q(coords, flavor):
        return lat.qubit(lat.site_index(coords), flavor)

    z_expected = {q((0, 0, 0), 0), q((0, 0, 0), 1), q((-1, 0, 0), 0), q((0, -1, 0), 0), q((0, 0, -1), 0),
                  q((0, -1, -1), 1), q((-1, 0, -1), 1), q((-1, -1, 0), 1)}
    x_expected = {q((0, 0, 0), 0), q((0, 0, 0), 1), q((1, 0, 0), 1), q((0, 1, 0), 1), q((0, 0, 1), 1),
                  q((0, 1, 1), 0), q((1, 0, 1), 0), q((1, 1, 0), 0)}
    gz = m.generator_at(0, m.type_index("Z"))
    gx = m.generator_at(0, m.type_index("X"))
    assert set(gz.support()) == z_expected and set(gz.letters().values()) == {"Z"}
    assert set(gx.support()) == x_expected and set(gx.letters().values()) == {"X"}


def test_translation_covariance():
    m = build_model("cubic_code", 4)
    lat = m.lattice
    for t in range(m.n_types):
        g0 = m.generator_at(0, t)
        for shift in [(1, 0, 0), (3, 2, 1), (0, 3, 3)]:
            assert g0.translate(shift) == m.generator_at(lat.site_index(shift), t)


def test_boundary_wraps():
    m = build_model("cubic_code", 3)
    corner = m.lattice.site_index((2, 2, 2))
    g = m.generator_at(corner, m.type_index("X"))
    assert g.weight == 8
    assert max(g.support()) < m.n_qubits


@pytest.mark.parametrize(
    "name,dims,weights",
    [("cubic_code", (2, 3, 3), [8, 8]), ("toric_code_2d", (4, 4), [4, 4]), ("wen_plaquette", (4, 6), [4]),
     ("ising_chain", (8,), [1])],
)
def test_models_commute_and_weights(name, dims, weights):
    m = build_model(name, dims)
    assert pairwise_commute(m)
    assert m.describe()["generator_weights"] == weights


def test_ising_chain():
    m = build_model("ising_chain", 8)
    assert m.n_generators == 8
    assert all(set(g.letters().values()) == {"Z"} and g.weight == 1 for g in m.generators())


def test_errors():
    with pytest.raises(ValueError):
        build_model("chamon", 4)
    with pytest.raises(ValueError):
        build_model("cubic_code", (3, 3))
    with pytest.raises(ValueError):
        build_model("toric_code_2d", (1, 4))
    m = build_model("toric_code_2d", 3)
    with pytest.raises(IndexError):
        m.generator_at(0, 5)


def test_anticommuting_stencil_rejected():
    bad = Stencil.from_json({
        "name": "bad", "dims_required": 1, "qubits_per_site": 1, "type_labels": ["X", "Z"],
        "generators": [[{"dx": 0, "dy": 0, "dz": 0, "qubit": 0, "letter": "X"}],
                       [{"dx": 0, "dy": 0, "dz": 0, "qubit": 0, "letter": "Z"}]],
    })
    with pytest.raises(StencilError):
        model_from_stencil(bad, 4)


def test_bundled_json_matches_builtin(tmp_path):
    for name, stencil in BUILTIN_STENCILS.items():
        assert bundled_stencil(name) == stencil
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(stencil.to_json()))
        assert Stencil.load(path) == stencil


def test_wen_checkerboard_metadata():
    m = build_model("wen_plaquette", (6, 6))
    lat = m.lattice
    assert m.sublattice(0) != m.sublattice(lat.site_index((1, 0, 0)))
    assert m.sublattice(0) == m.sublattice(lat.site_index((1, 1, 0)))


def test_generator_letters_are_paulis():
    m = build_model("wen_plaquette", (4, 4))
    g = m.generator_at(0, 0)
    assert sorted(g.letters().values()) == ["X", "X", "Z", "Z"]
    assert isinstance(g, PauliOperator)
