import itertools
import json

import numpy as np
import pytest

from cubicloc.gf2 import PauliOperator
from cubicloc.models import build_model
from cubicloc.mobility import (
    Box,
    SearchBudgetExceeded,
    TransporterCertificate,
    VacuousQueryError,
    certificates_to_json,
    certify_no_strings,
    local_gap_certificate,
    min_weight_realizer,
    transporter_exists,
)
from cubicloc.syndrome import DefectConfiguration, syndrome
from test_gf2 import naive_rank


@pytest.fixture(scope="module")
def cubic9():
    return build_model("cubic_code", 9)


def brute_force_transporter(model, a, b, t, box):
    """Enumerate every Pauli on the box qubits (small boxes only)."""
    qubits = [int(q) for q in box.qubits(model)]
    want = DefectConfiguration.from_defects(model, [(a, t), (b, t)])
    for letters in itertools.product("IXYZ", repeat=len(qubits)):
        p = PauliOperator.from_letters(model.lattice, {q: l for q, l in zip(qubits, letters) if l != "I"})
        if syndrome(model, p) == want:
            return True
    return False


def test_toric_string_witness():
    m = build_model("toric_code_2d", 6)
    lat = m.lattice
    z = m.type_index("Z")
    cert = transporter_exists(m, 0, lat.site_index((3, 0, 0)), z, Box((0, 0, 0), 5))
    assert cert.exists and cert.verify(m)
    assert set(cert.witness.letters().values()) == {"X"} or set(cert.witness.letters().values()) == {"Z"}


def test_cubic_adjacent_none(cubic9):
    x = cubic9.type_index("X")
    cert = transporter_exists(cubic9, 0, 1, x, Box((0, 0, 0), 5))
    assert not cert.exists and cert.augmented_rank == cert.rank + 1 and cert.verify(cubic9)


def test_rank_proof_recheck_with_naive_elimination():
    m = build_model("cubic_code", 5)
    x = m.type_index("X")
    box = Box((0, 0, 0), 2)
    cert = transporter_exists(m, 0, 1, x, box)
    assert not cert.exists
    q = box.qubits(m)
    cols = np.concatenate([q, m.n_qubits + q])
    restricted = m.syndrome_matrix.to_dense()[:, cols]
    rhs = DefectConfiguration.from_defects(m, [(0, x), (1, x)]).bits
    assert naive_rank(restricted) == cert.rank
    assert naive_rank(np.hstack([restricted, rhs[:, None]])) == cert.augmented_rank


def test_wen_nearest_vs_next_nearest():
    m = build_model("wen_plaquette", (6, 6))
    lat = m.lattice
    box = Box((0, 0, 0), 2)
    nearest = transporter_exists(m, 0, lat.site_index((1, 0, 0)), 0, box)
    diagonal = transporter_exists(m, 0, lat.site_index((1, 1, 0)), 0, box)
    assert not nearest.exists
    assert diagonal.exists and diagonal.verify(m)


def test_solver_agrees_with_brute_force_small_boxes():
    for name, dims in [("toric_code_2d", 4), ("wen_plaquette", (4, 4))]:
        m = build_model(name, dims)
        lat = m.lattice
        box = Box((0, 0, 0), 2)
        for t in range(m.n_types):
            for target in [(1, 0, 0), (0, 1, 0), (1, 1, 0)]:
                b = lat.site_index(target)
                cert = transporter_exists(m, 0, b, t, box)
                assert cert.exists == brute_force_transporter(m, 0, b, t, box)


def test_monotone_in_box(rng):
    """A transporter found in a box persists in every enclosing box."""
    for name, dims in [("toric_code_2d", 8), ("wen_plaquette", (8, 8)), ("cubic_code", 7)]:
        m = build_model(name, dims)
        lat = m.lattice
        active = [a for a in range(3) if lat.dims[a] > 1]
        for _ in range(15):
            diameter = int(rng.integers(2, 4))
            corner = tuple(int(rng.integers(0, lat.dims[a])) if a in active else 0 for a in range(3))
            box = Box(corner, diameter)
            sites = box.sites(m)
            a, b = rng.choice(sites, size=2, replace=False)
            t = int(rng.integers(0, m.n_types))
            small = transporter_exists(m, int(a), int(b), t, box)
            bigger = Box(tuple(c - 1 if i in active else 0 for i, c in enumerate(corner)), diameter + 2)
            big = transporter_exists(m, int(a), int(b), t, bigger)
            assert (not small.exists) or big.exists
            assert big.verify(m) and small.verify(m)


def test_errors(cubic9):
    with pytest.raises(VacuousQueryError):
        transporter_exists(cubic9, 0, 1, 0, Box((0, 0, 0), 9))
    with pytest.raises(ValueError):
        transporter_exists(cubic9, 3, 3, 0, Box((0, 0, 0), 3))
    with pytest.raises(VacuousQueryError):
        certify_no_strings(cubic9, 9)
    assert certify_no_strings(cubic9, 0) == []


def test_certify_cubic_and_toric(cubic9):
    rows = certify_no_strings(cubic9, 3)
    assert rows and all(r.verdict == "none" and r.all_certified for r in rows)
    toric = build_model("toric_code_2d", 9)
    trows = certify_no_strings(toric, 4)
    assert trows and all(r.verdict == "exists" and r.certificate.verify(toric) for r in trows)


def test_certificate_json_roundtrip(cubic9):
    rows = certify_no_strings(cubic9, 2)
    doc = json.loads(certificates_to_json(rows))
    assert doc["format_version"] == 1
    for raw, row in zip(doc["certificates"], rows):
        cert = TransporterCertificate.from_json(cubic9, raw)
        assert cert.verdict == row.verdict and cert.verify(cubic9)
    toric = build_model("toric_code_2d", 6)
    c = transporter_exists(toric, 0, 1, 0, Box((0, 0, 0), 3))
    again = TransporterCertificate.from_json(toric, json.loads(json.dumps(c.to_json())))
    assert again.verify(toric) and again.witness == c.witness


def test_local_gap_examples(cubic9):
    lat = cubic9.lattice
    x = cubic9.type_index("X")
    far = DefectConfiguration.from_defects(cubic9, [(0, x), (lat.site_index((4, 0, 0)), x)])
    assert local_gap_certificate(cubic9, far).certified_diameter == 4
    near = DefectConfiguration.from_defects(cubic9, [(0, x), (1, x)])
    assert local_gap_certificate(cubic9, near).certified_diameter == 1
    ground = local_gap_certificate(cubic9, DefectConfiguration.empty(cubic9))
    assert ground.certified_diameter == 8 and ground.energy_gap == 2.0
    with pytest.raises(ValueError):
        local_gap_certificate(cubic9, DefectConfiguration.from_defects(cubic9, [(0, x)]))


def test_min_weight_realizer(cubic9):
    lat = cubic9.lattice
    p = PauliOperator.single(lat, lat.qubit(40, 1), "Z")
    res = min_weight_realizer(cubic9, syndrome(cubic9, p), 3)
    assert res.found and res.weight_searched == 1 and syndrome(cubic9, res.operator) == syndrome(cubic9, p)
    assert min_weight_realizer(cubic9, DefectConfiguration.empty(cubic9), 3).operator.is_identity()
    x = cubic9.type_index("X")
    for b in [1, lat.site_index((1, 1, 0)), lat.site_index((2, 0, 1))]:
        conf = DefectConfiguration.from_defects(cubic9, [(0, x), (b, x)])
        assert not min_weight_realizer(cubic9, conf, 4).found
    with pytest.raises(SearchBudgetExceeded):
        min_weight_realizer(cubic9, DefectConfiguration.from_defects(cubic9, [(0, x), (1, x)]), 6, node_budget=100)


def test_realizer_matches_known_toric_string():
    m = build_model("toric_code_2d", 6)
    conf = DefectConfiguration.from_defects(m, [(0, 0), (m.lattice.site_index((3, 0, 0)), 0)])
    res = min_weight_realizer(m, conf, 4)
    assert res.found and res.weight_searched == 3
