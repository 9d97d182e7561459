"""One test per acceptance criterion; each prints a PASS/FAIL line (collected in the terminal summary)."""
import time

import numpy as np
import pytest
from scipy.special import j0

from cubicloc.counting import SparsityQuery, count_sparse_exact, typicality_bound
from cubicloc.entanglement import Region, all_bipartitions, dense_entropy, stabilizer_entropy
from cubicloc.gf2 import BitMatrix, PauliOperator, random_pauli
from cubicloc.mobility import Box, certify_no_strings, transporter_exists
from cubicloc.models import build_model
from cubicloc.numerics import (
    ConfigurationBasis,
    FlowedBand,
    HilbertSpaceTooLarge,
    PerturbedHamiltonian,
    SpectralFlow,
    iom_drift,
    locality_profile,
    offdiagonal_sum,
    survival_amplitudes,
    survival_check,
)
from cubicloc.numerics.states import min_separation
from cubicloc.syndrome import DefectConfiguration, degeneracy, is_valid, logical_operators, syndrome
from test_gf2 import naive_rank

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def cubic9_certificates():
    model = build_model("cubic_code", 9)
    start = time.perf_counter()
    rows = certify_no_strings(model, 4)
    return model, rows, time.perf_counter() - start


def test_c1_commutation(record):
    start = time.perf_counter()
    ok = True
    for L in (2, 3, 4, 5):
        s = BitMatrix.from_dense(build_model("cubic_code", L).stabilizer_matrix.to_dense())
        dense = s.to_dense().astype(np.int64)
        n = dense.shape[1] // 2
        ok &= not ((dense[:, :n] @ dense[:, n:].T + dense[:, n:] @ dense[:, :n].T) % 2).any()
    elapsed = time.perf_counter() - start
    assert record(1, ok and elapsed < 5, f"all cubic generator pairs commute at L=2..5 in {elapsed:.2f} s")


def test_c2_degeneracy(record):
    start = time.perf_counter()
    cubic = {L: degeneracy(build_model("cubic_code", L)) for L in (3, 5, 9)}
    toric = {L: degeneracy(build_model("toric_code_2d", L)) for L in (2, 3, 4, 5)}
    elapsed = time.perf_counter() - start
    ok = set(cubic.values()) == {2} and set(toric.values()) == {2} and elapsed < 30
    assert record(2, ok, f"cubic k={cubic}, toric k={toric}, {elapsed:.2f} s")


def test_c3_validity_parity(record):
    model = build_model("cubic_code", 3)
    ns = model.lattice.n_sites
    rng = np.random.default_rng(2024)
    base = naive_rank(model.syndrome_matrix.to_dense())

    def random_bits(odd):
        bits = np.zeros(model.n_generators, dtype=np.uint8)
        for t in range(model.n_types):
            k = int(rng.integers(0, ns // 2)) * 2
            if odd and t == 0:
                k += 1
            bits[t * ns + rng.choice(ns, size=k, replace=False)] = 1
        return DefectConfiguration(model, bits)

    even_ok = odd_ok = 0
    for _ in range(200):
        conf = random_bits(False)
        res = is_valid(model, conf)
        even_ok += res.valid and syndrome(model, res.witness) == conf
        conf = random_bits(True)
        res = is_valid(model, conf)
        aug = naive_rank(np.hstack([model.syndrome_matrix.to_dense(), conf.bits[:, None]]))
        odd_ok += (not res.valid) and res.rank == base and res.augmented_rank == aug == base + 1
    assert record(3, even_ok == 200 and odd_ok == 200,
                  f"{even_ok}/200 even-parity valid with witnesses, {odd_ok}/200 odd-parity rank-refuted")


def test_c4_no_strings(record, cubic9_certificates):
    model, rows, elapsed = cubic9_certificates
    cubic_ok = rows and all(r.verdict == "none" and r.all_certified and r.certificate.verify(model) for r in rows)
    toric = build_model("toric_code_2d", 9)
    trows = certify_no_strings(toric, 4)
    toric_ok = all(r.verdict == "exists" and r.certificate.verify(toric) for r in trows)
    wen = build_model("wen_plaquette", (6, 6))
    lat = wen.lattice
    nearest = transporter_exists(wen, 0, lat.site_index((1, 0, 0)), 0, Box((0, 0, 0), 2))
    diagonal = transporter_exists(wen, 0, lat.site_index((1, 1, 0)), 0, Box((0, 0, 0), 2))
    wen_ok = nearest.verify(wen) and not nearest.exists and diagonal.exists and diagonal.verify(wen)
    ok = cubic_ok and toric_ok and wen_ok and elapsed < 600
    assert record(4, ok, f"cubic L=9 dmax=4: {len(rows)} rows, 0 transporters, all rank-certified ({elapsed:.1f} s); "
                         f"toric {len(trows)} witnesses; wen nearest none / next-nearest exists")


def test_c5_typicality(record):
    checked = 0
    ok = True
    for L in range(1, 6):
        for m in range(0, 4):
            if m > L**3:
                continue
            for d in (1, 2, 3):
                q = SparsityQuery(L, m, d)
                frac = count_sparse_exact(q).fraction
                b = typicality_bound(q)
                ok &= frac >= b.simple and frac >= b.product
                checked += 1
    ref = count_sparse_exact(SparsityQuery(4, 2, 2))
    ok &= (ref.sparse_count, ref.total_count) == (1184, 2016)
    assert record(5, ok, f"{checked} (L, m, d) cases satisfy both bounds; L=4 m=2 d=2 gives "
                         f"{ref.sparse_count}/{ref.total_count}")


def test_c6_entanglement(record):
    cubic = build_model("cubic_code", 4)
    rng = np.random.default_rng(7)
    same = 0
    for _ in range(50):
        region = Region.random(cubic, rng)
        p = random_pauli(cubic.lattice, rng, 0.2)
        same += stabilizer_entropy(cubic, region, p) == stabilizer_entropy(cubic, region)
    toric = build_model("toric_code_2d", 2)
    from cubicloc.numerics.states import stabilized_state

    psi = stabilized_state(8, list(toric.generators()) + [z for z, _ in logical_operators(toric)])
    worst = max(abs(stabilizer_entropy(toric, Region.from_qubits(8, q)) - dense_entropy(psi, list(q), 8))
                for q in all_bipartitions(8))
    assert record(6, same == 50 and worst <= 1e-10,
                  f"{same}/50 excited cubic L=4 regions match ground entropy; toric L=2 max |rank - dense| = {worst:.1e}")


def test_c7_bessel(record):
    times = np.linspace(0.0, 20.0, 401)
    amps = np.abs(survival_amplitudes(201, 1.0, times))
    err = float(np.abs(amps - np.abs(j0(times))).max())
    assert record(7, err <= 1e-6, f"hopping chain L=201, max | |amp| - |J0| | = {err:.1e} over lambda t in [0, 20]")


@pytest.mark.slow
def test_c8_spectral_flow(record, wen_setup):
    flow, state, model = wen_setup["flow"], wen_setup["state"], wen_setup["model"]
    defect = flow.projector_defect(state)
    fd = [flow.projector_derivative_check(0.05, n) for n in range(3)]
    fd_ok = all(w <= slack for w, slack in fd)
    prof = locality_profile(state, PauliOperator.single(model.lattice, 0, "Z"))
    dec = prof.strictly_decreasing(3)
    ok = defect <= 1e-6 and fd_ok and dec
    assert record(8, ok, f"wen 3x4 s=0.05: projector defect {defect:.1e}; finite-difference worst "
                         f"{max(w for w, _ in fd):.1e}; shells {np.array2string(prof.ordinate[:3], precision=4)}")


@pytest.mark.slow
def test_c9_dynamical_bounds(record, wen_setup):
    band = wen_setup["band"]
    times = np.linspace(0.0, 10.0, 41)
    survival = [survival_check(band, ref, times) for ref in range(band.size)]
    surv_ok = all(c.holds() for c in survival)
    local = [i for i, lab in enumerate(band.labels) if min_separation(lab.config) >= 2]
    start = local[0]
    term = wen_setup["model"].generator_index(*band.labels[start].config.defects()[0])
    res = iom_drift(band, term, local, start, times)
    ok = surv_ok and res.holds_band()
    assert record(9, ok, f"survival bound holds for all {band.size} references (min margin "
                         f"{min(c.margin for c in survival):.3g}); IOM max drift {res.drift.max():.3g} "
                         f"<= t * {res.commutator_band:.3g} (band commutator)")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the state leaves P_loc under H_s: with P_loc = separation >= 2 "
                   "the restricted commutator is 0.0035 while the drift reaches 1.4")
def test_c9_iom_local_projection(wen_setup):
    band = wen_setup["band"]
    local = [i for i, lab in enumerate(band.labels) if min_separation(lab.config) >= 2]
    term = wen_setup["model"].generator_index(*band.labels[local[0]].config.defects()[0])
    assert iom_drift(band, term, local, local[0], np.linspace(0.0, 10.0, 41)).holds_local()


@pytest.mark.slow
def test_c10_substitution(record, cubic9_certificates, wen_setup):
    model, rows, _ = cubic9_certificates
    certified = all(r.verdict == "none" and r.all_certified for r in rows)
    band = wen_setup["band"]
    by_sep = {}
    for i, lab in enumerate(band.labels):
        by_sep.setdefault(min_separation(lab.config), []).append(offdiagonal_sum(band, i).abs_sum)
    means = {d: float(np.mean(v)) for d, v in sorted(by_sep.items())}
    flat = means[2] >= 0.5 * means[1]
    # linear in s: halve s and compare
    wen = wen_setup["model"]
    half = SpectralFlow(PerturbedHamiltonian.with_fields(wen, 0.025), spectra=wen_setup["flow"].spectra)
    labels, basis0 = ConfigurationBasis(wen).band(2)
    band_half = FlowedBand.build(half, half.integrate(0.025), labels, basis0)
    ratio = np.mean([offdiagonal_sum(band, i).abs_sum for i in range(band.size)]) / np.mean(
        [offdiagonal_sum(band_half, i).abs_sum for i in range(band_half.size)])
    linear = 1.6 <= ratio <= 2.4
    try:
        PerturbedHamiltonian.with_fields(build_model("cubic_code", 3), 0.05).sparse()
        capped = False
    except HilbertSpaceTooLarge:
        capped = True
    ok = certified and flat and linear and capped
    assert record(10, ok, f"cubic certificates to diameter 4; wen off-diagonal sums flat in d "
                          f"{ {d: round(v, 3) for d, v in means.items()} }, s-ratio {ratio:.2f} for s 0.05/0.025; "
                          f"cubic L=3 state vectors refused (54 qubits)")
