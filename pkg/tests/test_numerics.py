import numpy as np
import pytest
import scipy.linalg as sla
from scipy.special import j0

from cubicloc.gf2 import PauliOperator
from cubicloc.models import build_model
from cubicloc.numerics import (
    ConfigurationBasis,
    FlowedBand,
    GapClosedError,
    HilbertSpaceTooLarge,
    MomentumBlocks,
    PauliSum,
    PerturbedHamiltonian,
    SpectralFlow,
    band_spectrum,
    evolve,
    evolve_dense,
    flow_generator,
    iom_drift,
    locality_profile,
    offdiagonal_sum,
    survival_amplitudes,
    survival_check,
)
from cubicloc.numerics.chain import bessel_j0_series
from cubicloc.numerics.flow import embed, reduce_to


@pytest.fixture(scope="module")
def toric2_flow():
    model = build_model("toric_code_2d", 2)
    ham = PerturbedHamiltonian.with_fields(model, 0.1)
    flow = SpectralFlow(ham)
    return model, ham, flow, flow.integrate(0.1)


def random_pauli_sum(n, n_terms, rng):
    terms = []
    for _ in range(n_terms):
        x, z = int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n))
        terms.append((x, z, float(rng.normal())))
    return PauliSum(n, terms)


# -- Pauli sums and symmetry blocks


def test_pauli_sum_is_hermitian_and_matches_kron(rng):
    h = random_pauli_sum(5, 12, rng).to_dense()
    assert np.abs(h - h.conj().T).max() < 1e-12
    x, y, z = np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])
    # X on qubit 0, Y on qubit 2 of three; qubit 0 is the last kron factor
    op = PauliSum(3, [(0b101, 0b100, 1.0)]).to_dense()
    assert np.allclose(op, np.kron(y, np.kron(np.eye(2), x)))
    assert np.allclose(PauliSum(1, [(0, 1, 1.0)]).to_dense(), z)


def test_dense_cap():
    with pytest.raises(HilbertSpaceTooLarge):
        PerturbedHamiltonian.with_fields(build_model("cubic_code", 2), 0.1).dense()


def test_momentum_blocks_reassemble(toric2_flow):
    model, ham, _, _ = toric2_flow
    h = ham.sparse()
    blocks = MomentumBlocks.for_operators(model.lattice, ham.H0, ham.Y)
    assert sum(blocks.sizes) == 2**model.n_qubits
    assert np.abs(blocks.assemble(blocks.project(h)) - h.toarray()).max() < 1e-12
    assert np.allclose(np.sort(np.concatenate([np.linalg.eigvalsh(b) for b in blocks.project(h)])),
                       np.linalg.eigvalsh(h.toarray()))


# -- Krylov propagation


def test_krylov_matches_dense(rng):
    for n in (6, 8, 10):
        h = random_pauli_sum(n, 3 * n, rng).to_sparse()
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        t = float(rng.uniform(0, 10))
        ref = sla.expm(-1j * t * h.toarray()) @ psi
        assert np.linalg.norm(evolve(h, psi, t) - ref) <= 1e-8


def test_krylov_trivial_cases(rng):
    ham = PerturbedHamiltonian.with_fields(build_model("ising_chain", 6), 0.3)
    h = ham.sparse()
    psi = rng.normal(size=64) + 0j
    psi /= np.linalg.norm(psi)
    assert np.array_equal(evolve(h, psi, 0.0), psi)
    e, v = np.linalg.eigh(h.toarray())
    out = evolve(h, v[:, 3], 4.0)
    assert abs(abs(np.vdot(v[:, 3], out)) - 1) < 1e-10


def test_energy_and_norm_conserved(rng):
    h = PerturbedHamiltonian.with_fields(build_model("ising_chain", 8), 0.4).sparse()
    psi = rng.normal(size=256) + 1j * rng.normal(size=256)
    psi /= np.linalg.norm(psi)
    e0 = np.vdot(psi, h @ psi).real
    for t in (1.0, 5.0, 10.0):
        phi = evolve(h, psi, t)
        assert abs(np.linalg.norm(phi) - 1) < 1e-9
        assert abs(np.vdot(phi, h @ phi).real - e0) < 1e-8
    assert np.allclose(evolve_dense(h.toarray(), psi, 2.0), evolve(h, psi, 2.0), atol=1e-9)


def test_bessel_survival():
    times = np.linspace(0, 20, 81)
    amps = survival_amplitudes(201, 1.0, times)
    assert np.abs(amps - j0(times)).max() <= 1e-12
    assert np.abs(np.abs(amps) - np.abs(j0(times))).max() <= 1e-6
    assert abs(bessel_j0_series(1.0) - 0.7651976865579666) < 1e-14
    assert abs(bessel_j0_series(12.5) - j0(12.5)) < 1e-12


# -- bands


def test_band_spectrum_at_zero():
    ham = PerturbedHamiltonian.with_fields(build_model("ising_chain", 6), 0.0)
    spec = band_spectrum(ham)[0]
    assert np.allclose(spec.levels, -6 + 2 * np.arange(7))
    assert np.allclose(spec.lower, spec.upper) and np.allclose(spec.gaps, 2.0)
    assert not spec.collision


def test_band_widths_grow_with_s():
    ham = PerturbedHamiltonian.with_fields(build_model("toric_code_2d", 2), 0.0)
    specs = band_spectrum(ham, n_bands=3, s_values=[0.0, 0.02, 0.04])
    widths = [s.widths.max() for s in specs]
    assert widths[0] < 1e-12 < widths[1] < widths[2]


def test_collision_flag_at_large_s():
    ham = PerturbedHamiltonian.with_fields(build_model("toric_code_2d", 2), 0.0)
    small, large = band_spectrum(ham, s_values=[0.05, 1.0])
    assert not small.collision and large.collision


# -- flow generator and flow


def test_two_level_generator():
    h0 = np.diag([1.0, -1.0]).astype(complex)
    y = np.array([[0, 1], [1, 0]], dtype=complex)
    k = flow_generator(h0, y, gamma=1.0)
    assert abs(k[0, 1] - 0.5j) < 1e-14 and abs(k[1, 0] + 0.5j) < 1e-14
    p0 = np.diag([0.0, 1.0]).astype(complex)
    dp = 1j * (k @ p0 - p0 @ k)
    # first-order perturbation theory for the ground state |1> + s Y_01/(E_1 - E_0) |0>
    ds = 1e-6
    _, v = np.linalg.eigh(h0 + ds * y)
    fd = (np.outer(v[:, 0], v[:, 0].conj()) - p0) / ds
    assert np.allclose(np.abs(dp[0, 1]), 0.5) and np.allclose(dp, fd, atol=1e-5)


def test_generator_trivial_cases(rng):
    h = np.diag([-2.0, -2.0, 0.0, 2.0]).astype(complex)
    assert np.abs(flow_generator(h, np.zeros((4, 4)), 1.0)).max() == 0
    assert np.abs(flow_generator(h, np.diag(rng.normal(size=4)), 1.0)).max() < 1e-14
    with pytest.raises(GapClosedError):
        flow_generator(h, np.ones((4, 4)), gamma=2.0, band_gap=1.0)


def test_flow_identity_at_zero(toric2_flow):
    _, _, flow, _ = toric2_flow
    state = flow.integrate(0.0)
    assert all(np.array_equal(u, np.eye(len(u))) for u in state.unitaries)


def test_flow_projectors(toric2_flow):
    _, _, flow, state = toric2_flow
    assert flow.projector_defect(state) <= 1e-7
    assert state.unitarity_defect() <= 1e-8
    worst, allowed = flow.projector_derivative_check(0.1, 0)
    assert worst <= allowed


def test_gauge_robustness(toric2_flow):
    _, ham, flow, state = toric2_flow
    other = SpectralFlow(ham, within="bump", spectra=flow.spectra).integrate(0.1)
    assert flow.projector_defect(other) <= 1e-7
    for n in range(len(flow.spectra.levels)):
        for ua, ub, p0 in zip(state.unitaries, other.unitaries, flow.spectra.projector(0.0, n)):
            assert np.abs(ua @ p0 @ ua.conj().T - ub @ p0 @ ub.conj().T).max() <= 1e-7
    # the band bases themselves differ, only the projectors agree
    assert max(np.abs(a - b).max() for a, b in zip(state.unitaries, other.unitaries)) > 1e-6


def test_flow_refuses_large_gamma():
    ham = PerturbedHamiltonian.with_fields(build_model("toric_code_2d", 2), 0.05)
    with pytest.raises(GapClosedError):
        SpectralFlow(ham, gamma=5.0).integrate(0.05)


# -- locality


def test_reduce_and_embed_roundtrip(rng):
    a = rng.normal(size=(4, 4))
    # a matrix on a qubit list has tensor axis i on list[i]; full space is [n-1, ..., 0]
    full = embed(a, [2, 0], [2, 1, 0])
    assert np.allclose(reduce_to(full, [2, 0], 3), a)
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(embed(x, [0], [1, 0]), np.kron(np.eye(2), x))


def test_locality_trivial_cases(toric2_flow):
    model, _, flow, state = toric2_flow
    lat = model.lattice
    zero = locality_profile(flow.integrate(0.0), PauliOperator.single(lat, 0, "Z"))
    assert abs(zero.ordinate[0] - 1) < 1e-12 and np.all(zero.ordinate[1:] < 1e-12)
    ident = locality_profile(state, PauliOperator.identity(lat), center_site=0)
    assert abs(ident.ordinate[0] - 1) < 1e-10 and np.all(ident.ordinate[1:] < 1e-10)


def test_locality_decays(toric2_flow):
    model, _, _, state = toric2_flow
    prof = locality_profile(state, PauliOperator.single(model.lattice, 0, "Z"))
    assert prof.ordinate[1] / prof.ordinate[0] < 1 and np.all(prof.ordinate >= 0)


# -- band dynamics


@pytest.fixture(scope="module")
def toric2_band(toric2_flow):
    model, _, flow, state = toric2_flow
    labels, basis0 = ConfigurationBasis(model).band(2)
    return FlowedBand.build(flow, state, labels, basis0)


def test_offdiagonal_at_zero():
    model = build_model("toric_code_2d", 2)
    flow = SpectralFlow(PerturbedHamiltonian.with_fields(model, 0.0))
    labels, basis0 = ConfigurationBasis(model).band(2)
    band = FlowedBand.build(flow, flow.integrate(0.0), labels, basis0)
    assert offdiagonal_sum(band, 0).abs_sum < 1e-12
    times = np.linspace(0, 10, 6)
    drift = iom_drift(band, int(np.flatnonzero(labels[0].config.bits)[0]), [0, 1], 0, times)
    assert drift.commutator_local < 1e-12 and drift.commutator_band < 1e-12 and drift.drift.max() < 1e-10


def test_survival_bound_small_instance(toric2_band):
    check = survival_check(toric2_band, 0, np.linspace(0, 10, 21))
    assert check.holds()
    assert offdiagonal_sum(toric2_band, 0).abs_sum > 0


def test_eigenstate_iom_constant(toric2_band):
    band = toric2_band
    e, v = np.linalg.eigh(band.htilde)
    # flowed G_j is diagonal in the band basis; any band eigenvector keeps its expectation
    ell = np.array([-1.0 if lab.config.bits[0] else 1.0 for lab in band.labels])
    psi = band.vectors @ v[:, 0]
    iom = band.vectors @ np.diag(ell) @ band.vectors.conj().T
    vals = [np.vdot(p, iom @ p).real for p in (band.evolve(psi, t) for t in (0.0, 3.0, 10.0))]
    assert np.ptp(vals) < 1e-9
