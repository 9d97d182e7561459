import numpy as np
import pytest

from cubicloc.gf2 import backend

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    def _record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


@pytest.fixture(params=sorted(backend.KERNELS))
def gf2_backend(request):
    previous = backend.BACKEND
    backend.use_backend(request.param)
    yield request.param
    backend.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def wen_setup():
    """Wen plaquette 3x4 (12 qubits) at s = 0.05 with fields X + Z: flow and flowed 2-defect band."""
    from cubicloc.models import build_model
    from cubicloc.numerics import ConfigurationBasis, FlowedBand, PerturbedHamiltonian, SpectralFlow

    model = build_model("wen_plaquette", (3, 4))
    ham = PerturbedHamiltonian.with_fields(model, 0.05)
    flow = SpectralFlow(ham)
    state = flow.integrate(0.05)
    labels, basis0 = ConfigurationBasis(model).band(2)
    band = FlowedBand.build(flow, state, labels, basis0)
    return {"model": model, "ham": ham, "flow": flow, "state": state, "band": band}
