import numpy as np
import pytest

from epfamily import eep, egevp, ewp, ge2p, load_aircraft

# One representative parameter set per named model, covering both signs of lambda.
MODELS = {
    "eep+": lambda: eep(2.0, 3.0),
    "eep-": lambda: eep(-2.0, 0.5),
    "ewp+": lambda: ewp(3.0, 2.0, 0.5),
    "ewp-": lambda: ewp(-3.68674, 0.01463, 0.89760),
    "ge2p+": lambda: ge2p(2.0, 1.5, 0.7),
    "ge2p-": lambda: ge2p(-1.5, 1.0, 2.5),
    "egevp+": lambda: egevp(1.5, 1.0, 0.8, 0.2),
    "egevp-": lambda: egevp(-2.0, 0.0, 1.0, -0.3),
    "egevp0": lambda: egevp(0.5, 0.5, 2.0, 0.0),
}


@pytest.fixture(params=sorted(MODELS))
def model(request):
    return MODELS[request.param]()


@pytest.fixture(scope="session")
def aircraft():
    return load_aircraft()


def interior_grid(m, n=41, lo=0.01, hi=0.99):
    """Times spread across the bulk of a model's distribution."""
    return m.ppf(np.linspace(lo, hi, n))


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
