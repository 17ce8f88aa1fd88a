import pytest

from becgrowth.core import CONSTANTS, PRESETS, BathMode, BathState, SimConfig, SolverSettings, Trap

# (criterion, passed, detail) tuples appended by test_acceptance
ACCEPTANCE_LINES = []


def make_config(preset="rb87", trap_hz=100.0, temp=500e-9, mu_frac=0.3, eta=6.0,
                t_end=0.3, mode=BathMode.STATIC, n_samples=501, **kw):
    kT = CONSTANTS.k_B * temp
    return SimConfig(PRESETS[preset], Trap.from_hz(trap_hz),
                     BathState(temp, mu_frac * kT, eta, mode), t_end,
                     solver=SolverSettings(n_samples=n_samples), **kw)


@pytest.fixture
def rb_config():
    return make_config()


@pytest.fixture
def ssa_config():
    # small stationary number (~2200 atoms) so the chain is cheap to run
    return make_config(trap_hz=400.0, temp=100e-9, mu_frac=1.0, t_end=0.4, n_samples=201)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
