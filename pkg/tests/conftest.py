import sys

import numpy as np
import pytest

from qmeas import linalg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def frob(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def projector(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def random_pvm_effects(d, rng, n_outcomes=None):
    """Random PVM (possibly with degenerate projectors) as a (k, d, d) array."""
    u = linalg.random_unitary(d, rng)
    k = d if n_outcomes is None else n_outcomes
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False)) if k > 1 else []
    groups = np.split(np.arange(d), cuts)
    return np.array([u[:, g] @ u[:, g].conj().T for g in groups])


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
