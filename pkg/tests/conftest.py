import json
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blockfw.model import read_sdpa

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def load_manifest():
    with open(os.path.join(FIXTURES, "manifest.json")) as fh:
        return json.load(fh)


def load_fixture(entry):
    return read_sdpa(os.path.join(FIXTURES, entry["file"]))


@pytest.fixture(scope="session")
def manifest():
    return load_manifest()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sym(rng, n):
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2


def random_psd(rng, n, rank=None):
    G = rng.standard_normal((n, rank or n))
    return G @ G.T


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
