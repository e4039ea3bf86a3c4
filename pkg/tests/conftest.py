import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from coherence_forge.randgen import SeededSource, random_density_matrix  # noqa: E402

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


@st.composite
def density_matrices(draw, d=None, rank=None):
    d = draw(dims) if d is None else d
    r = rank if rank is not None else draw(st.integers(1, d))
    return random_density_matrix(d, r, SeededSource(draw(seeds)))


@pytest.fixture
def src():
    return SeededSource(20240601)


def hadamard():
    return np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
