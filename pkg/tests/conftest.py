import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from slicestar.domains import build_corpus, euclidean_ball, sample_points  # noqa: E402
from slicestar.quat_core import Quaternion, UnitImaginary, sphere_sample  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)
unit_vectors = st.tuples(finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 1e-3)
units = unit_vectors.map(UnitImaginary.from_vector)


@pytest.fixture(scope="session")
def ball():
    return euclidean_ball(0.0, 1.0, 1)


@pytest.fixture(scope="session")
def units50():
    return sphere_sample(50, 0)


@pytest.fixture(scope="session")
def ball_corpus(ball, units50):
    """Paths and endpoint-sharing pairs in the unit ball, with real-endpoint paths included."""
    probes = sample_points(ball, 25, seed=11)
    probes += sample_points(euclidean_ball(0.0, 0.8, 1), 5, seed=12)
    from slicestar.slice_space import SlicePoint
    probes += [SlicePoint([x], [0.0]) for x in (-0.6, -0.2, 0.0, 0.3, 0.5)]
    paths, pairs = build_corpus(ball, probes, units50)
    return paths, pairs


# -- acceptance report -------------------------------------------------------------

_ACCEPTANCE: dict = {}


def record(criterion, ok: bool, detail: str) -> None:
    """Store (and print) the pass/fail line of an acceptance criterion."""
    line = f"criterion {str(criterion):>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    _ACCEPTANCE[str(criterion)] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.rstrip("b")), k)):
            terminalreporter.write_line(_ACCEPTANCE[key])
