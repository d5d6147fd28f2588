import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

np.seterr(all="warn")

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.register_profile("thorough", deadline=None, max_examples=500)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from mimo_outage import MimoConfig, distinct_spectrum  # noqa: E402

FIG1_T, FIG1_R = (2.7, 0.2, 0.1), (1.9, 0.1)
FIG3_R = (2.7, 0.2, 0.1)
FIG3_T = {"t1": (1.0, 1.0, 1.0), "t2": (2.3, 0.5, 0.2), "t3": (2.7, 0.2, 0.1)}


def fig3_config(tag):
    return MimoConfig.from_spectra(distinct_spectrum(FIG3_T[tag]), FIG3_R)


@pytest.fixture(scope="session")
def siso():
    return MimoConfig.iid(1, 1)


@pytest.fixture(scope="session")
def fig1():
    return MimoConfig.from_spectra(FIG1_T, FIG1_R)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
