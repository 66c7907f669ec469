import numpy as np
import pytest

from bilayer_susy.potentials import HypRosenMorse, ShiftedOscillator, TrigRosenMorse
from bilayer_susy.susy import make_transform

# the six family x transform combinations at their default parameters
COMBOS = {
    "ho-consecutive": (ShiftedOscillator(1.0, 1.0), "consecutive", 1, None),
    "ho-confluent": (ShiftedOscillator(1.0, 1.0), "confluent", 0, -1.0),
    "trig-consecutive": (TrigRosenMorse(4.0, 1.0, -7.0), "consecutive", 1, None),
    "trig-confluent": (TrigRosenMorse(2.0, 1.0, -2.0), "confluent", 0, -1.0),
    "hyp-consecutive": (HypRosenMorse(8.0, 1.0, 1.0), "consecutive", 1, None),
    "hyp-confluent": (HypRosenMorse(8.0, 1.0, 1.0), "confluent", 0, -1.0),
}


def build(name):
    model, kind, j, w0 = COMBOS[name]
    return model, make_transform(model, kind, j, w0)


@pytest.fixture(params=sorted(COMBOS))
def combo(request):
    return build(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])
