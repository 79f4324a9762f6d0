import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scienet.config import LifParams
from scienet.errors import NumericError, ParameterError
from scienet.lif import LifNeuronState, analytic_potential, first_passage_time, step_lif


def test_pure_leak_one_step():
    p = LifParams(a=0.0, b=-0.1, v_threshold=5.0, dt=0.1)
    s, spiked = step_lif(LifNeuronState(v=1.0), 0.0, p, now=0.0)
    assert s.v == pytest.approx(0.99)
    assert not spiked


def test_inhibited_holds_potential():
    p = LifParams(v_threshold=1.0)
    s0 = LifNeuronState(v=0.5, inhibited_until=10.0)
    s1, spiked = step_lif(s0, 1e6, p, now=5.0)
    assert s1.v == 0.5 and not spiked


def test_nonfinite_current():
    with pytest.raises(NumericError):
        step_lif(LifNeuronState(), float("nan"), LifParams(), 0.0)


def test_param_invariants():
    with pytest.raises(ParameterError):
        LifParams(v_threshold=0.0, v_reset=0.0)
    with pytest.raises(ParameterError):
        LifParams(dt=0.0)
    with pytest.raises(ParameterError):
        LifParams(b=0.0)


def _simulate(p, current, t_end):
    s = LifNeuronState(v=p.v_reset)
    spikes = []
    for i in range(int(round(t_end / p.dt))):
        now = (i + 1) * p.dt
        s, spiked = step_lif(s, current, p, now)
        if spiked:
            spikes.append(now)
    return spikes


def test_periodic_firing_matches_first_passage():
    p = LifParams(b=-0.05, v_threshold=20.0, dt=0.1)
    current = 1.5  # steady state 30 > 20
    spikes = _simulate(p, current, 200.0)
    expected = first_passage_time(p.v_reset, current, p)
    periods = np.diff([0.0] + spikes)
    assert len(spikes) > 3
    assert np.all(np.abs(periods - expected) <= 2 * p.dt)


def test_subthreshold_never_fires():
    p = LifParams(b=-0.05, v_threshold=20.0)
    assert first_passage_time(0.0, 0.9, p) == math.inf
    assert _simulate(p, 0.9, 300.0) == []


@given(st.floats(0.1, 5.0), st.floats(0.0, 2.0))
def test_potential_never_exceeds_threshold(current, v0):
    p = LifParams(v_threshold=3.0)
    s = LifNeuronState(v=v0)
    for i in range(200):
        s, _ = step_lif(s, current, p, i * p.dt)
        assert s.v <= p.v_threshold


def _max_deviation(dt):
    p = LifParams(b=-0.05, v_threshold=1e9, dt=dt)
    v, current, worst = 0.0, 2.0, 0.0
    for i in range(int(round(50.0 / dt))):
        v = v + dt * (p.a + p.b * v + p.c * current)
        worst = max(worst, abs(v - analytic_potential((i + 1) * dt, 0.0, current, p)))
    return worst


def test_euler_error_halves():
    e1, e2 = _max_deviation(0.2), _max_deviation(0.1)
    assert 0.4 <= e2 / e1 <= 0.6
