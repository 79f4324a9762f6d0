"""Single leaky integrate-and-fire neuron: forward-Euler step and closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import LifParams
from .errors import NumericError


@dataclass
class LifNeuronState:
    v: float = 0.0
    inhibited_until: float = -math.inf  # ms
    last_spike_time: float | None = None


def step_lif(state: LifNeuronState, current: float, params: LifParams, now: float):
    """Advance one neuron by one ``dt``; returns ``(new_state, spiked)``.

    While ``now < inhibited_until`` the potential is held.
    """
    if not math.isfinite(current):
        raise NumericError(f"non-finite input current {current!r}")
    if now < state.inhibited_until:
        return LifNeuronState(state.v, state.inhibited_until, state.last_spike_time), False
    v = state.v + params.dt * (params.a + params.b * state.v + params.c * current)
    if v > params.v_threshold:
        return LifNeuronState(params.v_reset, state.inhibited_until, now), True
    return LifNeuronState(v, state.inhibited_until, state.last_spike_time), False


def steady_state(current: float, params: LifParams) -> float:
    return -(params.a + params.c * current) / params.b


def analytic_potential(t: float, v0: float, current: float, params: LifParams) -> float:
    """Exact solution of dv/dt = a + b v + c I for constant I."""
    v_inf = steady_state(current, params)
    return v_inf + (v0 - v_inf) * math.exp(params.b * t)


def first_passage_time(v0: float, current: float, params: LifParams) -> float:
    """Time for the free ODE to climb from ``v0`` to threshold (inf if never)."""
    v_inf = steady_state(current, params)
    if v_inf <= params.v_threshold:
        return math.inf
    return math.log((v_inf - v0) / (v_inf - params.v_threshold)) / -params.b
