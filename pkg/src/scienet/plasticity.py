"""Frequency-dependent stochastic STDP and the unsupervised training loop.

Timing differences are stored as ``t_post - t_pre``.  Potentiation is
attempted for synapses whose latest presynaptic spike lies inside the LTP
window before a postsynaptic spike.  Depression is attempted for

* synapses silent inside the window at the postsynaptic spike (``ltd_on_silent``),
  with the timing difference taken to their latest presynaptic spike, and
* the first presynaptic spike following a postsynaptic spike (``ltd_on_pre``).

A synapse that has not fired at all during the presentation is never a
depression candidate at the postsynaptic spike: its timing difference is
unbounded and the acceptance probability is zero.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .config import StdpParams
from .errors import InputDomainError, StructuralError

log = logging.getLogger(__name__)

_BOUND_SLACK = 1e-6


def _check_g(g, p: StdpParams):
    g = np.asarray(g, dtype=np.float64)
    slack = _BOUND_SLACK * (p.g_max - p.g_min)
    if np.any(~np.isfinite(g)) or np.any(g < p.g_min - slack) or np.any(g > p.g_max + slack):
        raise InputDomainError(f"conductance outside [{p.g_min}, {p.g_max}]")
    return g


def _check_f(f, p: StdpParams):
    f = np.asarray(f, dtype=np.float64)
    slack = 1e-9 * (p.f_max - p.f_min)
    if np.any(~np.isfinite(f)) or np.any(f < p.f_min - slack) or np.any(f > p.f_max + slack):
        raise InputDomainError(f"frequency outside [{p.f_min}, {p.f_max}] Hz")
    return f


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def delta_g_pot(g, p: StdpParams):
    """Potentiation step size; shrinks exponentially as ``g`` nears ``g_max``."""
    g = _check_g(g, p)
    return _scalar(p.alpha_p * np.exp(-p.beta_p * (g - p.g_min) / (p.g_max - p.g_min)))


def delta_g_dep(g, p: StdpParams):
    """Depression step size; shrinks exponentially as ``g`` nears ``g_min``."""
    g = _check_g(g, p)
    return _scalar(p.alpha_d * np.exp(-p.beta_d * (p.g_max - g) / (p.g_max - p.g_min)))


def tau_eff_pot(f, p: StdpParams):
    f = _check_f(f, p)
    return p.tau_pot * (1.0 + p.phi_pot * (f - p.f_min) / (p.f_max - p.f_min))


def tau_eff_dep(f, p: StdpParams):
    f = _check_f(f, p)
    return p.tau_dep * (1.0 + p.phi_dep * (f - p.f_min) / (p.f_max - p.f_min))


def p_pot(delta_t, f, p: StdpParams):
    """Acceptance probability of a potentiation event."""
    dt = np.asarray(delta_t, dtype=np.float64)
    if np.any(dt < 0) or np.any(np.isnan(dt)):
        raise InputDomainError("potentiation needs delta_t >= 0")
    out = p.gamma_pot * np.exp(-dt / tau_eff_pot(f, p))
    return _scalar(np.clip(out, 0.0, 1.0))


def p_dep(delta_t, f, p: StdpParams):
    """Acceptance probability of a depression event; uses ``|delta_t|``."""
    dt = np.abs(np.asarray(delta_t, dtype=np.float64))
    if np.any(np.isnan(dt)):
        raise InputDomainError("delta_t is NaN")
    out = p.gamma_dep * np.exp(-dt / tau_eff_dep(f, p))
    return _scalar(np.clip(out, 0.0, 1.0))


@dataclass
class PlasticityTables:
    """Per-synapse constants precomputed once per presentation."""

    tau_pot: np.ndarray
    tau_dep: np.ndarray
    window_steps: int
    g_min32: np.float32
    g_max32: np.float32

    @classmethod
    def build(cls, freqs, p: StdpParams, dt: float):
        return cls(
            tau_pot=np.ascontiguousarray(tau_eff_pot(freqs, p)),
            tau_dep=np.ascontiguousarray(tau_eff_dep(freqs, p)),
            window_steps=int(np.floor(p.t_window / dt + 1e-9)),
            g_min32=np.float32(p.g_min),
            g_max32=np.float32(p.g_max),
        )


def _potentiate(g_row, idx, p: StdpParams, t: PlasticityTables):
    gd = g_row[idx].astype(np.float64)
    step = p.alpha_p * np.exp(-p.beta_p * (gd - p.g_min) / (p.g_max - p.g_min))
    new = np.minimum(gd + step, p.g_max).astype(np.float32)
    g_row[idx] = np.minimum(new, t.g_max32)


def _depress(g_row, idx, p: StdpParams, t: PlasticityTables):
    gd = g_row[idx].astype(np.float64)
    step = p.alpha_d * np.exp(-p.beta_d * (p.g_max - gd) / (p.g_max - p.g_min))
    new = np.maximum(gd - step, p.g_min).astype(np.float32)
    g_row[idx] = np.maximum(new, t.g_min32)


def post_spike_update(g_row, last_pre, step, neuron, dt, p: StdpParams, t: PlasticityTables, key):
    """Apply the postsynaptic-spike rule to one conductance row in place.

    ``last_pre`` holds the step of each synapse's latest presynaptic spike,
    or -1.  Returns the indices of accepted (LTP, LTD) events.
    """
    seen = np.flatnonzero(last_pre >= 0)
    lag = step - last_pre[seen]
    inside = lag <= t.window_steps
    cand = seen[inside]
    delta = lag[inside].astype(np.float64) * dt
    u = _rng.uniforms(key, step, neuron, _rng.KIND_LTP, cand)
    ltp = cand[u < p.gamma_pot * np.exp(-delta / t.tau_pot[cand])]
    _potentiate(g_row, ltp, p, t)
    if p.ltd_on_silent:
        cand = seen[~inside]
        delta = lag[~inside].astype(np.float64) * dt
        u = _rng.uniforms(key, step, neuron, _rng.KIND_LTD_SILENT, cand)
        ltd = cand[u < p.gamma_dep * np.exp(-delta / t.tau_dep[cand])]
        _depress(g_row, ltd, p, t)
    else:
        ltd = seen[:0]
    return ltp, ltd


def pre_spike_depression(g, armed, active, last_post, step, dt, p: StdpParams, t: PlasticityTables, key):
    """Depression for the first presynaptic spike after each postsynaptic spike.

    ``armed[j, i]`` is set when neuron ``j`` fires and cleared by the next
    spike on input ``i``.  Updates ``g`` and ``armed`` in place.
    """
    if active.size == 0:
        return 0
    sub = armed[:, active]
    hits = np.flatnonzero(sub.any(axis=1))
    accepted = 0
    for j in hits:
        cand = active[sub[j]]
        delta = float(step - last_post[j]) * dt
        u = _rng.uniforms(key, step, int(j), _rng.KIND_LTD_PRE, cand)
        ltd = cand[u < p.gamma_dep * np.exp(-delta / t.tau_dep[cand])]
        _depress(g[j], ltd, p, t)
        accepted += ltd.size
    armed[:, active] = False
    return accepted


@dataclass
class StdpEvents:
    ltp: np.ndarray
    ltd: np.ndarray


def stdp_update(model, neuron: int, t_post: float, last_pre_times, freqs, key: int = 0) -> StdpEvents:
    """Apply the postsynaptic-spike STDP rule for ``neuron`` firing at ``t_post`` ms.

    ``last_pre_times`` gives each synapse's latest presynaptic spike in ms
    (NaN when it has not fired).  Times are snapped to the ``dt`` grid.
    Mutates ``model.g`` and returns the accepted events.
    """
    last_pre_times = np.asarray(last_pre_times, dtype=np.float64)
    if last_pre_times.shape != (model.n,) or np.shape(freqs) != (model.n,):
        raise StructuralError("synapse arrays must have length n")
    dt = model.lif.dt
    step = int(round(t_post / dt))
    last_pre = np.full(model.n, -1, dtype=np.int64)
    seen = ~np.isnan(last_pre_times)
    last_pre[seen] = np.rint(last_pre_times[seen] / dt).astype(np.int64)
    if np.any(last_pre > step):
        raise InputDomainError("presynaptic spike after the postsynaptic spike")
    tables = PlasticityTables.build(freqs, model.stdp, dt)
    ltp, ltd = post_spike_update(model.g[neuron], last_pre, step, neuron, dt, model.stdp, tables, key)
    return StdpEvents(ltp, ltd)


@dataclass
class EpochStats:
    epoch: int
    mean_conductance: float
    mean_spikes: float
    presentations: int
    silent_presentations: int = 0
    winners: dict = field(default_factory=dict)


def epoch_log_csv(stats: list[EpochStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "mean_conductance", "mean_spikes_per_presentation", "silent_presentations"])
    for s in stats:
        w.writerow([s.epoch, f"{s.mean_conductance:.8f}", f"{s.mean_spikes:.4f}", s.silent_presentations])
    return buf.getvalue()


def train_unsupervised(model, images, epochs: int, seed: int = 0, on_epoch=None, progress=None):
    """Present every image with learning on, ``epochs`` times, in order.

    Mutates and returns ``model`` along with per-epoch statistics.  Labels
    are never consulted; ``images`` is any (m, n) array-like.
    """
    from .network import run_presentation

    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 2 or images.shape[1] != model.n:
        raise StructuralError(f"expected images of shape (m, {model.n}), got {images.shape}")
    stats = []
    for epoch in range(epochs):
        total_spikes = 0
        silent = 0
        winners = np.zeros(model.d, dtype=np.int64)
        for idx, image in enumerate(images):
            trace = run_presentation(model, image, learning=True, seed=(seed, epoch, idx))
            total_spikes += int(trace.counts.sum())
            silent += int(trace.counts.sum() == 0)
            winners += trace.counts
            if progress is not None:
                progress(epoch, idx)
        s = EpochStats(
            epoch=epoch + 1,
            mean_conductance=float(model.g.astype(np.float64).mean()),
            mean_spikes=total_spikes / max(len(images), 1),
            presentations=len(images),
            silent_presentations=silent,
            winners={int(j): int(c) for j, c in enumerate(winners) if c},
        )
        log.info(
            "epoch %d: mean g %.5f, %.2f spikes/presentation, %d silent",
            s.epoch, s.mean_conductance, s.mean_spikes, s.silent_presentations,
        )
        stats.append(s)
        if on_epoch is not None:
            on_epoch(s)
    return model, stats
