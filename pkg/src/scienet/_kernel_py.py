"""Pure numpy presentation kernel (fallback for ``_kernel``).

Per step ``s``:

1. first-presynaptic-spike depression for every active input,
2. record ``last_pre`` for active inputs,
3. accumulate each neuron's current over active inputs in ascending index
   order (float64, sequential),
4. integrate non-inhibited neurons; the lowest-index neuron crossing
   threshold fires, inhibits every other neuron and (when learning)
   triggers the postsynaptic-spike rule (and raises its threshold offset).

Neurons above the firing neuron in index order are inhibited before they
integrate, so at most one neuron fires per step.
"""

import numpy as np

from .plasticity import post_spike_update, pre_spike_depression

NAME = "python"


def run(g, raster, k, key, learning, v_record=None):
    """Simulate one presentation.  ``k`` is a ``network.KernelArgs``.

    Returns ``(spike_steps, spike_neurons, n_ltp, n_ltd)``.
    """
    d, n = g.shape
    v = np.full(d, k.v_reset, dtype=np.float64)
    inh_until = np.zeros(d, dtype=np.int64)
    last_pre = np.full(n, -1, dtype=np.int64)
    last_post = np.full(d, -1, dtype=np.int64)
    armed = np.zeros((d, n), dtype=bool)
    idx_d = np.arange(d)
    steps_out = []
    neurons_out = []
    n_ltp = n_ltd = 0
    stdp, tables = k.stdp, k.tables
    ptr, inputs = raster.step_ptr, raster.inputs
    zero = np.zeros(d)
    theta = k.theta  # updated in place when learning

    for s in range(raster.n_steps):
        active = inputs[ptr[s] : ptr[s + 1]]
        if learning and stdp.ltd_on_pre and active.size:
            n_ltd += pre_spike_depression(g, armed, active, last_post, s, k.dt, stdp, tables, key)
        if active.size:
            last_pre[active] = s
            current = np.cumsum(g[:, active], axis=1, dtype=np.float64)[:, -1]
        else:
            current = zero

        eligible = s >= inh_until
        v_new = np.where(eligible, v + k.dt * (k.a + k.b * v + k.c * current), v)
        fired = eligible & (v_new > k.v_threshold + theta)
        if fired.any():
            j = int(np.argmax(fired))
            # neurons after j are inhibited before integrating this step
            v = np.where(idx_d > j, v, v_new)
            v[j] = k.v_reset
            others = idx_d != j
            v[others] -= k.dv_inh
            inh_until[others] = s + 1 + k.inh_steps
            steps_out.append(s)
            neurons_out.append(j)
            if learning:
                theta[j] = theta[j] + k.theta_plus
                ltp, ltd = post_spike_update(g[j], last_pre, s, j, k.dt, stdp, tables, key)
                n_ltp += ltp.size
                n_ltd += ltd.size
                if stdp.ltd_on_pre:
                    armed[j, :] = True
                last_post[j] = s
        else:
            v = v_new
        if v_record is not None:
            v_record[s] = v

    return (
        np.asarray(steps_out, dtype=np.int64),
        np.asarray(neurons_out, dtype=np.int32),
        n_ltp,
        n_ltd,
    )
