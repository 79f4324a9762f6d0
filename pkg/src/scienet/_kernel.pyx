# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled presentation kernel; same semantics and RNG as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdint cimport int32_t, int64_t, uint64_t

cnp.import_array()

NAME = "cython"

cdef enum:
    KIND_LTP = 0
    KIND_LTD_SILENT = 1
    KIND_LTD_PRE = 2


cdef inline uint64_t splitmix64(uint64_t x) noexcept nogil:
    cdef uint64_t z
    x = x + <uint64_t>0x9E3779B97F4A7C15ULL
    z = x
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t draw_key(uint64_t key, int64_t step, int64_t neuron, int kind) noexcept nogil:
    cdef uint64_t k = splitmix64(key ^ <uint64_t>step)
    k = splitmix64(k ^ <uint64_t>neuron)
    return splitmix64(k ^ <uint64_t>kind)


cdef inline double uniform(uint64_t base, int64_t synapse) noexcept nogil:
    cdef uint64_t z = splitmix64(base ^ <uint64_t>synapse)
    return (<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0)


cdef struct Stdp:
    double alpha_p, beta_p, alpha_d, beta_d
    double g_min, g_max, gamma_pot, gamma_dep
    float g_min32, g_max32
    int64_t window_steps
    bint ltd_on_silent, ltd_on_pre


cdef inline void potentiate(float* gp, Stdp* p) noexcept nogil:
    cdef double gd = gp[0]
    cdef double step = p.alpha_p * exp(-p.beta_p * (gd - p.g_min) / (p.g_max - p.g_min))
    cdef double x = gd + step
    if x > p.g_max:
        x = p.g_max
    cdef float y = <float>x
    if y > p.g_max32:
        y = p.g_max32
    gp[0] = y


cdef inline void depress(float* gp, Stdp* p) noexcept nogil:
    cdef double gd = gp[0]
    cdef double step = p.alpha_d * exp(-p.beta_d * (p.g_max - gd) / (p.g_max - p.g_min))
    cdef double x = gd - step
    if x < p.g_min:
        x = p.g_min
    cdef float y = <float>x
    if y < p.g_min32:
        y = p.g_min32
    gp[0] = y


def run(g_arr, raster, k, uint64_t key, bint learning, v_record=None):
    """Simulate one presentation.  ``k`` is a ``network.KernelArgs``.

    Returns ``(spike_steps, spike_neurons, n_ltp, n_ltd)``.
    """
    cdef float[:, ::1] g = g_arr
    cdef int64_t[::1] ptr = np.ascontiguousarray(raster.step_ptr, dtype=np.int64)
    cdef int32_t[::1] inputs = np.ascontiguousarray(raster.inputs, dtype=np.int32)
    cdef int64_t n_steps = raster.n_steps
    cdef Py_ssize_t d = g.shape[0]
    cdef Py_ssize_t n = g.shape[1]

    cdef double a = k.a, b = k.b, c = k.c, v_reset = k.v_reset, v_th = k.v_threshold
    cdef double dt = k.dt, dv_inh = k.dv_inh
    cdef int64_t inh_steps = k.inh_steps
    cdef double[::1] theta = k.theta
    cdef double theta_plus = k.theta_plus

    cdef Stdp p
    st = k.stdp
    tb = k.tables
    p.alpha_p = st.alpha_p
    p.beta_p = st.beta_p
    p.alpha_d = st.alpha_d
    p.beta_d = st.beta_d
    p.g_min = st.g_min
    p.g_max = st.g_max
    p.gamma_pot = st.gamma_pot
    p.gamma_dep = st.gamma_dep
    p.g_min32 = tb.g_min32
    p.g_max32 = tb.g_max32
    p.window_steps = tb.window_steps
    p.ltd_on_silent = st.ltd_on_silent
    p.ltd_on_pre = st.ltd_on_pre
    cdef double[::1] tau_pot = np.ascontiguousarray(tb.tau_pot, dtype=np.float64)
    cdef double[::1] tau_dep = np.ascontiguousarray(tb.tau_dep, dtype=np.float64)

    cdef bint record = v_record is not None
    cdef double[:, ::1] vrec
    if record:
        vrec = v_record

    cdef double[::1] v = np.full(d, v_reset, dtype=np.float64)
    cdef double[::1] cur = np.zeros(d, dtype=np.float64)
    cdef int64_t[::1] inh_until = np.zeros(d, dtype=np.int64)
    cdef int64_t[::1] last_pre = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] last_post = np.full(d, -1, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] armed = np.zeros((d, n), dtype=np.uint8)
    out_steps_arr = np.empty(n_steps, dtype=np.int64)
    out_neurons_arr = np.empty(n_steps, dtype=np.int32)
    cdef int64_t[::1] out_steps = out_steps_arr
    cdef int32_t[::1] out_neurons = out_neurons_arr

    cdef int64_t s, q, lag, n_out = 0, n_ltp = 0, n_ltd = 0
    cdef Py_ssize_t i, j, m
    cdef int64_t lo, hi
    cdef double vn, delta, u
    cdef uint64_t base, base2
    cdef float* row
    cdef bint keyed

    with nogil:
        for s in range(n_steps):
            lo = ptr[s]
            hi = ptr[s + 1]
            # first presynaptic spike after a postsynaptic spike
            if learning and p.ltd_on_pre and hi > lo:
                for j in range(d):
                    if last_post[j] < 0:
                        continue
                    row = &g[j, 0]
                    keyed = False
                    for q in range(lo, hi):
                        i = inputs[q]
                        if armed[j, i]:
                            armed[j, i] = 0
                            if not keyed:
                                base = draw_key(key, s, j, KIND_LTD_PRE)
                                keyed = True
                            delta = <double>(s - last_post[j]) * dt
                            u = uniform(base, i)
                            if u < p.gamma_dep * exp(-delta / tau_dep[i]):
                                depress(row + i, &p)
                                n_ltd += 1
            for q in range(lo, hi):
                last_pre[inputs[q]] = s

            for j in range(d):
                row = &g[j, 0]
                if hi > lo:
                    vn = row[inputs[lo]]
                    for q in range(lo + 1, hi):
                        vn = vn + row[inputs[q]]
                    cur[j] = vn
                else:
                    cur[j] = 0.0

            for j in range(d):
                if s < inh_until[j]:
                    continue
                v[j] = v[j] + dt * (a + b * v[j] + c * cur[j])
                if v[j] > v_th + theta[j]:
                    v[j] = v_reset
                    for m in range(d):
                        if m != j:
                            v[m] = v[m] - dv_inh
                            inh_until[m] = s + 1 + inh_steps
                    out_steps[n_out] = s
                    out_neurons[n_out] = <int32_t>j
                    n_out += 1
                    if learning:
                        theta[j] = theta[j] + theta_plus
                        row = &g[j, 0]
                        base = draw_key(key, s, j, KIND_LTP)
                        base2 = draw_key(key, s, j, KIND_LTD_SILENT)
                        for i in range(n):
                            if last_pre[i] < 0:
                                continue
                            lag = s - last_pre[i]
                            delta = <double>lag * dt
                            if lag <= p.window_steps:
                                u = uniform(base, i)
                                if u < p.gamma_pot * exp(-delta / tau_pot[i]):
                                    potentiate(row + i, &p)
                                    n_ltp += 1
                            elif p.ltd_on_silent:
                                u = uniform(base2, i)
                                if u < p.gamma_dep * exp(-delta / tau_dep[i]):
                                    depress(row + i, &p)
                                    n_ltd += 1
                        if p.ltd_on_pre:
                            for i in range(n):
                                armed[j, i] = 1
                        last_post[j] = s
                    # at most one neuron fires per step
                    break
            if record:
                for j in range(d):
                    vrec[s, j] = v[j]

    return out_steps_arr[:n_out].copy(), out_neurons_arr[:n_out].copy(), n_ltp, n_ltd
