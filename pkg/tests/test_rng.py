import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from scienet import _rng


def test_splitmix_reference_values():
    # first outputs of the reference splitmix64 generator seeded with 0
    state = 0
    out = []
    for _ in range(3):
        out.append(_rng.splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    assert out == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


@given(st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=20))
def test_array_matches_scalar(xs):
    arr = _rng.splitmix64_array(np.array(xs, dtype=np.uint64))
    assert [int(v) for v in arr] == [_rng.splitmix64(x) for x in xs]


@given(st.integers(0, 2**63), st.integers(0, 10**6), st.integers(0, 500), st.integers(0, 2))
def test_uniforms_open_interval_and_consistent(key, step, neuron, kind):
    syn = np.arange(0, 3072, 97)
    u = _rng.uniforms(key, step, neuron, kind, syn)
    assert np.all((u > 0) & (u < 1))
    assert u[3] == _rng.uniform(key, step, neuron, kind, int(syn[3]))


def test_uniform_moments():
    u = _rng.uniforms(_rng.presentation_key(7, 1), 3, 2, 0, np.arange(200_000))
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    assert abs(u.var() - 1 / 12) < 0.002


def test_keys_distinguish_parts():
    assert _rng.presentation_key(1, 2, 3) != _rng.presentation_key(1, 3, 2)
    assert _rng.draw_key(5, 1, 0, 0) != _rng.draw_key(5, 1, 0, 1)
