import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from scienet import context
from scienet.errors import InputDomainError, ParameterError, StructuralError
from scienet.network import SnnModel


def _model(d=6, n=12, seed=0):
    g = np.random.default_rng(seed).uniform(size=(d, n)).astype(np.float32)
    return SnnModel(g)


def test_score_examples():
    m = _model()
    assert np.all(context.score(m, np.zeros(12)) == 0)
    e = np.zeros(12)
    e[4] = 1.0
    assert np.allclose(context.score(m, e), m.g[:, 4])
    x = np.random.default_rng(1).uniform(size=12)
    naive = [sum(float(m.g[j, i]) * x[i] for i in range(12)) for j in range(6)]
    assert np.allclose(context.score(m, x), naive, rtol=1e-12)
    assert np.allclose(context.score_batch(m, x[None])[0], naive, rtol=1e-12)


def test_score_errors():
    m = _model()
    with pytest.raises(StructuralError):
        context.score(m, np.zeros(5))
    with pytest.raises(InputDomainError):
        context.score(m, np.full(12, 1.5))


def test_top_k_examples():
    assert sorted(context.top_k_select([3, 1, 3, 2], 2).tolist()) == [0, 2]
    assert sorted(context.top_k_select([5, 4, 3], 3).tolist()) == [0, 1, 2]
    with pytest.raises(ParameterError):
        context.top_k_select([1, 2], 0)
    with pytest.raises(ParameterError):
        context.top_k_select([1, 2], 3)


@given(arrays(np.float64, st.integers(1, 30), elements=st.integers(-5, 5).map(float)), st.data())
def test_top_k_sort_oracle(scores, data):
    k = data.draw(st.integers(1, scores.size))
    ranked = sorted(range(scores.size), key=lambda i: (-scores[i], i))
    assert context.top_k_select(scores, k).tolist() == ranked[:k]


@given(st.integers(0, 1000), st.floats(0.01, 100.0))
def test_selection_scale_invariant(seed, lam):
    m = _model(10, 20, seed)
    x = np.random.default_rng(seed).uniform(0, 0.01, size=20)
    a = context.top_k_select(context.score(m, x), 4)
    b = context.top_k_select(context.score(m, x * lam), 4)
    # exact ties aside, the selected set is unchanged
    assert set(a.tolist()) == set(b.tolist())


def test_combine_examples():
    m = _model()
    assert np.allclose(context.combine_contexts(m, [2]), context.minmax(m.g[2]))
    twin = SnnModel(np.vstack([m.g[1], m.g[1]]))
    assert np.allclose(context.combine_contexts(twin, [0, 1]), context.combine_contexts(twin, [0]))
    flat = SnnModel(np.full((2, 5), 0.3, np.float32))
    assert np.all(context.combine_contexts(flat, [0, 1]) == 0.5)
    with pytest.raises(ParameterError):
        context.combine_contexts(m, [9])


def test_template_degenerate_weights():
    m = _model()
    x = np.random.default_rng(2).uniform(0.2, 0.8, size=12)
    t0 = context.extract_template(m, x, w=0.0, k=2)
    assert np.allclose(t0.values, context.minmax(x))
    t1 = context.extract_template(m, x, w=1.0, k=2)
    chosen = context.top_k_select(context.score(m, x), 2)
    assert np.allclose(t1.values, context.minmax(1.0 - context.combine_contexts(m, chosen)))
    with pytest.raises(ParameterError):
        context.extract_template(m, x, w=1.5)


@given(st.integers(0, 500), st.floats(0, 1), st.integers(1, 6))
def test_template_contract(seed, w, k):
    m = _model(6, 12, seed)
    x = np.random.default_rng(seed + 1).uniform(size=12)
    t = context.extract_template(m, x, w, k)
    assert t.values.shape == (12,)
    assert np.all((t.values >= 0) & (t.values <= 1))
    assert len(set(t.source_neurons.tolist())) == k
    assert t.score_vector.shape == (6,)
    again = context.extract_template(m, x, w, k)
    assert np.array_equal(t.values, again.values)


def test_batch_equals_single():
    m = _model()
    xs = np.random.default_rng(3).uniform(size=(5, 12))
    batch = context.extract_batch(m, xs, 0.3, 2)
    for i in range(5):
        assert np.array_equal(batch[i], context.extract_template(m, xs[i], 0.3, 2).values)


def test_distance_properties():
    m = _model(8, 12, 4)
    rng = np.random.default_rng(5)
    a, b = rng.uniform(size=12), rng.uniform(size=12)
    assert context.context_distance(m, a, a, 3) == 0.0
    assert context.context_distance(m, a, b, 3) == context.context_distance(m, b, a, 3)
    ca, cb = context.context_vector(m, a, 3), context.context_vector(m, b, 3)
    assert context.context_distance(m, a, b, 3) == pytest.approx(np.linalg.norm(ca - cb))
