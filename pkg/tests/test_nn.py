from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import projection_check
from tabembed.nn import (
    Adam,
    Dense,
    Dropout,
    Embedding,
    EmbeddingBank,
    GradCheckFailure,
    LayerNorm,
    MultiHeadAttention,
    Parameter,
    ReLU,
    Residual,
    Sequential,
    Sigmoid,
    bce_grad,
    bce_loss,
    dropout,
    embedding_lookup,
    grad_check,
    layer_norm,
    load_checkpoint,
    multi_head_attention,
    relu,
    save_checkpoint,
    softmax,
)
from tabembed.nn.optim import AdamState, adam_step

F64 = np.float64


def input_check(module, x, seed=0):
    """Max relative error of the input gradient against central differences."""
    rng = np.random.default_rng(seed)
    r = rng.normal(size=module.forward(x).shape)
    module.forward(x)
    gx = module.backward(r)
    module.zero_grad()
    worst = 0.0
    h = 1e-6
    for idx in np.ndindex(*x.shape):
        orig = x[idx]
        x[idx] = orig + h
        up = float(np.sum(module.forward(x) * r))
        x[idx] = orig - h
        down = float(np.sum(module.forward(x) * r))
        x[idx] = orig
        num = (up - down) / (2 * h)
        worst = max(worst, abs(gx[idx] - num) / max(abs(gx[idx]) + abs(num), 1e-8))
    return worst


def test_embedding_lookup_returns_row():
    table = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    assert embedding_lookup(table, np.array([1])).tolist() == [[2.0, 3.0]]
    with pytest.raises(AssertionError):
        embedding_lookup(table, np.array([3]))


def test_embedding_gradient_accumulates_with_count():
    emb = Embedding(3, 2, np.random.default_rng(0), dtype=F64)
    emb.forward(np.array([1, 1, 1, 2]))
    emb.backward(np.ones((4, 2)))
    assert emb.table.grad[1].tolist() == [3.0, 3.0]
    assert emb.table.grad[2].tolist() == [1.0, 1.0]
    assert emb.table.grad[0].tolist() == [0.0, 0.0]


def test_embedding_init_range():
    emb = Embedding(50, 8, np.random.default_rng(1))
    assert emb.table.value.dtype == np.float32
    assert np.abs(emb.table.value).max() <= 0.05


def test_embedding_gradient_check():
    emb = Embedding(5, 3, np.random.default_rng(0), dtype=F64)
    assert projection_check(emb, np.array([0, 2, 2, 4]), 1e-6).passed


def test_linear_layer_is_exact():
    layer = Dense(4, 3, np.random.default_rng(0), dtype=F64)
    x = np.random.default_rng(1).normal(size=(6, 4))
    report = projection_check(layer, x, 1e-8)
    assert report.passed, report.describe()
    assert input_check(layer, x) < 1e-8


@pytest.mark.parametrize(
    "factory",
    [
        lambda rng: Dense(5, 4, rng, dtype=F64),
        lambda rng: LayerNorm(5, 1e-6, dtype=F64),
        lambda rng: Sequential(Dense(5, 5, rng, dtype=F64), Sigmoid()),
        lambda rng: Residual(Dense(5, 5, rng, dtype=F64)),
    ],
    ids=["dense", "layer_norm", "dense_sigmoid", "residual"],
)
def test_layer_gradients(factory):
    rng = np.random.default_rng(3)
    module = factory(rng)
    x = rng.normal(size=(4, 5))
    if module.parameters():
        report = projection_check(module, x, 1e-6)
        assert report.passed, report.describe()
    assert input_check(module, x) < 1e-6


def test_relu_values_and_gradient():
    assert relu(np.array([-1.0, 2.0])).tolist() == [0.0, 2.0]
    layer = ReLU()
    x = np.array([[-1.0, 0.5, 2.0]])
    layer.forward(x)
    assert layer.backward(np.ones_like(x)).tolist() == [[0.0, 1.0, 1.0]]


def test_layer_norm_of_constant_vector():
    out = layer_norm(np.full((2, 4), 3.0), np.ones(4), np.full(4, 0.5), 1e-6)
    assert np.allclose(out, 0.5)


def test_dropout_rate_zero_and_eval_are_identity():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 4))
    assert dropout(x, 0.0, rng, train=True) is x
    layer = Dropout(0.5, rng)
    layer.eval()
    assert layer.forward(x) is x


def test_dropout_preserves_mean():
    rng = np.random.default_rng(42)
    n = 100_000
    out = dropout(np.ones(n), 0.1, rng, train=True)
    kept = 1 / 0.9
    assert set(np.unique(out).tolist()) <= {0.0, kept}
    sigma = kept * math.sqrt(0.9 * 0.1) / math.sqrt(n)
    assert abs(out.mean() - 1.0) < 3 * sigma


def test_attention_softmax_rows_sum_to_one():
    scores = np.random.default_rng(0).normal(size=(3, 4, 6, 6)) * 10
    assert np.abs(softmax(scores).sum(axis=-1) - 1).max() < 1e-12


def test_attention_single_position():
    rng = np.random.default_rng(0)
    block = MultiHeadAttention(10, 4, rng, dtype=F64)
    x = rng.normal(size=(2, 1, 10))
    out = block.forward(x)
    assert np.all(block.last_weights == 1.0)
    expected = block.output.forward(block.value.forward(x))
    assert np.allclose(out, expected, atol=1e-12)


def test_attention_shape_and_head_dim():
    rng = np.random.default_rng(0)
    block = MultiHeadAttention(10, 4, rng)
    assert block.head_dim == 3
    assert block.query.w.value.shape == (10, 12)
    assert block.output.w.value.shape == (12, 10)
    out = multi_head_attention(rng.normal(size=(5, 10)).astype(np.float32), 4, rng)
    assert out.shape == (5, 10)


def test_attention_rejects_empty_sequence():
    block = MultiHeadAttention(10, 4, np.random.default_rng(0), dtype=F64)
    with pytest.raises(AssertionError):
        block.forward(np.zeros((2, 0, 10)))


def test_attention_block_gradient():
    rng = np.random.default_rng(5)
    block = MultiHeadAttention(10, 4, rng, dtype=F64)
    x = rng.normal(size=(2, 5, 10))
    report = projection_check(block, x, 1e-6)
    assert report.passed, report.describe()
    assert input_check(block, x) < 1e-6


def test_attention_with_dropout_gradient():
    rng = np.random.default_rng(6)
    block = MultiHeadAttention(10, 4, rng, dropout=0.1, dtype=F64)
    x = rng.normal(size=(2, 4, 10))
    r = rng.normal(size=(2, 4, 10))

    def run():
        block.attn_dropout.rng = np.random.default_rng(9)
        return block.forward(x)

    def loss_and_backward():
        block.zero_grad()
        out = run()
        block.backward(r)
        return float(np.sum(out * r))

    report = grad_check(block.parameters(), loss_and_backward, lambda: float(np.sum(run() * r)), tolerance=1e-6)
    assert report.passed, report.describe()


def test_bce_values():
    y = np.array([[1.0], [0.0]])
    assert bce_loss(y, y) <= 1e-6
    assert bce_loss(np.full((4, 3), 0.5), np.ones((4, 3))) == pytest.approx(math.log(2))


def test_bce_gradient():
    rng = np.random.default_rng(0)
    p = rng.uniform(0.05, 0.95, size=(5, 3))
    y = (rng.random((5, 3)) > 0.5).astype(float)
    g = bce_grad(p, y)
    h = 1e-6
    for idx in np.ndindex(*p.shape):
        up, down = p.copy(), p.copy()
        up[idx] += h
        down[idx] -= h
        num = (bce_loss(up, y) - bce_loss(down, y)) / (2 * h)
        assert abs(g[idx] - num) / max(abs(g[idx]) + abs(num), 1e-8) < 1e-4


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-60, 60), min_size=1, max_size=20))
def test_sigmoid_bce_finite(logits):
    x = np.asarray(logits, dtype=np.float64)
    p = Sigmoid().forward(x)
    assert np.isfinite(p).all()
    assert math.isfinite(bce_loss(p, (x > 0).astype(float)))


def test_adam_zero_gradient_leaves_parameters():
    p = Parameter("w", np.array([1.0, -2.0]))
    Adam([p]).step()
    assert p.value.tolist() == [1.0, -2.0]


def test_adam_first_step_is_lr_sized():
    p = Parameter("w", np.zeros(3))
    p.grad[...] = [0.3, -5.0, 100.0]
    opt = Adam([p], lr=1e-3)
    opt.step()
    assert np.allclose(np.abs(p.value), 1e-3, rtol=1e-4)
    assert np.all(p.grad == 0)
    assert opt.state.step == 1


def test_adam_converges_on_quadratic_bowl():
    p = Parameter("w", np.array([1.5, -0.7, 0.3]))
    state = AdamState(lr=0.01, first=[np.zeros(3)], second=[np.zeros(3)])
    for _ in range(500):
        p.grad[...] = 2 * p.value
        adam_step([p], state)
    assert float(np.sum(p.value**2)) < 1e-6


def test_grad_check_reports_worst_coordinates():
    p = Parameter("w", np.array([1.0, 2.0]))

    def wrong():
        p.zero_grad()
        p.grad[...] = [2.0, 0.0]  # true gradient of sum(w^2) is 2w
        return float(np.sum(p.value**2))

    with pytest.raises(GradCheckFailure) as info:
        grad_check([p], wrong, lambda: float(np.sum(p.value**2)), raise_on_failure=True)
    assert "w[1]" in str(info.value)


def test_grad_check_subsamples_large_parameters():
    layer = Dense(40, 40, np.random.default_rng(0), dtype=F64)
    report = projection_check(layer, np.random.default_rng(1).normal(size=(3, 40)), 1e-6, max_coords=200)
    assert report.n_checked == 200 and report.passed


def test_grad_check_requires_float64():
    layer = Dense(2, 2, np.random.default_rng(0))
    with pytest.raises(AssertionError):
        projection_check(layer, np.ones((1, 2), dtype=np.float32), 1e-6)


def test_forward_is_deterministic():
    def build():
        rng = np.random.default_rng(3)
        return Sequential(Dense(4, 4, rng), Dropout(0.3, np.random.default_rng(4)), ReLU())

    x = np.random.default_rng(0).normal(size=(5, 4)).astype(np.float32)
    assert np.array_equal(build()(x), build()(x))


def test_non_finite_output_trips_check():
    layer = Dense(2, 1, np.random.default_rng(0), dtype=F64)
    with pytest.raises(FloatingPointError):
        layer(np.array([[np.inf, 0.0]]))


def test_embedding_bank_modes():
    rng = np.random.default_rng(0)
    idx = np.array([[0, 1], [2, 0]])
    concat = EmbeddingBank([3, 2], [2, 3], rng)
    assert concat.forward(idx).shape == (2, 5)
    stack = EmbeddingBank([3, 2], [4, 4], rng, mode="stack")
    assert stack.forward(idx).shape == (2, 2, 4)
    with pytest.raises(ValueError):
        EmbeddingBank([3, 2], [2, 3], rng, mode="stack")


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    model = Sequential(Dense(3, 4, rng, name="a"), LayerNorm(4, name="n"), Dense(4, 1, rng, name="b"))
    save_checkpoint(tmp_path / "ckpt", model.parameters())
    rng2 = np.random.default_rng(99)
    other = Sequential(Dense(3, 4, rng2, name="a"), LayerNorm(4, name="n"), Dense(4, 1, rng2, name="b"))
    load_checkpoint(tmp_path / "ckpt", other.parameters())
    for p, q in zip(model.parameters(), other.parameters()):
        assert np.array_equal(p.value, q.value)
    assert (tmp_path / "ckpt.bin").stat().st_size == 4 * model.n_parameters()


def test_key_bias_gradient_is_zero():
    # adding a constant to every score in a softmax row changes nothing
    rng = np.random.default_rng(8)
    block = MultiHeadAttention(10, 4, rng, dtype=F64)
    x = rng.normal(size=(3, 5, 10))
    block.zero_grad()
    out = block.forward(x)
    block.backward(rng.normal(size=out.shape))
    assert np.abs(block.key.b.grad).max() < 1e-12
    assert np.abs(block.query.b.grad).max() > 1e-6
