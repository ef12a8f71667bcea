"""Dense layers, loss, optimizer, scheduler, gradient check, checkpoints."""
from __future__ import annotations

import struct

import numpy as np
import pytest

from traitfusion.nn import (
    CHECKPOINT_VERSION,
    AdamState,
    DenseLayer,
    PlateauScheduler,
    adam_step,
    grad_check,
    load_checkpoint,
    mse_loss,
    save_checkpoint,
)
from traitfusion.rng import Xoshiro256PP, derive_key
from traitfusion.types import NumericError, ValidationError


def test_forward_matches_hand_matrix() -> None:
    layer = DenseLayer(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 1.0]))
    out = layer.forward(np.array([1.0, 1.0]))
    assert np.array_equal(out, np.array([4.0, 8.0]))


def test_forward_relu_clamps_negative_preactivation() -> None:
    layer = DenseLayer(np.array([[1.0, 2.0], [-3.0, -4.0]]), np.array([1.0, 1.0]), "relu")
    out = layer.forward(np.array([1.0, 1.0]))
    assert np.array_equal(out, np.array([4.0, 0.0]))


def test_forward_batch_rows_are_independent_samples() -> None:
    layer = DenseLayer(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 1.0]))
    batch = np.array([[1.0, 1.0], [0.0, 0.0], [2.0, -1.0]])
    out = layer.forward(batch)
    expected = np.stack([batch[i] @ layer.weights.T + layer.bias for i in range(3)])
    assert np.array_equal(out, expected)


def test_sigmoid_outputs_stay_inside_unit_interval() -> None:
    # strictly inside for moderate pre-activations; beyond |z|~36 binary64
    # rounds to the endpoints, so extremes only guarantee the closed interval
    layer = DenseLayer(np.array([[1.0]]), np.array([0.0]), "sigmoid")
    for x in (-30.0, -4.0, 0.0, 4.0, 30.0):
        y = layer.forward(np.array([x]))[0]
        assert 0.0 < y < 1.0
    assert layer.forward(np.array([0.0]))[0] == 0.5
    for x in (-600.0, 600.0):
        y = layer.forward(np.array([x]))[0]
        assert 0.0 <= y <= 1.0


def test_forward_rejects_wrong_input_dim() -> None:
    layer = DenseLayer(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(ValidationError, match="input dim 3"):
        layer.forward(np.zeros(4))


def test_layer_shape_and_finiteness_validation() -> None:
    with pytest.raises(ValidationError, match="inconsistent layer shapes"):
        DenseLayer(np.zeros((2, 3)), np.zeros(3))
    with pytest.raises(ValidationError, match="finite"):
        DenseLayer(np.array([[np.nan]]), np.zeros(1))
    with pytest.raises(ValidationError, match="activation"):
        DenseLayer(np.zeros((1, 1)), np.zeros(1), "tanh")


def test_backward_weight_gradient_is_outer_product() -> None:
    # picking grad_out = e0 leaves exactly row 0 of dW equal to the input
    layer = DenseLayer(np.array([[1.0, 2.0], [3.0, 4.0]]), np.zeros(2))
    x = np.array([5.0, -7.0])
    layer.forward(x)
    gw, gb, gx = layer.backward(np.array([1.0, 0.0]))
    assert np.array_equal(gw, np.array([[5.0, -7.0], [0.0, 0.0]]))
    assert np.array_equal(gb, np.array([1.0, 0.0]))
    assert np.array_equal(gx, layer.weights[0])


def test_backward_relu_blocks_gradient_through_dead_unit() -> None:
    layer = DenseLayer(np.array([[1.0], [-1.0]]), np.zeros(2), "relu")
    layer.forward(np.array([2.0]))  # unit 0 active (z=2), unit 1 dead (z=-2)
    gw, gb, gx = layer.backward(np.array([1.0, 1.0]))
    assert np.array_equal(gw, np.array([[2.0], [0.0]]))
    assert np.array_equal(gb, np.array([1.0, 0.0]))
    assert np.array_equal(gx, np.array([1.0]))


def test_backward_before_forward_is_an_error() -> None:
    layer = DenseLayer(np.zeros((1, 1)), np.zeros(1))
    with pytest.raises(ValidationError, match="backward called before forward"):
        layer.backward(np.zeros(1))


def test_backward_matches_finite_differences_on_random_layer() -> None:
    # independent oracle: central differences on loss = sum(relu(Wx+b)*c)
    stream = Xoshiro256PP(derive_key(77))
    w = (2.0 * stream.floats(64) - 1.0).reshape(8, 8)
    b = 2.0 * stream.floats(8) - 1.0
    x = 2.0 * stream.floats(8) - 1.0
    c = 2.0 * stream.floats(8) - 1.0
    layer = DenseLayer(w, b, "relu")
    # probe windows must not straddle a relu corner for the oracle to be valid
    assert np.min(np.abs(w @ x + b)) > 1e-3
    layer.forward(x)
    gw, gb, _ = layer.backward(c)
    h = 1e-5

    def loss(wm: np.ndarray, bm: np.ndarray) -> float:
        return float(np.maximum(wm @ x + bm, 0.0) @ c)

    worst = 0.0
    for idx in np.ndindex(w.shape):
        wp, wm = w.copy(), w.copy()
        wp[idx] += h
        wm[idx] -= h
        numeric = (loss(wp, b) - loss(wm, b)) / (2 * h)
        worst = max(worst, abs(numeric - gw[idx]) / max(abs(numeric), abs(gw[idx]), 1e-8))
    for i in range(8):
        bp, bm = b.copy(), b.copy()
        bp[i] += h
        bm[i] -= h
        numeric = (loss(w, bp) - loss(w, bm)) / (2 * h)
        worst = max(worst, abs(numeric - gb[i]) / max(abs(numeric), abs(gb[i]), 1e-8))
    assert worst < 1e-4


def test_mse_loss_hand_values() -> None:
    loss, grad = mse_loss(np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    assert loss == 0.0
    assert np.array_equal(grad, np.zeros(2))
    loss, grad = mse_loss(np.array([0.6, 0.4]), np.array([0.5, 0.5]))
    assert loss == pytest.approx(0.01, abs=1e-15)
    assert np.allclose(grad, np.array([0.1, -0.1]), atol=1e-15)


def test_mse_gradient_is_two_diff_over_size() -> None:
    pred = np.array([[0.2, 0.9], [0.4, 0.1]])
    target = np.array([[0.0, 1.0], [0.5, 0.5]])
    _, grad = mse_loss(pred, target)
    assert np.array_equal(grad, 2.0 * (pred - target) / 4.0)


def test_mse_empty_batch_is_an_error() -> None:
    with pytest.raises(ValidationError, match="empty batch"):
        mse_loss(np.zeros((0, 5)), np.zeros((0, 5)))
    with pytest.raises(ValidationError, match="shape mismatch"):
        mse_loss(np.zeros(3), np.zeros(4))


def test_adam_first_step_matches_closed_form() -> None:
    # with g=1: m-hat = v-hat = 1, so the step is exactly lr/(1+eps)
    p = [np.array([0.0])]
    state = AdamState(p, learning_rate=0.001)
    adam_step(state, p, [np.array([1.0])])
    assert p[0][0] == pytest.approx(-0.001 / (1.0 + 1e-8), rel=1e-15)
    assert state.t == 1


def test_adam_zero_gradient_fresh_state_is_a_no_op() -> None:
    p = [np.array([1.5, -2.5])]
    state = AdamState(p, learning_rate=0.01)
    adam_step(state, p, [np.zeros(2)])
    assert np.array_equal(p[0], np.array([1.5, -2.5]))


def test_adam_zero_learning_rate_freezes_parameters() -> None:
    p = [np.array([1.5])]
    state = AdamState(p, learning_rate=0.0)
    adam_step(state, p, [np.array([3.0])])
    assert p[0][0] == 1.5
    assert state.t == 1  # step counter still advances


def test_adam_is_deterministic_given_equal_state() -> None:
    def run() -> np.ndarray:
        p = [np.array([0.3, -0.7]), np.array([[1.0, 2.0]])]
        state = AdamState(p, learning_rate=0.01)
        for t in range(5):
            grads = [np.array([0.1 * t, -0.2]), np.array([[0.3, 0.01 * t]])]
            adam_step(state, p, grads)
        return np.concatenate([q.reshape(-1) for q in p])

    assert np.array_equal(run(), run())


def test_adam_rejects_non_finite_gradient() -> None:
    p = [np.array([0.0])]
    state = AdamState(p, learning_rate=0.001)
    with pytest.raises(NumericError, match="non-finite gradient"):
        adam_step(state, p, [np.array([np.nan])])
    with pytest.raises(ValidationError, match="count mismatch"):
        adam_step(state, p, [np.zeros(1), np.zeros(1)])


def test_adam_descends_a_fixed_quadratic_monotonically() -> None:
    # full-batch descent on f(p) = sum((p - c)^2) at small lr
    c = np.array([0.3, -0.4, 1.2])
    p = [np.array([0.0, 0.0, 0.0])]
    state = AdamState(p, learning_rate=1e-4)
    losses = []
    for _ in range(50):
        losses.append(float(np.sum((p[0] - c) ** 2)))
        adam_step(state, p, [2.0 * (p[0] - c)])
    losses.append(float(np.sum((p[0] - c) ** 2)))
    diffs = np.diff(np.array(losses))
    assert np.all(diffs < 0.0)


def test_scheduler_keeps_lr_while_improving() -> None:
    sched = PlateauScheduler(learning_rate=0.001)
    for metric in (0.5, 0.4, 0.3, 0.2, 0.1, 0.05):
        assert sched.step(metric) == 0.001


def test_scheduler_cuts_lr_after_patience_non_improvements() -> None:
    sched = PlateauScheduler(learning_rate=0.001)
    sched.step(0.5)
    for _ in range(4):
        assert sched.step(0.5) == 0.001  # 0.5 is not a strict improvement
    assert sched.step(0.5) == pytest.approx(0.00095)
    for _ in range(4):
        assert sched.step(0.5) == pytest.approx(0.00095)
    assert sched.step(0.5) == pytest.approx(0.0009025)


def test_scheduler_improvement_resets_patience_counter() -> None:
    sched = PlateauScheduler(learning_rate=0.001)
    sched.step(0.5)
    for _ in range(4):
        sched.step(0.5)
    sched.step(0.4)  # strict improvement wipes the streak
    for _ in range(4):
        assert sched.step(0.4) == 0.001
    assert sched.step(0.4) == pytest.approx(0.00095)


def test_scheduler_validates_config_and_metric() -> None:
    with pytest.raises(ValidationError, match="factor"):
        PlateauScheduler(learning_rate=0.001, factor=1.0)
    with pytest.raises(ValidationError, match="patience"):
        PlateauScheduler(learning_rate=0.001, patience=0)
    sched = PlateauScheduler(learning_rate=0.001)
    with pytest.raises(NumericError, match="not finite"):
        sched.step(float("nan"))


class _LinearModel:
    """Minimal grad-checkable wrapper: one dense layer plus mse to a target."""

    def __init__(self, layer: DenseLayer, target: np.ndarray) -> None:
        self.layer = layer
        self.target = target

    def parameters(self) -> list[np.ndarray]:
        return [self.layer.weights, self.layer.bias]

    def loss_on(self, sample: np.ndarray) -> float:
        loss, _ = mse_loss(self.layer.forward(sample), self.target)
        return loss

    def grads_on(self, sample: np.ndarray) -> list[np.ndarray]:
        pred = self.layer.forward(sample)
        _, grad_pred = mse_loss(pred, self.target)
        gw, gb, _ = self.layer.backward(grad_pred)
        return [gw, gb]


def test_grad_check_accepts_a_correct_smooth_model() -> None:
    stream = Xoshiro256PP(derive_key(3))
    layer = DenseLayer.init(6, 4, "sigmoid", stream)
    model = _LinearModel(layer, 2.0 * stream.floats(4) - 1.0)
    sample = 2.0 * stream.floats(6) - 1.0
    assert grad_check(model, sample) < 1e-6


def test_grad_check_flags_a_wrong_gradient() -> None:
    class Wrong(_LinearModel):
        def grads_on(self, sample: np.ndarray) -> list[np.ndarray]:
            gw, gb = super().grads_on(sample)
            return [1.5 * gw, gb]  # deliberately scaled weight gradient

    stream = Xoshiro256PP(derive_key(4))
    layer = DenseLayer.init(5, 3, "none", stream)
    model = Wrong(layer, 2.0 * stream.floats(3) - 1.0)
    sample = 2.0 * stream.floats(5) - 1.0
    assert grad_check(model, sample) > 0.1


def test_grad_check_survives_a_relu_corner_inside_the_probe_window() -> None:
    # one pre-activation sits 5e-6 from the corner, inside the 1e-5 step;
    # the shrunken re-probe must clear it instead of reporting a chord
    stream = Xoshiro256PP(derive_key(5))
    layer = DenseLayer.init(4, 3, "relu", stream)
    sample = 2.0 * stream.floats(4) - 1.0
    z = layer.weights @ sample
    layer.bias[:] = np.array([0.1, -0.2, 0.3])  # keep other units off their corners
    layer.bias[1] = -z[1] + 5e-6  # unit 1 pre-activation lands ~5e-6 from the corner
    model = _LinearModel(layer, np.array([0.4, 0.9, 0.1]))
    assert grad_check(model, sample) < 1e-4


def test_grad_check_zero_input_stays_finite() -> None:
    stream = Xoshiro256PP(derive_key(6))
    layer = DenseLayer.init(4, 3, "sigmoid", stream)
    model = _LinearModel(layer, np.array([0.5, 0.5, 0.5]))
    assert np.isfinite(grad_check(model, np.zeros(4)))


def test_grad_check_requires_parameters() -> None:
    class Empty:
        def parameters(self) -> list[np.ndarray]:
            return []

        def loss_on(self, sample) -> float:
            return 0.0

        def grads_on(self, sample) -> list[np.ndarray]:
            return []

    with pytest.raises(ValidationError, match="no parameters"):
        grad_check(Empty(), None)


def test_init_bounds_and_zero_bias() -> None:
    stream = Xoshiro256PP(derive_key(9))
    layer = DenseLayer.init(16, 8, "relu", stream)
    scale = 1.0 / np.sqrt(16.0)
    assert layer.weights.shape == (8, 16)
    assert np.all(np.abs(layer.weights) <= scale)
    assert np.array_equal(layer.bias, np.zeros(8))
    # same stream key reproduces the same weights
    again = DenseLayer.init(16, 8, "relu", Xoshiro256PP(derive_key(9)))
    assert np.array_equal(layer.weights, again.weights)


def test_checkpoint_round_trip_is_bit_exact(tmp_path) -> None:
    stream = Xoshiro256PP(derive_key(11))
    params = [
        (2.0 * stream.floats(12) - 1.0).reshape(3, 4),
        2.0 * stream.floats(3) - 1.0,
    ]
    arch = {"kind": "test", "dims": [4, 3]}
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, arch, params)
    loaded_arch, flat = load_checkpoint(path)
    assert loaded_arch == arch
    assert np.array_equal(flat, np.concatenate([p.reshape(-1) for p in params]))
    # rewriting produces byte-identical files
    path2 = tmp_path / "model2.ckpt"
    save_checkpoint(path2, arch, params)
    assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_bad_magic_is_an_error(tmp_path) -> None:
    path = tmp_path / "bogus.ckpt"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ValidationError, match="bad magic"):
        load_checkpoint(path)


def test_checkpoint_truncations_are_errors(tmp_path) -> None:
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, {"kind": "test"}, [np.arange(4.0)])
    blob = path.read_bytes()
    short = tmp_path / "short.ckpt"
    short.write_bytes(blob[:6])  # cut inside the header length field
    with pytest.raises(ValidationError, match="truncated checkpoint header"):
        load_checkpoint(short)
    midheader = tmp_path / "midheader.ckpt"
    midheader.write_bytes(blob[:20])  # cut inside the JSON header
    with pytest.raises(ValidationError, match="truncated checkpoint header"):
        load_checkpoint(midheader)
    midpayload = tmp_path / "midpayload.ckpt"
    midpayload.write_bytes(blob[:-3])  # cut inside a float64
    with pytest.raises(ValidationError, match="truncated parameter payload"):
        load_checkpoint(midpayload)


def test_checkpoint_header_validation(tmp_path) -> None:
    def write_with_header(header_bytes: bytes, payload: bytes):
        path = tmp_path / "crafted.ckpt"
        path.write_bytes(b"TFCK" + struct.pack("<I", len(header_bytes)) + header_bytes + payload)
        return path

    with pytest.raises(ValidationError, match="corrupt checkpoint header"):
        load_checkpoint(write_with_header(b"{not json", b""))
    with pytest.raises(ValidationError, match="format_version"):
        load_checkpoint(write_with_header(b'{"format_version": 99}', b""))
    header = (
        '{"architecture": {}, "format_version": %d, "param_count": 2}' % CHECKPOINT_VERSION
    ).encode()
    with pytest.raises(ValidationError, match="header declares 2"):
        load_checkpoint(write_with_header(header, np.zeros(3, dtype="<f8").tobytes()))
    missing = ('{"format_version": %d}' % CHECKPOINT_VERSION).encode()
    with pytest.raises(ValidationError, match="missing required fields"):
        load_checkpoint(write_with_header(missing, b""))
