import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compdeg.tensor import (
    AdamState,
    ConvLayer,
    adam_step,
    conv2d_backward,
    conv2d_forward,
    mse_loss,
    relu_backward,
    relu_forward,
    sgd_step,
)

from oracles import conv2d_naive, finite_diff_grad, relative_error


def make_layer(rng, in_ch, out_ch, dilation, scale=0.5):
    w = rng.standard_normal((out_ch, in_ch, 3, 3)) * scale
    b = rng.standard_normal(out_ch) * scale
    return ConvLayer(weights=w.astype(np.float32), bias=b.astype(np.float32), dilation=dilation)


class TestConvLayer:
    def test_rejects_non_3x3_kernel(self):
        with pytest.raises(ValueError, match="3, 3"):
            ConvLayer(weights=np.zeros((1, 1, 5, 5)), bias=np.zeros(1))

    def test_rejects_bad_dilation(self):
        with pytest.raises(ValueError, match="dilation"):
            ConvLayer(weights=np.zeros((1, 1, 3, 3)), bias=np.zeros(1), dilation=5)

    def test_rejects_bias_mismatch(self):
        with pytest.raises(ValueError, match="bias"):
            ConvLayer(weights=np.zeros((4, 2, 3, 3)), bias=np.zeros(3))


class TestConvForward:
    def test_identity_kernel(self, rng):
        w = np.zeros((1, 1, 3, 3), dtype=np.float32)
        w[0, 0, 1, 1] = 1.0
        layer = ConvLayer(weights=w, bias=np.zeros(1), dilation=1)
        x = rng.standard_normal((1, 1, 4, 4)).astype(np.float32)
        np.testing.assert_array_equal(conv2d_forward(x, layer), x)

    def test_dilation2_ones(self):
        # 5x5 ones, 3x3 ones kernel, dilation 2: center sees all 9 taps,
        # corner sees only the 4 taps that stay inside (rest read zero padding).
        layer = ConvLayer(weights=np.ones((1, 1, 3, 3)), bias=np.zeros(1), dilation=2)
        x = np.ones((1, 1, 5, 5), dtype=np.float32)
        out = conv2d_forward(x, layer)
        assert out[0, 0, 2, 2] == 9.0
        assert out[0, 0, 0, 0] == 4.0

    def test_matches_naive_oracle(self, rng):
        layer = make_layer(rng, 2, 4, dilation=1)
        x = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)
        expected = conv2d_naive(x, layer.weights, layer.bias, layer.dilation)
        np.testing.assert_allclose(conv2d_forward(x, layer), expected, atol=1e-5)

    @pytest.mark.parametrize("dilation", [1, 2, 3, 4])
    def test_shape_preserved_all_dilations(self, rng, dilation):
        layer = make_layer(rng, 3, 5, dilation)
        x = rng.standard_normal((2, 3, 9, 11)).astype(np.float32)
        assert conv2d_forward(x, layer).shape == (2, 5, 9, 11)

    def test_channel_mismatch_names_shapes(self, rng):
        layer = make_layer(rng, 3, 4, 1)
        x = np.zeros((1, 2, 4, 4), dtype=np.float32)
        with pytest.raises(ValueError) as exc:
            conv2d_forward(x, layer)
        assert "(1, 2, 4, 4)" in str(exc.value) and "(4, 3, 3, 3)" in str(exc.value)

    def test_linearity_zero_bias(self, rng):
        w = rng.standard_normal((4, 2, 3, 3)).astype(np.float32)
        layer = ConvLayer(weights=w, bias=np.zeros(4), dilation=2)
        x = rng.standard_normal((1, 2, 7, 7)).astype(np.float32)
        y = rng.standard_normal((1, 2, 7, 7)).astype(np.float32)
        a, b = 0.7, -1.3
        lhs = conv2d_forward((a * x + b * y).astype(np.float32), layer)
        rhs = a * conv2d_forward(x, layer) + b * conv2d_forward(y, layer)
        np.testing.assert_allclose(lhs, rhs, atol=1e-5)

    def test_deterministic(self, rng):
        layer = make_layer(rng, 2, 3, 3)
        x = rng.standard_normal((2, 2, 8, 8)).astype(np.float32)
        out1 = conv2d_forward(x, layer)
        out2 = conv2d_forward(x, layer)
        assert np.array_equal(out1, out2)


class TestConvBackward:
    def test_zero_upstream(self, rng):
        layer = make_layer(rng, 2, 3, 1)
        x = rng.standard_normal((1, 2, 5, 5)).astype(np.float32)
        up = np.zeros((1, 3, 5, 5), dtype=np.float32)
        gi, gw, gb = conv2d_backward(x, layer, up)
        assert not gi.any() and not gw.any() and not gb.any()

    def test_scalar_chain_rule(self):
        # 1x1 spatial input: only the center tap touches the pixel.
        w = np.zeros((1, 1, 3, 3), dtype=np.float32)
        w[0, 0, 1, 1] = 2.5
        layer = ConvLayer(weights=w, bias=np.zeros(1), dilation=1)
        x = np.full((1, 1, 1, 1), 3.0, dtype=np.float32)
        up = np.full((1, 1, 1, 1), 7.0, dtype=np.float32)
        gi, gw, gb = conv2d_backward(x, layer, up)
        assert gw[0, 0, 1, 1] == pytest.approx(7.0 * 3.0)
        assert gi[0, 0, 0, 0] == pytest.approx(7.0 * 2.5)
        assert gb[0] == pytest.approx(7.0)

    @pytest.mark.parametrize("dilation", [1, 2, 3, 4])
    def test_matches_finite_differences(self, rng, dilation):
        layer = make_layer(rng, 2, 3, dilation)
        x = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)
        up = rng.standard_normal((1, 3, 6, 6)).astype(np.float32)
        gi, gw, gb = conv2d_backward(x, layer, up)

        def loss_of_input(xv):
            return float(np.sum(conv2d_forward(xv.astype(np.float32), layer).astype(np.float64) * up))

        def loss_of_weights(wv):
            lay = ConvLayer(weights=wv.astype(np.float32), bias=layer.bias, dilation=dilation)
            return float(np.sum(conv2d_forward(x, lay).astype(np.float64) * up))

        fd_gi = finite_diff_grad(loss_of_input, x.astype(np.float64))
        fd_gw = finite_diff_grad(loss_of_weights, layer.weights.astype(np.float64))
        assert relative_error(gi, fd_gi) < 1e-3
        assert relative_error(gw, fd_gw) < 1e-3

    def test_upstream_shape_mismatch(self, rng):
        layer = make_layer(rng, 2, 3, 1)
        x = rng.standard_normal((1, 2, 5, 5)).astype(np.float32)
        with pytest.raises(ValueError, match="upstream"):
            conv2d_backward(x, layer, np.zeros((1, 3, 4, 5), dtype=np.float32))


class TestRelu:
    def test_forward_definition(self):
        x = np.array([-1.0, 0.0, 2.0], dtype=np.float32).reshape(1, 1, 1, 3)
        np.testing.assert_array_equal(relu_forward(x).ravel(), [0.0, 0.0, 2.0])

    def test_backward_definition(self):
        x = np.array([-1.0, 2.0], dtype=np.float32).reshape(1, 1, 1, 2)
        up = np.array([5.0, 5.0], dtype=np.float32).reshape(1, 1, 1, 2)
        np.testing.assert_array_equal(relu_backward(x, up).ravel(), [0.0, 5.0])

    def test_gradient_at_zero_is_zero(self):
        x = np.zeros((1, 1, 1, 1), dtype=np.float32)
        up = np.ones((1, 1, 1, 1), dtype=np.float32)
        assert relu_backward(x, up)[0, 0, 0, 0] == 0.0

    def test_finite_differences_away_from_zero(self, rng):
        x = rng.standard_normal((1, 2, 4, 4)).astype(np.float32)
        x[np.abs(x) <= 1e-2] = 0.5  # keep clear of the kink
        up = rng.standard_normal(x.shape).astype(np.float32)
        grad = relu_backward(x, up)

        def loss(xv):
            return float(np.sum(relu_forward(xv.astype(np.float32)).astype(np.float64) * up))

        fd = finite_diff_grad(loss, x.astype(np.float64))
        assert relative_error(grad, fd) < 1e-3

    def test_backward_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            relu_backward(np.zeros((1, 1, 2, 2), np.float32), np.zeros((1, 1, 2, 3), np.float32))


class TestMseLoss:
    def test_identical_inputs(self, rng):
        x = rng.standard_normal((1, 3, 4, 4)).astype(np.float32)
        loss, grad = mse_loss(x, x)
        assert loss == 0.0
        assert not grad.any()

    def test_closed_form(self):
        pred = np.array([1.0, 1.0], dtype=np.float32).reshape(1, 1, 1, 2)
        target = np.zeros_like(pred)
        loss, grad = mse_loss(pred, target)
        assert loss == pytest.approx(1.0)
        np.testing.assert_allclose(grad.ravel(), [1.0, 1.0])

    def test_gradient_finite_differences(self, rng):
        pred = rng.standard_normal((1, 2, 3, 3)).astype(np.float32)
        target = rng.standard_normal((1, 2, 3, 3)).astype(np.float32)
        _, grad = mse_loss(pred, target)

        def loss(p):
            return mse_loss(p.astype(np.float32), target)[0]

        fd = finite_diff_grad(loss, pred.astype(np.float64))
        assert relative_error(grad, fd) < 1e-4

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            mse_loss(np.zeros((1, 1, 2, 2), np.float32), np.zeros((1, 1, 2, 3), np.float32))


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        params = np.array([1.0, -2.0], dtype=np.float32)
        state = AdamState.zeros(2)
        out = adam_step(params, np.zeros(2, dtype=np.float32), state)
        np.testing.assert_array_equal(out, params)
        assert state.t == 1

    def test_one_step_closed_form(self):
        # m_hat = g, v_hat = g^2 after one step, so the update is lr*g/(|g|+eps).
        params = np.array([0.5], dtype=np.float32)
        state = AdamState.zeros(1, learning_rate=0.001)
        out = adam_step(params, np.array([1.0], dtype=np.float32), state)
        assert out[0] == pytest.approx(0.5 - 0.001, abs=1e-7)

    def test_optimizes_quadratic(self):
        # 100 steps on f(p) = p^2 from p=1 with lr 0.1.
        p = np.array([1.0], dtype=np.float64)
        state = AdamState.zeros(1, learning_rate=0.1)
        trace = [abs(p[0])]
        for _ in range(100):
            p = adam_step(p, 2.0 * p, state)
            trace.append(abs(p[0]))
        assert trace[-1] < 0.5
        # monotone in trend: mean |p| over each 25-step quarter decreases
        windows = [np.mean(trace[i : i + 25]) for i in range(0, 100, 25)]
        assert all(b < a for a, b in zip(windows, windows[1:]))

    def test_length_mismatch(self):
        state = AdamState.zeros(2)
        with pytest.raises(ValueError, match="length"):
            adam_step(np.zeros(3), np.zeros(3), state)

    def test_t_increments_per_step(self):
        state = AdamState.zeros(1)
        p = np.zeros(1)
        for expect in range(1, 5):
            p = adam_step(p, np.ones(1), state)
            assert state.t == expect


class TestSgd:
    def test_zero_gradient(self):
        p = np.array([3.0], dtype=np.float32)
        np.testing.assert_array_equal(sgd_step(p, np.zeros(1, np.float32), 0.1), p)

    def test_definition(self):
        out = sgd_step(np.array([1.0]), np.array([2.0]), 0.25)
        assert out[0] == pytest.approx(0.5)

    def test_converges_on_quadratic(self):
        # 50 steps on f(p) = (p-3)^2 with lr 0.1
        p = np.array([0.0])
        for _ in range(50):
            p = sgd_step(p, 2.0 * (p - 3.0), 0.1)
        assert abs(p[0] - 3.0) < 1e-3

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            sgd_step(np.zeros(2), np.zeros(3), 0.1)

    def test_rejects_bad_learning_rate(self):
        with pytest.raises(ValueError, match="learning_rate"):
            sgd_step(np.zeros(2), np.zeros(2), 0.0)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(1, 2),
    c_in=st.integers(1, 3),
    c_out=st.integers(1, 3),
    h=st.integers(1, 8),
    w=st.integers(1, 8),
    dilation=st.sampled_from([1, 2, 3, 4]),
    seed=st.integers(0, 2**31 - 1),
)
def test_conv_forward_equals_oracle(n, c_in, c_out, h, w, dilation, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, c_in, h, w)).astype(np.float32)
    layer = make_layer(rng, c_in, c_out, dilation)
    expected = conv2d_naive(x, layer.weights, layer.bias, dilation)
    np.testing.assert_allclose(conv2d_forward(x, layer), expected, atol=1e-5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_outputs_always_finite(seed):
    rng = np.random.default_rng(seed)
    layer = make_layer(rng, 2, 2, int(rng.integers(1, 5)))
    x = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)
    out = conv2d_forward(x, layer)
    assert np.isfinite(out).all()
    gi, gw, gb = conv2d_backward(x, layer, out)
    assert np.isfinite(gi).all() and np.isfinite(gw).all() and np.isfinite(gb).all()
