import numpy as np
import pytest

from sbicover.nn.mdn import (SCALE_FLOOR, MdnParams, mdn_log_density,
                             mdn_loss_and_grad, mdn_params_from_raw,
                             mdn_sample, raw_dim, split_raw)
from sbicover.nn.net import (init_mlp, mlp_backward, mlp_forward,
                             mlp_forward_cached, selu, selu_deriv)
from sbicover.nn.optim import AdamState, adamw_step
from sbicover.nn.train import (Standardizer, TrainConfig, TrainingError,
                               bce_loss_grad, split_train_val,
                               train_classifier, train_mdn)
from sbicover.rng import RngStream

SELU_SCALE = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772


def test_selu_values():
    z = np.array([-2.0, -1e-9, 0.0, 0.5, 3.0])
    want = SELU_SCALE * np.where(z > 0, z, SELU_ALPHA * np.expm1(z))
    assert np.allclose(selu(z), want, rtol=1e-15)
    assert selu(np.array([800.0]))[0] == SELU_SCALE * 800.0  # no overflow


def test_selu_deriv_matches_difference_quotient():
    z = np.linspace(-3.0, 3.0, 41)
    z = z[np.abs(z) > 1e-3]  # derivative jumps at 0
    num = (selu(z + 1e-6) - selu(z - 1e-6)) / 2e-6
    assert np.allclose(selu_deriv(z), num, atol=1e-6)


def test_init_mlp_shapes_and_scale():
    ws = init_mlp([7, 5, 2], RngStream(0).gen)
    assert [(w.shape, b.shape) for w, b in ws] == [((7, 5), (5,)), ((5, 2), (2,))]
    assert np.max(np.abs(ws[0][0])) <= 1.0 / np.sqrt(7)
    assert np.max(np.abs(ws[1][0])) <= 1.0 / np.sqrt(5)


def test_mlp_forward_by_hand():
    w0 = np.array([[0.5, -1.0], [2.0, 0.25]])
    b0 = np.array([0.1, -0.2])
    w1 = np.array([[1.5], [-0.5]])
    b1 = np.array([0.3])
    x = np.array([[1.0, -2.0]])
    pre = x @ w0 + b0
    hidden = SELU_SCALE * np.where(pre > 0, pre, SELU_ALPHA * np.expm1(pre))
    want = hidden @ w1 + b1
    got = mlp_forward([(w0, b0), (w1, b1)], x)
    assert np.allclose(got, want, atol=1e-12)


def test_mlp_backward_central_difference():
    gen = RngStream(1).gen
    x = gen.standard_normal((8, 3))
    y = (gen.random(8) < 0.5).astype(np.float64)
    ws = init_mlp([3, 4, 1], gen)

    def loss_of(ws_):
        out, cache = mlp_forward_cached(ws_, x)
        loss, dout = bce_loss_grad(out, y)
        return loss, mlp_backward(ws_, cache, dout)

    _, grads = loss_of(ws)
    eps = 1e-6
    for li in range(2):
        for ai in range(2):
            arr = ws[li][ai].ravel()
            ana = np.asarray(grads[li][ai]).ravel()
            for idx in (0, arr.size // 2, arr.size - 1):
                keep = arr[idx]
                arr[idx] = keep + eps
                up = loss_of(ws)[0]
                arr[idx] = keep - eps
                dn = loss_of(ws)[0]
                arr[idx] = keep
                num = (up - dn) / (2 * eps)
                assert num == pytest.approx(ana[idx], rel=1e-5, abs=1e-8)


def test_bce_loss_values():
    z = np.array([[0.0], [100.0], [-100.0]])
    y = np.array([1.0, 1.0, 0.0])
    loss, grad = bce_loss_grad(z, y)
    assert loss == pytest.approx(np.log(2.0) / 3.0, rel=1e-12)
    assert grad[0, 0] == pytest.approx((0.5 - 1.0) / 3.0, rel=1e-12)
    assert grad[1, 0] == pytest.approx(0.0, abs=1e-12)


def test_adamw_first_step_by_hand():
    w = np.array([[1.0]])
    b = np.array([0.5])
    grads = [(np.array([[0.2]]), np.array([0.0]))]
    state = AdamState([(w, b)])
    out = adamw_step([(w, b)], grads, state, lr=0.1, wd=0.01)
    # m_hat = g, v_hat = g^2: step = lr * g/(|g|+eps) + lr*wd*w
    assert out[0][0][0, 0] == pytest.approx(1.0 * 0.999 - 0.1, abs=1e-6)
    # zero gradient: only the decay acts
    assert out[0][1][0] == pytest.approx(0.5 * 0.999, rel=1e-12)
    assert state.t == 1


def test_adamw_rejects_nonfinite_gradients():
    w = [(np.ones((1, 1)), np.zeros(1))]
    state = AdamState(w)
    with pytest.raises(FloatingPointError):
        adamw_step(w, [(np.array([[np.nan]]), np.zeros(1))], state, 0.1, 0.0)


def test_standardizer():
    x = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
    norm = Standardizer.fit(x)
    z = norm.apply(x)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert z[:, 0].std() == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(z[:, 1], 0.0)  # constant column: floored std of 1
    assert np.allclose(norm.invert(z), x, atol=1e-12)


def test_split_train_val():
    assert split_train_val(100, 0.1) == (90, 10)
    assert split_train_val(9, 0.15) == (8, 1)
    with pytest.raises(TrainingError):
        split_train_val(5, 0.1)


def test_train_classifier_learns_separable_labels():
    gen = RngStream(2).gen
    n = 600
    x = gen.standard_normal((n, 2))
    y = (x[:, 0] + x[:, 1] > 0).astype(np.float64)
    cfg = TrainConfig(epochs=30, batch_size=64, hidden=(16, 16))
    ws, norm, history = train_classifier(x, y, cfg, RngStream(3))
    assert history["val"][-1] < history["val"][0]
    logits = mlp_forward(ws, norm.apply(x))[:, 0]
    acc = np.mean((logits > 0) == (y > 0.5))
    assert acc > 0.9
    assert history["best_epoch"] <= cfg.epochs


def test_train_classifier_validates_labels():
    with pytest.raises(ValueError):
        train_classifier(np.zeros((20, 1)), np.full(20, 0.5),
                         TrainConfig(epochs=1), RngStream(0))


def test_mdn_log_density_by_hand():
    params = MdnParams(log_weights=np.log([0.25, 0.75]),
                       means=np.array([[0.0, 0.0], [1.0, -1.0]]),
                       scales=np.array([[1.0, 2.0], [0.5, 0.5]]))
    theta = np.array([0.5, 0.0])
    comps = []
    for w, mu, sc in zip([0.25, 0.75], params.means, params.scales):
        z = (theta - mu) / sc
        comps.append(w * np.exp(-0.5 * z @ z) / (2 * np.pi * sc.prod()))
    want = np.log(sum(comps))
    assert mdn_log_density(params, theta) == pytest.approx(want, rel=1e-12)


def test_mdn_params_roundtrip_and_sampling():
    k, d = 3, 1
    raw = RngStream(4).gen.standard_normal(raw_dim(k, d))
    params = mdn_params_from_raw(raw, k, d)
    assert np.exp(params.log_weights).sum() == pytest.approx(1.0, rel=1e-12)
    assert np.all(params.scales > SCALE_FLOOR)
    logits, means, pres = split_raw(raw[None, :], k, d)
    assert np.allclose(params.means, means[0])
    s = mdn_sample(params, 60000, RngStream(5).gen)
    w = np.exp(params.log_weights)
    want_mean = float(w @ params.means[:, 0])
    want_var = float(w @ (params.scales[:, 0] ** 2 + params.means[:, 0] ** 2)
                     - want_mean ** 2)
    assert s.mean() == pytest.approx(want_mean, abs=0.02)
    assert s.var() == pytest.approx(want_var, rel=0.05)


def test_mdn_loss_grad_central_difference():
    gen = RngStream(6).gen
    k, d, b = 2, 2, 6
    raw = gen.standard_normal((b, raw_dim(k, d)))
    thetas = gen.standard_normal((b, d))
    loss, draw = mdn_loss_and_grad(raw, thetas, k)
    eps = 1e-6
    flat = raw.ravel()
    dflat = draw.ravel()
    for idx in range(0, flat.size, 7):
        keep = flat[idx]
        flat[idx] = keep + eps
        up = mdn_loss_and_grad(raw, thetas, k)[0]
        flat[idx] = keep - eps
        dn = mdn_loss_and_grad(raw, thetas, k)[0]
        flat[idx] = keep
        assert (up - dn) / (2 * eps) == pytest.approx(dflat[idx], rel=1e-4,
                                                      abs=1e-8)


def test_train_mdn_tracks_conditional_mean():
    gen = RngStream(7).gen
    n = 800
    x = gen.uniform(-1, 1, (n, 1))
    t = 2.0 * x + 0.1 * gen.standard_normal((n, 1))
    cfg = TrainConfig(epochs=40, batch_size=64, hidden=(16, 16))
    ws, f_norm, t_norm, history = train_mdn(x, t, 3, cfg, RngStream(8))
    assert history["val"][-1] < history["val"][0]
    raw = mlp_forward(ws, f_norm.apply(np.array([[0.5]])))[0]
    params = mdn_params_from_raw(raw, 3, 1)
    mean_std = float(np.exp(params.log_weights) @ params.means[:, 0])
    mean_nat = t_norm.invert(np.array([[mean_std]]))[0, 0]
    assert mean_nat == pytest.approx(1.0, abs=0.15)
