import math

import numpy as np
import pytest

import nolab


def test_grf_shape_and_determinism():
    a = nolab.sample_grf(dim=1, n=64, seed=3)
    b = nolab.sample_grf(dim=1, n=64, seed=3)
    assert a.shape == (1, 64)
    np.testing.assert_array_equal(a, b)
    c = nolab.sample_grf(dim=2, n=16, seed=4, channels=2)
    assert c.shape == (2, 16, 16)
    assert np.isfinite(c).all()


def test_norms_on_a_pure_mode():
    n = 64
    x = np.arange(n) / n
    s = np.sin(2 * np.pi * x)[None, :]
    assert nolab.l2_norm(s) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    expected = math.sqrt((1 + 4 * math.pi**2) / 2)
    assert nolab.hs_norm(s, 1.0) == pytest.approx(expected, rel=1e-12)
    assert nolab.linf_norm(s) == pytest.approx(1.0, rel=1e-12)


def test_target_oracle():
    n = 64
    x = np.arange(n) / n
    s = np.sin(2 * np.pi * x)[None, :]
    out = nolab.apply_target("bessel_inverse", s)
    np.testing.assert_allclose(out, s / (1 + 4 * math.pi**2), atol=1e-12)


def test_resample_round_trip():
    f = nolab.sample_grf(dim=1, n=16, seed=9)
    up = nolab.resample(f, 64)
    back = nolab.resample(up, 16)
    np.testing.assert_allclose(back, f, atol=1e-12)


def test_operator_forward_and_certificate():
    op = nolab.Operator.build(dim=1, n=32, d_v=4, layers=2, k_max=4, seed=7)
    cert = op.lipschitz()
    assert cert["product"] > 0
    u = nolab.sample_grf(dim=1, n=32, seed=8)
    v = nolab.sample_grf(dim=1, n=32, seed=9)
    num = nolab.l2_norm(op(u) - op(v))
    den = nolab.l2_norm(u - v)
    assert num <= cert["product"] * den * (1 + 1e-9)


def test_contraction_fixed_point():
    op = nolab.Operator.build(dim=1, n=32, d_v=4, layers=2, k_max=4, seed=7)
    contraction = op.rescaled(0.5)
    assert contraction.lipschitz()["product"] <= 0.5 * (1 + 1e-12)
    u0 = nolab.sample_grf(dim=1, n=32, seed=10)
    star, converged, iters = contraction.fixed_point(u0, tol=1e-10)
    assert converged and iters > 0
    residual = nolab.l2_norm(contraction(star) - star)
    assert residual <= 1e-9


def test_checkpoint_round_trip(tmp_path):
    op = nolab.Operator.build(dim=1, n=16, d_v=2, layers=1, k_max=2, seed=5)
    path = str(tmp_path / "op.bin")
    op.save(path)
    loaded = nolab.Operator.load(path)
    assert loaded.parameters() == op.parameters()
    u = nolab.sample_grf(dim=1, n=16, seed=6)
    np.testing.assert_array_equal(op(u), loaded(u))


def test_training_reduces_error():
    n = 32
    inputs = [nolab.sample_grf(dim=1, n=n, seed=100 + i) for i in range(16)]
    targets = [nolab.apply_target("bessel_inverse", u) for u in inputs]
    op = nolab.Operator.build(
        dim=1, n=n, d_v=1, layers=1, k_max=8, activation="identity", seed=11
    )
    fitted, history, diverged = nolab.fit(
        op, inputs, targets, steps=400, batch_size=8, lr=1e-2, seed=12
    )
    assert not diverged
    assert history[-1] < 0.05 * history[0]
