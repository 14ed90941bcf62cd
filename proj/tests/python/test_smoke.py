"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import tdhelm


def test_version():
    assert tdhelm.__version__ == "0.1.0"


def test_alpha_beta_frozen_values():
    a, b = tdhelm.alpha_beta(math.pi / 2)
    assert a == pytest.approx(math.pi**2 / 8, rel=1e-14)
    assert b == pytest.approx(math.pi / 2, rel=1e-14)
    a, b = tdhelm.alpha_beta(math.pi / 4)
    assert a == pytest.approx(1.0530292875455149, rel=1e-14)
    assert b == pytest.approx(1.1107207345395915, rel=1e-14)


def test_window_endpoints():
    assert tdhelm.window_value(0.25, 0.0) == 0.0
    assert tdhelm.window_value(0.25, 0.125) == pytest.approx(0.5, rel=1e-14)
    assert tdhelm.window_value(0.25, 0.5) == 1.0
    assert tdhelm.window_value(0.25, 1.0) == 1.0


def test_solve_dense_matches_numpy():
    rng = np.random.default_rng(7)
    n = 24
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    re = (q * np.linspace(-2.0, 3.0, n)) @ q.T
    re = 0.5 * (re + re.T)
    im = rng.uniform(0.3, 1.2, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    out = tdhelm.solve_dense(re, im, f, T=60, tol=1e-8, restart=20, max_cycles=40)
    assert out["converged"]
    x_ref = np.linalg.solve(re + 1j * np.diag(im), f)
    err = np.linalg.norm(out["solution"] - x_ref) / np.linalg.norm(x_ref)
    assert err <= 1e-6
    assert out["scheme"] == "acd"


def test_solve_dense_full_im_matrix():
    rng = np.random.default_rng(11)
    n = 16
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    re = (q * np.linspace(-1.5, 2.5, n)) @ q.T
    re = 0.5 * (re + re.T)
    qi, _ = np.linalg.qr(rng.standard_normal((n, n)))
    im = (qi * rng.uniform(0.2, 1.0, n)) @ qi.T
    im = 0.5 * (im + im.T)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    out = tdhelm.solve_dense(re, im, f, T=60, tol=1e-8, restart=16, max_cycles=40)
    assert out["converged"]
    assert out["scheme"] == "abd"
    x_ref = np.linalg.solve(re + 1j * im, f)
    err = np.linalg.norm(out["solution"] - x_ref) / np.linalg.norm(x_ref)
    assert err <= 1e-6


def test_solve_model_converges():
    out = tdhelm.solve_model(interior=16, layer_width=6, T=5, tol=1e-5,
                             max_cycles=20, reference=True)
    assert out["converged"]
    assert out["steps_per_period"] == 12
    n = out["npts"][0] * out["npts"][1]
    assert out["solution"].shape == (n,)
    assert out["true_error_history"][-1] <= 1e-3


def test_selfcheck_passes():
    ok, text = tdhelm.selfcheck()
    assert ok, text
