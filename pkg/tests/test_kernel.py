import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from distset import geometry as geo
from distset.kernel import (Exponential, IntrinsicVolumes, InvGaussian, Normal, intrinsic_volumes_l2_ball,
                            intrinsic_volumes_mc, intrinsic_volumes_point, log_distance_kernel, log_posterior,
                            log_prior, log_scaled_normalizer, normalizer_quadrature, shell_cdf,
                            steiner_normalizer, sample_prior, grad_log_prior, inv_gaussian_kernel)
from distset.models import DiskModel, Dataset

# scipy.integrate.quad of exp(-t^2/s) A(t) over [0, inf)
DISK_M = {0.25: 3.569562161813302, 1.0: 8.709920650421502, 4.0: 23.703026608022586}
DIAMOND_M = {0.25: 3.2920264380284485, 1.0: 8.154849202851794, 4.0: 22.59288371288318}
DIAMOND = IntrinsicVolumes(2, [1.0, 2.0 * math.sqrt(2.0)], volume=2.0)


def test_log_kernel_values():
    assert log_distance_kernel(0.0, 1.0) == 0.0
    assert log_distance_kernel(2.0, 1.0) == -4.0
    assert log_distance_kernel(1.0, 0.5) == -2.0
    with pytest.raises(ValueError):
        log_distance_kernel(1.0, 0.0)


@pytest.mark.parametrize("s", [0.25, 1.0, 4.0])
def test_steiner_sum_against_quadrature(s):
    disk = intrinsic_volumes_l2_ball(2, 1.0)
    assert steiner_normalizer(disk, s) == pytest.approx(DISK_M[s], rel=1e-10)
    assert steiner_normalizer(DIAMOND, s) == pytest.approx(DIAMOND_M[s], rel=1e-10)
    assert normalizer_quadrature(geo.L2Ball(np.zeros(2), 1.0), s) == pytest.approx(DISK_M[s], rel=1e-9)
    assert normalizer_quadrature(geo.L1Ball(np.zeros(2), 1.0), s) == pytest.approx(DIAMOND_M[s], rel=1e-9)


def test_closed_form_constants():
    assert DISK_M[1.0] == pytest.approx(math.pi + math.pi ** 1.5, rel=1e-12)
    assert DIAMOND_M[1.0] == pytest.approx(math.pi + 2 * math.sqrt(2) * math.sqrt(math.pi), rel=1e-12)


def test_point_set_normalizer():
    assert steiner_normalizer(intrinsic_volumes_point(2), 0.7) == pytest.approx(math.pi * 0.7)
    assert normalizer_quadrature(geo.Point(np.zeros(2)), 0.7) == pytest.approx(math.pi * 0.7, rel=1e-9)


def test_l2_ball_volumes():
    assert np.allclose(intrinsic_volumes_l2_ball(2).V, [1.0, math.pi])
    assert np.allclose(intrinsic_volumes_l2_ball(1).V, [1.0])
    assert intrinsic_volumes_l2_ball(3).V[1] == pytest.approx(4.0)


def test_scaled_family_identity():
    lhs = math.exp(log_scaled_normalizer(DIAMOND, 2.0, 0.5))
    assert lhs == pytest.approx(steiner_normalizer(DIAMOND.scaled(2.0), 0.5), rel=1e-12)
    assert math.exp(log_scaled_normalizer(DIAMOND, 1e-12, 0.5)) == pytest.approx(math.pi * 0.5, rel=1e-9)


def test_scaled_normalizer_gradients():
    V = intrinsic_volumes_l2_ball(3)
    r, s, h = 1.3, 0.8, 1e-6
    _, dlr, dls = log_scaled_normalizer(V, r, s, grad=True)
    fr = (log_scaled_normalizer(V, r * math.exp(h), s) - log_scaled_normalizer(V, r * math.exp(-h), s)) / (2 * h)
    fs = (log_scaled_normalizer(V, r, s * math.exp(h)) - log_scaled_normalizer(V, r, s * math.exp(-h))) / (2 * h)
    assert dlr == pytest.approx(fr, rel=1e-6) and dls == pytest.approx(fs, rel=1e-6)


@given(st.floats(0.05, 5.0), st.floats(0.05, 5.0), st.floats(1.01, 3.0))
def test_normalizer_nondecreasing_in_radius(r, s, f):
    assert log_scaled_normalizer(DIAMOND, r * f, s) >= log_scaled_normalizer(DIAMOND, r, s)


@given(st.floats(0.05, 5.0), st.floats(1.1, 4.0))
def test_point_normalizer_scaling_law(s, c):
    P = intrinsic_volumes_point(3)
    assert steiner_normalizer(P, c * c * s) == pytest.approx(c ** 3 * steiner_normalizer(P, s), rel=1e-12)


def test_mc_volumes_disk_quick():
    iv = intrinsic_volumes_mc(geo.L2Ball(np.zeros(2), 1.0), n_samples=200_000, seed=1)
    assert iv.V[0] == pytest.approx(1.0) and iv.V[1] == pytest.approx(math.pi, rel=0.05)


def test_mc_volumes_point():
    iv = intrinsic_volumes_mc(geo.Point(np.zeros(2)), n_samples=10_000)
    assert np.allclose(iv.V[1:], 0.0)


def test_shell_cdf_limits():
    B = geo.L2Ball(np.zeros(2), 1.0)
    F = shell_cdf(B, 1.0, [0.0, 1.0, 100.0])
    assert F[0] == 0.0 and 0 < F[1] < 1 and F[2] == pytest.approx(1.0, abs=1e-12)


def test_prior_values():
    assert inv_gaussian_kernel(1.0, 1.0, 1.0) == pytest.approx(-1.0)
    assert log_prior(Normal(0.0, 10.0), 0.0) == pytest.approx(-math.log(10 * math.sqrt(2 * math.pi)))
    assert log_prior(Exponential(1.0), 2.0) == pytest.approx(-2.0)
    assert log_prior(InvGaussian(1.0, 1.0), -1.0) == -math.inf


@pytest.mark.parametrize("spec", [Normal(0.5, 2.0), InvGaussian(1.0, 2.0), Exponential(1.5)])
def test_prior_gradient_and_sampler(spec, rng):
    x, h = 0.9, 1e-6
    fd = (log_prior(spec, x + h) - log_prior(spec, x - h)) / (2 * h)
    assert grad_log_prior(spec, x) == pytest.approx(fd, rel=1e-6)
    draws = sample_prior(spec, rng, 200_000)
    from scipy.integrate import quad
    lo = -np.inf if isinstance(spec, Normal) else 0.0
    mean = quad(lambda t: t * math.exp(log_prior(spec, t)), lo, np.inf)[0]
    assert draws.mean() == pytest.approx(mean, abs=0.02)


def two_point_disk():
    y = np.array([[2.0, 0.0], [0.0, 0.5]])
    return Dataset({"y": y, "center": np.zeros(2)})


def test_log_posterior_assembles_components():
    data = two_point_disk()
    model = DiskModel(data, sigma=1.0)
    r = 1.0
    # distances 1 and 0, m = pi + pi^1.5
    expected = log_prior(InvGaussian(1.0, 1.0), r) - 1.0 - 2.0 * math.log(math.pi + math.pi ** 1.5)
    assert log_posterior(model, {"r": r}) == pytest.approx(expected, rel=1e-12)


def test_log_posterior_with_no_data():
    model = DiskModel(Dataset({"y": np.zeros((0, 2)), "center": np.zeros(2)}), sigma=1.0, R_max=5.0)
    assert log_posterior(model, {"r": 0.7}) == pytest.approx(log_prior(InvGaussian(1.0, 1.0), 0.7))
