"""Release acceptance suite: one test and one summary line per criterion."""
import math
import time

import numpy as np
import pytest
from scipy.stats import kstest

from distset import checks, geometry as geo
from distset.dual import danskin_grad, dual_from_projection, finite_diff_check
from distset.kernel import (IntrinsicVolumes, intrinsic_volumes_l2_ball, intrinsic_volumes_mc,
                            normalizer_quadrature, shell_cdf, steiner_normalizer)
from distset.models import (MultiEnvModel, SparseMixedEffects, TransferModel, cv_harness, generate, ols,
                            source_posterior)
from distset.samplers import ChainConfig, Target, mcse, predictive_sample, run_chain

pytestmark = pytest.mark.slow


def timed(fn, *a, **k):
    t0 = time.perf_counter()
    out = fn(*a, **k)
    return out, time.perf_counter() - t0


def test_c01_projection_oracles(criterion):
    (ok, worst, tol, detail), sec = timed(checks.suite_projection, n_instances=100)
    passed = ok and sec < 120
    criterion(1, passed, f"worst positional error {worst:.2e} (tol {tol:g}); {detail}; {sec:.0f}s (< 120s)")
    assert passed


def test_c02_steiner_equals_quadrature(criterion):
    ok, worst, tol, _ = checks.suite_steiner()
    disk = steiner_normalizer(intrinsic_volumes_l2_ball(2), 1.0)
    diamond = steiner_normalizer(IntrinsicVolumes(2, [1.0, 2 * math.sqrt(2)], volume=2.0), 1.0)
    vals = abs(disk - 8.70992) < 1e-5 and abs(diamond - 8.15485) < 1e-5
    passed = ok and vals
    criterion(2, passed, f"max relative gap {worst:.1e} over sigma in {{0.25,1,4}}; m_disk={disk:.5f}, m_diamond={diamond:.5f}")
    assert passed


def test_c03_mc_intrinsic_volumes(criterion):
    disk = intrinsic_volumes_mc(geo.L2Ball(np.zeros(2), 1.0), n_samples=10 ** 6, seed=0)
    diamond = intrinsic_volumes_mc(geo.L1Ball(np.zeros(2), 1.0), n_samples=10 ** 6, seed=0)
    e1 = abs(disk.V[1] / math.pi - 1)
    e2 = abs(diamond.V[1] / (2 * math.sqrt(2)) - 1)
    passed = e1 < 0.02 and e2 < 0.02 and disk.V[0] == 1.0 and diamond.V[0] == 1.0
    criterion(3, passed, f"disk V1={disk.V[1]:.4f} ({e1:.2%}), diamond V1={diamond.V[1]:.4f} ({e2:.2%}) at 1e6 samples")
    assert passed


def test_c04_danskin_gradients(criterion):
    ok, worst, tol, _ = checks.suite_gradients(n_instances=100)
    # ellipsoid level gradient: -q / sqrt(r q) matches finite differences, the doubled value does not
    rng = np.random.default_rng(40)
    worst_fd, worst_alt = 0.0, math.inf
    for _ in range(20):
        S = checks.random_set("ellipsoid", rng, 3)
        y = S.center + 4.0 * rng.normal(size=3)
        if geo.contains(S, y):
            continue
        g = danskin_grad(S, y, dual_from_projection(S, y))
        f = lambda r: geo.project(geo.with_radius(S, float(r)), y).distance ** 2
        worst_fd = max(worst_fd, finite_diff_check(f, g, S.level, h=1e-6))
        worst_alt = min(worst_alt, finite_diff_check(f, 2 * g, S.level, h=1e-6))
    passed = ok and worst_fd < 1e-3 and worst_alt > 1e-2
    criterion(4, passed, f"max relative error {worst:.1e} over 5 families x 100; level gradient fd error {worst_fd:.1e}, "
                         f"doubled factor error >= {worst_alt:.2f}")
    assert passed


def test_c05_duality_gap(criterion):
    ok, worst, tol, _ = checks.suite_duality(n_instances=50)
    criterion(5, ok, f"max gap {worst:.1e} over 50 instances, d in 2..10, eps=1e-10 (tol {tol:g})")
    assert ok


def test_c06_translation_equivariance(criterion):
    ok, worst, tol, _ = checks.suite_translation(n_shifts=50)
    criterion(6, ok, f"max deviation {worst:.1e} under 50 shifts for every set family (tol {tol:g})")
    assert ok


def gaussian_target(cov):
    P = np.linalg.inv(cov)
    d = cov.shape[0]
    return Target(lambda x: -0.5 * float(x @ P @ x), d, value_and_grad=lambda x: (-0.5 * float(x @ P @ x), -P @ x))


def moment_z(draws, cov):
    """Largest |error| / MCSE over first and second moments."""
    zs = []
    d = cov.shape[0]
    for i in range(d):
        zs.append(abs(draws[:, i].mean()) / mcse(draws[:, i]))
        for j in range(i, d):
            f = draws[:, i] * draws[:, j]
            zs.append(abs(f.mean() - cov[i, j]) / mcse(f))
    return max(zs)


def test_c07_sampler_correctness(criterion):
    cases = {"N(0,1)": np.eye(1), "correlated 2-d": np.array([[1.0, 0.8], [0.8, 1.0]])}
    lines, passed = [], True
    for kernel in ("rwmh", "barker"):
        for name, cov in cases.items():
            tr, sec = timed(run_chain, gaussian_target(cov), ChainConfig(n_iter=55_000, burn_in=5_000, seed=7), kernel)
            z = moment_z(tr.draws, cov)
            passed &= z <= 3.0 and sec < 60
            lines.append(f"{kernel}/{name} z={z:.2f} {sec:.0f}s")
    criterion(7, passed, "; ".join(lines) + " (z = |error| / MCSE, need <= 3)")
    assert passed


def test_c08_ppp_matches_exact(criterion):
    (ok, z, tol, _), sec = timed(checks.suite_ppp, n_iter=200_000)
    passed = ok and sec < 300
    criterion(8, passed, f"r mean/sd difference = {z:.2f} combined MCSE (need <= 3); {sec:.0f}s (< 300s)")
    assert passed


def test_c09_predictive_shell(criterion):
    S = geo.L2Ball(np.zeros(2), 1.0)
    dr = predictive_sample(S, 1.0, 10_000, rng=np.random.default_rng(9))
    d = geo.batch_distance(S, dr.y)
    frac = float(np.mean((d > 0) & (d <= np.sqrt(dr.u))))
    p = kstest(d ** 2, lambda s: shell_cdf(S, 1.0, s)).pvalue
    passed = frac == 1.0 and p > 0.01
    criterion(9, passed, f"shell satisfaction {frac:.0%}; KS p={p:.3f} on 1e4 draws (need > 0.01)")
    assert passed


def test_c10_mixed_effects_desk(criterion):
    t0 = time.perf_counter()
    data = generate("mixed-effects-desk", seed=0)
    model = SparseMixedEffects(data)
    tr = run_chain(model, ChainConfig(n_iter=20_000, burn_in=10_000, seed=0), "barker")
    mu = tr.draws[:, model.blocks["mu"]]
    truth = np.array(data.meta["mu"])
    z = np.abs(mu.mean(axis=0) - truth) / mu.std(axis=0, ddof=1)
    G = np.mean([np.abs(model.latent(x)) for x in tr.draws[::20]], axis=0)
    nonzero = np.any(np.array(data.meta["gamma"]) != 0, axis=0)
    g_on, g_off = G[:, nonzero].mean(), G[:, ~nonzero].mean()
    acc = tr.acceptance_rate()
    sec = time.perf_counter() - t0
    ok_mu, ok_g, ok_acc = bool(np.all(z <= 3.0)), g_on > g_off, 0.15 <= acc <= 0.6
    passed = ok_mu and ok_g and ok_acc and sec < 300
    criterion(10, passed, f"max |mu error|/sd = {z.max():.2f} (coord {int(z.argmax())}, need <= 3: "
                          f"{'ok' if ok_mu else 'FAIL'}); |gamma| on/off = {g_on:.2f}/{g_off:.2f}; "
                          f"acceptance {acc:.2f}; {sec:.0f}s")
    assert passed


def test_c11_multienv_sparsity_tracking(criterion):
    t0 = time.perf_counter()
    med = {}
    for pct in (10, 50, 90):
        m = MultiEnvModel(generate(f"multienv-sparsity-{pct}", seed=0))
        tr = run_chain(m, ChainConfig(n_iter=20_000, burn_in=10_000, seed=0), "rwmh")
        med[pct] = float(np.median(tr.derived["r"]))
    sec = time.perf_counter() - t0
    passed = med[10] > med[50] > med[90] and sec < 600
    criterion(11, passed, "median r at sparsity 10/50/90% = " + "/".join(f"{med[p]:.2f}" for p in (10, 50, 90))
              + f"; {sec:.0f}s (< 600s)")
    assert passed


def test_c12_reverse_transfer_immunity(criterion):
    data = generate("transfer-alpha-8.0", seed=0)
    model = TransferModel(data, fixed_r=0.001)
    tr = run_chain(model, ChainConfig(n_iter=20_000, burn_in=5_000, seed=0), "rwmh")
    bS = tr.draws[:, model.blocks["beta_S"]].mean(axis=0)
    ref = source_posterior(data["X_source"], data["y_source"], model.sigma_s)[0]
    gap = float(np.abs(bS - ref).max())
    # lambda -> infinity: the deviation is X_T'e / lambda to first order, so the bound scales with ||X_T'y_T||
    b0 = ols(data["X_source"], data["y_source"])
    lim = float(np.linalg.norm(model.ridge(b0, 1e8)[0] - b0))
    scale = float(np.linalg.norm(data["X_target"].T @ data["y_target"]))
    passed = gap <= 0.05 and lim < 1e-6 * scale
    criterion(12, passed, f"max |beta_S - source-only| = {gap:.3f} (need <= 0.05); ||beta_T - beta_S|| at lambda=1e8 "
                          f"= {lim:.2e} < 1e-6 * ||X_T'y_T|| = {1e-6 * scale:.2e}")
    assert passed


def transfer_fit(alpha):
    data = generate(f"transfer-alpha-{alpha}", seed=0)
    model = TransferModel(data)
    tr = run_chain(model, ChainConfig(n_iter=20_000, burn_in=10_000, seed=0), "rwmh")
    bT = np.column_stack([tr.derived[f"beta_T[{j}]"] for j in range(model.p)]).mean(axis=0)
    d_src = float(np.linalg.norm(bT - ols(data["X_source"], data["y_source"])))
    d_tgt = float(np.linalg.norm(bT - ols(data["X_target"], data["y_target"])))
    return d_src, d_tgt


def test_c13_transfer_regimes(criterion):
    s_lo, t_lo = transfer_fit("0.05")
    s_hi, t_hi = transfer_fit("8.0")
    passed = s_lo < t_lo and t_hi < s_hi
    criterion(13, passed, f"alpha=0.05: dist to source/target OLS {s_lo:.3f}/{t_lo:.3f}; "
                          f"alpha=8: {s_hi:.3f}/{t_hi:.3f}")
    assert passed


def test_c14_cv_harness(criterion):
    data = generate("transfer-alpha-8.0", seed=0)
    res = cv_harness(data, k_folds=5, seed=0)
    dts, tgt, full = res.mean("dts"), res.mean("ols_target"), res.mean("full_transfer")
    passed = full > tgt and abs(dts - tgt) <= 0.15 * tgt
    criterion(14, passed, f"RMSE dts {dts:.3f}, ols_target {tgt:.3f}, full_transfer {full:.3f} "
                          f"(dts within {abs(dts - tgt) / tgt:.1%} of ols_target, need <= 15%)")
    assert passed
