"""Oracle suites behind ``distset check``.

Every suite returns a SuiteResult; ``faults`` lets a test inject a known
defect (for instance a wrong Steiner coefficient) to prove the suite bites.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import oracles
from .dual import danskin_grad, dual_from_projection, duality_gap, finite_diff_check, solve_dual_ellipsoid_affine
from .kernel import IntrinsicVolumes, intrinsic_volumes_l2_ball, normalizer_quadrature, steiner_normalizer

KNOWN_FAULTS = {"steiner-coefficient", "danskin-factor"}


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float
    detail: str = ""


def random_spd(rng, d, floor=0.3):
    M = rng.normal(size=(d, d))
    return M @ M.T / d + floor * np.eye(d)


def random_set(family, rng, d):
    c = rng.normal(size=d)
    if family == "l1":
        return geo.L1Ball(c, rng.uniform(0.3, 2.0))
    if family == "l2":
        return geo.L2Ball(c, rng.uniform(0.3, 2.0))
    if family == "ellipsoid":
        return geo.Ellipsoid(random_spd(rng, d), rng.uniform(0.3, 2.0), c)
    if family == "ellipsoid-affine":
        m = int(rng.integers(1, d + 2))
        return geo.EllipsoidAffine(random_spd(rng, d), rng.uniform(0.5, 2.0), rng.normal(size=(m, d)),
                                   rng.uniform(0.0, 0.5, m), c)
    if family == "multienv":
        n = d + 2
        group = rng.integers(0, d, n)
        treated = (rng.uniform(size=n) < 0.7).astype(float)
        treated[: min(d, n)] = 1.0
        group[:d] = np.arange(d)
        return geo.MultiEnvDeviation(rng.normal(size=n), group, treated, rng.uniform(0.3, 2.0), n_groups=d)
    if family == "point":
        return geo.Point(c)
    raise ValueError(family)


FAMILIES = ("l1", "l2", "ellipsoid", "ellipsoid-affine", "multienv")


def suite_projection(n_instances=100, seed=0, faults=()):
    """Closed-form / dual projections against brute-force oracles in d <= 3."""
    rng = np.random.default_rng(seed)
    worst_z = worst_d = 0.0
    for fam in FAMILIES:
        for _ in range(n_instances):
            d = int(rng.integers(1, 4))
            S = random_set(fam, rng, d)
            y = geo.anchor(S) + 2.0 * rng.normal(size=S.dim)
            p = geo.project(S, y)
            z, dist = oracles.oracle_project(S, y)
            worst_z = max(worst_z, float(np.abs(z - p.z_hat).max()))
            worst_d = max(worst_d, abs(dist - p.distance))
    ok = worst_z <= 1e-3 and worst_d <= 1e-4
    return ok, worst_z, 1e-3, f"worst distance error {worst_d:.2e} (tol 1e-4)"


SIGMAS = (0.25, 1.0, 4.0)


def unit_diamond_volumes():
    return IntrinsicVolumes(2, [1.0, 2.0 * math.sqrt(2.0)], "exact", volume=2.0)


def suite_steiner(faults=()):
    """Steiner-sum normalizer against quadrature of the tube boundary area."""
    cases = [(geo.L2Ball(np.zeros(2), 1.0), intrinsic_volumes_l2_ball(2, 1.0)),
             (geo.L1Ball(np.zeros(2), 1.0), unit_diamond_volumes())]
    worst = 0.0
    for set_, iv in cases:
        if "steiner-coefficient" in faults:
            V = iv.V.copy()
            V[1] *= 1.05
            iv = IntrinsicVolumes(iv.dim, V, iv.source, volume=iv.volume)
        for s in SIGMAS:
            a = steiner_normalizer(iv, s)
            b = normalizer_quadrature(set_, s)
            worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-6, worst, 1e-6, ""


def suite_duality(n_instances=50, seed=1, faults=()):
    """Duality gap of the ellipsoid-with-halfspaces dual against an independent primal solve."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        d = int(rng.integers(2, 11))
        S = random_set("ellipsoid-affine", rng, d)
        y = S.center + 3.0 * rng.normal(size=d)
        sol = solve_dual_ellipsoid_affine(y, set_=S, eps=1e-10)
        worst = max(worst, duality_gap(S, y, sol))
    return worst <= 1e-4, worst, 1e-4, ""


def _dist2(S, y):
    # finite differences of a dual solution need a solve far tighter than the step
    opts = {"tol": 1e-13} if isinstance(S, geo.EllipsoidAffine) else {}
    return geo.project(S, y, **opts).distance ** 2


def suite_gradients(n_instances=100, seed=2, faults=()):
    """Danskin radius gradients of dist^2 against central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    scale = 2.0 if "danskin-factor" in faults else 1.0
    for fam in FAMILIES:
        done = 0
        while done < n_instances:
            d = int(rng.integers(1, 4)) if fam != "ellipsoid-affine" else int(rng.integers(2, 5))
            S = random_set(fam, rng, d)
            y = geo.anchor(S) + 3.0 * rng.normal(size=S.dim)
            if geo.contains(S, y):
                continue
            dual = dual_from_projection(S, y)
            g = scale * danskin_grad(S, y, dual, wrt="radius")
            r0 = S.level if isinstance(S, (geo.Ellipsoid, geo.EllipsoidAffine)) else S.radius
            h = 1e-4 * max(1.0, r0)
            f = lambda r: _dist2(geo.with_radius(S, float(r)), y)
            worst = max(worst, finite_diff_check(f, g, r0, h=h))
            done += 1
    return worst <= 1e-3, worst, 1e-3, ""


def suite_translation(n_shifts=50, seed=3, faults=()):
    """dist(y + s, Z + s) = dist(y, Z) and z_hat shifts with the set."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for fam in FAMILIES + ("point",):
        S = random_set(fam, rng, 3)
        y = geo.anchor(S) + 2.0 * rng.normal(size=S.dim)
        p = geo.project(S, y, tol=1e-12) if isinstance(S, geo.EllipsoidAffine) else geo.project(S, y)
        for _ in range(n_shifts):
            s = 5.0 * rng.normal(size=S.dim)
            St = geo.translate(S, s)
            q = geo.project(St, y + s, tol=1e-12) if isinstance(S, geo.EllipsoidAffine) else geo.project(St, y + s)
            worst = max(worst, abs(q.distance - p.distance), float(np.abs(q.z_hat - s - p.z_hat).max()))
    return worst <= 1e-10, worst, 1e-10, ""


def suite_ppp(n_iter=60_000, seed=4, faults=()):
    """PPP-augmented chain against the exact-normalizer chain on the disk model."""
    from .models.disk import DiskModel, generate_disk
    from .samplers import ChainConfig, PPPDomain, ess, run_chain, run_ppp_chain
    data = generate_disk(n=50, d=2, r=1.0, sigma=1.0, seed=seed)
    exact = DiskModel(data, sigma=1.0, R_max=3.0)
    tr_e = run_chain(exact, ChainConfig(n_iter=20_000, burn_in=5_000, seed=seed), "rwmh")
    ppp_model = DiskModel(data, sigma=1.0, R_max=3.0, normalizer="ppp")
    dom = PPPDomain(np.zeros(2), 3.0, 1.0)
    tr_p = run_ppp_chain(ppp_model, dom, n_iter, n_iter // 5, seed=seed)
    re, rp = np.exp(tr_e.draws[:, 0]), np.exp(tr_p.draws[:, 0])
    z = compare_moments(re, rp)
    return z <= 3.0, z, 3.0, "max |difference| / combined MCSE over mean and sd"


def mean_sd_mcse(x):
    """MCSE of the mean and of the sd (delta method on the ESS of squared deviations)."""
    from .samplers import ess
    x = np.asarray(x, float)
    sd = x.std(ddof=1)
    m_se = sd / math.sqrt(ess(x))
    sq = (x - x.mean()) ** 2
    v_se = sq.std(ddof=1) / math.sqrt(ess(sq))
    return m_se, v_se / (2.0 * sd)


def compare_moments(a, b):
    """Largest of |mean diff| and |sd diff| in units of the combined MCSE."""
    ma, sa = mean_sd_mcse(a)
    mb, sb = mean_sd_mcse(b)
    zm = abs(a.mean() - b.mean()) / math.hypot(ma, mb)
    zs = abs(a.std(ddof=1) - b.std(ddof=1)) / math.hypot(sa, sb)
    return float(max(zm, zs))


SUITES = {
    "projection-oracles": suite_projection,
    "steiner-quadrature": suite_steiner,
    "duality-gap": suite_duality,
    "danskin-gradients": suite_gradients,
    "translation": suite_translation,
    "ppp-vs-exact": suite_ppp,
}


def run_checks(names=None, faults=(), quick=False):
    """Run the named suites (all by default); returns SuiteResults in order."""
    unknown = set(faults) - KNOWN_FAULTS
    if unknown:
        raise ValueError(f"unknown faults {sorted(unknown)}")
    names = list(SUITES) if names is None else list(names)
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        kw = {"faults": tuple(faults)}
        if quick and name == "projection-oracles":
            kw["n_instances"] = 20
        if quick and name == "ppp-vs-exact":
            kw["n_iter"] = 30_000
        t0 = time.perf_counter()
        try:
            ok, worst, tol, detail = SUITES[name](**kw)
        except Exception as exc:  # a crashing suite is a failing suite
            ok, worst, tol, detail = False, float("nan"), float("nan"), f"error: {exc!r}"
        out.append(SuiteResult(name, bool(ok), float(worst), float(tol), time.perf_counter() - t0, detail))
    return out


def format_table(results):
    lines = [f"{'suite':<22} {'status':<6} {'worst':>11} {'tol':>9} {'sec':>7}  detail"]
    for r in results:
        lines.append(f"{r.name:<22} {'PASS' if r.passed else 'FAIL':<6} {r.worst:>11.3e} {r.tolerance:>9.1e} "
                     f"{r.seconds:>7.1f}  {r.detail}")
    return "\n".join(lines)
