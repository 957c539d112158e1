"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The tests are slow (minutes in total).  Tolerances are the contractual ones;
where a criterion fails the report line carries the measured values.
"""

import json
import time

import numpy as np
import pytest

from coronalab.ball import automorphism, inner, norm2
from coronalab.carleson import carleson_stability, mu_g_theta, power_density
from coronalab.cli import main as cli_main
from coronalab.corona import (
    CoronaProblem, corona_data, delta, koszul_solve, sample_points, standard_generators, t2_solve,
    verify_solution,
)
from coronalab.fields import (
    CauchyKernelField, PolyHolo, SmoothField, d_tangential, dbar_fd, radial,
)
from coronalab.kernels import (
    LParams, SolverRule, calibrate, calibration_points, dbar_residual, kernel_type, phi,
    phi_difference, standard_test_forms, type_exponent,
)
from coronalab.quad import ball_rule, sphere_rule
from coronalab.spaces import (
    HardyNormParams, MorreyParams, fit_growth_exponent, focused_sphere_rule, geometric_radii,
    hardy_norm, maximal_admissible, morrey_balls, morrey_norm, test_function as cauchy_family,
)
from coronalab.weights import Weight, ap_values, average_batch, ball_mass, boundary_samples, doubling

e1 = np.array([1.0, 0.0], complex)
e2 = np.array([0.0, 1.0], complex)
ZETA = np.array([0.6, 0.8j])
RULE = SolverRule(6, 12)


@pytest.fixture(scope="module")
def c3():
    """n = 2, N = 3 constants calibrated on the standard test forms."""
    return calibrate(3.0, 2, standard_test_forms(2), calibration_points(2), RULE)


def _problem(f, constants, rule=RULE, m=2, inner_rule=None):
    return CoronaProblem(standard_generators(m), PolyHolo.parse(f, 2), 2, N=3.0, rule=rule,
                         inner_rule=inner_rule, constants=constants)


# ---------------------------------------------------------------- corona solutions


def test_01_exact_reproduction(report, c3):
    rule = SolverRule(6, 8)
    nodes = len(rule.sphere(2)) * rule.radial
    pts = sample_points(2, 50, 0.9, seed=1)
    t0 = time.perf_counter()
    worst = 0.0
    for f in ("1", "z1"):
        prob = _problem(f, c3, rule)
        F = koszul_solve(prob, pts)
        g = np.stack([gj(pts) for gj in prob.g], axis=-1)
        worst = max(worst, float(np.max(np.abs(np.sum(g * F, axis=-1) - prob.f(pts)))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 60
    assert report(1, ok, f"max residual {worst:.2e}, {nodes} nodes per target, {dt:.1f}s")


def test_02_holomorphy(report, c3):
    pts = sample_points(2, 20, 0.7, seed=2)
    t0 = time.perf_counter()
    worst = 0.0
    for f in ("1", "z1"):
        prob = _problem(f, c3)
        rep = verify_solution(prob, lambda z, p=prob: koszul_solve(p, z), pts)
        worst = max(worst, float(np.max(rep.dbar)))
    dt = time.perf_counter() - t0
    ok = worst <= 5e-2 and dt < 300
    assert report(2, ok, f"max FD dbar {worst:.2e}, {dt:.1f}s")


def test_03_dbar_reproduction(report, c3):
    c1 = calibrate(1.0, 1, standard_test_forms(1), rule=RULE)
    pts = np.array([[0.2 + 0.1j], [-0.5j], [0.4], [-0.3 - 0.3j], [0.6 + 0.2j]])
    eta = lambda p: np.conj(p) ** 2
    res = float(np.max(dbar_residual(c1, 0, eta, pts, RULE)))
    # Cauchy-Pompeiu on the disc: for eta = zbar^2 the boundary term vanishes and u = zbar^3 / 3
    oracle = SmoothField(lambda p: np.conj(p[..., 0]) ** 3 / 3, 1)
    oracle_res = float(np.max(np.abs(dbar_fd(oracle, pts)[:, 0] - eta(pts)[:, 0])))
    ok1 = res <= 5e-2 and oracle_res <= 1e-8

    def held(p):
        out = np.zeros(p.shape, dtype=complex)
        out[..., 1] = p[..., 0] ** 2
        return out

    pts2 = sample_points(2, 10, 0.7, seed=3)
    res2 = float(np.max(dbar_residual(c3, 0, held, pts2, RULE)))
    ok = ok1 and res2 <= 5e-2
    assert report(3, ok, f"n=1 residual {res:.2e} (oracle {oracle_res:.1e}), "
                         f"n=2 held-out residual {res2:.2e}")


def test_04_koszul_specialization(report, c3):
    pts = sample_points(2, 20, 0.8, seed=4)
    worst = 0.0
    for f in ("1", "z1", "z1*z2 + 2"):
        prob = _problem(f, c3)
        worst = max(worst, float(np.max(np.abs(koszul_solve(prob, pts) - t2_solve(prob, pts)))))
    assert report(4, worst <= 1e-10, f"max |Koszul - T2| {worst:.2e}")


def test_05_three_generators(report):
    rule, inner_rule = SolverRule(4, 8), SolverRule(3, 6)
    c = calibrate(3.0, 2, standard_test_forms(2), calibration_points(2), rule)
    prob = _problem("1", c, rule, m=3, inner_rule=inner_rule)
    pts = sample_points(2, 20, 0.7, seed=5)
    t0 = time.perf_counter()
    F = koszul_solve(prob, pts)
    dt = time.perf_counter() - t0
    g = np.stack([gj(pts) for gj in prob.g], axis=-1)
    res = float(np.max(np.abs(np.sum(g * F, axis=-1) - 1.0)))
    ok = res <= 5e-2 and dt < 1800
    assert report(5, ok, f"max residual {res:.2e}, {dt:.0f}s")


# ---------------------------------------------------------------- kernels and weights


def test_06_kernel_type(report):
    deltas = [1e-4, 1e-5, 1e-6, 1e-7]
    lines, ok = [], True
    for N, M, L in [(1, 4, 0), (2, 5, 0), (2, 3, 0), (3, 4, 0)]:
        prm = LParams(N, M, L)
        kappa = kernel_type(prm, 2)
        e = type_exponent(prm, 2, deltas)
        # bounded kernels (positive type) are fitted through |I(z) - I(zeta)|
        good = abs(e - kappa) <= 0.15
        ok &= good
        lines.append(f"({N},{M},{L}) type {kappa:+.0f} fit {e:+.3f}")
    assert report(6, ok, ", ".join(lines))


def _ap_curve(theta, p, depths=(20, 40, 60)):
    samples = boundary_samples(2, e1, depths=(1, 2, 3, 4), count=2, seed=7)
    vals = [ap_values(theta, p, samples, d) for d in depths]
    return [float(np.max(v)) for v in vals], float(min(np.min(v) for v in vals))


def test_07_ap_suite(report):
    lines, ok = [], True
    one = Weight.constant(2)
    samples = boundary_samples(2, e1, depths=(1, 2, 3, 4), count=4)
    for p in (1.5, 2.0, 3.0):
        c = float(np.max(np.abs(ap_values(one, p, samples) - 1.0)))
        ok &= c <= 1e-6
    lines.append("constant weight within 1e-6" if ok else "constant weight off")
    floor = np.inf
    for p in (1.5, 2.0, 3.0):
        hi = 2 * (p - 1)
        inside = [-1.5, 0.5 * hi, hi - 0.5]
        outside = [-2.5, hi + 0.5]
        for a in inside + outside:
            curve, lo = _ap_curve(Weight.power(a, e1), p)
            floor = min(floor, lo)
            if a in inside:
                good = curve[2] <= 1.05 * curve[1]
            else:
                good = curve[2] >= 10 * curve[0]
            ok &= good
            if not good:
                lines.append(f"p={p} a={a}: {curve}")
    ok &= floor >= 1 - 1e-6
    th = Weight.power(0.7, e1)
    z = np.concatenate([sphere_rule(2, 6).nodes, [e1 * 0.5 + e2 * 0.5]])
    z = z / np.linalg.norm(z, axis=1, keepdims=True)
    dual_err = float(np.max(np.abs(th.power_dual(2.0)(z) * th(z) - 1.0)))
    ok &= dual_err <= 1e-12
    lines.append(f"Holder floor {floor:.8f}, dual error {dual_err:.1e}")
    assert report(7, ok, "; ".join(lines))


def test_08_doubling(report):
    radii = 2.0 ** -np.arange(3, 10)
    lam1 = doubling(Weight.constant(2), [(ZETA, radii)]).lam
    ok = abs(lam1 - 2) <= 0.1
    lines = [f"constant {lam1:.3f}"]
    for a in (-1.5, -0.5, 0.5, 1.5):
        lam = doubling(Weight.power(a, ZETA), [(ZETA, radii)]).lam
        good = abs(lam - (2 + a)) <= 0.15
        # A_p is finite for a in (-n, n(p-1)); check lambda < np + 0.2 for each such p
        for p in (1.5, 2.0, 3.0):
            if -2 < a < 2 * (p - 1):
                good &= lam < 2 * p + 0.2
        ok &= good
        lines.append(f"a={a} {lam:.3f}")
    assert report(8, ok, ", ".join(lines))


# ---------------------------------------------------------------- Carleson measures


def test_09_carleson_suite(report):
    one = Weight.constant(2)
    lines, ok = [], True
    for t in (0.0, 0.5, 1.0, -0.5):
        rep = carleson_stability(power_density(t, 2), one, depth=16, extra=16)
        good = rep.divergent() if t < 0 else rep.stable()
        ok &= good
        lines.append(f"t={t}: radial x{rep.radial_growth:.2f}, refinement +{rep.refinement_growth:.3f}"
                     + ("" if good else " [unexpected]"))
    th = Weight.power(0.5, e1)
    mu = mu_g_theta(standard_generators(2), th)
    rep = carleson_stability(mu, th, zeta=ZETA, depth=12, extra=8, order=4, n_psi=6, n_xi=4)
    ok &= rep.stable()
    lines.append(f"mu_g,theta: radial x{rep.radial_growth:.2f}, refinement +{rep.refinement_growth:.1e}")
    assert report(9, ok, "; ".join(lines))


# ---------------------------------------------------------------- growth exponents


def test_10_growth_exponents(report):
    lines, ok = [], True
    radii = [0.9, 0.99, 0.999]
    weights = [Weight.constant(2), Weight.power(0.5, ZETA), Weight.power(-0.5, ZETA)]
    for th in weights:
        params = HardyNormParams(2.0, th, geometric_radii(20), focused_sphere_rule(ZETA))
        dual = th.power_dual(2.0)
        test_c, point_c = [], []
        for r in radii:
            d = 1 - r * r
            f = cauchy_family(r * ZETA, 2.0)
            h = hardy_norm(f, params)
            test_c.append(h ** 2 * d ** 4 / ball_mass(th, ZETA, d))
            # |f(z)| (1-|z|^2)^n <= C ||f|| theta'(I_z)^(1/2), extremal f = f_z
            point_c.append(d ** -2 * d ** 2 / (h * ball_mass(dual, ZETA, d) ** 0.5))
        for name, c in (("test", test_c), ("pointwise", point_c)):
            good = max(c) / min(c) <= 2.0
            ok &= good
            if not good:
                lines.append(f"{th.description['kind']} {name} constants {np.round(c, 4)}")
    lines.append("f_z bounds stable on 3 weights" if ok else "f_z bounds unstable")

    N, p, s = 2.0, 2.0, 0.5
    vals = [morrey_norm(cauchy_family(r * e1, N), MorreyParams(p, s, morrey_balls([e1])), 2)
            for r in radii]
    e = -fit_growth_exponent(vals, np.array(radii))
    ok &= abs(e - (s - N)) <= 0.1
    lines.append(f"Morrey exponent {e:.3f} (s-N = {s - N})")

    family = [lambda z: (1 - z[..., 0]) ** -s, PolyHolo.parse("1 + z1*z2", 2),
              CauchyKernelField(0.5 * e1, {1.0: 1.0})]
    ts = 1 - np.array([1e-2, 1e-3, 1e-4, 1e-5])
    fits = [fit_growth_exponent(f(ts[:, None] * e1[None, :]), ts) for f in family]
    ok &= max(fits) <= s + 0.1
    lines.append(f"pointwise Morrey growth max {max(fits):.3f} (s = {s})")
    assert report(10, ok, "; ".join(lines))


# ---------------------------------------------------------------- identities


def test_11_identities(report):
    rng = np.random.default_rng(11)
    errs = {}
    v = rng.normal(size=3)
    x = {(0, 1): 1.3, (0, 2): -0.4, (1, 2): 2.2, (0, 1, 2): 0.7}
    errs["delta^2"] = max(abs(c) for c in delta(v, delta(v, x)).values())

    data = corona_data(standard_generators(3))
    pts = sample_points(2, 20, 0.7, seed=12)
    G = data.G_lambda(pts)
    gv = [g(pts) for g in data.g]
    errs["delta_g G"] = float(np.max(np.abs(delta(gv, {I: c for (I, _), c in G.items()})[()] - 1)))
    errs["Omega123"] = float(np.max(np.abs(data.omega123_det(pts) - data.omega123_cyclic(pts))))

    d2 = corona_data(standard_generators(2))
    om = d2.omega_closed(pts)
    G1 = SmoothField(lambda z: d2.values(z)[0][..., 0], 2)
    G2 = SmoothField(lambda z: d2.values(z)[0][..., 1], 2)
    g1, g2 = d2.g
    errs["omega1"] = float(max(np.max(np.abs(dbar_fd(G1, pts) + g2(pts)[:, None] * om)),
                               np.max(np.abs(dbar_fd(G2, pts) - g1(pts)[:, None] * om))))

    w = rng.normal(size=(200, 2)) + 1j * rng.normal(size=(200, 2))
    z = rng.normal(size=(200, 2)) + 1j * rng.normal(size=(200, 2))
    w *= (rng.uniform(0, 0.999, (200, 1)) / np.linalg.norm(w, axis=1, keepdims=True))
    z *= (rng.uniform(0, 0.999, (200, 1)) / np.linalg.norm(z, axis=1, keepdims=True))
    errs["phi"] = float(np.max(np.abs(phi(w, z) - phi_difference(w, z))))

    rud = []
    for a, b in zip(w[:50], z[:50]):
        lhs = 1 - norm2(automorphism(a, b))
        rhs = (1 - norm2(a)) * (1 - norm2(b)) / abs(1 - inner(b, a)) ** 2
        rud.append(abs(lhs - rhs))
    errs["Rudin"] = float(max(rud))
    tol = {"delta^2": 1e-14, "delta_g G": 1e-13, "Omega123": 1e-13, "omega1": 1e-6,
           "phi": 1e-10, "Rudin": 1e-10}
    ok = all(errs[k] <= tol[k] for k in tol)
    assert report(11, ok, ", ".join(f"{k} {errs[k]:.1e}" for k in tol))


# ---------------------------------------------------------------- norm equivalences


def _family():
    polys = [PolyHolo.parse(e, 2) for e in ("1", "z1", "z2", "z1*z2", "z1**2 + z2", "(1 + z1)**3")]
    kernels = [CauchyKernelField(0.5 * e1, {1.0: 1.0}), CauchyKernelField(0.7 * ZETA, {2.0: 1.0}),
               CauchyKernelField(0.8 * e1, {1.5: 1.0}), CauchyKernelField(-0.6 * e2, {1.0: 1.0})]
    return polys + kernels


def _equivalence_ratios(theta, ball_level, K, sphere_level, depths):
    B = ball_rule(2, ball_level)
    Th = average_batch(theta, B.nodes, depth=8, order=3, n_psi=4, n_xi=4)
    d = 1 - norm2(B.nodes)
    S = sphere_rule(2, sphere_level)
    thS = theta(S.nodes)
    params = HardyNormParams(2.0, theta, geometric_radii(K), S)
    charhp, admissible, maximal = [], [], []
    for f in _family():
        h = hardy_norm(f, params)
        Rf = radial(f, B.nodes)
        charhp.append(np.sqrt(np.sum(B.weights * d * Th * np.abs(f(B.nodes) + Rf) ** 2)) / h)
        den = np.sum(B.weights * np.abs(Rf) ** 2 * d * Th)
        if den > 0:  # constants have Rh = D_ij h = 0
            num = np.sum(B.weights * np.abs(d_tangential(f, 0, 1, B.nodes)) ** 2 * Th)
            admissible.append(num / den)
        m = maximal_admissible(f, S.nodes, 2.0, np.arange(1, depths + 1))
        maximal.append(np.sqrt(np.sum(S.weights * thS * m ** 2)) / h)
    return [np.array(x) for x in (charhp, admissible, maximal)]


def test_12_norm_equivalence(report):
    theta = Weight.power(0.5, e1)
    coarse = _equivalence_ratios(theta, 8, 12, 6, 12)
    fine = _equivalence_ratios(theta, 10, 16, 8, 16)
    lines, ok = [], True
    for name, a, b in zip(("charhp k=1", "admissible", "maximal"), coarse, fine):
        spread_a, spread_b = a.max() / a.min(), b.max() / b.min()
        good = spread_b <= 1.05 * spread_a and b.min() > 0
        if name == "maximal":
            good &= b.min() >= 1 - 1e-6
        ok &= good
        lines.append(f"{name} [{b.min():.3f}, {b.max():.3f}] (coarse [{a.min():.3f}, {a.max():.3f}])")
    assert report(12, ok, "; ".join(lines))


# ---------------------------------------------------------------- determinism


CLI_CONFIGS = {
    "norms": {"n": 2, "weight": {"kind": "power", "a": 0.5}, "p": 2, "functions": ["1", "z1*z2"]},
    "ap-check": {"n": 2, "weight": {"kind": "power", "a": -1.0}, "p": [2], "depths": [1, 2],
                 "count": 2, "cap_depth": 20},
    "growth-fit": {"n": 2, "N": 2, "p": 2, "s": 0.5, "radii": [0.9, 0.99, 0.999]},
    "calibrate": {"n": 2, "N": 3, "rule": {"level": 4, "radial": 8}, "points": 8, "holdout_points": 3},
    "corona-solve": {"n": 2, "N": 3, "generators": ["1 + z1/2", "z2/2"], "f": "z1", "points": 5,
                     "rule": {"level": 4, "radial": 8}, "holomorphy": False},
    "kernel-type": {"n": 2, "params": [[1, 4, 0]], "deltas": [1e-4, 1e-5, 1e-6]},
    "carleson-test": {"n": 2, "t": [1.0], "radii": [0.9, 0.99], "depth": 6, "extra_depth": 2,
                      "tent_rule": {"order": 4, "n_psi": 6, "n_xi": 4}},
}


def test_13_determinism(report, tmp_path):
    bad = []
    for cmd, cfg in CLI_CONFIGS.items():
        path = tmp_path / f"{cmd}.json"
        path.write_text(json.dumps(cfg, indent=2))
        outs = []
        for run in ("a", "b"):
            code = cli_main([cmd, "--config", str(path), "--out", str(tmp_path / run), "--seed", "42"])
            if code != 0:
                bad.append(f"{cmd} exit {code}")
            outs.append((tmp_path / run / f"{cmd}.csv").read_bytes())
        if outs[0] != outs[1]:
            bad.append(f"{cmd} differs")
    ok = not bad
    assert report(13, ok, f"{len(CLI_CONFIGS)} subcommands byte-identical" if ok else ", ".join(bad))
