"""Batch command-line frontend: ``corona-lab <subcommand> --config <path>``.

Each subcommand reads one JSON config, writes ``<subcommand>.csv`` with
per-sample values and ``<subcommand>.json`` with a summary into the output
directory.  CSV files contain no timings, so reruns with the same config and
seed are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .kernels import CONSTANTS_VERSION

EXIT_CONFIG = 2
EXIT_INVARIANT = 3


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


def _locate(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


class Config:
    """A parsed config that remembers its source text for line-anchored errors."""

    def __init__(self, text: str):
        self.text = text
        try:
            self.data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, exc.lineno) from None
        if not isinstance(self.data, dict):
            raise ConfigError("config must be a JSON object", 1)
        self.hash = hashlib.sha256(json.dumps(self.data, sort_keys=True).encode()).hexdigest()[:16]

    def get(self, key, default=None, kind=None, positive=False):
        if key not in self.data:
            if default is None:
                raise ConfigError(f"missing required key {key!r}", 1)
            return default
        val = self.data[key]
        if kind is not None and not isinstance(val, kind):
            raise ConfigError(f"{key!r} has the wrong type", _locate(self.text, key))
        if positive and not (np.all(np.asarray(val, dtype=float) > 0)):
            raise ConfigError(f"{key!r} must be positive", _locate(self.text, key))
        return val

    def fail(self, key, message):
        raise ConfigError(message, _locate(self.text, key))


def _fmt(x) -> str:
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.12e}{x.imag:+.12e}j"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12e}"
    return str(x)


def _write_csv(path: Path, header: list, rows: list) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    path.write_text(buf.getvalue())


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _rule(cfg: Config, key: str, default: dict):
    from .kernels import SolverRule

    spec = cfg.get(key, default, kind=dict)
    return SolverRule(level=int(spec.get("level", default["level"])),
                      radial=int(spec.get("radial", default["radial"])))


def _weight(cfg: Config, n: int):
    from .weights import Weight

    spec = cfg.get("weight", {"kind": "constant"}, kind=dict)
    try:
        return Weight.from_spec(spec, n)
    except (KeyError, ValueError, TypeError) as exc:
        cfg.fail("weight", f"invalid weight specification: {exc}")


def _points(n: int, count: int, radius: float, seed: int):
    from .corona import sample_points

    return sample_points(n, count, radius, seed)


# ---------------------------------------------------------------- subcommands


def cmd_calibrate(cfg: Config, seed: int, out: Path) -> tuple[list, list, dict]:
    from .kernels import calibrate, calibration_points, dbar_residual, standard_test_forms

    n = int(cfg.get("n", 2))
    N = float(cfg.get("N", 3.0, positive=True))
    rule = _rule(cfg, "rule", {"level": 6, "radial": 12})
    pts = calibration_points(n, int(cfg.get("points", 12)), 0.6, seed)
    kc = calibrate(N, n, standard_test_forms(n), pts, rule)
    kc.save(out / cfg.get("constants_file", "constants.txt"))

    held = _points(n, int(cfg.get("holdout_points", 10)), 0.8, seed + 1)

    def holdout(p):
        o = np.zeros(p.shape, dtype=complex)
        o[..., n - 1] = p[..., 0] ** 2
        return o

    res = dbar_residual(kc, 0, holdout, held, rule)
    rows = [[k, c] for k, c in enumerate(kc.c)]
    summary = {"max_residual": float(np.max(res)), "calibration_residual": kc.residual,
               "constants": {f"c_{k}": c for k, c in enumerate(kc.c)}, "fitted_exponents": {}}
    return ["k", "c_k"], rows, summary


def _constants_for(cfg: Config, n: int, N: float, rule, seed: int):
    from .kernels import KernelConstants, calibrate, calibration_points, standard_test_forms

    path = cfg.data.get("constants")
    if path:
        kc = KernelConstants.load(path)
        if kc.n != n or kc.N != N:
            cfg.fail("constants", f"constants file is for (n, N) = ({kc.n}, {kc.N})")
        return kc
    return calibrate(N, n, standard_test_forms(n), calibration_points(n, 12, 0.6, seed), rule)


def cmd_corona_solve(cfg: Config, seed: int, out: Path):
    from .corona import CoronaProblem, koszul_solve, t2_solve, verify_solution
    from .fields import PolyHolo

    n = int(cfg.get("n", 2))
    N = float(cfg.get("N", 3.0, positive=True))
    gens = cfg.get("generators", kind=list)
    try:
        g = [PolyHolo.parse(str(e), n) for e in gens]
        f = PolyHolo.parse(str(cfg.get("f", "1")), n)
    except Exception as exc:  # sympy raises a variety of parse errors
        cfg.fail("generators", f"cannot parse polynomial: {exc}")
    rule = _rule(cfg, "rule", {"level": 6, "radial": 12})
    inner = _rule(cfg, "inner_rule", {"level": 3, "radial": 6})
    kc = _constants_for(cfg, n, N, rule, seed)
    prob = CoronaProblem(g, f, n, N, rule=rule, inner_rule=inner, constants=kc,
                         delta_min=cfg.data.get("delta_min"))
    pts = _points(n, int(cfg.get("points", 20)), float(cfg.get("radius", 0.7)), seed)
    method = cfg.get("method", "koszul")
    solver = (lambda p: t2_solve(prob, p)) if method == "t2" else (lambda p: koszul_solve(prob, p))
    rep = verify_solution(prob, solver, pts, holomorphy=bool(cfg.get("holomorphy", True)))
    F = solver(pts)
    gv = np.stack([gj(pts) for gj in g], axis=-1)
    res = np.abs(np.sum(gv * F, axis=-1) - f(pts))
    header = ["point", "z_re_im"] + [f"F{j + 1}" for j in range(len(g))] + ["residual"]
    rows = [[i, " ".join(_fmt(c) for c in pts[i])] + list(F[i]) + [res[i]] for i in range(len(pts))]
    summary = {"max_residual": rep.residual, "dbar_max": [float(x) for x in rep.dbar],
               "constants": {f"c_{k}": c for k, c in enumerate(kc.c)}, "fitted_exponents": {}}
    return header, rows, summary


def cmd_ap_check(cfg: Config, seed: int, out: Path):
    from .weights import ap_values, boundary_samples

    n = int(cfg.get("n", 2))
    theta = _weight(cfg, n)
    ps = cfg.get("p", [2.0])
    ps = ps if isinstance(ps, list) else [ps]
    toward = None
    if theta.description.get("kind") == "power":
        toward = np.array([complex(*c) for c in theta.description["center"]])
    samples = boundary_samples(n, toward, tuple(cfg.get("depths", [1, 2, 3, 4])),
                               int(cfg.get("count", 4)), seed)
    depth = int(cfg.get("cap_depth", 30))
    rows, consts = [], {}
    for p in ps:
        if p <= 1:
            cfg.fail("p", "p must exceed 1")
        vals = ap_values(theta, float(p), samples, depth)
        consts[f"p={p}"] = float(np.max(vals))
        for i, v in enumerate(vals):
            rows.append([p, i, v])
    summary = {"max_residual": 0.0, "constants": consts, "fitted_exponents": {},
               "holder_floor": float(min(r[2] for r in rows))}
    return ["p", "sample", "value"], rows, summary


def cmd_kernel_type(cfg: Config, seed: int, out: Path):
    from .kernels import LParams, kernel_type, type_exponent

    n = int(cfg.get("n", 2))
    sets = cfg.get("params", kind=list)
    deltas = cfg.get("deltas", [1e-4, 1e-5, 1e-6, 1e-7], positive=True)
    rows, fits = [], {}
    for s in sets:
        if len(s) != 3:
            cfg.fail("params", "each parameter set is [N, M, L]")
        prm = LParams(*map(float, s))
        kappa = kernel_type(prm, n)
        e = type_exponent(prm, n, deltas)
        key = f"N={prm.N},M={prm.M},L={prm.L}"
        fits[key] = e
        rows.append([prm.N, prm.M, prm.L, kappa, e])
    summary = {"max_residual": 0.0, "fitted_exponents": fits, "constants": {}}
    return ["N", "M", "L", "type", "fitted_exponent"], rows, summary


def cmd_carleson_test(cfg: Config, seed: int, out: Path):
    from .carleson import carleson_stability, mu_g_theta, power_density
    from .fields import PolyHolo

    n = int(cfg.get("n", 2))
    theta = _weight(cfg, n)
    radii = sorted(cfg.get("radii", [0.9, 0.99, 0.999]))
    depth = int(cfg.get("depth", 16))
    extra = int(cfg.get("extra_depth", 16))
    opts = cfg.get("tent_rule", {"order": 6, "n_psi": 8, "n_xi": 6}, kind=dict)
    unknown = set(opts) - {"order", "cap_depth", "n_psi", "n_xi"}
    if unknown:
        cfg.fail("tent_rule", f"unknown tent rule options {sorted(unknown)}")
    measures = []
    for t in cfg.get("t", []):
        measures.append((f"t={t}", power_density(float(t), n)))
    if cfg.data.get("generators"):
        g = [PolyHolo.parse(str(e), n) for e in cfg.data["generators"]]
        measures.append(("mu_g_theta", mu_g_theta(g, theta)))
    if not measures:
        cfg.fail("t", "no measures requested")
    rows, consts = [], {}
    for name, mu in measures:
        rep = carleson_stability(mu, theta, radii, depth=depth, extra=extra, **opts)
        consts[name] = {"constant": float(np.max(rep.ratios)), "radial_growth": rep.radial_growth,
                        "refinement_growth": rep.refinement_growth, "stable": rep.stable(),
                        "divergent": rep.divergent()}
        for r, a, b in zip(radii, rep.ratios, rep.refined):
            rows.append([name, r, a, b])
    summary = {"max_residual": 0.0, "constants": consts, "fitted_exponents": {}}
    return ["measure", "radius", "ratio", "ratio_refined"], rows, summary


def cmd_norms(cfg: Config, seed: int, out: Path):
    from .fields import PolyHolo
    from .spaces import HardyNormParams, geometric_radii, hardy_norm

    n = int(cfg.get("n", 2))
    theta = _weight(cfg, n)
    p = float(cfg.get("p", 2.0, positive=True))
    K = int(cfg.get("K", 12))
    funcs = cfg.get("functions", ["1", "z1"])
    params = HardyNormParams(p, theta, geometric_radii(K))
    rows, consts = [], {}
    for e in funcs:
        val = hardy_norm(PolyHolo.parse(str(e), n), params)
        consts[str(e)] = val
        rows.append([e, val])
    summary = {"max_residual": 0.0, "constants": consts, "fitted_exponents": {}}
    return ["function", "hardy_norm"], rows, summary


def cmd_growth_fit(cfg: Config, seed: int, out: Path):
    from .spaces import MorreyParams, fit_growth_exponent, morrey_balls, morrey_norm, test_function

    n = int(cfg.get("n", 2))
    N = float(cfg.get("N", 2.0, positive=True))
    p = float(cfg.get("p", 2.0, positive=True))
    s = float(cfg.get("s", 0.5, positive=True))
    radii = np.asarray(cfg.get("radii", [0.9, 0.99, 0.999]), dtype=float)
    zeta = np.eye(n, dtype=complex)[0]
    vals = [morrey_norm(test_function(t * zeta, N), MorreyParams(p, s, morrey_balls([zeta])), n)
            for t in radii]
    e = -fit_growth_exponent(vals, radii)
    rows = [[t, v] for t, v in zip(radii, vals)]
    summary = {"max_residual": 0.0, "constants": {},
               "fitted_exponents": {"morrey": e, "expected": s - N}}
    return ["radius", "morrey_norm"], rows, summary


COMMANDS = {
    "calibrate": cmd_calibrate,
    "corona-solve": cmd_corona_solve,
    "ap-check": cmd_ap_check,
    "kernel-type": cmd_kernel_type,
    "carleson-test": cmd_carleson_test,
    "norms": cmd_norms,
    "growth-fit": cmd_growth_fit,
}


def run(command: str, config_path: str, out: str = ".", seed: int | None = None) -> int:
    path = Path(config_path)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"{config_path}: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = Config(text)
        seed = int(cfg.get("seed", 0)) if seed is None else int(seed)
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", _locate(text, "seed"))
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        header, rows, summary = COMMANDS[command](cfg, seed, outdir)
        runtime = time.perf_counter() - start
    except ConfigError as exc:
        loc = f"{config_path}:{exc.line}" if exc.line else config_path
        print(f"{loc}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"invariant violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    _write_csv(outdir / f"{command}.csv", header, rows)
    summary.update({"command": command, "config_hash": cfg.hash, "seed": seed,
                    "constants_version": CONSTANTS_VERSION, "package_version": __version__,
                    "runtime": runtime})
    (outdir / f"{command}.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="corona-lab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
