"""Batch driver: ``weakzq <command> --config run.toml``.

Exit codes: 0 when every check passes, 2 when a check fails, 1 on errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from . import certify as cert
from . import domain as dom
from . import forms
from . import upsilon as ups
from .wirtinger import PolyParseError

log = logging.getLogger("weakzq")

COMMANDS = ("certify", "levi-scan", "mkh-check", "scaling-demo", "homog-check", "list-builtins", "run")
EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: dict
    upsilon: dict = field(default_factory=lambda: {"kind": "zero"})
    q: int = 1
    weight: dict = field(default_factory=lambda: {"t": 1.0, "form": "gauss"})
    sampling: dict = field(default_factory=dict)
    checks: list = field(default_factory=lambda: ["certify"])
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    mkh: dict = field(default_factory=dict)
    scaling: dict = field(default_factory=dict)
    homog: dict = field(default_factory=dict)
    seed: int = 0
    raw: dict = field(default_factory=dict)

    @property
    def tol(self) -> float:
        return float(self.tolerances.get("tol", cert.DEFAULT_TOL))

    @property
    def theta_min(self) -> float:
        return float(self.tolerances.get("theta_min", cert.DEFAULT_THETA_MIN))

    def hash(self) -> str:
        return cert.config_hash(self.raw)


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__) - {"raw"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    if "domain" not in raw:
        raise ConfigError("config needs a [domain] table")
    cfg = RunConfig(**{k: v for k, v in raw.items()}, raw=raw)
    if not isinstance(cfg.q, int):
        raise ConfigError("q must be an integer")
    return cfg


def build_domain(d: dict) -> dom.DomainSpec:
    if "builtin" in d:
        params = {k: v for k, v in d.items() if k != "builtin"}
        return dom.builtin(d["builtin"], **params)
    if "text" in d:
        if "n" not in d:
            raise ConfigError("a polynomial domain needs n")
        gv = d.get("graph_var")
        return dom.custom(d["text"], int(d["n"]), None if gv is None else int(gv) - 1)
    raise ConfigError("[domain] needs builtin or text")


def build_field(cfg: RunConfig, spec: dom.DomainSpec) -> ups.HermitianField:
    u = dict(cfg.upsilon)
    kind = u.get("kind", "zero")
    if kind == "zero":
        return ups.upsilon_zero(spec.n)
    if kind == "quadric":
        p = int(u.get("p", spec.params.get("p", 1)))
        return ups.upsilon_quadric(spec.n, p)
    if kind == "patched":
        R0 = float(u.get("R0", 3.0))
        R1 = float(u.get("R1", 2 * R0))
        Y1 = float(u["Y1"]) if "Y1" in u else float(ups.choose_Y1(R1))
        Y2 = float(u.get("Y2", 2 * Y1))
        return ups.upsilon_patched(spec, ups.PatchParams(R0, R1, R1, Y1, Y2))
    if kind == "extend":
        base = config_from_dict({**cfg.raw, "upsilon": {**u.get("base", {"kind": "zero"})}})
        return ups.extend_upsilon(build_field(base, spec), spec, float(u["eps"]),
                                  u.get("sign_case", "q_minus_trace_positive"))
    raise ConfigError(f"unknown upsilon kind {kind!r}")


def _sample(cfg: RunConfig, spec: dom.DomainSpec) -> dom.BoundarySample:
    s = cfg.sampling
    if "window" not in s or "counts" not in s:
        raise ConfigError("[sampling] needs window and counts")
    return dom.boundary_sample(spec, s["window"], s["counts"], s.get("normalization", "raw"))


# ---------------------------------------------------------------------------
# checks; each returns (passed, payload, csv rows or None)


def check_certify(cfg: RunConfig, threads: int):
    spec = build_domain(cfg.domain)
    if not 1 <= cfg.q <= spec.n - 1:
        raise ConfigError(f"q = {cfg.q} outside [1, {spec.n - 1}]")
    field_ = build_field(cfg, spec)
    sample = _sample(cfg, spec)
    pts = list(sample)
    chunks = [pts[i::threads] for i in range(threads)] if threads > 1 else [pts]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        reports = list(ex.map(lambda c: cert.check_weak_zq(spec, field_, cfg.q, c, cfg.tol, cfg.theta_min), chunks))
    if threads > 1:
        # restore the grid order: chunk i holds points i, i + threads, ...
        merged = [None] * len(pts)
        for i, r in enumerate(reports):
            merged[i::threads] = r.points
        rep = reports[0]
        rep.points = merged
    else:
        rep = reports[0]
    rep.dropped = sample.dropped
    return rep.passed, rep.to_dict(include_points=cfg.output.get("points", False)), None


def check_levi_scan(cfg: RunConfig, threads: int):
    spec = build_domain(cfg.domain)
    sample = _sample(cfg, spec)
    mus = np.array([p.mu for p in sample])
    payload = {"domain": spec.name, "domain_hash": spec.rho.symbolic_hash(), "n_points": len(sample),
               "dropped": sample.dropped, "normalization": sample[0].normalization,
               "min_mu": mus.min(axis=0).tolist() if mus.size else [],
               "max_mu": mus.max(axis=0).tolist() if mus.size else [],
               "pseudoconvex_on_sample": bool(mus.size == 0 or mus.min() >= -cfg.tol)}
    header = [f"{p}{j + 1}" for j in range(spec.n) for p in ("re_z", "im_z")] + ["grad_norm"]
    header += [f"mu{k + 1}" for k in range(spec.n - 1)]
    rows = [header] + [[v for c in p.z for v in (float(c.real), float(c.imag))] + [p.grad_norm] + list(map(float, p.mu))
                       for p in sample]
    return True, payload, rows


def check_mkh(cfg: RunConfig, threads: int):
    m = cfg.mkh
    n, q = int(m.get("n", 2)), int(m.get("q", 1))
    ts = [float(t) for t in m.get("ts", [cfg.weight.get("t", 1.0)])]
    levels = tuple(int(v) for v in m.get("levels", (16, 32)))
    rng = np.random.default_rng(cfg.seed)
    fs = [forms.random_test_form(rng, n, q) for _ in range(int(m.get("n_forms", 5)))]
    form = cfg.weight.get("form", "gauss")
    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(lambda f: forms.mkh_check(f, ts, form, levels), fs))
    max_res = float(m.get("max_residual", 1e-5))
    min_ratio = float(m.get("min_ratio", 3.5))
    records, rows, ok = [], [["form", "t"] + [f"residual_N{N}" for N in levels] + ["ratio"]], True
    for i, reps in enumerate(results):
        for r in reps:
            good = r.residual <= max_res and r.ratio >= min_ratio
            ok &= good
            records.append(r.to_dict() | {"form": i, "pass": good})
            rows.append([i, r.t] + r.residuals + [r.ratio])
    return ok, {"n": n, "q": q, "levels": list(levels), "weight": form, "records": records,
                "max_residual": max_res, "min_ratio": min_ratio}, rows


def check_scaling(cfg: RunConfig, threads: int):
    s = cfg.scaling
    spec = build_domain(cfg.domain)
    radii = [float(r) for r in s.get("radii", [1, 2, 4])]
    rng = np.random.default_rng(cfg.seed)
    u1 = forms.random_test_form(rng, spec.n, int(s.get("q", 1)))
    rows = forms.scaling_demo(spec, u1, radii, quad=forms.QuadSpec(int(s.get("N", 24))))
    prod = [r.quotient * r.R for r in rows]
    spread = (max(prod) - min(prod)) / max(prod)
    tol = float(s.get("rel_tol", 1e-5))
    table = [["R", "norm", "dbar_norm", "dbar_star_norm", "quotient", "quotient_times_R"]]
    table += [[r.R, r.norm, r.dbar_norm, r.dbar_star_norm, r.quotient, r.quotient * r.R] for r in rows]
    return spread <= tol, {"radii": radii, "quotient_times_R": prod, "relative_spread": spread,
                           "rel_tol": tol}, table


def check_homog(cfg: RunConfig, threads: int):
    h = cfg.homog
    n, p = int(h.get("n", 2)), int(h.get("p", 1))
    rt = cert.homogeneous_quadric(n, p)
    _, rep = cert.dehomogenize_and_check(rt)
    spec = cert.dehomogenized_domain(rt, f"dehomogenized_quadric({n},{p})")
    growth = cert.uniform_cm_evidence(spec, tuple(h.get("orders", (2, 3))), L0=float(h.get("L0", 125.0)),
                                      counts_per_axis=int(h.get("counts", 5)))
    var_tol = float(h.get("variation_tol", 0.1))
    bounded = all(growth.variation(k) < var_tol for k in growth.orders)
    rng = np.random.default_rng(cfg.seed)
    randoms = []
    for _ in range(int(h.get("n_random", 10))):
        pt = cert.random_homogeneous(rng, int(h.get("m", 3)) + 1, int(h.get("degree", 4)))
        randoms.append(cert.euler_residual(pt.fix_variable(pt.n - 1, 1.0), max(cert._total_degrees(pt)))
                       + cert.d_z(pt, pt.n - 1).fix_variable(pt.n - 1, 1.0))
    rand_ok = all(r.is_zero() for r in randoms)
    return rep.ok and bounded and rand_ok, {"quadric": rep.to_dict(), "growth": growth.to_dict(),
                                            "random_identity_zero": rand_ok}, None


CHECKS = {"certify": check_certify, "levi-scan": check_levi_scan, "mkh-check": check_mkh,
          "scaling-demo": check_scaling, "homog-check": check_homog}


def list_builtins(out=None):
    out = out or sys.stdout
    for name, (formula, note) in sorted(dom.BUILTINS.items()):
        print(f"{name}\n  rho = {formula}\n  {note}", file=out)
    return EXIT_PASS


def _write(out_dir: Path, name: str, payload: dict, rows, cfg: RunConfig):
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"check": name, "config_hash": cfg.hash(), "version": __version__, **payload}
    (out_dir / f"{name}.json").write_text(json.dumps(payload, sort_keys=True, indent=2, default=float) + "\n")
    if rows:
        with (out_dir / f"{name}.csv").open("w", newline="") as fh:
            csv.writer(fh).writerows([[repr(v) if isinstance(v, float) else v for v in r] for r in rows])


def run(cfg: RunConfig, checks, out_dir: Path, threads: int = 1) -> int:
    worst = EXIT_PASS
    for name in checks:
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r}")
        passed, payload, rows = CHECKS[name](cfg, max(1, threads))
        payload["verdict"] = "PASS" if passed else "FAIL"
        _write(out_dir, name, payload, rows, cfg)
        print(f"{name}: {payload['verdict']}")
        if not passed:
            worst = EXIT_FAIL
    return worst


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="weakzq", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config")
    ap.add_argument("--out")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--version", action="version", version=__version__)
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage()
        return EXIT_ERROR
    if args.command == "list-builtins":
        return list_builtins()
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_ERROR
    try:
        cfg = load_config(args.config)
        if args.tol is not None:
            cfg.tolerances = {**cfg.tolerances, "tol": args.tol}
            cfg.raw = {**cfg.raw, "tolerances": cfg.tolerances}
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw = {**cfg.raw, "seed": args.seed}
        checks = cfg.checks if args.command == "run" else [args.command]
        out_dir = Path(args.out or cfg.output.get("dir", "out"))
        return run(cfg, checks, out_dir, args.threads)
    except (ConfigError, PolyParseError, ValueError, KeyError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
