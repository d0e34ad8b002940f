"""Batch front end: ``aus construct | verify | plot | selftest``.

Exit codes: 0 success / verification pass, 1 verification failure,
2 configuration or input errors, 3 a construction cap was hit (the partial
bundle is still written). ``AUS_THREADS`` caps BLAS/FFT thread pools.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .constructor import CapError, ConstructionParams, SystemBundle, construct_system
from .groups import parse_group, trivial_label
from .spectral import SpectralCoeffs

log = logging.getLogger("aus")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def expand_eps(spec):
    """Explicit list, comma string, or geometric ``{start, ratio, count}``."""
    if isinstance(spec, str):
        try:
            return [float(x) for x in spec.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad epsilon list {spec!r}") from exc
    if isinstance(spec, dict):
        try:
            start, ratio, count = float(spec["start"]), float(spec["ratio"]), int(spec["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("geometric epsilon spec needs start, ratio, count") from exc
        return [start * ratio**i for i in range(count)]
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    raise ConfigError(f"unrecognized epsilon spec {spec!r}")


def parse_f0(group, spec):
    """``"one"`` or a mapping ``{label: [[re, im], ...]}`` (also as a JSON string)."""
    if spec in (None, "one"):
        return SpectralCoeffs(group, {trivial_label(group): np.array([[1.0]])})
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"f0 must be 'one' or inline JSON coefficients: {exc}") from exc
    if not isinstance(spec, dict):
        raise ConfigError("f0 must be 'one' or a label -> coefficients mapping")
    try:
        return SpectralCoeffs.from_json({"coeffs": spec}, group)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad f0 coefficients: {exc}") from exc


@dataclass
class ScenarioConfig:
    group: str = "circle"
    f0: object = "one"
    eps: object = None
    count: int = None
    k_cap: int = None
    band_cap: int = None
    grid_factor: int = 8
    profile: str = "smooth"
    seed: int = 0
    out: str = "bundle.json"
    report: str = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {k: v for k, v in obj.items() if k in cls.__dataclass_fields__}
        unknown = sorted(set(obj) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        return cls(**known)

    def to_params(self):
        try:
            group = parse_group(self.group)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.eps is None:
            raise ConfigError("an epsilon sequence is required")
        kw = {}
        if self.k_cap is not None:
            kw["k_cap"] = int(self.k_cap)
        try:
            return ConstructionParams(
                group=group, f0=parse_f0(group, self.f0), epsilons=expand_eps(self.eps),
                count=self.count, band_cap=self.band_cap, grid_factor=int(self.grid_factor),
                profile=self.profile, seed=int(self.seed), **kw,
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc


def _summary(bundle, out=sys.stdout):
    for r in bundle.records:
        print(f"m={r.m} k_m={r.k_m} delta_m={r.delta_m:.6g} |Lambda_m|={len(r.lam)} "
              f"B={r.bandlimit:g} sup_err={r.sup_err:.3e} mu(Omega_m)={r.omega_measure:.6f}",
              file=out)


def cmd_construct(args):
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    for name in ("group", "f0", "eps", "count", "k_cap", "band_cap", "grid_factor",
                 "profile", "seed", "out"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    params = cfg.to_params()
    try:
        bundle = construct_system(params)
    except CapError as exc:
        exc.bundle.save(cfg.out)
        _summary(exc.bundle)
        print(f"cap reached: {exc}; partial bundle written to {cfg.out}", file=sys.stderr)
        return EXIT_CAP
    bundle.save(cfg.out)
    _summary(bundle)
    print(f"bundle written to {cfg.out}")
    return EXIT_OK


def _load_bundle(path):
    try:
        return SystemBundle.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read bundle {path}: {exc}") from exc


def cmd_verify(args):
    from .verifier import verify_bundle

    bundle = _load_bundle(args.bundle)
    if not bundle.records:
        raise ConfigError("bundle has no records")
    report = verify_bundle(bundle, grid_factor=args.grid_factor, seed=args.seed)
    path = args.report or os.path.splitext(args.bundle)[0] + ".report.json"
    report.save(path)
    for rec in report.records:
        flags = " ".join(f"{c}={'ok' if rec[c]['pass'] else 'FAIL'}"
                         for c in ("disjoint", "upper", "lower", "omega", "chain"))
        print(f"m={rec['m']} {flags} upper_margin={rec['upper']['margin']:.3e} "
              f"lower_margin={rec['lower']['margin']:.3e} residual={rec['disjoint']['residual']:.1e}")
    verdict = "PASS" if report.passed else "FAIL " + ",".join(report.failed_checks())
    print(f"{verdict}; report written to {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_plot(args):
    from .report import emit_plots

    bundle = _load_bundle(args.bundle)
    files = emit_plots(bundle, args.out_dir, seed=args.seed)
    for f in files:
        print(f)
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest

    ok = True
    for name, passed, detail in run_selftest():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="aus", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a system and write the bundle JSON")
    c.add_argument("--config", help="scenario JSON; flags override its fields")
    c.add_argument("--group", help="circle | torus:d | su2")
    c.add_argument("--f0", help="'one' or inline JSON {label: [[re, im], ...]}")
    c.add_argument("--eps", help="comma list, or JSON {start, ratio, count}")
    c.add_argument("--count", type=int, help="number of functions (default: length of eps)")
    c.add_argument("--k-cap", dest="k_cap", type=int, help="deepest dyadic level (default 12)")
    c.add_argument("--band-cap", dest="band_cap", type=int,
                   help="bandlimit cap in native units (|n| or 2j)")
    c.add_argument("--grid-factor", dest="grid_factor", type=int,
                   help="sup-check oversampling per dimension (default 8)")
    c.add_argument("--profile", choices=("smooth", "linear"), help="window ramp shape")
    c.add_argument("--seed", type=int, help="seed for random check points")
    c.add_argument("--out", help="bundle JSON path")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="certify a bundle and write a report")
    v.add_argument("bundle", help="bundle JSON written by construct")
    v.add_argument("--grid-factor", dest="grid_factor", type=int, default=8)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", help="report path (default <bundle>.report.json)")
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="emit profile CSV, band SVG and spectrum CSV per m")
    pl.add_argument("bundle", help="bundle JSON written by construct")
    pl.add_argument("--out-dir", dest="out_dir", default="plots")
    pl.add_argument("--seed", type=int, default=0)
    pl.set_defaults(func=cmd_plot)

    s = sub.add_parser("selftest", help="run the fast invariant suite")
    s.set_defaults(func=cmd_selftest)
    return p


def _eps_arg(text):
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad epsilon JSON: {exc}") from exc
    return text


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    threads = os.environ.get("AUS_THREADS")
    limit = None
    if threads:
        try:
            limit = max(1, int(threads))
        except ValueError:
            print(f"error: AUS_THREADS must be an integer, got {threads!r}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        if getattr(args, "eps", None) is not None:
            args.eps = _eps_arg(args.eps)
        with threadpool_limits(limits=limit):
            return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
