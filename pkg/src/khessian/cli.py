"""Command-line interface: ``khessian verify`` and ``khessian compute``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .energy import energy_diag, mixed_energy, mixed_lower_energy
from .exceptions import ConfigError, KHessianError
from .funcspace import from_json
from .quadrature import RadialGauss, parse_scheme
from .verify import load_configs, run_suite, with_seed

EXIT_OK = 0
EXIT_VIOLATIONS = 2
EXIT_CONFIG = 3

FUNCTIONALS = ("Ik", "Fk", "Jk", "Gk", "mixed_lower")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="khessian", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites from a JSON config")
    v.add_argument("--config", required=True, type=Path)
    v.add_argument("--out", required=True, type=Path)
    v.add_argument("--seed", type=int, default=None, help="override the seed of every suite")
    v.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("compute", help="evaluate one energy functional")
    c.add_argument("--functional", required=True, choices=FUNCTIONALS)
    c.add_argument("--spec", required=True, nargs="+", type=Path,
                   help="function spec JSON files; one file is repeated across all slots")
    c.add_argument("--n", required=True, type=int)
    c.add_argument("--k", required=True, type=int)
    c.add_argument("--m", type=int, default=None, help="number of fixed slots for mixed_lower")
    c.add_argument("--quadrature", default="radial_gauss:64", help="KIND:PARAM, e.g. radial_gauss:64 or grid:48")
    return parser


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def cmd_verify(args) -> int:
    if args.jobs < 1:
        raise ConfigError("jobs: must be >= 1")
    configs = load_configs(_load_json(args.config))
    if args.seed is not None:
        configs = [with_seed(c, args.seed) for c in configs]
    args.out.mkdir(parents=True, exist_ok=True)
    suites, names = [], {}
    for cfg in configs:
        report = run_suite(cfg, jobs=args.jobs)
        base = f"{cfg.suite}_n{cfg.n}_k{cfg.k}"
        names[base] = names.get(base, 0) + 1
        stem = base if names[base] == 1 else f"{base}_{names[base]}"
        (args.out / f"{stem}.csv").write_text(report.to_csv())
        suites.append({"name": stem, "csv": f"{stem}.csv", **report.to_dict()})
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {stem}: cases={report.cases} violations={report.violations} "
              f"aborted={report.aborted} min_margin={report.min_margin!r} "
              f"elapsed={report.elapsed:.2f}s")
    passed = all(s["passed"] for s in suites)
    manifest = {
        "tool": "khessian",
        "version": __version__,
        "config": [c.to_dict() for c in configs],
        "seed_override": args.seed,
        "suites": suites,
        "passed": passed,
    }
    (args.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if passed else EXIT_VIOLATIONS


def cmd_compute(args) -> int:
    specs = [from_json(_load_json(p)) for p in args.spec]
    for p, s in zip(args.spec, specs):
        if s.n != args.n:
            raise ConfigError(f"n: {p} has n={s.n} but --n={args.n}")
    scheme = parse_scheme(args.quadrature) if args.quadrature else RadialGauss()
    fn, k = args.functional, args.k
    if fn in ("Ik", "Jk"):
        if len(specs) != 1:
            raise ConfigError(f"spec: {fn} takes exactly one function")
        want = "complex" if fn == "Ik" else "real"
        if specs[0].space != want:
            raise ConfigError(f"spec: {fn} needs a {want}-space function")
        result = energy_diag(specs[0], k, scheme)
    elif fn in ("Fk", "Gk"):
        want = "complex" if fn == "Fk" else "real"
        if any(s.space != want for s in specs):
            raise ConfigError(f"spec: {fn} needs {want}-space functions")
        if len(specs) == 1:
            specs = specs * (k + 1)
        if len(specs) != k + 1:
            raise ConfigError(f"spec: {fn} with k={k} takes 1 or {k + 1} functions, got {len(specs)}")
        result = mixed_energy(specs, scheme)
    else:
        if args.m is None:
            raise ConfigError("m: required for mixed_lower")
        if len(specs) != args.m + 1:
            raise ConfigError(f"spec: mixed_lower takes u followed by m={args.m} functions")
        result = mixed_lower_energy(specs[0], specs[1:], k, scheme)
    print(json.dumps(result.to_dict()))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as a violation
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return cmd_verify(args) if args.command == "verify" else cmd_compute(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KHessianError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
