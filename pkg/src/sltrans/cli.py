"""Command-line front end.

Five subcommands over a problem file:

* solve    - enumerate eigenvalues with diagnostics
* verify   - run named consistency checks and report pass/fail
* sweep    - re-solve while one scalar in the problem varies
* expand   - expand a target element over the eigenvector family
* scan     - dump the characteristic function over the scan grid

Exit codes: 0 success (and every selected check passing), 2 when the solver
suspects a missed eigenvalue, 1 for any validation, parsing, or
configuration error. Reports go to stdout (or --out) as JSON or CSV; the
effective configuration is echoed to stderr and embedded in JSON reports so
runs are reproducible byte for byte given the same inputs and seed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import re
import sys

import numpy as np

from . import asymptotics
from .characteristic import omega_samples, write_scan_csv
from .eigensolve import (SuspectedMissedRoot, bracket_scan, find_eigenvalues)
from .hilbert import HElement, expand, gram_matrix, greens_identity_residual
from .problem import (PiecewisePotential, ProblemError, ProblemSpec,
                      as_validated, load_problem, problem_to_json)

CHECK_NAMES = ("chain", "orthogonality", "asymptotics", "norm-identity",
               "greens", "delta-invariance")

THRESHOLDS = {
    "chain": 1e-7,
    "orthogonality": 1e-6,
    "asymptotics": 0.05,
    "norm-identity": 1e-6,
    "greens": 1e-7,
    "delta-invariance": 1e-8,
}


class CliError(Exception):
    """Any configuration or input problem that should exit with code 1."""


@dataclasses.dataclass
class RunConfig:
    """Everything a run depends on, echoed into the report."""

    command: str
    problem: str
    n_max: int = 10
    ode_abs: float = 1e-12
    ode_rel: float = 1e-12
    root_tol: float = 1e-14
    quad_tol: float = 1e-11
    format: str = "json"
    out: str | None = None
    seed: int = 0
    checks: tuple = CHECK_NAMES
    param: str | None = None
    values: tuple = ()
    target: str | None = None
    s_max: float = 10.0
    lam_floor: float | None = None
    dump_eigenfunctions: str | None = None

    def __post_init__(self):
        for name in ("ode_abs", "ode_rel", "root_tol", "quad_tol"):
            if getattr(self, name) <= 0:
                raise CliError(f"tolerance {name} must be positive")
        if self.n_max < 1:
            raise CliError("n_max must be at least 1")
        if self.format not in ("json", "csv"):
            raise CliError(f"unknown format {self.format!r}")
        for c in self.checks:
            if c not in CHECK_NAMES:
                raise CliError(f"unknown check {c!r}; choose from {CHECK_NAMES}")

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["checks"] = list(self.checks)
        d["values"] = list(self.values)
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="sltrans", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "verify", "sweep", "expand", "scan"):
        sp = sub.add_parser(name)
        sp.add_argument("--problem", required=True, help="problem JSON file")
        sp.add_argument("--nmax", type=int, default=10)
        sp.add_argument("--ode-tol", type=float, default=1e-12,
                        help="integrator tolerance (absolute and relative)")
        sp.add_argument("--root-tol", type=float, default=1e-14)
        sp.add_argument("--quad-tol", type=float, default=1e-11)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        if name == "verify":
            sp.add_argument("--checks", default=",".join(CHECK_NAMES),
                            help="comma-separated subset of " + ",".join(CHECK_NAMES))
        if name == "sweep":
            sp.add_argument("--param", required=True,
                            help="scalar path, e.g. jumps[0], alpha[1], potential")
            sp.add_argument("--values", required=True,
                            help="comma-separated numbers")
        if name == "expand":
            sp.add_argument("--target", required=True,
                            help="target element JSON file")
        if name == "scan":
            sp.add_argument("--smax", type=float, default=10.0)
            sp.add_argument("--floor", type=float, default=None)
        if name == "solve":
            sp.add_argument("--dump-eigenfunctions", default=None,
                            help="directory for per-eigenfunction CSV dumps")
    return p


def _config_from_args(args) -> RunConfig:
    checks = CHECK_NAMES
    if getattr(args, "checks", None) is not None:
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
        if not checks:
            raise CliError("empty check list")
    values = ()
    if getattr(args, "values", None) is not None:
        raw = [v.strip() for v in args.values.split(",") if v.strip()]
        if not raw:
            raise CliError("empty value list")
        try:
            values = tuple(float(v) for v in raw)
        except ValueError as exc:
            raise CliError(f"bad sweep value: {exc}") from None
    return RunConfig(
        command=args.command,
        problem=args.problem,
        n_max=args.nmax,
        ode_abs=args.ode_tol,
        ode_rel=args.ode_tol,
        root_tol=args.root_tol,
        quad_tol=args.quad_tol,
        format=args.format,
        out=args.out,
        seed=args.seed,
        checks=checks,
        param=getattr(args, "param", None),
        values=values,
        target=getattr(args, "target", None),
        s_max=getattr(args, "smax", 10.0),
        lam_floor=getattr(args, "floor", None),
        dump_eigenfunctions=getattr(args, "dump_eigenfunctions", None),
    )


# ----------------------------------------------------------------------
# Report plumbing
# ----------------------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _eig_row(eig) -> dict:
    return {
        "n": eig.n,
        "n_formula": eig.n_formula,
        "lambda": eig.lam,
        "s": eig.s,
        "omega_prime": eig.omega_prime,
        "k_ratio": eig.k_ratio,
        "k_spread": eig.k_spread,
        "norm_constant": eig.norm_constant,
        "scalar": eig.scalar,
        "residuals": eig.residuals,
    }


def _load(config: RunConfig):
    try:
        spec = load_problem(config.problem)
    except FileNotFoundError as exc:
        raise CliError(f"problem file not found: {exc.filename}") from None
    return as_validated(spec)


def _solve(vp, config: RunConfig):
    return find_eigenvalues(vp, config.n_max, lam_floor=config.lam_floor,
                            rtol=config.ode_rel, root_rel_tol=config.root_tol)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def run_solve(config: RunConfig) -> int:
    vp = _load(config)
    eigs = _solve(vp, config)
    if config.dump_eigenfunctions:
        import os
        os.makedirs(config.dump_eigenfunctions, exist_ok=True)
        for eig in eigs:
            eig.phi.to_csv(f"{config.dump_eigenfunctions}/eigenfunction_{eig.n}.csv")
    if config.format == "json":
        report = {
            "config": config.as_dict(),
            "problem": problem_to_json(vp.spec),
            "eigenvalues": [_eig_row(e) for e in eigs],
        }
        _emit(_json_text(report), config.out)
    else:
        rows = [[e.n, e.n_formula if e.n_formula is not None else "",
                 repr(e.lam), repr(e.s) if e.s is not None else "",
                 repr(e.omega_prime), repr(e.k_ratio)] for e in eigs]
        _emit(_csv_text(["n", "n_formula", "lambda", "s", "omega_prime",
                         "k_ratio"], rows), config.out)
    return 0


def _check_chain(vp, config, rng) -> dict:
    lams = np.sort(rng.uniform(-20.0, 400.0, size=30))
    samples = omega_samples(vp, lams, rtol=config.ode_rel)
    measured = max(float(s.chain_residual_rel()) for s in samples)
    return {"measured": measured, "count": len(samples)}


def _check_orthogonality(vp, config, eigs) -> dict:
    gram = gram_matrix(vp, eigs)
    off = gram - np.diag(np.diag(gram))
    measured = float(np.max(np.abs(off))) if gram.size else 0.0
    diag_err = float(np.max(np.abs(np.diag(gram) - 1.0))) if gram.size else 0.0
    return {"measured": measured, "diagonal_error": diag_err, "count": len(eigs)}


def _fit_slope(ns, vals) -> float:
    """Least-squares slope of log(vals) against log(ns)."""
    ln = np.log(np.asarray(ns, dtype=float))
    lv = np.log(np.maximum(np.asarray(vals, dtype=float), 1e-300))
    a = np.vstack([ln, np.ones_like(ln)]).T
    slope, _ = np.linalg.lstsq(a, lv, rcond=None)[0]
    return float(slope)


def _check_asymptotics(vp, config, eigs) -> dict:
    rows = asymptotics.asymptotics_report(vp, eigs)
    rows = [r for r in rows if r["n"] >= 5]
    if len(rows) < 5:
        raise CliError("asymptotics check needs eigenvalues with formula "
                       "index 5 or higher; raise --nmax")
    ns = [r["n"] for r in rows]
    slope1 = _fit_slope(ns, [max(r["n_err1"], 1e-300) for r in rows])
    slope2 = _fit_slope(ns, [max(r["n2_err2"], 1e-300) for r in rows])
    return {"measured": max(slope1, slope2), "slope_first": slope1,
            "slope_second": slope2, "rows": len(rows)}


def _check_norm_identity(vp, config, eigs) -> dict:
    worst = max(float(e.residuals["norm_identity"]) for e in eigs)
    worst_scaled = max(float(e.residuals["norm_identity_jump_scaled_variant"])
                       for e in eigs)
    worst_subst = max(float(e.residuals["k_substitution"]) for e in eigs)
    return {"measured": worst, "jump_scaled_variant": worst_scaled,
            "substitution": worst_subst}


def _check_greens(vp, config, rng) -> dict:
    worst = 0.0
    for _ in range(5):
        la, lb = rng.uniform(-10.0, 300.0, size=2)
        res = greens_identity_residual(vp, float(la), float(lb),
                                       ode_abs_tol=config.ode_abs,
                                       ode_rel_tol=config.ode_rel)
        worst = max(worst, float(res["residual"]))
    return {"measured": worst, "pairs": 5}


def _check_delta_invariance(vp, config) -> dict:
    if not vp.spec.potential.is_identically_zero:
        return {"skipped": "potential is not identically zero"}
    if vp.m == 0:
        return {"skipped": "no interfaces"}
    n = min(config.n_max, 10)
    base = find_eigenvalues(
        dataclasses.replace(vp.spec, jumps=tuple(1.0 for _ in vp.jumps)), n,
        rtol=config.ode_rel, root_rel_tol=config.root_tol)
    base_lams = np.array([e.lam for e in base])
    worst = 0.0
    for d1 in (0.5, 2.0, 3.0, vp.jumps[0]):
        jumps = (d1,) + vp.jumps[1:]
        eigs = find_eigenvalues(dataclasses.replace(vp.spec, jumps=jumps), n,
                                rtol=config.ode_rel, root_rel_tol=config.root_tol)
        lams = np.array([e.lam for e in eigs])
        worst = max(worst, float(np.max(np.abs(lams - base_lams)
                                        / np.maximum(1.0, np.abs(base_lams)))))
    return {"measured": worst, "count": n}


def run_verify(config: RunConfig) -> int:
    vp = _load(config)
    rng = np.random.default_rng(config.seed)
    needs_eigs = bool({"orthogonality", "asymptotics", "norm-identity"}
                      & set(config.checks))
    eigs = None
    if needs_eigs:
        n = max(config.n_max, 25) if "asymptotics" in config.checks else config.n_max
        eigs = _solve(vp, dataclasses.replace(config, n_max=n))

    results = []
    all_pass = True
    for name in config.checks:
        if name == "chain":
            detail = _check_chain(vp, config, rng)
        elif name == "orthogonality":
            detail = _check_orthogonality(vp, config, eigs[:config.n_max])
        elif name == "asymptotics":
            detail = _check_asymptotics(vp, config, eigs)
        elif name == "norm-identity":
            detail = _check_norm_identity(vp, config, eigs[:config.n_max])
        elif name == "greens":
            detail = _check_greens(vp, config, rng)
        else:
            detail = _check_delta_invariance(vp, config)
        if "skipped" in detail:
            results.append({"check": name, "status": "skipped",
                            "reason": detail["skipped"]})
            continue
        threshold = THRESHOLDS[name]
        passed = bool(detail["measured"] <= threshold)
        all_pass = all_pass and passed
        results.append({"check": name, "status": "pass" if passed else "fail",
                        "threshold": threshold, **detail})

    if config.format == "json":
        report = {"config": config.as_dict(), "results": results,
                  "passed": all_pass}
        _emit(_json_text(report), config.out)
    else:
        rows = [[r["check"], r["status"], repr(r.get("measured", "")),
                 repr(r.get("threshold", ""))] for r in results]
        _emit(_csv_text(["check", "status", "measured", "threshold"], rows),
              config.out)
    for r in results:
        line = f"{r['check']}: {r['status']}"
        if "measured" in r:
            line += f" (measured {r['measured']:.3e} vs {r['threshold']:.0e})"
        print(line, file=sys.stderr)
    return 0 if all_pass else 1


_PARAM_RE = re.compile(r"^(\w+)(?:\[(\d+)\])?$")


def _set_param(spec: ProblemSpec, path: str, value: float) -> ProblemSpec:
    m = _PARAM_RE.match(path)
    if not m:
        raise CliError(f"cannot parse parameter path {path!r}")
    name, idx = m.group(1), m.group(2)
    if name in ("potential", "q"):
        if idx is not None:
            raise CliError("potential path takes no index (constant value only)")
        return dataclasses.replace(spec, potential=PiecewisePotential.constant(value))
    if name not in ("interfaces", "jumps", "alpha", "beta", "beta_prime"):
        raise CliError(f"unknown parameter field {name!r}")
    cur = getattr(spec, name)
    if idx is None:
        raise CliError(f"field {name!r} needs an index, e.g. {name}[0]")
    i = int(idx)
    if i >= len(cur):
        raise CliError(f"index {i} out of range for {name} of length {len(cur)}")
    new = tuple(value if k == i else v for k, v in enumerate(cur))
    return dataclasses.replace(spec, **{name: new})


def run_sweep(config: RunConfig) -> int:
    if not config.values:
        raise CliError("empty value list")
    base = _load(config).spec
    rows = []
    for v in config.values:
        try:
            spec = _set_param(base, config.param, v)
            eigs = find_eigenvalues(spec, config.n_max, rtol=config.ode_rel,
                                    root_rel_tol=config.root_tol,
                                    lam_floor=config.lam_floor)
            for e in eigs:
                rows.append({"param_value": v, "n": e.n, "lambda": e.lam,
                             "error": None})
        except CliError:
            raise
        except Exception as exc:
            rows.append({"param_value": v, "n": None, "lambda": None,
                         "error": f"{type(exc).__name__}: {exc}"})
    if config.format == "json":
        report = {"config": config.as_dict(), "parameter": config.param,
                  "rows": rows}
        _emit(_json_text(report), config.out)
    else:
        out_rows = [[repr(r["param_value"]),
                     "" if r["n"] is None else r["n"],
                     "" if r["lambda"] is None else repr(r["lambda"]),
                     r["error"] or ""] for r in rows]
        _emit(_csv_text(["param_value", "n", "lambda", "error"], out_rows),
              config.out)
    return 0


def _target_element(obj: dict, eigs) -> HElement:
    kind = obj.get("kind")
    if kind == "polynomial":
        return HElement.polynomial(obj.get("coeffs", [1.0]),
                                   f1=float(obj.get("f1", 0.0)))
    if kind == "bump":
        return HElement.bump(float(obj["center"]), float(obj["halfwidth"]),
                             amplitude=float(obj.get("amplitude", 1.0)),
                             f1=float(obj.get("f1", 0.0)))
    if kind == "scalar":
        return HElement.scalar_only(float(obj["f1"]))
    if kind == "eigenfunction":
        n = int(obj["n"])
        if n >= len(eigs):
            raise CliError(f"target eigenfunction {n} needs nmax > {n}")
        return HElement.from_eigenpair(eigs[n])
    raise CliError(f"unknown target kind {kind!r}")


def run_expand(config: RunConfig) -> int:
    vp = _load(config)
    try:
        with open(config.target) as fh:
            target_obj = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"target file not found: {config.target}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"target file is not valid JSON: {exc}") from None
    eigs = _solve(vp, config)
    target = _target_element(target_obj, eigs)
    result = expand(vp, target, eigs)
    if config.format == "json":
        report = {
            "config": config.as_dict(),
            "target": target_obj,
            "coefficients": [float(c) for c in result.coefficients],
            "residuals": [float(r) for r in result.residuals],
            "norm_sq": result.norm_sq,
            "parseval_ratio": result.parseval_ratio,
        }
        _emit(_json_text(report), config.out)
    else:
        rows = [[k + 1, repr(float(c)), repr(float(r))]
                for k, (c, r) in enumerate(zip(result.coefficients,
                                               result.residuals))]
        _emit(_csv_text(["N", "coefficient", "residual"], rows), config.out)
    return 0


def run_scan(config: RunConfig) -> int:
    vp = _load(config)
    scan = bracket_scan(vp, config.s_max, config.lam_floor, rtol=config.ode_rel)
    samples = omega_samples(vp, scan.lams, rtol=config.ode_rel)
    if config.format == "csv":
        if config.out:
            write_scan_csv(samples, config.out)
        else:
            buf = io.StringIO()
            n_intervals = len(samples[0].omega_i)
            writer = csv.writer(buf)
            writer.writerow(["lambda", "s_if_nonneg", "omega"]
                            + [f"omega{i + 1}" for i in range(n_intervals)]
                            + ["chain_residual_max"])
            for sam in samples:
                s = repr(float(np.sqrt(sam.lam))) if sam.lam >= 0 else ""
                writer.writerow([repr(sam.lam), s, repr(sam.omega)]
                                + [repr(v) for v in sam.omega_i]
                                + [repr(sam.chain_residual_max)])
            sys.stdout.write(buf.getvalue())
    else:
        report = {
            "config": config.as_dict(),
            "brackets": [list(b) for b in scan.brackets],
            "suspicious": scan.suspicious,
            "samples": [{"lambda": s.lam, "omega": s.omega,
                         "omega_i": s.omega_i,
                         "chain_residual_max": s.chain_residual_max}
                        for s in samples],
        }
        _emit(_json_text(report), config.out)
    return 0


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------

_RUNNERS = {
    "solve": run_solve,
    "verify": run_verify,
    "sweep": run_sweep,
    "expand": run_expand,
    "scan": run_scan,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _config_from_args(args)
        print(f"config: {json.dumps(config.as_dict(), sort_keys=True)}",
              file=sys.stderr)
        return _RUNNERS[config.command](config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SuspectedMissedRoot as exc:
        print(f"suspected missed root: {exc}", file=sys.stderr)
        return 2
    except ProblemError as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
