"""Command-line surface: exponent queries, scaling runs, kernel sweeps,
and symbol factorization reports.

Subcommands: delta, pairs, run, kernel, factor.  Results are written as
both comma-separated and line-delimited JSON with identical content, plus
an append-only manifest; all files are written atomically.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CollinearityError,
    ConfigError,
    DegeneracyError,
    DomainError,
    QrlabError,
)
from .exponents import (
    INF,
    ExponentQuery,
    StrichartzAssumptions,
    delta,
    diagonal_pair,
    full_manifold_delta,
    hypersurface_breakpoint,
    inv,
    solve_governing,
    strichartz_h_exponent,
)
from .grids import PeriodicGrid
from .lab import ExperimentSpec, fit_power_law, run_experiment, verdict
from .propagate import fit_kernel_exponents, restricted_kernel_decay
from .quantize import admissibility_check, symbol_factor
from .symbols import NAMED_SYMBOLS, frequency_window

RESULTS_ROOT_VAR = "QRLAB_RESULTS"


def _parse_p(text: str):
    if text in ("inf", "Inf", "infinity", "oo"):
        return INF
    if "/" in text:
        return Fraction(text)
    v = Fraction(text)
    return v


def _fmt_p(p) -> str:
    return "inf" if p == INF else str(p)


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# -- delta ----------------------------------------------------------------

def cmd_delta(args) -> int:
    if args.sweep:
        return _delta_sweep(args)
    if args.p is None:
        print("error: provide --p or --sweep", file=sys.stderr)
        return 1
    q = ExponentQuery(args.n, args.k, _parse_p(args.p))
    res = delta(q)
    approx = float(res.power)
    line = f"delta({args.n}, {args.k}, {_fmt_p(q.p)}) = {res.power} ~ {approx:.6g}"
    if res.log_half_power:
        line += "  (x log^{1/2}(1/h))"
    print(line)
    return 0


def _delta_sweep(args) -> int:
    n, k = args.n, args.k
    ExponentQuery(n, k, 2)
    inv_ps = sorted({Fraction(j, 2 * args.points) for j in range(args.points + 1)}
                    | {inv(hypersurface_breakpoint(n))})
    inv_ps = [q for q in inv_ps if q <= Fraction(1, 2)]
    lines = []
    for q in inv_ps:
        p = INF if q == 0 else 1 / q
        d = delta(ExponentQuery(n, k, p))
        row = f"{float(q):.6f} {float(d.power):.6f}"
        if args.compare_full:
            row += f" {float(full_manifold_delta(n, p)):.6f}"
        lines.append(row)
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(Path(args.out), text)
        print(f"wrote {len(lines)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# -- pairs ----------------------------------------------------------------

def cmd_pairs(args) -> int:
    if args.n is not None:
        n, k = args.n, args.k
        ExponentQuery(n, k, 2)
        a = None
        if Fraction(n - 1, 2) > Fraction(n - k, 2):
            a = StrichartzAssumptions(Fraction(n - 1, 2), Fraction(n - 1, 2),
                                      Fraction(n - k, 2), Fraction(n - k, 2))
        dp = diagonal_pair(n, k)
        if dp is None:
            print(f"n={n}, k={k}: no diagonal pair (2(k+1)/(n-1) < 2)")
        elif dp.endpoint:
            print(f"n={n}, k={k}: diagonal pair sits at the excluded endpoint p = 2")
        elif a is not None:
            print(f"n={n}, k={k}: diagonal pair (r, p) = ({dp.p}, {dp.p}), "
                  f"h-exponent {strichartz_h_exponent(a, dp.p)}")
        else:
            # k = 1 in n = 2: the two kernel bounds coincide and the pair
            # comes from the single-bound (classical) relation
            print(f"n={n}, k={k}: diagonal pair (r, p) = ({dp.p}, {dp.p}), "
                  f"h-exponent {inv(dp.p)}")
        if a is None:
            return 0
    else:
        if args.sigma_inf is None or args.sigma_2 is None or args.mu_inf is None:
            print("error: give --n/--k or all of --sigma-inf --sigma-2 --mu-inf",
                  file=sys.stderr)
            return 1
        a = StrichartzAssumptions(Fraction(args.mu_inf), Fraction(args.sigma_inf),
                                  Fraction(args.mu_2), Fraction(args.sigma_2))
    if args.p is not None:
        p = _parse_p(args.p)
        try:
            r = solve_governing(a, p)
        except QrlabError as err:
            print(f"p={_fmt_p(p)}: {err}")
            return 0
        print(f"p={_fmt_p(p)}: r = {r}, h-exponent {strichartz_h_exponent(a, r)}")
    return 0


# -- run ------------------------------------------------------------------

def _load_config(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return raw


def _spec_from_config(cfg: dict) -> ExperimentSpec:
    required = ("family", "target", "ps", "degrees")
    for name in required:
        if name not in cfg:
            raise ConfigError(f"missing required field {name!r}", field=name)
    ps = tuple(INF if p in ("inf", "Infinity") else p for p in cfg["ps"])
    return ExperimentSpec(
        family=cfg["family"], target=cfg["target"], ps=ps,
        degrees=tuple(cfg["degrees"]), sphere_dim=cfg.get("sphere_dim", 2),
        tolerance=cfg.get("tolerance", 0.05), seed=cfg.get("seed", 0))


def _results_dir(args, cfg_path: Path, spec_hash: str) -> Path:
    root = Path(args.out_dir or os.environ.get(RESULTS_ROOT_VAR, "results"))
    return root / f"{cfg_path.stem}-{spec_hash[:12]}"


def cmd_run(args) -> int:
    cfg_path = Path(args.config)
    cfg = _load_config(cfg_path)
    spec = _spec_from_config(cfg)
    if args.tol is not None:
        spec = ExperimentSpec(spec.family, spec.target, spec.ps, spec.degrees,
                              spec.sphere_dim, args.tol, spec.seed)
    theory_cfg = cfg.get("theory")
    if args.dry_run:
        print(f"family={spec.family} target={spec.target}")
        for l in sorted(spec.degrees):
            print(f"  rung l={l}, h~{1.0 / l:.3g}, p in "
                  f"{[_fmt_p(_pnum(p)) for p in spec.ps]}")
        print("dry run: nothing written")
        return 0
    t0 = time.time()
    result = run_experiment(spec)
    run_seconds = time.time() - t0
    rows = [{"degree": m.degree, "h": m.h, "p": _fmt_p(m.p), "norm": m.value}
            for m in result.table]
    verdicts, any_fail = _verdicts(result, spec, theory_cfg)
    out_dir = _results_dir(args, cfg_path, spec.spec_hash())
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_rows(out_dir, rows)
    _atomic_write(out_dir / "verdicts.json", json.dumps(verdicts, indent=2) + "\n")
    manifest = {
        "config_sha256": hashlib.sha256(cfg_path.read_bytes()).hexdigest(),
        "spec_hash": spec.spec_hash(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "version": __version__,
        "timings": {"run_experiment_s": round(run_seconds, 4)},
        "outputs": ["table.csv", "table.jsonl", "verdicts.json"],
    }
    _atomic_write(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    for v in verdicts:
        print(f"p={v['p']}: slope {v['slope']:.4f} vs theory {v['theory']} -> {v['status']}")
    print(f"results in {out_dir}")
    return 2 if any_fail else 0


def _pnum(p):
    return INF if p in ("inf", "Infinity") else float(p)


def _write_rows(out_dir: Path, rows: list):
    fields = ["degree", "h", "p", "norm"]
    lines = [",".join(fields)]
    for r in rows:
        lines.append(",".join(str(r[f]) for f in fields))
    _atomic_write(out_dir / "table.csv", "\n".join(lines) + "\n")
    _atomic_write(out_dir / "table.jsonl",
                  "\n".join(json.dumps(r) for r in rows) + "\n")


def _verdicts(result, spec: ExperimentSpec, theory_cfg):
    verdicts = []
    any_fail = False
    if not theory_cfg:
        return verdicts, any_fail
    n, k = int(theory_cfg["n"]), int(theory_cfg["k"])
    for p in spec.ps:
        pv = _pnum(p)
        theory = delta(ExponentQuery(n, k, INF if pv == INF else Fraction(pv).limit_denominator(1000)))
        if theory.log_half_power:
            fit = fit_power_law(result.table, pv, with_log=True)
            plain = fit_power_law(result.table, pv, with_log=False)
            rep = verdict(fit, theory, spec.tolerance, fit_without_log=plain)
        else:
            fit = fit_power_law(result.table, pv)
            rep = verdict(fit, theory, spec.tolerance)
        failed = rep.status == "fail" or (rep.status == "inconclusive" and not rep.slope_ok)
        any_fail = any_fail or failed
        verdicts.append({
            "p": _fmt_p(pv), "slope": rep.measured_slope,
            "theory": str(theory), "status": rep.status,
            "residual_comparison": rep.residual_comparison,
        })
    return verdicts, any_fail


# -- kernel ---------------------------------------------------------------

def cmd_kernel(args) -> int:
    cfg = _load_config(Path(args.config))
    name = cfg.get("symbol", "free")
    if name not in NAMED_SYMBOLS:
        raise ConfigError(f"unknown symbol {name!r}", field="symbol")
    dim = int(cfg.get("dim", 1))
    sym = NAMED_SYMBOLS[name](dim) if name in ("sphere", "free") else NAMED_SYMBOLS[name]()
    win = cfg.get("window", {"inner": 1.5, "outer": 3.0})
    window = frequency_window(win["inner"], win["outer"], dim=sym.dim)
    hs = [float(h) for h in cfg["hs"]]
    tau_cfg = cfg.get("taus", {"min_over_h": 8, "max": 0.5, "count": 6})

    def taus_for_h(h):
        if isinstance(tau_cfg, list):
            return [float(t) for t in tau_cfg]
        lo = tau_cfg["min_over_h"] * h
        return list(np.geomspace(lo, tau_cfg["max"], tau_cfg["count"]))

    grid = PeriodicGrid(sym.dim, int(cfg.get("grid_points", 4096 if sym.dim == 1 else 256)))
    ests = restricted_kernel_decay(sym, window, hs, taus_for_h, grid,
                                   restriction=cfg.get("restriction", "point"))
    lines = ["h,tau,sup,opnorm"]
    for e in ests:
        lines.append(f"{e.h},{e.tau},{e.sup_value},{e.l2_value}")
    if args.out:
        _atomic_write(Path(args.out), "\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    for which, label in (("sup", "sup"), ("l2", "opnorm")):
        fit = fit_kernel_exponents(ests, which)
        print(f"{label}: mu = {fit.mu:.4f}, sigma = {fit.sigma:.4f}, "
              f"max log-residual {fit.max_residual:.3g}")
    return 0


# -- factor ---------------------------------------------------------------

def cmd_factor(args) -> int:
    if args.symbol not in NAMED_SYMBOLS:
        raise ConfigError(f"unknown symbol {args.symbol!r}", field="symbol")
    factory = NAMED_SYMBOLS[args.symbol]
    sym = factory(args.dim) if args.symbol in ("sphere", "free") else factory()
    x0 = [float(v) for v in args.x.split(",")]
    xi0 = [float(v) for v in args.xi.split(",")]
    fac = symbol_factor(sym, x0, xi0, args.axis)
    print(f"symbol {args.symbol}: factored along xi_{fac.axis} at x={x0}, xi={xi0}")
    print(f"valid box: x {fac.valid_box[0]}, xi {fac.valid_box[1]}")
    print(f"max factorization residual: {fac.max_residual:.3g}")
    xi_prime0 = [v for j, v in enumerate(xi0) if j != args.axis]
    samples = np.array(xi_prime0, dtype=float).reshape(-1, 1)
    a0 = fac.a(np.array(x0, dtype=float).reshape(-1, 1),
               samples if samples.size else np.zeros((0, 1)))
    print(f"branch a(x0, xi'0) = {float(np.ravel(a0)[0]):.6g}")
    reports = admissibility_check(sym, [(x0, xi0)])
    r = reports[0]
    print(f"(A1) {'ok' if r.a1_ok else 'FAILS'}; (A2) {r.a2_class}; "
          f"curvature eigenvalues {np.round(r.eigenvalues, 6).tolist()}")
    return 0


# -- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qrlab",
                                 description="restriction exponents and scaling experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("delta", help="restriction exponent delta(n, k, p)")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--p", type=str)
    d.add_argument("--sweep", action="store_true",
                   help="emit a (1/p, delta) polyline instead of one value")
    d.add_argument("--points", type=int, default=100)
    d.add_argument("--compare-full", action="store_true",
                   help="append the whole-manifold exponent column")
    d.add_argument("--out", type=str)
    d.set_defaults(func=cmd_delta)

    pr = sub.add_parser("pairs", help="admissible Strichartz pairs and h-exponents")
    pr.add_argument("--n", type=int)
    pr.add_argument("--k", type=int)
    pr.add_argument("--p", type=str)
    pr.add_argument("--sigma-inf", type=str)
    pr.add_argument("--sigma-2", type=str)
    pr.add_argument("--mu-inf", type=str)
    pr.add_argument("--mu-2", type=str, default="0")
    pr.set_defaults(func=cmd_pairs)

    rn = sub.add_parser("run", help="execute a scaling experiment config")
    rn.add_argument("config")
    rn.add_argument("--dry-run", action="store_true")
    rn.add_argument("--tol", type=float)
    rn.add_argument("--out-dir", type=str,
                    help=f"results root (default $" + RESULTS_ROOT_VAR + " or ./results)")
    rn.set_defaults(func=cmd_run)

    kn = sub.add_parser("kernel", help="restricted kernel decay sweep")
    kn.add_argument("config")
    kn.add_argument("--out", type=str)
    kn.set_defaults(func=cmd_kernel)

    fa = sub.add_parser("factor", help="factor a named symbol at a point")
    fa.add_argument("--symbol", required=True)
    fa.add_argument("--dim", type=int, default=2)
    fa.add_argument("--x", required=True, help="comma-separated base point")
    fa.add_argument("--xi", required=True, help="comma-separated frequency point")
    fa.add_argument("--axis", type=int, default=0)
    fa.set_defaults(func=cmd_factor)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        where = f" (field: {err.field})" if getattr(err, "field", None) else ""
        print(f"config error: {err}{where}", file=sys.stderr)
        return 1
    except (DegeneracyError, CollinearityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except DomainError as err:
        print(f"error: {err}\nhint: see `qrlab <command> --help` for valid ranges",
              file=sys.stderr)
        return 1
    except QrlabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
