"""Batch command-line front end.

Subcommands: families, saddle, cramer-series, approx, verify-bounds,
convergence, tsallis.  Runs are deterministic; numeric output uses 17
significant digits with '.' decimals and LF line endings.  Exit codes:
0 success, 1 usage or config error, 2 a bound audit failed, 3 a
convergence criterion failed.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

from . import bounds, density, dist, richter, saddle, series
from .richter import GridPolicy

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT_FAILED = 2
EXIT_CONVERGENCE_FAILED = 3

SCALED_ERR_HEADROOM = 1.5


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the audit exit code owns 2 here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _add_globals(p, suppress: bool) -> None:
    # offered on the main parser and on every subparser, so the flags
    # work on either side of the subcommand; SUPPRESS keeps a
    # subparser's default from clobbering a value parsed up front
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", type=Path, help="INI config file; flags override its values",
                   **({"default": d} if suppress else {}))
    p.add_argument("--out-dir", type=Path, help="directory for CSV/JSON reports",
                   default=d)
    p.add_argument("--format", choices=("csv", "json"),
                   default=argparse.SUPPRESS if suppress else "csv")
    p.add_argument("--jobs", type=int, help="worker processes for grid fan-out",
                   default=argparse.SUPPRESS if suppress else 1)


def _build_parser() -> _Parser:
    p = _Parser(prog="locallimit", description=__doc__)
    _add_globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_sub(name, help):
        sp = sub.add_parser(name, help=help)
        _add_globals(sp, suppress=True)
        return sp

    def add_family(sp):
        # not argparse-required: a config file may supply it
        sp.add_argument("--family", default=None,
                        choices=("gaussian", "uniform_sym", "exp_centered", "grid"))
        sp.add_argument("--params", nargs="*", default=[], metavar="K=V",
                        help="family parameters, e.g. path=dens.txt n0=1")

    sp = add_sub("families", "print family constants")
    add_family(sp)

    sp = add_sub("saddle", "solve the saddle equation at one tau")
    add_family(sp)
    sp.add_argument("--tau", type=float, required=True)

    sp = add_sub("cramer-series", "print series coefficients")
    add_family(sp)
    sp.add_argument("--order", type=int, default=6)

    sp = add_sub("approx", "evaluate the approximation at one (n, x)")
    add_family(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x", type=float, required=True)

    sp = add_sub("verify-bounds", "run the inequality audit suite")
    add_family(sp)
    sp.add_argument("--eps", type=float, nargs="*", default=[0.25, 0.5, 1.0])
    sp.add_argument("--m", type=int, nargs="*", default=[1, 2, 4])
    sp.add_argument("--n-factors", type=int, nargs="*", default=[4, 16, 64])

    sp = add_sub("convergence", "error tables and the scaled-error law")
    add_family(sp)
    sp.add_argument("--n-list", type=_int_list, default=[64, 256, 1024])
    sp.add_argument("--points", type=int, default=41)
    sp.add_argument("--tau0", choices=("theorem", "analytic"), default="theorem")
    sp.add_argument("--tol", type=float, default=richter.ORACLE_ABS_TOL,
                    help="oracle inversion tolerance for the grid family")

    sp = add_sub("tsallis", "restricted one-sided density excess")
    add_family(sp)
    sp.add_argument("--n-list", type=_int_list, default=[64, 256, 1024])
    sp.add_argument("--points", type=int, default=41)
    return p


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise _UsageError(f"--params entries must be K=V, got {item!r}")
        k, v = item.split("=", 1)
        if k in ("n0",):
            out[k] = int(v)
        elif k in ("path",):
            out[k] = v
        else:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


def _apply_config(args) -> None:
    if args.config is None:
        return
    if not args.config.exists():
        raise _UsageError(f"config file not found: {args.config}")
    cp = configparser.ConfigParser()
    try:
        cp.read(args.config)
    except configparser.Error as exc:
        raise _UsageError(f"malformed config: {exc}") from exc
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    if getattr(args, "family", None) is None and "family" in exp:
        args.family = exp["family"]
    if hasattr(args, "n_list") and "n_list" in exp:
        args.n_list = _int_list(exp["n_list"])
    if hasattr(args, "points") and "points" in exp:
        args.points = int(exp["points"])
    if hasattr(args, "tol") and "tol" in exp:
        args.tol = float(exp["tol"])
    if args.out_dir is None and "out_dir" in exp:
        args.out_dir = Path(exp["out_dir"])
    if cp.has_section("params") and hasattr(args, "params"):
        merged = dict(cp["params"])
        merged.update(_parse_params(args.params))
        args.params = [f"{k}={v}" for k, v in merged.items()]


def _spec(args) -> dist.DistributionSpec:
    return dist.make_family(args.family, _parse_params(getattr(args, "params", [])))


def _family_report(d: dist.DistributionSpec) -> dict:
    theorem, analytic = saddle.tau_range(d)
    c = dist.cumulants(d, 8)
    return {
        "family": d.family,
        "alpha": d.alpha,
        "density_bound_M": d.density_bound_M,
        "n0": d.n0,
        "cgf_domain_radius": d.cgf_domain_radius,
        "tau0_theorem": theorem,
        "tau0_analytic": analytic,
        "gamma_3": c.gamma(3),
        "gamma_4": c.gamma(4),
        "first_nonzero_cumulant_order": c.m,
        "first_nonzero_cumulant": c.gamma_m,
    }


def _emit(args, name: str, payload) -> None:
    if args.out_dir is None:
        return
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / name
    if name.endswith(".json"):
        with open(path, "w", newline="") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(payload)


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
        if getattr(args, "family", "") is None and args.command != "families":
            raise _UsageError("--family is required (flag or config)")
        return _dispatch(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, density.TailBoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "families":
        names = [args.family] if args.family else ["gaussian", "uniform_sym", "exp_centered"]
        reports = []
        for name in names:
            d = dist.make_family(name, _parse_params(args.params))
            reports.append(_family_report(d))
        for r in reports:
            print(json.dumps(r, sort_keys=True, default=str))
        if args.format == "json":
            _emit(args, "families.json", reports)
        else:
            keys = list(reports[0])
            lines = [",".join(keys)]
            for r in reports:
                lines.append(",".join(
                    f"{v:.17g}" if isinstance(v, float) else str(v) for v in r.values()))
            _emit(args, "families.csv", "\n".join(lines) + "\n")
        return EXIT_OK

    if cmd == "saddle":
        d = _spec(args)
        sol = saddle.solve_saddle(d, args.tau)
        lam, mu = saddle.lambda_mu_at(d, args.tau)
        print(f"tau = {_fmt(args.tau)}")
        print(f"z0 = {_fmt(sol.z0)}")
        print(f"lambda = {_fmt(lam)}")
        print(f"mu = {_fmt(mu)}")
        print(f"rho2 = {_fmt(sol.rho[0])}")
        print(f"rho3 = {_fmt(sol.rho[1])}")
        print(f"residual = {_fmt(sol.residual)}")
        print(f"iterations = {sol.iterations}")
        return EXIT_OK

    if cmd == "cramer-series":
        d = _spec(args)
        c = dist.cumulants(d, args.order + 3)
        lam = series.cramer_series(c, args.order)
        mu = series.mu_series(c, args.order)
        lines = ["k,lambda_k,mu_k"]
        for k in range(args.order + 1):
            lines.append(f"{k},{_fmt(lam[k])},{_fmt(mu[k])}")
        text = "\n".join(lines) + "\n"
        print(text, end="")
        _emit(args, "cramer_series.csv", text)
        return EXIT_OK

    if cmd == "approx":
        d = _spec(args)
        rows = _approx_rows(d, args.n, args.x)
        print(json.dumps(rows, sort_keys=True))
        _emit(args, "approx.json", rows)
        return EXIT_OK

    if cmd == "verify-bounds":
        d = _spec(args)
        audits = bounds.run_audit_suite([d], eps_list=args.eps, m_list=args.m,
                                        n_factors=args.n_factors)
        failures = [a for a in audits if not a.passed]
        for a in audits:
            print(f"{a.name} lhs={_fmt(a.lhs)} rhs={_fmt(a.rhs)} "
                  f"pass={str(a.passed).lower()}")
        if args.out_dir is not None:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            bounds.audits_to_csv(audits, args.out_dir / "bound_audits.csv")
        print(f"audits: {len(audits)}, failures: {len(failures)}")
        return EXIT_AUDIT_FAILED if failures else EXIT_OK

    if cmd == "convergence":
        d = _spec(args)
        policy = GridPolicy(count=args.points, tau0=args.tau0)
        rows = _error_rows(d, args.n_list, policy, args.jobs)
        summary = richter.summarize(rows)
        if args.out_dir is not None:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            richter.rows_to_csv(rows, args.out_dir / "error_table.csv")
            richter.summary_to_json(summary, args.out_dir / "error_summary.json")
        print(json.dumps(summary, sort_keys=True))
        ns = summary["n"]
        C = summary["fitted_C"]
        ok = all(summary["per_n"][str(n)]["max_scaled_err"] <= SCALED_ERR_HEADROOM * C
                 for n in ns[1:])
        return EXIT_OK if ok else EXIT_CONVERGENCE_FAILED

    if cmd == "tsallis":
        d = _spec(args)
        policy = GridPolicy(count=args.points)
        sups = {n: richter.tsallis_restricted(d, n, policy) for n in sorted(args.n_list)}
        ns = sorted(sups)
        c_fit = abs(sups[ns[0]]) * ns[0] / math.log(ns[0]) ** 3
        report = {
            "sup": {str(n): sups[n] for n in ns},
            "fitted_c": c_fit,
            "bound": {str(n): c_fit * math.log(n) ** 3 / n for n in ns},
        }
        print(json.dumps(report, sort_keys=True))
        _emit(args, "tsallis.json", report)
        ok = all(sups[n] <= c_fit * math.log(n) ** 3 / n for n in ns[1:])
        ok = ok and all(abs(sups[a]) > abs(sups[b]) for a, b in zip(ns, ns[1:]))
        return EXIT_OK if ok else EXIT_CONVERGENCE_FAILED

    raise _UsageError(f"unknown command {cmd!r}")


def _approx_rows(d, n: int, x: float) -> dict:
    tau = x / math.sqrt(n)
    p = density.density_exact(d, n, x) if d.family != "grid" else \
        density.density_cf_inversion(d, n, x, richter.ORACLE_ABS_TOL)
    phi = density.std_normal_pdf(x)
    ratio_exact = p / phi
    ratio = richter.richter_ratio(d, n, x)
    return {
        "n": n, "x": x, "tau": tau,
        "p_exact": p,
        "ratio_exact": ratio_exact,
        "ratio_richter": ratio,
        "ratio_richter13": richter.richter13_ratio(d, n, x),
        "rel_err": ratio_exact / ratio - 1.0,
    }


def _error_rows(d, n_list, policy, jobs: int):
    if jobs <= 1:
        return richter.error_table(d, n_list, policy)
    import multiprocessing as mp

    tasks = sorted(n_list)
    with mp.Pool(min(jobs, len(tasks))) as pool:
        chunks = pool.starmap(richter.error_table, [(d, [n], policy) for n in tasks])
    return [row for chunk in chunks for row in chunk]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
