"""Command-line interface: ``petevt {mrl,fit,simulate,theta,report}``.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataValidationError, ParameterError
from .likelihood import ModelParams

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
_VALIDATION = (DataValidationError, ConfigError, ParameterError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="INI study configuration")
    p.add_argument("--seed", type=int, default=d, help="master seed (overrides [mcmc] seed)")
    p.add_argument("--out", default=d, help="output directory (default: current directory)")
    p.add_argument("--mode", default=d,
                   help="ignore, decluster, markov, a comma list, or all (overrides [study] mode)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="petevt", description="Extreme value before/after analysis of PET conflicts.")
    p.add_argument("--version", action="version", version=f"petevt {__version__}")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help):
        sp = sub.add_parser(name, help=help)
        _global_flags(sp, suppress=True)
        return sp

    sp = cmd("mrl", "emit mean residual life curves for threshold choice")
    sp.add_argument("data", help="PET CSV file")
    sp.add_argument("--site", action="append", help="site id (repeatable; default all)")
    sp.add_argument("--grid-size", type=int, default=200)
    sp.add_argument("--no-svg", action="store_true")

    sp = cmd("fit", "fit every configured site and write the study report")
    sp.add_argument("data", help="PET CSV file")
    sp.add_argument("--no-svg", action="store_true")

    sp = cmd("simulate", "write a synthetic PET CSV from the logistic Markov model")
    sp.add_argument("output", help="CSV path to write")
    sp.add_argument("--sites", type=int, default=1, help="number of synthetic sites")
    sp.add_argument("--treated", type=int, default=None,
                    help="how many of the sites are treated (default: all)")
    sp.add_argument("--n-per-period", type=int, default=7200)
    sp.add_argument("--beta0", type=float, default=0.3981)
    sp.add_argument("--beta1", type=float, default=-0.3436)
    sp.add_argument("--xi", type=float, default=-0.1649)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--threshold", type=float, default=-8.0)
    sp.add_argument("--rate", type=float, default=0.25, help="exceedance rate in both periods")
    sp.add_argument("--start", default="2018-03-01", help="first before-period date")

    sp = cmd("theta", "extremal index implied by a logistic alpha")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--sim-n", type=int, default=None)
    sp.add_argument("--quantile", type=float, default=None)
    sp.add_argument("--kappa", type=int, default=None)

    cmd("report", "re-render SVG figures from the CSV tables in --out")
    return p


def _config(args):
    from .dataio import load_config, parse_modes

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, mcmc=replace(cfg.mcmc, seed=args.seed))
    if args.mode is not None:
        cfg = replace(cfg, modes=parse_modes(args.mode))
    return cfg


def _out(args) -> Path:
    return Path(args.out) if args.out else Path(".")


def _cmd_mrl(args):
    from .dataio import ingest_csv, write_mrl
    from .threshold import default_mrl_grid, mrl_curve

    import numpy as np

    records = ingest_csv(args.data)
    wanted = set(args.site or [r.site_id for r in records])
    missing = wanted - {r.site_id for r in records}
    if missing:
        raise DataValidationError(f"unknown site(s): {', '.join(sorted(missing))}")
    for r in records:
        if r.site_id not in wanted:
            continue
        values = -r.pet[~np.isnan(r.pet)]
        points = mrl_curve(values, default_mrl_grid(values, args.grid_size))
        path = write_mrl(_out(args), r.site_id, points, svg=not args.no_svg)
        print(path)


def _cmd_fit(args):
    from .dataio import emit_report, ingest_csv
    from .pipeline import run_study

    cfg = _config(args)
    records = ingest_csv(args.data, cfg.thresholds)
    missing = [r.site_id for r in records if r.site_id not in cfg.thresholds]
    if missing:
        raise ConfigError(f"no threshold configured in [sites] for: {', '.join(missing)}")
    meta = {"seed": cfg.mcmc.seed, "config_sha256": cfg.digest(), "config": cfg.canonical(),
            "data_file": Path(args.data).name}
    report = run_study(records, cfg.modes, cfg.priors, cfg.mcmc, cfg.kappa, cfg.theta, meta)
    for f in emit_report(report, _out(args), svg=not args.no_svg):
        print(f)


def _cmd_simulate(args):
    import datetime as dt

    from .dataio import simulated_site_rows, write_pet_csv
    from .pipeline import site_seed
    from .simulate import SimSpec, simulate_series

    if args.sites < 1:
        raise ParameterError("--sites must be at least 1")
    n_treated = args.sites if args.treated is None else args.treated
    if not 0 <= n_treated <= args.sites:
        raise ParameterError("--treated must lie between 0 and --sites")
    try:
        start = dt.date.fromisoformat(args.start)
    except ValueError:
        raise ParameterError(f"--start {args.start!r} is not an ISO date") from None
    seed = 0 if args.seed is None else args.seed
    rows = []
    for k in range(args.sites):
        site = f"S{k + 1}"
        treated = k < n_treated
        beta1 = args.beta1 if treated else 0.0
        spec = SimSpec((args.n_per_period, args.n_per_period),
                       ModelParams(args.beta0, beta1, args.xi, args.alpha),
                       args.threshold, (args.rate, args.rate),
                       seed=site_seed(seed, site, "markov"))
        rows.extend(simulated_site_rows(site, treated, simulate_series(spec), start))
    out = Path(args.output)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_pet_csv(out, rows)
    print(out)


def _cmd_theta(args):
    from .simulate import theta_from_alpha

    cfg = _config(args)
    th = cfg.theta
    seed = cfg.mcmc.seed
    value = theta_from_alpha(
        args.alpha,
        sim_n=args.sim_n if args.sim_n is not None else th.sim_n,
        u_q=args.quantile if args.quantile is not None else th.quantile,
        kappa=args.kappa if args.kappa is not None else th.kappa,
        seed=seed,
    )
    print(format(value, ".6g"))


def _cmd_report(args):
    from .report import rerender

    written = rerender(_out(args))
    if not written:
        raise DataValidationError(f"no caterpillar.csv or mrl_*.csv found in {_out(args)}")
    for f in written:
        print(f)


_COMMANDS = {"mrl": _cmd_mrl, "fit": _cmd_fit, "simulate": _cmd_simulate,
             "theta": _cmd_theta, "report": _cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except _VALIDATION as exc:
        print(f"petevt: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:  # pragma: no cover
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 2
        print(f"petevt: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
