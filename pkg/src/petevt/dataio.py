"""CSV ingestion and export, study configuration, and report files."""

from __future__ import annotations

import configparser
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import ConfigError, DataValidationError, ParameterError
from .likelihood import MODES, PriorSpec
from .mcmc import McmcConfig
from .pipeline import PET_MAX, SLOTS_PER_DAY, SiteRecord, StudyReport, ThetaSettings, natural_key

__all__ = [
    "CSV_HEADER",
    "StudyConfig",
    "ingest_csv",
    "write_pet_csv",
    "simulated_site_rows",
    "load_config",
    "emit_report",
    "write_mrl",
    "fmt",
]

CSV_HEADER = ("site_id", "date", "interval_start", "pet_seconds", "period", "treated")
_PERIODS = {"before": 0, "after": 1}
_FIRST_MINUTE = 8 * 60


def fmt(x) -> str:
    """Six significant digits; refuses non-finite numbers."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} in report output")
    s = format(x, ".6g")
    return "0" if s == "-0" else s


def _slot_of(text: str, line: int) -> int:
    try:
        hh, mm = text.split(":")
        if len(hh) != 2 or len(mm) != 2:
            raise ValueError
        minute = int(hh) * 60 + int(mm)
    except ValueError:
        raise DataValidationError(f"line {line}: interval_start {text!r} is not HH:MM") from None
    slot, rem = divmod(minute - _FIRST_MINUTE, 10)
    if rem or not 0 <= slot < SLOTS_PER_DAY:
        raise DataValidationError(
            f"line {line}: interval_start {text} is not on the 10-minute grid 08:00-19:50"
        )
    return slot


def _slot_text(slot: int) -> str:
    m = _FIRST_MINUTE + 10 * int(slot)
    return f"{m // 60:02d}:{m % 60:02d}"


def ingest_csv(path, thresholds: Optional[dict] = None) -> list:
    """Read a PET CSV into time-sorted :class:`SiteRecord` objects.

    ``thresholds`` maps site ids to thresholds; sites without one get NaN
    and are rejected later by :func:`petevt.pipeline.prepare_site`.
    """
    thresholds = thresholds or {}
    rows = {}
    seen = set()
    treated = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataValidationError(f"line 1: header must be exactly {','.join(CSV_HEADER)}")
        for rec in reader:
            line = reader.line_num
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != len(CSV_HEADER):
                raise DataValidationError(f"line {line}: expected 6 fields, got {len(rec)}")
            site, date_s, start_s, pet_s, period_s, treated_s = (f.strip() for f in rec)
            if not site:
                raise DataValidationError(f"line {line}: empty site_id")
            try:
                date = _dt.date.fromisoformat(date_s)
            except ValueError:
                raise DataValidationError(f"line {line}: date {date_s!r} is not ISO-8601") from None
            slot = _slot_of(start_s, line)
            if pet_s == "":
                pet = math.nan
            else:
                try:
                    pet = float(pet_s)
                except ValueError:
                    raise DataValidationError(f"line {line}: pet_seconds {pet_s!r} is not a number") from None
                if not 0.0 < pet < PET_MAX:
                    raise DataValidationError(
                        f"line {line}: pet_seconds {pet_s} outside the recording range (0,15)"
                    )
            if period_s not in _PERIODS:
                raise DataValidationError(f"line {line}: period must be 'before' or 'after'")
            if treated_s not in ("0", "1"):
                raise DataValidationError(f"line {line}: treated must be 0 or 1")
            key = (site, date, slot)
            if key in seen:
                raise DataValidationError(f"line {line}: duplicate interval {site} {date_s} {start_s}")
            seen.add(key)
            if treated.setdefault(site, treated_s) != treated_s:
                raise DataValidationError(f"line {line}: treated flag changes within site {site}")
            rows.setdefault(site, []).append((date.toordinal(), slot, pet, _PERIODS[period_s]))
    out = []
    for site in sorted(rows, key=natural_key):
        arr = sorted(rows[site])
        ordinal = np.array([a[0] for a in arr], dtype=np.int64)
        dates = (ordinal - _dt.date(1970, 1, 1).toordinal()).astype("datetime64[D]")
        out.append(SiteRecord(
            site_id=site,
            treated=treated[site] == "1",
            threshold=float(thresholds.get(site, math.nan)),
            date=dates,
            slot=np.array([a[1] for a in arr], dtype=np.int64),
            pet=np.array([a[2] for a in arr], dtype=float),
            period=np.array([a[3] for a in arr], dtype=np.int8),
        ))
    return out


def simulated_site_rows(site_id: str, treated: bool, sim, start: _dt.date = _dt.date(2018, 3, 1),
                        gap_days: int = 31):
    """CSV rows for a :class:`~petevt.simulate.SimulatedSeries`.

    Before-period days run consecutively from ``start``; the after period
    resumes ``gap_days`` after the last before-period day.  PET values are
    written with full precision so re-ingestion is exact.
    """
    pet = -np.asarray(sim.values, dtype=float)
    bad = ~((pet > 0.0) & (pet < PET_MAX))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataValidationError(
            f"site {site_id}: simulated PET {pet[i]!r} outside (0,15); {int(bad.sum())} values "
            "affected. Lower the threshold or change the tail parameters."
        )
    day = np.asarray(sim.day)
    period = np.asarray(sim.period)
    offset = np.where(period == 1, gap_days, 0)
    rows = []
    for p, d, s, t, off in zip(pet.tolist(), day.tolist(), np.asarray(sim.slot).tolist(),
                               period.tolist(), offset.tolist()):
        date = start + _dt.timedelta(days=d + off)
        rows.append((site_id, date.isoformat(), _slot_text(s), repr(p),
                     "after" if t else "before", "1" if treated else "0"))
    return rows


def write_pet_csv(path, rows: Sequence[tuple]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(rows)


@dataclass(frozen=True)
class StudyConfig:
    modes: tuple = MODES
    kappa: int = 10
    theta: ThetaSettings = ThetaSettings()
    priors: PriorSpec = PriorSpec()
    mcmc: McmcConfig = McmcConfig()
    thresholds: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        return {
            "modes": list(self.modes),
            "kappa": self.kappa,
            "theta": asdict(self.theta),
            "priors": asdict(self.priors),
            "mcmc": asdict(self.mcmc),
            "thresholds": {k: self.thresholds[k] for k in sorted(self.thresholds, key=natural_key)},
        }

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_STUDY_KEYS = {"mode": str, "kappa": int, "theta_sim_n": int, "theta_quantile": float,
               "theta_kappa": int}
_PRIOR_KEYS = {k: float for k in ("beta0_mean", "beta0_var", "beta1_mean", "beta1_var",
                                  "xi_mean", "xi_var")}
_MCMC_KEYS = {"retained_draws": int, "thin": int, "burn_in": int, "seed": int,
              "pilot_iterations": int, "target_acceptance": float}


def parse_modes(text: str) -> tuple:
    items = [m.strip().lower() for m in text.split(",") if m.strip()]
    if items == ["all"]:
        return MODES
    bad = [m for m in items if m not in MODES]
    if bad or not items:
        raise ConfigError(f"mode must be 'all' or a list from {', '.join(MODES)}; got {text!r}")
    return tuple(m for m in MODES if m in items)


def _section(cp, name, schema):
    out = {}
    if not cp.has_section(name):
        return out
    for key, raw in cp.items(name):
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' in [{name}]")
        try:
            out[key] = schema[key](raw) if schema[key] is not int else int(raw, 10)
        except ValueError:
            raise ConfigError(f"[{name}] {key} = {raw!r} is not a valid {schema[key].__name__}") from None
    return out


def load_config(path=None) -> StudyConfig:
    """Read an INI study configuration; ``None`` gives all defaults."""
    if path is None:
        return StudyConfig()
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str  # keep site ids case-sensitive
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    for sec in cp.sections():
        if sec not in ("study", "priors", "mcmc", "sites"):
            raise ConfigError(f"unknown section [{sec}]")
    # keys other than site ids are case-insensitive
    lower = configparser.ConfigParser(interpolation=None, default_section="__none__")
    for sec in ("study", "priors", "mcmc"):
        if cp.has_section(sec):
            lower.add_section(sec)
            for k, v in cp.items(sec):
                lower.set(sec, k.lower(), v)
    study = _section(lower, "study", _STUDY_KEYS)
    try:
        priors = PriorSpec(**_section(lower, "priors", _PRIOR_KEYS))
        mcmc = McmcConfig(**_section(lower, "mcmc", _MCMC_KEYS))
        theta = ThetaSettings(
            sim_n=study.get("theta_sim_n", ThetaSettings.sim_n),
            quantile=study.get("theta_quantile", ThetaSettings.quantile),
            kappa=study.get("theta_kappa", ThetaSettings.kappa),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    kappa = study.get("kappa", 10)
    if kappa < 1:
        raise ConfigError(f"kappa must be a positive integer, got {kappa}")
    if theta.kappa < 1 or theta.sim_n < 100_000 or not 0 < theta.quantile < 1:
        raise ConfigError("theta settings need theta_kappa >= 1, theta_sim_n >= 1e5, 0 < theta_quantile < 1")
    thresholds = {}
    if cp.has_section("sites"):
        for site, raw in cp.items("sites"):
            try:
                u = float(raw)
            except ValueError:
                raise ConfigError(f"[sites] threshold for {site} is not a number: {raw!r}") from None
            if not math.isfinite(u):
                raise ConfigError(f"[sites] threshold for {site} must be finite")
            thresholds[site] = u
    modes = parse_modes(study["mode"]) if "mode" in study else MODES
    return StudyConfig(modes, kappa, theta, priors, mcmc, thresholds)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_mrl(out_dir, site_id: str, points, svg: bool = True) -> Path:
    """Write ``mrl_<site>.csv`` (and its SVG) for points with excesses."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(fmt(p.u), fmt(p.mean_excess), p.n_excess, fmt(p.mean_excess - p.ci_halfwidth),
             fmt(p.mean_excess + p.ci_halfwidth)) for p in points if p.n_excess > 0]
    path = out / f"mrl_{site_id}.csv"
    _write_csv(path, ("u", "mean_excess", "n_excess", "lo95", "hi95"), rows)
    if svg:
        from .report import mrl_svg, read_mrl_csv

        (out / f"mrl_{site_id}.svg").write_text(mrl_svg(site_id, read_mrl_csv(path)), encoding="utf-8")
    return path


def _versions() -> dict:
    import numpy
    import scipy

    return {"petevt": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": BACKEND}


def emit_report(r: StudyReport, out_dir, svg: bool = True) -> list:
    """Write summary, caterpillar and verdict tables plus run metadata."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    summary = []
    for res in r.results:
        for name, ps in res.summary.items():
            summary.append((res.site_id, res.mode, name, fmt(ps.mean), fmt(ps.sd), fmt(ps.lo),
                            fmt(ps.hi), fmt(res.threshold)))
    _write_csv(out / "summary.csv",
               ("site", "mode", "parameter", "mean", "sd", "lo95", "hi95", "threshold"), summary)
    cat = [(c.site_id, int(c.treated), c.mode, fmt(c.mean), fmt(c.lo), fmt(c.hi)) for c in r.caterpillar]
    _write_csv(out / "caterpillar.csv", ("site", "treated", "mode", "mean", "lo95", "hi95"), cat)
    ver = [(res.site_id, int(res.treated), res.mode, res.verdict, res.n_exceed[0], res.n_exceed[1],
            res.n_contributions, "" if res.theta_hat is None else fmt(res.theta_hat))
           for res in r.results]
    _write_csv(out / "verdicts.csv",
               ("site", "treated", "mode", "verdict", "n_exceed_before", "n_exceed_after",
                "n_contributions", "theta_hat"), ver)
    meta = dict(r.meta)
    meta["versions"] = _versions()
    meta["diagnostics"] = {
        f"{res.site_id}/{res.mode}": {
            "acceptance": {k: round(v, 6) for k, v in res.acceptance.items()},
            "ess": {k: round(v, 1) for k, v in res.ess.items() if math.isfinite(v)},
        }
        for res in r.results
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    files = ["summary.csv", "caterpillar.csv", "verdicts.csv", "run_meta.json"]
    if svg:
        from .report import caterpillar_svg, read_caterpillar_csv

        (out / "caterpillar.svg").write_text(
            caterpillar_svg(read_caterpillar_csv(out / "caterpillar.csv")), encoding="utf-8"
        )
        files.append("caterpillar.svg")
    return [out / f for f in files]
