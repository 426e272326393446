import json
import math

import numpy as np
import pytest

from petevt.dataio import (
    CSV_HEADER,
    emit_report,
    fmt,
    ingest_csv,
    load_config,
    simulated_site_rows,
    write_mrl,
    write_pet_csv,
)
from petevt.errors import ConfigError, DataValidationError
from petevt.likelihood import ModelParams
from petevt.mcmc import McmcConfig
from petevt.pipeline import ThetaSettings, prepare_site, run_study
from petevt.simulate import SimSpec, simulate_series
from petevt.threshold import mrl_curve

pytestmark = pytest.mark.filterwarnings("ignore:pilot tuning:RuntimeWarning")
HEADER = ",".join(CSV_HEADER)


def write(tmp_path, lines, name="d.csv"):
    p = tmp_path / name
    p.write_text("\n".join([HEADER, *lines]) + "\n", encoding="utf-8")
    return p


def test_ingest_basic(tmp_path):
    p = write(tmp_path, [
        "S1,2018-03-01,08:10,5.0,before,1",
        "S1,2018-03-01,08:00,4.37,before,1",
        "S1,2018-03-01,08:20,,before,1",
        "S1,2018-09-01,08:00,2.5,after,1",
    ])
    (r,) = ingest_csv(p, {"S1": -5.693})
    assert r.slot.tolist() == [0, 1, 2, 0]
    assert r.pet[0] == 4.37 and math.isnan(r.pet[2])
    assert r.treated and r.threshold == -5.693
    s = prepare_site(r)
    assert s.values[0] == -4.37 and s.threshold == -5.693


@pytest.mark.parametrize("line,match", [
    ("S1,2018-03-01,08:00,16.0,before,1", r"\(0,15\)"),
    ("S1,2018-03-01,08:00,0,before,1", r"\(0,15\)"),
    ("S1,2018-03-01,08:05,4.0,before,1", "grid"),
    ("S1,2018-03-01,20:00,4.0,before,1", "grid"),
    ("S1,2018-13-01,08:00,4.0,before,1", "ISO"),
    ("S1,2018-03-01,08:00,abc,before,1", "number"),
    ("S1,2018-03-01,08:00,4.0,during,1", "period"),
    ("S1,2018-03-01,08:00,4.0,before,2", "treated"),
    ("S1,2018-03-01,08:00,4.0,before", "6 fields"),
])
def test_ingest_row_errors_cite_line(tmp_path, line, match):
    p = write(tmp_path, ["S1,2018-03-01,09:00,4.0,before,1", line])
    with pytest.raises(DataValidationError, match=match) as e:
        ingest_csv(p)
    assert "line 3" in str(e.value)


def test_ingest_duplicates_header_and_treated(tmp_path):
    with pytest.raises(DataValidationError, match="duplicate"):
        ingest_csv(write(tmp_path, ["S1,2018-03-01,08:00,4,before,1", "S1,2018-03-01,08:00,5,before,1"]))
    bad = tmp_path / "h.csv"
    bad.write_text("site,date\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="header"):
        ingest_csv(bad)
    with pytest.raises(DataValidationError, match="treated"):
        ingest_csv(write(tmp_path, ["S1,2018-03-01,08:00,4,before,1", "S1,2018-03-01,08:10,5,before,0"]))


def test_simulate_csv_round_trip(tmp_path):
    spec = SimSpec((300, 250), ModelParams(0.4, -0.3, -0.15, 0.5), -8.0, (0.25, 0.25), seed=4)
    sim = simulate_series(spec)
    p = tmp_path / "sim.csv"
    write_pet_csv(p, simulated_site_rows("S7", True, sim))
    (r,) = ingest_csv(p, {"S7": -8.0})
    a, b = sim.prepared(), prepare_site(r)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.period.tobytes() == b.period.tobytes()
    assert a.break_before.tobytes() == b.break_before.tobytes()
    assert a.exceed_rate == b.exceed_rate


def test_simulated_pet_outside_range_is_rejected():
    spec = SimSpec((500, 10), ModelParams(2.0, 0.0, 0.3, 0.5), -1.0, (0.5, 0.5), seed=1)
    with pytest.raises(DataValidationError, match=r"\(0,15\)"):
        simulated_site_rows("S1", True, simulate_series(spec))


def cfg_file(tmp_path, text):
    p = tmp_path / "c.ini"
    p.write_text(text, encoding="utf-8")
    return p


def test_config_defaults(tmp_path):
    c = load_config(cfg_file(tmp_path, "[study]\n"))
    assert (c.mcmc.thin, c.mcmc.burn_in, c.mcmc.retained_draws) == (10, 2000, 100_000)
    assert c.kappa == 10 and c.modes == ("ignore", "decluster", "markov")
    assert (c.priors.beta0_var, c.priors.beta1_var, c.priors.xi_var) == (10, 10, 100)
    assert load_config(None) == c


def test_config_values_and_errors(tmp_path):
    c = load_config(cfg_file(tmp_path, "[study]\nmode = markov\n[mcmc]\nseed = 9\n[sites]\nS1 = -5.693\n"))
    assert c.modes == ("markov",) and c.mcmc.seed == 9 and c.thresholds == {"S1": -5.693}
    for text, match in [
        ("[study]\nkappa = 0\n", "kappa"),
        ("[study]\nbogus = 1\n", "unknown key"),
        ("[extra]\n", "unknown section"),
        ("[mcmc]\nthin = 0\n", "thin"),
        ("[sites]\nS1 = abc\n", "threshold"),
        ("[study]\nmode = fancy\n", "mode"),
        ("[priors]\nxi_var = -1\n", "xi_var"),
        ("no section\n", "malformed"),
    ]:
        with pytest.raises(ConfigError, match=match):
            load_config(cfg_file(tmp_path, text))


def test_config_threshold_reflected_in_series(tmp_path):
    c = load_config(cfg_file(tmp_path, "[sites]\nS1 = -5.693\n"))
    p = write(tmp_path, ["S1,2018-03-01,08:00,4.0,before,1", "S1,2018-09-01,08:00,7.0,after,1"])
    (r,) = ingest_csv(p, c.thresholds)
    assert prepare_site(r).threshold == -5.693


def test_fmt():
    assert fmt(1.234567891) == "1.23457" and fmt(-0.0) == "0"
    with pytest.raises(ValueError):
        fmt(float("nan"))


def small_report():
    spec = SimSpec((400, 400), ModelParams(0.4, -0.3, -0.15, 0.5), -8.0, (0.25, 0.25), seed=3)
    sim = simulate_series(spec)
    import petevt.pipeline as pl

    gap = np.where(sim.period == 1, 31, 0)
    rec = pl.SiteRecord("S1", True, -8.0, np.datetime64("2018-03-01") + sim.day + gap, sim.slot,
                        -sim.values, sim.period)
    cfg = McmcConfig(retained_draws=200, thin=1, burn_in=10, pilot_iterations=200, seed=5)
    return run_study([rec], ("decluster", "markov"), cfg=cfg, theta=ThetaSettings(sim_n=100_000),
                     meta={"seed": 5})


def test_emit_report_tables(tmp_path):
    rep = small_report()
    emit_report(rep, tmp_path)
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    rows = [l.split(",") for l in lines[1:]]
    assert sum(r[1] == "markov" for r in rows) == 4
    assert sum(r[1] == "decluster" for r in rows) == 3
    for name in ("summary.csv", "caterpillar.csv", "verdicts.csv", "run_meta.json", "caterpillar.svg"):
        text = (tmp_path / name).read_text()
        assert "nan" not in text.lower() and "inf" not in text.lower().replace("info", "")
    meta = json.loads((tmp_path / "run_meta.json").read_text())
    assert meta["seed"] == 5 and "versions" in meta
    assert (tmp_path / "caterpillar.svg").read_text().startswith("<?xml")


def test_emit_report_is_deterministic(tmp_path):
    emit_report(small_report(), tmp_path / "a")
    emit_report(small_report(), tmp_path / "b")
    for name in ("summary.csv", "caterpillar.csv", "verdicts.csv", "run_meta.json", "caterpillar.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_emit_report_unwritable(tmp_path):
    f = tmp_path / "file"
    f.write_text("x")
    with pytest.raises(OSError):
        emit_report(small_report(), f / "sub")


def test_write_mrl(tmp_path):
    pts = mrl_curve(np.arange(100.0), [10.0, 50.0, 200.0])
    p = write_mrl(tmp_path, "S1", pts)
    lines = p.read_text().splitlines()
    assert lines[0] == "u,mean_excess,n_excess,lo95,hi95" and len(lines) == 3
    assert (tmp_path / "mrl_S1.svg").exists()
