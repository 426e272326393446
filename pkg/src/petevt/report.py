"""Plain SVG 1.1 renderings of the caterpillar and MRL tables."""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

__all__ = ["read_caterpillar_csv", "read_mrl_csv", "caterpillar_svg", "mrl_svg", "rerender"]

_MODE_COLOURS = {"ignore": "#1b9e77", "decluster": "#d95f02", "markov": "#7570b3"}
_W, _H, _PAD = 720, 420, 60


def read_caterpillar_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {"site": r["site"], "treated": r["treated"] == "1", "mode": r["mode"],
             "mean": float(r["mean"]), "lo": float(r["lo95"]), "hi": float(r["hi95"])}
            for r in csv.DictReader(fh)
        ]


def read_mrl_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {k: float(r[k]) for k in ("u", "mean_excess", "lo95", "hi95")}
            for r in csv.DictReader(fh)
        ]


def _fmt(v: float) -> str:
    return format(v, ".2f")


def _scale(lo, hi, a, b):
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lambda v: a + (v - lo) / (hi - lo) * (b - a)


def _svg(body: list, title: str) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">\n'
        f'<title>{escape(title)}</title>\n'
        f'<rect width="{_W}" height="{_H}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _axis_ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def caterpillar_svg(rows: list) -> str:
    """beta1 posterior mean and 95% interval per site, one offset per mode."""
    if not rows:
        return _svg([], "Posterior beta1 by site")
    sites = list(dict.fromkeys(r["site"] for r in rows))
    modes = [m for m in _MODE_COLOURS if any(r["mode"] == m for r in rows)]
    lo = min(min(r["lo"] for r in rows), 0.0)
    hi = max(max(r["hi"] for r in rows), 0.0)
    span = hi - lo or 1.0
    lo, hi = lo - 0.05 * span, hi + 0.05 * span
    x = _scale(-0.5, len(sites) - 0.5, _PAD, _W - _PAD)
    y = _scale(lo, hi, _H - _PAD, _PAD)
    body = [
        f'<line x1="{_PAD}" y1="{_fmt(y(0.0))}" x2="{_W - _PAD}" y2="{_fmt(y(0.0))}" '
        'stroke="#888" stroke-dasharray="4 3"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="14">'
        "Posterior mean and 95% interval of beta1</text>",
    ]
    for t in _axis_ticks(lo, hi):
        body.append(f'<text x="{_PAD - 6}" y="{_fmt(y(t) + 4)}" text-anchor="end">{t:.2f}</text>')
    width = 0.6 / max(len(modes), 1)
    for r in rows:
        i = sites.index(r["site"])
        k = modes.index(r["mode"])
        cx = x(i - 0.3 + width * (k + 0.5))
        col = _MODE_COLOURS[r["mode"]]
        body.append(
            f'<line x1="{_fmt(cx)}" y1="{_fmt(y(r["lo"]))}" x2="{_fmt(cx)}" y2="{_fmt(y(r["hi"]))}" '
            f'stroke="{col}" stroke-width="2"/>'
        )
        body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(y(r["mean"]))}" r="3" fill="{col}"/>')
    for i, s in enumerate(sites):
        treated = next(r["treated"] for r in rows if r["site"] == s)
        label = escape(s) + ("*" if treated else "")
        body.append(f'<text x="{_fmt(x(i))}" y="{_H - _PAD + 16}" text-anchor="middle">{label}</text>')
    for k, m in enumerate(modes):
        yy = _PAD + 14 * k
        body.append(f'<rect x="{_W - _PAD - 90}" y="{yy - 8}" width="10" height="10" fill="{_MODE_COLOURS[m]}"/>')
        body.append(f'<text x="{_W - _PAD - 75}" y="{yy + 1}">{m}</text>')
    body.append(f'<text x="{_PAD}" y="{_H - 14}">* treated site</text>')
    return _svg(body, "Posterior beta1 by site")


def mrl_svg(site_id: str, points: list) -> str:
    """Mean excess against threshold with its 95% band."""
    title = f"Mean residual life, site {site_id}"
    if not points:
        return _svg([], title)
    us = [p["u"] for p in points]
    lo = min(p["lo95"] for p in points)
    hi = max(p["hi95"] for p in points)
    x = _scale(min(us), max(us), _PAD, _W - _PAD)
    y = _scale(lo, hi, _H - _PAD, _PAD)

    def path(key):
        return " ".join(f"{'M' if i == 0 else 'L'}{_fmt(x(p['u']))},{_fmt(y(p[key]))}"
                        for i, p in enumerate(points))

    body = [
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<path d="{path("lo95")}" fill="none" stroke="#999" stroke-dasharray="4 3"/>',
        f'<path d="{path("hi95")}" fill="none" stroke="#999" stroke-dasharray="4 3"/>',
        f'<path d="{path("mean_excess")}" fill="none" stroke="black" stroke-width="1.5"/>',
        f'<text x="{_W / 2}" y="{_H - 20}" text-anchor="middle">threshold u (negated PET, s)</text>',
    ]
    for t in _axis_ticks(min(us), max(us)):
        body.append(f'<text x="{_fmt(x(t))}" y="{_H - _PAD + 16}" text-anchor="middle">{t:.2f}</text>')
    for t in _axis_ticks(lo, hi):
        body.append(f'<text x="{_PAD - 6}" y="{_fmt(y(t) + 4)}" text-anchor="end">{t:.2f}</text>')
    return _svg(body, title)


def rerender(out_dir) -> list:
    """Regenerate every SVG from the CSV tables present in ``out_dir``."""
    out = Path(out_dir)
    written = []
    cat = out / "caterpillar.csv"
    if cat.exists():
        (out / "caterpillar.svg").write_text(caterpillar_svg(read_caterpillar_csv(cat)), encoding="utf-8")
        written.append(out / "caterpillar.svg")
    for p in sorted(out.glob("mrl_*.csv")):
        site = p.stem[len("mrl_"):]
        target = p.with_suffix(".svg")
        target.write_text(mrl_svg(site, read_mrl_csv(p)), encoding="utf-8")
        written.append(target)
    return written
