"""nonloc-mt command line: compute, verify, sweep, report.

Exit codes: 0 ok, 2 configuration error, 3 no convergence or high variance,
4 verifier status ``fails``, 5 verifier status ``inconclusive``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import fields as F
from .errors import HighVariance, NoConvergence, NonlocError
from .functional import (NonlocalParams, PowerTail, RescaledIndicator, bbm_functional, i_delta,
                         sphere_constant, sphere_constant_quadrature)
from .geometry import Ball, Box, Interval, SamplerConfig
from .verifiers import REGISTRY, run
from .verifiers.report import FAILS, HOLDS, INCONCLUSIVE, dumps, fmt6

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_FAILS, EXIT_INCONCLUSIVE = 0, 2, 3, 4, 5
DEFAULT_SEED = 20240607
DEFAULT_DELTA = 1.0
CSV_HEADER = ["param", "value", "stderr", "method"]


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _floats(text):
    if text is None or text == "":
        return None
    return [float(v) for v in str(text).split(",") if v.strip()]


def _number(text, delta=None):
    t = str(text).strip()
    if t == "delta":
        if delta is None:
            raise ConfigError("'delta' used as a value but no --delta given")
        return float(delta)
    if t.endswith("*delta"):
        return float(t[:-6]) * _number("delta", delta)
    return float(t)


def _vector(text, delta=None):
    return tuple(_number(v, delta) for v in str(text).split("/"))


def parse_field(spec: str, d: int, delta=None):
    """Catalog field from ``name:key=value,...``; vectors use ``/`` (``gradient=1/0``)."""
    name, _, rest = spec.partition(":")
    kw = {}
    for item in filter(None, rest.split(",")):
        k, sep, v = item.partition("=")
        if not sep:
            raise ConfigError(f"field option {item!r} is not key=value")
        kw[k.strip()] = v.strip()
    name = name.strip().lower()
    try:
        if name == "constant":
            return F.Constant(_number(kw.get("c", "0"), delta))
        if name == "linear":
            g = _vector(kw["gradient"], delta) if "gradient" in kw else (1.0,) + (0.0,) * (d - 1)
            return F.Linear(g, _number(kw.get("offset", "0"), delta))
        if name == "indicator":
            h = _number(kw.get("height", "1"), delta)
            r = _number(kw.get("radius", "0.5"), delta)
            c = _vector(kw["center"], delta) if "center" in kw else (0.0,) * d
            if d == 1 and "center" not in kw and "radius" not in kw:
                return F.Indicator(Interval(0.25, 0.75), h)
            return F.Indicator(Ball(c, r), h)
        if name == "loglog":
            return F.LogLog(_number(kw.get("lam", "3"), delta))
        if name == "moser":
            return F.Moser(_number(kw.get("n", "100"), delta), _number(kw.get("q", "1.5"), delta))
        if name == "tent":
            return F.RadialProfile.piecewise_linear(
                [0.0, _number(kw.get("radius", "1"), delta)],
                [_number(kw.get("height", "1"), delta), 0.0], fill=0.0, name="tent")
        if name == "grid":
            return F.GridSample.from_csv(kw["path"], mode=kw.get("mode", "linear"))
    except KeyError as exc:
        raise ConfigError(f"field {name!r} needs option {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad field spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown field {name!r}")


def parse_domain(spec, d: int, field=None):
    """``a,b`` interval, ``ball:R`` / ``ball:c1/c2,R`` or ``box:lo1/lo2,hi1/hi2``."""
    if spec is None:
        if field is not None and getattr(field, "support", None) is not None and field.radial:
            return Ball.centered(d, float(field.support))
        return Interval(0.0, 1.0) if d == 1 else Ball.centered(d, 1.0)
    s = str(spec).strip()
    try:
        if s.startswith("ball:"):
            parts = s[5:].split(",")
            if len(parts) == 1:
                return Ball.centered(d, float(parts[0]))
            return Ball(_vector(parts[0]), float(parts[1]))
        if s.startswith("box:"):
            lo, hi = s[4:].split(",")
            return Box(_vector(lo), _vector(hi))
        a, b = s.split(",")
        return Interval(float(a), float(b))
    except ValueError as exc:
        raise ConfigError(f"bad domain {spec!r}: {exc}") from None


def parse_mollifier(spec: str):
    name, _, rest = spec.partition(":")
    kw = dict(item.split("=", 1) for item in filter(None, rest.split(",")))
    if name in ("indicator", "rescaled"):
        return RescaledIndicator(float(kw.get("n", "10")))
    if name in ("powertail", "power"):
        return PowerTail(float(kw.get("s", "0.9")))
    raise ConfigError(f"unknown mollifier {name!r}")


def read_config(path: str) -> dict:
    """Plain ``key=value`` lines; ``#`` starts a comment; keys use option names."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--samples", type=int, default=None, help="Monte Carlo pair budget")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--field", default=None)
    p.add_argument("--domain", default=None)
    p.add_argument("--method", default="auto", choices=["auto", "exact1d", "radial", "montecarlo"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonloc-mt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="evaluate a single functional")
    _common(c)
    c.add_argument("--functional", default="idelta", choices=["idelta", "jdelta", "kdp", "bbm"])
    c.add_argument("--mollifier", default="indicator:n=10")

    v = sub.add_parser("verify", help="run a verifier and write its report")
    _common(v)
    v.add_argument("verifier", choices=sorted(REGISTRY))
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--q", type=float, default=None)
    v.add_argument("--gamma", type=float, default=None)
    v.add_argument("--alpha", type=float, default=None)
    v.add_argument("--lam", type=float, default=None)
    v.add_argument("--n", default=None, help="comma-separated n grid")
    v.add_argument("--tau", default=None, help="comma-separated tau grid")
    v.add_argument("--beta", default=None, help="comma-separated beta grid")
    v.add_argument("--delta-grid", default=None)
    v.add_argument("--M0", type=float, default=None)
    v.add_argument("--ell0", type=float, default=None)
    v.add_argument("--depth", type=int, default=None)

    s = sub.add_parser("sweep", help="tabulate I over one parameter; CSV + SVG")
    _common(s)
    s.add_argument("--functional", default="idelta", choices=["idelta", "jdelta"])
    s.add_argument("--param", required=True, choices=["delta", "n", "tau", "lambda"])
    s.add_argument("--values", required=True, help="comma-separated grid")
    s.add_argument("--q", type=float, default=1.5, help="Moser q for n sweeps")
    s.add_argument("--logx", action="store_true")
    s.add_argument("--logy", action="store_true")
    s.add_argument("--name", default="sweep")

    r = sub.add_parser("report", help="re-render a sweep CSV or a report JSON")
    r.add_argument("--config", help="key=value file; flags override it")
    r.add_argument("input")
    r.add_argument("--out", default=".")
    r.add_argument("--logx", action="store_true")
    r.add_argument("--logy", action="store_true")
    return ap


def parse_args(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config(args.config)
        sub = ap._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in values.items():
            act = actions.get(key)
            if act is None:
                raise ConfigError(f"unknown config key {key!r}")
            if act.nargs == 0:
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    defaults[key] = act.type(raw) if act.type else raw
                except ValueError:
                    raise ConfigError(f"config key {key!r}: bad value {raw!r}") from None
        sub.set_defaults(**defaults)
        args = ap.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# CSV and SVG
# ---------------------------------------------------------------------------

def _g17(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(path, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_g17(r["param"]), _g17(r["value"]), _g17(r["stderr"]), r["method"]])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: expected header {','.join(CSV_HEADER)}")
        return [{"param": float(a), "value": float(b), "stderr": float(c), "method": m}
                for a, b, c, m in reader]


def _svg_num(x):
    return format(x, ".2f")


def render_svg(rows, xlabel="param", ylabel="value", logx=False, logy=False) -> str:
    """SVG 1.1 line plot, 800x600 viewBox, one polyline per method."""
    W, H, L, R, T, B = 800, 600, 90, 30, 30, 70

    def tx(v, log):
        return math.log10(v) if log else v

    pts = [(tx(r["param"], logx), tx(r["value"], logy), r["method"]) for r in rows
           if math.isfinite(r["value"]) and (not logx or r["param"] > 0) and (not logy or r["value"] > 0)]
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 800 600" '
           'width="800" height="600">',
           '<rect x="0" y="0" width="800" height="600" fill="white"/>',
           f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}" stroke="black"/>',
           f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H - B}" stroke="black"/>']
    xname = f"log10({xlabel})" if logx else xlabel
    yname = f"log10({ylabel})" if logy else ylabel
    out.append(f'<text x="{(L + W - R) // 2}" y="{H - 20}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="16">{xname}</text>')
    out.append(f'<text x="24" y="{(T + H - B) // 2}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="16" transform="rotate(-90 24 {(T + H - B) // 2})">{yname}</text>')
    if pts:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        sx = lambda x: L + (x - x0) / (x1 - x0) * (W - L - R)
        sy = lambda y: H - B - (y - y0) / (y1 - y0) * (H - T - B)
        for i in range(5):
            fx = x0 + (x1 - x0) * i / 4
            fy = y0 + (y1 - y0) * i / 4
            out.append(f'<text x="{_svg_num(sx(fx))}" y="{H - B + 20}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="12">{fmt6(fx)}</text>')
            out.append(f'<text x="{L - 8}" y="{_svg_num(sy(fy) + 4)}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="12">{fmt6(fy)}</text>')
        colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
        methods = sorted({p[2] for p in pts})
        for k, m in enumerate(methods):
            series = sorted((p for p in pts if p[2] == m), key=lambda p: p[0])
            coords = " ".join(f"{_svg_num(sx(x))},{_svg_num(sy(y))}" for x, y, _ in series)
            out.append(f'<polyline fill="none" stroke="{colors[k % len(colors)]}" stroke-width="2" '
                       f'points="{coords}"><title>{m}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _sampler(args):
    samples = args.samples or (1 << 20)
    batch = 1 << 14
    return SamplerConfig(seed=args.seed, batch_size=min(batch, samples),
                         max_batches=max(2, samples // batch))


def _dim(args, default=1):
    return args.d if args.d is not None else default


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_compute(args) -> int:
    d = _dim(args)
    if args.functional == "kdp":
        p = args.p if args.p is not None else 2.0
        value = sphere_constant(d, p)
        quad = sphere_constant_quadrature(d, p)
        rec = {"functional": "kdp", "d": d, "p": p, "value": value, "stderr": 0.0,
               "method": "closed_form", "trace": [[0, quad]]}
    else:
        delta = args.delta if args.delta is not None else DEFAULT_DELTA
        field = parse_field(args.field or "linear", d, delta)
        domain = parse_domain(args.domain, d, field)
        if domain.dim != d:
            raise ConfigError("domain dimension differs from --d")
        p = args.p if args.p is not None else 2.0
        if args.functional == "bbm":
            est = bbm_functional(field, domain, p, parse_mollifier(args.mollifier), _sampler(args))
        else:
            est = i_delta(field, domain, NonlocalParams(d, p, delta), method=args.method,
                          sampler=_sampler(args), tol=args.tol or 1e-8,
                          prefactor=args.functional == "idelta")
        rec = {"functional": args.functional, "d": d, "p": p, "delta": delta,
               "field": args.field or "linear"}
        rec.update(est.to_dict())
    text = dumps(rec)
    _write(os.path.join(args.out, "compute.json"), text)
    sys.stdout.write(text)
    return EXIT_OK


def _status_code(status):
    return {HOLDS: EXIT_OK, FAILS: EXIT_FAILS, INCONCLUSIVE: EXIT_INCONCLUSIVE}[status]


def cmd_verify(args) -> int:
    d = args.d
    opts = {k: getattr(args, k) for k in ("seed", "tol", "samples", "d", "p", "delta", "trials",
                                          "q", "gamma", "alpha", "lam", "M0", "ell0", "depth")}
    opts["n"] = _floats(args.n)
    opts["tau"] = _floats(args.tau)
    opts["beta"] = _floats(args.beta)
    opts["delta_grid"] = _floats(args.delta_grid)
    if args.field:
        dd = d or 1
        opts["field_obj"] = parse_field(args.field, dd, args.delta)
        opts["domain_obj"] = parse_domain(args.domain, dd) if args.domain else None
    report = run(args.verifier, **opts)
    base = os.path.join(args.out, args.verifier)
    _write(base + ".json", report.to_json())
    _write(base + ".txt", report.to_text())
    sys.stdout.write(report.to_text())
    return _status_code(report.status)


def _sweep_rows(args):
    d = _dim(args)
    values = _floats(args.values)
    if not values:
        raise ConfigError("--values must list at least one number")
    p = args.p if args.p is not None else 2.0
    rows = []
    sampler = _sampler(args)
    tol = args.tol or 1e-8
    prefactor = args.functional == "idelta"
    for v in values:
        delta = args.delta
        if args.param == "delta":
            delta = v
            field = parse_field(args.field or "linear", d, delta)
            domain = parse_domain(args.domain, d, field)
        elif args.param == "n":
            field = F.Moser(v, args.q)
            domain = parse_domain(args.domain, d, field)
        elif args.param == "tau":
            base = parse_field(args.field or "loglog", d, delta)
            domain = parse_domain(args.domain, d, base)
            field = F.Scaled(base, v)
        else:
            field = F.LogLog(v)
            domain = parse_domain(args.domain, d, field)
        if delta is None:
            raise ConfigError("--delta is required unless sweeping delta")
        est = i_delta(field, domain, NonlocalParams(d, p, delta), method=args.method,
                      sampler=sampler, tol=tol, prefactor=prefactor)
        rows.append({"param": float(v), "value": float(est.value), "stderr": float(est.stderr),
                     "method": est.method})
    return rows


def cmd_sweep(args) -> int:
    rows = _sweep_rows(args)
    base = os.path.join(args.out, args.name)
    write_csv(base + ".csv", rows)
    # render from the file just written so `report` reproduces it exactly
    rows = read_csv(base + ".csv")
    _write(base + ".svg", render_svg(rows, "param", "value", args.logx, args.logy))
    with open(base + ".csv", encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK


def cmd_report(args) -> int:
    stem = os.path.splitext(os.path.basename(args.input))[0]
    if args.input.endswith(".csv"):
        rows = read_csv(args.input)
        _write(os.path.join(args.out, stem + ".svg"), render_svg(rows, "param", "value", args.logx,
                                                                 args.logy))
        return EXIT_OK
    with open(args.input, encoding="utf-8") as fh:
        data = json.load(fh)
    if "statement_id" in data:
        from .verifiers.report import VerificationReport
        rep = VerificationReport(data["statement_id"], data["status"], data["measured_constants"],
                                 data["evidence"], data.get("config", {}), data.get("notes", []))
        text = rep.to_text()
    else:
        text = "".join(f"{k}: {fmt6(v)}\n" for k, v in data.items() if k != "trace")
    _write(os.path.join(args.out, stem + ".txt"), text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except (NoConvergence, HighVariance) as exc:
        print(f"nonloc-mt: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, NonlocError, ValueError, OSError) as exc:
        print(f"nonloc-mt: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
