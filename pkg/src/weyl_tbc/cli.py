"""``weyl-tbc`` command line: weyl-table, spectrum, resolve and verify.

Each run reads one JSON config; flags override config fields.  Output is
CSV or JSON with a fixed column order and every number printed with the
configured number of significant digits, so identical configs give
byte-identical files.  Wall time goes to stderr only.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import ConfigError, NotRegularPoint, NumericalError, WeylTBCError
from .potentials import Side, parse_potential
from .resolvent import SourceTerm, solve_tbc_bvp, truncated_domain_oracle
from .spectrum import Absorbing, Dirichlet, SpectralProblem, Transparent, absorbing_spectrum, find_spectrum
from .weyl import Method, weyl_m

log = logging.getLogger("weyl_tbc")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_NOT_REGULAR = 0, 1, 2, 3

WEYL_COLUMNS = ["re_lambda", "im_lambda", "side", "re_m", "im_m", "err_estimate", "method", "pole"]
SPECTRUM_COLUMNS = ["index", "E", "residual", "method", "interval"]
EIGENFUNCTION_COLUMNS = ["x", "re_phi", "im_phi", "re_dphi", "im_dphi"]
RESOLVE_COLUMNS = ["x", "re_phi", "im_phi"]
ORACLE_COLUMNS = ["re_oracle", "im_oracle"]

_METHODS = {"auto", Method.NUMERIC, Method.CLOSED_FORM, Method.PARABOLIC_CYLINDER, Method.ASYMPTOTIC}
_RULES = {"transparent", "absorbing", "dirichlet"}


@dataclass
class OutputSpec:
    format: str = "csv"
    path: str | None = None
    precision: int = 17


@dataclass
class RunConfig:
    raw: dict
    base_dir: Path
    potential: Any = None
    a_minus: float = 0.0
    a_plus: float = 1.0
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def digest(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def block(self, name: str) -> dict:
        b = self.raw.get(name, {})
        if not isinstance(b, dict):
            raise ConfigError(f"'{name}' must be an object")
        return b


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)


# -- config ---------------------------------------------------------------

def _number(v, what) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a number, got {v!r}")
    return float(v)


def _complex(v, what) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(_number(v[0], what), _number(v[1], what))
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(_number(v.get("re", 0.0), what), _number(v.get("im", 0.0), what))
    return complex(_number(v, what), 0.0)


def _read_columns(path: Path, ncols: int) -> list[list[float]]:
    """Numeric CSV with an optional header row."""
    if not path.is_file():
        raise ConfigError(f"referenced file {str(path)!r} does not exist")
    cols: list[list[float]] = [[] for _ in range(ncols)]
    with path.open(newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                vals = [float(c) for c in row[:ncols]]
            except ValueError:
                if i == 0:
                    continue
                raise ConfigError(f"{path}: non-numeric row {i + 1}")
            if len(vals) != ncols:
                raise ConfigError(f"{path}: row {i + 1} needs {ncols} columns")
            for c, v in zip(cols, vals):
                c.append(v)
    return cols


def _potential_block(doc, base_dir: Path):
    if not isinstance(doc, dict):
        raise ConfigError("'potential' must be an object")
    doc = dict(doc)
    if "path" in doc:
        xs, vs = _read_columns(base_dir / str(doc.pop("path")), 2)
        doc["xs"], doc["vs"] = xs, vs
    if isinstance(doc.get("base"), dict):
        doc["base"] = _potential_block(doc["base"], base_dir)
    return doc


def parse_config(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = RunConfig(raw=raw, base_dir=base_dir)
    if "potential" not in raw:
        raise ConfigError("config needs a 'potential' block")
    try:
        cfg.potential = parse_potential(_potential_block(raw["potential"], base_dir))
    except (WeylTBCError, ValueError) as exc:
        raise ConfigError(f"potential: {exc}") from exc
    interval = raw.get("interval", {})
    if not isinstance(interval, dict) or "a_minus" not in interval or "a_plus" not in interval:
        raise ConfigError("'interval' needs a_minus and a_plus")
    cfg.a_minus = _number(interval["a_minus"], "a_minus")
    cfg.a_plus = _number(interval["a_plus"], "a_plus")
    if not cfg.a_minus < cfg.a_plus:
        raise ConfigError("interval needs a_minus < a_plus")
    out = raw.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("'output' must be an object")
    cfg.output = OutputSpec(out.get("format", "csv"), out.get("path"), out.get("precision", 17))
    _check_output(cfg.output)
    return cfg


def _check_output(spec: OutputSpec):
    if spec.format not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {spec.format!r}")
    p = spec.precision
    if isinstance(p, bool) or not isinstance(p, int) or not 6 <= p <= 17:
        raise ConfigError(f"precision must be an integer in [6, 17], got {p!r}")


def load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path!r} not found")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(raw, p.parent)


# -- output ---------------------------------------------------------------

def _fmt(v, precision: int) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, f".{precision}g")
    return str(v)


def _json_value(v, precision: int):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, f".{precision}g")) if math.isfinite(v) else None
    if isinstance(v, complex):
        return {"re": _json_value(v.real, precision), "im": _json_value(v.imag, precision)}
    if isinstance(v, dict):
        return {k: _json_value(x, precision) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x, precision) for x in v]
    return str(v)


def render(table: ResultTable, fmt: str, precision: int) -> str:
    if fmt == "json":
        doc = {
            "metadata": _json_value(table.metadata, precision),
            "columns": table.columns,
            "rows": [dict(zip(table.columns, (_json_value(v, precision) for v in row))) for row in table.rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v, precision) for v in row])
    return buf.getvalue()


def emit(table: ResultTable, spec: OutputSpec):
    text = render(table, spec.format, spec.precision)
    if spec.path is None:
        sys.stdout.write(text)
        return
    path = Path(spec.path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if spec.format == "csv":
        meta = json.dumps(_json_value(table.metadata, spec.precision), indent=2, sort_keys=True) + "\n"
        path.with_name(path.name + ".meta.json").write_text(meta, encoding="utf-8")


def _metadata(cfg: RunConfig, command: str) -> dict:
    return {"tool": "weyl-tbc", "version": __version__, "command": command, "config_sha256": cfg.digest}


# -- commands -------------------------------------------------------------

def _lambda_list(block: dict) -> list[complex]:
    if "lambdas" in block:
        lams = block["lambdas"]
        if not isinstance(lams, list) or not lams:
            raise ConfigError("weyl_table.lambdas must be a non-empty list")
        return [_complex(v, "lambda") for v in lams]
    grid = block.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("weyl_table needs 'lambdas' or a 'grid' block")

    def axis(key):
        spec = grid.get(key, [0.0, 0.0, 1])
        if not (isinstance(spec, list) and len(spec) == 3):
            raise ConfigError(f"grid.{key} must be [lo, hi, n]")
        lo, hi, n = _number(spec[0], key), _number(spec[1], key), spec[2]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError(f"grid.{key} count must be a positive integer")
        return np.linspace(lo, hi, n) if n > 1 else np.array([lo])

    return [complex(r, i) for r in axis("re") for i in axis("im")]


def cmd_weyl_table(cfg: RunConfig, threads: int = 1) -> ResultTable:
    block = cfg.block("weyl_table")
    lams = _lambda_list(block)
    sides = block.get("sides", ["left", "right"])
    try:
        sides = [Side.parse(s) for s in sides]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    method = block.get("method", "auto")
    if method not in _METHODS:
        raise ConfigError(f"unknown method {method!r}")
    jobs = [(lam, side) for lam in lams for side in sides]

    def one(job):
        lam, side = job
        anchor = cfg.a_plus if side == Side.RIGHT else cfg.a_minus
        try:
            ev = weyl_m(cfg.potential, side, anchor, lam, method)
        except (NumericalError, ValueError, OverflowError, ZeroDivisionError) as exc:
            log.warning("m evaluation failed at lam=%s side=%s: %s", lam, side, exc)
            return [lam.real, lam.imag, side, math.nan, math.nan, math.nan, method, "error"]
        m = ev.m
        return [lam.real, lam.imag, side, m.real, m.imag, float(ev.err_estimate), ev.method,
                "true" if ev.pole else "false"]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    meta = _metadata(cfg, "weyl-table")
    meta["anchors"] = {"left": cfg.a_minus, "right": cfg.a_plus}
    return ResultTable(WEYL_COLUMNS, rows, meta)


def _rule(name, method):
    if name not in _RULES:
        raise ConfigError(f"boundary rule must be one of {sorted(_RULES)}, got {name!r}")
    if name == "transparent":
        return Transparent(method=method)
    return Absorbing() if name == "absorbing" else Dirichlet()


def cmd_spectrum(cfg: RunConfig, threads: int = 1, eigen_dir: str | None = None) -> ResultTable:
    block = cfg.block("spectrum")
    window = block.get("window")
    if not (isinstance(window, list) and len(window) == 2):
        raise ConfigError("spectrum.window must be [e_lo, e_hi]")
    e_lo, e_hi = _number(window[0], "window"), _number(window[1], "window")
    if not e_lo < e_hi:
        raise ConfigError("spectrum.window needs e_lo < e_hi")
    grid = block.get("grid", 200)
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 8:
        raise ConfigError("spectrum.grid must be an integer >= 8")
    method = block.get("method", "auto")
    if method not in _METHODS:
        raise ConfigError(f"unknown method {method!r}")
    left_name, right_name = block.get("left", "transparent"), block.get("right", "transparent")
    left, right = _rule(left_name, method), _rule(right_name, method)
    halfline = bool(block.get("halfline", False))
    try:
        problem = SpectralProblem(cfg.potential, cfg.a_minus, cfg.a_plus, left, right, halfline)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "absorbing" in (left_name, right_name):
        if right_name != "absorbing" or left_name == "transparent":
            raise ConfigError("absorbing runs need an absorbing right rule and an absorbing or dirichlet left rule")
        pairs = absorbing_spectrum(problem, e_lo, e_hi, grid, workers=threads)
    else:
        pairs = find_spectrum(problem, e_lo, e_hi, grid, workers=threads,
                              method="dirichlet" if left_name == right_name == "dirichlet" else "transparent")
    interval = f"({_fmt(cfg.a_minus, cfg.output.precision)},{_fmt(cfg.a_plus, cfg.output.precision)})"
    rows = [[i, p.E, p.residual, p.method, interval] for i, p in enumerate(pairs)]
    meta = _metadata(cfg, "spectrum")
    meta.update({"window": [e_lo, e_hi], "grid": grid, "rules": [left_name, right_name],
                 "count": len(pairs), "notes": [p.multiplicity_note for p in pairs]})
    if eigen_dir is not None:
        out = Path(eigen_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, p in enumerate(pairs):
            f = p.eigenfunction
            erows = [list(r) for r in zip(f.xs, f.phi.real, f.phi.imag, f.dphi.real, f.dphi.imag)]
            text = render(ResultTable(EIGENFUNCTION_COLUMNS, erows), "csv", cfg.output.precision)
            (out / f"eigenfunction_{i:03d}.csv").write_text(text, encoding="utf-8")
    return ResultTable(SPECTRUM_COLUMNS, rows, meta)


def _source(cfg: RunConfig, block: dict) -> SourceTerm:
    doc = block.get("source", {"kind": "constant", "value": 1.0})
    if not isinstance(doc, dict):
        raise ConfigError("resolve.source must be an object")
    kind = doc.get("kind", "constant")
    n = doc.get("nodes", block.get("nodes", 401))
    if isinstance(n, bool) or not isinstance(n, int) or n < 16:
        raise ConfigError("source nodes must be an integer >= 16")
    try:
        if kind == "constant":
            return SourceTerm.constant(cfg.a_minus, cfg.a_plus, _complex(doc.get("value", 1.0), "value"), n)
        if kind == "gaussian":
            return SourceTerm.gaussian(cfg.a_minus, cfg.a_plus, _number(doc.get("center", 0.0), "center"),
                                       _number(doc.get("width", 1.0), "width"),
                                       _complex(doc.get("amplitude", 1.0), "amplitude"), n)
        if kind == "tabulated":
            if "path" in doc:
                xs, re, im = _read_columns(cfg.base_dir / str(doc["path"]), 3)
            else:
                xs, re = doc.get("xs"), doc.get("re")
                im = doc.get("im", [0.0] * len(re or []))
                if not all(isinstance(a, list) for a in (xs, re, im)):
                    raise ConfigError("tabulated source needs xs, re (and optionally im) arrays")
            xs = np.asarray(xs, dtype=float)
            if abs(xs[0] - cfg.a_minus) > 1e-12 or abs(xs[-1] - cfg.a_plus) > 1e-12:
                raise ConfigError("tabulated source must span the interval exactly")
            return SourceTerm(xs, np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"source: {exc}") from exc
    raise ConfigError(f"unknown source kind {kind!r}")


def cmd_resolve(cfg: RunConfig, oracle: bool = False) -> ResultTable:
    block = cfg.block("resolve")
    if "lambda" not in block:
        raise ConfigError("resolve needs 'lambda'")
    lam = _complex(block["lambda"], "lambda")
    method = block.get("method", "auto")
    if method not in _METHODS:
        raise ConfigError(f"unknown method {method!r}")
    g = _source(cfg, block)
    sol = solve_tbc_bvp(cfg.potential, cfg.a_minus, cfg.a_plus, lam, g, method=method)
    p = sol.path
    columns = list(RESOLVE_COLUMNS)
    cols = [p.xs, p.phi.real, p.phi.imag]
    meta = _metadata(cfg, "resolve")
    meta.update({"lambda": lam, "wronskian": sol.wronskian, "left_residual": sol.left_residual,
                 "right_residual": sol.right_residual, "ode_residual": sol.ode_residual,
                 "wronskian_variation": sol.wronskian_variation})
    if oracle:
        ob = block.get("oracle", {})
        L = _number(ob.get("L", max(abs(cfg.a_minus), abs(cfg.a_plus)) + 10.0), "oracle.L")
        nn = ob.get("nodes", 24001)
        ref = truncated_domain_oracle(cfg.potential, lam, g, L, nn)
        columns += ORACLE_COLUMNS
        cols += [ref.phi.real, ref.phi.imag]
        meta["oracle"] = {"L": L, "nodes": nn, "max_abs_diff": float(np.max(np.abs(ref.phi - p.phi)))}
    rows = [list(r) for r in zip(*cols)]
    return ResultTable(columns, rows, meta)


def cmd_verify(filter_substr: str | None = None) -> int:
    from .acceptance import run_checks

    results = run_checks(filter_substr, echo=lambda s: print(s, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if results and passed == len(results) else EXIT_NUMERICAL


# -- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weyl-tbc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--out", help="output path (overrides output.path)")
        p.add_argument("--format", choices=["csv", "json"], help="overrides output.format")
        p.add_argument("--precision", type=int, help="significant digits, 6..17")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("weyl-table", help="tabulate m-functions on a lambda grid")
    common(p)
    p.add_argument("--threads", type=int, default=1)
    p = sub.add_parser("spectrum", help="eigenvalues under transparent/absorbing/dirichlet rules")
    common(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--eigenfunctions", metavar="DIR", help="write one CSV per eigenfunction")
    p = sub.add_parser("resolve", help="apply the compressed resolvent to a source")
    common(p)
    p.add_argument("--oracle", action="store_true", help="add a finite-difference comparison column")
    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--filter", help="only checks whose name contains this substring")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "verify":
        return cmd_verify(args.filter)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.output.path = args.out
        if args.format is not None:
            cfg.output.format = args.format
        if args.precision is not None:
            cfg.output.precision = args.precision
        _check_output(cfg.output)
        threads = getattr(args, "threads", 1)
        if threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "weyl-table":
            table = cmd_weyl_table(cfg, threads)
        elif args.command == "spectrum":
            table = cmd_spectrum(cfg, threads, args.eigenfunctions)
        else:
            table = cmd_resolve(cfg, args.oracle)
        emit(table, cfg.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotRegularPoint as exc:
        print(f"not a regular point: {exc}", file=sys.stderr)
        return EXIT_NOT_REGULAR
    except (NumericalError, WeylTBCError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wall time {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
