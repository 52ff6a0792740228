"""Command-line front end: ``hermann {analyze,verify,truncate,catalog}``.

Exit codes: 0 success, 1 theorem or property violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from dataclasses import fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import austere, catalog, orbitgeom
from .errors import HermannError
from .numerics import Tolerances, clean_array, clean_float
from .sympair import analyze_pair

OUTPUT_ENV = "HERMANN_OUTPUT_DIR"
DEFAULT_OUT = "hermann-out"


class ConfigError(Exception):
    """Invalid user configuration; reported with exit code 2."""


_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text: str, field_name: str = "w") -> float:
    """Parse ``"pi/8"``, ``"3*pi/4"``, ``"-2pi/3"``, ``"0.25"`` or ``"1/3"``.

    Raises:
        ConfigError: the string is not a number or rational multiple of pi.
    """
    m = _ANGLE.match(str(text))
    if not m or (m.group(2) is None and m.group(3) is None):
        raise ConfigError(f"{field_name}: cannot parse angle {text!r} (use forms like pi/8, 3*pi/4, 0.5)")
    sign, num, pi, den = m.groups()
    coef = Fraction(num) if num else Fraction(1)
    if den:
        if int(den) == 0:
            raise ConfigError(f"{field_name}: zero denominator in {text!r}")
        coef /= int(den)
    val = float(coef) * (np.pi if pi else 1.0)
    return -val if sign == "-" else val


def parse_vector(text, dim: int, field_name: str) -> np.ndarray:
    """Comma-separated angles; a single value is broadcast to every coordinate."""
    if isinstance(text, (list, tuple)):
        parts = [str(p) for p in text]
    else:
        parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{field_name}: empty value")
    vals = [parse_angle(p, field_name) for p in parts]
    if len(vals) == 1:
        vals = vals * dim
    if len(vals) != dim:
        raise ConfigError(f"{field_name}: expected {dim} coordinates, got {len(vals)}")
    return np.array(vals)


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"param: expected k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError as exc:
            raise ConfigError(f"param {k.strip()}: integer expected, got {v!r}") from exc
    return out


def parse_n_list(text) -> list[int]:
    try:
        ns = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"N: integers expected, got {text!r}") from exc
    if not ns or min(ns) < 1:
        raise ConfigError(f"N: truncation orders must be >= 1, got {text!r}")
    return ns


def _tolerances(value) -> Tolerances:
    if value is None:
        return Tolerances()
    if isinstance(value, dict):
        names = {f.name for f in fields(Tolerances)}
        bad = set(value) - names
        if bad:
            raise ConfigError(f"tol: unknown keys {sorted(bad)}")
        try:
            return Tolerances(**{k: float(v) for k, v in value.items()})
        except ValueError as exc:
            raise ConfigError(f"tol: {exc}") from exc
    try:
        t = float(value)
    except ValueError as exc:
        raise ConfigError(f"tol: number expected, got {value!r}") from exc
    if not t > 0:
        raise ConfigError("tol: must be positive")
    return Tolerances(phase=t)


def load_config(path) -> dict:
    """Read a JSON or YAML config file into a dict."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: not valid JSON/YAML ({exc})") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    return data


def merged_config(args) -> dict:
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    params = dict(cfg.get("params") or {})
    params.update(parse_params(getattr(args, "param", None)))
    cfg["params"] = params
    for key in ("entry", "w", "xi", "grid", "N", "out", "format", "tol", "seed", "samples", "k"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _out_dir(cfg) -> Path:
    path = Path(cfg.get("out") or os.environ.get(OUTPUT_ENV) or DEFAULT_OUT)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return clean_float(obj)
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2, ensure_ascii=False)
        fh.write("\n")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([repr(clean_float(v)) if isinstance(v, float) else v for v in row])


def write_table(path: Path, fmt: str, header, rows) -> Path:
    if fmt == "json":
        path = path.with_suffix(".json")
        write_json(path, [dict(zip(header, r)) for r in rows])
    else:
        path = path.with_suffix(".csv")
        write_csv(path, header, rows)
    return path


def _build(cfg):
    name = cfg.get("entry")
    if not name:
        raise ConfigError("entry: missing (use --entry NAME; see `hermann catalog`)")
    tol = _tolerances(cfg.get("tol"))
    try:
        pair, entry = catalog.build_entry(name, cfg.get("params"), tol=tol)
    except KeyError as exc:
        raise ConfigError(f"entry: {exc.args[0]}") from exc
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    rs = analyze_pair(pair, seed=int(cfg.get("seed") or 0))
    return pair, entry, rs, tol


def _point(cfg, entry, rs, key="w", default=None) -> np.ndarray:
    spec = cfg.get(key, default)
    if spec is None:
        raise ConfigError(f"{key}: missing")
    if isinstance(spec, str) and spec.startswith("named:"):
        label = spec.split(":", 1)[1]
        points = entry.expected.get("points", {})
        if label not in points:
            raise ConfigError(f"{key}: entry {entry.name!r} has no named point {label!r} (have {sorted(points)})")
        return np.array(points[label]["w"], dtype=float)
    return parse_vector(spec, rs.rank, key)


def _default_xi(rs) -> str:
    return ",".join(["1"] + ["0"] * (rs.rank - 1)) if rs.rank else "0"


def cmd_analyze(cfg) -> int:
    pair, entry, rs, tol = _build(cfg)
    w = _point(cfg, entry, rs, "w")
    xi = _point(cfg, entry, rs, "xi", _default_xi(rs))
    out = _out_dir(cfg)
    fmt = cfg.get("format") or "csv"
    pc = orbitgeom.classify_phases(rs, w, tol)
    tn = orbitgeom.tangent_normal_dims(pc)
    fs = orbitgeom.finite_spectrum(rs, w, xi, tol)
    pf = orbitgeom.pf_spectrum(rs, w, xi, tol)
    props = austere.analyze_properties(rs, w, tol)
    cv = orbitgeom.curvature_vectors(rs, w, tol=tol)
    write_table(out / "finite_spectrum", fmt, ["value", "multiplicity"], fs.to_rows())
    write_json(out / "pf_spectrum.json", pf.to_dict())
    report = props.to_dict()
    report.update(
        {
            "entry": {"name": entry.name, "params": entry.params},
            "xi": clean_array(xi),
            "phases": pc.to_dict(),
            "tangent_dim": tn.tangent,
            "normal_dim": tn.normal,
            "curvature_vectors": cv.to_dict(),
            "root_system": rs.to_dict(),
        }
    )
    write_json(out / "report.json", report)
    summary = {k: report[k] for k in ("austere_finite", "austere_pf", "minimal", "totally_geodesic")}
    print(json.dumps(summary, sort_keys=True))
    return 0


def _grid(cfg, rs, tol):
    spec = cfg.get("grid", 200)
    if isinstance(spec, int) or (isinstance(spec, str) and spec.strip().isdigit()):
        n = int(spec)
        if n < 1:
            raise ConfigError("grid: point count must be positive")
        return austere.default_grid(rs, n, tol)
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid: expected a count or start:stop:count, got {spec!r}")
    start, stop = parse_angle(parts[0], "grid"), parse_angle(parts[1], "grid")
    try:
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid: count must be an integer, got {parts[2]!r}") from exc
    if count < 1 or not stop > start:
        raise ConfigError("grid: need stop > start and count >= 1")
    return austere.axis_grid(rs, start, stop, count, tol)


def _corrupt(rs, spec: str):
    """Test hook: overwrite ``m(alpha)`` of one positive root (``index=value``)."""
    try:
        idx, val = (int(x) for x in spec.split("="))
        root = rs.positive_roots[idx]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"corrupt-multiplicity: bad spec {spec!r}") from exc
    roots = list(rs.positive_roots)
    roots[idx] = replace(root, m_alpha=val)
    return replace(rs, positive_roots=tuple(roots))


def cmd_verify(cfg) -> int:
    pair, entry, rs, tol = _build(cfg)
    if cfg.get("corrupt_multiplicity"):
        rs = _corrupt(rs, cfg["corrupt_multiplicity"])
    grid = _grid(cfg, rs, tol)
    samples = int(cfg.get("samples") or 0)
    pts = grid + austere.random_points(rs, samples, seed=int(cfg.get("seed") or 0), tol=tol)
    rep = austere.verify_theorems(rs, pts, entry.flags, tol)
    cx = austere.search_counterexample(rs, pts, tol)
    mismatched = catalog.verify_flags(entry, rs) if not cfg.get("corrupt_multiplicity") else {}
    out = _out_dir(cfg)
    body = rep.to_dict()
    body["entry"] = {"name": entry.name, "params": entry.params}
    body["counterexamples"] = len(cx)
    body["flag_mismatches"] = {k: list(v) for k, v in mismatched.items()}
    write_json(out / "theorem_report.json", body)
    header = [f"w{i + 1}" for i in range(rs.rank)] + ["minimal", "austere_finite", "austere_pf"]
    rows = [list(map(float, w)) + ["true", "false", "true"] for w in cx]
    write_table(out / "counterexamples", cfg.get("format") or "csv", header, rows)
    print(json.dumps({"samples": rep.samples, "violations": len(rep.violations), "counterexamples": len(cx)}, sort_keys=True))
    for check, w in rep.violations:
        print(f"violation: {check} at w={clean_array(w)}", file=sys.stderr)
    if mismatched:
        print(f"flag mismatch: {mismatched}", file=sys.stderr)
    return 0 if rep.passed and not mismatched else 1


def cmd_truncate(cfg) -> int:
    pair, entry, rs, tol = _build(cfg)
    default_w = "named:counterexample" if "counterexample" in entry.expected.get("points", {}) else "0"
    w = _point(cfg, entry, rs, "w", default_w)
    xi = _point(cfg, entry, rs, "xi", _default_xi(rs))
    ns = parse_n_list(cfg.get("N", "50,100,200,400"))
    k = int(cfg.get("k") or 10)
    rows = []
    for b, block in enumerate(orbitgeom.blocks_from_phases(rs, w, xi, tol)):
        alpha = rs.positive_roots[block.root_index].alpha
        for n in ns:
            op = orbitgeom.truncated_pf_operator(block, n)
            rows.append(
                [b, block.kind, " ".join(repr(clean_float(a)) for a in alpha), clean_float(block.eps_angle),
                 n, orbitgeom.truncation_deviation(op, k), op.symmetrization_defect]
            )
    header = ["block", "kind", "alpha", "eps_angle", "N", "max_deviation", "symmetrization_defect"]
    path = write_table(_out_dir(cfg) / "convergence", cfg.get("format") or "csv", header, rows)
    print(path)
    return 0


def cmd_catalog(cfg) -> int:
    if not cfg.get("entry"):
        print(json.dumps(_clean(catalog.list_catalog()), sort_keys=True, indent=2))
        return 0
    pair, entry, rs, tol = _build(cfg)
    body = entry.to_dict()
    body["computed"] = rs.to_dict()
    body["dims"] = rs.dims()
    body["mismatches"] = catalog.match_expected_roots(entry, rs)
    out = _out_dir(cfg)
    write_json(out / f"catalog_{entry.name}.json", body)
    print(json.dumps({"entry": entry.name, "mismatches": len(body["mismatches"])}, sort_keys=True))
    return 0 if not body["mismatches"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--entry", help="catalog entry name")
    common.add_argument("--param", action="append", metavar="K=V", help="entry parameter (repeatable)")
    common.add_argument("--config", help="JSON/YAML config file; flags override it")
    common.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--format", choices=("json", "csv"), help="format of tabular outputs (default csv)")
    common.add_argument("--tol", help="lattice tolerance for phases (default 1e-9)")
    common.add_argument("--seed", type=int, help="seed for random combinations and samples")

    parser = argparse.ArgumentParser(prog="hermann", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="spectra and verdicts at one orbit point")
    p.add_argument("--w", help="orbit point: angles like pi/8 (comma list, or one value for all)")
    p.add_argument("--xi", help="normal direction in t-coordinates (default first basis vector)")

    p = sub.add_parser("verify", parents=[common], help="theorem checks over a grid")
    p.add_argument("--grid", help="total point count, or start:stop:count per axis (default 200)")
    p.add_argument("--samples", type=int, help="extra random points")
    p.add_argument("--corrupt-multiplicity", dest="corrupt_multiplicity", help=argparse.SUPPRESS)

    p = sub.add_parser("truncate", parents=[common], help="truncated operator convergence table")
    p.add_argument("--w", help="orbit point (default the entry's named point or 0)")
    p.add_argument("--xi", help="normal direction in t-coordinates")
    p.add_argument("--N", help="comma list of truncation orders (default 50,100,200,400)")
    p.add_argument("--k", type=int, help="number of largest eigenvalues compared (default 10)")

    sub.add_parser("catalog", parents=[common], help="list entries or export one")
    return parser


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "truncate": cmd_truncate, "catalog": cmd_catalog}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merged_config(args)
        if getattr(args, "corrupt_multiplicity", None):
            cfg["corrupt_multiplicity"] = args.corrupt_multiplicity
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HermannError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
