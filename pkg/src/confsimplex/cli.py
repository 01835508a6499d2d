"""Command-line front end: ``confsimplex {compute,verify,path,solve}``.

Exit codes: 0 success, 1 a sweep found a failing sample, 2 invalid input, 3 degenerate or
non-realizable simplex, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import (
    EUCLIDEAN_RANGE,
    HYPERBOLIC_RANGE,
    KERNEL_ANGLE_TOL,
    RANK_RTOL,
    analyze_hessian,
    path_rank_scan,
    solve_prescribed_solid_angles,
    verify_lemma_1_2,
    verify_lemma_3_2,
)
from .core import (
    PAIR_LABELS,
    ConfSimplexError,
    Geometry,
    NotConverged,
    as_lengths,
    as_radii,
    solid_angles,
)
from .euclidean import cayley_menger_det, volume_euclidean
from .functionals import (
    dihedral_angles,
    eval_R,
    eval_S,
    grad_R,
    grad_S,
    hessian_R,
    hessian_S,
    map_i,
)
from .hyperbolic import mc_volume_klein, volume_hyperbolic

EXIT_OK = 0
EXIT_LEMMA = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_SOLVER = 4

DEFAULT_TOLS = {
    "rank": RANK_RTOL,
    "kernel_angle": KERNEL_ANGLE_TOL,
    "solve": 1e-10,
    "quad": 1e-9,
}

SCHEMA_PATH = Path(__file__).with_name("schema") / "report.schema.json"

VERIFY_CSV_COLUMNS = (
    "geometry", "index", "r1", "r2", "r3", "r4",
    "lambda1", "lambda2", "lambda3", "lambda4",
    "rank", "classification", "margin", "kernel_angle", "passed", "error",
)
PATH_CSV_COLUMNS = ("t", "rank", "lambda1", "lambda2", "lambda3", "lambda4")
SOLVE_CSV_COLUMNS = ("iteration", "r1", "r2", "r3", "r4")
COMPUTE_CSV_COLUMNS = ("quantity", "index", "value")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    geometry: str
    radii: list[float] | None = None
    lengths: list[float] | None = None
    seed: int | None = None
    samples: int | None = None
    radii_range: tuple[float, float] | None = None
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLS))
    output_format: str = "json"
    output_path: str | None = None
    deterministic: bool = False
    trace: bool = False
    r_from: list[float] | None = None
    r_to: list[float] | None = None
    steps: int = 50
    targets: list[float] | None = None
    start: list[float] | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "geometry": self.geometry,
            "tolerances": dict(sorted(self.tolerances.items())),
        }
        optional = {
            "radii": self.radii,
            "lengths": self.lengths,
            "seed": self.seed,
            "samples": self.samples,
            "radii_range": list(self.radii_range) if self.radii_range else None,
            "from": self.r_from,
            "to": self.r_to,
            "steps": self.steps if self.command == "path" else None,
            "targets": self.targets,
            "start": self.start,
            "trace": self.trace if self.command == "solve" else None,
        }
        out.update({k: v for k, v in optional.items() if v is not None})
        return out


def _vector(text: str | None, n: int, name: str) -> list[float] | None:
    if text is None:
        return None
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"{name}: could not parse {text!r} as comma-separated numbers") from None
    if len(values) != n:
        raise InputError(f"{name}: expected {n} comma-separated values, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise InputError(f"{name}: values must be finite")
    return values


def _positive(values: list[float] | None, name: str) -> list[float] | None:
    if values is not None and any(v <= 0 for v in values):
        bad = [k + 1 for k, v in enumerate(values) if v <= 0]
        raise InputError(f"{name}: entries must be positive (offending position(s) {bad})")
    return values


def _parse_tols(items: Sequence[str]) -> dict[str, float]:
    tols = dict(DEFAULT_TOLS)
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or name not in tols:
            raise InputError(f"tol: expected NAME=VALUE with NAME in {sorted(tols)}, got {item!r}")
        try:
            tols[name] = float(value)
        except ValueError:
            raise InputError(f"tol: {name} value {value!r} is not a number") from None
        if not tols[name] > 0:
            raise InputError(f"tol: {name} must be positive")
    return tols


def build_config(args: argparse.Namespace) -> RunConfig:
    geometry = args.geometry
    if geometry == "both" and args.command != "verify":
        raise InputError("geometry: 'both' is only valid for verify")
    cfg = RunConfig(
        command=args.command,
        geometry=geometry,
        seed=args.seed,
        samples=args.samples,
        tolerances=_parse_tols(args.tol or []),
        output_format=args.format,
        output_path=args.output,
        deterministic=args.deterministic,
    )
    if args.samples is not None and args.samples < 1:
        raise InputError("samples: must be at least 1")
    if args.range is not None:
        lo_hi = _vector(args.range, 2, "range")
        if not 0 < lo_hi[0] < lo_hi[1]:
            raise InputError("range: expected 0 < lo < hi")
        cfg.radii_range = (lo_hi[0], lo_hi[1])

    if args.command == "compute":
        cfg.radii = _positive(_vector(args.radii, 4, "radii"), "radii")
        cfg.lengths = _positive(_vector(args.lengths, 6, "lengths"), "lengths")
        if (cfg.radii is None) == (cfg.lengths is None):
            raise InputError("radii/lengths: supply exactly one of --radii or --lengths")
    elif args.command == "path":
        cfg.r_from = _positive(_vector(args.r_from, 4, "from"), "from") or [1.0, 1.0, 1.0, 1.0]
        cfg.r_to = _positive(_vector(args.r_to, 4, "to"), "to")
        if cfg.r_to is None:
            raise InputError("to: --to is required")
        if args.steps < 1:
            raise InputError("steps: must be at least 1")
        cfg.steps = args.steps
    elif args.command == "solve":
        cfg.targets = _vector(args.targets, 4, "targets")
        cfg.start = _positive(_vector(args.start, 4, "start"), "start") or [1.0, 1.0, 1.0, 1.0]
        cfg.trace = args.trace
    return cfg


def _matrix(m: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in m]


def _floats(v: Sequence[float]) -> list[float]:
    return [float(x) for x in v]


def cmd_compute(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    g = Geometry.parse(cfg.geometry)
    tols = cfg.tolerances
    if cfg.radii is not None:
        r = as_radii(cfg.radii)
        l = map_i(r)
    else:
        r = None
        l = as_lengths(cfg.lengths)

    angles = dihedral_angles(l, g)
    out: dict[str, Any] = {
        "lengths": _floats(l),
        "pair_order": list(PAIR_LABELS),
        "dihedral_angles": _floats(angles),
        "solid_angles": _floats(solid_angles(angles)),
        "R": eval_R(l, g, quad_tol=tols["quad"]),
        "grad_R": _floats(grad_R(l, g)),
    }
    if g is Geometry.EUCLIDEAN:
        out["cayley_menger_det"] = cayley_menger_det(l)
        out["volume"] = {"value": volume_euclidean(l)}
    else:
        vol = volume_hyperbolic(l, tol=tols["quad"])
        mc_samples = cfg.samples or 200_000
        mc = mc_volume_klein(l, samples=mc_samples, seed=cfg.seed if cfg.seed is not None else 0)
        out["volume"] = {
            "value": vol.value,
            "abs_error_estimate": vol.abs_error_estimate,
            "monte_carlo": {"value": mc.value, "std_error": mc.abs_error_estimate, "samples": mc_samples},
        }
    hr, asym_r = hessian_R(l, g, return_asymmetry=True)
    out["hessian_R"] = _matrix(hr)
    out["hessian_R_asymmetry"] = asym_r
    out["hessian_R_report"] = analyze_hessian(
        hr, reference_vector=l if g is Geometry.EUCLIDEAN else None, tol=tols["rank"]
    ).to_dict()
    if r is not None:
        hs, asym_s = hessian_S(r, g, return_asymmetry=True)
        out["radii"] = _floats(r)
        out["S"] = eval_S(r, g, quad_tol=tols["quad"])
        out["grad_S"] = _floats(grad_S(r, g))
        out["hessian_S"] = _matrix(hs)
        out["hessian_S_asymmetry"] = asym_s
        out["hessian_S_report"] = analyze_hessian(
            hs, reference_vector=r if g is Geometry.EUCLIDEAN else None, tol=tols["rank"]
        ).to_dict()
    return out, EXIT_OK


def _workers() -> int:
    raw = os.environ.get("CONFSIMPLEX_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"CONFSIMPLEX_THREADS: expected an integer, got {raw!r}") from None


def cmd_verify(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    geoms = ["euclidean", "hyperbolic"] if cfg.geometry == "both" else [cfg.geometry]
    workers = _workers()
    tols = cfg.tolerances
    sweeps = []
    for name in geoms:
        if name == "euclidean":
            rep = verify_lemma_1_2(
                n=cfg.samples or 1000,
                seed=42 if cfg.seed is None else cfg.seed,
                radii_range=cfg.radii_range or EUCLIDEAN_RANGE,
                tol=tols["rank"],
                kernel_angle_tol=tols["kernel_angle"],
                workers=workers,
            )
        else:
            rep = verify_lemma_3_2(
                n=cfg.samples or 500,
                seed=7 if cfg.seed is None else cfg.seed,
                radii_range=cfg.radii_range or HYPERBOLIC_RANGE,
                tol=tols["rank"],
                workers=workers,
            )
        sweeps.append(rep)
    out = {
        "sweeps": [
            dict(rep.to_dict(include_records=cfg.output_format == "csv"),
                 check="negative_semidefinite_rank3" if rep.geometry is Geometry.EUCLIDEAN else "negative_definite")
            for rep in sweeps
        ],
        "passed": all(rep.passed for rep in sweeps),
    }
    return out, EXIT_OK if out["passed"] else EXIT_LEMMA


def cmd_path(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    rows = path_rank_scan(cfg.r_from, cfg.r_to, cfg.steps, cfg.geometry, tol=cfg.tolerances["rank"])
    ranks = sorted({rank for _, rank, _ in rows})
    return {
        "rows": [{"t": t, "rank": rank, "eigenvalues": _floats(ev)} for t, rank, ev in rows],
        "ranks": ranks,
        "constant_rank": len(ranks) == 1,
    }, EXIT_OK


def cmd_solve(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    try:
        res = solve_prescribed_solid_angles(
            cfg.targets,
            cfg.geometry,
            start=cfg.start,
            tol=cfg.tolerances["solve"],
            trace=cfg.trace,
        )
        code = EXIT_OK
        message = None
    except NotConverged as exc:
        res = exc.result
        code = EXIT_SOLVER
        message = f"{type(exc).__name__}: {exc}"
    out = res.to_dict()
    if not cfg.trace:
        out.pop("path")
    out["message"] = message
    return out, code


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "path": cmd_path, "solve": cmd_solve}


def _csv_rows(command: str, result: dict[str, Any]) -> tuple[Sequence[str], list[list[Any]]]:
    if command == "verify":
        rows = []
        for sweep in result["sweeps"]:
            for rec in sweep["records"]:
                rep = rec["report"] or {}
                ev = rep.get("eigenvalues") or [None] * 4
                rows.append([
                    sweep["geometry"], rec["index"], *rec["radii"], *ev,
                    rep.get("rank"), rep.get("classification"), rec["margin"],
                    rep.get("reference_angle"), rec["passed"], rec["error"],
                ])
        return VERIFY_CSV_COLUMNS, rows
    if command == "path":
        return PATH_CSV_COLUMNS, [[row["t"], row["rank"], *row["eigenvalues"]] for row in result["rows"]]
    if command == "solve":
        path = result.get("path") or [result["radii"]]
        return SOLVE_CSV_COLUMNS, [[k, *p] for k, p in enumerate(path)]
    rows = []
    for key, value in result.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            rows.append([key, "", value])
        elif isinstance(value, list) and value and all(isinstance(x, (int, float)) for x in value):
            rows.extend([key, k, x] for k, x in enumerate(value))
        elif isinstance(value, list) and value and isinstance(value[0], list):
            rows.extend([key, f"{i},{j}", x] for i, row in enumerate(value) for j, x in enumerate(row))
        elif isinstance(value, dict) and key == "volume":
            rows.extend([f"volume.{k}", "", v] for k, v in value.items() if isinstance(v, float))
    return COMPUTE_CSV_COLUMNS, rows


def _cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _human(command: str, doc: dict[str, Any]) -> str:
    res = doc["result"]
    lines = [f"confsimplex {command} ({doc['config']['geometry']})"]
    if command == "verify":
        for sweep in res["sweeps"]:
            lines.append(
                f"  {sweep['geometry']} {sweep['check']}: {'PASS' if sweep['passed'] else 'FAIL'}  "
                f"samples={sweep['samples']} rejected_draws={sweep['rejected_draws']} "
                f"seed={sweep['seed']} worst_margin={sweep['worst_margin']:.3e} failures={len(sweep['failures'])}"
            )
    elif command == "path":
        for row in res["rows"]:
            lines.append(f"  t={row['t']:.4f} rank={row['rank']} eig=" + " ".join(f"{x:.6e}" for x in row["eigenvalues"]))
    elif command == "solve":
        lines.append(f"  converged={res['converged']} iterations={res['iterations']} residual={res['residual_norm']:.3e}")
        lines.append("  radii=" + ", ".join(f"{x:.15g}" for x in res["radii"]))
        if res.get("message"):
            lines.append(f"  {res['message']}")
    else:
        for key in ("dihedral_angles", "solid_angles", "grad_S"):
            if key in res:
                lines.append(f"  {key}: " + ", ".join(f"{x:.12g}" for x in res[key]))
        for key in ("S", "R"):
            if key in res:
                lines.append(f"  {key} = {res[key]:.15g}")
        lines.append(f"  volume = {res['volume']['value']:.15g}")
        if "hessian_S_report" in res:
            rep = res["hessian_S_report"]
            lines.append(f"  H(S): rank {rep['rank']}, {rep['classification']}")
    return "\n".join(lines) + "\n"


def render(command: str, doc: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        header, rows = _csv_rows(command, doc["result"])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_cell(x) for x in row] for row in rows])
        return buf.getvalue()
    return _human(command, doc)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--geometry", choices=["euclidean", "hyperbolic", "both"], default="euclidean")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None,
                        help="sweep size (verify) or Monte Carlo sample count (compute)")
    common.add_argument("--range", default=None, metavar="LO,HI", help="log-uniform radii range for sweeps")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help=f"override a tolerance; names: {', '.join(sorted(DEFAULT_TOLS))}")
    common.add_argument("--format", choices=["json", "csv", "human"], default="json")
    common.add_argument("--output", default=None, metavar="PATH")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="confsimplex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="all quantities for one simplex")
    p.add_argument("--radii", metavar="R1,R2,R3,R4")
    p.add_argument("--lengths", metavar="L12,L13,L14,L23,L24,L34")

    sub.add_parser("verify", parents=[common], help="randomized definiteness sweeps for H(S)")

    p = sub.add_parser("path", parents=[common], help="rank of H(S) along a straight path in radii")
    p.add_argument("--from", dest="r_from", metavar="R1,R2,R3,R4", help="default 1,1,1,1")
    p.add_argument("--to", dest="r_to", metavar="R1,R2,R3,R4")
    p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("solve", parents=[common], help="radii with prescribed solid angles")
    p.add_argument("--targets", required=True, metavar="S1,S2,S3,S4")
    p.add_argument("--start", metavar="R1,R2,R3,R4", help="default 1,1,1,1")
    p.add_argument("--trace", action="store_true", help="include the iterate path")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        result, code = COMMANDS[cfg.command](cfg)
    except (InputError, ValueError) as exc:
        print(f"confsimplex {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfSimplexError as exc:
        # DegenerateSimplex / NotRealizable, or FD/quadrature trouble next to them
        print(f"confsimplex {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    doc: dict[str, Any] = {"command": cfg.command, "version": __version__}
    if not cfg.deterministic:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    doc["config"] = cfg.to_dict()
    doc["result"] = result
    doc["exit_code"] = code
    text = render(cfg.command, doc, cfg.output_format)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
