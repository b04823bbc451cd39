#!/usr/bin/env python3
"""
lvanish command line interface.

Reads a JSON job, runs it in one of four modes and writes the resulting
table as text, CSV or structured JSON.

    lvanish --config configs/s4_9.json
    lvanish --config configs/s4_25.json --mode table --format csv --threads 4
"""

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .arith import as_rational
from .config import JobConfig, Mode, OutputFormat, Settings, load_fixture
from .errors import LVanishError, ValidationError
from .gamma0 import build_context, evaluation_points
from .genus import chi
from .localpoly import LocalPolyParams, zagier_sum, zagier_zero_poly
from .maassnum import (
    SAMPLE_POINTS,
    MaassEvalConfig,
    check_exceptional_average,
    check_fricke,
    check_hecke_relation,
    check_modularity,
)
from .qforms import enumerate_at_rational
from .vanish import VanishJob, VanishReport, cross_reference, decide, select_d0, table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3


def render_rational(r) -> str:
    """'p/q' in lowest terms, integers without '/1'."""
    return str(Fraction(r))


def parse_rational(s: str) -> Fraction:
    if not isinstance(s, str):
        raise ValidationError(f"Expected a string, got {s!r}")
    return as_rational(s)


@dataclass
class OutputTable:
    """Rows keyed by D (or delta), columns keyed by evaluation point."""
    key: str
    columns: List[Fraction]
    rows: List[List[Any]] = field(default_factory=list)
    extra: List[str] = field(default_factory=list)

    def header(self) -> List[str]:
        return [self.key] + [render_rational(c) for c in self.columns] + self.extra

    def cells(self) -> List[List[str]]:
        return [[_cell(v) for v in row] for row in self.rows]


def _cell(value: Any) -> str:
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return render_rational(value)
    if isinstance(value, float):
        return f"{value:.3e}"
    return "" if value is None else str(value)


@dataclass
class RunResult:
    mode: Mode
    table: OutputTable
    structured: Dict[str, Any]
    notes: List[str] = field(default_factory=list)


def to_vanish_job(config: JobConfig, max_denominator: Optional[int]) -> VanishJob:
    return VanishJob(
        k=config.k,
        N=config.N,
        d0_choices=tuple(config.d0_choices),
        candidates=tuple(config.candidates),
        hecke=config.hecke,
        base_point=config.base_point,
        generators=tuple(config.generators) if config.generators else None,
        max_denominator=max_denominator,
        extended_cusp_check=config.extended_cusp_check,
        atkin_lehner=config.atkin_lehner,
    )


def first_round_points(config: JobConfig) -> List[Fraction]:
    ctx = build_context(config.N, config.generators)
    return [ep.point for ep in evaluation_points(ctx, config.k) if ep.first_round]


def _rejected_notes(report: VanishReport) -> List[str]:
    return [f"rejected D={r.D}: {'; '.join(r.reasons)}" for r in report.rejected]


def _lvalue_fixture(k: int, N: int, settings: Settings) -> Optional[Dict[str, Any]]:
    try:
        data = load_fixture("lvalues.json", settings.data_dir)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"L-value fixture unavailable: {e}")
        return None
    for entry in data.get("tables", []):
        if entry.get("k") == k and entry.get("N") == N:
            return entry
    return None


def run_decide(config: JobConfig, settings: Settings, max_denominator: Optional[int]) -> RunResult:
    report = decide(to_vanish_job(config, max_denominator), settings.threads)
    columns = first_round_points(config)
    out = OutputTable("D", columns, extra=["D0", "verdict"])
    rows = []
    for result in report.results:
        by_point = {pv.point: pv.value for pv in result.table}
        out.rows.append([result.D] + [by_point.get(x) for x in columns] + [result.D0, result.verdict.value])
        rows.append({
            "D": result.D,
            "D0": result.D0,
            "verdict": result.verdict.value,
            "rounds": result.rounds_used,
            "values": [
                {"point": render_rational(pv.point), "value": render_rational(pv.value),
                 "generator": pv.generator, "power": pv.power}
                for pv in result.table
            ],
            "cusp_check": None if result.cusp_check is None else {
                render_rational(x): render_rational(v) for x, v in result.cusp_check.items()
            },
        })
    notes = _rejected_notes(report)
    mismatches: List[str] = []
    fixture = _lvalue_fixture(config.k, config.N, settings)
    if fixture is not None:
        mismatches = cross_reference(report, fixture)
        for m in mismatches:
            logger.warning(f"L-value cross-reference mismatch: {m}")
        notes += [f"mismatch {m}" for m in mismatches]
    structured = {
        "mode": Mode.DECIDE.value,
        "k": config.k,
        "N": config.N,
        "results": rows,
        "rejected": [{"D": r.D, "reasons": r.reasons} for r in report.rejected],
        "l_value_mismatches": mismatches,
        "atkin_lehner": report.atkin_lehner,
    }
    return RunResult(Mode.DECIDE, out, structured, notes)


def run_table(config: JobConfig, settings: Settings, max_denominator: Optional[int],
              points: Optional[Sequence[Fraction]] = None) -> RunResult:
    points = list(points or config.points or first_round_points(config))
    report = table(to_vanish_job(config, max_denominator), points, settings.threads)
    out = OutputTable("D", points)
    for result in report.results:
        out.rows.append([result.D] + [pv.value for pv in result.table])
    structured = {
        "mode": Mode.TABLE.value,
        "k": config.k,
        "N": config.N,
        "points": [render_rational(x) for x in points],
        "rows": [
            {"D": r.D, "D0": r.D0, "values": [render_rational(pv.value) for pv in r.table]}
            for r in report.results
        ],
        "rejected": [{"D": r.D, "reasons": r.reasons} for r in report.rejected],
    }
    return RunResult(Mode.TABLE, out, structured, _rejected_notes(report))


def run_zagier(config: JobConfig, points: Optional[Sequence[Fraction]] = None) -> RunResult:
    """p_{N,delta} at the chosen points plus the p_{N,delta,0} coefficients."""
    if config.deltas:
        deltas = list(config.deltas)
    else:
        deltas = []
        for D in config.candidates:
            D0, reasons = select_d0(config.k, config.N, D, config.d0_choices)
            if D0 is not None and not reasons:
                deltas.append(D * D0)
    points = list(points or config.points or first_round_points(config))
    out = OutputTable("delta", points, extra=["A", "C"])
    rows = []
    for delta in deltas:
        values = [zagier_sum(config.N, delta, x) for x in points]
        A, C = zagier_zero_poly(config.N, delta)
        out.rows.append([delta] + values + [A, C])
        rows.append({"delta": delta, "values": [render_rational(v) for v in values], "A": A, "C": C})
    structured = {
        "mode": Mode.ZAGIER.value,
        "N": config.N,
        "points": [render_rational(x) for x in points],
        "rows": rows,
    }
    return RunResult(Mode.ZAGIER, out, structured)


def _exceptional_form(params: LocalPolyParams):
    for Q in enumerate_at_rational(params.N, params.delta, 0):
        if chi(params.D0, Q):
            return Q
    return None


def run_maass_check(config: JobConfig) -> RunResult:
    settings = config.maass
    points = settings.points or list(SAMPLE_POINTS)
    ctx = build_context(config.N, config.generators)
    generators = [g for g in ctx.generators if g.g21 != 0][: settings.generators_checked]
    out = OutputTable("D", [], extra=["check", "where", "residual"])
    rows = []

    def record(D: int, check: str, where: str, residual: float) -> None:
        out.rows.append([D, check, where, residual])
        rows.append({"D": D, "check": check, "where": where, "residual": residual})

    for D in config.candidates:
        D0, reasons = select_d0(config.k, config.N, D, config.d0_choices)
        if reasons:
            logger.info(f"Rejected D={D}: {'; '.join(reasons)}")
            continue
        params = LocalPolyParams(config.k, config.N, D, D0)
        mconf = MaassEvalConfig(params, settings.a_bound, settings.b_window, settings.quadrature_tol,
                                sample_points=tuple(points))
        for gamma in generators:
            for z in points:
                record(D, "modularity", f"{gamma} @ {z}", check_modularity(mconf, gamma, z))
        for z in points:
            record(D, "fricke", str(z), check_fricke(mconf, z))
        Q0 = _exceptional_form(params)
        if Q0 is not None:
            ladder = check_exceptional_average(mconf, Q0, settings.exceptional_ws)
            for w, residual in zip(settings.exceptional_ws, ladder):
                record(D, "exceptional", f"{Q0} w={w:g}", residual)
        if settings.hecke_prime is not None:
            p = settings.hecke_prime
            if settings.a_bound % (config.N * p * p):
                logger.warning(f"Skipping Hecke relation: a_bound is not a multiple of N p^2 = {config.N * p * p}")
            else:
                record(D, "hecke", f"p={p} max over {len(points)} points", check_hecke_relation(mconf, p))
    structured = {"mode": Mode.MAASS_CHECK.value, "k": config.k, "N": config.N, "rows": rows}
    return RunResult(Mode.MAASS_CHECK, out, structured)


def run_job(config: JobConfig, settings: Settings, max_denominator: Optional[int] = None,
            points: Optional[Sequence[Fraction]] = None) -> RunResult:
    logger.info(f"Running {config.mode.value} for k={config.k}, N={config.N} ({len(config.candidates)} candidates)")
    if config.mode is Mode.DECIDE:
        return run_decide(config, settings, max_denominator)
    if config.mode is Mode.TABLE:
        return run_table(config, settings, max_denominator, points)
    if config.mode is Mode.ZAGIER:
        return run_zagier(config, points)
    return run_maass_check(config)


def render_text(result: RunResult) -> str:
    header = result.table.header()
    body = result.table.cells()
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in [header] + body]
    lines += [f"# {note}" for note in result.notes]
    return "\n".join(lines) + "\n"


def render_csv(result: RunResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.table.header())
    writer.writerows(result.table.cells())
    return buffer.getvalue()


def render_structured(result: RunResult) -> str:
    return json.dumps(result.structured, indent=2, sort_keys=True) + "\n"


RENDERERS = {
    OutputFormat.TEXT: render_text,
    OutputFormat.CSV: render_csv,
    OutputFormat.STRUCTURED: render_structured,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvanish",
        description="Decide vanishing of twisted central L-value products via local polynomials",
    )
    parser.add_argument("--config", required=True, help="Path to a JSON job file")
    parser.add_argument("--mode", choices=[m.value for m in Mode], help="Override the job mode")
    parser.add_argument("--points", help="Comma separated rationals, e.g. '1,1/2,4/5,0'")
    parser.add_argument("--max-denominator", type=int, help="Refuse points whose Hecke leaves exceed this denominator")
    parser.add_argument("--force", action="store_true", help="Ignore the max-denominator rail")
    parser.add_argument("--threads", type=int, help="Worker processes for per-D jobs")
    parser.add_argument("--output", help="Write the report here instead of stdout")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings.from_env()
    except ValidationError as e:
        logging.basicConfig(level=logging.INFO)
        logger.error(str(e))
        return EXIT_VALIDATION
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO))

    try:
        config = JobConfig.from_file(args.config)
        if args.mode:
            config.mode = Mode(args.mode)
        points = [parse_rational(p) for p in args.points.split(",")] if args.points else None
        if args.threads is not None:
            if args.threads < 1:
                raise ValidationError(f"--threads must be at least 1, got {args.threads}")
            settings.threads = args.threads
        fmt = OutputFormat(args.format) if args.format else (
            config.output_format if config.output_format is not OutputFormat.TEXT else settings.output_format
        )
        max_denominator = None if args.force else (args.max_denominator or settings.max_denominator)
        result = run_job(config, settings, max_denominator, points)
    except ValidationError as e:
        logger.error(f"Validation failed: {e}")
        return EXIT_VALIDATION
    except LVanishError as e:
        logger.error(f"Computation failed: {e}")
        return EXIT_COMPUTATION

    rendered = RENDERERS[fmt](result)
    if args.output:
        with open(Path(args.output), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rendered)
        logger.info(f"Wrote {fmt.value} report to {args.output}")
    else:
        sys.stdout.write(rendered)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
