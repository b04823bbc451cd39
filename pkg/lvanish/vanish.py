"""
Vanishing decision driver.

For each candidate discriminant D the Hecke-slashed chi-weighted sum S(x)
is compared with its value at the base point on the orbits gamma_i^j . 0 of
a generating set of Gamma_0(N). Any nonzero difference proves the product
of twisted central L-values nonzero; if every difference up to
j = 2k - 1 vanishes, so does the product.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy import primefactors

from .arith import kronecker
from .errors import CostLimitError, ValidationError
from .gamma0 import EvaluationPoint, build_context, cusp_point, evaluation_points
from .localpoly import (
    HeckeSpec,
    LocalPolyParams,
    hecke_apply,
    max_leaf_denominator,
    nonconst_sum,
)
from .qforms import GL2Matrix

logger = logging.getLogger(__name__)


class Verdict(Enum):
    VANISHING = "VANISHING"
    NONVANISHING = "NONVANISHING"


@dataclass(frozen=True)
class VanishJob:
    """Inputs of the decision procedure.

    ``d0_choices`` with one entry fixes D0; with several, each D takes the
    first choice whose Kronecker symbols agree with D at every p | N.
    """
    k: int
    N: int
    d0_choices: Tuple[int, ...]
    candidates: Tuple[int, ...]
    hecke: HeckeSpec = field(default_factory=HeckeSpec)
    base_point: Fraction = Fraction(0)
    generators: Optional[Tuple[GL2Matrix, ...]] = None
    max_denominator: Optional[int] = None
    extended_cusp_check: bool = False
    atkin_lehner: Optional[Dict[str, Any]] = None


@dataclass(frozen=True)
class DiscriminantJob:
    params: LocalPolyParams
    hecke: HeckeSpec
    base_point: Fraction = Fraction(0)
    max_denominator: Optional[int] = None


@dataclass
class PointValue:
    point: Fraction
    value: Fraction
    generator: Optional[int] = None
    power: Optional[int] = None


@dataclass
class DiscriminantReport:
    D: int
    D0: int
    verdict: Optional[Verdict]
    table: List[PointValue]
    rounds_used: int
    cusp_check: Optional[Dict[Fraction, Fraction]] = None
    seconds: float = 0.0

    @property
    def cusp_check_passed(self) -> Optional[bool]:
        if self.cusp_check is None:
            return None
        return all(v == 0 for v in self.cusp_check.values())

    def first_round(self) -> List[PointValue]:
        return [pv for pv in self.table if pv.power in (None, 1)]


@dataclass
class RejectedCandidate:
    D: int
    reasons: List[str]


@dataclass
class VanishReport:
    k: int
    N: int
    results: List[DiscriminantReport] = field(default_factory=list)
    rejected: List[RejectedCandidate] = field(default_factory=list)
    atkin_lehner: Optional[Dict[str, Any]] = None

    def verdicts(self) -> Dict[int, Verdict]:
        return {r.D: r.verdict for r in self.results}


def S(job: DiscriminantJob, x) -> Fraction:
    """Hecke-slashed chi-weighted sum at x."""
    x = Fraction(x)
    if job.max_denominator is not None:
        leaf = max_leaf_denominator(job.hecke, x)
        if leaf > job.max_denominator:
            raise CostLimitError(
                f"Point {x} reaches denominator {leaf} > {job.max_denominator}; rerun with force"
            )
    params = job.params
    return hecke_apply(lambda y: nonconst_sum(params, y), params.k, job.hecke, x)


def P_relative(job: DiscriminantJob, x) -> Fraction:
    return S(job, x) - S(job, job.base_point)


def select_d0(k: int, N: int, D: int, choices: Sequence[int]) -> Tuple[Optional[int], List[str]]:
    """Pick D0 for D. An explicit single choice is never second-guessed."""
    if len(choices) == 1:
        D0 = choices[0]
        return D0, LocalPolyParams(k, N, D, D0).problems()
    reasons: List[str] = []
    for D0 in choices:
        problems = LocalPolyParams(k, N, D, D0).problems()
        if not problems:
            return D0, []
        reasons.append(f"D0={D0}: " + "; ".join(problems))
    return None, reasons or ["no D0 candidates configured"]


def _evaluate(job: DiscriminantJob, points: Sequence[EvaluationPoint], base_value: Fraction) -> List[PointValue]:
    return [
        PointValue(ep.point, S(job, ep.point) - base_value, ep.generator, ep.power)
        for ep in points
    ]


def decide_one(job: DiscriminantJob, points: Sequence[EvaluationPoint], cusp_check: bool = False,
               N: Optional[int] = None) -> DiscriminantReport:
    """Two-round decision for a single discriminant."""
    started = time.perf_counter()
    params = job.params
    base_value = S(job, job.base_point)
    first = [ep for ep in points if ep.power == 1]
    later = [ep for ep in points if ep.power != 1]

    table = _evaluate(job, first, base_value)
    rounds = 1
    if any(pv.value != 0 for pv in table):
        verdict = Verdict.NONVANISHING
    else:
        table += _evaluate(job, later, base_value)
        rounds = 2
        verdict = Verdict.VANISHING if all(pv.value == 0 for pv in table) else Verdict.NONVANISHING

    cusps = None
    if cusp_check and verdict is Verdict.VANISHING:
        level = N or params.N
        cusps = {}
        for q2 in (1, 2, 3):
            for q1 in range(1, 4):
                try:
                    x = cusp_point(level, q1, q2)
                except ValidationError:
                    continue
                cusps[x] = S(job, x) - base_value
        if any(v != 0 for v in cusps.values()):
            logger.warning(f"D={params.D}: cusp values q1/(q2 N) are not all zero: {cusps}")

    seconds = time.perf_counter() - started
    logger.info(f"D={params.D}, D0={params.D0}: {verdict.value} after {rounds} round(s) in {seconds:.2f}s")
    return DiscriminantReport(params.D, params.D0, verdict, table, rounds, cusps, seconds)


def _decide_task(args) -> DiscriminantReport:
    return decide_one(*args)


def decide(job: VanishJob, threads: int = 1) -> VanishReport:
    """Verdict per admissible candidate; rejected candidates keep their reasons."""
    job.hecke.validate(job.N)
    ctx = build_context(job.N, job.generators)
    points = evaluation_points(ctx, job.k)
    logger.info(
        f"Deciding k={job.k}, N={job.N} over {len(job.candidates)} candidates, "
        f"{sum(1 for p in points if p.power == 1)} first-round and "
        f"{sum(1 for p in points if p.power != 1)} escalation points"
    )
    if job.atkin_lehner is None:
        logger.warning("Atkin-Lehner hypotheses are not checked; record them as metadata")

    report = VanishReport(job.k, job.N, atkin_lehner=job.atkin_lehner)
    tasks = []
    for D in job.candidates:
        D0, reasons = select_d0(job.k, job.N, D, job.d0_choices)
        if reasons:
            logger.info(f"Rejected D={D}: {'; '.join(reasons)}")
            report.rejected.append(RejectedCandidate(D, reasons))
            continue
        for p, _ in job.hecke.factors:
            if D0 % p == 0:
                logger.warning(f"Hecke prime {p} divides D0={D0}")
        params = LocalPolyParams(job.k, job.N, D, D0)
        djob = DiscriminantJob(params, job.hecke, job.base_point, job.max_denominator)
        tasks.append((djob, points, job.extended_cusp_check, job.N))

    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            report.results = list(pool.map(_decide_task, tasks))
    else:
        report.results = [_decide_task(t) for t in tasks]
    return report


def table(job: VanishJob, points: Sequence, threads: int = 1) -> VanishReport:
    """P_relative at fixed points for every admissible candidate, no verdict logic."""
    job.hecke.validate(job.N)
    fixed = [EvaluationPoint(Fraction(x), -1, 1, 0) for x in points]
    report = VanishReport(job.k, job.N, atkin_lehner=job.atkin_lehner)
    tasks = []
    for D in job.candidates:
        D0, reasons = select_d0(job.k, job.N, D, job.d0_choices)
        if reasons:
            logger.info(f"Rejected D={D}: {'; '.join(reasons)}")
            report.rejected.append(RejectedCandidate(D, reasons))
            continue
        djob = DiscriminantJob(LocalPolyParams(job.k, job.N, D, D0), job.hecke, job.base_point,
                               job.max_denominator)
        tasks.append((djob, fixed))
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            report.results = list(pool.map(_table_task, tasks))
    else:
        report.results = [_table_task(t) for t in tasks]
    return report


def _table_task(args) -> DiscriminantReport:
    djob, fixed = args
    base_value = S(djob, djob.base_point)
    rows = [PointValue(ep.point, S(djob, ep.point) - base_value) for ep in fixed]
    return DiscriminantReport(djob.params.D, djob.params.D0, None, rows, 1)


def cross_reference(report: VanishReport, fixture: Dict[str, Any]) -> List[str]:
    """Mismatches between verdicts and the zero status of tabulated L-values."""
    values = fixture.get("l_values", {})
    mismatches = []
    for result in report.results:
        key = str(result.D)
        if key not in values:
            continue
        expected = Verdict.VANISHING if float(values[key]) == 0.0 else Verdict.NONVANISHING
        if result.verdict is not expected:
            mismatches.append(f"D={result.D}: decided {result.verdict.value}, L-value {values[key]}")
    return mismatches


def kronecker_signature(D: int, N: int) -> Dict[int, int]:
    """(D|p) for every p | N, the column the worked tables print."""
    return {p: kronecker(D, p) for p in primefactors(N)}
