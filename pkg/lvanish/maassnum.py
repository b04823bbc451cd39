"""
Floating point evaluation of the locally harmonic Maass form

    F(z) = delta^(1/2-k) / (binom(2k-2, k-1) 2 pi)
           * sum_{Q in Q_{N,delta}} chi_{D0}(Q) sgn(Q_z) Q(z,1)^(k-1)
             * beta(delta y^2 / |Q(z,1)|^2; k - 1/2, 1/2)

with Q_z = (a|z|^2 + b Re z + c) / Im z, plus numeric checks of its
modularity, Fricke relation, exceptional-set averaging and Hecke action.

Truncation keeps 0 < |a| <= a_bound and b within a window around -2a Re z.
A single term behaves like delta^(k-1/2) y^(2k-1) |Q(z,1)|^(-k), so shells in
a decay like a^(-k); the tail indicator is the contribution of the outer
half of the a-range. It is a heuristic, not a bound.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from sympy import binomial
from sympy.ntheory import sqrt_mod

from .arith import is_fundamental_discriminant, is_square, kronecker
from .errors import GeodesicProximityError, ValidationError
from .genus import chi
from .localpoly import LocalPolyParams
from .qforms import GL2Matrix, QuadForm, geodesic

logger = logging.getLogger(__name__)

GEODESIC_MARGIN = 1e-8

SAMPLE_POINTS = (complex(0.11, 0.83), complex(-0.29, 0.61), complex(0.37, 1.13))


@lru_cache(maxsize=32)
def _gauss_nodes(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def _beta_theta(theta_max: np.ndarray, k: int, order: int) -> np.ndarray:
    # beta(v) = 2 * integral_0^{arcsin sqrt v} sin^(2k-2)(t) dt after u = sin^2 t
    nodes, weights = _gauss_nodes(order)
    half = theta_max[..., None] / 2.0
    t = half * (nodes + 1.0)
    integrand = np.sin(t) ** (2 * k - 2)
    return 2.0 * np.sum(integrand * weights * half, axis=-1)


@lru_cache(maxsize=32)
def quadrature_order(k: int, tol: float) -> int:
    """Smallest order whose result at v = 1 agrees with twice that order to tol."""
    order = 8
    edge = np.array([math.pi / 2])
    while order < 512:
        coarse = _beta_theta(edge, k, order)[0]
        fine = _beta_theta(edge, k, 2 * order)[0]
        if abs(coarse - fine) <= tol * abs(fine):
            return order
        order *= 2
    return order


def beta_incomplete(v: float, k: int, tol: float = 1e-12) -> float:
    """beta(v; k - 1/2, 1/2) = integral_0^v u^(k-3/2) (1-u)^(-1/2) du."""
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"beta_incomplete needs 0 <= v <= 1, got {v}")
    if k < 2:
        raise ValidationError(f"k must be at least 2, got {k}")
    if v == 0.0:
        return 0.0
    theta = np.array([math.asin(math.sqrt(v))])
    return float(_beta_theta(theta, k, quadrature_order(k, tol))[0])


@dataclass(frozen=True)
class MaassEvalConfig:
    params: LocalPolyParams
    a_bound: int
    b_window: int = 24
    quadrature_tol: float = 1e-10
    window_height: Optional[float] = None
    zero_sign_forms: FrozenSet[QuadForm] = frozenset()
    strict_params: bool = True
    sample_points: Tuple[complex, ...] = SAMPLE_POINTS

    def __post_init__(self):
        if self.a_bound <= 0 or self.a_bound % self.params.N != 0:
            raise ValidationError(f"a_bound={self.a_bound} must be a positive multiple of N={self.params.N}")
        if self.b_window <= 0:
            raise ValidationError(f"b_window must be positive, got {self.b_window}")
        if not 0.0 < self.quadrature_tol <= 1e-6:
            raise ValidationError(f"quadrature_tol must lie in (0, 1e-6], got {self.quadrature_tol}")
        if not self.sample_points or any(z.imag <= 0 for z in self.sample_points):
            raise ValidationError(f"sample_points must be nonempty and in the upper half plane, got {self.sample_points}")
        if self.strict_params:
            self.params.validate()
        else:
            delta = self.params.delta
            if delta <= 0 or is_square(delta) or not is_fundamental_discriminant(self.params.D0):
                raise ValidationError(f"Need a positive nonsquare delta and fundamental D0, got {self.params}")


@dataclass
class MaassValue:
    value: complex
    tail_indicator: float
    terms: int


def _root_classes(delta: int, a: int) -> List[int]:
    m = 4 * abs(a)
    roots = sqrt_mod(delta % m, m, all_roots=True) or []
    return sorted({int(r) % (2 * abs(a)) for r in roots})


class MaassEvaluator:
    """Evaluates F for one configuration, caching residue classes and characters."""

    def __init__(self, config: MaassEvalConfig):
        self.config = config
        p = config.params
        self.k = p.k
        self.delta = p.delta
        self.order = quadrature_order(p.k, config.quadrature_tol)
        self.prefactor = self.delta ** (0.5 - p.k) / (int(binomial(2 * p.k - 2, p.k - 1)) * 2 * math.pi)
        self._classes: Dict[int, List[Tuple[int, int]]] = {}

    def _shell_classes(self, a: int) -> List[Tuple[int, int]]:
        """(b mod 2|a|, chi) for the residue classes with b^2 = delta mod 4|a|."""
        if a not in self._classes:
            D0 = self.config.params.D0
            rows = []
            for r in _root_classes(self.delta, a):
                Q = QuadForm(a, r, (r * r - self.delta) // (4 * a))
                character = chi(D0, Q)
                if character:
                    rows.append((r, character))
            self._classes[a] = rows
        return self._classes[a]

    def _shell(self, a: int, z: complex) -> Tuple[complex, int]:
        x, y = z.real, z.imag
        y_ref = self.config.window_height or y
        half = self.config.b_window * (math.sqrt(self.delta) + 2 * abs(a) * y_ref)
        centre = -2 * a * x
        period = 2 * abs(a)
        bs, chis = [], []
        for r, character in self._shell_classes(a):
            m_lo = math.ceil((centre - half - r) / period)
            m_hi = math.floor((centre + half - r) / period)
            if m_hi < m_lo:
                continue
            b = r + period * np.arange(m_lo, m_hi + 1, dtype=np.int64)
            bs.append(b)
            chis.append(np.full(b.shape, character, dtype=np.float64))
        if not bs:
            return 0j, 0
        b = np.concatenate(bs)
        weights = np.concatenate(chis)
        c = (b * b - self.delta) // (4 * a)
        bf, cf = b.astype(np.float64), c.astype(np.float64)
        qz = (a * (x * x + y * y) + bf * x + cf) / y
        sign = np.sign(qz)
        close = np.abs(qz) < GEODESIC_MARGIN * math.sqrt(self.delta)
        if close.any():
            for idx in np.nonzero(close)[0]:
                Q = QuadForm(a, int(b[idx]), int(c[idx]))
                if Q in self.config.zero_sign_forms:
                    sign[idx] = 0.0
                else:
                    raise GeodesicProximityError(f"z={z} is within {GEODESIC_MARGIN} of the geodesic of {Q}", Q)
        qvals = a * z * z + bf * z + cf
        v = self.delta / (self.delta + qz * qz)
        theta = np.arcsin(np.sqrt(np.clip(v, 0.0, 1.0)))
        beta = _beta_theta(theta, self.k, self.order)
        terms = weights * sign * qvals ** (self.k - 1) * beta
        return complex(np.sum(terms)), int(b.size)

    def __call__(self, z: complex) -> MaassValue:
        z = complex(z)
        if z.imag <= 0:
            raise ValidationError(f"Point {z} is not in the upper half plane")
        N = self.config.params.N
        A = self.config.a_bound
        shells, outer, count = [], [], 0
        for m in range(1, A // N + 1):
            for a in (-N * m, N * m):
                s, n = self._shell(a, z)
                shells.append(s)
                count += n
                if 2 * N * m > A:
                    outer.append(s)
        total = complex(np.sum(np.array(shells, dtype=np.complex128))) if shells else 0j
        tail = abs(complex(np.sum(np.array(outer, dtype=np.complex128)))) if outer else 0.0
        return MaassValue(self.prefactor * total, self.prefactor * tail, count)


def eval_F(config: MaassEvalConfig, z: complex) -> MaassValue:
    return MaassEvaluator(config)(z)


def _normalised(diff: complex, ref: complex) -> float:
    return abs(diff) / max(1.0, abs(ref))


def check_modularity(config: MaassEvalConfig, gamma: GL2Matrix, z: complex) -> float:
    """|(g21 z + g22)^(2k-2) F(gamma z) - F(z)| / max(1, |F(z)|)."""
    if gamma.determinant != 1 or gamma.g21 % config.params.N:
        raise ValidationError(f"{gamma} is not in Gamma0({config.params.N})")
    F = MaassEvaluator(config)
    k = config.params.k
    fz = F(z).value
    j = gamma.g21 * z + gamma.g22
    return _normalised(j ** (2 * k - 2) * F(gamma.act_complex(z)).value - fz, fz)


def check_fricke(config: MaassEvalConfig, z: complex) -> float:
    """|N^(k-1) z^(2k-2) F(-1/(Nz)) - (D0|N) F(z)| / max(1, |F(z)|)."""
    F = MaassEvaluator(config)
    p = config.params
    fz = F(z).value
    image = F(-1 / (p.N * z)).value
    eps = kronecker(p.D0, p.N)
    return _normalised(p.N ** (p.k - 1) * z ** (2 * p.k - 2) * image - eps * fz, fz)


def _point_on_geodesic(config: MaassEvalConfig, Q0: QuadForm, samples: int = 48) -> complex:
    """Point on S_{Q0} whose nearest other retained geodesic is farthest away."""
    centre, radius = geodesic(Q0)
    p = config.params
    best, best_gap = None, -1.0
    others = []
    A = min(config.a_bound, 4 * p.N * max(1, abs(Q0.a) // p.N))
    ev = MaassEvaluator(replace(config, a_bound=A))
    for m in range(1, ev.config.a_bound // p.N + 1):
        for a in (-p.N * m, p.N * m):
            for r, _ in ev._shell_classes(a):
                others.append((a, r))
    for i in range(1, samples):
        angle = math.pi * i / samples
        z = complex(centre + radius * math.cos(angle), radius * math.sin(angle))
        gap = math.inf
        for a, r in others:
            period = 2 * abs(a)
            m0 = round((-2 * a * z.real - r) / period)
            for m in (m0 - 1, m0, m0 + 1):
                b = r + period * m
                c = (b * b - p.delta) // (4 * a)
                if (a, b, c) in ((Q0.a, Q0.b, Q0.c), (-Q0.a, -Q0.b, -Q0.c)):
                    continue
                qz = (a * abs(z) ** 2 + b * z.real + c) / z.imag
                gap = min(gap, abs(qz))
        if gap > best_gap:
            best, best_gap = z, gap
    if best is None or best_gap <= GEODESIC_MARGIN * math.sqrt(p.delta):
        raise GeodesicProximityError(f"No point on the geodesic of {Q0} avoids the other geodesics", Q0)
    return best


def check_exceptional_average(
    config: MaassEvalConfig, Q0: QuadForm, ws: Sequence[float] = (1e-2, 1e-3, 1e-4)
) -> List[float]:
    """|F(z0) - (F(z0 + iw) + F(z0 - iw)) / 2| for each w, z0 on the geodesic of Q0.

    All evaluations share one b-window height so the retained term set is
    the same on both sides of the geodesic.
    """
    p = config.params
    if Q0.discriminant != p.delta or Q0.a % p.N:
        raise ValidationError(f"{Q0} is not in Q_{{{p.N},{p.delta}}}")
    z0 = _point_on_geodesic(config, Q0)
    fixed = replace(config, window_height=z0.imag)
    on_line = MaassEvaluator(replace(fixed, zero_sign_forms=frozenset({Q0, -Q0})))
    off_line = MaassEvaluator(fixed)
    f0 = on_line(z0).value
    residuals = []
    for w in ws:
        upper = off_line(z0 + 1j * w).value
        lower = off_line(z0 - 1j * w).value
        residuals.append(abs(f0 - (upper + lower) / 2))
    logger.info(f"Exceptional average at z0={z0:.6f} for {Q0}: {residuals}")
    return residuals


def check_hecke_relation(config: MaassEvalConfig, p: int, z: Optional[complex] = None) -> float:
    """Residual of F_D | T_p = F_{Dp^2} + p^(-k) (D|p) F_D, when p^2 does not divide D.

    Returns the largest normalised residual over ``config.sample_points``, or
    the residual at ``z`` alone when one is given. Truncations are matched:
    F_D(pz) keeps |a| <= A/p^2, F_D((z+j)/p) and F_{Dp^2} keep |a| <= A, the
    middle term keeps |a| <= A/p.
    """
    par = config.params
    if math.gcd(p, par.N * par.D0) != 1:
        raise ValidationError(f"p={p} must be coprime to N*D0={par.N * par.D0}")
    if par.D % (p * p) == 0:
        raise ValidationError(f"p^2={p * p} divides D={par.D}")
    A = config.a_bound
    if A % (par.N * p * p):
        raise ValidationError(f"a_bound={A} must be a multiple of N p^2 = {par.N * p * p}")
    k = par.k
    lifted = LocalPolyParams(k, par.N, par.D * p * p, par.D0)
    F_small = MaassEvaluator(replace(config, a_bound=A // (p * p)))
    F_full = MaassEvaluator(config)
    F_mid = MaassEvaluator(replace(config, a_bound=A // p))
    F_lift = MaassEvaluator(replace(config, params=lifted, strict_params=False))
    twist = p ** (-k) * kronecker(par.D, p)

    worst = 0.0
    for w in (config.sample_points if z is None else (z,)):
        lhs = p ** (1 - 2 * k) * F_small(p * w).value
        lhs += sum(F_full((w + j) / p).value for j in range(p)) / p
        rhs = F_lift(w).value + twist * F_mid(w).value
        residual = _normalised(lhs - rhs, rhs)
        logger.info(f"Hecke relation at p={p}, z={w}: residual {residual:.3e}")
        worst = max(worst, residual)
    return worst


def xi_diagnostic(config: MaassEvalConfig, z: complex, h: float = 1e-3) -> float:
    """Finite-difference weight 2-2k Laplacian of F at z. No pass threshold."""
    F = MaassEvaluator(config)
    kappa = 2 - 2 * config.params.k
    y = z.imag
    f = F(z).value
    fxp, fxm = F(z + h).value, F(z - h).value
    fyp, fym = F(z + 1j * h).value, F(z - 1j * h).value
    fxx = (fxp - 2 * f + fxm) / h ** 2
    fyy = (fyp - 2 * f + fym) / h ** 2
    fx = (fxp - fxm) / (2 * h)
    fy = (fyp - fym) / (2 * h)
    lap = -y * y * (fxx + fyy) + 1j * kappa * y * (fx + 1j * fy)
    return abs(lap)
