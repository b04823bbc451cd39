"""
Exact evaluation of the local polynomial family.

Covers the chi-weighted sums over Q_{N,delta}(x), Zagier's unweighted
sums, the weight 2 - 2k slash and Hecke actions on anything that can be
evaluated at rational points, and a float diagnostic for c_infinity.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy import QQ, Poly, Rational as SymRational, binomial, isprime, primefactors, symbols
from sympy.ntheory import sqrt_mod

from .arith import is_fundamental_discriminant, is_square, kronecker
from .errors import PoleError, ValidationError
from .genus import chi
from .qforms import GL2Matrix, QuadForm, enumerate_at_rational

logger = logging.getLogger(__name__)

X = symbols("X")

Evaluable = Callable[[Fraction], Fraction]


@dataclass(frozen=True)
class LocalPolyParams:
    """Weight parameter k (forms of weight 2k), level N and discriminants D, D0."""
    k: int
    N: int
    D: int
    D0: int

    @property
    def delta(self) -> int:
        return self.D * self.D0

    def problems(self, strict: bool = True) -> List[str]:
        """Every violated invariant, as human readable reasons.

        ``strict=False`` drops the fundamental-discriminant requirement on D
        for the discriminant-shifted sets used in the Hecke relation.
        """
        reasons = []
        k, N, D, D0 = self.k, self.N, self.D, self.D0
        if k < 2:
            reasons.append(f"k={k} must be at least 2")
        if N < 1:
            reasons.append(f"N={N} must be positive")
            return reasons
        if strict and not is_fundamental_discriminant(D):
            reasons.append(f"D={D} is not a fundamental discriminant")
        if not is_fundamental_discriminant(D0):
            reasons.append(f"D0={D0} is not a fundamental discriminant")
        if (-1) ** k * D <= 0:
            reasons.append(f"sign: (-1)^{k} * D = {(-1) ** k * D} is not positive")
        if (-1) ** k * D0 <= 0:
            reasons.append(f"sign: (-1)^{k} * D0 = {(-1) ** k * D0} is not positive")
        if math.gcd(D, N) != 1:
            reasons.append(f"gcd(D={D}, N={N}) = {math.gcd(D, N)} is not 1")
        if math.gcd(D0, N) != 1:
            reasons.append(f"gcd(D0={D0}, N={N}) = {math.gcd(D0, N)} is not 1")
        for p in primefactors(N):
            if kronecker(D, p) != kronecker(D0, p):
                reasons.append(f"Kronecker mismatch at p={p}: ({D}|{p}) != ({D0}|{p})")
        delta = D * D0
        if delta <= 0 or is_square(delta):
            reasons.append(f"delta = D*D0 = {delta} is a square or not positive")
        return reasons

    def validate(self, strict: bool = True) -> "LocalPolyParams":
        reasons = self.problems(strict)
        if reasons:
            raise ValidationError("; ".join(reasons))
        return self


@dataclass(frozen=True)
class HeckeSpec:
    """Factors (p, s) of the lifted operator prod (T_p + s p^(1-2k)) in weight 2 - 2k."""
    factors: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def of(cls, pairs: Sequence) -> "HeckeSpec":
        factors = []
        for item in pairs:
            if isinstance(item, dict):
                p, s = item.get("p"), item.get("shift")
            else:
                p, s = item
            factors.append((int(p), int(s)))
        return cls(tuple(factors))

    def validate(self, N: int, D0: Optional[int] = None) -> "HeckeSpec":
        primes = [p for p, _ in self.factors]
        if len(set(primes)) != len(primes):
            raise ValidationError(f"Hecke primes must be distinct, got {primes}")
        for p in primes:
            if not isprime(p):
                raise ValidationError(f"Hecke factor {p} is not prime")
            if N % p == 0:
                raise ValidationError(f"Hecke prime {p} divides the level {N}")
            if D0 is not None and D0 % p == 0:
                logger.warning(f"Hecke prime {p} divides D0={D0}; the Maass Hecke relation does not cover it")
        return self

    def __len__(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class UnivariatePoly:
    """Exact polynomial, coefficients from the constant term upwards."""
    coefficients: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        coeffs = list(self.coefficients)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in coeffs))

    @classmethod
    def from_descending(cls, coeffs: Sequence) -> "UnivariatePoly":
        return cls(tuple(Fraction(c) for c in reversed(list(coeffs))))

    @classmethod
    def from_sympy(cls, poly: Poly) -> "UnivariatePoly":
        coeffs = [Fraction(int(c.p), int(c.q)) for c in (SymRational(x) for x in poly.all_coeffs())]
        return cls.from_descending(coeffs)

    def to_sympy(self) -> Poly:
        return Poly([SymRational(c.numerator, c.denominator) for c in reversed(self.coefficients)] or [0], X, domain=QQ)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        value = Fraction(0)
        for c in reversed(self.coefficients):
            value = value * x + c
        return value

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


@lru_cache(maxsize=1 << 18)
def _nonconst_sum_reduced(k: int, N: int, D0: int, delta: int, x: Fraction) -> Fraction:
    total = Fraction(0)
    for Q in enumerate_at_rational(N, delta, x):
        character = chi(D0, Q)
        if character:
            total += character * (Q.a * x * x + Q.b * x + Q.c) ** (k - 1)
    return total


def nonconst_sum(params: LocalPolyParams, x) -> Fraction:
    """sum over Q in Q_{N,delta}(x) of chi_{D0}(Q) Q(x,1)^(k-1).

    The sum is 1-periodic, so it is evaluated at x mod 1.
    """
    x = Fraction(x)
    reduced = x - math.floor(x)
    return _nonconst_sum_reduced(params.k, params.N, params.D0, params.delta, reduced)


def weighted_poly(params: LocalPolyParams, x0) -> UnivariatePoly:
    """sum over Q in Q_{N,delta}(x0) of chi_{D0}(Q) Q(X,1)^(k-1) as a polynomial in X."""
    total = Poly(0, X, domain=QQ)
    for Q in enumerate_at_rational(params.N, params.delta, Fraction(x0)):
        character = chi(params.D0, Q)
        if character:
            total += character * Poly([Q.a, Q.b, Q.c], X, domain=QQ) ** (params.k - 1)
    poly = UnivariatePoly.from_sympy(total)
    if poly.degree > 2 * params.k - 2:
        raise ValidationError(f"Weighted polynomial has degree {poly.degree} > {2 * params.k - 2}")
    return poly


def zagier_sum(N: int, delta: int, x) -> Fraction:
    """p_{N,delta}(x) = sum over Q in Q_{N,delta}(x) of Q(x, 1)."""
    x = Fraction(x)
    total = Fraction(0)
    for Q in enumerate_at_rational(N, delta, x):
        total += Q.a * x * x + Q.b * x + Q.c
    return total


def zagier_zero_poly(N: int, delta: int) -> Tuple[int, int]:
    """(A, C) with p_{N,delta,0}(x) = sum_{a<0<c} Q(x,1) = A x^2 + C.

    Since every summand has a < 0 < c, A and C have opposite signs and the
    pairing of forms gives A = -C N.
    """
    forms = enumerate_at_rational(N, delta, 0).forms
    A = sum(Q.a for Q in forms)
    B = sum(Q.b for Q in forms)
    C = sum(Q.c for Q in forms)
    if B != 0 or A != -C * N:
        raise ValidationError(f"p_{{{N},{delta},0}} is not of the form C(1 - N x^2): A={A}, B={B}, C={C}")
    return A, C


def slash(f: Evaluable, k: int, gamma: GL2Matrix, x) -> Fraction:
    """(f |_{2-2k} gamma)(x) = (g21 x + g22)^(2k-2) f(gamma x)."""
    x = Fraction(x)
    den = gamma.denominator_at(x)
    if den == 0:
        raise PoleError(f"Slash by {gamma} has a pole at x={x}")
    return den ** (2 * k - 2) * f((gamma.g11 * x + gamma.g12) / den)


def hecke_apply(f: Evaluable, k: int, spec: HeckeSpec, x) -> Fraction:
    """(f | prod_i (T_{p_i} + s_i p_i^(1-2k)))(x) with
    (h | T_p)(x) = p^(1-2k) h(px) + p^(-1) sum_{j mod p} h((x+j)/p)."""
    x = Fraction(x)
    if not spec.factors:
        return f(x)
    head = HeckeSpec(spec.factors[:-1])
    p, s = spec.factors[-1]

    def inner(y: Fraction) -> Fraction:
        return hecke_apply(f, k, head, y)

    weight = Fraction(1, p ** (2 * k - 1))
    value = weight * inner(p * x) + weight * s * inner(x)
    value += sum((inner((x + j) / p) for j in range(p)), Fraction(0)) / p
    return value


def hecke_constant_factor(k: int, spec: HeckeSpec) -> Fraction:
    """Action of the lifted operator on constants: prod (p^(1-2k) (1 + s) + 1)."""
    value = Fraction(1)
    for p, s in spec.factors:
        value *= Fraction(1 + s, p ** (2 * k - 1)) + 1
    return value


def max_leaf_denominator(spec: HeckeSpec, x) -> int:
    """Largest denominator hecke_apply can reach from x."""
    den = Fraction(x).denominator
    for p, _ in spec.factors:
        den *= p
    return den


@dataclass(frozen=True)
class CKDelta:
    """c_{k,delta} = rational_factor * delta^exponent."""
    rational_factor: Fraction
    exponent: Fraction
    value: float

    def exact(self, delta: int) -> Optional[Fraction]:
        """Exact value when delta is a perfect square, otherwise None."""
        if not is_square(delta):
            return None
        root = math.isqrt(delta)
        power = 2 * self.exponent
        return self.rational_factor * Fraction(root) ** int(power)


def c_k_delta(k: int, delta: int) -> CKDelta:
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    factor = Fraction((-1) ** k, 2 ** (2 * k - 3))
    exponent = Fraction(1, 2) - k
    return CKDelta(factor, exponent, float(factor) * delta ** float(exponent))


@dataclass
class CInfinityEstimate:
    """Truncated c_infinity. The tail indicator is a heuristic, not a bound."""
    estimate: float
    partial_sums: Dict[int, Fraction] = field(default_factory=dict)
    tail_indicator: float = 0.0
    trunc_A: int = 0


def _root_classes(delta: int, a: int) -> List[int]:
    roots = sqrt_mod(delta % (4 * a), 4 * a, all_roots=True) or []
    return sorted({int(r) % (2 * a) for r in roots})


def c_infinity_approx(params: LocalPolyParams, trunc_A: int) -> CInfinityEstimate:
    """c_inf = -2^(3-2k) / ((2k-1) binom(2k-2, k-1)) *
    sum_{a > 0, N | a} a^-k sum_{b mod 2a, b^2 = delta mod 4a} chi_{D0}([a, b, (b^2 - delta)/(4a)]).

    Partial sums are exact and recorded at a = N 2^m and at trunc_A. The
    tail indicator is the scaled contribution of a in (trunc_A/10, trunc_A].
    """
    k, N, delta = params.k, params.N, params.delta
    if trunc_A < N:
        raise ValidationError(f"trunc_A={trunc_A} must be at least N={N}")
    prefactor = -Fraction(2 ** 3, 2 ** (2 * k)) / ((2 * k - 1) * int(binomial(2 * k - 2, k - 1)))
    checkpoints = set()
    a = N
    while a <= trunc_A:
        checkpoints.add(a)
        a *= 2
    checkpoints.add(trunc_A - trunc_A % N)

    total = Fraction(0)
    last_decade = Fraction(0)
    partial: Dict[int, Fraction] = {}
    for a in range(N, trunc_A + 1, N):
        inner = 0
        for b in _root_classes(delta, a):
            inner += chi(params.D0, _form(a, b, delta))
        if inner:
            term = Fraction(inner, a ** k)
            total += term
            if 10 * a > trunc_A:
                last_decade += term
        if a in checkpoints:
            partial[a] = total
    estimate = float(prefactor * total)
    tail = abs(float(prefactor * last_decade))
    logger.debug(f"c_inf partial sum up to {trunc_A}: {estimate} (tail indicator {tail})")
    return CInfinityEstimate(estimate, partial, tail, trunc_A)


def _form(a: int, b: int, delta: int) -> QuadForm:
    return QuadForm(a, b, (b * b - delta) // (4 * a))


def full_local_poly_value(params: LocalPolyParams, x, c_inf: float) -> float:
    """Float diagnostic P(x) = c_inf + c_{k,delta} * nonconst_sum(x)."""
    return c_inf + c_k_delta(params.k, params.delta).value * float(nonconst_sum(params, x))
