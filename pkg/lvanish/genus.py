"""
Extended genus character chi_{D0} on forms whose discriminant D0 divides.

Two independent implementations: ``chi_by_definition`` searches for a
represented value coprime to D0, ``chi_explicit`` uses Kohnen's product
formula. ``chi`` is the cached front door used by the pipeline.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Tuple

from sympy import factorint

from .arith import extended_gcd, is_fundamental_discriminant, kronecker
from .errors import SearchBudgetError, ValidationError
from .qforms import GL2Matrix, QuadForm, apply_matrix

logger = logging.getLogger(__name__)

SEARCH_RADIUS = 64


@dataclass(frozen=True)
class GenusCharQuery:
    d0: int
    form: QuadForm

    def __post_init__(self):
        if not is_fundamental_discriminant(self.d0):
            raise ValidationError(f"D0={self.d0} is not a fundamental discriminant")
        if self.form.discriminant % abs(self.d0) != 0:
            raise ValidationError(f"D0={self.d0} does not divide disc {self.form} = {self.form.discriminant}")

    def imprimitive(self) -> bool:
        return math.gcd(self.form.content(), self.d0) > 1


def _box_shell(r: int) -> Iterator[Tuple[int, int]]:
    for y in range(-r, r + 1):
        if abs(y) == r:
            for x in range(-r, r + 1):
                yield x, y
        else:
            yield -r, y
            yield r, y


def represented_coprime_values(q: GenusCharQuery, radius: int = SEARCH_RADIUS) -> Iterator[Tuple[int, int, int]]:
    """Yield (x, y, Q(x, y)) with Q(x, y) != 0 coprime to D0, shell by shell."""
    Q = q.form
    for r in range(1, radius + 1):
        for x, y in _box_shell(r):
            value = Q(x, y)
            if value != 0 and math.gcd(value, q.d0) == 1:
                yield x, y, value


def chi_by_definition(q: GenusCharQuery) -> int:
    if q.imprimitive():
        return 0
    for _, _, value in represented_coprime_values(q):
        return kronecker(q.d0, value)
    raise SearchBudgetError(
        f"No value coprime to {q.d0} represented by {q.form} within radius {SEARCH_RADIUS}"
    )


def p_star(p: int, d: int) -> int:
    """The signed p-part p* = +-p^l of d for which d / p* is fundamental."""
    power = 1
    rest = d
    while rest % p == 0:
        rest //= p
        power *= p
    if power == 1:
        return 1
    for candidate in (power, -power):
        if is_fundamental_discriminant(d // candidate):
            return candidate
    raise ValidationError(f"No signed {p}-part of {d} leaves a fundamental discriminant")


def _kohnen(d0: int, Q: QuadForm) -> int:
    # a > 0 and Q primitive with respect to d0
    value = 1
    ac = Q.a * Q.c
    for p, nu in factorint(Q.a).items():
        pnu = p ** nu
        ps = p_star(p, d0)
        value *= kronecker(d0 // ps, pnu) * kronecker(ps, ac // pnu)
        if value == 0:
            break
    return value


def _positive_primitive_vector(Q: QuadForm) -> Tuple[int, int]:
    # Q indefinite with a <= 0 and c <= 0
    if Q.a == 0:
        return (1 if Q.b > 0 else -1) * (abs(Q.c) + 1), 1
    # Q(x/y, 1) > 0 on an interval of half-width sqrt(disc) / (2|a|) >= 1/(2|a|)
    # around -b/(2a), so the nearest x/y with y = |a| + 1 lands inside it
    vertex = Fraction(-Q.b, 2 * Q.a)
    for y in range(1, abs(Q.a) + 2):
        x = round(vertex * y)
        if Q(x, y) > 0:
            g = math.gcd(x, y)
            return x // g, y // g
    raise SearchBudgetError(f"{Q} represents no positive value")


def _positive_leading_form(Q: QuadForm) -> QuadForm:
    if Q.a > 0:
        return Q
    if Q.c > 0:
        return QuadForm(Q.c, -Q.b, Q.a)
    x, y = _positive_primitive_vector(Q)
    # complete (x, y) to [[x, -v], [y, u]] with x u + y v = 1
    _, u, v = extended_gcd(x, y)
    return apply_matrix(Q, GL2Matrix(x, -v, y, u))


def _represents_positive(Q: QuadForm) -> bool:
    if Q.a > 0 or Q.c > 0 or Q.discriminant > 0:
        return True
    return Q.a + Q.b + Q.c > 0 or Q.a - Q.b + Q.c > 0


def chi_explicit(q: GenusCharQuery) -> int:
    if q.imprimitive():
        return 0
    Q = q.form
    sign = 1
    if not _represents_positive(Q):
        # negative semidefinite: chi(Q) = (D0 | -1) chi(-Q)
        Q = -Q
        sign = kronecker(q.d0, -1)
    return sign * _kohnen(q.d0, _positive_leading_form(Q))


@lru_cache(maxsize=1 << 20)
def _chi_cached(d0: int, a: int, b_class: int, disc: int) -> int:
    c = (b_class * b_class - disc) // (4 * a)
    Q = QuadForm(a, b_class, c)
    q = GenusCharQuery(d0, Q)
    if q.imprimitive():
        return 0
    for r in (Q.a, Q.c, Q.a + Q.b + Q.c, Q.a - Q.b + Q.c):
        if r != 0 and math.gcd(r, d0) == 1:
            return kronecker(d0, r)
    return chi_explicit(q)


def chi(d0: int, Q: QuadForm) -> int:
    """chi_{D0}(Q), cached on (D0, a, b mod 2|a|, disc) since Q o T^n has the same value."""
    if Q.a == 0:
        return chi_explicit(GenusCharQuery(d0, Q))
    return _chi_cached(d0, Q.a, Q.b % (2 * abs(Q.a)), Q.discriminant)
