"""
Exact integer and rational foundations.

Rationals are ``fractions.Fraction`` throughout the exact pipeline. Number theoretic
primitives (factoring, Kronecker symbols, extended Euclid, Pell) come from sympy.
"""

import logging
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from sympy import factorint, kronecker_symbol
from sympy.core.intfunc import igcdex
from sympy.solvers.diophantine.diophantine import diop_DN

from .errors import ValidationError

logger = logging.getLogger(__name__)

Rational = Fraction

PELL_SCAN_LIMIT = 10**6


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce ints, fraction strings and Fractions to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip().replace("−", "-"))
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"Malformed rational {value!r}: {e}") from e
    raise ValidationError(f"Not a rational: {value!r}")


def integer_sqrt_floor(n: int) -> int:
    if n < 0:
        raise ValidationError(f"integer_sqrt_floor of negative number {n}")
    return math.isqrt(n)


def is_square(n: int) -> bool:
    if n < 0:
        raise ValidationError(f"is_square of negative number {n}")
    r = math.isqrt(n)
    return r * r == n


def _as_int(value, what: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{what} needs integers, got {value!r}")
    try:
        return operator.index(value)
    except TypeError as e:
        raise ValidationError(f"{what} needs integers, got {value!r}") from e


def extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g and g >= 0."""
    x, y, g = igcdex(_as_int(a, "extended_gcd"), _as_int(b, "extended_gcd"))
    return int(g), int(x), int(y)


def kronecker(a: int, n: int) -> int:
    """Full Kronecker symbol (a|n) for arbitrary integers a, n."""
    return int(kronecker_symbol(_as_int(a, "Kronecker symbol"), _as_int(n, "Kronecker symbol")))


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorint(abs(n)).values())


def is_fundamental_discriminant(d: int) -> bool:
    """1, squarefree d = 1 mod 4, or 4m with squarefree m = 2, 3 mod 4."""
    if d == 1:
        return True
    if d == 0:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    """An integer congruent to 0 or 1 mod 4, flagged if fundamental."""
    value: int
    fundamental: bool

    @classmethod
    def of(cls, value: int) -> "Discriminant":
        if value % 4 not in (0, 1):
            raise ValidationError(f"{value} is not a discriminant (must be 0 or 1 mod 4)")
        return cls(value, is_fundamental_discriminant(value))

    def __int__(self) -> int:
        return self.value


def pell_fundamental(delta: int, scan_limit: int = PELL_SCAN_LIMIT) -> Tuple[int, int]:
    """Smallest positive (t, u) with t^2 - delta * u^2 = 4.

    Scans u = 1, 2, ... up to ``scan_limit`` and then hands over to sympy's
    continued-fraction solver.
    """
    if delta <= 0 or is_square(delta):
        raise ValidationError(f"Pell equation needs a positive nonsquare, got {delta}")
    if delta % 4 not in (0, 1):
        raise ValidationError(f"{delta} is not a discriminant")

    for u in range(1, scan_limit + 1):
        t2 = delta * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u

    logger.info(f"Pell scan exhausted at u={scan_limit} for delta={delta}, using continued fractions")
    candidates = []
    for t, u in diop_DN(delta, 4):
        t, u = abs(int(t)), abs(int(u))
        if u > 0:
            candidates.append((t, u))
    for x, y in diop_DN(delta, 1):
        x, y = abs(int(x)), abs(int(y))
        if y > 0:
            candidates.append((2 * x, 2 * y))
    candidates = [(t, u) for t, u in candidates if t * t - delta * u * u == 4]
    if not candidates:
        raise ValidationError(f"No Pell solution found for delta={delta}")
    return min(candidates, key=lambda tu: tu[1])
