"""
Binary quadratic forms with a level condition.

Holds the form and matrix types, the SL2 action and Fricke involution, and
the enumeration kernels for

    Q_{N,delta}(x) = {[a,b,c] : N | a, b^2 - 4ac = delta, a < 0 < Q(x,1)}

at rational x, together with the height-bounded sets used by maassnum.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, List, Optional, Tuple, Union

from sympy import divisors

from .arith import is_square, pell_fundamental
from .errors import GeodesicProximityError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class QuadForm:
    """The form a*X^2 + b*X*Y + c*Y^2. No reduction is implied."""
    a: int
    b: int
    c: int

    @cached_property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x, y=1):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __neg__(self) -> "QuadForm":
        return QuadForm(-self.a, -self.b, -self.c)

    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def as_list(self) -> List[int]:
        return [self.a, self.b, self.c]

    def __str__(self) -> str:
        return f"[{self.a},{self.b},{self.c}]"


@dataclass(frozen=True)
class GL2Matrix:
    """Integer 2x2 matrix [[g11, g12], [g21, g22]]."""
    g11: int
    g12: int
    g21: int
    g22: int

    @classmethod
    def from_rows(cls, rows) -> "GL2Matrix":
        try:
            (g11, g12), (g21, g22) = rows
            return cls(int(g11), int(g12), int(g21), int(g22))
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Not a 2x2 integer matrix: {rows!r}") from e

    @classmethod
    def identity(cls) -> "GL2Matrix":
        return cls(1, 0, 0, 1)

    @property
    def determinant(self) -> int:
        return self.g11 * self.g22 - self.g12 * self.g21

    def rows(self) -> List[List[int]]:
        return [[self.g11, self.g12], [self.g21, self.g22]]

    def __matmul__(self, other: "GL2Matrix") -> "GL2Matrix":
        return GL2Matrix(
            self.g11 * other.g11 + self.g12 * other.g21,
            self.g11 * other.g12 + self.g12 * other.g22,
            self.g21 * other.g11 + self.g22 * other.g21,
            self.g21 * other.g12 + self.g22 * other.g22,
        )

    def __neg__(self) -> "GL2Matrix":
        return GL2Matrix(-self.g11, -self.g12, -self.g21, -self.g22)

    def inverse(self) -> "GL2Matrix":
        if self.determinant != 1:
            raise ValidationError(f"Only determinant one matrices are inverted here: {self.rows()}")
        return GL2Matrix(self.g22, -self.g12, -self.g21, self.g11)

    def __pow__(self, n: int) -> "GL2Matrix":
        base = self if n >= 0 else self.inverse()
        result = GL2Matrix.identity()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def is_projectively_equal(self, other: "GL2Matrix") -> bool:
        return self == other or self == -other

    def in_gamma0(self, N: int) -> bool:
        return self.determinant == 1 and self.g21 % N == 0

    def denominator_at(self, x: Fraction) -> Fraction:
        return self.g21 * x + self.g22

    def act(self, x) -> Optional[Fraction]:
        """Moebius action on a rational; None stands for the cusp at infinity."""
        x = Fraction(x)
        den = self.g21 * x + self.g22
        if den == 0:
            return None
        return (self.g11 * x + self.g12) / den

    def act_complex(self, z: complex) -> complex:
        return (self.g11 * z + self.g12) / (self.g21 * z + self.g22)

    def __str__(self) -> str:
        return f"[[{self.g11},{self.g12}],[{self.g21},{self.g22}]]"


def eval_at_rational(Q: QuadForm, x) -> Fraction:
    x = Fraction(x)
    return Q.a * x * x + Q.b * x + Q.c


def apply_matrix(Q: QuadForm, gamma: GL2Matrix) -> QuadForm:
    """(Q o gamma)(x, y) = Q(g11 x + g12 y, g21 x + g22 y)."""
    if gamma.determinant != 1:
        raise ValidationError(f"apply_matrix needs determinant one, got {gamma}")
    a, b, c = Q.a, Q.b, Q.c
    p, q, r, s = gamma.g11, gamma.g12, gamma.g21, gamma.g22
    return QuadForm(
        a * p * p + b * p * r + c * r * r,
        2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
        a * q * q + b * q * s + c * s * s,
    )


def fricke(Q: QuadForm, N: int) -> QuadForm:
    """[a, b, c] | W_N = [cN, -b, a/N]."""
    if N <= 0 or Q.a % N != 0:
        raise ValidationError(f"Fricke involution needs N | a, got N={N}, Q={Q}")
    return QuadForm(Q.c * N, -Q.b, Q.a // N)


def stabilizer(Q: QuadForm, N: int = 1) -> GL2Matrix:
    """Generator of the stabiliser of Q built from the fundamental Pell solution."""
    delta = Q.discriminant
    if N <= 0 or Q.a % N != 0:
        raise ValidationError(f"stabilizer needs N | a, got N={N}, Q={Q}")
    t, u = pell_fundamental(delta)
    return GL2Matrix((t - Q.b * u) // 2, -Q.c * u, Q.a * u, (t + Q.b * u) // 2)


def geodesic(Q: QuadForm) -> Tuple[float, float]:
    """Centre and radius of the semicircle S_Q = {z : Q_z = 0}."""
    if Q.a == 0:
        raise ValidationError(f"Geodesic of {Q} is a vertical line, not a semicircle")
    return -Q.b / (2 * Q.a), math.sqrt(Q.discriminant) / (2 * abs(Q.a))


@dataclass(frozen=True)
class LevelFormSet:
    """The finite set Q_{N,delta}(point), sorted by (a, b, c)."""
    level: int
    delta: int
    point: Fraction
    forms: Tuple[QuadForm, ...]

    def __len__(self) -> int:
        return len(self.forms)

    def __iter__(self) -> Iterator[QuadForm]:
        return iter(self.forms)


def _check_delta(delta: int) -> None:
    if delta <= 0 or delta % 4 not in (0, 1):
        raise ValidationError(f"delta must be a positive discriminant, got {delta}")
    if is_square(delta):
        raise ValidationError(f"delta must not be a square, got {delta}")


def _split(x: Fraction) -> Tuple[int, int]:
    return x.numerator, x.denominator


@lru_cache(maxsize=65536)
def _enumerate_fast(N: int, delta: int, u: int, v: int) -> Tuple[QuadForm, ...]:
    # With w = 2au + bv one has 4a * Q(u, v) = w^2 - delta * v^2. A member has
    # a < 0 < Q(u, v), hence |w| < v * sqrt(delta), and |a| = d runs over the
    # divisors of M = (delta v^2 - w^2) / 4 = |a| * Q(u, v) that N divides.
    dv2 = delta * v * v
    w_max = math.isqrt(dv2)
    if w_max * w_max == dv2:
        w_max -= 1
    forms = []
    for w in range(-w_max, w_max + 1):
        rest = dv2 - w * w
        if rest % 4:
            continue
        M = rest // 4
        if M % N:
            continue
        for e in divisors(M // N):
            d = N * e
            num = w + 2 * d * u
            if num % v:
                continue
            b = num // v
            if (b * b - delta) % (4 * d):
                continue
            forms.append(QuadForm(-d, b, (delta - b * b) // (4 * d)))
    forms.sort()
    return tuple(forms)


def enumerate_at_rational(N: int, delta: int, x) -> LevelFormSet:
    """All Q with N | a, disc Q = delta and a < 0 < Q(x, 1).

    Writing x = u/v in lowest terms, Q(x, 1) >= 1/v^2 for a member while
    max_x Q(x, 1) = delta / (4|a|), so |a| <= delta * v^2 / 4 and the set is
    finite. The kernel pairs w = 2au + bv with the divisors of |a| Q(u, v).
    """
    if N <= 0:
        raise ValidationError(f"Level must be positive, got {N}")
    _check_delta(delta)
    x = Fraction(x)
    u, v = _split(x)
    forms = _enumerate_fast(N, delta, u, v)
    logger.debug(f"Q_{{{N},{delta}}}({x}) has {len(forms)} forms")
    return LevelFormSet(N, delta, x, forms)


def enumerate_at_rational_scan(N: int, delta: int, x) -> LevelFormSet:
    """Reference kernel: scan a = -N, -2N, ... down to -delta v^2 / 4 and
    test every b in the window |2au + bv| < v sqrt(delta)."""
    if N <= 0:
        raise ValidationError(f"Level must be positive, got {N}")
    _check_delta(delta)
    x = Fraction(x)
    u, v = _split(x)
    dv2 = delta * v * v
    w_max = math.isqrt(dv2)
    a_max = dv2 // 4
    forms = []
    for d in range(N, a_max + 1, N):
        a = -d
        # w = 2au + bv in [-w_max, w_max]
        b_lo = -((w_max + 2 * a * u) // v)
        b_hi = (w_max - 2 * a * u) // v
        for b in range(b_lo, b_hi + 1):
            if (b * b - delta) % (4 * d):
                continue
            Q = QuadForm(a, b, (b * b - delta) // (4 * a))
            if Q.a * u * u + Q.b * u * v + Q.c * v * v > 0:
                forms.append(Q)
    forms.sort()
    return LevelFormSet(N, delta, x, tuple(forms))


def brute_force_at_rational(N: int, delta: int, x) -> LevelFormSet:
    """Box-scan oracle: |a| <= delta v^2 / 4, |b| <= sqrt(delta) + 2|a||x|."""
    _check_delta(delta)
    x = Fraction(x)
    v = x.denominator
    a_max = delta * v * v // 4
    forms = []
    for d in range(N, a_max + 1, N):
        a = -d
        b_max = math.isqrt(delta) + 1 + math.ceil(2 * d * abs(x))
        for b in range(-b_max, b_max + 1):
            num = b * b - delta
            if num % (4 * a):
                continue
            Q = QuadForm(a, b, num // (4 * a))
            if eval_at_rational(Q, x) > 0:
                forms.append(Q)
    forms.sort()
    return LevelFormSet(N, delta, x, tuple(forms))


@dataclass(frozen=True)
class HeightPoint:
    """Exact upper half-plane point with rational real part and rational Im(z)^2."""
    re: Fraction
    im_sq: Fraction

    def __post_init__(self):
        if self.im_sq <= 0:
            raise ValidationError(f"Im z must be positive, got Im(z)^2 = {self.im_sq}")


HEIGHT_MARGIN = 1e-9


def enumerate_negative_a_below_height(
    N: int, delta: int, z: Union[HeightPoint, complex]
) -> List[QuadForm]:
    """Forms with N | a, disc delta and a < 0 < Q_z.

    For a < 0 the region Q_z > 0 is the open half-disc
    (2a Re z + b)^2 + 4a^2 (Im z)^2 < delta, so |a| < sqrt(delta) / (2 Im z).
    A HeightPoint is tested exactly. Such a half-disc lies over an interval
    containing Re z, so every member also belongs to Q_{N,delta}(Re z) and the
    exact path filters that finite set. Complex points use floats and raise
    when a form sits within the margin of the boundary.
    """
    if N <= 0:
        raise ValidationError(f"Level must be positive, got {N}")
    _check_delta(delta)

    if isinstance(z, HeightPoint):
        x, y2 = z.re, z.im_sq
        if 4 * N * N * y2 >= delta:
            return []
        base = enumerate_at_rational(N, delta, x)
        return [Q for Q in base if (2 * Q.a * x + Q.b) ** 2 + 4 * Q.a * Q.a * y2 < delta]

    z = complex(z)
    x, y = z.real, z.imag
    if y <= 0:
        raise ValidationError(f"Im z must be positive, got {z}")
    a_limit = math.sqrt(delta) / (2 * y)
    forms = []
    m = 1
    while N * m < a_limit:
        a = -N * m
        room = delta - 4 * a * a * y * y
        r = math.sqrt(room)
        centre = -2 * a * x
        for b in range(math.floor(centre - r) - 1, math.ceil(centre + r) + 2):
            if (b * b - delta) % (4 * a):
                continue
            slack = room - (2 * a * x + b) ** 2
            if abs(slack) <= HEIGHT_MARGIN * delta:
                Q = QuadForm(a, b, (b * b - delta) // (4 * a))
                raise GeodesicProximityError(f"Point {z} lies on the geodesic of {Q} within float margin", Q)
            if slack > 0:
                forms.append(QuadForm(a, b, (b * b - delta) // (4 * a)))
        m += 1
    forms.sort()
    return forms


def translate_bijection_check(N: int, delta: int, x) -> bool:
    """Check [a,b,c] -> [a,b+2a,a+b+c] maps Q(x+1) onto Q(x) and
    [a,b,c] -> [a,-b,c] maps Q(x) onto Q(-x)."""
    x = Fraction(x)
    here = set(enumerate_at_rational(N, delta, x).forms)
    shifted = set(enumerate_at_rational(N, delta, x + 1).forms)
    mirrored = set(enumerate_at_rational(N, delta, -x).forms)
    translated = {QuadForm(Q.a, Q.b + 2 * Q.a, Q.a + Q.b + Q.c) for Q in shifted}
    reflected = {QuadForm(Q.a, -Q.b, Q.c) for Q in here}
    ok = translated == here and reflected == mirrored
    if not ok:
        logger.warning(f"Bijection check failed for N={N}, delta={delta}, x={x}")
    return ok
