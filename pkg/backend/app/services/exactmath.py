"""
Exact integer/rational arithmetic for the Josefson-Nissenzweig constructions.

Everything here is pure: binomial coefficients, the S_k identity, Wallis
products, and pi intervals built from an embedded decimal expansion so that
strict irrational inequalities reduce to integer comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterator, NamedTuple

import mpmath

from ..core.constants import DECIMAL_DIGITS, MAX_PI_DIGITS, PI_DIGITS
from ..core.errors import DomainError, PrecisionUnavailableError

BigRat = Fraction


class Verdict(str, Enum):
    PROVEN_STRICT = "proven_strict"
    PROVEN_HOLDS = "proven_holds"
    PROVEN_FALSE = "proven_false"
    INCONCLUSIVE = "inconclusive"

    @property
    def is_proven(self) -> bool:
        return self in (Verdict.PROVEN_STRICT, Verdict.PROVEN_HOLDS)


def combine(*verdicts: Verdict) -> Verdict:
    """Worst-case merge: any refutation wins, then any inconclusive."""
    if any(v is Verdict.PROVEN_FALSE for v in verdicts):
        return Verdict.PROVEN_FALSE
    if any(v is Verdict.INCONCLUSIVE for v in verdicts):
        return Verdict.INCONCLUSIVE
    if verdicts and all(v is Verdict.PROVEN_STRICT for v in verdicts):
        return Verdict.PROVEN_STRICT
    return Verdict.PROVEN_HOLDS


def binom(k: int, i: int) -> int:
    if k < 0 or i < 0 or i > k:
        return 0
    i = min(i, k - i)
    result = 1
    for t in range(1, i + 1):
        # result * (k - i + t) is divisible by t at every step; reduce the
        # pair by their gcd first so the product stays small.
        numerator = k - i + t
        g = gcd(result, t)
        result = (result // g) * (numerator // (t // g))
    return result


def ceil_half(k: int) -> int:
    return (k + 1) // 2


class SIdentity(NamedTuple):
    sum_value: int
    closed_value: int


def s_identity(k: int) -> SIdentity:
    if k < 1:
        raise DomainError(f"s_identity requires k >= 1, got {k}")
    h = ceil_half(k)
    closed_value = h * binom(k, h)
    sum_value = 0
    term = binom(k, h)
    for i in range(h, k + 1):
        sum_value += (2 * i - k) * term
        term = term * (k - i) // (i + 1)
    return SIdentity(sum_value=sum_value, closed_value=closed_value)


def upper_half_binomial_sum(k: int) -> int:
    """Sum of C(k, i) over i >= ceil(k/2)."""
    return sum(binom(k, i) for i in range(ceil_half(k), k + 1))


def upper_half_binomial_closed(k: int) -> Fraction:
    if k % 2:
        return Fraction(2 ** (k - 1))
    return Fraction(2 ** (k - 1)) + Fraction(binom(k, k // 2), 2)


def ceil_central_binomials(k_max: int) -> Iterator[tuple[int, int]]:
    """Yield (k, C(k, ceil(k/2))) for k = 1..k_max by recurrence."""
    value = 1  # C(1, 1)
    for k in range(1, k_max + 1):
        if k > 1:
            prev_c = ceil_half(k - 1)
            c = ceil_half(k)
            if c == prev_c:
                value = value * k // (k - c)
            else:
                value = value * k // c
        yield k, value


def closed_values(k_max: int) -> Iterator[tuple[int, int]]:
    """Yield (k, ceil(k/2) * C(k, ceil(k/2))) for k = 1..k_max."""
    for k, c in ceil_central_binomials(k_max):
        yield k, ceil_half(k) * c


def central_binomials(m_max: int) -> Iterator[tuple[int, int]]:
    """Yield (m, C(2m, m)) for m = 1..m_max."""
    value = 1
    for m in range(1, m_max + 1):
        value = value * 2 * (2 * m - 1) // m
        yield m, value


class WallisPair(NamedTuple):
    upper_seq: Fraction
    lower_seq: Fraction


def wallis(m: int) -> WallisPair:
    if m < 1:
        raise DomainError(f"wallis requires m >= 1, got {m}")
    product = Fraction(1)
    for i in range(1, m + 1):
        product *= Fraction((2 * i - 1) * (2 * i + 1), (2 * i) ** 2)
    return WallisPair(upper_seq=product, lower_seq=Fraction(2 * m, 2 * m + 1) * product)


def wallis_closed(m: int) -> Fraction:
    return Fraction((2 * m + 1) * binom(2 * m, m) ** 2, 16**m)


def wallis_lower_product(m: int) -> Fraction:
    """(1/2) * prod_{i<m} (1 + 1/(4i(i+1))), the increasing companion product."""
    product = Fraction(1, 2)
    for i in range(1, m):
        product *= 1 + Fraction(1, 4 * i * (i + 1))
    return product


def wallis_sequence(m_max: int) -> Iterator[tuple[int, WallisPair]]:
    """Stream (m, wallis(m)) for m = 1..m_max using the binomial closed form."""
    for m, c in central_binomials(m_max):
        upper = Fraction((2 * m + 1) * c * c, 16**m)
        yield m, WallisPair(upper_seq=upper, lower_seq=Fraction(2 * m * c * c, 16**m))



@dataclass(frozen=True)
class WallisRange:
    m_max: int
    monotone: bool
    bracketed: bool
    upper_gap_ok: bool
    lower_gap_ok: bool
    first_failure: int | None = None

    @property
    def verdict(self) -> Verdict:
        if self.monotone and self.bracketed and self.upper_gap_ok and self.lower_gap_ok:
            return Verdict.PROVEN_STRICT
        return Verdict.PROVEN_FALSE


def wallis_range(m_max: int, pi: PiInterval, tolerance: Fraction | None = None) -> WallisRange:
    """Monotonicity and pi-brackets of both Wallis sequences for m <= m_max.

    Both sequences must end within `tolerance` of 2/pi (default 1/m_max).

    Every comparison is cross-multiplied over the common denominator 16^m so
    that the loop stays in integer arithmetic.
    """
    if m_max < 1:
        raise DomainError(f"wallis_range requires m_max >= 1, got {m_max}")
    tolerance = Fraction(1, m_max) if tolerance is None else tolerance
    lo_num, lo_den = pi.lo.numerator, pi.lo.denominator
    hi_num, hi_den = pi.hi.numerator, pi.hi.denominator
    monotone = bracketed = True
    first_failure: int | None = None
    power = 1
    previous: tuple[int, int] = (0, 1)
    for m, c in central_binomials(m_max):
        power *= 16
        square = c * c
        upper, lower = (2 * m + 1) * square, 2 * m * square
        if m > 1:
            prev_upper, prev_lower = previous
            # upper_{m-1} > upper_m and lower_{m-1} < lower_m with denominators 16^(m-1), 16^m.
            if not (prev_upper * 16 > upper and prev_lower * 16 < lower):
                monotone = False
                first_failure = first_failure or m
        # lower < 2/hi and upper > 2/lo
        if not (lower * hi_num < 2 * power * hi_den and upper * lo_num > 2 * power * lo_den):
            bracketed = False
            first_failure = first_failure or m
        previous = (upper, lower)
    final_upper = Fraction(previous[0], power)
    final_lower = Fraction(previous[1], power)
    return WallisRange(
        m_max=m_max,
        monotone=monotone,
        bracketed=bracketed,
        upper_gap_ok=final_upper - 2 / pi.hi <= tolerance,
        lower_gap_ok=2 / pi.lo - final_lower <= tolerance,
        first_failure=first_failure,
    )


def pascal_rows(k_max: int) -> Iterator[tuple[int, list[int]]]:
    """Yield (k, [C(k, 0), ..., C(k, k)]) for k = 0..k_max via Pascal's rule."""
    row = [1]
    yield 0, row
    for k in range(1, k_max + 1):
        row = [1] + [a + b for a, b in zip(row, row[1:])] + [1]
        yield k, row


@dataclass(frozen=True)
class PiInterval:
    lo: Fraction
    hi: Fraction
    digits: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError("pi interval must satisfy lo < hi")
        ref_lo, ref_hi = _reference_pi_bounds()
        if not (self.lo <= ref_lo and ref_hi <= self.hi):
            raise DomainError(f"interval [{self.lo}, {self.hi}] does not enclose pi")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


def _reference_pi_bounds() -> tuple[Fraction, Fraction]:
    places = len(PI_DIGITS) - 2
    scaled = int(PI_DIGITS.replace(".", ""))
    return Fraction(scaled, 10**places), Fraction(scaled + 1, 10**places)


def pi_interval(digits: int) -> PiInterval:
    if not 1 <= digits <= MAX_PI_DIGITS:
        raise PrecisionUnavailableError(digits, MAX_PI_DIGITS)
    truncated = int(PI_DIGITS[: 2 + digits].replace(".", ""))
    scale = 10**digits
    return PiInterval(lo=Fraction(truncated, scale), hi=Fraction(truncated + 1, scale), digits=digits)


def pi_times_less_than(a: Fraction, b: Fraction, pi: PiInterval) -> Verdict:
    """Certify a*pi < b for a >= 0."""
    if a * pi.hi < b:
        return Verdict.PROVEN_STRICT
    if a * pi.lo >= b:
        return Verdict.PROVEN_FALSE
    return Verdict.INCONCLUSIVE


def pi_times_greater_than(a: Fraction, b: Fraction, pi: PiInterval) -> Verdict:
    """Certify a*pi > b for a >= 0."""
    if a * pi.lo > b:
        return Verdict.PROVEN_STRICT
    if a * pi.hi <= b:
        return Verdict.PROVEN_FALSE
    return Verdict.INCONCLUSIVE


def central_binom_bound_check(m: int, pi: PiInterval, central: int | None = None) -> Verdict:
    """4^m/sqrt(pi(m+1)) < C(2m,m) < 4^m/sqrt(pi m), squared and certified."""
    if m < 1:
        raise DomainError(f"central binomial bound requires m >= 1, got {m}")
    c = binom(2 * m, m) if central is None else central
    square = Fraction(c * c)
    bound = Fraction(16**m)
    lower = pi_times_greater_than(square * (m + 1), bound, pi)
    upper = pi_times_less_than(square * m, bound, pi)
    return combine(lower, upper)


def sqrt_upper(x: Fraction, scale: int) -> Fraction:
    """Rational u with u >= sqrt(x), within 1/scale."""
    if x < 0:
        raise DomainError("sqrt of a negative number")
    n = x * scale * scale
    ceiling = -((-n.numerator) // n.denominator)
    root = isqrt(ceiling)
    if root * root < ceiling:
        root += 1
    return Fraction(root, scale)


def sqrt_lower(x: Fraction, scale: int) -> Fraction:
    """Rational l with l <= sqrt(x), within 1/scale."""
    if x < 0:
        raise DomainError("sqrt of a negative number")
    n = x * scale * scale
    return Fraction(isqrt(n.numerator // n.denominator), scale)


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {text!r}") from exc


def decimal_text(value: Fraction | int, digits: int = DECIMAL_DIGITS) -> str:
    """Non-authoritative decimal rendering with `digits` significant digits."""
    value = Fraction(value)
    with mpmath.workdps(digits + 10):
        return mpmath.nstr(mpmath.mpf(value.numerator) / value.denominator, digits)


def inverse_sqrt_pi_text(coefficient: Fraction | int, n: int, digits: int = DECIMAL_DIGITS) -> str:
    """coefficient / sqrt(pi * n), rendered like decimal_text."""
    coefficient = Fraction(coefficient)
    with mpmath.workdps(digits + 10):
        value = mpmath.mpf(coefficient.numerator) / coefficient.denominator / mpmath.sqrt(mpmath.pi * n)
        return mpmath.nstr(value, digits)
