"""Arbitrary-precision binary floating point with explicit precision ``p``.

A p-bit float is a pair ``(m, e)`` of arbitrary-size integers encoding the
value ``m * 2**e``.  Zero is canonically ``(0, 0)``; otherwise the
significand is normalized, ``2**(p-1) <= |m| <= 2**p - 1``, and the exponent
lies in the two's-complement window ``-2**p <= e < 2**p``.  Every operation
takes an exact rational detour (:class:`fractions.Fraction`) and applies a
single final rounding, so results are bit-reproducible.

Rounding (:func:`round_p`) is round-to-nearest with ties resolved toward the
even significand.  A result whose nearest representable would need an
exponent ``>= 2**p`` raises :class:`Overflow`; tiny results round to zero or
the smallest normalized magnitude, whichever is nearer (underflow is not an
error).

Division-flavoured scaling inside the arithmetic ops uses an *approximate*
quotient: ``a`` over ``b`` equals the exact quotient when that quotient is
an integer multiple of 1/4, and otherwise the exact quotient plus a fixed
bias of 1/8 (added regardless of sign).  :func:`approx_div` implements this
and returns a ``Fraction``, not a float.

Zero carries no intrinsic exponent (``(0, e)`` denotes the same value for
every ``e``; the stored form is the canonical ``(0, 0)``).  The exponent
alignment in :func:`fp_add` and :func:`fp_compare` therefore treats a zero
operand as having the *other* operand's exponent: addition with zero is an
identity and comparison against zero is sign-correct, instead of the tiny
operand being demoted through the approximate quotient by a meaningless
exponent gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Comparison",
    "DivisionByZero",
    "FpError",
    "FpNumber",
    "Overflow",
    "approx_div",
    "fp_add",
    "fp_compare",
    "fp_div",
    "fp_floor",
    "fp_mul",
    "iter_add",
    "iter_mul",
    "pow2",
    "round_p",
    "round_scaled",
]


class FpError(ArithmeticError):
    """Base class for arithmetic failures of p-bit float operations."""


class Overflow(FpError):
    """Nearest representable result would need an exponent >= 2**p."""


class DivisionByZero(FpError):
    """Division (exact or approximate) by zero."""


class Comparison(Enum):
    """Total-order verdict produced by :func:`fp_compare`."""

    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def pow2(k: int) -> Fraction:
    """Exact ``2**k`` as a Fraction for any integer ``k``."""
    if k >= 0:
        return Fraction(1 << k)
    return Fraction(1, 1 << -k)


@dataclass(frozen=True, slots=True)
class FpNumber:
    """A validated p-bit float ``m * 2**e``.

    Construction enforces the normal form: zero is exactly ``(0, 0)``, a
    nonzero significand satisfies ``2**(p-1) <= |m| <= 2**p - 1``, and the
    exponent satisfies ``-2**p <= e < 2**p``.
    """

    m: int
    e: int
    p: int

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"precision must be >= 1, got {self.p}")
        if not isinstance(self.m, int) or not isinstance(self.e, int):
            raise ValueError("significand and exponent must be int")
        lim = 1 << self.p
        if self.m == 0:
            if self.e != 0:
                raise ValueError("canonical zero must be (0, 0)")
            return
        if not (lim >> 1) <= abs(self.m) <= lim - 1:
            raise ValueError(
                f"significand {self.m} not normalized for p={self.p}"
            )
        if not -lim <= self.e <= lim - 1:
            raise ValueError(
                f"exponent {self.e} outside [-2**p, 2**p) for p={self.p}"
            )

    @classmethod
    def zero(cls, p: int) -> "FpNumber":
        """The canonical zero at precision ``p``."""
        return cls(0, 0, p)

    @property
    def is_zero(self) -> bool:
        return self.m == 0

    def to_fraction(self) -> Fraction:
        """Exact rational value ``m * 2**e``."""
        return Fraction(self.m) * pow2(self.e)

    def to_json_dict(self) -> dict:
        """JSON form with arbitrary-precision fields as decimal strings."""
        return {"m": str(self.m), "e": str(self.e), "p": self.p}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "FpNumber":
        return cls(int(obj["m"]), int(obj["e"]), int(obj["p"]))

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"<{self.m}, {self.e}>@p{self.p}"


def _floor_log2(a: Fraction) -> int:
    """Largest ``f`` with ``2**f <= a`` for a positive rational ``a``."""
    f = a.numerator.bit_length() - a.denominator.bit_length()
    # 2**(f-1) < a < 2**(f+1); settle the remaining ambiguity exactly.
    if _cmp_pow2(a, f) < 0:
        f -= 1
    return f


def _cmp_pow2(a: Fraction, k: int) -> int:
    """Sign of ``a - 2**k`` for positive ``a``."""
    if k >= 0:
        lhs, rhs = a.numerator, a.denominator << k
    else:
        lhs, rhs = a.numerator << -k, a.denominator
    return (lhs > rhs) - (lhs < rhs)


def round_p(x: Fraction | int, p: int) -> FpNumber:
    """Round an exact rational to the nearest p-bit float.

    Ties go to the even significand.  If the nearest representable would
    need an exponent ``>= 2**p`` (this includes the tie at the very top of
    the range, whose even resolution renormalizes upward), :class:`Overflow`
    is raised.  Values below the smallest normalized magnitude round to zero
    or that smallest magnitude, whichever is nearer; at their exact midpoint
    both candidate significands are even, so the tie rule is mute and the
    result is zero (the magnitude-smaller candidate).
    """
    if p < 1:
        raise ValueError(f"precision must be >= 1, got {p}")
    if isinstance(x, int):
        x = Fraction(x)
    elif not isinstance(x, Fraction):
        raise TypeError(f"round_p expects Fraction or int, got {type(x)!r}")
    if x == 0:
        return FpNumber(0, 0, p)

    sign = 1 if x > 0 else -1
    a = -x if x < 0 else x
    lim = 1 << p
    e_min, e_max = -lim, lim - 1
    half = 1 << (p - 1)

    e = _floor_log2(a) - (p - 1)
    if e < e_min:
        # Between zero and the smallest normalized magnitude there are no
        # representables: pick the nearer endpoint, zero on the midpoint.
        rel = _cmp_pow2(a, p - 2 + e_min)  # compare to half the smallest
        if rel <= 0:
            return FpNumber(0, 0, p)
        return FpNumber(sign * half, e_min, p)

    q = a * pow2(-e)  # in [2**(p-1), 2**p)
    m0 = q.numerator // q.denominator
    frac = q - m0
    if frac > Fraction(1, 2):
        m = m0 + 1
    elif frac < Fraction(1, 2):
        m = m0
    else:
        m = m0 if m0 % 2 == 0 else m0 + 1
    if m == lim:
        m = half
        e += 1
    if e > e_max:
        raise Overflow(f"exponent {e} out of range for p={p}")
    return FpNumber(sign * m, e, p)


def round_scaled(n: int, k: int, p: int) -> FpNumber:
    """Round ``n * 2**k`` to ``p`` bits using pure integer arithmetic.

    Exactly equivalent to ``round_p(Fraction(n) * pow2(k), p)`` but avoids
    building huge rationals; the workhorse behind the fixed-point
    elementary-function kernels.
    """
    if n == 0:
        return FpNumber(0, 0, p)
    sign = 1 if n > 0 else -1
    a = -n if n < 0 else n
    lim = 1 << p
    e_min, e_max = -lim, lim - 1
    half_m = lim >> 1

    e = (a.bit_length() - 1 + k) - (p - 1)
    if e < e_min:
        # Compare a * 2**k against half the smallest normal 2**(p-2+e_min),
        # via bit lengths so no giant power of two is materialized.
        t = p - 2 + e_min - k
        bl = a.bit_length() - 1
        if t < 0 or bl > t:
            rel = 1
        elif bl < t:
            rel = -1
        else:
            rel = 0 if a == (1 << t) else 1
        if rel <= 0:
            return FpNumber(0, 0, p)
        return FpNumber(sign * half_m, e_min, p)

    shift = e - k
    if shift <= 0:
        m = a << -shift
    else:
        m0 = a >> shift
        rem = a - (m0 << shift)
        half = 1 << (shift - 1)
        if rem > half:
            m = m0 + 1
        elif rem < half:
            m = m0
        else:
            m = m0 if m0 % 2 == 0 else m0 + 1
    if m == lim:
        m = half_m
        e += 1
    if e > e_max:
        raise Overflow(f"exponent {e} out of range for p={p}")
    return FpNumber(sign * m, e, p)


def approx_div(a: Fraction | int, b: Fraction | int) -> Fraction:
    """Approximate quotient used throughout the float operations.

    Returns the exact ``a / b`` when it is an integer multiple of 1/4, and
    otherwise ``a / b + 1/8``.  The 1/8 bias is always added, never
    subtracted, regardless of the quotient's sign.  The result is an exact
    rational; callers round separately.
    """
    b = Fraction(b)
    if b == 0:
        raise DivisionByZero("approximate division by zero")
    q = Fraction(a) / b
    if (4 * q).denominator == 1:
        return q
    return q + Fraction(1, 8)


def _require_same_p(xs: Iterable[FpNumber]) -> int:
    ps = {x.p for x in xs}
    if len(ps) != 1:
        raise ValueError(f"operands must share one precision, got {sorted(ps)}")
    return ps.pop()


def _aligned_exponents(a: FpNumber, b: FpNumber) -> tuple[int, int]:
    """Exponents used for alignment, with a zero operand taking the other
    operand's exponent (zero means the same value at every exponent, so the
    gap is chosen to be vacuous rather than taken from the canonical form).
    """
    ea = b.e if a.is_zero else a.e
    eb = a.e if b.is_zero else b.e
    return ea, eb


def fp_add(a: FpNumber, b: FpNumber) -> FpNumber:
    """Add: align the smaller exponent via the approximate quotient, round.

    With ``e1 >= e2`` the result is ``round_p((m1 + (m2 /~ 2**(e1-e2))) *
    2**e1)``, and symmetrically otherwise.  A zero operand aligns at the
    other operand's exponent, making it an additive identity.
    """
    p = _require_same_p((a, b))
    ea, eb = _aligned_exponents(a, b)
    if ea >= eb:
        hi_m, hi_e, lo_m, lo_e = a.m, ea, b.m, eb
    else:
        hi_m, hi_e, lo_m, lo_e = b.m, eb, a.m, ea
    t = approx_div(lo_m, pow2(hi_e - lo_e))
    return round_p((hi_m + t) * pow2(hi_e), p)


def fp_mul(a: FpNumber, b: FpNumber) -> FpNumber:
    """Multiply: significands multiply exactly, exponents add, then round."""
    p = _require_same_p((a, b))
    return round_p(Fraction(a.m * b.m) * pow2(a.e + b.e), p)


def fp_div(a: FpNumber, b: FpNumber) -> FpNumber:
    """Divide: ``round_p((m1 * 2**(p-1) /~ m2) * 2**(e1 - e2 - p + 1))``."""
    p = _require_same_p((a, b))
    if b.is_zero:
        raise DivisionByZero("float division by zero")
    t = approx_div(a.m * (1 << (p - 1)), b.m)
    return round_p(t * pow2(a.e - b.e - p + 1), p)


def fp_compare(a: FpNumber, b: FpNumber) -> Comparison:
    """Compare via the approximate quotient.

    ``b``'s significand is rescaled to ``t = m2 /~ 2**(e1-e2)`` and the
    verdict combines ``m1 <= t`` and ``t <= m1`` (at least one always
    holds, so the verdict is total).  For nonzero operands the 1/8 bias is
    too small to straddle a genuine difference, and a zero operand aligns
    at the other's exponent, so the verdict always agrees with comparing
    exact values.
    """
    _require_same_p((a, b))
    ea, eb = _aligned_exponents(a, b)
    t = approx_div(b.m, pow2(ea - eb))
    le = a.m <= t
    ge = t <= a.m
    if le and ge:
        return Comparison.EQUAL
    return Comparison.LESS if le else Comparison.GREATER


def fp_floor(a: FpNumber) -> FpNumber:
    """Floor toward minus infinity, then round back to ``p`` bits.

    For ``e >= 0`` the value is already an integer and is simply re-rounded
    (wide integers may lose low bits).  For ``e < 0`` the significand is
    floor-divided by ``2**-e`` (Python ``//``, toward minus infinity) and
    the integer result rounded.
    """
    if a.e >= 0:
        return round_p(a.m * (1 << a.e), a.p)
    return round_p(a.m // (1 << -a.e), a.p)


def iter_add(xs: Sequence[FpNumber]) -> FpNumber:
    """Sum a non-empty family exactly, then round once.

    A single exact rational aggregation with one final rounding: the result
    is invariant under permutation of the operands and is *not* a fold of
    binary adds.  A singleton returns its element unchanged.
    """
    if not xs:
        raise ValueError("iter_add requires at least one operand")
    p = _require_same_p(xs)
    total = sum((x.to_fraction() for x in xs), Fraction(0))
    return round_p(total, p)


def iter_mul(xs: Sequence[FpNumber]) -> FpNumber:
    """Multiply a non-empty family exactly, then round once."""
    if not xs:
        raise ValueError("iter_mul requires at least one operand")
    p = _require_same_p(xs)
    prod = Fraction(1)
    for x in xs:
        prod *= x.to_fraction()
    return round_p(prod, p)
