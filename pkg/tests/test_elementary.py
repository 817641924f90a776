"""Elementary-function tests.

The reference route is mpmath at 256-bit precision (a library the package
itself never imports), converted to exact Fractions so every error
comparison below is exact rational arithmetic — no float slop in the
verdicts.  Error bounds asserted here: exp/sqrt/log within relative 2**-p,
sigmoid/silu/softplus within 4 * 2**-p.
"""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

from artifact.elementary import (
    NegativeInput,
    NonPositiveInput,
    TaylorConfig,
    exp_fp,
    log_fp,
    sigmoid_fp,
    silu_fp,
    softplus_fp,
    sqrt_fp,
)
from artifact.floats import FpNumber, Overflow, round_p

mpmath.mp.prec = 256


def mpf_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t._mpf_
    if man == 0:
        return Fraction(0)
    fr = Fraction(man) * (Fraction(1 << exp) if exp >= 0 else Fraction(1, 1 << -exp))
    return -fr if sign else fr


def mp_of(x: FpNumber):
    fr = x.to_fraction()
    return mpmath.mpf(fr.numerator) / mpmath.mpf(fr.denominator)


def rel_err(got: FpNumber, true) -> Fraction:
    t = mpf_to_fraction(true)
    assert t != 0
    return abs(got.to_fraction() - t) / abs(t)


def rand_float(rng: random.Random, p: int, lo: float, hi: float) -> FpNumber:
    return round_p(Fraction(rng.uniform(lo, hi)).limit_denominator(1 << 30), p)


class TestExp:
    def test_exp_zero_is_one(self):
        for p in (3, 8, 16):
            assert exp_fp(FpNumber.zero(p)).to_fraction() == 1

    def test_overflow_and_underflow_band(self):
        p = 8
        big = round_p(1 << (p + 3), p)
        with pytest.raises(Overflow):
            exp_fp(big)
        assert exp_fp(round_p(-(1 << (p + 3)), p)).is_zero

    def test_known_value(self):
        # e at p=16 (correct rounding checked against the 256-bit route).
        got = exp_fp(round_p(1, 16))
        assert rel_err(got, mpmath.e) <= Fraction(1, 1 << 16)

    @pytest.mark.parametrize("p", [8, 16])
    def test_relative_error_sweep(self, p):
        rng = random.Random(300 + p)
        bound = Fraction(1, 1 << p)
        for _ in range(400):
            x = rand_float(rng, p, -16.0, 16.0)
            assert rel_err(exp_fp(x), mpmath.exp(mp_of(x))) <= bound

    def test_monotone_on_grid(self):
        p = 8
        vals = [exp_fp(round_p(Fraction(k, 8), p)) for k in range(-40, 41)]
        fracs = [v.to_fraction() for v in vals]
        assert all(a <= b for a, b in zip(fracs, fracs[1:]))


class TestSqrt:
    def test_domain(self):
        with pytest.raises(NegativeInput):
            sqrt_fp(round_p(-1, 8))
        assert sqrt_fp(FpNumber.zero(8)).is_zero

    def test_perfect_squares_exact(self):
        for p in (3, 8, 16):
            for n in (1, 4, 9, 16, 64):
                assert sqrt_fp(round_p(n, p)).to_fraction() ** 2 == n

    @pytest.mark.parametrize("p", [8, 16])
    def test_relative_error_sweep(self, p):
        rng = random.Random(400 + p)
        bound = Fraction(1, 1 << p)
        for _ in range(400):
            x = rand_float(rng, p, 2.0**-12, 2.0**12)
            if x.m <= 0:
                continue
            assert rel_err(sqrt_fp(x), mpmath.sqrt(mp_of(x))) <= bound


class TestLog:
    def test_domain(self):
        with pytest.raises(NonPositiveInput):
            log_fp(FpNumber.zero(8))
        with pytest.raises(NonPositiveInput):
            log_fp(round_p(-2, 8))

    def test_log_one_is_zero_both_parities(self):
        # p even and odd exercise both branches of the exponent-parity split.
        for p in (3, 4, 8, 16, 17):
            assert log_fp(round_p(1, p)).is_zero

    @pytest.mark.parametrize("p", [8, 16])
    def test_relative_error_sweep(self, p):
        rng = random.Random(500 + p)
        bound = Fraction(1, 1 << p)
        for _ in range(400):
            x = rand_float(rng, p, 2.0**-12, 2.0**12)
            if x.m <= 0 or x.to_fraction() == 1:
                continue
            assert rel_err(log_fp(x), mpmath.log(mp_of(x))) <= bound

    def test_round_trip_with_exp(self):
        # log(exp(x)) within 8*2^-p of x for 1/4 <= |x| <= 4.  The lower
        # clip is necessary: exp's own rounding injects absolute error on
        # the order of 2^-p, which no later step can undo relative to a
        # vanishing x.
        p = 16
        rng = random.Random(42)
        bound = Fraction(8, 1 << p)
        for _ in range(200):
            mag = rng.uniform(0.25, 4.0)
            x = round_p(Fraction(mag if rng.random() < 0.5 else -mag).limit_denominator(1 << 30), p)
            got = log_fp(exp_fp(x))
            assert abs(got.to_fraction() - x.to_fraction()) <= bound * abs(x.to_fraction())


class TestSigmoidFamily:
    def test_sigmoid_zero_is_half(self):
        for p in (3, 8, 16):
            assert sigmoid_fp(FpNumber.zero(p)).to_fraction() == Fraction(1, 2)

    def test_sigmoid_open_interval(self):
        p = 8
        for v in (-10**6, -300, -40, -1, 1, 40, 300, 10**6):
            out = sigmoid_fp(round_p(v, p))
            assert 0 < out.to_fraction() < 1

    def test_sigmoid_saturates_to_largest_below_one(self):
        p = 8
        out = sigmoid_fp(round_p(100, p))
        assert out.to_fraction() == Fraction((1 << p) - 1, 1 << p)

    def test_silu_zero(self):
        assert silu_fp(FpNumber.zero(8)).is_zero

    def test_softplus_very_negative_matches_exp(self):
        # softplus(-20) ~ exp(-20): the one-pipeline evaluation keeps full
        # relative accuracy where composing rounded float ops would give 0.
        p = 16
        got = softplus_fp(round_p(-20, p))
        assert not got.is_zero
        assert rel_err(got, mpmath.log1p(mpmath.exp(-20))) <= Fraction(4, 1 << p)

    def test_softplus_saturates_positive(self):
        p = 8
        x = round_p(1 << (p + 3), p)
        assert softplus_fp(x) == x

    @pytest.mark.parametrize("p", [8, 16])
    def test_relative_error_sweep(self, p):
        rng = random.Random(600 + p)
        bound = Fraction(4, 1 << p)
        for _ in range(300):
            x = rand_float(rng, p, -20.0, 20.0)
            assert rel_err(sigmoid_fp(x), mpmath.sigmoid(mp_of(x))) <= bound
            assert rel_err(softplus_fp(x), mpmath.log1p(mpmath.exp(mp_of(x)))) <= bound
            if x.m != 0:
                true = mp_of(x) * mpmath.sigmoid(mp_of(x))
                assert rel_err(silu_fp(x), true) <= bound


class TestTaylorConfig:
    def test_defaults(self):
        cfg = TaylorConfig.default(16)
        assert cfg.exp_terms == 18
        assert cfg.working_bits == 40
        # smallest n with n * 2^n >= 2^40
        assert cfg.log_terms * (1 << cfg.log_terms) >= 1 << 40
        n = cfg.log_terms - 1
        assert n * (1 << n) < 1 << 40

    def test_doubling_terms_changes_nothing(self):
        # Correct rounding makes the output independent of extra terms.
        p = 16
        cfg = TaylorConfig.default(p)
        cfg2 = TaylorConfig(cfg.exp_terms * 2, cfg.log_terms * 2, cfg.working_bits)
        rng = random.Random(9)
        for _ in range(50):
            x = rand_float(rng, p, -8.0, 8.0)
            assert exp_fp(x, cfg2) == exp_fp(x)
            assert softplus_fp(x, cfg2) == softplus_fp(x)
            if x.m > 0 and x.to_fraction() != 1:
                assert log_fp(x, cfg2) == log_fp(x)
