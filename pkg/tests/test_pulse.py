import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pulseconv.errors import ConfigurationError, ResolutionLossError, UnrealizableCoefficientError
from pulseconv.pulse import (
    CoefficientSchedule,
    PwmFrame,
    PwmWindow,
    SignedRegister,
    accumulate,
    apply_policy,
    encode_pwm,
    make_schedule,
    sample_count,
)

W = PwmWindow(256)


def brute_count(high, n, ticks, rule="midpoint"):
    # evaluate the instant formula directly, one tick at a time
    if n == 0:
        return 0
    if rule == "midpoint":
        inst = {math.floor((2 * j + 1) * ticks / (2 * n)) for j in range(n)}
    else:
        inst = {math.floor(j * ticks / n) for j in range(n)}
    return sum(1 for tick in range(ticks) if tick in inst and tick < high)


class TestEncode:
    @pytest.mark.parametrize("intensity,high", [(0, 0), (255, 255), (128, 128)])
    def test_examples(self, intensity, high):
        f = encode_pwm(np.array([[intensity]]), W)
        assert f.high_ticks[0, 0] == high
        assert f.sign[0, 0] == 1
        assert f.duty()[0, 0] == high / 256

    def test_short_window_refused(self):
        with pytest.raises(ResolutionLossError):
            encode_pwm(np.zeros((2, 2)), PwmWindow(128))

    def test_longer_window_scales(self):
        f = encode_pwm(np.array([[255, 1]]), PwmWindow(512))
        assert f.high_ticks.tolist() == [[510, 2]]

    def test_out_of_range(self):
        with pytest.raises(ConfigurationError):
            encode_pwm(np.array([[256]]), W)

    def test_zero_sign_canonical(self):
        f = PwmFrame(np.array([[0, 3]]), np.array([[-1, -1]]), W)
        assert f.sign.tolist() == [[1, -1]]

    def test_frame_immutable(self):
        f = encode_pwm(np.array([[1, 2]]), W)
        with pytest.raises(ValueError):
            f.high_ticks[0, 0] = 5


class TestSchedule:
    def test_n64_midpoint(self):
        s = make_schedule(64, W)
        expected = [math.floor((2 * j + 1) * 256 / 128) for j in range(64)]
        assert list(s.instants) == expected == list(range(2, 256, 4))
        assert s.sign == 1

    def test_zero(self):
        s = make_schedule(0, W)
        assert s.instants == () and s.sign == 1

    def test_full_negative(self):
        s = make_schedule(-256, W)
        assert list(s.instants) == list(range(256))
        assert s.sign == -1

    def test_leading_rule(self):
        s = make_schedule(4, W, "leading")
        assert s.instants == (0, 64, 128, 192)

    def test_unrealizable(self):
        with pytest.raises(UnrealizableCoefficientError):
            make_schedule(257, W)

    @given(st.integers(-256, 256), st.sampled_from(["midpoint", "leading"]))
    def test_invariants(self, n, rule):
        s = make_schedule(n, W, rule)
        assert s.sample_count == abs(n)
        assert len(set(s.instants)) == abs(n)
        assert all(0 <= t < 256 for t in s.instants)
        assert list(s.instants) == sorted(s.instants)
        assert s.scaled_coefficient == n
        if n == 0:
            assert s.sign == 1

    def test_rejects_unsorted(self):
        with pytest.raises(ConfigurationError):
            CoefficientSchedule(1, (5, 3), W)


class TestSampleCount:
    @pytest.mark.parametrize("high,sign,n,expected", [
        (255, 1, 64, 64),
        (128, 1, 64, 32),
        (128, -1, 64, -32),
        (37, 1, 64, 9),
    ])
    def test_examples(self, high, sign, n, expected):
        assert brute_count(high, abs(n), 256) * sign * (1 if n >= 0 else -1) == expected
        assert sample_count(high, sign, make_schedule(n, W)) == expected

    def test_lut_matches_enumeration(self):
        for n in (1, 3, 64, 85, 200, 256):
            s = make_schedule(n, W)
            highs = np.arange(256)
            assert s.counts_for(highs).tolist() == [sample_count(h, 1, s) for h in range(256)]

    @given(st.integers(0, 255), st.integers(0, 256), st.sampled_from(["midpoint", "leading"]))
    def test_against_brute_force(self, high, n, rule):
        assert sample_count(high, 1, make_schedule(n, W, rule)) == brute_count(high, n, 256, rule)

    @given(st.integers(0, 255), st.integers(1, 256))
    def test_floor_ceil_bound(self, high, n):
        c = sample_count(high, 1, make_schedule(n, W))
        assert c in (n * high // 256, -(-n * high // 256))

    @given(st.integers(0, 256))
    def test_monotone_in_high(self, n):
        s = make_schedule(n, W)
        counts = [sample_count(h, 1, s) for h in range(256)]
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    @given(st.integers(0, 255), st.sampled_from([1, -1]), st.integers(-256, 256))
    def test_sign_factorization(self, high, sign, n):
        s = make_schedule(n, W)
        assert sample_count(high, sign, s) == sign * s.sign * sample_count(high, 1, make_schedule(abs(n), W))

    @given(st.integers(0, 255), st.sampled_from([1, -1]), st.sampled_from([1, -1]))
    def test_unit_gain_exact(self, high, sign, coeff_sign):
        assert sample_count(high, sign, make_schedule(coeff_sign * 256, W)) == sign * coeff_sign * high


class TestRegister:
    def test_examples(self):
        assert accumulate(SignedRegister(250), 10).value == 255
        assert accumulate(SignedRegister(-5), 5).value == 0
        assert accumulate(SignedRegister(0), -300).value == -255

    def test_wrap(self):
        # 9-bit two's complement: 255 + 1 -> -256
        assert accumulate(SignedRegister(255, 8, "wrap"), 1).value == -256
        assert accumulate(SignedRegister(-256, 8, "wrap"), -1).value == 255
        assert apply_policy(510, 8, "wrap") == -2

    @given(st.integers(-1000, 1000), st.lists(st.integers(-600, 600), max_size=20),
           st.integers(1, 10))
    def test_saturate_bound(self, start, deltas, bits):
        reg = SignedRegister(start, bits)
        for d in deltas:
            reg = accumulate(reg, d)
            assert abs(reg.value) <= (1 << bits) - 1

    @given(st.lists(st.integers(-600, 600), max_size=20), st.integers(1, 10))
    def test_wrap_range_and_congruence(self, deltas, bits):
        reg = SignedRegister(0, bits, "wrap")
        for d in deltas:
            reg = accumulate(reg, d)
            assert -(1 << bits) <= reg.value < (1 << bits)
        assert (reg.value - sum(deltas)) % (1 << (bits + 1)) == 0

    @given(st.lists(st.integers(-100, 100), max_size=20))
    def test_order_free_without_saturation(self, deltas):
        # every partial sum stays within +-2000, so a 12-bit register never clamps
        a = SignedRegister(0, 12)
        for d in deltas:
            a = accumulate(a, d)
        b = SignedRegister(0, 12)
        for d in reversed(deltas):
            b = accumulate(b, d)
        assert a.value == b.value == sum(deltas)

    def test_order_matters_at_saturation(self):
        up_first = accumulate(accumulate(SignedRegister(0), 200), 200)
        up_first = accumulate(up_first, -200)
        down_first = accumulate(accumulate(SignedRegister(0), -200), 200)
        down_first = accumulate(down_first, 200)
        assert (up_first.value, down_first.value) == (55, 200)
