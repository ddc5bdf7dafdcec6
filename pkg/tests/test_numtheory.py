import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kite_billiards.errors import BoundOverflow, BudgetExceeded, DomainError
from kite_billiards.numtheory import (
    CircleAngle, L_bound, M_of_eps, N_pair, N_pair_profile, N_single, N_single_profile,
    BoundReport, continued_fraction, convergents, first_small_multiple, log10_M_from_log_eps,
    nearest_integer_distance, pair_scan_size, signed_diff, theorem1_inequality_check,
)

GOLDEN = (math.sqrt(5) - 1) / 2
SQ2 = math.sqrt(2) - 1
SQ3 = math.sqrt(3) - 1

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
unit = st.floats(min_value=0.0, max_value=1.0, exclude_max=True)


def naive_dist(x):
    return abs(x - round(x))


def naive_N_pair(a, b, k):
    best = math.inf
    for n in range(-k, k + 1):
        for m in range(-k, k + 1):
            if (n or m) and abs(n) + abs(m) <= k:
                best = min(best, naive_dist(n * a + m * b))
    return best


# nearest-integer distance


@pytest.mark.parametrize("x,expected", [(0.0, 0.0), (0.5, 0.5), (-0.2, 0.2), (3.0, 0.0)])
def test_distance_known_values(x, expected):
    assert nearest_integer_distance(x) == expected


def test_distance_reduces_mod_one():
    assert nearest_integer_distance(2.3) == pytest.approx(0.3, abs=1e-15)


@pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
def test_distance_rejects_non_finite(x):
    with pytest.raises(DomainError):
        nearest_integer_distance(x)


@given(finite)
def test_distance_is_symmetric_and_bounded(x):
    d = nearest_integer_distance(x)
    assert 0.0 <= d <= 0.5
    assert nearest_integer_distance(-x) == d


@given(finite, st.integers(-1000, 1000))
def test_distance_is_periodic(x, n):
    assert nearest_integer_distance(x + n) == pytest.approx(nearest_integer_distance(x), abs=1e-9)


# circle angles


@given(finite)
def test_circle_angle_is_reduced(x):
    a = CircleAngle(x)
    assert 0.0 <= a.value < 1.0


def test_circle_angle_tiny_negative_does_not_round_to_one():
    assert CircleAngle(-1e-20).value == 0.0


@given(unit, st.integers(-10**6, 10**6))
def test_circle_angle_integer_multiple_is_exact(x, n):
    got = (CircleAngle(x) * n).value
    exact = Fraction(CircleAngle(x).value) * n % 1
    # rounding may land on 1.0, which is the circle point 0
    assert got == float(exact) % 1.0


@given(unit, unit)
def test_circle_angle_add_then_subtract(x, y):
    a, b = CircleAngle(x), CircleAngle(y)
    assert abs(signed_diff(a + b - b, a)) < 1e-15


def test_radian_round_trip():
    a = CircleAngle.from_radians(math.pi / 2)
    assert a.value == 0.25
    assert a.radians == pytest.approx(math.pi / 2)


def test_signed_diff_half_turn_is_positive():
    assert signed_diff(0.75, 0.25) == 0.5
    assert signed_diff(0.25, 0.75) == 0.5


# Diophantine minima


def test_N_single_first_value_is_alpha():
    assert N_single(0.3, 1) == pytest.approx(0.3)


def test_N_single_golden_values():
    # frozen from the brute-force loop over n in {+-1, .., +-k}
    assert N_single(GOLDEN, 2) == 0.2360679774997898
    assert N_single(GOLDEN, 3) == 0.1458980337503153
    for k in (2, 3):
        assert N_single(GOLDEN, k) == min(naive_dist(n * GOLDEN) for n in range(1, k + 1))


def test_N_pair_first_value_is_min_of_angles():
    assert N_pair(0.3, 0.2, 1) == pytest.approx(0.2)


def test_N_pair_known_pair():
    # frozen from the exhaustive scan
    assert N_pair(SQ2, SQ3, 1) == 0.2679491924311228
    assert N_pair(SQ2, SQ3, 2) == 0.14626436994197234
    assert N_pair(SQ2, SQ3, 2) == naive_dist(SQ2 + SQ3)


def test_N_pair_profile_matches_naive_scan():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a, b = rng.random(2)
        prof = N_pair_profile(a, b, 30)
        for k in (1, 2, 7, 30):
            assert prof[k - 1] == naive_N_pair(a, b, k)


@settings(max_examples=40, deadline=None)
@given(unit, unit, st.integers(1, 40))
def test_N_pair_properties(a, b, k):
    prof = N_pair_profile(a, b, k)
    assert np.all(np.diff(prof) <= 0)
    assert np.all((prof >= 0) & (prof <= 0.5))
    # the axes are part of the pair scan
    assert prof[-1] <= N_single(a, k) if a else True
    assert prof[-1] <= N_single(b, k) if b else True


@settings(max_examples=40, deadline=None)
@given(unit, unit, st.integers(1, 20))
def test_N_pair_is_symmetric_in_arguments_and_sign(a, b, k):
    v = N_pair(a, b, k)
    assert N_pair(b, a, k) == v
    assert N_pair(-a, b, k) == pytest.approx(v, abs=1e-15)


def test_rational_pair_vanishes():
    assert N_pair(0.25, 0.5, 2) == 0.0


@pytest.mark.parametrize("k", [0, -1])
def test_zero_k_rejected(k):
    with pytest.raises(DomainError):
        N_single(0.3, k)
    with pytest.raises(DomainError):
        N_pair(0.3, 0.4, k)


def test_scan_budget_is_enforced():
    assert pair_scan_size(10) == 220
    with pytest.raises(BudgetExceeded) as info:
        N_pair(0.3, 0.4, 10, budget=219)
    assert info.value.required == 220
    N_pair(0.3, 0.4, 10, budget=220)
    with pytest.raises(BudgetExceeded):
        N_single_profile(0.3, 100, budget=99)


def test_scan_is_deterministic():
    a = N_pair_profile(SQ2, SQ3, 100)
    b = N_pair_profile(SQ2, SQ3, 100)
    assert a.tobytes() == b.tobytes()


# bound formulas


def mp_log10_L(p, q, eps):
    with mpmath.workdps(50):
        s = p + q
        e = mpmath.mpf(eps)
        return mpmath.log10(4 * mpmath.pi / e ** (2 * s) * s * mpmath.mpf(100) ** (2 * s))


def test_L_bound_reference_values():
    assert L_bound(1, 1, 0.1) == pytest.approx(13.4003, abs=1e-4)
    assert L_bound(1, 1, 1 - 1e-15) == pytest.approx(math.log10(8 * math.pi) + 8, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10),
       st.floats(min_value=1e-12, max_value=1.0, exclude_max=True))
def test_L_bound_matches_high_precision_formula(p, q, eps):
    ref = mp_log10_L(p, q, eps)
    assert abs(L_bound(p, q, eps) - float(ref)) <= 1e-9 * abs(float(ref))
    hp = L_bound(p, q, eps, high_precision=True)
    assert abs(hp - ref) <= mpmath.mpf(10) ** -30 * abs(ref)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_L_bound_rejects_eps(eps):
    with pytest.raises(DomainError):
        L_bound(1, 1, eps)


def test_M_of_eps_reference():
    r = M_of_eps(1, 1, 0.1)
    assert r.log10_L == pytest.approx(13.4003, abs=1e-4)
    assert r.log10_R == pytest.approx(3 * 10 ** r.log10_L, rel=1e-12)
    assert r.log10_R == pytest.approx(7.54e13, rel=1e-3)
    assert r.log10_M - r.log10_R == pytest.approx(r.log10_L, abs=1e-2)
    assert r.n_index == 11


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.floats(min_value=0.05, max_value=0.99))
def test_M_of_eps_is_monotone(p, q, eps):
    a = M_of_eps(p, q, eps)
    b = M_of_eps(p, q, eps * 0.9)
    assert b.log10_M > a.log10_M


def test_bound_report_round_trip():
    r = M_of_eps(2, 3, 0.25)
    assert BoundReport.from_dict(r.to_dict()) == r


def test_M_overflow_is_explicit():
    with pytest.raises(BoundOverflow):
        log10_M_from_log_eps(1, 1, -300.0)


def test_approximation_check_default_scale_is_indeterminate():
    c = theorem1_inequality_check(SQ2, SQ3, 1, 1, 1)
    assert c.status == "indeterminate"
    assert c.holds is None
    assert c.log10_L == pytest.approx(math.log10(8 * math.pi) + 8)


def test_approximation_check_exact_ratio_holds():
    c = theorem1_inequality_check(SQ3 / 2, SQ3, 1, 2, 1, L_override=5)
    assert c.log10_lhs == -math.inf
    assert c.status == "holds"


def test_approximation_check_small_synthetic_case_against_hand_arithmetic():
    a, b, p, q, n, L = 0.3, 0.41, 2, 3, 2, 6
    c = theorem1_inequality_check(a, b, p, q, n, L_override=L)
    N = min(naive_dist(j * b / q) for j in range(1, L + 1))
    rhs = N / (100 * b * (100 * n) ** L)
    assert c.log10_rhs == pytest.approx(math.log10(rhs), rel=1e-12)
    assert c.log10_lhs == pytest.approx(math.log10(abs(a / b - p / q)), rel=1e-12)
    assert c.status == "fails"


# continued fractions


def test_golden_ratio_convergents():
    assert convergents((1 + math.sqrt(5)) / 2, 5) == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]


def test_rational_input_terminates():
    assert convergents(0.5, 10) == [(0, 1), (1, 2)]


def test_sqrt2_quotients():
    assert continued_fraction(math.sqrt(2), 10) == [1] + [2] * 9


@pytest.mark.parametrize("x", [math.nan, math.inf])
def test_convergents_reject_non_finite(x):
    with pytest.raises(DomainError):
        convergents(x, 3)


@settings(max_examples=100)
@given(st.floats(min_value=-100, max_value=100, allow_nan=False), st.integers(1, 15))
def test_convergents_approximate_well(x, depth):
    fx = Fraction(x)
    cs = convergents(x, depth)
    for num, den in cs:
        assert den >= 1
        assert abs(fx - Fraction(num, den)) <= Fraction(1, den * den)
    dens = [d for _, d in cs]
    assert dens == sorted(dens)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6), st.integers(2, 10**6), st.integers(2, 400))
def test_first_small_multiple_against_brute_force(num, den, inv_delta):
    theta = Fraction(num, den)
    delta = Fraction(1, inv_delta)

    def dist(x):
        f = x - math.floor(x)
        return min(f, 1 - f)

    j = first_small_multiple(theta, delta)
    assert dist(j * theta) < delta
    # the search must not skip any smaller multiple
    assert all(dist(i * theta) >= delta for i in range(1, j))
