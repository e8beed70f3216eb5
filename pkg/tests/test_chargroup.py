"""Character group: predicates, group laws, norms, rescaling, p-variation."""

import random
from fractions import Fraction

import pytest

from brpath.chargroup import (
    NUMERIC,
    TO_CHARACTER,
    TO_GROUPLIKE,
    TruncatedFunctional,
    TruncationMismatch,
    dilate,
    functional_from_json,
    functional_to_json,
    gl_compose,
    group_inv,
    group_mul,
    homogeneous_norm,
    identity_functional,
    is_character,
    is_grouplike,
    p_variation,
    sigma_rescale,
)
from brpath.signature import PiecewiseLinearPath, branched_signature
from brpath.trees import parse_forest

from conftest import random_character, random_path


def F(expr, d=1):
    return parse_forest(expr, d)


LINE = PiecewiseLinearPath([0, 1], [[0], [1]])


# -- character predicate -------------------------------------------------------

def test_counit_is_character():
    assert is_character(identity_functional(3, 1))


def test_signature_is_character():
    rng = random.Random(7)
    for d in (1, 2):
        path = random_path(rng, d)
        sig = branched_signature(path, 0, 1, 4 if d == 1 else 3)
        assert is_character(sig)


def test_multiplicativity_violation_detected():
    bad = TruncatedFunctional(2, 1, {F("1"): Fraction(1), F("1 1"): Fraction(0)})
    # (a, "1")^2 = 1 but (a, "1 1") = 0
    assert not is_character(bad)


# -- group multiplication and inverse --------------------------------------------

def test_identity_neutral():
    rng = random.Random(11)
    a = random_character(rng, 3, 1)
    eps = identity_functional(3, 1)
    assert group_mul(eps, a) == a
    assert group_mul(a, eps) == a


def test_degree_one_additivity():
    rng = random.Random(13)
    a = random_character(rng, 3, 1)
    b = random_character(rng, 3, 1)
    ab = group_mul(a, b)
    assert ab(F("1")) == a(F("1")) + b(F("1"))


def test_chen_split_coefficient_by_hand():
    # x = (t, t) on [0,1] split at 1/2; the coefficient of 2(1) recombines as
    # 1/8 + 1/8 + (1/2)(1/2) = 1/2
    diag = PiecewiseLinearPath([0, 1], [[0, 0], [1, 1]])
    a = branched_signature(diag, 0, Fraction(1, 2), 2)
    b = branched_signature(diag, Fraction(1, 2), 1, 2)
    rho = F("2(1)", 2)
    assert a(rho) == Fraction(1, 8)
    assert b(rho) == Fraction(1, 8)
    assert group_mul(a, b)(rho) == Fraction(1, 2)
    whole = branched_signature(diag, 0, 1, 2)
    assert whole(rho) == Fraction(1, 2)


def test_group_axioms_on_random_characters():
    for d in (1, 2):
        rng = random.Random(100 + d)
        N = 4 if d == 1 else 3
        a = random_character(rng, N, d)
        b = random_character(rng, N, d)
        c = random_character(rng, N, d)
        assert group_mul(group_mul(a, b), c) == group_mul(a, group_mul(b, c))
        assert group_mul(a, group_inv(a)) == identity_functional(N, d)
        assert group_mul(group_inv(a), a) == identity_functional(N, d)
        assert is_character(group_mul(a, b))


def test_inverse_examples():
    rng = random.Random(17)
    a = random_character(rng, 2, 2)
    inv = group_inv(a)
    assert inv(F("1", 2)) == -a(F("1", 2))
    assert inv(F("1(2)", 2)) == -a(F("1(2)", 2)) + a(F("2", 2)) * a(F("1", 2))
    assert group_inv(identity_functional(3, 1)) == identity_functional(3, 1)


def test_truncation_mismatch_rejected():
    with pytest.raises(TruncationMismatch):
        group_mul(identity_functional(2, 1), identity_functional(3, 1))


# -- norms and dilation ------------------------------------------------------------

def test_norm_of_counit():
    assert homogeneous_norm(identity_functional(4, 1)) == 0.0


def test_norm_of_unit_speed_signature():
    sig = branched_signature(LINE, 0, 1, 3)
    assert homogeneous_norm(sig) == 1.0


def test_dilation_homogeneity():
    rng = random.Random(19)
    a = random_character(rng, 4, 1)
    base = homogeneous_norm(a)
    for c in (Fraction(1, 2), Fraction(2), Fraction(3)):
        assert homogeneous_norm(dilate(c, a)) == pytest.approx(float(c) * base)


def test_dilate_values():
    a = TruncatedFunctional(2, 1, {F("1 1"): Fraction(1)})
    assert dilate(Fraction(2), a)(F("1 1")) == 4
    assert dilate(Fraction(1), a) == a


def test_dilate_preserves_character():
    rng = random.Random(23)
    a = random_character(rng, 4, 1)
    assert is_character(dilate(Fraction(3, 2), a))


# -- symmetry rescaling --------------------------------------------------------------

def test_rescale_cherry_value():
    sig = branched_signature(LINE, 0, 1, 3)
    assert sig(F("1(1,1)")) == Fraction(1, 3)
    assert sigma_rescale(sig)(F("1(1,1)")) == Fraction(1, 6)


def test_rescale_degree_one_fixed():
    sig = branched_signature(LINE, 0, 1, 3)
    assert sigma_rescale(sig)(F("1")) == sig(F("1"))


def test_rescale_roundtrip():
    rng = random.Random(29)
    a = random_character(rng, 4, 1)
    assert sigma_rescale(sigma_rescale(a, TO_GROUPLIKE), TO_CHARACTER) == a


def test_grouplike_bridge():
    rng = random.Random(31)
    for d in (1, 2):
        path = random_path(rng, d)
        sig = branched_signature(path, 0, 1, 4 if d == 1 else 3)
        assert is_grouplike(sigma_rescale(sig))


def test_grouplike_examples():
    assert is_grouplike(identity_functional(3, 1))
    good = TruncatedFunctional(2, 1, {F("1"): Fraction(1), F("1 1"): Fraction(1, 2)})
    assert is_grouplike(good)
    raw = TruncatedFunctional(2, 1, {F("1"): Fraction(1), F("1 1"): Fraction(1)})
    assert not is_grouplike(raw)


def test_rescaled_composition_matches_group_product():
    # the duality identity as a composition law on the grouplike side
    rng = random.Random(37)
    for d in (1, 2):
        N = 3
        a = random_character(rng, N, d)
        b = random_character(rng, N, d)
        lhs = sigma_rescale(group_mul(a, b))
        rhs = gl_compose(sigma_rescale(a), sigma_rescale(b))
        assert lhs == rhs


# -- p-variation -------------------------------------------------------------------

def test_p_variation_unit_line():
    grid = [Fraction(0), Fraction(1, 2), Fraction(1)]
    steps = [
        branched_signature(LINE, grid[i], grid[i + 1], 1) for i in range(2)
    ]
    assert p_variation(steps, 1) == pytest.approx(1.0)


def test_p_variation_single_interval():
    sig = branched_signature(LINE, 0, 1, 2)
    assert p_variation([sig], 2) == pytest.approx(homogeneous_norm(sig))


def test_p_variation_refinement_monotone():
    rng = random.Random(41)
    for trial in range(3):
        path = random_path(rng, 2, segments=4)
        times = path.times
        coarse_grid = [times[0], times[2], times[4]]
        fine_grid = list(times)
        for p in (1.0, 1.5, 2.0):
            coarse = [
                branched_signature(path, coarse_grid[i], coarse_grid[i + 1], 2)
                for i in range(len(coarse_grid) - 1)
            ]
            fine = [
                branched_signature(path, fine_grid[i], fine_grid[i + 1], 2)
                for i in range(len(fine_grid) - 1)
            ]
            assert p_variation(fine, p) >= p_variation(coarse, p) - 1e-12


def test_p_variation_needs_increments():
    with pytest.raises(ValueError):
        p_variation([], 1)


def test_control_superadditive_over_adjacent_intervals():
    from brpath.chargroup import ControlValue, variation_control

    rng = random.Random(47)
    for p in (1.0, 2.0):
        for _ in range(3):
            path = random_path(rng, 2, segments=4)
            times = path.times
            steps = [
                branched_signature(path, times[i], times[i + 1], 2)
                for i in range(4)
            ]
            for cut in (1, 2, 3):
                left = variation_control(steps[:cut], p, times[0], times[cut])
                right = variation_control(steps[cut:], p, times[cut], times[-1])
                whole = variation_control(steps, p, times[0], times[-1])
                assert left.omega + right.omega <= whole.omega + 1e-9
    with pytest.raises(ValueError):
        ControlValue(-1.0, 0, 1)


# -- serialization ---------------------------------------------------------------------

def test_functional_json_roundtrip_exact():
    rng = random.Random(43)
    a = random_character(rng, 3, 2)
    data = functional_to_json(a)
    assert data["mode"] == "exact"
    assert functional_from_json(data) == a


def test_functional_json_roundtrip_numeric():
    a = TruncatedFunctional(2, 1, {F("1"): 0.5, F("1(1)"): 0.125}, mode=NUMERIC)
    data = functional_to_json(a)
    assert isinstance(data["entries"][0]["coeff"], float)
    assert functional_from_json(data) == a
