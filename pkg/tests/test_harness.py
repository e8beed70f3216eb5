"""Harness: reference solving, remainder rows, order fits, probes, constants."""

import io
import math
from fractions import Fraction

import pytest

from brpath.poly import Poly
from brpath.elemdiff import ExpField, PolyVectorField
from brpath.signature import PiecewiseLinearPath
from brpath.harness import (
    DegenerateDataError,
    ExperimentConfig,
    RemainderRow,
    beta_p,
    config_from_json,
    config_to_json,
    neoclassical_check,
    optimality_probe,
    order_fit,
    remainder_experiment,
    solve_reference,
    write_remainder_csv,
)

Y = Poly.variable(0, 1)
FIELD_Y = PolyVectorField.scalar(Y)
FIELD_LOGISTIC = PolyVectorField.scalar(Y - Y * Y)
LINE = PiecewiseLinearPath([0, 1], [[0], [1]])


def logistic_config(degrees, base=Fraction(1, 4), kmax=10):
    return ExperimentConfig(
        field=FIELD_LOGISTIC,
        path=LINE,
        y0=(Fraction(1, 2),),
        degrees=tuple(degrees),
        scales=tuple(Fraction(1, 2**k) for k in range(3, kmax + 1)),
        base_time=base,
        tol=1e-12,
    )


# -- reference solving ----------------------------------------------------------

def test_linear_field_closed_form():
    ref = solve_reference(FIELD_Y, LINE, (Fraction(1),), 1e-12)
    assert ref.method == "closed-linear"
    assert float(ref.at(1)[0]) == pytest.approx(math.e, abs=1e-14)


def test_exp_field_closed_form():
    ref = solve_reference(ExpField(), LINE, (Fraction(0),), 1e-12)
    assert float(ref.at(1)[0]) == pytest.approx(math.log(2.0), abs=1e-14)
    assert float(ref.at(Fraction(1, 4))[0]) == pytest.approx(math.log(1.25), abs=1e-14)


def test_logistic_closed_form():
    ref = solve_reference(FIELD_LOGISTIC, LINE, (Fraction(1, 2),), 1e-12)
    assert ref.method == "closed-logistic"
    assert float(ref.at(1)[0]) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-14)


def test_constant_path_constant_trajectory():
    flat = PiecewiseLinearPath([0, 1], [[Fraction(1, 3)], [Fraction(1, 3)]])
    ref = solve_reference(FIELD_LOGISTIC, flat, (Fraction(1, 4),), 1e-12)
    assert float(ref.at(1)[0]) == pytest.approx(0.25, abs=1e-14)


def test_stepper_agrees_with_closed_form():
    ref = solve_reference(FIELD_Y, LINE, (Fraction(1),), 1e-11, method="stepper")
    assert ref.method == "rk4-richardson"
    assert float(ref.at(1)[0]) == pytest.approx(math.e, abs=1e-10)


def test_stepper_handles_cubic_field():
    cubic = PolyVectorField.scalar(Y * Y * Y)
    short = PiecewiseLinearPath([0, Fraction(1, 2)], [[0], [Fraction(1, 2)]])
    ref = solve_reference(cubic, short, (Fraction(1, 2),), 1e-11)
    assert ref.method == "rk4-richardson"
    # dy/dt = y^3  =>  y(t) = (y0^-2 - 2 t)^(-1/2)
    exact = (4.0 - 2.0 * 0.5) ** -0.5
    assert float(ref.at(Fraction(1, 2))[0]) == pytest.approx(exact, abs=1e-9)


def test_exp_field_symbolic_vs_stepper():
    # the closed-form branch and the stepper route agree within 10x tolerance
    tol = 1e-10
    closed = solve_reference(ExpField(), LINE, (Fraction(0),), tol)
    stepped = solve_reference(ExpField(), LINE, (Fraction(0),), tol, method="stepper")
    for t in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        assert abs(float(closed.at(t)[0]) - stepped.at(t)[0]) < 10 * tol


def test_exp_field_remainder_routes_agree():
    # truncation defect via the exact alternating series vs the stepper route
    from brpath.signature import branched_signature
    from brpath.elemdiff import bseries_increment

    tol = 1e-10
    t = Fraction(1, 20)
    stepped = solve_reference(ExpField(), LINE, (Fraction(0),), tol, method="stepper")
    sig = branched_signature(LINE, 0, t, 6)
    for N in (1, 3, 6):
        series_remainder = abs(
            sum(Fraction((-1) ** (n + 1), n) * t**n for n in range(N + 1, 60))
        )
        (approx,) = bseries_increment(ExpField(), sig, (0.0,), N)
        stepper_remainder = abs(stepped.at(t)[0] - approx)
        assert abs(stepper_remainder - float(series_remainder)) < 10 * tol


def test_invalid_tolerance():
    with pytest.raises(ValueError):
        solve_reference(FIELD_Y, LINE, (Fraction(1),), 0.0)


# -- remainder experiment ----------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(
            field=FIELD_Y, path=LINE, y0=(Fraction(1),), degrees=(1,),
            scales=(Fraction(1, 4), Fraction(1, 2)), base_time=Fraction(0), tol=1e-12,
        )
    with pytest.raises(ValueError):
        ExperimentConfig(
            field=FIELD_Y, path=LINE, y0=(Fraction(1),), degrees=(0,),
            scales=(Fraction(1, 4),), base_time=Fraction(0), tol=1e-12,
        )


def test_exponential_remainder_degree_two():
    # f(y) = y from 1: remainder after the quadratic truncation is
    # e^h - (1 + h + h^2/2) ~ h^3/6
    cfg = ExperimentConfig(
        field=FIELD_Y, path=LINE, y0=(Fraction(1),), degrees=(2,),
        scales=tuple(Fraction(1, 2**k) for k in range(2, 9)),
        base_time=Fraction(0), tol=1e-12,
    )
    rows = remainder_experiment(cfg)
    for row in rows:
        h = row.omega
        expected = math.exp(h) - (1.0 + h + h * h / 2.0)
        assert row.remainder == pytest.approx(expected, rel=1e-9)
    slope = order_fit(rows)
    assert 2.85 <= slope <= 3.15


def test_remainder_zero_length_interval():
    cfg = logistic_config([2])
    rows = remainder_experiment(cfg)
    assert all(row.remainder > 0 for row in rows)
    # zero-length means identical endpoints: check directly through the API
    from brpath.signature import branched_signature
    from brpath.elemdiff import bseries_increment

    sig = branched_signature(LINE, Fraction(1, 4), Fraction(1, 4), 3)
    got = bseries_increment(FIELD_LOGISTIC, sig, (Fraction(1, 2),), 3)
    assert got == (Fraction(1, 2),)


def test_remainder_rows_monotone_and_vanishing():
    cfg = logistic_config([2])
    rows = remainder_experiment(cfg)
    values = [row.remainder for row in rows]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-9


def test_remainder_logistic_slopes():
    cfg = logistic_config([1, 2, 3, 4])
    rows = remainder_experiment(cfg)
    for N in (1, 2, 3, 4):
        subset = [row for row in rows if row.N == N]
        slope = order_fit(subset)
        assert N + 0.8 <= slope <= N + 1.2, (N, slope)


def test_remainder_multi_driver_order():
    # two driver components, stepper reference: the order law is not a d=1
    # artifact of the chain-only Taylor identity
    y = Poly.variable(0, 1)
    from brpath.poly import PolyMap

    field = PolyVectorField(1, 2, (PolyMap((y,)), PolyMap((y * y,))))
    bent = PiecewiseLinearPath(
        [0, Fraction(1, 2), 1],
        [[0, 0], [Fraction(1, 3), Fraction(1, 4)], [1, Fraction(1, 2)]],
    )
    cfg = ExperimentConfig(
        field=field,
        path=bent,
        y0=(Fraction(1, 2),),
        degrees=(1, 2),
        scales=tuple(Fraction(1, 2**k) for k in range(3, 9)),
        base_time=Fraction(1, 8),
        tol=1e-11,
    )
    rows = remainder_experiment(cfg)
    for N in (1, 2):
        subset = [row for row in rows if row.N == N]
        slope = order_fit(subset, noise_floor=1e-8)
        assert N + 0.7 <= slope <= N + 1.3, (N, slope)


def test_rows_ordering_and_ratio_fields():
    cfg = logistic_config([2, 1])
    rows = remainder_experiment(cfg)
    assert [row.N for row in rows[:8]] == [2] * 8  # config order preserved
    for row in rows:
        assert math.isfinite(row.bound_ratio) and row.omega > 0


# -- order fit ------------------------------------------------------------------------

def synthetic_rows(exponent, count=6):
    rows = []
    for k in range(count):
        omega = 0.5**k
        rows.append(
            RemainderRow(
                N=exponent - 1, s=0.0, t=omega, omega=omega,
                remainder=omega**exponent, bound_ratio=1.0, slope_window=None,
            )
        )
    return rows


def test_order_fit_exact_powers():
    assert order_fit(synthetic_rows(3)) == pytest.approx(3.0, abs=1e-12)


def test_order_fit_requires_rows():
    with pytest.raises(ValueError):
        order_fit(synthetic_rows(3)[:3])


def test_order_fit_single_degree_only():
    rows = synthetic_rows(3) + synthetic_rows(2)
    with pytest.raises(ValueError):
        order_fit(rows)


def test_order_fit_noise_floor_exclusion():
    rows = synthetic_rows(5, count=12)  # tail falls below 1e3 * eps
    kept_slope = order_fit(rows)
    assert kept_slope == pytest.approx(5.0, abs=1e-9)
    with pytest.raises(DegenerateDataError):
        order_fit(rows, noise_floor=1.0)


# -- CSV and config serialization ---------------------------------------------------------

def test_remainder_csv_columns():
    cfg = logistic_config([1], kmax=6)
    rows = remainder_experiment(cfg)
    buffer = io.StringIO()
    write_remainder_csv(rows, buffer)
    lines = buffer.getvalue().strip().splitlines()
    assert lines[0] == "N,s,t,omega,remainder,slope_window,bound_ratio"
    assert len(lines) == 1 + len(rows)
    first = lines[1].split(",")
    assert first[0] == "1" and first[5] == ""  # no slope window on the first scale


def test_config_json_roundtrip():
    cfg = logistic_config([1, 3])
    again = config_from_json(config_to_json(cfg))
    assert again.degrees == cfg.degrees
    assert again.scales == cfg.scales
    assert again.base_time == cfg.base_time
    assert again.field == cfg.field
    assert again.y0 == cfg.y0


def test_config_json_exp_field():
    cfg = ExperimentConfig(
        field=ExpField(), path=LINE, y0=(Fraction(0),), degrees=(2,),
        scales=(Fraction(1, 8),), base_time=Fraction(0), tol=1e-12,
    )
    again = config_from_json(config_to_json(cfg))
    assert isinstance(again.field, ExpField)


# -- optimality probe -----------------------------------------------------------------------

def test_optimality_first_degree():
    row = optimality_probe(1)[0]
    # (t^2/2 - t^3/3 + ...) / (t^2/2) at t = 1/20
    assert row.ratio == pytest.approx(1 - 2.0 / 3.0 * 0.05 + 0.5 * 0.05**2, abs=1e-4)


def test_optimality_bracket():
    for row in optimality_probe(8):
        assert row.lower_bracket <= row.ratio <= 1.0


def test_optimality_degree_six_window():
    row = optimality_probe(6)[-1]
    assert row.N == 6
    assert 0.94 <= row.ratio <= 1.0


def test_optimality_ratio_tends_to_one():
    small = optimality_probe(3, t=Fraction(1, 1000))
    for row in small:
        assert row.ratio == pytest.approx(1.0, abs=5e-3)


def test_optimality_guard():
    with pytest.raises(ValueError):
        optimality_probe(9)


# -- neo-classical inequality ----------------------------------------------------------------

def test_neoclassical_binomial_equality_at_p_one():
    for a in (0.0, 0.25, 1.0, 2.0):
        for b in (0.0, 0.5, 2.0):
            for n in range(8):
                outcome = neoclassical_check(1, a, b, n)
                assert outcome.holds
                assert outcome.lhs == pytest.approx(outcome.rhs, abs=1e-12, rel=1e-12)


def test_neoclassical_known_value():
    outcome = neoclassical_check(2, 1, 1, 2)
    assert outcome.lhs == pytest.approx(2 + 4 / math.pi, abs=1e-12)
    assert outcome.rhs == pytest.approx(4.0)
    assert outcome.holds


def test_neoclassical_degenerate_a():
    outcome = neoclassical_check(2, 0, 1, 4)
    assert outcome.lhs == pytest.approx(1 / math.gamma(3.0))
    assert outcome.holds


def test_neoclassical_rejects_bad_inputs():
    with pytest.raises(ValueError):
        neoclassical_check(0.5, 1, 1, 1)
    with pytest.raises(ValueError):
        neoclassical_check(2, -1, 1, 1)


def test_neoclassical_constant_flag():
    relaxed = neoclassical_check(2, 1, 1, 2, constant="p_squared")
    assert relaxed.rhs == pytest.approx(8.0)


# -- tail constant -----------------------------------------------------------------------------

def test_beta_one_closed_form():
    assert beta_p(1) == pytest.approx(1 + 4 * (math.pi**2 / 6 - 1), abs=1e-9)


def test_beta_two_finite_and_large():
    value = beta_p(2)
    assert math.isfinite(value) and value > 4.0


def test_beta_monotone_in_terms():
    # more terms only increase the partial sum
    lo = beta_p(1.5, term_cap=10**4)
    hi = beta_p(1.5, term_cap=10**5)
    assert hi >= lo - 1e-9
