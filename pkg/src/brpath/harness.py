"""Reference solving and the remainder-order experiments at p = 1.

The expansion under test is

    y_t ~ y_s + sum_tree f(tree)(y_s) (X_{s,t}, tree) / sigma(tree)

and the experiment measures how the defect scales against the driver's
1-variation.  Reference trajectories come from closed forms where the field
admits one (evaluated in high-precision arithmetic so that defects far below
double precision stay meaningful), otherwise from a classical 4th-order
stepper with step-halving control.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .elemdiff import ExpField, bseries_increment, field_from_json, field_to_json
from .signature import PiecewiseLinearPath, branched_signature, path_from_json, path_to_json

MACHINE_EPS = 2.220446049250313e-16
_CLOSED_FORM_DPS = 40


class ReferenceSolveError(RuntimeError):
    """The stepper failed to meet the tolerance within its budget."""


class DegenerateDataError(ValueError):
    """Every experiment row fell below the noise floor."""


def _mpf(value):
    frac = Fraction(value)
    return mpmath.mpf(frac.numerator) / frac.denominator


# ---------------------------------------------------------------------------
# reference trajectories
# ---------------------------------------------------------------------------

class ReferenceSolution:
    """Lazily evaluated reference trajectory with a per-time memo."""

    def __init__(self, method, accuracy, evaluator):
        self.method = method
        self.accuracy = accuracy
        self._evaluator = evaluator
        self._memo = {}

    def at(self, t):
        t = Fraction(t)
        if t not in self._memo:
            self._memo[t] = self._evaluator(t)
        return self._memo[t]


def _scalar_closed_form(field, path, y0):
    """Closed form for single-driver scalar fields of polynomial degree <= 2.

    Everything is autonomous in the driver, so y_t = Y(x_t - x_0) where Y
    solves the constant-coefficient scalar ODE.
    """
    if isinstance(field, ExpField):
        kind, c1, c2 = "exp", None, None
    else:
        if field.e != 1 or field.d != 1 or path.d != 1:
            return None
        poly = field.component(1).components[0]
        if poly.total_degree() > 2:
            return None
        c0 = poly.terms.get((0,), Fraction(0))
        c1 = poly.terms.get((1,), Fraction(0))
        c2 = poly.terms.get((2,), Fraction(0))
        if c0 != 0:
            return None
        kind = "linear" if c2 == 0 else ("pure-quadratic" if c1 == 0 else "logistic")
    y0 = Fraction(y0[0])
    x_start = path.value_at(path.domain[0])[0]

    def evaluate(t):
        with mpmath.workdps(_CLOSED_FORM_DPS):
            u = _mpf(path.value_at(t)[0] - x_start)
            y_init = _mpf(y0)
            if kind == "exp":
                return (mpmath.log(mpmath.e**y_init + u),)
            if kind == "linear":
                return (y_init * mpmath.e ** (_mpf(c1) * u),)
            if kind == "pure-quadratic":
                denom = 1 - _mpf(c2) * y_init * u
                if denom <= 0:
                    raise ReferenceSolveError("quadratic closed form hit its blow-up time")
                return (y_init / denom,)
            # logistic: y' = c1 y + c2 y^2
            if c1 * y0 + c2 * y0 * y0 == 0:
                return (y_init,)
            k = y0 / (c1 + c2 * y0)
            grow = _mpf(k) * mpmath.e ** (_mpf(c1) * u)
            denom = 1 - _mpf(c2) * grow
            if denom <= 0:
                raise ReferenceSolveError("logistic closed form hit its blow-up time")
            return (_mpf(c1) * grow / denom,)

    return ReferenceSolution(f"closed-{kind}", 10.0 ** (5 - _CLOSED_FORM_DPS), evaluate)


def _rk4_segment(rhs, y, h, steps):
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(tuple(a + 0.5 * h * b for a, b in zip(y, k1)))
        k3 = rhs(tuple(a + 0.5 * h * b for a, b in zip(y, k2)))
        k4 = rhs(tuple(a + h * b for a, b in zip(y, k3)))
        y = tuple(
            a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
    return y


def _stepper_solution(field, path, y0, tol):
    if isinstance(field, ExpField):
        def make_rhs(velocity):
            v = float(velocity[0])
            return lambda y: (v * math.exp(-y[0]),)
    else:
        components = field.components

        def make_rhs(velocity):
            vs = [float(v) for v in velocity]

            def rhs(y):
                total = [0.0] * len(y)
                for v, comp in zip(vs, components):
                    if v == 0.0:
                        continue
                    for i, value in enumerate(comp.eval(y)):
                        total[i] += v * float(value)
                return tuple(total)

            return rhs

    y_start = tuple(float(x) for x in y0)
    t_start = path.domain[0]

    def solve(t_end, base_steps):
        y = y_start
        for j in range(len(path.times) - 1):
            seg_lo = max(path.times[j], t_start)
            seg_hi = min(path.times[j + 1], t_end)
            if seg_hi <= seg_lo:
                continue
            rhs = make_rhs(path.segment_velocity(j))
            length = float(seg_hi - seg_lo)
            steps = max(1, math.ceil(base_steps * length / float(t_end - t_start)))
            y = _rk4_segment(rhs, y, length / steps, steps)
        return y

    def evaluate(t):
        if t == t_start:
            return y_start
        steps = 16
        previous = solve(t, steps)
        for _ in range(16):
            steps *= 2
            current = solve(t, steps)
            if max(abs(a - b) for a, b in zip(current, previous)) < tol:
                return current
            previous = current
        raise ReferenceSolveError(
            f"no convergence to tol={tol} within {steps} steps at t={t}"
        )

    return ReferenceSolution("rk4-richardson", tol, evaluate)


def solve_reference(field, path, y0, tol, method="auto"):
    """Reference trajectory of dy = sum_a f_a(y) dx^a along the driver."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if method not in ("auto", "closed", "stepper"):
        raise ValueError(f"unknown method {method!r}")
    field_d = 1 if isinstance(field, ExpField) else field.d
    if field_d != path.d:
        raise ValueError(f"field drives {field_d} components but the path has {path.d}")
    if method != "stepper":
        closed = _scalar_closed_form(field, path, y0)
        if closed is not None:
            return closed
        if method == "closed":
            raise ValueError("no closed form available for this field")
    return _stepper_solution(field, path, y0, tol)


# ---------------------------------------------------------------------------
# remainder experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RemainderRow:
    N: int
    s: float
    t: float
    omega: float
    remainder: float
    bound_ratio: float        # remainder * (N+1)! / (N! * omega^(N+1))
    slope_window: float | None  # local slope against the previous scale


@dataclass(frozen=True)
class ExperimentConfig:
    field: object
    path: PiecewiseLinearPath
    y0: tuple
    degrees: tuple
    scales: tuple
    base_time: Fraction
    tol: float
    p: int = 1

    def __post_init__(self):
        if any(n < 1 for n in self.degrees):
            raise ValueError("expansion degrees must be >= 1")
        if any(h2 >= h1 for h1, h2 in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly decreasing")
        if not self.scales:
            raise ValueError("need at least one scale")
        if self.p != 1:
            raise ValueError("experiments run the bounded-variation case p = 1")


def config_to_json(cfg):
    return {
        "field": field_to_json(cfg.field),
        "path": path_to_json(cfg.path),
        "y0": [str(Fraction(v)) for v in cfg.y0],
        "degrees": list(cfg.degrees),
        "scales": [str(h) for h in cfg.scales],
        "base_time": str(cfg.base_time),
        "tol": cfg.tol,
        "p": cfg.p,
    }


def config_from_json(data):
    return ExperimentConfig(
        field=field_from_json(data["field"]),
        path=path_from_json(data["path"]),
        y0=tuple(Fraction(v) for v in data["y0"]),
        degrees=tuple(int(n) for n in data["degrees"]),
        scales=tuple(Fraction(h) for h in data["scales"]),
        base_time=Fraction(data.get("base_time", 0)),
        tol=float(data["tol"]),
        p=int(data.get("p", 1)),
    )


def remainder_experiment(cfg, method="auto"):
    """Defect of the truncated expansion across (degree, scale) cells.

    Rows come out degree-ascending, scales descending.  Signatures are exact;
    the reference value is evaluated lazily and shared across cells.
    """
    reference = solve_reference(cfg.field, cfg.path, cfg.y0, cfg.tol, method)
    s = cfg.base_time
    y_s = reference.at(s)
    rows = []
    for N in cfg.degrees:
        prev = None
        for h in cfg.scales:
            t = s + h
            sig = branched_signature(cfg.path, s, t, N)
            predicted = bseries_increment(cfg.field, sig, y_s, N)
            actual = reference.at(t)
            remainder = float(
                math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(actual, predicted)))
                if len(predicted) > 1
                else abs(actual[0] - predicted[0])
            )
            omega = cfg.path.one_variation(s, t)
            ratio = remainder * (N + 1) / omega ** (N + 1) if omega > 0 else 0.0
            slope = None
            if prev is not None and remainder > 0 and prev[1] > 0:
                slope = (math.log(remainder) - math.log(prev[1])) / (
                    math.log(omega) - math.log(prev[0])
                )
            rows.append(
                RemainderRow(
                    N=N,
                    s=float(s),
                    t=float(t),
                    omega=omega,
                    remainder=remainder,
                    bound_ratio=ratio,
                    slope_window=slope,
                )
            )
            prev = (omega, remainder)
    return rows


def order_fit(rows, noise_floor=None):
    """Least-squares slope of log remainder against log control.

    Rows whose remainder sits below the noise floor (default 10^3 times
    machine epsilon, i.e. the resolution left by the reference tolerance) are
    excluded before fitting.
    """
    rows = list(rows)
    if len(rows) < 4:
        raise ValueError(f"need at least 4 rows, got {len(rows)}")
    degrees = {row.N for row in rows}
    if len(degrees) != 1:
        raise ValueError(f"rows mix expansion degrees {sorted(degrees)}; fit one at a time")
    if len({row.omega for row in rows}) != len(rows):
        raise ValueError("rows must have distinct scales")
    floor = 1e3 * MACHINE_EPS if noise_floor is None else noise_floor
    kept = [row for row in rows if row.remainder > floor]
    if len(kept) < 2:
        raise DegenerateDataError(
            f"only {len(kept)} rows above the noise floor {floor:g}; cannot fit"
        )
    xs = np.log([row.omega for row in kept])
    ys = np.log([row.remainder for row in kept])
    return float(np.polyfit(xs, ys, 1)[0])


REMAINDER_CSV_COLUMNS = ("N", "s", "t", "omega", "remainder", "slope_window", "bound_ratio")


def write_remainder_csv(rows, stream):
    writer = csv.writer(stream)
    writer.writerow(REMAINDER_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.N,
                repr(row.s),
                repr(row.t),
                repr(row.omega),
                repr(row.remainder),
                "" if row.slope_window is None else repr(row.slope_window),
                repr(row.bound_ratio),
            ]
        )


# ---------------------------------------------------------------------------
# optimality probe: y' = exp(-y), y0 = 0, unit-speed driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimalityRow:
    N: int
    t: float
    remainder: float
    leading: float   # t^(N+1) / (N+1), the claimed attained order
    ratio: float
    lower_bracket: float  # alternating-series lower bound 1 - t (N+1)/(N+2)


def optimality_probe(n_max, t=Fraction(1, 20)):
    """Exact remainder of the truncated log(1+t) series against its leading
    term; the ratio approaching 1 exhibits the bound order being attained."""
    if not 1 <= n_max <= 8:
        raise ValueError(f"need 1 <= N_max <= 8, got {n_max}")
    t = Fraction(t)
    if not 0 < t < 1:
        raise ValueError(f"need 0 < t < 1 for the series, got {t}")
    rows = []
    for N in range(1, n_max + 1):
        leading = t ** (N + 1) / (N + 1)
        remainder = Fraction(0)
        n = N + 1
        while True:
            term = Fraction((-1) ** (n + 1)) * t**n / n
            remainder += term
            if abs(term) < leading * Fraction(1, 10**25):
                break
            n += 1
        rows.append(
            OptimalityRow(
                N=N,
                t=float(t),
                remainder=abs(float(remainder)),
                leading=float(leading),
                ratio=float(abs(remainder) / leading),
                lower_bracket=float(1 - t * Fraction(N + 1, N + 2)),
            )
        )
    return rows


OPTIMALITY_CSV_COLUMNS = ("N", "t", "remainder", "leading", "ratio", "lower_bracket")


def write_optimality_csv(rows, stream):
    writer = csv.writer(stream)
    writer.writerow(OPTIMALITY_CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.N,
                repr(row.t),
                repr(row.remainder),
                repr(row.leading),
                repr(row.ratio),
                repr(row.lower_bracket),
            ]
        )


# ---------------------------------------------------------------------------
# neo-classical inequality and the tail constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeoclassicalResult:
    p: float
    a: float
    b: float
    n: int
    constant: str
    lhs: float
    rhs: float
    holds: bool


def neoclassical_check(p, a, b, n, constant="p"):
    """Fractional binomial inequality

        sum_j a^(j/p) b^((n-j)/p) / (Gamma(j/p+1) Gamma((n-j)/p+1))
            <= const * (a+b)^(n/p) / Gamma(n/p+1)

    with const = p by default ("p_squared" relaxes to p^2).
    """
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if a < 0 or b < 0:
        raise ValueError(f"need a, b >= 0, got a={a}, b={b}")
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    if constant not in ("p", "p_squared"):
        raise ValueError(f"unknown constant choice {constant!r}")
    a, b, p = float(a), float(b), float(p)
    lhs = sum(
        a ** (j / p) * b ** ((n - j) / p)
        / (math.gamma(j / p + 1.0) * math.gamma((n - j) / p + 1.0))
        for j in range(n + 1)
    )
    const = p if constant == "p" else p * p
    rhs = const * (a + b) ** (n / p) / math.gamma(n / p + 1.0)
    return NeoclassicalResult(
        p=p, a=a, b=b, n=n, constant=constant, lhs=lhs, rhs=rhs,
        holds=lhs <= rhs * (1.0 + 1e-12),
    )


def beta_p(p, term_floor=1e-15, term_cap=10**6):
    """p^2 (1 + sum_{n>=2} (2/n)^q) with q = ([p]+1)/p.

    The series is summed until a term drops below `term_floor` or the cap is
    hit (for q near 1 the floor is unreachable in reasonable time), and a
    midpoint integral bound covers the tail either way.
    """
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    q = (math.floor(p) + 1) / p
    total = 0.0
    n = 2
    while n <= term_cap:
        hi = min(n + 100_000, term_cap + 1)
        ns = np.arange(n, hi, dtype=np.float64)
        terms = (2.0 / ns) ** q
        total += float(terms.sum())
        n = hi
        if terms[-1] < term_floor:
            break
    tail = 2.0**q * (n - 0.5) ** (1.0 - q) / (q - 1.0)
    return p * p * (1.0 + total + tail)
