"""The truncated character group, grouplike elements, and their bridge.

A TruncatedFunctional stores coefficients on forests of degree 1..N (the unit
coefficient is pinned to 1).  Characters multiply through the coproduct,
grouplike elements through the Grossman-Larson composition; the symmetry
factor rescaling carries one family into the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hopf import ck_coproduct, gl_coproduct, gl_product
from .trees import (
    enumerate_forests,
    forests_up_to,
    parse_forest,
    render_forest,
    symmetry_factor,
)

EXACT = "exact"
NUMERIC = "numeric"
_NUMERIC_TOL = 1e-12


class TruncationMismatch(ValueError):
    pass


class TruncatedFunctional:
    """A linear functional on forests of degree <= N over labels 1..d."""

    __slots__ = ("N", "d", "mode", "coeffs")

    def __init__(self, N, d, coeffs=None, mode=EXACT):
        if N < 0 or d < 1:
            raise ValueError(f"need N >= 0 and d >= 1, got N={N}, d={d}")
        if mode not in (EXACT, NUMERIC):
            raise ValueError(f"unknown mode {mode!r}")
        self.N = N
        self.d = d
        self.mode = mode
        clean = {}
        if coeffs:
            for forest, value in coeffs.items():
                if forest.degree == 0:
                    if value != 1:
                        raise ValueError("the unit coefficient is fixed to 1")
                    continue
                if forest.degree > N:
                    raise ValueError(
                        f"forest {render_forest(forest)} exceeds truncation {N}"
                    )
                if value != 0:
                    clean[forest] = value
        self.coeffs = clean

    def __call__(self, forest):
        if forest.degree == 0:
            return 1
        return self.coeffs.get(forest, 0)

    def replace(self, coeffs=None, mode=None):
        return TruncatedFunctional(
            self.N,
            self.d,
            self.coeffs if coeffs is None else coeffs,
            self.mode if mode is None else mode,
        )

    def _close(self, x, y):
        if self.mode == EXACT:
            return x == y
        return abs(x - y) <= _NUMERIC_TOL * max(1.0, abs(x), abs(y))

    def __eq__(self, other):
        if not isinstance(other, TruncatedFunctional):
            return NotImplemented
        if (self.N, self.d) != (other.N, other.d):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self._close(self(k), other(k)) for k in keys)

    def __hash__(self):
        return hash((self.N, self.d, frozenset(self.coeffs.items())))

    def __repr__(self):
        return (
            f"TruncatedFunctional(N={self.N}, d={self.d}, mode={self.mode}, "
            f"{len(self.coeffs)} entries)"
        )


def identity_functional(N, d, mode=EXACT):
    """The counit: 1 on the empty forest, 0 elsewhere."""
    return TruncatedFunctional(N, d, {}, mode)


def _require_compatible(a, b):
    if (a.N, a.d) != (b.N, b.d):
        raise TruncationMismatch(
            f"(N={a.N}, d={a.d}) does not match (N={b.N}, d={b.d})"
        )
    if a.mode != b.mode:
        raise TruncationMismatch(f"mode {a.mode!r} does not match {b.mode!r}")


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------

def is_character(a):
    """Multiplicativity (a, r1)(a, r2) = (a, r1 r2) on all pairs within N."""
    eq = a._close
    for deg1 in range(1, a.N):
        for rho1 in enumerate_forests(deg1, a.d):
            v1 = a(rho1)
            for deg2 in range(deg1, a.N - deg1 + 1):
                for rho2 in enumerate_forests(deg2, a.d):
                    if not eq(v1 * a(rho2), a(rho1 * rho2)):
                        return False
    return True


def is_grouplike(b):
    """Whether the GL coproduct of b, taken termwise, equals b (x) b."""
    eq = b._close
    delta = {}
    for forest in forests_up_to(b.N, b.d):
        value = b(forest)
        if value == 0:
            continue
        for (left, right), mult in gl_coproduct(forest).items():
            key = (left, right)
            delta[key] = delta.get(key, 0) + value * mult
    for deg1 in range(0, b.N + 1):
        for rho1 in enumerate_forests(deg1, b.d):
            v1 = b(rho1)
            for deg2 in range(0, b.N - deg1 + 1):
                for rho2 in enumerate_forests(deg2, b.d):
                    if not eq(delta.get((rho1, rho2), 0), v1 * b(rho2)):
                        return False
    return True


# ---------------------------------------------------------------------------
# group operations (character side)
# ---------------------------------------------------------------------------

def group_mul(a, b):
    """(ab, rho) = (a (x) b, cop rho); the counit is the two-sided identity."""
    _require_compatible(a, b)
    out = {}
    for forest in forests_up_to(a.N, a.d):
        if forest.degree == 0:
            continue
        total = 0
        for (left, right), mult in ck_coproduct(forest).items():
            total += mult * a(left) * b(right)
        if total != 0:
            out[forest] = total
    return TruncatedFunctional(a.N, a.d, out, a.mode)


def group_inv(a):
    """Inverse by degreewise triangular solve of (a * x, rho) = 0."""
    out = {}

    def x(forest):
        if forest.degree == 0:
            return 1
        return out.get(forest, 0)

    for deg in range(1, a.N + 1):
        for rho in enumerate_forests(deg, a.d):
            acc = 0
            for (left, right), mult in ck_coproduct(rho).items():
                if right == rho:
                    continue  # the unknown (x, rho) itself
                acc += mult * a(left) * x(right)
            if acc != 0:
                out[rho] = -acc
    return TruncatedFunctional(a.N, a.d, out, a.mode)


def gl_compose(b1, b2):
    """Composition on the grouplike side: pair b1 (x) b2 with the GL product.

    (b1 b2, rho) = sum over forest pairs of (b1, r1)(b2, r2) <r1 * r2, rho>.
    Together with the symmetry rescaling this is the coproduct duality as an
    executable law.
    """
    _require_compatible(b1, b2)
    out = {}
    for deg1 in range(0, b1.N + 1):
        for rho1 in enumerate_forests(deg1, b1.d):
            v1 = b1(rho1)
            if v1 == 0:
                continue
            for deg2 in range(0, b1.N - deg1 + 1):
                for rho2 in enumerate_forests(deg2, b1.d):
                    v2 = b2(rho2)
                    if v2 == 0:
                        continue
                    for forest, mult in gl_product(rho1, rho2).items():
                        if forest.degree == 0:
                            continue
                        val = out.get(forest, 0) + v1 * v2 * mult
                        if val == 0:
                            out.pop(forest, None)
                        else:
                            out[forest] = val
    return TruncatedFunctional(b1.N, b1.d, out, b1.mode)


# ---------------------------------------------------------------------------
# norm, dilation, rescaling
# ---------------------------------------------------------------------------

def homogeneous_norm(a):
    """max over stored forests of |(a, rho)|^(1/|rho|)."""
    best = 0.0
    for forest, value in a.coeffs.items():
        mag = abs(float(value)) ** (1.0 / forest.degree)
        if mag > best:
            best = mag
    return best


def dilate(c, a):
    """Coefficientwise scaling by c^degree."""
    if c <= 0:
        raise ValueError(f"dilation factor must be positive, got {c}")
    exact = a.mode == EXACT and not isinstance(c, float)
    factor = Fraction(c) if exact else float(c)
    out = {f: v * factor**f.degree for f, v in a.coeffs.items()}
    return TruncatedFunctional(a.N, a.d, out, a.mode if exact else NUMERIC)


TO_GROUPLIKE = "to_grouplike"
TO_CHARACTER = "to_character"


def sigma_rescale(a, direction=TO_GROUPLIKE):
    """Divide (to_grouplike) or multiply (to_character) by the symmetry factor."""
    out = {}
    for forest, value in a.coeffs.items():
        sigma = symmetry_factor(forest)
        if direction == TO_GROUPLIKE:
            scaled = Fraction(value) / sigma if a.mode == EXACT else value / sigma
        elif direction == TO_CHARACTER:
            scaled = value * sigma
        else:
            raise ValueError(f"unknown direction {direction!r}")
        out[forest] = scaled
    return TruncatedFunctional(a.N, a.d, out, a.mode)


# ---------------------------------------------------------------------------
# p-variation over a grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlValue:
    """A nonnegative interval function value with its (s, t) attribution.

    Built from the p-th power of the p-variation it is superadditive over
    adjacent intervals: omega(s,u) + omega(u,t) <= omega(s,t).
    """

    omega: float
    s: object
    t: object

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError(f"control values are nonnegative, got {self.omega}")


def variation_control(increments, p, s, t):
    """The control omega(s,t) = ||X||_{p-var}^p over the given grid."""
    return ControlValue(p_variation(increments, p) ** p, s, t)


def p_variation(increments, p):
    """Max over sub-partitions of the grid of (sum ||X_{ti,tj}||^p)^(1/p).

    `increments` are the consecutive-interval group elements X_{t_i, t_{i+1}};
    interval elements are rebuilt by composition, and dynamic programming over
    the grid points realizes the supremum restricted to this grid.
    """
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    steps = list(increments)
    if not steps:
        raise ValueError("need at least two grid points (one increment)")
    n = len(steps)
    span = {}
    for i in range(n):
        acc = steps[i]
        span[(i, i + 1)] = acc
        for j in range(i + 1, n):
            acc = group_mul(acc, steps[j])
            span[(i, j + 1)] = acc
    norm_p = {key: homogeneous_norm(el) ** p for key, el in span.items()}
    best = [0.0] * (n + 1)
    for j in range(1, n + 1):
        best[j] = max(best[i] + norm_p[(i, j)] for i in range(j))
    return best[n] ** (1.0 / p)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------

def functional_to_json(a):
    entries = sorted(a.coeffs.items(), key=lambda kv: kv[0].sort_key)
    payload = []
    for forest, value in entries:
        if a.mode == EXACT:
            frac = Fraction(value)
            coeff = f"{frac.numerator}/{frac.denominator}"
        else:
            coeff = float(value)
        payload.append({"forest": render_forest(forest), "coeff": coeff})
    return {"N": a.N, "d": a.d, "mode": a.mode, "entries": payload}


def functional_from_json(data):
    mode = data.get("mode", EXACT)
    d = data["d"]
    coeffs = {}
    for entry in data["entries"]:
        forest = parse_forest(entry["forest"], d)
        raw = entry["coeff"]
        value = float(raw) if mode == NUMERIC else Fraction(raw)
        coeffs[forest] = coeffs.get(forest, 0) + value
    return TruncatedFunctional(data["N"], d, coeffs, mode)
