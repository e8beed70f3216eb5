"""Exact branched signatures of piecewise-linear rational paths.

A tree coefficient is the iterated integral

    (X_{s,t}, [t1...tk]_a) = int_s^t prod_i (X_{s,u}, ti) dx^a_u,

computed segment by segment: on each linear piece the integrand is a
polynomial in u with rational coefficients, so the cumulative integral is a
closed-form piecewise polynomial and everything stays exact.  Forest
coefficients follow by character multiplicativity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .chargroup import (
    EXACT,
    NUMERIC,
    TO_GROUPLIKE,
    TruncatedFunctional,
    group_mul,
    sigma_rescale,
)
from .hopf import gl_word_product
from .trees import (
    DEFAULT_ENUMERATION_CAP,
    LabeledTree,
    count_forests,
    enumerate_trees,
    forests_up_to,
    render_tree,
)


class IntervalError(ValueError):
    """Requested interval leaves the path domain."""


class PiecewiseLinearPath:
    """A rational-sampled path in R^d, linearly interpolated."""

    __slots__ = ("times", "points", "d")

    def __init__(self, times, points):
        times = tuple(Fraction(t) for t in times)
        points = tuple(tuple(Fraction(x) for x in p) for p in points)
        if len(times) != len(points) or len(times) < 2:
            raise ValueError("need matching times/points with at least two samples")
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("times must be strictly increasing")
        d = len(points[0])
        if d < 1 or any(len(p) != d for p in points):
            raise ValueError("all points must share a dimension d >= 1")
        self.times = times
        self.points = points
        self.d = d

    @property
    def domain(self):
        return (self.times[0], self.times[-1])

    def _segment_index(self, t):
        lo, hi = self.domain
        if not lo <= t <= hi:
            raise IntervalError(f"time {t} outside the path domain [{lo}, {hi}]")
        for j in range(len(self.times) - 1):
            if t < self.times[j + 1]:
                return j
        return len(self.times) - 2

    def value_at(self, t):
        j = self._segment_index(Fraction(t))
        t = Fraction(t)
        t0, t1 = self.times[j], self.times[j + 1]
        lam = (t - t0) / (t1 - t0)
        return tuple(
            p0 + lam * (p1 - p0) for p0, p1 in zip(self.points[j], self.points[j + 1])
        )

    def segment_velocity(self, j):
        dt = self.times[j + 1] - self.times[j]
        return tuple(
            (p1 - p0) / dt for p0, p1 in zip(self.points[j], self.points[j + 1])
        )

    def one_variation(self, s, t):
        """Length of the path over [s, t] (Euclidean norm per segment)."""
        s, t = Fraction(s), Fraction(t)
        if s > t:
            raise IntervalError(f"need s <= t, got {s} > {t}")
        total = 0.0
        for u0, u1, j in _pieces(self, s, t):
            v = self.segment_velocity(j)
            speed = math.sqrt(sum(float(c) ** 2 for c in v))
            total += speed * float(u1 - u0)
        return total

    def scale(self, c):
        c = Fraction(c)
        return PiecewiseLinearPath(
            self.times, tuple(tuple(c * x for x in p) for p in self.points)
        )

    def reversed(self):
        lo, hi = self.domain
        times = tuple(lo + hi - t for t in reversed(self.times))
        return PiecewiseLinearPath(times, tuple(reversed(self.points)))

    def permute_components(self, perm):
        """Reorder components: new component i is old component perm[i]."""
        return PiecewiseLinearPath(
            self.times, tuple(tuple(p[j] for j in perm) for p in self.points)
        )


def path_to_json(path):
    return {
        "d": path.d,
        "times": [str(t) for t in path.times],
        "points": [[str(x) for x in p] for p in path.points],
    }


def path_from_json(data):
    return PiecewiseLinearPath(
        [Fraction(t) for t in data["times"]],
        [[Fraction(x) for x in p] for p in data["points"]],
    )


# ---------------------------------------------------------------------------
# univariate polynomial helpers (coefficient tuples, ascending powers)
# ---------------------------------------------------------------------------

def _padd(a, b):
    n = max(len(a), len(b))
    return tuple(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
    )


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


def _pscale(a, factor):
    return tuple(c * factor for c in a)

def _pshift(a, const):
    return (a[0] + const,) + tuple(a[1:]) if a else (const,)


def _pint(a):
    """Antiderivative with zero constant term."""
    return (Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(a))


def _peval(a, x):
    total = Fraction(0)
    for c in reversed(a):
        total = total * x + c
    return total


def _pieces(path, s, t):
    """Sub-intervals (u0, u1, segment index) covering [s, t]."""
    lo, hi = path.domain
    if not (lo <= s <= t <= hi):
        raise IntervalError(f"interval [{s}, {t}] outside the path domain [{lo}, {hi}]")
    cuts = sorted({s, t} | {u for u in path.times if s < u < t})
    out = []
    for u0, u1 in zip(cuts, cuts[1:]):
        out.append((u0, u1, path._segment_index(u0)))
    return out


class _SignatureContext:
    """Piecewise polynomials u -> (X_{s,u}, tree) for a fixed anchor s.

    The memo is per-instance, so concurrent computations on separate contexts
    never share mutable state.
    """

    def __init__(self, path, s, t):
        self.path = path
        self.s = Fraction(s)
        self.t = Fraction(t)
        self.pieces = _pieces(path, self.s, self.t)
        self.memo = {}

    def tree_pieces(self, tree):
        cached = self.memo.get(tree)
        if cached is not None:
            return cached
        path = self.path
        if not tree.children:
            a = tree.label - 1
            start = path.value_at(self.s)[a]
            out = []
            for u0, u1, j in self.pieces:
                slope = path.segment_velocity(j)[a]
                base = path.value_at(u0)[a]
                # x^a(u) - x^a(s) on [u0, u1]
                out.append((base - slope * u0 - start, slope))
            polys = tuple(out)
        else:
            children = [self.tree_pieces(c) for c in tree.children]
            a = tree.label - 1
            acc = Fraction(0)
            out = []
            for idx, (u0, u1, j) in enumerate(self.pieces):
                integrand = (Fraction(1),)
                for child in children:
                    integrand = _pmul(integrand, child[idx])
                integrand = _pscale(integrand, path.segment_velocity(j)[a])
                anti = _pint(integrand)
                poly = _pshift(anti, acc - _peval(anti, u0))
                acc = _peval(poly, u1)
                out.append(poly)
            polys = tuple(out)
        self.memo[tree] = polys
        return polys

    def coefficient(self, tree):
        if not self.pieces:
            return Fraction(0)
        return _peval(self.tree_pieces(tree)[-1], self.t)


def tree_integral(path, tree, s, t, mode=EXACT):
    """The coefficient of one tree over [s, t]; exact unless mode is numeric."""
    ctx = _SignatureContext(path, s, t)
    value = ctx.coefficient(tree)
    return float(value) if mode == NUMERIC else value


def branched_signature(path, s, t, N, mode=EXACT, cap=DEFAULT_ENUMERATION_CAP):
    """The full degree-N character: trees by integration, forests by
    multiplicativity."""
    if N < 0:
        raise ValueError(f"need N >= 0, got {N}")
    total = sum(count_forests(n, path.d) for n in range(N + 1))
    if total > cap:
        raise RuntimeError(f"{total} forests up to degree {N} exceed the cap {cap}")
    ctx = _SignatureContext(path, s, t)
    tree_values = {}
    for degree in range(1, N + 1):
        for tree in enumerate_trees(degree, path.d):
            tree_values[tree] = ctx.coefficient(tree)
    coeffs = {}
    for forest in forests_up_to(N, path.d):
        if forest.degree == 0:
            continue
        value = Fraction(1)
        for tree in forest.trees:
            value *= tree_values[tree]
            if value == 0:
                break
        if value != 0:
            coeffs[forest] = float(value) if mode == NUMERIC else value
    return TruncatedFunctional(N, path.d, coeffs, mode)


def chen_check(path, s, u, t, N):
    """Exact multiplicativity of signatures over the split s <= u <= t."""
    left = branched_signature(path, s, u, N)
    right = branched_signature(path, u, t, N)
    whole = branched_signature(path, s, t, N)
    return group_mul(left, right) == whole


def word_functional(sig, word):
    """Pair the symmetry-rescaled signature with the product of the letters."""
    word = tuple(word)
    degree = sum(t.degree for t in word)
    if degree > sig.N:
        raise ValueError(f"word degree {degree} exceeds truncation {sig.N}")
    rescaled = sigma_rescale(sig, TO_GROUPLIKE)
    total = 0
    for forest, coeff in gl_word_product(word).items():
        total += coeff * rescaled(forest)
    return total


# ---------------------------------------------------------------------------
# factorial-decay report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayRow:
    word: tuple
    s: float
    t: float
    degree: int
    value: float
    omega: float
    bound_core: float   # omega^{|l|} / (beta * |l|!)
    fitted_scale: float  # smallest C with |value| <= (C omega)^{|l|} / (beta |l|!)


@dataclass(frozen=True)
class DecayReport:
    p: int
    beta: float
    rows: tuple
    fitted_constant: float


def factorial_decay_report(path, max_degree, levels, p=1, letters=None):
    """Word-functional magnitudes against the factorial-decay shape, over a
    dyadic family of subintervals.

    Report-only: the comparison constant is fitted, never asserted, because
    the underlying bound is existential.  At p = 1 the generator alphabet is
    the single-vertex trees unless `letters` overrides it.
    """
    if p != 1:
        raise ValueError("the report is implemented for the bounded-variation case p = 1")
    from .harness import beta_p  # local import to keep module layering acyclic

    beta = beta_p(p)
    if letters is None:
        letters = tuple(LabeledTree(a) for a in range(1, path.d + 1))
    words = [()]
    by_degree = {0: [()]}
    for degree in range(1, max_degree + 1):
        grown = [
            (letter,) + word
            for letter in letters
            for word in by_degree.get(degree - letter.degree, [])
        ]
        by_degree[degree] = grown
        words.extend(grown)
    words = [w for w in words if 0 < sum(t.degree for t in w) <= max_degree]

    lo, hi = path.domain
    rows = []
    fitted = 0.0
    for level in range(levels + 1):
        pieces = 2**level
        for k in range(pieces):
            s = lo + (hi - lo) * Fraction(k, pieces)
            t = lo + (hi - lo) * Fraction(k + 1, pieces)
            sig = branched_signature(path, s, t, max_degree)
            omega = path.one_variation(s, t)
            for word in words:
                degree = sum(tr.degree for tr in word)
                value = float(word_functional(sig, word))
                bound_core = omega**degree / (beta * math.factorial(degree))
                if value == 0.0 or omega == 0.0:
                    scale = 0.0
                else:
                    scale = (abs(value) * beta * math.factorial(degree)) ** (
                        1.0 / degree
                    ) / omega
                fitted = max(fitted, scale)
                rows.append(
                    DecayRow(
                        word=tuple(render_tree(tr) for tr in word),
                        s=float(s),
                        t=float(t),
                        degree=degree,
                        value=value,
                        omega=omega,
                        bound_core=bound_core,
                        fitted_scale=scale,
                    )
                )
    return DecayReport(p=p, beta=beta, rows=tuple(rows), fitted_constant=fitted)
