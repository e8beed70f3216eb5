"""Elementary differentials, word compositions, and the tree-indexed Taylor step.

The driver-indexed vector field f = (f_1 .. f_d) maps R^e into L(R^d, R^e)
with polynomial components, so every derivative below is exact symbolic
calculus.  The single non-polynomial field used anywhere, y' = exp(-y), is
special-cased in closed form because its iterated compositions are known
explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath

from .hopf import gl_word_product
from .poly import Poly, PolyMap
from .trees import Forest, LabeledTree, enumerate_trees, symmetry_factor


class PolyVectorField:
    """Polynomial f: R^e -> L(R^d, R^e); component a drives dx^a."""

    __slots__ = ("e", "d", "components", "_hash")

    def __init__(self, e, d, components):
        components = tuple(components)
        if len(components) != d:
            raise ValueError(f"expected {d} driver components, got {len(components)}")
        for comp in components:
            if comp.dim != e or comp.nvars != e:
                raise ValueError("every component must be a PolyMap R^e -> R^e")
        self.e = e
        self.d = d
        self.components = components
        self._hash = hash((e, d, components))

    @classmethod
    def scalar(cls, poly):
        """Convenience constructor for e = d = 1 fields."""
        return cls(1, 1, (PolyMap((poly,)),))

    def component(self, label):
        if not 1 <= label <= self.d:
            raise ValueError(f"driver label {label} out of range 1..{self.d}")
        return self.components[label - 1]

    def __eq__(self, other):
        return (
            isinstance(other, PolyVectorField)
            and (self.e, self.d, self.components) == (other.e, other.d, other.components)
        )

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class ExpField:
    """The scalar field y' = exp(-y); not polynomial, handled in closed form."""

    e: int = 1
    d: int = 1


@dataclass(frozen=True)
class ExpIterate:
    """Closed form of the k-fold composition of the exponential field.

    The k-th iterate is coefficient * exp(rate * y) with coefficient
    (-1)^(k-1) (k-1)! and rate -k.
    """

    k: int
    coefficient: int
    rate: int

    def value(self, y):
        if isinstance(y, mpmath.mpf):
            return self.coefficient * mpmath.e ** (self.rate * y)
        return self.coefficient * math.exp(self.rate * float(y))


def exp_field_circ(k):
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    return ExpIterate(k=k, coefficient=(-1) ** (k - 1) * math.factorial(k - 1), rate=-k)


# ---------------------------------------------------------------------------
# directional calculus on polynomial maps
# ---------------------------------------------------------------------------

def directional_derivative(pm, direction):
    """dF(v): the Jacobian of pm applied to the map `direction`."""
    e = pm.nvars
    out = []
    for comp in pm.components:
        acc = Poly.zero(e)
        for j in range(e):
            part = comp.partial(j)
            if not part.is_zero():
                acc = acc + part * direction.components[j]
        out.append(acc)
    return PolyMap(out)


def frechet_apply(pm, directions):
    """d^k pm applied to k polynomial maps (symmetric multilinear)."""
    e = pm.nvars
    k = len(directions)
    if k == 0:
        return pm
    out = []
    for comp in pm.components:
        acc = Poly.zero(e)
        for idx in product(range(e), repeat=k):
            deriv = comp
            for j in idx:
                deriv = deriv.partial(j)
                if deriv.is_zero():
                    break
            if deriv.is_zero():
                continue
            term = deriv
            for direction, j in zip(directions, idx):
                term = term * direction.components[j]
            acc = acc + term
        out.append(acc)
    return PolyMap(out)


# ---------------------------------------------------------------------------
# elementary differentials and the differential-operator map
# ---------------------------------------------------------------------------

_ELEM_CACHE = {}


def elementary_differential(field, tree):
    """f(tree): the root label picks the driver component, children feed the
    Frechet derivative of matching order."""
    key = (field, tree)
    cached = _ELEM_CACHE.get(key)
    if cached is not None:
        return cached
    base = field.component(tree.label)
    if tree.children:
        directions = [elementary_differential(field, c) for c in tree.children]
        result = frechet_apply(base, directions)
    else:
        result = base
    _ELEM_CACHE[key] = result
    return result


def psi_apply(field, comb, phi):
    """The differential-operator action of a forest combination on phi.

    A forest t1...tk acts as d^k phi(f(t1), ..., f(tk)); the action extends
    linearly over the combination.
    """
    acc = PolyMap.zero(field.e)
    for forest, coeff in comb.items():
        directions = [elementary_differential(field, t) for t in forest.trees]
        acc = acc + frechet_apply(phi, directions).scale(Fraction(coeff))
    return acc


def f_word(field, word):
    """Word composition: the empty word is the identity, and prepending a
    letter t differentiates in direction f(t)."""
    result = PolyMap.identity(field.e)
    for letter in reversed(tuple(word)):
        result = directional_derivative(result, elementary_differential(field, letter))
    return result


def check_word_identity(field, word):
    """Exact polynomial identity between the word composition and the
    operator action of the letters' product, applied to the identity map."""
    word = tuple(word)
    lhs = f_word(field, word)
    rhs = psi_apply(field, gl_word_product(word), PolyMap.identity(field.e))
    return lhs == rhs


def f_circ(field, k):
    """Iterated composition for single-driver fields: g_{k+1} = dg_k(f)."""
    if field.d != 1:
        raise ValueError("iterated composition is a d = 1 specialization")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    f1 = field.component(1)
    result = f1
    for _ in range(k - 1):
        result = directional_derivative(result, f1)
    return result


# ---------------------------------------------------------------------------
# tree-indexed Taylor increment
# ---------------------------------------------------------------------------

def bseries_increment(field, sig, y, N):
    """y plus the degree-N truncated expansion driven by the signature.

    For polynomial fields this sums f(tau)(y) (X, tau) / sigma(tau) over all
    trees of degree <= N; exact when y and the signature are rational.  For
    the exponential field the single-driver shortcut through the iterated
    compositions is used (the two agree degree by degree when d = 1).
    """
    if sig.N < N:
        raise ValueError(f"signature truncation {sig.N} is below N={N}")
    if isinstance(field, ExpField):
        return _exp_field_increment(sig, y, N)
    if field.d != sig.d:
        raise ValueError(f"field has d={field.d} but signature has d={sig.d}")
    result = list(y)
    for degree in range(1, N + 1):
        for tree in enumerate_trees(degree, field.d):
            weight = sig(Forest.single(tree))
            if weight == 0:
                continue
            weight = weight * Fraction(1, symmetry_factor(tree))
            values = elementary_differential(field, tree).eval(tuple(y))
            for i, value in enumerate(values):
                if value != 0:
                    result[i] = result[i] + value * weight
    return tuple(result)


def _exp_field_increment(sig, y, N):
    if sig.d != 1:
        raise ValueError("the exponential field is a d = 1 specialization")
    increment = sig(Forest.single(LabeledTree(1)))
    y0 = y[0] if isinstance(y, (tuple, list)) else y
    if isinstance(y0, mpmath.mpf):
        frac = Fraction(increment)
        delta = mpmath.mpf(frac.numerator) / frac.denominator
    else:
        delta = float(increment)
    total = y0
    for k in range(1, N + 1):
        total = total + exp_field_circ(k).value(y0) * delta**k / math.factorial(k)
    return (total,)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------

def _poly_to_json(poly):
    out = {}
    for expo, coeff in sorted(poly.terms.items()):
        key = ",".join(str(k) for k in expo)
        out[key] = f"{coeff.numerator}/{coeff.denominator}"
    return out


def _poly_from_json(data, nvars):
    terms = {}
    for key, raw in data.items():
        expo = tuple(int(tok) for tok in key.split(","))
        terms[expo] = Fraction(raw)
    return Poly(nvars, terms)


def field_to_json(field):
    if isinstance(field, ExpField):
        return {"field": "exp"}
    return {
        "e": field.e,
        "d": field.d,
        "components": [
            [_poly_to_json(p) for p in comp.components] for comp in field.components
        ],
    }


def field_from_json(data):
    if data == "exp" or data.get("field") == "exp":
        return ExpField()
    e = data["e"]
    d = data["d"]
    components = [
        PolyMap(tuple(_poly_from_json(p, e) for p in comp))
        for comp in data["components"]
    ]
    return PolyVectorField(e, d, components)
