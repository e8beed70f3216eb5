"""Connes-Kreimer and Grossman-Larson structures over the forest basis.

Orientation convention for the coproduct: pruned branches go in the LEFT
tensor slot and the root-containing trunk in the RIGHT slot.  This is the
unique choice under which the product/coproduct duality

    cop(rho) = sum  sigma(rho) / (sigma(rho1) sigma(rho2))
                    * <rho1 * rho2, rho>  rho1 (x) rho2

holds verbatim with the grafting product orientation used here (left operand
grafts onto the right), and it is pinned down independently by the Chen-split
tests in the signature module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .linear import LinComb, TensorLinComb
from .trees import (
    EMPTY_FOREST,
    Forest,
    LabeledTree,
    attach_at_vertices,
    count_forests,
    enumerate_forests,
    enumerate_trees,
    render_forest,
    parse_forest,
    symmetry_factor,
    tree_node_arrays,
)

DEFAULT_RANK_CAP = 5000


class StructuralError(RuntimeError):
    """An algebraic consistency check failed (signals a real defect)."""


# ---------------------------------------------------------------------------
# Connes-Kreimer coproduct: recursive route and admissible-cut oracle
# ---------------------------------------------------------------------------

def _tensor_mul(left_terms, right_terms):
    out = {}
    for (l1, r1), c1 in left_terms.items():
        for (l2, r2), c2 in right_terms.items():
            key = (l1 * l2, r1 * r2)
            out[key] = out.get(key, 0) + c1 * c2
    return out


@lru_cache(maxsize=None)
def _ck_tree(tree):
    # cop(B+_a(t1...tk)) = B+_a(t1...tk) (x) 1 + (id (x) B+_a)(cop t1 ... cop tk)
    prod = {(EMPTY_FOREST, EMPTY_FOREST): 1}
    for child in tree.children:
        prod = _tensor_mul(prod, _ck_tree(child))
    out = {}
    for (left, right), coeff in prod.items():
        key = (left, Forest.single(LabeledTree(tree.label, right.trees)))
        out[key] = out.get(key, 0) + coeff
    total = (Forest.single(tree), EMPTY_FOREST)
    out[total] = out.get(total, 0) + 1
    return out


def ck_coproduct(forest):
    """Coproduct by the root-grafting recursion, multiplicative over members."""
    prod = {(EMPTY_FOREST, EMPTY_FOREST): 1}
    for tree in forest.trees:
        prod = _tensor_mul(prod, _ck_tree(tree))
    return TensorLinComb(prod)


def _tree_cut_terms(tree):
    """All admissible-cut splittings of one tree, plus the total cut.

    A cut is a set of edges meeting each root-to-vertex path at most once,
    identified here by the set of child endpoints.  Pruned subtrees go left,
    the trunk goes right.
    """
    labels, kids = tree_node_arrays(tree)
    n = len(labels)
    ancestors = [set() for _ in range(n)]
    order = [0]
    for idx in order:
        for child in kids[idx]:
            ancestors[child] = ancestors[idx] | {idx}
            order.append(child)

    def subtree(idx):
        return LabeledTree(labels[idx], [subtree(c) for c in kids[idx]])

    def trunk(idx, removed):
        return LabeledTree(
            labels[idx], [trunk(c, removed) for c in kids[idx] if c not in removed]
        )

    non_root = list(range(1, n))
    terms = {}
    for size in range(len(non_root) + 1):
        for removed in itertools.combinations(non_root, size):
            rset = set(removed)
            if any(ancestors[v] & rset for v in removed):
                continue
            pruned = Forest(tuple(subtree(v) for v in removed))
            rest = Forest.single(trunk(0, rset))
            key = (pruned, rest)
            terms[key] = terms.get(key, 0) + 1
    total = (Forest.single(tree), EMPTY_FOREST)
    terms[total] = terms.get(total, 0) + 1
    return terms


def ck_coproduct_cuts(forest):
    """Independent oracle: direct enumeration of admissible edge subsets."""
    prod = {(EMPTY_FOREST, EMPTY_FOREST): 1}
    for tree in forest.trees:
        prod = _tensor_mul(prod, _tree_cut_terms(tree))
    return TensorLinComb(prod)


# ---------------------------------------------------------------------------
# Grossman-Larson product and coproduct
# ---------------------------------------------------------------------------

def _gl_forest_product(left, right):
    # each tree occurrence of `left` either grafts onto a vertex of `right`
    # or stays a free forest member
    m = right.degree
    out = {}
    for choice in itertools.product(range(m + 1), repeat=len(left.trees)):
        extra = {}
        free = []
        for tree, target in zip(left.trees, choice):
            if target == m:
                free.append(tree)
            else:
                extra.setdefault(target, []).append(tree)
        grafted = attach_at_vertices(right, extra)
        result = Forest(grafted.trees + tuple(free))
        out[result] = out.get(result, 0) + 1
    return out


def _as_lincomb(obj):
    if isinstance(obj, LinComb):
        return obj
    if isinstance(obj, Forest):
        return LinComb.basis(obj)
    if isinstance(obj, LabeledTree):
        return LinComb.basis(Forest.single(obj))
    raise TypeError(f"expected LinComb/Forest/LabeledTree, got {type(obj).__name__}")


def gl_product(a, b):
    """Bilinear extension of the grafting product; the empty forest is the unit."""
    a = _as_lincomb(a)
    b = _as_lincomb(b)
    out = {}
    for left, ca in a.items():
        for right, cb in b.items():
            for forest, mult in _gl_forest_product(left, right).items():
                val = out.get(forest, 0) + ca * cb * mult
                if val == 0:
                    out.pop(forest, None)
                else:
                    out[forest] = val
    return LinComb(out)


def gl_word_product(letters):
    """Left-to-right fold t1 * t2 * ... * tk; the empty word gives the unit."""
    acc = LinComb.basis(EMPTY_FOREST)
    for letter in letters:
        acc = gl_product(acc, _as_lincomb(letter))
    return acc


def gl_coproduct(forest):
    """Splitting of the member multiset over occurrence subsets."""
    groups = forest.with_multiplicities()
    out = {}
    for picks in itertools.product(*(range(m + 1) for _, m in groups)):
        coeff = 1
        left, right = [], []
        for (tree, mult), take in zip(groups, picks):
            coeff *= math.comb(mult, take)
            left.extend([tree] * take)
            right.extend([tree] * (mult - take))
        key = (Forest(tuple(left)), Forest(tuple(right)))
        out[key] = out.get(key, 0) + coeff
    return TensorLinComb(out)


# ---------------------------------------------------------------------------
# product/coproduct duality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualityReport:
    forest: Forest
    ok: bool
    discrepancy: TensorLinComb


def duality_coproduct(forest, d=None):
    """Right-hand side of the duality identity, built from the GL product."""
    if d is None:
        d = max(forest.max_label(), 1)
    sigma = Fraction(symmetry_factor(forest))
    out = {}
    n = forest.degree
    for deg_left in range(n + 1):
        for rho1 in enumerate_forests(deg_left, d):
            s1 = symmetry_factor(rho1)
            for rho2 in enumerate_forests(n - deg_left, d):
                pairing = gl_product(rho1, rho2).coefficient(forest)
                if pairing == 0:
                    continue
                coeff = sigma / (s1 * symmetry_factor(rho2)) * pairing
                key = (rho1, rho2)
                out[key] = out.get(key, 0) + coeff
    return TensorLinComb(out)


def verify_duality(forest, d=None):
    """Check the coproduct against its GL-product reconstruction, exactly."""
    lhs = ck_coproduct(forest)
    rhs = duality_coproduct(forest, d)
    diff = lhs - rhs
    return DualityReport(forest=forest, ok=not diff, discrepancy=diff)


# ---------------------------------------------------------------------------
# free generators of the Grossman-Larson algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorTable:
    """Degreewise free generators: counts, chosen trees, and the word alphabet."""

    d: int
    maxdeg: int
    counts: tuple
    generators: tuple  # generators[i] = tuple of trees of degree i+1

    def alphabet(self, max_degree=None):
        limit = self.maxdeg if max_degree is None else max_degree
        out = []
        for i, gens in enumerate(self.generators, start=1):
            if i > limit:
                break
            out.extend(gens)
        return tuple(out)


def free_generator_counts(maxdeg, d):
    """Generator counts from inverting the forest-dimension series.

    With H(x) = sum_n dim_n x^n (dim_n = number of labeled forests of degree
    n, dim_0 = 1), the counts are the coefficients of L(x) = 1 - 1/H(x).
    """
    if maxdeg < 1:
        raise ValueError(f"maxdeg must be >= 1, got {maxdeg}")
    dims = [count_forests(n, d) for n in range(maxdeg + 1)]
    inverse = [1] + [0] * maxdeg
    for n in range(1, maxdeg + 1):
        inverse[n] = -sum(dims[k] * inverse[n - k] for k in range(1, n + 1))
    return tuple(-inverse[n] for n in range(1, maxdeg + 1))


class _ExactSpan:
    """Incremental exact row reduction over the rationals."""

    def __init__(self, width):
        self.width = width
        self.rows = []
        self.pivots = []

    def _reduce(self, vec):
        vec = list(vec)
        for row, piv in zip(self.rows, self.pivots):
            factor = vec[piv]
            if factor:
                for j in range(piv, self.width):
                    vec[j] -= factor * row[j]
        return vec

    def add(self, vec):
        """Insert a vector; returns True when it enlarges the span."""
        vec = self._reduce([Fraction(x) for x in vec])
        piv = next((j for j, x in enumerate(vec) if x), None)
        if piv is None:
            return False
        lead = vec[piv]
        vec = [x / lead for x in vec]
        self.rows.append(vec)
        self.pivots.append(piv)
        return True

    @property
    def rank(self):
        return len(self.rows)


class EnumerationGuard(RuntimeError):
    def __init__(self, maxdeg, d, cap):
        super().__init__(
            f"degree-{maxdeg} component at d={d} has dimension "
            f"{count_forests(maxdeg, d)} > cap {cap}; exact rank computation refused"
        )


def extract_free_generators(maxdeg, d, cap=DEFAULT_RANK_CAP):
    """Degreewise greedy generator extraction, cross-checked against the
    series-inversion counts.

    In degree n the span of all products of lower-degree generators with the
    full lower components is completed to a basis by adding trees in
    canonical order; the added trees are the degree-n generators.
    """
    if count_forests(maxdeg, d) > cap:
        raise EnumerationGuard(maxdeg, d, cap)
    predicted = free_generator_counts(maxdeg, d)
    generators = []
    for n in range(1, maxdeg + 1):
        basis = enumerate_forests(n, d)
        index = {forest: j for j, forest in enumerate(basis)}
        span = _ExactSpan(len(basis))

        def vectorize(comb):
            vec = [0] * len(basis)
            for forest, coeff in comb.items():
                vec[index[forest]] = coeff
            return vec

        for i in range(1, n):
            for gen in generators[i - 1]:
                for rho in enumerate_forests(n - i, d):
                    span.add(vectorize(gl_product(gen, rho)))

        fresh = []
        for tree in enumerate_trees(n, d):
            if span.add(vectorize(LinComb.basis(Forest.single(tree)))):
                fresh.append(tree)
        if span.rank != len(basis):
            raise StructuralError(
                f"degree-{n} component not spanned by generator words plus trees"
            )
        if len(fresh) != predicted[n - 1]:
            raise StructuralError(
                f"degree {n}: extracted {len(fresh)} generators, "
                f"series inversion predicts {predicted[n - 1]}"
            )
        generators.append(tuple(fresh))
    return GeneratorTable(d=d, maxdeg=maxdeg, counts=predicted, generators=tuple(generators))


# ---------------------------------------------------------------------------
# word counting over the generator alphabet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WordCountReport:
    counts: tuple      # unlabeled generator counts l_1..l_[p]
    d: int
    sequence: tuple    # T_0..T_n
    kp: int
    bound_ok: bool


def kp_constant(counts):
    """Smallest integer K >= 1 with sum_i l_i K^{-i} <= 1."""
    k = 1
    while sum(Fraction(l, k**i) for i, l in enumerate(counts, start=1)) > 1:
        k += 1
    return k


def word_count_sequence(counts, d, n):
    """T_m = sum_i l_i d^i T_{m-i} with T_0 = 1 (words of degree m)."""
    seq = [1] + [0] * n
    for m in range(1, n + 1):
        seq[m] = sum(
            l * d**i * seq[m - i]
            for i, l in enumerate(counts, start=1)
            if m - i >= 0
        )
    return tuple(seq)


def word_counts(gens, d, n):
    """Word counts with the geometric bound T_m <= (K d)^m checked.

    `gens` is either a GeneratorTable (its per-degree counts are used) or a
    plain sequence of unlabeled counts l_1..l_[p].
    """
    counts = tuple(gens.counts) if isinstance(gens, GeneratorTable) else tuple(gens)
    seq = word_count_sequence(counts, d, n)
    kp = kp_constant(counts)
    ok = all(seq[m] <= (kp * d) ** m for m in range(n + 1))
    return WordCountReport(counts=counts, d=d, sequence=seq, kp=kp, bound_ok=ok)


# ---------------------------------------------------------------------------
# JSON forms
# ---------------------------------------------------------------------------

def _coeff_to_json(coeff):
    if isinstance(coeff, float):
        return coeff
    frac = Fraction(coeff)
    return f"{frac.numerator}/{frac.denominator}"


def _coeff_from_json(obj):
    if isinstance(obj, (int, float)):
        return obj
    return Fraction(obj)


def lincomb_to_json(comb):
    entries = sorted(comb.items(), key=lambda kv: kv[0].sort_key)
    return [
        {"forest": render_forest(forest), "coeff": _coeff_to_json(coeff)}
        for forest, coeff in entries
    ]


def lincomb_from_json(data, d):
    terms = {}
    for entry in data:
        forest = parse_forest(entry["forest"], d)
        terms[forest] = terms.get(forest, 0) + _coeff_from_json(entry["coeff"])
    return LinComb(terms)


def tensor_to_json(tensor):
    entries = sorted(tensor.items(), key=lambda kv: (kv[0][0].sort_key, kv[0][1].sort_key))
    return [
        {
            "left": render_forest(left),
            "right": render_forest(right),
            "coeff": _coeff_to_json(coeff),
        }
        for (left, right), coeff in entries
    ]


def tensor_from_json(data, d):
    terms = {}
    for entry in data:
        key = (parse_forest(entry["left"], d), parse_forest(entry["right"], d))
        terms[key] = terms.get(key, 0) + _coeff_from_json(entry["coeff"])
    return TensorLinComb(terms)
