"""Canonical labeled non-planar rooted trees and forests.

A tree is stored with its children sorted under the total order

    (degree, root label, lexicographic comparison of the sorted child lists)

so structural equality coincides with equality of canonical renderings.  A
forest is a multiset of trees kept as a sorted tuple; the empty forest is the
algebra unit and renders as the sentinel "()".

The text grammar is

    forest := "()" | tree (WS tree)*
    tree   := label [ "(" tree ("," tree)* ")" ]
    label  := decimal integer in 1..d
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

from .linear import LinComb

DEFAULT_ENUMERATION_CAP = 10**6


class ForestSyntaxError(ValueError):
    """Malformed forest expression; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class LabelRangeError(ValueError):
    pass


class EnumerationCapError(RuntimeError):
    """Raised when an enumeration would exceed the configured tree budget."""


class GraftDomainError(ValueError):
    """Grafting a nonempty forest onto the empty forest is undefined."""


class LabeledTree:
    """A rooted tree with labels in 1..d and canonically ordered children."""

    __slots__ = ("label", "children", "degree", "sort_key", "_hash")

    def __init__(self, label, children=()):
        if not isinstance(label, int) or label < 1:
            raise LabelRangeError(f"tree label must be a positive integer, got {label!r}")
        kids = tuple(sorted(children, key=lambda t: t.sort_key))
        self.label = label
        self.children = kids
        self.degree = 1 + sum(c.degree for c in kids)
        self.sort_key = (self.degree, label, tuple(c.sort_key for c in kids))
        self._hash = hash(self.sort_key)

    def __eq__(self, other):
        return isinstance(other, LabeledTree) and self.sort_key == other.sort_key

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"LabeledTree({render_tree(self)!r})"

    def max_label(self):
        return max(self.label, max((c.max_label() for c in self.children), default=0))


class Forest:
    """A multiset of labeled trees, stored as a sorted tuple."""

    __slots__ = ("trees", "degree", "sort_key", "_hash")

    def __init__(self, trees=()):
        members = tuple(sorted(trees, key=lambda t: t.sort_key))
        self.trees = members
        self.degree = sum(t.degree for t in members)
        self.sort_key = (self.degree, tuple(t.sort_key for t in members))
        self._hash = hash(self.sort_key)

    @classmethod
    def single(cls, tree):
        return cls((tree,))

    def is_empty(self):
        return not self.trees

    def __mul__(self, other):
        """Commutative monomial product: multiset union."""
        if self.is_empty():
            return other
        if other.is_empty():
            return self
        return Forest(self.trees + other.trees)

    def with_multiplicities(self):
        """Distinct member trees with their multiplicities, canonical order."""
        return [(tree, len(tuple(grp))) for tree, grp in itertools.groupby(self.trees)]

    def max_label(self):
        return max((t.max_label() for t in self.trees), default=0)

    def __eq__(self, other):
        return isinstance(other, Forest) and self.sort_key == other.sort_key

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __repr__(self):
        return f"Forest({render_forest(self)!r})"


EMPTY_FOREST = Forest()


# ---------------------------------------------------------------------------
# parsing / rendering
# ---------------------------------------------------------------------------

def parse_forest(text, d):
    """Parse a forest expression, canonicalizing child and member order."""
    if d < 1:
        raise ValueError(f"label-set size d must be >= 1, got {d}")
    stripped = text.strip()
    if stripped == "()":
        return EMPTY_FOREST

    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_label():
        nonlocal pos
        start = pos
        while pos < n and text[pos].isdigit():
            pos += 1
        if pos == start:
            raise ForestSyntaxError(f"expected a label, found {text[pos:pos+1]!r}", start)
        value = int(text[start:pos])
        if not 1 <= value <= d:
            raise LabelRangeError(f"label {value} out of range 1..{d} (at position {start})")
        return value

    def parse_tree():
        nonlocal pos
        label = parse_label()
        children = []
        if pos < n and text[pos] == "(":
            pos += 1
            skip_ws()
            children.append(parse_tree())
            skip_ws()
            while pos < n and text[pos] == ",":
                pos += 1
                skip_ws()
                children.append(parse_tree())
                skip_ws()
            if pos >= n or text[pos] != ")":
                raise ForestSyntaxError("expected ')' or ','", pos)
            pos += 1
        return LabeledTree(label, children)

    trees = []
    skip_ws()
    while pos < n:
        trees.append(parse_tree())
        before = pos
        skip_ws()
        if pos < n and pos == before:
            raise ForestSyntaxError(f"unexpected character {text[pos]!r}", pos)
    if not trees:
        raise ForestSyntaxError("empty input (use \"()\" for the empty forest)", 0)
    return Forest(trees)


def render_tree(tree):
    if not tree.children:
        return str(tree.label)
    inner = ",".join(render_tree(c) for c in tree.children)
    return f"{tree.label}({inner})"


def render_forest(forest):
    if forest.is_empty():
        return "()"
    return " ".join(render_tree(t) for t in forest.trees)


# ---------------------------------------------------------------------------
# symmetry factors
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _tree_symmetry(tree):
    return _multiset_symmetry(tree.children)


def _multiset_symmetry(trees):
    # n1!...nk! * sigma(t1)^n1 * ... * sigma(tk)^nk over distinct members;
    # members arrive sorted, so equal trees are adjacent.
    total = 1
    for tree, grp in itertools.groupby(trees):
        n = len(tuple(grp))
        total *= math.factorial(n) * _tree_symmetry(tree) ** n
    return total


def symmetry_factor(obj):
    """Order of the label-preserving vertex-permutation group fixing obj."""
    if isinstance(obj, LabeledTree):
        return _tree_symmetry(obj)
    return _multiset_symmetry(obj.trees)


# ---------------------------------------------------------------------------
# counting (independent of the enumeration: Euler-transform recurrences)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def count_trees(n, d=1):
    """Number of labeled rooted trees of degree n (A000081 when d = 1)."""
    if n < 1:
        return 0
    return d * count_forests(n - 1, d)


@lru_cache(maxsize=None)
def count_forests(n, d=1):
    """Number of labeled forests of degree n; degree 0 counts the unit."""
    if n == 0:
        return 1
    total = sum(_euler_weight(i, d) * count_forests(n - i, d) for i in range(1, n + 1))
    if total % n:
        raise AssertionError(f"Euler recurrence non-integral at n={n}, d={d}")
    return total // n


@lru_cache(maxsize=None)
def _euler_weight(i, d):
    return sum(k * count_trees(k, d) for k in range(1, i + 1) if i % k == 0)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def enumerate_trees(n, d, cap=DEFAULT_ENUMERATION_CAP):
    """All canonical labeled trees of degree exactly n, sorted, no duplicates."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    expected = count_trees(n, d)
    if expected > cap:
        raise EnumerationCapError(f"{expected} trees of degree {n} exceed the cap {cap}")
    return _trees_exact(n, d)


def enumerate_forests(n, d, cap=DEFAULT_ENUMERATION_CAP):
    """All canonical labeled forests of degree exactly n (n = 0 gives the unit)."""
    if n < 0 or d < 1:
        raise ValueError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    expected = count_forests(n, d)
    if expected > cap:
        raise EnumerationCapError(f"{expected} forests of degree {n} exceed the cap {cap}")
    return _forests_exact(n, d)


def forests_up_to(n, d, cap=DEFAULT_ENUMERATION_CAP):
    """All forests of degree 0..n, ascending degree."""
    out = []
    for k in range(n + 1):
        out.extend(enumerate_forests(k, d, cap))
    return tuple(out)


@lru_cache(maxsize=None)
def _trees_exact(n, d):
    if n == 1:
        return tuple(LabeledTree(a) for a in range(1, d + 1))
    out = []
    for forest in _forests_exact(n - 1, d):
        for a in range(1, d + 1):
            out.append(LabeledTree(a, forest.trees))
    return tuple(sorted(out, key=lambda t: t.sort_key))


@lru_cache(maxsize=None)
def _forests_exact(n, d):
    if n == 0:
        return (EMPTY_FOREST,)
    # pool is degree-ascending because sort keys start with the degree
    pool = [t for k in range(1, n + 1) for t in _trees_exact(k, d)]
    results = []

    def extend(start, remaining, acc):
        if remaining == 0:
            results.append(Forest(tuple(acc)))
            return
        for j in range(start, len(pool)):
            tree = pool[j]
            if tree.degree > remaining:
                break
            acc.append(tree)
            extend(j, remaining - tree.degree, acc)
            acc.pop()

    extend(0, n, [])
    return tuple(sorted(results, key=lambda f: f.sort_key))


# ---------------------------------------------------------------------------
# grafting
# ---------------------------------------------------------------------------

def attach_at_vertices(forest, extra):
    """Rebuild `forest` with extra[i] added as children of preorder vertex i.

    Vertices are indexed 0..degree-1, member trees in canonical order, each
    traversed root-first.  Indices refer to the original forest, so several
    attachments can be applied in one pass.
    """
    counter = itertools.count()

    def rebuild(tree):
        idx = next(counter)
        children = [rebuild(c) for c in tree.children]
        children.extend(extra.get(idx, ()))
        return LabeledTree(tree.label, children)

    return Forest(tuple(rebuild(t) for t in forest.trees))


def graft(left, target):
    """Sum of |target|^k forests linking each root of `left` into `target`.

    Grafting onto the empty forest is only defined for empty `left` (the
    identity case).
    """
    k = len(left.trees)
    if k == 0:
        return LinComb.basis(target)
    m = target.degree
    if m == 0:
        raise GraftDomainError("cannot graft a nonempty forest onto the empty forest")
    out = {}
    for assignment in itertools.product(range(m), repeat=k):
        extra = {}
        for tree, vertex in zip(left.trees, assignment):
            extra.setdefault(vertex, []).append(tree)
        result = attach_at_vertices(target, extra)
        out[result] = out.get(result, 0) + 1
    return LinComb(out)


# ---------------------------------------------------------------------------
# indexed view (used by the cut enumeration and the brute-force sigma oracle)
# ---------------------------------------------------------------------------

def tree_node_arrays(tree):
    """Preorder arrays (labels, children-index lists) for one tree."""
    labels, kids = [], []

    def visit(t):
        idx = len(labels)
        labels.append(t.label)
        kids.append([])
        for child in t.children:
            kids[idx].append(visit(child))
        return idx

    visit(tree)
    return labels, kids
