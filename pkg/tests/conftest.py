"""Shared oracles and random generators for the test suite.

The oracles here are deliberately independent of the implementation paths
they check: the symmetry factor is recounted by raw vertex permutations, and
random inputs are seeded rational objects so failures replay exactly.
"""

from fractions import Fraction
from itertools import permutations, product

from brpath.chargroup import TruncatedFunctional
from brpath.poly import Poly, PolyMap
from brpath.elemdiff import PolyVectorField
from brpath.signature import PiecewiseLinearPath
from brpath.trees import enumerate_trees, forests_up_to


def sigma_by_permutations(forest):
    """Count label-preserving vertex bijections fixing the forest.

    Vertices are grouped by (label, depth) first; any automorphism preserves
    both, so the grouped search is exhaustive.
    """
    parents, labels, depths = [], [], []

    def visit(tree, parent, depth):
        idx = len(parents)
        parents.append(parent)
        labels.append(tree.label)
        depths.append(depth)
        for child in tree.children:
            visit(child, idx, depth + 1)

    for tree in forest.trees:
        visit(tree, -1, 0)

    n = len(parents)
    groups = {}
    for v in range(n):
        groups.setdefault((labels[v], depths[v]), []).append(v)
    keys = list(groups)

    count = 0
    for choice in product(*(permutations(groups[k]) for k in keys)):
        mapping = {-1: -1}
        for key, perm in zip(keys, choice):
            for src, dst in zip(groups[key], perm):
                mapping[src] = dst
        if all(mapping[parents[v]] == parents[mapping[v]] for v in range(n)):
            count += 1
    return count


def random_rational(rng, span=8, denominators=6):
    return Fraction(rng.randint(-span, span), rng.randint(1, denominators))


def random_path(rng, d, segments=3):
    times = [Fraction(k, segments) for k in range(segments + 1)]
    points = [
        tuple(random_rational(rng) for _ in range(d)) for _ in range(segments + 1)
    ]
    return PiecewiseLinearPath(times, points)


def random_character(rng, N, d):
    """A character built by assigning tree values and densifying forests."""
    tree_values = {}
    for degree in range(1, N + 1):
        for tree in enumerate_trees(degree, d):
            tree_values[tree] = random_rational(rng)
    coeffs = {}
    for forest in forests_up_to(N, d):
        if forest.degree == 0:
            continue
        value = Fraction(1)
        for tree in forest.trees:
            value *= tree_values[tree]
        coeffs[forest] = value
    return TruncatedFunctional(N, d, coeffs)


def random_polynomial(rng, nvars, max_total_degree=2, span=3):
    exponents = [
        expo
        for expo in product(range(max_total_degree + 1), repeat=nvars)
        if sum(expo) <= max_total_degree
    ]
    terms = {expo: Fraction(rng.randint(-span, span)) for expo in exponents}
    return Poly(nvars, terms)


def random_quadratic_field(rng, e, d):
    components = []
    for _ in range(d):
        components.append(
            PolyMap(tuple(random_polynomial(rng, e) for _ in range(e)))
        )
    return PolyVectorField(e, d, components)
