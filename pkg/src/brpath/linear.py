"""Sparse linear combinations over the forest basis and its tensor square.

Coefficients are exact (int / Fraction) in exact mode or float in numeric
mode; zero coefficients are never stored.  The algebraic products (grafting,
Grossman-Larson, coproduct tensor calculus) live in `trees` and `hopf`; these
classes only do basis-wise bookkeeping.
"""

from __future__ import annotations


class LinComb:
    """A finitely supported map Forest -> coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if coeff != 0:
                    clean[key] = coeff
        self.terms = clean

    @classmethod
    def basis(cls, forest, coeff=1):
        return cls({forest: coeff})

    @classmethod
    def zero(cls):
        return cls()

    def coefficient(self, forest):
        return self.terms.get(forest, 0)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            val = out.get(key, 0) + coeff
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
        return LinComb(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor):
        if factor == 0:
            return LinComb()
        return LinComb({key: coeff * factor for key, coeff in self.terms.items()})

    def mass(self):
        """Sum of all coefficients."""
        return sum(self.terms.values())

    def __eq__(self, other):
        return isinstance(other, LinComb) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "LinComb(0)"
        bits = sorted((str(key), coeff) for key, coeff in self.terms.items())
        return "LinComb(" + " + ".join(f"{c}*[{k}]" for k, c in bits) + ")"


class TensorLinComb:
    """A finitely supported map (Forest, Forest) -> coefficient."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if coeff != 0:
                    clean[key] = coeff
        self.terms = clean

    @classmethod
    def basis(cls, left, right, coeff=1):
        return cls({(left, right): coeff})

    def coefficient(self, left, right):
        return self.terms.get((left, right), 0)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            val = out.get(key, 0) + coeff
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
        return TensorLinComb(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor):
        if factor == 0:
            return TensorLinComb()
        return TensorLinComb({key: coeff * factor for key, coeff in self.terms.items()})

    def swap(self):
        """Transpose the tensor slots (used as a negative control in tests)."""
        return TensorLinComb({(r, l): c for (l, r), c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, TensorLinComb) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "TensorLinComb(0)"
        bits = sorted((str(l), str(r), c) for (l, r), c in self.terms.items())
        return "TensorLinComb(" + " + ".join(f"{c}*[{l}]x[{r}]" for l, r, c in bits) + ")"
