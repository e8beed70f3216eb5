"""Exact multivariate polynomials over the rationals.

Terms are stored as a map from exponent tuples to Fraction coefficients.
Only the operations the differential calculus needs are provided: ring
arithmetic, partial derivatives, and evaluation (at exact or floating
points).
"""

from __future__ import annotations

from fractions import Fraction


class Poly:
    """A polynomial in `nvars` variables with Fraction coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars, terms=None):
        clean = {}
        if terms:
            for expo, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff == 0:
                    continue
                expo = tuple(expo)
                if len(expo) != nvars:
                    raise ValueError(f"exponent {expo} does not have {nvars} entries")
                clean[expo] = clean.get(expo, 0) + coeff
        self.nvars = nvars
        self.terms = {e: c for e, c in clean.items() if c != 0}
        self._hash = None

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, value, nvars):
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, index, nvars):
        expo = [0] * nvars
        expo[index] = 1
        return cls(nvars, {tuple(expo): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for expo, coeff in other.terms.items():
            val = out.get(expo, 0) + coeff
            if val == 0:
                out.pop(expo, None)
            else:
                out[expo] = val
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Poly.zero(self.nvars)
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                out[expo] = out.get(expo, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.constant(1, self.nvars)
        for _ in range(n):
            result = result * self
        return result

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        return Poly.constant(other, self.nvars)

    def partial(self, index):
        """Partial derivative with respect to variable `index`."""
        out = {}
        for expo, coeff in self.terms.items():
            k = expo[index]
            if k == 0:
                continue
            new = list(expo)
            new[index] = k - 1
            out[tuple(new)] = coeff * k
        return Poly(self.nvars, out)

    def eval(self, point):
        """Evaluate at a point; result type follows the point entries."""
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} entries, expected {self.nvars}")
        total = 0
        for expo, coeff in self.terms.items():
            term = coeff
            for x, k in zip(point, expo):
                for _ in range(k):
                    term = term * x
            total = total + term
        return total

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for expo, coeff in sorted(self.terms.items()):
            vars_part = "*".join(
                f"y{i}" if k == 1 else f"y{i}^{k}"
                for i, k in enumerate(expo)
                if k
            )
            bits.append(f"{coeff}" + (f"*{vars_part}" if vars_part else ""))
        return " + ".join(bits)


class PolyMap:
    """A polynomial map R^e -> R^e: one Poly per output component."""

    __slots__ = ("components",)

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("a polynomial map needs at least one component")
        nvars = components[0].nvars
        if any(p.nvars != nvars for p in components):
            raise ValueError("all components must share the variable count")
        self.components = components

    @classmethod
    def identity(cls, e):
        return cls(tuple(Poly.variable(i, e) for i in range(e)))

    @classmethod
    def zero(cls, e):
        return cls(tuple(Poly.zero(e) for _ in range(e)))

    @property
    def dim(self):
        return len(self.components)

    @property
    def nvars(self):
        return self.components[0].nvars

    def eval(self, point):
        return tuple(p.eval(point) for p in self.components)

    def __add__(self, other):
        return PolyMap(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return PolyMap(tuple(a - b for a, b in zip(self.components, other.components)))

    def scale(self, factor):
        return PolyMap(tuple(p * factor for p in self.components))

    def is_zero(self):
        return all(p.is_zero() for p in self.components)

    def __eq__(self, other):
        return isinstance(other, PolyMap) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "PolyMap(" + "; ".join(repr(p) for p in self.components) + ")"
