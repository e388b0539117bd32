"""Exact scalar and matrix arithmetic.

Three layers, all immutable and hashable:

* ``CRat`` -- Gaussian rationals a + b*i with ``fractions.Fraction`` parts.
* ``Scalar`` -- polynomials in the formal symbol (2*pi) with ``CRat``
  coefficients.  The symbol is never expanded numerically inside the
  symbolic engine; ``to_complex`` substitutes the float value at the
  oracle boundary only.
* ``SystemMatrix`` -- square matrices with ``Scalar`` entries, stored
  sparsely (the operators that arise here are products of single-entry
  flip matrices, so almost everything has one nonzero entry).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

TWO_PI_FLOAT = 2.0 * math.pi

_ZERO_F = Fraction(0)
_ONE_F = Fraction(1)


def as_fraction(value) -> Fraction:
    """Parse an exact rational from int, Fraction or a 'p/q' string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class CRat:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", as_fraction(re))
        object.__setattr__(self, "im", as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("CRat is immutable")

    @classmethod
    def parse(cls, value) -> "CRat":
        """Accept CRat, int, Fraction, 'p/q' strings, or a [re, im] pair."""
        if isinstance(value, CRat):
            return value
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError(f"complex rational pair must have 2 entries: {value!r}")
            return cls(as_fraction(value[0]), as_fraction(value[1]))
        return cls(as_fraction(value))

    def __add__(self, other):
        other = CRat.parse(other)
        return CRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = CRat.parse(other)
        return CRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return CRat.parse(other) - self

    def __mul__(self, other):
        other = CRat.parse(other)
        return CRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = CRat.parse(other)
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero CRat")
        return CRat(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __neg__(self):
        return CRat(-self.re, -self.im)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are exact")
        out = CRat(1)
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "CRat":
        return CRat(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if not isinstance(other, CRat):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


CRAT_ZERO = CRat(0)
CRAT_ONE = CRat(1)
CRAT_I = CRat(0, 1)
MINUS_I = CRat(0, -1)


class Scalar:
    """An exact polynomial in the symbol (2*pi) with CRat coefficients.

    Stored as a sorted tuple of (power, coefficient) with zero
    coefficients dropped, so equality and hashing are structural.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, coeffs=None):
        items = []
        if coeffs:
            merged = {}
            for power, coeff in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
                if power < 0:
                    raise ValueError("negative powers of 2*pi are not representable")
                coeff = CRat.parse(coeff)
                if power in merged:
                    merged[power] = merged[power] + coeff
                else:
                    merged[power] = coeff
            items = [(p, c) for p, c in sorted(merged.items()) if not c.is_zero()]
        object.__setattr__(self, "_items", tuple(items))
        object.__setattr__(self, "_hash", hash(self._items))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def of(cls, coeff, power: int = 0) -> "Scalar":
        return cls([(power, CRat.parse(coeff))])

    @classmethod
    def two_pi(cls, power: int = 1) -> "Scalar":
        return cls([(power, CRAT_ONE)])

    @property
    def items(self):
        return self._items

    def is_zero(self) -> bool:
        return not self._items

    def __add__(self, other):
        if not isinstance(other, Scalar):
            return NotImplemented
        return Scalar(list(self._items) + list(other._items))

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return Scalar([(p, -c) for p, c in self._items])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CRat)):
            other = Scalar.of(CRat.parse(other))
        if not isinstance(other, Scalar):
            return NotImplemented
        if not self._items or not other._items:
            return SCALAR_ZERO
        out = []
        for p1, c1 in self._items:
            for p2, c2 in other._items:
                out.append((p1 + p2, c1 * c2))
        return Scalar(out)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        return Scalar([(p, c.conjugate()) for p, c in self._items])

    def constant_term(self) -> CRat:
        for p, c in self._items:
            if p == 0:
                return c
        return CRAT_ZERO

    def to_complex(self) -> complex:
        """Substitute the double-precision value of 2*pi."""
        return sum(
            (c.to_complex() * TWO_PI_FLOAT**p for p, c in self._items),
            start=0j,
        )

    def __eq__(self, other):
        if isinstance(other, int):
            other = Scalar.of(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self._items:
            return "0"
        parts = []
        for p, c in self._items:
            if p == 0:
                parts.append(repr(c))
            else:
                suffix = "(2pi)" if p == 1 else f"(2pi)^{p}"
                parts.append(suffix if c == CRAT_ONE else f"{c!r}*{suffix}")
        return " + ".join(parts)


SCALAR_ZERO = Scalar()
SCALAR_ONE = Scalar.of(1)
SCALAR_TWO_PI = Scalar.two_pi()


class SystemMatrix:
    """Immutable square matrix over Scalar, stored as a sparse entry map.

    Basis indices refer to the system eigenbasis ordered by increasing
    energy.  Operators built from sigma-flips stay single-entry under
    products, which the sparse representation exploits.
    """

    __slots__ = ("dim", "_entries", "_key", "_hash")

    def __init__(self, dim: int, entries=None):
        if dim <= 0:
            raise ValueError("matrix dimension must be positive")
        clean = {}
        if entries:
            for (r, c), s in (entries.items() if isinstance(entries, dict) else entries):
                if not (0 <= r < dim and 0 <= c < dim):
                    raise ValueError(f"entry ({r},{c}) outside {dim}x{dim} matrix")
                if not isinstance(s, Scalar):
                    s = Scalar.of(CRat.parse(s))
                if (r, c) in clean:
                    s = clean[(r, c)] + s
                if s.is_zero():
                    clean.pop((r, c), None)
                else:
                    clean[(r, c)] = s
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "_entries", clean)
        key = tuple(sorted(clean.items()))
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash((dim, key)))

    def __setattr__(self, name, value):
        raise AttributeError("SystemMatrix is immutable")

    @classmethod
    def zero(cls, dim: int) -> "SystemMatrix":
        return cls(dim)

    @classmethod
    def identity(cls, dim: int) -> "SystemMatrix":
        return cls(dim, {(i, i): SCALAR_ONE for i in range(dim)})

    @classmethod
    def single(cls, dim: int, row: int, col: int, scalar: Scalar = SCALAR_ONE) -> "SystemMatrix":
        return cls(dim, {(row, col): scalar})

    @classmethod
    def from_rows(cls, rows) -> "SystemMatrix":
        dim = len(rows)
        entries = {}
        for r, row in enumerate(rows):
            if len(row) != dim:
                raise ValueError("matrix rows must be square")
            for c, val in enumerate(row):
                entries[(r, c)] = val if isinstance(val, Scalar) else Scalar.of(CRat.parse(val))
        return cls(dim, entries)

    def entry(self, r: int, c: int) -> Scalar:
        return self._entries.get((r, c), SCALAR_ZERO)

    @property
    def entries(self):
        return self._key

    def is_zero(self) -> bool:
        return not self._entries

    def __add__(self, other):
        if not isinstance(other, SystemMatrix):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in matrix addition")
        merged = dict(self._entries)
        for rc, s in other._entries.items():
            acc = merged.get(rc, SCALAR_ZERO) + s
            if acc.is_zero():
                merged.pop(rc, None)
            else:
                merged[rc] = acc
        return SystemMatrix(self.dim, merged)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return SystemMatrix(self.dim, {rc: -s for rc, s in self._entries.items()})

    def scale(self, scalar) -> "SystemMatrix":
        if isinstance(scalar, (int, Fraction, CRat)):
            scalar = Scalar.of(CRat.parse(scalar))
        if scalar.is_zero():
            return SystemMatrix(self.dim)
        return SystemMatrix(self.dim, {rc: scalar * s for rc, s in self._entries.items()})

    def __matmul__(self, other):
        if not isinstance(other, SystemMatrix):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError("dimension mismatch in matrix product")
        by_row = {}
        for (r, c), s in other._entries.items():
            by_row.setdefault(r, []).append((c, s))
        out = {}
        for (r, k), s1 in self._entries.items():
            for c, s2 in by_row.get(k, ()):
                prod = s1 * s2
                if prod.is_zero():
                    continue
                acc = out.get((r, c), SCALAR_ZERO) + prod
                if acc.is_zero():
                    out.pop((r, c), None)
                else:
                    out[(r, c)] = acc
        return SystemMatrix(self.dim, out)

    def adjoint(self) -> "SystemMatrix":
        return SystemMatrix(
            self.dim, {(c, r): s.conjugate() for (r, c), s in self._entries.items()}
        )

    def trace(self) -> Scalar:
        acc = SCALAR_ZERO
        for (r, c), s in self._entries.items():
            if r == c:
                acc = acc + s
        return acc

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for (r, c), s in self._entries.items():
            out[r, c] = s.to_complex()
        return out

    def __eq__(self, other):
        if not isinstance(other, SystemMatrix):
            return NotImplemented
        return self.dim == other.dim and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self._entries:
            return f"SystemMatrix.zero({self.dim})"
        body = ", ".join(f"({r},{c}):{s!r}" for (r, c), s in self._key)
        return f"SystemMatrix({self.dim}, {{{body}}})"
