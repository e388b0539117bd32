"""Exact symbolic algebra of system-matrix and noise-operator products.

A term is a fused system matrix (tensor leg one) times an ordered word of
noise creators/annihilators (tensor leg two); the two legs commute, so
every product canonicalizes to that shape.  Normal ordering rewrites with
the scaled bosonic commutator

    b_L b*_M  =  b*_M b_L  +  2pi * [L == M] * [w(k) == w]

over finite declared label sets (all Dirac deltas are Kronecker
indicators of weight one).  Same-kind noise factors commute exactly, so
maximal same-kind runs are kept label-sorted; this makes like-term
merging canonical.

No floating point enters this module; scalars live in Q(i)[2pi].
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, NamedTuple

from .errors import DimensionMismatch, UnknownLabel
from .exact import SCALAR_ONE, SCALAR_TWO_PI, SCALAR_ZERO, Scalar, SystemMatrix, as_fraction
from .system import GenericSystem, sigma_minus, sigma_plus

CREATOR = 1
ANNIHILATOR = -1


class NoiseLabel(NamedTuple):
    omega: Fraction
    t: str
    k: str

    def __repr__(self):
        return f"({self.omega},{self.t},{self.k})"


class NoiseFactor(NamedTuple):
    kind: int  # CREATOR or ANNIHILATOR
    label: NoiseLabel

    def flipped(self) -> "NoiseFactor":
        return NoiseFactor(-self.kind, self.label)

    def __repr__(self):
        star = "*" if self.kind == CREATOR else ""
        return f"b{star}{self.label!r}"


class LabelSpace:
    """Declared time and momentum atoms plus the dispersion table.

    The dispersion maps every declared momentum atom to an exact rational
    frequency; a noise label is on-shell when its momentum dispersses to
    its own Bohr frequency, which is when the CCR contraction fires.
    """

    def __init__(self, times, momenta, dispersion):
        self.times = tuple(str(t) for t in times)
        self.momenta = tuple(str(k) for k in momenta)
        if len(set(self.times)) != len(self.times):
            raise ValueError("duplicate time atoms")
        if len(set(self.momenta)) != len(self.momenta):
            raise ValueError("duplicate momentum atoms")
        items = dispersion.items() if isinstance(dispersion, dict) else dispersion
        self.dispersion = {str(k): as_fraction(v) for k, v in items}
        missing = [k for k in self.momenta if k not in self.dispersion]
        if missing:
            raise ValueError(f"dispersion missing momenta: {missing}")
        extra = [k for k in self.dispersion if k not in self.momenta]
        if extra:
            raise ValueError(f"dispersion lists undeclared momenta: {extra}")

    def require(self, t: str, k: str) -> None:
        if t not in self.times:
            raise UnknownLabel(f"undeclared time atom {t!r}", t=t)
        if k not in self.momenta:
            raise UnknownLabel(f"undeclared momentum atom {k!r}", k=k)

    def label(self, omega, t: str, k: str) -> NoiseLabel:
        self.require(t, k)
        return NoiseLabel(as_fraction(omega), str(t), str(k))

    def on_shell(self, label: NoiseLabel) -> bool:
        return self.dispersion[label.k] == label.omega

    def delta(self, ann: NoiseLabel, cre: NoiseLabel) -> Scalar:
        """CCR contraction of b_ann with b*_cre; also the gamma of the
        module relation:  2pi * [labels equal] * [on shell]."""
        if ann == cre and self.on_shell(ann):
            return SCALAR_TWO_PI
        return SCALAR_ZERO

    def all_labels(self, omegas) -> list[NoiseLabel]:
        return [
            NoiseLabel(as_fraction(w), t, k)
            for w in omegas
            for t in self.times
            for k in self.momenta
        ]


def _runsort(word: tuple[NoiseFactor, ...]) -> tuple[NoiseFactor, ...]:
    # sort maximal same-kind runs; exact, since same-kind noise ops commute
    if len(word) < 2:
        return word
    out = []
    i = 0
    n = len(word)
    while i < n:
        j = i + 1
        while j < n and word[j].kind == word[i].kind:
            j += 1
        if j - i > 1:
            out.extend(sorted(word[i:j], key=lambda f: f.label))
        else:
            out.append(word[i])
        i = j
    return tuple(out)


class Polynomial:
    """Exact linear combination of canonical terms.

    ``terms`` maps (matrix, noise word) to a Scalar coefficient; the
    matrix slot is None for the identity, the noise word is run-sorted.
    The empty dict is the zero polynomial.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms=None):
        self.dim = dim
        self.terms = dict(terms) if terms else {}

    @classmethod
    def build(cls, dim: int, contributions) -> "Polynomial":
        """Canonicalize and merge (matrix, word, scalar) contributions."""
        identity = SystemMatrix.identity(dim)
        terms: dict = {}
        for mat, word, scalar in contributions:
            if scalar.is_zero():
                continue
            if mat is not None:
                if mat.is_zero():
                    continue
                if mat == identity:
                    mat = None
            key = (mat, _runsort(tuple(word)))
            acc = terms.get(key, SCALAR_ZERO) + scalar
            if acc.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = acc
        return cls(dim, terms)

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(dim)

    @classmethod
    def identity(cls, dim: int) -> "Polynomial":
        return cls(dim, {(None, ()): SCALAR_ONE})

    @classmethod
    def of_scalar(cls, dim: int, scalar: Scalar) -> "Polynomial":
        return cls.build(dim, [(None, (), scalar)])

    @classmethod
    def of_matrix(cls, mat: SystemMatrix, scalar: Scalar = SCALAR_ONE) -> "Polynomial":
        return cls.build(mat.dim, [(mat, (), scalar)])

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"polynomial dimensions differ: {self.dim} vs {other.dim}"
            )
        merged = dict(self.terms)
        for key, s in other.terms.items():
            acc = merged.get(key, SCALAR_ZERO) + s
            if acc.is_zero():
                merged.pop(key, None)
            else:
                merged[key] = acc
        return Polynomial(self.dim, merged)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(Scalar.of(-1))

    def __neg__(self) -> "Polynomial":
        return self.scale(Scalar.of(-1))

    def scale(self, scalar) -> "Polynomial":
        if not isinstance(scalar, Scalar):
            scalar = Scalar.of(scalar)
        if scalar.is_zero():
            return Polynomial(self.dim)
        return Polynomial(self.dim, {key: scalar * s for key, s in self.terms.items()})

    def __matmul__(self, other: "Polynomial") -> "Polynomial":
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"polynomial dimensions differ: {self.dim} vs {other.dim}"
            )
        out = []
        for (m1, w1), s1 in self.terms.items():
            for (m2, w2), s2 in other.terms.items():
                # m2 commutes left through the noise word w1 (distinct legs)
                if m1 is None:
                    mat = m2
                elif m2 is None:
                    mat = m1
                else:
                    mat = m1 @ m2
                out.append((mat, w1 + w2, s1 * s2))
        return Polynomial.build(self.dim, out)

    def adjoint(self) -> "Polynomial":
        out = []
        for (mat, word), s in self.terms.items():
            out.append(
                (
                    mat.adjoint() if mat is not None else None,
                    tuple(f.flipped() for f in reversed(word)),
                    s.conjugate(),
                )
            )
        return Polynomial.build(self.dim, out)

    def matrix_of(self, word) -> SystemMatrix:
        """Fused system coefficient of a given noise word (identity filled in)."""
        word = _runsort(tuple(word))
        acc = SystemMatrix.zero(self.dim)
        for (mat, w), s in self.terms.items():
            if w == word:
                acc = acc + (mat if mat is not None else SystemMatrix.identity(self.dim)).scale(s)
        return acc

    def noise_words(self):
        return sorted({w for (_, w) in self.terms})

    def __repr__(self):
        if not self.terms:
            return "Polynomial.zero"
        parts = []
        for (mat, word), s in sorted(
            self.terms.items(), key=lambda kv: (kv[0][1], repr(kv[0][0]))
        ):
            mat_txt = "I" if mat is None else repr(mat)
            parts.append(f"{s!r} * {mat_txt} * {list(word)}")
        return " + ".join(parts)


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    """Bilinear product with canonical fusing and like-term merging."""
    return a @ b


def adjoint(p: Polynomial) -> Polynomial:
    """Algebra anti-homomorphism: reverse factors, conjugate everything."""
    return p.adjoint()


class CCRRules:
    """Normal-ordering rules over one label space, with memoization.

    ``contraction`` computes the scalar produced when an annihilator
    moves past a creator; the default is the on-shell Kronecker rule of
    ``LabelSpace.delta``.  Tests inject corrupted rules here to prove the
    verification suite is sensitive to the 2pi weight and to each delta
    condition.
    """

    def __init__(self, labels: LabelSpace, contraction: Callable | None = None):
        self.labels = labels
        self.contraction = contraction if contraction is not None else labels.delta
        self._cache: dict = {}

    def normal_order_word(self, word: tuple[NoiseFactor, ...]) -> dict:
        """Map a run-sorted word to {normal-ordered word: Scalar}."""
        cached = self._cache.get(word)
        if cached is None:
            cached = self._order(word, None)
            self._cache[word] = cached
        return cached

    def _order(self, word, choose) -> dict:
        boundaries = [
            i
            for i in range(len(word) - 1)
            if word[i].kind == ANNIHILATOR and word[i + 1].kind == CREATOR
        ]
        if not boundaries:
            return {word: SCALAR_ONE}
        i = boundaries[0] if choose is None else choose(boundaries, word)
        swapped = _runsort(word[:i] + (word[i + 1], word[i]) + word[i + 2 :])
        result: dict = {}
        for w, s in self._recurse(swapped, choose).items():
            acc = result.get(w, SCALAR_ZERO) + s
            if acc.is_zero():
                result.pop(w, None)
            else:
                result[w] = acc
        weight = self.contraction(word[i].label, word[i + 1].label)
        if not weight.is_zero():
            contracted = _runsort(word[:i] + word[i + 2 :])
            for w, s in self._recurse(contracted, choose).items():
                acc = result.get(w, SCALAR_ZERO) + weight * s
                if acc.is_zero():
                    result.pop(w, None)
                else:
                    result[w] = acc
        return result

    def _recurse(self, word, choose) -> dict:
        if choose is None:
            return self.normal_order_word(word)
        # strategy runs (confluence tests) bypass the cache
        return self._order(word, choose)


def _as_rules(rules_or_labels) -> CCRRules:
    if isinstance(rules_or_labels, CCRRules):
        return rules_or_labels
    return CCRRules(rules_or_labels)


def wick_normal_order(p: Polynomial, rules_or_labels, choose=None) -> Polynomial:
    """Rewrite until every noise creator stands left of every annihilator.

    Each rewrite strictly decreases the number of kind inversions, so the
    procedure terminates; ``choose`` overrides which inversion is
    rewritten first (used by the confluence property tests).
    """
    rules = _as_rules(rules_or_labels)
    out = []
    for (mat, word), s in p.terms.items():
        ordered = rules._order(word, choose) if choose is not None else rules.normal_order_word(word)
        for w, weight in ordered.items():
            out.append((mat, w, s * weight))
    return Polynomial.build(p.dim, out)


def vacuum_expectation(p: Polynomial, rules_or_labels) -> SystemMatrix:
    """Operator-valued vacuum state: normal order, keep noise-free terms."""
    ordered = wick_normal_order(p, rules_or_labels)
    acc = SystemMatrix.zero(p.dim)
    identity = SystemMatrix.identity(p.dim)
    for (mat, word), s in ordered.terms.items():
        if not word:
            acc = acc + (mat if mat is not None else identity).scale(s)
    return acc


def vacuum_apply(p: Polynomial, rules_or_labels) -> Polynomial:
    """Canonical form of p applied to the vacuum vector.

    Normal orders and drops every term still carrying an annihilator;
    what remains is a combination of (matrix, creator word) vectors.
    """
    ordered = wick_normal_order(p, rules_or_labels)
    kept = {
        key: s
        for key, s in ordered.terms.items()
        if all(f.kind == CREATOR for f in key[1])
    }
    return Polynomial(p.dim, kept)


def entangled_create(system: GenericSystem, labels: LabelSpace, omega, t, k) -> Polynomial:
    """The collective creator: flip-down matrix times a noise creator."""
    label = labels.label(omega, t, k)
    system.pairs_for(label.omega)  # raises UnknownFrequency when w not in F
    return Polynomial.build(
        system.dimension,
        [(sigma_minus(system, label.omega), (NoiseFactor(CREATOR, label),), SCALAR_ONE)],
    )


def entangled_annihilate(system: GenericSystem, labels: LabelSpace, omega, t, k) -> Polynomial:
    """The collective annihilator: flip-up matrix times a noise annihilator."""
    label = labels.label(omega, t, k)
    system.pairs_for(label.omega)
    return Polynomial.build(
        system.dimension,
        [(sigma_plus(system, label.omega), (NoiseFactor(ANNIHILATOR, label),), SCALAR_ONE)],
    )


# --- free (Quantum Boltzmann) generator lane -------------------------------

class FreeGen(NamedTuple):
    """A generator of a free algebra: a_i a*_j = delta_ij, nothing else.

    ``family`` separates independent generator families; generators of
    different families are distinct, so their delta vanishes.  Distinct
    creators never commute.
    """

    kind: int
    family: str
    label: tuple

    def flipped(self) -> "FreeGen":
        return FreeGen(-self.kind, self.family, self.label)


def free_reduce(
    word, weight: Callable | None = None
) -> tuple[Scalar, tuple[FreeGen, ...]]:
    """Apply a_i a*_j = delta_ij exhaustively; creators are never commuted.

    Returns (scalar, reduced word); the reduced word has every creator
    before every annihilator.  ``weight`` overrides the scalar produced
    by a matched reduction (used for the 2pi-weighted module variants);
    the default is plain delta: 1 on identical generators, else 0.
    """
    stack: list[FreeGen] = []
    scalar = SCALAR_ONE
    for gen in word:
        stack.append(gen)
        while (
            len(stack) >= 2
            and stack[-2].kind == ANNIHILATOR
            and stack[-1].kind == CREATOR
        ):
            cre = stack.pop()
            ann = stack.pop()
            if weight is not None:
                w = weight(ann, cre)
            elif ann.family == cre.family and ann.label == cre.label:
                w = SCALAR_ONE
            else:
                w = SCALAR_ZERO
            scalar = scalar * w
            if scalar.is_zero():
                return SCALAR_ZERO, ()
    return scalar, tuple(stack)


def free_vacuum_value(word, weight: Callable | None = None) -> Scalar:
    """<0| word |0> in the free Fock space: nonzero only on full reduction."""
    scalar, rest = free_reduce(word, weight)
    if rest:
        return SCALAR_ZERO
    return scalar
