"""Entangled number vectors and mechanical checks of the module relations.

The module relation (collective annihilator against collective creator
reducing to a 2pi-weighted rank-one projector) is never assumed here:
every check reduces with the plain white-noise commutator and verifies
that the residual vanishes on entangled vectors.  The checks therefore
fail, with witnesses, when the system is not generic.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    ANNIHILATOR,
    CREATOR,
    CCRRules,
    LabelSpace,
    NoiseFactor,
    NoiseLabel,
    Polynomial,
    entangled_annihilate,
    entangled_create,
    vacuum_apply,
    vacuum_expectation,
)
from .errors import DimensionMismatch, NotGeneric
from .exact import (
    CRAT_ZERO,
    SCALAR_ONE,
    SCALAR_TWO_PI,
    SCALAR_ZERO,
    CRat,
    Scalar,
    SystemMatrix,
)
from .reports import CheckReport
from .system import GenericSystem, sigma_minus, sigma_plus


@dataclass(frozen=True)
class EntangledVector:
    """An ordered word of collective creators applied to the vacuum.

    Order is significant: swapping creators changes the vector.  The
    empty word is the vacuum.
    """

    creators: tuple[NoiseLabel, ...] = ()

    @classmethod
    def vacuum(cls) -> "EntangledVector":
        return cls(())

    def __len__(self):
        return len(self.creators)

    def describe(self) -> list[str]:
        return [f"c*({L.omega},{L.t},{L.k})" for L in self.creators]


def word_polynomial(system: GenericSystem, labels: LabelSpace, vector) -> Polynomial:
    """The product of collective creators as a canonical polynomial."""
    creators = vector.creators if isinstance(vector, EntangledVector) else tuple(vector)
    mat = None
    for L in creators:
        labels.require(L.t, L.k)
        system.pairs_for(L.omega)
        down = sigma_minus(system, L.omega)
        mat = down if mat is None else mat @ down
    word = tuple(NoiseFactor(CREATOR, L) for L in creators)
    return Polynomial.build(system.dimension, [(mat, word, SCALAR_ONE)])


def generator_polynomial(system: GenericSystem, labels: LabelSpace, word) -> Polynomial:
    """A word in the collective generators as a canonical polynomial.

    ``word`` is a sequence of NoiseFactor; annihilator kind maps to the
    collective annihilator, creator kind to the collective creator.
    """
    p = Polynomial.identity(system.dimension)
    for f in word:
        L = f.label
        if f.kind == ANNIHILATOR:
            g = entangled_annihilate(system, labels, L.omega, L.t, L.k)
        else:
            g = entangled_create(system, labels, L.omega, L.t, L.k)
        p = p @ g
    return p


def module_inner_product(
    system: GenericSystem,
    labels: LabelSpace,
    xi,
    eta,
    rules: CCRRules | None = None,
) -> SystemMatrix:
    """The operator-valued pairing <xi, eta> = vacuum(word(xi)* word(eta))."""
    rules = rules if rules is not None else CCRRules(labels)
    left = word_polynomial(system, labels, xi)
    right = word_polynomial(system, labels, eta)
    if left.dim != right.dim:
        raise DimensionMismatch("vectors live over different system dimensions")
    return vacuum_expectation(left.adjoint() @ right, rules)


def check_c_squared(system: GenericSystem, labels: LabelSpace) -> CheckReport:
    """Squares of collective operators vanish identically, label by label."""
    checked = []
    violations = []
    for omega in system.bohr_values:
        for t in labels.times:
            for k in labels.momenta:
                c = entangled_annihilate(system, labels, omega, t, k)
                cdag = entangled_create(system, labels, omega, t, k)
                checked.append(f"({omega},{t},{k})")
                if not (c @ c).is_zero():
                    violations.append({"label": checked[-1], "which": "c^2"})
                if not (cdag @ cdag).is_zero():
                    violations.append({"label": checked[-1], "which": "c*^2"})
    return CheckReport(
        check="c_squared",
        parameters={"labels": checked},
        counts={"labels": len(checked)},
        violations=violations,
    )


def _corpus(labels: LabelSpace, omegas) -> list[NoiseLabel]:
    return sorted(labels.all_labels(omegas))


def _vectors_up_to(corpus, max_order):
    for order in range(max_order + 1):
        for creators in itertools.product(corpus, repeat=order):
            yield EntangledVector(creators)


def check_module_relation(
    system: GenericSystem,
    labels: LabelSpace,
    omegas=None,
    max_order: int = 2,
    rules: CCRRules | None = None,
    force: bool = False,
    max_witnesses: int = 10,
) -> CheckReport:
    """Verify the collective-pair reduction on every entangled vector.

    For each ordered label pair (L, L') and every creator word v of
    length <= max_order, the polynomial

        (c_L c*_L' - gamma(L, L') * P_w) * word(v)

    must send the vacuum to zero, where gamma is the 2pi-weighted
    Kronecker scalar and P_w the rank-one projector of L's frequency.
    The reduction uses only the white-noise commutator, so this is a
    mechanical proof-check, not an application of the relation.
    """
    if not system.generic and not force:
        raise NotGeneric("system failed genericity validation; pass force=True to demo")
    rules = rules if rules is not None else CCRRules(labels)
    omegas = list(omegas) if omegas is not None else list(system.bohr_values)
    corpus = _corpus(labels, omegas)
    words = [
        (v, word_polynomial(system, labels, v))
        for v in _vectors_up_to(corpus, max_order)
    ]
    pair_count = 0
    checks = 0
    nonzero_vectors = sum(1 for _, w in words if not w.is_zero())
    violations = []
    for L in corpus:
        c_L = entangled_annihilate(system, labels, L.omega, L.t, L.k)
        proj = sigma_plus(system, L.omega) @ sigma_minus(system, L.omega)
        for Lp in corpus:
            pair_count += 1
            cdag_Lp = entangled_create(system, labels, Lp.omega, Lp.t, Lp.k)
            gamma = labels.delta(L, Lp)
            relation = (c_L @ cdag_Lp) - Polynomial.of_matrix(proj, gamma)
            for v, word in words:
                checks += 1
                if word.is_zero():
                    continue  # zero module vector: the identity is vacuous
                residual = vacuum_apply(relation @ word, rules)
                if not residual.is_zero():
                    if len(violations) < max_witnesses:
                        violations.append(
                            {
                                "pair": [repr(L), repr(Lp)],
                                "vector": v.describe(),
                                "residual_terms": len(residual.terms),
                            }
                        )
                    else:
                        violations.append("...")
                        return _relation_report(
                            omegas, max_order, pair_count, checks, nonzero_vectors, violations
                        )
    return _relation_report(omegas, max_order, pair_count, checks, nonzero_vectors, violations)


def _relation_report(omegas, max_order, pairs, checks, nonzero, violations):
    return CheckReport(
        check="module_relation",
        parameters={"omegas": [str(w) for w in omegas], "max_order": max_order},
        counts={"pairs": pairs, "checks": checks, "nonzero_vectors": nonzero},
        violations=violations,
    )


def check_residual_vanishing(
    system: GenericSystem,
    labels: LabelSpace,
    omega,
    omega_prime,
    L: NoiseLabel,
    Lp: NoiseLabel,
    v: EntangledVector,
    rules: CCRRules | None = None,
) -> bool:
    """Does (sigma+_w sigma-_w') b*_L' b_L kill the given entangled vector?

    This is the residual left after one commutator pass; on a generic
    system the surviving terms die because their fused flip-matrix
    products vanish.  Vacuously true when v has no creator matching the
    annihilator's label.
    """
    rules = rules if rules is not None else CCRRules(labels)
    omega = Fraction(omega)
    omega_prime = Fraction(omega_prime)
    mat = sigma_plus(system, omega) @ sigma_minus(system, omega_prime)
    residual_op = Polynomial.build(
        system.dimension,
        [(mat, (NoiseFactor(CREATOR, Lp), NoiseFactor(ANNIHILATOR, L)), SCALAR_ONE)],
    )
    word = word_polynomial(system, labels, v)
    return vacuum_apply(residual_op @ word, rules).is_zero()


def check_residual_sweep(
    system: GenericSystem,
    labels: LabelSpace,
    omegas=None,
    max_order: int = 1,
    rules: CCRRules | None = None,
    force: bool = False,
    max_witnesses: int = 10,
) -> CheckReport:
    """Run the residual-vanishing check over every label pair and vector.

    The annihilator/creator labels are tied to the flip frequencies, as in
    the commutator reduction that produces the residual operator.
    """
    if not system.generic and not force:
        raise NotGeneric("system failed genericity validation; pass force=True to demo")
    rules = rules if rules is not None else CCRRules(labels)
    omegas = list(omegas) if omegas is not None else list(system.bohr_values)
    corpus = _corpus(labels, omegas)
    vectors = list(_vectors_up_to(corpus, max_order))
    checks = 0
    violations = []
    for L in corpus:
        for Lp in corpus:
            for v in vectors:
                checks += 1
                ok = check_residual_vanishing(
                    system, labels, L.omega, Lp.omega, L, Lp, v, rules
                )
                if not ok and len(violations) < max_witnesses:
                    violations.append(
                        {"pair": [repr(L), repr(Lp)], "vector": v.describe()}
                    )
    return CheckReport(
        check="residual_vanishing",
        parameters={"omegas": [str(w) for w in omegas], "max_order": max_order},
        counts={"checks": checks, "vectors": len(vectors)},
        violations=violations,
    )


def enumerate_generator_words(
    labels: LabelSpace,
    omegas,
    max_len: int,
    cap: int = 50_000,
    sample: int = 500,
    seed: int = 2026,
):
    """All generator words up to a length, or a fixed-seed sample.

    When the full corpus size exceeds ``cap``, returns ``sample`` words:
    half drawn uniformly, half balanced annihilators-then-creators words
    with mostly matched labels so the sample is rich in nonzero values.
    Returns (words, meta) where meta records the mode and totals.
    """
    corpus = _corpus(labels, omegas)
    gens = [
        NoiseFactor(kind, L) for L in corpus for kind in (ANNIHILATOR, CREATOR)
    ]
    total = sum(len(gens) ** n for n in range(max_len + 1))
    if total <= cap:
        words = [
            word
            for n in range(max_len + 1)
            for word in itertools.product(gens, repeat=n)
        ]
        return words, {"mode": "exhaustive", "total": total, "emitted": len(words)}
    rng = random.Random(seed)
    words = []
    for _ in range(sample // 2):
        n = rng.randint(0, max_len)
        words.append(tuple(rng.choice(gens) for _ in range(n)))
    for _ in range(sample - sample // 2):
        m = rng.randint(1, max_len // 2)
        creators = [rng.choice(corpus) for _ in range(m)]
        annih = list(reversed(creators))
        if rng.random() < 0.3:
            annih[rng.randrange(m)] = rng.choice(corpus)
        words.append(
            tuple(NoiseFactor(ANNIHILATOR, L) for L in annih)
            + tuple(NoiseFactor(CREATOR, L) for L in creators)
        )
    return words, {"mode": "sampled", "total": total, "emitted": len(words), "seed": seed}


def moment_sequence(
    system: GenericSystem,
    labels: LabelSpace,
    L: NoiseLabel,
    psi,
    n_max: int,
    rules: CCRRules | None = None,
) -> list[Scalar]:
    """Exact vacuum moments of the field quadrature c_L + c*_L.

    Entry n is <psi (x) vac | (c + c*)^n | psi (x) vac> as an element of
    Q(i)[2pi]; psi is a vector of exact complex rationals (callers pass a
    unit vector when they want probability moments).
    """
    rules = rules if rules is not None else CCRRules(labels)
    psi = [CRat.parse(x) for x in psi]
    if len(psi) != system.dimension:
        raise DimensionMismatch(
            f"state has length {len(psi)}, system dimension is {system.dimension}"
        )
    x = entangled_annihilate(system, labels, L.omega, L.t, L.k) + entangled_create(
        system, labels, L.omega, L.t, L.k
    )
    moments = []
    power = Polynomial.identity(system.dimension)
    for _ in range(n_max + 1):
        exp = vacuum_expectation(power, rules)
        acc = SCALAR_ZERO
        for (r, c), s in exp.entries:
            weight = psi[r].conjugate() * psi[c]
            if weight != CRAT_ZERO:
                acc = acc + Scalar.of(weight) * s
        moments.append(acc)
        power = power @ x
    return moments


def gram_matrix(
    system: GenericSystem,
    labels: LabelSpace,
    vectors,
    psi,
    rules: CCRRules | None = None,
):
    """Numeric Gram matrix of entangled vectors compressed by a state.

    Entry (a, b) is psi* <xi_a, xi_b> psi with 2pi substituted; the
    result must be positive semidefinite for any family and any state.
    """
    import numpy as np

    rules = rules if rules is not None else CCRRules(labels)
    psi_vec = np.array([CRat.parse(x).to_complex() for x in psi], dtype=complex)
    n = len(vectors)
    gram = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            ip = module_inner_product(system, labels, vectors[a], vectors[b], rules)
            val = psi_vec.conj() @ ip.to_numpy() @ psi_vec
            gram[a, b] = val
            gram[b, a] = val.conjugate()
    return gram


# --- equivalence of the three representations ------------------------------
#
# Every word in the collective generators is evaluated in:
#   (a) the direct representation, flip matrix (x) bosonic noise;
#   (b) the tensor representation, flip * free time generator (x) free
#       momentum-frequency generator with the 2pi-weighted reduction;
#   (c) the doubly factorized form, where the momentum-frequency
#       generator splits into a frequency generator and a sqrt-weighted
#       momentum generator.
# The flip-matrix leg is common to all three, so a word's value is the
# shared single-entry matrix product scaled by per-representation
# scalars.  States stay single basis vectors (bosonic occupation
# multiset, free creator stacks) along any path, which keeps the full
# enumeration cheap.

_SIG_IDENTITY = ("I",)


def _sig_compose(kind, omega, system_info, sig):
    """Left-multiply the running single-entry flip product by one factor."""
    if sig is None:
        return None
    upper, lower = system_info[omega]
    row, col = (upper, lower) if kind == ANNIHILATOR else (lower, upper)
    if sig is _SIG_IDENTITY:
        return (row, col)
    if col != sig[0]:
        return None
    return (row, sig[1])


class _DirectState:
    """Bosonic leg: sparse map occupation-multiset -> Scalar."""

    __slots__ = ("amp",)

    def __init__(self, amp=None):
        self.amp = amp if amp is not None else {(): SCALAR_ONE}

    def apply(self, kind, label, weight):
        out = {}
        if kind == CREATOR:
            for m, coeff in self.amp.items():
                key = tuple(sorted(m + (label,)))
                acc = out.get(key, SCALAR_ZERO) + coeff
                if not acc.is_zero():
                    out[key] = acc
                else:
                    out.pop(key, None)
        else:
            for m, coeff in self.amp.items():
                seen = set()
                for idx, M in enumerate(m):
                    if M in seen:
                        continue
                    seen.add(M)
                    w = weight(label, M)
                    if w.is_zero():
                        continue
                    mult = m.count(M)
                    reduced = m[:idx] + m[idx + 1 :]
                    acc = out.get(reduced, SCALAR_ZERO) + coeff * w * Scalar.of(mult)
                    if not acc.is_zero():
                        out[reduced] = acc
                    else:
                        out.pop(reduced, None)
        return _DirectState(out) if out else None

    def vacuum_amplitude(self) -> Scalar:
        return self.amp.get((), SCALAR_ZERO)


class _TensorState:
    """Free legs of representation (b): time stack and (w, k) stack."""

    __slots__ = ("coeff", "tstack", "wkstack")

    def __init__(self, coeff=SCALAR_ONE, tstack=(), wkstack=()):
        self.coeff = coeff
        self.tstack = tstack
        self.wkstack = wkstack

    def apply(self, kind, label, labels: LabelSpace):
        if kind == CREATOR:
            return _TensorState(
                self.coeff,
                (label.t,) + self.tstack,
                ((label.omega, label.k),) + self.wkstack,
            )
        if not self.tstack or not self.wkstack:
            return None
        if self.tstack[0] != label.t:
            return None
        if self.wkstack[0] != (label.omega, label.k):
            return None
        if labels.dispersion[label.k] != label.omega:
            return None
        return _TensorState(
            self.coeff * SCALAR_TWO_PI, self.tstack[1:], self.wkstack[1:]
        )

    def vacuum_amplitude(self) -> Scalar:
        if self.tstack or self.wkstack:
            return SCALAR_ZERO
        return self.coeff


class _FactorizedState:
    """Free legs of representation (c): time, frequency and momentum
    stacks, with sqrt(2pi) weights counted in half powers."""

    __slots__ = ("coeff", "half", "tstack", "wstack", "kstack")

    def __init__(self, coeff=SCALAR_ONE, half=0, tstack=(), wstack=(), kstack=()):
        self.coeff = coeff
        self.half = half
        self.tstack = tstack
        self.wstack = wstack
        self.kstack = kstack

    def apply(self, kind, label, labels: LabelSpace):
        if labels.dispersion[label.k] != label.omega:
            return None  # sqrt weight vanishes: the factor itself is zero
        if kind == CREATOR:
            return _FactorizedState(
                self.coeff,
                self.half + 1,
                (label.t,) + self.tstack,
                (label.omega,) + self.wstack,
                (label.k,) + self.kstack,
            )
        if not (self.tstack and self.wstack and self.kstack):
            return None
        if (
            self.tstack[0] != label.t
            or self.wstack[0] != label.omega
            or self.kstack[0] != label.k
        ):
            return None
        return _FactorizedState(
            self.coeff,
            self.half + 1,
            self.tstack[1:],
            self.wstack[1:],
            self.kstack[1:],
        )

    def vacuum_amplitude(self) -> Scalar:
        if self.tstack or self.wstack or self.kstack:
            return SCALAR_ZERO
        if self.half % 2:
            raise AssertionError("unpaired sqrt(2pi) weight on a closed word")
        return self.coeff * Scalar.two_pi(self.half // 2)


def compare_representations(
    system: GenericSystem,
    labels: LabelSpace,
    omegas=None,
    max_len: int = 4,
    contraction=None,
    max_witnesses: int = 10,
) -> CheckReport:
    """Exhaustively compare vacuum values of generator words across the
    direct, tensor, and doubly factorized representations.

    Subtrees whose value is zero in every representation for every
    extension (dead flip product, or all noise legs dead) are counted in
    bulk without enumeration; that bulk step is exact, not a sampling
    shortcut.  ``contraction`` overrides the bosonic pair weight of the
    direct leg only (mutation testing).
    """
    if not system.generic:
        raise NotGeneric("representation comparison is defined for generic systems")
    rules_weight = contraction if contraction is not None else labels.delta
    omegas = list(omegas) if omegas is not None else list(system.bohr_values)
    corpus = _corpus(labels, omegas)
    system_info = {
        w: (system.index_of(p.upper), system.index_of(p.lower))
        for w, (p,) in ((w, system.pairs_for(w)) for w in omegas)
    }
    gens = [(kind, L) for L in corpus for kind in (ANNIHILATOR, CREATOR)]
    n_gens = len(gens)
    # words of length 1..r below a pruned node, for bulk agreement counts
    tail_counts = [0] * (max_len + 1)
    for r in range(1, max_len + 1):
        tail_counts[r] = tail_counts[r - 1] + n_gens**r

    stats = {"words": 0, "evaluated": 0, "pruned": 0, "nonzero_values": 0}
    violations: list = []

    def compare_node(path, sig, direct, tensor, factor):
        stats["words"] += 1
        stats["evaluated"] += 1
        val_a = direct.vacuum_amplitude() if direct is not None else SCALAR_ZERO
        val_b = tensor.vacuum_amplitude() if tensor is not None else SCALAR_ZERO
        val_c = factor.vacuum_amplitude() if factor is not None else SCALAR_ZERO
        if sig is None:
            val_a = val_b = val_c = SCALAR_ZERO
        if not (val_a == val_b and val_b == val_c):
            if len(violations) < max_witnesses:
                violations.append(
                    {
                        "word": [
                            ("c" if kind == ANNIHILATOR else "c*") + repr(L)
                            for kind, L in path
                        ],
                        "direct": repr(val_a),
                        "tensor": repr(val_b),
                        "factorized": repr(val_c),
                    }
                )
        elif not val_a.is_zero():
            stats["nonzero_values"] += 1

    def walk(path, depth, sig, direct, tensor, factor):
        compare_node(path, sig, direct, tensor, factor)
        if depth == max_len:
            return
        # a pruned child accounts for itself plus all of its extensions
        child_subtree = 1 + tail_counts[max_len - depth - 1]
        for kind, L in gens:
            new_sig = _sig_compose(kind, L.omega, system_info, sig)
            if new_sig is None:
                stats["words"] += child_subtree
                stats["pruned"] += 1
                continue
            nd = direct.apply(kind, L, rules_weight) if direct is not None else None
            nt = tensor.apply(kind, L, labels) if tensor is not None else None
            nf = factor.apply(kind, L, labels) if factor is not None else None
            if nd is None and nt is None and nf is None:
                stats["words"] += child_subtree
                stats["pruned"] += 1
                continue
            walk(path + ((kind, L),), depth + 1, new_sig, nd, nt, nf)

    walk((), 0, _SIG_IDENTITY, _DirectState(), _TensorState(), _FactorizedState())
    return CheckReport(
        check="representation_equivalence",
        parameters={
            "omegas": [str(w) for w in omegas],
            "max_len": max_len,
            "generators": n_gens,
        },
        counts=stats,
        violations=violations,
    )
