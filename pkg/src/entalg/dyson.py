"""Discrete-time series expansion of the propagator.

The interaction Hamiltonian is a coupling-weighted sum of collective
operators, one pair per Bohr frequency and momentum.  The order-n term
of the propagator expansion is the sum over strictly decreasing time
tuples of Hamiltonian products, weighted by (-i * dt)^n; no equal-time
pairs ever appear, so the Kronecker delta convention raises no delta(0)
ambiguity.  Terms are kept as words over the collective generators so
the structural claim (everything depends on the system and noise only
through the collective combinations) can be checked before any
rewriting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import (
    ANNIHILATOR,
    CREATOR,
    CCRRules,
    LabelSpace,
    NoiseFactor,
    NoiseLabel,
    Polynomial,
    vacuum_expectation,
)
from .errors import OrderTooLarge, UnknownLabel
from .exact import CRAT_ZERO, MINUS_I, SCALAR_ONE, SCALAR_ZERO, CRat, Scalar, as_fraction
from .fockmodule import generator_polynomial
from .oracle import OracleRep
from .reports import CheckReport
from .system import GenericSystem

DEFAULT_TERM_BOUND = 200_000

# factor tags a generator word may carry; only the first two are
# collective, the others exist for negative controls and diagnostics
TAG_COLLECTIVE = ("c", "c*")
TAG_RAW = ("b", "b*")


@dataclass(frozen=True)
class InteractionSpec:
    """Coupling constants and a uniform discrete time grid.

    ``couplings`` maps (Bohr value, momentum atom) to an exact complex
    rational; the grid is the ordered tuple of time atoms with spacing
    ``dt``.
    """

    couplings: tuple[tuple[tuple[Fraction, str], CRat], ...]
    times: tuple[str, ...]
    dt: Fraction

    @classmethod
    def build(cls, couplings, times, dt) -> "InteractionSpec":
        items = couplings.items() if isinstance(couplings, dict) else couplings
        table = tuple(
            sorted(
                ((as_fraction(w), str(k)), CRat.parse(g))
                for (w, k), g in items
            )
        )
        times = tuple(str(t) for t in times)
        if len(set(times)) != len(times):
            raise ValueError("time grid atoms must be distinct")
        dt = as_fraction(dt)
        if dt <= 0:
            raise ValueError("grid spacing must be positive")
        return cls(table, times, dt)

    def coupling(self, omega, k) -> CRat:
        key = (as_fraction(omega), str(k))
        for entry, g in self.couplings:
            if entry == key:
                return g
        return CRAT_ZERO

    def validate_against(self, system: GenericSystem, labels: LabelSpace) -> None:
        """Couplings must be total on F x declared momenta; grid times
        must be declared time atoms."""
        declared = {key for key, _ in self.couplings}
        for w in system.bohr_values:
            for k in labels.momenta:
                if (w, k) not in declared:
                    raise ValueError(f"coupling missing for (omega={w}, k={k})")
        for t in self.times:
            if t not in labels.times:
                raise UnknownLabel(f"grid time {t!r} is not a declared time atom", t=t)


class GeneratorPolynomial:
    """Linear combination of raw generator words (no rewriting applied).

    Factors are (tag, payload) pairs; collective factors carry a noise
    label.  This shape preserves which combinations each term was built
    from, which the structural dependency check inspects.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms=None):
        self.dim = dim
        self.terms = dict(terms) if terms else {}

    @classmethod
    def zero(cls, dim: int) -> "GeneratorPolynomial":
        return cls(dim)

    @classmethod
    def identity(cls, dim: int) -> "GeneratorPolynomial":
        return cls(dim, {(): SCALAR_ONE})

    @classmethod
    def generator(cls, dim: int, tag: str, label: NoiseLabel, scalar=SCALAR_ONE):
        return cls(dim, {((tag, label),): scalar})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GeneratorPolynomial") -> "GeneratorPolynomial":
        merged = dict(self.terms)
        for word, s in other.terms.items():
            acc = merged.get(word, SCALAR_ZERO) + s
            if acc.is_zero():
                merged.pop(word, None)
            else:
                merged[word] = acc
        return GeneratorPolynomial(self.dim, merged)

    def __matmul__(self, other: "GeneratorPolynomial") -> "GeneratorPolynomial":
        out: dict = {}
        for w1, s1 in self.terms.items():
            for w2, s2 in other.terms.items():
                word = w1 + w2
                acc = out.get(word, SCALAR_ZERO) + s1 * s2
                if acc.is_zero():
                    out.pop(word, None)
                else:
                    out[word] = acc
        return GeneratorPolynomial(self.dim, out)

    def scale(self, scalar: Scalar) -> "GeneratorPolynomial":
        if scalar.is_zero():
            return GeneratorPolynomial(self.dim)
        return GeneratorPolynomial(self.dim, {w: scalar * s for w, s in self.terms.items()})

    def term_count(self) -> int:
        return len(self.terms)

    def entangled_only(self) -> bool:
        """True when every factor of every term is a collective generator."""
        return all(
            tag in TAG_COLLECTIVE for word in self.terms for tag, _ in word
        )

    def to_polynomial(self, system: GenericSystem, labels: LabelSpace) -> Polynomial:
        """Convert to the canonical engine polynomial."""
        acc = Polynomial.zero(self.dim)
        for word, s in self.terms.items():
            factors = []
            for tag, label in word:
                if tag == "c":
                    factors.append(NoiseFactor(ANNIHILATOR, label))
                elif tag == "c*":
                    factors.append(NoiseFactor(CREATOR, label))
                else:
                    raise ValueError(
                        f"cannot lower non-collective factor {tag!r} to the engine"
                    )
            acc = acc + generator_polynomial(system, labels, factors).scale(s)
        return acc


def hamiltonian_at(
    system: GenericSystem, labels: LabelSpace, spec: InteractionSpec, t: str
) -> GeneratorPolynomial:
    """The interaction Hamiltonian at one grid time.

    h(t) = sum over (w in F, k) of conj(g) c_w(t,k) + g c*_w(t,k);
    self-adjoint by construction.
    """
    if t not in spec.times:
        raise UnknownLabel(f"time {t!r} is not on the grid", t=t)
    if t not in labels.times:
        raise UnknownLabel(f"grid time {t!r} is not a declared time atom", t=t)
    acc = GeneratorPolynomial.zero(system.dimension)
    for omega in system.bohr_values:
        for k in labels.momenta:
            g = spec.coupling(omega, k)
            if g == CRAT_ZERO:
                continue
            label = labels.label(omega, t, k)
            acc = acc + GeneratorPolynomial.generator(
                system.dimension, "c", label, Scalar.of(g.conjugate())
            )
            acc = acc + GeneratorPolynomial.generator(
                system.dimension, "c*", label, Scalar.of(g)
            )
    return acc


def time_tuples(spec: InteractionSpec, n: int, t_end: str) -> list[tuple[str, ...]]:
    """Strictly decreasing n-tuples of grid times bounded by t_end."""
    if t_end not in spec.times:
        raise UnknownLabel(f"time {t_end!r} is not on the grid", t=t_end)
    end_pos = spec.times.index(t_end)
    window = spec.times[: end_pos + 1]
    return [
        tuple(reversed(combo)) for combo in itertools.combinations(window, n)
    ]


def dyson_term(
    system: GenericSystem,
    labels: LabelSpace,
    spec: InteractionSpec,
    n: int,
    t_end: str | None = None,
    max_terms: int = DEFAULT_TERM_BOUND,
) -> GeneratorPolynomial:
    """Order-n term of the propagator expansion as raw generator words.

    (-i)^n * dt^n * sum over t_end >= t_1 > ... > t_n of h(t_1)...h(t_n).
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    if t_end is None:
        t_end = spec.times[-1]
    if n == 0:
        return GeneratorPolynomial.identity(system.dimension)
    tuples = time_tuples(spec, n, t_end)
    gens_per_h = 2 * sum(
        1
        for w in system.bohr_values
        for k in labels.momenta
        if spec.coupling(w, k) != CRAT_ZERO
    )
    bound = len(tuples) * max(1, gens_per_h) ** n
    if bound > max_terms:
        raise OrderTooLarge(
            f"order-{n} expansion may produce {bound} terms (bound {max_terms})"
        )
    hams = {t: hamiltonian_at(system, labels, spec, t) for t in spec.times[: spec.times.index(t_end) + 1]}
    acc = GeneratorPolynomial.zero(system.dimension)
    for combo in tuples:
        prod = hams[combo[0]]
        for t in combo[1:]:
            prod = prod @ hams[t]
        acc = acc + prod
    prefactor = Scalar.of(MINUS_I**n * CRat(spec.dt**n))
    return acc.scale(prefactor)


def depends_only_on_entangled(
    system: GenericSystem,
    labels: LabelSpace,
    spec: InteractionSpec,
    n_max: int,
    max_terms: int = DEFAULT_TERM_BOUND,
) -> bool:
    """Structural scan: every factor of every expansion term up to order
    n_max is a collective generator.  Runs before any normal ordering."""
    for n in range(n_max + 1):
        term = dyson_term(system, labels, spec, n, max_terms=max_terms)
        if not term.entangled_only():
            return False
    return True


def _state_numeric(psi, dim) -> np.ndarray:
    vec = np.array([CRat.parse(x).to_complex() for x in psi], dtype=complex)
    if vec.shape != (dim,):
        raise ValueError(f"state must have length {dim}")
    return vec


def oracle_hamiltonian(rep: OracleRep, spec: InteractionSpec, t: str) -> np.ndarray:
    """Dense Hamiltonian at a grid time, built from oracle matrices only."""
    h = np.zeros((rep.dim_total, rep.dim_total), dtype=complex)
    for omega in rep.system.bohr_values:
        for k in rep.labels.momenta:
            g = spec.coupling(omega, k).to_complex()
            if g == 0:
                continue
            label = rep.labels.label(omega, t, k)
            h += np.conj(g) * rep.collective(label)
            h += g * rep.collective_dag(label)
    return h


def oracle_dyson_matrix(rep: OracleRep, spec: InteractionSpec, n: int, t_end: str) -> np.ndarray:
    """Order-n expansion term as a dense matrix over system x Fock."""
    if n == 0:
        return np.eye(rep.dim_total, dtype=complex)
    hams = {t: oracle_hamiltonian(rep, spec, t) for t in spec.times}
    acc = np.zeros((rep.dim_total, rep.dim_total), dtype=complex)
    for combo in time_tuples(spec, n, t_end):
        prod = hams[combo[0]].copy()
        for t in combo[1:]:
            prod = prod @ hams[t]
        acc += prod
    return ((-1j) * float(spec.dt)) ** n * acc


def propagator_block(
    system: GenericSystem,
    labels: LabelSpace,
    spec: InteractionSpec,
    n: int,
    rep: OracleRep,
    rules: CCRRules | None = None,
    t_end: str | None = None,
):
    """Order-n vacuum-sector block, symbolic and oracle side by side.

    Returns (term, symbolic d x d complex array, oracle d x d array); the
    symbolic side runs the rewrite engine with 2pi substituted at the
    end, the oracle side multiplies dense matrices over the same tuples.
    """
    rules = rules if rules is not None else CCRRules(labels)
    t_end = t_end if t_end is not None else spec.times[-1]
    term = dyson_term(system, labels, spec, n, t_end)
    sym = vacuum_expectation(term.to_polynomial(system, labels), rules).to_numpy()
    u_n = oracle_dyson_matrix(rep, spec, n, t_end)
    orc = rep.vacuum_columns.conj().T @ u_n @ rep.vacuum_columns
    return term, sym, orc


def propagator_matrix_elements(
    system: GenericSystem,
    labels: LabelSpace,
    spec: InteractionSpec,
    psi,
    psi_prime,
    n_max: int,
    rep: OracleRep,
    rules: CCRRules | None = None,
    tol: float = 1e-8,
) -> CheckReport:
    """Per-order matrix elements <psi (x) vac | U_n | psi' (x) vac>.

    The report also carries the unitarity defect of the truncated partial
    sum, which is expected to be nonzero and is never asserted against.
    """
    spec.validate_against(system, labels)
    t_end = spec.times[-1]
    psi_n = _state_numeric(psi, system.dimension)
    psi_p_n = _state_numeric(psi_prime, system.dimension)
    orders = []
    violations = []
    max_dev = 0.0
    partial = np.zeros((rep.dim_total, rep.dim_total), dtype=complex)
    for n in range(n_max + 1):
        term, sym, orc = propagator_block(system, labels, spec, n, rep, rules, t_end)
        sym_val = complex(psi_n.conj() @ sym @ psi_p_n)
        orc_val = complex(psi_n.conj() @ orc @ psi_p_n)
        partial += oracle_dyson_matrix(rep, spec, n, t_end)
        dev = abs(sym_val - orc_val)
        max_dev = max(max_dev, dev)
        orders.append(
            {
                "order": n,
                "symbolic": [sym_val.real, sym_val.imag],
                "oracle": [orc_val.real, orc_val.imag],
                "deviation": dev,
                "entangled_only": term.entangled_only(),
                "terms": term.term_count(),
            }
        )
        if dev > tol:
            violations.append({"order": n, "deviation": dev})
    defect = float(
        np.linalg.norm(partial.conj().T @ partial - np.eye(rep.dim_total))
    )
    return CheckReport(
        check="propagator_elements",
        parameters={
            "n_max": n_max,
            "tol": tol,
            "t_end": t_end,
            "grid_points": len(spec.times),
            "orders": orders,
            "unitarity_defect_partial_sum": defect,
        },
        counts={"orders": n_max + 1},
        violations=violations,
        max_deviation=max_dev,
    )
