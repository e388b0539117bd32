"""Truncated-Fock numeric oracle.

Everything here is built from Kronecker products of dense ladder
matrices; the symbolic rewrite engine is never consulted, so agreement
between the two sides is a genuine cross-check.  One bosonic mode is
kept per distinct on-shell label (momentum dispersing onto its own Bohr
frequency); off-shell labels act as the zero operator, matching the
vanishing contraction support.

Ladder matrices are scaled so the commutator equals 2pi below the
occupation cutoff, which is verified at build time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import (
    ANNIHILATOR,
    CREATOR,
    CCRRules,
    LabelSpace,
    NoiseFactor,
    NoiseLabel,
    vacuum_expectation,
)
from .errors import BadCutoff, CapacityExceeded, OrderTooLarge
from .exact import TWO_PI_FLOAT
from .fockmodule import generator_polynomial
from .reports import CheckReport
from .system import GenericSystem, sigma_minus, sigma_plus

BUILD_TOL = 1e-12
DEFAULT_CAPACITY = 20_000


@dataclass(frozen=True)
class TruncatedFock:
    """Shape of the truncated master-field Fock space."""

    modes: tuple[NoiseLabel, ...]
    cutoff: int

    @property
    def dimension(self) -> int:
        return (self.cutoff + 1) ** len(self.modes)

    def occupations(self) -> np.ndarray:
        """Per-mode occupation numbers of every Fock basis state."""
        n_modes = len(self.modes)
        occ = np.zeros((self.dimension, n_modes), dtype=int)
        for idx in range(self.dimension):
            rem = idx
            for m in reversed(range(n_modes)):
                occ[idx, m] = rem % (self.cutoff + 1)
                rem //= self.cutoff + 1
        return occ


class OracleRep:
    """Dense matrices for all operators on system (x) truncated Fock."""

    def __init__(self, system: GenericSystem, labels: LabelSpace, omegas, fock: TruncatedFock):
        self.system = system
        self.labels = labels
        self.omegas = tuple(omegas)
        self.fock = fock
        self.dim_system = system.dimension
        self.dim_total = system.dimension * fock.dimension
        self._b = {}
        self._c_cache = {}
        self._build_modes()
        self._vacuum_columns = self._build_vacuum_columns()

    def _build_modes(self):
        n = self.fock.cutoff + 1
        lower = np.diag(np.sqrt(np.arange(1, n)), k=1) * np.sqrt(TWO_PI_FLOAT)
        eye = np.eye(n)
        for pos, mode in enumerate(self.fock.modes):
            factors = [eye] * len(self.fock.modes)
            factors[pos] = lower
            mat = factors[0]
            for f in factors[1:]:
                mat = np.kron(mat, f)
            self._b[mode] = mat
        self._verify_commutators()

    def _verify_commutators(self):
        occ = self.fock.occupations()
        for pos, mode in enumerate(self.fock.modes):
            b = self._b[mode]
            comm = b @ b.conj().T - b.conj().T @ b
            target = TWO_PI_FLOAT * np.eye(self.fock.dimension)
            cols = np.flatnonzero(occ[:, pos] < self.fock.cutoff)
            dev = np.abs((comm - target)[:, cols]).max() if cols.size else 0.0
            if dev > BUILD_TOL:
                raise AssertionError(
                    f"ladder construction broken: commutator deviation {dev:.3e}"
                )

    def _build_vacuum_columns(self) -> np.ndarray:
        cols = np.zeros((self.dim_total, self.dim_system), dtype=complex)
        for i in range(self.dim_system):
            cols[i * self.fock.dimension, i] = 1.0
        return cols

    @property
    def vacuum_columns(self) -> np.ndarray:
        """Columns e_i (x) vacuum, system basis by increasing energy."""
        return self._vacuum_columns

    def noise(self, label: NoiseLabel) -> np.ndarray:
        """The bosonic annihilator for a label; zero when off shell."""
        mat = self._b.get(label)
        if mat is None:
            return np.zeros((self.fock.dimension, self.fock.dimension))
        return mat

    def collective(self, label: NoiseLabel) -> np.ndarray:
        """c_L = sigma+ (x) b_L on the full space."""
        key = (ANNIHILATOR, label)
        cached = self._c_cache.get(key)
        if cached is None:
            up = sigma_plus(self.system, label.omega).to_numpy()
            cached = np.kron(up, self.noise(label))
            self._c_cache[key] = cached
        return cached

    def collective_dag(self, label: NoiseLabel) -> np.ndarray:
        key = (CREATOR, label)
        cached = self._c_cache.get(key)
        if cached is None:
            cached = self.collective(label).conj().T
            self._c_cache[key] = cached
        return cached

    def factor_matrix(self, factor: NoiseFactor) -> np.ndarray:
        if factor.kind == ANNIHILATOR:
            return self.collective(factor.label)
        return self.collective_dag(factor.label)

    def projector(self, omega) -> np.ndarray:
        p = (sigma_plus(self.system, omega) @ sigma_minus(self.system, omega)).to_numpy()
        return np.kron(p, np.eye(self.fock.dimension))


def build_oracle(
    system: GenericSystem,
    labels: LabelSpace,
    omegas=None,
    cutoff: int = 3,
    capacity: int = DEFAULT_CAPACITY,
) -> OracleRep:
    """Construct the truncated representation, verifying the ladder CCR.

    Modes are the distinct on-shell labels of the corpus; the total
    dimension (system times Fock) must stay within ``capacity``.
    """
    if cutoff < 1:
        raise BadCutoff(f"occupation cutoff must be >= 1, got {cutoff}")
    omegas = list(omegas) if omegas is not None else list(system.bohr_values)
    corpus = sorted(labels.all_labels(omegas))
    modes = tuple(L for L in corpus if labels.on_shell(L))
    fock = TruncatedFock(modes=modes, cutoff=cutoff)
    total = system.dimension * fock.dimension
    if total > capacity:
        raise CapacityExceeded(
            f"system x Fock dimension {total} exceeds capacity {capacity}",
            dimension=total,
            capacity=capacity,
        )
    return OracleRep(system, labels, omegas, fock)


@dataclass
class BasisVector:
    """One entangled number vector of the truncated representation."""

    word: tuple[NoiseLabel, ...]
    start_index: int
    vector: np.ndarray
    is_zero: bool


def entangled_basis(rep: OracleRep, max_order: int) -> list[BasisVector]:
    """Apply every ordered creator word of bounded length to e_i (x) vac.

    Zero vectors are flagged, never dropped: a repeated frequency kills
    the flip product and off-shell labels kill the noise leg, and both
    outcomes are part of what the oracle checks.
    """
    if max_order > rep.fock.cutoff * max(1, len(rep.fock.modes)):
        raise OrderTooLarge(
            f"order {max_order} exceeds truncation-safe bound "
            f"{rep.fock.cutoff * max(1, len(rep.fock.modes))}"
        )
    corpus = sorted(rep.labels.all_labels(rep.omegas))
    out = []
    vac = rep.vacuum_columns

    def extend(word, columns, order):
        for i in range(rep.dim_system):
            vec = columns[:, i]
            norm = float(np.linalg.norm(vec))
            out.append(BasisVector(word, i, vec.copy(), norm < 1e-14))
        if order == max_order:
            return
        for L in corpus:
            mat = rep.collective_dag(L)
            extend((L,) + word, mat @ columns, order + 1)

    extend((), vac, 0)
    return out


def oracle_check_relation(
    rep: OracleRep,
    max_order: int = 2,
    tol: float = 1e-10,
    max_witnesses: int = 10,
) -> CheckReport:
    """Check the collective-pair reduction numerically on basis vectors.

    For every ordered label pair the operator c_L c*_L' minus its
    2pi-weighted projector target must annihilate each entangled basis
    vector up to ``tol`` relative residual.
    """
    corpus = sorted(rep.labels.all_labels(rep.omegas))
    basis = [bv for bv in entangled_basis(rep, max_order) if not bv.is_zero]
    if basis:
        vs = np.stack([bv.vector for bv in basis], axis=1)
        norms = np.linalg.norm(vs, axis=0)
    violations = []
    max_res = 0.0
    checks = 0
    for L in corpus:
        c_l = rep.collective(L)
        proj = rep.projector(L.omega)
        for Lp in corpus:
            cdag_lp = rep.collective_dag(Lp)
            gamma = rep.labels.delta(L, Lp).to_complex()
            op = c_l @ cdag_lp - gamma * proj
            if not basis:
                continue
            res = np.linalg.norm(op @ vs, axis=0) / norms
            checks += len(basis)
            worst = float(res.max())
            max_res = max(max_res, worst)
            if worst > tol:
                for idx in np.flatnonzero(res > tol)[:max_witnesses]:
                    if len(violations) < max_witnesses:
                        violations.append(
                            {
                                "pair": [repr(L), repr(Lp)],
                                "vector_word": [repr(M) for M in basis[idx].word],
                                "start_index": basis[idx].start_index,
                                "residual": float(res[idx]),
                            }
                        )
    return CheckReport(
        check="oracle_relation",
        parameters={"max_order": max_order, "tol": tol},
        counts={"pairs": len(corpus) ** 2, "basis_vectors": len(basis), "checks": checks},
        violations=violations,
        max_deviation=max_res,
    )


def oracle_vacuum_moment(rep: OracleRep, word) -> np.ndarray:
    """Matrix elements <e_i (x) vac | word | e_j (x) vac> as a dense block."""
    word = tuple(word)
    bound = 2 * rep.fock.cutoff * max(1, len(rep.fock.modes))
    if len(word) > bound:
        raise OrderTooLarge(f"word length {len(word)} exceeds safe bound {bound}")
    cols = rep.vacuum_columns
    for factor in reversed(word):
        cols = rep.factor_matrix(factor) @ cols
    return rep.vacuum_columns.conj().T @ cols


@dataclass
class MomentReport:
    """Symbolic-vs-oracle comparison for one generator word."""

    word: tuple[NoiseFactor, ...]
    symbolic: np.ndarray
    oracle: np.ndarray

    @property
    def deviation(self) -> float:
        return float(np.abs(self.symbolic - self.oracle).max())

    def describe(self) -> str:
        return " ".join(
            ("c" if f.kind == ANNIHILATOR else "c*") + repr(f.label) for f in self.word
        ) or "1"

    def to_json(self) -> dict:
        return {
            "word": self.describe(),
            "symbolic": _matrix_json(self.symbolic),
            "oracle": _matrix_json(self.oracle),
            "deviation": self.deviation,
        }


def _matrix_json(mat: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in mat]


def cross_validate(
    system: GenericSystem,
    labels: LabelSpace,
    words,
    omegas=None,
    cutoff: int = 3,
    tol: float = 1e-10,
    rules: CCRRules | None = None,
    rep: OracleRep | None = None,
) -> tuple[list[MomentReport], CheckReport]:
    """Compare symbolic vacuum expectations against the oracle word by word.

    The symbolic side runs the rewrite engine with 2pi substituted only
    at the final comparison; the oracle side multiplies dense matrices.
    """
    if rep is None:
        rep = build_oracle(system, labels, omegas=omegas, cutoff=cutoff)
    rules = rules if rules is not None else CCRRules(labels)
    reports = []
    violations = []
    max_dev = 0.0
    for word in words:
        word = tuple(word)
        sym = vacuum_expectation(generator_polynomial(system, labels, word), rules)
        orc = oracle_vacuum_moment(rep, word)
        entry = MomentReport(word=word, symbolic=sym.to_numpy(), oracle=orc)
        reports.append(entry)
        max_dev = max(max_dev, entry.deviation)
        if entry.deviation > tol:
            violations.append({"word": entry.describe(), "deviation": entry.deviation})
    summary = CheckReport(
        check="oracle_cross_validation",
        parameters={"cutoff": rep.fock.cutoff, "tol": tol},
        counts={"words": len(reports), "modes": len(rep.fock.modes)},
        violations=violations,
        max_deviation=max_dev,
    )
    return reports, summary


def dump_matrices(rep: OracleRep, directory) -> dict:
    """Write collective operator matrices in a dense binary layout.

    Each matrix is row-major little-endian complex64 (pairs of float32);
    the JSON header records dimensions and mode ordering.
    """
    import os

    os.makedirs(directory, exist_ok=True)
    header = {
        "dim_system": rep.dim_system,
        "fock_dimension": rep.fock.dimension,
        "dim_total": rep.dim_total,
        "cutoff": rep.fock.cutoff,
        "modes": [repr(m) for m in rep.fock.modes],
        "layout": "row-major little-endian complex64",
        "files": {},
    }
    corpus = sorted(rep.labels.all_labels(rep.omegas))
    for idx, L in enumerate(corpus):
        name = f"collective_{idx}.bin"
        data = rep.collective(L).astype("<c8").tobytes(order="C")
        with open(os.path.join(directory, name), "wb") as fh:
            fh.write(data)
        header["files"][name] = {"label": repr(L), "kind": "annihilator"}
    with open(os.path.join(directory, "header.json"), "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
    return header
