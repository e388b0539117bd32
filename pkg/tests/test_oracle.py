"""Truncated-Fock oracle: construction, relation residuals, cross-checks."""

import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from entalg.algebra import (
    ANNIHILATOR,
    CREATOR,
    CCRRules,
    LabelSpace,
    NoiseFactor,
    NoiseLabel,
)
from entalg.errors import BadCutoff, CapacityExceeded, OrderTooLarge
from entalg.exact import SCALAR_ONE, SCALAR_ZERO, TWO_PI_FLOAT
from entalg.oracle import (
    build_oracle,
    cross_validate,
    dump_matrices,
    entangled_basis,
    oracle_check_relation,
    oracle_vacuum_moment,
)
from entalg.system import Spectrum, force_system, validate_generic


@pytest.fixture(scope="module")
def two_level():
    return validate_generic(Spectrum.from_energies([0, 1]))


@pytest.fixture(scope="module")
def sys013():
    return validate_generic(Spectrum.from_energies([0, 1, 3]))


@pytest.fixture(scope="module")
def labels():
    return LabelSpace(["t1", "t2"], ["k1", "k2"], {"k1": 1, "k2": 2})


@pytest.fixture(scope="module")
def labels_single():
    return LabelSpace(["t1"], ["k1"], {"k1": 1})


def lab(omega, t, k):
    return NoiseLabel(Fraction(omega), t, k)


def test_single_mode_cutoff_one(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    assert rep.fock.dimension == 2
    b = rep.noise(lab(1, "t1", "k1"))
    want = np.array([[0, math.sqrt(TWO_PI_FLOAT)], [0, 0]])
    assert np.allclose(b, want)


def test_fock_dimension_two_modes(two_level, labels):
    # two on-shell modes exist only for the frequencies {1, 2}
    sys013_local = validate_generic(Spectrum.from_energies([0, 1, 3]))
    rep = build_oracle(sys013_local, labels, omegas=[1], cutoff=2)
    # frequency 1 is on shell only through k1: one mode per time atom
    assert len(rep.fock.modes) == 2
    assert rep.fock.dimension == 9


def test_build_rejects_bad_cutoff(two_level, labels_single):
    with pytest.raises(BadCutoff):
        build_oracle(two_level, labels_single, cutoff=0)


def test_build_rejects_capacity(sys013, labels):
    with pytest.raises(CapacityExceeded) as err:
        build_oracle(sys013, labels, cutoff=3, capacity=100)
    assert err.value.details["dimension"] > 100


def test_commutator_verified_below_cutoff(sys013, labels):
    rep = build_oracle(sys013, labels, cutoff=2)
    occ = rep.fock.occupations()
    for pos, mode in enumerate(rep.fock.modes):
        b = rep.noise(mode)
        comm = b @ b.conj().T - b.conj().T @ b
        cols = np.flatnonzero(occ[:, pos] < rep.fock.cutoff)
        dev = np.abs(comm[:, cols] - TWO_PI_FLOAT * np.eye(rep.fock.dimension)[:, cols]).max()
        assert dev < 1e-12


def test_off_shell_labels_are_zero_operators(two_level, labels):
    rep = build_oracle(two_level, labels, cutoff=1)
    off = lab(1, "t1", "k2")
    assert not np.any(rep.collective(off))
    assert not np.any(rep.noise(off))


def test_entangled_basis_order_zero(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    basis = entangled_basis(rep, 0)
    assert len(basis) == 2
    assert all(not bv.is_zero for bv in basis)
    stacked = np.stack([bv.vector for bv in basis], axis=1)
    assert np.allclose(stacked, rep.vacuum_columns)


def test_entangled_basis_flags_zero_vectors(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=2)
    basis = entangled_basis(rep, 2)
    # repeating the same frequency twice kills the flip chain
    L = lab(1, "t1", "k1")
    doubles = [bv for bv in basis if bv.word == (L, L)]
    assert doubles and all(bv.is_zero for bv in doubles)
    # starting from the lower level, one creator dies too
    singles = [bv for bv in basis if bv.word == (L,)]
    by_start = {bv.start_index: bv.is_zero for bv in singles}
    assert by_start[0] is True  # flip-down kills the bottom state
    assert by_start[1] is False


def test_entangled_basis_order_guard(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    with pytest.raises(OrderTooLarge):
        entangled_basis(rep, 5)


def test_oracle_relation_generic(sys013, labels):
    rep = build_oracle(sys013, labels, cutoff=3)
    report = oracle_check_relation(rep, max_order=2, tol=1e-10)
    assert report.passed
    assert report.max_deviation < 1e-10


def test_oracle_relation_non_generic_witness():
    forced = force_system(Spectrum.from_energies([0, 1, 2]))
    labels = LabelSpace(["t1"], ["k1"], {"k1": 1})
    rep = build_oracle(forced, labels, cutoff=2)
    report = oracle_check_relation(rep, max_order=2, tol=1e-10)
    assert not report.passed
    assert report.max_deviation > 1e-6


def test_vacuum_moment_identity(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    assert np.allclose(oracle_vacuum_moment(rep, ()), np.eye(2))


def test_vacuum_moment_contraction(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    L = lab(1, "t1", "k1")
    word = (NoiseFactor(ANNIHILATOR, L), NoiseFactor(CREATOR, L))
    got = oracle_vacuum_moment(rep, word)
    want = TWO_PI_FLOAT * np.diag([0.0, 1.0])
    assert np.abs(got - want).max() < 1e-12


def test_vacuum_moment_word_guard(two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    L = lab(1, "t1", "k1")
    word = (NoiseFactor(CREATOR, L),) * 5
    with pytest.raises(OrderTooLarge):
        oracle_vacuum_moment(rep, word)


def _random_words(rng, corpus, count, max_len):
    words = []
    for _ in range(count):
        n = rng.randint(0, max_len)
        words.append(
            tuple(
                NoiseFactor(rng.choice((CREATOR, ANNIHILATOR)), rng.choice(corpus))
                for _ in range(n)
            )
        )
    return words


def _rainbow_words(rng, corpus, count, max_pairs):
    """Balanced annihilators-then-creators words, mostly label-matched,
    so a good share of them survives the vacuum expectation."""
    words = []
    for _ in range(count):
        m = rng.randint(1, max_pairs)
        creators = [rng.choice(corpus) for _ in range(m)]
        annih = list(reversed(creators))
        if rng.random() < 0.3:
            annih[rng.randrange(m)] = rng.choice(corpus)
        words.append(
            tuple(NoiseFactor(ANNIHILATOR, L) for L in annih)
            + tuple(NoiseFactor(CREATOR, L) for L in creators)
        )
    return words


def test_cross_validate_random_words(sys013, labels):
    rng = random.Random(41)
    corpus = labels.all_labels([1, 2])
    words = _random_words(rng, corpus, 80, 6) + _rainbow_words(rng, corpus, 40, 3)
    reports, summary = cross_validate(sys013, labels, words, omegas=[1, 2], cutoff=3)
    assert summary.passed
    assert summary.max_deviation < 1e-10
    assert len(reports) == 120
    assert any(np.abs(r.symbolic).max() > 1 for r in reports)


def test_cross_validate_catches_mutated_engine(sys013, labels):
    rng = random.Random(43)
    corpus = labels.all_labels([1, 2])
    words = _rainbow_words(rng, corpus, 40, 2)
    # drop the 2pi weight in the symbolic rule set only
    mutant = CCRRules(
        labels,
        contraction=lambda a, c: SCALAR_ONE if a == c and labels.on_shell(a) else SCALAR_ZERO,
    )
    reports, summary = cross_validate(
        sys013, labels, words, omegas=[1, 2], cutoff=3, rules=mutant
    )
    assert not summary.passed


def test_truncation_insensitivity(sys013, labels):
    rng = random.Random(47)
    corpus = labels.all_labels([1, 2])
    words = [w for w in _random_words(rng, corpus, 40, 6)]
    rep3 = build_oracle(sys013, labels, omegas=[1, 2], cutoff=3)
    rep4 = build_oracle(sys013, labels, omegas=[1, 2], cutoff=4)
    for word in words:
        m3 = oracle_vacuum_moment(rep3, word)
        m4 = oracle_vacuum_moment(rep4, word)
        assert np.abs(m3 - m4).max() < 1e-12


def test_dump_matrices_layout(tmp_path, two_level, labels_single):
    rep = build_oracle(two_level, labels_single, cutoff=1)
    header = dump_matrices(rep, tmp_path)
    with open(tmp_path / "header.json") as fh:
        loaded = json.load(fh)
    assert loaded["dim_total"] == rep.dim_total
    name, meta = next(iter(loaded["files"].items()))
    raw = (tmp_path / name).read_bytes()
    mat = np.frombuffer(raw, dtype="<c8").reshape(rep.dim_total, rep.dim_total)
    L = lab(1, "t1", "k1")
    assert np.allclose(mat, rep.collective(L), atol=1e-6)
