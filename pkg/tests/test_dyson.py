"""Interaction Hamiltonian, expansion terms, structural dependency scan."""

import math
from fractions import Fraction

import numpy as np
import pytest

from entalg.algebra import LabelSpace, NoiseLabel, vacuum_expectation
from entalg.dyson import (
    GeneratorPolynomial,
    InteractionSpec,
    depends_only_on_entangled,
    dyson_term,
    hamiltonian_at,
    oracle_dyson_matrix,
    propagator_matrix_elements,
    time_tuples,
)
from entalg.errors import OrderTooLarge, UnknownLabel
from entalg.exact import CRat, Scalar
from entalg.oracle import build_oracle
from entalg.system import Spectrum, validate_generic


@pytest.fixture(scope="module")
def two_level():
    return validate_generic(Spectrum.from_energies([0, 1]))


@pytest.fixture(scope="module")
def grid_labels():
    return LabelSpace(["t0", "t1", "t2"], ["k1"], {"k1": 1})


@pytest.fixture(scope="module")
def spin_boson(grid_labels):
    return InteractionSpec.build(
        {(Fraction(1), "k1"): CRat(1)}, grid_labels.times, Fraction(1, 2)
    )


def test_interaction_spec_validation(two_level, grid_labels, spin_boson):
    spin_boson.validate_against(two_level, grid_labels)
    incomplete = InteractionSpec.build({}, grid_labels.times, 1)
    with pytest.raises(ValueError):
        incomplete.validate_against(two_level, grid_labels)
    with pytest.raises(ValueError):
        InteractionSpec.build({(1, "k1"): 1}, ["t0", "t0"], 1)
    with pytest.raises(ValueError):
        InteractionSpec.build({(1, "k1"): 1}, ["t0"], 0)


def test_hamiltonian_zero_couplings(two_level, grid_labels):
    spec = InteractionSpec.build({(Fraction(1), "k1"): CRat(0)}, grid_labels.times, 1)
    assert hamiltonian_at(two_level, grid_labels, spec, "t0").is_zero()


def test_hamiltonian_spin_boson_form(two_level, grid_labels, spin_boson):
    h = hamiltonian_at(two_level, grid_labels, spin_boson, "t1")
    L = NoiseLabel(Fraction(1), "t1", "k1")
    assert h.terms == {
        (("c", L),): Scalar.of(1),
        (("c*", L),): Scalar.of(1),
    }


def test_hamiltonian_self_adjoint(two_level, grid_labels):
    # random-ish rational couplings: adjoint equals itself canonically
    spec = InteractionSpec.build(
        {(Fraction(1), "k1"): CRat("3/7", "-2/5")}, grid_labels.times, 1
    )
    h = hamiltonian_at(two_level, grid_labels, spec, "t0")
    poly = h.to_polynomial(two_level, grid_labels)
    assert poly.adjoint() == poly


def test_hamiltonian_bad_time(two_level, grid_labels, spin_boson):
    with pytest.raises(UnknownLabel):
        hamiltonian_at(two_level, grid_labels, spin_boson, "never")


def test_time_tuples_counts(spin_boson):
    # strictly decreasing tuples over an m-point window: C(m, n)
    for n in range(5):
        tuples = time_tuples(spin_boson, n, "t2")
        assert len(tuples) == math.comb(3, n)
        pos = {t: i for i, t in enumerate(spin_boson.times)}
        for combo in tuples:
            assert all(pos[a] > pos[b] for a, b in zip(combo, combo[1:]))
    assert set(time_tuples(spin_boson, 1, "t1")) == {("t1",), ("t0",)}
    assert set(time_tuples(spin_boson, 2, "t2")) == {
        ("t1", "t0"),
        ("t2", "t0"),
        ("t2", "t1"),
    }


def test_dyson_order_zero_is_identity(two_level, grid_labels, spin_boson):
    u0 = dyson_term(two_level, grid_labels, spin_boson, 0)
    assert u0.terms == {(): Scalar.of(1)}


def test_dyson_order_one_shape(two_level, grid_labels, spin_boson):
    u1 = dyson_term(two_level, grid_labels, spin_boson, 1, "t2")
    # 3 times x 2 generators, each scaled by -i * dt
    assert u1.term_count() == 6
    want = Scalar.of(CRat(0, Fraction(-1, 2)))
    assert all(s == want for s in u1.terms.values())


def test_dyson_term_bound(two_level, grid_labels, spin_boson):
    with pytest.raises(OrderTooLarge):
        dyson_term(two_level, grid_labels, spin_boson, 3, max_terms=5)


def test_depends_only_on_entangled(two_level, grid_labels, spin_boson):
    assert depends_only_on_entangled(two_level, grid_labels, spin_boson, 3)


def test_injected_raw_factor_detected(two_level):
    poly = GeneratorPolynomial(
        2, {(("b", NoiseLabel(Fraction(1), "t0", "k1")),): Scalar.of(1)}
    )
    assert not poly.entangled_only()
    with pytest.raises(ValueError):
        poly.to_polynomial(two_level, LabelSpace(["t0"], ["k1"], {"k1": 1}))


def test_odd_orders_vanish_symbolically(two_level, grid_labels, spin_boson):
    for n in (1, 3):
        term = dyson_term(two_level, grid_labels, spin_boson, n)
        exp = vacuum_expectation(term.to_polynomial(two_level, grid_labels), grid_labels)
        assert exp.is_zero()


def test_propagator_orders_match_oracle(two_level, grid_labels, spin_boson):
    rep = build_oracle(two_level, grid_labels, cutoff=3)
    report = propagator_matrix_elements(
        two_level,
        grid_labels,
        spin_boson,
        ["0", "1"],
        ["0", "1"],
        n_max=3,
        rep=rep,
    )
    assert report.passed
    assert report.max_deviation < 1e-8
    orders = report.parameters["orders"]
    assert orders[0]["symbolic"] == [1.0, 0.0]
    # with strictly decreasing tuples, contractions need equal time atoms,
    # so every positive order has vanishing vacuum-to-vacuum element; the
    # oracle reproduces that independently
    for entry in orders[1:]:
        assert entry["symbolic"] == [0.0, 0.0]
        assert abs(complex(*entry["oracle"])) < 1e-12
    assert report.parameters["unitarity_defect_partial_sum"] > 0


def test_first_order_norm_matches_oracle(two_level, grid_labels, spin_boson):
    # <U1 psi, U1 psi> has equal-time contractions and is nonzero; frozen
    # value: dt^2 * (number of grid points) * 2pi * P_upper compressed on
    # the upper state = 3 * 2pi / 4
    rep = build_oracle(two_level, grid_labels, cutoff=3)
    u1 = dyson_term(two_level, grid_labels, spin_boson, 1).to_polynomial(
        two_level, grid_labels
    )
    exp = vacuum_expectation(u1.adjoint() @ u1, grid_labels)
    want = Scalar.of(CRat("3/4"), 1)
    assert exp.entry(1, 1) == want
    # oracle side: same sandwich with dense matrices
    u1_mat = oracle_dyson_matrix(rep, spin_boson, 1, "t2")
    upper = rep.vacuum_columns[:, 1]
    got = np.conj(u1_mat @ upper) @ (u1_mat @ upper)
    assert abs(got - want.to_complex()) < 1e-10


def test_order_zero_inner_product(two_level, grid_labels, spin_boson):
    rep = build_oracle(two_level, grid_labels, cutoff=2)
    report = propagator_matrix_elements(
        two_level, grid_labels, spin_boson, ["1", "0"], ["0", "1"], 0, rep
    )
    assert report.parameters["orders"][0]["symbolic"] == [0.0, 0.0]


def test_oracle_dyson_matrix_order_zero(two_level, grid_labels, spin_boson):
    rep = build_oracle(two_level, grid_labels, cutoff=1)
    assert np.allclose(
        oracle_dyson_matrix(rep, spin_boson, 0, "t2"), np.eye(rep.dim_total)
    )
