"""Spectra, Bohr frequencies, genericity gate, flip operators."""

import itertools
import random
from fractions import Fraction

import pytest

from entalg.errors import UnknownFrequency
from entalg.exact import SystemMatrix
from entalg.system import (
    GenericSystem,
    RejectionReport,
    Spectrum,
    enumerate_bohr_frequencies,
    force_system,
    sigma_minus,
    sigma_plus,
    validate_generic,
)


def brute_force_groups(energies):
    """Independent oracle: group ordered pairs by positive difference."""
    groups = {}
    indexed = sorted((Fraction(e), f"e{i}") for i, e in enumerate(energies))
    for (elo, lo), (ehi, hi) in itertools.permutations(indexed, 2):
        if ehi > elo:
            groups.setdefault(ehi - elo, []).append((lo, hi))
    return {v: sorted(ps) for v, ps in groups.items()}


def test_enumerate_two_levels():
    spec = Spectrum.from_energies([0, 1])
    assert enumerate_bohr_frequencies(spec) == [(Fraction(1), [("e0", "e1")])]


def test_enumerate_three_equally_spaced():
    spec = Spectrum.from_energies([0, 1, 2])
    groups = dict(enumerate_bohr_frequencies(spec))
    assert len(groups[Fraction(1)]) == 2
    assert len(groups[Fraction(2)]) == 1


def test_enumerate_0_1_3_7_against_brute_force():
    energies = [0, 1, 3, 7]
    got = enumerate_bohr_frequencies(Spectrum.from_energies(energies))
    want = brute_force_groups(energies)
    assert dict(got) == want
    assert [v for v, _ in got] == sorted(want)
    assert {v for v, _ in got} == {Fraction(x) for x in (1, 2, 3, 4, 6, 7)}
    assert all(len(ps) == 1 for _, ps in got)


def test_enumerate_values_ascending_random():
    rng = random.Random(3)
    for _ in range(30):
        energies = rng.sample(range(-20, 60), rng.randint(1, 7))
        got = enumerate_bohr_frequencies(Spectrum.from_energies(energies))
        assert [v for v, _ in got] == sorted(v for v, _ in got)
        assert dict(got) == brute_force_groups(energies)


def test_validate_two_level():
    system = validate_generic(Spectrum.from_energies([0, 1]))
    assert isinstance(system, GenericSystem)
    assert set(system.frequencies) == {Fraction(1)}


def test_validate_rejects_harmonic_oscillator():
    report = validate_generic(Spectrum.from_energies(range(6)))
    assert isinstance(report, RejectionReport)
    dup = [r for r in report.reasons if r["code"] == "DUPLICATE_BOHR_FREQUENCY"]
    by_value = {r["value"]: r for r in dup}
    assert by_value["1"]["multiplicity"] == 5
    assert len(by_value["1"]["pairs"]) == 5


def test_validate_accepts_0_1_3_7():
    system = validate_generic(Spectrum.from_energies([0, 1, 3, 7]))
    assert isinstance(system, GenericSystem)
    assert len(system.frequencies) == 6
    want = brute_force_groups([0, 1, 3, 7])
    assert set(system.frequencies) == set(want)


def test_validate_rejects_degenerate_energy():
    report = validate_generic(Spectrum.from_pairs([("a", 0), ("b", 0), ("c", 1)]))
    assert isinstance(report, RejectionReport)
    assert "DEGENERATE_SPECTRUM" in report.codes
    degen = [r for r in report.reasons if r["code"] == "DEGENERATE_SPECTRUM"]
    assert degen[0]["labels"] == ["a", "b"]


def test_single_level_accepted_vacuously():
    system = validate_generic(Spectrum.from_energies([5]))
    assert isinstance(system, GenericSystem)
    assert system.frequencies == {}


def test_accepted_systems_have_maximal_frequency_count():
    # all pairwise differences distinct forces |F| = d(d-1)/2
    for energies in ([0], [0, 1], [0, 1, 3], [0, 1, 3, 7], [0, 1, 3, 7, 12]):
        result = validate_generic(Spectrum.from_energies(energies))
        if isinstance(result, GenericSystem):
            d = result.dimension
            assert len(result.frequencies) == d * (d - 1) // 2


def test_rejection_stable_under_permutation():
    rng = random.Random(17)
    for _ in range(40):
        energies = [Fraction(rng.randint(0, 12), rng.randint(1, 3)) for _ in range(rng.randint(2, 6))]
        pairs = [(f"L{i}", e) for i, e in enumerate(energies)]
        baseline = isinstance(validate_generic(Spectrum.from_pairs(pairs)), GenericSystem)
        for _ in range(5):
            rng.shuffle(pairs)
            outcome = isinstance(validate_generic(Spectrum.from_pairs(pairs)), GenericSystem)
            assert outcome == baseline


def test_duplicate_labels_rejected_at_construction():
    with pytest.raises(ValueError):
        Spectrum.from_pairs([("x", 0), ("x", 1)])


def test_spectrum_json_round_trip():
    doc = {"levels": [{"label": "g", "energy": "0"}, {"label": "u", "energy": "1/2"}]}
    spec = Spectrum.from_json(doc)
    assert spec.energies() == (Fraction(0), Fraction(1, 2))
    with pytest.raises(ValueError):
        Spectrum.from_json({"levels": [{"label": "g"}]})


def test_sigma_two_level():
    system = validate_generic(Spectrum.from_energies([0, 1]))
    up = sigma_plus(system, 1)
    assert up == SystemMatrix.single(2, 1, 0)
    assert sigma_minus(system, 1) == SystemMatrix.single(2, 0, 1)
    assert up @ up == SystemMatrix.zero(2)


def test_sigma_projector_properties():
    system = validate_generic(Spectrum.from_energies([0, 1, 3, 7]))
    for omega in system.frequencies:
        up = sigma_plus(system, omega)
        down = sigma_minus(system, omega)
        assert down == up.adjoint()
        proj = up @ down
        assert proj @ proj == proj
        assert proj.adjoint() == proj
        assert proj.trace().constant_term() == 1


def test_sigma_level_mapping_0_1_3():
    system = validate_generic(Spectrum.from_energies([0, 1, 3]))
    # value 2 comes from the (energy 1 -> energy 3) pair
    down = sigma_minus(system, 2)
    assert down == SystemMatrix.single(3, 1, 2)
    # flip-down annihilates the lower state of its own pair
    lower_projector = SystemMatrix.single(3, 1, 1)
    assert (down @ lower_projector).is_zero()


def test_sigma_unknown_frequency():
    system = validate_generic(Spectrum.from_energies([0, 1]))
    with pytest.raises(UnknownFrequency):
        sigma_plus(system, 2)


def test_force_system_sums_pairs():
    forced = force_system(Spectrum.from_energies([0, 1, 2]))
    assert forced.generic is False
    down = sigma_minus(forced, 1)
    assert down == SystemMatrix(3, {(0, 1): 1, (1, 2): 1})
    # equal spacing makes the square of the flip-down nonzero
    assert (down @ down) == SystemMatrix.single(3, 0, 2)


def test_force_system_on_generic_spectrum_is_generic():
    forced = force_system(Spectrum.from_energies([0, 1, 3]))
    assert forced.generic is True


def test_force_system_refuses_degenerate_energies():
    with pytest.raises(ValueError):
        force_system(Spectrum.from_pairs([("a", 0), ("b", 0)]))
