"""Discrete Hamiltonian spectra, genericity, and flip operators.

A spectrum is generic when (i) all energies are distinct and (ii) every
positive energy difference ("Bohr frequency") is realized by exactly one
ordered level pair.  Genericity is decided by exact rational comparison,
never by a floating tolerance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import UnknownFrequency
from .exact import SystemMatrix, as_fraction


class Level(NamedTuple):
    label: str
    energy: Fraction


class BohrFrequency(NamedTuple):
    value: Fraction
    lower: str  # label of the state the paper writes |1_w>
    upper: str  # label of |2_w>


@dataclass(frozen=True)
class Spectrum:
    """An ordered list of labeled energy levels.

    Canonical order is by increasing energy (ties kept, label-sorted, for
    degeneracy diagnosis).  Labels must be pairwise distinct.
    """

    levels: tuple[Level, ...]

    def __post_init__(self):
        labels = [lv.label for lv in self.levels]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"duplicate level labels: {dupes}")
        ordered = tuple(sorted(self.levels, key=lambda lv: (lv.energy, lv.label)))
        object.__setattr__(self, "levels", ordered)

    @classmethod
    def from_pairs(cls, pairs) -> "Spectrum":
        """Build from (label, energy) pairs; energies parsed as exact rationals."""
        return cls(tuple(Level(str(lab), as_fraction(en)) for lab, en in pairs))

    @classmethod
    def from_energies(cls, energies) -> "Spectrum":
        """Build with auto-generated labels e0, e1, ... in input order."""
        return cls.from_pairs((f"e{i}", en) for i, en in enumerate(energies))

    @classmethod
    def from_json(cls, doc) -> "Spectrum":
        """Parse {"levels": [{"label": ..., "energy": "p/q"}, ...]}."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            levels = doc["levels"]
            return cls.from_pairs((entry["label"], entry["energy"]) for entry in levels)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spectrum document: {exc}") from exc

    def __len__(self):
        return len(self.levels)

    def energies(self) -> tuple[Fraction, ...]:
        return tuple(lv.energy for lv in self.levels)


def enumerate_bohr_frequencies(spectrum: Spectrum) -> list[tuple[Fraction, list[tuple[str, str]]]]:
    """All positive pairwise differences, grouped by value, values ascending.

    Each group lists the ordered (lower_label, upper_label) pairs realizing
    that difference.
    """
    groups: dict[Fraction, list[tuple[str, str]]] = {}
    levels = spectrum.levels
    for i, lo in enumerate(levels):
        for hi in levels[i + 1 :]:
            diff = hi.energy - lo.energy
            if diff > 0:
                groups.setdefault(diff, []).append((lo.label, hi.label))
    return [(value, sorted(groups[value])) for value in sorted(groups)]


@dataclass(frozen=True)
class RejectionReport:
    """Evidence that a spectrum is not generic.  Not a fault: a result."""

    reasons: tuple[dict, ...]

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(r["code"] for r in self.reasons)

    def to_json(self) -> dict:
        return {"status": "rejected", "reasons": [dict(r) for r in self.reasons]}


@dataclass(frozen=True)
class GenericSystem:
    """A validated spectrum with its Bohr-frequency bookkeeping.

    ``transitions`` maps each positive Bohr value to the ordered level
    pairs realizing it; for a generic system every tuple has length one
    and ``frequencies`` (the paper's set F) is the value -> unique-pair
    map.  ``generic`` is False only for systems built by ``force_system``
    for counterexample runs.
    """

    spectrum: Spectrum
    dimension: int
    transitions: tuple[tuple[Fraction, tuple[BohrFrequency, ...]], ...]
    generic: bool = True

    @property
    def frequencies(self) -> dict[Fraction, BohrFrequency]:
        return {value: pairs[0] for value, pairs in self.transitions}

    @property
    def bohr_values(self) -> tuple[Fraction, ...]:
        return tuple(value for value, _ in self.transitions)

    def pairs_for(self, omega: Fraction) -> tuple[BohrFrequency, ...]:
        omega = as_fraction(omega)
        for value, pairs in self.transitions:
            if value == omega:
                return pairs
        raise UnknownFrequency(
            f"{omega} is not a Bohr frequency of this system", omega=str(omega)
        )

    def index_of(self, label: str) -> int:
        for i, lv in enumerate(self.spectrum.levels):
            if lv.label == label:
                return i
        raise KeyError(label)

    def summary(self) -> dict:
        return {
            "status": "ok" if self.generic else "forced",
            "dimension": self.dimension,
            "frequencies": [
                {
                    "value": str(value),
                    "pairs": [[p.lower, p.upper] for p in pairs],
                }
                for value, pairs in self.transitions
            ],
        }


def _build_system(spectrum: Spectrum, generic: bool) -> GenericSystem:
    groups = enumerate_bohr_frequencies(spectrum)
    transitions = tuple(
        (value, tuple(BohrFrequency(value, lo, hi) for lo, hi in pairs))
        for value, pairs in groups
    )
    return GenericSystem(
        spectrum=spectrum,
        dimension=len(spectrum),
        transitions=transitions,
        generic=generic,
    )


def validate_generic(spectrum: Spectrum):
    """Decide genericity; return a GenericSystem or a RejectionReport.

    The report lists every degenerate energy and every Bohr value with
    multiplicity > 1 together with the offending pairs.
    """
    if len(spectrum) == 0:
        raise ValueError("spectrum must be non-empty")
    reasons = []
    by_energy: dict[Fraction, list[str]] = {}
    for lv in spectrum.levels:
        by_energy.setdefault(lv.energy, []).append(lv.label)
    for energy in sorted(by_energy):
        labels = by_energy[energy]
        if len(labels) > 1:
            reasons.append(
                {
                    "code": "DEGENERATE_SPECTRUM",
                    "energy": str(energy),
                    "labels": sorted(labels),
                }
            )
    for value, pairs in enumerate_bohr_frequencies(spectrum):
        if len(pairs) > 1:
            reasons.append(
                {
                    "code": "DUPLICATE_BOHR_FREQUENCY",
                    "value": str(value),
                    "multiplicity": len(pairs),
                    "pairs": [list(p) for p in pairs],
                }
            )
    if reasons:
        return RejectionReport(tuple(reasons))
    return _build_system(spectrum, generic=True)


def force_system(spectrum: Spectrum) -> GenericSystem:
    """Build operators for a possibly non-generic spectrum.

    Flip operators become sums over every level pair realizing a Bohr
    value, which is what a dipole coupling produces when condition (ii)
    fails.  Used only for counterexample demonstrations (--force).
    """
    if len(spectrum) == 0:
        raise ValueError("spectrum must be non-empty")
    result = validate_generic(spectrum)
    if isinstance(result, GenericSystem):
        return result
    if any(r["code"] == "DEGENERATE_SPECTRUM" for r in result.reasons):
        raise ValueError("cannot force a spectrum with degenerate energies")
    return _build_system(spectrum, generic=False)


def sigma_plus(system: GenericSystem, omega) -> SystemMatrix:
    """The flip-up operator |2_w><1_w| in the energy-ordered basis.

    For a forced non-generic system this sums over all pairs with the
    given Bohr value.
    """
    entries = {}
    for pair in system.pairs_for(omega):
        entries[(system.index_of(pair.upper), system.index_of(pair.lower))] = 1
    return SystemMatrix(system.dimension, entries)


def sigma_minus(system: GenericSystem, omega) -> SystemMatrix:
    """The flip-down operator, adjoint of ``sigma_plus``."""
    return sigma_plus(system, omega).adjoint()
