"""Run configuration: one JSON document drives every CLI command.

Schema (all energies, frequencies, dispersions and couplings are exact
rational strings; couplings are [re, im] pairs):

    {
      "spectrum": {"levels": [{"label": "e0", "energy": "0"}, ...]},
      "labels": {"times": [...], "momenta": [...],
                 "dispersion": {"k1": "1", ...}},
      "label_frequencies": ["1", "2"],          # optional corpus subset
      "interaction": {                          # optional
        "couplings": {"1,k1": ["1", "0"], ...},
        "time_grid": {"points": 3, "dt": "1/2"}
      },
      "oracle": {"nmax": 3, "capacity": 20000},
      "bounds": {"max_word_len": 4, "max_order": 2, "dyson_order": 3},
      "tolerances": {"relation": 1e-10, "moment": 1e-10, "dyson": 1e-8}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import LabelSpace
from .dyson import InteractionSpec
from .errors import ConfigError
from .exact import CRat, as_fraction
from .system import Spectrum


@dataclass
class RunConfig:
    spectrum: Spectrum
    labels: LabelSpace
    corpus_omegas: list[Fraction] | None = None
    interaction: InteractionSpec | None = None
    dyson_labels: LabelSpace | None = None
    nmax: int = 3
    capacity: int = 20_000
    max_word_len: int = 4
    max_order: int = 2
    dyson_order: int = 3
    tolerances: dict = field(default_factory=dict)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _positive_int(doc: dict, key: str, default: int) -> int:
    value = doc.get(key, default)
    if not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{key} must be a positive integer, got {value!r}")
    return value


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    try:
        spectrum = Spectrum.from_json(doc["spectrum"])
    except KeyError:
        raise ConfigError("config is missing the 'spectrum' section")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad spectrum: {exc}")

    try:
        lab_doc = doc["labels"]
        labels = LabelSpace(
            lab_doc["times"], lab_doc["momenta"], lab_doc["dispersion"]
        )
    except KeyError as exc:
        raise ConfigError(f"labels section incomplete: missing {exc}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad labels section: {exc}")

    corpus = None
    if "label_frequencies" in doc:
        try:
            corpus = [as_fraction(w) for w in doc["label_frequencies"]]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad label_frequencies: {exc}")

    interaction = None
    dyson_labels = None
    if "interaction" in doc:
        inter = doc["interaction"]
        try:
            grid = inter["time_grid"]
            points = _positive_int(grid, "points", 3)
            dt = as_fraction(grid["dt"])
            times = tuple(f"t{i}" for i in range(points))
            couplings = {}
            for key, pair in inter["couplings"].items():
                omega_txt, _, k = key.partition(",")
                if not k:
                    raise ConfigError(
                        f"coupling key must look like 'omega,k': {key!r}"
                    )
                couplings[(as_fraction(omega_txt), k.strip())] = CRat.parse(pair)
            interaction = InteractionSpec.build(couplings, times, dt)
            dyson_labels = LabelSpace(times, labels.momenta, labels.dispersion)
            for _, k in couplings:
                if k not in labels.momenta:
                    raise ConfigError(f"coupling references undeclared momentum {k!r}")
        except ConfigError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad interaction section: {exc}")

    oracle_doc = doc.get("oracle", {})
    bounds = doc.get("bounds", {})
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances must be an object")
    for name, value in tolerances.items():
        if not isinstance(value, (int, float)) or value <= 0:
            raise ConfigError(f"tolerance {name!r} must be positive, got {value!r}")

    return RunConfig(
        spectrum=spectrum,
        labels=labels,
        corpus_omegas=corpus,
        interaction=interaction,
        dyson_labels=dyson_labels,
        nmax=_positive_int(oracle_doc, "nmax", 3),
        capacity=_positive_int(oracle_doc, "capacity", 20_000),
        max_word_len=_positive_int(bounds, "max_word_len", 4),
        max_order=_positive_int(bounds, "max_order", 2),
        dyson_order=_positive_int(bounds, "dyson_order", 3),
        tolerances=tolerances,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return parse_config(doc)
