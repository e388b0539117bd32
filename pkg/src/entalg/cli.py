"""Batch front-end: load a JSON config, run check suites, emit reports.

Exit codes, never conflated:
  0  every requested check passed
  1  a mathematical violation was found (rejection, residual, mismatch)
  2  malformed input or capacity error

Reports go to standard output as JSON (sorted keys, fixed indentation,
byte-stable across runs); --text switches to a short plaintext summary.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .algebra import ANNIHILATOR, CREATOR, LabelSpace, NoiseFactor
from .config import RunConfig, load_config
from .dyson import depends_only_on_entangled, propagator_block
from .errors import CapacityExceeded, ConfigError, EntalgError, OrderTooLarge
from .exact import as_fraction
from .fockmodule import (
    check_c_squared,
    check_module_relation,
    check_residual_sweep,
    compare_representations,
    enumerate_generator_words,
)
from .oracle import build_oracle, cross_validate, oracle_check_relation
from .system import GenericSystem, force_system, validate_generic

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


def _emit(payload: dict, text: bool) -> None:
    if text:
        click.echo(_text_summary(payload))
    else:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _text_summary(payload: dict) -> str:
    lines = []
    if "error" in payload:
        err = payload["error"]
        return f"ERROR [{err.get('code')}] {err.get('message')}"
    for report in payload.get("results", [payload]):
        status = "PASS" if report.get("passed", not report.get("violations")) else "FAIL"
        name = report.get("check", "report")
        counts = report.get("counts", {})
        count_txt = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        dev = report.get("max_deviation")
        dev_txt = f", max_deviation={dev:.3e}" if isinstance(dev, float) else ""
        lines.append(f"{status} {name} ({count_txt}{dev_txt})")
        for v in report.get("violations", [])[:5]:
            lines.append(f"  witness: {json.dumps(v, sort_keys=True)}")
    return "\n".join(lines)


def _fail_input(exc: Exception, text: bool) -> None:
    code = getattr(exc, "code", "ERROR")
    details = getattr(exc, "details", {})
    _emit({"error": {"code": code, "message": str(exc), "details": details}}, text)
    sys.exit(EXIT_INPUT)


def _load(config_path: str, text: bool) -> RunConfig:
    try:
        return load_config(config_path)
    except ConfigError as exc:
        _fail_input(exc, text)


def _system_or_exit(config: RunConfig, force: bool, text: bool):
    result = validate_generic(config.spectrum)
    if isinstance(result, GenericSystem):
        return result
    if force:
        try:
            return force_system(config.spectrum)
        except ValueError as exc:
            _fail_input(ConfigError(str(exc)), text)
    _emit({"check": "validate", **result.to_json()}, text)
    sys.exit(EXIT_VIOLATION)


def _corpus_omegas(system: GenericSystem, config: RunConfig, text: bool):
    if config.corpus_omegas is None:
        return list(system.bohr_values)
    known = set(system.bohr_values)
    for w in config.corpus_omegas:
        if w not in known:
            _fail_input(
                ConfigError(f"label_frequencies entry {w} is not a Bohr frequency"),
                text,
            )
    return list(config.corpus_omegas)


def _finish(reports: list, text: bool, check: str) -> None:
    passed = all(r.passed for r in reports)
    payload = {
        "check": check,
        "passed": passed,
        "results": [r.to_json() for r in reports],
    }
    _emit(payload, text)
    sys.exit(EXIT_OK if passed else EXIT_VIOLATION)


@click.group()
def main():
    """Collective-operator algebra checks with a numeric oracle."""


@main.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--text", is_flag=True, help="plaintext summary instead of JSON")
def cmd_validate(config_path, text):
    """Decide genericity of the configured spectrum."""
    config = _load(config_path, text)
    result = validate_generic(config.spectrum)
    if isinstance(result, GenericSystem):
        _emit({"check": "validate", **result.summary()}, text)
        sys.exit(EXIT_OK)
    _emit({"check": "validate", **result.to_json()}, text)
    sys.exit(EXIT_VIOLATION)


@main.command("relations")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--max-order", type=int, default=None, help="entangled vector order bound")
@click.option("--nmax", type=int, default=None, help="oracle occupation cutoff")
@click.option("--tol", type=float, default=None, help="oracle residual tolerance")
@click.option("--force", is_flag=True, help="run on a non-generic spectrum (demo)")
@click.option("--text", is_flag=True)
def cmd_relations(config_path, max_order, nmax, tol, force, text):
    """Verify the collective-pair relations symbolically and numerically."""
    config = _load(config_path, text)
    system = _system_or_exit(config, force, text)
    omegas = _corpus_omegas(system, config, text)
    max_order = max_order if max_order is not None else config.max_order
    tol = tol if tol is not None else config.tol("relation", 1e-10)
    nmax = nmax if nmax is not None else config.nmax
    reports = [check_c_squared(system, config.labels)]
    reports.append(
        check_module_relation(
            system, config.labels, omegas=omegas, max_order=max_order, force=force
        )
    )
    reports.append(
        check_residual_sweep(
            system,
            config.labels,
            omegas=omegas,
            max_order=min(max_order, 2),
            force=force,
        )
    )
    try:
        rep = build_oracle(
            system, config.labels, omegas=omegas, cutoff=nmax, capacity=config.capacity
        )
        reports.append(oracle_check_relation(rep, max_order=max_order, tol=tol))
    except (CapacityExceeded, OrderTooLarge) as exc:
        _fail_input(exc, text)
    _finish(reports, text, "relations")


def _parse_word(spec: str, labels: LabelSpace, omegas):
    factors = []
    allowed = set(omegas)
    for token in spec.split():
        head, _, rest = token.partition(":")
        if head not in ("c", "c*") or not rest:
            raise ConfigError(f"malformed word token {token!r}; expected c:w,t,k")
        parts = rest.split(",")
        if len(parts) != 3:
            raise ConfigError(f"malformed word token {token!r}; expected c:w,t,k")
        omega_txt, t, k = parts
        try:
            omega = as_fraction(omega_txt)
        except (ValueError, ZeroDivisionError, TypeError):
            raise ConfigError(f"malformed frequency in word token {token!r}")
        if omega not in allowed:
            raise ConfigError(
                f"word frequency {omega} is outside the configured corpus"
            )
        label = labels.label(omega, t.strip(), k.strip())
        kind = ANNIHILATOR if head == "c" else CREATOR
        factors.append(NoiseFactor(kind, label))
    return tuple(factors)


@main.command("moments")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--word", "words_spec", multiple=True, help="explicit word, e.g. 'c:1,t1,k1 c*:1,t1,k1'")
@click.option("--max-word-len", type=int, default=None, help="enumerate words up to this length")
@click.option("--nmax", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--text", is_flag=True)
def cmd_moments(config_path, words_spec, max_word_len, nmax, tol, text):
    """Symbolic and oracle vacuum moments, word by word."""
    config = _load(config_path, text)
    system = _system_or_exit(config, False, text)
    omegas = _corpus_omegas(system, config, text)
    tol = tol if tol is not None else config.tol("moment", 1e-10)
    nmax = nmax if nmax is not None else config.nmax
    meta = {"mode": "explicit"}
    try:
        if words_spec:
            words = [_parse_word(spec, config.labels, omegas) for spec in words_spec]
        else:
            bound = max_word_len if max_word_len is not None else config.max_word_len
            words, meta = enumerate_generator_words(config.labels, omegas, bound)
    except (ConfigError, EntalgError) as exc:
        _fail_input(exc, text)
    try:
        rows, summary = cross_validate(
            system,
            config.labels,
            words,
            omegas=omegas,
            cutoff=nmax,
            tol=tol,
        )
    except EntalgError as exc:
        _fail_input(exc, text)
    summary.parameters["word_selection"] = meta
    payload = {
        "check": "moments",
        "passed": summary.passed,
        "results": [summary.to_json()],
        "rows": [row.to_json() for row in rows],
    }
    _emit(payload, text)
    sys.exit(EXIT_OK if summary.passed else EXIT_VIOLATION)


@main.command("compare-reps")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--max-word-len", type=int, default=None)
@click.option("--text", is_flag=True)
def cmd_compare_reps(config_path, max_word_len, text):
    """Exact equality of the three representations on all bounded words."""
    config = _load(config_path, text)
    system = _system_or_exit(config, False, text)
    omegas = _corpus_omegas(system, config, text)
    bound = max_word_len if max_word_len is not None else config.max_word_len
    report = compare_representations(system, config.labels, omegas=omegas, max_len=bound)
    _finish([report], text, "compare_reps")


@main.command("dyson")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--max-order", type=int, default=None, help="highest expansion order")
@click.option("--nmax", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--text", is_flag=True)
def cmd_dyson(config_path, max_order, nmax, tol, text):
    """Per-order propagator blocks, symbolic vs oracle, plus the
    structural dependency flag."""
    config = _load(config_path, text)
    if config.interaction is None:
        _fail_input(ConfigError("config has no interaction section"), text)
    system = _system_or_exit(config, False, text)
    labels = config.dyson_labels
    spec = config.interaction
    n_max = max_order if max_order is not None else config.dyson_order
    tol = tol if tol is not None else config.tol("dyson", 1e-8)
    nmax = nmax if nmax is not None else config.nmax
    try:
        spec.validate_against(system, labels)
        rep = build_oracle(system, labels, cutoff=nmax, capacity=config.capacity)
        structural = depends_only_on_entangled(system, labels, spec, n_max)
        orders = []
        violations = []
        max_dev = 0.0
        for n in range(n_max + 1):
            term, sym, orc = propagator_block(system, labels, spec, n, rep)
            dev = float(abs(sym - orc).max())
            max_dev = max(max_dev, dev)
            orders.append(
                {
                    "order": n,
                    "symbolic": [[[x.real, x.imag] for x in row] for row in sym],
                    "oracle": [[[x.real, x.imag] for x in row] for row in orc],
                    "deviation": dev,
                    "terms": term.term_count(),
                }
            )
            if dev > tol:
                violations.append({"order": n, "deviation": dev})
        if not structural:
            violations.append({"structural": "non-collective factor found"})
    except (CapacityExceeded, OrderTooLarge, ValueError) as exc:
        _fail_input(exc if isinstance(exc, EntalgError) else ConfigError(str(exc)), text)
    payload = {
        "check": "dyson",
        "passed": not violations,
        "depends_only_on_entangled": structural,
        "orders": orders,
        "max_deviation": max_dev,
        "violations": violations,
    }
    _emit(payload, text)
    sys.exit(EXIT_OK if not violations else EXIT_VIOLATION)


if __name__ == "__main__":
    main()
