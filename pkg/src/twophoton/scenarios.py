"""Preset scenarios: build a bundled circuit, run engine and oracle, score observables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Mapping, Sequence

from .circuit import apply_circuit, compose_transfer
from .circuit_format import BuiltCircuit, CircuitSpec, parse_circuit
from .fock import (
    FockDistribution,
    ModeId,
    OperatorState,
    equal_up_to_phase,
    inner,
    normalize,
    state_from_photons,
    to_fock,
)
from .observables import (
    CountTable,
    absorbed_probability,
    count_table,
    distinguishable_joint,
    forward_two_photon_probability,
)
from .oracle import oracle_distribution, phase_aligned_max_deviation

#: pass/fail tolerance for every preset expectation
CHECK_TOL = 1e-9


class ScenarioError(RuntimeError):
    pass


class UnknownScenarioError(KeyError):
    pass


@dataclass
class Evaluation:
    """Everything a scenario needs to compute its quantities."""

    built: BuiltCircuit
    output: OperatorState
    distribution: FockDistribution
    counts: CountTable
    oracle_deviation: float

    @property
    def params(self) -> dict[str, float]:
        return {k: v.real for k, v in self.built.params.items()}

    def distinguishable(self) -> CountTable:
        transfer = compose_transfer(self.built.circuit)
        return distinguishable_joint(transfer, self.built.photons, self.built.detectors)


@dataclass
class ScenarioReport:
    scenario: str
    params: dict[str, float]
    results: dict[str, float]
    expected: dict[str, float]
    distribution: FockDistribution
    absorbed: float
    tolerance: float = CHECK_TOL

    @property
    def checks(self) -> dict[str, bool]:
        return {k: abs(self.results[k] - v) <= self.tolerance for k, v in self.expected.items()}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [f"{k}: got {self.results[k]:.12g}, expected {self.expected[k]:.12g}"
                for k, ok in self.checks.items() if not ok]


@dataclass(frozen=True)
class Scenario:
    name: str
    preset: str
    summary: str
    evaluate: Callable[[Evaluation], dict[str, float]]
    expected: Callable[[Mapping[str, float]], dict[str, float]] = field(default=lambda p: {})

    def spec(self) -> CircuitSpec:
        return parse_circuit(preset_text(self.preset))


def preset_text(filename: str) -> str:
    return resources.files("twophoton.presets").joinpath(filename).read_text()


def preset_files() -> list[str]:
    return sorted(p.name for p in resources.files("twophoton.presets").iterdir() if p.name.endswith(".circ"))


def _yfactor(T: float) -> float:
    return 2 * T * (1 - T)


def _split_counts(ev: Evaluation) -> dict[str, float]:
    c = ev.counts
    return {
        "p_both_d1": c.table.get((2, 0), 0.0),
        "p_split": c.coincidence("d1", "d2"),
        "p_both_d2": c.table.get((0, 2), 0.0),
    }


def _split_stats(ev: Evaluation) -> dict[str, float]:
    return {**_split_counts(ev), "g2_cross": ev.counts.cross_g2("d1", "d2")}


def _fock_n(ev: Evaluation) -> dict[str, float]:
    d1 = ev.built.detector("d1")
    before = count_table(ev.built.input_state, [d1])
    return {
        "mean_d1": ev.counts.mean("d1"),
        "mean_d2": ev.counts.mean("d2"),
        "g2_cross": ev.counts.cross_g2("d1", "d2"),
        "g2_single_no_bs": before.single_g2("d1"),
    }


def _fock_n_expected(p):
    n = p["n"]
    return {"mean_d1": n / 2, "mean_d2": n / 2, "g2_cross": 1 - 1 / n, "g2_single_no_bs": 1 - 1 / n}


def _forward(ev: Evaluation) -> dict[str, float]:
    dist = ev.distinguishable()
    return {
        "forward": forward_two_photon_probability(ev.output, port=1),
        "forward_distinguishable": dist.table.get((2,), 0.0),
    }


def _mz_pcc(ev: Evaluation) -> dict[str, float]:
    target_mode = ModeId(2)
    target = normalize(state_from_photons([target_mode, target_mode]))
    amp = ev.distribution.amplitudes.get((0, 2), 0j)
    out = _split_counts(ev)
    out.update({
        "overlap_bunched_d2": float(abs(inner(target, ev.output))),
        "equal_up_to_phase": float(equal_up_to_phase(target, ev.output)),
        "bunched_amplitude_re": amp.real,
        "bunched_amplitude_im": amp.imag,
    })
    return out


def _mz_hom(ev: Evaluation) -> dict[str, float]:
    dist = ev.distinguishable()
    keys = set(dist.table) | set(ev.counts.table)
    out = _split_counts(ev)
    out.update({
        "p_split_distinguishable": dist.coincidence("d1", "d2"),
        "max_deviation_from_distinguishable": max(
            abs(dist.table.get(k, 0.0) - ev.counts.table.get(k, 0.0)) for k in keys),
    })
    return out


def _eraser(ev: Evaluation) -> dict[str, float]:
    dist = ev.distinguishable()
    return {
        "mean_d1": ev.counts.mean("d1"),
        "mean_d2": ev.counts.mean("d2"),
        "coincidence": ev.counts.coincidence("d1", "d2"),
        "g2_cross": ev.counts.cross_g2("d1", "d2"),
        "absorbed": absorbed_probability(ev.output),
        "coincidence_distinguishable": dist.coincidence("d1", "d2"),
        "g2_distinguishable": dist.cross_g2("d1", "d2"),
    }


SCENARIOS: dict[str, Scenario] = {s.name: s for s in [
    Scenario("hom", "hom.circ", "50/50 splitter, one photon per input: bunched output, no coincidences",
             _split_stats,
             lambda p: {"p_both_d1": 0.5, "p_split": 0.0, "p_both_d2": 0.5, "g2_cross": 0.0}),
    Scenario("pcc", "pcc.circ", "50/50 splitter, both photons in one input: r^2, sqrt2*rt, t^2 amplitudes",
             _split_stats,
             lambda p: {"p_both_d1": 0.25, "p_split": 0.5, "p_both_d2": 0.25, "g2_cross": 0.5}),
    Scenario("fock-n", "fock-n.circ", "n-photon number state: g2 = 1 - 1/n with or without the splitter",
             _fock_n, _fock_n_expected),
    Scenario("y-pcc", "y-pcc.circ", "PCC state into Y junction: forward pair probability [2T(1-T)]^2",
             _forward,
             lambda p: {"forward": _yfactor(p["T"]) ** 2,
                        "forward_distinguishable": _yfactor(p["T"]) ** 2}),
    Scenario("y-hom", "y-hom.circ", "HOM state into Y junction: forward pair probability 2[2T(1-T)]^2",
             _forward,
             lambda p: {"forward": 2 * _yfactor(p["T"]) ** 2,
                        "forward_distinguishable": _yfactor(p["T"]) ** 2}),
    Scenario("y-indep", "y-indep.circ", "independent photons into Y junction: forward pair probability [2T(1-T)]^2",
             _forward,
             lambda p: {"forward": _yfactor(p["T"]) ** 2,
                        "forward_distinguishable": _yfactor(p["T"]) ** 2}),
    Scenario("mz-pcc", "mz-pcc.circ", "PCC state through a Mach-Zehnder: output is -|0,2>, no coincidences",
             _mz_pcc,
             lambda p: {"p_both_d1": 0.0, "p_split": 0.0, "p_both_d2": 1.0, "overlap_bunched_d2": 1.0,
                        "equal_up_to_phase": 1.0, "bunched_amplitude_re": -1.0,
                        "bunched_amplitude_im": 0.0}),
    Scenario("mz-hom", "mz-hom.circ", "HOM state through a Mach-Zehnder: same statistics as distinguishable photons",
             _mz_hom,
             lambda p: {"p_split": 1.0, "p_split_distinguishable": 1.0,
                        "max_deviation_from_distinguishable": 0.0}),
    Scenario("eraser", "eraser.circ",
             "orthogonal pair, splitter, PBS, +45 degree polarizers: coincidences erased (vs 2/16 classically)",
             _eraser,
             lambda p: {"coincidence": 0.0, "g2_cross": 0.0, "coincidence_distinguishable": 2 / 16,
                        "g2_distinguishable": 0.5}),
]}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


def evaluate_circuit(built: BuiltCircuit) -> Evaluation:
    """Run engine and permanent oracle on a built circuit and compare them."""
    state = built.input_state
    output = apply_circuit(state, built.circuit)
    modes = built.circuit.modes
    distribution = to_fock(output, modes)
    transfer = compose_transfer(built.circuit)
    # the oracle works on the normalized Fock input, so it matches the engine directly
    oracle = oracle_distribution(transfer, built.input_occupation)
    deviation = phase_aligned_max_deviation(distribution, oracle)
    counts = count_table(output, built.detectors)
    return Evaluation(built, output, distribution, counts, deviation)


def run_scenario(name: str, overrides: Mapping[str, float] | None = None) -> ScenarioReport:
    scenario = get_scenario(name)
    built = scenario.spec().build(overrides)
    ev = evaluate_circuit(built)
    if ev.oracle_deviation > CHECK_TOL:
        raise ScenarioError(f"{name}: engine and permanent oracle disagree by {ev.oracle_deviation:.3g}")
    results = {"oracle_deviation": ev.oracle_deviation}
    results.update(scenario.evaluate(ev))
    expected = {"oracle_deviation": 0.0}
    expected.update(scenario.expected(ev.params))
    return ScenarioReport(name, ev.params, results, expected, ev.distribution,
                          absorbed_probability(ev.output))


def sweep(name: str, parameter: str, grid: Iterable[float],
          overrides: Mapping[str, float] | None = None) -> list[ScenarioReport]:
    scenario = get_scenario(name)
    if parameter not in scenario.spec().param_defaults:
        raise KeyError(f"scenario {name!r} has no parameter {parameter!r}")
    base = dict(overrides or {})
    return [run_scenario(name, {**base, parameter: float(x)}) for x in grid]


def format_number(x: float) -> str:
    """12 significant digits; values below 1e-14 in magnitude print as 0."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if math.isnan(x):
        return "nan"
    if abs(x) < 1e-14:
        return "0"
    return format(x, ".12g")


def reports_to_csv(reports: Sequence[ScenarioReport]) -> str:
    """One row per report; columns are fixed by the first report."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if not reports:
        writer.writerow(["scenario", "pass"])
        return buf.getvalue()
    first = reports[0]
    params = list(first.params)
    results = list(first.results)
    expected = [k for k in results if k in first.expected]
    writer.writerow(["scenario", *params, *results, *(f"expected_{k}" for k in expected), "pass"])
    for rep in reports:
        writer.writerow([
            rep.scenario,
            *(format_number(rep.params[k]) for k in params),
            *(format_number(rep.results[k]) for k in results),
            *(format_number(rep.expected[k]) for k in expected),
            "true" if rep.passed else "false",
        ])
    return buf.getvalue()


def distribution_to_csv(distribution: FockDistribution) -> str:
    """Nonzero Fock amplitudes, one row per occupation tuple in sorted order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"n[{m}]" for m in distribution.modes] + ["amp_re", "amp_im", "probability"])
    for occ in sorted(distribution.amplitudes, reverse=True):
        amp = distribution.amplitudes[occ]
        if abs(amp) < 1e-14:
            continue
        writer.writerow([*map(str, occ), format_number(amp.real), format_number(amp.imag),
                         format_number(abs(amp) ** 2)])
    return buf.getvalue()


def counts_to_csv(counts: CountTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([d.name for d in counts.detectors] + ["probability"])
    for k in sorted(counts.table, reverse=True):
        p = counts.table[k]
        if p < 1e-14:
            continue
        writer.writerow([*map(str, k), format_number(p)])
    return buf.getvalue()
