"""Detector-level quantities: counts, coincidences, g2, forward flux.

Detectors are sets of modes whose photons they count together. Photons in
sink modes (or any mode no detector covers) go undetected; their share is
reported as absorbed probability rather than renormalized away.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .elements import LinearElement
from .fock import ModeId, OperatorState, to_fock


class UndefinedG2Error(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    modes: frozenset[ModeId]

    def __post_init__(self):
        modes = frozenset(self.modes)
        sinks = [str(m) for m in modes if m.sink]
        if sinks:
            raise ValueError(f"detector {self.name} covers sink modes {sinks}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def at_port(cls, port: int, universe: Iterable[ModeId], name: str | None = None) -> DetectorSpec:
        """Polarization- and tag-insensitive detector over every non-sink mode at ``port``."""
        return cls(name or f"d{port}", frozenset(m for m in universe if m.port == port and not m.sink))

    @classmethod
    def single(cls, m: ModeId, name: str | None = None) -> DetectorSpec:
        return cls(name or f"d{m}", frozenset({m}))


def _check_disjoint(detectors: Sequence[DetectorSpec]):
    for a, b in itertools.combinations(detectors, 2):
        if a.modes & b.modes:
            raise ValueError(f"detectors {a.name} and {b.name} overlap")


@dataclass(frozen=True)
class CountTable:
    """Joint distribution of photon counts, one tuple entry per detector.

    Outcomes where some photon reached no detector keep their probability
    under a count tuple summing to less than ``photon_number``.
    """

    detectors: tuple[DetectorSpec, ...]
    table: Mapping[tuple[int, ...], float]
    photon_number: int

    def _idx(self, det: DetectorSpec | str) -> int:
        name = det if isinstance(det, str) else det.name
        for i, d in enumerate(self.detectors):
            if d.name == name:
                return i
        raise KeyError(f"no detector named {name}")

    def total(self) -> float:
        return float(sum(self.table.values()))

    def lost_probability(self) -> float:
        """Probability that at least one photon was not detected."""
        return float(sum(p for k, p in self.table.items() if sum(k) < self.photon_number))

    def mean(self, det) -> float:
        i = self._idx(det)
        return float(sum(p * k[i] for k, p in self.table.items()))

    def factorial_moment(self, det) -> float:
        i = self._idx(det)
        return float(sum(p * k[i] * (k[i] - 1) for k, p in self.table.items()))

    def product_moment(self, a, b) -> float:
        i, j = self._idx(a), self._idx(b)
        return float(sum(p * k[i] * k[j] for k, p in self.table.items()))

    def coincidence(self, a, b) -> float:
        """Probability of exactly one photon in each of ``a`` and ``b``."""
        i, j = self._idx(a), self._idx(b)
        return float(sum(p for k, p in self.table.items() if k[i] == 1 and k[j] == 1))

    def cross_g2(self, a, b) -> float:
        na, nb = self.mean(a), self.mean(b)
        if na * nb <= 1e-15:
            raise UndefinedG2Error("undefined g2: a detector has zero singles rate")
        return self.product_moment(a, b) / (na * nb)

    def single_g2(self, det) -> float:
        n = self.mean(det)
        if n <= 1e-15:
            raise UndefinedG2Error("undefined g2: zero mean photon number")
        return self.factorial_moment(det) / n ** 2


def count_table(state: OperatorState, detectors: Sequence[DetectorSpec]) -> CountTable:
    """Photon-count distribution of a (normalized) state over ``detectors``."""
    detectors = tuple(detectors)
    _check_disjoint(detectors)
    dist = to_fock(state)
    owner = [next((i for i, d in enumerate(detectors) if m in d.modes), None) for m in dist.modes]
    table: dict[tuple[int, ...], float] = {}
    for occ, p in dist.probabilities.items():
        counts = [0] * len(detectors)
        for n, i in zip(occ, owner):
            if i is not None:
                counts[i] += n
        table[tuple(counts)] = table.get(tuple(counts), 0.0) + p
    return CountTable(detectors, table, state.photon_number or 0)


def mean_photon(state: OperatorState, detector: DetectorSpec) -> float:
    return count_table(state, [detector]).mean(detector)


def cross_g2(state: OperatorState, det_a: DetectorSpec, det_b: DetectorSpec) -> float:
    """``<n_a n_b> / (<n_a><n_b>)`` at zero delay."""
    return count_table(state, [det_a, det_b]).cross_g2(det_a, det_b)


def single_mode_g2(state: OperatorState, detector: DetectorSpec) -> float:
    """``<n(n-1)> / <n>^2``, the normal-ordered one-detector g2."""
    return count_table(state, [detector]).single_g2(detector)


def coincidence_probability(state: OperatorState, det_a: DetectorSpec, det_b: DetectorSpec) -> float:
    if state.photon_number != 2:
        raise ValueError(f"coincidence defined for two-photon states, got {state.photon_number}")
    return count_table(state, [det_a, det_b]).coincidence(det_a, det_b)


def absorbed_probability(state: OperatorState) -> float:
    """Probability that at least one photon sits in a sink mode."""
    dist = to_fock(state)
    sinks = [i for i, m in enumerate(dist.modes) if m.sink]
    return float(sum(p for occ, p in dist.probabilities.items() if any(occ[i] for i in sinks)))


def forward_two_photon_probability(state: OperatorState, port: int = 1) -> float:
    """Probability that both photons leave through ``port`` (any internal label)."""
    det = DetectorSpec.at_port(port, state.modes, name="forward")
    if not det.modes:
        return 0.0
    table = count_table(state, [det])
    return float(sum(p for k, p in table.table.items() if k[0] == 2))


def distinguishable_joint(transfer: LinearElement, photons: Sequence[ModeId],
                          detectors: Sequence[DetectorSpec]) -> CountTable:
    """Joint detector counts for photons that never interfere with each other.

    Each photon scatters independently with single-particle probabilities
    ``|U[i, k]|^2``; probability sent to sink or unobserved modes is kept as
    an undetected outcome.
    """
    detectors = tuple(detectors)
    _check_disjoint(detectors)
    index = {m: i for i, m in enumerate(transfer.modes)}
    probs = np.abs(transfer.matrix) ** 2
    per_photon = []
    for ph in photons:
        try:
            row = probs[index[ph]]
        except KeyError:
            raise ValueError(f"photon mode {ph} not in transfer matrix") from None
        outcome = np.zeros(len(detectors) + 1)
        for k, m in enumerate(transfer.modes):
            slot = next((i for i, d in enumerate(detectors) if m in d.modes), len(detectors))
            outcome[slot] += row[k]
        per_photon.append(outcome)
    table: dict[tuple[int, ...], float] = {}
    for assignment in itertools.product(range(len(detectors) + 1), repeat=len(photons)):
        p = float(np.prod([per_photon[j][slot] for j, slot in enumerate(assignment)]))
        counts = tuple(sum(1 for s in assignment if s == i) for i in range(len(detectors)))
        table[counts] = table.get(counts, 0.0) + p
    return CountTable(detectors, table, len(photons))


def port_detectors(ports: Sequence[int], universe: Iterable[ModeId]) -> list[DetectorSpec]:
    universe = list(universe)
    return [DetectorSpec.at_port(p, universe) for p in ports]


__all__ = [
    "CountTable", "DetectorSpec", "UndefinedG2Error", "absorbed_probability",
    "coincidence_probability", "count_table", "cross_g2", "distinguishable_joint",
    "forward_two_photon_probability", "mean_photon", "port_detectors", "single_mode_g2",
]
