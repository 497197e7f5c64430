"""Few-photon states as polynomials in commuting creation operators.

A state is stored as ``{Monomial: amplitude}`` acting on the vacuum. The
Fock-basis amplitude of a monomial ``prod(c_i^dag ** n_i)`` with coefficient
``alpha`` is ``alpha * sqrt(prod(n_i!))``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

#: amplitudes below this magnitude are dropped after combining like terms
DEDUP_THRESHOLD = 1e-12


class Polarization(enum.IntEnum):
    NONE = 0
    PARALLEL = 1
    PERPENDICULAR = 2

    @property
    def short(self) -> str:
        return {0: "", 1: "par", 2: "perp"}[self.value]


@dataclass(frozen=True, order=True)
class ModeId:
    """A bosonic mode: spatial port, polarization, distinguishability tag.

    ``sink`` is 0 for ordinary modes; a positive value identifies a
    bookkeeping mode that absorbs photons (polarizer loss) and is never
    detected. Each absorber gets its own sink id.
    """

    port: int
    polarization: Polarization = Polarization.NONE
    tag: int = 0
    sink: int = 0

    def __post_init__(self):
        if self.port < 0 or self.tag < 0 or self.sink < 0:
            raise ValueError(f"negative port/tag/sink in mode {self.port}, {self.tag}, {self.sink}")
        object.__setattr__(self, "polarization", Polarization(self.polarization))

    def __str__(self) -> str:
        label = f"{self.port}"
        if self.polarization:
            label += f":{self.polarization.short}"
        if self.tag:
            label += f"#{self.tag}"
        if self.sink:
            label += f"!sink{self.sink}"
        return label


def mode(port: int, polarization: Polarization | str | None = None, tag: int = 0) -> ModeId:
    """Shorthand constructor accepting ``'par'``/``'perp'`` strings."""
    if polarization is None:
        pol = Polarization.NONE
    elif isinstance(polarization, str):
        pol = {"": Polarization.NONE, "par": Polarization.PARALLEL,
               "perp": Polarization.PERPENDICULAR}[polarization]
    else:
        pol = Polarization(polarization)
    return ModeId(port, pol, tag)


@dataclass(frozen=True)
class Monomial:
    """Product of creation operators, stored as sorted ``(mode, exponent)`` pairs."""

    powers: tuple[tuple[ModeId, int], ...]

    def __post_init__(self):
        for m, e in self.powers:
            if e <= 0:
                raise ValueError(f"exponent of {m} must be positive, got {e}")
        if list(self.powers) != sorted(self.powers):
            raise ValueError("monomial powers must be in canonical mode order")
        if len({m for m, _ in self.powers}) != len(self.powers):
            raise ValueError("duplicate mode in monomial")

    @classmethod
    def from_modes(cls, modes: Iterable[ModeId]) -> Monomial:
        return cls(tuple(sorted(Counter(modes).items())))

    @classmethod
    def from_exponents(cls, exponents: Mapping[ModeId, int]) -> Monomial:
        return cls(tuple(sorted((m, e) for m, e in exponents.items() if e)))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.powers)

    @property
    def exponents(self) -> dict[ModeId, int]:
        return dict(self.powers)

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(m for m, _ in self.powers)

    def factorial_weight(self) -> float:
        """``prod(n_i!)``, the squared norm of the monomial acting on vacuum."""
        return float(math.prod(math.factorial(e) for _, e in self.powers))

    def __mul__(self, other: Monomial) -> Monomial:
        counts = Counter(dict(self.powers))
        counts.update(dict(other.powers))
        return Monomial(tuple(sorted(counts.items())))

    def __str__(self) -> str:
        if not self.powers:
            return "1"
        return " ".join(f"c[{m}]^{e}" if e > 1 else f"c[{m}]" for m, e in self.powers)


@dataclass(frozen=True)
class OperatorState:
    """Linear combination of equal-degree creation monomials applied to vacuum."""

    terms: Mapping[Monomial, complex] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {k: complex(v) for k, v in self.terms.items() if abs(v) > DEDUP_THRESHOLD}
        degrees = {k.degree for k in cleaned}
        if len(degrees) > 1:
            raise ValueError(f"mixed photon numbers in one state: {sorted(degrees)}")
        object.__setattr__(self, "terms", dict(sorted(cleaned.items(), key=lambda kv: kv[0].powers)))

    @property
    def photon_number(self) -> int | None:
        for mono in self.terms:
            return mono.degree
        return None

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(sorted({m for mono in self.terms for m in mono.modes}))

    def is_empty(self) -> bool:
        return not self.terms

    def __iter__(self) -> Iterator[tuple[Monomial, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: OperatorState) -> OperatorState:
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, 0j) + v
        return OperatorState(acc)

    def __rmul__(self, scalar: complex) -> OperatorState:
        return OperatorState({k: scalar * v for k, v in self.terms.items()})

    __mul__ = __rmul__

    def __sub__(self, other: OperatorState) -> OperatorState:
        return self + (-1) * other

    def amplitude(self, monomial: Monomial) -> complex:
        return self.terms.get(monomial, 0j)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({v:.6g}) {k}" for k, v in self.terms.items())


@dataclass(frozen=True)
class FockDistribution:
    """Fock amplitudes keyed by occupation tuples ordered like ``modes``."""

    modes: tuple[ModeId, ...]
    amplitudes: Mapping[tuple[int, ...], complex]

    @property
    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {k: abs(a) ** 2 for k, a in self.amplitudes.items()}

    def probability(self, occupation: Sequence[int]) -> float:
        return abs(self.amplitudes.get(tuple(occupation), 0j)) ** 2

    def total_probability(self) -> float:
        return float(sum(self.probabilities.values()))

    def restricted(self, modes: Sequence[ModeId]) -> FockDistribution:
        """Re-key onto a (super)set of modes; modes absent from ``modes`` must be empty."""
        modes = tuple(modes)
        index = {m: i for i, m in enumerate(modes)}
        out: dict[tuple[int, ...], complex] = {}
        for occ, amp in self.amplitudes.items():
            new = [0] * len(modes)
            for m, n in zip(self.modes, occ):
                if n and m not in index:
                    raise ValueError(f"occupied mode {m} missing from target modes")
                if m in index:
                    new[index[m]] = n
            out[tuple(new)] = out.get(tuple(new), 0j) + amp
        return FockDistribution(modes, out)

    def items(self):
        return self.amplitudes.items()


def state_from_photons(photons: Sequence[ModeId]) -> OperatorState:
    """Unit-coefficient monomial with one creation operator per listed photon."""
    if not photons:
        raise ValueError("need at least one photon")
    return OperatorState({Monomial.from_modes(photons): 1.0})


def to_fock(state: OperatorState, modes: Sequence[ModeId] | None = None) -> FockDistribution:
    modes = tuple(state.modes if modes is None else modes)
    index = {m: i for i, m in enumerate(modes)}
    amps: dict[tuple[int, ...], complex] = {}
    for mono, coeff in state:
        occ = [0] * len(modes)
        for m, e in mono.powers:
            try:
                occ[index[m]] = e
            except KeyError:
                raise ValueError(f"state occupies mode {m} not in requested modes") from None
        amps[tuple(occ)] = coeff * math.sqrt(mono.factorial_weight())
    return FockDistribution(modes, amps)


def fock_norm(state: OperatorState) -> float:
    return math.sqrt(sum(abs(c) ** 2 * mono.factorial_weight() for mono, c in state))


def normalize(state: OperatorState) -> OperatorState:
    norm = fock_norm(state)
    if norm <= DEDUP_THRESHOLD:
        raise ValueError("cannot normalize null state")
    return (1.0 / norm) * state


def inner(a: OperatorState, b: OperatorState) -> complex:
    """Fock-space inner product ``<a|b>``."""
    return sum((np.conj(ca) * b.amplitude(mono) * mono.factorial_weight() for mono, ca in a),
               0j)


def equal_up_to_phase(a: OperatorState, b: OperatorState, atol: float = 1e-10) -> bool:
    na, nb = fock_norm(a), fock_norm(b)
    if na < atol or nb < atol:
        return na < atol and nb < atol
    return abs(abs(inner(a, b)) - na * nb) <= atol and abs(na - nb) <= atol
