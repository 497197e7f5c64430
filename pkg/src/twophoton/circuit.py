"""Evolve states through element sequences by creation-operator substitution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .elements import ElementError, ElementKind, LinearElement
from .fock import ModeId, Monomial, OperatorState, Polarization


class UnknownModeError(ValueError):
    pass


@dataclass(frozen=True)
class Circuit:
    """Ordered elements over a declared mode set.

    ``declared_modes`` defaults to the union of the elements' modes; extra
    modes (e.g. input modes no element touches) can be added explicitly.
    """

    elements: tuple[LinearElement, ...] = ()
    declared_modes: frozenset[ModeId] = field(default_factory=frozenset)

    def __post_init__(self):
        elements = tuple(self.elements)
        declared = frozenset(self.declared_modes).union(*(e.touched_modes for e in elements))
        for e in elements:
            for m in declared:
                if m.port in e.polarized_ports and not m.sink and m.polarization is Polarization.NONE:
                    raise ElementError(f"{e.name}: mode {m} at port {m.port} has no polarization label")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "declared_modes", declared)

    @property
    def modes(self) -> tuple[ModeId, ...]:
        """Declared modes in canonical order; the basis for transfer matrices."""
        return tuple(sorted(self.declared_modes))

    @property
    def is_unitary(self) -> bool:
        return all(e.kind is ElementKind.UNITARY for e in self.elements)

    def then(self, *elements: LinearElement) -> Circuit:
        return Circuit(self.elements + elements, self.declared_modes)

    def __len__(self) -> int:
        return len(self.elements)


def _expand(factors: Sequence[dict[ModeId, complex]], coeff: complex) -> dict[Monomial, complex]:
    """Multiply out a product of linear forms in creation operators."""
    partial: dict[tuple[ModeId, ...], complex] = {(): coeff}
    for form in factors:
        nxt: dict[tuple[ModeId, ...], complex] = {}
        for modes, amp in partial.items():
            for m, c in form.items():
                key = tuple(sorted(modes + (m,)))
                nxt[key] = nxt.get(key, 0j) + amp * c
        partial = nxt
    return {Monomial.from_modes(k): v for k, v in partial.items()}


def apply_element(state: OperatorState, element: LinearElement) -> OperatorState:
    """Substitute every input creation operator by its row of ``element``."""
    out: dict[Monomial, complex] = {}
    rows: dict[ModeId, dict[ModeId, complex]] = {}
    for mono, coeff in state:
        factors = []
        for m, e in mono.powers:
            if m.port in element.polarized_ports and not m.sink and m.polarization is Polarization.NONE:
                raise ElementError(f"{element.name}: photon in unpolarized mode {m}")
            if m not in rows:
                rows[m] = element.row(m)
            factors.extend([rows[m]] * e)
        for k, v in _expand(factors, coeff).items():
            out[k] = out.get(k, 0j) + v
    return OperatorState(out)


def apply_circuit(state: OperatorState, circuit: Circuit) -> OperatorState:
    unknown = [m for m in state.modes if m not in circuit.declared_modes]
    if unknown:
        raise UnknownModeError(f"state uses undeclared modes {[str(m) for m in unknown]}")
    for element in circuit.elements:
        state = apply_element(state, element)
    return state


def compose_transfer(circuit: Circuit, modes: Iterable[ModeId] | None = None) -> LinearElement:
    """Single-photon transfer matrix of the whole circuit (stage matrices in order)."""
    basis = tuple(sorted(modes)) if modes is not None else circuit.modes
    total = np.eye(len(basis), dtype=complex)
    for element in circuit.elements:
        total = total @ element.embed(basis)
    kind = ElementKind.UNITARY if circuit.is_unitary else ElementKind.PROJECTIVE
    return LinearElement(basis, total, kind, "composed")
