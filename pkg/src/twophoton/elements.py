"""Linear-optical elements as mode-indexed matrices.

Row ``i`` of an element's matrix lists the output creation operators that
input creation operator ``i`` expands into: ``c_i^dag -> sum_k U[i, k] d_k^dag``.
Modes outside ``modes`` pass through unchanged.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fock import ModeId, Polarization

UNITARY_ATOL = 1e-10

SQRT1_2 = 1 / math.sqrt(2)
#: 50/50 beam splitter with the pi/2 phase on reflection
BALANCED_R = 1j * SQRT1_2
BALANCED_T = SQRT1_2

POLARIZED = (Polarization.PARALLEL, Polarization.PERPENDICULAR)


class ElementKind(enum.Enum):
    UNITARY = "unitary"
    PROJECTIVE = "projective"


class ElementError(ValueError):
    pass


@dataclass(frozen=True)
class LinearElement:
    modes: tuple[ModeId, ...]
    matrix: np.ndarray
    kind: ElementKind = ElementKind.UNITARY
    name: str = "element"
    #: ports whose modes must carry a polarization label
    polarized_ports: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        n = len(self.modes)
        if mat.shape != (n, n):
            raise ElementError(f"{self.name}: matrix shape {mat.shape} does not match {n} modes")
        if len(set(self.modes)) != n:
            raise ElementError(f"{self.name}: duplicate modes")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "modes", tuple(self.modes))

    @property
    def touched_modes(self) -> frozenset[ModeId]:
        return frozenset(self.modes)

    def row(self, m: ModeId) -> dict[ModeId, complex]:
        """Output expansion of input mode ``m``."""
        try:
            i = self.modes.index(m)
        except ValueError:
            return {m: 1.0 + 0j}
        return {self.modes[k]: complex(v) for k, v in enumerate(self.matrix[i]) if v != 0}

    def embed(self, modes: Sequence[ModeId]) -> np.ndarray:
        """The element as a matrix over ``modes`` (identity on untouched ones)."""
        index = {m: i for i, m in enumerate(modes)}
        missing = [m for m in self.modes if m not in index]
        if missing:
            raise ElementError(f"{self.name}: modes {[str(m) for m in missing]} not in target basis")
        full = np.eye(len(modes), dtype=complex)
        idx = [index[m] for m in self.modes]
        full[np.ix_(idx, idx)] = self.matrix
        return full

    def detected_block(self) -> np.ndarray:
        keep = [i for i, m in enumerate(self.modes) if not m.sink]
        return self.matrix[np.ix_(keep, keep)]


@dataclass(frozen=True)
class ValidationReport:
    name: str
    kind: ElementKind
    deviation: float
    passed: bool
    message: str


def _sublevels(polarizations: Iterable[Polarization], tags: Iterable[int]):
    return [(Polarization(p), t) for t in tags for p in polarizations]


def _port_element(port_matrix: np.ndarray, ports: Sequence[int], polarizations, tags,
                  name: str, kind=ElementKind.UNITARY) -> LinearElement:
    """Apply the same port-level matrix to every polarization/tag sublevel."""
    modes = []
    blocks = []
    for pol, tag in _sublevels(polarizations, tags):
        modes.extend(ModeId(p, pol, tag) for p in ports)
        blocks.append(port_matrix)
    n = len(ports)
    full = np.zeros((len(modes), len(modes)), dtype=complex)
    for b, block in enumerate(blocks):
        full[b * n:(b + 1) * n, b * n:(b + 1) * n] = block
    return LinearElement(tuple(modes), full, kind, name)


def beam_splitter(r: complex, t: complex, port_a: int, port_b: int,
                  polarizations=(Polarization.NONE,), tags=(0,)) -> LinearElement:
    """Two-port splitter: ``a -> t a + r b`` and ``b -> r a + t b``.

    Acts identically on every polarization and tag sublevel.
    """
    r, t = complex(r), complex(t)
    power = abs(r) ** 2 + abs(t) ** 2
    if abs(power - 1) > UNITARY_ATOL:
        raise ElementError(f"beam splitter not unitary: |r|^2+|t|^2 = {power:.12g} != 1")
    cross = r * t.conjugate() + t * r.conjugate()
    if abs(cross) > UNITARY_ATOL:
        raise ElementError(
            f"beam splitter not unitary: r*conj(t)+t*conj(r) = {cross.real:.12g} != 0")
    if port_a == port_b:
        raise ElementError("beam splitter needs two distinct ports")
    return _port_element(np.array([[t, r], [r, t]]), (port_a, port_b),
                         polarizations, tags, f"bs({port_a},{port_b})")


def balanced_beam_splitter(port_a: int, port_b: int, **kw) -> LinearElement:
    return beam_splitter(BALANCED_R, BALANCED_T, port_a, port_b, **kw)


def phase_shifter(port: int, phi: float, polarizations=(Polarization.NONE,),
                  tags=(0,)) -> LinearElement:
    return _port_element(np.array([[cmath.exp(1j * phi)]]), (port,), polarizations, tags,
                         f"phase({port})")


def y_junction_matrix(T: float) -> np.ndarray:
    """Real symmetric 3x3 Y-junction matrix; index 0 is the combined port."""
    if not 0.0 <= T <= 1.0:
        raise ElementError(f"Y-junction cross talk T must lie in [0, 1], got {T}")
    s = math.sqrt(2 * T * (1 - T))
    return np.array([
        [1 - 2 * T, s, s],
        [s, -(1 - T), T],
        [s, T, -(1 - T)],
    ])


def y_junction(T: float, ports: Sequence[int] = (1, 2, 3),
               polarizations=(Polarization.NONE,), tags=(0,)) -> LinearElement:
    """Y junction; ``ports[0]`` is the combined (forward) port."""
    if len(set(ports)) != 3:
        raise ElementError("Y junction needs three distinct ports")
    return _port_element(y_junction_matrix(T), tuple(ports), polarizations, tags,
                         f"yjunction({','.join(map(str, ports))})")


def polarizing_beam_splitter(port_a: int, port_b: int, tags=(0,)) -> LinearElement:
    """Parallel polarization keeps its port, perpendicular swaps; no relative phase."""
    if port_a == port_b:
        raise ElementError("PBS needs two distinct ports")
    modes = []
    for tag in tags:
        modes += [ModeId(port_a, Polarization.PARALLEL, tag), ModeId(port_a, Polarization.PERPENDICULAR, tag),
                  ModeId(port_b, Polarization.PARALLEL, tag), ModeId(port_b, Polarization.PERPENDICULAR, tag)]
    index = {m: i for i, m in enumerate(modes)}
    mat = np.zeros((len(modes), len(modes)))
    for m in modes:
        if m.polarization is Polarization.PARALLEL:
            target = m
        else:
            other = port_b if m.port == port_a else port_a
            target = ModeId(other, m.polarization, m.tag)
        mat[index[m], index[target]] = 1.0
    return LinearElement(tuple(modes), mat, ElementKind.UNITARY, f"pbs({port_a},{port_b})",
                         frozenset({port_a, port_b}))


def polarizer(port: int, angle: float, tags=(0,), sink: int = 1) -> LinearElement:
    """Linear polarizer with transmission axis ``cos(angle) par + sin(angle) perp``.

    The transmitted photon stays in the port's lab-frame polarization modes;
    the blocked component goes to sink mode ``sink`` at the same port, which
    must not be shared with another absorber.
    """
    if sink < 1:
        raise ElementError("polarizer sink id must be positive")
    c, s = math.cos(angle), math.sin(angle)
    modes = []
    blocks = []
    for tag in tags:
        par = ModeId(port, Polarization.PARALLEL, tag)
        perp = ModeId(port, Polarization.PERPENDICULAR, tag)
        sink_mode = ModeId(port, Polarization.NONE, tag, sink)
        modes += [par, perp, sink_mode]
        # par -> c*axis + s*sink, perp -> s*axis - c*sink, axis = c*par + s*perp
        blocks.append(np.array([
            [c * c, c * s, s],
            [s * c, s * s, -c],
            [0.0, 0.0, 1.0],
        ]))
    full = np.zeros((len(modes), len(modes)))
    for b, block in enumerate(blocks):
        full[3 * b:3 * b + 3, 3 * b:3 * b + 3] = block
    return LinearElement(tuple(modes), full, ElementKind.PROJECTIVE, f"polarizer({port})",
                         frozenset({port}))


def validate(element: LinearElement, atol: float = UNITARY_ATOL) -> ValidationReport:
    """Check unitarity, or for projective elements that no detected amplitude grows."""
    if element.kind is ElementKind.UNITARY:
        mat = element.matrix
        dev = float(np.max(np.abs(mat @ mat.conj().T - np.eye(len(mat))))) if mat.size else 0.0
        ok = dev <= atol
        msg = "unitary" if ok else f"unitarity violated: max |U U^dag - I| = {dev:.3g}"
    else:
        block = element.detected_block()
        sv = np.linalg.svd(block, compute_uv=False) if block.size else np.zeros(1)
        # each input photon must end up somewhere with total probability <= 1
        rows = np.sum(np.abs(element.matrix) ** 2, axis=1)
        dev = float(max(sv.max() - 1.0, rows.max() - 1.0, 0.0))
        ok = dev <= atol
        msg = "contraction" if ok else f"contraction violated: excess gain {dev:.3g}"
    return ValidationReport(element.name, element.kind, dev, ok, msg)


def from_matrix(matrix, modes: Sequence[ModeId], name: str = "custom",
                kind: ElementKind = ElementKind.UNITARY) -> LinearElement:
    return LinearElement(tuple(modes), np.asarray(matrix, dtype=complex), kind, name)
