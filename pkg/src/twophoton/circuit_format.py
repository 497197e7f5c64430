"""Line-oriented circuit description files.

Grammar, one statement per line, ``#`` starts a comment::

    modes N [polarized]          ports 1..N; polarized adds par/perp modes
    param NAME EXPR              named number, referenced as $NAME
    bs A B R/T                   splitter with reflect/transmit percentages
    bs A B r=EXPR t=EXPR         splitter with explicit amplitudes
    phase PORT EXPR              phase shift in radians
    yjunction OUT IN1 IN2 T=EXPR Y junction, OUT is the combined port
    pbs A B                      polarizing splitter (perp swaps ports)
    polarizer PORT EXPR          transmission axis angle in radians
    input PHOTON...              PHOTON = [COUNT@]PORT[:par|:perp][#TAG]
    detect NAME PORT             counts every non-sink mode at PORT

Expressions are arithmetic over numbers, ``i``, ``pi``, ``sqrt2``,
``sqrt()``/``exp()``/``cos()``/``sin()`` and ``$NAME`` parameters, written
without spaces. The percentage form puts the ``i`` phase on reflection.
"""

from __future__ import annotations

import ast
import cmath
import math
import re
from dataclasses import dataclass, field
from typing import Mapping

from .circuit import Circuit
from .elements import (
    POLARIZED,
    ElementError,
    beam_splitter,
    phase_shifter,
    polarizer,
    polarizing_beam_splitter,
    y_junction,
)
from .fock import ModeId, OperatorState, Polarization, normalize, state_from_photons
from .observables import DetectorSpec


class CircuitParseError(ValueError):
    """Diagnostic with a 1-based source position."""

    kind = "syntax error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {self.kind}: {message}")


class UnknownKeywordError(CircuitParseError):
    kind = "unknown keyword"


class ArityError(CircuitParseError):
    kind = "wrong number of arguments"


class UndeclaredPortError(CircuitParseError):
    kind = "undeclared port"


class NonUnitaryError(CircuitParseError):
    kind = "non-unitary element"


class ExpressionError(CircuitParseError):
    kind = "bad expression"


class UnknownParameterError(CircuitParseError):
    kind = "unknown parameter"


class StructureError(CircuitParseError):
    kind = "invalid circuit"


_CONSTANTS = {"i": 1j, "j": 1j, "pi": math.pi, "sqrt2": math.sqrt(2)}
_FUNCS = {"sqrt": cmath.sqrt, "exp": cmath.exp, "cos": cmath.cos, "sin": cmath.sin}
_PARAM_RE = re.compile(r"\$([A-Za-z_][A-Za-z0-9_]*)")


def evaluate(expr: str, params: Mapping[str, complex] | None = None) -> complex:
    """Evaluate a circuit-file number expression; raises ``KeyError``/``ValueError``."""
    params = params or {}
    source = _PARAM_RE.sub(lambda m: f"__p_{m.group(1)}", expr)
    source = re.sub(r"(\d\.?)i\b", r"\1j", source)
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if b == 0:
                    raise ValueError(f"division by zero in {expr!r}")
                return a / b
            return a ** b
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name):
            if node.id.startswith("__p_"):
                name = node.id[4:]
                if name not in params:
                    raise KeyError(name)
                return params[name]
            if node.id in _CONSTANTS:
                return _CONSTANTS[node.id]
            raise ValueError(f"unknown name {node.id!r} in {expr!r}")
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported syntax in {expr!r}")

    return complex(ev(tree))


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-12:
        raise ValueError(f"{what} must be real, got {value}")
    return value.real


@dataclass(frozen=True)
class Photon:
    port: int
    polarization: Polarization = Polarization.NONE
    tag: int = 0
    count: str = "1"

    def __str__(self) -> str:
        text = str(self.port)
        if self.polarization:
            text += f":{self.polarization.short}"
        if self.tag:
            text += f"#{self.tag}"
        return text if self.count == "1" else f"{self.count}@{text}"


@dataclass(frozen=True)
class Statement:
    keyword: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)
    columns: tuple[int, ...] = field(default=(), compare=False)

    def __str__(self) -> str:
        return " ".join((self.keyword,) + self.args)


@dataclass(frozen=True)
class CircuitSpec:
    n_ports: int
    polarized: bool
    params: tuple[tuple[str, str], ...]
    elements: tuple[Statement, ...]
    photons: tuple[Photon, ...]
    detectors: tuple[tuple[str, int], ...]
    comments: tuple[str, ...] = field(default=(), compare=False)

    @property
    def param_defaults(self) -> dict[str, str]:
        return dict(self.params)

    def format(self) -> str:
        return format_circuit(self)

    def build(self, overrides: Mapping[str, float] | None = None) -> BuiltCircuit:
        return build(self, overrides)


@dataclass(frozen=True)
class BuiltCircuit:
    spec: CircuitSpec
    params: dict[str, complex]
    circuit: Circuit
    photons: tuple[ModeId, ...]
    detectors: tuple[DetectorSpec, ...]

    @property
    def input_state(self) -> OperatorState:
        return normalize(state_from_photons(self.photons))

    @property
    def input_occupation(self) -> tuple[int, ...]:
        return tuple(self.photons.count(m) for m in self.circuit.modes)

    def detector(self, name: str) -> DetectorSpec:
        for d in self.detectors:
            if d.name == name:
                return d
        raise KeyError(name)


_ARITY = {
    "modes": (1, 2),
    "param": (2, 2),
    "bs": (3, 4),
    "phase": (2, 2),
    "yjunction": (4, 4),
    "pbs": (2, 2),
    "polarizer": (2, 2),
    "input": (1, None),
    "detect": (2, 2),
}
ELEMENT_KEYWORDS = ("bs", "phase", "yjunction", "pbs", "polarizer")
_PHOTON_RE = re.compile(r"^(?:(\$?[A-Za-z0-9_]+)@)?(\d+)(?::(par|perp))?(?:#(\d+))?$")
_RATIO_RE = re.compile(r"^(\d+(?:\.\d+)?)/(\d+(?:\.\d+)?)$")


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_circuit(text: str) -> CircuitSpec:
    """Parse circuit-file text; every error carries line and column."""
    n_ports = None
    polarized = False
    params: list[tuple[str, str]] = []
    param_values: dict[str, complex] = {}
    elements: list[Statement] = []
    photons: list[Photon] = []
    detectors: list[tuple[str, int]] = []
    comments: list[str] = []
    input_line = None

    def port(tok: str, line: int, col: int) -> int:
        raw = tok[4:] if tok.startswith("port") else tok
        if not raw.isdigit():
            raise CircuitParseError(f"expected a port number, got {tok!r}", line, col)
        p = int(raw)
        if n_ports is None:
            raise StructureError("'modes' must come before any port reference", line, col)
        if not 1 <= p <= n_ports:
            raise UndeclaredPortError(f"undeclared port {p}", line, col)
        return p

    def expr(tok: str, line: int, col: int) -> complex:
        try:
            return evaluate(tok, param_values)
        except KeyError as exc:
            raise UnknownParameterError(f"parameter ${exc.args[0]} used before 'param'", line, col) from None
        except (ValueError, TypeError, OverflowError) as exc:
            raise ExpressionError(str(exc), line, col) from None

    def real_expr(tok: str, line: int, col: int, what: str) -> float:
        value = expr(tok, line, col)
        if abs(value.imag) > 1e-12:
            raise ExpressionError(f"{what} must be real, got {value}", line, col)
        return value.real

    def keyval(tok: str, key: str, line: int, col: int) -> str:
        prefix = key + "="
        if not tok.startswith(prefix) or len(tok) == len(prefix):
            raise CircuitParseError(f"expected {prefix}<expr>, got {tok!r}", line, col)
        return tok[len(prefix):]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = _split_comment(raw)
        if comment.strip() and not body.strip():
            comments.append(comment.strip())
        toks = _tokens(body)
        if not toks:
            continue
        kw, kwcol = toks[0]
        args = toks[1:]
        if kw not in _ARITY:
            raise UnknownKeywordError(f"unknown keyword {kw!r}", lineno, kwcol)
        lo, hi = _ARITY[kw]
        if len(args) < lo or (hi is not None and len(args) > hi):
            want = f"{lo}" if lo == hi else f"{lo}..{hi if hi is not None else 'n'}"
            raise ArityError(f"'{kw}' takes {want} arguments, got {len(args)}", lineno, kwcol)
        if kw != "modes" and n_ports is None:
            raise StructureError("first statement must be 'modes'", lineno, kwcol)
        cols = tuple(c for _, c in args)
        vals = [t for t, _ in args]

        if kw == "modes":
            if n_ports is not None:
                raise StructureError("'modes' declared twice", lineno, kwcol)
            if not vals[0].isdigit() or int(vals[0]) < 1:
                raise CircuitParseError(f"mode count must be a positive integer, got {vals[0]!r}",
                                        lineno, cols[0])
            if len(vals) == 2 and vals[1] != "polarized":
                raise CircuitParseError(f"expected 'polarized', got {vals[1]!r}", lineno, cols[1])
            n_ports = int(vals[0])
            polarized = len(vals) == 2
        elif kw == "param":
            name, value = vals
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise CircuitParseError(f"bad parameter name {name!r}", lineno, cols[0])
            if name in param_values:
                raise StructureError(f"parameter {name!r} declared twice", lineno, cols[0])
            param_values[name] = expr(value, lineno, cols[1])
            params.append((name, value))
        elif kw == "bs":
            a, b = port(vals[0], lineno, cols[0]), port(vals[1], lineno, cols[1])
            if a == b:
                raise StructureError("bs needs two distinct ports", lineno, cols[1])
            if len(vals) == 3:
                m = _RATIO_RE.match(vals[2])
                if not m:
                    raise ArityError("bs with 3 arguments needs an R/T percentage pair", lineno, cols[2])
                rp, tp = float(m.group(1)), float(m.group(2))
                if abs(rp + tp - 100) > 1e-9:
                    raise NonUnitaryError(f"splitting ratio {vals[2]} does not sum to 100", lineno, cols[2])
            else:
                r = expr(keyval(vals[2], "r", lineno, cols[2]), lineno, cols[2])
                t = expr(keyval(vals[3], "t", lineno, cols[3]), lineno, cols[3])
                try:
                    beam_splitter(r, t, 1, 2)
                except ElementError as exc:
                    raise NonUnitaryError(str(exc), lineno, cols[2]) from None
            elements.append(Statement(kw, tuple(vals), lineno, cols))
        elif kw == "phase":
            port(vals[0], lineno, cols[0])
            real_expr(vals[1], lineno, cols[1], "phase")
            elements.append(Statement(kw, tuple(vals), lineno, cols))
        elif kw == "yjunction":
            ps = [port(v, lineno, c) for v, c in zip(vals[:3], cols[:3])]
            if len(set(ps)) != 3:
                raise StructureError("yjunction needs three distinct ports", lineno, cols[0])
            tval = expr(keyval(vals[3], "T", lineno, cols[3]), lineno, cols[3])
            if abs(tval.imag) > 1e-12 or not 0 <= tval.real <= 1:
                raise NonUnitaryError(f"cross talk T={tval.real:g} outside [0, 1]", lineno, cols[3])
            elements.append(Statement(kw, tuple(vals), lineno, cols))
        elif kw in ("pbs", "polarizer"):
            ps = [port(vals[0], lineno, cols[0])]
            if kw == "pbs":
                ps.append(port(vals[1], lineno, cols[1]))
                if ps[0] == ps[1]:
                    raise StructureError("pbs needs two distinct ports", lineno, cols[1])
            else:
                real_expr(vals[1], lineno, cols[1], "polarizer angle")
            if not polarized:
                raise StructureError(f"'{kw}' needs 'modes N polarized'", lineno, kwcol)
            elements.append(Statement(kw, tuple(vals), lineno, cols))
        elif kw == "input":
            if input_line is not None:
                raise StructureError(f"second 'input' (first on line {input_line})", lineno, kwcol)
            input_line = lineno
            for tok, col in args:
                if tok == "photons" and col == cols[0]:
                    continue
                m = _PHOTON_RE.match(tok)
                if not m:
                    raise CircuitParseError(f"bad photon {tok!r}", lineno, col)
                count, p, pol, tag = m.groups()
                p = port(p, lineno, col)
                count = count or "1"
                n = _photon_count(count, param_values, lineno, col)
                if n < 1:
                    raise CircuitParseError(f"photon count must be positive, got {n}", lineno, col)
                pol_enum = {None: Polarization.NONE, "par": Polarization.PARALLEL,
                            "perp": Polarization.PERPENDICULAR}[pol]
                if polarized != (pol_enum is not Polarization.NONE):
                    need = "needs a :par/:perp label" if polarized else "cannot carry a polarization"
                    raise StructureError(f"photon {tok!r} {need}", lineno, col)
                photons.append(Photon(p, pol_enum, int(tag or 0), count))
            if not photons:
                raise ArityError("'input' needs at least one photon", lineno, kwcol)
        elif kw == "detect":
            name = vals[0]
            if any(name == d for d, _ in detectors):
                raise StructureError(f"detector {name!r} declared twice", lineno, cols[0])
            p = port(vals[1], lineno, cols[1])
            if any(p == q for _, q in detectors):
                raise StructureError(f"port {p} already has a detector", lineno, cols[1])
            detectors.append((name, p))

    if n_ports is None:
        raise StructureError("missing 'modes' statement", 1, 1)
    if not photons:
        raise StructureError("missing 'input' statement", len(text.splitlines()) or 1, 1)
    return CircuitSpec(n_ports, polarized, tuple(params), tuple(elements), tuple(photons),
                       tuple(detectors), tuple(comments))


def _split_comment(raw: str) -> tuple[str, str, str]:
    # a '#' directly between digits is a photon tag, not a comment
    for i, ch in enumerate(raw):
        if ch == "#" and not (0 < i < len(raw) - 1 and raw[i - 1].isdigit() and raw[i + 1].isdigit()):
            return raw[:i], "#", raw[i + 1:]
    return raw, "", ""


def _photon_count(count: str, params: Mapping[str, complex], line: int, col: int) -> int:
    if count.startswith("$"):
        name = count[1:]
        if name not in params:
            raise UnknownParameterError(f"parameter ${name} used before 'param'", line, col)
        value = params[name]
    else:
        if not count.isdigit():
            raise CircuitParseError(f"bad photon count {count!r}", line, col)
        value = complex(int(count))
    if value.imag or value.real != int(value.real):
        raise CircuitParseError(f"photon count must be an integer, got {value.real:g}", line, col)
    return int(value.real)


def format_circuit(spec: CircuitSpec) -> str:
    """Canonical text; ``parse_circuit(format_circuit(s)) == s``."""
    lines = [f"# {c}" for c in spec.comments]
    lines.append(f"modes {spec.n_ports}" + (" polarized" if spec.polarized else ""))
    lines += [f"param {name} {value}" for name, value in spec.params]
    lines.append("input " + " ".join(str(p) for p in spec.photons))
    lines += [str(s) for s in spec.elements]
    lines += [f"detect {name} {port}" for name, port in spec.detectors]
    return "\n".join(lines) + "\n"


def build(spec: CircuitSpec, overrides: Mapping[str, float] | None = None) -> BuiltCircuit:
    """Instantiate elements, input photons and detectors with parameter values."""
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(spec.param_defaults))
    if unknown:
        raise KeyError(f"unknown parameter(s) {', '.join(unknown)}; "
                       f"known: {', '.join(spec.param_defaults) or 'none'}")
    values: dict[str, complex] = {}
    for name, text in spec.params:
        values[name] = complex(overrides[name]) if name in overrides else evaluate(text, values)

    pols = POLARIZED if spec.polarized else (Polarization.NONE,)
    photons: list[ModeId] = []
    for ph in spec.photons:
        n = _photon_count(ph.count, values, 0, 0)
        if n < 1:
            raise ValueError(f"photon count must be positive, got {n}")
        photons += [ModeId(ph.port, ph.polarization, ph.tag)] * n
    tags = tuple(sorted({m.tag for m in photons}))
    kw = dict(polarizations=pols, tags=tags)

    elements = []
    sinks = 0
    for st in spec.elements:
        a = st.args
        try:
            if st.keyword == "bs":
                if len(a) == 3:
                    rp, tp = (float(x) for x in a[2].split("/"))
                    r, t = 1j * math.sqrt(rp / 100), math.sqrt(tp / 100)
                else:
                    r, t = evaluate(a[2][2:], values), evaluate(a[3][2:], values)
                elements.append(beam_splitter(r, t, int(a[0].removeprefix("port")),
                                              int(a[1].removeprefix("port")), **kw))
            elif st.keyword == "phase":
                phi = _real(evaluate(a[1], values), "phase")
                elements.append(phase_shifter(int(a[0].removeprefix("port")), phi, **kw))
            elif st.keyword == "yjunction":
                T = _real(evaluate(a[3][2:], values), "T")
                ports = [int(x.removeprefix("port")) for x in a[:3]]
                elements.append(y_junction(T, ports, **kw))
            elif st.keyword == "pbs":
                elements.append(polarizing_beam_splitter(int(a[0].removeprefix("port")),
                                                         int(a[1].removeprefix("port")), tags=tags))
            elif st.keyword == "polarizer":
                sinks += 1
                angle = _real(evaluate(a[1], values), "polarizer angle")
                elements.append(polarizer(int(a[0].removeprefix("port")), angle, tags=tags, sink=sinks))
        except (ElementError, ValueError) as exc:
            raise NonUnitaryError(str(exc), st.line, st.columns[0] if st.columns else 0) from None

    declared = frozenset(ModeId(p, pol, tag) for p in range(1, spec.n_ports + 1)
                         for pol in pols for tag in tags)
    circuit = Circuit(tuple(elements), declared)
    detectors = tuple(DetectorSpec.at_port(port, circuit.declared_modes, name=name)
                      for name, port in spec.detectors)
    return BuiltCircuit(spec, values, circuit, tuple(photons), detectors)
