import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twophoton.circuit_format import (
    ArityError,
    CircuitParseError,
    ExpressionError,
    NonUnitaryError,
    StructureError,
    UndeclaredPortError,
    UnknownKeywordError,
    UnknownParameterError,
    evaluate,
    format_circuit,
    parse_circuit,
)
from twophoton.fock import ModeId, Polarization
from twophoton.scenarios import preset_files, preset_text

FIG1A = "modes 3\nbs 2 3 50/50\nyjunction 1 2 3 T=0.5\ninput photons 2@3\ndetect d1 port1\n"


class TestEvaluate:
    @pytest.mark.parametrize("text, value", [
        ("1/sqrt2", 1 / math.sqrt(2)),
        ("i/sqrt2", 1j / math.sqrt(2)),
        ("-0.25i", -0.25j),
        ("pi/4", math.pi / 4),
        ("sqrt(0.5)", math.sqrt(0.5)),
        ("2*$T", 0.6),
        ("exp(i*pi)", -1),
    ])
    def test_values(self, text, value):
        assert evaluate(text, {"T": 0.3}) == pytest.approx(value, abs=1e-15)

    @pytest.mark.parametrize("text", ["__import__('os')", "1+", "x", "(1).real", "1/0"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            evaluate(text)


class TestParse:
    def test_figure_layout(self):
        spec = parse_circuit(FIG1A)
        assert spec.n_ports == 3 and not spec.polarized
        assert [s.keyword for s in spec.elements] == ["bs", "yjunction"]
        built = spec.build()
        assert built.photons == (ModeId(3), ModeId(3))
        assert built.detectors[0].modes == frozenset({ModeId(1)})

    def test_comments_and_blank_lines(self):
        spec = parse_circuit("# header\nmodes 2  # trailing\n\ninput 1#1 1#2\n")
        assert spec.comments == ("header",)
        assert [p.tag for p in spec.photons] == [1, 2]

    def test_polarized_input(self):
        built = parse_circuit("modes 2 polarized\ninput 1:par 1:perp\npbs 1 2\n").build()
        assert built.photons == (ModeId(1, Polarization.PARALLEL), ModeId(1, Polarization.PERPENDICULAR))
        assert len(built.circuit.modes) == 4

    def test_parameters_and_overrides(self):
        spec = parse_circuit("modes 3\nparam T 0.2\nparam n 2\ninput $n@3\nyjunction 1 2 3 T=$T\n")
        built = spec.build({"T": 0.7, "n": 3})
        assert built.params["T"] == 0.7
        assert len(built.photons) == 3
        with pytest.raises(KeyError, match="unknown parameter"):
            spec.build({"Q": 1})

    def test_sinks_are_unique(self):
        built = parse_circuit("modes 1 polarized\ninput 1:par\npolarizer 1 0\npolarizer 1 pi/2\n").build()
        sinks = [m.sink for m in built.circuit.modes if m.sink]
        assert sinks == [1, 2]


class TestDiagnostics:
    @pytest.mark.parametrize("text, error, line, column, needle", [
        ("modes 3\nbs 2 9 50/50\ninput 2\n", UndeclaredPortError, 2, 6, "undeclared port 9"),
        ("modes 3\nsplitter 1 2\n", UnknownKeywordError, 2, 1, "splitter"),
        ("modes 3\nbs 1 2\n", ArityError, 2, 1, "'bs' takes"),
        ("modes 2\ninput 1\nbs 1 2 r=1/sqrt2 t=1/sqrt2\n", NonUnitaryError, 3, 8, "r*conj(t)"),
        ("modes 2\ninput 1\nbs 1 2 60/30\n", NonUnitaryError, 3, 8, "does not sum"),
        ("modes 3\ninput 1\nyjunction 1 2 3 T=1.5\n", NonUnitaryError, 3, 17, "outside"),
        ("modes 2\ninput 1\nphase 1 $phi\n", UnknownParameterError, 3, 9, "$phi"),
        ("modes 2\ninput 1\nphase 1 pi+\n", ExpressionError, 3, 9, "cannot parse"),
        ("modes 2\ninput 1\npbs 1 2\n", StructureError, 3, 1, "polarized"),
        ("bs 1 2 50/50\n", StructureError, 1, 1, "modes"),
        ("modes 2 polarized\ninput 1\n", StructureError, 2, 7, ":par/:perp"),
    ])
    def test_positional(self, text, error, line, column, needle):
        with pytest.raises(error) as info:
            parse_circuit(text)
        exc = info.value
        assert (exc.line, exc.column) == (line, column)
        assert needle in exc.message
        assert str(exc).startswith(f"line {line}, column {column}:")

    def test_error_classes_are_distinct(self):
        classes = {UndeclaredPortError, UnknownKeywordError, ArityError, NonUnitaryError,
                   ExpressionError, UnknownParameterError, StructureError}
        assert len({c.kind for c in classes}) == len(classes)
        assert all(issubclass(c, CircuitParseError) for c in classes)


@pytest.mark.parametrize("name", preset_files())
def test_preset_round_trip(name):
    text = preset_text(name)
    spec = parse_circuit(text)
    assert format_circuit(spec) == text
    assert parse_circuit(format_circuit(spec)) == spec


statement = st.one_of(
    st.builds(lambda a, b: f"bs {a} {b} 50/50", st.just(1), st.just(2)),
    st.builds(lambda a, b, th: f"bs {a} {b} r=i*sin({th}) t=cos({th})",
              st.sampled_from([1, 2]), st.sampled_from([3, 4]), st.floats(0, 1.5).map(lambda x: round(x, 3))),
    st.builds(lambda p, phi: f"phase {p} {phi}", st.integers(1, 4), st.sampled_from(["pi/2", "$x", "0.1"])),
    st.builds(lambda T: f"yjunction 1 2 3 T={T}", st.sampled_from(["0.5", "$x", "0.25"])),
)


@settings(max_examples=50, deadline=None)
@given(st.lists(statement, max_size=6), st.lists(st.integers(1, 4), min_size=1, max_size=3))
def test_random_round_trip(stmts, photons):
    text = "modes 4\nparam x 0.3\ninput " + " ".join(map(str, photons)) + "\n" + "".join(s + "\n" for s in stmts)
    spec = parse_circuit(text)
    once = format_circuit(spec)
    assert once == text
    assert format_circuit(parse_circuit(once)) == once
