import subprocess
import sys

import numpy as np
import pytest

from twophoton.cli import main
from twophoton.scenarios import (
    SCENARIOS,
    UnknownScenarioError,
    format_number,
    preset_files,
    preset_text,
    reports_to_csv,
    run_scenario,
    sweep,
)


def yfactor(T):
    return 2 * T * (1 - T)


@pytest.mark.parametrize("name", list(SCENARIOS))
def test_every_preset_passes(name):
    report = run_scenario(name)
    assert report.passed, report.failures()
    assert report.results["oracle_deviation"] < 1e-10
    for p in report.distribution.probabilities.values():
        assert 0 <= p <= 1 + 1e-12
    assert report.distribution.total_probability() == pytest.approx(1, abs=1e-9)


def test_every_preset_file_has_a_scenario():
    assert sorted(s.preset for s in SCENARIOS.values()) == preset_files()


class TestRunScenario:
    def test_hom(self):
        r = run_scenario("hom").results
        assert r["p_split"] == pytest.approx(0, abs=1e-12)
        assert r["p_both_d1"] == pytest.approx(0.5) and r["p_both_d2"] == pytest.approx(0.5)

    def test_eraser(self):
        r = run_scenario("eraser").results
        assert r["coincidence"] == pytest.approx(0, abs=1e-12)
        assert r["coincidence_distinguishable"] == pytest.approx(2 / 16)

    def test_fock_five(self):
        assert run_scenario("fock-n", {"n": 5}).results["g2_cross"] == pytest.approx(0.8, abs=1e-12)

    def test_unknown(self):
        with pytest.raises(UnknownScenarioError):
            run_scenario("hbt")


class TestSweep:
    grid = np.linspace(0.05, 0.95, 19)

    def test_hom_over_pcc_is_two(self):
        hom = sweep("y-hom", "T", self.grid)
        pcc = sweep("y-pcc", "T", self.grid)
        for h, p in zip(hom, pcc):
            assert h.results["forward"] / p.results["forward"] == pytest.approx(2, abs=1e-10)

    def test_ends_are_zero(self):
        for rep in sweep("y-pcc", "T", [0.0, 1.0]):
            assert rep.results["forward"] == 0

    def test_independent_equals_pcc(self):
        for i, p in zip(sweep("y-indep", "T", self.grid), sweep("y-pcc", "T", self.grid)):
            assert i.results["forward"] == pytest.approx(p.results["forward"], abs=1e-12)

    def test_bad_parameter(self):
        with pytest.raises(KeyError):
            sweep("hom", "T", [0.5])

    def test_swapped_y_inputs_same_forward(self):
        from twophoton.circuit_format import parse_circuit
        from twophoton.scenarios import evaluate_circuit
        from twophoton.observables import forward_two_photon_probability

        text = preset_text("y-pcc.circ").replace("yjunction 1 2 3", "yjunction 1 3 2")
        for T in (0.2, 0.6):
            ev = evaluate_circuit(parse_circuit(text).build({"T": T}))
            assert forward_two_photon_probability(ev.output, 1) == pytest.approx(yfactor(T) ** 2, abs=1e-12)


class TestCsv:
    def test_number_format(self):
        assert format_number(1 / 3) == "0.333333333333"
        assert format_number(-1e-17) == "0"
        assert format_number(2.0) == "2"

    def test_header_and_rows(self):
        text = reports_to_csv(sweep("y-pcc", "T", [0.25, 0.5]))
        lines = text.split("\n")
        assert lines[0].startswith("scenario,T,")
        assert lines[1].startswith("y-pcc,0.25,")
        assert text.endswith("\n") and len(lines) == 4


class TestCli:
    def test_run(self, capsys):
        assert main(["run", "hom"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[1].startswith("hom,")

    def test_deterministic(self, capsys):
        main(["sweep", "y-hom", "--param", "T", "--from", "0.05", "--to", "0.95", "--steps", "19"])
        first = capsys.readouterr().out
        main(["sweep", "y-hom", "--param", "T", "--from", "0.05", "--to", "0.95", "--steps", "19"])
        assert capsys.readouterr().out == first
        assert len(first.splitlines()) == 20

    def test_set_override(self, capsys):
        assert main(["run", "fock-n", "--set", "n=4", "--set", "phi=0.7"]) == 0
        header, row = capsys.readouterr().out.splitlines()
        values = dict(zip(header.split(","), row.split(",")))
        assert values["g2_cross"] == "0.75"

    def test_simulate(self, tmp_path, capsys):
        path = tmp_path / "hom.circ"
        path.write_text(preset_text("hom.circ"))
        assert main(["simulate", str(path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "n[1],n[2],amp_re,amp_im,probability"
        assert sorted(lines[1:]) == ["0,2,0,0.707106781187,0.5", "2,0,0,0.707106781187,0.5"]
        assert main(["simulate", str(path), "--counts"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "d1,d2,probability"

    def test_presets_lists_all(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out
        assert all(name in out for name in SCENARIOS)

    @pytest.mark.parametrize("argv", [["run", "nope"], ["run", "hom", "--set", "T"], ["run", "y-hom", "--set", "Q=1"],
                                      ["sweep", "hom", "--param", "T", "--from", "0", "--to", "1", "--steps", "3"],
                                      ["bogus"], []])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == 2

    def test_corrupted_file(self, tmp_path, capsys):
        path = tmp_path / "bad.circ"
        path.write_text(preset_text("y-pcc.circ").replace("bs 3 2 50/50", "bs 3 7 50/50"))
        assert main(["simulate", str(path)]) == 2
        err = capsys.readouterr().err
        assert f"{path}:5:6: undeclared port" in err

    def test_physics_failure_exit_code(self, monkeypatch, capsys):
        from twophoton import scenarios

        broken = scenarios.SCENARIOS["hom"]
        monkeypatch.setitem(scenarios.SCENARIOS, "hom", type(broken)(
            broken.name, broken.preset, broken.summary, broken.evaluate, lambda p: {"p_split": 0.5}))
        assert main(["run", "hom"]) == 1
        assert "check failed" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "twophoton", "run", "pcc"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[1].endswith(",true")
