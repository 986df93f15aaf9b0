"""Scenario documents, the runner's exit-code contract, and the CLI.

The scenario layer is deliberately chatty: validate_scenario returns one
diagnostic string per problem instead of stopping at the first.  Those
strings are frozen here.  CLI tests go through main() with real files in
tmp_path so the exit codes are exercised end to end.
"""

import json

import pytest
import yaml

from fplab.cli import main
from fplab.errors import ConfigurationError, InputError
from fplab.gallery import GALLERY, gallery_names, get_entry, list_gallery
from fplab.runner import _exit_code, run_scenario_doc
from fplab.scenario import build_scenario, load_scenario_file, validate_scenario


def base_doc() -> dict:
    return {
        "name": "unit",
        "space": {"dimension": 1},
        "maps": {"T": "half"},
        "run": ["iterate"],
    }


# cheap enough for a unit test: 40 picard steps, tiny search horizons
SMOKE = {
    "name": "cli-smoke",
    "space": {"dimension": 1},
    "maps": {"T": "half"},
    "budget": {"index_horizon": 8, "nu_horizon": 8, "pair_samples": 20},
    "run": ["iterate", "certify"],
    "iterate": {"x0": [1.0], "steps": 40, "tol": 1e-6},
    "certify": {"route": "tau"},
}


def write_doc(tmp_path, doc, name="scenario.yaml") -> str:
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return str(path)


class TestValidateScenario:
    def test_minimal_document_is_clean(self):
        assert validate_scenario(base_doc()) == []

    def test_full_document_is_clean(self):
        doc = {
            "name": "full",
            "seed": 7,
            "space": {"dimension": 1, "norm": "euclidean"},
            "region": {"lows": [-4.0], "highs": [4.0]},
            "maps": {"T": "quarter", "S": "fifth"},
            "premetric": {"kind": "metric"},
            "gauges": {
                "F": {"expression": "t", "profile": ["nondecreasing", "continuous"]},
                "psi": "mk",
                "family": {"kind": "iterated", "base": "psi"},
                "asmk_variants": ["asmk1", "asmk2"],
            },
            "budget": {"nu_horizon": 16, "index_horizon": 32, "pair_samples": 40},
            "run": ["iterate", "alternate"],
            "iterate": {"x0": [1.0], "steps": 30},
            "alternate": {"seed_point": [1.0], "steps": 12},
        }
        assert validate_scenario(doc) == []

    def test_non_mapping_document(self):
        assert validate_scenario("nope") == ["scenario document must be a mapping"]

    @pytest.mark.parametrize(
        ("mutate", "needle"),
        [
            (lambda d: d.pop("name"), "name: required non-empty string"),
            (lambda d: d.update(name=""), "name: required non-empty string"),
            (lambda d: d.update(seed="x"), "seed: must be an integer"),
            (lambda d: d.pop("space"), "space: required table with 'dimension'"),
            (lambda d: d["space"].update(dimension=0),
             "space.dimension: required positive integer"),
            (lambda d: d["space"].update(norm="sup"),
             "space.norm: 'euclidean' or a number >= 1"),
            (lambda d: d.update(region={"lows": [0.0]}),
             "region: needs 'lows' and 'highs' lists"),
            (lambda d: d.update(region={"lows": [0.0, 1.0], "highs": [2.0, 3.0]}),
             "region: lows/highs length must equal space.dimension"),
            (lambda d: d.update(extra=1), "extra: unknown top-level field"),
            (lambda d: d["maps"].update(R="half"),
             "maps.R: unknown map slot (use 'T' or 'S')"),
            (lambda d: d.update(maps=[1]),
             "maps: expected a table with 'T' and optional 'S'"),
            (lambda d: d.update(sequence="fib"),
             "sequence: unknown named sequence 'fib'"),
            (lambda d: d.update(premetric={"kind": "weird"}),
             "premetric.kind: unknown kind 'weird'"),
            (lambda d: d.update(premetric={"kind": "composed"}),
             "premetric.G: composed premetric needs the outer gauge G"),
            (lambda d: d.update(premetric={"kind": "shifted_cyclic"}),
             "cyclic_setting: required by premetric.kind shifted_cyclic"),
            (lambda d: d.update(gauges={"F": 3}),
             "gauges.F: expected a gauge name, expression, or table"),
            (lambda d: d.update(gauges={"F": {"name": "f"}}),
             "gauges.F: gauge table needs an 'expression' field"),
            (lambda d: d.update(gauges={"F": {"expression": "t",
                                              "profile": "nondecreasing"}}),
             "gauges.F.profile: must be a list of profile entry names"),
            (lambda d: d.update(gauges={"family": {"kind": "iterated"}}),
             "gauges.family.base: iterated family needs a base gauge"),
            (lambda d: d.update(gauges={"family": {"base": "psi"}}),
             "gauges.psi: family.base refers to it but it is missing"),
            (lambda d: d.update(gauges={"family": {"kind": "explicit",
                                                   "members": ["half"]}}),
             "gauges.family.zero_fixed: explicit family must declare it"),
            (lambda d: d.update(gauges={"family": {"kind": "weird"}}),
             "gauges.family.kind: unknown kind 'weird'"),
            (lambda d: d.update(gauges={"asmk_variants": ["asmk3"]}),
             "gauges.asmk_variants: list drawn from ['asmk1', 'asmk2']"),
            (lambda d: d.update(gauges={"asmk_variants": ["asmk1"]}),
             "gauges: asmk_variants need both F and family"),
            (lambda d: d.update(cyclic_setting={"set_a": {"lo": 1.0, "hi": 2.0}}),
             "cyclic_setting.set_b: required"),
            (lambda d: d.update(cyclic_setting={"set_a": {"kind": "disk"},
                                                "set_b": {"lo": 0.0, "hi": 1.0}}),
             "cyclic_setting.set_a: disk set needs 'center' and 'radius'"),
            (lambda d: d.update(budget={"fuel": 3}),
             "budget.fuel: unknown budget field"),
            (lambda d: d.update(budget={"nu_horizon": -4}), "budget: "),
            (lambda d: d.update(run=[]), "run: required non-empty list"),
            (lambda d: d.update(run=["bogus"]), "run: unknown run name 'bogus'"),
            (lambda d: d.update(run=["iterate", "iterate"]),
             "run: duplicate run names"),
            (lambda d: d.pop("maps"),
             "maps.T: run iterate needs a map T or a named sequence"),
            (lambda d: d.update(run=["certify"], certify="x"),
             "certify: expected a table"),
            (lambda d: d.update(run=["certify"], certify={"source": "weird"}),
             "certify.source: unknown source 'weird'"),
            (lambda d: d.update(run=["certify"], certify={"source": "alternating"}),
             "maps.S: run certify on an alternating trace needs S"),
            (lambda d: d.update(run=["certify"], certify={"source": "sequence"}),
             "sequence: run certify on a sequence trace needs one"),
            (lambda d: d.update(run=["certify"], certify={"route": "scenic"}),
             "certify.route: unknown route 'scenic'"),
            (lambda d: d.update(run=["certify"], certify={"route": "composed"}),
             "premetric.kind: certify route composed needs a composed premetric"),
            (lambda d: d.update(run=["certify"], certify={"route": "mixed"}),
             "certify route mixed needs a premetric"),
            (lambda d: d.update(run=["cyclic"]),
             "cyclic_setting: required by run cyclic"),
            (lambda d: (d.pop("maps"),
                        d.update(run=["cyclic"],
                                 cyclic_setting={"set_a": {"lo": 1.0, "hi": 2.0},
                                                 "set_b": {"lo": -2.0, "hi": -1.0}})),
             "maps.T: run cyclic needs a map T"),
            (lambda d: d.update(run=["alternate"]),
             "maps.S: run alternate needs a second map"),
            (lambda d: (d.pop("maps"), d.update(run=["falsify"])),
             "maps.T: run falsify needs a trace source"),
            (lambda d: d.update(iterate=[1, 2]),
             "iterate: expected a table of run parameters"),
        ],
    )
    def test_diagnostic(self, mutate, needle):
        doc = base_doc()
        mutate(doc)
        diags = validate_scenario(doc)
        assert any(needle in diag for diag in diags), diags


class TestBuildScenario:
    def test_full_document_fields(self):
        doc = {
            "name": "full",
            "seed": 7,
            "space": {"dimension": 1},
            "region": {"lows": [-4.0], "highs": [4.0]},
            "maps": {"T": "quarter", "S": "fifth"},
            "gauges": {
                "F": {"expression": "t", "profile": ["nondecreasing", "continuous"]},
                "psi": "mk",
                "family": {"kind": "iterated", "base": "psi"},
                "asmk_variants": ["asmk1", "asmk2"],
            },
            "budget": {"nu_horizon": 16, "index_horizon": 32, "pair_samples": 40},
            "run": ["iterate", "alternate"],
            "iterate": {"x0": [1.0], "steps": 30},
            "alternate": {"seed_point": [1.0], "steps": 12},
        }
        scn = build_scenario(doc)
        assert scn.name == "full"
        assert scn.seed == 7
        assert scn.space.id == "full-space"
        assert scn.space.dimension == 1
        assert scn.region.lows == (-4.0,)
        assert scn.region.highs == (4.0,)
        assert scn.map_t.name == "quarter"
        assert scn.map_s.name == "fifth"
        assert scn.psi.name == "mk"
        assert scn.f_gauge.name == "gauges.F"
        assert scn.family is not None
        assert scn.asmk_variants == ("asmk1", "asmk2")
        assert scn.runs == ("iterate", "alternate")
        assert scn.premetric.kind == "metric"
        assert (scn.budget.nu_horizon, scn.budget.index_horizon,
                scn.budget.pair_samples) == (16, 32, 40)
        assert scn.run_params("iterate") == {"x0": [1.0], "steps": 30}
        assert scn.run_params("falsify") == {}

    def test_defaults(self):
        scn = build_scenario(base_doc())
        assert scn.seed == 0
        assert scn.space.id == "unit-space"
        assert scn.premetric.kind == "metric"
        assert scn.map_s is None and scn.sequence is None
        assert scn.asmk_variants == ()
        assert scn.runs == ("iterate",)

    def test_first_problem_wins_and_counts_the_rest(self):
        doc = {"name": "", "space": {"dimension": 0}, "run": []}
        with pytest.raises(ConfigurationError) as err:
            build_scenario(doc)
        assert "name: required non-empty string" in str(err.value)
        assert "(+2 more problem(s))" in str(err.value)

    def test_single_problem_has_no_suffix(self):
        doc = base_doc()
        doc["run"] = ["bogus"]
        with pytest.raises(ConfigurationError) as err:
            build_scenario(doc)
        assert "run: unknown run name 'bogus'" in str(err.value)
        assert "more problem" not in str(err.value)


class TestLoadScenarioFile:
    def test_round_trip(self, tmp_path):
        path = write_doc(tmp_path, base_doc())
        assert load_scenario_file(path) == base_doc()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read scenario file"):
            load_scenario_file(str(tmp_path / "missing.yaml"))

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("name: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="not valid YAML"):
            load_scenario_file(str(path))

    def test_non_mapping_document(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError,
                           match="must be a mapping at the top level"):
            load_scenario_file(str(path))


class TestExitCode:
    @pytest.mark.parametrize(
        ("verdicts", "violations", "strict", "expected"),
        [
            ({}, [], False, 0),
            ({"a": "pass", "b": "pass"}, [], False, 0),
            ({"a": "pass", "b": "fail"}, [], False, 2),
            ({"a": "pass", "b": "inconclusive"}, [], False, 3),
            ({"a": "pass", "b": "inconclusive"}, [], True, 2),
            ({"a": "pass"}, [{"path": "x"}], False, 2),
            ({"a": "fail", "b": "inconclusive"}, [], False, 2),
        ],
    )
    def test_matrix(self, verdicts, violations, strict, expected):
        assert _exit_code(verdicts, violations, strict) == expected

    def test_informational_statuses_do_not_drive_the_code(self):
        # solver and scan outcomes are recorded next to the verdicts but
        # only pass/fail/inconclusive matter for the exit code
        verdicts = {"iterate.solve": "not_converged", "falsify.scan": "not_applicable"}
        assert _exit_code(verdicts, [], False) == 0


class TestCliRun:
    def test_scenario_file_all_pass(self, tmp_path, capsys):
        path = write_doc(tmp_path, SMOKE)
        out = tmp_path / "out"
        assert main(["run", path, "--out", str(out)]) == 0

        assert sorted(p.name for p in out.iterdir()) == [
            "reports.json", "solve_fixed_point.json", "trace_picard.csv"]
        report = json.loads((out / "reports.json").read_text())
        assert sorted(report) == ["budget", "exit_code", "runs", "scenario",
                                  "seed", "verdicts", "violations"]
        assert report["scenario"] == "cli-smoke"
        assert report["seed"] == 0
        assert report["exit_code"] == 0
        assert report["violations"] == []
        expected = {f"certify.{cid}": "pass"
                    for cid in ("C1", "C2", "C3", "C4", "C5", "CAUCHY",
                                "D1", "D2", "D3", "D4", "RATE", "overall")}
        expected["iterate.solve"] = "converged"
        assert report["verdicts"] == expected

        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("cli-smoke: exit 0")
        assert "  certify.C1: pass" in lines

    def test_strict_flag_on_a_clean_run(self, tmp_path):
        path = write_doc(tmp_path, SMOKE)
        assert main(["run", path, "--out", str(tmp_path / "out"), "--strict"]) == 0

    def test_gallery_entry_by_name(self, tmp_path, capsys):
        assert main(["run", "translation", "--out", str(tmp_path / "out")]) == 2
        out = capsys.readouterr().out
        assert "translation: exit 2" in out
        assert "certify.C3: fail" in out

    def test_missing_file(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "missing.yaml"),
                     "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error: cannot read scenario file" in capsys.readouterr().err

    def test_config_error(self, tmp_path, capsys):
        doc = base_doc()
        doc["run"] = ["bogus"]
        path = write_doc(tmp_path, doc)
        assert main(["run", path, "--out", str(tmp_path / "out")]) == 1
        assert "error: run: unknown run name 'bogus'" in capsys.readouterr().err

    def test_bad_budget_scale(self, tmp_path, capsys):
        path = write_doc(tmp_path, SMOKE)
        code = main(["run", path, "--out", str(tmp_path / "out"),
                     "--budget-scale", "0"])
        assert code == 1
        assert "error: budget scale factor must be positive" in capsys.readouterr().err

    def test_escaping_orbit_cannot_fill_the_budget(self, tmp_path, capsys):
        # x -> x*x from 10 blows past the escape bound after three points,
        # far short of the aligned gaps the band checkers need
        doc = dict(SMOKE, name="escape", maps={"T": "x * x"},
                   iterate={"x0": [10.0], "steps": 40})
        path = write_doc(tmp_path, doc)
        assert main(["run", path, "--out", str(tmp_path / "out")]) == 1
        assert "aligned gaps" in capsys.readouterr().err


class TestCliValidate:
    def test_clean_file(self, tmp_path, capsys):
        path = write_doc(tmp_path, base_doc())
        assert main(["validate", path]) == 0
        assert capsys.readouterr().out.strip() == "ok"

    def test_diagnostics_go_to_stdout(self, tmp_path, capsys):
        doc = base_doc()
        doc["run"] = ["bogus"]
        path = write_doc(tmp_path, doc)
        assert main(["validate", path]) == 0
        assert "run: unknown run name 'bogus'" in capsys.readouterr().out

    def test_unreadable_file_still_exits_zero(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "missing.yaml")]) == 0
        assert "cannot read scenario file" in capsys.readouterr().out


class TestCliGallery:
    def test_list(self, capsys):
        assert main(["gallery", "--list"]) == 0
        out = capsys.readouterr().out
        for name in gallery_names():
            assert name in out
        assert "exit 0" in out and "exit 2" in out

    def test_run_unknown_entry(self, capsys):
        assert main(["gallery", "--run", "nope"]) == 1
        assert "unknown gallery entry" in capsys.readouterr().err


class TestGalleryTable:
    def test_names(self):
        names = gallery_names()
        assert names == ("banach-half", "meir-keeler", "translation", "periodic",
                         "cyclic-line", "alternating-45", "composed-G",
                         "harmonic-divergent")
        assert len(set(names)) == len(names)

    def test_expected_exits(self):
        expected = {
            "banach-half": 0,
            "meir-keeler": 2,
            "translation": 2,
            "periodic": 2,
            "cyclic-line": 0,
            "alternating-45": 0,
            "composed-G": 0,
            "harmonic-divergent": 2,
        }
        assert {e.name: e.expected_exit for e in GALLERY} == expected

    def test_entries_are_internally_consistent(self):
        for entry in GALLERY:
            assert entry.doc["name"] == entry.name
            assert validate_scenario(entry.doc) == []
            assert entry.description
            assert entry.expectations

    def test_get_entry(self):
        assert get_entry("banach-half").name == "banach-half"
        with pytest.raises(InputError, match="unknown gallery entry"):
            get_entry("nope")

    def test_listing_has_one_line_per_entry(self):
        lines = list_gallery().splitlines()
        assert len(lines) == len(GALLERY)
        for entry, line in zip(GALLERY, lines):
            assert line.startswith(entry.name)
            assert f"exit {entry.expected_exit}" in line


class TestRunnerOverrides:
    def test_reports_are_deterministic(self, tmp_path):
        run_scenario_doc(SMOKE, str(tmp_path / "a"))
        run_scenario_doc(SMOKE, str(tmp_path / "b"))
        first = (tmp_path / "a" / "reports.json").read_bytes()
        second = (tmp_path / "b" / "reports.json").read_bytes()
        assert first == second

    def test_seed_and_budget_scale_are_recorded(self, tmp_path):
        run_scenario_doc(SMOKE, str(tmp_path / "out"), seed=9, budget_scale=0.5)
        report = json.loads((tmp_path / "out" / "reports.json").read_text())
        assert report["seed"] == 9
        assert report["budget"]["index_horizon"] == 4
        assert report["budget"]["nu_horizon"] == 4
        assert report["budget"]["pair_samples"] == 10

    def test_run_result_mirrors_the_report(self, tmp_path):
        result = run_scenario_doc(SMOKE, str(tmp_path / "out"))
        assert result.name == "cli-smoke"
        assert result.exit_code == 0
        assert result.violations == []
        assert "reports.json" in result.artifacts
        assert "trace_picard.csv" in result.artifacts
        assert result.verdicts["certify.overall"] == "pass"
