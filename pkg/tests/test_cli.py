from __future__ import annotations

import json
from pathlib import Path

import pytest

from fairaudit import parse_dimacs, search
from fairaudit.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture(name: str) -> str:
    return str(FIXTURES / f"{name}.json")


def graph(name: str) -> str:
    return str(FIXTURES / "graphs" / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert err == ""
    return code, json.loads(out)


class TestAudit:
    def test_adopt_fails_universal_with_protected_witness(self, capsys):
        code, report = run_json(
            capsys, "audit", fixture("adopt"), "--notion", "universal"
        )
        assert code == 1
        assert report["verdicts"]["universal"] is False
        assert report["verdicts"]["existential"] is True
        witness = report["witnesses"]["universal"]
        assert witness["unfair_explanation"]["features"] == ["s"]
        assert witness["instance"] == {"s1": False, "s2": False, "s": False}

    def test_adopt2_is_universally_fair(self, capsys):
        code, report = run_json(
            capsys, "audit", fixture("adopt2"), "--notion", "universal"
        )
        assert code == 0
        assert report["verdicts"]["fair"] is True
        for notion in ("ftu", "existential", "universal"):
            assert notion not in report["witnesses"]

    def test_empty_space_is_vacuously_fair_with_warning(self, capsys):
        code, report = run_json(capsys, "audit", fixture("empty-space"))
        assert code == 0
        assert report["space"]["size_constrained"] == 0
        assert any("empty constrained space" in w for w in report["warnings"])

    def test_notion_selects_the_headline(self, capsys):
        code_ftu, _ = run_json(
            capsys, "audit", fixture("xor_link"), "--notion", "ftu"
        )
        code_exist, _ = run_json(
            capsys, "audit", fixture("xor_link"), "--notion", "existential"
        )
        assert code_ftu == 0
        assert code_exist == 1

    def test_search_engine_matches_exhaustive(self, capsys):
        for name in ("adopt", "xor_link", "work_from_home"):
            a, ra = run_json(capsys, "audit", fixture(name), "--engine", "search")
            b, rb = run_json(capsys, "audit", fixture(name), "--engine", "exhaustive")
            assert a == b
            assert ra["verdicts"] == rb["verdicts"]

    def test_per_decision_listing(self, capsys):
        code, report = run_json(
            capsys, "audit", fixture("mirrored_features"), "--per-decision"
        )
        assert code == 0
        statuses = {d["status"] for d in report["per_decision"]}
        assert statuses == {"EXISTENTIALLY_FAIR_ONLY"}
        assert len(report["per_decision"]) == 2

    def test_reports_are_byte_identical(self, capsys):
        _, first, _ = run(capsys, "audit", fixture("work_from_home"))
        _, second, _ = run(capsys, "audit", fixture("work_from_home"))
        assert first == second

    def test_timing_flag_populates_timing_ms(self, capsys):
        _, plain = run_json(capsys, "audit", fixture("adopt"))
        assert plain["timing_ms"] is None
        _, timed = run_json(capsys, "audit", fixture("adopt"), "--timing")
        assert isinstance(timed["timing_ms"], float)

    def test_ignore_constraints_equals_stripped_document(self, capsys, tmp_path):
        doc = json.loads(Path(fixture("bonus_goals")).read_text())
        doc["constraints"] = []
        stripped = tmp_path / "stripped.json"
        stripped.write_text(json.dumps(doc))
        code_a, report_a = run_json(
            capsys, "audit", fixture("bonus_goals"), "--ignore-constraints"
        )
        code_b, report_b = run_json(capsys, "audit", str(stripped))
        assert code_a == code_b
        assert report_a == report_b

    def test_text_format(self, capsys):
        code, out, err = run(
            capsys, "audit", fixture("bonus_goals"), "--format", "text",
            "--notion", "universal",
        )
        assert code == 0
        assert "headline [universal]: FAIR" in out
        assert "scope profile: ONLY_P" in out

    def test_missing_file_is_exit_2(self, capsys):
        code, out, err = run(capsys, "audit", str(FIXTURES / "nope.json"))
        assert code == 2
        assert "error:" in err


class TestExplain:
    def test_adoption_decision_unfair_under_constraints(self, capsys):
        code, report = run_json(
            capsys, "explain", fixture("adoption_same_race"), "--instance", "1,1,1"
        )
        assert code == 1
        assert [e["features"] for e in report["pi_explanations"]] == [["s"]]
        assert report["verdict"]["status"] == "UNFAIR"

    def test_adoption_decision_fair_when_ignoring_constraints(self, capsys):
        code, report = run_json(
            capsys,
            "explain",
            fixture("adoption_same_race"),
            "--instance",
            "1,1,1",
            "--ignore-constraints",
        )
        assert code == 0
        assert [e["features"] for e in report["pi_explanations"]] == [["s1", "s2"]]
        assert report["pi_explanations"][0]["fair"] is True

    def test_spouses_decision_lists_both_reasons(self, capsys):
        code, report = run_json(
            capsys, "explain", fixture("spouses"), "--instance", "1,1"
        )
        assert code == 0
        assert report["verdict"]["status"] == "EXISTENTIALLY_FAIR_ONLY"
        assert [e["features"] for e in report["pi_explanations"]] == [["m"], ["n"]]
        fair_flags = {tuple(e["features"]): e["fair"] for e in report["pi_explanations"]}
        assert fair_flags == {("m",): False, ("n",): True}

    def test_instance_outside_the_space_names_the_constraint(self, capsys):
        code, out, err = run(
            capsys, "explain", fixture("training_course"), "--instance", "0,1"
        )
        assert code == 2
        assert "(implies m e)" in err

    def test_axps_listed_alongside(self, capsys):
        code, report = run_json(
            capsys, "explain", fixture("work_from_home"), "--instance", "1,1,1,1"
        )
        assert code == 1
        assert [e["features"] for e in report["axps"]] == [["f", "p"], ["p", "b", "a"]]
        assert [e["features"] for e in report["pi_explanations"]] == [["f", "p"]]


class TestCheck:
    def test_loose_violation_exits_1(self, capsys):
        code, report = run_json(
            capsys, "check", fixture("work_from_home"), "--what", "loose"
        )
        assert code == 1
        assert report["result"] is False
        assert report["witnesses"]["loose"]["protected_feature"] == "f"

    def test_disentangled_clean_model_exits_0(self, capsys):
        code, report = run_json(
            capsys, "check", fixture("training_course"), "--what", "disentangled"
        )
        assert code == 0
        assert report["result"] is True

    def test_scope_prints_the_profile(self, capsys):
        code, report = run_json(
            capsys, "check", fixture("pregnancy_bonus"), "--what", "scope"
        )
        assert code == 0
        assert report["result"] == "ONLY_P"

    def test_decomposable(self, capsys):
        code, report = run_json(
            capsys, "check", fixture("mirrored_features"), "--what", "decomposable"
        )
        assert code == 1
        assert report["result"] is False


class TestExportCnf:
    def test_constrained_xor_link_is_unsat(self, capsys, tmp_path):
        out_file = tmp_path / "q.cnf"
        code, out, _ = run(capsys, "export-cnf", fixture("xor_link"), str(out_file))
        assert code == 0
        formula = parse_dimacs(out_file.read_text())
        assert not search(formula).satisfiable
        assert "x.a" in out  # legend printed

    def test_stripped_bonus_model_is_sat(self, capsys, tmp_path):
        out_file = tmp_path / "q.cnf"
        code, *_ = run(
            capsys,
            "export-cnf",
            fixture("bonus_goals"),
            str(out_file),
            "--ignore-constraints",
        )
        assert code == 0
        assert search(parse_dimacs(out_file.read_text())).satisfiable

    def test_multivalued_feature_exports_exactly_one(self, capsys, tmp_path):
        out_file = tmp_path / "q.cnf"
        run(capsys, "export-cnf", fixture("spouses"), str(out_file))
        formula = parse_dimacs(out_file.read_text())
        onehot = sorted(
            v for v, n in formula.comment_map.items() if n.startswith("x.n=")
        )
        assert tuple(onehot) in formula.clauses
        assert (-onehot[0], -onehot[1]) in formula.clauses


class TestFtci:
    def test_maternity_leave_newly_protected(self, capsys):
        code, report = run_json(
            capsys, "ftci", fixture("ftci_leave"), graph("maternity")
        )
        assert report["ftci"]["newly_protected"] == ["maternity_leave"]
        assert code == 1  # the classifier leans on maternity_leave

    def test_empty_graph_report_equals_audit(self, capsys):
        _, audit_out, _ = run(capsys, "audit", fixture("adopt"))
        _, ftci_out, _ = run(capsys, "ftci", fixture("adopt"), graph("empty"))
        assert audit_out == ftci_out

    def test_race_chain_flips_the_verdict(self, capsys):
        code_before, before = run_json(capsys, "audit", fixture("adoption_race"))
        assert code_before == 0
        code_after, after = run_json(
            capsys, "ftci", fixture("adoption_race"), graph("race_chain")
        )
        assert code_after == 1
        assert after["ftci"]["newly_protected"] == ["s"]
        assert after["verdicts"]["existential"] is False

    def test_unknown_vertex_is_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"vertices": ["gender"], "edges": []}))
        code, out, err = run(capsys, "ftci", fixture("ftci_leave"), str(bad))
        assert code == 2
        assert "not a vertex" in err


class TestSnapshots:
    def test_fixture_reports_match_snapshots(self, capsys, fixtures_dir):
        # refresh with scripts/audit_all_fixtures.py --write
        checked = 0
        for path in sorted(fixtures_dir.glob("*.json")):
            snap = fixtures_dir / "snapshots" / f"{path.stem}.audit.json"
            assert snap.exists(), f"missing snapshot for {path.name}"
            code, out, err = run(
                capsys, "audit", str(path), "--notion", "existential"
            )
            assert code in (0, 1)
            assert out == snap.read_text(), f"report drifted for {path.name}"
            checked += 1
        assert checked >= 12


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ("audit", "adopt"),
            ("audit", "adopt2", "--notion", "universal"),
            ("explain", "spouses", "--instance", "1,1"),
            ("check", "work_from_home", "--what", "loose"),
            ("check", "pregnancy_bonus", "--what", "scope"),
        ],
    )
    def test_only_documented_exit_codes(self, capsys, argv):
        cmd, name, *rest = argv
        code = main([cmd, fixture(name), *rest])
        capsys.readouterr()
        assert code in (0, 1, 2)

    def test_capacity_error_is_exit_2(self, capsys):
        code, out, err = run(capsys, "audit", fixture("spouses"), "--cap", "2")
        assert code == 2
        assert "cap" in err
