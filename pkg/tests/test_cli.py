from __future__ import annotations

import json

import pytest

from dilemmagen.cli import run
from dilemmagen.fixtures import fixture_path


@pytest.fixture
def driving_args():
    return [
        "--tasks", str(fixture_path("driving_tasks.json")),
        "--causality", str(fixture_path("driving_causality.json")),
        "--world", str(fixture_path("driving_world.json")),
    ]


def test_validate_fixtures_exit_zero(driving_args, capsys):
    assert run(["validate", *driving_args]) == 0
    assert "0 errors" in capsys.readouterr().err


def test_validate_strict_on_driving(driving_args):
    assert run(["validate", *driving_args, "--strict"]) == 0


def test_validate_reports_broken_model(tmp_path, driving_args, capsys):
    broken = tmp_path / "broken_tasks.json"
    doc = json.loads(fixture_path("driving_tasks.json").read_text())
    doc["tasks"][0]["children"] = doc["tasks"][0]["children"][:1] + ["NoSuchTask"]
    broken.write_text(json.dumps(doc))
    code = run(["validate", "--tasks", str(broken), *driving_args[2:]])
    assert code == 1


def test_generate_emits_result_document(driving_args, capsys):
    assert run(["generate", *driving_args, "--type", "both"]) == 0
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert doc["candidates"][0]["tasks"] == ["Handle_aquaplaning", "Handle_red_light"]
    assert sorted(doc["candidates"][0]["goal_state"]) == [
        ["Light", "has-color", "Red"],
        ["Vehicle", "has-state", "aquaplaning"],
    ]


def test_generate_top_limits_output(driving_args, capsys):
    assert run(["generate", *driving_args, "--top", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["candidates"]) == 1


def test_generate_out_file(driving_args, tmp_path, capsys):
    target = tmp_path / "result.json"
    assert run(["generate", *driving_args, "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["candidates"]


def test_generate_require_result_exit_three(driving_args):
    code = run(["generate", *driving_args, "--type", "prohibition", "--require-result"])
    assert code == 3


def test_generate_criticality_preset(driving_args, capsys):
    assert run(["generate", *driving_args, "--criticality", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    # bounds 2..4 admit both pairs (severities 4 and 2)
    assert len(doc["candidates"]) == 2


def test_generate_seed_accepted_and_ignored(driving_args, capsys):
    assert run(["generate", *driving_args, "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert run(["generate", *driving_args, "--seed", "8"]) == 0
    second = capsys.readouterr().out
    assert first == second


def test_inspect_barriers_only_needs_causality(capsys):
    code = run(["inspect", "barriers", "--causality", str(fixture_path("driving_causality.json"))])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "Answer_a_phone_call",
        "Drive_fast",
        "Handle_aquaplaning",
        "Handle_red_light",
        "Handle_stop",
    ]


def test_inspect_actions(capsys):
    run(["inspect", "actions", "--causality", str(fixture_path("driving_causality.json"))])
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "Answer_a_phone_call",
        "Drive_fast",
        "Drive_slowly",
        "Leave_late_from_work",
    ]


def test_inspect_pairs_and_filtered_and_ranked(driving_args, capsys):
    run(["inspect", "pairs", *driving_args[:4]])
    pairs = capsys.readouterr().out.splitlines()
    assert pairs == [
        "OBLIGATION Handle_aquaplaning Handle_red_light",
        "OBLIGATION Handle_aquaplaning Handle_stop",
    ]
    run(["inspect", "filtered", *driving_args[:4]])
    assert capsys.readouterr().out.splitlines() == pairs
    run(["inspect", "ranked", *driving_args])
    ranked = capsys.readouterr().out.splitlines()
    assert ranked[0].startswith("1 OBLIGATION Handle_aquaplaning Handle_red_light")
    assert ranked[1].startswith("2 OBLIGATION Handle_aquaplaning Handle_stop")


def test_inspect_ranked_requires_world(driving_args):
    assert run(["inspect", "ranked", *driving_args[:4]]) == 2


def test_verify_pair(driving_args, capsys):
    code = run(["verify", *driving_args, "--pair", "Handle_stop", "Handle_aquaplaning"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pair"] == ["Handle_stop", "Handle_aquaplaning"]
    by_type = {r["type"]: r["holds"] for r in doc["reports"]}
    assert by_type == {"OBLIGATION": True, "PROHIBITION": False}


def test_export_dot(capsys):
    code = run(["export-dot", "--causality", str(fixture_path("screening_causality.json"))])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph causality {")
    assert '"b2" [label="Barrier before the gravity chain", shape=box];' in out


def test_usage_errors_exit_two(driving_args):
    assert run([]) == 2
    assert run(["generate"]) == 2  # missing required paths
    assert run(["inspect", "nonsense", *driving_args]) == 2
    assert run(["generate", *driving_args, "--categories", "bogus"]) == 2


def test_missing_file_exits_one(driving_args, capsys):
    code = run(["generate", "--tasks", "/no/such/file.json", *driving_args[2:]])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_malformed_model_exits_one(tmp_path, driving_args):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["generate", "--tasks", str(bad), *driving_args[2:]]) == 1


def test_stdout_stays_machine_readable(driving_args, capsys):
    run(["generate", *driving_args])
    captured = capsys.readouterr()
    json.loads(captured.out)  # must parse clean
    assert "candidate(s)" in captured.err


def test_quiet_silences_the_summary(driving_args, capsys):
    assert run(["--quiet", "generate", *driving_args]) == 0
    captured = capsys.readouterr()
    json.loads(captured.out)
    assert captured.err == ""
