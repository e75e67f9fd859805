"""Tests for the command line subcommands and their exit codes."""

import json

import pytest

from skeleton_embed import main as cli
from skeleton_embed.exceptions import PerturbationFailure

from .conftest import NOTCHED, NOTCHED_POINTS, instance_text

SQUARE = [[0, 0], [10, 0], [10, 10], [0, 10]]


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(instance_text(SQUARE, [[2, 5], [5, 5], [8, 5]]), encoding="utf-8")
    return path


@pytest.fixture
def notched_file(tmp_path):
    path = tmp_path / "notched.json"
    polygon = [list(v) for v in NOTCHED]
    points = [list(p) for p in NOTCHED_POINTS]
    path.write_text(instance_text(polygon, points), encoding="utf-8")
    return path


@pytest.mark.parametrize("command", ["skeleton", "sss", "partition", "embed"])
def test_stage_commands_write_json(command, instance_file, tmp_path):
    out = tmp_path / f"{command}.json"
    code = cli.main([command, "--in", str(instance_file), "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))


def test_skeleton_command_to_stdout(instance_file, capsys):
    assert cli.main(["skeleton", "--in", str(instance_file)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["faces"]) == 4
    assert data["degenerate"] is True


def test_embed_output_is_deterministic(notched_file, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["embed", "--in", str(notched_file), "--out", str(first)]) == 0
    assert cli.main(["embed", "--in", str(notched_file), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    data = json.loads(first.read_text(encoding="utf-8"))
    assert len(data["routes"]) == 14


def test_embed_with_svg(notched_file, tmp_path):
    out, svg = tmp_path / "embedding.json", tmp_path / "embedding.svg"
    args = ["embed", "--in", str(notched_file), "--out", str(out), "--svg", str(svg)]
    assert cli.main([*args, "--layers", "polygon,embedding"]) == 0
    assert svg.read_text(encoding="utf-8").count('id="edge-') == 14


def test_validate_passes(notched_file, tmp_path):
    report = tmp_path / "report.json"
    assert cli.main(["validate", "--in", str(notched_file), "--out", str(report)]) == 0
    assert json.loads(report.read_text(encoding="utf-8"))["passed"] is True


def test_validate_stored_embedding(instance_file, tmp_path):
    embedding = tmp_path / "embedding.json"
    assert cli.main(["embed", "--in", str(instance_file), "--out", str(embedding)]) == 0
    args = ["validate", "--in", str(instance_file), "--embedding", str(embedding)]
    assert cli.main([*args, "--out", str(tmp_path / "report.json")]) == 0


def test_validate_fails_on_tampered_embedding(instance_file, tmp_path):
    embedding = tmp_path / "embedding.json"
    assert cli.main(["embed", "--in", str(instance_file), "--out", str(embedding)]) == 0
    data = json.loads(embedding.read_text(encoding="utf-8"))
    data["routes"] = data["routes"][:1]
    embedding.write_text(json.dumps(data), encoding="utf-8")
    report = tmp_path / "report.json"
    args = ["validate", "--in", str(instance_file), "--embedding", str(embedding)]
    assert cli.main([*args, "--out", str(report)]) == 1
    assert json.loads(report.read_text(encoding="utf-8"))["passed"] is False


def test_validate_bend_budget_zero(instance_file, tmp_path):
    embedding = tmp_path / "embedding.json"
    embedding.write_text(
        json.dumps(
            {
                "assignment": {"0": 1, "1": 0, "2": 2},
                "routes": [
                    {"parent": 0, "child": 1, "polyline": [[5, 5], [5, 7], [2, 5]]},
                    {"parent": 0, "child": 2, "polyline": [[5, 5], [8, 5]]},
                ],
            }
        ),
        encoding="utf-8",
    )
    args = ["validate", "--in", str(instance_file), "--embedding", str(embedding)]
    out = str(tmp_path / "r.json")
    assert cli.main([*args, "--bend-budget", "0", "--out", out]) == 1
    assert cli.main([*args, "--bend-budget", "1", "--out", out]) == 0


def test_missing_input_file_is_input_error(tmp_path, capsys):
    code = cli.main(["embed", "--in", str(tmp_path / "missing.json")])
    assert code == 2
    assert "Error (io)" in capsys.readouterr().err


def test_malformed_instance_is_input_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"polygon": [[0, 0]', encoding="utf-8")
    assert cli.main(["skeleton", "--in", str(path)]) == 2


def test_point_outside_is_input_error(tmp_path, capsys):
    path = tmp_path / "outside.json"
    path.write_text(instance_text(SQUARE, [[20, 5]]), encoding="utf-8")
    assert cli.main(["embed", "--in", str(path)]) == 2
    assert "outside" in capsys.readouterr().err


def test_unknown_subcommand_and_help():
    assert cli.main(["bogus"]) == 2
    assert cli.main(["--help"]) == 0


@pytest.mark.parametrize(
    "flags",
    [["--log-level", "chatty"], ["--layers", "polygon,heatmap"], ["--tolerance", "0.5"]],
)
def test_bad_flags_are_input_errors(flags, instance_file):
    assert cli.main(["skeleton", "--in", str(instance_file), *flags]) == 2


def test_pipeline_failure_exits_one(instance_file, monkeypatch, capsys):
    def _fail(*args, **kwargs):
        raise PerturbationFailure("No backbone vertex can anchor the division")

    monkeypatch.setattr(cli, "run_pipeline", _fail)
    assert cli.main(["embed", "--in", str(instance_file)]) == 1
    assert "Error (embed)" in capsys.readouterr().err


def test_gen_single_instance(tmp_path):
    out = tmp_path / "gen.json"
    args = ["gen", "--m", "6", "--n", "5", "--seed", "2", "--out", str(out)]
    assert cli.main(args) == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert len(data["polygon"]) == 6
    assert data["tree"] == {"balanced": 5}


def test_gen_many_instances(tmp_path):
    out_dir = tmp_path / "instances"
    args = ["gen", "--m", "5", "--n", "3", "--seed", "7", "--count", "3"]
    assert cli.main([*args, "--out", str(out_dir)]) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["instance_7.json", "instance_8.json", "instance_9.json"]


def test_gen_many_needs_out_dir():
    assert cli.main(["gen", "--m", "5", "--n", "3", "--count", "2"]) == 2


def test_render_command(notched_file, tmp_path):
    svg = tmp_path / "render.svg"
    args = ["render", "--in", str(notched_file), "--out", str(svg)]
    assert cli.main([*args, "--layers", "polygon,sss,points"]) == 0
    text = svg.read_text(encoding="utf-8")
    assert 'id="subface-0"' in text
    assert 'id="edge-' not in text
