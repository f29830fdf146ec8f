import json
import subprocess
import sys

import pytest

from kagome.cli import main
from kagome.render import rendered_area, TILE_AREA
from kagome.serialize import tiling_from_json
from kagome.tiling import fish_count


def run_cli(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_enumerate_golden_fields(capsys):
    code, out, err = run_cli(capsys, "enumerate", "--region", "lozenge:2")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["region"] == {"family": "lozenge", "n": 2,
                             "tiles": 4, "inner_vertices": 5}
    assert doc["flips"] == "all"
    assert doc["nodes"] == 11 and doc["edges"] == 14
    assert doc["connected"] is True
    assert doc["diameter"] == 6
    assert len(doc["height_extremes"]["min_nodes"]) == 1
    assert len(doc["height_extremes"]["max_nodes"]) == 1


def test_enumerate_restrained(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--region", "lozenge:2",
                           "--variant", "restrained")
    assert code == 0
    doc = json.loads(out)
    assert doc["flips"] == "restrained"
    assert doc["nodes"] == 7 and doc["edges"] == 8
    assert doc["diameter"] == 4


def test_enumerate_skip_diameter(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--region", "lozenge:2",
                           "--skip-diameter")
    assert code == 0
    assert json.loads(out)["diameter"] is None


def test_enumerate_writes_dot_and_graph_json(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    gjson = tmp_path / "g.json"
    code, _, _ = run_cli(capsys, "enumerate", "--region", "lozenge:2",
                         "--dot", str(dot), "--graph-json", str(gjson))
    assert code == 0
    text = dot.read_text()
    assert text.startswith("graph") and "--" in text
    doc = json.loads(gjson.read_text())
    assert len(doc["nodes"]) == 11 and len(doc["edges"]) == 14


def test_enumerate_cap_exceeded_is_domain_error(capsys):
    code, out, err = run_cli(capsys, "enumerate", "--region", "lozenge:3",
                             "--cap", "10")
    assert code == 1 and out == ""
    doc = json.loads(err)
    assert doc["schema_version"] == 1
    assert "cap" in doc["message"]


def test_node_cap_env_var(capsys, monkeypatch):
    monkeypatch.setenv("KAGOME_NODE_CAP", "5")
    code, _, err = run_cli(capsys, "enumerate", "--region", "lozenge:2")
    assert code == 1
    assert "cap" in json.loads(err)["message"]


def test_bad_region_is_usage_error(capsys):
    assert run_cli(capsys, "enumerate", "--region", "bogus:1")[0] == 2
    assert run_cli(capsys, "enumerate", "--region", "lozenge")[0] == 2


def test_bad_variant_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "mix", "--region", "lozenge:2",
                           "--variant", "weighted:-1/3")
    assert code == 2


def test_mix_golden(capsys):
    code, out, _ = run_cli(capsys, "mix", "--region", "lozenge:2")
    assert code == 0
    doc = json.loads(out)
    assert doc["variant"] == {"kind": "general"}
    assert doc["eps"] == "1/4"
    assert doc["nodes"] == 11
    assert doc["mixing_time"] == 26


def test_mix_custom_eps_is_larger(capsys):
    _, out, _ = run_cli(capsys, "mix", "--region", "lozenge:2",
                        "--eps", "1/100")
    assert json.loads(out)["mixing_time"] > 26


def test_ledger_general_square3(capsys):
    code, out, _ = run_cli(capsys, "ledger", "--region", "square:3")
    assert code == 0
    doc = json.loads(out)
    assert doc["n_inner_vertices"] == 14
    assert doc["worst_delta"] == "1/14"
    entry = doc["worst_pairs"][0]
    assert len(entry["pair"]) == 2
    assert entry["expected_delta"] == "1/14"


def test_ledger_weighted_square3(capsys):
    _, out, _ = run_cli(capsys, "ledger", "--region", "square:3",
                        "--variant", "weighted:1/3")
    assert json.loads(out)["worst_delta"] == "3/56"


def test_ledger_restrained_square3(capsys):
    _, out, _ = run_cli(capsys, "ledger", "--region", "square:3",
                        "--variant", "restrained")
    doc = json.loads(out)
    assert doc["flips"] == "restrained"
    assert doc["worst_delta"] == "1/14"


def test_sample_lines_round_trip(capsys):
    code, out, err = run_cli(capsys, "sample", "--region", "lozenge:2",
                             "--seed", "7", "--samples", "3")
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert len(lines) == 3
    seeds = set()
    for i, line in enumerate(lines):
        doc = json.loads(line)
        assert doc["sample_index"] == i
        assert doc["total_steps"] > 0
        seeds.add(doc["sample_seed"])
        t = tiling_from_json(doc)
        assert t.region.family == "lozenge"
        assert fish_count(t) >= 0
    assert len(seeds) == 3


def test_sample_is_reproducible(capsys):
    argv = ("sample", "--region", "square:2", "--seed", "11", "--samples", "2")
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second


def test_sample_requires_seed(capsys):
    assert run_cli(capsys, "sample", "--region", "lozenge:2")[0] == 2


def test_sample_budget_error(capsys):
    code, _, err = run_cli(capsys, "sample", "--region", "lozenge:3",
                           "--seed", "1", "--budget", "4")
    assert code == 1
    assert "budget" in json.loads(err)["message"]


def test_minimal_then_render_pipeline(capsys, tmp_path):
    tiling_path = tmp_path / "min.json"
    code, _, _ = run_cli(capsys, "minimal", "--region", "lozenge:3",
                         "--out", str(tiling_path))
    assert code == 0
    doc = json.loads(tiling_path.read_text())
    assert doc["construction"] == "contour_peel"

    svg_path = tmp_path / "min.svg"
    code, _, _ = run_cli(capsys, "render", "--in", str(tiling_path),
                         "--out", str(svg_path), "--heights")
    assert code == 0
    svg = svg_path.read_text()
    assert "<svg" in svg and svg.count("<path") == 9
    t = tiling_from_json(doc)
    assert rendered_area(t) == pytest.approx(9 * TILE_AREA)


def test_minimal_rejects_nonlozenge(capsys):
    code, _, err = run_cli(capsys, "minimal", "--region", "nonflat:3")
    assert code == 1
    assert "lozenge" in json.loads(err)["message"]


def test_render_prototiles(capsys, tmp_path):
    path = tmp_path / "proto.svg"
    code, _, _ = run_cli(capsys, "render", "--prototiles", "--out", str(path))
    assert code == 0
    assert path.read_text().count("<path") == 15


def test_render_without_input_is_domain_error(capsys):
    code, _, err = run_cli(capsys, "render")
    assert code == 1
    assert "prototiles" in json.loads(err)["message"]


def test_bench_csv_stdout(capsys):
    code, out, _ = run_cli(capsys, "bench", "--sizes", "2,3", "--trials", "2",
                           "--seed", "1", "--family", "lozenge")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,N_tiles,N_inner_vertices,trial,steps,seed"
    assert lines[-1].startswith("# fitted_exponent=")
    rows = [line.split(",") for line in lines[1:-1]]
    assert len(rows) == 4  # 2 sizes x 2 trials
    assert {r[0] for r in rows} == {"2", "3"}
    assert all(int(r[4]) > 0 for r in rows)


def test_bench_csv_file_and_summary(capsys, tmp_path):
    csv_path = tmp_path / "bench.csv"
    code, out, _ = run_cli(capsys, "bench", "--sizes", "2..3", "--trials", "2",
                           "--seed", "1", "--family", "lozenge",
                           "--csv", str(csv_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["sizes"] == [2, 3]
    assert doc["fitted_exponent"] is not None
    assert doc["over_budget_trials"] == 0
    assert [row["n"] for row in doc["table"]] == [2, 3]
    assert csv_path.read_text().startswith(
        "n,N_tiles,N_inner_vertices,trial,steps,seed")


def test_bench_rejects_unsorted_sizes(capsys):
    assert run_cli(capsys, "bench", "--sizes", "3,2", "--trials", "1",
                   "--seed", "1")[0] == 2


def test_verify_fast_reports_and_fails_on_known_violation(capsys):
    code, out, err = run_cli(capsys, "verify", "--seed", "3", "--fast")
    assert code == 1
    assert "PASS flip involution" in out
    assert "FAIL fish count change" in out
    assert "violations" in json.loads(err)["message"]


def test_console_script_smoke():
    proc = subprocess.run(
        ["kagome", "enumerate", "--region", "square:2"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["nodes"] == 11


def test_no_command_is_usage_error(capsys):
    assert run_cli(capsys)[0] == 2
