import json

import pytest

from clique_steiner.cli import main
from clique_steiner.graph import parse_stp


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_produces_parseable_deterministic_file(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "gen", "--kind", "path", "--n", "6", "--t", "2", "--seed", "3")
    assert code == 0
    g = parse_stp(out)
    assert g.n == 6 and g.t == 2
    code, out2, _ = run_cli(capsys, "gen", "--kind", "path", "--n", "6", "--t", "2", "--seed", "3")
    assert out2 == out


def test_gen_infeasible_parameters_exit_one(capsys):
    code, _, err = run_cli(capsys, "gen", "--kind", "path", "--n", "2", "--t", "5")
    assert code == 1
    assert "error" in err


def test_solve_two_terminal_path_costs_path_length(tmp_path, capsys):
    stp = tmp_path / "p.stp"
    code, out, _ = run_cli(capsys, "gen", "--kind", "path", "--n", "5", "--t", "2",
                           "--seed", "8", "--out", str(stp))
    assert code == 0
    g = parse_stp(stp.read_text())
    code, out, _ = run_cli(capsys, "solve", "--alg", "stccm-a", "--input", str(stp))
    assert code == 0
    record = dict(line.split("=", 1) for line in out.splitlines() if "=" in line and not line.startswith("tree_edge") and not line.startswith("step"))
    assert record["algorithm"] == "stccm-a"
    assert record["ratio"] == "1.0"


def test_solve_exact_respects_terminal_limit(capsys):
    code, _, err = run_cli(capsys, "solve", "--alg", "exact", "--gen", "complete",
                           "--n", "13", "--t", "13")
    assert code == 1
    assert "12" in err


def test_solve_trace_line_count_matches_messages(tmp_path, capsys):
    trace = tmp_path / "trace.txt"
    code, out, _ = run_cli(capsys, "solve", "--alg", "stccm-b", "--gen", "random-connected",
                           "--n", "8", "--t", "3", "--seed", "5", "--trace", str(trace))
    assert code == 0
    messages = int(next(l.split("=")[1] for l in out.splitlines() if l.startswith("messages=")))
    assert len(trace.read_text().splitlines()) == messages


def test_solve_json_out(tmp_path, capsys):
    out_path = tmp_path / "result.json"
    code, _, _ = run_cli(capsys, "solve", "--alg", "kmb", "--gen", "random-connected",
                         "--n", "7", "--t", "3", "--seed", "2", "--out", str(out_path))
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["algorithm"] == "kmb"
    assert payload["edges"]


def test_solve_algorithms_agree_on_cost(capsys):
    costs = {}
    for alg in ("stccm-a", "stccm-b"):
        code, out, _ = run_cli(capsys, "solve", "--alg", alg, "--gen", "random-connected",
                               "--n", "9", "--t", "4", "--seed", "11")
        assert code == 0
        costs[alg] = next(l for l in out.splitlines() if l.startswith("cost="))
    assert costs["stccm-a"] == costs["stccm-b"]


def test_env_seed_override(capsys, monkeypatch):
    code, first, _ = run_cli(capsys, "gen", "--kind", "cycle", "--n", "5", "--seed", "1")
    monkeypatch.setenv("CLIQUE_STEINER_SEED", "99")
    code, second, _ = run_cli(capsys, "gen", "--kind", "cycle", "--n", "5", "--seed", "1")
    monkeypatch.delenv("CLIQUE_STEINER_SEED")
    code, third, _ = run_cli(capsys, "gen", "--kind", "cycle", "--n", "5", "--seed", "99")
    assert first != second
    assert second == third


def test_verify_small_suite_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--instances", "8")
    assert code == 0
    assert "all checks passed" in out
    assert "max_observed_ratio" in out


def test_verify_ratio_check_only(capsys):
    code, out, _ = run_cli(capsys, "verify", "--instances", "6", "--check", "ratio")
    assert code == 0


def test_verify_broken_pruning_fails_with_leaf_violation(capsys):
    code, out, _ = run_cli(capsys, "verify", "--instances", "4", "--break-pruning")
    assert code == 1
    assert "non-terminal leaf" in out


def test_bench_reports_fitted_constants(capsys):
    code, out, _ = run_cli(capsys, "bench", "--sizes", "8", "--algs", "stccm-b")
    assert code == 0
    assert "rounds" in out and "messages" in out
