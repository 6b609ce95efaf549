import json

import jsonschema
import pytest

from linkrec.cli import (
    EXIT_CONFIG,
    EXIT_NOTHING_EVALUATED,
    EXIT_OK,
    EXIT_RUNTIME,
    main,
    parse_duration,
)
from linkrec.evaluation import REPORT_SCHEMA


@pytest.fixture
def dataset(tmp_path):
    """Drifting multi-user stream as a TSV file."""
    lines = []
    for u in range(5):
        for step in range(10):
            t = 1 + step * 40 + u
            item = (u + step) % 8
            lines.append(f"u{u}\ti{item}\t{t}")
    path = tmp_path / "events.tsv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def rated_dataset(tmp_path):
    lines = ["user,item,timestamp,rating"]
    for u in range(4):
        for step in range(8):
            t = 1 + step * 30 + u
            item = (u + step) % 6
            rating = 5 if (u + step) % 3 else 1
            lines.append(f"u{u},i{item},{t},{rating}")
    path = tmp_path / "events.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_parse_duration_forms():
    assert parse_duration("3600") == 3600.0
    assert parse_duration("2h") == 7200.0
    assert parse_duration("7d") == 7 * 86400.0
    assert parse_duration("1.5m") == 90.0


def test_evaluate_happy_path(dataset, tmp_path, capsys):
    out_dir = tmp_path / "run"
    code = main([
        "evaluate", "--input", str(dataset), "--graph", "lsg",
        "--alpha", "0.15", "--eta-s", "0.1", "--n", "10",
        "--out-dir", str(out_dir),
    ])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    assert "TA F1=" in captured.out
    report = json.loads((out_dir / "report.json").read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert (out_dir / "report.csv").exists()
    # full effective configuration is embedded, defaults and seed included
    assert report["config"]["seed"] == 0
    assert report["config"]["windows"] == 8
    assert report["config"]["input"] == str(dataset)
    assert report["params"]["alpha"] == 0.15


def test_evaluate_missing_input_names_path(tmp_path, capsys):
    code = main([
        "evaluate", "--input", str(tmp_path / "absent.tsv"),
        "--graph", "bip", "--alpha", "0.3",
    ])
    assert code == EXIT_CONFIG
    assert "absent.tsv" in capsys.readouterr().err


def test_evaluate_stg_requires_delta(dataset, capsys):
    code = main([
        "evaluate", "--input", str(dataset), "--graph", "stg",
        "--alpha", "0.3", "--beta", "0.5", "--eta-s", "0.5",
    ])
    assert code == EXIT_CONFIG
    assert "--delta" in capsys.readouterr().err


def test_evaluate_requires_alpha(dataset, capsys):
    code = main(["evaluate", "--input", str(dataset), "--graph", "bip"])
    assert code == EXIT_CONFIG
    assert "--alpha" in capsys.readouterr().err


def test_evaluate_nothing_evaluated_distinct_exit(tmp_path, capsys):
    # one user always re-picking the same item: never a new test item
    path = tmp_path / "flat.tsv"
    path.write_text("".join(f"u\ti\t{t}\n" for t in range(0, 100, 10)))
    code = main([
        "evaluate", "--input", str(path), "--graph", "bip", "--alpha", "0.3",
        "--out-dir", str(tmp_path / "out"),
    ])
    assert code == EXIT_NOTHING_EVALUATED
    assert "nothing evaluated" in capsys.readouterr().err


def test_evaluate_positive_filter_and_csv(rated_dataset, tmp_path):
    code = main([
        "evaluate", "--input", str(rated_dataset), "--graph", "bip",
        "--alpha", "0.3", "--positive-filter",
        "--out-dir", str(tmp_path / "run"),
    ])
    assert code in (EXIT_OK, EXIT_NOTHING_EVALUATED)
    report = json.loads((tmp_path / "run" / "report.json").read_text())
    assert report["config"]["positive_filter"] is True


def test_malformed_input_is_runtime_error(tmp_path, capsys):
    path = tmp_path / "bad.tsv"
    path.write_text("u\ti\t10\nu\tj\tnot-a-time\n")
    code = main([
        "evaluate", "--input", str(path), "--graph", "bip", "--alpha", "0.3",
    ])
    assert code == EXIT_RUNTIME
    assert "line 2" in capsys.readouterr().err


def test_search_writes_leaderboard_and_bests(dataset, tmp_path, capsys):
    out_dir = tmp_path / "campaign"
    code = main([
        "search", "--input", str(dataset), "--graph", "bip",
        "--count", "5", "--seed", "7", "--windows", "6", "--n", "5",
        "--out-dir", str(out_dir),
    ])
    assert code == EXIT_OK
    board = (out_dir / "leaderboard.csv").read_text().splitlines()
    assert board[0].startswith("sample_index,flavor,delta")
    assert len(board) == 6  # header + full alpha grid capped at count
    for objective in ("f1", "hr", "map"):
        payload = json.loads((out_dir / f"best_{objective}.json").read_text())
        assert payload["objective"] == objective
        assert payload["config"]["seed"] == 7
        assert payload["setting"]["alpha"] is not None


def test_search_reruns_are_byte_identical(dataset, tmp_path):
    args = [
        "search", "--input", str(dataset), "--graph", "lsg",
        "--count", "4", "--seed", "11", "--windows", "5", "--n", "5",
    ]
    main(args + ["--out-dir", str(tmp_path / "a")])
    main(args + ["--out-dir", str(tmp_path / "b")])
    a = (tmp_path / "a" / "leaderboard.csv").read_bytes()
    b = (tmp_path / "b" / "leaderboard.csv").read_bytes()
    assert a == b


def test_search_count_zero_is_usage_error(dataset, capsys):
    code = main([
        "search", "--input", str(dataset), "--graph", "bip", "--count", "0",
    ])
    assert code == EXIT_CONFIG
    assert "--count" in capsys.readouterr().err


def test_inspect_prints_stream_and_graph_stats(dataset, capsys):
    code = main(["inspect", "--input", str(dataset), "--delta", "80",
                 "--eta-s", "0.5"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "events (links):     50" in out
    assert "users / items:      5 / 8" in out
    assert "distinct user-item:" in out
    assert "sparsity:" in out
    assert "bip:" in out and "stg(" in out and "lsg(" in out


def test_config_file_provides_defaults_flags_override(dataset, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"""
        # experiment defaults
        input = {dataset}
        graph = bip
        alpha = 0.5
        windows = 6
        n = 5
        """.replace("        ", "")
    )
    out_dir = tmp_path / "cfgrun"
    code = main([
        "evaluate", "--config", str(cfg), "--alpha", "0.15",
        "--out-dir", str(out_dir),
    ])
    assert code == EXIT_OK
    report = json.loads((out_dir / "report.json").read_text())
    assert report["params"]["alpha"] == 0.15  # flag wins
    assert report["config"]["windows"] == 6  # file value used
    assert report["config"]["n"] == 5


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    code = main(["evaluate", "--config", str(cfg), "--graph", "bip"])
    assert code == EXIT_CONFIG
    assert "nonsense" in capsys.readouterr().err


def test_config_grid_override(dataset, tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("grid_alpha = 0.3,0.5\ngrid_eta_s = 0.0\n")
    out_dir = tmp_path / "gridrun"
    code = main([
        "search", "--config", str(cfg), "--input", str(dataset),
        "--graph", "lsg", "--count", "10", "--windows", "5", "--n", "5",
        "--out-dir", str(out_dir),
    ])
    assert code == EXIT_OK
    board = (out_dir / "leaderboard.csv").read_text().splitlines()
    assert len(board) == 3  # header + 2x1 cross product
    alphas = {line.split(",")[5] for line in board[1:]}
    assert alphas <= {"0.3", "0.5"}


def test_columns_flag(tmp_path):
    path = tmp_path / "cols.tsv"
    path.write_text("10\tu1\tx\n20\tu1\ty\n30\tu2\tx\n40\tu2\ty\n")
    code = main(["inspect", "--input", str(path),
                 "--columns", "timestamp,user,item"])
    assert code == EXIT_OK


def test_workers_env_default(dataset, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LINKREC_WORKERS", "2")
    out_dir = tmp_path / "envrun"
    code = main([
        "search", "--input", str(dataset), "--graph", "bip",
        "--count", "2", "--windows", "4", "--n", "5",
        "--out-dir", str(out_dir),
    ])
    assert code == EXIT_OK
    board = (out_dir / "leaderboard.csv").read_text()
    assert board.count("\n") >= 2


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_CONFIG
    assert "usage" in capsys.readouterr().out.lower()
