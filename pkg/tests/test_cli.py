import json

import pytest

from graphprior import derive_seed
from graphprior.cli import CONFIG_ENV, cli


def _tiny_config(tmp_path, name="tiny.cfg", extra=""):
    path = tmp_path / name
    path.write_text(
        "node_count_range.min = 40\n"
        "node_count_range.max = 90\n" + extra
    )
    return path


def _generate(tmp_path, out="out", count=2, seed=7, extra_args=()):
    cfg = _tiny_config(tmp_path)
    out_dir = tmp_path / out
    code = cli(
        [
            "generate",
            "--count", str(count),
            "--seed", str(seed),
            "--out", str(out_dir),
            "--config", str(cfg),
            *extra_args,
        ]
    )
    return code, out_dir


def test_generate_writes_one_file_per_seed(tmp_path, capsys):
    code, out_dir = _generate(tmp_path, count=3, seed=11)
    assert code == 0
    names = sorted(p.name for p in out_dir.glob("*.gpfn"))
    expected = sorted(f"{derive_seed(11, i)}.gpfn" for i in range(3))
    assert names == expected
    message = capsys.readouterr().out
    assert "generated 3 datasets in" in message
    assert "datasets/s" in message


def test_generate_is_rerun_identical(tmp_path):
    _, first = _generate(tmp_path, out="a")
    _, second = _generate(tmp_path, out="b")
    for f in sorted(first.glob("*.gpfn")):
        assert f.read_bytes() == (second / f.name).read_bytes()


def test_parallel_matches_serial(tmp_path):
    _, serial = _generate(tmp_path, out="s", count=4)
    code, parallel = _generate(
        tmp_path, out="p", count=4, extra_args=("--workers", "2")
    )
    assert code == 0
    for f in sorted(serial.glob("*.gpfn")):
        assert f.read_bytes() == (parallel / f.name).read_bytes()


def test_structure_only_writes_nothing(tmp_path, capsys):
    code, out_dir = _generate(tmp_path, extra_args=("--structure-only",))
    assert code == 0
    assert not out_dir.exists()
    assert "graphs" in capsys.readouterr().out


def test_zero_episodes_flag(tmp_path):
    code, out_dir = _generate(tmp_path, count=1, extra_args=("--episodes", "0"))
    assert code == 0
    from graphprior import read_dataset

    _, eps = read_dataset(next(out_dir.glob("*.gpfn")))
    assert eps == []


def test_config_from_environment(tmp_path, monkeypatch):
    cfg = _tiny_config(tmp_path)
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    out_dir = tmp_path / "env_out"
    code = cli(
        ["generate", "--count", "1", "--seed", "3", "--out", str(out_dir)]
    )
    assert code == 0
    explicit = tmp_path / "explicit_out"
    monkeypatch.delenv(CONFIG_ENV)
    cli(
        [
            "generate", "--count", "1", "--seed", "3",
            "--out", str(explicit), "--config", str(cfg),
        ]
    )
    (a,) = out_dir.glob("*.gpfn")
    (b,) = explicit.glob("*.gpfn")
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors_exit_two(tmp_path, capsys):
    assert cli(["generate", "--count", "0", "--seed", "1", "--out", str(tmp_path)]) == 2
    assert (
        cli(
            [
                "generate", "--count", "1", "--seed", "1",
                "--out", str(tmp_path), "--workers", "0",
            ]
        )
        == 2
    )
    assert cli(["nonsense"]) == 2
    assert cli([]) == 2
    capsys.readouterr()


def test_bad_config_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("node_count_range.min = banana\n")
    code = cli(
        [
            "generate", "--count", "1", "--seed", "1",
            "--out", str(tmp_path / "o"), "--config", str(bad),
        ]
    )
    assert code == 1
    assert "banana" in capsys.readouterr().err


def test_stats_emits_jsonl(tmp_path, capsys):
    _, out_dir = _generate(tmp_path, count=2)
    capsys.readouterr()  # drop the generate progress line
    files = sorted(str(p) for p in out_dir.glob("*.gpfn"))
    code = cli(["stats", *files])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    for line, path in zip(lines, files):
        record = json.loads(line)
        assert record["file"] == path
        assert record["n_nodes"] >= 40
        assert set(record) >= {
            "mean_degree",
            "max_degree",
            "mean_local_clustering",
            "component_count",
            "degree_assortativity",
            "periphery_fraction",
        }


def test_stats_keeps_going_after_failure(tmp_path, capsys):
    _, out_dir = _generate(tmp_path, count=1)
    capsys.readouterr()  # drop the generate progress line
    good = next(out_dir.glob("*.gpfn"))
    bad = tmp_path / "broken.gpfn"
    bad.write_bytes(b"not a container")
    code = cli(["stats", str(bad), str(good)])
    captured = capsys.readouterr()
    assert code == 1
    assert len(captured.out.strip().splitlines()) == 1
    assert "broken.gpfn" in captured.err


def test_stats_missing_file(tmp_path, capsys):
    assert cli(["stats", str(tmp_path / "nope.gpfn")]) == 1
    capsys.readouterr()


def test_inspect_reports_header(tmp_path, capsys):
    _, out_dir = _generate(tmp_path, count=1, seed=5)
    target = next(out_dir.glob("*.gpfn"))
    code = cli(["inspect", str(target)])
    out = capsys.readouterr().out
    assert code == 0
    assert "n_nodes:" in out
    assert "episodes:   1" in out
    assert "episode 0:" in out
    assert '"format": "gpfn/1"' in out


def test_inspect_with_lappe(tmp_path, capsys):
    _, out_dir = _generate(tmp_path, count=1, seed=6)
    target = next(out_dir.glob("*.gpfn"))
    code = cli(["inspect", str(target), "--lappe", "4"])
    out = capsys.readouterr().out
    assert code == 0
    assert "lappe eigenvalues (4):" in out
    assert cli(["inspect", str(target), "--lappe", "0"]) == 2
    capsys.readouterr()


def test_inspect_bad_file(tmp_path, capsys):
    bad = tmp_path / "x.gpfn"
    bad.write_bytes(b"\x00" * 64)
    assert cli(["inspect", str(bad)]) == 1
    capsys.readouterr()


def test_version_flag(capsys):
    assert cli(["--version"]) == 0
    assert capsys.readouterr().out.startswith("graphprior ")


def test_console_script_entry(tmp_path):
    import subprocess
    import sys

    cfg = _tiny_config(tmp_path)
    out_dir = tmp_path / "sub"
    proc = subprocess.run(
        [
            sys.executable, "-m", "graphprior", "generate",
            "--count", "1", "--seed", "2",
            "--out", str(out_dir), "--config", str(cfg),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "generated 1 datasets" in proc.stdout
    assert len(list(out_dir.glob("*.gpfn"))) == 1
