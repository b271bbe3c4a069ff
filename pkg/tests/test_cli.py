import csv
import os
import subprocess
import sys

import pytest

from gevbandit.cli import main

FAST = ["--reps", "4", "--horizon", "300"]


def summary_row(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))[0]


def read_all(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    assert "env1-nl-retuned" in capsys.readouterr().out


def test_preset_run_writes_schemas(tmp_path):
    assert main(["--preset", "env1-nl", "--out", str(tmp_path), *FAST]) == 0
    files = read_all(tmp_path)
    assert set(files) == {"summary.csv", "env1-nl_trace.csv", "env1-nl_arms.csv"}
    summary = files["summary.csv"].decode().splitlines()
    assert summary[0].startswith("label,algorithm,environment,model,eta,horizon,repetitions,seed,mode,estimator,"
                                 "mean_total_reward,stderr_total_reward,final_avg_regret")
    arms = files["env1-nl_arms.csv"].decode().splitlines()
    assert arms[0] == "arm,mean_play_count,learnt_probability,explored_flag"
    assert len(arms) == 5
    assert [line.split(",")[0] for line in arms[1:]] == ["1", "2", "3", "4"]
    assert files["env1-nl_trace.csv"].decode().splitlines()[0] == "step,mean_avg_regret,stderr"


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--preset", "env1-nl-as-mnl", "--out", str(a), *FAST]) == 0
    assert main(["--preset", "env1-nl-as-mnl", "--out", str(b), "--threads", "3", *FAST]) == 0
    assert read_all(a) == read_all(b)


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("GEVBANDIT_OUT", str(tmp_path / "env"))
    monkeypatch.setenv("GEVBANDIT_SEED", "17")
    assert main(["--preset", "env1-mnl", *FAST]) == 0
    assert summary_row(tmp_path / "env" / "summary.csv")["seed"] == "17"
    # the flag beats the environment
    assert main(["--preset", "env1-mnl", "--seed", "2", "--out", str(tmp_path / "flag"), *FAST]) == 0
    assert summary_row(tmp_path / "flag" / "summary.csv")["seed"] == "2"
    monkeypatch.setenv("GEVBANDIT_SEED", "x")
    assert main(["--preset", "env1-mnl", *FAST]) == 2


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model:\n  kind: gnl\n  mu: 1\n  nests:\n    - {arms: [1, 2, 3, 4], mu: 1.5}\n"
                   "environment: {preset: env1}\n")
    assert main(["--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "invariant=mu_l <= mu" in err and "line=5" in err
    assert not (tmp_path / "o").exists()
    assert main(["--config", str(tmp_path / "missing.yaml")]) == 3
    assert main(["--preset", "nope"]) == 2
    assert main([]) == 2
    assert main(["--preset", "env1-nl", "--config", str(bad)]) == 2


def test_unwritable_output_leaves_nothing(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--preset", "env1-mnl", "--out", str(blocker / "sub"), *FAST]) == 3
    assert sorted(p.name for p in tmp_path.iterdir()) == ["file"]


def test_failed_write_rolls_back(tmp_path, monkeypatch):
    from gevbandit import outputs

    calls = {"n": 0}
    real = os.replace

    def flaky(src, dst):
        calls["n"] += 1
        if calls["n"] == 2:
            raise OSError("disk full")
        return real(src, dst)

    monkeypatch.setattr(outputs.os, "replace", flaky)
    assert main(["--preset", "env1-mnl", "--out", str(tmp_path), *FAST]) == 3
    assert list(tmp_path.iterdir()) == []


def test_verify_exit_codes(tmp_path, capsys):
    assert main(["--preset", "env1-nl", "--verify", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "env1-nl_verification.csv").exists()
    assert "0 failed" in capsys.readouterr().out


def test_plot_is_deterministic(tmp_path):
    pytest.importorskip("matplotlib")
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["--preset", "env1-mnl", "--plot", "--out", str(d), *FAST]) == 0
    assert (a / "env1-mnl_regret.svg").read_bytes() == (b / "env1-mnl_regret.svg").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gevbandit", "--list-presets"], capture_output=True, text=True)
    assert proc.returncode == 0 and "env2-nl" in proc.stdout
