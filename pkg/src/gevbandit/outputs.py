"""CSV and plot outputs for aggregated experiments.

Files written into the output directory:

``summary.csv``
    label, algorithm, environment, model, eta, horizon, repetitions, seed,
    mode, estimator, mean_total_reward, stderr_total_reward, final_avg_regret
``<label>_trace.csv``
    step, mean_avg_regret, stderr
``<label>_arms.csv``
    arm (from 1), mean_play_count, learnt_probability, explored_flag
``<label>_regret.svg``
    optional, needs matplotlib

Every file has a header row and numbers use 17 significant digits.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

from .harness import AggregateResult
from .verification import describe

SUMMARY_COLUMNS = ("label", "algorithm", "environment", "model", "eta", "horizon", "repetitions",
                   "seed", "mode", "estimator", "mean_total_reward", "stderr_total_reward",
                   "final_avg_regret")
TRACE_COLUMNS = ("step", "mean_avg_regret", "stderr")
ARMS_COLUMNS = ("arm", "mean_play_count", "learnt_probability", "explored_flag")


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, str)):
        return str(x)
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def summary_csv(results: list[AggregateResult]) -> str:
    rows = []
    for res in results:
        c = res.config
        rows.append((c.label, c.algorithm, c.environment.name, describe(c.model), c.eta, int(c.horizon),
                     int(c.repetitions), int(c.seed), c.mode, c.estimator, res.mean_total_reward,
                     res.stderr_total_reward, res.final_average_regret))
    return _csv_text(SUMMARY_COLUMNS, rows)


def trace_csv(res: AggregateResult) -> str:
    rows = zip((int(s) for s in res.checkpoints), res.regret_mean, res.regret_stderr)
    return _csv_text(TRACE_COLUMNS, rows)


def arms_csv(res: AggregateResult) -> str:
    rows = ((i + 1, res.mean_play_counts[i], res.learnt_probability[i], bool(res.explored[i]))
            for i in range(res.config.model.n))
    return _csv_text(ARMS_COLUMNS, rows)


def regret_svg(results: list[AggregateResult]) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "gevbandit"
    fig, ax = plt.subplots(figsize=(6, 4))
    for res in results:
        ax.plot(res.checkpoints, res.regret_mean, label=res.config.label)
        ax.fill_between(res.checkpoints, res.regret_mean - res.regret_stderr,
                        res.regret_mean + res.regret_stderr, alpha=0.2)
    ax.set_xscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("average regret")
    ax.legend()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _write_all(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Stage every file, then move them into place; roll back on failure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[str, Path]] = []
    placed: list[Path] = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".tmp", dir=out_dir)
            staged.append((name, Path(tmp)))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for name, tmp in staged:
            target = out_dir / name
            os.replace(tmp, target)
            placed.append(target)
    except BaseException:
        for _, tmp in staged:
            tmp.unlink(missing_ok=True)
        for target in placed:
            target.unlink(missing_ok=True)
        raise
    return placed


def emit_outputs(results, out_dir, plot: bool = False) -> list[Path]:
    """Write summary, trace and arms CSVs (and optionally an SVG plot).

    Raises ``OSError`` if the directory cannot be written; in that case
    none of the files are left behind.
    """
    if isinstance(results, AggregateResult):
        results = [results]
    files = {"summary.csv": summary_csv(results)}
    for res in results:
        files[f"{res.config.label}_trace.csv"] = trace_csv(res)
        files[f"{res.config.label}_arms.csv"] = arms_csv(res)
    if plot:
        files[f"{results[0].config.label}_regret.svg"] = regret_svg(results)
    return _write_all(Path(out_dir), files)
