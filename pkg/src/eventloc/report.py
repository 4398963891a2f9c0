"""Report rendering: delimited tables, JSON, and matplotlib figures.

Every CLI report path writes the delimited rows next to the figures so
downstream tooling can parse one and humans can read the other.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METRIC_COLUMNS = ("system", "precision", "recall", "f1", "sentence_accuracy")


def metrics_row(name: str, token, sentence) -> dict:
    return {
        "system": name,
        "precision": token.precision,
        "recall": token.recall,
        "f1": token.f1,
        "sentence_accuracy": sentence.accuracy,
    }


def format_table(rows: list[dict], columns=None) -> str:
    """Fixed-width text table; floats rendered to three places."""
    if not rows:
        return "(no rows)"
    columns = list(columns or rows[0].keys())
    rendered = [
        [f"{row.get(c):.3f}" if isinstance(row.get(c), float) else str(row.get(c, ""))
         for c in columns]
        for row in rows
    ]
    widths = [max(len(c), *(len(r[j]) for r in rendered)) for j, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rendered:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def write_delimited(rows: list[dict], path: str | Path, delimiter: str = ",") -> None:
    if not rows:
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()),
                                delimiter=delimiter)
        writer.writeheader()
        writer.writerows(rows)


def write_json(data, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n",
                          encoding="utf-8")


def plot_metric_bars(rows: list[dict], path: str | Path) -> None:
    """Grouped bars of P/R/F1/sentence accuracy, one group per system."""
    metrics = ("precision", "recall", "f1", "sentence_accuracy")
    systems = [row["system"] for row in rows]
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(systems), 4.0))
    width = 0.8 / len(metrics)
    for j, metric in enumerate(metrics):
        xs = [i + j * width for i in range(len(systems))]
        ax.bar(xs, [row[metric] for row in rows], width=width,
               label=metric.replace("_", " "))
    ax.set_xticks([i + 1.5 * width for i in range(len(systems))])
    ax.set_xticklabels(systems)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ablation(summary_rows: list[dict], path: str | Path) -> None:
    """Mean test F1 per feature condition with min-max whiskers."""
    conditions = [row["condition"] for row in summary_rows]
    means = [row["mean_f1"] for row in summary_rows]
    lo = [m - row["min_f1"] for m, row in zip(means, summary_rows)]
    hi = [row["max_f1"] - m for m, row in zip(means, summary_rows)]
    fig, ax = plt.subplots(figsize=(1.5 + 1.1 * len(conditions), 4.0))
    ax.bar(range(len(conditions)), means, yerr=[lo, hi], capsize=4,
           color="#4878a8")
    ax.set_xticks(range(len(conditions)))
    ax.set_xticklabels(conditions, rotation=30, ha="right")
    ax.set_ylabel("test token F1")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_history(history, path: str | Path) -> None:
    """Training loss and validation F1 curves on twin axes."""
    epochs = range(len(history.train_loss))
    fig, ax_loss = plt.subplots(figsize=(6.0, 4.0))
    ax_loss.plot(epochs, history.train_loss, color="#a84848", label="train loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss", color="#a84848")
    ax_f1 = ax_loss.twinx()
    ax_f1.plot(epochs, history.val_f1, color="#4878a8", label="val F1")
    ax_f1.set_ylabel("validation token F1", color="#4878a8")
    ax_f1.set_ylim(0.0, 1.05)
    if history.best_epoch >= 0:
        ax_f1.axvline(history.best_epoch, color="gray", linestyle=":", linewidth=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
