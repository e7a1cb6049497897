"""Verification reports: delimited summary, figures, and a text digest.

``write_report`` renders one verification result into a directory:
``summary.csv`` holds the per-round statistics, the PNG figures chart
the work done and the shape of the final graph, and ``report.txt``
restates the verdict in plain text alongside the residual program.
"""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .driver import iter_nodes
from .syntax import render_program
from .verify import RoundStats, VerifyResult, result_summary

_ROUND_FIELDS = [f for f in RoundStats.__dataclass_fields__]


def _write_summary(result: VerifyResult, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["verdict", "mode", "entry"])
        writer.writerow([result.verdict, result.mode, result.entry])
        writer.writerow([])
        writer.writerow(_ROUND_FIELDS)
        for r in result.rounds:
            writer.writerow([getattr(r, f) for f in _ROUND_FIELDS])


def _figure_rounds(result: VerifyResult, path: Path) -> None:
    rounds = result.rounds
    labels = [f"round {r.number}" for r in rounds]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.bar(labels, [r.nodes for r in rounds], color="#4878a8")
    ax1.set_title("graph size")
    ax1.set_ylabel("nodes")
    ax2.bar(labels, [r.rules for r in rounds], color="#a87848",
            label="rules")
    ax2.bar(labels, [r.functions for r in rounds], color="#48a878",
            label="functions")
    ax2.set_title("residual size")
    ax2.legend()
    fig.suptitle(f"{result.mode} verification: {result.verdict}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _figure_events(result: VerifyResult, path: Path) -> None:
    rounds = result.rounds
    kinds = [("folds", "#4878a8"), ("lateral_folds", "#78a848"),
             ("gens", "#a84878"), ("splits", "#a87848")]
    labels = [f"round {r.number}" for r in rounds]
    xs = range(len(rounds))
    width = 0.8 / len(kinds)
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    for i, (kind, color) in enumerate(kinds):
        ax.bar([x + i * width for x in xs],
               [getattr(r, kind) for r in rounds],
               width=width, color=color, label=kind.replace("_", " "))
    ax.set_xticks([x + 1.5 * width for x in xs])
    ax.set_xticklabels(labels)
    ax.set_title("loop closures and abstractions")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _figure_graph(result: VerifyResult, path: Path) -> None:
    counts = Counter(n.kind for n in iter_nodes(result.root))
    order = ["step", "value", "bottom", "fold", "let", "gen"]
    kinds = [k for k in order if counts[k]] + \
        sorted(set(counts) - set(order))
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    ax.bar(kinds, [counts[k] for k in kinds], color="#4878a8")
    ax.set_title("final graph: nodes by kind")
    ax.set_ylabel("nodes")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(result: VerifyResult, out_dir: str | Path) -> list[Path]:
    """Render the result into ``out_dir``; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "summary.csv"
    _write_summary(result, path)
    written.append(path)

    for name, draw in [("rounds.png", _figure_rounds),
                       ("events.png", _figure_events),
                       ("graph.png", _figure_graph)]:
        path = out / name
        draw(result, path)
        written.append(path)

    path = out / "report.txt"
    path.write_text(result_summary(result) + "\n\n"
                    "residual program\n----------------\n"
                    + render_program(result.residual) + "\n")
    written.append(path)
    return written
