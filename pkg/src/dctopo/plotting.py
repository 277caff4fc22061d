"""Figures written next to the TSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_pareto(entries, path, alpha: float, M: float, B: float, lower_bound=None) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    xs = [e.cost.x for e in entries]
    ys = [float(e.cost.y) for e in entries]
    ax.plot(xs, ys, "o-", drawstyle="steps-post", color="tab:blue")
    for e, x, y in zip(entries, xs, ys):
        ms = e.runtime(alpha, M, B) * 1e3
        ax.annotate(f"{e.text}\n{ms:.3f} ms", (x, y), fontsize=6, xytext=(4, 4), textcoords="offset points")
    if lower_bound is not None:
        ax.plot([lower_bound.x], [float(lower_bound.y)], "x", color="tab:red", label="lower bound")
        ax.legend(fontsize=7)
    ax.set_xlabel("latency steps x")
    ax.set_ylabel("bandwidth coefficient y")
    ax.set_title(f"Pareto frontier, N={entries[0].n_nodes}, d={entries[0].degree}" if entries else "Pareto frontier")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ns = [r.n_nodes for r in rows]
    ax.plot(ns, [r.allreduce * 1e3 for r in rows], label="best expansion", lw=1.2)
    ax.plot(ns, [r.ring * 1e3 for r in rows], label="ring", lw=1)
    ax.plot(ns, [r.dbt * 1e3 for r in rows], label="double binary tree", lw=1)
    ax.plot(ns, [r.lower_bound * 1e3 for r in rows], "--", label="lower bound", lw=1)
    ax.set_xlabel("nodes N")
    ax.set_ylabel("allreduce time (ms)")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_simulation(rows, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 0.5 + 0.35 * max(len(rows), 1)))
    names = [r.name for r in rows]
    ax.barh(range(len(rows)), [r.f_max * 1e3 for r in rows], color="tab:green")
    ax.set_yticks(range(len(rows)), names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("last layer finish time (ms)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
