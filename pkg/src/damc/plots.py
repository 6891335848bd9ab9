"""Render benchmark figures to image files next to the delimited output."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_run_figure", "save_benchmark_figures"]

_SOLVER_STYLE = {
    "si": dict(color="tab:gray", marker="s"),
    "ais": dict(color="tab:orange", marker="^"),
    "l1": dict(color="tab:blue", marker="o"),
    "l0": dict(color="tab:red", marker="d"),
    "warm": dict(color="tab:green", marker="v"),
}


def _style(solver):
    return _SOLVER_STYLE.get(solver, dict(color="black", marker="."))


def save_run_figure(trace, path, title=""):
    """Objective and NMSE of a single run against the iteration count."""
    iters = [r.iteration for r in trace]
    obj = [r.objective for r in trace]
    nm = [r.nmse for r in trace]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(iters, obj, color="tab:blue", label="objective")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective", color="tab:blue")
    ax.grid(True, alpha=0.3)
    if any(not math.isnan(v) for v in nm):
        ax2 = ax.twinx()
        ax2.semilogy(iters, nm, color="tab:red", label="NMSE")
        ax2.set_ylabel("NMSE (held-out)", color="tab:red")
    # shade phase boundaries of warm-started runs
    for i in range(1, len(trace)):
        if trace[i].phase != trace[i - 1].phase:
            ax.axvline(trace[i].iteration, color="gray", linestyle="--", alpha=0.6)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_benchmark_figures(report, outdir):
    """NMSE-vs-ratio medians plus one convergence panel per ratio.

    Returns the list of files written.
    """
    outdir = str(outdir)
    written = []

    # final NMSE medians against observation ratio
    fig, ax = plt.subplots(figsize=(7, 4.2))
    plotted = False
    for solver in report.plan.solvers:
        xs, ys = [], []
        for agg in report.aggregates():
            if agg["solver"] == solver and agg.get("nmse_raw"):
                xs.append(agg["ratio"])
                ys.append(agg["nmse_raw"]["median"])
        if xs:
            ax.semilogy(xs, ys, label=solver, **_style(solver))
            plotted = True
    if plotted:
        ax.set_xlabel("observation ratio")
        ax.set_ylabel("median NMSE (held-out)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = f"{outdir}/nmse_vs_ratio.png"
        fig.savefig(path, dpi=150)
        written.append(path)
    plt.close(fig)

    # convergence curves at each ratio, first seed of each solver
    first_seed = report.plan.seeds[0]
    for ratio in report.plan.ratios:
        fig, ax = plt.subplots(figsize=(7, 4.2))
        plotted = False
        for cell in report.cells:
            if cell.ratio != ratio or cell.seed != first_seed or cell.status != "ok":
                continue
            pts = [(r.iteration, r.nmse) for r in cell.trace if not math.isnan(r.nmse)]
            if pts:
                ax.semilogy(*zip(*pts), label=cell.solver,
                            color=_style(cell.solver)["color"])
                plotted = True
        if plotted:
            ax.set_xlabel("iteration")
            ax.set_ylabel("NMSE (held-out)")
            ax.set_title(f"observation ratio {ratio:g}, seed {first_seed}")
            ax.grid(True, which="both", alpha=0.3)
            ax.legend()
            fig.tight_layout()
            path = f"{outdir}/convergence_ratio{ratio:g}.png"
            fig.savefig(path, dpi=150)
            written.append(path)
        plt.close(fig)
    return written
