"""Figures written next to the CLI's tables. Matplotlib is imported lazily."""

from __future__ import annotations

from typing import Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.labelsize": 10, "figure.figsize": (5.5, 3.6)})
    return plt


def plot_discrepancy(rows: Sequence[dict], s: int, path: str) -> None:
    """D*_N against N, with (log N)^s log log N rescaled onto the last point."""
    plt = _pyplot()
    N = [r["N"] for r in rows]
    D = [r["D_star"] for r in rows]
    fig, ax = plt.subplots()
    ax.plot(N, D, lw=1.0, color="#1b1f8a", label=r"$D^*_N$")
    pred = [(n, r["logN_s_loglogN"]) for n, r in zip(N, rows) if r["logN_s_loglogN"]]
    if pred and pred[-1][1] > 0:
        scale = D[-1] / pred[-1][1]
        ax.plot([p[0] for p in pred], [scale * p[1] for p in pred], ls="--", lw=0.9,
                color="#941b22", label=rf"$c\,(\log N)^{s}\log\log N$, $c={scale:.3g}$")
    ax.set_xscale("log")
    ax.set_xlabel("$N$")
    ax.set_ylabel("star discrepancy (unnormalised)")
    ax.legend(loc="upper left", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_witness(table: Sequence[dict], path: str) -> None:
    """Certified |Lambda| and grid max|D| per found witness, against the log predictor."""
    plt = _pyplot()
    rows = [r for r in table if r.get("predictor")]
    fig, ax = plt.subplots()
    if rows:
        x = [r["predictor"] for r in rows]
        ax.scatter(x, [r["certified_bound"] for r in rows], s=12, color="#1b1f8a",
                   label=r"$|\Lambda|$")
        dmax = [(p, r["max_abs_D"]) for p, r in zip(x, rows) if r.get("max_abs_D") is not None]
        if dmax:
            ax.scatter(*zip(*dmax), s=12, marker="x", color="#941b22", label=r"$\max|D|$ on grid")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(loc="best", frameon=False)
    else:
        ax.text(0.5, 0.5, "no witness found", ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel(r"$(\log N)^s \log\log N$")
    ax.set_ylabel("value")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
