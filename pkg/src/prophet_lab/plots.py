"""Figure rendering for the report commands.

Each renderer consumes the same rows the CSV writer gets and saves a PNG
next to the delimited output.  Everything uses the Agg backend; nothing
here is interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_table1(rows, path) -> str:
    """Worst-case ratio curves against the budget."""
    k = [r.k for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(k, [r.worst_acr for r in rows], "o-", label="worst optimal / benchmark")
    ax.plot(k, [r.worst_apx for r in rows], "s-", label="worst heuristic / benchmark")
    ax.plot(k, [r.worst_ce_over_dp for r in rows], "^--", label="worst heuristic / optimal")
    ax.set_xscale("log")
    ax.set_xlabel("budget k")
    ax.set_ylabel("worst-case ratio over the index grid")
    ax.set_ylim(0.45, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    return _save(fig, path)


def render_heatmap(rows, path) -> str:
    """Two panels: optimal and heuristic asymptotic ratios over (k, gamma)."""
    ks = sorted({r[0] for r in rows})
    gs = sorted({r[1] for r in rows})
    k_idx = {k: i for i, k in enumerate(ks)}
    g_idx = {g: i for i, g in enumerate(gs)}
    acr = np.full((len(gs), len(ks)), np.nan)
    apx = np.full((len(gs), len(ks)), np.nan)
    for k, g, a, b, _ in rows:
        acr[g_idx[g], k_idx[k]] = a
        apx[g_idx[g], k_idx[k]] = b
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, grid, title in ((axes[0], acr, "optimal policy"), (axes[1], apx, "heuristic")):
        im = ax.pcolormesh(ks, gs, grid, vmin=0.5, vmax=1.0, shading="nearest")
        ax.set_xlabel("budget k")
        ax.set_title(f"{title} / benchmark")
    axes[0].set_ylabel("extreme value index")
    fig.colorbar(im, ax=axes, fraction=0.03)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_regret(rows, path) -> str:
    """Additive gap on a log-log scale, raw and rescaled by (n/k)^gamma."""
    alphas = sorted({r["alpha"] for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for a in alphas:
        block = [r for r in rows if r["alpha"] == a]
        ns = [r["n"] for r in block]
        axes[0].loglog(ns, [r["gap"] for r in block], "o-", label=f"alpha={a:g}")
        axes[1].semilogx(ns, [r["gap_scaled"] for r in block], "o-", label=f"alpha={a:g}")
    axes[0].set_xlabel("horizon n")
    axes[0].set_ylabel("optimal minus heuristic value")
    axes[1].set_xlabel("horizon n")
    axes[1].set_ylabel("gap / (n/k)^gamma")
    for ax in axes:
        ax.grid(alpha=0.3, which="both")
        ax.legend()
    return _save(fig, path)


def render_convergence(rows, path) -> str:
    """Finite-horizon ratios approaching their asymptotic targets."""
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(ns, [r["ratio_dp"] for r in rows], "o-", label="optimal / benchmark")
    ax.semilogx(ns, [r["ratio_ce"] for r in rows], "s-", label="heuristic / benchmark")
    ax.axhline(rows[-1]["target_acr"], color="C0", ls=":", label="optimal limit")
    ax.axhline(rows[-1]["target_apx"], color="C1", ls=":", label="heuristic limit")
    ax.set_xlabel("horizon n")
    ax.set_ylabel("value / benchmark")
    ax.grid(alpha=0.3)
    ax.legend()
    return _save(fig, path)


def render_competition(rows, path) -> str:
    """Market-inflation factors against the budget, one curve per index."""
    gs = sorted({r["gamma"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for g in gs:
        block = [r for r in rows if r["gamma"] == g]
        ks = [r["k"] for r in block]
        ax.plot(ks, [r["cc_dp"] for r in block], "o-", label=f"optimal, index {g:g}")
        ax.plot(ks, [r["cc_ce"] for r in block], "s--", label=f"heuristic, index {g:g}")
    ax.set_xscale("log")
    ax.set_xlabel("budget k")
    ax.set_ylabel("market inflation factor")
    ax.grid(alpha=0.3)
    if len(gs) <= 4:
        ax.legend()
    return _save(fig, path)
