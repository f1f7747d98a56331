"""Optional matplotlib rendering of experiment reports.

Imported lazily by the CLI only when --plot is given, so the library itself
never needs a display stack.
"""

from __future__ import annotations

import math


def _new_axes():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    return fig, ax


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def plot_montecarlo(result, path: str) -> str:
    """Histogram of estimates with the true offset and +/- CRB band."""
    fig, ax = _new_axes()
    ax.hist(result.estimates, bins=40, color="steelblue", alpha=0.8)
    ax.axvline(result.theta_true, color="black", lw=1.5, label="true offset")
    ax.axvline(result.theta_true - result.crb, color="crimson", ls="--", lw=1.0)
    ax.axvline(result.theta_true + result.crb, color="crimson", ls="--", lw=1.0,
               label="+/- CRB")
    ax.set_xlabel("estimated offset")
    ax.set_ylabel("trials")
    ax.set_title(f"{result.trials} trials, {result.shots_per_trial} shots: "
                 f"dev={result.empirical_dev:.3g}, crb={result.crb:.3g}")
    ax.legend()
    return _save(fig, path)


def plot_sweep(points, slope: float, path: str) -> str:
    """Log-log deviation vs total qubit count N with the fitted slope."""
    fig, ax = _new_axes()
    ns = [p["N"] for p in points]
    devs = [p["empirical_dev"] for p in points]
    crbs = [p["crb"] for p in points]
    ax.loglog(ns, devs, "o-", color="steelblue", label=f"empirical (slope {slope:.3f})")
    ax.loglog(ns, crbs, "s--", color="black", label="Cramer-Rao bound")
    ax.set_xlabel("total qubits N")
    ax.set_ylabel("offset deviation")
    ax.set_title("Heisenberg scaling of the offset deviation")
    ax.legend()
    return _save(fig, path)


def plot_compare_average(rows, path: str) -> str:
    """Bounds for average-offset estimation vs node count d."""
    fig, ax = _new_axes()
    ds = [r["d"] for r in rows]
    ax.plot(ds, [r["crb"] for r in rows], "o-", label="operation-triggered 1/(N w)")
    ax.plot(ds, [r["mt_bound"] for r in rows], "s--",
            label="measurement-triggered sqrt(d)/(N w)")
    ax.plot(ds, [r["ren2012"] for r in rows], "^:", label="pairwise reference")
    ax.set_xlabel("remote nodes d")
    ax.set_ylabel("average-offset precision bound")
    ax.set_yscale("log")
    ax.set_title("Average-offset precision bounds")
    ax.legend()
    return _save(fig, path)


def plot_wstate(rows, omega: float, path: str) -> str:
    """Sampled conditional frequencies against the analytic cosine curve."""
    fig, ax = _new_axes()
    thetas = [r["theta_true"] for r in rows]
    d = rows[0]["d"]
    freqs = [r["ratio"] for r in rows]
    ax.plot(thetas, freqs, "o", color="steelblue", label="sampled P(+|node0 +)")
    lo = min(thetas + [0.0])
    hi = max(thetas + [0.0])
    pad = 0.5 + 0.1 * (hi - lo)
    grid = [lo - pad + (hi - lo + 2 * pad) * i / 200 for i in range(201)]
    ax.plot(grid, [0.5 + math.cos(omega * t) / (d + 1) for t in grid],
            color="black", lw=1.0, label="1/2 + cos(w theta)/(d+1)")
    ax.set_xlabel("offset theta")
    ax.set_ylabel("conditional + probability")
    ax.set_title(f"W-protocol conditionals, d={d}")
    ax.legend()
    return _save(fig, path)
