"""Figure rendering for the experiment reports.

One PNG per experiment, written next to the CSV.  The CSV stays the
machine-readable contract; the figures are reading aids and can be disabled
with --no-plots.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .runners import RunResult  # noqa: E402


def _ok_rows(result: RunResult):
    return [row for row in result.rows if row.get("status", "ok") == "ok"]


def render(result: RunResult, path: Path) -> Optional[Path]:
    fn = _RENDERERS.get(result.name)
    if fn is None:
        return None
    fig = fn(result)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _equivalence(result: RunResult):
    rows = _ok_rows(result)
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = range(len(rows))
    ax.plot(idx, [row["ratio1"] for row in rows], "o", label="(|V| + |W1|)/|f|")
    ax.plot(idx, [row["ratio2"] for row in rows], "s", mfc="none", label="(|V| + |W2|)/|f|")
    for key, color in (("band_r1", "C0"), ("band_r2", "C1")):
        band = result.summary.get(key)
        if band:
            ax.axhline(band["c"], color=color, ls=":", lw=0.8)
            ax.axhline(band["C"], color=color, ls=":", lw=0.8)
    ax.set_xlabel("corpus function")
    ax.set_ylabel("norm ratio")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_title("square-function norm ratios")
    fig.tight_layout()
    return fig


def _modular_failure(result: RunResult):
    fig, ax = plt.subplots(figsize=(6, 4))
    for case, marker in (("step", "o-"), ("const", "s--")):
        pts = [(row["t"], row["rho"]) for row in result.rows if row["case"] == case]
        ax.loglog([t for t, _ in pts], [r for _, r in pts], marker, label=case)
    ax.set_xlabel("t")
    ax.set_ylabel("modular ratio")
    ax.set_title(f"projection modular ratio, slope = {result.summary['slope']:.3f}")
    ax.legend()
    fig.tight_layout()
    return fig


def _maximal(result: RunResult):
    fig, ax = plt.subplots(figsize=(6, 4))
    Ls = sorted({row["L"] for row in result.rows})
    loc = [result.summary["local_ratio_at_s0"][str(L)] for L in Ls]
    full = [result.summary["full_ratio_at_s0"][str(L)] for L in Ls]
    ax.plot(Ls, loc, "o-", label="local maximal")
    ax.plot(Ls, full, "s-", label="full maximal")
    ax.set_xlabel("half-width L")
    ax.set_ylabel("operator norm ratio at s = 0")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("local vs full maximal operator")
    fig.tight_layout()
    return fig


def _vector_valued(result: RunResult):
    fig, ax = plt.subplots(figsize=(6, 4))
    for q, marker in (("2", "o"), ("inf", "s")):
        pts = [(row["trial"], row["ratio"]) for row in result.rows if row["q"] == q]
        ax.plot([t for t, _ in pts], [r for _, r in pts], marker, label=f"q = {q}")
    ax.set_xlabel("trial")
    ax.set_ylabel("vector-valued ratio")
    ax.legend()
    ax.set_title("vector-valued maximal inequality")
    fig.tight_layout()
    return fig


def _cz(result: RunResult):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    osc = [row["ratio"] for row in result.rows if row["section"] == "oscillation" and row["ratio"] != ""]
    ax1.hist(osc, bins=15)
    ax1.set_xlabel("oscillation / iterated maximal")
    ax1.set_title("oscillation lemma ratios")
    nrm = [row["ratio"] for row in result.rows if row["section"] == "norm"]
    ax2.plot(range(len(nrm)), nrm, "o")
    ax2.set_xlabel("corpus function")
    ax2.set_ylabel("|Tf| / |f|")
    ax2.set_title("operator norm band")
    fig.tight_layout()
    return fig


def _aploc(result: RunResult):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx([row["side"] for row in result.rows], [row["max_product"] for row in result.rows], "o-")
    ax.set_xlabel("cube side")
    ax.set_ylabel("max product over offsets")
    ax.set_title("local Muckenhoupt products by scale")
    fig.tight_layout()
    return fig


def _sparse(result: RunResult):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([row["index"] for row in result.rows], [row["domination_margin"] for row in result.rows], "o")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("corpus index")
    ax.set_ylabel("worst domination margin")
    ax.set_title("sparse decomposition margins (<= 0 is valid)")
    fig.tight_layout()
    return fig


def _norm(result: RunResult):
    fig, ax = plt.subplots(figsize=(7, 4))
    x = result.extras["x"]
    ax.plot(x, result.extras["f"], label=result.rows[0]["function"])
    ax2 = ax.twinx()
    ax2.plot(x, result.extras["p"], "C1--", lw=0.8, label="exponent")
    ax2.set_ylabel("p(x)")
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(f"norm = {result.rows[0]['norm']:.6g}")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "equivalence": _equivalence,
    "modular_failure": _modular_failure,
    "maximal": _maximal,
    "vector_valued": _vector_valued,
    "cz": _cz,
    "aploc": _aploc,
    "sparse": _sparse,
    "norm": _norm,
}
