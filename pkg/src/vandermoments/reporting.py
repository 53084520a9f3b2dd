"""Delimited report files and companion figures for the MC report path.

Every writer takes an output directory; the delimited data (JSON lines or
TSV) and the rendered PNG land side by side so a run's numbers and its
picture stay together.  matplotlib is imported lazily with the Agg backend,
keeping the exact-computation paths free of plotting dependencies.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Optional


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def write_jsonl(path: str, records: Iterable[dict]) -> str:
    _ensure_dir(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


def write_tsv(path: str, fields: list[str], rows: Iterable[dict]) -> str:
    _ensure_dir(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(fields) + "\n")
        for row in rows:
            fh.write("\t".join(str(row.get(f, "")) for f in fields) + "\n")
    return path


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def decay_figure(report, path: str) -> str:
    plt = _pyplot()
    ns = [r.N for r in report.rows]
    mags = [r.magnitude for r in report.rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.loglog(ns, mags, "o-", label="centered trace magnitude")
    if report.slope is not None and len(ns) >= 2:
        ref = [mags[0] * (n / ns[0]) ** -0.5 for n in ns]
        ax.loglog(ns, ref, "--", color="gray", label="slope -1/2 reference")
        ax.set_title(f"pattern {report.eps}: fitted slope "
                     f"{report.slope:.3f}")
    ax.set_xlabel("N")
    ax.set_ylabel("|mean trace|")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def growth_figure(report, path: str, analytic: Optional[float] = None) -> str:
    plt = _pyplot()
    ns = [r.N for r in report.rows]
    ratios = [r.ratio for r in report.rows]
    errs = [3 * r.stderr for r in report.rows]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(ns, ratios, yerr=errs, fmt="o-", capsize=3,
                label="Tr((X*X)^p)/N")
    if analytic is not None:
        ax.axhline(analytic, color="gray", linestyle="--",
                   label=f"limit {analytic:.4g}")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("ratio")
    ax.set_title(f"p = {report.p}" + (", flagged as growing"
                                      if report.grows else ""))
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def estimate_figure(reports, path: str) -> str:
    """Mean with 3-sigma bars across matrix sizes for one word."""
    plt = _pyplot()
    ns = [r.N for r in reports]
    means = [r.mean.real for r in reports]
    errs = [3 * r.stderr for r in reports]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(ns, means, yerr=errs, fmt="o-", capsize=3, label="estimate")
    analytic = next((r.analytic for r in reports if r.analytic is not None),
                    None)
    if analytic is not None:
        ax.axhline(analytic, color="gray", linestyle="--",
                   label=f"limit {analytic:.6g}")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("mean trace")
    ax.set_title(reports[0].word if reports else "")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
