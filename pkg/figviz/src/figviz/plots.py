"""Figure rendering for trace CSVs and circuit files.

All output is static image files; rendering is pure, so identical inputs
produce identical (metadata-stripped) bytes.  PNG output drops the writer
metadata outright to make the bytes reproducible as-is.
"""
from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .circuits import count_gates_file
from .traces import TraceFrame


@dataclass
class RenderInfo:
    out_path: str
    n_rows: int
    n_param_curves: int = 0
    n_removal_markers: int = 0


def _save(fig, out_path):
    kwargs = {"dpi": 150}
    if str(out_path).lower().endswith(".png"):
        kwargs["metadata"] = {"Software": None}
    fig.savefig(out_path, **kwargs)
    plt.close(fig)


def _param_matrix(frame):
    names = frame.param_names
    if not names:
        return np.zeros((len(frame), 0))
    return np.column_stack([frame.columns[n] for n in names])


def _spaghetti(ax, iters, params):
    """One curve per parameter, coloured by its maximum magnitude."""
    if params.shape[1] == 0:
        return 0
    peak = np.max(np.abs(params), axis=0)
    top = peak.max() if peak.max() > 0 else 1.0
    cmap = plt.get_cmap("viridis")
    for order in np.argsort(peak):
        ax.plot(iters, params[:, order], color=cmap(peak[order] / top), linewidth=0.7)
    ax.set_ylabel("parameter (rad)")
    return params.shape[1]


def plot_recompile(trace_path, out_path):
    """Energy/fidelity/bound on top, parameter spaghetti below."""
    frame = TraceFrame.from_csv(trace_path).require("recompile")
    iters = frame.columns["iter"]
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True,
                                            gridspec_kw={"height_ratios": [2, 3]})
    ax_top.plot(iters, frame.columns["energy"], color="tab:red", label="energy")
    ax_top.set_ylabel("energy")
    ax_fid = ax_top.twinx()
    ax_fid.plot(iters, frame.columns["fidelity"], color="tab:blue", label="fidelity")
    ax_fid.plot(iters, frame.columns["bound"], color="tab:blue", linestyle="--", label="bound")
    ax_fid.set_ylabel("fidelity")
    lines = ax_top.get_lines() + ax_fid.get_lines()
    ax_top.legend(lines, [l.get_label() for l in lines], loc="center right", fontsize=8)
    n_curves = _spaghetti(ax_bottom, iters, _param_matrix(frame))
    ax_bottom.set_xlabel("iteration")
    fig.tight_layout()
    _save(fig, out_path)
    return RenderInfo(str(out_path), len(frame), n_param_curves=n_curves)


def plot_elimination(trace_path, out_path):
    """Energy history with one vertical marker per removed parameter."""
    frame = TraceFrame.from_csv(trace_path).require("eliminate")
    iters = frame.columns["iter"]
    removals = frame.removal_iterations()
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True,
                                            gridspec_kw={"height_ratios": [2, 3]})
    ax_top.plot(iters, frame.columns["energy"], color="tab:red", label="energy")
    ax_top.set_ylabel("energy")
    ax_top.legend(loc="center right", fontsize=8)
    n_curves = _spaghetti(ax_bottom, iters, _param_matrix(frame))
    for ax in (ax_top, ax_bottom):
        for t in removals:
            ax.axvline(t, color="0.8", linewidth=0.5, zorder=0)
    ax_bottom.set_xlabel("iteration")
    fig.tight_layout()
    _save(fig, out_path)
    return RenderInfo(str(out_path), len(frame), n_param_curves=n_curves,
                      n_removal_markers=len(removals))


def plot_fidelity_compare(trace_paths, labels, out_path):
    """Overlay fidelity against time for any number of traces."""
    if labels and len(labels) != len(trace_paths):
        raise ValueError(f"{len(trace_paths)} traces but {len(labels)} labels")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, path in enumerate(trace_paths):
        frame = TraceFrame.from_csv(path).require("sweep")
        label = labels[i] if labels else str(path)
        ax.plot(frame.columns["t"], frame.columns["fidelity"], label=label)
    ax.set_xlabel("simulated time")
    ax.set_ylabel("fidelity with exact evolution")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)
    return RenderInfo(str(out_path), len(trace_paths))


def plot_resources(circuit_paths, labels, out_path):
    """Grouped bars of one- and two-qubit gate counts per circuit file."""
    if labels and len(labels) != len(circuit_paths):
        raise ValueError(f"{len(circuit_paths)} circuits but {len(labels)} labels")
    counts = [count_gates_file(p) for p in circuit_paths]
    names = labels if labels else [str(p) for p in circuit_paths]
    x = np.arange(len(counts))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.6 * len(counts)), 4.5))
    ax.bar(x - 0.2, [c.one_qubit for c in counts], width=0.4, label="one-qubit")
    ax.bar(x + 0.2, [c.two_qubit for c in counts], width=0.4, label="two-qubit")
    ax.set_xticks(x, names, rotation=20, ha="right")
    ax.set_ylabel("gate count")
    ax.legend()
    for xi, c in zip(x, counts):
        ax.text(xi - 0.2, c.one_qubit, str(c.one_qubit), ha="center", va="bottom", fontsize=8)
        ax.text(xi + 0.2, c.two_qubit, str(c.two_qubit), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)
    return RenderInfo(str(out_path), len(counts))
