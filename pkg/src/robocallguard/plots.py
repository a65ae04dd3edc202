"""Report figures. Rendered with Agg and without PNG timestamps so reruns are byte-identical."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

if TYPE_CHECKING:
    from robocallguard.harness import RunReport

DISPOSITION_ORDER = ["Forwarded", "WhitelistPass", "BlockedRobocall", "BlockedHuman", "BlacklistDrop"]
COLORS = {
    "Forwarded": "tab:green",
    "WhitelistPass": "tab:olive",
    "BlockedRobocall": "tab:red",
    "BlockedHuman": "tab:blue",
    "BlacklistDrop": "tab:gray",
}
STYLE = {"figure.dpi": 100, "font.size": 9, "axes.spines.top": False, "axes.spines.right": False}


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)


def outcome_bars(report: RunReport, path: Path) -> None:
    kinds = sorted({r.caller_kind for r in report.rows})
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        bottom = [0] * len(kinds)
        for disp in DISPOSITION_ORDER:
            counts = [sum(r.caller_kind == k and r.actual == disp for r in report.rows) for k in kinds]
            if any(counts):
                ax.bar(kinds, counts, bottom=bottom, label=disp, color=COLORS[disp])
                bottom = [b + c for b, c in zip(bottom, counts)]
        ax.set_ylabel("calls")
        ax.set_title("Disposition by caller kind")
        if report.rows:
            ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
        _save(fig, path)


def silence_scatter(report: RunReport, path: Path) -> None:
    rows = [r for r in report.rows if r.silence_s is not None]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 3.5))
        for disp in DISPOSITION_ORDER:
            pts = [(i, r.silence_s) for i, r in enumerate(rows) if r.actual == disp]
            if pts:
                xs, ys = zip(*pts)
                ax.scatter(xs, ys, s=14, label=disp, color=COLORS[disp])
        ax.axhline(report.t3_s / 2, color="black", linestyle="--", linewidth=0.8, label="Human threshold")
        if len(rows) <= 40:
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels([r.scenario_id for r in rows], rotation=60, ha="right", fontsize=6)
        else:
            ax.xaxis.get_major_locator().set_params(integer=True)
            ax.set_xlabel("screened call")
        ax.set_ylabel("silence during reminder (s)")
        ax.set_ylim(-0.2, report.t3_s + 0.2)
        ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False, fontsize=7)
        fig.tight_layout()
        _save(fig, path)


def timeline(report: RunReport, path: Path, max_calls: int = 40) -> None:
    """Per-call trace: a line to hangup or ring, with markers at prompts and hits."""
    ids = sorted(report.traces)[:max_calls]
    markers = {"prompt": ("|", "black"), "hit": ("*", "tab:green"), "ring": ("o", "tab:green"), "hangup": ("x", "tab:red")}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, max(2.0, 0.22 * len(ids) + 1)))
        for y, sid in enumerate(ids):
            events = report.traces[sid]
            end = max((e.time_s for e in events), default=0.0)
            ax.plot([0, end], [y, y], color="lightgray", linewidth=1)
            for e in events:
                if e.event in markers:
                    m, c = markers[e.event]
                    ax.plot(e.time_s, y, marker=m, color=c, markersize=5, linestyle="none")
        ax.set_yticks(range(len(ids)))
        ax.set_yticklabels(ids, fontsize=6)
        ax.invert_yaxis()
        ax.set_xlabel("time since pickup (s)")
        ax.set_title("Call timelines")
        fig.tight_layout()
        _save(fig, path)


def report_figures(report: RunReport, fig_dir: Path) -> None:
    outcome_bars(report, fig_dir / "outcomes.png")
    silence_scatter(report, fig_dir / "silence.png")
    if report.traces:
        timeline(report, fig_dir / "timeline.png")


def _read_rows(path: Path) -> tuple[dict[str, str], list[list[str]]]:
    meta, rows = {}, []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("\t")
            meta[key] = value
        elif line:
            rows.append(line.split("\t"))
    return meta, rows


def kdistance_curve(out_dir: Path, path: Path) -> None:
    meta, rows = _read_rows(out_dir / "kdistance.tsv")
    values = [float(v) for _, v in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(range(len(values)), values, marker=".", color="tab:blue")
        if "eps" in meta:
            ax.axhline(float(meta["eps"]), color="tab:red", linestyle="--", linewidth=0.8, label=f"eps = {float(meta['eps']):.3f}")
            ax.legend(loc="upper left", frameon=False)
        ax.set_xlabel("documents, sorted")
        ax.set_ylabel(f"distance to {meta.get('min_pts', '?')}-th nearest")
        ax.set_title("k-distance curve")
        fig.tight_layout()
        _save(fig, path)


def topic_scatter(out_dir: Path, path: Path) -> None:
    _, rows = _read_rows(out_dir / "topics.tsv")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 4.5))
        labels = sorted({int(r[1]) for r in rows})
        cmap = plt.get_cmap("tab10")
        for label in labels:
            pts = [(float(r[2]), float(r[3]) if len(r) > 3 else 0.0) for r in rows if int(r[1]) == label]
            xs, ys = zip(*pts)
            if label < 0:
                ax.scatter(xs, ys, marker="x", color="gray", s=20, label="noise")
            else:
                ax.scatter(xs, ys, color=cmap(label % 10), s=16, label=f"cluster {label}")
        ax.set_xlabel("topic 1")
        ax.set_ylabel("topic 2")
        ax.set_title("Transcripts in topic space")
        if rows:
            ax.legend(loc="best", frameon=False, fontsize=7)
        fig.tight_layout()
        _save(fig, path)


def cluster_figures(out_dir: Path, fig_dir: Path) -> None:
    kdistance_curve(out_dir, fig_dir / "kdistance.png")
    topic_scatter(out_dir, fig_dir / "topics.png")
