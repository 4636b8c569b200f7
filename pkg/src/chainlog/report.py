"""End-to-end analysis runs and their file artifacts.

A run writes five files into its output directory:

``matrix.csv``     row-normalized transition probabilities (rows = from)
``counts.csv``     raw transition counts in the same layout
``histogram.csv``  label occurrences over all paths
``report.json``    summary numbers and the most frequent transitions
``heatmap.svg``    the probability matrix as a white-to-black grid

All outputs are deterministic: states are ordered lexicographically and
floats are printed with a fixed number of decimals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from . import markov, metrics
from .errors import AbsentRow, DegenerateDistribution
from .hierarchy import load_hierarchy
from .ingest import IngestConfig, load_user_list, parse_changelog
from .paths import PathKind, SessionConfig, build_paths, count_breaks, moved_before_changed

DECIMALS = 9
HISTORY_SEP = " > "
TOP_TRANSITIONS = 20


@dataclass
class AnalysisConfig:
    log_path: Path
    path_kind: PathKind
    out_dir: Path
    hierarchy_path: Optional[Path] = None
    log_format: str = "jsonl"
    order: int = 1
    alpha: float = 0.0
    break_secs: float = 300.0
    min_user_changes: int = 0
    obfuscate: bool = False
    bots: frozenset = frozenset()
    bots_path: Optional[Path] = None
    root: Optional[str] = None

    def __post_init__(self):
        self.path_kind = PathKind(self.path_kind)
        self.log_path = Path(self.log_path)
        self.out_dir = Path(self.out_dir)
        if self.hierarchy_path is not None:
            self.hierarchy_path = Path(self.hierarchy_path)
        if self.path_kind.needs_hierarchy and self.hierarchy_path is None:
            raise ValueError(f"path kind '{self.path_kind}' requires a hierarchy file")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.min_user_changes < 0:
            raise ValueError("min_user_changes must be >= 0")


@dataclass
class AnalysisBundle:
    config: AnalysisConfig
    paths: list
    model: markov.TransitionModel
    histogram: metrics.ContributionDistribution
    contributions: metrics.ContributionDistribution
    normalized_entropy: Optional[float]
    gini: Optional[float]
    break_count: int
    moved_before_changed: Optional[int] = None
    files: dict = field(default_factory=dict)


def _fmt(p):
    return f"{p:.{DECIMALS}f}"


def format_history(history):
    return HISTORY_SEP.join(map(str, history))


def _row_layout(m):
    """(row label, row index or None) pairs in lexicographic order."""
    if m.order == 1:
        return [(s, m._row.get((s,))) for s in m.states.labels]
    return [(format_history(h), i) for i, h in enumerate(m.histories)]


def export_matrix_csv(m, which, path):
    """Write the probability or count matrix; absent rows become empty cells."""
    if which not in ("probs", "counts"):
        raise ValueError("which must be 'probs' or 'counts'")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from\\to", *m.states.labels])
    n = len(m.states)
    for label, i in _row_layout(m):
        if which == "counts":
            cells = [str(c) for c in m.counts[i]] if i is not None else ["0"] * n
        else:
            try:
                row = m.row(label if m.order == 1 else m.histories[i])
                cells = [_fmt(p) for p in row]
            except AbsentRow:
                cells = [""] * n
        writer.writerow([label, *cells])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")
    return Path(path)


def read_matrix_csv(path):
    """Parse a matrix CSV back into (row labels, column labels, ndarray).

    Empty cells become NaN; the array is integer when every cell is.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    cols = rows[0][1:]
    labels = [r[0] for r in rows[1:]]
    cells = [r[1:] for r in rows[1:]]
    if all(c and c.lstrip("-").isdigit() for row in cells for c in row):
        values = np.array([[int(c) for c in row] for row in cells], dtype=np.int64)
    else:
        values = np.array([[float(c) if c else np.nan for c in row] for row in cells])
    return labels, cols, values.reshape(len(labels), len(cols))


def model_from_counts_csv(path, order=1, alpha=0.0):
    """Rebuild a model from an exported counts matrix."""
    labels, cols, values = read_matrix_csv(path)
    histories = [tuple(lab.split(HISTORY_SEP)) if order > 1 else (lab,) for lab in labels]
    keep = values.sum(axis=1) > 0
    histories = [h for h, k in zip(histories, keep) if k]
    return markov.TransitionModel(order, markov.StateSpace(cols), tuple(histories), values[keep], alpha)


def export_histogram_csv(d, path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "count"])
    for label, count in d.entries.items():
        writer.writerow([label, count])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")
    return Path(path)


def _gray(p):
    level = int(round(255 * (1.0 - min(max(p, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def render_heatmap_svg(m, path, min_count=0, state_counts=None, cell=12):
    """Draw the probability matrix as a grid of squares.

    Fill is linear in probability from white (0) to black (1). States whose
    entry in ``state_counts`` is below ``min_count`` are left out of the
    figure only. Rows that were never observed get a grey outline and no fill.
    Zero cells are not drawn separately; they show the white background.
    """
    rows = _row_layout(m)
    if min_count > 0:
        if state_counts is None:
            state_counts = dict(zip(m.states.labels, m.counts.sum(axis=0).tolist()))
        keep = {s for s in m.states.labels if state_counts.get(s, 0) >= min_count}
    else:
        keep = set(m.states.labels)
    cols = [(j, s) for j, s in enumerate(m.states.labels) if s in keep]
    if m.order == 1:
        rows = [(lab, i) for lab, i in rows if lab in keep]
    else:
        rows = [
            (lab, i) for lab, i in rows if all(s in keep for s in m.histories[i])
        ]

    label_w = 8 + 7 * max([len(str(lab)) for lab, _ in rows] + [1])
    label_h = 8 + 7 * max([len(str(s)) for _, s in cols] + [1])
    width = label_w + cell * len(cols) + 4
    height = label_h + cell * len(rows) + 4

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        '<g class="col-labels">',
    ]
    for c, (_, s) in enumerate(cols):
        x = label_w + c * cell + cell // 2 + 3
        out.append(
            f'<text x="{x}" y="{label_h - 4}" transform="rotate(-90 {x} {label_h - 4})">'
            f"{escape(str(s))}</text>"
        )
    out.append("</g>")
    out.append('<g class="row-labels">')
    for r, (lab, _) in enumerate(rows):
        y = label_h + r * cell + cell - 2
        out.append(f'<text x="{label_w - 4}" y="{y}" text-anchor="end">{escape(str(lab))}</text>')
    out.append("</g>")
    out.append('<g class="cells">')
    probs = m.probs
    for r, (lab, i) in enumerate(rows):
        y = label_h + r * cell
        if i is None or np.isnan(probs[i, 0]):
            if m.alpha > 0:
                fill = _gray(1.0 / len(m.states))
                for c in range(len(cols)):
                    out.append(
                        f'<rect x="{label_w + c * cell}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>'
                    )
            else:
                out.append(
                    f'<rect x="{label_w}" y="{y}" width="{cell * len(cols)}" height="{cell}" '
                    'fill="none" stroke="#cccccc" class="absent"/>'
                )
            continue
        for c, (j, _) in enumerate(cols):
            p = float(probs[i, j])
            if p <= 0.0:
                continue
            out.append(
                f'<rect x="{label_w + c * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_gray(p)}"><title>{_fmt(p)}</title></rect>'
            )
    out.append("</g>")
    out.append(
        f'<rect x="{label_w}" y="{label_h}" width="{cell * len(cols)}" height="{cell * len(rows)}" '
        'fill="none" stroke="#000000" stroke-width="0.5"/>'
    )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8", newline="")
    return Path(path)


def top_transitions(m, limit=TOP_TRANSITIONS):
    """Most frequent (history, next) pairs by count, ties broken by labels."""
    rows, cols = np.nonzero(m.counts)
    items = []
    for i, j in zip(rows.tolist(), cols.tolist()):
        h = m.histories[i]
        items.append((-int(m.counts[i, j]), h, m.states.labels[j], i, j))
    items.sort(key=lambda t: (t[0], t[1], t[2]))
    out = []
    for neg, h, nxt, i, j in items[:limit]:
        out.append(
            {
                "from": h[0] if m.order == 1 else format_history(h),
                "to": nxt,
                "p": round(float(m.probs[i, j]), DECIMALS),
                "count": -neg,
            }
        )
    return out


def _nullable(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else round(x, DECIMALS)


def report_dict(bundle):
    m = bundle.model
    out = {
        "path_kind": bundle.config.path_kind.value,
        "order": m.order,
        "alpha": m.alpha,
        "n_paths": len(bundle.paths),
        "n_states": len(m.states),
        "n_transitions": m.n_transitions,
        "normalized_entropy": _nullable(bundle.normalized_entropy),
        "gini": _nullable(bundle.gini),
        "n_users": bundle.contributions.n,
        "top_transitions": top_transitions(m),
        "break_count": bundle.break_count,
    }
    if bundle.moved_before_changed is not None:
        out["moved_before_changed"] = bundle.moved_before_changed
    return out


def export_report_json(bundle, path):
    text = json.dumps(report_dict(bundle), indent=2, ensure_ascii=False, sort_keys=False)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="")
    return Path(path)


def _safe_metric(fn, d):
    try:
        return fn(d)
    except DegenerateDistribution:
        return None


def run_analyze(cfg: AnalysisConfig) -> AnalysisBundle:
    """Parse, build paths, fit, compute metrics and write every artifact."""
    bots = set(cfg.bots)
    if cfg.bots_path is not None:
        bots |= load_user_list(cfg.bots_path)
    ingest_cfg = IngestConfig(
        bot_users=frozenset(bots),
        min_user_changes=cfg.min_user_changes,
        obfuscate_users=cfg.obfuscate,
    )
    log = parse_changelog(cfg.log_path, cfg.log_format, ingest_cfg)
    hierarchy = None
    if cfg.hierarchy_path is not None:
        hierarchy = load_hierarchy(cfg.hierarchy_path, cfg.root)
    session = SessionConfig(break_threshold=cfg.break_secs)

    paths = build_paths(log, cfg.path_kind, hierarchy, session)
    model = markov.fit(paths, order=cfg.order, alpha=cfg.alpha)
    histogram = metrics.state_histogram(paths)
    contributions = metrics.user_contributions(log)

    bundle = AnalysisBundle(
        config=cfg,
        paths=paths,
        model=model,
        histogram=histogram,
        contributions=contributions,
        normalized_entropy=_safe_metric(metrics.normalized_entropy, contributions),
        gini=_safe_metric(metrics.gini_coefficient, contributions),
        break_count=count_breaks(paths, session.break_label) if cfg.path_kind.user_view else 0,
        moved_before_changed=moved_before_changed(log),
    )

    if cfg.path_kind is PathKind.USER_SEQUENCE:
        render_counts = bundle.contributions.entries
    else:
        render_counts = histogram.entries

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    bundle.files = {
        "matrix": export_matrix_csv(model, "probs", out / "matrix.csv"),
        "counts": export_matrix_csv(model, "counts", out / "counts.csv"),
        "histogram": export_histogram_csv(histogram, out / "histogram.csv"),
        "report": export_report_json(bundle, out / "report.json"),
        "heatmap": render_heatmap_svg(
            model, out / "heatmap.svg", cfg.min_user_changes, render_counts
        ),
    }
    return bundle
