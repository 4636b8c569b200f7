import hashlib
import json
import re

import numpy as np
import pytest

from chainlog.cli import main
from chainlog.markov import fit
from chainlog.report import (
    AnalysisConfig,
    export_matrix_csv,
    model_from_counts_csv,
    read_matrix_csv,
    render_heatmap_svg,
    run_analyze,
    top_transitions,
)

from conftest import TREE_EDGES, write_jsonl

OUTPUTS = ["matrix.csv", "counts.csv", "histogram.csv", "report.json", "heatmap.svg"]


def digests(directory):
    return {name: hashlib.sha256((directory / name).read_bytes()).hexdigest() for name in OUTPUTS}


def _rows(events):
    """(seconds, user, class[, property]) -> JSONL rows."""
    out = []
    for t, user, cls, *prop in events:
        row = {"ts": 1_258_539_753_000 + t * 1000, "user": user, "class": cls}
        if prop and prop[0] is not None:
            row.update(action="property_value_changed", property=prop[0])
        else:
            row["action"] = "class_moved"
        out.append(row)
    return out


@pytest.fixture
def hierarchy_csv(tmp_path):
    path = tmp_path / "tree.csv"
    path.write_text("child,parent\n" + "".join(f"{c},{p}\n" for c, p in TREE_EDGES), encoding="utf-8")
    return path


# -- matrix exports -----------------------------------------------------------------


def test_deterministic_two_state_csv(tmp_path):
    m = fit([["A", "B", "A"]])
    export_matrix_csv(m, "probs", tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text() == (
        "from\\to,A,B\n"
        "A,0.000000000,1.000000000\n"
        "B,1.000000000,0.000000000\n"
    )


def test_counts_csv_and_reimport(tmp_path):
    m = fit([["A", "B", "A", "B", "A"]])
    export_matrix_csv(m, "counts", tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[1:] == ["A,0,2", "B,2,0"]
    back = model_from_counts_csv(tmp_path / "c.csv")
    assert np.array_equal(back.counts, m.counts)
    assert back.histories == m.histories


def test_absent_row_exports_empty_cells(tmp_path):
    m = fit([["A", "B"]])
    export_matrix_csv(m, "probs", tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[2] == "B,,"
    labels, cols, values = read_matrix_csv(tmp_path / "m.csv")
    assert labels == ["A", "B"] and np.isnan(values[1]).all()


def test_higher_order_csv_round_trip(tmp_path):
    m = fit([list("ABCABBCA"), list("CABC")], order=2)
    export_matrix_csv(m, "counts", tmp_path / "c.csv")
    back = model_from_counts_csv(tmp_path / "c.csv", order=2)
    assert back.histories == m.histories
    assert np.array_equal(back.counts, m.counts)


# -- heatmap ---------------------------------------------------------------------------


def _cells(svg):
    return re.findall(r'<rect x="(\d+)" y="(\d+)" width="\d+" height="\d+" fill="(#[0-9a-f]{6})">', svg)


def test_heatmap_one_black_cell_per_row(tmp_path):
    m = fit([["A", "B", "A"]])
    render_heatmap_svg(m, tmp_path / "h.svg")
    svg = (tmp_path / "h.svg").read_text()
    black = [c for c in _cells(svg) if c[2] == "#000000"]
    assert len(black) == 2
    assert len({y for _, y, _ in black}) == 2


def test_heatmap_is_byte_stable(tmp_path):
    m = fit([list("ABCABBCA")])
    render_heatmap_svg(m, tmp_path / "1.svg")
    render_heatmap_svg(m, tmp_path / "2.svg")
    assert (tmp_path / "1.svg").read_bytes() == (tmp_path / "2.svg").read_bytes()


def test_heatmap_filter_leaves_model_alone(tmp_path):
    m = fit([["u1", "u2", "u3", "u1", "u2"]])
    m.save(tmp_path / "model.json")
    before = (tmp_path / "model.json").read_bytes()
    render_heatmap_svg(m, tmp_path / "h.svg", min_count=5, state_counts={"u1": 10, "u2": 7, "u3": 1})
    svg = (tmp_path / "h.svg").read_text()
    row_labels = re.findall(r'text-anchor="end">([^<]+)<', svg)
    col_block = svg.split('<g class="col-labels">')[1].split("</g>")[0]
    col_labels = re.findall(r">([^<]+)</text>", col_block)
    assert row_labels == ["u1", "u2"] and col_labels == ["u1", "u2"]
    m.save(tmp_path / "model.json")
    assert (tmp_path / "model.json").read_bytes() == before


def test_top_transitions_sorted_by_count_then_label():
    m = fit([["b", "a"], ["b", "a"], ["a", "c"], ["a", "b"], ["c", "a"], ["c", "a"]])
    top = top_transitions(m)
    assert [(t["from"], t["to"], t["count"]) for t in top] == [
        ("b", "a", 2), ("c", "a", 2), ("a", "b", 1), ("a", "c", 1),
    ]


# -- run_analyze -----------------------------------------------------------------


def test_analyze_user_sequence(tmp_path):
    log = write_jsonl(tmp_path / "log.jsonl", _rows([
        (0, "ann", "K1"), (1, "bob", "K1"), (2, "cat", "K1"), (3, "ann", "K2"), (4, "bob", "K2"),
    ]))
    bundle = run_analyze(AnalysisConfig(log, "user-seq", tmp_path / "out"))
    for name in OUTPUTS:
        assert (tmp_path / "out" / name).exists()
    m = bundle.model
    sums = np.nansum(m.probs, axis=1)
    assert np.allclose(sums[m.row_present()], 1.0, atol=1e-9)
    _, _, matrix = read_matrix_csv(tmp_path / "out" / "matrix.csv")
    present = ~np.isnan(matrix).any(axis=1)
    assert np.allclose(matrix[present].sum(axis=1), 1.0, atol=1e-8)


def test_analyze_depth_worked_example(tmp_path):
    hier = tmp_path / "h.csv"
    hier.write_text("child,parent\nL1,R\nL2,L1\nA,L2\nB,L2\nC,A\n", encoding="utf-8")
    log = write_jsonl(tmp_path / "log.jsonl", _rows([
        (0, "u", "A"), (10, "u", "A"), (20, "u", "A"), (30, "u", "B"), (40, "u", "C"),
    ]))
    bundle = run_analyze(AnalysisConfig(log, "depth", tmp_path / "out", hierarchy_path=hier))
    counts = bundle.model.full_matrix("counts")
    labels = bundle.model.states.labels
    assert labels == ("level-3", "level-4")
    assert counts.tolist() == [[2, 1], [0, 0]]
    assert (tmp_path / "out" / "counts.csv").read_text().splitlines() == [
        "from\\to,level-3,level-4", "level-3,2,1", "level-4,0,0",
    ]


def test_analyze_is_byte_deterministic(tmp_path, hierarchy_csv):
    rows = _rows([(t * 37 % 2000, f"u{t % 3}", ["A1", "A2", "B1", "A", "C1a"][t % 5], "title" if t % 2 else None) for t in range(60)])
    log = write_jsonl(tmp_path / "log.jsonl", rows)
    for kind in ["user-seq", "depth", "relationship", "property-user", "property-class", "action"]:
        a = run_analyze(AnalysisConfig(log, kind, tmp_path / f"{kind}-1", hierarchy_path=hierarchy_csv))
        run_analyze(AnalysisConfig(log, kind, tmp_path / f"{kind}-2", hierarchy_path=hierarchy_csv))
        assert digests(tmp_path / f"{kind}-1") == digests(tmp_path / f"{kind}-2")
        assert a.files["report"].name == "report.json"


def test_report_json_metrics(tmp_path):
    uniform = write_jsonl(tmp_path / "u.jsonl", _rows([(i, f"u{i % 4}", "K") for i in range(8)]))
    run_analyze(AnalysisConfig(uniform, "user-seq", tmp_path / "u"))
    report = json.loads((tmp_path / "u" / "report.json").read_text())
    assert report["normalized_entropy"] == 1.0
    assert report["gini"] == 0.0
    assert set(report) >= {"path_kind", "order", "n_paths", "n_transitions", "top_transitions", "break_count"}

    skewed = write_jsonl(tmp_path / "s.jsonl", _rows([(0, "a", "K"), (1, "a", "K2"), (2, "b", "K"), (3, "a", "K")]))
    run_analyze(AnalysisConfig(skewed, "user-seq", tmp_path / "s"))
    report = json.loads((tmp_path / "s" / "report.json").read_text())
    assert abs(report["normalized_entropy"] - 0.811278) <= 1e-6
    assert report["gini"] == 0.25


def test_render_filter_does_not_touch_model_or_metrics(tmp_path):
    rows = _rows([(i, ["a", "b", "c"][i % 3] if i < 12 else "a", f"K{i % 2}") for i in range(15)])
    log = write_jsonl(tmp_path / "log.jsonl", rows)
    full = run_analyze(AnalysisConfig(log, "user-seq", tmp_path / "f0"))
    filt = run_analyze(AnalysisConfig(log, "user-seq", tmp_path / "f1", min_user_changes=5))
    for name in ["matrix.csv", "counts.csv", "histogram.csv", "report.json"]:
        assert (tmp_path / "f0" / name).read_bytes() == (tmp_path / "f1" / name).read_bytes()
    assert (tmp_path / "f0" / "heatmap.svg").read_bytes() != (tmp_path / "f1" / "heatmap.svg").read_bytes()
    assert full.normalized_entropy == filt.normalized_entropy


def test_config_requires_hierarchy_for_structural_kinds(tmp_path):
    with pytest.raises(ValueError):
        AnalysisConfig(tmp_path / "x", "relationship", tmp_path / "o")
    with pytest.raises(ValueError):
        AnalysisConfig(tmp_path / "x", "action", tmp_path / "o", order=0)


# -- command line ------------------------------------------------------------------


def test_cli_end_to_end(tmp_path, hierarchy_csv, capsys, monkeypatch):
    rows = _rows([(0, "u", "A1"), (5, "u", "A2"), (9, "u", "A2"), (12, "u", "A"), (700, "u", "B1"), (3, "w", "B"), (8, "w", "B1")])
    log = write_jsonl(tmp_path / "log.jsonl", rows)
    bots = tmp_path / "bots.txt"
    bots.write_text("# bots\nw\n", encoding="utf-8")

    assert main(["validate", "--log", str(log), "--format", "jsonl"]) == 1  # file not time-sorted
    out = json.loads(capsys.readouterr().out)
    assert not out["ok"] and out["n_records"] == 7

    paths_file = tmp_path / "paths.jsonl"
    assert main(["paths", "--log", str(log), "--hierarchy", str(hierarchy_csv), "--kind", "relationship",
                 "--bots", str(bots), "--out", str(paths_file)]) == 0
    lines = [json.loads(x) for x in paths_file.read_text().splitlines()]
    assert lines == [{"owner": "u", "kind": "relationship", "labels": ["Sibling", "Self", "Parent", "BREAK", "Other"]}]

    model = tmp_path / "model.json"
    assert main(["fit", "--paths", str(paths_file), "--order", "1", "--alpha", "0", "--out", str(model)]) == 0
    capsys.readouterr()
    assert main(["predict", "--model", str(model), "--history", "Sibling", "--top", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "Self\t1.000000000"

    monkeypatch.setenv("CHAINLOG_SEED", "5")
    sample = tmp_path / "sample.jsonl"
    assert main(["sample", "--model", str(model), "--n-paths", "2", "--length", "3", "--out", str(sample)]) == 0
    first = sample.read_bytes()
    main(["sample", "--model", str(model), "--n-paths", "2", "--length", "3", "--seed", "99", "--out", str(sample)])
    assert sample.read_bytes() == first  # env seed wins over --seed
    capsys.readouterr()

    assert main(["loglik", "--model", str(model), "--paths", str(paths_file)]) == 0
    assert capsys.readouterr().out.strip() == "0.000000000"

    out_dir = tmp_path / "analysis"
    assert main(["analyze", "--log", str(log), "--hierarchy", str(hierarchy_csv), "--kind", "depth",
                 "--order", "1", "--break-secs", "300", "--min-user-changes", "0", "--obfuscate",
                 "--out", str(out_dir)]) == 0
    assert sorted(p.name for p in out_dir.iterdir()) == sorted(OUTPUTS)
    summary = json.loads(capsys.readouterr().out)
    assert summary["path_kind"] == "depth"


def test_cli_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"ts": 1, "user": "a"}\n', encoding="utf-8")
    assert main(["validate", "--log", str(bad), "--format", "jsonl"]) == 2
    assert "line 1" in capsys.readouterr().err
