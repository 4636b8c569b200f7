"""End-to-end run on a synthetic project: paths, model, metrics, figures."""

import json
import tempfile
from pathlib import Path

from chainlog import AnalysisConfig, run_analyze
from chainlog.synthetic import write_synthetic

work = Path(tempfile.mkdtemp())
log_path, hier_path = write_synthetic(work / "data", n_records=20_000, n_users=60, n_classes=800, seed=3)

for kind in ("relationship", "depth", "property-class", "user-seq"):
    out = work / kind
    cfg = AnalysisConfig(log_path, kind, out, hierarchy_path=hier_path if kind in ("relationship", "depth") else None)
    run_analyze(cfg)
    report = json.loads((out / "report.json").read_text())
    print(f"== {kind}: {sorted(p.name for p in out.iterdir())}")
    print("   users entropy/gini:", report["normalized_entropy"], report["gini"])
    for t in report["top_transitions"][:3]:
        print("  ", t)

print("outputs under", work)
