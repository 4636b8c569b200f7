"""Load a small change log, look at it, and run the validation checks."""

import tempfile
from pathlib import Path

from chainlog import IngestConfig, parse_changelog, validate_changelog
from chainlog.synthetic import write_synthetic

work = Path(tempfile.mkdtemp())
log_path, hier_path = write_synthetic(work, n_records=2_000, n_users=20, n_classes=200, seed=1)

# bots are dropped before anything else sees the log
cfg = IngestConfig(bot_users=frozenset({"user0"}))
log = parse_changelog(log_path, "jsonl", cfg)
print("records:", len(log.records))
print("digest :", log.source_digest[:16], "...")
for rec in log.records[:3]:
    print("  ", rec)

# obfuscated ids follow order of first appearance
anon = parse_changelog(log_path, "jsonl", IngestConfig(obfuscate_users=True))
print("first users after obfuscation:", sorted({r.user for r in anon.records})[:5])

# the raw file is written in generation order, so leave it unsorted to see the check fire
raw = parse_changelog(log_path, "jsonl", sort=False)
report = validate_changelog(raw)
for check in report.checks:
    print(f"{check.name:22s} passed={check.passed} findings={len(check.findings)}")
