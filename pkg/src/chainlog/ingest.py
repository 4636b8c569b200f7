"""Reading change logs from JSONL or CSV into a canonical event stream.

Every record is one atomic change by one user on one class. Timestamps are
accepted either as RFC 3339 text or as integer epoch milliseconds and are
normalized to epoch milliseconds (UTC). Records are ordered by
``(ts, seq)`` where ``seq`` is the 0-based position in the input file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from .errors import EmptyLog, MalformedRecord

DEFAULT_PROPERTY_ACTIONS = frozenset(
    {
        "property_value_changed",
        "property_value_added",
        "property_value_replaced",
        "property_value_removed",
    }
)
CSV_HEADER = ["ts", "user", "class", "action", "property"]


@dataclass(frozen=True, slots=True)
class ChangeRecord:
    seq: int
    ts: int  # epoch milliseconds, UTC
    user: str
    class_id: str
    action: str
    property: Optional[str] = None


@dataclass(frozen=True)
class ChangeLog:
    records: tuple
    source_digest: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def users(self):
        return sorted({r.user for r in self.records})

    @property
    def classes(self):
        return sorted({r.class_id for r in self.records})


@dataclass
class IngestConfig:
    bot_users: frozenset = frozenset()
    min_user_changes: int = 0
    obfuscate_users: bool = False
    property_actions: frozenset = DEFAULT_PROPERTY_ACTIONS

    def __post_init__(self):
        if self.min_user_changes < 0:
            raise ValueError("min_user_changes must be >= 0")
        self.bot_users = frozenset(self.bot_users)
        self.property_actions = frozenset(self.property_actions)


def parse_timestamp(value):
    """Return epoch milliseconds for an RFC 3339 string or an integer.

    >>> parse_timestamp("2009-11-18T10:22:33Z")
    1258539753000
    >>> parse_timestamp(1258539753000)
    1258539753000
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"epoch milliseconds must be integral: {value!r}")
        return int(value)
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    if text[-1] in "Zz":
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
    return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000


def format_timestamp(ms):
    dt = datetime.fromtimestamp(ms / 1000, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ms % 1000:03d}Z"


def _make_record(seq, line, raw):
    for key in ("ts", "user", "class", "action"):
        value = raw.get(key)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise MalformedRecord(line, f"missing required field '{key}'")
    try:
        ts = parse_timestamp(raw["ts"])
    except (ValueError, TypeError) as exc:
        raise MalformedRecord(line, f"unparseable timestamp {raw['ts']!r}: {exc}") from None
    prop = raw.get("property")
    if prop is not None:
        prop = str(prop)
        if not prop:
            prop = None
    return ChangeRecord(seq, ts, str(raw["user"]), str(raw["class"]), str(raw["action"]), prop)


def _iter_jsonl(text):
    seq = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise MalformedRecord(lineno, "record is not a JSON object")
        yield _make_record(seq, lineno, raw)
        seq += 1


def _iter_csv(text):
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        return
    if [h.strip() for h in header] != CSV_HEADER:
        raise MalformedRecord(1, f"CSV header must be exactly {','.join(CSV_HEADER)}")
    seq = 0
    for row in reader:
        lineno = reader.line_num
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedRecord(lineno, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
        yield _make_record(seq, lineno, dict(zip(CSV_HEADER, row)))
        seq += 1


def read_records(data: bytes, format: str):
    """Decode raw bytes into ChangeRecords in file order."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"file is not valid UTF-8: {exc}") from None
    if text.startswith("\ufeff"):
        text = text[1:]
    if format == "jsonl":
        return list(_iter_jsonl(text))
    if format == "csv":
        return list(_iter_csv(text))
    raise ValueError(f"unsupported format {format!r} (expected 'jsonl' or 'csv')")


def obfuscation_map(users: Iterable[str]):
    """Map each user to ``u<rank>`` by order of first appearance (1-based, zero-padded)."""
    order = list(dict.fromkeys(users))
    width = len(str(len(order)))
    return {u: f"u{i:0{width}d}" for i, u in enumerate(order, start=1)}


def build_changelog(records, config=None, *, digest="", sort=True):
    """Apply bot filtering, ordering and obfuscation to in-memory records."""
    config = config or IngestConfig()
    kept = [r for r in records if r.user not in config.bot_users]
    if not kept:
        raise EmptyLog("no change records left after filtering")
    if sort:
        kept.sort(key=lambda r: (r.ts, r.seq))
    if config.obfuscate_users:
        mapping = obfuscation_map(r.user for r in kept)
        kept = [
            ChangeRecord(r.seq, r.ts, mapping[r.user], r.class_id, r.action, r.property)
            for r in kept
        ]
    return ChangeLog(tuple(kept), digest)


def parse_changelog(path, format="jsonl", config=None, *, sort=True):
    """Parse a change-log file.

    Parameters
    ----------
    path : str or Path
        JSONL (one object per line) or CSV with header ``ts,user,class,action,property``.
    format : {'jsonl', 'csv'}
    config : IngestConfig, optional
    sort : bool
        Set to False to keep file order, e.g. to let :func:`validate_changelog`
        report monotonicity problems in the raw file.

    Raises
    ------
    MalformedRecord
        A record lacks a required field or has an unparseable timestamp.
    EmptyLog
        No records survive bot filtering.
    """
    data = Path(path).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    return build_changelog(read_records(data, format), config, digest=digest, sort=sort)


def load_user_list(path):
    """Read one username per line; blank lines and ``#`` comments are skipped."""
    names = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.add(line)
    return frozenset(names)


def write_changelog(records, path, format="jsonl"):
    """Write records back out, timestamps as epoch milliseconds."""
    path = Path(path)
    if format == "jsonl":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                obj = {"ts": r.ts, "user": r.user, "class": r.class_id, "action": r.action}
                if r.property is not None:
                    obj["property"] = r.property
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    elif format == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow([r.ts, r.user, r.class_id, r.action, r.property or ""])
    else:
        raise ValueError(f"unsupported format {format!r}")


# -- validation ---------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    findings: list = field(default_factory=list)


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "findings": c.findings} for c in self.checks
            ],
        }


def validate_changelog(log, config=None, hierarchy=None, max_findings=100):
    """Run consistency checks over a ChangeLog and collect findings.

    Checks: ``monotone_timestamps``, ``property_consistency``,
    ``duplicate_ts_seq`` and, when a hierarchy is given, ``known_classes``.
    Never raises; problems are reported in the returned ValidationReport.
    """
    config = config or IngestConfig()
    records = log.records

    mono = CheckResult("monotone_timestamps", True)
    for prev, cur in zip(records, records[1:]):
        if (cur.ts, cur.seq) < (prev.ts, prev.seq):
            mono.passed = False
            if len(mono.findings) < max_findings:
                mono.findings.append(
                    {"seq": cur.seq, "reason": f"ts {cur.ts} precedes seq {prev.seq} at ts {prev.ts}"}
                )

    prop = CheckResult("property_consistency", True)
    for r in records:
        is_prop_action = r.action in config.property_actions
        if is_prop_action != (r.property is not None):
            prop.passed = False
            if len(prop.findings) < max_findings:
                reason = (
                    f"action '{r.action}' requires a property"
                    if is_prop_action
                    else f"action '{r.action}' must not carry property '{r.property}'"
                )
                prop.findings.append({"seq": r.seq, "reason": reason})

    dup = CheckResult("duplicate_ts_seq", True)
    seen = set()
    for r in records:
        key = (r.ts, r.seq)
        if key in seen:
            dup.passed = False
            if len(dup.findings) < max_findings:
                dup.findings.append({"seq": r.seq, "reason": f"duplicate (ts, seq) = {key}"})
        seen.add(key)

    checks = [mono, prop, dup]
    if hierarchy is not None:
        known = CheckResult("known_classes", True)
        for r in records:
            if r.class_id not in hierarchy:
                known.passed = False
                if len(known.findings) < max_findings:
                    known.findings.append({"seq": r.seq, "reason": f"unknown class '{r.class_id}'"})
        checks.append(known)
    return ValidationReport(checks)
