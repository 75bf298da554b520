"""Schema-versioned JSON reports and CSV export."""
from __future__ import annotations

import csv
import io
import json
from importlib import resources

import jsonschema
import numpy as np

from . import conventions

SCHEMA_VERSION = "1.0"
SIG_DIGITS = 10


def _clean(obj):
    """Plain JSON types; floats rounded to SIG_DIGITS significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return None
        return float(f"{v:.{SIG_DIGITS}g}")
    return obj


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def record(check: str, value, tolerance: float, passed=None, index=None, **extra) -> dict:
    """One check result; ``passed`` defaults to value < tolerance."""
    if passed is None and value is not None:
        passed = bool(value < tolerance)
    rec = {"check": check, "index": index, "value": value, "tolerance": tolerance, "passed": passed}
    rec.update(extra)
    return rec


def build_report(command: str, config: dict, records: list) -> dict:
    failed = [r for r in records if r.get("passed") is False]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "conventions": conventions.as_dict(),
        "records": records,
        "summary": {
            "passed": not failed,
            "n_records": len(records),
            "n_failed": len(failed),
            "failed_checks": sorted({r["check"] for r in failed}),
        },
    }
    report = _clean(report)
    jsonschema.validate(report, load_schema())
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(report))


def to_csv(rows: list) -> str:
    """CSV text of a list of flat dicts (list values joined with ';')."""
    if not rows:
        return ""
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ";".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
    return buf.getvalue()
