"""Deterministic JSON/CSV emission for experiment reports.

All machine-readable summaries carry a top-level schema number and are
serialized with sorted keys so identical configurations produce
byte-identical files.  Wall-clock timings never enter these files; they
go to the log stream instead.
"""

from __future__ import annotations

import json
import os
from typing import Iterable

SCHEMA_VERSION = 1


def payload(kind: str, config: dict | None, body: dict) -> dict:
    out = {"schema": SCHEMA_VERSION, "kind": kind}
    if config is not None:
        out["config"] = config
    out.update(body)
    return out


def write_json(path: str, obj: dict) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return path


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path: str, header: Iterable[str], rows: Iterable[Iterable]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")
    return path


def _cell(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def merge_reports(paths: Iterable[str]) -> dict:
    """Combine JSON summaries into one document, keyed by kind."""
    merged: dict = {"schema": SCHEMA_VERSION, "kind": "merged", "reports": []}
    for path in paths:
        doc = read_json(path)
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported schema {doc.get('schema')!r}")
        merged["reports"].append({"source": os.path.basename(path), "report": doc})
    merged["reports"].sort(key=lambda e: e["source"])
    return merged
