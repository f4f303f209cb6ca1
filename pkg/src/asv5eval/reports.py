"""Deterministic JSON/CSV report writers and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "asv5eval"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def input_record(paths: dict) -> dict:
    """{role: {"path", "sha256"}} for the input files of a run."""
    return {role: {"path": str(p), "sha256": sha256_file(p)} for role, p in sorted(paths.items())}


def header(command: str, config: dict, inputs: dict) -> dict:
    """Provenance block embedded in every report (no timestamps)."""
    return {"tool": TOOL, "version": __version__, "command": command,
            "config": config, "inputs": inputs}


def write_manifest(outdir, command: str, config: dict, inputs: dict, outputs) -> Path:
    """manifest.json: config, input and output checksums, version, timestamp."""
    outdir = Path(outdir)
    manifest = header(command, config, inputs)
    manifest["outputs"] = {Path(p).name: sha256_file(p) for p in sorted(map(str, outputs))}
    manifest["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return write_json(outdir / "manifest.json", manifest)


def format_table(header_row, rows) -> str:
    """Plain aligned text table."""
    cells = [[str(h) for h in header_row]]
    for row in rows:
        cells.append([f"{v:.6f}" if isinstance(v, float) else str(v) for v in row])
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
