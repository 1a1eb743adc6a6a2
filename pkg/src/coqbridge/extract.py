"""Dataset extraction: run the proof navigator over a workspace and emit
premise-annotated proof records as JSON, one document per source file.

Output is deterministic given identical server responses: fixed key
order, UTF-8, newline-terminated, so golden-file comparisons are
byte-exact. Files whose content has Coq errors are recorded in the
summary and skipped; per-file failures never abort the run.
"""

from __future__ import annotations

import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .config import CoqConfig
from .errors import CoqBridgeError
from .proofs import ProofDocument

SCHEMA_PROOFS = "coqbridge/proofs/1"
SCHEMA_SUMMARY = "coqbridge/summary/1"


class FileTimeout(CoqBridgeError):
    pass


@dataclass
class ExtractOptions:
    globs: list = field(default_factory=lambda: ["**/*.v"])
    timeout: float = 300.0
    jobs: int = 1
    config: CoqConfig = field(default_factory=CoqConfig)
    mock_dir: Optional[Path] = None


def fixture_name(rel_path: str) -> str:
    """Stable mock-fixture filename for a workspace-relative source path."""
    return rel_path.replace("/", "__") + ".fixture.json"


def dataset_name(rel_path: str) -> str:
    return rel_path.replace("/", "__") + ".json"


def proof_record(document: ProofDocument, rel_path: str) -> dict:
    proofs = []
    for proof in document.proofs:
        steps = []
        for step in proof.steps:
            steps.append({
                "text": step.step.text,
                "ast": step.step.ast,
                "context": [t.name for t in step.context],
                "goals": step.goals.as_dict(),
            })
        proofs.append({
            "name": proof.term.name,
            "type": proof.term.type.value,
            "module_path": list(proof.term.module_path),
            "statement": proof.statement,
            "status": proof.status.value,
            "statement_context": [t.name for t in proof.statement_context],
            "steps": steps,
        })
    return {"schema": SCHEMA_PROOFS, "file": rel_path, "proofs": proofs}


def dump_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, indent=2) + "\n"


def _file_config(options: ExtractOptions, workspace: Path, rel_path: str) -> CoqConfig:
    config = options.config.with_workspace(workspace)
    if options.mock_dir is not None:
        fixture = Path(options.mock_dir) / fixture_name(rel_path)
        config = replace(config, server_command=[
            sys.executable, "-m", "coqbridge.mock", "replay", str(fixture)])
    return config


def extract_file(workspace: Path, rel_path: str, options: ExtractOptions) -> dict:
    """Extract one file; returns its summary entry (plus the record)."""
    entry = {"file": rel_path, "status": "ok", "proofs": 0, "steps": 0,
             "load_seconds": None, "exec_seconds": None}
    config = _file_config(options, workspace, rel_path)
    deadline = time.monotonic() + options.timeout
    started = time.monotonic()
    try:
        document = ProofDocument(workspace / rel_path, config)
    except CoqBridgeError as exc:
        entry["status"] = "failed"
        entry["error"] = str(exc)
        return entry
    try:
        entry["load_seconds"] = round(time.monotonic() - started, 6)
        if not document.is_valid:
            entry["status"] = "coq-errors"
            entry["error"] = document.errors()[0].message
            return entry
        exec_started = time.monotonic()
        document.exec(len(document.steps))
        for proof in document.proofs:
            for step in proof.steps:
                step.goals  # force and memoize
                if time.monotonic() > deadline:
                    raise FileTimeout(f"{rel_path}: budget exceeded")
        entry["exec_seconds"] = round(time.monotonic() - exec_started, 6)
        entry["proofs"] = len(document.proofs)
        entry["steps"] = sum(len(p.steps) for p in document.proofs)
        entry["record"] = proof_record(document, rel_path)
    except FileTimeout as exc:
        entry["status"] = "timeout"
        entry["error"] = str(exc)
    except CoqBridgeError as exc:
        entry["status"] = "failed"
        entry["error"] = str(exc)
    finally:
        document.close()
    return entry


def extract_workspace(workspace: Path, output_dir: Path,
                      options: Optional[ExtractOptions] = None) -> dict:
    """Extract every matching file; returns and writes the summary."""
    workspace = Path(workspace)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    options = options or ExtractOptions()
    rel_paths = sorted({
        p.relative_to(workspace).as_posix()
        for glob in options.globs
        for p in workspace.glob(glob)
        if p.is_file()
    })
    entries = {}
    def run(rel):
        return rel, extract_file(workspace, rel, options)
    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            for rel, entry in pool.map(run, rel_paths):
                entries[rel] = entry
    else:
        for rel in rel_paths:
            entries[rel] = run(rel)[1]
    files = []
    totals = {"processed": 0, "coq_errors": 0, "timeouts": 0, "failed": 0}
    for rel in rel_paths:  # deterministic merge by path order
        entry = entries[rel]
        record = entry.pop("record", None)
        if record is not None:
            (output_dir / dataset_name(rel)).write_text(
                dump_record(record), encoding="utf-8")
        files.append(entry)
        key = {"ok": "processed", "coq-errors": "coq_errors",
               "timeout": "timeouts", "failed": "failed"}[entry["status"]]
        totals[key] += 1
    summary = {"schema": SCHEMA_SUMMARY, "files": files, "totals": totals}
    (output_dir / "summary.json").write_text(
        json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    return summary


# --- stats --------------------------------------------------------------


def _moments(values: list) -> dict:
    if not values:
        return {"mean": 0.0, "variance": 0.0, "median": 0.0}
    return {
        "mean": round(statistics.fmean(values), 6),
        "variance": round(statistics.pvariance(values), 6) if len(values) > 1 else 0.0,
        "median": round(statistics.median(values), 6),
    }


def dataset_stats(dataset_dir: Path) -> dict:
    """Per-file and aggregate counts plus timing moments for a dataset."""
    dataset_dir = Path(dataset_dir)
    summary_path = dataset_dir / "summary.json"
    if not summary_path.is_file():
        raise CoqBridgeError(f"no summary.json in {dataset_dir}")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    if summary.get("schema") != SCHEMA_SUMMARY:
        raise CoqBridgeError(f"unexpected summary schema {summary.get('schema')!r}")
    rows = []
    for entry in summary.get("files", []):
        rows.append({
            "file": entry["file"],
            "status": entry["status"],
            "proofs": entry.get("proofs", 0),
            "steps": entry.get("steps", 0),
            "load_seconds": entry.get("load_seconds"),
            "exec_seconds": entry.get("exec_seconds"),
        })
    processed = [r for r in rows if r["status"] == "ok"]
    return {
        "files": rows,
        "aggregate": {
            "proofs": _moments([r["proofs"] for r in processed]),
            "steps": _moments([r["steps"] for r in processed]),
            "load_seconds": _moments(
                [r["load_seconds"] for r in processed if r["load_seconds"] is not None]),
            "exec_seconds": _moments(
                [r["exec_seconds"] for r in processed if r["exec_seconds"] is not None]),
        },
        "totals": summary["totals"],
    }


def format_stats(report: dict) -> str:
    lines = []
    header = f"{'file':<40} {'status':<11} {'proofs':>6} {'steps':>6} {'load(s)':>9} {'exec(s)':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for row in report["files"]:
        load = f"{row['load_seconds']:.3f}" if row["load_seconds"] is not None else "-"
        execs = f"{row['exec_seconds']:.3f}" if row["exec_seconds"] is not None else "-"
        lines.append(f"{row['file']:<40} {row['status']:<11} "
                     f"{row['proofs']:>6} {row['steps']:>6} {load:>9} {execs:>9}")
    lines.append("")
    for metric in ("proofs", "steps", "load_seconds", "exec_seconds"):
        m = report["aggregate"][metric]
        lines.append(f"{metric:<14} mean {m['mean']} (variance {m['variance']}) "
                     f"median {m['median']}")
    totals = report["totals"]
    lines.append(f"processed {totals['processed']}, coq-errors {totals['coq_errors']}, "
                 f"timeouts {totals['timeouts']}, failed {totals['failed']}")
    return "\n".join(lines)
