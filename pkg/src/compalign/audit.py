"""Audit trail for analysis runs.

Every stage of the staged search records the full ranked candidate set,
survivors and pruned alike, so pruning decisions can be replayed from
the files alone.  Output is one tab-separated file per stage plus a
JSON manifest.  Two identical runs produce byte-identical trails except
for the manifest's ``created_at`` field, which is the only place a
timestamp appears.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from . import __version__
from .engine import EngineParams

_STAGE_COLUMNS = (
    "stage",
    "survived",
    "score_bits",
    "index_hits",
    "index_misses",
    "workers",
    "serialization",
)


@dataclass(frozen=True)
class AuditRecord:
    run_id: str
    stage: int
    serialization: str
    score_bits: float
    survived: bool
    index_hits: int
    index_misses: int
    workers: int

    def row(self) -> str:
        return "\t".join(
            (
                str(self.stage),
                "1" if self.survived else "0",
                f"{self.score_bits:.9f}",
                str(self.index_hits),
                str(self.index_misses),
                str(self.workers),
                self.serialization.replace("\n", "\\n"),
            )
        )


def run_fingerprint(
    params: EngineParams, grammar_fp: str, new_fp: str
) -> str:
    """Deterministic run id from everything that shapes the search."""
    h = hashlib.sha256()
    for part in (repr(params), grammar_fp, new_fp, __version__):
        h.update(part.encode())
        h.update(b"\x00")
    return h.hexdigest()[:16]


@dataclass
class AuditTrail:
    """Collects stage records during one analysis, then writes them out.

    Satisfies the engine's StageObserver hook.  ``index`` may be the
    live match index whose counters are snapshotted per stage, and
    ``workers`` is carried into every record for later inspection.
    """

    run_id: str
    workers: int = 1
    index: object | None = None
    records: list[AuditRecord] = field(default_factory=list)
    stages: list[int] = field(default_factory=list)

    def record_stage(
        self, stage: int, entries: Sequence[tuple[float, str, bool]]
    ) -> None:
        hits = getattr(self.index, "hits", 0)
        misses = getattr(self.index, "misses", 0)
        batch = [
            AuditRecord(
                run_id=self.run_id,
                stage=stage,
                serialization=ser,
                score_bits=score,
                survived=survived,
                index_hits=hits,
                index_misses=misses,
                workers=self.workers,
            )
            for score, ser, survived in entries
        ]
        batch.sort(key=lambda r: (r.stage, r.serialization))
        self.records.extend(batch)
        self.stages.append(stage)

    def write(
        self,
        directory: str,
        params: EngineParams,
        inputs: dict[str, str],
    ) -> None:
        write_audit(self.records, directory, params=params, inputs=inputs)


def write_audit(
    records: Sequence[AuditRecord],
    directory: str,
    params: EngineParams | None = None,
    inputs: dict[str, str] | None = None,
) -> list[str]:
    """One TSV per stage plus manifest.json; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    by_stage: dict[int, list[AuditRecord]] = {}
    for rec in records:
        by_stage.setdefault(rec.stage, []).append(rec)

    written = []
    for stage in sorted(by_stage):
        rows = sorted(by_stage[stage], key=lambda r: (r.stage, r.serialization))
        path = os.path.join(directory, f"stage_{stage:03d}.tsv")
        with open(path, "w") as f:
            f.write("\t".join(_STAGE_COLUMNS) + "\n")
            for rec in rows:
                f.write(rec.row() + "\n")
        written.append(path)

    manifest = {
        "run_id": records[0].run_id if records else "",
        "stages": sorted(by_stage),
        "records": len(records),
        "params": repr(params) if params is not None else "",
        "inputs": inputs or {},
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    written.append(path)
    return written


def read_stage_file(path: str) -> list[dict[str, str]]:
    """Rows of one stage file as dicts keyed by the header names."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    header = lines[0].split("\t")
    return [dict(zip(header, ln.split("\t"))) for ln in lines[1:] if ln]
