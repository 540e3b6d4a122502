#!/usr/bin/env python3
"""Regenerate the committed golden snapshot digest.

Runs the pipeline over the bundled synthetic cohort with the canonical
acceptance configuration (tests/golden/config.json) into a temp directory
and writes the resulting snapshot id to tests/golden/snapshot_digest.txt.
Only rerun this after an intentional change to pipeline semantics.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import replace
from pathlib import Path

from groupscope.service.config import config_from_doc
from groupscope.service.pipeline import run_pipeline

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"
COHORT = ROOT / "tests" / "fixtures" / "cohort"


def main() -> None:
    tmp = Path(tempfile.mkdtemp(prefix="groupscope-golden-"))
    doc = json.loads((GOLDEN / "config.json").read_text())
    config = replace(
        config_from_doc(doc, base_dir=tmp),
        cache_dir=str(tmp / "cache"),
        snapshot_dir=str(tmp / "snapshots"),
    )
    run = run_pipeline(COHORT, config)
    out = GOLDEN / "snapshot_digest.txt"
    out.write_text(run.snapshot_id + "\n")
    print(f"{run.snapshot_id}  -> {out}")


if __name__ == "__main__":
    main()
