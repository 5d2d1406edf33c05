"""Walkthrough: the event log is the mission.

Run a scenario, write its JSONL log, re-run it, and show the two logs
are byte-identical; then flip one byte and show verification catches it.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from hotl.engine import run_headless
from hotl.events import read_log, write_log
from hotl.replay import verify
from hotl.scenario import load_shipped, load_transcript, shipped_transcript_path


def main() -> None:
    name = "s4_dedup"
    spec = load_shipped(name)
    transcript = load_transcript(shipped_transcript_path(name))
    mission = run_headless(spec, transcript)

    with tempfile.TemporaryDirectory() as tmp:
        log_path = Path(tmp) / f"{name}.jsonl"
        write_log(mission.log, log_path)
        print(f"wrote {len(mission.log)} events to {log_path.name}")

        ok, problems = verify(spec, read_log(log_path))
        print(f"genuine log verifies: {ok}")
        assert ok, problems

        lines = log_path.read_text().splitlines()
        doc = json.loads(lines[4])
        doc["payload"]["forged"] = True
        lines[4] = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        log_path.write_text("\n".join(lines) + "\n")
        ok, problems = verify(spec, read_log(log_path))
        print(f"tampered log verifies: {ok}")
        for p in problems[:2]:
            print(f"  {p}")
        assert not ok


if __name__ == "__main__":
    main()
