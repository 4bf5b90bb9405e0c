#!/usr/bin/env python3
"""Recompute the end-to-end regression fixture value.

Runs `pipeline --seed 7 --scenes 50` into a temp directory and prints the
mean IoU that tests/test_acceptance.py freezes as
PIPELINE_MEAN_IOU_FIXTURE. Use this after any intentional change to the
generator, tracer, encoder or reconstructor, then update the constant and
note the change.
"""

import json
import sys
import tempfile
from pathlib import Path

from rfmap.cli import main as cli_main


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        rc = cli_main(["pipeline", "--seed", "7", "--scenes", "50", "--out", tmp])
        if rc != 0:
            return rc
        report = json.loads((Path(tmp) / "eval.json").read_text())
    print(f"mean IoU fixture: {report['mean']['iou']!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
