"""The command-line front end, driven from Python.

Equivalent shell commands:

    geospca synth --seed 7 --n 12 --p 16 --rank 3 --noise 0.05 -o data.csv
    geospca run data.csv --mode common -k 4 -a 2 -o report.json --trace trace.csv
    geospca run data.csv --mode bounds -k 4 -a 2
"""

import json
import tempfile
from pathlib import Path

from geospca.cli import main

with tempfile.TemporaryDirectory() as d:
    d = Path(d)
    main(["synth", "--seed", "7", "--n", "12", "--p", "16", "--rank", "3", "--noise", "0.05", "-o", str(d / "data.csv")])
    code = main(["run", str(d / "data.csv"), "--mode", "common", "-k", "4", "-a", "2",
                 "-o", str(d / "report.json"), "--trace", str(d / "trace.csv")])
    print("exit code", code)
    doc = json.loads((d / "report.json").read_text())
    print({k: doc[k] for k in ("support", "f_value", "certificate", "cuts", "gap_bound", "apriori_bound")})
    lines = (d / "trace.csv").read_text().splitlines()
    print(f"trace: {len(lines) - 1} rows, header {lines[0]!r}")

    # solver errors come back as a JSON object on stderr with a nonzero exit
    (d / "ragged.csv").write_text("1,2\n3\n")
    print("exit code on ragged input:", main(["run", str(d / "ragged.csv"), "-k", "1", "-a", "1"]))
