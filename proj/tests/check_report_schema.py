"""Runs the CLI over a few configurations and validates each report.json."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_path = sys.argv[1], sys.argv[2]
schema = json.loads(pathlib.Path(schema_path).read_text())
jsonschema.Draft7Validator.check_schema(schema)

runs = [
    ["--rounds", "3000", "--seed", "1"],
    ["--rounds", "3000", "--seed", "2", "--protocol", "TLSQSC", "--message", "text:hi"],
    ["--rounds", "3000", "--seed", "3", "--eve", "bob1:fwd:comp"],
    ["--rounds", "3000", "--seed", "4", "--protocol", "TLSQSC", "--message", "0121",
     "--eve", "bob2:both:fourier"],
    ["--rounds", "3000", "--seed", "5", "--loss", "0.2", "--depol", "bob2:both:0.1",
     "--threshold", "0.5"],
    ["--rounds", "3", "--seed", "6"],
]

for args in runs:
    with tempfile.TemporaryDirectory() as out:
        proc = subprocess.run([cli, "run", *args, "--out-dir", out], capture_output=True, text=True)
        if proc.returncode not in (0, 2):
            sys.exit(f"{args}: exit {proc.returncode}: {proc.stderr}")
        doc = json.loads((pathlib.Path(out) / "report.json").read_text())
        jsonschema.validate(doc, schema)
        if doc != json.loads(proc.stdout):
            sys.exit(f"{args}: stdout and report.json differ")
        print(f"ok {' '.join(args)} (exit {proc.returncode})")
