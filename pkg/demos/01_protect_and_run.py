# Protecting a small two-file project and running it through the router.
#
# Run from the repository root:  python3 demos/01_protect_and_run.py

import tempfile
from pathlib import Path

from routeguard.cli import run_protected
from routeguard.cryptobox import seeded_source
from routeguard.manifest import load_manifest
from routeguard.minilang import run
from routeguard.protector import emit_config, load_protected, protect

ROOT = Path(__file__).resolve().parent.parent

# The fib fixture has two files. main.ml calls Util.fib(10) in util.ml.

manifest = load_manifest(ROOT / "fixtures" / "fib" / "manifest.toml")
program = manifest.program()
for sf in program.files:
    print(f"--- {sf.path}")
    print(sf.text)

# Running it unprotected gives the reference output.

print("plain run:", run(program, None).output)

# protect() rewrites every selected cross-file call into forward_call with a
# sealed descriptor. The seed fixes the nonces and IVs so this demo prints the
# same bytes every time. Leave it out for a real release.

result = protect(program, manifest.selects, seeded_source(1))
print("descriptors sealed:", result.descriptor_count)
print("--- protected main.ml")
print(next(sf for sf in result.files if sf.file_id == "main").text)

# The router config stores hashes and nonces. It holds no keys: each key
# comes back only when the deployed files hash to the expected values.

print(emit_config(result.config))

# Write the project to disk, load it back, and run it the same way
# `routeguard run DIR` would.

with tempfile.TemporaryDirectory() as tmp:
    result.write(tmp)
    config, files = load_protected(tmp)
    outcome = run_protected(config, files)
    print("protected run:", outcome.exit_code, outcome.stdout)
