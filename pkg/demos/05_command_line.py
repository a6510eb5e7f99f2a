# %% [markdown]
# # Batch runs from a JSON config
#
# The `dyndet` command reads a versioned config and writes CSV/JSON tables.
# Coefficients may be decimal strings so the experiment definition is exact.

# %%
import json
import tempfile
from pathlib import Path

from dyndet.cli import main

config = {
    "schema_version": 1,
    "family": {"degree": 2, "sin": [[0], ["0", "0.079577471545947667884"]], "tau_domain": ["-0.1", "0.1"]},
    "observable": {"cos": [1]},
    "params": {"n_max": 12, "bins": 8192},
}
work = Path(tempfile.mkdtemp())
(work / "run.json").write_text(json.dumps(config))

for command in ("det-coeffs", "linear-response", "oracle-compare"):
    code = main([command, "--config", str(work / "run.json"), "--out", str(work / "out")])
    print(command, "exit code", code)

# %%
print((work / "out" / "oracle_compare.json").read_text())
print((work / "out" / "det_coeffs.csv").read_text())
