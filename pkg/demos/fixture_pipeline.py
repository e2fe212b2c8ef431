"""
Running the whole pipeline on the bundled fixture
=================================================

Three synthetic countries go through ingest, inference, network statistics,
distances and maps.  Everything lands in a scratch directory.
"""

import sys
import tempfile
from pathlib import Path

from culturenet.cli import main
from culturenet.pipeline import copy_fixture

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="culturenet-"))
config = copy_fixture(work)
print("config written to", config)
print(config.read_text())

# %%
# Same thing as ``culturenet all --config <config>`` on the command line.
code = main(["all", "--config", str(config), "-v"])
print("exit code", code)

# %%
out = work / "out"
for name in ("netstats/netstats.csv", "distances/distances.csv", "map/network_map.csv"):
    print(f"--- {name}")
    print((out / name).read_text())

# %%
# A second run finds every artifact current and does no work.
main(["all", "--config", str(config), "-v"])
