"""
Settings files and the command line
===================================

Every knob lives in a flat ``key = value`` file.  The same file drives a
single run or a sweep, either from Python or via ``python -m crowddtn``.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from crowddtn.settings import parse_settings, serialize_settings

root = Path(__file__).resolve().parents[1]
baseline = root / "settings" / "baseline.txt"

# The shipped baseline file parses to the default configuration.
cfg = parse_settings(baseline.read_text())
print(serialize_settings(cfg))

# Bad values are reported with their key and line.
try:
    parse_settings("router.kind = SPRAY_FOCUS\nscenario.message_ttl = 0\n")
except ValueError as exc:
    print("rejected:", exc)

# A single run prints one CSV row; a sweep writes results.csv plus a
# metadata.json holding every resolved configuration.
work = Path(tempfile.mkdtemp(prefix="crowddtn-"))
short = work / "short.txt"
short.write_text(baseline.read_text().replace("scenario.sim_duration = 2h", "scenario.sim_duration = 30min"))
cmd = [sys.executable, "-m", "crowddtn"]
print(subprocess.run(cmd + ["run", str(short), "--trace", str(work / "trace.txt")],
                     capture_output=True, text=True).stdout)
subprocess.run(cmd + ["sweep", str(short), "--axis", "scenario.audience_count",
                      "--values", "100,250", "--seeds", "0,1", "--out", str(work / "sweep")], check=True)
print((work / "sweep" / "results.csv").read_text())
print("first trace lines:")
print("".join((work / "trace.txt").read_text().splitlines(keepends=True)[:5]))
