"""
Router parameters and buffer pressure
=====================================

Sweep the number of spray copies L, the PRoPHET aging interval, and the
buffer size, using the same sweep machinery as the command line.
"""

import tempfile

from crowddtn import RouterKind, ScenarioConfig
from crowddtn.cli import run_sweep
from crowddtn.settings import SweepSpec

out = tempfile.mkdtemp(prefix="crowddtn-")


def show(rows, column):
    by_value = {}
    for row in rows:
        by_value.setdefault(row["sweep_value"], []).append(float(row["delivery_probability"]))
    for value, dps in by_value.items():
        print(f"  {column}={value:>8}  mean delivery {sum(dps) / len(dps):.3f}")


# More copies help Spray & Wait, which can only hand a message over once
# it sits next to the destination.
for kind in (RouterKind.SPRAY_WAIT, RouterKind.SPRAY_FOCUS):
    print(kind.value)
    spec = SweepSpec("router.copies_l", ("10", "25", "50", "100"), (0, 1, 2), f"{out}/{kind.value}")
    show(run_sweep(ScenarioConfig(router_kind=kind), spec, jobs=2), "L")

# The aging interval also sets how often contacts refresh; PRoPHETv2
# barely notices.
print("PROPHETV2")
spec = SweepSpec("router.aging_interval", ("10", "25", "50", "100"), (0, 1, 2), f"{out}/interval")
show(run_sweep(ScenarioConfig(router_kind=RouterKind.PROPHETV2), spec, jobs=2), "interval")

# Congestion: once a buffer holds fewer cues than the artist makes within
# one lifetime, sources drop messages and delivery falls.
print("buffer")
spec = SweepSpec("scenario.buffer_capacity", ("5kB", "10kB", "20kB", "1MB"), (0,), f"{out}/buffer")
show(run_sweep(ScenarioConfig(), spec), "bytes")
print("results and metadata written under", out)
