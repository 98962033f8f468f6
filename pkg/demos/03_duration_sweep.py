"""
Event duration
==============

Run the baseline crowd for one to five hours and compare delivery,
overhead and latency between the encounter-aware PRoPHET router and
Spray & Focus.  Each point is the median over a few seeds.
"""

import statistics

from crowddtn import RouterKind, ScenarioConfig, compute_report, run

SEEDS = range(3)
HOURS = (1, 2, 3, 4, 5)


def summarise(kind, hours):
    reports = [
        compute_report(run(ScenarioConfig(sim_duration=3600 * hours, router_kind=kind, rng_seed=s)), 100)
        for s in SEEDS
    ]
    dp = statistics.median(r.delivery_probability for r in reports)
    overhead = statistics.median(r.overhead_ratio for r in reports if r.overhead_ratio is not None)
    latency = statistics.median(r.latency_avg for r in reports if r.latency_avg is not None)
    return dp, overhead, latency


print(f"{'router':>12} {'hours':>5} {'delivery':>9} {'overhead':>9} {'latency s':>9}")
for kind in (RouterKind.PROPHETV2, RouterKind.SPRAY_FOCUS):
    for h in HOURS:
        dp, overhead, latency = summarise(kind, h)
        print(f"{kind.value:>12} {h:>5} {dp:>9.3f} {overhead:>9.2f} {latency:>9.1f}")

# With a 1 MB buffer, 1 kB cues every 25 s and a ten minute lifetime no
# buffer ever fills, so duration alone does not erode delivery here.
# Shrinking the buffer brings congestion back; see 05_parameter_sweep.py.
