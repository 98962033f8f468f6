"""
Audience density
================

Grow the crowd from 100 to 1000 people.  The artist keeps producing one
cue every 25 s, so the number of messages per audience member falls while
the paths to the back rows get longer.
"""

import time

from crowddtn import RouterKind, ScenarioConfig, compute_report, run

KINDS = (RouterKind.PROPHETV2, RouterKind.SPRAY_FOCUS, RouterKind.SPRAY_WAIT)

print(f"{'router':>12} {'audience':>8} {'delivery':>9} {'msgs/person':>11} {'copies':>7} {'secs':>6}")
for kind in KINDS:
    for n in (100, 250, 500, 1000):
        start = time.perf_counter()
        r = compute_report(run(ScenarioConfig(audience_count=n, router_kind=kind)), n)
        took = time.perf_counter() - start
        print(
            f"{kind.value:>12} {n:>8} {r.delivery_probability:>9.3f} "
            f"{r.messages_per_destination:>11.3f} {r.copies_created:>7} {took:>6.1f}"
        )

# ``created`` comes from the generator and is identical across routers;
# ``copies_created`` also counts every replica written into a buffer.
