"""
How delivery predictabilities evolve
====================================

PRoPHET-style routers keep, per node, a probability of reaching every
other node.  Contacts raise it, transitivity spreads it and aging decays
it.  This script follows those numbers on a 3 x 3 crowd.
"""

import dataclasses

import numpy as np

from crowddtn import RouterKind, RouterParams, ScenarioConfig, Simulation
from crowddtn.routing import NodeState, on_contact

np.set_printoptions(precision=4, suppress=True, linewidth=120)

# A single pair meeting twice, one second apart.  The encounter-aware
# variant barely moves on the second meeting; the classic one jumps.
params = RouterParams()
for kind in (RouterKind.PROPHETV2, RouterKind.PROPHET):
    a, b = on_contact(NodeState(0), NodeState(1), 0.0, kind, params)
    first = a.preds[1].p
    a, b = on_contact(a, b, 1.0, kind, params)
    print(f"{kind.value:>9}: first contact {first:.6f}, second {a.preds[1].p:.6f}")

# Now a whole crowd.  Every contact fires once per aging interval, so the
# predictability of reaching the back corner grows one hop per epoch.
cfg = ScenarioConfig(audience_count=9, sim_duration=600, generation_interval=10**6)
for kind in (RouterKind.PROPHETV2, RouterKind.PROPHET):
    sim = Simulation(dataclasses.replace(cfg, router_kind=kind))
    print(f"\n{kind.value}: P(node -> 9) on the grid, every 50 s")
    for t in (0, 50, 100, 150, 200, 550):
        while sim.tick_index <= t:
            sim.tick()
        row = np.array([sim.router.predictability(i, 9, t) if i != 9 else 1.0 for i in range(10)])
        print(f"t={t:>3}  artist {row[0]:.4f}  grid", row[1:].reshape(3, 3).ravel())

# The classic additive rule keeps stacking transitive boosts, so nodes
# with many well-connected neighbours end up ranked above the
# destination's own neighbours.  The encounter-aware max() rule keeps
# the gradient pointing at the destination.
