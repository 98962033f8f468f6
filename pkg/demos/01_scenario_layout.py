"""
Placing a crowd and its contact graph
=====================================

The venue is one artist in front of a rectangular block of stationary
audience members.  Two people can talk when they stand within radio range,
and since nobody moves the contact graph is fixed for the whole event.
"""

import numpy as np

from crowddtn import ScenarioConfig, place_scenario
from crowddtn.scenario import grid_shape

# The baseline crowd: 100 people on a 10 m grid, 10 m radio range.
cfg = ScenarioConfig()
placement = place_scenario(cfg)
graph = placement.graph
print("grid shape for 100 people:", grid_shape(100))
print("artist at", graph.positions[0], "talks to", graph.neighbours(0))

# Range is boundary-inclusive, so only the four lattice neighbours are
# reachable (diagonals are 14.1 m away).
degrees = np.array([len(a) for a in graph.adjacency[1:]])
print("audience degree histogram:", np.bincount(degrees))

# Hop distance from the artist is the lower bound on any delivery latency
# when each hop takes one tick.
hops = np.array(graph.hop_distances(0)[1:]).reshape(grid_shape(100))
print("hops from the artist, front row first:")
print(hops)

# Larger crowds keep the grid as square as possible.
for n in (250, 500, 1000):
    print(f"{n:>5} people -> rows x cols = {grid_shape(n)}")

# An artist placed off the lattice can end up with nobody in range; the
# placement then carries a warning and no message will ever leave.
lonely = place_scenario(ScenarioConfig(artist_position=(45, -10)))
print("off-lattice artist neighbours:", lonely.graph.neighbours(0))
print("warning:", lonely.warnings[0])
