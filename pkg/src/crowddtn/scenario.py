"""Scenario configuration, crowd placement and the static contact graph.

The venue is modelled as one stationary artist (node 0) in front of a
rectangular audience block (nodes 1..N).  Nobody moves, so the contact
graph built here is valid for the whole run.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

logger = logging.getLogger(__name__)

Coord = tuple[float, float]


class RouterKind(str, enum.Enum):
    PROPHET = "PROPHET"
    PROPHETV2 = "PROPHETV2"
    SPRAY_WAIT = "SPRAY_WAIT"
    SPRAY_FOCUS = "SPRAY_FOCUS"

    @property
    def is_prophet(self) -> bool:
        return self in (RouterKind.PROPHET, RouterKind.PROPHETV2)

    @property
    def is_spray(self) -> bool:
        return not self.is_prophet


class NodeKind(str, enum.Enum):
    ARTIST = "ARTIST"
    AUDIENCE = "AUDIENCE"


class NodeId(NamedTuple):
    index: int
    kind: NodeKind


class ConfigError(ValueError):
    """Raised for a scenario or router configuration that cannot be run."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.detail = message


@dataclass(frozen=True)
class RouterParams:
    p_init: float = 0.75
    p_enc_max: float = 0.5
    i_typ: float = 1800.0
    beta: float = 0.9
    gamma: float = 0.9998
    aging_interval: float = 50.0
    copies_l: int = 50
    focus_threshold: float = 0.0
    # subtracted from a peer's last-encounter time when it is inherited
    timer_offset: float = 0.0

    def validate(self) -> None:
        for name in ("p_init", "p_enc_max", "beta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"router.{name}", f"must lie in [0, 1], got {value}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("router.gamma", f"must lie in (0, 1], got {self.gamma}")
        if not self.i_typ > 0:
            raise ConfigError("router.i_typ", f"must be positive, got {self.i_typ}")
        if not self.aging_interval > 0:
            raise ConfigError(
                "router.aging_interval", f"must be positive, got {self.aging_interval}"
            )
        if int(self.copies_l) != self.copies_l or self.copies_l < 1:
            raise ConfigError("router.copies_l", f"must be an integer >= 1, got {self.copies_l}")
        if not self.focus_threshold >= 0:
            raise ConfigError(
                "router.focus_threshold", f"must be >= 0, got {self.focus_threshold}"
            )
        if not self.timer_offset >= 0:
            raise ConfigError("router.timer_offset", f"must be >= 0, got {self.timer_offset}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of one simulation run.

    Defaults are the baseline music-event setup: 100 audience members on a
    10 m grid, Bluetooth-like 10 m / 250 kB/s links, 1 kB cues, 1 MB
    buffers, 10 minute TTL and a two hour event.  ``artist_position=None``
    puts the artist one grid step in front of the middle of the first row.
    """

    audience_count: int = 100
    artist_position: Optional[Coord] = None
    grid_origin: Coord = (0.0, 0.0)
    grid_spacing: float = 10.0
    radio_range: float = 10.0
    link_bandwidth: float = 250_000.0
    message_size: int = 1_000
    buffer_capacity: int = 1_000_000
    message_ttl: float = 600.0
    sim_duration: float = 7200.0
    step_size: float = 1.0
    generation_interval: float = 25.0
    rng_seed: int = 0
    router_kind: RouterKind = RouterKind.PROPHETV2
    router_params: RouterParams = field(default_factory=RouterParams)

    def __post_init__(self) -> None:
        if not isinstance(self.router_kind, RouterKind):
            object.__setattr__(self, "router_kind", RouterKind(self.router_kind))

    def validate(self) -> "ScenarioConfig":
        if int(self.audience_count) != self.audience_count or self.audience_count < 1:
            raise ConfigError(
                "scenario.audience_count", f"must be an integer >= 1, got {self.audience_count}"
            )
        positive = {
            "scenario.grid_spacing": self.grid_spacing,
            "scenario.radio_range": self.radio_range,
            "scenario.link_bandwidth": self.link_bandwidth,
            "scenario.message_size": self.message_size,
            "scenario.buffer_capacity": self.buffer_capacity,
            "scenario.message_ttl": self.message_ttl,
            "scenario.sim_duration": self.sim_duration,
            "engine.step_size": self.step_size,
            "engine.generation_interval": self.generation_interval,
        }
        for key, value in positive.items():
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(key, f"must be a positive finite number, got {value}")
        if self.message_size > self.buffer_capacity:
            raise ConfigError(
                "scenario.message_size",
                f"{self.message_size} bytes does not fit a {self.buffer_capacity} byte buffer",
            )
        if self.step_size > self.message_ttl:
            raise ConfigError(
                "engine.step_size",
                f"step {self.step_size} s exceeds the message TTL {self.message_ttl} s",
            )
        self.router_params.validate()
        return self

    @property
    def node_count(self) -> int:
        return self.audience_count + 1


def grid_shape(audience_count: int) -> tuple[int, int]:
    """Most-square (rows, cols) lattice holding ``audience_count`` people."""
    rows = round(math.sqrt(audience_count))
    cols = math.ceil(audience_count / rows)
    return rows, cols


def grid_positions(audience_count: int, spacing: float, origin: Coord = (0.0, 0.0)) -> list[Coord]:
    """Lay the audience out row-major on a lattice; the last row may be partial."""
    if audience_count < 1:
        raise ValueError("audience_count must be >= 1")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    _, cols = grid_shape(audience_count)
    ox, oy = origin
    out = []
    for k in range(audience_count):
        row, col = divmod(k, cols)
        out.append((ox + col * spacing, oy + row * spacing))
    return out


def default_artist_position(audience_count: int, spacing: float, origin: Coord) -> Coord:
    _, cols = grid_shape(audience_count)
    return (origin[0] + (cols // 2) * spacing, origin[1] - spacing)


@dataclass(frozen=True)
class ContactGraph:
    positions: tuple[Coord, ...]
    adjacency: tuple[tuple[int, ...], ...]
    radio_range: float

    def __len__(self) -> int:
        return len(self.positions)

    def neighbours(self, node: int) -> tuple[int, ...]:
        return self.adjacency[node]

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as (a, b) with a < b, in ascending order."""
        return [(a, b) for a, nbrs in enumerate(self.adjacency) for b in nbrs if a < b]

    def hop_distances(self, source: int) -> list[Optional[int]]:
        """BFS hop count from ``source``; None for unreachable nodes."""
        dist: list[Optional[int]] = [None] * len(self.positions)
        dist[source] = 0
        frontier = [source]
        while frontier:
            nxt = []
            for a in frontier:
                for b in self.adjacency[a]:
                    if dist[b] is None:
                        dist[b] = dist[a] + 1
                        nxt.append(b)
            frontier = nxt
        return dist


def build_contact_graph(positions: list[Coord], radio_range: float) -> ContactGraph:
    """Connect every pair of nodes at most ``radio_range`` metres apart.

    Uses a uniform bucket grid so a 1000 node crowd only compares nearby
    pairs.  Cells are a hair wider than the range: a pair exactly
    ``radio_range`` apart can otherwise round into cells two apart.
    """
    if not positions:
        raise ValueError("positions must be non-empty")
    if not radio_range > 0:
        raise ValueError("radio_range must be positive")
    cell = radio_range * (1.0 + 1e-9)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, (x, y) in enumerate(positions):
        buckets.setdefault((math.floor(x / cell), math.floor(y / cell)), []).append(i)

    adjacency: list[list[int]] = [[] for _ in positions]
    for (cx, cy), members in buckets.items():
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                others = buckets.get((cx + dx, cy + dy))
                if not others:
                    continue
                for i in members:
                    xi, yi = positions[i]
                    for j in others:
                        if j <= i:
                            continue
                        xj, yj = positions[j]
                        if math.hypot(xi - xj, yi - yj) <= radio_range:
                            adjacency[i].append(j)
                            adjacency[j].append(i)
    return ContactGraph(
        positions=tuple((float(x), float(y)) for x, y in positions),
        adjacency=tuple(tuple(sorted(a)) for a in adjacency),
        radio_range=float(radio_range),
    )


@dataclass(frozen=True)
class Placement:
    graph: ContactGraph
    nodes: tuple[NodeId, ...]
    warnings: tuple[str, ...] = ()

    @property
    def artist(self) -> int:
        return 0

    @property
    def audience(self) -> range:
        return range(1, len(self.nodes))


def place_scenario(config: ScenarioConfig) -> Placement:
    """Position artist + audience and build their contact graph."""
    audience = grid_positions(config.audience_count, config.grid_spacing, config.grid_origin)
    artist = config.artist_position
    if artist is None:
        artist = default_artist_position(
            config.audience_count, config.grid_spacing, config.grid_origin
        )
    graph = build_contact_graph([tuple(artist)] + audience, config.radio_range)
    nodes = (NodeId(0, NodeKind.ARTIST),) + tuple(
        NodeId(i, NodeKind.AUDIENCE) for i in range(1, len(audience) + 1)
    )
    warnings = []
    if not graph.adjacency[0]:
        msg = (
            f"artist at {tuple(artist)} has no audience node within "
            f"{config.radio_range} m; no message can leave the source"
        )
        logger.warning(msg)
        warnings.append(msg)
    return Placement(graph=graph, nodes=nodes, warnings=tuple(warnings))
