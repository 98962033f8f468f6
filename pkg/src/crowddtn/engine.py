"""Time-stepped store-carry-forward simulation.

Each tick runs five phases in a fixed order:

1. the artist creates any messages due at this time,
2. copies older than their TTL are dropped everywhere,
3. in-flight transfers advance and complete,
4. contacts fire (on encounter epochs) and routers pick new transfers,
   scanning senders and their neighbours in ascending node id order,
5. the clock advances.

A node sends at most one message and receives at most one message at a
time.  Everything random comes from one seeded ``random.Random``; a run is
a pure function of its config.
"""

from __future__ import annotations

import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .metrics import EventKind, EventLog
from .routing import Action, ForwardDirective, make_router
from .scenario import ScenarioConfig, place_scenario

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True)
class Message:
    id: int
    source: int
    destination: int
    size: int
    created_at: float
    ttl: float

    def expired(self, now: float) -> bool:
        return now - self.created_at > self.ttl


@dataclass
class Buffer:
    capacity: int
    used: int = 0
    # message id -> (size, enqueued_at), in arrival order
    resident: dict = field(default_factory=dict)

    @property
    def free(self) -> int:
        return self.capacity - self.used

    def __contains__(self, message_id: int) -> bool:
        return message_id in self.resident

    def __len__(self) -> int:
        return len(self.resident)

    def remove(self, message_id: int) -> None:
        size, _ = self.resident.pop(message_id)
        self.used -= size


def try_enqueue(buffer: Buffer, message: Message, now: float = 0.0) -> bool:
    """Admit ``message`` if it fits in the free space; never evicts."""
    if message.id in buffer.resident:
        raise ValueError(f"message {message.id} already resident")
    if buffer.free < message.size:
        return False
    buffer.resident[message.id] = (message.size, now)
    buffer.used += message.size
    assert buffer.used <= buffer.capacity
    return True


@dataclass
class Transfer:
    message_id: int
    sender: int
    receiver: int
    bytes_remaining: float
    # None for a direct delivery to the destination
    directive: Optional[ForwardDirective]


def tick_count(sim_duration: float, step: float) -> int:
    return math.ceil(sim_duration / step - _EPS)


class Simulation:
    """One run of a scenario; drive it with :meth:`run` or :meth:`tick`.

    ``observer(sim, now)`` is called at the end of every tick.  With
    ``exhaustive_scan`` every node is scanned every tick instead of only
    nodes whose situation changed; both give identical logs.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        *,
        observer: Optional[Callable[["Simulation", float], None]] = None,
        exhaustive_scan: bool = False,
    ):
        self.config = config.validate()
        self.placement = place_scenario(config)
        self.graph = self.placement.graph
        n = len(self.graph)
        self.n_nodes = n
        self.router = make_router(config.router_kind, n, config.router_params)
        self.rng = random.Random(config.rng_seed)
        self.observer = observer

        self.buffers = [Buffer(config.buffer_capacity) for _ in range(n)]
        self.messages: dict[int, Message] = {}
        self.custodians: dict[int, set] = {}
        self.live: deque = deque()
        self.delivered: set = set()
        self.transfers: list[Transfer] = []
        self.sending: dict[int, Transfer] = {}
        self.receiving: dict[int, Transfer] = {}

        edges = self.graph.edges()
        self._contact_src = np.array([a for a, b in edges] + [b for a, b in edges], dtype=np.intp)
        self._contact_dst = np.array([b for a, b in edges] + [a for a, b in edges], dtype=np.intp)

        interval = config.router_params.aging_interval
        ratio = interval / config.step_size
        # decisions only change on epochs when epochs land on aging boundaries
        self.exhaustive_scan = exhaustive_scan or abs(ratio - round(ratio)) > 1e-9
        self._dirty: set = set()

        self.n_ticks = tick_count(config.sim_duration, config.step_size)
        self.tick_index = 0
        self._next_message_id = 0
        self._next_generation = 0
        self._next_epoch = 0
        self.epochs = 0

        self.log = EventLog(
            metadata={
                "contact_epochs": f"all contacts fire at t=0 and every {interval} s",
                "ticks": self.n_ticks,
                "nodes": n,
                "warnings": list(self.placement.warnings),
            }
        )

    # -- phases -----------------------------------------------------------

    def generate_messages(self, now: float) -> list[Message]:
        cfg = self.config
        out = []
        while True:
            due = self._next_generation * cfg.generation_interval
            if due >= cfg.sim_duration - _EPS or due > now + _EPS:
                break
            self._next_generation += 1
            dest = self.rng.randrange(1, self.n_nodes)
            msg = Message(self._next_message_id, 0, dest, cfg.message_size, now, cfg.message_ttl)
            self._next_message_id += 1
            self.messages[msg.id] = msg
            self.log.append(now, EventKind.CREATE, msg.id, 0, dest)
            if try_enqueue(self.buffers[0], msg, now):
                self.custodians[msg.id] = {0}
                self.live.append(msg)
                self.router.on_created(0, msg.id)
                self._dirty.add(0)
            else:
                self.log.append(now, EventKind.DROP_BUFFER, msg.id, 0, None)
            out.append(msg)
        return out

    def expire_ttl(self, now: float) -> list[tuple[int, int]]:
        drops = []
        while self.live and self.live[0].expired(now):
            msg = self.live.popleft()
            for t in [t for t in self.transfers if t.message_id == msg.id]:
                self.log.append(now, EventKind.ABORT, msg.id, t.sender, t.receiver)
                self._end_transfer(t)
            for node in sorted(self.custodians.pop(msg.id)):
                self.buffers[node].remove(msg.id)
                self.router.on_removed(node, msg.id)
                self.log.append(now, EventKind.DROP_TTL, msg.id, node, None)
                drops.append((msg.id, node))
        return drops

    def _end_transfer(self, t: Transfer) -> None:
        self.transfers.remove(t)
        del self.sending[t.sender]
        del self.receiving[t.receiver]
        self._dirty.add(t.sender)

    def _drop_copy(self, node: int, message_id: int) -> None:
        self.buffers[node].remove(message_id)
        self.custodians[message_id].discard(node)
        # neighbours may now hand this message back to ``node``
        self._dirty.update(self.graph.adjacency[node])

    def advance_transfers(self, now: float) -> list[Transfer]:
        cfg = self.config
        done = []
        for t in list(self.transfers):
            t.bytes_remaining = max(0.0, t.bytes_remaining - cfg.link_bandwidth * cfg.step_size)
            if t.bytes_remaining > 0:
                continue
            self._end_transfer(t)
            done.append(t)
            msg = self.messages[t.message_id]
            if t.receiver == msg.destination:
                self.log.append(now, EventKind.RELAY, msg.id, t.sender, t.receiver)
                if msg.id not in self.delivered:
                    self.delivered.add(msg.id)
                    self.log.append(now, EventKind.DELIVER, msg.id, t.sender, t.receiver)
                self._drop_copy(t.sender, msg.id)
                self.router.on_removed(t.sender, msg.id)
                continue
            if not try_enqueue(self.buffers[t.receiver], msg, now):
                self.log.append(now, EventKind.ABORT, msg.id, t.sender, t.receiver)
                continue
            self.log.append(now, EventKind.RELAY, msg.id, t.sender, t.receiver)
            self.custodians[msg.id].add(t.receiver)
            self._dirty.add(t.receiver)
            self.router.on_transferred(t.sender, t.receiver, t.directive)
            if t.directive.action is Action.HANDOFF:
                self._drop_copy(t.sender, msg.id)
        return done

    def _contact_epoch(self, now: float) -> None:
        self.router.contact_epoch(self._contact_src, self._contact_dst, now)
        self.epochs += 1
        self._dirty.update(i for i, b in enumerate(self.buffers) if b.resident)

    def _pick(self, node: int, peer: int, now: float) -> Optional[Transfer]:
        resident = self.buffers[node].resident
        for mid in resident:
            if self.messages[mid].destination == peer and mid not in self.delivered:
                return Transfer(mid, node, peer, self.messages[mid].size, None)
        peer_buf = self.buffers[peer].resident
        for mid in resident:
            if mid in peer_buf:
                continue
            msg = self.messages[mid]
            if msg.destination == peer:
                continue
            directive = self.router.decide(mid, msg.destination, node, peer, now)
            if directive.action is not Action.NONE:
                return Transfer(mid, node, peer, msg.size, directive)
        return None

    def scan(self, now: float) -> list[Transfer]:
        started = []
        nodes = range(self.n_nodes) if self.exhaustive_scan else sorted(self._dirty)
        adjacency = self.graph.adjacency
        for a in nodes:
            if a in self.sending or not self.buffers[a].resident:
                self._dirty.discard(a)
                continue
            blocked = False
            chosen = None
            for b in adjacency[a]:
                if b in self.receiving:
                    blocked = True
                    continue
                chosen = self._pick(a, b, now)
                if chosen is not None:
                    break
            if chosen is not None:
                self.transfers.append(chosen)
                self.sending[a] = chosen
                self.receiving[chosen.receiver] = chosen
                started.append(chosen)
            if chosen is not None or not blocked:
                self._dirty.discard(a)
        return started

    # -- driver -----------------------------------------------------------

    def tick(self) -> None:
        now = self.tick_index * self.config.step_size
        self.generate_messages(now)
        self.expire_ttl(now)
        self.advance_transfers(now)
        if now + _EPS >= self._next_epoch * self.config.router_params.aging_interval:
            while now + _EPS >= self._next_epoch * self.config.router_params.aging_interval:
                self._next_epoch += 1
            self._contact_epoch(now)
        self.scan(now)
        if self.observer is not None:
            self.observer(self, now)
        self.tick_index += 1

    def run(self) -> EventLog:
        while self.tick_index < self.n_ticks:
            self.tick()
        return self.log


def run(config: ScenarioConfig, **kwargs) -> EventLog:
    """Execute a whole scenario and return its event log."""
    return Simulation(config, **kwargs).run()
