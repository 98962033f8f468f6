"""Event log and the per-run report computed from it.

The engine appends one record per CREATE / RELAY / DELIVER / DROP_TTL /
DROP_BUFFER / ABORT.  Every report number is derived from that log alone,
so a persisted trace reproduces the in-run report exactly.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Optional


class EventKind(str, enum.Enum):
    CREATE = "CREATE"
    RELAY = "RELAY"
    DELIVER = "DELIVER"
    DROP_TTL = "DROP_TTL"
    DROP_BUFFER = "DROP_BUFFER"
    ABORT = "ABORT"


class Event(NamedTuple):
    time: float
    kind: EventKind
    message_id: int
    src: Optional[int] = None
    dst: Optional[int] = None

    def to_line(self) -> str:
        src = "" if self.src is None else str(self.src)
        dst = "" if self.dst is None else str(self.dst)
        return f"{self.time!r},{self.kind.value},{self.message_id},{src},{dst}"

    @classmethod
    def from_line(cls, line: str) -> "Event":
        time, kind, mid, src, dst = line.rstrip("\n").split(",")
        return cls(
            float(time),
            EventKind(kind),
            int(mid),
            int(src) if src else None,
            int(dst) if dst else None,
        )


@dataclass
class EventLog:
    events: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, time, kind, message_id, src=None, dst=None) -> None:
        if self.events and time < self.events[-1].time:
            raise ValueError(f"event at t={time} precedes t={self.events[-1].time}")
        self.events.append(Event(time, kind, message_id, src, dst))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind is kind)

    def dumps(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    def write(self, fh: io.TextIOBase) -> None:
        for e in self.events:
            fh.write(e.to_line())
            fh.write("\n")

    @classmethod
    def loads(cls, text: str) -> "EventLog":
        return cls([Event.from_line(line) for line in text.splitlines() if line.strip()])


def _as_events(log) -> Iterable[Event]:
    return log.events if isinstance(log, EventLog) else log


def _first_deliveries(log) -> tuple[dict, dict]:
    created, delivered = {}, {}
    for e in _as_events(log):
        if e.kind is EventKind.CREATE:
            created[e.message_id] = e.time
        elif e.kind is EventKind.DELIVER and e.message_id not in delivered:
            delivered[e.message_id] = e.time
    return created, delivered


def created_count(log) -> int:
    return sum(1 for e in _as_events(log) if e.kind is EventKind.CREATE)


def delivery_probability(log) -> float:
    """Unique messages delivered over messages created (0 if none created)."""
    created, delivered = _first_deliveries(log)
    if not created:
        return 0.0
    return len(delivered) / len(created)


def overhead_ratio(log) -> Optional[float]:
    """(relays - deliveries) / deliveries, or None when nothing was delivered.

    A transfer completing at the destination is logged as both RELAY and
    DELIVER, so it appears in the numerator and the denominator.
    """
    relays = deliveries = 0
    for e in _as_events(log):
        if e.kind is EventKind.RELAY:
            relays += 1
        elif e.kind is EventKind.DELIVER:
            deliveries += 1
    if deliveries == 0:
        return None
    return (relays - deliveries) / deliveries


def latency_avg(log) -> Optional[float]:
    created, delivered = _first_deliveries(log)
    if not delivered:
        return None
    return math.fsum(t - created[m] for m, t in delivered.items()) / len(delivered)


def messages_per_destination(log, audience_count: int) -> float:
    if audience_count < 1:
        raise ValueError("audience_count must be >= 1")
    return created_count(log) / audience_count


def delivered_per_destination(log, audience_count: int) -> float:
    if audience_count < 1:
        raise ValueError("audience_count must be >= 1")
    _, delivered = _first_deliveries(log)
    return len(delivered) / audience_count


# CSV metric columns, in order
METRIC_COLUMNS = (
    "created",
    "delivered_unique",
    "relays",
    "delivery_probability",
    "overhead_ratio",
    "latency_avg",
    "messages_per_destination",
)


@dataclass(frozen=True)
class Report:
    created: int
    delivered_unique: int
    relays: int
    delivery_probability: float
    overhead_ratio: Optional[float]
    latency_avg: Optional[float]
    messages_per_destination: float
    delivered_per_destination: float = 0.0
    copies_created: int = 0
    drops_ttl: int = 0
    drops_buffer: int = 0
    aborts: int = 0
    degenerate: bool = False

    def metric_row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in METRIC_COLUMNS}


def compute_report(log, audience_count: int) -> Report:
    """Single pass over the log producing every metric."""
    counts = {k: 0 for k in EventKind}
    created, delivered = {}, {}
    for e in _as_events(log):
        counts[e.kind] += 1
        if e.kind is EventKind.CREATE:
            created[e.message_id] = e.time
        elif e.kind is EventKind.DELIVER and e.message_id not in delivered:
            delivered[e.message_id] = e.time
    n_created = len(created)
    relays = counts[EventKind.RELAY]
    deliveries = counts[EventKind.DELIVER]
    latency = None
    if delivered:
        latency = math.fsum(t - created[m] for m, t in delivered.items()) / len(delivered)
    return Report(
        created=n_created,
        delivered_unique=len(delivered),
        relays=relays,
        delivery_probability=len(delivered) / n_created if n_created else 0.0,
        overhead_ratio=(relays - deliveries) / deliveries if deliveries else None,
        latency_avg=latency,
        messages_per_destination=n_created / audience_count,
        delivered_per_destination=len(delivered) / audience_count,
        # copies written into a buffer: originals plus non-delivering relays
        copies_created=n_created + relays - deliveries,
        drops_ttl=counts[EventKind.DROP_TTL],
        drops_buffer=counts[EventKind.DROP_BUFFER],
        aborts=counts[EventKind.ABORT],
        degenerate=n_created == 0,
    )
