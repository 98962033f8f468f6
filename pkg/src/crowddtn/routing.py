"""Routing protocols: PRoPHET, PRoPHETv2, Spray & Wait and Spray & Focus.

Two layers live here.  The module-level functions are the protocol rules
for a single node pair, written against plain dicts so they can be read
and tested in isolation.  The ``*Router`` classes hold the state of every
node in the network as dense numpy arrays (row ``a`` is node ``a``'s view)
and apply the same rules to all contacts of an encounter epoch at once;
the engine only talks to those.
"""

from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .scenario import RouterKind, RouterParams

NEVER = -math.inf
# absorbs float noise in tick times when counting whole aging intervals
_AGING_EPS = 1e-9


class Action(str, enum.Enum):
    REPLICATE = "REPLICATE"
    HANDOFF = "HANDOFF"
    NONE = "NONE"


@dataclass(frozen=True)
class ForwardDirective:
    message_id: int
    action: Action
    copies: int = 0

    @property
    def acts(self) -> bool:
        return self.action is not Action.NONE


class PredEntry(NamedTuple):
    p: float
    last_aged_at: float


# node -> PredEntry; a missing key means predictability 0
PredVector = dict
# node -> absolute time of the last contact-driven update
EncounterTable = dict


@dataclass
class NodeState:
    """Per-node PRoPHET / Spray & Focus state in dict form."""

    node: int
    preds: dict = field(default_factory=dict)
    encounters: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# single-pair protocol rules
# ---------------------------------------------------------------------------


def encounter_probability(
    now: float, last_encounter: Optional[float], p_enc_max: float, i_typ: float
) -> float:
    """PRoPHETv2 boost for meeting a node last seen at ``last_encounter``.

    ``None`` (or -inf) means the pair never met, which earns the full
    ``p_enc_max``.  A re-encounter within the typical interval ``i_typ``
    only earns a share proportional to the time since the last one.
    """
    if last_encounter is None or last_encounter == NEVER:
        return p_enc_max
    interval = now - last_encounter
    if interval < i_typ:
        return p_enc_max * (interval / i_typ)
    return p_enc_max


def update_direct_pred(p_old: float, boost: float) -> float:
    return p_old + (1.0 - p_old) * boost


def aging_steps(now: float, last_aged_at: float, aging_interval: float) -> int:
    return max(0, math.floor((now - last_aged_at) / aging_interval + _AGING_EPS))


def age_preds(vector: PredVector, now: float, gamma: float, aging_interval: float) -> PredVector:
    """Decay every entry by ``gamma`` per whole ``aging_interval`` elapsed.

    Returns a new vector; each entry's ``last_aged_at`` moves forward by the
    intervals actually consumed, so a partial interval carries over.
    """
    out = {}
    for node, (p, aged_at) in vector.items():
        k = aging_steps(now, aged_at, aging_interval)
        if k:
            out[node] = PredEntry(p * gamma**k, aged_at + k * aging_interval)
        else:
            out[node] = PredEntry(p, aged_at)
    return out


def update_transitive(
    preds_self: PredVector,
    p_ab: float,
    preds_peer: PredVector,
    beta: float,
    v2: bool,
    *,
    self_node: Optional[int] = None,
    now: float = 0.0,
) -> PredVector:
    """Fold a peer's predictabilities into ours through the link ``p_ab``.

    PRoPHET (``v2=False``) adds the transitive term on top of the old
    value; PRoPHETv2 keeps whichever of old and transitive is larger.  The
    peer's entry for ``self_node`` is ignored.  Entries created here start
    aging from ``now``.
    """
    out = dict(preds_self)
    for node, entry in preds_peer.items():
        if node == self_node:
            continue
        via = p_ab * entry.p * beta
        old = out.get(node)
        p_old = old.p if old is not None else 0.0
        if v2:
            if via > p_old:
                out[node] = PredEntry(via, old.last_aged_at if old is not None else now)
        else:
            p_new = p_old + (1.0 - p_old) * via
            if old is not None:
                out[node] = PredEntry(p_new, old.last_aged_at)
            elif p_new > 0.0:
                out[node] = PredEntry(p_new, now)
    return out


def on_contact(
    a: NodeState, b: NodeState, now: float, kind: RouterKind, params: RouterParams
) -> tuple[NodeState, NodeState]:
    """Apply one encounter between ``a`` and ``b`` to both sides.

    Both directions read the other side's state as it stood when the
    contact came up (after aging), so the result does not depend on which
    node is processed first.
    """
    if a.node == b.node:
        raise ValueError(f"node {a.node} cannot contact itself")
    a2, b2 = copy.deepcopy(a), copy.deepcopy(b)
    if kind.is_prophet:
        gamma, interval = params.gamma, params.aging_interval
        a2.preds = age_preds(a2.preds, now, gamma, interval)
        b2.preds = age_preds(b2.preds, now, gamma, interval)
    snap_a, snap_b = copy.deepcopy(a2), copy.deepcopy(b2)

    for me, peer_snap in ((a2, snap_b), (b2, snap_a)):
        peer = peer_snap.node
        if kind.is_prophet:
            if kind is RouterKind.PROPHETV2:
                boost = encounter_probability(
                    now, me.encounters.get(peer), params.p_enc_max, params.i_typ
                )
            else:
                boost = params.p_init
            old = me.preds.get(peer)
            p_old = old.p if old is not None else 0.0
            me.preds[peer] = PredEntry(
                update_direct_pred(p_old, boost), old.last_aged_at if old is not None else now
            )
        me.encounters[peer] = now

    if kind.is_prophet:
        v2 = kind is RouterKind.PROPHETV2
        for me, peer_snap in ((a2, snap_b), (b2, snap_a)):
            me.preds = update_transitive(
                me.preds,
                me.preds[peer_snap.node].p,
                peer_snap.preds,
                params.beta,
                v2,
                self_node=me.node,
                now=now,
            )
    elif kind is RouterKind.SPRAY_FOCUS:
        for me, peer_snap in ((a2, snap_b), (b2, snap_a)):
            inherit_encounters(me.encounters, peer_snap.encounters, me.node, params.timer_offset)
    return a2, b2


def inherit_encounters(
    own: EncounterTable, peer: EncounterTable, self_node: int, offset: float = 0.0
) -> None:
    """Adopt the peer's fresher sightings (shifted back by ``offset``), in place."""
    for node, seen in peer.items():
        if node == self_node:
            continue
        seen = seen - offset
        if seen > own.get(node, NEVER):
            own[node] = seen


def prophet_forward_decision(
    message_id: int, p_self: float, p_peer: float
) -> ForwardDirective:
    """Copy to the peer only if it is strictly better placed than us.

    Both predictabilities must already be aged to the current time.
    """
    if p_peer > p_self:
        return ForwardDirective(message_id, Action.REPLICATE, 1)
    return ForwardDirective(message_id, Action.NONE)


def spray_split(copies: int) -> tuple[int, int]:
    """Binary spraying: (kept, given) = (ceil(n/2), floor(n/2))."""
    if copies < 2:
        raise ValueError(f"spray phase needs at least 2 copies, got {copies}")
    give = copies // 2
    return copies - give, give


def encounter_utility(now: float, last_encounter: Optional[float]) -> float:
    """Time since last meeting the destination; lower is better."""
    if last_encounter is None or last_encounter == NEVER:
        return math.inf
    return now - last_encounter


def focus_decision(
    message_id: int,
    dest: int,
    self_table: EncounterTable,
    peer_table: EncounterTable,
    now: float,
    threshold: float = 0.0,
) -> ForwardDirective:
    u_self = encounter_utility(now, self_table.get(dest))
    u_peer = encounter_utility(now, peer_table.get(dest))
    if u_peer + threshold < u_self:
        return ForwardDirective(message_id, Action.HANDOFF, 1)
    return ForwardDirective(message_id, Action.NONE)


# ---------------------------------------------------------------------------
# network-wide routers used by the engine
# ---------------------------------------------------------------------------


def _group_by_source(src: np.ndarray, dst: np.ndarray):
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    starts = np.flatnonzero(np.r_[True, src[1:] != src[:-1]])
    return src, dst, starts, src[starts]


class Router:
    """Network-wide routing state; subclasses implement one protocol family."""

    kind: RouterKind

    def __init__(self, n_nodes: int, params: RouterParams):
        self.n = n_nodes
        self.params = params

    def contact_epoch(self, src: np.ndarray, dst: np.ndarray, now: float) -> None:
        """Process the contacts (src[k], dst[k]) that come up at ``now``.

        Pass each undirected contact once in each direction.
        """
        raise NotImplementedError

    def decide(self, message_id: int, dest: int, holder: int, peer: int, now: float) -> ForwardDirective:
        raise NotImplementedError

    def on_created(self, node: int, message_id: int) -> None:
        pass

    def on_transferred(self, sender: int, receiver: int, directive: ForwardDirective) -> None:
        pass

    def on_removed(self, node: int, message_id: int) -> None:
        pass


class ProphetRouter(Router):
    """PRoPHET (v1) or PRoPHETv2 over dense predictability matrices.

    ``pred[a, i]`` is P(a, i) and ``aged_at[a, i]`` the time its aging was
    last applied; ``last_seen[a, b]`` is -inf until a meets b.
    """

    def __init__(self, n_nodes: int, params: RouterParams, v2: bool = True):
        super().__init__(n_nodes, params)
        self.v2 = v2
        self.kind = RouterKind.PROPHETV2 if v2 else RouterKind.PROPHET
        self.pred = np.zeros((n_nodes, n_nodes))
        self.aged_at = np.zeros((n_nodes, n_nodes))
        self.last_seen = np.full((n_nodes, n_nodes), NEVER)

    def _age_rows(self, rows: np.ndarray, now: float) -> None:
        p = self.params
        elapsed = (now - self.aged_at[rows]) / p.aging_interval + _AGING_EPS
        k = np.maximum(np.floor(elapsed), 0.0)
        self.pred[rows] *= p.gamma**k
        self.aged_at[rows] += k * p.aging_interval

    def contact_epoch(self, src, dst, now):
        if len(src) == 0:
            return
        p = self.params
        src = np.asarray(src, dtype=np.intp)
        dst = np.asarray(dst, dtype=np.intp)
        src, dst, starts, rows = _group_by_source(src, dst)

        self._age_rows(rows, now)
        before = self.pred[rows].copy()
        snapshot = self.pred.copy()

        # direct updates
        if self.v2:
            seen = self.last_seen[src, dst]
            interval = now - seen
            boost = np.where(
                np.isinf(seen) | (interval >= p.i_typ),
                p.p_enc_max,
                p.p_enc_max * (interval / p.i_typ),
            )
        else:
            boost = p.p_init
        old = self.pred[src, dst]
        self.pred[src, dst] = old + (1.0 - old) * boost
        self.last_seen[src, dst] = now

        # transitive exchange from the pre-contact snapshot
        cand = self.pred[src, dst][:, None] * snapshot[dst] * p.beta
        cand[np.arange(len(src)), src] = 0.0
        if self.v2:
            via = np.maximum.reduceat(cand, starts, axis=0)
            self.pred[rows] = np.maximum(self.pred[rows], via)
        else:
            keep = np.multiply.reduceat(1.0 - cand, starts, axis=0)
            self.pred[rows] = 1.0 - (1.0 - self.pred[rows]) * keep

        # entries that came into existence start aging now
        fresh = (before == 0.0) & (self.pred[rows] > 0.0)
        block = self.aged_at[rows]
        block[fresh] = now
        self.aged_at[rows] = block

    def predictability(self, node: int, dest: int, now: float) -> float:
        p = self.pred[node, dest]
        if p == 0.0:
            return 0.0
        k = aging_steps(now, self.aged_at[node, dest], self.params.aging_interval)
        return float(p * self.params.gamma**k) if k else float(p)

    def vector(self, node: int) -> PredVector:
        """Dict view of one node's predictability vector (for inspection)."""
        nz = np.flatnonzero(self.pred[node])
        return {int(i): PredEntry(float(self.pred[node, i]), float(self.aged_at[node, i])) for i in nz}

    def decide(self, message_id, dest, holder, peer, now):
        return prophet_forward_decision(
            message_id,
            self.predictability(holder, dest, now),
            self.predictability(peer, dest, now),
        )


class SprayRouter(Router):
    """Binary Spray & Wait, or Spray & Focus when ``focus`` is set.

    ``copies[node][message_id]`` is the number of copies that node is
    responsible for.  Spray & Focus additionally keeps ``last_seen``.
    """

    def __init__(self, n_nodes: int, params: RouterParams, focus: bool = True):
        super().__init__(n_nodes, params)
        self.focus = focus
        self.kind = RouterKind.SPRAY_FOCUS if focus else RouterKind.SPRAY_WAIT
        self.copies: list[dict[int, int]] = [{} for _ in range(n_nodes)]
        # copies taken out of circulation by delivery or expiry
        self.retired: dict[int, int] = {}
        self.last_seen = np.full((n_nodes, n_nodes), NEVER) if focus else None

    def contact_epoch(self, src, dst, now):
        if not self.focus or len(src) == 0:
            return
        src = np.asarray(src, dtype=np.intp)
        dst = np.asarray(dst, dtype=np.intp)
        src, dst, starts, rows = _group_by_source(src, dst)
        snapshot = self.last_seen.copy()
        self.last_seen[src, dst] = now
        cand = snapshot[dst] - self.params.timer_offset
        cand[np.arange(len(src)), src] = NEVER
        via = np.maximum.reduceat(cand, starts, axis=0)
        self.last_seen[rows] = np.maximum(self.last_seen[rows], via)

    def table(self, node: int) -> EncounterTable:
        row = self.last_seen[node]
        return {int(i): float(row[i]) for i in np.flatnonzero(np.isfinite(row))}

    def decide(self, message_id, dest, holder, peer, now):
        n = self.copies[holder][message_id]
        if n >= 2:
            _, give = spray_split(n)
            return ForwardDirective(message_id, Action.REPLICATE, give)
        if self.focus:
            mine = self.last_seen[holder, dest]
            theirs = self.last_seen[peer, dest]
            u_self = math.inf if mine == NEVER else now - mine
            u_peer = math.inf if theirs == NEVER else now - theirs
            if u_peer + self.params.focus_threshold < u_self:
                return ForwardDirective(message_id, Action.HANDOFF, 1)
        return ForwardDirective(message_id, Action.NONE)

    def on_created(self, node, message_id):
        self.copies[node][message_id] = int(self.params.copies_l)

    def on_transferred(self, sender, receiver, directive):
        mid = directive.message_id
        if directive.action is Action.REPLICATE:
            self.copies[sender][mid] -= directive.copies
            self.copies[receiver][mid] = directive.copies
        elif directive.action is Action.HANDOFF:
            self.copies[receiver][mid] = self.copies[sender].pop(mid)

    def on_removed(self, node, message_id):
        n = self.copies[node].pop(message_id, 0)
        self.retired[message_id] = self.retired.get(message_id, 0) + n


def make_router(kind: RouterKind, n_nodes: int, params: RouterParams) -> Router:
    kind = RouterKind(kind)
    if kind is RouterKind.PROPHET:
        return ProphetRouter(n_nodes, params, v2=False)
    if kind is RouterKind.PROPHETV2:
        return ProphetRouter(n_nodes, params, v2=True)
    if kind is RouterKind.SPRAY_WAIT:
        return SprayRouter(n_nodes, params, focus=False)
    return SprayRouter(n_nodes, params, focus=True)
