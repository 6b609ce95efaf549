"""The three recommender graphs built from a link stream.

* BIP -- classical bipartite user-item graph, weight-1 edges both ways.
* STG -- BIP plus per-slice session nodes (u, k); sessions point to the
  items picked in the slice with weight 1, items point back with eta_s.
* LSG -- link stream graph: one node per (t, user) / (t, item)
  occurrence, weight-1 event edges at shared timestamps, and chain
  edges between consecutive occurrences of the same user or item
  (forward weight 1, backward weight eta_s).

Nodes are tagged tuples -- ("U", u), ("I", i), ("S", u, k),
("TU", t, u), ("TI", t, i) -- cheap, hashable and ordered, so a sorted
node list gives every graph a deterministic index.

Edges pointing "into the past" (item->session, backward chains) carry
the eta_s weight; eta_s = 0 omits them entirely so transition matrices
never see zero-weight edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .linkstream import LinkStream

__all__ = [
    "RecGraph",
    "Node",
    "USER",
    "ITEM",
    "SESSION",
    "TUSER",
    "TITEM",
    "build_bip",
    "build_stg",
    "build_lsg",
    "build_graph",
    "slice_index",
    "slice_count",
    "render_node",
    "edge_list_lines",
    "write_edge_list",
]

USER = "U"
ITEM = "I"
SESSION = "S"
TUSER = "TU"
TITEM = "TI"

Node = tuple  # ("U", u) | ("I", i) | ("S", u, k) | ("TU", t, u) | ("TI", t, i)

FLAVORS = ("bip", "stg", "lsg")


@dataclass(frozen=True)
class RecGraph:
    """Weighted directed graph with typed nodes.

    ``edges`` maps (src, dst) to a positive weight; zero-weight edges are
    never stored. Instances are immutable once built and safe to share
    across threads.
    """

    flavor: str
    nodes: frozenset
    edges: dict
    delta: float | None = None
    eta_s: float | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def item_ids(self) -> set[str]:
        """Item identifiers present in the graph, whatever the flavor."""
        out = set()
        for node in self.nodes:
            if node[0] == ITEM:
                out.add(node[1])
            elif node[0] == TITEM:
                out.add(node[2])
        return out

    def user_ids(self) -> set[str]:
        out = set()
        for node in self.nodes:
            if node[0] == USER:
                out.add(node[1])
            elif node[0] == TUSER:
                out.add(node[2])
        return out


def _require_events(stream: LinkStream) -> None:
    if len(stream) == 0:
        raise ValueError("cannot build graph from empty stream")


def _bip_edges(stream: LinkStream) -> dict:
    edges: dict = {}
    for ev in stream.events:
        u, i = (USER, ev.user), (ITEM, ev.item)
        edges[(u, i)] = 1.0
        edges[(i, u)] = 1.0
    return edges


def build_bip(stream: LinkStream) -> RecGraph:
    """Bipartite graph: one weight-1 edge pair per distinct (user, item)."""
    _require_events(stream)
    edges = _bip_edges(stream)
    nodes = {(USER, u) for u in stream.users} | {(ITEM, i) for i in stream.items}
    return RecGraph(flavor="bip", nodes=frozenset(nodes), edges=edges)


def slice_count(alpha: float, omega: float, delta: float) -> int:
    """Number of delta-wide slices covering [alpha, omega] (at least 1)."""
    return max(1, math.ceil((omega - alpha) / delta))


def slice_index(t: float, alpha: float, omega: float, delta: float) -> int:
    """1-based slice of time t; half-open slices anchored at alpha.

    An event at exactly omega is clamped into the last slice, mirroring
    the closed right edge of the last evaluation window.
    """
    k = math.floor((t - alpha) / delta) + 1
    return min(k, slice_count(alpha, omega, delta))


def build_stg(stream: LinkStream, delta: float, eta_s: float) -> RecGraph:
    """Session-based temporal graph: BIP plus (user, slice) session nodes."""
    if delta <= 0:
        raise ValueError("slice duration delta must be positive")
    if eta_s < 0:
        raise ValueError("eta_s must be non-negative")
    _require_events(stream)
    alpha, omega = stream.time_span
    edges = _bip_edges(stream)
    nodes = {(USER, u) for u in stream.users} | {(ITEM, i) for i in stream.items}
    for ev in stream.events:
        k = slice_index(ev.t, alpha, omega, delta)
        session, item = (SESSION, ev.user, k), (ITEM, ev.item)
        nodes.add(session)
        edges[(session, item)] = 1.0
        if eta_s > 0:
            edges[(item, session)] = eta_s
    return RecGraph(
        flavor="stg", nodes=frozenset(nodes), edges=edges, delta=delta, eta_s=eta_s
    )


def build_lsg(stream: LinkStream, eta_s: float) -> RecGraph:
    """Link stream graph: temporal nodes, event edges and chain edges."""
    if eta_s < 0:
        raise ValueError("eta_s must be non-negative")
    _require_events(stream)
    edges: dict = {}
    user_times: dict[str, set[int]] = {}
    item_times: dict[str, set[int]] = {}
    for ev in stream.events:
        tu, ti = (TUSER, ev.t, ev.user), (TITEM, ev.t, ev.item)
        edges[(tu, ti)] = 1.0
        edges[(ti, tu)] = 1.0
        user_times.setdefault(ev.user, set()).add(ev.t)
        item_times.setdefault(ev.item, set()).add(ev.t)

    def chain(times_by_id: dict[str, set[int]], tag: str) -> None:
        for ident, times in times_by_id.items():
            ordered = sorted(times)
            for prev, nxt in zip(ordered, ordered[1:]):
                edges[((tag, prev, ident), (tag, nxt, ident))] = 1.0
                if eta_s > 0:
                    edges[((tag, nxt, ident), (tag, prev, ident))] = eta_s

    chain(user_times, TUSER)
    chain(item_times, TITEM)
    nodes = {(TUSER, t, u) for u, ts in user_times.items() for t in ts} | {
        (TITEM, t, i) for i, ts in item_times.items() for t in ts
    }
    return RecGraph(flavor="lsg", nodes=frozenset(nodes), edges=edges, eta_s=eta_s)


def build_graph(
    flavor: str,
    stream: LinkStream,
    delta: float | None = None,
    eta_s: float | None = None,
) -> RecGraph:
    """Dispatch to the named construction, checking flavor parameters."""
    if flavor == "bip":
        return build_bip(stream)
    if flavor == "stg":
        if delta is None:
            raise ValueError("stg requires delta")
        return build_stg(stream, delta, 0.0 if eta_s is None else eta_s)
    if flavor == "lsg":
        return build_lsg(stream, 0.0 if eta_s is None else eta_s)
    raise ValueError(f"unknown graph flavor {flavor!r}")


def render_node(node: Node) -> str:
    """Stable text form: U:u, I:i, S:u@k, TU:t@u, TI:t@i."""
    tag = node[0]
    if tag in (USER, ITEM):
        return f"{tag}:{node[1]}"
    if tag == SESSION:
        return f"S:{node[1]}@{node[2]}"
    if tag in (TUSER, TITEM):
        return f"{tag}:{node[1]}@{node[2]}"
    raise ValueError(f"unknown node kind {node!r}")


def edge_list_lines(graph: RecGraph) -> list[str]:
    """Edge list as 'src<TAB>dst<TAB>weight' lines, sorted by endpoints."""
    return [
        f"{render_node(src)}\t{render_node(dst)}\t{format(w, 'g')}"
        for (src, dst), w in sorted(graph.edges.items())
    ]


def write_edge_list(graph: RecGraph, path) -> None:
    Path(path).write_text("\n".join(edge_list_lines(graph)) + "\n", encoding="utf-8")
