"""Typed graph over items, micro outputs and persons, plus the queries
that ride on it: neighbor identification, aggregation export and
structural integrity checking.

The graph is derived on demand from engine state and is therefore as
deterministic as the log that produced the state. Edges pointing at
handles that were never harvested are not emitted; usage of unregistered
targets simply contributes nothing here, mirroring how notification
fan-out degrades on unclaimed targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ValidationFailed
from .handles import validate_handle
from .models import (
    PUBLIC,
    AssertionOutput,
    CommentOutput,
    MicroPaperOutput,
    OutputRef,
    QuotationOutput,
    RelationshipOutput,
    output_targets,
)

ITEM = "item"
MICRO = "micro"
PERSON = "person"


def node_id(kind: str, entity_id: str) -> str:
    return f"{kind}:{entity_id}"


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    label: str  # created | targets | relates | claims
    relation: str | None = None


@dataclass
class Graph:
    nodes: dict[str, str] = field(default_factory=dict)  # node id -> kind
    edges: list[GraphEdge] = field(default_factory=list)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def build_graph(engine) -> Graph:
    """Snapshot the current state as a typed graph."""
    with engine._lock:  # consistent view while writers are active
        return _build_graph_locked(engine)


def _build_graph_locked(engine) -> Graph:
    graph = Graph()
    for item in engine.items.values():
        graph.nodes[node_id(ITEM, item.handle.raw)] = ITEM
    for person_id in engine.persons:
        graph.nodes[node_id(PERSON, person_id)] = PERSON
    for output_id in engine.outputs:
        graph.nodes[node_id(MICRO, output_id)] = MICRO

    def ref_node(ref: OutputRef) -> str | None:
        target = node_id(ref.kind if ref.kind == MICRO else ITEM, ref.id)
        return target if target in graph.nodes else None

    for claim in engine.claims.values():
        target = node_id(ITEM, claim.handle)
        if target in graph.nodes:
            graph.edges.append(GraphEdge(node_id(PERSON, claim.person_id), target, "claims"))
    for output_id, output in engine.outputs.items():
        me = node_id(MICRO, output_id)
        graph.edges.append(GraphEdge(node_id(PERSON, output.core.creator), me, "created"))
        if isinstance(output, RelationshipOutput):
            for ref in (output.from_ref, output.to_ref):
                dst = ref_node(ref)
                if dst is not None:
                    graph.edges.append(GraphEdge(me, dst, "relates", output.relation))
        else:
            for ref in output_targets(output):
                dst = ref_node(ref)
                if dst is not None:
                    graph.edges.append(GraphEdge(me, dst, "targets"))
    return graph


# --- neighbors ---------------------------------------------------------------


@dataclass
class NeighborReport:
    person_id: str
    upstream: list[tuple[str, int]]  # whose work this person used
    downstream: list[tuple[str, int]]  # who used this person's work

    def as_dict(self) -> dict:
        return {
            "person_id": self.person_id,
            "upstream": [{"person_id": p, "usage_count": c} for p, c in self.upstream],
            "downstream": [{"person_id": p, "usage_count": c} for p, c in self.downstream],
        }


def usage_pairs(engine, graph: Graph | None = None) -> dict[tuple[str, str], int]:
    """(actor, owner) -> number of distinct public usage acts.

    An act is one newest-version public micro output; it counts once per
    distinct owner it touches. Owners of an item are its claimants; the
    owner of a micro output is its creator. Self-usage never counts.
    """
    with engine._lock:  # one consistent snapshot for graph, heads and visibility
        graph = graph or _build_graph_locked(engine)
        item_owners: dict[str, set[str]] = {}
        micro_creator: dict[str, str] = {}
        usage_edges: dict[str, list[str]] = {}
        for edge in graph.edges:
            if edge.label == "claims":
                item_owners.setdefault(edge.dst, set()).add(edge.src.split(":", 1)[1])
            elif edge.label == "created":
                micro_creator[edge.dst] = edge.src.split(":", 1)[1]
            else:  # targets | relates
                usage_edges.setdefault(edge.src, []).append(edge.dst)

        counts: dict[tuple[str, str], int] = {}
        for output_id, output in engine.outputs.items():
            if not engine.is_head(output_id) or output.core.visibility != PUBLIC:
                continue
            me = node_id(MICRO, output_id)
            actor = micro_creator[me]
            owners: set[str] = set()
            for dst in usage_edges.get(me, ()):
                if dst in item_owners:
                    owners |= item_owners[dst]
                elif dst in micro_creator:
                    owners.add(micro_creator[dst])
            owners.discard(actor)
            for owner in owners:
                counts[(actor, owner)] = counts.get((actor, owner), 0) + 1
        return counts


def _ranked(entries: dict[str, int], max_results: int) -> list[tuple[str, int]]:
    ordered = sorted(entries.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:max_results]


def neighbors_of(engine, person_id: str, max_results: int = 20) -> NeighborReport:
    engine.get_person(person_id)
    counts = usage_pairs(engine)
    upstream = {owner: n for (actor, owner), n in counts.items() if actor == person_id}
    downstream = {actor: n for (actor, owner), n in counts.items() if owner == person_id}
    return NeighborReport(
        person_id=person_id,
        upstream=_ranked(upstream, max_results),
        downstream=_ranked(downstream, max_results),
    )


# --- integrity ---------------------------------------------------------------


def integrity_check(engine, graph: Graph | None = None) -> list[str]:
    """Structural violations; empty on any state reachable through the API."""
    graph = graph or build_graph(engine)
    violations = []
    for edge in graph.edges:
        for endpoint in (edge.src, edge.dst):
            if endpoint not in graph.nodes:
                violations.append(f"dangling edge {edge.src} -{edge.label}-> {edge.dst}")
                break
    for nid, kind in graph.nodes.items():
        entity_id = nid.split(":", 1)[1]
        if kind == ITEM:
            exists = validate_handle(entity_id).key() in engine.items
        elif kind == MICRO:
            exists = entity_id in engine.outputs
        else:
            exists = entity_id in engine.persons
        if not exists:
            violations.append(f"orphan node {nid}")
    with engine._lock:
        relationships = [
            (oid, o) for oid, o in engine.outputs.items() if isinstance(o, RelationshipOutput)
        ]
    for output_id, output in relationships:
        for ref in (output.from_ref, output.to_ref):
            if ref.kind == ITEM:
                ok = validate_handle(ref.id).key() in engine.items
            else:
                ok = ref.id in engine.outputs
            if not ok:
                violations.append(f"relationship {output_id} has missing endpoint {ref.id}")
    return violations


# --- aggregation export -------------------------------------------------------


def _member_line(engine, ref: OutputRef) -> str:
    if ref.kind == ITEM:
        item = engine.items.get(validate_handle(ref.id).key())
        title = item.title if item is not None else "(unknown)"
        return f"[item] {ref.id} - {title}"
    output = engine.outputs[ref.id]
    creator = output.core.creator
    if isinstance(output, CommentOutput):
        detail = output.body
    elif isinstance(output, AssertionOutput):
        s = output.statement
        detail = f"{s['subject']} {s['predicate']} {s['object']}"
    elif isinstance(output, QuotationOutput):
        detail = f'"{output.anchor.exact}"'
    elif isinstance(output, MicroPaperOutput):
        detail = output.title
    else:
        detail = f"{output.from_ref.id} {output.relation} {output.to_ref.id}"
    return f"[{output.kind}] {ref.id} by {creator}: {detail}"


def export_aggregation(engine, aggregation_id: str, fmt: str = "json") -> str:
    """Deterministic document for an aggregation; same input, same bytes."""
    aggregation = engine.get_aggregation(aggregation_id)
    if fmt == "json":
        doc = {
            "title": aggregation.title,
            "editor": aggregation.editor,
            "members": [m.as_dict() for m in aggregation.members],
            "edges": list(aggregation.edges),
            "compiled_at": aggregation.compiled_at,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        lines = [aggregation.title, ""]
        lines.append("Members:")
        for i, ref in enumerate(aggregation.members, start=1):
            lines.append(f"{i}. {_member_line(engine, ref)}")
        lines.append("")
        lines.append("Relations:")
        for edge_id in aggregation.edges:
            rel = engine.outputs[edge_id]
            lines.append(f"{rel.from_ref.id} —{rel.relation}→ {rel.to_ref.id}")
        return "\n".join(lines) + "\n"
    raise ValidationFailed(f"format must be 'json' or 'text', got {fmt!r}")
