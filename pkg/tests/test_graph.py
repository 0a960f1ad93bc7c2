import json
import random

import pytest

from oracles import neighbor_counts
from prepub.anchoring import create_anchor
from prepub.engine import Engine
from prepub.errors import DanglingRef, EmptyAggregation, UnknownPerson, ValidationFailed
from prepub.graph import (
    build_graph,
    export_aggregation,
    integrity_check,
    neighbors_of,
    usage_pairs,
)
from prepub.handles import validate_handle
from prepub.models import OutputRef
from worlds import FakeClock, build_world

DOC = "Fragment selection enables piecewise reuse of published arguments."
H1 = "RePEc:aa:wp:001"
H2 = "RePEc:aa:wp:002"


@pytest.fixture
def engine():
    e = Engine(clock=FakeClock())
    for h in (H1, H2):
        e.upsert_item({"handle": h, "title": f"Paper {h[-1]}", "abstract": DOC})
    return e


def anchor(handle=H1, start=0, end=8):
    return create_anchor(DOC, start, end, validate_handle(handle), "abstract")


class TestNeighbors:
    def test_no_activity(self, engine):
        ada = engine.register_person("Ada").person_id
        report = neighbors_of(engine, ada)
        assert report.upstream == [] and report.downstream == []

    def test_unknown_person(self, engine):
        with pytest.raises(UnknownPerson):
            neighbors_of(engine, "pe-000077")

    def test_single_usage_both_directions(self, engine):
        ada = engine.register_person("Ada").person_id
        bob = engine.register_person("Bob").person_id
        engine.claim_work(bob, H1)
        engine.create_quotation(ada, anchor(H1), "good one")
        assert neighbors_of(engine, ada).upstream == [(bob, 1)]
        assert neighbors_of(engine, bob).downstream == [(ada, 1)]

    def test_mutual_usage(self, engine):
        ada = engine.register_person("Ada").person_id
        bob = engine.register_person("Bob").person_id
        engine.claim_work(ada, H1)
        engine.claim_work(bob, H2)
        engine.create_quotation(ada, anchor(H2), "their result")
        engine.create_comment(bob, anchor(H1), "their framing")
        for me, other in ((ada, bob), (bob, ada)):
            report = neighbors_of(engine, me)
            assert report.upstream == [(other, 1)]
            assert report.downstream == [(other, 1)]

    def test_private_outputs_excluded_until_published(self, engine):
        ada = engine.register_person("Ada").person_id
        bob = engine.register_person("Bob").person_id
        engine.claim_work(bob, H1)
        output = engine.create_quotation(ada, anchor(H1), "whisper", "private")
        assert neighbors_of(engine, ada).upstream == []
        engine.set_visibility(ada, output.core.output_id, "public")
        assert neighbors_of(engine, ada).upstream == [(bob, 1)]

    def test_ranking_count_desc_then_person_id(self, engine):
        ada = engine.register_person("Ada").person_id
        bob = engine.register_person("Bob").person_id
        carol = engine.register_person("Carol").person_id
        engine.claim_work(bob, H1)
        engine.claim_work(carol, H2)
        engine.create_quotation(ada, anchor(H2), "one")
        engine.create_comment(ada, anchor(H1), "two")
        engine.create_quotation(ada, anchor(H1), "three")
        report = neighbors_of(engine, ada)
        assert report.upstream == [(bob, 2), (carol, 1)]

    def test_max_results_truncation(self, engine):
        ada = engine.register_person("Ada").person_id
        owners = []
        for i in range(4):
            pid = engine.register_person(f"P{i}").person_id
            handle = f"RePEc:aa:many:{i:03d}"
            engine.upsert_item({"handle": handle, "title": "t", "abstract": DOC})
            engine.claim_work(pid, handle)
            engine.create_comment(ada, anchor(handle), "note")
            owners.append(pid)
        report = neighbors_of(engine, ada, max_results=2)
        assert len(report.upstream) == 2

    def test_oracle_equivalence_random_graphs(self):
        for seed in range(25):
            rng = random.Random(1000 + seed)
            engine = Engine(clock=FakeClock())
            build_world(rng, engine, n_persons=7, n_items=6, n_actions=35)
            dump = engine.state_dump()
            assert usage_pairs(engine) == neighbor_counts(dump), f"seed {seed}"

    def test_symmetry_property(self):
        rng = random.Random(4242)
        engine = Engine(clock=FakeClock())
        build_world(rng, engine, n_persons=6, n_items=5, n_actions=40)
        counts = usage_pairs(engine)
        # A in downstream(B) with count c <=> B in upstream(A) with count c
        for (actor, owner), count in counts.items():
            down = dict(neighbors_of(engine, owner, 1000).downstream)
            up = dict(neighbors_of(engine, actor, 1000).upstream)
            assert down[actor] == count
            assert up[owner] == count


class TestGraphStructure:
    def test_fresh_consistent_store(self, engine):
        ada = engine.register_person("Ada").person_id
        engine.claim_work(ada, H1)
        engine.create_comment(ada, anchor(H1), "note")
        assert integrity_check(engine) == []

    def test_dangling_edge_detected_after_forced_removal(self, engine):
        ada = engine.register_person("Ada").person_id
        engine.claim_work(ada, H1)
        engine.create_comment(ada, anchor(H1), "note")
        graph = build_graph(engine)
        removed = f"item:{validate_handle(H1).raw}"
        del graph.nodes[removed]
        violations = integrity_check(engine, graph)
        assert any("dangling edge" in v for v in violations)

    def test_orphan_node_detected_after_state_corruption(self, engine):
        ada = engine.register_person("Ada").person_id
        engine.claim_work(ada, H1)
        graph = build_graph(engine)
        del engine.items[validate_handle(H1).key()]  # test hook: bypass the API
        violations = integrity_check(engine, graph)
        assert any("orphan node" in v for v in violations)

    def test_relationship_with_deleted_endpoint_detected(self, engine):
        ada = engine.register_person("Ada").person_id
        engine.create_relationship(
            ada, OutputRef("item", H1), OutputRef("item", H2), "compares-with"
        )
        del engine.items[validate_handle(H2).key()]  # test hook
        violations = integrity_check(engine)
        assert any("missing endpoint" in v for v in violations)

    def test_random_consistent_worlds_are_clean(self):
        for seed in range(10):
            rng = random.Random(7000 + seed)
            engine = Engine(clock=FakeClock())
            build_world(rng, engine, n_persons=5, n_items=5, n_actions=30)
            assert integrity_check(engine) == [], f"seed {seed}"


class TestAggregations:
    def fill(self, engine):
        ada = engine.register_person("Ada").person_id
        quote = engine.create_quotation(ada, anchor(H1), "core passage")
        note = engine.create_micropaper(ada, anchor(H2), "synthesis", "argument")
        rel_inside = engine.create_relationship(
            ada,
            OutputRef("micro", quote.core.output_id),
            OutputRef("micro", note.core.output_id),
            "is-part-of",
        )
        engine.create_relationship(  # one endpoint outside the member set
            ada, OutputRef("micro", quote.core.output_id), OutputRef("item", H2), "uses-data"
        )
        members = [
            OutputRef("micro", quote.core.output_id),
            OutputRef("micro", note.core.output_id),
            OutputRef("item", H1),
        ]
        return ada, members, rel_inside

    def test_edges_filtered_to_member_pairs(self, engine):
        ada, members, rel_inside = self.fill(engine)
        aggregation = engine.compile_aggregation(ada, "My composition", members)
        assert aggregation.edges == [rel_inside.core.output_id]
        assert [m.identity() for m in aggregation.members] == [m.identity() for m in members]

    def test_empty_member_list(self, engine):
        ada = engine.register_person("Ada").person_id
        with pytest.raises(EmptyAggregation):
            engine.compile_aggregation(ada, "Nothing", [])

    def test_zero_relationships_zero_edges(self, engine):
        ada = engine.register_person("Ada").person_id
        aggregation = engine.compile_aggregation(ada, "Items only", [OutputRef("item", H1)])
        assert aggregation.edges == []

    def test_dangling_member(self, engine):
        ada = engine.register_person("Ada").person_id
        with pytest.raises(DanglingRef):
            engine.compile_aggregation(ada, "Broken", [OutputRef("micro", "mo-000099")])

    def test_export_json_round_trip(self, engine):
        ada, members, _ = self.fill(engine)
        aggregation = engine.compile_aggregation(ada, "My composition", members)
        doc = json.loads(export_aggregation(engine, aggregation.aggregation_id, "json"))
        assert set(doc) == {"title", "editor", "members", "edges", "compiled_at"}
        assert doc["title"] == aggregation.title
        assert doc["edges"] == aggregation.edges
        rebuilt = [OutputRef.from_dict(m) for m in doc["members"]]
        assert [m.identity() for m in rebuilt] == [m.identity() for m in aggregation.members]

    def test_export_deterministic_bytes(self, engine):
        ada, members, _ = self.fill(engine)
        aggregation = engine.compile_aggregation(ada, "My composition", members)
        for fmt in ("json", "text"):
            first = export_aggregation(engine, aggregation.aggregation_id, fmt)
            second = export_aggregation(engine, aggregation.aggregation_id, fmt)
            assert first == second

    def test_export_text_shape(self, engine):
        ada = engine.register_person("Ada").person_id
        aggregation = engine.compile_aggregation(ada, "Solo", [OutputRef("item", H1)])
        text = export_aggregation(engine, aggregation.aggregation_id, "text")
        lines = text.splitlines()
        assert lines[0] == "Solo"
        assert "Members:" in lines
        assert lines[-1] == "Relations:"  # empty relations section
        assert sum(1 for l in lines if l.startswith("1. ")) == 1

    def test_export_unknown_format(self, engine):
        ada = engine.register_person("Ada").person_id
        aggregation = engine.compile_aggregation(ada, "Solo", [OutputRef("item", H1)])
        with pytest.raises(ValidationFailed):
            export_aggregation(engine, aggregation.aggregation_id, "xml")

    def test_closure_property(self, engine):
        ada, members, _ = self.fill(engine)
        aggregation = engine.compile_aggregation(ada, "My composition", members)
        identities = {m.identity() for m in aggregation.members}
        for edge_id in aggregation.edges:
            rel = engine.outputs[edge_id]
            assert rel.from_ref.identity() in identities
            assert rel.to_ref.identity() in identities
