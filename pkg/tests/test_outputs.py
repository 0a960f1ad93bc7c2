import pytest

from prepub.anchoring import create_anchor
from prepub.engine import Engine
from prepub.errors import (
    AlreadySuperseded,
    DanglingRef,
    EmptyField,
    InvalidVisibilityChange,
    MalformedAnchor,
    NotOwner,
    SelfLoop,
    UnknownCreator,
    UnknownRelation,
    ValidationFailed,
)
from prepub.handles import validate_handle
from prepub.models import OutputRef, output_targets
from worlds import FakeClock

DOC = "We measure the effect of open access on citation counts."
HANDLE = "RePEc:aa:bb:cc"


@pytest.fixture
def engine():
    e = Engine(clock=FakeClock())
    e.upsert_item(
        {"handle": HANDLE, "title": "OA effects", "abstract": DOC, "archive_code": "aa"}
    )
    return e


@pytest.fixture
def ada(engine):
    return engine.register_person("Ada").person_id


def make_anchor(start=3, end=10):
    return create_anchor(DOC, start, end, validate_handle(HANDLE), "abstract")


class TestCreation:
    def test_comment_stored_linked_and_evented(self, engine, ada):
        before_events = len(engine.events)
        output = engine.create_comment(ada, make_anchor(), "interesting")
        assert engine.list_outputs_for(HANDLE) == [output]
        events = engine.events[before_events:]
        assert len(events) == 1
        assert events[0].action_kind == "comment"
        assert events[0].actor == ada
        assert events[0].used_targets[0].id == HANDLE

    def test_unknown_creator(self, engine):
        with pytest.raises(UnknownCreator):
            engine.create_comment("pe-000042", make_anchor(), "x")

    def test_empty_body(self, engine, ada):
        with pytest.raises(EmptyField):
            engine.create_comment(ada, make_anchor(), "   ")

    def test_quotation_requires_comment(self, engine, ada):
        with pytest.raises(EmptyField):
            engine.create_quotation(ada, make_anchor(), "")

    def test_assertion_provenance_derived_from_anchor(self, engine, ada):
        anchor = make_anchor()
        output = engine.create_assertion(
            ada, anchor, ("drug X", "inhibits", "gene Y")
        )
        assert output.provenance["derived_from"] == anchor.as_dict()
        assert output.provenance["asserted_by"] == ada
        assert output.statement == {
            "subject": "drug X",
            "predicate": "inhibits",
            "object": "gene Y",
        }
        assert set(output.pubinfo) == {"license", "generator"}

    def test_assertion_empty_triple_part(self, engine, ada):
        with pytest.raises(EmptyField):
            engine.create_assertion(ada, make_anchor(), ("s", "", "o"))

    def test_micropaper_title_cap(self, engine, ada):
        with pytest.raises(ValidationFailed):
            engine.create_micropaper(ada, make_anchor(), "t" * 301, "body")

    def test_malformed_anchor_dict(self, engine, ada):
        with pytest.raises(MalformedAnchor):
            engine.create_comment(ada, {"target": HANDLE}, "x")

    def test_anchor_to_unregistered_handle_is_storable(self, engine, ada):
        ghost = create_anchor(DOC, 0, 5, validate_handle("RePEc:zz:zz:zz"), "abstract")
        output = engine.create_comment(ada, ghost, "works anyway")
        assert engine.outputs[output.core.output_id] is output


class TestRelationships:
    def test_edge_and_events(self, engine, ada):
        quote = engine.create_quotation(ada, make_anchor(), "key passage")
        before = len(engine.events)
        rel = engine.create_relationship(
            ada,
            OutputRef("micro", quote.core.output_id),
            OutputRef("item", HANDLE),
            "extends",
        )
        assert output_targets(rel)[0].id == quote.core.output_id
        events = engine.events[before:]
        assert len(events) == 1
        assert {ref.id for ref in events[0].used_targets} == {
            quote.core.output_id,
            HANDLE,
        }

    def test_self_loop(self, engine, ada):
        ref = OutputRef("item", HANDLE)
        with pytest.raises(SelfLoop):
            engine.create_relationship(ada, ref, ref, "extends")

    def test_unknown_relation(self, engine, ada):
        quote = engine.create_quotation(ada, make_anchor(), "key passage")
        with pytest.raises(UnknownRelation):
            engine.create_relationship(
                ada, OutputRef("micro", quote.core.output_id), OutputRef("item", HANDLE), "zzz"
            )

    def test_dangling_refs(self, engine, ada):
        with pytest.raises(DanglingRef):
            engine.create_relationship(
                ada, OutputRef("item", "RePEc:no:pe:xx"), OutputRef("item", HANDLE), "extends"
            )
        with pytest.raises(DanglingRef):
            engine.create_relationship(
                ada, OutputRef("micro", "mo-000099"), OutputRef("item", HANDLE), "extends"
            )

    def test_private_output_of_other_person_not_referencable(self, engine, ada):
        grace = engine.register_person("Grace").person_id
        secret = engine.create_comment(grace, make_anchor(), "draft", "private")
        with pytest.raises(DanglingRef):
            engine.create_relationship(
                ada,
                OutputRef("micro", secret.core.output_id),
                OutputRef("item", HANDLE),
                "extends",
            )


class TestVersioning:
    def test_revision_chain(self, engine, ada):
        v1 = engine.create_comment(ada, make_anchor(), "first")
        v2 = engine.revise_output(ada, v1.core.output_id, {"body": "second"})
        v3 = engine.revise_output(ada, v2.core.output_id, {"body": "third"})
        assert (v2.core.version, v3.core.version) == (2, 3)
        assert v2.core.supersedes == v1.core.output_id
        assert v3.core.supersedes == v2.core.output_id
        assert engine.outputs[v1.core.output_id].body == "first"
        # chain is acyclic: walking supersedes terminates
        seen = set()
        cursor = v3.core.output_id
        while cursor is not None:
            assert cursor not in seen
            seen.add(cursor)
            cursor = engine.outputs[cursor].core.supersedes
        assert len(seen) == 3

    def test_latest_version_shown(self, engine, ada):
        v1 = engine.create_comment(ada, make_anchor(), "first")
        v2 = engine.revise_output(ada, v1.core.output_id, {"body": "second"})
        listed = engine.list_outputs_for(HANDLE)
        assert [o.core.output_id for o in listed] == [v2.core.output_id]

    def test_not_owner(self, engine, ada):
        grace = engine.register_person("Grace").person_id
        v1 = engine.create_comment(ada, make_anchor(), "first")
        with pytest.raises(NotOwner):
            engine.revise_output(grace, v1.core.output_id, {"body": "mine now"})

    def test_revising_superseded_version_conflicts(self, engine, ada):
        v1 = engine.create_comment(ada, make_anchor(), "first")
        engine.revise_output(ada, v1.core.output_id, {"body": "second"})
        with pytest.raises(AlreadySuperseded):
            engine.revise_output(ada, v1.core.output_id, {"body": "fork"})

    def test_revision_field_whitelist(self, engine, ada):
        v1 = engine.create_quotation(ada, make_anchor(), "because")
        with pytest.raises(ValidationFailed):
            engine.revise_output(ada, v1.core.output_id, {"body": "nope"})

    def test_revision_event_kind(self, engine, ada):
        v1 = engine.create_comment(ada, make_anchor(), "first")
        engine.revise_output(ada, v1.core.output_id, {"body": "second"})
        assert engine.events[-1].action_kind == "revision"


class TestVisibility:
    def test_private_to_public_allowed(self, engine, ada):
        output = engine.create_comment(ada, make_anchor(), "draft", "private")
        engine.set_visibility(ada, output.core.output_id, "public")
        assert engine.outputs[output.core.output_id].core.visibility == "public"
        assert engine.events[-1].action_kind == "visibility_change"

    def test_public_to_private_forbidden(self, engine, ada):
        output = engine.create_comment(ada, make_anchor(), "said it")
        with pytest.raises(InvalidVisibilityChange):
            engine.set_visibility(ada, output.core.output_id, "private")

    def test_noop_transition_emits_nothing(self, engine, ada):
        output = engine.create_comment(ada, make_anchor(), "said it")
        before = engine.state_dump()
        engine.set_visibility(ada, output.core.output_id, "public")
        assert engine.state_dump() == before

    def test_only_creator_flips(self, engine, ada):
        grace = engine.register_person("Grace").person_id
        output = engine.create_comment(ada, make_anchor(), "draft", "private")
        with pytest.raises(NotOwner):
            engine.set_visibility(grace, output.core.output_id, "public")


class TestListing:
    def test_empty(self, engine):
        assert engine.list_outputs_for(HANDLE) == []

    def test_visibility_filter(self, engine, ada):
        grace = engine.register_person("Grace").person_id
        public = engine.create_comment(ada, make_anchor(), "public note")
        private = engine.create_comment(grace, make_anchor(), "private note", "private")
        seen_by_ada = engine.list_outputs_for(HANDLE, viewer=ada)
        assert [o.core.output_id for o in seen_by_ada] == [public.core.output_id]
        seen_by_grace = engine.list_outputs_for(HANDLE, viewer=grace)
        assert {o.core.output_id for o in seen_by_grace} == {
            public.core.output_id,
            private.core.output_id,
        }

    def test_ordering_by_creation(self, engine, ada):
        first = engine.create_comment(ada, make_anchor(), "one")
        second = engine.create_quotation(ada, make_anchor(), "two")
        assert [o.core.output_id for o in engine.list_outputs_for(HANDLE)] == [
            first.core.output_id,
            second.core.output_id,
        ]

    def test_relationships_listed_on_both_endpoints(self, engine, ada):
        engine.upsert_item(
            {"handle": "RePEc:aa:bb:dd", "title": "Other", "abstract": DOC}
        )
        rel = engine.create_relationship(
            ada, OutputRef("item", HANDLE), OutputRef("item", "RePEc:aa:bb:dd"), "compares-with"
        )
        assert rel in engine.list_outputs_for(HANDLE)
        assert rel in engine.list_outputs_for("RePEc:aa:bb:dd")


def test_reads_stay_consistent_under_concurrent_writes(engine, ada):
    import threading

    from prepub.graph import neighbors_of

    errors = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            try:
                engine.list_outputs_for(HANDLE)
                engine.compute_portrait(ada)
                neighbors_of(engine, ada)
            except Exception as exc:  # any iteration race surfaces here
                errors.append(exc)
                return

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for i in range(300):
        engine.create_comment(ada, make_anchor(), f"burst {i}")
    stop.set()
    for t in threads:
        t.join()
    assert errors == []
    assert len(engine.list_outputs_for(HANDLE)) == 300


def test_event_coupling_invariant(engine, ada):
    engine.create_comment(ada, make_anchor(), "one")
    engine.create_quotation(ada, make_anchor(), "two", "private")
    quote = engine.create_quotation(ada, make_anchor(), "three")
    engine.revise_output(ada, quote.core.output_id, {"comment": "three rev"})
    creation_events = [e for e in engine.events if e.action_kind in
                       ("comment", "assertion", "quotation", "micropaper", "relationship")]
    creations = [o for o in engine.outputs.values() if o.core.version == 1]
    assert len(creation_events) == len(creations)
