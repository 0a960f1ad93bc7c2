"""Randomized small worlds driven through the public engine API.

The builder performs only operations that are valid at the moment they
run, but deliberately covers the awkward corners: self-citations, private
outputs later made public, multi-claimant items, revisions, threads,
competing offers and anchors into items that were never harvested.
"""

from __future__ import annotations

import random

from prepub.anchoring import create_anchor
from prepub.engine import Engine
from prepub.handles import validate_handle
from prepub.models import PRIVATE, PUBLIC, OutputRef


class FakeClock:
    def __init__(self, start: float = 1_700_000_000.0, step: float = 1.0):
        self.now = start
        self.step = step

    def __call__(self) -> float:
        self.now += self.step
        return self.now


WORDS = "research data method result model theory sample survey economy market".split()


def make_abstract(rng: random.Random, n_words: int = 30) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n_words))


def build_world(
    rng: random.Random,
    engine: Engine,
    n_persons: int = 6,
    n_items: int = 5,
    n_actions: int = 25,
    private_ratio: float = 0.3,
) -> None:
    persons = [engine.register_person(f"Person {i}").person_id for i in range(n_persons)]
    handles = []
    for i in range(n_items):
        handle = f"RePEc:gen:wp:{i:03d}"
        engine.upsert_item(
            {
                "handle": handle,
                "title": f"Working paper {i}",
                "kind": "paper",
                "abstract": make_abstract(rng),
                "author_names": [],
                "archive_code": "gen",
            }
        )
        handles.append(validate_handle(handle).raw)
        for person in rng.sample(persons, k=rng.randint(0, min(3, n_persons))):
            engine.claim_work(person, handle)

    def random_anchor(creator: str):
        handle = rng.choice(handles + ["RePEc:gen:ghost:999"])  # sometimes unregistered
        if handle in handles:
            doc = engine.get_item(handle).abstract
        else:
            doc = make_abstract(rng)
        start = rng.randint(0, len(doc) - 10)
        end = start + rng.randint(3, min(15, len(doc) - start))
        return create_anchor(doc, start, end, validate_handle(handle), "abstract")

    def visibility() -> str:
        return PRIVATE if rng.random() < private_ratio else PUBLIC

    def micro_heads() -> list[str]:
        return [oid for oid in engine.outputs if engine.is_head(oid)]

    def random_ref(viewer: str) -> OutputRef | None:
        candidates: list[OutputRef] = [OutputRef("item", h) for h in handles]
        for oid in micro_heads():
            output = engine.outputs[oid]
            if engine.visible_to(output, viewer):
                candidates.append(OutputRef("micro", oid))
        return rng.choice(candidates) if candidates else None

    for _ in range(n_actions):
        actor = rng.choice(persons)
        action = rng.choice(
            ["comment", "assertion", "quotation", "micropaper", "relationship",
             "revise", "publish", "thread", "message", "offer"]
        )
        if action == "comment":
            engine.create_comment(actor, random_anchor(actor), "useful point", visibility())
        elif action == "assertion":
            engine.create_assertion(
                actor,
                random_anchor(actor),
                ("x", "relates-to", "y"),
                visibility=visibility(),
            )
        elif action == "quotation":
            engine.create_quotation(actor, random_anchor(actor), "worth keeping", visibility())
        elif action == "micropaper":
            engine.create_micropaper(
                actor, random_anchor(actor), "micro note", "small result", visibility()
            )
        elif action == "relationship":
            a, b = random_ref(actor), random_ref(actor)
            if a is None or b is None or a.identity() == b.identity():
                continue
            engine.create_relationship(actor, a, b, "extends", visibility=visibility())
        elif action == "revise":
            own = [
                oid
                for oid in micro_heads()
                if engine.outputs[oid].core.creator == actor
                and engine.outputs[oid].kind in ("comment", "quotation")
            ]
            if own:
                oid = rng.choice(own)
                kind = engine.outputs[oid].kind
                field = "body" if kind == "comment" else "comment"
                engine.revise_output(actor, oid, {field: "clarified"})
        elif action == "publish":
            own_private = [
                oid
                for oid in micro_heads()
                if engine.outputs[oid].core.creator == actor
                and engine.outputs[oid].core.visibility == PRIVATE
            ]
            if own_private:
                engine.set_visibility(actor, rng.choice(own_private), PUBLIC)
        elif action == "thread":
            fresh = [
                n
                for n in engine.notifications.values()
                if n.recipient == actor
                and n.notification_id not in engine.thread_by_notification
            ]
            if fresh:
                engine.open_thread(rng.choice(fresh).notification_id, actor, "how was this used?")
        elif action == "message":
            joined = [t for t in engine.threads.values() if actor in t.participants]
            if joined:
                engine.post_message(rng.choice(joined).thread_id, actor, "following up")
        elif action == "offer":
            open_threads = [
                t
                for t in engine.threads.values()
                if t.visibility == PUBLIC and actor not in t.participants[:2]
            ]
            if open_threads:
                thread = rng.choice(open_threads)
                ref = random_ref(actor)
                if ref is not None:
                    engine.submit_offer(thread.thread_id, actor, ref, "try mine instead")
