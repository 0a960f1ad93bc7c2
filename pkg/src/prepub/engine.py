"""Event-sourced core engine.

Every mutation validates against current state under a single writer lock,
is captured as one JSON log record (assigned ids and timestamps included,
so nothing about a record's effect depends on when it is replayed),
appended durably when file-backed, and then applied to in-memory state by
a pure ``_apply`` handler. Recovery and replay run the same handlers,
which makes rebuild-from-log deterministic by construction.

Notifications are derived state: applying a public usage event fans out to
the owners of the used targets as of that point in the log, excluding the
actor and deduplicating by recipient. Replay never creates duplicates
because fan-out happens exactly once per applied event record.
"""

from __future__ import annotations

import secrets
import threading
import time

from . import __version__
from .anchoring import FragmentAnchor, anchor_from_dict
from .errors import (
    AlreadySuperseded,
    ConflictError,
    DanglingRef,
    DuplicateClaim,
    DuplicateThread,
    EmptyAggregation,
    EmptyField,
    EmptyName,
    InvalidVisibilityChange,
    NotEligible,
    NotOwner,
    NotParticipant,
    NotParty,
    PrivateThread,
    SelfLoop,
    UnknownAggregation,
    UnknownCreator,
    UnknownItem,
    UnknownNotification,
    UnknownOutput,
    UnknownPerson,
    UnknownRelation,
    UnknownThread,
    ValidationFailed,
)
from .handles import Handle, validate_handle
from .models import (
    ACTION_KINDS,
    DEFAULT_TAXONOMY,
    FANOUT_KINDS,
    PRIVATE,
    PUBLIC,
    Aggregation,
    ApiToken,
    AssertionOutput,
    Claim,
    CommentOutput,
    CompetingOffer,
    MicroOutput,
    MicroOutputCore,
    MicroPaperOutput,
    Notification,
    OutputRef,
    PersonProfile,
    QuotationOutput,
    RelationshipOutput,
    ReputationPortrait,
    ScholarlyItem,
    Thread,
    ThreadMessage,
    UsageEvent,
    check_visibility,
    output_as_dict,
    output_from_dict,
    output_targets,
)
from .storage import LogStore

_REVISABLE = {
    "comment": {"body"},
    "assertion": {"statement"},
    "quotation": {"comment"},
    "micropaper": {"title", "body"},
    "relationship": {"comment"},
}

_ID_WIDTH = 6


def _require_text(value, name: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise EmptyField(f"{name} must be a non-empty string")
    return value


class Engine:
    """All registry, micro-output and communication state plus its log."""

    def __init__(self, store: LogStore | None = None, clock=time.time, taxonomy=None, webhook=None):
        self._lock = threading.RLock()
        self._store = store
        self._clock = clock
        self._webhook = webhook
        self.taxonomy = {rt.code: rt for rt in (taxonomy or DEFAULT_TAXONOMY)}
        self._reset_state()

    @classmethod
    def open(cls, directory, **kwargs) -> "Engine":
        """Recover an engine from a storage directory (snapshot + log tail)."""
        store = LogStore(directory)
        engine = cls(store=store, **kwargs)
        snapshot = store.read_snapshot()
        if snapshot is not None:
            last_seq, state = snapshot
            engine.load_state(state)
            engine.seq = last_seq
        for record in store.read_all():
            if record["seq"] > engine.seq:
                engine._apply(record)
                engine.seq = record["seq"]
        return engine

    def close(self) -> None:
        if self._store is not None:
            self._store.close()

    def snapshot(self) -> None:
        """Persist current state so recovery can skip the log prefix."""
        if self._store is None:
            return
        with self._lock:
            self._store.write_snapshot(self.seq, self.state_dump())

    # ------------------------------------------------------------------
    # state, commit and replay machinery
    # ------------------------------------------------------------------

    def _reset_state(self) -> None:
        self.seq = 0
        self.last_record_at = 0.0
        self.items: dict[tuple, ScholarlyItem] = {}
        self.persons: dict[str, PersonProfile] = {}
        self.claims: dict[tuple[str, str], Claim] = {}
        self.tokens: dict[str, ApiToken] = {}
        self.outputs: dict[str, MicroOutput] = {}
        self.superseded_by: dict[str, str] = {}
        self.events: list[UsageEvent] = []
        self.notifications: dict[str, Notification] = {}
        self.threads: dict[str, Thread] = {}
        self.thread_by_notification: dict[str, str] = {}
        self.offers: list[CompetingOffer] = []
        self.aggregations: dict[str, Aggregation] = {}
        self.counters: dict[str, int] = {
            "person": 0,
            "output": 0,
            "thread": 0,
            "notification": 0,
            "offer": 0,
            "aggregation": 0,
            "event": 0,
        }
        self._claimants: dict[tuple, set[str]] = {}
        self._notified: set[tuple[int, str]] = set()

    def _next(self, namespace: str, prefix: str) -> str:
        return f"{prefix}-{self.counters[namespace] + 1:0{_ID_WIDTH}d}"

    def _bump(self, namespace: str, assigned: str) -> None:
        number = int(assigned.rsplit("-", 1)[1])
        if number > self.counters[namespace]:
            self.counters[namespace] = number

    def _commit(self, kind: str, payload: dict) -> list[Notification]:
        """Append one record and apply it. Caller must hold the lock."""
        record = {"seq": self.seq + 1, "kind": kind, "at": self._clock(), **payload}
        if self._store is not None:
            self._store.append(record)
        created = self._apply(record)
        self.seq = record["seq"]
        return created

    def _apply(self, record: dict) -> list[Notification]:
        """Pure state transition; shared by live commits and replay."""
        handler = getattr(self, f"_apply_{record['kind']}")
        self.last_record_at = record["at"]
        return handler(record) or []

    def _dispatch(self, notifications: list[Notification]) -> None:
        if self._webhook is None or not notifications:
            return
        for n in notifications:
            self._webhook.send(self, n, self.get_event(n.event_id))

    # --- apply handlers ---

    def _apply_item_upserted(self, record: dict):
        item = ScholarlyItem.from_dict(record["item"])
        self.items[item.handle.key()] = item

    def _apply_person_registered(self, record: dict):
        person = PersonProfile.from_dict(record["person"])
        self.persons[person.person_id] = person
        self._bump("person", person.person_id)

    def _apply_token_issued(self, record: dict):
        token = ApiToken.from_dict(record["token"])
        self.tokens[token.token] = token

    def _apply_claim_added(self, record: dict):
        claim = Claim.from_dict(record["claim"])
        key = validate_handle(claim.handle).key()
        self.claims[(claim.person_id, claim.handle)] = claim
        self._claimants.setdefault(key, set()).add(claim.person_id)
        self.persons[claim.person_id].claimed.append(claim.handle)

    def _apply_event(self, data: dict) -> list[Notification]:
        event = UsageEvent.from_dict(data)
        self.events.append(event)
        self.counters["event"] = max(self.counters["event"], event.event_id)
        if event.visibility == PUBLIC:
            return self._fan_out(event)
        return []

    def _fan_out(self, event: UsageEvent) -> list[Notification]:
        """One notification per distinct eligible owner of each used target."""
        if event.action_kind not in FANOUT_KINDS:
            return []
        recipients: set[str] = set()
        for ref in event.used_targets:
            if ref.kind == "item":
                recipients |= self.resolve_authors(ref.id)
            else:
                output = self.outputs.get(ref.id)
                if output is not None:
                    recipients.add(output.core.creator)
        recipients.discard(event.actor)
        created = []
        for recipient in sorted(recipients):
            if (event.event_id, recipient) in self._notified:
                continue
            notification = Notification(
                notification_id=self._next("notification", "nt"),
                recipient=recipient,
                event_id=event.event_id,
            )
            self._register_notification(notification)
            created.append(notification)
        return created

    def _register_notification(self, notification: Notification) -> None:
        self.notifications[notification.notification_id] = notification
        self._notified.add((notification.event_id, notification.recipient))
        self._bump("notification", notification.notification_id)

    def _apply_output_created(self, record: dict) -> list[Notification]:
        output = output_from_dict(record["output"])
        self.outputs[output.core.output_id] = output
        self._bump("output", output.core.output_id)
        return self._apply_event(record["event"])

    def _apply_output_revised(self, record: dict) -> list[Notification]:
        output = output_from_dict(record["output"])
        self.outputs[output.core.output_id] = output
        self.superseded_by[output.core.supersedes] = output.core.output_id
        self._bump("output", output.core.output_id)
        return self._apply_event(record["event"])

    def _apply_visibility_changed(self, record: dict) -> list[Notification]:
        output = self.outputs[record["output_id"]]
        output.core.visibility = record["visibility"]
        return self._apply_event(record["event"])

    def _apply_thread_opened(self, record: dict) -> list[Notification]:
        thread = Thread.from_dict(record["thread"])
        self.threads[thread.thread_id] = thread
        self.thread_by_notification[thread.origin_notification] = thread.thread_id
        self._bump("thread", thread.thread_id)
        return self._apply_event(record["event"])

    def _apply_message_posted(self, record: dict) -> list[Notification]:
        thread = self.threads[record["thread_id"]]
        thread.messages.append(ThreadMessage.from_dict(record["message"]))
        return self._apply_event(record["event"])

    def _apply_offer_submitted(self, record: dict) -> list[Notification]:
        offer = CompetingOffer.from_dict(record["offer"])
        self.offers.append(offer)
        self._bump("offer", offer.offer_id)
        thread = self.threads[offer.thread_id]
        if offer.challenger not in thread.participants:
            thread.participants.append(offer.challenger)
        created = self._apply_event(record["event"])
        recipient = record["recipient"]
        event_id = record["event"]["event_id"]
        if (event_id, recipient) not in self._notified:
            notification = Notification(
                notification_id=self._next("notification", "nt"),
                recipient=recipient,
                event_id=event_id,
            )
            self._register_notification(notification)
            created.append(notification)
        return created

    def _apply_notification_read(self, record: dict):
        self.notifications[record["notification_id"]].state = "read"

    def _apply_notification_delivered(self, record: dict):
        notification = self.notifications[record["notification_id"]]
        if notification.state == "pending":
            notification.state = "delivered"
            notification.delivered_via = record["via"]

    def _apply_aggregation_compiled(self, record: dict):
        aggregation = Aggregation.from_dict(record["aggregation"])
        self.aggregations[aggregation.aggregation_id] = aggregation
        self._bump("aggregation", aggregation.aggregation_id)

    # ------------------------------------------------------------------
    # registry
    # ------------------------------------------------------------------

    def upsert_item(self, item: ScholarlyItem | dict) -> str:
        if isinstance(item, dict):
            item = ScholarlyItem.from_dict(item)
        if not item.title.strip():
            raise ValidationFailed("item title must be non-empty")
        if item.kind not in ("paper", "article", "book", "chapter", "software"):
            raise ValidationFailed(f"unknown item kind {item.kind!r}")
        with self._lock:
            existing = self.items.get(item.handle.key())
            if existing == item:
                return "unchanged"
            self._commit("item_upserted", {"item": item.as_dict()})
            return "updated" if existing is not None else "created"

    def get_item(self, handle: str | Handle) -> ScholarlyItem:
        handle = handle if isinstance(handle, Handle) else validate_handle(handle)
        item = self.items.get(handle.key())
        if item is None:
            raise UnknownItem(f"no item with handle {handle.raw}")
        return item

    def list_items(self, limit: int | None = None, offset: int = 0) -> list[ScholarlyItem]:
        items = list(self.items.values())[offset:]
        return items if limit is None else items[:limit]

    def register_person(
        self, name: str, contact: str | None = None, affiliation: str | None = None
    ) -> PersonProfile:
        if not isinstance(name, str) or not name.strip():
            raise EmptyName("person name must be non-empty")
        with self._lock:
            person = PersonProfile(
                person_id=self._next("person", "pe"),
                display_name=name,
                contact=contact,
                affiliation=affiliation,
            )
            self._commit("person_registered", {"person": person.as_dict()})
            return person

    def get_person(self, person_id: str) -> PersonProfile:
        person = self.persons.get(person_id)
        if person is None:
            raise UnknownPerson(f"no person {person_id}")
        return person

    def issue_token(self, person_id: str, token: str | None = None) -> ApiToken:
        with self._lock:
            self.get_person(person_id)
            token = token or secrets.token_hex(16)
            if token in self.tokens:
                raise ConflictError("token already issued")
            record = ApiToken(token=token, person_id=person_id, issued_at=self._clock())
            self._commit("token_issued", {"token": record.as_dict()})
            return record

    def authenticate(self, token: str | None) -> str | None:
        if not token:
            return None
        record = self.tokens.get(token)
        return record.person_id if record else None

    def claim_work(self, person_id: str, handle: str | Handle) -> Claim:
        with self._lock:
            self.get_person(person_id)
            item = self.get_item(handle)
            raw = item.handle.raw
            if (person_id, raw) in self.claims:
                raise DuplicateClaim(f"{person_id} already claimed {raw}")
            claim = Claim(person_id=person_id, handle=raw, claimed_at=self._clock())
            self._commit("claim_added", {"claim": claim.as_dict()})
            return claim

    def resolve_authors(self, handle: str | Handle) -> set[str]:
        """Persons with claims on the handle; empty set when unknown."""
        try:
            handle = handle if isinstance(handle, Handle) else validate_handle(handle)
        except ValidationFailed:
            return set()
        return set(self._claimants.get(handle.key(), ()))

    # ------------------------------------------------------------------
    # micro outputs
    # ------------------------------------------------------------------

    def _coerce_anchor(self, anchor) -> FragmentAnchor:
        if isinstance(anchor, FragmentAnchor):
            return anchor_from_dict(anchor.as_dict())
        return anchor_from_dict(anchor)

    def _coerce_ref(self, ref) -> OutputRef:
        data = ref.as_dict() if isinstance(ref, OutputRef) else ref
        return OutputRef.from_dict(data)

    def _require_creator(self, creator: str) -> None:
        if creator not in self.persons:
            raise UnknownCreator(f"no person {creator}")

    def _resolve_ref(self, ref: OutputRef, viewer: str | None = None) -> None:
        """Raise DanglingRef unless the ref points at a visible entity."""
        if ref.kind == "item":
            if validate_handle(ref.id).key() not in self.items:
                raise DanglingRef(f"unknown item {ref.id}")
        else:
            output = self.outputs.get(ref.id)
            if output is None:
                raise DanglingRef(f"unknown output {ref.id}")
            if output.core.visibility == PRIVATE and output.core.creator != viewer:
                raise DanglingRef(f"output {ref.id} is not visible")

    def _new_core(self, creator: str, visibility: str) -> MicroOutputCore:
        return MicroOutputCore(
            output_id=self._next("output", "mo"),
            creator=creator,
            created_at=self._clock(),
            visibility=check_visibility(visibility),
        )

    def _store_output(self, output: MicroOutput) -> MicroOutput:
        event = UsageEvent(
            event_id=self.counters["event"] + 1,
            actor=output.core.creator,
            action_kind=output.kind,
            output_id=output.core.output_id,
            used_targets=output_targets(output),
            at=output.core.created_at,
            visibility=output.core.visibility,
        )
        created = self._commit(
            "output_created",
            {"output": output_as_dict(output), "event": event.as_dict()},
        )
        self._dispatch(created)
        return self.outputs[output.core.output_id]

    def create_comment(self, creator, anchor, body, visibility=PUBLIC) -> CommentOutput:
        with self._lock:
            self._require_creator(creator)
            anchor = self._coerce_anchor(anchor)
            _require_text(body, "body")
            output = CommentOutput(self._new_core(creator, visibility), anchor, body)
            return self._store_output(output)

    def create_assertion(
        self, creator, anchor, statement, pubinfo=None, visibility=PUBLIC
    ) -> AssertionOutput:
        with self._lock:
            self._require_creator(creator)
            anchor = self._coerce_anchor(anchor)
            statement = self._check_statement(statement)
            pubinfo = dict(pubinfo or {})
            pubinfo.setdefault("license", "CC-BY-4.0")
            pubinfo.setdefault("generator", f"prepub {__version__}")
            core = self._new_core(creator, visibility)
            provenance = {
                "derived_from": anchor.as_dict(),
                "asserted_by": creator,
                "asserted_at": core.created_at,
            }
            output = AssertionOutput(core, anchor, statement, provenance, pubinfo)
            return self._store_output(output)

    @staticmethod
    def _check_statement(statement) -> dict:
        if isinstance(statement, (tuple, list)) and len(statement) == 3:
            statement = dict(zip(("subject", "predicate", "object"), statement))
        if not isinstance(statement, dict):
            raise ValidationFailed("statement must be a subject/predicate/object triple")
        triple = {}
        for part in ("subject", "predicate", "object"):
            triple[part] = _require_text(statement.get(part), f"statement {part}")
        return triple

    def create_quotation(self, creator, anchor, comment, visibility=PUBLIC) -> QuotationOutput:
        with self._lock:
            self._require_creator(creator)
            anchor = self._coerce_anchor(anchor)
            _require_text(comment, "comment")
            output = QuotationOutput(self._new_core(creator, visibility), anchor, comment)
            return self._store_output(output)

    def create_micropaper(
        self, creator, base_anchor, title, body, visibility=PUBLIC
    ) -> MicroPaperOutput:
        with self._lock:
            self._require_creator(creator)
            base_anchor = self._coerce_anchor(base_anchor)
            _require_text(title, "title")
            if len(title) > 300:
                raise ValidationFailed("title must be at most 300 characters")
            _require_text(body, "body")
            output = MicroPaperOutput(
                self._new_core(creator, visibility), base_anchor, title, body
            )
            return self._store_output(output)

    def create_relationship(
        self, creator, from_ref, to_ref, relation, comment=None, visibility=PUBLIC
    ) -> RelationshipOutput:
        with self._lock:
            self._require_creator(creator)
            from_ref = self._coerce_ref(from_ref)
            to_ref = self._coerce_ref(to_ref)
            if from_ref.identity() == to_ref.identity():
                raise SelfLoop("relationship endpoints must differ")
            if relation not in self.taxonomy:
                raise UnknownRelation(f"relation {relation!r} is not in the taxonomy")
            self._resolve_ref(from_ref, viewer=creator)
            self._resolve_ref(to_ref, viewer=creator)
            if comment is not None:
                _require_text(comment, "comment")
            output = RelationshipOutput(
                self._new_core(creator, visibility), from_ref, to_ref, relation, comment
            )
            return self._store_output(output)

    def get_output(self, output_id: str) -> MicroOutput:
        output = self.outputs.get(output_id)
        if output is None:
            raise UnknownOutput(f"no output {output_id}")
        return output

    def revise_output(self, creator: str, output_id: str, new_content: dict) -> MicroOutput:
        with self._lock:
            old = self.get_output(output_id)
            if old.core.creator != creator:
                raise NotOwner("only the original creator can revise an output")
            if output_id in self.superseded_by:
                raise AlreadySuperseded(f"{output_id} was superseded; revise the newest version")
            allowed = _REVISABLE[old.kind]
            unknown = set(new_content) - allowed
            if unknown:
                raise ValidationFailed(f"fields {sorted(unknown)} cannot be revised on a {old.kind}")
            if not new_content:
                raise ValidationFailed("revision must change at least one field")

            data = output_as_dict(old)
            for key, value in new_content.items():
                if key == "statement":
                    value = self._check_statement(value)
                elif key == "title":
                    _require_text(value, "title")
                    if len(value) > 300:
                        raise ValidationFailed("title must be at most 300 characters")
                else:
                    _require_text(value, key)
                data[key] = value
            data["output_id"] = self._next("output", "mo")
            data["version"] = old.core.version + 1
            data["supersedes"] = output_id
            data["created_at"] = self._clock()
            revised = output_from_dict(data)

            event = UsageEvent(
                event_id=self.counters["event"] + 1,
                actor=creator,
                action_kind="revision",
                output_id=revised.core.output_id,
                used_targets=output_targets(revised),
                at=revised.core.created_at,
                visibility=revised.core.visibility,
            )
            created = self._commit(
                "output_revised",
                {"output": output_as_dict(revised), "event": event.as_dict()},
            )
            self._dispatch(created)
            return self.outputs[revised.core.output_id]

    def set_visibility(self, actor: str, output_id: str, visibility: str) -> MicroOutput:
        with self._lock:
            output = self.get_output(output_id)
            if output.core.creator != actor:
                raise NotOwner("only the creator can change visibility")
            check_visibility(visibility)
            if visibility == output.core.visibility:
                return output
            if visibility == PRIVATE:
                raise InvalidVisibilityChange("a public output cannot become private")
            event = UsageEvent(
                event_id=self.counters["event"] + 1,
                actor=actor,
                action_kind="visibility_change",
                output_id=output_id,
                used_targets=output_targets(output),
                at=self._clock(),
                visibility=PUBLIC,
            )
            created = self._commit(
                "visibility_changed",
                {"output_id": output_id, "visibility": PUBLIC, "event": event.as_dict()},
            )
            self._dispatch(created)
            return output

    def is_head(self, output_id: str) -> bool:
        return output_id not in self.superseded_by

    def visible_to(self, output: MicroOutput, viewer: str | None) -> bool:
        return output.core.visibility == PUBLIC or output.core.creator == viewer

    def list_outputs_for(self, target: str | Handle, viewer: str | None = None) -> list[MicroOutput]:
        """Newest versions linked to an item, public plus the viewer's own."""
        handle = target if isinstance(target, Handle) else validate_handle(target)
        ref_identity = ("item", handle.raw)
        found = []
        with self._lock:  # writers resize these dicts; reads need a stable view
            for output_id, output in self.outputs.items():
                if not self.is_head(output_id) or not self.visible_to(output, viewer):
                    continue
                if any(ref.identity() == ref_identity for ref in output_targets(output)):
                    found.append(output)
        found.sort(key=lambda o: (o.core.created_at, o.core.output_id))
        return found

    # ------------------------------------------------------------------
    # communication
    # ------------------------------------------------------------------

    def get_event(self, event_id: int) -> UsageEvent:
        if 1 <= event_id <= len(self.events):
            event = self.events[event_id - 1]
            if event.event_id == event_id:
                return event
        for event in self.events:
            if event.event_id == event_id:
                return event
        raise ValidationFailed(f"no event {event_id}")

    def open_thread(
        self, notification_id: str, opener: str, first_message: str, visibility: str = PUBLIC
    ) -> Thread:
        with self._lock:
            notification = self.notifications.get(notification_id)
            if notification is None:
                raise UnknownNotification(f"no notification {notification_id}")
            event = self.get_event(notification.event_id)
            if opener not in (notification.recipient, event.actor):
                raise NotParty("only the notified author or the acting user can open this thread")
            if notification_id in self.thread_by_notification:
                raise DuplicateThread(f"notification {notification_id} already has a thread")
            _require_text(first_message, "message")
            check_visibility(visibility)
            now = self._clock()
            thread = Thread(
                thread_id=self._next("thread", "th"),
                origin_event=event.event_id,
                origin_notification=notification_id,
                participants=[event.actor, notification.recipient],
                messages=[ThreadMessage(author=opener, body=first_message, at=now)],
                visibility=visibility,
            )
            message_event = UsageEvent(
                event_id=self.counters["event"] + 1,
                actor=opener,
                action_kind="message",
                output_id=None,
                used_targets=[],
                at=now,
                visibility=visibility,
            )
            self._commit(
                "thread_opened",
                {"thread": thread.as_dict(), "event": message_event.as_dict()},
            )
            return self.threads[thread.thread_id]

    def get_thread(self, thread_id: str) -> Thread:
        thread = self.threads.get(thread_id)
        if thread is None:
            raise UnknownThread(f"no thread {thread_id}")
        return thread

    def list_threads(self, person_id: str) -> list[Thread]:
        self.get_person(person_id)
        with self._lock:
            return [t for t in self.threads.values() if person_id in t.participants]

    def post_message(
        self, thread_id: str, author: str, body: str, attached_output: str | None = None
    ) -> Thread:
        with self._lock:
            thread = self.get_thread(thread_id)
            if author not in thread.participants:
                raise NotParticipant("only participants can post; challengers join via offers")
            _require_text(body, "message")
            if attached_output is not None:
                output = self.outputs.get(attached_output)
                if output is None:
                    raise DanglingRef(f"unknown output {attached_output}")
                if not self.visible_to(output, author):
                    raise DanglingRef(f"output {attached_output} is not visible")
            now = self._clock()
            message = ThreadMessage(author=author, body=body, at=now, attached_output=attached_output)
            event = UsageEvent(
                event_id=self.counters["event"] + 1,
                actor=author,
                action_kind="message",
                output_id=attached_output,
                used_targets=[],
                at=now,
                visibility=thread.visibility,
            )
            self._commit(
                "message_posted",
                {"thread_id": thread_id, "message": message.as_dict(), "event": event.as_dict()},
            )
            return self.threads[thread_id]

    def submit_offer(self, thread_id: str, challenger: str, offered, note: str = "") -> CompetingOffer:
        with self._lock:
            thread = self.get_thread(thread_id)
            if thread.visibility != PUBLIC:
                raise PrivateThread("offers are only possible on public threads")
            self.get_person(challenger)
            if challenger in thread.participants[:2]:
                raise NotEligible("original participants cannot compete on their own thread")
            offered = self._coerce_ref(offered)
            self._resolve_ref(offered, viewer=challenger)
            now = self._clock()
            offer = CompetingOffer(
                offer_id=self._next("offer", "of"),
                thread_id=thread_id,
                challenger=challenger,
                offered=offered,
                note=note,
                at=now,
                event_id=self.counters["event"] + 1,
            )
            event = UsageEvent(
                event_id=self.counters["event"] + 1,
                actor=challenger,
                action_kind="message",
                output_id=None,
                used_targets=[],
                at=now,
                visibility=PUBLIC,
            )
            created = self._commit(
                "offer_submitted",
                {
                    "offer": offer.as_dict(),
                    "event": event.as_dict(),
                    "recipient": thread.participants[0],
                },
            )
            self._dispatch(created)
            return offer

    def list_inbox(self, person_id: str, state: str | None = None) -> list[Notification]:
        self.get_person(person_id)
        with self._lock:
            inbox = [n for n in self.notifications.values() if n.recipient == person_id]
        if state is not None:
            inbox = [n for n in inbox if n.state == state]
        inbox.sort(key=lambda n: n.notification_id, reverse=True)
        return inbox

    def mark_read(self, person_id: str, notification_id: str) -> Notification:
        with self._lock:
            notification = self.notifications.get(notification_id)
            if notification is None:
                raise UnknownNotification(f"no notification {notification_id}")
            if notification.recipient != person_id:
                raise NotOwner("not your notification")
            if notification.state != "read":
                self._commit("notification_read", {"notification_id": notification_id})
            return self.notifications[notification_id]

    def mark_delivered(self, notification_id: str, via: str) -> None:
        with self._lock:
            if notification_id in self.notifications:
                self._commit("notification_delivered", {"notification_id": notification_id, "via": via})

    def compute_portrait(self, person_id: str, include_private: bool = False) -> ReputationPortrait:
        """Deterministic fold over events, notifications, threads and offers."""
        self.get_person(person_id)
        with self._lock:
            return self._portrait_fold(person_id, include_private)

    def _portrait_fold(self, person_id: str, include_private: bool) -> ReputationPortrait:
        created = {kind: 0 for kind in ACTION_KINDS}
        private_created = {kind: 0 for kind in ACTION_KINDS}
        for event in self.events:
            if event.actor != person_id:
                continue
            if event.visibility == PUBLIC:
                created[event.action_kind] += 1
            else:
                private_created[event.action_kind] += 1

        events_by_id = {e.event_id: e for e in self.events}
        received_usage = 0
        received_total = 0
        responded = 0
        for notification in self.notifications.values():
            if notification.recipient != person_id:
                continue
            received_total += 1
            if events_by_id[notification.event_id].action_kind in FANOUT_KINDS:
                received_usage += 1
            thread_id = self.thread_by_notification.get(notification.notification_id)
            if thread_id is not None:
                thread = self.threads[thread_id]
                if any(m.author == person_id for m in thread.messages):
                    responded += 1

        return ReputationPortrait(
            person_id=person_id,
            created_counts=created,
            received_usage_count=received_usage,
            notifications_responded=responded,
            notifications_received=received_total,
            threads_joined=sum(1 for t in self.threads.values() if person_id in t.participants),
            offers_made=sum(1 for o in self.offers if o.challenger == person_id),
            computed_at=self.last_record_at,
            private_created_counts=private_created if include_private else None,
        )

    # ------------------------------------------------------------------
    # aggregations
    # ------------------------------------------------------------------

    def compile_aggregation(self, editor: str, title: str, members: list) -> Aggregation:
        with self._lock:
            self.get_person(editor)
            _require_text(title, "title")
            if not members:
                raise EmptyAggregation("an aggregation needs at least one member")
            refs = [self._coerce_ref(m) for m in members]
            for ref in refs:
                self._resolve_ref(ref, viewer=editor)
            identities = {ref.identity() for ref in refs}
            edges = [
                output_id
                for output_id, output in sorted(self.outputs.items())
                if isinstance(output, RelationshipOutput)
                and self.is_head(output_id)
                and self.visible_to(output, editor)
                and output.from_ref.identity() in identities
                and output.to_ref.identity() in identities
            ]
            aggregation = Aggregation(
                aggregation_id=self._next("aggregation", "ag"),
                title=title,
                editor=editor,
                members=refs,
                edges=edges,
                compiled_at=self._clock(),
            )
            self._commit("aggregation_compiled", {"aggregation": aggregation.as_dict()})
            return self.aggregations[aggregation.aggregation_id]

    def get_aggregation(self, aggregation_id: str) -> Aggregation:
        aggregation = self.aggregations.get(aggregation_id)
        if aggregation is None:
            raise UnknownAggregation(f"no aggregation {aggregation_id}")
        return aggregation

    # ------------------------------------------------------------------
    # state dump / restore
    # ------------------------------------------------------------------

    def state_dump(self) -> dict:
        """Full JSON-compatible state; equality means byte-identical dumps."""
        return {
            "items": [i.as_dict() for i in self.items.values()],
            "persons": [p.as_dict() for p in self.persons.values()],
            "claims": [c.as_dict() for c in self.claims.values()],
            "tokens": [t.as_dict() for t in self.tokens.values()],
            "outputs": [output_as_dict(o) for o in self.outputs.values()],
            "events": [e.as_dict() for e in self.events],
            "notifications": [n.as_dict() for n in self.notifications.values()],
            "threads": [t.as_dict() for t in self.threads.values()],
            "offers": [o.as_dict() for o in self.offers],
            "aggregations": [a.as_dict() for a in self.aggregations.values()],
            "counters": dict(self.counters),
            "last_record_at": self.last_record_at,
        }

    def load_state(self, dump: dict) -> None:
        self._reset_state()
        for data in dump["items"]:
            item = ScholarlyItem.from_dict(data)
            self.items[item.handle.key()] = item
        for data in dump["persons"]:
            person = PersonProfile.from_dict(data)
            person.claimed = []
            self.persons[person.person_id] = person
            self._bump("person", person.person_id)
        for data in dump["claims"]:
            claim = Claim.from_dict(data)
            self.claims[(claim.person_id, claim.handle)] = claim
            self._claimants.setdefault(validate_handle(claim.handle).key(), set()).add(
                claim.person_id
            )
            self.persons[claim.person_id].claimed.append(claim.handle)
        for data in dump["tokens"]:
            token = ApiToken.from_dict(data)
            self.tokens[token.token] = token
        for data in dump["outputs"]:
            output = output_from_dict(data)
            self.outputs[output.core.output_id] = output
            if output.core.supersedes:
                self.superseded_by[output.core.supersedes] = output.core.output_id
            self._bump("output", output.core.output_id)
        for data in dump["events"]:
            event = UsageEvent.from_dict(data)
            self.events.append(event)
            self.counters["event"] = max(self.counters["event"], event.event_id)
        for data in dump["notifications"]:
            self._register_notification(Notification.from_dict(data))
        for data in dump["threads"]:
            thread = Thread.from_dict(data)
            self.threads[thread.thread_id] = thread
            self.thread_by_notification[thread.origin_notification] = thread.thread_id
            self._bump("thread", thread.thread_id)
        for data in dump["offers"]:
            offer = CompetingOffer.from_dict(data)
            self.offers.append(offer)
            self._bump("offer", offer.offer_id)
        for data in dump["aggregations"]:
            aggregation = Aggregation.from_dict(data)
            self.aggregations[aggregation.aggregation_id] = aggregation
            self._bump("aggregation", aggregation.aggregation_id)
        self.counters.update(dump["counters"])
        self.last_record_at = dump["last_record_at"]
