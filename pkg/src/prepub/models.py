"""Domain records shared by the engine, the graph views and the HTTP facade.

Each record knows how to round-trip through plain JSON-compatible dicts;
the append-only log and the wire formats both use these shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .anchoring import FragmentAnchor, anchor_from_dict
from .errors import ValidationFailed
from .handles import Handle, validate_handle

PUBLIC = "public"
PRIVATE = "private"
VISIBILITIES = (PUBLIC, PRIVATE)

ITEM_KINDS = ("paper", "article", "book", "chapter", "software")

OUTPUT_KINDS = ("comment", "assertion", "quotation", "micropaper", "relationship")

ACTION_KINDS = OUTPUT_KINDS + ("revision", "visibility_change", "message")

# Creation-grade actions whose public events notify the used targets' owners.
FANOUT_KINDS = OUTPUT_KINDS + ("revision", "visibility_change")


def check_visibility(value: str) -> str:
    if value not in VISIBILITIES:
        raise ValidationFailed(f"visibility must be one of {VISIBILITIES}, got {value!r}")
    return value


# --- registry ----------------------------------------------------------------


@dataclass
class ScholarlyItem:
    handle: Handle
    title: str
    kind: str = "paper"
    abstract: str | None = None
    fulltext: str | None = None
    author_names: list[str] = field(default_factory=list)
    archive_code: str = ""

    def text_for(self, source: str) -> str | None:
        return self.abstract if source == "abstract" else self.fulltext

    def as_dict(self) -> dict:
        return {
            "handle": self.handle.raw,
            "title": self.title,
            "kind": self.kind,
            "abstract": self.abstract,
            "fulltext": self.fulltext,
            "author_names": list(self.author_names),
            "archive_code": self.archive_code,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScholarlyItem":
        return cls(
            handle=validate_handle(data["handle"]),
            title=data["title"],
            kind=data.get("kind", "paper"),
            abstract=data.get("abstract"),
            fulltext=data.get("fulltext"),
            author_names=list(data.get("author_names", [])),
            archive_code=data.get("archive_code", ""),
        )


@dataclass
class PersonProfile:
    person_id: str
    display_name: str
    contact: str | None = None
    affiliation: str | None = None
    claimed: list[str] = field(default_factory=list)  # normalized handle raws, claim order

    def as_dict(self) -> dict:
        return {
            "person_id": self.person_id,
            "display_name": self.display_name,
            "contact": self.contact,
            "affiliation": self.affiliation,
            "claimed": list(self.claimed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PersonProfile":
        return cls(
            person_id=data["person_id"],
            display_name=data["display_name"],
            contact=data.get("contact"),
            affiliation=data.get("affiliation"),
            claimed=list(data.get("claimed", [])),
        )


@dataclass(frozen=True)
class Claim:
    person_id: str
    handle: str  # normalized raw
    claimed_at: float

    def as_dict(self) -> dict:
        return {"person_id": self.person_id, "handle": self.handle, "claimed_at": self.claimed_at}

    @classmethod
    def from_dict(cls, data: dict) -> "Claim":
        return cls(data["person_id"], data["handle"], data["claimed_at"])


@dataclass(frozen=True)
class ApiToken:
    token: str
    person_id: str
    issued_at: float

    def as_dict(self) -> dict:
        return {"token": self.token, "person_id": self.person_id, "issued_at": self.issued_at}

    @classmethod
    def from_dict(cls, data: dict) -> "ApiToken":
        return cls(data["token"], data["person_id"], data["issued_at"])


# --- micro outputs -----------------------------------------------------------


@dataclass(frozen=True)
class OutputRef:
    kind: str  # "item" | "micro"
    id: str  # normalized handle raw, or output id
    sub_anchor: FragmentAnchor | None = None

    def identity(self) -> tuple[str, str]:
        return (self.kind, self.id)

    def as_dict(self) -> dict:
        data = {"kind": self.kind, "id": self.id}
        if self.sub_anchor is not None:
            data["sub_anchor"] = self.sub_anchor.as_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "OutputRef":
        kind = data.get("kind")
        if kind not in ("item", "micro"):
            raise ValidationFailed(f"ref kind must be 'item' or 'micro', got {kind!r}")
        ref_id = data.get("id")
        if not isinstance(ref_id, str) or not ref_id:
            raise ValidationFailed("ref id must be a non-empty string")
        if kind == "item":
            ref_id = validate_handle(ref_id).raw
        sub = data.get("sub_anchor")
        return cls(kind, ref_id, anchor_from_dict(sub) if sub else None)


@dataclass(frozen=True)
class RelationType:
    code: str
    label: str
    directed: bool = True


# Starter taxonomy; loadable/overridable through engine configuration.
DEFAULT_TAXONOMY = (
    RelationType("uses-method", "uses the method of"),
    RelationType("uses-data", "uses the data of"),
    RelationType("confirms", "confirms"),
    RelationType("refutes", "refutes"),
    RelationType("extends", "extends"),
    RelationType("generalizes", "generalizes"),
    RelationType("is-part-of", "is part of"),
    RelationType("compares-with", "compares with"),
    RelationType("alternative-to", "is an alternative to"),
)


@dataclass
class MicroOutputCore:
    output_id: str
    creator: str
    created_at: float
    visibility: str = PUBLIC
    version: int = 1
    supersedes: str | None = None

    def as_dict(self) -> dict:
        return {
            "output_id": self.output_id,
            "creator": self.creator,
            "created_at": self.created_at,
            "visibility": self.visibility,
            "version": self.version,
            "supersedes": self.supersedes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MicroOutputCore":
        return cls(
            output_id=data["output_id"],
            creator=data["creator"],
            created_at=data["created_at"],
            visibility=data["visibility"],
            version=data["version"],
            supersedes=data.get("supersedes"),
        )


@dataclass
class CommentOutput:
    core: MicroOutputCore
    anchor: FragmentAnchor
    body: str

    kind = "comment"


@dataclass
class AssertionOutput:
    core: MicroOutputCore
    anchor: FragmentAnchor
    statement: dict  # {subject, predicate, object}
    provenance: dict  # {derived_from, asserted_by, asserted_at}
    pubinfo: dict  # {license, generator}

    kind = "assertion"


@dataclass
class QuotationOutput:
    core: MicroOutputCore
    anchor: FragmentAnchor
    comment: str

    kind = "quotation"


@dataclass
class MicroPaperOutput:
    core: MicroOutputCore
    base_anchor: FragmentAnchor
    title: str
    body: str

    kind = "micropaper"


@dataclass
class RelationshipOutput:
    core: MicroOutputCore
    from_ref: OutputRef
    to_ref: OutputRef
    relation: str
    comment: str | None = None

    kind = "relationship"


MicroOutput = (
    CommentOutput | AssertionOutput | QuotationOutput | MicroPaperOutput | RelationshipOutput
)


def output_targets(output: MicroOutput) -> list[OutputRef]:
    """Distinct targets an output uses, in reference order."""
    if isinstance(output, RelationshipOutput):
        targets = [output.from_ref]
        if output.to_ref.identity() != output.from_ref.identity():
            targets.append(output.to_ref)
        return targets
    anchor = output.base_anchor if isinstance(output, MicroPaperOutput) else output.anchor
    return [OutputRef("item", anchor.target.raw)]


def output_as_dict(output: MicroOutput) -> dict:
    data = output.core.as_dict()
    data["kind"] = output.kind
    if isinstance(output, CommentOutput):
        data.update(anchor=output.anchor.as_dict(), body=output.body)
    elif isinstance(output, AssertionOutput):
        data.update(
            anchor=output.anchor.as_dict(),
            statement=dict(output.statement),
            provenance=dict(output.provenance),
            pubinfo=dict(output.pubinfo),
        )
    elif isinstance(output, QuotationOutput):
        data.update(anchor=output.anchor.as_dict(), comment=output.comment)
    elif isinstance(output, MicroPaperOutput):
        data.update(
            base_anchor=output.base_anchor.as_dict(), title=output.title, body=output.body
        )
    elif isinstance(output, RelationshipOutput):
        data.update(
            from_ref=output.from_ref.as_dict(),
            to_ref=output.to_ref.as_dict(),
            relation=output.relation,
            comment=output.comment,
        )
    return data


def output_from_dict(data: dict) -> MicroOutput:
    core = MicroOutputCore.from_dict(data)
    kind = data["kind"]
    if kind == "comment":
        return CommentOutput(core, anchor_from_dict(data["anchor"]), data["body"])
    if kind == "assertion":
        return AssertionOutput(
            core,
            anchor_from_dict(data["anchor"]),
            dict(data["statement"]),
            dict(data["provenance"]),
            dict(data["pubinfo"]),
        )
    if kind == "quotation":
        return QuotationOutput(core, anchor_from_dict(data["anchor"]), data["comment"])
    if kind == "micropaper":
        return MicroPaperOutput(
            core, anchor_from_dict(data["base_anchor"]), data["title"], data["body"]
        )
    if kind == "relationship":
        return RelationshipOutput(
            core,
            OutputRef.from_dict(data["from_ref"]),
            OutputRef.from_dict(data["to_ref"]),
            data["relation"],
            data.get("comment"),
        )
    raise ValidationFailed(f"unknown output kind {kind!r}")


# --- communication records ----------------------------------------------------


@dataclass
class UsageEvent:
    event_id: int
    actor: str
    action_kind: str
    output_id: str | None
    used_targets: list[OutputRef]
    at: float
    visibility: str = PUBLIC

    def as_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "actor": self.actor,
            "action_kind": self.action_kind,
            "output_id": self.output_id,
            "used_targets": [ref.as_dict() for ref in self.used_targets],
            "at": self.at,
            "visibility": self.visibility,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UsageEvent":
        return cls(
            event_id=data["event_id"],
            actor=data["actor"],
            action_kind=data["action_kind"],
            output_id=data.get("output_id"),
            used_targets=[OutputRef.from_dict(r) for r in data["used_targets"]],
            at=data["at"],
            visibility=data["visibility"],
        )


@dataclass
class Notification:
    notification_id: str
    recipient: str
    event_id: int
    state: str = "pending"  # pending -> delivered -> read
    delivered_via: str = "inbox"

    def as_dict(self) -> dict:
        return {
            "notification_id": self.notification_id,
            "recipient": self.recipient,
            "event_id": self.event_id,
            "state": self.state,
            "delivered_via": self.delivered_via,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Notification":
        return cls(
            data["notification_id"],
            data["recipient"],
            data["event_id"],
            data["state"],
            data["delivered_via"],
        )


@dataclass
class ThreadMessage:
    author: str
    body: str
    at: float
    attached_output: str | None = None

    def as_dict(self) -> dict:
        return {
            "author": self.author,
            "body": self.body,
            "at": self.at,
            "attached_output": self.attached_output,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThreadMessage":
        return cls(data["author"], data["body"], data["at"], data.get("attached_output"))


@dataclass
class Thread:
    thread_id: str
    origin_event: int
    origin_notification: str
    participants: list[str]  # join order; first two are actor then notified author
    messages: list[ThreadMessage] = field(default_factory=list)
    visibility: str = PUBLIC

    def as_dict(self) -> dict:
        return {
            "thread_id": self.thread_id,
            "origin_event": self.origin_event,
            "origin_notification": self.origin_notification,
            "participants": list(self.participants),
            "messages": [m.as_dict() for m in self.messages],
            "visibility": self.visibility,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Thread":
        return cls(
            thread_id=data["thread_id"],
            origin_event=data["origin_event"],
            origin_notification=data["origin_notification"],
            participants=list(data["participants"]),
            messages=[ThreadMessage.from_dict(m) for m in data["messages"]],
            visibility=data["visibility"],
        )


@dataclass
class CompetingOffer:
    offer_id: str
    thread_id: str
    challenger: str
    offered: OutputRef
    note: str
    at: float
    event_id: int = 0  # the message event this offer logged

    def as_dict(self) -> dict:
        return {
            "offer_id": self.offer_id,
            "thread_id": self.thread_id,
            "challenger": self.challenger,
            "offered": self.offered.as_dict(),
            "note": self.note,
            "at": self.at,
            "event_id": self.event_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompetingOffer":
        return cls(
            data["offer_id"],
            data["thread_id"],
            data["challenger"],
            OutputRef.from_dict(data["offered"]),
            data["note"],
            data["at"],
            data.get("event_id", 0),
        )


@dataclass
class ReputationPortrait:
    person_id: str
    created_counts: dict
    received_usage_count: int
    notifications_responded: int
    notifications_received: int
    threads_joined: int
    offers_made: int
    computed_at: float
    private_created_counts: dict | None = None  # only on self-view

    def as_dict(self) -> dict:
        data = {
            "person_id": self.person_id,
            "created_counts": dict(self.created_counts),
            "received_usage_count": self.received_usage_count,
            "notifications_responded": self.notifications_responded,
            "notifications_received": self.notifications_received,
            "threads_joined": self.threads_joined,
            "offers_made": self.offers_made,
            "computed_at": self.computed_at,
        }
        if self.private_created_counts is not None:
            data["private_created_counts"] = dict(self.private_created_counts)
        return data


@dataclass
class Aggregation:
    aggregation_id: str
    title: str
    editor: str
    members: list[OutputRef]
    edges: list[str]  # relationship output ids among members
    compiled_at: float

    def as_dict(self) -> dict:
        return {
            "aggregation_id": self.aggregation_id,
            "title": self.title,
            "editor": self.editor,
            "members": [m.as_dict() for m in self.members],
            "edges": list(self.edges),
            "compiled_at": self.compiled_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Aggregation":
        return cls(
            aggregation_id=data["aggregation_id"],
            title=data["title"],
            editor=data["editor"],
            members=[OutputRef.from_dict(m) for m in data["members"]],
            edges=list(data["edges"]),
            compiled_at=data["compiled_at"],
        )
