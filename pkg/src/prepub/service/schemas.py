"""Pydantic request models for the HTTP facade.

These only check wire shape; domain rules (handle grammar, visibility
transitions, ownership) are enforced by the engine so that the API stays a
thin 1:1 facade over core operations.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field


class AnchorIn(BaseModel):
    target: str
    source: Literal["abstract", "fulltext"]
    exact: str
    prefix: str = ""
    suffix: str = ""
    start_hint: int = 0


class SpanAnchorIn(BaseModel):
    """Server-side anchor creation from offsets into a stored item text."""

    target: str
    source: Literal["abstract", "fulltext"]
    start: int
    end: int
    expect: Optional[str] = None  # guard: must equal the extracted fragment


class ItemIn(BaseModel):
    handle: str
    title: str
    kind: str = "paper"
    abstract: Optional[str] = None
    fulltext: Optional[str] = None
    author_names: list[str] = Field(default_factory=list)
    archive_code: str = ""


class PersonIn(BaseModel):
    name: str
    contact: Optional[str] = None
    affiliation: Optional[str] = None


class TokenIn(BaseModel):
    token: Optional[str] = None


class ClaimIn(BaseModel):
    handle: str


class OutputRefIn(BaseModel):
    kind: Literal["item", "micro"]
    id: str
    sub_anchor: Optional[AnchorIn] = None

    def as_payload(self) -> dict:
        data = {"kind": self.kind, "id": self.id}
        if self.sub_anchor is not None:
            data["sub_anchor"] = self.sub_anchor.model_dump()
        return data


AnchorOrSpan = Union[AnchorIn, SpanAnchorIn]


class CommentIn(BaseModel):
    kind: Literal["comment"]
    anchor: AnchorOrSpan
    body: str
    visibility: Literal["public", "private"] = "public"


class AssertionIn(BaseModel):
    kind: Literal["assertion"]
    anchor: AnchorOrSpan
    statement: dict
    pubinfo: Optional[dict] = None
    visibility: Literal["public", "private"] = "public"


class QuotationIn(BaseModel):
    kind: Literal["quotation"]
    anchor: AnchorOrSpan
    comment: str
    visibility: Literal["public", "private"] = "public"


class MicroPaperIn(BaseModel):
    kind: Literal["micropaper"]
    anchor: AnchorOrSpan
    title: str
    body: str
    visibility: Literal["public", "private"] = "public"


class RelationshipIn(BaseModel):
    kind: Literal["relationship"]
    from_ref: OutputRefIn
    to_ref: OutputRefIn
    relation: str
    comment: Optional[str] = None
    visibility: Literal["public", "private"] = "public"


OutputIn = Union[CommentIn, AssertionIn, QuotationIn, MicroPaperIn, RelationshipIn]


class ReviseIn(BaseModel):
    body: Optional[str] = None
    comment: Optional[str] = None
    title: Optional[str] = None
    statement: Optional[dict] = None

    def changes(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class VisibilityIn(BaseModel):
    visibility: Literal["public", "private"]


class ThreadIn(BaseModel):
    notification_id: str
    message: str
    visibility: Literal["public", "private"] = "public"


class MessageIn(BaseModel):
    body: str
    attached_output: Optional[str] = None


class OfferIn(BaseModel):
    offered: OutputRefIn
    note: str = ""


class AggregationIn(BaseModel):
    title: str
    members: list[OutputRefIn]


class HarvestIn(BaseModel):
    archive_code: str
    base_url: str
