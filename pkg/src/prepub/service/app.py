"""HTTP facade over the engine.

Every mutating endpoint maps 1:1 onto one engine operation; no domain
logic lives here. Mutations require a bearer token; public reads do not.
Registry-wide operations (item injection, harvesting, person and token
provisioning) additionally require the service admin token.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from ..anchoring import create_anchor
from ..engine import Engine
from ..errors import (
    ConflictError,
    NotFoundError,
    NotOwner,
    PermissionDenied,
    PrepubError,
    PrivateThread,
    UnreachableArchive,
    ValidationFailed,
)
from ..graph import export_aggregation, neighbors_of
from ..harvest import ArchiveDescriptor, harvest_archive
from ..models import output_as_dict
from . import schemas


class AuthRequired(PrepubError):
    code = "unauthorized"


def _status_for(exc: PrepubError) -> int:
    if isinstance(exc, AuthRequired):
        return 401
    if isinstance(exc, PermissionDenied):
        return 403
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, ConflictError):
        return 409
    if isinstance(exc, UnreachableArchive):
        return 502
    if isinstance(exc, ValidationFailed):
        return 400
    return 500


def create_app(engine: Engine, admin_token: str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        engine.snapshot()
        engine.close()

    app = FastAPI(title="prepub", lifespan=lifespan)
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # --- auth ---

    def bearer(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            return header[7:].strip()
        return None

    def viewer(request: Request) -> str | None:
        return engine.authenticate(bearer(request))

    def require_person(request: Request) -> str:
        person = viewer(request)
        if person is None:
            raise AuthRequired("a valid bearer token is required")
        return person

    def require_admin(request: Request) -> None:
        token = bearer(request)
        if admin_token is None or token != admin_token:
            raise AuthRequired("this endpoint requires the admin token")

    # --- error shape ---

    @app.exception_handler(PrepubError)
    async def domain_error(request: Request, exc: PrepubError):
        return JSONResponse(
            status_code=_status_for(exc), content={"error": exc.code, "detail": exc.detail}
        )

    @app.exception_handler(RequestValidationError)
    async def shape_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"error": "validation", "detail": str(exc.errors()[:3])}
        )

    # --- helpers ---

    def build_anchor(payload):
        if isinstance(payload, schemas.AnchorIn):
            return payload.model_dump()
        item = engine.get_item(payload.target)
        doc = item.text_for(payload.source)
        if doc is None:
            raise ValidationFailed(f"item {payload.target} has no {payload.source} text")
        anchor = create_anchor(doc, payload.start, payload.end, item.handle, payload.source)
        if payload.expect is not None and payload.expect != anchor.exact:
            raise ValidationFailed(
                f"span extracts {anchor.exact!r}, not the expected {payload.expect!r}"
            )
        return anchor

    # --- endpoints ---

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/whoami")
    def whoami(person: str = Depends(require_person)):
        return {"person_id": person}

    @app.get("/taxonomy")
    def taxonomy():
        return [
            {"code": rt.code, "label": rt.label, "directed": rt.directed}
            for rt in engine.taxonomy.values()
        ]

    @app.get("/items")
    def list_items(limit: int = Query(default=100, ge=1), offset: int = Query(default=0, ge=0)):
        return [i.as_dict() for i in engine.list_items(limit=limit, offset=offset)]

    @app.post("/items", status_code=201, dependencies=[Depends(require_admin)])
    def put_item(item: schemas.ItemIn):
        result = engine.upsert_item(item.model_dump())
        return {"result": result, "item": engine.get_item(item.handle).as_dict()}

    @app.get("/items/{handle}")
    def get_item(handle: str):
        return engine.get_item(handle).as_dict()

    @app.get("/items/{handle}/outputs")
    def item_outputs(handle: str, request: Request):
        return [
            output_as_dict(o)
            for o in engine.list_outputs_for(handle, viewer=viewer(request))
        ]

    @app.post("/outputs", status_code=201)
    def create_output(payload: schemas.OutputIn, person: str = Depends(require_person)):
        if payload.kind == "comment":
            output = engine.create_comment(
                person, build_anchor(payload.anchor), payload.body, payload.visibility
            )
        elif payload.kind == "assertion":
            output = engine.create_assertion(
                person,
                build_anchor(payload.anchor),
                payload.statement,
                payload.pubinfo,
                payload.visibility,
            )
        elif payload.kind == "quotation":
            output = engine.create_quotation(
                person, build_anchor(payload.anchor), payload.comment, payload.visibility
            )
        elif payload.kind == "micropaper":
            output = engine.create_micropaper(
                person, build_anchor(payload.anchor), payload.title, payload.body,
                payload.visibility,
            )
        else:
            output = engine.create_relationship(
                person,
                payload.from_ref.as_payload(),
                payload.to_ref.as_payload(),
                payload.relation,
                payload.comment,
                payload.visibility,
            )
        return output_as_dict(output)

    @app.get("/outputs/{output_id}")
    def get_output(output_id: str, request: Request):
        output = engine.get_output(output_id)
        if not engine.visible_to(output, viewer(request)):
            raise PermissionDenied("this output is private")
        return output_as_dict(output)

    @app.post("/outputs/{output_id}/revise", status_code=201)
    def revise_output(
        output_id: str, payload: schemas.ReviseIn, person: str = Depends(require_person)
    ):
        return output_as_dict(engine.revise_output(person, output_id, payload.changes()))

    @app.post("/outputs/{output_id}/visibility")
    def set_visibility(
        output_id: str, payload: schemas.VisibilityIn, person: str = Depends(require_person)
    ):
        return output_as_dict(engine.set_visibility(person, output_id, payload.visibility))

    @app.post("/persons", status_code=201, dependencies=[Depends(require_admin)])
    def register_person(payload: schemas.PersonIn):
        return engine.register_person(
            payload.name, payload.contact, payload.affiliation
        ).as_dict()

    @app.get("/persons/{person_id}")
    def get_person(person_id: str):
        return engine.get_person(person_id).as_dict()

    @app.post(
        "/persons/{person_id}/tokens", status_code=201, dependencies=[Depends(require_admin)]
    )
    def issue_token(person_id: str, payload: schemas.TokenIn):
        return engine.issue_token(person_id, payload.token).as_dict()

    @app.post("/persons/{person_id}/claims", status_code=201)
    def claim(person_id: str, payload: schemas.ClaimIn, person: str = Depends(require_person)):
        if person != person_id:
            raise NotOwner("claims can only be made on one's own profile")
        return engine.claim_work(person_id, payload.handle).as_dict()

    @app.get("/persons/{person_id}/portrait")
    def portrait(person_id: str, request: Request):
        include_private = viewer(request) == person_id
        return engine.compute_portrait(person_id, include_private=include_private).as_dict()

    @app.get("/persons/{person_id}/neighbors")
    def neighbors(person_id: str, max: int = Query(default=20, ge=1)):
        return neighbors_of(engine, person_id, max_results=max).as_dict()

    @app.get("/notifications")
    def inbox(request: Request, state: str | None = None):
        person = require_person(request)
        return [n.as_dict() for n in engine.list_inbox(person, state=state)]

    @app.post("/notifications/{notification_id}/read")
    def read_notification(notification_id: str, person: str = Depends(require_person)):
        return engine.mark_read(person, notification_id).as_dict()

    @app.post("/threads", status_code=201)
    def open_thread(payload: schemas.ThreadIn, person: str = Depends(require_person)):
        return engine.open_thread(
            payload.notification_id, person, payload.message, payload.visibility
        ).as_dict()

    @app.get("/threads")
    def my_threads(person: str = Depends(require_person)):
        return [t.as_dict() for t in engine.list_threads(person)]

    @app.get("/threads/{thread_id}")
    def get_thread(thread_id: str, request: Request):
        thread = engine.get_thread(thread_id)
        if thread.visibility == "private" and viewer(request) not in thread.participants:
            raise PrivateThread("this thread is private")
        return thread.as_dict()

    @app.post("/threads/{thread_id}/messages")
    def post_message(
        thread_id: str, payload: schemas.MessageIn, person: str = Depends(require_person)
    ):
        return engine.post_message(
            thread_id, person, payload.body, payload.attached_output
        ).as_dict()

    @app.post("/threads/{thread_id}/offers", status_code=201)
    def submit_offer(
        thread_id: str, payload: schemas.OfferIn, person: str = Depends(require_person)
    ):
        return engine.submit_offer(
            thread_id, person, payload.offered.as_payload(), payload.note
        ).as_dict()

    @app.post("/aggregations", status_code=201)
    def compile_aggregation(
        payload: schemas.AggregationIn, person: str = Depends(require_person)
    ):
        return engine.compile_aggregation(
            person, payload.title, [m.as_payload() for m in payload.members]
        ).as_dict()

    @app.get("/aggregations/{aggregation_id}")
    def get_aggregation(aggregation_id: str):
        return engine.get_aggregation(aggregation_id).as_dict()

    @app.get("/aggregations/{aggregation_id}/export")
    def export(aggregation_id: str, format: str = "json"):
        document = export_aggregation(engine, aggregation_id, format)
        if format == "text":
            return PlainTextResponse(document)
        return Response(content=document, media_type="application/json")

    @app.post("/harvest", dependencies=[Depends(require_admin)])
    def harvest(payload: schemas.HarvestIn):
        descriptor = ArchiveDescriptor(payload.archive_code, payload.base_url)
        return harvest_archive(engine, descriptor).as_dict()

    return app
