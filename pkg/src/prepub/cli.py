"""Terminal client for the service, plus the ``serve`` entry point.

Configuration precedence: ``--config FILE`` beats the ``PREPUB_API_URL`` /
``PREPUB_TOKEN`` environment variables, which beat
``~/.config/prepub/config.json``. Exit codes: 0 success, 1 domain or
network error, 2 usage error. With ``--format json`` exactly one JSON
document is printed to stdout.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import click
import httpx

DEFAULT_CONFIG_PATH = Path("~/.config/prepub/config.json").expanduser()
DEFAULT_API_URL = "http://127.0.0.1:8840"


class CliError(click.ClickException):
    exit_code = 1

    def show(self, file=None):
        click.echo(f"error: {self.message}", err=True)


class ApiClient:
    def __init__(self, api_url: str, token: str | None):
        self.api_url = api_url.rstrip("/")
        self.token = token

    def request(self, method: str, path: str, **kwargs):
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            response = httpx.request(
                method, f"{self.api_url}{path}", headers=headers, timeout=30, **kwargs
            )
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach {self.api_url}: {exc}")
        if response.status_code >= 400:
            try:
                body = response.json()
                raise CliError(f"{body['error']}: {body['detail']}")
            except (KeyError, ValueError):
                raise CliError(f"HTTP {response.status_code}: {response.text[:200]}")
        return response

    def get(self, path: str, **params):
        params = {k: v for k, v in params.items() if v is not None}
        return self.request("GET", path, params=params).json()

    def post(self, path: str, payload: dict):
        return self.request("POST", path, json=payload).json()

    def whoami(self) -> str:
        return self.get("/whoami")["person_id"]


def load_config(config_path: str | None) -> dict:
    config = {"api_url": DEFAULT_API_URL, "token": None, "output_format": "table"}
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if path.exists():
        try:
            config.update(json.loads(path.read_text()))
        except (ValueError, OSError) as exc:
            raise CliError(f"bad config file {path}: {exc}")
    if config_path is None:  # env only applies when no explicit --config
        config["api_url"] = os.environ.get("PREPUB_API_URL", config["api_url"])
        config["token"] = os.environ.get("PREPUB_TOKEN", config["token"])
    return config


def render(data, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=True))
        return
    if isinstance(data, list):
        if not data:
            click.echo("(empty)")
            return
        if all(isinstance(row, dict) for row in data):
            keys = list(data[0].keys())
            widths = {k: max(len(k), *(len(_cell(r.get(k))) for r in data)) for k in keys}
            click.echo("  ".join(k.ljust(widths[k]) for k in keys))
            for row in data:
                click.echo("  ".join(_cell(row.get(k)).ljust(widths[k]) for k in keys))
        else:
            for row in data:
                click.echo(_cell(row))
        return
    if isinstance(data, dict):
        for key, value in data.items():
            click.echo(f"{key}: {_cell(value)}")
        return
    click.echo(str(data))


def _cell(value) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return "" if value is None else str(value)


def parse_ref(text: str) -> dict:
    kind, _, ref_id = text.partition(":")
    if kind not in ("item", "micro") or not ref_id:
        raise click.UsageError(f"refs look like item:RePEc:aa:bb:cc or micro:mo-000001, got {text!r}")
    return {"kind": kind, "id": ref_id}


pass_ctx = click.make_pass_decorator(dict)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Config file path.")
@click.option("--api-url", default=None, help="Service base URL.")
@click.option("--token", default=None, help="Bearer token.")
@click.option(
    "--format", "output_format", type=click.Choice(["json", "table"]), default=None
)
@click.pass_context
def main(ctx, config_path, api_url, token, output_format):
    """Pre-publication communication over a running service."""
    config = load_config(config_path)
    if api_url:
        config["api_url"] = api_url
    if token:
        config["token"] = token
    if output_format:
        config["output_format"] = output_format
    ctx.obj = {
        "client": ApiClient(config["api_url"], config["token"]),
        "format": config.get("output_format", "table"),
    }


def emit(ctx, data):
    render(data, ctx["format"])


# --- items ---------------------------------------------------------------


@main.group()
def item():
    """Read, inject and claim registry items."""


@item.command("get")
@click.argument("handle")
@pass_ctx
def item_get(ctx, handle):
    emit(ctx, ctx["client"].get(f"/items/{handle}"))


@item.command("list")
@click.option("--limit", default=100)
@click.option("--offset", default=0)
@pass_ctx
def item_list(ctx, limit, offset):
    emit(ctx, ctx["client"].get("/items", limit=limit, offset=offset))


@item.command("outputs")
@click.argument("handle")
@pass_ctx
def item_outputs(ctx, handle):
    emit(ctx, ctx["client"].get(f"/items/{handle}/outputs"))


@item.command("claim")
@click.argument("handle")
@pass_ctx
def item_claim(ctx, handle):
    client = ctx["client"]
    emit(ctx, client.post(f"/persons/{client.whoami()}/claims", {"handle": handle}))


@item.command("put")
@click.option("--handle", required=True)
@click.option("--title", required=True)
@click.option("--kind", default="paper")
@click.option("--abstract", default=None)
@click.option("--abstract-file", type=click.Path(exists=True), default=None)
@click.option("--fulltext-file", type=click.Path(exists=True), default=None)
@click.option("--author", "authors", multiple=True)
@click.option("--archive", default="")
@pass_ctx
def item_put(ctx, handle, title, kind, abstract, abstract_file, fulltext_file, authors, archive):
    if abstract_file:
        abstract = Path(abstract_file).read_text(encoding="utf-8")
    fulltext = Path(fulltext_file).read_text(encoding="utf-8") if fulltext_file else None
    emit(
        ctx,
        ctx["client"].post(
            "/items",
            {
                "handle": handle,
                "title": title,
                "kind": kind,
                "abstract": abstract,
                "fulltext": fulltext,
                "author_names": list(authors),
                "archive_code": archive,
            },
        ),
    )


# --- harvesting ----------------------------------------------------------


@main.command()
@click.option("--archive", required=True, help="Archive code, lowercase alphanumeric.")
@click.option("--url", required=True, help="Base URL (file path or http) of the archive.")
@pass_ctx
def harvest(ctx, archive, url):
    """Server-side harvest of every .rdf resource under a base URL."""
    emit(ctx, ctx["client"].post("/harvest", {"archive_code": archive, "base_url": url}))


@main.command("import-redif")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--archive", required=True)
@pass_ctx
def import_redif(ctx, files, archive):
    """Parse local .rdf files and push the items to the service."""
    from .harvest import template_to_item
    from .redif import Diagnostic, parse_redif

    stored, diagnostics = 0, []
    for name in files:
        text = Path(name).read_text(encoding="utf-8")
        templates, diags = parse_redif(text)
        diagnostics.extend({"location": f"{name}:{d.location}", "message": d.message} for d in diags)
        for template in templates:
            mapped = template_to_item(template, archive)
            if isinstance(mapped, Diagnostic):
                diagnostics.append({"location": f"{name}:{mapped.location}", "message": mapped.message})
                continue
            ctx["client"].post("/items", mapped.as_dict())
            stored += 1
    emit(ctx, {"stored": stored, "diagnostics": diagnostics})


# --- annotation ----------------------------------------------------------


def _anchor_options(fn):
    fn = click.option("--item", "item_handle", required=True)(fn)
    fn = click.option("--source", type=click.Choice(["abstract", "fulltext"]), default="abstract")(fn)
    fn = click.option("--start", type=int, required=True)(fn)
    fn = click.option("--end", type=int, required=True)(fn)
    fn = click.option("--expect", default=None, help="Fail unless the span extracts this text.")(fn)
    fn = click.option(
        "--visibility", type=click.Choice(["public", "private"]), default="public"
    )(fn)
    return fn


def _span(item_handle, source, start, end, expect):
    return {"target": item_handle, "source": source, "start": start, "end": end, "expect": expect}


@main.group()
def annotate():
    """Create anchored micro outputs from character offsets."""


@annotate.command("comment")
@_anchor_options
@click.option("--body", required=True)
@pass_ctx
def annotate_comment(ctx, item_handle, source, start, end, expect, visibility, body):
    payload = {
        "kind": "comment",
        "anchor": _span(item_handle, source, start, end, expect),
        "body": body,
        "visibility": visibility,
    }
    emit(ctx, ctx["client"].post("/outputs", payload))


@annotate.command("assert")
@_anchor_options
@click.option("--subject", required=True)
@click.option("--predicate", required=True)
@click.option("--object", "object_", required=True)
@click.option("--license", "license_", default=None)
@pass_ctx
def annotate_assert(ctx, item_handle, source, start, end, expect, visibility,
                    subject, predicate, object_, license_):
    payload = {
        "kind": "assertion",
        "anchor": _span(item_handle, source, start, end, expect),
        "statement": {"subject": subject, "predicate": predicate, "object": object_},
        "visibility": visibility,
    }
    if license_:
        payload["pubinfo"] = {"license": license_}
    emit(ctx, ctx["client"].post("/outputs", payload))


@annotate.command("quote")
@_anchor_options
@click.option("--comment", required=True, help="Why this fragment is worth sharing.")
@pass_ctx
def annotate_quote(ctx, item_handle, source, start, end, expect, visibility, comment):
    payload = {
        "kind": "quotation",
        "anchor": _span(item_handle, source, start, end, expect),
        "comment": comment,
        "visibility": visibility,
    }
    emit(ctx, ctx["client"].post("/outputs", payload))


@annotate.command("micropaper")
@_anchor_options
@click.option("--title", required=True)
@click.option("--body", required=True)
@pass_ctx
def annotate_micropaper(ctx, item_handle, source, start, end, expect, visibility, title, body):
    payload = {
        "kind": "micropaper",
        "anchor": _span(item_handle, source, start, end, expect),
        "title": title,
        "body": body,
        "visibility": visibility,
    }
    emit(ctx, ctx["client"].post("/outputs", payload))


@main.command()
@click.option("--from-ref", "from_ref", required=True, help="item:<handle> or micro:<id>.")
@click.option("--to-ref", "to_ref", required=True)
@click.option("--relation", required=True)
@click.option("--comment", default=None)
@click.option("--visibility", type=click.Choice(["public", "private"]), default="public")
@pass_ctx
def relate(ctx, from_ref, to_ref, relation, comment, visibility):
    """Create a typed scientific relationship between two outputs."""
    payload = {
        "kind": "relationship",
        "from_ref": parse_ref(from_ref),
        "to_ref": parse_ref(to_ref),
        "relation": relation,
        "comment": comment,
        "visibility": visibility,
    }
    emit(ctx, ctx["client"].post("/outputs", payload))


@main.command()
@click.argument("output_id")
@click.option("--body", default=None)
@click.option("--comment", default=None)
@click.option("--title", default=None)
@pass_ctx
def revise(ctx, output_id, body, comment, title):
    """Publish a new version of one of your outputs."""
    changes = {k: v for k, v in (("body", body), ("comment", comment), ("title", title)) if v}
    emit(ctx, ctx["client"].post(f"/outputs/{output_id}/revise", changes))


@main.command()
@click.argument("output_id")
@pass_ctx
def publish(ctx, output_id):
    """Make a private output public (the reverse is not allowed)."""
    emit(ctx, ctx["client"].post(f"/outputs/{output_id}/visibility", {"visibility": "public"}))


# --- communication -------------------------------------------------------


@main.command()
@click.option("--state", type=click.Choice(["pending", "delivered", "read"]), default=None)
@click.option("--read", "read_id", default=None, help="Mark this notification read.")
@pass_ctx
def inbox(ctx, state, read_id):
    """List your notifications, newest first."""
    if read_id:
        emit(ctx, ctx["client"].post(f"/notifications/{read_id}/read", {}))
        return
    emit(ctx, ctx["client"].get("/notifications", state=state))


@main.group()
def thread():
    """Open and follow assistance threads."""


@thread.command("open")
@click.option("--notification", required=True)
@click.option("--message", required=True)
@click.option("--private", is_flag=True, default=False)
@pass_ctx
def thread_open(ctx, notification, message, private):
    payload = {
        "notification_id": notification,
        "message": message,
        "visibility": "private" if private else "public",
    }
    emit(ctx, ctx["client"].post("/threads", payload))


@thread.command("post")
@click.argument("thread_id")
@click.option("--message", required=True)
@click.option("--attach", default=None, help="Output id to attach (e.g. a revision).")
@pass_ctx
def thread_post(ctx, thread_id, message, attach):
    emit(
        ctx,
        ctx["client"].post(
            f"/threads/{thread_id}/messages", {"body": message, "attached_output": attach}
        ),
    )


@thread.command("show")
@click.argument("thread_id")
@pass_ctx
def thread_show(ctx, thread_id):
    emit(ctx, ctx["client"].get(f"/threads/{thread_id}"))


@thread.command("list")
@pass_ctx
def thread_list(ctx):
    emit(ctx, ctx["client"].get("/threads"))


@main.command()
@click.argument("thread_id")
@click.option("--ref", required=True, help="item:<handle> or micro:<id> you are offering.")
@click.option("--note", default="")
@pass_ctx
def offer(ctx, thread_id, ref, note):
    """Compete on a public thread by offering a better output."""
    emit(
        ctx,
        ctx["client"].post(
            f"/threads/{thread_id}/offers", {"offered": parse_ref(ref), "note": note}
        ),
    )


@main.command()
@click.argument("person_id", required=False)
@pass_ctx
def portrait(ctx, person_id):
    """Show the public portrait (yours by default)."""
    client = ctx["client"]
    person_id = person_id or client.whoami()
    emit(ctx, client.get(f"/persons/{person_id}/portrait"))


@main.command()
@click.argument("person_id", required=False)
@click.option("--max", "max_results", default=20)
@pass_ctx
def neighbors(ctx, person_id, max_results):
    """Who uses your outputs, and whose outputs you use."""
    client = ctx["client"]
    person_id = person_id or client.whoami()
    emit(ctx, client.get(f"/persons/{person_id}/neighbors", max=max_results))


@main.group()
def aggregate():
    """Compile and export publication-style aggregations."""


@aggregate.command("create")
@click.option("--title", required=True)
@click.option("--member", "members", multiple=True, required=True)
@pass_ctx
def aggregate_create(ctx, title, members):
    payload = {"title": title, "members": [parse_ref(m) for m in members]}
    emit(ctx, ctx["client"].post("/aggregations", payload))


@aggregate.command("export")
@click.argument("aggregation_id")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")
@pass_ctx
def aggregate_export(ctx, aggregation_id, fmt):
    response = ctx["client"].request(
        "GET", f"/aggregations/{aggregation_id}/export", params={"format": fmt}
    )
    click.echo(response.text, nl=False)


# --- provisioning and serving ---------------------------------------------


@main.group()
def token():
    """Provision persons and their API tokens (admin)."""


@token.command("create")
@click.option("--name", required=True, help="Display name for the new person.")
@click.option("--contact", default=None)
@click.option("--token", "token_value", default=None, help="Fixed token value (else random).")
@pass_ctx
def token_create(ctx, name, contact, token_value):
    client = ctx["client"]
    person = client.post("/persons", {"name": name, "contact": contact})
    issued = client.post(f"/persons/{person['person_id']}/tokens", {"token": token_value})
    emit(ctx, {"person_id": person["person_id"], "token": issued["token"]})


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8840, type=int)
@click.option("--storage", default=None, type=click.Path(), help="Directory for the event log; omit for in-memory.")
@click.option("--admin-token", envvar="PREPUB_ADMIN_TOKEN", default=None)
@click.option("--webhook-url", default=None)
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None,
              help="JSON list of {code, label, directed} relation types.")
def serve(host, port, storage, admin_token, webhook_url, taxonomy_path):
    """Run the HTTP service."""
    import secrets

    import uvicorn

    from .engine import Engine
    from .models import RelationType
    from .service import create_app
    from .webhooks import WebhookSender

    taxonomy = None
    if taxonomy_path:
        entries = json.loads(Path(taxonomy_path).read_text(encoding="utf-8"))
        taxonomy = [
            RelationType(e["code"], e.get("label", e["code"]), e.get("directed", True))
            for e in entries
        ]
    webhook = WebhookSender(webhook_url) if webhook_url else None
    if storage:
        engine = Engine.open(storage, webhook=webhook, taxonomy=taxonomy)
    else:
        engine = Engine(webhook=webhook, taxonomy=taxonomy)
    if admin_token is None:
        admin_token = secrets.token_hex(8)
        click.echo(f"admin token: {admin_token}", err=True)
    uvicorn.run(create_app(engine, admin_token=admin_token), host=host, port=port)


if __name__ == "__main__":
    main()
