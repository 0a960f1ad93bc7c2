import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

import prepub.cli as cli
from prepub.engine import Engine
from prepub.service import create_app
from worlds import FakeClock

DOC = "Offsets give terminals a way to select fragments precisely."
HANDLE = "RePEc:aa:bb:cc"
ADMIN = "adm-token"


@pytest.fixture
def engine():
    return Engine(clock=FakeClock())


@pytest.fixture
def client(engine):
    with TestClient(create_app(engine, admin_token=ADMIN)) as c:
        yield c


@pytest.fixture(autouse=True)
def route_httpx_to_testclient(client, monkeypatch):
    def fake_request(method, url, headers=None, timeout=None, **kwargs):
        return client.request(method, url, headers=headers or {}, **kwargs)

    monkeypatch.setattr(cli.httpx, "request", fake_request)


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, token=ADMIN, fmt="json"):
    argv = ["--api-url", "http://testserver", "--format", fmt]
    if token:
        argv += ["--token", token]
    return runner.invoke(cli.main, argv + list(args))


def provision(runner, name):
    result = run(runner, "token", "create", "--name", name)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def seed_item(runner):
    result = run(
        runner, "item", "put", "--handle", HANDLE, "--title", "OA paper",
        "--abstract", DOC,
    )
    assert result.exit_code == 0, result.output


class TestBasics:
    def test_unknown_subcommand_exits_2(self, runner):
        result = runner.invoke(cli.main, ["frobnicate"])
        assert result.exit_code == 2
        assert "Usage" in result.output or "No such command" in result.output

    def test_missing_required_option_exits_2(self, runner):
        result = run(runner, "annotate", "quote", "--item", HANDLE)
        assert result.exit_code == 2

    def test_empty_inbox_prints_json_array(self, runner):
        grace = provision(runner, "Grace")
        result = run(runner, "inbox", token=grace["token"])
        assert result.exit_code == 0
        assert json.loads(result.output) == []

    def test_domain_error_exits_1_with_stderr(self, runner):
        result = run(runner, "item", "get", "RePEc:no:pe:xx")
        assert result.exit_code == 1
        assert "unknown-item" in result.output

    def test_table_format(self, runner):
        seed_item(runner)
        result = run(runner, "item", "list", fmt="table")
        assert result.exit_code == 0
        assert "RePEc:aa:bb:cc" in result.output
        assert "handle" in result.output


class TestAnnotateFlow:
    def test_quote_with_expect_guard(self, runner):
        seed_item(runner)
        grace = provision(runner, "Grace")
        result = run(
            runner, "annotate", "quote", "--item", HANDLE, "--start", "0", "--end", "7",
            "--expect", DOC[0:7], "--comment", "key result", token=grace["token"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["output_id"].startswith("mo-")
        assert body["anchor"]["exact"] == DOC[0:7]

    def test_expect_mismatch_fails_cleanly(self, runner):
        seed_item(runner)
        grace = provision(runner, "Grace")
        result = run(
            runner, "annotate", "quote", "--item", HANDLE, "--start", "0", "--end", "7",
            "--expect", "nope", "--comment", "key result", token=grace["token"],
        )
        assert result.exit_code == 1

    def test_relate_ref_syntax(self, runner):
        seed_item(runner)
        grace = provision(runner, "Grace")
        quote = run(
            runner, "annotate", "quote", "--item", HANDLE, "--start", "0", "--end", "7",
            "--comment", "base", token=grace["token"],
        )
        quote_id = json.loads(quote.output)["output_id"]
        result = run(
            runner, "relate", "--from-ref", f"micro:{quote_id}",
            "--to-ref", f"item:{HANDLE}", "--relation", "extends", token=grace["token"],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["kind"] == "relationship"

    def test_bad_ref_syntax_exits_2(self, runner):
        grace = provision(runner, "Grace")
        result = run(
            runner, "relate", "--from-ref", "bogus", "--to-ref", f"item:{HANDLE}",
            "--relation", "extends", token=grace["token"],
        )
        assert result.exit_code == 2


class TestImportRedif:
    def test_local_files_pushed(self, runner, tmp_path):
        rdf = tmp_path / "papers.rdf"
        rdf.write_text(
            "Template-Type: ReDIF-Paper 1.0\n"
            "Title: First\n"
            f"Abstract: {DOC}\n"
            "Handle: RePEc:aa:bb:p1\n"
            "\n"
            "Template-Type: ReDIF-Paper 1.0\n"
            "Title: Second\n"
            "Handle: RePEc:aa:bb:p2\n"
        )
        result = run(runner, "import-redif", str(rdf), "--archive", "aa")
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["stored"] == 2
        listed = run(runner, "item", "list")
        handles = {i["handle"] for i in json.loads(listed.output)}
        assert handles == {"RePEc:aa:bb:p1", "RePEc:aa:bb:p2"}


class TestConfig:
    def test_env_vars_apply(self, runner, monkeypatch):
        monkeypatch.setenv("PREPUB_API_URL", "http://testserver")
        monkeypatch.setenv("PREPUB_TOKEN", ADMIN)
        result = runner.invoke(cli.main, ["--format", "json", "item", "list"])
        assert result.exit_code == 0, result.output

    def test_config_file_beats_default_and_flag_beats_env(self, runner, tmp_path, monkeypatch):
        config = tmp_path / "conf.json"
        config.write_text(json.dumps({"api_url": "http://testserver", "token": ADMIN}))
        monkeypatch.setenv("PREPUB_API_URL", "http://wrong-host:1")
        result = runner.invoke(
            cli.main, ["--config", str(config), "--format", "json", "item", "list"]
        )
        assert result.exit_code == 0, result.output
