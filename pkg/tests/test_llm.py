from __future__ import annotations

import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2hls.errors import (
    AuthFailure,
    BudgetExhausted,
    ConfigError,
    MissingBinding,
    NoCodeFound,
    ProviderUnavailable,
)
from pqc2hls.llm import (
    CorrectiveKind,
    LiveProvider,
    LlmExchange,
    LlmSession,
    LlmSettings,
    MockProvider,
    TemplateId,
    corrective_prompt,
    extract_code,
    load_template,
    prompt_digest,
    render_prompt,
)
from pqc2hls.llm.corrective import TRUNCATION_MARKER

from conftest import MOCK_DIR

CODE = "int f(void) { return 1; }"


# -- templates -------------------------------------------------------------

@pytest.mark.parametrize("tid", list(TemplateId))
def test_every_template_ships_and_mentions_code_or_loops(tid):
    tpl = load_template(tid)
    assert tpl.body.strip()
    assert "code" in tpl.placeholders or "loops" in tpl.placeholders


def test_placeholder_sets():
    assert load_template(TemplateId.StaticMemory).placeholders == ["code"]
    assert set(load_template(TemplateId.StructExpansion).placeholders) == {"top", "code"}
    assert set(load_template(TemplateId.PragmaDse).placeholders) == {"top", "objective", "history", "loops"}


def test_rendering_inserts_code_and_checks_bindings():
    tpl = load_template(TemplateId.StaticMemory)
    out = render_prompt(tpl, {"code": CODE})
    assert CODE in out and "${" not in out
    with pytest.raises(MissingBinding):
        render_prompt(tpl, {})


def test_user_directory_overrides_default(tmp_path):
    (tmp_path / "static_memory.txt").write_text("Fix: ${code}\n")
    tpl = load_template(TemplateId.StaticMemory, tmp_path)
    assert render_prompt(tpl, {"code": "x"}) == "Fix: x\n"
    assert load_template(TemplateId.PragmaDse, tmp_path).body == load_template(TemplateId.PragmaDse).body


def test_filenames():
    assert TemplateId.CorrectiveKat.filename == "corrective_kat.txt"


# -- extraction ------------------------------------------------------------

def test_first_fenced_block_wins():
    resp = f"Sure.\n```c\n{CODE}\n```\nand\n```c\nint g;\n```\n"
    assert extract_code(resp) == CODE


def test_bare_c_is_accepted_prose_is_not():
    assert extract_code(CODE + "\n") == CODE + "\n"
    with pytest.raises(NoCodeFound):
        extract_code("I cannot help with that request.")
    with pytest.raises(NoCodeFound):
        extract_code("```c\n\n```")
    with pytest.raises(NoCodeFound):
        extract_code("")


@settings(max_examples=50)
@given(st.text(alphabet=st.characters(blacklist_characters="`"), max_size=40),
       st.sampled_from(["", "c", "C", "cpp"]))
def test_fence_extraction_is_exact(prose, lang):
    body = "int x = 1;\nint y = 2;"
    assert extract_code(f"{prose}\n```{lang}\n{body}\n```\n{prose}") == body


# -- mock provider ---------------------------------------------------------

def test_mock_matches_digest_prefix_then_fallback(tmp_path):
    p1 = "prompt one"
    mock = MockProvider.from_dict({
        "responses": {prompt_digest(p1)[:12]: "one"},
        "fallback": ["a", "b"],
    })
    s = LlmSession(mock)
    assert s.request(p1).response == "one"
    assert [s.request("other").response for _ in range(3)] == ["a", "b", "b"]


def test_mock_file_entries_and_errors(tmp_path):
    (tmp_path / "r.md").write_text("```c\nint z;\n```\n")
    (tmp_path / "s.json").write_text(json.dumps({"fallback": [{"file": "r.md"}, {"error": "auth"}]}))
    s = LlmSession(MockProvider.from_file(tmp_path / "s.json"))
    assert s.request("p").extracted_code == "int z;"
    with pytest.raises(AuthFailure):
        s.request("p")
    assert s.exchanges[-1].error.startswith("AuthFailure")


def test_mock_script_validation(tmp_path):
    with pytest.raises(ConfigError):
        MockProvider.from_dict({"answers": {}})
    with pytest.raises(ConfigError):
        MockProvider.from_file(tmp_path / "absent.json")
    with pytest.raises(ProviderUnavailable):
        LlmSession(MockProvider({})).request("p")


def test_shipped_scripts_load():
    for path in MOCK_DIR.glob("*.json"):
        LlmSession(MockProvider.from_file(path)).request("anything")


# -- sessions --------------------------------------------------------------

def test_budget_is_checked_before_sending():
    mock = MockProvider.from_dict({"fallback": ["x"]})
    s = LlmSession(mock, budget=2)
    s.request("a"), s.request("b")
    with pytest.raises(BudgetExhausted):
        s.request("c")
    assert s.requests_made == 2 and s.remaining == 0


def test_exchanges_are_persisted_before_return_and_deterministic():
    seen = []
    mock = MockProvider.from_dict({"fallback": [f"```c\n{CODE}\n```"]})
    s = LlmSession(mock, sink=seen.append, session_id="run00")
    ex = s.request("hello", "StaticMemory")
    assert seen == [ex]
    assert ex.timestamp == "seq-1" and ex.id.startswith("x001-")
    again = LlmSession(MockProvider.from_dict({"fallback": [f"```c\n{CODE}\n```"]}), session_id="run00").request("hello", "StaticMemory")
    assert again == ex
    assert LlmExchange.from_dict(json.loads(json.dumps(ex.to_dict()))) == ex


@pytest.mark.parametrize("kw", [{"temperature": -0.1}, {"nucleus": 1.5}, {"max_tokens": 0}])
def test_settings_validation(kw):
    with pytest.raises(ConfigError):
        LlmSettings(**kw)


# -- corrective prompts ----------------------------------------------------

@pytest.mark.parametrize("kind", list(CorrectiveKind))
def test_corrective_prompt_carries_evidence_and_code(kind):
    out = corrective_prompt(kind, CODE, "kernel.c:3: error: boom")
    assert "kernel.c:3: error: boom" in out and CODE in out


def test_long_evidence_is_truncated_with_marker():
    evidence = "e" * 100_000
    out = corrective_prompt("CompileError", CODE, evidence, LlmSettings(max_tokens=512))
    assert "evidence truncated" in out
    assert len(out) < 4 * 512 + 1000


def test_empty_evidence_is_an_error():
    with pytest.raises(ValueError):
        corrective_prompt("KatMismatch", CODE, "")


@settings(max_examples=40)
@given(st.integers(1, 50_000), st.integers(64, 8192))
def test_truncation_keeps_an_exact_prefix(n, max_tokens):
    evidence = "".join(chr(97 + i % 26) for i in range(n))
    body = load_template(TemplateId.CorrectiveSynth).body
    limit = max(512, max_tokens * 4 - len(body) - len(CODE))
    out = corrective_prompt("SynthError", CODE, evidence, LlmSettings(max_tokens=max_tokens))
    if n <= limit:
        assert evidence in out and "truncated" not in out
    else:
        assert evidence[:limit] + "\n" + TRUNCATION_MARKER.format(n=n - limit) in out
        assert evidence[:limit + 1] not in out


# -- live provider ---------------------------------------------------------

class _Resp:
    def __init__(self, status, body):
        self.status_code = status
        self._body = body
        self.text = json.dumps(body)

    def json(self):
        return self._body


def test_live_provider_request_shape_and_retry(monkeypatch):
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append((url, json, headers))
        if len(calls) == 1:
            return _Resp(503, {})
        return _Resp(200, {"choices": [{"message": {"content": "```c\nint q;\n```"}}]})

    monkeypatch.setenv("TEST_KEY", "secret")
    monkeypatch.setattr(httpx, "post", fake_post)
    prov = LiveProvider("https://example.invalid/v1/chat", "m1", "TEST_KEY", retries=2, backoff_seconds=0)
    ex = LlmSession(prov, LlmSettings(temperature=0.2, nucleus=0.2)).request("p")
    assert ex.extracted_code == "int q;"
    url, payload, headers = calls[-1]
    assert payload["model"] == "m1" and payload["temperature"] == 0.2 and payload["top_p"] == 0.2
    assert headers["Authorization"] == "Bearer secret"
    assert len(calls) == 2


def test_live_provider_auth_and_outage(monkeypatch):
    monkeypatch.setenv("TEST_KEY", "secret")
    monkeypatch.setattr(httpx, "post", lambda *a, **k: _Resp(401, {}))
    prov = LiveProvider("https://example.invalid", "m", "TEST_KEY", retries=1, backoff_seconds=0)
    with pytest.raises(AuthFailure):
        LlmSession(prov).request("p")

    def down(*a, **k):
        raise httpx.ConnectError("refused")

    monkeypatch.setattr(httpx, "post", down)
    with pytest.raises(ProviderUnavailable):
        LlmSession(prov).request("p")
    monkeypatch.delenv("TEST_KEY")
    with pytest.raises(AuthFailure):
        LlmSession(prov).request("p")
