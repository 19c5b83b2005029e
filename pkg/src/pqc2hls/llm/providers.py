"""LLM providers: a scripted offline mock and an HTTPS chat-completion client."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

from ..errors import AuthFailure, ConfigError, ProviderUnavailable
from .settings import LlmSettings


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class Provider(Protocol):
    name: str

    def complete(self, prompt: str, settings: LlmSettings, cursor: "FallbackCursor") -> str: ...


@dataclass
class FallbackCursor:
    """Per-session position in a mock script's fallback list."""

    position: int = 0


@dataclass(frozen=True)
class MockProvider:
    """Responses keyed by SHA-256 prefix of the prompt, then an ordered fallback.

    Entries are response text, ``{"file": path}`` relative to the script, or
    ``{"error": "unavailable" | "auth"}`` for failure injection.  The last
    fallback entry repeats once the list is used up.
    """

    responses: dict[str, Any] = field(default_factory=dict)
    fallback: tuple[Any, ...] = ()
    base_dir: Path = Path(".")
    name: str = "mock"

    @classmethod
    def from_file(cls, path: Path | str) -> "MockProvider":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"mock script not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"mock script {path}: {exc}") from exc
        return cls.from_dict(data, path.parent)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | str = ".") -> "MockProvider":
        unknown = set(data) - {"responses", "fallback"}
        if unknown:
            raise ConfigError(f"mock script: unknown key {sorted(unknown)[0]}")
        return cls(dict(data.get("responses", {})), tuple(data.get("fallback", ())), Path(base_dir))

    def _resolve(self, entry: Any) -> str:
        if isinstance(entry, str):
            return entry
        if isinstance(entry, dict):
            if "file" in entry:
                return (self.base_dir / entry["file"]).read_text(encoding="utf-8")
            if "error" in entry:
                if entry["error"] == "auth":
                    raise AuthFailure("scripted authentication failure")
                raise ProviderUnavailable(f"scripted failure: {entry['error']}")
        raise ConfigError(f"mock script: bad entry {entry!r}")

    def complete(self, prompt: str, settings: LlmSettings, cursor: FallbackCursor) -> str:
        digest = prompt_digest(prompt)
        # longest matching prefix wins so scripts can be specific
        for key in sorted(self.responses, key=len, reverse=True):
            if digest.startswith(key.lower()):
                return self._resolve(self.responses[key])
        if not self.fallback:
            raise ProviderUnavailable(f"mock script has no response for prompt {digest[:12]}")
        entry = self.fallback[min(cursor.position, len(self.fallback) - 1)]
        cursor.position += 1
        return self._resolve(entry)


@dataclass(frozen=True)
class LiveProvider:
    """OpenAI-style chat-completion endpoint; the credential is read from the environment."""

    endpoint: str
    model: str
    credential_env: str
    retries: int = 2
    timeout_seconds: float = 120.0
    backoff_seconds: float = 1.0
    name: str = "live"

    def complete(self, prompt: str, settings: LlmSettings, cursor: FallbackCursor) -> str:
        import httpx

        key = os.environ.get(self.credential_env)
        if not key:
            raise AuthFailure(f"credential variable {self.credential_env} is not set")
        payload = {
            "model": self.model or settings.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": settings.temperature,
            "top_p": settings.nucleus,
            "max_tokens": settings.max_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}
        last = "no attempt made"
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * attempt)
            try:
                r = httpx.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout_seconds)
            except httpx.HTTPError as exc:
                last = f"{type(exc).__name__}: {exc}"
                continue
            if r.status_code in (401, 403):
                raise AuthFailure(f"endpoint refused credentials (HTTP {r.status_code})")
            if r.status_code >= 500 or r.status_code == 429:
                last = f"HTTP {r.status_code}"
                continue
            if r.status_code != 200:
                raise ProviderUnavailable(f"HTTP {r.status_code}: {r.text[:200]}")
            try:
                return r.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderUnavailable(f"malformed completion response: {exc}") from exc
        raise ProviderUnavailable(f"{self.endpoint} unreachable after {self.retries + 1} attempts ({last})")
