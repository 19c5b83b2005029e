"""A budgeted conversation handle that records every exchange."""

from __future__ import annotations

import hashlib
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

from ..errors import BudgetExhausted, LlmError, NoCodeFound
from .extract import extract_code
from .providers import FallbackCursor, Provider
from .settings import LlmSettings

DEFAULT_BUDGET = 25


@dataclass(frozen=True)
class LlmExchange:
    id: str
    prompt: str
    response: str
    settings: LlmSettings
    provider: str
    timestamp: str
    extracted_code: Optional[str] = None
    template: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["settings"] = self.settings.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LlmExchange":
        d = dict(d)
        d["settings"] = LlmSettings.from_dict(d["settings"])
        return cls(**d)


class LlmSession:
    """One per attempt. The mock uses a logical clock so replays are identical."""

    def __init__(
        self,
        provider: Provider,
        settings: LlmSettings | None = None,
        budget: int = DEFAULT_BUDGET,
        sink: Callable[[LlmExchange], None] | None = None,
        session_id: str = "session",
        clock: Callable[[int], str] | None = None,
    ):
        self.provider = provider
        self.settings = settings or LlmSettings()
        self.budget = budget
        self.sink = sink
        self.session_id = session_id
        self.cursor = FallbackCursor()
        self.exchanges: list[LlmExchange] = []
        if clock is None:
            clock = (lambda n: f"seq-{n}") if provider.name == "mock" else (lambda n: time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
        self.clock = clock

    @property
    def requests_made(self) -> int:
        return len(self.exchanges)

    @property
    def remaining(self) -> int:
        return max(0, self.budget - self.requests_made)

    def _id(self, n: int, prompt: str) -> str:
        h = hashlib.sha256(f"{self.session_id}\0{n}\0{prompt}".encode()).hexdigest()
        return f"x{n:03d}-{h[:10]}"

    def request(self, prompt: str, template: str | None = None) -> LlmExchange:
        if self.requests_made >= self.budget:
            raise BudgetExhausted(f"request budget of {self.budget} reached")
        n = self.requests_made + 1
        base = dict(id=self._id(n, prompt), prompt=prompt, settings=self.settings,
                    provider=self.provider.name, timestamp=self.clock(n), template=template)
        try:
            response = self.provider.complete(prompt, self.settings, self.cursor)
        except LlmError as exc:
            self._record(LlmExchange(response="", error=f"{type(exc).__name__}: {exc}", **base))
            raise
        try:
            code = extract_code(response)
        except NoCodeFound:
            code = None
        ex = LlmExchange(response=response, extracted_code=code, **base)
        self._record(ex)
        return ex

    def _record(self, ex: LlmExchange) -> None:
        # persisted before the caller sees the result
        if self.sink is not None:
            self.sink(ex)
        self.exchanges.append(ex)
