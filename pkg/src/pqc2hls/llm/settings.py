from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class LlmSettings:
    temperature: float = 0.2
    nucleus: float = 0.2
    max_tokens: int = 4096
    model_id: str = "mock"

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        if not 0.0 < self.nucleus <= 1.0:
            raise ConfigError(f"nucleus {self.nucleus} outside (0, 1]")
        if not isinstance(self.max_tokens, int) or self.max_tokens <= 0:
            raise ConfigError("max_tokens must be a positive integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LlmSettings":
        return cls(**d)
