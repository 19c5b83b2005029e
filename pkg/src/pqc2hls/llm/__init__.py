"""Model access: templates, providers, sessions and response handling."""

from .corrective import CorrectiveKind, corrective_prompt
from .extract import extract_code
from .providers import FallbackCursor, LiveProvider, MockProvider, prompt_digest
from .session import DEFAULT_BUDGET, LlmExchange, LlmSession
from .settings import LlmSettings
from .templates import PromptTemplate, TemplateId, load_template, render_prompt

__all__ = [
    "CorrectiveKind", "DEFAULT_BUDGET", "FallbackCursor", "LiveProvider", "LlmExchange", "LlmSession",
    "LlmSettings", "MockProvider", "PromptTemplate", "TemplateId", "corrective_prompt", "extract_code",
    "load_template", "prompt_digest", "render_prompt",
]
