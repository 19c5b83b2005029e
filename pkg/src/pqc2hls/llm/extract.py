"""Pull C code out of a model response."""

from __future__ import annotations

import re

from ..csrc.parser import parse_unit
from ..errors import NoCodeFound, Pqc2HlsError

FENCE = re.compile(r"```[^\n`]*\n(.*?)\n```", re.DOTALL)


def extract_code(response: str) -> str:
    m = FENCE.search(response)
    if m:
        code = m.group(1)
        if code.strip():
            return code
        raise NoCodeFound("empty code block")
    if "```" not in response and response.strip():
        try:
            unit = parse_unit(response)
        except Pqc2HlsError:
            unit = None
        if unit is not None and (unit.functions or unit.prototypes or unit.types or unit.globals or unit.directives):
            return response
    raise NoCodeFound(response.strip()[:200] or "empty response")
