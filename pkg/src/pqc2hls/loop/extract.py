"""Subroutine extraction: amalgamate, slice, co-generate KATs, self-test."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

from ..csrc.parser import parse_unit
from ..csrc.slicing import extract_slice
from ..errors import KernelSelfTestFailed, NoCodeFound, UnknownFunction, UnresolvedDependency
from ..llm.session import LlmSession
from ..llm.templates import TemplateId, load_template, render_prompt
from ..verify.harness import gen_kats, infer_schema
from ..verify.toolchain import ToolchainConfig
from .kernel import Kernel, check


def amalgamate(codebase: Sequence[str | Path]) -> str:
    """Concatenate source files (paths or texts) into one translation unit."""
    parts = []
    for item in codebase:
        if isinstance(item, Path) or (isinstance(item, str) and "\n" not in item and Path(item).is_file()):
            parts.append(Path(item).read_text(encoding="utf-8", errors="surrogateescape"))
        else:
            parts.append(str(item))
    return "\n".join(p if p.endswith("\n") else p + "\n" for p in parts)


def _llm_slice(text: str, target: str, session: LlmSession, template_dir=None) -> str:
    prompt = render_prompt(load_template(TemplateId.Extraction, template_dir), {"code": text, "target": target})
    ex = session.request(prompt, TemplateId.Extraction.value)
    if ex.extracted_code is None:
        raise NoCodeFound(f"exchange {ex.id} returned no code")
    return ex.extracted_code


def extract_kernel(
    codebase: Sequence[str | Path],
    target: str,
    n_kats: int,
    seed: int,
    toolchain: ToolchainConfig,
    workdir: Path | str,
    domains: Mapping[str, str] | None = None,
    extents: Mapping[str, int] | None = None,
    name: str | None = None,
    session: LlmSession | None = None,
) -> Kernel:
    workdir = Path(workdir)
    text = amalgamate(codebase)
    unit = parse_unit(text)
    if unit.function(target) is None:
        raise UnknownFunction(target)
    try:
        sliced = extract_slice(unit, target)
    except UnresolvedDependency:
        # optional model-assisted path: ask for the target plus stubs of what is missing
        if session is None:
            raise
        sliced = _llm_slice(text, target, session)
    sunit = parse_unit(sliced)
    schema = infer_schema(sunit, target, domains, extents)
    suite = gen_kats(sunit, target, schema, n_kats, seed, toolchain, workdir / "kats", extents=extents)
    kernel = Kernel(name or target, sunit, target, suite, {}, dict(extents or {}))
    result = check(kernel, kernel.code, toolchain, workdir / "selftest")
    if not result.ok:
        raise KernelSelfTestFailed(f"reference fails its own KATs: {result.evidence}")
    return kernel
