"""The staged conversion loop: compile, simulate against KATs, then synthesize."""

from __future__ import annotations

import time
from pathlib import Path

from ..csrc.ctypes import TypeEnv
from ..csrc.parser import parse_unit
from ..errors import AuthFailure, BudgetExhausted, LlmError, Pqc2HlsError, TransformError
from ..llm.corrective import CorrectiveKind, corrective_prompt
from ..llm.session import LlmSession
from ..llm.templates import TemplateId, load_template, render_prompt
from ..synth.backends import Objective, hls_top
from ..xform.flatten import flatten_aggregates
from ..xform.patch import apply
from .kernel import Kernel
from .preprocess import Verifier, ask_for_code
from .services import Services
from .transcript import HLS, AttemptStore, Fail, Pass, RunTranscript, StageRecord, code_digest

BUDGET_EXHAUSTED = "budget exhausted"


def needs_flattening(code: str, top: str) -> bool:
    try:
        unit = parse_unit(code)
    except Pqc2HlsError:
        return False
    f = unit.function(top)
    if f is None or hls_top(unit, top) != top:
        return False
    env = TypeEnv(unit)
    return any(p.is_void_pointer or env.resolve(p.base).struct is not None for p in f.params)


def convert(
    kernel: Kernel,
    services: Services,
    workdir: Path | str,
    session: LlmSession,
    objective: Objective | str = Objective.Area,
    transcript: RunTranscript | None = None,
    store: AttemptStore | None = None,
) -> RunTranscript:
    return convert_kernel(kernel, services, workdir, session, objective, transcript, store)[0]


def convert_kernel(
    kernel: Kernel,
    services: Services,
    workdir: Path | str,
    session: LlmSession,
    objective: Objective | str = Objective.Area,
    transcript: RunTranscript | None = None,
    store: AttemptStore | None = None,
) -> tuple[RunTranscript, Kernel | None]:
    """The transcript plus, on success, the kernel carrying the synthesized code."""
    cfg = services.config
    workdir = Path(workdir)
    t0 = time.monotonic()
    t = transcript or RunTranscript(workdir.name)
    verify = Verifier(kernel, services, workdir / "stages", t, store)
    tdir = cfg.resolve(cfg.llm.template_dir) if cfg.llm.template_dir else None
    code = kernel.code
    headers = dict(kernel.headers)

    def finish(outcome) -> tuple[RunTranscript, Kernel | None]:
        t.outcome = outcome
        t.llm_exchanges = [x.id for x in session.exchanges]
        t.wall_seconds = time.monotonic() - t0
        if store is not None:
            t.final_digest = store.code(code, headers)
            store.finish(t)
        return t, kernel.with_code(code, headers) if isinstance(outcome, Pass) else None

    def repair(kind: CorrectiveKind, evidence: str) -> str:
        prompt = corrective_prompt(kind, code, evidence, cfg.llm.settings, tdir)
        new, _ = ask_for_code(session, prompt, kind.template)
        return new

    for it in range(1, cfg.loop.max_iterations + 1):
        t.iterations = it
        last = it == cfg.loop.max_iterations
        try:
            # (a) aggregate interfaces: deterministic flattening, the model otherwise
            if needs_flattening(code, kernel.top_fn):
                flattened = None
                if cfg.loop.deterministic_transforms:
                    try:
                        unit = parse_unit(code)
                        patch = flatten_aggregates(unit, kernel.top_fn, cfg.loop.flatten_depth)
                        if not patch.is_empty:
                            flattened = apply(unit, patch).text
                    except TransformError as exc:
                        t.warnings.append(f"flatten_aggregates: {exc}")
                if flattened is None:
                    tpl = load_template(TemplateId.StructExpansion, tdir)
                    flattened, _ = ask_for_code(
                        session, render_prompt(tpl, {"code": code, "top": kernel.top_fn}),
                        TemplateId.StructExpansion,
                    )
                code = flattened

            # (b) + (c) compile and KATs
            check = verify(code, headers)
            if not check.ok:
                if last:
                    break
                kind = CorrectiveKind.CompileError if not check.compiled else CorrectiveKind.KatMismatch
                code = repair(kind, check.evidence)
                continue

            # (d) synthesis, only for code that compiled and passed its KATs
            digest = store.code(code, headers) if store is not None else code_digest(code)
            result = services.backend.synthesize(code, kernel.top_fn, Objective(objective),
                                                 workdir / "synth" / f"it{it:02d}")
            if result.ok:
                rec = StageRecord(HLS, digest, True, _metrics_line(result.metrics))
                verify.record(rec)
                return finish(Pass(result.metrics))
            verify.record(StageRecord(HLS, digest, False, result.status.kind, result.evidence))
            if last:
                break
            code = repair(CorrectiveKind.SynthError, result.evidence)
        except BudgetExhausted as exc:
            return finish(Fail(BUDGET_EXHAUSTED, f"LLM request budget: {exc}"))
        except AuthFailure:
            raise
        except LlmError as exc:
            t.warnings.append(f"iteration {it}: {exc}")
            if last:
                break
    return finish(Fail(BUDGET_EXHAUSTED, f"iteration limit of {cfg.loop.max_iterations} reached"))


def _metrics_line(m) -> str:
    return ", ".join(f"{k}={v}" for k, v in m.to_dict().items())
