"""Pragma design-space exploration over a verified HLS-ready kernel."""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..csrc.parser import parse_unit
from ..csrc.slicing import call_closure
from ..errors import BudgetExhausted, LlmError, NoViableCandidate, Pqc2HlsError
from ..llm.session import LlmSession
from ..llm.templates import TemplateId, load_template, render_prompt
from ..synth.backends import Objective, hls_top
from ..synth.metrics import PpaMetrics, SynthResult
from ..xform.patch import apply
from ..xform.pragmas import Action, Directive, Pipeline, PragmaPlan, Unroll, insert_pragmas
from .kernel import Kernel, check
from .services import Services

UNROLL_FACTORS = (1, 2, 4)


@dataclass(frozen=True)
class LoopSite:
    function: str
    index: int
    trip: int
    depth: int


@dataclass
class Candidate:
    index: int
    plan: PragmaPlan
    origin: str = "grid"  # grid | llm:<exchange id>
    kat_ok: bool = False
    result: SynthResult | None = None
    error: str = ""

    @property
    def metrics(self) -> PpaMetrics | None:
        return self.result.metrics if self.result is not None and self.kat_ok else None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "plan": self.plan.to_list(),
            "origin": self.origin,
            "kat_ok": self.kat_ok,
            "result": self.result.to_dict() if self.result is not None else None,
            "error": self.error,
        }


@dataclass
class DseResult:
    objective: Objective
    candidates: list[Candidate] = field(default_factory=list)
    best: Candidate | None = None

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.value,
            "best": self.best.index if self.best is not None else None,
            "candidates": [c.to_dict() for c in self.candidates],
        }


def metric_key(m: PpaMetrics, objective: Objective) -> tuple[float, float]:
    """(primary, secondary) for minimization; FPGA reports fall back to LUTs and latency."""
    area = m.area_um2 if m.area_um2 is not None else (m.luts if m.luts is not None else float("inf"))
    if m.cycle_count is not None:
        lat = float(m.cycle_count)
    else:
        lat = m.latency_us if m.latency_us is not None else float("inf")
    return (area, lat) if objective is Objective.Area else (lat, area)


def pick_best(candidates: list[Candidate], objective: Objective) -> Candidate:
    viable = [c for c in candidates if c.metrics is not None]
    if not viable:
        raise NoViableCandidate(f"none of {len(candidates)} candidates synthesized")
    return min(viable, key=lambda c: (*metric_key(c.metrics, objective), c.index))


def loop_sites(code: str, top: str) -> list[LoopSite]:
    unit = parse_unit(code)
    name = hls_top(unit, top)
    out = []
    for fn in call_closure(unit, name).functions:
        for lp in unit.function(fn).loops:
            if lp.trip_count:
                out.append(LoopSite(fn, lp.index, lp.trip_count, lp.nesting_depth))
    return out


def loop_options(site: LoopSite) -> list[tuple[Action, ...]]:
    factors = sorted({f for f in (*UNROLL_FACTORS, site.trip) if f <= site.trip})
    opts: list[tuple[Action, ...]] = []
    for pipe in (False, True):
        for f in factors:
            acts: tuple[Action, ...] = (Unroll(f),) if f > 1 else ()
            if pipe:
                acts += (Pipeline(1),)
            opts.append(acts)
    return opts


def grid(sites: list[LoopSite]) -> list[PragmaPlan]:
    """All per-loop combinations in product order; the first plan is the baseline."""
    plans: list[PragmaPlan] = []
    seen: set[PragmaPlan] = set()
    for combo in itertools.product(*(loop_options(s) for s in sites)):
        plan = PragmaPlan(tuple(
            Directive(s.function, s.index, a) for s, acts in zip(sites, combo) for a in acts
        ))
        if plan not in seen:
            seen.add(plan)
            plans.append(plan)
    return plans


def _history(candidates: list[Candidate]) -> str:
    lines = []
    for c in candidates:
        m = c.metrics
        res = ", ".join(f"{k}={v}" for k, v in m.to_dict().items()) if m else (c.error or "failed")
        lines.append(f"- {c.plan.describe()}: {res}")
    return "\n".join(lines) or "(none)"


def propose(session: LlmSession, kernel: Kernel, sites: list[LoopSite], objective: Objective,
            candidates: list[Candidate], template_dir=None) -> tuple[PragmaPlan, str]:
    tpl = load_template(TemplateId.PragmaDse, template_dir)
    loops = "\n".join(f"- {s.function}, {s.index}, {s.trip}, {s.depth}" for s in sites)
    prompt = render_prompt(tpl, {"top": kernel.top_fn, "objective": objective.value,
                                 "history": _history(candidates), "loops": loops})
    ex = session.request(prompt, TemplateId.PragmaDse.value)
    text = ex.response.strip()
    if text.startswith("```"):
        text = text.split("\n", 1)[1].rsplit("```", 1)[0]
    try:
        return PragmaPlan.from_list(json.loads(text)), ex.id
    except (ValueError, TypeError, KeyError) as exc:
        raise LlmError(f"exchange {ex.id}: unusable directive list: {exc}") from exc


def evaluate(kernel: Kernel, plan: PragmaPlan, services: Services, objective: Objective,
             workdir: Path, cand: Candidate) -> Candidate:
    cfg = services.config
    try:
        unit = kernel.unit
        code = apply(unit, insert_pragmas(unit, plan, cfg.pragma.dialect)).text
    except Pqc2HlsError as exc:
        cand.error = str(exc)
        return cand
    res = check(kernel, code, services.toolchain, workdir / "kat", kernel.headers)
    cand.kat_ok = res.ok
    if not res.ok:
        cand.error = "KAT verification failed"
        return cand
    cand.result = services.backend.synthesize(code, kernel.top_fn, objective, workdir / "synth")
    if not cand.result.ok:
        cand.error = cand.result.evidence.splitlines()[0] if cand.result.evidence else "synthesis failed"
    return cand


def dse(
    kernel: Kernel,
    services: Services,
    workdir: Path | str,
    objective: Objective | str = Objective.Area,
    session: LlmSession | None = None,
    budget: int | None = None,
    workers: int | None = None,
) -> DseResult:
    cfg = services.config
    objective = Objective(objective)
    workdir = Path(workdir)
    budget = cfg.dse.budget if budget is None else budget
    sites = loop_sites(kernel.code, kernel.top_fn)
    result = DseResult(objective)
    plans = grid(sites)[:budget]
    # candidates are independent; results keep grid order
    with ThreadPoolExecutor(max_workers=workers or min(8, os.cpu_count() or 1)) as pool:
        result.candidates.extend(pool.map(
            lambda ip: evaluate(kernel, ip[1], services, objective, workdir / f"cand{ip[0]:03d}",
                                Candidate(ip[0], ip[1])),
            enumerate(plans),
        ))
    tdir = cfg.resolve(cfg.llm.template_dir) if cfg.llm.template_dir else None
    seen = set(plans)
    for _ in range(cfg.dse.llm_proposals if session is not None else 0):
        if len(result.candidates) >= budget:
            break
        try:
            plan, xid = propose(session, kernel, sites, objective, result.candidates, tdir)
        except BudgetExhausted:
            break
        except LlmError:
            continue
        if plan in seen:
            continue
        seen.add(plan)
        i = len(result.candidates)
        result.candidates.append(evaluate(kernel, plan, services, objective,
                                          workdir / f"cand{i:03d}", Candidate(i, plan, f"llm:{xid}")))
    result.best = pick_best(result.candidates, objective)
    return result
