"""Command-line entry point: ``pqc2hls <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .blockers import scan
from .config import Config, load_config
from .csrc.parser import parse_unit
from .errors import Pqc2HlsError
from .loop.campaign import CampaignStats, load_campaign, run_campaign
from .loop.dse import dse
from .loop.extract import extract_kernel
from .loop.kernel import load_bundle, save_bundle
from .loop.preprocess import preprocess
from .loop.services import services_from_config
from .report import ReportDocument, campaign_table, fpga_table, verify_document
from .synth.backends import Objective
from .synth.metrics import PpaMetrics

EXIT_OK, EXIT_ERROR, EXIT_BLOCKERS = 0, 2, 3
REPORT_JSON, REPORT_TXT = "report.json", "report.txt"

log = logging.getLogger("pqc2hls")


class UsageError(Exception):
    pass


def _config(args) -> Config:
    cfg = load_config(getattr(args, "config", None))
    over: dict[str, dict] = {}
    if getattr(args, "parallel", None) is not None:
        over.setdefault("campaign", {})["parallel"] = args.parallel
    if getattr(args, "seed", None) is not None and args.command == "convert":
        over.setdefault("campaign", {})["seed"] = args.seed
    if getattr(args, "budget", None) is not None:
        over.setdefault("dse", {})["budget"] = args.budget
    if getattr(args, "max_iterations", None) is not None:
        over.setdefault("loop", {})["max_iterations"] = args.max_iterations
    return cfg.with_overrides(**over) if over else cfg


def _pairs(items: list[str] | None, flag: str, conv=str) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"{flag} expects name=value, got {item!r}")
        try:
            out[name] = conv(value)
        except ValueError as exc:
            raise UsageError(f"{flag} {item}: {exc}") from exc
    return out


# -- commands --------------------------------------------------------------

def cmd_analyze(args) -> int:
    text = Path(args.path).read_text(encoding="utf-8", errors="surrogateescape")
    report = scan(parse_unit(text))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.clean else EXIT_BLOCKERS


def cmd_extract(args) -> int:
    if args.kats < 0:
        raise UsageError("--kats must be >= 0")
    cfg = _config(args)
    if args.kats == 0:
        log.warning("--kats 0: the bundle carries an empty suite and nothing is verified")
    out = Path(args.out)
    kernel = extract_kernel(
        args.paths, args.target, args.kats, args.seed, cfg.toolchain, out / "work",
        domains=_pairs(args.domain, "--domain"), extents=_pairs(args.extent, "--extent", int),
        name=args.name,
    )
    save_bundle(kernel, out)
    print(f"{kernel.name}: {len(kernel.suite)} KATs, self-test passed, bundle in {out}")
    return EXIT_OK


def cmd_preprocess(args) -> int:
    cfg = _config(args)
    kernel = load_bundle(args.kernel)
    services = services_from_config(cfg)
    out = Path(args.out)
    session = services.session("preprocess")
    result = preprocess(kernel, services, out / "work", session)
    save_bundle(result.kernel, out, {"preprocess": [s.__dict__ for s in result.steps]})
    for s in result.steps:
        state = "applied" if s.applied else "skipped"
        print(f"{s.name}: {state}{' (' + s.provenance + ')' if s.provenance else ''}{'; ' + s.warning if s.warning else ''}")
    return EXIT_OK


def _tools(cfg: Config, services) -> dict:
    return {
        "compiler": list(cfg.toolchain_section.compiler_command),
        "backend": getattr(services.backend, "name", type(services.backend).__name__),
        "provider": getattr(services.provider, "name", type(services.provider).__name__),
        "model": cfg.llm.model,
        "version": __version__,
    }


def _write_report(doc: ReportDocument, out: Path) -> str:
    doc.dump(out / REPORT_JSON)
    text = campaign_table([(doc.benchmark, _stats(doc))])
    device = doc.config.get("synth", {}).get("device") or "-"
    fpga = [(f"{doc.benchmark} {a['attempt_id']}", device, m) for a, m in _fpga_metrics(doc)]
    if fpga:
        text += "\n" + fpga_table(fpga)
    (out / REPORT_TXT).write_text(text, encoding="utf-8")
    return text


def _stats(doc: ReportDocument) -> CampaignStats:
    return CampaignStats.from_transcripts(doc.transcripts())


def _fpga_metrics(doc: ReportDocument):
    for a in doc.attempts:
        o = a.get("outcome") or {}
        if o.get("status") == "Pass":
            m = PpaMetrics.from_dict(o["metrics"])
            if m.is_fpga:
                yield a, m


def cmd_convert(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    cfg = _config(args)
    kernel = load_bundle(args.kernel)
    services = services_from_config(cfg)
    out = Path(args.out)
    result = run_campaign(kernel, services, out, args.runs, args.objective, with_dse=args.dse)
    doc = ReportDocument.build(args.benchmark or kernel.name, result.transcripts,
                               _tools(cfg, services), cfg.snapshot())
    sys.stdout.write(_write_report(doc, out))
    return EXIT_OK


def cmd_dse(args) -> int:
    cfg = _config(args)
    kernel = load_bundle(args.kernel)
    services = services_from_config(cfg)
    out = Path(args.out)
    session = services.session("dse") if cfg.dse.llm_proposals else None
    result = dse(kernel, services, out / "work", args.objective, session)
    out.mkdir(parents=True, exist_ok=True)
    (out / "dse.json").write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for c in result.candidates:
        m = c.metrics
        res = ", ".join(f"{k}={v}" for k, v in m.to_dict().items()) if m else c.error
        mark = "*" if c is result.best else " "
        print(f"{mark} {c.index:3d}  {c.plan.describe()}  {res}")
    return EXIT_OK


def cmd_report(args) -> int:
    root = Path(args.dir)
    stored = root / REPORT_JSON
    transcripts = load_campaign(root)
    if not transcripts:
        raise UsageError(f"{root} holds no attempt transcripts")
    if stored.exists():
        doc = ReportDocument.load(stored)
        problems = verify_document(doc, root)
        if problems:
            for p in problems:
                print(f"error: {p}", file=sys.stderr)
            return EXIT_ERROR
    else:
        for t in transcripts:
            t.validate()
        doc = ReportDocument.build(args.benchmark or root.name, transcripts)
    if args.benchmark:
        doc.benchmark = args.benchmark
    text = campaign_table([(doc.benchmark, _stats(doc))])
    if args.json:
        text = doc.dumps()
    sys.stdout.write(text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pqc2hls", description="Refactor crypto-kernel C into HLS-ready C.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="list HLS blockers in a C file")
    a.add_argument("path")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("extract", help="slice a kernel and generate its KAT suite")
    e.add_argument("paths", nargs="+")
    e.add_argument("--target", required=True)
    e.add_argument("--kats", type=int, default=1000)
    e.add_argument("--seed", type=int, default=1)
    e.add_argument("--out", required=True)
    e.add_argument("--name")
    e.add_argument("--domain", action="append", metavar="FIELD=SPEC")
    e.add_argument("--extent", action="append", metavar="PARAM=N")
    e.add_argument("--config")
    e.set_defaults(func=cmd_extract)

    pp = sub.add_parser("preprocess", help="apply deterministic HLS transforms to a bundle")
    pp.add_argument("kernel")
    pp.add_argument("--out", required=True)
    pp.add_argument("--config")
    pp.set_defaults(func=cmd_preprocess)

    c = sub.add_parser("convert", help="run a conversion campaign on a bundle")
    c.add_argument("kernel")
    c.add_argument("--config")
    c.add_argument("--runs", type=int, default=10)
    c.add_argument("--objective", choices=[o.value for o in Objective], default="area")
    c.add_argument("--out", required=True)
    c.add_argument("--benchmark")
    c.add_argument("--parallel", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--max-iterations", type=int, dest="max_iterations")
    c.add_argument("--dse", action="store_true", help="explore pragmas after each passing attempt")
    c.set_defaults(func=cmd_convert)

    d = sub.add_parser("dse", help="explore loop pragmas on an HLS-ready bundle")
    d.add_argument("kernel")
    d.add_argument("--config")
    d.add_argument("--objective", choices=[o.value for o in Objective], default="area")
    d.add_argument("--budget", type=int)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_dse)

    r = sub.add_parser("report", help="recompute and print a campaign report")
    r.add_argument("dir")
    r.add_argument("--benchmark")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (Pqc2HlsError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        print("interrupted; completed attempts are kept", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
