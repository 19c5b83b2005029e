"""A verified kernel: code, top function, KAT suite, and its on-disk bundle."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..csrc.model import SourceUnit
from ..csrc.parser import parse_unit
from ..errors import CompilerNotFound, ConfigError, ExecutionFailed, Pqc2HlsError, ProtocolError, Timeout
from ..verify.harness import KERNEL_FILE, build_harness, gen_harness, run_kats
from ..verify.kat import FieldSpec, KatOutcome, KatSuite, load_kats
from ..verify.toolchain import ToolchainConfig

MANIFEST = "kernel.json"
KATS = "kats.rsp"
HARNESS = "harness.c"


@dataclass(frozen=True)
class Kernel:
    name: str
    unit: SourceUnit
    top_fn: str
    suite: KatSuite
    headers: dict[str, str] = field(default_factory=dict, compare=False)
    extents: dict[str, int] = field(default_factory=dict, compare=False)

    @property
    def schema(self) -> tuple[FieldSpec, ...]:
        return self.suite.schema

    @property
    def code(self) -> str:
        return self.unit.text

    def with_code(self, code: str | SourceUnit, headers: dict[str, str] | None = None) -> "Kernel":
        unit = code if isinstance(code, SourceUnit) else parse_unit(code)
        merged = dict(self.headers)
        merged.update(headers or {})
        return replace(self, unit=unit, headers=merged)


@dataclass(frozen=True)
class Check:
    """Outcome of building a candidate and running the kernel's KATs on it."""

    compiled: bool
    compile_log: str
    kat: KatOutcome | None = None
    kat_error: str = ""

    @property
    def ok(self) -> bool:
        return self.compiled and self.kat is not None and self.kat.ok

    @property
    def evidence(self) -> str:
        if not self.compiled:
            return self.compile_log or "compilation failed"
        if self.kat is None:
            return self.kat_error
        if self.kat.first_mismatch is not None:
            m = self.kat.first_mismatch
            return f"{self.kat.failed} of {self.kat.total} cases failed; first: {m.describe()}"
        return ""


def build_only(kernel: Kernel, code: str, toolchain: ToolchainConfig, workdir: Path,
               headers: dict[str, str] | None = None):
    hdrs = dict(kernel.headers)
    hdrs.update(headers or {})
    # for the loop an unparseable or unbindable candidate is just a failed compile
    try:
        unit = parse_unit(code)
    except Pqc2HlsError as exc:
        return None, f"candidate does not parse: {exc}"
    try:
        res = build_harness(code, kernel.top_fn, kernel.schema, toolchain, workdir, hdrs, kernel.extents, unit)
    except (CompilerNotFound, OSError):
        raise
    except Timeout as exc:
        return None, str(exc)
    except Pqc2HlsError as exc:
        return None, f"harness cannot bind the candidate: {exc}"
    if not res.ok:
        return None, res.stderr.strip() or f"compiler exited with status {res.status}"
    return res, res.stderr


def check(kernel: Kernel, code: str, toolchain: ToolchainConfig, workdir: Path,
          headers: dict[str, str] | None = None) -> Check:
    res, log = build_only(kernel, code, toolchain, workdir, headers)
    if res is None:
        return Check(False, log)
    return run_check(kernel, res.binary, toolchain, log)


def run_check(kernel: Kernel, binary: Path, toolchain: ToolchainConfig, log: str = "") -> Check:
    try:
        outcome = run_kats(binary, kernel.suite, toolchain.timeout_seconds)
    except ExecutionFailed as exc:
        return Check(True, log, None, f"harness exited with status {exc.status}\n{exc.stderr.strip()}".strip())
    except (Timeout, ProtocolError) as exc:
        return Check(True, log, None, str(exc))
    return Check(True, log, outcome)


# -- bundle ----------------------------------------------------------------

def save_bundle(kernel: Kernel, out: Path | str, extra: dict | None = None) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / KERNEL_FILE).write_text(kernel.code, encoding="utf-8", errors="surrogateescape")
    for name, text in kernel.headers.items():
        (out / name).write_text(text, encoding="utf-8")
    (out / HARNESS).write_text(gen_harness(kernel.unit, kernel.top_fn, kernel.schema, kernel.extents),
                               encoding="utf-8")
    kernel.suite.dump(out / KATS)
    manifest = {
        "name": kernel.name,
        "top": kernel.top_fn,
        "schema": [f.to_dict() for f in kernel.schema],
        "seed": kernel.suite.seed,
        "cases": len(kernel.suite),
        "headers": sorted(kernel.headers),
        "extents": kernel.extents,
        **(extra or {}),
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def load_bundle(path: Path | str) -> Kernel:
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST).read_text(encoding="utf-8"))
        code = (path / KERNEL_FILE).read_text(encoding="utf-8", errors="surrogateescape")
    except FileNotFoundError as exc:
        raise ConfigError(f"{path} is not a kernel bundle: missing {Path(exc.filename).name}") from exc
    suite = load_kats(path / KATS)
    schema = tuple(FieldSpec.from_dict(d) for d in manifest["schema"])
    if [f.header() for f in schema] != [f.header() for f in suite.schema]:
        raise ConfigError(f"{path}: KAT schema disagrees with {MANIFEST}")
    suite = KatSuite(suite.cases, schema, suite.seed)
    headers = {h: (path / h).read_text(encoding="utf-8") for h in manifest.get("headers", [])}
    return Kernel(manifest["name"], parse_unit(code), manifest["top"], suite, headers,
                  {k: int(v) for k, v in manifest.get("extents", {}).items()})
