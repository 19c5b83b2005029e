from __future__ import annotations

import subprocess

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2hls.csrc import parse_unit
from pqc2hls.errors import (
    NotInitFunction,
    NotStaticallySizable,
    OverlappingSpans,
    PostPatchParseFailure,
    SpanOutOfBounds,
    UnknownExtent,
    UnknownLoop,
)
from pqc2hls.xform import (
    DeterministicRule,
    Directive,
    Patch,
    Pipeline,
    PragmaDialect,
    PragmaPlan,
    Unroll,
    apply,
    flatten_aggregates,
    insert_pragmas,
    map_static_memory,
    pointers_to_arrays,
    remove_runtime_init,
    whole_text_patch,
)
from pqc2hls.xform.initrm import literal

from conftest import C_DIR, POINTER_EXTENTS, c_source

RULE = DeterministicRule("test")


# -- patches ---------------------------------------------------------------

def test_patch_splices_in_order():
    unit = parse_unit("int a;\nint b;\n")
    patched = apply(unit, Patch.build([((4, 5), "x"), ((11, 12), "y")], RULE, "rename"))
    assert patched.text == "int x;\nint y;\n"
    assert unit.text == "int a;\nint b;\n"


def test_overlap_and_bounds_are_rejected():
    unit = parse_unit("int a;\n")
    with pytest.raises(OverlappingSpans):
        apply(unit, Patch.build([((0, 3), "long"), ((2, 5), "q")], RULE, ""))
    with pytest.raises(SpanOutOfBounds):
        apply(unit, Patch.build([((5, 40), "")], RULE, ""))


def test_patch_that_breaks_parsing_is_reported():
    unit = parse_unit("int f(void) { return 1; }\n")
    with pytest.raises(PostPatchParseFailure):
        apply(unit, Patch.build([((24, 25), "")], RULE, "drop brace"))


def test_whole_text_patch_replaces_everything():
    unit = parse_unit("int a;\n")
    assert apply(unit, whole_text_patch(unit, "int b;\n", RULE, "swap")).text == "int b;\n"


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_disjoint_replacements_match_manual_splice(data):
    text = "int v0;\nint v1;\nint v2;\nint v3;\nint v4;\n"
    unit = parse_unit(text)
    names = [text.index(f"v{i}") for i in range(5)]
    chosen = data.draw(st.lists(st.sampled_from(names), unique=True, max_size=5))
    new = {pos: data.draw(st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True)) for pos in chosen}
    patched = apply(unit, Patch.build([((p, p + 2), n) for p, n in new.items()], RULE, "rename"))
    expected = text
    for p in sorted(new, reverse=True):
        expected = expected[:p] + new[p] + expected[p + 2:]
    assert patched.text == expected


# -- static memory ---------------------------------------------------------

def test_constant_malloc_becomes_static_buffer():
    unit = parse_unit(c_source("malloc_const.c"))
    patch = map_static_memory(unit)
    out = apply(unit, patch).text
    assert "malloc" not in out and "free(" not in out
    assert "[16]" in out
    assert str(patch.provenance) == "rule:map_static_memory"


def test_static_memory_is_idempotent():
    unit = parse_unit(c_source("malloc_const.c"))
    once = apply(unit, map_static_memory(unit))
    assert map_static_memory(once).is_empty


def test_runtime_size_is_not_statically_sizable():
    unit = parse_unit(c_source("malloc_runtime.c"))
    with pytest.raises(NotStaticallySizable) as err:
        map_static_memory(unit)
    assert "len" in str(err.value)


# -- runtime init ----------------------------------------------------------

def _direct_table(tmp_path, fixture: str, fn: str, table: str, count: int, fmt: str, cast: str) -> list[str]:
    """Values from running the original initializer in a hand-written program."""
    src = tmp_path / "oracle.c"
    src.write_text(
        f'#include "{C_DIR / fixture}"\n#include <stdio.h>\n'
        f"int main(void) {{ int i; {fn}(); for (i = 0; i < {count}; i++) printf(\"{fmt}\\n\", ({cast}){table}[i]); return 0; }}\n"
    )
    exe = tmp_path / "oracle"
    subprocess.run(["cc", "-O0", str(src), "-o", str(exe), "-lm"], check=True, capture_output=True)
    return subprocess.run([str(exe)], check=True, capture_output=True, text=True).stdout.split()


def test_init_removal_tables_match_direct_execution(tmp_path, toolchain):
    unit = parse_unit(c_source("toy_fft.c"))
    patch, tables = remove_runtime_init(unit, "init_tw", toolchain, tmp_path / "w")
    (tw,) = tables
    direct = _direct_table(tmp_path, "toy_fft.c", "init_tw", "tw", 16, "%a", "double")
    assert [float.fromhex(v).hex() for v in tw.values] == [float.fromhex(v).hex() for v in direct]
    out = apply(unit, patch)
    assert out.function("init_tw") is None
    assert "init_tw" not in out.text
    assert '#include "kernel_consts.h"' in out.text
    assert "static const double tw[16]" in dict(patch.files)["kernel_consts.h"]


def test_two_tables_from_one_initializer(tmp_path, toolchain):
    unit = parse_unit(c_source("two_tables.c"))
    patch, tables = remove_runtime_init(unit, "init_tables", toolchain, tmp_path / "w", stem="lut")
    assert [t.name for t in tables] == ["sq", "neg"]
    assert list(tables[1].values) == _direct_table(tmp_path, "two_tables.c", "init_tables", "neg", 8, "%lld", "long long")
    assert "lut_consts.h" in dict(patch.files)
    out = apply(unit, patch)
    assert "init_tables" not in out.text


def test_init_removal_rejects_non_initializers_and_is_idempotent(tmp_path, toolchain):
    unit = parse_unit(c_source("two_tables.c"))
    with pytest.raises(NotInitFunction):
        remove_runtime_init(unit, "lookup", toolchain, tmp_path)
    patch, _ = remove_runtime_init(unit, "init_tables", toolchain, tmp_path / "a")
    again, tables = remove_runtime_init(apply(unit, patch), "init_tables", toolchain, tmp_path / "b")
    assert again.is_empty and tables == []


@pytest.mark.parametrize("raw,kind,size,expected", [
    ("0x1.8p+1", "f", 8, "0x1.8p+1"),
    ("0x1p-1", "f", 4, "0x1p-1f"),
    ("4294967295", "u", 4, "4294967295u"),
    ("-9223372036854775808", "i", 8, "(-9223372036854775807LL - 1)"),
    ("-5", "i", 2, "-5"),
])
def test_literals_keep_every_bit(raw, kind, size, expected):
    assert literal(raw, kind, size) == expected


# -- flattening ------------------------------------------------------------

def test_pair_struct_flattens_to_scalar_cells():
    unit = parse_unit(c_source("pair_struct.c"))
    out = apply(unit, flatten_aggregates(unit, "pair_mix"))
    hls = out.function("pair_mix_hls")
    assert [p.declaration() for p in hls.params] == ["uint32_t k", "uint32_t p_lo[1]", "uint32_t p_hi[1]"]
    wrapper = out.function("pair_mix")
    assert [p.name for p in wrapper.params] == ["p", "k"]
    assert "pair_mix_hls" in out.slice_text(wrapper.span)


def test_flatten_without_aggregates_is_empty():
    unit = parse_unit(c_source("clean.c"))
    assert flatten_aggregates(unit, "xor_block").is_empty


# -- pointers --------------------------------------------------------------

def test_pointer_uses_become_indexing():
    unit = parse_unit(c_source("pointers.c"))
    out = apply(unit, pointers_to_arrays(unit, "accumulate", POINTER_EXTENTS))
    f = out.function("accumulate")
    assert [p.declaration() for p in f.params] == ["uint32_t acc[8]", "const uint32_t x[8]", "uint32_t count[1]"]
    body = out.slice_text(f.span)
    assert "acc[i] += x[i]" in body and "count[0] = count[0] + 1" in body
    assert pointers_to_arrays(out, "accumulate", POINTER_EXTENTS).is_empty


def test_extent_from_call_site():
    unit = parse_unit("static void g(int *x) { *x = 1; }\nvoid h(void) { int buf[8]; g(buf); }\n")
    out = apply(unit, pointers_to_arrays(unit, "g"))
    assert "int x[8]" in out.text and "x[0] = 1" in out.text


def test_pointer_arithmetic_escape_has_no_extent():
    unit = parse_unit("void g(int *x) { int *q = x + 1; *q = 0; }\n")
    with pytest.raises(UnknownExtent):
        pointers_to_arrays(unit, "g", {"x": 4})


# -- pragmas ---------------------------------------------------------------

def test_pragmas_land_above_their_loops():
    unit = parse_unit(c_source("toy_fft.c"))
    plan = PragmaPlan.of(("fft16", 1, Unroll(4)), ("fft16", 0, Pipeline(1)))
    out = apply(unit, insert_pragmas(unit, plan))
    lines = out.text.splitlines()
    i = next(n for n, ln in enumerate(lines) if "hls_unroll 4" in ln)
    assert lines[i + 1].lstrip().startswith("for")
    assert lines[i].startswith(" ")
    assert sum("hls_pipeline_init_interval 1" in ln for ln in lines) == 1
    assert insert_pragmas(out, plan).is_empty


def test_unroll_one_is_identity_and_bad_loops_raise():
    unit = parse_unit(c_source("toy_fft.c"))
    assert insert_pragmas(unit, PragmaPlan.of(("fft16", 0, Unroll(1)))).is_empty
    with pytest.raises(UnknownLoop):
        insert_pragmas(unit, PragmaPlan.of(("fft16", 7, Unroll(2))))


def test_dialect_templates_are_configurable():
    unit = parse_unit(c_source("clean.c"))
    dialect = PragmaDialect(unroll="#pragma HLS unroll factor={factor}", pipeline="#pragma HLS pipeline II={interval}")
    out = apply(unit, insert_pragmas(unit, PragmaPlan.of(("xor_block", 0, Unroll(2))), dialect))
    assert "#pragma HLS unroll factor=2" in out.text


@pytest.mark.parametrize("bad", [lambda: Unroll(0), lambda: Pipeline(0), lambda: Unroll(-3)])
def test_invalid_actions(bad):
    with pytest.raises(ValueError):
        bad()


@given(st.lists(st.tuples(st.sampled_from(["f", "g"]), st.integers(0, 5),
                          st.one_of(st.builds(Unroll, st.integers(1, 64)), st.builds(Pipeline, st.integers(1, 8)))),
                max_size=6))
def test_plan_serialization_round_trips(items):
    plan = PragmaPlan(tuple(Directive(f, i, a) for f, i, a in items))
    assert PragmaPlan.from_list(plan.to_list()) == plan
