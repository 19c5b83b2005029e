from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2hls.csrc import call_closure, extract_slice, parse_unit, render, render_bytes
from pqc2hls.csrc.lexer import int_value, tokenize
from pqc2hls.errors import UnknownFunction, UnresolvedDependency, UnsupportedConstruct

from conftest import C_DIR, c_source

FIXTURES = sorted(p.name for p in C_DIR.glob("*.c"))


def test_corpus_has_enough_files():
    assert len(FIXTURES) >= 8
    assert {"toy_fft.c", "sampler.c"} <= set(FIXTURES)


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip_is_byte_exact(name):
    text = c_source(name)
    assert render(parse_unit(text)) == text
    assert render_bytes(parse_unit(text.encode())) == text.encode()


def test_non_utf8_bytes_survive():
    raw = b"/* \xff\xfe */\nint x;\n"
    assert render_bytes(parse_unit(raw)) == raw


def test_function_model_of_toy_fft():
    unit = parse_unit(c_source("toy_fft.c"))
    assert unit.function_names == ["init_tw", "fft16"]
    fft = unit.function("fft16")
    assert [(lp.trip_count, lp.nesting_depth) for lp in fft.loops] == [(8, 0), (16, 1)]
    assert [p.name for p in fft.params] == ["in", "out"]
    assert unit.global_("tw").element_count == 16


def test_closure_order_and_missing_root():
    unit = parse_unit(c_source("ntt8.c"))
    assert call_closure(unit, "ntt8").functions == ["ntt8", "fqmul"]
    with pytest.raises(UnknownFunction):
        call_closure(unit, "absent")


def test_slice_keeps_what_the_root_needs():
    unit = parse_unit(c_source("ntt8.c"))
    sliced = parse_unit(extract_slice(unit, "ntt8"))
    assert set(sliced.function_names) == {"ntt8", "fqmul"}
    assert sliced.global_("zetas") is not None


def test_slice_reports_unresolved_callee():
    unit = parse_unit("int helper(int);\nint f(int x) { return helper(x); }\n")
    with pytest.raises(UnresolvedDependency):
        extract_slice(unit, "f")


@pytest.mark.parametrize("text", ["int f(void) { return 1; ", "/* open", "int f(void) { int a = 1 }"])
def test_unsupported_text_is_rejected(text):
    with pytest.raises(UnsupportedConstruct):
        parse_unit(text)


@pytest.mark.parametrize("text,value", [("16", 16), ("0x10", 16), ("16u", 16), ("010", 8), ("1.5", None), ("N", None)])
def test_int_value(text, value):
    assert int_value(text) == value


def test_tokens_cover_all_non_blank_text():
    text = c_source("macros.c")
    toks = tokenize(text, keep_comments=True)
    assert all(a.end <= b.start for a, b in zip(toks, toks[1:]))
    assert "".join(text.split()) == "".join("".join(text[t.start:t.end] for t in toks).split())


# -- properties ------------------------------------------------------------

FILLERS = st.sampled_from([" ", "  ", "\t", "\n", "\n\n", " /* c */ ", "\n// note\n", "\r\n"])


@st.composite
def perturbed_sources(draw):
    """A fixture with extra whitespace and comments inserted between tokens."""
    text = c_source(draw(st.sampled_from(FIXTURES)))
    toks = tokenize(text)
    # never split preprocessor lines: only insert after tokens that end a non-directive line segment
    cuts = [t.end for t in toks if t.kind != "pp" and t.text in (";", "{", "}", ",")]
    chosen = draw(st.lists(st.sampled_from(cuts), max_size=6, unique=True)) if cuts else []
    out, pos = [], 0
    for c in sorted(chosen):
        out.append(text[pos:c])
        out.append(draw(FILLERS))
        pos = c
    out.append(text[pos:])
    return "".join(out), text


@settings(max_examples=60, deadline=None)
@given(perturbed_sources())
def test_round_trip_survives_layout_changes(pair):
    mutated, original = pair
    unit = parse_unit(mutated)
    assert render(unit) == mutated
    assert unit.function_names == parse_unit(original).function_names


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("abcxyz_019 \n\t;{}()[]=+-*/<>!&|^~%,.?:'\"#\\")), max_size=80))
def test_parser_either_round_trips_or_raises_unsupported(text):
    try:
        unit = parse_unit(text)
    except UnsupportedConstruct:
        return
    assert render(unit) == text
