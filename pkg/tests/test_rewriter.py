import io

import pytest
from hypothesis import given, strategies as st

from helpers import FIXTURE_NAMES, manifest, plain_output, program
from routeguard.canon import SourceFile
from routeguard.errors import DescriptorError, SelectionError
from routeguard.minilang import ExitStatus, parse, run
from routeguard.rewriter import (
    CallDescriptor,
    decode_descriptor,
    encode_descriptor,
    lint_return_types,
    print_warnings,
    rewrite_calls,
)


def src(file_id, text):
    return SourceFile(file_id, f"{file_id}.ml", text)


UTIL = src(
    "util",
    "fn f1() { print(\"f1\"); }\n"
    "fn add(a: Int, b: Int) -> Int { return a + b; }\n"
    "fn f3(n: Int, s: Str, x: Int) -> Str { return s + str(n + x); }\n"
    "fn echo(s: Str) -> Str { return s; }\n",
)


class PassThrough:
    """Router stand-in: the descriptor is plaintext and taken as is."""

    def forward_call(self, envelope, args, hint=None, *, caller, target):
        d = decode_descriptor(envelope)
        file_id = target.registry.module(d.dst_file)
        full = d.literal_values() + list(args)
        return target.call_function(target.registry.lookup(file_id, d.method, len(full)), full)


def rewritten(main_text, selection=None):
    p = parse([src("main", main_text), UTIL], "main.main")
    files, pairs = rewrite_calls(p) if selection is None else rewrite_calls(p, selection)
    return p, files, pairs


def test_zero_arg_call():
    _, files, pairs = rewritten("fn main() { Util.f1(); }")
    assert files[0].text == 'fn main() { forward_call("Util-f1-null-null"); }'
    assert [d.encode() for _, d in pairs] == ["Util-f1-null-null"]


def test_runtime_args_are_forwarded():
    _, files, _ = rewritten("fn main() { let x: Int = 3; let y: Int = 4; print(Util.add(x, y)); }")
    assert 'forward_call("Util-add-null-null", x, y)' in files[0].text


def test_leading_literals_are_baked():
    _, files, pairs = rewritten('fn main() { let varX: Int = 1; print(Util.f3(7, "aString", varX)); }')
    (_, d), = pairs
    assert d.encode() == "Util-f3-Int,Str-7,aString" and d.runtime_arg_count == 1
    assert 'forward_call("Util-f3-Int,Str-7,aString", varX)' in files[0].text


def test_literal_after_runtime_arg_is_forwarded():
    _, files, pairs = rewritten("fn main() { let a: Int = 1; print(Util.add(a, 2)); }")
    assert pairs[0][1].encode() == "Util-add-null-null"
    assert 'forward_call("Util-add-null-null", a, 2)' in files[0].text


def test_hyphen_literal_is_escaped():
    _, _, pairs = rewritten('fn main() { print(Util.echo("a-b")); }')
    assert pairs[0][1].encode() == "Util-echo-Str-a%2Db"


def test_nested_calls_rewritten_inside_out():
    _, files, pairs = rewritten("fn main() { let x: Int = 1; print(Util.add(Util.add(x, 1), x)); }")
    assert len(pairs) == 2
    assert 'forward_call("Util-add-null-null", forward_call("Util-add-null-null", x, 1), x)' in files[0].text


def test_no_cross_file_calls_is_identity():
    p = parse([src("main", "// hi\nfn two() -> Int { return 2; }\nfn main() { print(two()); }\n")])
    files, pairs = rewrite_calls(p)
    assert files[0] is p.files[0] and pairs == []


def test_same_file_selection_rejected():
    p = parse([src("main", "fn two() -> Int { return 2; } fn main() { print(two()); }")])
    with pytest.raises(SelectionError):
        rewrite_calls(p, lambda site: True)


def test_unselected_calls_untouched():
    _, files, pairs = rewritten("fn main() { Util.f1(); print(Util.add(1, 2)); }", lambda s: s.callee_name == "f1")
    assert len(pairs) == 1 and "Util.add(1, 2)" in files[0].text


def test_hint_is_appended():
    p = parse([src("main", "fn main() { Util.f1(); }"), UTIL], "main.main")
    files, _ = rewrite_calls(p, hint=True)
    assert files[0].text == 'fn main() { forward_call("Util-f1-null-null", hint: "util"); }'


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_pass_through_preserves_semantics(name):
    m = manifest(name)
    p = m.program()
    files, pairs = rewrite_calls(p, m.selects)
    again = parse(files, m.entry)
    report = run(again, PassThrough())
    assert report.status is ExitStatus.NORMAL, report.error
    assert report.output == plain_output(name)
    assert len(again.forward_calls) == len(pairs)
    assert not any(s.cross_file for s in again.call_sites)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_rewrite_is_idempotent(name):
    m = manifest(name)
    files, _ = rewrite_calls(m.program(), m.selects)
    files2, pairs2 = rewrite_calls(parse(files, m.entry), m.selects)
    assert pairs2 == [] and [f.text for f in files2] == [f.text for f in files]


def test_descriptor_order_is_deterministic():
    m = manifest("shapes")
    a = [d.encode() for _, d in rewrite_calls(m.program(), m.selects)[1]]
    b = [d.encode() for _, d in rewrite_calls(m.program(), m.selects)[1]]
    assert a == b and len(a) == 12


# -- descriptor wire format ------------------------------------------------

@pytest.mark.parametrize(
    "desc, wire",
    [
        (CallDescriptor("Class1", "f1"), "Class1-f1-null-null"),
        (CallDescriptor("Class2", "f2"), "Class2-f2-null-null"),
        (CallDescriptor("Class3", "f3", ("Int", "Str"), ("7", "aString")), "Class3-f3-Int,Str-7,aString"),
        (CallDescriptor("U", "g", ("Str",), ("a-b",)), "U-g-Str-a%2Db"),
        (CallDescriptor("U", "g", ("Str",), ("null",)), "U-g-Str-null"),
        (CallDescriptor("U", "g", ("Str", "Str"), ("", "")), "U-g-Str,Str-,"),
        (CallDescriptor("U", "g", ("Str",), ("100%,-",)), "U-g-Str-100%25%2C%2D"),
    ],
)
def test_descriptor_examples(desc, wire):
    assert encode_descriptor(desc) == wire
    assert decode_descriptor(wire) == desc


@pytest.mark.parametrize("bad", ["a-b-c", "a-b-c-d-e", "U-g-null-7", "U-g-Int-1,2", "U-g-Str-%zz"])
def test_bad_descriptors(bad):
    with pytest.raises(DescriptorError):
        decode_descriptor(bad)


def test_mismatched_lengths_rejected():
    with pytest.raises(DescriptorError):
        CallDescriptor("U", "g", ("Int",), ())


hostile = st.text(alphabet=st.sampled_from(list("ab-,%2DC null\"\\é")), max_size=12)
names = st.text(alphabet=st.sampled_from(list("aZ_-,%9")), min_size=1, max_size=8)


@st.composite
def descriptors(draw):
    types = draw(st.lists(st.sampled_from(["Int", "Str", "Bool"]), max_size=4))
    values = tuple(draw(hostile) for _ in types)
    return CallDescriptor(draw(names), draw(names), tuple(types), values)


@given(descriptors())
def test_descriptor_round_trip(d):
    wire = encode_descriptor(d)
    assert wire.count("-") == 3
    assert decode_descriptor(wire) == d


# -- lint ---------------------------------------------------------------------

def test_sole_bool_function_warned():
    p = parse(
        [
            src("main", "fn main() { print(Flags.on()); print(Flags.n() + Flags.m()); }"),
            src("flags", "fn on() -> Bool { return true; } fn n() -> Int { return 1; } fn m() -> Int { return 2; }"),
        ],
        "main.main",
    )
    warnings = lint_return_types(p)
    assert [(w.callee, w.return_type, w.same_type_count) for w in warnings] == [("flags.on", "Bool", 1)]


def test_shared_int_return_type_not_warned():
    p = parse(
        [
            src("main", "fn main() { print(M.a() + M.b()); }"),
            src("m", "fn a() -> Int { return 1; } fn b() -> Int { return 2; }"),
        ],
        "main.main",
    )
    assert lint_return_types(p) == []


def test_lint3_fixture_hand_count():
    m = manifest("lint3")
    warnings = lint_return_types(m.program(), m.selects)
    assert sorted(w.callee for w in warnings) == ["flags.enabled", "log.note", "text.greet"]
    buf = io.StringIO()
    print_warnings(warnings, buf)
    assert buf.getvalue().splitlines() == [
        "WARN unique-return-type flags.enabled -> Bool",
        "WARN unique-return-type log.note -> Unit",
        "WARN unique-return-type text.greet -> Str",
    ]


def test_unselected_callee_not_warned():
    m = manifest("lint3")
    assert lint_return_types(m.program(), lambda s: s.cross_file and s.callee_file == "math") == []
