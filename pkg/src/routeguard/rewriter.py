"""Call descriptors, call-site rewriting, and the unique-return-type lint.

Descriptor wire format (hyphen separated, four fields)::

    <dst>-<method>-<Type,Type,...>-<value,value,...>

Empty lists are written ``null``. Inside every item ``%``, ``-`` and ``,``
are percent-escaped (``%25``, ``%2D``, ``%2C``) so the format stays
decodable whatever the literal values contain.

Only the leading run of literal arguments is baked into the descriptor;
from the first non-literal argument on, every argument is forwarded at run
time in its original order. ``f3(7, "s", x)`` therefore bakes ``7, "s"``
and forwards ``x``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .canon import SourceFile
from .errors import DescriptorError, SelectionError
from .minilang.lexer import quote
from .minilang.nodes import LITERALS, BoolLit, IntLit, StrLit
from .minilang.program import CallSite, Program

NULL = "null"
LITERAL_TYPES = {IntLit: "Int", StrLit: "Str", BoolLit: "Bool"}


def _escape(item: str) -> str:
    return item.replace("%", "%25").replace("-", "%2D").replace(",", "%2C")


def _unescape(item: str) -> str:
    if "%" not in item:
        return item
    out, i, n = [], 0, len(item)
    while i < n:
        ch = item[i]
        if ch == "%":
            code = item[i + 1 : i + 3].upper()
            if code == "25":
                out.append("%")
            elif code == "2D":
                out.append("-")
            elif code == "2C":
                out.append(",")
            else:
                raise DescriptorError(f"bad escape %{code} in {item!r}")
            i += 3
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def literal_text(value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    return str(value)


@dataclass(frozen=True)
class CallDescriptor:
    dst_file: str
    method: str
    literal_param_types: tuple = ()
    literal_param_values: tuple = ()  # wire text of each literal
    # not on the wire; known to the rewriter, re-supplied at run time
    runtime_arg_count: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.literal_param_types) != len(self.literal_param_values):
            raise DescriptorError("literal types and values differ in length")

    def encode(self) -> str:
        return encode_descriptor(self)

    def literal_values(self) -> list:
        """Baked literals as minilang values."""
        out = []
        for ty, text in zip(self.literal_param_types, self.literal_param_values):
            if ty == "Int":
                try:
                    out.append(int(text))
                except ValueError:
                    raise DescriptorError(f"bad Int literal {text!r}") from None
            elif ty == "Str":
                out.append(text)
            elif ty == "Bool" and text in ("true", "false"):
                out.append(text == "true")
            else:
                raise DescriptorError(f"bad literal {text!r} of type {ty!r}")
        return out


def _join(items) -> str:
    return ",".join(_escape(i) for i in items) if items else NULL


def encode_descriptor(d: CallDescriptor) -> str:
    return "-".join(
        (
            _escape(d.dst_file),
            _escape(d.method),
            _join(d.literal_param_types),
            _join(d.literal_param_values),
        )
    )


def decode_descriptor(text: str) -> CallDescriptor:
    parts = text.split("-")
    if len(parts) != 4:
        raise DescriptorError(f"descriptor needs 4 fields, got {len(parts)}")
    dst, method, types, values = parts
    if types == NULL:
        if values != NULL:
            raise DescriptorError("values given without types")
        return CallDescriptor(_unescape(dst), _unescape(method))
    type_list = tuple(_unescape(t) for t in types.split(","))
    # the type list fixes the value count, so a lone value "null" is not the empty list
    value_list = tuple(_unescape(v) for v in values.split(","))
    if len(value_list) != len(type_list):
        raise DescriptorError(f"{len(type_list)} types but {len(value_list)} values")
    return CallDescriptor(_unescape(dst), _unescape(method), type_list, value_list)


def split_args(args) -> tuple[list, list]:
    """(baked literal prefix, forwarded remainder)."""
    k = 0
    while k < len(args) and isinstance(args[k], LITERALS):
        k += 1
    return list(args[:k]), list(args[k:])


def descriptor_for(site: CallSite) -> CallDescriptor:
    baked, forwarded = split_args(site.args)
    return CallDescriptor(
        site.qualifier or site.callee_file,
        site.callee_name,
        tuple(LITERAL_TYPES[type(a)] for a in baked),
        tuple(literal_text(a.value) for a in baked),
        len(forwarded),
    )


Selection = Callable[[CallSite], bool]


def all_cross_file(site: CallSite) -> bool:
    return site.cross_file


def _ordered(program: Program, selection: Selection) -> list[CallSite]:
    order = {sf.file_id: i for i, sf in enumerate(program.files)}
    chosen = []
    for site in program.call_sites:
        if selection(site):
            if not site.cross_file:
                raise SelectionError(
                    f"{site.caller_file}:{site.line}: same-file call {site.callee_name} cannot be routed"
                )
            chosen.append(site)
    chosen.sort(key=lambda s: (order[s.caller_file], s.span))
    return chosen


def rewrite_calls(
    program: Program, selection: Selection = all_cross_file, *, hint: bool = False
) -> tuple[list[SourceFile], list[tuple[CallSite, CallDescriptor]]]:
    """Replace selected ``F.g(a, ...)`` calls with ``forward_call("<descriptor>", ...)``.

    Descriptors are written in plaintext; sealing happens later. Text outside
    the rewritten spans (comments included) is left byte-for-byte alone.
    """
    chosen = _ordered(program, selection)
    by_file: dict[str, list[CallSite]] = {}
    for site in chosen:
        by_file.setdefault(site.caller_file, []).append(site)
    pairs = [(site, descriptor_for(site)) for site in chosen]
    descs = {id(site): d for site, d in pairs}

    out = []
    for sf in program.files:
        sites = by_file.get(sf.file_id)
        if not sites:
            out.append(sf)
            continue
        text = sf.text

        def splice(lo: int, hi: int) -> str:
            parts, cursor = [], lo
            for site in sites:
                start, end = site.span
                if start < cursor or end > hi:
                    continue
                parts.append(text[cursor:start])
                parts.append(build(site))
                cursor = end
            parts.append(text[cursor:hi])
            return "".join(parts)

        def build(site: CallSite) -> str:
            d = descs[id(site)]
            _, forwarded = split_args(site.args)
            args = [quote(d.encode())]
            args.extend(splice(a.start, a.end) for a in forwarded)
            if hint:
                args.append(f"hint: {quote(site.callee_file)}")
            return f"forward_call({', '.join(args)})"

        out.append(SourceFile(sf.file_id, sf.path, splice(0, len(text))))
    return out, pairs


@dataclass(frozen=True)
class LintWarning:
    callee: str  # "file.fn"
    return_type: str
    same_type_count: int

    def __str__(self) -> str:
        return f"WARN unique-return-type {self.callee} -> {self.return_type}"


def lint_return_types(program: Program, selection: Selection = all_cross_file) -> list[LintWarning]:
    """Flag selected callees that are the only function returning their type.

    Such a callee is easy to recover from a sealed call by looking at how
    its result is used.
    """
    counts: dict[str, int] = {}
    for f in program.functions:
        counts[f.return_type] = counts.get(f.return_type, 0) + 1
    flagged = {}
    for site in _ordered(program, selection):
        fdef = program.registry.lookup(site.callee_file, site.callee_name, len(site.args))
        if counts[fdef.return_type] == 1:
            flagged[fdef.qualname] = LintWarning(fdef.qualname, fdef.return_type, 1)
    return [flagged[k] for k in sorted(flagged)]


def print_warnings(warnings: Iterable[LintWarning], stream=None) -> None:
    stream = stream or sys.stderr
    for w in warnings:
        print(w, file=stream)
