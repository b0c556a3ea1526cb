"""Parser for .inv invariant-specification files.

A spec file declares location macros (pure pc predicates) and named
candidate invariants over explicit thread-index variables.  Bodies are
quantifier-free; the box modality is implicit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import ir
from .formulas import Scope, parse_formula
from .lexer import ArityError, ParseError, TokenStream, tokenize


@dataclass(frozen=True)
class MacroDef:
    name: str
    param: str
    locs: frozenset[int]


@dataclass(frozen=True)
class InvariantDef:
    name: str
    index_vars: tuple[str, ...]
    body: ir.Formula

    @property
    def index(self) -> int:
        return len(self.index_vars)


@dataclass(frozen=True)
class SpecFile:
    invariants: tuple[InvariantDef, ...]
    macros: tuple[MacroDef, ...]

    def by_name(self, name: str) -> InvariantDef:
        for inv in self.invariants:
            if inv.name == name:
                return inv
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(inv.name for inv in self.invariants)


def parse_spec(text: str, program: ir.ParamProgram, origin: str = "<spec>") -> SpecFile:
    ts = TokenStream(tokenize(text, origin), origin)
    scope = Scope(
        var_sorts={d.name: d.sort for d in program.globals + program.locals},
        local_names=set(program.local_names()),
        allow_indexed=True,
    )
    macros: list[MacroDef] = []
    invariants: list[InvariantDef] = []
    seen: set[str] = set()

    while ts.peek().kind != "eof":
        if ts.accept("macro"):
            tok = ts.peek()
            name = ts.expect_kind("ident", "a macro name").text
            if name in seen or name in scope.var_sorts:
                raise ParseError(tok.line, tok.col, f"duplicate name {name}", origin)
            ts.expect("(")
            param = ts.expect_kind("ident", "a thread variable").text
            if not ts.at(")"):
                raise ArityError(ts.peek().line, ts.peek().col, "macros take exactly one thread variable", origin)
            ts.expect(")")
            ts.expect(":=")
            body_scope = Scope(
                var_sorts=scope.var_sorts,
                local_names=scope.local_names,
                tid_vars={param},
                macros=dict(scope.macros),
                allow_indexed=True,
            )
            body = parse_formula(ts, body_scope)
            locs = _macro_locs(ts, body, param)
            macros.append(MacroDef(name, param, locs))
            scope.macros[name] = (param, locs)
            seen.add(name)
        elif ts.accept("invariant"):
            tok = ts.peek()
            name = ts.expect_kind("ident", "an invariant name").text
            if name in seen:
                raise ParseError(tok.line, tok.col, f"duplicate invariant {name}", origin)
            ts.expect("(")
            index_vars: list[str] = []
            if not ts.at(")"):
                index_vars.append(ts.expect_kind("ident", "a thread variable").text)
                while ts.accept(","):
                    index_vars.append(ts.expect_kind("ident", "a thread variable").text)
            ts.expect(")")
            if len(set(index_vars)) != len(index_vars):
                raise ParseError(tok.line, tok.col, f"repeated index variable in {name}", origin)
            ts.expect(":=")
            body_scope = Scope(
                var_sorts=scope.var_sorts,
                local_names=scope.local_names,
                tid_vars=set(index_vars),
                macros=dict(scope.macros),
                allow_indexed=True,
            )
            body = parse_formula(ts, body_scope)
            ir.check_sorts(body, program)
            invariants.append(InvariantDef(name, tuple(index_vars), body))
            seen.add(name)
        else:
            raise ts.error(f"expected 'macro' or 'invariant', found {ts.peek().text!r}")

    return SpecFile(tuple(invariants), tuple(macros))


def _macro_locs(ts: TokenStream, body: ir.Formula, param: str) -> frozenset[int]:
    """Macro bodies must be a single location predicate over the parameter."""
    if isinstance(body, ir.InLocs):
        pc = body.pc
        locs = body.locs
    elif (
        isinstance(body, ir.Cmp)
        and body.op == "="
        and isinstance(body.lhs, ir.VarRef)
        and isinstance(body.rhs, ir.LocLit)
    ):
        pc = body.lhs
        locs = frozenset((body.rhs.value,))
    else:
        raise ts.error("macro bodies must be location predicates like pc(k) in {5, 6}")
    if pc.name != ir.PC or pc.index != param or pc.primed:
        raise ts.error(f"macro bodies must constrain pc({param})")
    return locs


def pretty_spec(spec: SpecFile) -> str:
    lines: list[str] = []
    for m in spec.macros:
        locs = ", ".join(str(v) for v in sorted(m.locs))
        lines.append(f"macro {m.name}({m.param}) := pc({m.param}) in {{{locs}}}")
    if spec.macros and spec.invariants:
        lines.append("")
    for inv in spec.invariants:
        args = ", ".join(inv.index_vars)
        lines.append(f"invariant {inv.name}({args}) := {ir.pp_formula(inv.body)}")
    return "\n".join(lines) + "\n"
