"""Recursive-descent parser for the shared formula/expression grammar.

Used for guards and initializers in program files and for invariant
bodies in spec files.  The same source grammar is produced by the pretty
printers in pinv.ir, giving the parse/print round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .. import ir
from .lexer import TokenStream

KEYWORDS = {
    "global", "procedure", "local", "begin", "end", "skip", "await", "goto",
    "if", "then", "else", "loop", "endloop", "in", "union", "setminus",
    "true", "false", "int", "bool", "set", "macro", "invariant",
}

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass
class Scope:
    """Name resolution context for formula parsing."""

    var_sorts: dict[str, ir.Sort]
    local_names: set[str]
    tid_vars: set[str] = field(default_factory=set)
    macros: dict[str, tuple[str, frozenset[int]]] = field(default_factory=dict)
    allow_bare_locals: bool = False   # program guards read own locals bare
    allow_indexed: bool = False       # spec bodies read locals as v(k)


ParseResult = Union[ir.Expr, ir.Formula]


def _to_formula(ts: TokenStream, x: ParseResult) -> ir.Formula:
    if isinstance(x, ir.Formula):
        return x
    if isinstance(x, ir.VarRef) and x.sort == ir.Sort.BOOL:
        return ir.BoolVar(x)
    if isinstance(x, ir.BoolConst):
        return ir.BoolLit(x.value)
    raise ts.error(f"expected a formula, found expression {ir.pp_expr(x)!r}")


def _to_expr(ts: TokenStream, x: ParseResult) -> ir.Expr:
    if isinstance(x, ir.Expr):
        return x
    if isinstance(x, ir.BoolVar):
        return x.ref
    if isinstance(x, ir.BoolLit):
        return ir.BoolConst(x.value)
    raise ts.error("expected an expression, found a formula")


def _sort_of(e: ir.Expr, scope: Scope) -> ir.Sort | None:
    if isinstance(e, ir.IntLit):
        return ir.Sort.INT
    if isinstance(e, ir.LocLit):
        return ir.Sort.LOC
    if isinstance(e, (ir.TidLit, ir.TidVar)):
        return ir.Sort.TID
    if isinstance(e, ir.BoolConst):
        return ir.Sort.BOOL
    if isinstance(e, ir.VarRef):
        return e.sort
    if isinstance(e, (ir.Add, ir.Sub, ir.SetMin)):
        return ir.Sort.INT
    if isinstance(e, (ir.SetEmpty, ir.SetSingleton, ir.SetUnion, ir.SetDiff)):
        return ir.Sort.SET_INT
    return None


def parse_formula(ts: TokenStream, scope: Scope) -> ir.Formula:
    return _to_formula(ts, _implies(ts, scope))


def parse_expr(ts: TokenStream, scope: Scope) -> ir.Expr:
    return _to_expr(ts, _sum(ts, scope))


def _implies(ts: TokenStream, scope: Scope) -> ParseResult:
    lhs = _or(ts, scope)
    if ts.accept("->"):
        rhs = _implies(ts, scope)
        return ir.Implies(_to_formula(ts, lhs), _to_formula(ts, rhs))
    return lhs


def _or(ts: TokenStream, scope: Scope) -> ParseResult:
    lhs = _and(ts, scope)
    if not ts.at("||"):
        return lhs
    args = [_to_formula(ts, lhs)]
    while ts.accept("||"):
        args.append(_to_formula(ts, _and(ts, scope)))
    return ir.Or(tuple(args))


def _and(ts: TokenStream, scope: Scope) -> ParseResult:
    lhs = _unary(ts, scope)
    if not ts.at("&&"):
        return lhs
    args = [_to_formula(ts, lhs)]
    while ts.accept("&&"):
        args.append(_to_formula(ts, _unary(ts, scope)))
    return ir.And(tuple(args))


def _unary(ts: TokenStream, scope: Scope) -> ParseResult:
    if ts.accept("!"):
        return ir.Not(_to_formula(ts, _unary(ts, scope)))
    return _comparison(ts, scope)


def _unify_literals(lhs: ir.Expr, rhs: ir.Expr, scope: Scope) -> tuple[ir.Expr, ir.Expr]:
    """Retype bare integer literals against the other side's sort."""
    ls, rs = _sort_of(lhs, scope), _sort_of(rhs, scope)
    if isinstance(rhs, ir.IntLit):
        if ls == ir.Sort.LOC:
            rhs = ir.LocLit(rhs.value)
        elif ls == ir.Sort.TID:
            rhs = ir.TidLit(rhs.value)
    if isinstance(lhs, ir.IntLit):
        if rs == ir.Sort.LOC:
            lhs = ir.LocLit(lhs.value)
        elif rs == ir.Sort.TID:
            lhs = ir.TidLit(lhs.value)
    return lhs, rhs


def _set_literal_locs(ts: TokenStream, e: ir.Expr) -> frozenset[int]:
    """Extract the literal elements of a {..}-literal used as a location set."""
    values: set[int] = set()

    def walk(x: ir.Expr) -> None:
        if isinstance(x, ir.SetEmpty):
            return
        if isinstance(x, ir.SetSingleton) and isinstance(x.elem, (ir.IntLit, ir.LocLit)):
            values.add(x.elem.value)
            return
        if isinstance(x, ir.SetUnion):
            walk(x.lhs)
            walk(x.rhs)
            return
        raise ts.error("location sets must list literal locations")

    walk(e)
    return frozenset(values)


def _comparison(ts: TokenStream, scope: Scope) -> ParseResult:
    lhs = _sum(ts, scope)
    tok = ts.peek()
    if tok.text in _CMP_OPS and tok.kind == "op":
        op = ts.next().text
        rhs = _sum(ts, scope)
        le, re_ = _unify_literals(_to_expr(ts, lhs), _to_expr(ts, rhs), scope)
        if op == ">":
            return ir.Cmp("<", re_, le)
        if op == ">=":
            return ir.Cmp("<=", re_, le)
        return ir.Cmp(op, le, re_)
    if ts.at("in") and tok.kind == "ident":
        ts.next()
        elem = _to_expr(ts, lhs)
        rhs = _to_expr(ts, _sum(ts, scope))
        if _sort_of(elem, scope) == ir.Sort.LOC:
            if not isinstance(elem, ir.VarRef):
                raise ts.error("location membership applies to pc reads")
            return ir.InLocs(elem, _set_literal_locs(ts, rhs))
        return ir.InSet(elem, rhs)
    return lhs


def _sum(ts: TokenStream, scope: Scope) -> ParseResult:
    lhs = _postfix(ts, scope)
    while True:
        if ts.at("+") or ts.at("-"):
            op = ts.next().text
            rhs = _to_expr(ts, _postfix(ts, scope))
            le = _to_expr(ts, lhs)
            lhs = ir.Add(le, rhs) if op == "+" else ir.Sub(le, rhs)
        elif ts.at("union") or ts.at("setminus"):
            op = ts.next().text
            rhs = _to_expr(ts, _postfix(ts, scope))
            le = _to_expr(ts, lhs)
            lhs = ir.SetUnion(le, rhs) if op == "union" else ir.SetDiff(le, rhs)
        else:
            return lhs


def _postfix(ts: TokenStream, scope: Scope) -> ParseResult:
    x = _primary(ts, scope)
    while ts.at("."):
        ts.next()
        field_tok = ts.expect_kind("ident", "a field name")
        if field_tok.text != "setMin":
            raise ts.error(f"unknown operator .{field_tok.text}")
        x = ir.SetMin(_to_expr(ts, x))
    return x


def _var_ref(ts: TokenStream, scope: Scope, name: str) -> ParseResult:
    sort = scope.var_sorts[name]
    is_local = name in scope.local_names
    if ts.at("(") and is_local:
        if not scope.allow_indexed:
            raise ts.error(f"thread-indexed reads like {name}(k) are not allowed here")
        ts.next()
        idx = ts.expect_kind("ident", "a thread variable")
        if idx.text not in scope.tid_vars:
            raise ts.error(f"unbound thread variable {idx.text!r}")
        ts.expect(")")
        return ir.VarRef(name, sort, False, idx.text)
    if is_local and not scope.allow_bare_locals:
        raise ts.error(f"local variable {name} requires a thread index, e.g. {name}(k)")
    return ir.VarRef(name, sort, False, None)


def _primary(ts: TokenStream, scope: Scope) -> ParseResult:
    tok = ts.peek()
    if tok.kind == "num":
        ts.next()
        return ir.IntLit(int(tok.text))
    if tok.text == "true" and tok.kind == "ident":
        ts.next()
        return ir.BoolLit(True)
    if tok.text == "false" and tok.kind == "ident":
        ts.next()
        return ir.BoolLit(False)
    if ts.accept("("):
        inner = _implies(ts, scope)
        ts.expect(")")
        return inner
    if ts.accept("{"):
        if ts.accept("}"):
            return ir.SetEmpty()
        elems = [_to_expr(ts, _sum(ts, scope))]
        while ts.accept(","):
            elems.append(_to_expr(ts, _sum(ts, scope)))
        ts.expect("}")
        out: ir.Expr = ir.SetSingleton(elems[0])
        for e in elems[1:]:
            out = ir.SetUnion(out, ir.SetSingleton(e))
        return out
    if tok.kind == "ident":
        name = ts.next().text
        if name in scope.macros:
            param, locs = scope.macros[name]
            ts.expect("(")
            idx = ts.expect_kind("ident", "a thread variable")
            if idx.text not in scope.tid_vars:
                raise ts.error(f"unbound thread variable {idx.text!r}")
            ts.expect(")")
            return ir.InLocs(ir.VarRef(ir.PC, ir.Sort.LOC, False, idx.text), locs)
        if name in scope.var_sorts:
            return _var_ref(ts, scope, name)
        if name in scope.tid_vars:
            return ir.TidVar(name)
        raise ts.error(f"unknown identifier {name!r}")
    raise ts.error(f"unexpected token {tok.text!r}")
