"""Parser for .prg program files.

Programs are a ``global`` block of typed, initialized declarations plus a
single ``procedure main()`` whose numbered statements compile to one
transition per location (one per arm for ``if``).  ``loop``/``endloop``
are sugar for a trailing ``goto``.  Initial conditions are split into a
global part and a per-thread local part.
"""

from __future__ import annotations

from .. import evaluator, ir
from .formulas import KEYWORDS, Scope, parse_expr, parse_formula
from .lexer import DuplicateLocation, ParseError, TokenStream, tokenize

_TYPES = {"int": ir.Sort.INT, "bool": ir.Sort.BOOL}


def _parse_type(ts: TokenStream) -> ir.Sort:
    tok = ts.peek()
    if tok.text in _TYPES:
        ts.next()
        return _TYPES[tok.text]
    if ts.accept("set"):
        ts.expect("<")
        ts.expect("int")
        ts.expect(">")
        return ir.Sort.SET_INT
    raise ts.error(f"expected a type, found {tok.text!r}")


def _literal_value(ts: TokenStream, e: ir.Expr) -> None:
    """Initializers must be closed literal expressions."""
    try:
        evaluator.eval_expr(e, evaluator.Env({}))
    except evaluator.EvalError:
        raise ts.error("initializer must be a literal expression") from None


def _parse_decls(ts: TokenStream, scope: Scope, local: bool) -> list[ir.VarDecl]:
    decls = []
    while ts.peek().kind == "ident" and ts.peek().text not in KEYWORDS:
        name_tok = ts.next()
        name = name_tok.text
        if name in scope.var_sorts:
            raise ParseError(name_tok.line, name_tok.col, f"duplicate variable {name}", ts.origin)
        ts.expect(":")
        sort = _parse_type(ts)
        ts.expect("=")
        init = parse_expr(ts, scope)
        _literal_value(ts, init)
        decls.append(ir.VarDecl(name, sort, init))
        scope.var_sorts[name] = sort
        if local:
            scope.local_names.add(name)
    return decls


class _Stmt:
    def __init__(self, loc: int, kind: str, **kw):
        self.loc = loc
        self.kind = kind
        self.kw = kw


def parse_program(text: str, origin: str = "<program>") -> ir.ParamProgram:
    ts = TokenStream(tokenize(text, origin), origin)
    scope = Scope(var_sorts={}, local_names=set(), allow_bare_locals=True)

    global_decls: list[ir.VarDecl] = []
    if ts.accept("global"):
        global_decls = _parse_decls(ts, scope, local=False)

    ts.expect("procedure")
    proc_name = ts.expect_kind("ident", "a procedure name").text
    ts.expect("(")
    ts.expect(")")

    local_decls: list[ir.VarDecl] = []
    if ts.accept("local"):
        local_decls = _parse_decls(ts, scope, local=True)

    # pc is a distinguished local: first in layout order, never assignable.
    scope.var_sorts[ir.PC] = ir.Sort.LOC
    scope.local_names.add(ir.PC)

    ts.expect("begin")
    stmts = _parse_statements(ts, scope)
    ts.expect("end")
    if ts.peek().kind != "eof":
        raise ts.error("trailing input after 'end'")
    if not stmts:
        raise ts.error("procedure body is empty")

    transitions = _compile_statements(ts, scope, stmts)
    num_locs = max(s.loc for s in stmts)
    for t in transitions:
        if not 1 <= t.next_loc <= num_locs:
            raise ParseError(1, 1, f"transition target {t.next_loc} out of range 1..{num_locs}", origin)

    theta_global = ir.conj(
        _init_eq(d) for d in global_decls
    )
    theta_local = ir.conj(
        [_init_eq(d) for d in local_decls]
        + [ir.Cmp("=", ir.VarRef(ir.PC, ir.Sort.LOC, False, None), ir.LocLit(1))]
    )

    program = ir.ParamProgram(
        name=proc_name,
        globals=tuple(global_decls),
        locals=tuple([ir.VarDecl(ir.PC, ir.Sort.LOC, ir.LocLit(1))] + local_decls),
        transitions=tuple(transitions),
        theta_global=theta_global,
        theta_local=theta_local,
    )
    for t in program.transitions:
        ir.check_sorts(t.guard, program)
        for target, value in t.effect:
            if ir.expr_sort(value, program) != target.sort:
                raise ParseError(
                    1, 1, f"assignment to {target.name} has mismatched sort", origin
                )
    return program


def _init_eq(d: ir.VarDecl) -> ir.Formula:
    ref = ir.VarRef(d.name, d.sort, False, None)
    if d.sort == ir.Sort.BOOL:
        assert isinstance(d.init, ir.BoolConst)
        return ir.BoolVar(ref) if d.init.value else ir.Not(ir.BoolVar(ref))
    return ir.Cmp("=", ref, d.init)


def _parse_statements(ts: TokenStream, scope: Scope) -> list[_Stmt]:
    stmts: list[_Stmt] = []
    loop_starts: list[int] = []
    next_loc = 1

    def claim_location() -> int:
        nonlocal next_loc
        loc = next_loc
        next_loc += 1
        return loc

    while not ts.at("end"):
        tok = ts.peek()
        if tok.kind == "eof":
            raise ts.error("expected 'end'")
        label = None
        if tok.kind == "num":
            label = int(ts.next().text)
            ts.expect(":")
        if label is not None:
            if label < next_loc:
                raise DuplicateLocation(tok.line, tok.col, f"location {label} already used", ts.origin)
            if label != next_loc:
                raise ParseError(tok.line, tok.col, f"location label {label} does not match position {next_loc}", ts.origin)

        if ts.accept("loop"):
            if label is not None:
                raise ts.error("'loop' markers carry no location")
            loop_starts.append(next_loc)
            continue
        if ts.accept("endloop"):
            if not loop_starts:
                raise ts.error("'endloop' without matching 'loop'")
            stmts.append(_Stmt(claim_location(), "goto", target=loop_starts.pop()))
            continue
        if ts.accept("skip"):
            stmts.append(_Stmt(claim_location(), "skip"))
            continue
        if ts.accept("await"):
            guard = parse_formula(ts, scope)
            stmts.append(_Stmt(claim_location(), "await", guard=guard))
            continue
        if ts.accept("goto"):
            target = int(ts.expect_kind("num", "a location number").text)
            stmts.append(_Stmt(claim_location(), "goto", target=target))
            continue
        if ts.accept("if"):
            cond = parse_formula(ts, scope)
            ts.expect("then")
            then_loc = int(ts.expect_kind("num", "a location number").text)
            ts.expect("else")
            else_loc = int(ts.expect_kind("num", "a location number").text)
            stmts.append(_Stmt(claim_location(), "if", cond=cond, then_loc=then_loc, else_loc=else_loc))
            continue
        if ts.accept("{"):
            assigns = [_parse_assign(ts, scope)]
            while ts.accept(";"):
                if ts.at("}"):
                    break
                assigns.append(_parse_assign(ts, scope))
            ts.expect("}")
            stmts.append(_Stmt(claim_location(), "assign", assigns=assigns))
            continue
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            assigns = [_parse_assign(ts, scope)]
            stmts.append(_Stmt(claim_location(), "assign", assigns=assigns))
            continue
        raise ts.error(f"expected a statement, found {tok.text!r}")
    return stmts


def _parse_assign(ts: TokenStream, scope: Scope) -> tuple[str, ir.Expr]:
    name_tok = ts.expect_kind("ident", "a variable name")
    name = name_tok.text
    if name == ir.PC:
        raise ParseError(name_tok.line, name_tok.col, "pc is not assignable", ts.origin)
    if name not in scope.var_sorts:
        raise ParseError(name_tok.line, name_tok.col, f"unknown variable {name!r}", ts.origin)
    ts.expect(":=")
    value = parse_expr(ts, scope)
    return name, value


def _compile_statements(
    ts: TokenStream, scope: Scope, stmts: list[_Stmt]
) -> list[ir.Transition]:
    all_names = frozenset(n for n in scope.var_sorts if n != ir.PC)
    tid_param = "k"
    out: list[ir.Transition] = []
    for s in stmts:
        if s.kind == "skip":
            out.append(_mk(scope, s.loc, tid_param, ir.TRUE, (), s.loc + 1, all_names))
        elif s.kind == "await":
            out.append(_mk(scope, s.loc, tid_param, s.kw["guard"], (), s.loc + 1, all_names))
        elif s.kind == "goto":
            out.append(_mk(scope, s.loc, tid_param, ir.TRUE, (), s.kw["target"], all_names))
        elif s.kind == "if":
            cond = s.kw["cond"]
            out.append(_mk(scope, s.loc, tid_param, cond, (), s.kw["then_loc"], all_names))
            out.append(_mk(scope, s.loc, tid_param, ir.Not(cond), (), s.kw["else_loc"], all_names))
        elif s.kind == "assign":
            effect = tuple(
                (ir.VarRef(name, scope.var_sorts[name], False, None), value)
                for name, value in s.kw["assigns"]
            )
            out.append(_mk(scope, s.loc, tid_param, ir.TRUE, effect, s.loc + 1, all_names))
        else:  # pragma: no cover
            raise AssertionError(s.kind)
    return out


def _mk(scope, loc, tid_param, guard, effect, next_loc, all_names) -> ir.Transition:
    assigned = frozenset(target.name for target, _ in effect)
    return ir.Transition(
        location=loc,
        tid_param=tid_param,
        guard=guard,
        effect=effect,
        next_loc=next_loc,
        preserved=all_names - assigned,
    )


# ---------------------------------------------------------------------------
# Pretty printing (round-trip with parse_program)
# ---------------------------------------------------------------------------


def pretty_program(p: ir.ParamProgram) -> str:
    lines: list[str] = []
    if p.globals:
        lines.append("global")
        for d in p.globals:
            lines.append(f"  {d.name} : {_type_name(d.sort)} = {ir.pp_expr(d.init)}")
        lines.append("")
    lines.append(f"procedure {p.name}()")
    user_locals = [d for d in p.locals if d.name != ir.PC]
    if user_locals:
        lines.append("local")
        for d in user_locals:
            lines.append(f"  {d.name} : {_type_name(d.sort)} = {ir.pp_expr(d.init)}")
    lines.append("begin")
    for loc in range(1, p.num_locations + 1):
        group = p.transitions_at(loc)
        lines.append(f"  {loc}: {_stmt_text(group, loc)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _type_name(sort: ir.Sort) -> str:
    if sort == ir.Sort.SET_INT:
        return "set<int>"
    return sort.value


def _stmt_text(group: tuple[ir.Transition, ...], loc: int) -> str:
    if len(group) == 2 and group[1].guard == ir.Not(group[0].guard):
        t, e = group
        return f"if {ir.pp_formula(t.guard)} then {t.next_loc} else {e.next_loc}"
    (t,) = group
    if t.effect:
        body = "; ".join(
            f"{target.name} := {ir.pp_expr(value)}" for target, value in t.effect
        )
        return "{ " + body + " }"
    if t.guard != ir.TRUE:
        return f"await {ir.pp_formula(t.guard)}"
    if t.next_loc != loc + 1:
        return f"goto {t.next_loc}"
    return "skip"
