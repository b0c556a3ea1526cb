"""Intermediate representation for parametrized concurrent programs.

Sorts, expressions, quantifier-free formulas, transitions, programs and
thread-id substitutions.  All values are immutable after construction and
safe to share between workers.

A local variable can appear in three shapes:

* ``v(k)``  -- parametrized read, indexed by a thread-id variable ``k``
* ``v[0]``  -- concrete read for thread 0 (only after concretization)
* ``v`` / ``v'`` as a whole array inside ``ArrayEq`` / ``ArrayUpdateEq``

The program counter is the distinguished local ``pc`` of sort LOC; only
transition compilation ever assigns it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Union


class Sort(Enum):
    BOOL = "bool"
    INT = "int"
    LOC = "loc"
    TID = "tid"
    SET_INT = "set<int>"

    def __str__(self) -> str:
        return self.value


PC = "pc"


class IrError(Exception):
    """Base class for IR-level errors."""


class SortError(IrError):
    pass


class UnknownVariable(IrError):
    pass


class SubstitutionError(IrError):
    pass


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class LocLit(Expr):
    value: int


@dataclass(frozen=True)
class TidLit(Expr):
    """Concrete thread id; appears only after concretization."""

    value: int


@dataclass(frozen=True)
class TidVar(Expr):
    name: str


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class VarRef(Expr):
    """A program-variable read.

    ``index`` is ``None`` for globals, a tid-variable name for the
    parametrized form ``v(k)`` and an ``int`` for the concrete form ``v[0]``.
    """

    name: str
    sort: Sort
    primed: bool = False
    index: Union[str, int, None] = None

    @property
    def kind(self) -> str:
        if self.index is None:
            return "global"
        if isinstance(self.index, str):
            return "local_indexed"
        return "local_concrete"


@dataclass(frozen=True)
class Add(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Sub(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class SetEmpty(Expr):
    pass


@dataclass(frozen=True)
class SetSingleton(Expr):
    elem: Expr


@dataclass(frozen=True)
class SetUnion(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class SetDiff(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class SetMin(Expr):
    arg: Expr


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool


TRUE = BoolLit(True)
FALSE = BoolLit(False)


@dataclass(frozen=True)
class BoolVar(Formula):
    """A bool-sorted program variable used in formula position."""

    ref: VarRef


@dataclass(frozen=True)
class Cmp(Formula):
    """Comparison atom.  op is one of '=', '!=', '<', '<='."""

    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class InSet(Formula):
    elem: Expr
    set_expr: Expr


@dataclass(frozen=True)
class InLocs(Formula):
    """Location predicate pc(k) in {l1..l2}."""

    pc: VarRef
    locs: frozenset[int]


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class ArrayEq(Formula):
    """Whole-array preservation ``v' = v`` of a local variable."""

    var: str
    sort: Sort


@dataclass(frozen=True)
class ArrayUpdateEq(Formula):
    """Array-update equality ``v' = v{tid <- value}``.

    Expands at concretization to ``v'[a] = value && v'[b] = v[b]`` for all
    other concrete ids b in the instance.
    """

    var: str
    sort: Sort
    tid: Union[str, int]
    value: Expr


def conj(args: Iterable[Formula]) -> Formula:
    items = [a for a in args if a != TRUE]
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(args: Iterable[Formula]) -> Formula:
    items = [a for a in args if a != FALSE]
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


# ---------------------------------------------------------------------------
# Declarations, transitions, programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: Sort
    init: Expr


@dataclass(frozen=True)
class Transition:
    """One guarded transition of the acting thread at a program location.

    ``effect`` holds simultaneous assignments; right-hand sides are read in
    the pre-state.  ``preserved`` lists the names (globals and locals, never
    the acting thread's pc) untouched by the transition.
    """

    location: int
    tid_param: str
    guard: Formula
    effect: tuple[tuple[VarRef, Expr], ...]
    next_loc: int
    preserved: frozenset[str]


@dataclass(frozen=True)
class ParamProgram:
    name: str
    globals: tuple[VarDecl, ...]
    locals: tuple[VarDecl, ...]  # includes pc as first entry
    transitions: tuple[Transition, ...]
    theta_global: Formula
    theta_local: Formula  # over the implicit self thread (unindexed locals)

    @property
    def num_locations(self) -> int:
        return max(
            itertools.chain(
                (t.location for t in self.transitions),
                (t.next_loc for t in self.transitions),
            )
        )

    def global_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.globals)

    def local_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.locals)

    def sort_of(self, name: str) -> Sort:
        for d in self.globals:
            if d.name == name:
                return d.sort
        for d in self.locals:
            if d.name == name:
                return d.sort
        raise UnknownVariable(name)

    def is_local(self, name: str) -> bool:
        return any(d.name == name for d in self.locals)

    def is_global(self, name: str) -> bool:
        return any(d.name == name for d in self.globals)

    def transitions_at(self, loc: int) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.location == loc)

    def instance_variables(self, n_threads: int) -> tuple[str, ...]:
        """Concrete variable names of the instance with n_threads threads."""
        names = list(self.global_names())
        for a in range(n_threads):
            for d in self.locals:
                names.append(f"{d.name}[{a}]")
        return tuple(names)


@dataclass(frozen=True)
class Substitution:
    """Map from tid variables to tid variables or concrete ids.

    When ``instance_size`` is set the substitution concretizes: indexed
    reads become concrete reads and array equalities expand over the
    instance ``[0..instance_size-1]``.  Injectivity is not required.
    """

    mapping: Mapping[str, Union[str, int]]
    instance_size: Union[int, None] = None

    def lookup(self, var: str) -> Union[str, int]:
        return self.mapping.get(var, var)


def swap_subst(i: str, j: str) -> Substitution:
    return Substitution({i: j, j: i})


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def sub_exprs(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, (Add, Sub, SetUnion, SetDiff)):
        yield from sub_exprs(e.lhs)
        yield from sub_exprs(e.rhs)
    elif isinstance(e, SetSingleton):
        yield from sub_exprs(e.elem)
    elif isinstance(e, SetMin):
        yield from sub_exprs(e.arg)


def formula_exprs(f: Formula) -> Iterator[Expr]:
    """All expression subterms of f, depth-first."""
    if isinstance(f, BoolVar):
        yield f.ref
    elif isinstance(f, Cmp):
        yield from sub_exprs(f.lhs)
        yield from sub_exprs(f.rhs)
    elif isinstance(f, InSet):
        yield from sub_exprs(f.elem)
        yield from sub_exprs(f.set_expr)
    elif isinstance(f, InLocs):
        yield f.pc
    elif isinstance(f, Not):
        yield from formula_exprs(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from formula_exprs(a)
    elif isinstance(f, Implies):
        yield from formula_exprs(f.lhs)
        yield from formula_exprs(f.rhs)
    elif isinstance(f, ArrayUpdateEq):
        yield from sub_exprs(f.value)


def sub_formulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from sub_formulas(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from sub_formulas(a)
    elif isinstance(f, Implies):
        yield from sub_formulas(f.lhs)
        yield from sub_formulas(f.rhs)


def atoms(f: Formula) -> Iterator[Formula]:
    """Atomic subformulas (comparisons, memberships, literals, array eqs)."""
    for g in sub_formulas(f):
        if isinstance(g, (Cmp, InSet, InLocs, BoolLit, BoolVar, ArrayEq, ArrayUpdateEq)):
            yield g


def free_tids(f: Formula) -> frozenset[str]:
    """The free tid variables of f (the formula's index variables)."""
    found: set[str] = set()
    for e in formula_exprs(f):
        if isinstance(e, TidVar):
            found.add(e.name)
        elif isinstance(e, VarRef) and isinstance(e.index, str):
            found.add(e.index)
    for g in sub_formulas(f):
        if isinstance(g, ArrayUpdateEq) and isinstance(g.tid, str):
            found.add(g.tid)
    return frozenset(found)


def index_of(f: Formula) -> int:
    return len(free_tids(f))


# ---------------------------------------------------------------------------
# Substitution application
# ---------------------------------------------------------------------------


def _subst_expr(e: Expr, s: Substitution) -> Expr:
    if isinstance(e, TidVar):
        target = s.lookup(e.name)
        if isinstance(target, int):
            return TidLit(target)
        return TidVar(target)
    if isinstance(e, VarRef):
        if isinstance(e.index, str):
            target = s.lookup(e.index)
            return VarRef(e.name, e.sort, e.primed, target)
        return e
    if isinstance(e, Add):
        return Add(_subst_expr(e.lhs, s), _subst_expr(e.rhs, s))
    if isinstance(e, Sub):
        return Sub(_subst_expr(e.lhs, s), _subst_expr(e.rhs, s))
    if isinstance(e, SetSingleton):
        return SetSingleton(_subst_expr(e.elem, s))
    if isinstance(e, SetUnion):
        return SetUnion(_subst_expr(e.lhs, s), _subst_expr(e.rhs, s))
    if isinstance(e, SetDiff):
        return SetDiff(_subst_expr(e.lhs, s), _subst_expr(e.rhs, s))
    if isinstance(e, SetMin):
        return SetMin(_subst_expr(e.arg, s))
    return e


def apply_subst(f: Formula, s: Substitution) -> Formula:
    """Apply a tid substitution to a formula.

    Only free tid variables are replaced; capture is impossible because
    formulas are quantifier-free.  With ``instance_size`` set, array-update
    equalities expand pointwise over the concrete instance.
    """
    for v in s.mapping.values():
        if isinstance(v, int) and s.instance_size is None:
            raise SubstitutionError(
                "substitution maps to concrete ids but has no instance size"
            )
        if not isinstance(v, (int, str)):
            raise SortError(f"substitution target {v!r} is not a tid")

    def go(g: Formula) -> Formula:
        if isinstance(g, (BoolLit,)):
            return g
        if isinstance(g, BoolVar):
            ref = _subst_expr(g.ref, s)
            assert isinstance(ref, VarRef)
            return BoolVar(ref)
        if isinstance(g, Cmp):
            return Cmp(g.op, _subst_expr(g.lhs, s), _subst_expr(g.rhs, s))
        if isinstance(g, InSet):
            return InSet(_subst_expr(g.elem, s), _subst_expr(g.set_expr, s))
        if isinstance(g, InLocs):
            pc = _subst_expr(g.pc, s)
            assert isinstance(pc, VarRef)
            return InLocs(pc, g.locs)
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, And):
            return And(tuple(go(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        if isinstance(g, ArrayEq):
            if s.instance_size is not None:
                return conj(
                    Cmp(
                        "=",
                        VarRef(g.var, g.sort, True, b),
                        VarRef(g.var, g.sort, False, b),
                    )
                    for b in range(s.instance_size)
                )
            return g
        if isinstance(g, ArrayUpdateEq):
            tid = s.lookup(g.tid) if isinstance(g.tid, str) else g.tid
            value = _subst_expr(g.value, s)
            if isinstance(tid, int) and s.instance_size is not None:
                parts: list[Formula] = [
                    Cmp("=", VarRef(g.var, g.sort, True, tid), value)
                ]
                for b in range(s.instance_size):
                    if b != tid:
                        parts.append(
                            Cmp(
                                "=",
                                VarRef(g.var, g.sort, True, b),
                                VarRef(g.var, g.sort, False, b),
                            )
                        )
                return conj(parts)
            if isinstance(tid, int):
                raise SubstitutionError(
                    "cannot expand array update without instance size"
                )
            return ArrayUpdateEq(g.var, g.sort, tid, value)
        raise IrError(f"unhandled formula node {g!r}")

    return go(f)


def prime(f: Formula) -> Formula:
    """Prime every program-variable occurrence of f (post-state version)."""

    def pe(e: Expr) -> Expr:
        if isinstance(e, VarRef):
            return VarRef(e.name, e.sort, True, e.index)
        if isinstance(e, Add):
            return Add(pe(e.lhs), pe(e.rhs))
        if isinstance(e, Sub):
            return Sub(pe(e.lhs), pe(e.rhs))
        if isinstance(e, SetSingleton):
            return SetSingleton(pe(e.elem))
        if isinstance(e, SetUnion):
            return SetUnion(pe(e.lhs), pe(e.rhs))
        if isinstance(e, SetDiff):
            return SetDiff(pe(e.lhs), pe(e.rhs))
        if isinstance(e, SetMin):
            return SetMin(pe(e.arg))
        return e

    def go(g: Formula) -> Formula:
        if isinstance(g, BoolLit):
            return g
        if isinstance(g, BoolVar):
            ref = pe(g.ref)
            assert isinstance(ref, VarRef)
            return BoolVar(ref)
        if isinstance(g, Cmp):
            return Cmp(g.op, pe(g.lhs), pe(g.rhs))
        if isinstance(g, InSet):
            return InSet(pe(g.elem), pe(g.set_expr))
        if isinstance(g, InLocs):
            pc = pe(g.pc)
            assert isinstance(pc, VarRef)
            return InLocs(pc, g.locs)
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, And):
            return And(tuple(go(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        raise IrError(f"cannot prime {g!r}")

    return go(f)


# ---------------------------------------------------------------------------
# pres, initial condition, transition relations
# ---------------------------------------------------------------------------


def pres_expand(
    program: ParamProgram, preserved: Iterable[str], threads: Iterable[int]
) -> Formula:
    """Frame conjunction v'=v / v'[a]=v[a] for the given concrete names.

    ``preserved`` holds concrete variable tokens: a bare name for globals
    ("avail") and an indexed name for locals ("ticket[0]").  Output order is
    globals in declaration order, then per thread: pc first, then locals in
    declaration order.
    """
    wanted = set(preserved)
    parts: list[Formula] = []

    def take(tok: str) -> bool:
        if tok in wanted:
            wanted.remove(tok)
            return True
        return False

    for d in program.globals:
        if take(d.name):
            parts.append(
                Cmp("=", VarRef(d.name, d.sort, True), VarRef(d.name, d.sort, False))
            )
    for a in threads:
        for d in program.locals:
            if take(f"{d.name}[{a}]"):
                parts.append(
                    Cmp(
                        "=",
                        VarRef(d.name, d.sort, True, a),
                        VarRef(d.name, d.sort, False, a),
                    )
                )
    if wanted:
        raise UnknownVariable(", ".join(sorted(wanted)))
    return conj(parts)


def _index_locals(program: ParamProgram, f: Formula, k: str) -> Formula:
    """Rewrite bare local reads v into v(k)."""

    def ie(e: Expr) -> Expr:
        if isinstance(e, VarRef):
            if e.index is None and program.is_local(e.name):
                return VarRef(e.name, e.sort, e.primed, k)
            return e
        if isinstance(e, Add):
            return Add(ie(e.lhs), ie(e.rhs))
        if isinstance(e, Sub):
            return Sub(ie(e.lhs), ie(e.rhs))
        if isinstance(e, SetSingleton):
            return SetSingleton(ie(e.elem))
        if isinstance(e, SetUnion):
            return SetUnion(ie(e.lhs), ie(e.rhs))
        if isinstance(e, SetDiff):
            return SetDiff(ie(e.lhs), ie(e.rhs))
        if isinstance(e, SetMin):
            return SetMin(ie(e.arg))
        return e

    def go(g: Formula) -> Formula:
        if isinstance(g, BoolLit):
            return g
        if isinstance(g, BoolVar):
            ref = ie(g.ref)
            assert isinstance(ref, VarRef)
            return BoolVar(ref)
        if isinstance(g, Cmp):
            return Cmp(g.op, ie(g.lhs), ie(g.rhs))
        if isinstance(g, InSet):
            return InSet(ie(g.elem), ie(g.set_expr))
        if isinstance(g, InLocs):
            pc = ie(g.pc)
            assert isinstance(pc, VarRef)
            return InLocs(pc, g.locs)
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, And):
            return And(tuple(go(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        return g

    return go(f)


def build_initial(program: ParamProgram, tids: Iterable[str]) -> Formula:
    """Initial condition over a set of tid variables: theta_g && theta_l(k)."""
    parts: list[Formula] = [program.theta_global]
    for k in tids:
        parts.append(_index_locals(program, program.theta_local, k))
    return conj(parts)


def transition_relation(program: ParamProgram, t: Transition, k: str) -> Formula:
    """Parametrized transition relation of t for acting thread variable k.

    Shape: pc(k)=l && pc'=pc{k<-next} && guard && effects && pres, with
    whole-array equality expressing preservation of unassigned locals.
    """
    parts: list[Formula] = [
        Cmp("=", VarRef(PC, Sort.LOC, False, k), LocLit(t.location)),
        ArrayUpdateEq(PC, Sort.LOC, k, LocLit(t.next_loc)),
    ]
    guard = _index_locals(program, t.guard, k)
    if guard != TRUE:
        parts.append(guard)
    for target, value in t.effect:
        value_k = _index_locals(program, value, k)
        if target.index is None and program.is_global(target.name):
            parts.append(Cmp("=", VarRef(target.name, target.sort, True), value_k))
        else:
            parts.append(ArrayUpdateEq(target.name, target.sort, k, value_k))
    for name in sorted(t.preserved):
        sort = program.sort_of(name)
        if program.is_global(name):
            parts.append(Cmp("=", VarRef(name, sort, True), VarRef(name, sort, False)))
        else:
            parts.append(ArrayEq(name, sort))
    return conj(parts)


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------


def pp_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, LocLit):
        return str(e.value)
    if isinstance(e, TidLit):
        return str(e.value)
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, TidVar):
        return e.name
    if isinstance(e, VarRef):
        s = e.name + ("'" if e.primed else "")
        if isinstance(e.index, str):
            return f"{s}({e.index})"
        if isinstance(e.index, int):
            return f"{s}[{e.index}]"
        return s
    if isinstance(e, Add):
        return f"{pp_expr(e.lhs)} + {_paren_add(e.rhs)}"
    if isinstance(e, Sub):
        return f"{pp_expr(e.lhs)} - {_paren_add(e.rhs)}"
    if isinstance(e, SetEmpty):
        return "{}"
    if isinstance(e, SetSingleton):
        return "{" + pp_expr(e.elem) + "}"
    if isinstance(e, SetUnion):
        return f"{pp_expr(e.lhs)} union {_paren_set(e.rhs)}"
    if isinstance(e, SetDiff):
        return f"{pp_expr(e.lhs)} setminus {_paren_set(e.rhs)}"
    if isinstance(e, SetMin):
        arg = pp_expr(e.arg)
        if isinstance(e.arg, (VarRef, SetEmpty, SetSingleton)):
            return f"{arg}.setMin"
        return f"({arg}).setMin"
    raise IrError(f"unprintable expr {e!r}")


def _paren_add(e: Expr) -> str:
    if isinstance(e, (Add, Sub)):
        return f"({pp_expr(e)})"
    return pp_expr(e)


def _paren_set(e: Expr) -> str:
    if isinstance(e, (SetUnion, SetDiff)):
        return f"({pp_expr(e)})"
    return pp_expr(e)


_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_NOT = 4
_PREC_ATOM = 5


def pp_formula(f: Formula, parent_prec: int = 0) -> str:
    """Print a formula; wraps in parens when required by the parent context."""

    def wrap(own: int, s: str) -> str:
        return f"({s})" if own <= parent_prec else s

    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, BoolVar):
        return pp_expr(f.ref)
    if isinstance(f, Cmp):
        return f"{pp_expr(f.lhs)} {f.op} {pp_expr(f.rhs)}"
    if isinstance(f, InSet):
        return f"{pp_expr(f.elem)} in {pp_expr(f.set_expr)}"
    if isinstance(f, InLocs):
        locs = ", ".join(str(loc) for loc in sorted(f.locs))
        return f"{pp_expr(f.pc)} in {{{locs}}}"
    if isinstance(f, ArrayEq):
        return f"{f.var}' = {f.var}"
    if isinstance(f, ArrayUpdateEq):
        tid = f.tid if isinstance(f.tid, str) else str(f.tid)
        return f"{f.var}' = {f.var}{{{tid} <- {pp_expr(f.value)}}}"
    if isinstance(f, Not):
        return "!" + pp_formula(f.arg, _PREC_NOT)
    if isinstance(f, And):
        s = " && ".join(pp_formula(a, _PREC_AND) for a in f.args)
        return wrap(_PREC_AND, s)
    if isinstance(f, Or):
        s = " || ".join(pp_formula(a, _PREC_OR) for a in f.args)
        return wrap(_PREC_OR, s)
    if isinstance(f, Implies):
        s = f"{pp_formula(f.lhs, _PREC_IMPLIES)} -> {pp_formula(f.rhs, 0)}"
        return wrap(_PREC_IMPLIES, s)
    raise IrError(f"unprintable formula {f!r}")


# ---------------------------------------------------------------------------
# Renaming of concrete ids (canonicalization support)
# ---------------------------------------------------------------------------


def rename_concrete(f: Formula, perm: Mapping[int, int]) -> Formula:
    """Apply a permutation of concrete thread ids to a concrete formula."""

    def re(e: Expr) -> Expr:
        if isinstance(e, TidLit):
            return TidLit(perm.get(e.value, e.value))
        if isinstance(e, VarRef) and isinstance(e.index, int):
            return VarRef(e.name, e.sort, e.primed, perm.get(e.index, e.index))
        if isinstance(e, Add):
            return Add(re(e.lhs), re(e.rhs))
        if isinstance(e, Sub):
            return Sub(re(e.lhs), re(e.rhs))
        if isinstance(e, SetSingleton):
            return SetSingleton(re(e.elem))
        if isinstance(e, SetUnion):
            return SetUnion(re(e.lhs), re(e.rhs))
        if isinstance(e, SetDiff):
            return SetDiff(re(e.lhs), re(e.rhs))
        if isinstance(e, SetMin):
            return SetMin(re(e.arg))
        return e

    def go(g: Formula) -> Formula:
        if isinstance(g, BoolLit):
            return g
        if isinstance(g, BoolVar):
            ref = re(g.ref)
            assert isinstance(ref, VarRef)
            return BoolVar(ref)
        if isinstance(g, Cmp):
            return Cmp(g.op, re(g.lhs), re(g.rhs))
        if isinstance(g, InSet):
            return InSet(re(g.elem), re(g.set_expr))
        if isinstance(g, InLocs):
            pc = re(g.pc)
            assert isinstance(pc, VarRef)
            return InLocs(pc, g.locs)
        if isinstance(g, Not):
            return Not(go(g.arg))
        if isinstance(g, And):
            return And(tuple(go(a) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.lhs), go(g.rhs))
        return g

    return go(f)


# ---------------------------------------------------------------------------
# Sort checking
# ---------------------------------------------------------------------------


def expr_sort(e: Expr, program: ParamProgram) -> Sort:
    if isinstance(e, IntLit):
        return Sort.INT
    if isinstance(e, LocLit):
        return Sort.LOC
    if isinstance(e, BoolConst):
        return Sort.BOOL
    if isinstance(e, (TidLit, TidVar)):
        return Sort.TID
    if isinstance(e, VarRef):
        declared = program.sort_of(e.name)
        if e.sort != declared:
            raise SortError(f"{e.name} declared {declared}, used as {e.sort}")
        if e.index is not None and not program.is_local(e.name):
            raise SortError(f"global {e.name} used with thread index")
        return declared
    if isinstance(e, (Add, Sub)):
        ls, rs = expr_sort(e.lhs, program), expr_sort(e.rhs, program)
        if ls != Sort.INT or rs != Sort.INT:
            raise SortError(f"arithmetic on non-int: {pp_expr(e)}")
        return Sort.INT
    if isinstance(e, SetEmpty):
        return Sort.SET_INT
    if isinstance(e, SetSingleton):
        if expr_sort(e.elem, program) != Sort.INT:
            raise SortError(f"singleton of non-int: {pp_expr(e)}")
        return Sort.SET_INT
    if isinstance(e, (SetUnion, SetDiff)):
        if (
            expr_sort(e.lhs, program) != Sort.SET_INT
            or expr_sort(e.rhs, program) != Sort.SET_INT
        ):
            raise SortError(f"set operator on non-set: {pp_expr(e)}")
        return Sort.SET_INT
    if isinstance(e, SetMin):
        if expr_sort(e.arg, program) != Sort.SET_INT:
            raise SortError(f"setMin of non-set: {pp_expr(e)}")
        return Sort.INT
    raise SortError(f"unknown expr {e!r}")


def check_sorts(f: Formula, program: ParamProgram) -> None:
    """Raise SortError unless f is well-sorted over the program signature."""
    if isinstance(f, BoolLit):
        return
    if isinstance(f, BoolVar):
        if expr_sort(f.ref, program) != Sort.BOOL:
            raise SortError(f"{f.ref.name} used as bool atom")
        return
    if isinstance(f, Cmp):
        ls = expr_sort(f.lhs, program)
        rs = expr_sort(f.rhs, program)
        if ls != rs:
            raise SortError(f"comparison of {ls} with {rs}: {pp_formula(f)}")
        if f.op in ("<", "<=") and ls != Sort.INT:
            raise SortError(f"ordering on {ls}: {pp_formula(f)}")
        return
    if isinstance(f, InSet):
        if expr_sort(f.elem, program) != Sort.INT:
            raise SortError(f"membership of non-int: {pp_formula(f)}")
        if expr_sort(f.set_expr, program) != Sort.SET_INT:
            raise SortError(f"membership in non-set: {pp_formula(f)}")
        return
    if isinstance(f, InLocs):
        if expr_sort(f.pc, program) != Sort.LOC:
            raise SortError(f"location predicate on non-loc: {pp_formula(f)}")
        return
    if isinstance(f, Not):
        check_sorts(f.arg, program)
        return
    if isinstance(f, (And, Or)):
        for a in f.args:
            check_sorts(a, program)
        return
    if isinstance(f, Implies):
        check_sorts(f.lhs, program)
        check_sorts(f.rhs, program)
        return
    if isinstance(f, ArrayEq):
        if not program.is_local(f.var):
            raise SortError(f"array equality on non-local {f.var}")
        return
    if isinstance(f, ArrayUpdateEq):
        if not program.is_local(f.var):
            raise SortError(f"array update on non-local {f.var}")
        vs = expr_sort(f.value, program)
        declared = program.sort_of(f.var)
        if vs != declared:
            raise SortError(f"update of {f.var}:{declared} with {vs}")
        return
    raise SortError(f"unknown formula {f!r}")
