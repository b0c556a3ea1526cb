"""Reference evaluator for concrete formulas over explicit states.

This is the slow, obviously-correct route: a direct tree walk.  The
bytecode kernel (pinv.kernel) is the fast route; property tests keep the
two in agreement.  Values are ints, bools and frozensets of ints.

``setMin`` of the empty set is undefined; an atom containing an undefined
subterm evaluates to false (its negation to true).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from . import ir

Value = Union[int, bool, frozenset]


class _Undef:
    def __repr__(self) -> str:  # pragma: no cover
        return "UNDEF"


UNDEF = _Undef()


class EvalError(Exception):
    pass


@dataclass
class Env:
    """Valuation of concrete program variables and tid variables.

    ``values`` is keyed by (name, thread-index-or-None, primed).
    """

    values: Mapping[tuple[str, Union[int, None], bool], Value]
    tids: Mapping[str, int] = field(default_factory=dict)
    n_threads: int = 1

    def lookup(self, name: str, index: Union[int, None], primed: bool) -> Value:
        key = (name, index, primed)
        if key not in self.values:
            raise EvalError(f"unassigned variable {name}{'' if index is None else f'[{index}]'}{chr(39) if primed else ''}")
        return self.values[key]


def eval_expr(e: ir.Expr, env: Env):
    if isinstance(e, ir.IntLit):
        return e.value
    if isinstance(e, ir.LocLit):
        return e.value
    if isinstance(e, ir.TidLit):
        return e.value
    if isinstance(e, ir.BoolConst):
        return e.value
    if isinstance(e, ir.TidVar):
        if e.name not in env.tids:
            raise EvalError(f"unbound tid variable {e.name}")
        return env.tids[e.name]
    if isinstance(e, ir.VarRef):
        index = e.index
        if isinstance(index, str):
            if index not in env.tids:
                raise EvalError(f"unbound tid variable {index}")
            index = env.tids[index]
        return env.lookup(e.name, index, e.primed)
    if isinstance(e, (ir.Add, ir.Sub)):
        lhs = eval_expr(e.lhs, env)
        rhs = eval_expr(e.rhs, env)
        if lhs is UNDEF or rhs is UNDEF:
            return UNDEF
        return lhs + rhs if isinstance(e, ir.Add) else lhs - rhs
    if isinstance(e, ir.SetEmpty):
        return frozenset()
    if isinstance(e, ir.SetSingleton):
        v = eval_expr(e.elem, env)
        return UNDEF if v is UNDEF else frozenset((v,))
    if isinstance(e, ir.SetUnion):
        lhs, rhs = eval_expr(e.lhs, env), eval_expr(e.rhs, env)
        if lhs is UNDEF or rhs is UNDEF:
            return UNDEF
        return lhs | rhs
    if isinstance(e, ir.SetDiff):
        lhs, rhs = eval_expr(e.lhs, env), eval_expr(e.rhs, env)
        if lhs is UNDEF or rhs is UNDEF:
            return UNDEF
        return lhs - rhs
    if isinstance(e, ir.SetMin):
        s = eval_expr(e.arg, env)
        if s is UNDEF or not s:
            return UNDEF
        return min(s)
    raise EvalError(f"cannot evaluate {e!r}")


def eval_formula(f: ir.Formula, env: Env) -> bool:
    if isinstance(f, ir.BoolLit):
        return f.value
    if isinstance(f, ir.BoolVar):
        v = eval_expr(f.ref, env)
        return bool(v)
    if isinstance(f, ir.Cmp):
        lhs = eval_expr(f.lhs, env)
        rhs = eval_expr(f.rhs, env)
        if lhs is UNDEF or rhs is UNDEF:
            return False
        if f.op == "=":
            return lhs == rhs
        if f.op == "!=":
            return lhs != rhs
        if f.op == "<":
            return lhs < rhs
        if f.op == "<=":
            return lhs <= rhs
        raise EvalError(f"bad comparison op {f.op}")
    if isinstance(f, ir.InSet):
        elem = eval_expr(f.elem, env)
        s = eval_expr(f.set_expr, env)
        if elem is UNDEF or s is UNDEF:
            return False
        return elem in s
    if isinstance(f, ir.InLocs):
        v = eval_expr(f.pc, env)
        if v is UNDEF:
            return False
        return v in f.locs
    if isinstance(f, ir.Not):
        return not eval_formula(f.arg, env)
    if isinstance(f, ir.And):
        return all(eval_formula(a, env) for a in f.args)
    if isinstance(f, ir.Or):
        return any(eval_formula(a, env) for a in f.args)
    if isinstance(f, ir.Implies):
        return (not eval_formula(f.lhs, env)) or eval_formula(f.rhs, env)
    if isinstance(f, ir.ArrayEq):
        return all(
            env.lookup(f.var, b, True) == env.lookup(f.var, b, False)
            for b in range(env.n_threads)
        )
    if isinstance(f, ir.ArrayUpdateEq):
        tid = f.tid
        if isinstance(tid, str):
            if tid not in env.tids:
                raise EvalError(f"unbound tid variable {tid}")
            tid = env.tids[tid]
        value = eval_expr(f.value, env)
        if value is UNDEF:
            return False
        if env.lookup(f.var, tid, True) != value:
            return False
        return all(
            env.lookup(f.var, b, True) == env.lookup(f.var, b, False)
            for b in range(env.n_threads)
            if b != tid
        )
    raise EvalError(f"cannot evaluate {f!r}")
