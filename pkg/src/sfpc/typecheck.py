"""Kind checking and unique type synthesis.

Every rule failure raises :class:`TypeCheckError` carrying the name of the
rule whose premise failed (``T-App``, ``K-Var``, ...).
"""

from __future__ import annotations

from typing import AbstractSet, Mapping

from sfpc import prims
from sfpc.syntax import (
    App, Function, IfZero, Inj, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant,
    Mu, Pair, Placeholder, Prim, Product, Real, RealLit, RealType, Roll, Sample, Score,
    Term, TyVar, Type, Unit, UnitType, UnitVal, Var, Variant, free_type_vars,
    type_alpha_eq, unfold,
)

VarContext = Mapping[str, Type]


class TypeCheckError(Exception):
    def __init__(self, rule: str, message: str, span: tuple[int, int] | None = None):
        self.rule = rule
        self.message = message
        self.span = span
        where = f" at line {span[0]}, column {span[1]}" if span else ""
        super().__init__(f"[{rule}] {message}{where}")


class KindError(TypeCheckError):
    pass


def _kind_error(delta: AbstractSet[str], ty: Type) -> KindError | None:
    if isinstance(ty, TyVar):
        if ty.name not in delta:
            return KindError("K-Var", f"type variable {ty.name!r} is not bound")
        return None
    if isinstance(ty, (RealType, UnitType)):
        return None
    if isinstance(ty, Product):
        return _kind_error(delta, ty.left) or _kind_error(delta, ty.right)
    if isinstance(ty, Function):
        return _kind_error(delta, ty.dom) or _kind_error(delta, ty.cod)
    if isinstance(ty, Variant):
        for _, payload in ty.cases:
            err = _kind_error(delta, payload)
            if err:
                return err
        return None
    if isinstance(ty, Mu):
        return _kind_error(set(delta) | {ty.var}, ty.body)
    return KindError("K-Type", f"not a type: {ty!r}")


def kind_check(delta: AbstractSet[str], ty: Type) -> bool:
    """Whether ``delta |- ty : type`` is derivable."""
    return _kind_error(delta, ty) is None


def require_kind(delta: AbstractSet[str], ty: Type) -> None:
    err = _kind_error(delta, ty)
    if err:
        raise err


def check_context(ctx: VarContext) -> None:
    """``|- ctx : context``: every variable type is closed and well-kinded."""
    for name, ty in ctx.items():
        err = _kind_error(frozenset(), ty)
        if err:
            raise KindError("K-Context", f"type of {name!r} is ill-kinded: {err.message}")


def _closed_annotation(rule: str, ty: Type, span) -> None:
    fv = free_type_vars(ty)
    if fv:
        raise TypeCheckError(rule, f"annotation has free type variables {sorted(fv)}", span)
    err = _kind_error(frozenset(), ty)
    if err:
        raise TypeCheckError(rule, err.message, span)


def _expect(rule: str, actual: Type, expected: Type, what: str, span) -> None:
    if not type_alpha_eq(actual, expected):
        from sfpc.printer import print_type

        raise TypeCheckError(
            rule, f"{what} has type {print_type(actual)}, expected {print_type(expected)}", span)


def infer_type(ctx: VarContext, t: Term) -> Type:
    """Synthesise the unique type of ``t`` in ``ctx``."""
    return _infer(dict(ctx), t)


def _infer(ctx: dict, t: Term) -> Type:
    span = getattr(t, "span", None)
    if isinstance(t, Var):
        if t.name not in ctx:
            raise TypeCheckError("T-Var", f"unbound variable {t.name!r}", span)
        return ctx[t.name]
    if isinstance(t, (RealLit, Placeholder, Sample)):
        return Real
    if isinstance(t, Prim):
        spec = prims.lookup(t.name)
        if spec is None:
            raise TypeCheckError("T-Prim", f"unknown primitive {t.name!r}", span)
        if isinstance(spec, prims.KernelSpec):
            raise TypeCheckError(
                "T-Prim", f"{t.name!r} is a kernel; use its randomiser {spec.randomizer_name!r}", span)
        if len(t.args) != spec.arity:
            raise TypeCheckError(
                "T-Prim", f"{t.name} expects {spec.arity} arguments, got {len(t.args)}", span)
        for i, a in enumerate(t.args, 1):
            _expect("T-Prim", _infer(ctx, a), Real, f"argument {i} of {t.name}", span)
        return Real
    if isinstance(t, IfZero):
        _expect("T-Ifz", _infer(ctx, t.cond), Real, "ifz scrutinee", span)
        ty = _infer(ctx, t.zero)
        _expect("T-Ifz", _infer(ctx, t.nonzero), ty, "else-branch", span)
        return ty
    if isinstance(t, Score):
        _expect("T-Score", _infer(ctx, t.arg), Real, "score argument", span)
        return Unit
    if isinstance(t, UnitVal):
        return Unit
    if isinstance(t, Pair):
        return Product(_infer(ctx, t.fst), _infer(ctx, t.snd))
    if isinstance(t, Inj):
        _closed_annotation("T-Inj", t.ty, span)
        if not isinstance(t.ty, Variant):
            raise TypeCheckError("T-Inj", "injection annotation is not a variant type", span)
        payload = t.ty.payload(t.label)
        if payload is None:
            raise TypeCheckError("T-Inj", f"label {t.label!r} is not in the variant", span)
        _expect("T-Inj", _infer(ctx, t.arg), payload, f"payload of {t.label}", span)
        return t.ty
    if isinstance(t, Roll):
        _closed_annotation("T-Roll", t.ty, span)
        if not isinstance(t.ty, Mu):
            raise TypeCheckError("T-Roll", "roll annotation is not a recursive type", span)
        _expect("T-Roll", _infer(ctx, t.arg), unfold(t.ty), "rolled term", span)
        return t.ty
    if isinstance(t, Lam):
        _closed_annotation("T-Lam", t.ty, span)
        return Function(t.ty, _infer({**ctx, t.var: t.ty}, t.body))
    if isinstance(t, App):
        fn_ty = _infer(ctx, t.fn)
        if not isinstance(fn_ty, Function):
            raise TypeCheckError("T-App", "applying a term that is not a function", span)
        _expect("T-App", _infer(ctx, t.arg), fn_ty.dom, "argument", span)
        return fn_ty.cod
    if isinstance(t, MatchUnit):
        _expect("T-MatchUnit", _infer(ctx, t.scrut), Unit, "unit-match scrutinee", span)
        return _infer(ctx, t.body)
    if isinstance(t, MatchPair):
        sty = _infer(ctx, t.scrut)
        if not isinstance(sty, Product):
            raise TypeCheckError("T-MatchPair", "pair-match scrutinee is not a product", span)
        if t.fst == t.snd:
            raise TypeCheckError("T-MatchPair", f"pattern binds {t.fst!r} twice", span)
        return _infer({**ctx, t.fst: sty.left, t.snd: sty.right}, t.body)
    if isinstance(t, MatchVariant):
        sty = _infer(ctx, t.scrut)
        if not isinstance(sty, Variant):
            raise TypeCheckError("T-MatchVariant", "variant-match scrutinee is not a variant", span)
        labels = [br.label for br in t.branches]
        if sorted(labels) != list(sty.labels):
            raise TypeCheckError(
                "T-MatchVariant",
                f"branches {labels} do not cover the labels {list(sty.labels)} exactly once", span)
        result: Type | None = None
        for br in t.branches:
            bty = _infer({**ctx, br.var: sty.payload(br.label)}, br.body)
            if result is None:
                result = bty
            else:
                _expect("T-MatchVariant", bty, result, f"branch {br.label}", span)
        if result is None:
            raise TypeCheckError("T-MatchVariant", "match on the empty variant has no type", span)
        return result
    if isinstance(t, MatchRoll):
        sty = _infer(ctx, t.scrut)
        if not isinstance(sty, Mu):
            raise TypeCheckError("T-MatchRoll", "roll-match scrutinee is not a recursive type", span)
        return _infer({**ctx, t.var: unfold(sty)}, t.body)
    raise TypeCheckError("T-Term", f"not a term: {t!r}", span)


def type_of_value(v: Term) -> Type:
    """Type of a closed value; an ill-typed value is an internal invariant violation."""
    try:
        return infer_type({}, v)
    except TypeCheckError as exc:
        raise AssertionError(f"ill-typed value: {exc}") from exc
