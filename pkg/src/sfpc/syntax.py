"""Abstract syntax of SFPC: kinds, types, terms and values.

Everything here is an immutable dataclass. Terms use named variables;
capture is avoided by renaming binders with a counter suffix
(``x`` becomes ``x_1``, ``x_2``, ...).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Iterable, Iterator, Mapping, Union


class Kind(enum.Enum):
    TYPE = "type"
    CONTEXT = "context"


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TyVar:
    name: str


@dataclass(frozen=True, slots=True)
class RealType:
    pass


@dataclass(frozen=True, slots=True)
class UnitType:
    pass


@dataclass(frozen=True, slots=True)
class Product:
    left: "Type"
    right: "Type"


@dataclass(frozen=True, slots=True)
class Function:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True, slots=True)
class Variant:
    """A finite dictionary from constructor labels to payload types.

    Cases are kept sorted by label so that two dictionaries with the same
    entries compare equal regardless of how they were written.
    """

    cases: tuple[tuple[str, "Type"], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.cases]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate variant labels in {labels}")
        object.__setattr__(self, "cases", tuple(sorted(self.cases, key=lambda c: c[0])))

    @classmethod
    def of(cls, cases: Mapping[str, "Type"] | Iterable[tuple[str, "Type"]]) -> "Variant":
        items = cases.items() if isinstance(cases, Mapping) else cases
        return cls(tuple(items))

    def payload(self, label: str) -> "Type | None":
        for lab, ty in self.cases:
            if lab == label:
                return ty
        return None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.cases)


@dataclass(frozen=True, slots=True)
class Mu:
    var: str
    body: "Type"


Type = Union[TyVar, RealType, UnitType, Product, Function, Variant, Mu]

Real = RealType()
Unit = UnitType()


def free_type_vars(ty: Type) -> frozenset[str]:
    if isinstance(ty, TyVar):
        return frozenset([ty.name])
    if isinstance(ty, (RealType, UnitType)):
        return frozenset()
    if isinstance(ty, Product):
        return free_type_vars(ty.left) | free_type_vars(ty.right)
    if isinstance(ty, Function):
        return free_type_vars(ty.dom) | free_type_vars(ty.cod)
    if isinstance(ty, Variant):
        out: frozenset[str] = frozenset()
        for _, payload in ty.cases:
            out |= free_type_vars(payload)
        return out
    if isinstance(ty, Mu):
        return free_type_vars(ty.body) - {ty.var}
    raise TypeError(f"not a type: {ty!r}")


def subst_type(ty: Type, var: str, replacement: Type) -> Type:
    """Capture-avoiding ``ty[var := replacement]``."""
    if isinstance(ty, TyVar):
        return replacement if ty.name == var else ty
    if isinstance(ty, (RealType, UnitType)):
        return ty
    if isinstance(ty, Product):
        return Product(subst_type(ty.left, var, replacement), subst_type(ty.right, var, replacement))
    if isinstance(ty, Function):
        return Function(subst_type(ty.dom, var, replacement), subst_type(ty.cod, var, replacement))
    if isinstance(ty, Variant):
        return Variant(tuple((lab, subst_type(p, var, replacement)) for lab, p in ty.cases))
    if isinstance(ty, Mu):
        if ty.var == var:
            return ty
        fv = free_type_vars(replacement)
        if ty.var in fv:
            new = fresh_name(ty.var, fv | free_type_vars(ty.body) | {var})
            body = subst_type(ty.body, ty.var, TyVar(new))
            return Mu(new, subst_type(body, var, replacement))
        return Mu(ty.var, subst_type(ty.body, var, replacement))
    raise TypeError(f"not a type: {ty!r}")


def unfold(mu: Mu) -> Type:
    """One-step unfolding ``body[var := mu]`` of a recursive type."""
    return subst_type(mu.body, mu.var, mu)


def type_alpha_eq(a: Type, b: Type) -> bool:
    """Syntactic equality up to renaming of mu-binders."""
    return _type_eq(a, b, {}, {}, 0)


def _type_eq(a, b, env_a, env_b, depth) -> bool:
    if isinstance(a, TyVar) and isinstance(b, TyVar):
        la, lb = env_a.get(a.name), env_b.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la == lb
    if type(a) is not type(b):
        return False
    if isinstance(a, (RealType, UnitType)):
        return True
    if isinstance(a, Product):
        return _type_eq(a.left, b.left, env_a, env_b, depth) and _type_eq(a.right, b.right, env_a, env_b, depth)
    if isinstance(a, Function):
        return _type_eq(a.dom, b.dom, env_a, env_b, depth) and _type_eq(a.cod, b.cod, env_a, env_b, depth)
    if isinstance(a, Variant):
        if a.labels != b.labels:
            return False
        return all(_type_eq(pa, pb, env_a, env_b, depth) for (_, pa), (_, pb) in zip(a.cases, b.cases))
    if isinstance(a, Mu):
        return _type_eq(a.body, b.body, {**env_a, a.var: depth}, {**env_b, b.var: depth}, depth + 1)
    return False


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------

# Source positions are carried for diagnostics but never take part in equality.
_span = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Prim:
    name: str
    args: tuple["Term", ...]
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class RealLit:
    value: float
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class IfZero:
    cond: "Term"
    zero: "Term"
    nonzero: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Sample:
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Score:
    arg: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class UnitVal:
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Pair:
    fst: "Term"
    snd: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Inj:
    ty: Type
    label: str
    arg: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Roll:
    ty: Type
    arg: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Lam:
    var: str
    ty: Type
    body: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class App:
    fn: "Term"
    arg: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class MatchUnit:
    scrut: "Term"
    body: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class MatchPair:
    scrut: "Term"
    fst: str
    snd: str
    body: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Branch:
    label: str
    var: str
    body: "Term"


@dataclass(frozen=True, slots=True)
class MatchVariant:
    scrut: "Term"
    branches: tuple[Branch, ...]
    span: tuple[int, int] | None = _span

    def branch(self, label: str) -> Branch | None:
        for br in self.branches:
            if br.label == label:
                return br
        return None


@dataclass(frozen=True, slots=True)
class MatchRoll:
    scrut: "Term"
    var: str
    body: "Term"
    span: tuple[int, int] | None = _span


@dataclass(frozen=True, slots=True)
class Placeholder:
    """Real-valued hole of a term template, numbered from 1."""

    index: int
    span: tuple[int, int] | None = _span


Term = Union[
    Var, Prim, RealLit, IfZero, Sample, Score, UnitVal, Pair, Inj, Roll, Lam, App,
    MatchUnit, MatchPair, MatchVariant, MatchRoll, Placeholder,
]
Value = Term


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    stem = base.rstrip("0123456789")
    if stem.endswith("_") and stem != base:
        stem = stem[:-1]
    k = 1
    while f"{stem}_{k}" in avoid:
        k += 1
    return f"{stem}_{k}"


def children(t: Term) -> Iterator[Term]:
    """Immediate subterms in left-to-right order."""
    if isinstance(t, (Var, RealLit, Sample, UnitVal, Placeholder)):
        return
    if isinstance(t, Prim):
        yield from t.args
    elif isinstance(t, IfZero):
        yield t.cond
        yield t.zero
        yield t.nonzero
    elif isinstance(t, (Score, Inj, Roll)):
        yield t.arg
    elif isinstance(t, Pair):
        yield t.fst
        yield t.snd
    elif isinstance(t, Lam):
        yield t.body
    elif isinstance(t, App):
        yield t.fn
        yield t.arg
    elif isinstance(t, (MatchUnit, MatchPair, MatchRoll)):
        yield t.scrut
        yield t.body
    elif isinstance(t, MatchVariant):
        yield t.scrut
        for br in t.branches:
            yield br.body
    else:
        raise TypeError(f"not a term: {t!r}")


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal of all subterms, including ``t`` itself."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(children(node))))


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, (RealLit, Sample, UnitVal, Placeholder)):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, MatchPair):
        return free_vars(t.scrut) | (free_vars(t.body) - {t.fst, t.snd})
    if isinstance(t, MatchRoll):
        return free_vars(t.scrut) | (free_vars(t.body) - {t.var})
    if isinstance(t, MatchVariant):
        out = free_vars(t.scrut)
        for br in t.branches:
            out |= free_vars(br.body) - {br.var}
        return out
    out: frozenset[str] = frozenset()
    for c in children(t):
        out |= free_vars(c)
    return out


def substitute(t: Term, bindings: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution.

    Binders that would capture a free variable of a substituted term are
    renamed with a fresh counter-suffixed name.
    """
    if not bindings:
        return t
    bindings = dict(bindings)
    incoming: set[str] = set()
    for v in bindings.values():
        incoming |= free_vars(v)
    return _subst(t, bindings, frozenset(incoming))


def _rebind(var: str, body: Term, bindings: dict, incoming: frozenset[str]):
    """Prepare to go under binder ``var``: drop shadowed bindings, rename on capture."""
    inner = {k: v for k, v in bindings.items() if k != var}
    if var in incoming and inner:
        new = fresh_name(var, incoming | free_vars(body) | set(inner))
        inner[var] = Var(new)
        return new, inner
    return var, inner


def _subst(t: Term, b: dict, inc: frozenset[str]) -> Term:
    if isinstance(t, Var):
        return b.get(t.name, t)
    if isinstance(t, (RealLit, Sample, UnitVal, Placeholder)):
        return t
    if isinstance(t, Prim):
        return Prim(t.name, tuple(_subst(a, b, inc) for a in t.args), t.span)
    if isinstance(t, IfZero):
        return IfZero(_subst(t.cond, b, inc), _subst(t.zero, b, inc), _subst(t.nonzero, b, inc), t.span)
    if isinstance(t, Score):
        return Score(_subst(t.arg, b, inc), t.span)
    if isinstance(t, Pair):
        return Pair(_subst(t.fst, b, inc), _subst(t.snd, b, inc), t.span)
    if isinstance(t, Inj):
        return Inj(t.ty, t.label, _subst(t.arg, b, inc), t.span)
    if isinstance(t, Roll):
        return Roll(t.ty, _subst(t.arg, b, inc), t.span)
    if isinstance(t, App):
        return App(_subst(t.fn, b, inc), _subst(t.arg, b, inc), t.span)
    if isinstance(t, MatchUnit):
        return MatchUnit(_subst(t.scrut, b, inc), _subst(t.body, b, inc), t.span)
    if isinstance(t, Lam):
        var, inner = _rebind(t.var, t.body, b, inc)
        return Lam(var, t.ty, _subst(t.body, inner, inc) if inner else t.body, t.span)
    if isinstance(t, MatchRoll):
        var, inner = _rebind(t.var, t.body, b, inc)
        return MatchRoll(_subst(t.scrut, b, inc), var, _subst(t.body, inner, inc) if inner else t.body, t.span)
    if isinstance(t, MatchPair):
        x, inner = _rebind(t.fst, t.body, b, inc)
        if t.snd == t.fst:
            y = x
        else:
            y, inner = _rebind(t.snd, t.body, inner, inc | {x})
        return MatchPair(_subst(t.scrut, b, inc), x, y, _subst(t.body, inner, inc) if inner else t.body, t.span)
    if isinstance(t, MatchVariant):
        branches = []
        for br in t.branches:
            var, inner = _rebind(br.var, br.body, b, inc)
            branches.append(Branch(br.label, var, _subst(br.body, inner, inc) if inner else br.body))
        return MatchVariant(_subst(t.scrut, b, inc), tuple(branches), t.span)
    raise TypeError(f"not a term: {t!r}")


def subst_closed(t: Term, name: str, value: Term) -> Term:
    """``t[name := value]`` for a closed ``value``; no renaming is ever needed.

    This is the hot path of the evaluator.
    """
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, (RealLit, Sample, UnitVal, Placeholder)):
        return t
    if isinstance(t, Prim):
        return Prim(t.name, tuple([subst_closed(a, name, value) for a in t.args]))
    if isinstance(t, App):
        return App(subst_closed(t.fn, name, value), subst_closed(t.arg, name, value))
    if isinstance(t, MatchUnit):
        return MatchUnit(subst_closed(t.scrut, name, value), subst_closed(t.body, name, value))
    if isinstance(t, Lam):
        if t.var == name:
            return t
        return Lam(t.var, t.ty, subst_closed(t.body, name, value))
    if isinstance(t, IfZero):
        return IfZero(subst_closed(t.cond, name, value), subst_closed(t.zero, name, value),
                      subst_closed(t.nonzero, name, value))
    if isinstance(t, Score):
        return Score(subst_closed(t.arg, name, value))
    if isinstance(t, Pair):
        return Pair(subst_closed(t.fst, name, value), subst_closed(t.snd, name, value))
    if isinstance(t, Inj):
        return Inj(t.ty, t.label, subst_closed(t.arg, name, value))
    if isinstance(t, Roll):
        return Roll(t.ty, subst_closed(t.arg, name, value))
    if isinstance(t, MatchRoll):
        scrut = subst_closed(t.scrut, name, value)
        body = t.body if t.var == name else subst_closed(t.body, name, value)
        return MatchRoll(scrut, t.var, body)
    if isinstance(t, MatchPair):
        scrut = subst_closed(t.scrut, name, value)
        body = t.body if name in (t.fst, t.snd) else subst_closed(t.body, name, value)
        return MatchPair(scrut, t.fst, t.snd, body)
    if isinstance(t, MatchVariant):
        return MatchVariant(
            subst_closed(t.scrut, name, value),
            tuple(br if br.var == name else Branch(br.label, br.var, subst_closed(br.body, name, value))
                  for br in t.branches),
        )
    raise TypeError(f"not a term: {t!r}")


def is_value(t: Term) -> bool:
    if isinstance(t, (Var, RealLit, UnitVal, Lam)):
        return True
    if isinstance(t, Pair):
        return is_value(t.fst) and is_value(t.snd)
    if isinstance(t, (Inj, Roll)):
        return is_value(t.arg)
    return False


def alpha_equal(a: Term, b: Term) -> bool:
    """Equality of terms up to renaming of bound term variables (and mu-binders)."""
    return _alpha(a, b, {}, {}, [0])


def _bind(env_a, env_b, xa, xb, counter):
    k = counter[0]
    counter[0] += 1
    return {**env_a, xa: k}, {**env_b, xb: k}


def _alpha(a, b, ea, eb, ctr) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = ea.get(a.name), eb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, RealLit):
        return _same_float(a.value, b.value)
    if isinstance(a, (Sample, UnitVal)):
        return True
    if isinstance(a, Placeholder):
        return a.index == b.index
    if isinstance(a, Prim):
        return a.name == b.name and len(a.args) == len(b.args) and all(
            _alpha(x, y, ea, eb, ctr) for x, y in zip(a.args, b.args))
    if isinstance(a, (Inj, Roll)):
        if not type_alpha_eq(a.ty, b.ty):
            return False
        if isinstance(a, Inj) and a.label != b.label:
            return False
        return _alpha(a.arg, b.arg, ea, eb, ctr)
    if isinstance(a, Lam):
        if not type_alpha_eq(a.ty, b.ty):
            return False
        na, nb = _bind(ea, eb, a.var, b.var, ctr)
        return _alpha(a.body, b.body, na, nb, ctr)
    if isinstance(a, MatchRoll):
        na, nb = _bind(ea, eb, a.var, b.var, ctr)
        return _alpha(a.scrut, b.scrut, ea, eb, ctr) and _alpha(a.body, b.body, na, nb, ctr)
    if isinstance(a, MatchPair):
        na, nb = _bind(ea, eb, a.fst, b.fst, ctr)
        na, nb = _bind(na, nb, a.snd, b.snd, ctr)
        return _alpha(a.scrut, b.scrut, ea, eb, ctr) and _alpha(a.body, b.body, na, nb, ctr)
    if isinstance(a, MatchVariant):
        if [br.label for br in a.branches] != [br.label for br in b.branches]:
            return False
        if not _alpha(a.scrut, b.scrut, ea, eb, ctr):
            return False
        for ba, bb in zip(a.branches, b.branches):
            na, nb = _bind(ea, eb, ba.var, bb.var, ctr)
            if not _alpha(ba.body, bb.body, na, nb, ctr):
                return False
        return True
    ca, cb = list(children(a)), list(children(b))
    return len(ca) == len(cb) and all(_alpha(x, y, ea, eb, ctr) for x, y in zip(ca, cb))


def _same_float(x: float, y: float) -> bool:
    return x == y or (math.isnan(x) and math.isnan(y))


# --------------------------------------------------------------------------
# Values up to the lambda congruence
# --------------------------------------------------------------------------

_LAMBDA = ("<fun>",)


def lambda_class_key(v: Value):
    """Hashable key identifying ``v`` up to the congruence that equates all lambdas."""
    if isinstance(v, Lam):
        return _LAMBDA
    if isinstance(v, RealLit):
        return ("real", v.value)
    if isinstance(v, UnitVal):
        return ("unit",)
    if isinstance(v, Pair):
        return ("pair", lambda_class_key(v.fst), lambda_class_key(v.snd))
    if isinstance(v, Inj):
        return ("inj", v.label, lambda_class_key(v.arg))
    if isinstance(v, Roll):
        return ("roll", lambda_class_key(v.arg))
    if isinstance(v, Var):
        return ("var", v.name)
    raise ValueError(f"not a value: {v!r}")


def value_eq_mod_lambda(v1: Value, v2: Value) -> bool:
    return lambda_class_key(v1) == lambda_class_key(v2)


# --------------------------------------------------------------------------
# Templates: a real-free skeleton plus the vector of its literals
# --------------------------------------------------------------------------


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class TemplatePair:
    skeleton: Term
    reals: tuple[float, ...]

    @property
    def arity(self) -> int:
        return len(self.reals)

    def to_line(self) -> str:
        from sfpc.printer import pretty_print

        reals = ", ".join(repr(float(r)) for r in self.reals)
        return f"({self.arity}, {pretty_print(self.skeleton)}, [{reals}])"


def _map_children(t: Term, fn) -> Term:
    if isinstance(t, (Var, RealLit, Sample, UnitVal, Placeholder)):
        return t
    if isinstance(t, Prim):
        return Prim(t.name, tuple(fn(a) for a in t.args), t.span)
    if isinstance(t, IfZero):
        c = fn(t.cond)
        z = fn(t.zero)
        return IfZero(c, z, fn(t.nonzero), t.span)
    if isinstance(t, Score):
        return Score(fn(t.arg), t.span)
    if isinstance(t, Pair):
        f = fn(t.fst)
        return Pair(f, fn(t.snd), t.span)
    if isinstance(t, Inj):
        return Inj(t.ty, t.label, fn(t.arg), t.span)
    if isinstance(t, Roll):
        return Roll(t.ty, fn(t.arg), t.span)
    if isinstance(t, Lam):
        return Lam(t.var, t.ty, fn(t.body), t.span)
    if isinstance(t, App):
        f = fn(t.fn)
        return App(f, fn(t.arg), t.span)
    if isinstance(t, MatchUnit):
        s = fn(t.scrut)
        return MatchUnit(s, fn(t.body), t.span)
    if isinstance(t, MatchPair):
        s = fn(t.scrut)
        return MatchPair(s, t.fst, t.snd, fn(t.body), t.span)
    if isinstance(t, MatchRoll):
        s = fn(t.scrut)
        return MatchRoll(s, t.var, fn(t.body), t.span)
    if isinstance(t, MatchVariant):
        s = fn(t.scrut)
        return MatchVariant(s, tuple(Branch(br.label, br.var, fn(br.body)) for br in t.branches), t.span)
    raise TypeError(f"not a term: {t!r}")


def map_children(t: Term, fn) -> Term:
    """Rebuild ``t`` with ``fn`` applied to each immediate subterm, left to right."""
    return _map_children(t, fn)


_TYPE_CLASSES = (TyVar, RealType, UnitType, Product, Function, Variant, Mu)


def _map_value(v, fn):
    if isinstance(v, tuple):
        return tuple(_map_value(x, fn) for x in v)
    if isinstance(v, Branch):
        return Branch(v.label, v.var, fn(v.body))
    if is_dataclass(v) and not isinstance(v, _TYPE_CLASSES):
        return fn(v)
    return v


def _map_fields(node, fn):
    """Like :func:`map_children` but generic over any syntax dataclass, sugar included."""
    changes = {}
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        new = _map_value(value, fn)
        if new is not value:
            changes[f.name] = new
    return replace(node, **changes) if changes else node


def to_template(t: Term) -> TemplatePair:
    """Split ``t`` into a literal-free skeleton and its reals, in pre-order.

    Works on core terms and on parsed, still-sugared trees alike.
    """
    reals: list[float] = []

    def go(node: Term) -> Term:
        if isinstance(node, Placeholder):
            raise TemplateError("term already contains placeholders")
        if isinstance(node, RealLit):
            reals.append(float(node.value))
            return Placeholder(len(reals), node.span)
        return _map_fields(node, go)

    skeleton = go(t)
    return TemplatePair(skeleton, tuple(reals))


def from_template(tp: TemplatePair) -> Term:
    reals = tuple(tp.reals)
    seen: list[int] = []

    def go(node: Term) -> Term:
        if isinstance(node, RealLit):
            raise TemplateError("template skeleton contains a real literal")
        if isinstance(node, Placeholder):
            seen.append(node.index)
            if not 1 <= node.index <= len(reals):
                raise TemplateError(f"placeholder ?{node.index} out of range for {len(reals)} reals")
            return RealLit(reals[node.index - 1], node.span)
        return _map_fields(node, go)

    term = go(tp.skeleton)
    if seen != list(range(1, len(reals) + 1)):
        raise TemplateError(
            f"template arity mismatch: placeholders {seen} for {len(reals)} reals")
    return term

