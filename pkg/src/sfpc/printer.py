"""Canonical concrete syntax for types and terms.

The output re-parses (``parse_sfpc`` + ``desugar``) to an alpha-equivalent
term.  Primitives are always printed in call form, ``t; u`` is used for
unit matches, and negative literals are parenthesised wherever a minus
sign could be read as subtraction.
"""

from __future__ import annotations

import math
from typing import Mapping

from sfpc.syntax import (
    App, Function, IfZero, Inj, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant, Mu,
    Pair, Placeholder, Prim, Product, RealLit, RealType, Roll, Sample, Score, Term, TyVar,
    Type, UnitType, UnitVal, Var, Variant, type_alpha_eq,
)

# term precedence levels
_SEQ, _EXPR, _APP, _ATOM = 0, 1, 2, 3
# type precedence levels
_T_ARROW, _T_PROD, _T_ATOM = 0, 1, 2


def print_type(ty: Type, aliases: Mapping[str, Type] | None = None) -> str:
    return _ptype(ty, _T_ARROW, aliases or {})


def _alias_for(ty: Type, aliases: Mapping[str, Type]) -> str | None:
    for name, aty in aliases.items():
        if type_alpha_eq(ty, aty):
            return name
    return None


def _ptype(ty: Type, level: int, aliases) -> str:
    name = _alias_for(ty, aliases) if aliases else None
    if name is not None:
        return name
    if isinstance(ty, TyVar):
        return ty.name
    if isinstance(ty, RealType):
        return "Real"
    if isinstance(ty, UnitType):
        return "Unit"
    if isinstance(ty, Variant):
        cases = []
        for label, payload in ty.cases:
            if isinstance(payload, UnitType):
                cases.append(label)
            else:
                cases.append(f"{label} {_ptype(payload, _T_ARROW, aliases)}")
        return "[" + " | ".join(cases) + "]"
    if isinstance(ty, Product):
        s = f"{_ptype(ty.left, _T_ATOM, aliases)} * {_ptype(ty.right, _T_ATOM, aliases)}"
        return s if level <= _T_PROD else f"({s})"
    if isinstance(ty, Function):
        s = f"{_ptype(ty.dom, _T_PROD, aliases)} -> {_ptype(ty.cod, _T_ARROW, aliases)}"
        return s if level <= _T_ARROW else f"({s})"
    if isinstance(ty, Mu):
        s = f"mu {ty.var}. {_ptype(ty.body, _T_ARROW, aliases)}"
        return s if level <= _T_ARROW else f"({s})"
    raise TypeError(f"not a type: {ty!r}")


def format_real(r: float) -> str:
    if not math.isfinite(r):
        raise ValueError(f"non-finite literal {r!r} has no concrete syntax")
    return repr(float(r))


class _Printer:
    def __init__(self, aliases: Mapping[str, Type]):
        self.aliases = aliases

    def ty(self, ty: Type) -> str:
        return _ptype(ty, _T_ARROW, self.aliases)

    def annot(self, ty: Type) -> str:
        # keep "mu a. T" from running into the lambda's dot
        return _ptype(ty, _T_ATOM if isinstance(ty, Mu) else _T_ARROW, self.aliases)

    def term(self, t: Term, level: int = _SEQ) -> str:
        s, own = self._term(t)
        return s if own >= level else f"({s})"

    def _term(self, t: Term) -> tuple[str, int]:
        if isinstance(t, Var):
            return t.name, _ATOM
        if isinstance(t, RealLit):
            s = format_real(t.value)
            return s, (_EXPR if s.startswith("-") else _ATOM)
        if isinstance(t, Placeholder):
            return f"?{t.index}", _ATOM
        if isinstance(t, Sample):
            return "sample", _ATOM
        if isinstance(t, UnitVal):
            return "()", _ATOM
        if isinstance(t, Score):
            return f"score({self.term(t.arg)})", _ATOM
        if isinstance(t, Prim):
            return f"{t.name}({', '.join(self.term(a) for a in t.args)})", _ATOM
        if isinstance(t, Pair):
            return f"({self.term(t.fst)}, {self.term(t.snd)})", _ATOM
        if isinstance(t, Inj):
            return f"inj[{self.ty(t.ty)}] {t.label} {self.term(t.arg, _ATOM)}", _APP
        if isinstance(t, Roll):
            return f"roll[{self.ty(t.ty)}] {self.term(t.arg, _ATOM)}", _APP
        if isinstance(t, App):
            return f"{self.term(t.fn, _APP)} {self.term(t.arg, _ATOM)}", _APP
        if isinstance(t, Lam):
            return f"\\{t.var}:{self.annot(t.ty)}. {self.term(t.body)}", _EXPR
        if isinstance(t, IfZero):
            return (f"ifz {self.term(t.cond)} then {self.term(t.zero)} "
                    f"else {self.term(t.nonzero)}"), _EXPR
        if isinstance(t, MatchUnit):
            return f"{self.term(t.scrut, _APP)}; {self.term(t.body)}", _SEQ
        if isinstance(t, MatchPair):
            return (f"match {self.term(t.scrut)} with {{ ({t.fst}, {t.snd}) -> "
                    f"{self.term(t.body)} }}"), _ATOM
        if isinstance(t, MatchRoll):
            return f"match {self.term(t.scrut)} with {{ roll {t.var} -> {self.term(t.body)} }}", _ATOM
        if isinstance(t, MatchVariant):
            arms = " | ".join(f"{br.label} {br.var} -> {self.term(br.body)}" for br in t.branches)
            return f"match {self.term(t.scrut)} with {{ {arms} }}", _ATOM
        raise TypeError(f"not a term: {t!r}")


def pretty_print(t: Term, aliases: Mapping[str, Type] | None = None) -> str:
    """Render ``t``; with ``aliases`` known types are abbreviated by name."""
    return _Printer(aliases or {}).term(t)


def print_program(t: Term, aliases: Mapping[str, Type] | None = None) -> str:
    """A complete source file: ``type`` declarations followed by the term."""
    aliases = dict(aliases or {})
    lines = [f"type {name} = {print_type(ty)};" for name, ty in aliases.items()]
    lines.append(pretty_print(t, aliases))
    return "\n".join(lines) + "\n"
