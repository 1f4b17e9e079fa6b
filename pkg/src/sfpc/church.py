"""Idealised Church: an untyped call-by-value calculus embedded in SFPC.

Church terms translate to SFPC terms of the recursive type
``Lam = mu a. [Fun a -> a | Val Real]``.  Reals become ``Val`` values and
lambdas become ``Fun`` values; every elimination unpacks its operands in
order and diverges when the tag is wrong.

Concrete syntax::

    term  ::= "let" x "=" term "in" term | "\\" x "." term
            | "ifz" term "then" term "else" term | arith
    arith ::= the usual + - * / over applications
    app   ::= atom { atom }
    atom  ::= x | NUMBER | "(" term ")" | "factor" "(" term ")"
            | KERNEL "(" [ term { "," term } ] ")"

``KERNEL`` is any registry name: deterministic primitives such as
``normal_pdf`` and randomised kernels such as ``normal_rng``.
"""

from __future__ import annotations

from dataclasses import dataclass

from sfpc import prims
from sfpc.lexer import ParseError, Token, TokenStream
from sfpc.surface import SurfaceProgram, _Fresh, bottom
from sfpc.syntax import (
    App, Branch, Function, IfZero, Inj, Lam, MatchRoll, MatchUnit, MatchVariant, Mu, Prim,
    Real, RealLit, Roll, Sample, Score, Term, TyVar, Var, Variant, unfold,
)

# --------------------------------------------------------------------------
# Church abstract syntax
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CVar:
    name: str


@dataclass(frozen=True, slots=True)
class CReal:
    value: float


@dataclass(frozen=True, slots=True)
class CKernel:
    """``k(t1, ..., tn)`` for a primitive or a kernel from the registry."""

    name: str
    args: tuple["ChurchTerm", ...]


@dataclass(frozen=True, slots=True)
class CIfz:
    cond: "ChurchTerm"
    zero: "ChurchTerm"
    nonzero: "ChurchTerm"


@dataclass(frozen=True, slots=True)
class CFactor:
    arg: "ChurchTerm"


@dataclass(frozen=True, slots=True)
class CLam:
    var: str
    body: "ChurchTerm"


@dataclass(frozen=True, slots=True)
class CApp:
    fn: "ChurchTerm"
    arg: "ChurchTerm"


ChurchTerm = CVar | CReal | CKernel | CIfz | CFactor | CLam | CApp

# The untyped universe and its one-step unfolding.
LAMBDA_REAL = Mu("a", Variant.of({"Fun": Function(TyVar("a"), TyVar("a")), "Val": Real}))
LAMBDA_REAL_UNFOLDED = unfold(LAMBDA_REAL)


def church_free_vars(t: ChurchTerm) -> frozenset[str]:
    if isinstance(t, CVar):
        return frozenset([t.name])
    if isinstance(t, CReal):
        return frozenset()
    if isinstance(t, CLam):
        return church_free_vars(t.body) - {t.var}
    if isinstance(t, CKernel):
        out: frozenset[str] = frozenset()
        for a in t.args:
            out |= church_free_vars(a)
        return out
    if isinstance(t, CIfz):
        return church_free_vars(t.cond) | church_free_vars(t.zero) | church_free_vars(t.nonzero)
    if isinstance(t, CFactor):
        return church_free_vars(t.arg)
    if isinstance(t, CApp):
        return church_free_vars(t.fn) | church_free_vars(t.arg)
    raise TypeError(f"not a Church term: {t!r}")


def _church_names(t: ChurchTerm, out: set[str]) -> None:
    if isinstance(t, (CVar, CLam)):
        out.add(t.name if isinstance(t, CVar) else t.var)
    if isinstance(t, CLam):
        _church_names(t.body, out)
    elif isinstance(t, CKernel):
        for a in t.args:
            _church_names(a, out)
    elif isinstance(t, CIfz):
        for s in (t.cond, t.zero, t.nonzero):
            _church_names(s, out)
    elif isinstance(t, CFactor):
        _church_names(t.arg, out)
    elif isinstance(t, CApp):
        _church_names(t.fn, out)
        _church_names(t.arg, out)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_KEYWORDS = frozenset({"let", "in", "ifz", "then", "else", "factor"})
_INFIX = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


class _ChurchParser:
    def __init__(self, src: str, free: frozenset[str] = frozenset()):
        self.ts = TokenStream(src)
        self.scope: list[str] = list(free)

    def binder(self) -> str:
        tok = self.ts.expect_ident("variable")
        if tok.text in _KEYWORDS or prims.lookup(tok.text) is not None:
            self.ts.error(f"{tok.text!r} cannot be used as a variable", tok)
        return tok.text

    def bound(self, x: str, parse):
        self.scope.append(x)
        try:
            return parse()
        finally:
            self.scope.pop()

    def term(self) -> ChurchTerm:
        ts = self.ts
        if ts.accept("let"):
            x = self.binder()
            ts.expect("=")
            rhs = self.term()
            ts.expect("in")
            body = self.bound(x, self.term)
            return CApp(CLam(x, body), rhs)
        if ts.accept("\\"):
            x = self.binder()
            ts.expect(".")
            return CLam(x, self.bound(x, self.term))
        if ts.accept("ifz"):
            cond = self.term()
            ts.expect("then")
            zero = self.term()
            ts.expect("else")
            return CIfz(cond, zero, self.term())
        return self.arith()

    def arith(self) -> ChurchTerm:
        left = self.product()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.advance()
            left = CKernel(_INFIX[op.text], (left, self.product()))
        return left

    def product(self) -> ChurchTerm:
        left = self.unary()
        while self.ts.at("*") or self.ts.at("/"):
            op = self.ts.advance()
            left = CKernel(_INFIX[op.text], (left, self.unary()))
        return left

    def unary(self) -> ChurchTerm:
        ts = self.ts
        if ts.accept("-"):
            if ts.peek.kind == "num" and not self._starts_atom(ts.peek_at(1)):
                return CReal(-float(ts.advance().text))
            return CKernel("neg", (self.unary(),))
        return self.app()

    def _starts_atom(self, tok: Token) -> bool:
        if tok.kind == "num":
            return True
        if tok.kind == "sym":
            return tok.text == "("
        return tok.kind == "ident" and (tok.text not in _KEYWORDS or tok.text == "factor")

    def app(self) -> ChurchTerm:
        fn = self.atom()
        while self._starts_atom(self.ts.peek):
            fn = CApp(fn, self.atom())
        return fn

    def atom(self) -> ChurchTerm:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "num":
            ts.advance()
            return CReal(float(tok.text))
        if ts.accept("("):
            t = self.term()
            ts.expect(")")
            return t
        if ts.accept("factor"):
            ts.expect("(")
            arg = self.term()
            ts.expect(")")
            return CFactor(arg)
        if tok.kind == "ident" and tok.text not in _KEYWORDS:
            ts.advance()
            if tok.text in self.scope:
                return CVar(tok.text)
            spec = prims.lookup(tok.text)
            if spec is None:
                ts.error(f"unknown kernel or unbound variable {tok.text!r}", tok)
            ts.expect("(")
            args = []
            if not ts.at(")"):
                args.append(self.term())
                while ts.accept(","):
                    args.append(self.term())
            ts.expect(")")
            if len(args) != spec.arity:
                ts.error(f"{tok.text} expects {spec.arity} arguments, got {len(args)}", tok)
            return CKernel(tok.text, tuple(args))
        ts.error(f"expected a term, found {tok.text or 'end of input'!r}")


def parse_church(src: str, free: frozenset[str] = frozenset()) -> SurfaceProgram:
    """Parse Church source; identifiers outside ``free`` must be bound or registry kernels."""
    p = _ChurchParser(src, free)
    t = p.term()
    if p.ts.peek.kind != "eof":
        p.ts.error(f"unexpected {p.ts.peek.text!r} after end of term")
    return SurfaceProgram(src, "church", t)


def church_term(src: str) -> ChurchTerm:
    return parse_church(src).raw


# --------------------------------------------------------------------------
# Translation into SFPC
# --------------------------------------------------------------------------


def _val(t: Term) -> Term:
    return Roll(LAMBDA_REAL, Inj(LAMBDA_REAL_UNFOLDED, "Val", t))


def _fun(t: Term) -> Term:
    return Roll(LAMBDA_REAL, Inj(LAMBDA_REAL_UNFOLDED, "Fun", t))


class _Translator:
    def __init__(self, fresh: _Fresh):
        self.fresh = fresh
        self._bot: Term | None = None

    @property
    def bot(self) -> Term:
        if self._bot is None:
            self._bot = bottom(LAMBDA_REAL, self.fresh)
        return self._bot

    def unroll(self, t: Term) -> Term:
        w = self.fresh("w")
        return MatchRoll(t, w, Var(w))

    def unpack(self, t: Term, tag: str, x: str, then: Term) -> Term:
        """Evaluate ``t``; continue with ``then`` if it carries ``tag``, diverge otherwise."""
        other = "Val" if tag == "Fun" else "Fun"
        return MatchVariant(
            self.unroll(t),
            (Branch(tag, x, then), Branch(other, self.fresh("_"), self.bot)),
        )

    def unpack_all(self, terms: list[Term], names: list[str], then: Term) -> Term:
        for t, x in reversed(list(zip(terms, names))):
            then = self.unpack(t, "Val", x, then)
        return then

    def go(self, t: ChurchTerm) -> Term:
        if isinstance(t, CVar):
            return Var(t.name)
        if isinstance(t, CReal):
            return _val(RealLit(t.value))
        if isinstance(t, CLam):
            return _fun(Lam(t.var, LAMBDA_REAL, self.go(t.body)))
        if isinstance(t, CApp):
            f = self.fresh("f")
            return self.unpack(self.go(t.fn), "Fun", f, App(Var(f), self.go(t.arg)))
        if isinstance(t, CKernel):
            spec = prims.lookup(t.name)
            args = [self.go(a) for a in t.args]
            xs = [self.fresh("x") for _ in args]
            if isinstance(spec, prims.KernelSpec):
                core = Prim(spec.randomizer_name, tuple(Var(x) for x in xs) + (Sample(),))
            elif spec is not None:
                core = Prim(t.name, tuple(Var(x) for x in xs))
            else:
                raise ValueError(f"unknown kernel {t.name!r}")
            return self.unpack_all(args, xs, _val(core))
        if isinstance(t, CIfz):
            x = self.fresh("x")
            return self.unpack(self.go(t.cond), "Val", x,
                               IfZero(Var(x), self.go(t.zero), self.go(t.nonzero)))
        if isinstance(t, CFactor):
            x = self.fresh("x")
            return self.unpack(self.go(t.arg), "Val", x, MatchUnit(Score(Var(x)), _val(Var(x))))
        raise TypeError(f"not a Church term: {t!r}")


def translate_church(t: ChurchTerm | SurfaceProgram) -> Term:
    """The faithful translation into SFPC at type ``LAMBDA_REAL``."""
    if isinstance(t, SurfaceProgram):
        t = t.raw
    names: set[str] = set()
    _church_names(t, names)
    return _Translator(_Fresh(names)).go(t)


def church_payload(v) -> tuple:
    """Observable payload of a result: ``("val", r)`` or ``("fun",)``.

    Accepts both direct Church values and translated SFPC values.
    """
    if isinstance(v, CReal):
        return ("val", v.value)
    if isinstance(v, CLam):
        return ("fun",)
    if isinstance(v, Roll) and isinstance(v.arg, Inj):
        if v.arg.label == "Val" and isinstance(v.arg.arg, RealLit):
            return ("val", v.arg.arg.value)
        if v.arg.label == "Fun":
            return ("fun",)
    raise ValueError(f"not a Church value: {v!r}")


def pretty_church(t: ChurchTerm) -> str:
    if isinstance(t, CVar):
        return t.name
    if isinstance(t, CReal):
        s = repr(t.value)
        return f"({s})" if s.startswith("-") else s
    if isinstance(t, CLam):
        return f"(\\{t.var}. {pretty_church(t.body)})"
    if isinstance(t, CApp):
        return f"({pretty_church(t.fn)} {pretty_church(t.arg)})"
    if isinstance(t, CKernel):
        return f"{t.name}({', '.join(pretty_church(a) for a in t.args)})"
    if isinstance(t, CIfz):
        return (f"(ifz {pretty_church(t.cond)} then {pretty_church(t.zero)} "
                f"else {pretty_church(t.nonzero)})")
    if isinstance(t, CFactor):
        return f"factor({pretty_church(t.arg)})"
    raise TypeError(f"not a Church term: {t!r}")


__all__ = [
    "CVar", "CReal", "CKernel", "CIfz", "CFactor", "CLam", "CApp", "ChurchTerm",
    "LAMBDA_REAL", "LAMBDA_REAL_UNFOLDED", "ParseError",
    "parse_church", "church_term", "translate_church", "church_payload",
    "church_free_vars", "pretty_church",
]
