"""SFPC concrete syntax: parser, syntactic sugar, and desugaring.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    program  ::= { "type" NAME "=" type ";" } term
    type     ::= prodty [ "->" type ]
    prodty   ::= atomty { "*" atomty }
    atomty   ::= "Real" | "Unit" | NAME | "(" type ")" | "mu" NAME "." type
               | "[" [ case { "|" case } ] "]"
    case     ::= LABEL [ type ]
    term     ::= expr [ ";" term ]
    expr     ::= "let" x [ ":" type ] "=" term "in" term
               | "letrec" x ":" type "=" term "in" term
               | "\\" x ":" type "." term
               | "rec" "(" x ":" type ")" "." term
               | "ifz" term "then" term "else" term
               | arith
    arith    ::= product { ("+" | "-") product }
    product  ::= unary { ("*" | "/") unary }
    unary    ::= "-" unary | app
    app      ::= atom { atom }
    atom     ::= x | NUMBER | "()" | "(" term ")" | "(" term "," term ")"
               | "sample" | "score" "(" term ")" | "factor" "(" term ")"
               | PRIM "(" [ term { "," term } ] ")"
               | "inj" "[" type "]" LABEL atom | "roll" "[" type "]" atom
               | "unroll" atom | "bot" "[" type "]"
               | "match" term "with" "{" branches "}"
    branches ::= "()" "->" term | "(" x "," y ")" "->" term | "roll" x "->" term
               | LABEL [ x ] "->" term { "|" LABEL [ x ] "->" term }

Infix arithmetic is notation for the ``add``/``sub``/``mul``/``div``/``neg``
primitives.  A registry kernel such as ``normal_rng(m, s)`` is a kernel draw,
desugared to its randomiser applied to the arguments and ``sample``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from typing import Mapping

from sfpc import prims
from sfpc.lexer import ParseError, Token, TokenStream
from sfpc.syntax import (
    App, Branch, Function, IfZero, Inj, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant,
    Mu, Pair, Placeholder, Prim, Product, Real, RealLit, RealType, Roll, Sample, Score,
    Term, TyVar, Type, Unit, UnitType, UnitVal, Var, Variant, free_type_vars, fresh_name,
    substitute, unfold,
)
from sfpc.typecheck import TypeCheckError, infer_type

__all__ = [
    "ParseError", "DesugarError", "SurfaceProgram",
    "Let", "LetRec", "Seq", "Unroll", "Rec", "Bot", "Factor", "KernelDraw",
    "parse_sfpc", "parse_type", "desugar", "compile_sfpc", "check_spcf_fragment",
    "rec_encoding", "bottom", "rec_unfolding",
]

_nospan = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# Sugar nodes (appear only in parsed, not-yet-desugared trees)
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Let:
    var: str
    ty: Type | None
    bound: object
    body: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class LetRec:
    var: str
    ty: Type
    bound: object
    body: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class Seq:
    first: object
    second: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class Unroll:
    arg: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class Rec:
    var: str
    ty: Type
    body: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class Bot:
    ty: Type
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class Factor:
    arg: object
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True, slots=True)
class KernelDraw:
    name: str
    args: tuple
    span: tuple[int, int] | None = _nospan


@dataclass(frozen=True)
class SurfaceProgram:
    source: str
    language: str  # "sfpc" or "church"
    raw: object
    aliases: Mapping[str, Type] = field(default_factory=dict)


class DesugarError(Exception):
    pass


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

KEYWORDS = frozenset({
    "let", "letrec", "in", "rec", "ifz", "then", "else", "match", "with", "sample",
    "score", "factor", "inj", "roll", "unroll", "bot", "mu", "Real", "Unit", "type",
})

_INFIX = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


class _Parser:
    def __init__(self, src: str, aliases: Mapping[str, Type] | None = None):
        self.ts = TokenStream(src)
        self.aliases: dict[str, Type] = dict(aliases or {})
        self._wild = 0

    # -- helpers ----------------------------------------------------------

    def binder(self) -> str:
        tok = self.ts.expect_ident("variable")
        if tok.text in KEYWORDS:
            self.ts.error(f"keyword {tok.text!r} cannot be a variable", tok)
        if tok.text == "_":
            self._wild += 1
            return f"_{self._wild}"
        if prims.lookup(tok.text) is not None:
            self.ts.error(f"{tok.text!r} is a primitive and cannot be rebound", tok)
        return tok.text

    def label(self) -> str:
        tok = self.ts.expect_ident("constructor label")
        if tok.text in KEYWORDS:
            self.ts.error(f"keyword {tok.text!r} cannot be a label", tok)
        return tok.text

    # -- types ------------------------------------------------------------

    def type_(self) -> Type:
        left = self.prod_type()
        if self.ts.accept("->"):
            return Function(left, self.type_())
        return left

    def prod_type(self) -> Type:
        ty = self.atom_type()
        while self.ts.accept("*"):
            ty = Product(ty, self.atom_type())
        return ty

    def atom_type(self) -> Type:
        ts = self.ts
        tok = ts.peek
        if ts.accept("Real"):
            return Real
        if ts.accept("Unit"):
            return Unit
        if ts.accept("("):
            ty = self.type_()
            ts.expect(")")
            return ty
        if ts.accept("mu"):
            var = ts.expect_ident("type variable").text
            ts.expect(".")
            return Mu(var, self.type_())
        if ts.accept("["):
            cases: list[tuple[str, Type]] = []
            seen: set[str] = set()
            if not ts.at("]"):
                while True:
                    lab_tok = ts.peek
                    lab = self.label()
                    if lab in seen:
                        ts.error(f"duplicate label {lab!r} in variant type", lab_tok)
                    seen.add(lab)
                    payload = Unit if ts.at("|") or ts.at("]") else self.type_()
                    cases.append((lab, payload))
                    if not ts.accept("|"):
                        break
            ts.expect("]")
            return Variant(tuple(cases))
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            ts.advance()
            if tok.text in self.aliases:
                return self.aliases[tok.text]
            return TyVar(tok.text)
        ts.error(f"expected a type, found {tok.text or 'end of input'!r}")

    # -- programs ---------------------------------------------------------

    def program(self):
        ts = self.ts
        while ts.at("type"):
            ts.advance()
            name_tok = ts.expect_ident("type name")
            name = name_tok.text
            if name in KEYWORDS:
                ts.error(f"keyword {name!r} cannot name a type", name_tok)
            ts.expect("=")
            self.aliases.pop(name, None)
            body = self.type_()
            ts.expect(";")
            if name in free_type_vars(body):
                body = Mu(name, body)
            self.aliases[name] = body
        t = self.term()
        if ts.peek.kind != "eof":
            ts.error(f"unexpected {ts.peek.text!r} after end of term")
        return t

    # -- terms ------------------------------------------------------------

    def term(self):
        start = self.ts.peek
        first = self.expr()
        if self.ts.accept(";"):
            return Seq(first, self.term(), start.span)
        return first

    def expr(self):
        ts = self.ts
        tok = ts.peek
        if ts.accept("let"):
            x = self.binder()
            ty = self.type_() if ts.accept(":") else None
            ts.expect("=")
            bound = self.term()
            ts.expect("in")
            return Let(x, ty, bound, self.term(), tok.span)
        if ts.accept("letrec"):
            x = self.binder()
            ts.expect(":")
            ty = self.type_()
            ts.expect("=")
            bound = self.term()
            ts.expect("in")
            return LetRec(x, ty, bound, self.term(), tok.span)
        if ts.accept("\\"):
            x = self.binder()
            ts.expect(":")
            ty = self.type_()
            ts.expect(".")
            return Lam(x, ty, self.term(), tok.span)
        if ts.accept("rec"):
            ts.expect("(")
            x = self.binder()
            ts.expect(":")
            ty = self.type_()
            ts.expect(")")
            ts.expect(".")
            return Rec(x, ty, self.term(), tok.span)
        if ts.accept("ifz"):
            cond = self.term()
            ts.expect("then")
            zero = self.term()
            ts.expect("else")
            return IfZero(cond, zero, self.term(), tok.span)
        return self.arith()

    def arith(self):
        left = self.product()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.advance()
            left = Prim(_INFIX[op.text], (left, self.product()), op.span)
        return left

    def product(self):
        left = self.unary()
        while self.ts.at("*") or self.ts.at("/"):
            op = self.ts.advance()
            left = Prim(_INFIX[op.text], (left, self.unary()), op.span)
        return left

    def unary(self):
        ts = self.ts
        if ts.at("-"):
            op = ts.advance()
            if ts.peek.kind == "num" and not self._starts_atom(ts.peek_at(1)):
                num = ts.advance()
                return RealLit(-float(num.text), op.span)
            return Prim("neg", (self.unary(),), op.span)
        return self.app()

    def _starts_atom(self, tok: Token) -> bool:
        if tok.kind in ("num", "hole"):
            return True
        if tok.kind == "sym":
            return tok.text == "("
        if tok.kind == "ident":
            return tok.text not in KEYWORDS or tok.text in {
                "sample", "score", "factor", "inj", "roll", "unroll", "bot", "match"}
        return False

    def app(self):
        start = self.ts.peek
        fn = self.atom()
        while self._starts_atom(self.ts.peek):
            fn = App(fn, self.atom(), start.span)
        return fn

    def call_args(self) -> tuple:
        ts = self.ts
        ts.expect("(")
        args = []
        if not ts.at(")"):
            args.append(self.term())
            while ts.accept(","):
                args.append(self.term())
        ts.expect(")")
        return tuple(args)

    def atom(self):
        ts = self.ts
        tok = ts.peek
        if tok.kind == "num":
            ts.advance()
            return RealLit(float(tok.text), tok.span)
        if tok.kind == "hole":
            ts.advance()
            return Placeholder(int(tok.text[1:]), tok.span)
        if ts.accept("("):
            if ts.accept(")"):
                return UnitVal(tok.span)
            first = self.term()
            if ts.accept(","):
                second = self.term()
                ts.expect(")")
                return Pair(first, second, tok.span)
            ts.expect(")")
            return first
        if ts.accept("sample"):
            return Sample(tok.span)
        if ts.accept("score"):
            ts.expect("(")
            arg = self.term()
            ts.expect(")")
            return Score(arg, tok.span)
        if ts.accept("factor"):
            ts.expect("(")
            arg = self.term()
            ts.expect(")")
            return Factor(arg, tok.span)
        if ts.accept("inj"):
            ts.expect("[")
            ty = self.type_()
            ts.expect("]")
            lab = self.label()
            return Inj(ty, lab, self.atom(), tok.span)
        if ts.accept("roll"):
            ts.expect("[")
            ty = self.type_()
            ts.expect("]")
            return Roll(ty, self.atom(), tok.span)
        if ts.accept("unroll"):
            return Unroll(self.atom(), tok.span)
        if ts.accept("bot"):
            ts.expect("[")
            ty = self.type_()
            ts.expect("]")
            return Bot(ty, tok.span)
        if ts.accept("match"):
            scrut = self.term()
            ts.expect("with")
            ts.expect("{")
            node = self.branches(scrut, tok)
            ts.expect("}")
            return node
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            ts.advance()
            spec = prims.lookup(tok.text)
            if spec is not None:
                if not ts.at("("):
                    ts.error(f"primitive {tok.text!r} must be applied to arguments")
                args = self.call_args()
                if isinstance(spec, prims.KernelSpec):
                    return KernelDraw(tok.text, args, tok.span)
                return Prim(tok.text, args, tok.span)
            if tok.text == "_":
                ts.error("'_' cannot be used as a variable", tok)
            return Var(tok.text, tok.span)
        ts.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def branches(self, scrut, start: Token):
        ts = self.ts
        if ts.at("(") and ts.peek_at(1).text == ")":
            ts.advance()
            ts.advance()
            ts.expect("->")
            return MatchUnit(scrut, self.term(), start.span)
        if ts.accept("("):
            x = self.binder()
            ts.expect(",")
            y = self.binder()
            ts.expect(")")
            ts.expect("->")
            return MatchPair(scrut, x, y, self.term(), start.span)
        if ts.accept("roll"):
            x = self.binder()
            ts.expect("->")
            return MatchRoll(scrut, x, self.term(), start.span)
        arms: list[Branch] = []
        seen: set[str] = set()
        while True:
            lab_tok = ts.peek
            lab = self.label()
            if lab in seen:
                ts.error(f"duplicate branch for {lab!r}", lab_tok)
            seen.add(lab)
            if ts.at("->"):
                self._wild += 1
                x = f"_{self._wild}"
            else:
                x = self.binder()
            ts.expect("->")
            arms.append(Branch(lab, x, self.term()))
            if not ts.accept("|"):
                break
        return MatchVariant(scrut, tuple(arms), start.span)


def parse_sfpc(src: str, aliases: Mapping[str, Type] | None = None) -> SurfaceProgram:
    """Parse SFPC source into a raw (sugared) tree."""
    p = _Parser(src, aliases)
    raw = p.program()
    return SurfaceProgram(src, "sfpc", raw, dict(p.aliases))


def parse_type(src: str, aliases: Mapping[str, Type] | None = None) -> Type:
    p = _Parser(src, aliases)
    ty = p.type_()
    if p.ts.peek.kind != "eof":
        p.ts.error(f"unexpected {p.ts.peek.text!r} after type")
    return ty


# --------------------------------------------------------------------------
# Desugaring
# --------------------------------------------------------------------------

_BINDER_FIELDS = ("var", "fst", "snd", "name")


def _collect_names(node, out: set[str]) -> None:
    if isinstance(node, tuple):
        for item in node:
            _collect_names(item, out)
        return
    if not is_dataclass(node) or isinstance(node, (TyVar, RealType, UnitType, Product,
                                                   Function, Variant, Mu)):
        return
    for f in fields(node):
        value = getattr(node, f.name)
        if f.name in _BINDER_FIELDS and isinstance(value, str):
            out.add(value)
        elif f.name != "span":
            _collect_names(value, out)


class _Fresh:
    def __init__(self, avoid: set[str]):
        self.avoid = set(avoid)

    def __call__(self, base: str) -> str:
        name = fresh_name(base, self.avoid)
        self.avoid.add(name)
        return name


def _type_var_for(ty: Type) -> str:
    return fresh_name("a", free_type_vars(ty))


def rec_encoding(x: str, ty: Type, body: Term, fresh) -> Term:
    """Term recursion ``rec(x:ty). body`` via the self-applicable type ``mu a. a -> ty``.

    ``ty`` must be a function type ``t1 -> t2``; ``body`` is already desugared.
    """
    if not isinstance(ty, Function):
        raise DesugarError("rec requires a function type annotation")
    a = _type_var_for(ty)
    sigma = Mu(a, Function(TyVar(a), ty))
    y, z, w, b = fresh("y"), fresh("z"), fresh("w"), fresh("body")
    self_app = Lam(z, ty.dom, App(App(MatchRoll(Var(y), w, Var(w)), Var(y)), Var(z)))
    body_fn = Lam(y, sigma, App(Lam(x, ty, body), self_app))
    return App(Lam(b, Function(sigma, ty), App(Var(b), Roll(sigma, Var(b)))), body_fn)


def bottom(ty: Type, fresh) -> Term:
    """A closed divergent term of type ``ty``."""
    if isinstance(ty, Function):
        x = fresh("x")
        return rec_encoding(x, ty, Var(x), fresh)
    f, u = fresh("f"), fresh("u")
    loop = rec_encoding(f, Function(Unit, ty), Lam(u, Unit, App(Var(f), UnitVal())), fresh)
    return App(loop, UnitVal())


class _Desugarer:
    def __init__(self, fresh: _Fresh):
        self.fresh = fresh

    def synth(self, ctx, t: Term, what: str, span) -> Type:
        try:
            return infer_type(ctx, t)
        except TypeCheckError as exc:
            where = f" (line {span[0]}, column {span[1]})" if span else ""
            raise DesugarError(f"cannot synthesise the type of {what}{where}: {exc}") from exc

    def bind(self, ctx: dict, name: str, ty: Type | None) -> dict:
        new = dict(ctx)
        if ty is None:
            new.pop(name, None)
        else:
            new[name] = ty
        return new

    def try_synth(self, ctx, t) -> Type | None:
        try:
            return infer_type(ctx, t)
        except TypeCheckError:
            return None

    def go(self, node, ctx: dict) -> Term:
        d = self.go
        if isinstance(node, (Var, RealLit, Sample, UnitVal, Placeholder)):
            return node
        if isinstance(node, Prim):
            return Prim(node.name, tuple(d(a, ctx) for a in node.args), node.span)
        if isinstance(node, IfZero):
            return IfZero(d(node.cond, ctx), d(node.zero, ctx), d(node.nonzero, ctx), node.span)
        if isinstance(node, Score):
            return Score(d(node.arg, ctx), node.span)
        if isinstance(node, Pair):
            return Pair(d(node.fst, ctx), d(node.snd, ctx), node.span)
        if isinstance(node, Inj):
            return Inj(node.ty, node.label, d(node.arg, ctx), node.span)
        if isinstance(node, Roll):
            return Roll(node.ty, d(node.arg, ctx), node.span)
        if isinstance(node, Lam):
            return Lam(node.var, node.ty, d(node.body, self.bind(ctx, node.var, node.ty)), node.span)
        if isinstance(node, App):
            return App(d(node.fn, ctx), d(node.arg, ctx), node.span)
        if isinstance(node, MatchUnit):
            return MatchUnit(d(node.scrut, ctx), d(node.body, ctx), node.span)
        if isinstance(node, MatchPair):
            scrut = d(node.scrut, ctx)
            sty = self.try_synth(ctx, scrut)
            left, right = (sty.left, sty.right) if isinstance(sty, Product) else (None, None)
            inner = self.bind(self.bind(ctx, node.fst, left), node.snd, right)
            return MatchPair(scrut, node.fst, node.snd, d(node.body, inner), node.span)
        if isinstance(node, MatchRoll):
            scrut = d(node.scrut, ctx)
            sty = self.try_synth(ctx, scrut)
            inner = self.bind(ctx, node.var, unfold(sty) if isinstance(sty, Mu) else None)
            return MatchRoll(scrut, node.var, d(node.body, inner), node.span)
        if isinstance(node, MatchVariant):
            scrut = d(node.scrut, ctx)
            sty = self.try_synth(ctx, scrut)
            arms = []
            for br in node.branches:
                payload = sty.payload(br.label) if isinstance(sty, Variant) else None
                arms.append(Branch(br.label, br.var, d(br.body, self.bind(ctx, br.var, payload))))
            return MatchVariant(scrut, tuple(arms), node.span)
        # sugar
        if isinstance(node, Let):
            bound = d(node.bound, ctx)
            ty = node.ty if node.ty is not None else self.synth(
                ctx, bound, f"let-bound {node.var!r}", node.span)
            body = d(node.body, self.bind(ctx, node.var, ty))
            return App(Lam(node.var, ty, body, node.span), bound, node.span)
        if isinstance(node, LetRec):
            inner = self.bind(ctx, node.var, node.ty)
            rec = rec_encoding(node.var, node.ty, d(node.bound, inner), self.fresh)
            return App(Lam(node.var, node.ty, d(node.body, inner), node.span), rec, node.span)
        if isinstance(node, Seq):
            return MatchUnit(d(node.first, ctx), d(node.second, ctx), node.span)
        if isinstance(node, Unroll):
            w = self.fresh("w")
            return MatchRoll(d(node.arg, ctx), w, Var(w), node.span)
        if isinstance(node, Rec):
            if not isinstance(node.ty, Function):
                raise DesugarError(f"rec({node.var}) needs a function type annotation")
            body = d(node.body, self.bind(ctx, node.var, node.ty))
            return rec_encoding(node.var, node.ty, body, self.fresh)
        if isinstance(node, Bot):
            return bottom(node.ty, self.fresh)
        if isinstance(node, Factor):
            x = self.fresh("x")
            return App(Lam(x, Real, MatchUnit(Score(Var(x)), Var(x))), d(node.arg, ctx), node.span)
        if isinstance(node, KernelDraw):
            spec = prims.lookup(node.name)
            assert isinstance(spec, prims.KernelSpec)
            if len(node.args) != spec.arity:
                raise DesugarError(
                    f"kernel {node.name} expects {spec.arity} arguments, got {len(node.args)}")
            args = tuple(d(a, ctx) for a in node.args) + (Sample(),)
            return Prim(spec.randomizer_name, args, node.span)
        raise DesugarError(f"unknown syntax node {node!r}")


def desugar(p: SurfaceProgram | object, ctx: Mapping[str, Type] | None = None) -> Term:
    """Translate a parsed program (or raw tree) into core SFPC."""
    raw = p.raw if isinstance(p, SurfaceProgram) else p
    if isinstance(p, SurfaceProgram) and p.language != "sfpc":
        raise DesugarError("desugar expects an SFPC program; translate Church programs instead")
    names: set[str] = set(ctx or {})
    _collect_names(raw, names)
    return _Desugarer(_Fresh(names)).go(raw, dict(ctx or {}))


def rec_unfolding(node: Rec, ctx: Mapping[str, Type] | None = None) -> tuple[Term, Term]:
    """``(rec(x:ty). t, t[x := rec(x:ty). t])``, both desugared."""
    if not isinstance(node, Rec):
        raise DesugarError("rec_unfolding expects a rec node")
    fixed = desugar(node, ctx)
    body = desugar(node.body, {**(ctx or {}), node.var: node.ty})
    return fixed, substitute(body, {node.var: fixed})


def compile_sfpc(src: str) -> Term:
    """Parse and desugar SFPC source."""
    return desugar(parse_sfpc(src))


# --------------------------------------------------------------------------
# The SPCF fragment
# --------------------------------------------------------------------------


def _spcf_type(ty: Type | None) -> bool:
    if ty is None or isinstance(ty, RealType):
        return True
    if isinstance(ty, Function):
        return _spcf_type(ty.dom) and _spcf_type(ty.cod)
    return False


def check_spcf_fragment(p: SurfaceProgram | object) -> bool:
    """Whether a parsed program stays within call-by-value SPCF.

    Allowed: variables, primitives and kernel draws, ifz, sample, factor,
    lambda, application, rec and let, with every annotation built from
    ``Real`` and ``->`` only.
    """
    raw = p.raw if isinstance(p, SurfaceProgram) else p
    stack = [raw]
    while stack:
        node = stack.pop()
        if isinstance(node, (Var, RealLit, Sample)):
            continue
        if isinstance(node, (Prim, KernelDraw)):
            stack.extend(node.args)
        elif isinstance(node, IfZero):
            stack.extend((node.cond, node.zero, node.nonzero))
        elif isinstance(node, Factor):
            stack.append(node.arg)
        elif isinstance(node, Lam):
            if not _spcf_type(node.ty):
                return False
            stack.append(node.body)
        elif isinstance(node, App):
            stack.extend((node.fn, node.arg))
        elif isinstance(node, Rec):
            if not (isinstance(node.ty, Function) and _spcf_type(node.ty)):
                return False
            stack.append(node.body)
        elif isinstance(node, Let):
            if not _spcf_type(node.ty):
                return False
            stack.extend((node.bound, node.body))
        else:
            return False
    return True
