"""Random well-typed closed programs for property testing.

Generation is type directed: :func:`random_term` builds a term of a
requested type from introduction forms, eliminators applied to randomly
typed scrutinees, primitives, draws, scores and occasional term recursion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from sfpc import prims
from sfpc.surface import _Fresh, rec_encoding
from sfpc.syntax import (
    App, Branch, Function, IfZero, Inj, Lam, MatchPair, MatchRoll, MatchUnit, MatchVariant,
    Mu, Pair, Prim, Product, Real, RealLit, RealType, Roll, Sample, Score, Term, TyVar,
    Type, Unit, UnitType, UnitVal, Var, Variant, type_alpha_eq, unfold,
)

REAL_LIST = Mu("l", Variant.of({"Nil": Unit, "Cons": Product(Real, TyVar("l"))}))
SIGN = Variant.of({"Neg": Real, "Pos": Real, "Zero": Unit})

_PRIMS = [p for p in prims.builtin_registry().values()
          if isinstance(p, prims.PrimSpec) and p.arity <= 3]
_LITERALS = [0.0, 1.0, 2.0, -1.5, 0.25, 0.5, 3.0]


def random_type(rng: random.Random, depth: int = 2) -> Type:
    if depth <= 0:
        return rng.choice([Real, Real, Unit])
    k = rng.randrange(8)
    if k <= 2:
        return Real
    if k == 3:
        return Unit
    if k == 4:
        return Product(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if k == 5:
        return Function(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if k == 6:
        return SIGN
    return REAL_LIST


@dataclass
class TermGenerator:
    rng: random.Random
    max_depth: int = 4
    rec_rate: float = 0.1
    fresh: _Fresh = field(default_factory=lambda: _Fresh(set()))

    def var(self, base: str = "x") -> str:
        return self.fresh(base)

    def literal(self) -> RealLit:
        if self.rng.random() < 0.7:
            return RealLit(self.rng.choice(_LITERALS))
        return RealLit(round(self.rng.uniform(-3, 3), 3))

    def pick_var(self, ctx: dict, ty: Type) -> Term | None:
        names = [x for x, t in ctx.items() if type_alpha_eq(t, ty)]
        return Var(self.rng.choice(names)) if names else None

    def leaf(self, ctx: dict, ty: Type) -> Term:
        v = self.pick_var(ctx, ty)
        if v is not None and self.rng.random() < 0.6:
            return v
        if isinstance(ty, RealType):
            return Sample() if self.rng.random() < 0.3 else self.literal()
        if isinstance(ty, UnitType):
            return UnitVal()
        if isinstance(ty, Product):
            return Pair(self.leaf(ctx, ty.left), self.leaf(ctx, ty.right))
        if isinstance(ty, Function):
            x = self.var()
            return Lam(x, ty.dom, self.leaf({**ctx, x: ty.dom}, ty.cod))
        if isinstance(ty, Variant):
            label, payload = self.rng.choice(ty.cases)
            return Inj(ty, label, self.leaf(ctx, payload))
        if isinstance(ty, Mu):
            body = unfold(ty)
            # the first listed case of the generator's recursive types is the base case
            label = "Nil" if isinstance(body, Variant) and body.payload("Nil") else None
            if label is not None:
                return Roll(ty, Inj(body, label, UnitVal()))
            return Roll(ty, self.leaf(ctx, body))
        raise TypeError(f"cannot generate a leaf of {ty!r}")

    def term(self, ctx: dict, ty: Type, depth: int) -> Term:
        if depth <= 0:
            return self.leaf(ctx, ty)
        rng = self.rng
        choice = rng.randrange(12)
        d = depth - 1
        if choice == 0:
            a = random_type(rng, 1)
            x = self.var()
            return App(Lam(x, a, self.term({**ctx, x: a}, ty, d)), self.term(ctx, a, d))
        if choice == 1:
            a = random_type(rng, 1)
            return App(self.term(ctx, Function(a, ty), d), self.term(ctx, a, d))
        if choice == 2:
            return IfZero(self.real(ctx, d), self.term(ctx, ty, d), self.term(ctx, ty, d))
        if choice == 3:
            unit = Score(self.real(ctx, d)) if rng.random() < 0.7 else self.term(ctx, Unit, d)
            return MatchUnit(unit, self.term(ctx, ty, d))
        if choice == 4:
            a, b = random_type(rng, 1), random_type(rng, 1)
            x, y = self.var(), self.var("y")
            return MatchPair(self.term(ctx, Product(a, b), d), x, y,
                             self.term({**ctx, x: a, y: b}, ty, d))
        if choice == 5:
            scrut = self.term(ctx, SIGN, d)
            branches = []
            for label, payload in SIGN.cases:
                x = self.var()
                branches.append(Branch(label, x, self.term({**ctx, x: payload}, ty, d)))
            rng.shuffle(branches)
            return MatchVariant(scrut, tuple(branches))
        if choice == 6:
            w = self.var("w")
            return MatchRoll(self.term(ctx, REAL_LIST, d), w,
                             self.term({**ctx, w: unfold(REAL_LIST)}, ty, d))
        if choice == 7 and isinstance(ty, Function) and rng.random() < self.rec_rate * 5:
            f = self.var("f")
            return rec_encoding(f, ty, self.term({**ctx, f: ty}, ty, d), self.fresh)
        return self.intro(ctx, ty, d)

    def real(self, ctx: dict, depth: int) -> Term:
        return self.term(ctx, Real, depth)

    def intro(self, ctx: dict, ty: Type, d: int) -> Term:
        rng = self.rng
        if isinstance(ty, RealType):
            k = rng.randrange(5)
            if k == 0:
                return Sample()
            if k == 1:
                return self.literal()
            if k == 2:
                kern = rng.choice([s for s in prims.builtin_registry().values()
                                   if isinstance(s, prims.KernelSpec)])
                args = tuple(self.real(ctx, d) for _ in range(kern.arity))
                return Prim(kern.randomizer_name, args + (Sample(),))
            p = rng.choice(_PRIMS)
            return Prim(p.name, tuple(self.real(ctx, d) for _ in range(p.arity)))
        if isinstance(ty, UnitType):
            return Score(self.real(ctx, d)) if rng.random() < 0.5 else UnitVal()
        if isinstance(ty, Product):
            return Pair(self.term(ctx, ty.left, d), self.term(ctx, ty.right, d))
        if isinstance(ty, Function):
            x = self.var()
            return Lam(x, ty.dom, self.term({**ctx, x: ty.dom}, ty.cod, d))
        if isinstance(ty, Variant):
            label, payload = rng.choice(ty.cases)
            return Inj(ty, label, self.term(ctx, payload, d))
        if isinstance(ty, Mu):
            return Roll(ty, self.term(ctx, unfold(ty), d))
        raise TypeError(f"cannot generate a term of {ty!r}")


def random_program(seed: int, max_depth: int = 4, ty: Type | None = None) -> tuple[Term, Type]:
    """A closed well-typed term and its type, determined by ``seed``."""
    rng = random.Random(seed)
    if ty is None:
        ty = random_type(rng, 2)
    gen = TermGenerator(rng, max_depth)
    return gen.term({}, ty, rng.randint(1, max_depth)), ty


__all__ = ["REAL_LIST", "SIGN", "random_type", "TermGenerator", "random_program"]
