import pytest
from hypothesis import given, settings, strategies as st

from sfpc.church import LAMBDA_REAL, church_term, translate_church
from sfpc.gen import random_program
from sfpc.surface import DesugarError, desugar, parse_sfpc, parse_type
from sfpc.syntax import (
    Function, Pair, Product, Real, RealLit, TyVar, Unit, UnitVal, Var, Variant, substitute,
    type_alpha_eq,
)
from sfpc.typecheck import (
    KindError, TypeCheckError, check_context, infer_type, kind_check, type_of_value,
)

from conftest import core
from corpus import ILL_TYPED

BOOL = "[True | False]"
NAT = "mu a. [Zero | Succ a]"
LIST_REAL = "mu a. [Nil | Cons Real * a]"
STOCH_REAL = "mu a. Unit -> Real * a"
UNTYPED_REAL = "mu a. [Val Real | Fun a -> a]"
STOCH_ALIAS = "type StochR = mu a. Unit -> Real * a;\n"
DRAW = "\\x:StochR. (unroll x) ()"
RW = ("\\x:Real. rec(y : Real -> StochR). \\z:Real. "
      "roll[StochR] (\\_:Unit. (z, y (normal_rng(z, x))))")


@pytest.mark.parametrize("src", [BOOL, NAT, LIST_REAL, STOCH_REAL, UNTYPED_REAL])
def test_example_types_are_well_kinded(src):
    assert kind_check(frozenset(), parse_type(src))


def test_unbound_type_variable():
    assert not kind_check(frozenset(), TyVar("a"))
    assert kind_check({"a"}, TyVar("a"))


def test_variant_components_are_checked():
    assert not kind_check(frozenset(), Variant.of({"A": TyVar("b")}))


def test_context_check():
    check_context({"x": Real, "f": Function(Real, Unit)})
    with pytest.raises(KindError):
        check_context({"x": TyVar("a")})


def test_draw_type():
    ty = infer_type({}, core(STOCH_ALIAS + DRAW))
    stoch = parse_type(STOCH_REAL)
    assert type_alpha_eq(ty, Function(stoch, Product(Real, stoch)))


def test_random_walk_type():
    ty = infer_type({}, core(STOCH_ALIAS + RW))
    stoch = parse_type(STOCH_REAL)
    assert type_alpha_eq(ty, Function(Real, Function(Real, stoch)))


def test_score_of_sample():
    assert infer_type({}, core("score(sample)")) == Unit


def test_translation_of_identity():
    assert type_alpha_eq(infer_type({}, translate_church(church_term("\\x. x"))), LAMBDA_REAL)


def test_lambda_real_matches_the_untyped_lambda_type():
    assert type_alpha_eq(LAMBDA_REAL, parse_type(UNTYPED_REAL))


class TestTypeOfValue:
    def test_unit(self):
        assert type_of_value(UnitVal()) == Unit

    def test_real(self):
        assert type_of_value(RealLit(2.0)) == Real

    def test_nat_zero(self):
        v = core(f"type Nat = {NAT};\nroll[Nat] (inj[[Zero | Succ Nat]] Zero ())")
        assert type_alpha_eq(type_of_value(v), parse_type(NAT))

    def test_ill_typed_value(self):
        with pytest.raises(AssertionError):
            type_of_value(Var("free"))


@pytest.mark.parametrize("src,rule", ILL_TYPED)
def test_ill_typed_programs_name_the_rule(src, rule):
    with pytest.raises(TypeCheckError) as info:
        infer_type({}, desugar(parse_sfpc(src)))
    assert info.value.rule == rule
    assert f"[{rule}]" in str(info.value)


def test_diagnostics_carry_spans():
    with pytest.raises(TypeCheckError) as info:
        infer_type({}, desugar(parse_sfpc("\n  1 2")))
    assert info.value.span == (2, 3)


def test_let_without_synthesisable_type_is_rejected():
    with pytest.raises(DesugarError):
        desugar(parse_sfpc("let x = y in x"))


def test_rec_rule_gives_the_annotated_type():
    t = core("rec(f : Real -> Real). \\n:Real. f n")
    assert infer_type({}, t) == Function(Real, Real)
    t2 = core("rec(f : (Real -> Real) -> Unit). \\g:Real -> Real. f g")
    assert infer_type({}, t2) == Function(Function(Real, Real), Unit)


def test_bottom_has_its_type():
    for ty in ["Unit", "Real", "Real -> Real", NAT]:
        assert type_alpha_eq(infer_type({}, core(f"bot[{ty}]")), parse_type(ty))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_synthesis_is_deterministic_and_recheckable(seed):
    t, ty = random_program(seed)
    a, b = infer_type({}, t), infer_type({}, t)
    assert a == b and type_alpha_eq(a, ty)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_weakening(seed):
    t, ty = random_program(seed)
    assert type_alpha_eq(infer_type({"unused_q": Real, "unused_f": Function(Unit, Unit)}, t), ty)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9), st.floats(-5, 5))
def test_substitution_typing(seed, r):
    body, _ = random_program(seed)
    t = Pair(Var("q"), body)
    assert type_alpha_eq(infer_type({}, substitute(t, {"q": RealLit(r)})), infer_type({"q": Real}, t))
