import pytest
from hypothesis import given, settings, strategies as st

from sfpc.gen import random_program
from sfpc.surface import parse_sfpc
from sfpc.syntax import (
    App, Branch, Function, Inj, Kind, Lam, MatchPair, MatchVariant, Mu, Pair, Placeholder, Prim,
    Product, Real, RealLit, Roll, Sample, TemplateError, TemplatePair, TyVar, Unit, UnitVal,
    Var, Variant, alpha_equal, free_type_vars, free_vars, from_template, is_value, substitute,
    to_template, type_alpha_eq, unfold, value_eq_mod_lambda,
)

from conftest import PROGRAMS, core

ident = Lam("x", Real, Var("x"))


def test_kind_has_two_inhabitants():
    assert len(Kind) == 2


def test_variant_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        Variant((("A", Real), ("A", Unit)))


def test_free_type_vars_and_unfold():
    nat = Mu("a", Variant.of({"Zero": Unit, "Succ": TyVar("a")}))
    assert free_type_vars(nat) == frozenset()
    assert free_type_vars(nat.body) == {"a"}
    assert unfold(nat) == Variant.of({"Zero": Unit, "Succ": nat})
    assert type_alpha_eq(nat, Mu("b", Variant.of({"Zero": Unit, "Succ": TyVar("b")})))


class TestFreeVars:
    def test_closed_lambda(self):
        assert free_vars(ident) == frozenset()

    def test_application(self):
        assert free_vars(App(Var("x"), Var("y"))) == {"x", "y"}

    def test_pair_match_binders(self):
        t = MatchPair(Pair(Var("x"), Var("x")), "a", "b", Var("a"))
        assert free_vars(t) == {"x"}


class TestSubstitute:
    def test_under_binder(self):
        t = Lam("y", Real, Var("x"))
        assert substitute(t, {"x": RealLit(3.0)}) == Lam("y", Real, RealLit(3.0))

    def test_variable(self):
        z = Lam("z", Real, Var("z"))
        assert substitute(Var("x"), {"x": z}) == z

    def test_shadowing(self):
        assert substitute(ident, {"x": RealLit(1.0)}) == ident

    def test_capture_is_avoided(self):
        t = Lam("y", Real, App(Var("x"), Var("y")))
        out = substitute(t, {"x": Var("y")})
        assert isinstance(out, Lam) and out.var != "y"
        assert free_vars(out) == {"y"}

    def test_simultaneous(self):
        t = Pair(Var("x"), Var("y"))
        assert substitute(t, {"x": Var("y"), "y": Var("x")}) == Pair(Var("y"), Var("x"))


class TestIsValue:
    def test_pair_of_values(self):
        assert is_value(Pair(RealLit(1.0), ident))

    def test_sample(self):
        assert not is_value(Sample())

    def test_roll_inj_unit(self):
        bool_ty = Variant.of({"T": Unit, "F": Unit})
        assert is_value(Roll(Mu("a", bool_ty), Inj(bool_ty, "T", UnitVal())))

    def test_redex(self):
        assert not is_value(App(ident, RealLit(1.0)))


class TestTemplates:
    def test_two_literals(self):
        tp = to_template(Prim("add", (RealLit(0.5), RealLit(2.0))))
        assert tp.skeleton == Prim("add", (Placeholder(1), Placeholder(2)))
        assert tp.reals == (0.5, 2.0)

    def test_regression_program(self):
        raw = parse_sfpc((PROGRAMS / "regression.sfpc").read_text()).raw
        tp = to_template(raw)
        assert tp.arity == 11
        assert tp.reals == (0, 2, 1.1, 1, 0.25, 1.9, 2, 0.25, 2.7, 3, 0.25)
        assert from_template(tp) == raw

    def test_no_literals(self):
        assert to_template(Sample()) == TemplatePair(Sample(), ())

    def test_instantiate(self):
        assert from_template(TemplatePair(Placeholder(1), (7.0,))) == RealLit(7.0)

    def test_arity_mismatch(self):
        with pytest.raises(TemplateError):
            from_template(TemplatePair(Placeholder(1), ()))

    def test_misnumbered_placeholders(self):
        with pytest.raises(TemplateError):
            from_template(TemplatePair(Pair(Placeholder(2), Placeholder(1)), (1.0, 2.0)))

    def test_to_line(self):
        tp = to_template(Prim("add", (RealLit(0.5), RealLit(2.0))))
        assert tp.to_line() == "(2, add(?1, ?2), [0.5, 2.0])"

    def test_core_round_trip(self, regression):
        tp = to_template(regression)
        assert from_template(tp) == regression
        assert from_template(TemplatePair(tp.skeleton, tp.reals)) == regression


class TestLambdaCongruence:
    def test_lambdas_identified(self):
        assert value_eq_mod_lambda(ident, Lam("y", Real, RealLit(0.0)))

    def test_reals_distinguished(self):
        assert not value_eq_mod_lambda(Pair(RealLit(1.0), ident), Pair(RealLit(2.0), ident))

    def test_roll(self):
        v = core("roll[mu a. [Z | S a]] (inj[[Z | S mu a. [Z | S a]]] Z ())")
        assert value_eq_mod_lambda(v, v)


def _values(seed):
    from sfpc.evaluator import Converged, eval_traced

    t, _ = random_program(seed, ty=Product(Real, Function(Real, Real)))
    out = eval_traced(t, 200, seed)
    return out.value if isinstance(out, Converged) else Pair(RealLit(0.0), ident)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_template_bijection_on_generated_terms(seed):
    t, _ = random_program(seed)
    tp = to_template(t)
    assert from_template(tp) == t
    assert to_template(from_template(tp)) == tp


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_lambda_congruence_is_an_equivalence(a, b, c):
    x, y, z = _values(a), _values(b), _values(c)
    assert value_eq_mod_lambda(x, x)
    assert value_eq_mod_lambda(x, y) == value_eq_mod_lambda(y, x)
    if value_eq_mod_lambda(x, y) and value_eq_mod_lambda(y, z):
        assert value_eq_mod_lambda(x, z)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.floats(-10, 10))
def test_substitution_preserves_values(seed, r):
    v = Pair(Var("x"), Lam("y", Real, Prim("add", (Var("x"), Var("y")))))
    assert is_value(substitute(v, {"x": RealLit(r)}))
    v2 = _values(seed)
    assert is_value(substitute(Inj(Variant.of({"A": Real}), "A", Var("x")), {"x": RealLit(r)}))
    assert is_value(v2)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_substitution_idempotent_on_disjoint_domain(seed):
    t, _ = random_program(seed)
    once = substitute(t, {"q": RealLit(1.0)})
    assert alpha_equal(substitute(once, {"q": RealLit(1.0)}), once)


def test_match_variant_branch_lookup():
    m = MatchVariant(Var("s"), (Branch("A", "x", Var("x")), Branch("B", "y", Var("y"))))
    assert m.branch("B").var == "y"
    assert m.branch("C") is None
