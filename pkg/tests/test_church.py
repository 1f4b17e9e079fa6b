import pytest

from sfpc.church import (
    CApp, CLam, CReal, CVar, LAMBDA_REAL, LAMBDA_REAL_UNFOLDED, church_free_vars, church_payload,
    church_term, parse_church, pretty_church, translate_church,
)
from sfpc.evaluator import Converged, Fresh, eval
from sfpc.lexer import ParseError
from sfpc.syntax import Inj, Lam, RealLit, Roll, Var, type_alpha_eq
from sfpc.typecheck import infer_type

from corpus import CHURCH_CORPUS


def test_real_translation():
    assert translate_church(CReal(3.5)) == Roll(
        LAMBDA_REAL, Inj(LAMBDA_REAL_UNFOLDED, "Val", RealLit(3.5)))


def test_lambda_translation():
    assert translate_church(CLam("x", CVar("x"))) == Roll(
        LAMBDA_REAL, Inj(LAMBDA_REAL_UNFOLDED, "Fun", Lam("x", LAMBDA_REAL, Var("x"))))


def test_identity_application_evaluates_to_val():
    t = translate_church(church_term("(\\x. x) 1"))
    assert type_alpha_eq(infer_type({}, t), LAMBDA_REAL)
    out = eval(t, 1000, Fresh(0))
    assert isinstance(out, Converged)
    assert church_payload(out.value) == ("val", 1.0)


def test_let_is_application():
    assert church_term("let x = 1 in x") == CApp(CLam("x", CVar("x")), CReal(1.0))


def test_unbound_names_are_parse_errors():
    with pytest.raises(ParseError):
        church_term("y")
    with pytest.raises(ParseError):
        church_term("nosuch(1)")


def test_kernel_arity_is_checked():
    with pytest.raises(ParseError):
        church_term("normal_rng(1)")


def test_open_terms_translate_in_the_lambda_context():
    p = parse_church("f (g 1)", free=frozenset({"f", "g"}))
    assert church_free_vars(p.raw) == {"f", "g"}
    ty = infer_type({"f": LAMBDA_REAL, "g": LAMBDA_REAL}, translate_church(p))
    assert type_alpha_eq(ty, LAMBDA_REAL)


@pytest.mark.parametrize("src", CHURCH_CORPUS)
def test_corpus_translations_type_check(src):
    assert type_alpha_eq(infer_type({}, translate_church(church_term(src))), LAMBDA_REAL)


@pytest.mark.parametrize("src", CHURCH_CORPUS)
def test_pretty_church_reparses(src):
    t = church_term(src)
    assert church_term(pretty_church(t)) == t


def test_negative_literals():
    assert church_term("-2") == CReal(-2.0)
    assert church_term("(\\x. x) (-2)") == CApp(CLam("x", CVar("x")), CReal(-2.0))
