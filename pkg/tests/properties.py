"""Per-(program, seed) evaluator properties shared by unit and acceptance tests."""

from sfpc.evaluator import MAX_WEIGHT, Converged, Fresh, Replay, derive_seed, eval_indexed
from sfpc.gen import random_program
from sfpc.syntax import alpha_equal, from_template, to_template, type_alpha_eq
from sfpc.typecheck import infer_type, type_of_value

FUEL = 400


def expected_weight(scores) -> float:
    w = 1.0
    for s in scores:
        w = min(w * s, MAX_WEIGHT)
    return w


def evaluator_failures(seed: int) -> list[str]:
    """Names of the properties violated by generated program ``seed``."""
    t, ty = random_program(seed)
    failed = []
    if not type_alpha_eq(infer_type({}, t), ty):
        failed.append("typing")
    out = eval_indexed(t, FUEL, Fresh(derive_seed(seed, 0)))
    again = eval_indexed(t, FUEL, Replay(out.trace))
    if again != out:
        failed.append("replay")
    if isinstance(out, Converged):
        if not type_alpha_eq(type_of_value(out.value), ty):
            failed.append("preservation")
        if out.weight != expected_weight(out.scores) or not all(s >= 0 for s in out.scores):
            failed.append("weight-law")
        if eval_indexed(t, FUEL + 1, Replay(out.trace)) != out \
                or eval_indexed(t, 2 * FUEL, Replay(out.trace)) != out:
            failed.append("monotonicity")
    return failed


def template_round_trips(seed: int) -> bool:
    t, _ = random_program(seed)
    return alpha_equal(from_template(to_template(t)), t)
