"""Untyped Church programs, run directly and through the typed translation.

Every Church value becomes either a tagged real or a tagged function in a
single recursive type.  Running the translation must match running the
Church program directly: same draws, same weight, same returned real.

    python demos/church.py
"""

from sfpc.church import LAMBDA_REAL, church_payload, church_term, translate_church
from sfpc.evaluator import Converged, Fresh, church_eval_direct, derive_seed, eval
from sfpc.inference import run_importance, summarize
from sfpc.printer import print_program, print_type
from sfpc.typecheck import infer_type

ALIASES = {"LamReal": LAMBDA_REAL}

GEOMETRIC = ("let geom = \\self. \\p. ifz bernoulli_rng(p) then 1 + self self p else 0 in "
             "let n = geom geom 0.5 in let w = factor(exp(0 - n)) in n")


def show(src: str) -> None:
    t = church_term(src)
    sfpc = translate_church(t)
    print(f"church:  {src}")
    print(f"type:    {print_type(infer_type({}, sfpc), ALIASES)}")
    for i in range(3):
        seed = derive_seed(0, i)
        d = church_eval_direct(t, 1000, Fresh(seed))
        e = eval(sfpc, 1000, Fresh(seed))
        if isinstance(d, Converged):
            print(f"  trace {i}: direct {church_payload(d.value)} w={d.weight:.4g}   "
                  f"translated {church_payload(e.value)} w={e.weight:.4g}")
        else:
            print(f"  trace {i}: direct {d.reason}   translated {e.reason}")
    print()


def main() -> None:
    print(print_program(translate_church(church_term("\\x. x")), ALIASES))
    print()
    for src in ["(\\x. x) 1", "factor(3)", "1 2", "normal_rng(0, 1) + normal_rng(5, 2)", GEOMETRIC]:
        show(src)

    # The geometric count is softly conditioned by exp(-n): P(n) is
    # proportional to 2^-(n+1) e^-n, so E[n] = q / (1 - q) with q = 1/(2e).
    ws = run_importance(church_term(GEOMETRIC), 20_000, seed=1, runner=church_eval_direct)
    q = 0.5 / 2.718281828459045
    print(f"posterior mean of n: {summarize(ws).estimates['mean']:.4f} (exact {q / (1 - q):.4f})")


if __name__ == "__main__":
    main()
