"""A Gaussian random walk as an infinite stream.

The walk is a recursive type of thunks, `mu s. Unit -> Real * s`, built
with term-level recursion.  Forcing the stream draws one step at a time, so
reading position k consumes exactly k draws.  We read the third position and
check its spread, then condition on an observation of it.

    python demos/random_walk.py
"""

from pathlib import Path

from sfpc.inference import run_importance, summarize
from sfpc.printer import print_type
from sfpc.surface import compile_sfpc
from sfpc.typecheck import infer_type

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    source = (ROOT / "programs" / "walk.sfpc").read_text()
    print(source)
    walk = compile_sfpc(source)
    print("type:", print_type(infer_type({}, walk)))

    # x2 = x0 + two N(0, 1) steps with x0 = 0, so sd should be sqrt(2)
    s = summarize(run_importance(walk, 20_000, seed=3))
    print(f"x2: mean {s.estimates['mean']:.3f}  sd {s.estimates['sd']:.3f}  (exact 0, {2 ** 0.5:.3f})")

    # observe x2 = 1.5 with noise sd 0.5: the posterior of x2 is normal with
    # precision 1/2 + 4, mean (4 * 1.5) / 4.5
    body = source.rsplit("x2 } } }", 1)[0]
    conditioned = compile_sfpc(body + "score(normal_pdf(1.5, x2, 0.5)); x2 } } }")
    s = summarize(run_importance(conditioned, 50_000, seed=4))
    print(f"x2 | obs: mean {s.estimates['mean']:.3f}  sd {s.estimates['sd']:.3f}  "
          f"(exact {6 / 4.5:.3f}, {4.5 ** -0.5:.3f})")


if __name__ == "__main__":
    main()
