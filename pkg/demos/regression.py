"""Bayesian linear regression through the origin, by importance sampling.

The program draws a slope from its prior, scores three noisy observations
and returns the slope.  We compare the sampler against the closed-form
conjugate posterior and against deterministic quadrature over the single
draw the program makes.

    python demos/regression.py [--samples N] [--seed S]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from sfpc.inference import histogram, normalize, run_importance, summarize
from sfpc.oracles import conjugate_normal_posterior, quadrature_expectation, static_sample_bound
from sfpc.surface import compile_sfpc

PROGRAM = Path(__file__).resolve().parents[1] / "programs" / "regression.sfpc"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    source = PROGRAM.read_text()
    print(source)
    term = compile_sfpc(source)
    print("draws per trace:", static_sample_bound(term))

    start = time.perf_counter()
    ws = run_importance(term, args.samples, seed=args.seed)
    s = summarize(ws)
    print(f"\n{args.samples} traces in {time.perf_counter() - start:.1f}s, ESS {s.ess:.0f}")
    print(f"importance sampling: mean {s.estimates['mean']:.5f}  sd {s.estimates['sd']:.5f}")

    mean, sd = conjugate_normal_posterior(0.0, 2.0, [(1, 1.1, 0.25), (2, 1.9, 0.25), (3, 2.7, 0.25)])
    print(f"conjugate posterior: mean {mean:.5f}  sd {sd:.5f}")

    z = quadrature_expectation(term, lambda a: 1.0, m=1 << 14)
    q = quadrature_expectation(term, m=1 << 14) / z
    print(f"quadrature (m=2^14): mean {q:.5f}  evidence {z:.5g}")
    print(f"sampler evidence estimate: {normalize(ws).z_hat:.5g}")

    # a coarse text histogram of the posterior around its mode
    xs = np.array([v.value for v in ws.values])
    bins = int(np.ceil((xs.max() - xs.min()) / 0.02))
    edges, masses = histogram(ws, bins)
    print("\nposterior mass by bin:")
    for a, b, m in zip(edges[:-1], edges[1:], masses):
        if m > 0.01:
            print(f"  [{a:6.3f}, {b:6.3f})  {'#' * int(m * 200)}")


if __name__ == "__main__":
    main()
