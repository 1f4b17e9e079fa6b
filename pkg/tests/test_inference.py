import math

import numpy as np
import pytest

from sfpc.church import church_term
from sfpc.evaluator import church_eval_direct
from sfpc.inference import (
    ZERO_WEIGHT_DROPPED, Bottom, Posterior, Top, WeightedSample, WeightedSampleSet, dump_traces,
    effective_sample_size, emit, histogram, normalize, read_csv, resolve_workers, run_importance,
    summarize,
)
from sfpc.oracles import conjugate_normal_posterior
from sfpc.syntax import RealLit

from conftest import core

ORACLE = conjugate_normal_posterior(0.0, 2.0, [(1, 1.1, 0.25), (2, 1.9, 0.25), (3, 2.7, 0.25)])


def test_constant_program():
    ws = run_importance(core("1"), 50, seed=3)
    assert [(s.weight, s.value) for s in ws.samples] == [(1.0, RealLit(1.0))] * 50


def test_hard_zero_constraint():
    ws = run_importance(core("score(0); 1"), 40)
    assert len(ws.samples) == 40 and all(s.weight == 0.0 for s in ws.samples)
    assert normalize(ws) == Bottom()


def test_zero_weight_cap_keeps_counts():
    ws = run_importance(core("score(0); 1"), 40, zero_weight_cap=10)
    assert len(ws.samples) == 10
    assert ws.zero_counts == {ZERO_WEIGHT_DROPPED: 30}
    ws.check()


def test_divergent_traces_are_counted():
    ws = run_importance(core("ifz leq01(sample, 0.5) then bot[Real] else 1"), 200, fuel_cap=50)
    assert len(ws.samples) + ws.zero_counts["fuel-exhausted"] == 200
    assert 60 < len(ws.samples) < 140


def _set(weights):
    samples = [WeightedSample(i, w, RealLit(float(i))) for i, w in enumerate(weights)]
    return WeightedSampleSet(samples, {}, len(weights), 0, 10)


def test_normalize_equal_weights():
    post = normalize(_set([2.0, 2.0]))
    assert isinstance(post, Posterior)
    assert post.z_hat == 2.0 and post.weights == (0.5, 0.5)


def test_overflow_is_top():
    assert normalize(run_importance(core("score(1e200); score(1e200); 1"), 5)) == Top()


def test_effective_sample_size():
    assert effective_sample_size([3.0] * 7) == pytest.approx(7.0)
    assert effective_sample_size([1.0, 0.0, 0.0]) == 1.0
    assert effective_sample_size([0.0]) == 0.0


def test_uniform_mean():
    s = summarize(run_importance(core("sample"), 100_000, seed=11))
    assert s.estimates["mean"] == pytest.approx(0.5, abs=0.005)
    assert s.ess == pytest.approx(100_000)


def test_test_functions():
    ws = run_importance(core("sample"), 20_000, seed=5)
    s = summarize(ws, {"square": lambda x: x * x, "indicator": lambda x: float(x < 0.25)})
    assert s.estimates["square"] == pytest.approx(1 / 3, abs=0.01)
    assert s.estimates["indicator"] == pytest.approx(0.25, abs=0.01)


def test_moments_need_reals():
    with pytest.raises(TypeError):
        summarize(run_importance(core("(1, 2)"), 3))


def test_regression_posterior(regression_run):
    s = summarize(regression_run)
    assert s.estimates["mean"] == pytest.approx(ORACLE[0], abs=0.02)
    assert s.estimates["sd"] == pytest.approx(ORACLE[1], abs=0.003)


def test_histogram_peak_contains_posterior_mode(regression_run):
    xs = np.array([v.value for v, w in zip(regression_run.values, regression_run.weights) if w > 0])
    bins = math.ceil((xs.max() - xs.min()) / 0.05)
    edges, masses = histogram(regression_run, bins)
    i = int(np.argmax(masses))
    assert edges[i] <= 0.9275 < edges[i + 1]


def test_histogram_masses_sum_to_one(regression_run):
    _, masses = histogram(regression_run)
    assert math.fsum(masses) == pytest.approx(1.0, abs=1e-12)
    assert len(masses) <= 1000


def test_scaling_weights_leaves_estimates_unchanged():
    src = "let x = sample in score(x + 1); x"
    a = normalize(run_importance(core(src), 500, seed=9))
    b = normalize(run_importance(core(f"score(2); {src}"), 500, seed=9))
    c = normalize(run_importance(core(f"score(3); {src}"), 500, seed=9))
    assert a.weights == b.weights and b.z_hat == 2 * a.z_hat
    assert np.allclose(a.weights, c.weights, rtol=1e-14, atol=0)


def test_determinism_and_schedule_independence():
    t = core("let x = normal_rng(0, 1) in score(exp(x)); x")
    seq = run_importance(t, 600, seed=4, workers=1)
    assert run_importance(t, 600, seed=4, workers=1) == seq
    assert run_importance(t, 600, seed=4, workers=3) == seq


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("SFPC_THREADS", "3")
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("SFPC_THREADS", "x")
    with pytest.raises(ValueError):
        resolve_workers()


def test_church_direct_runner():
    ws = run_importance(church_term("factor(2) + uniform_rng(0, 1)"), 100, runner=church_eval_direct)
    assert all(s.weight == 2.0 for s in ws.samples)


def test_csv_round_trip(tmp_path):
    ws = run_importance(core("let x = sample in score(x); x"), 200, seed=1)
    path = tmp_path / "out.csv"
    emit(ws, path)
    assert path.read_text().splitlines()[0] == "weight,value"
    rows = read_csv(path)
    assert [w for w, _ in rows] == [s.weight for s in ws.samples]
    assert [float(v) for _, v in rows] == [s.value.value for s in ws.samples]


def test_csv_of_structured_values(tmp_path):
    path = tmp_path / "pairs.csv"
    emit(run_importance(core("(1, ())"), 2), path)
    assert path.read_text().splitlines() == ["weight,value_text"] + ['1.0,"(1.0, ())"'] * 2


def test_histogram_file(tmp_path, regression_run):
    path = tmp_path / "hist.csv"
    emit(regression_run, path, "hist", bins=20)
    lines = path.read_text().splitlines()
    assert lines[0] == "bin_left,bin_right,normalized_mass" and len(lines) == 21
    assert math.fsum(float(l.split(",")[2]) for l in lines[1:]) == pytest.approx(1.0)


def test_emit_reports_path_on_error(tmp_path):
    with pytest.raises(OSError, match="nowhere"):
        emit(_set([1.0]), tmp_path / "nowhere" / "x.csv")


def test_trace_dump(tmp_path):
    path = tmp_path / "traces.csv"
    dump_traces(core("ifz leq01(sample, 0.5) then bot[Real] else sample"), 20, path, seed=2,
                fuel_cap=30)
    rows = [line.split(",") for line in path.read_text().splitlines()]
    assert [int(r[0]) for r in rows] == list(range(20))
    for r in rows:
        if r[2] == "<fuel-exhausted>":
            assert float(r[1]) == 0.0 and float(r[3]) > 0.5
        else:
            assert len(r) == 5 and float(r[2]) == float(r[4])
