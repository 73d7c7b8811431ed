"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""
import time
import warnings

import numpy as np
import pytest

from partweights.alignment import ErrorScoreMatrix, align
from partweights.body import BodyModel
from partweights.config import RunConfig
from partweights.geometry import affinity_from_triplet, homology_score, pair_errors, transition_bank
from partweights.learning import QuadraticObjective, TrainingSet, build_objective, is_feasible, optimize_weights
from partweights.pipeline import recognize_dataset, train_dataset, write_dataset
from partweights.sequence import JointSequence
from partweights.synth import project_points, random_rig
from partweights.weighting import coefficients_from_errors, triplet_weights

from conftest import affine_project, random_affine_camera, record
from oracles import brute_force_alignment_cost, similarity_literal


def _esm(values):
    return ErrorScoreMatrix(values, np.zeros(values.shape, dtype=bool), tuple((i, i) for i in range(values.shape[1])))


def test_criterion_1_homology_invariant():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)

    # affine cameras: every matched per-triplet score below 1e-6
    worst = 0.0
    for _ in range(500):
        P1 = rng.normal(size=(3, 3))
        P2 = P1 + rng.normal(scale=0.3, size=(3, 3))
        (Pa, ta), (Pb, tb) = random_affine_camera(rng), random_affine_camera(rng)
        h1 = affinity_from_triplet(affine_project(Pa, ta, P1), affine_project(Pb, tb, P1))
        h2 = affinity_from_triplet(affine_project(Pa, ta, P2), affine_project(Pb, tb, P2))
        worst = max(worst, homology_score(h1, h2).score)
    affine_ok = worst <= 1e-6

    # perspective cameras at distance >= 4x the subject extent
    model = BodyModel()
    extent = 1.8
    wins = 0
    trials = 500
    for _ in range(trials):
        X1 = rng.uniform(-extent / 2, extent / 2, size=(11, 3)) + np.array([0, 0, 1.0])
        X2 = X1 + rng.normal(scale=0.1, size=X1.shape)
        Y2 = X1 + rng.normal(scale=0.1, size=X1.shape)
        cams = random_rig(2, seed=int(rng.integers(1 << 30)), radius_range=(4 * extent, 6 * extent))
        va = JointSequence.from_points(np.stack([project_points(X, cams[0])[0] for X in (X1, X2)]))
        vb = JointSequence.from_points(np.stack([project_points(X, cams[1])[0] for X in (X1, X2)]))
        vc = JointSequence.from_points(np.stack([project_points(X, cams[1])[0] for X in (X1, Y2)]))
        ba = transition_bank(va, model)
        matched = np.nansum(pair_errors(ba, transition_bank(vb, model), [0], [0])[0])
        mismatched = np.nansum(pair_errors(ba, transition_bank(vc, model), [0], [0])[0])
        wins += mismatched > matched
    elapsed = time.perf_counter() - start
    ok = affine_ok and wins >= 0.95 * trials and elapsed < 30
    record(1, ok, f"affine worst E={worst:.2e} (<=1e-6); perspective matched<mismatched {wins}/{trials} "
                  f"(>=95%); {elapsed:.1f}s (<30s)")
    assert ok


def test_criterion_2_dp_oracle():
    rng = np.random.default_rng(7)
    cases = [rng.uniform(0, 10, size=tuple(rng.integers(1, 7, size=2))) for _ in range(1000)]
    start = time.perf_counter()
    results = [align(c).total_cost for c in cases]
    elapsed = time.perf_counter() - start
    mismatches = sum(r != brute_force_alignment_cost(c) for r, c in zip(results, cases))
    ok = mismatches == 0 and elapsed < 10
    record(2, ok, f"{mismatches} mismatches of 1000 against brute force (exact); align time {elapsed:.2f}s (<10s)")
    assert ok


def test_criterion_3_weight_algebra():
    rng = np.random.default_rng(3)
    model = BodyModel()
    worst_sum = max(abs(triplet_weights(rng.dirichlet(np.ones(11)), model).lam.sum() - 1.0) for _ in range(1000))
    worst_affine = 0.0
    for _ in range(100):
        E = rng.uniform(0, 1, size=(165, int(rng.integers(1, 12))))
        w = rng.dirichlet(np.ones(11))
        tau = float(rng.uniform(0.01, 1.0))
        coeffs = coefficients_from_errors(_esm(E), tau, 11)
        worst_affine = max(worst_affine, abs(similarity_literal(E, w, tau) - (coeffs.a0 - coeffs.a @ w[:-1])))
    ok = worst_sum <= 1e-12 and worst_affine <= 1e-9
    record(3, ok, f"max |sum(lambda)-1|={worst_sum:.1e} (<=1e-12); max affine gap={worst_affine:.1e} (<=1e-9)")
    assert ok


def test_criterion_4_objective():
    rng = np.random.default_rng(4)
    worst_f = 0.0
    worst_g = 0.0
    labels = ["a", "b"]
    for inst in range(20):
        errors = {(r, g): [_esm(rng.uniform(0, 0.1 if r == g else 0.4, size=(4, int(rng.integers(2, 6)))))
                           for _ in range(2)] for r in labels for g in labels}
        training = TrainingSet(labels, {}, {}, errors, 4)
        alpha, beta, tau = float(rng.uniform(-1, 1)), float(rng.uniform(0, 2)), float(rng.uniform(0.05, 0.5))
        obj = build_objective(training, "a", alpha, beta, tau)
        w = rng.dirichlet(np.ones(4))
        same = [similarity_literal(e.values, w, tau) for e in errors[("a", "a")]]
        cross = [similarity_literal(e.values, w, tau) for e in errors[("a", "b")]]
        q1 = sum(same) / 2
        q2 = sum((s - q1) ** 2 for s in same) / 2
        q3 = sum(cross) / 2
        worst_f = max(worst_f, abs(obj.value(w[:-1]) - (q1 + alpha * q2 - beta * q3)))
        h = 1e-6
        g = obj.gradient(w[:-1])
        fd = np.array([(obj.value(w[:-1] + h * e) - obj.value(w[:-1] - h * e)) / (2 * h) for e in np.eye(3)])
        worst_g = max(worst_g, np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12))
    ok = worst_f <= 1e-9 and worst_g <= 1e-5
    record(4, ok, f"max |f - composed|={worst_f:.1e} (<=1e-9); max gradient rel. error={worst_g:.1e} (<=1e-5) "
                  f"at 20 feasible points")
    assert ok


def test_criterion_5_optimizer():
    rng = np.random.default_rng(5)
    worst = 0.0
    monotone = feasible = True
    for _ in range(30):
        m = int(rng.integers(2, 11))
        w_star = rng.dirichlet(np.ones(m + 1))[:-1] * 0.9 + 0.1 / (m + 1)
        B = rng.normal(size=(m, m))
        Q = -(B @ B.T) - 0.1 * np.eye(m)
        res = optimize_weights(QuadraticObjective(Q, -2.0 * Q @ w_star, 0.0))
        worst = max(worst, float(np.abs(res.omega.free - w_star).max()))
        monotone &= bool(np.all(np.diff(res.history) > 0))
        feasible &= is_feasible(res.omega.free) and res.omega.omega.min() >= 0
    # indefinite and convex objectives exercise the boundary path
    for _ in range(30):
        m = int(rng.integers(2, 11))
        B = rng.normal(size=(m, m))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = optimize_weights(QuadraticObjective(B + B.T, rng.normal(size=m), 0.0))
        monotone &= bool(np.all(np.diff(res.history) > 0))
        feasible &= is_feasible(res.omega.free)
    ok = worst <= 1e-6 and monotone and feasible
    record(5, ok, f"max |w - w*|={worst:.1e} (<=1e-6); monotone ascent={monotone}; all feasible={feasible}")
    assert ok


_RUNS = {}


def _run(seed, tmp_root, tag="a"):
    key = (seed, tag)
    if key not in _RUNS:
        cfg = RunConfig(seed=seed)
        root = tmp_root / f"seed{seed}_{tag}"
        write_dataset(cfg, root / "data")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            train_dataset(cfg, root / "data", root / "weights")
        weighted, uniform = recognize_dataset(cfg, root / "data", root / "weights", root / "results")
        _RUNS[key] = (root, weighted.accuracy, uniform.accuracy)
    return _RUNS[key]


@pytest.fixture(scope="module")
def run_root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_criterion_6_end_to_end(run_root):
    start = time.perf_counter()
    lines = []
    ok = True
    for seed in (0, 1, 2):
        _, acc_w, acc_u = _run(seed, run_root)
        lines.append(f"seed {seed}: weighted {acc_w:.3f} uniform {acc_u:.3f}")
        ok &= acc_w >= acc_u and acc_w >= 0.8
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    record(6, ok, "; ".join(lines) + f"; {elapsed:.0f}s (<600s)")
    assert ok


def test_criterion_7_determinism(run_root):
    first, _, _ = _run(0, run_root)
    second, _, _ = _run(0, run_root, tag="b")
    csvs = sorted(p.relative_to(first) for p in first.rglob("*.csv"))
    differing = [str(p) for p in csvs if (first / p).read_bytes() != (second / p).read_bytes()]
    ok = len(csvs) >= 5 and not differing
    record(7, ok, f"{len(csvs)} CSV outputs compared, {len(differing)} differ")
    assert ok
