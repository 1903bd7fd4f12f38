"""Acceptance criteria; a PASS/FAIL line per criterion is printed in the session summary."""

import time

import numpy as np
import pytest

from chainreid import io
from chainreid.benchmark import DIRECT, order_recovery_rate, sweep
from chainreid.chain import ChainConfig, RetrievalResult, mine_chains
from chainreid.cli import main
from chainreid.core import DistanceMatrix
from chainreid.evaluation import mean_average_precision
from chainreid.fusion import fuse
from chainreid.rerank import RerankParams, k_reciprocal_rerank
from chainreid.synth import SynthConfig
from conftest import labels, random_instance
from oracles import chain_literal, fusion_literal, rerank_literal
from test_evaluation import single

criterion = pytest.mark.criterion

BENCH = SynthConfig(num_identities=20, frames_per_identity=10, dim=16,
                    center_sigma=10.0, step_sigma=1.0, noise_sigma=0.5)


@criterion("1. Algorithm-1 oracle equivalence")
def test_chain_oracle_equivalence():
    rng = np.random.default_rng(20211001)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        qg, gg = random_instance(rng, int(rng.integers(1, 5)), int(rng.integers(1, 9)))
        got = mine_chains(qg, gg, ChainConfig("local", 1, with_ref=False)).rankings.tolist()
        mismatches += got != chain_literal(qg.values.tolist(), gg.values.tolist())
    elapsed = time.perf_counter() - start
    assert mismatches == 0, f"{mismatches} of 1000 instances differ"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion("2. Algorithm-2 oracle equivalence")
def test_fusion_oracle_equivalence():
    rng = np.random.default_rng(20211002)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        k, m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 9))
        q, g = labels("q", m), labels("g", n)
        results = [RetrievalResult(q, g, np.array([rng.permutation(n) for _ in range(m)])) for _ in range(k)]
        mats = [DistanceMatrix(q, g, rng.uniform(0, 1, (m, n))) for _ in range(k)]
        expected = fusion_literal([r.rankings.tolist() for r in results], [x.values.tolist() for x in mats])
        mismatches += fuse(results, mats).rankings.tolist() != expected
    elapsed = time.perf_counter() - start
    assert mismatches == 0, f"{mismatches} of 1000 instances differ"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion("3. Degenerate-window identity")
def test_degenerate_window():
    rng = np.random.default_rng(20211003)
    for _ in range(200):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 9))
        qg, gg = random_instance(rng, m, n)
        window = n + int(rng.integers(0, 4))
        local = mine_chains(qg, gg, ChainConfig("local", window, with_ref=True, aggregation="min"))
        glob = mine_chains(qg, gg, ChainConfig("global", with_ref=True, aggregation="min"))
        assert np.array_equal(local.rankings, glob.rankings)


def _is_permutation_table(rankings, n):
    return all(sorted(row) == list(range(n)) for row in rankings.tolist())


@criterion("4. Permutation suite")
def test_permutation_suite():
    rng = np.random.default_rng(20211004)
    for _ in range(1000):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 9))
        qg, gg = random_instance(rng, m, n)
        configs = [ChainConfig("global", aggregation=a) for a in ("min", "mean")]
        configs += [ChainConfig("local", w, r, a) for w in range(1, n + 2) for r in (False, True) for a in ("min", "mean")]
        outputs = [mine_chains(qg, gg, cfg) for cfg in configs]
        for out in outputs:
            assert _is_permutation_table(out.rankings, n)
        picks = rng.choice(len(outputs), size=int(rng.integers(1, 5)))
        fused = fuse([outputs[p] for p in picks], [qg] * len(picks))
        assert _is_permutation_table(fused.rankings, n)


@criterion("5. Synthetic video-prior claim")
def test_synthetic_video_prior():
    start = time.perf_counter()
    scores = sweep(BENCH, range(50))
    elapsed = time.perf_counter() - start
    summary = ", ".join(f"{k}={v:.4f}" for k, v in scores.items())
    gain = scores["Local-1"] - scores[DIRECT]
    chain_scores = {k: v for k, v in scores.items() if k != DIRECT}
    best = max(chain_scores.values())
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    assert max(scores["Local-1"], scores["Local-2"]) == best, summary
    assert gain >= 0.02, f"Local-1 gain over direct {gain * 100:.2f} points < 2; {summary}"


@criterion("6. Order recovery")
def test_order_recovery():
    cfg = SynthConfig(num_identities=BENCH.num_identities, frames_per_identity=BENCH.frames_per_identity,
                      dim=BENCH.dim, center_sigma=10.0, step_sigma=0.5, noise_sigma=0.0)
    rate = order_recovery_rate(cfg, range(50), ChainConfig("local", 1))
    assert rate >= 0.90, f"exact order recovered for {rate:.1%} of identities"


@criterion("7. Re-rank endpoint and oracle")
def test_rerank_endpoint_and_oracle():
    rng = np.random.default_rng(20211007)
    worst = 0.0
    for _ in range(100):
        total = int(rng.integers(2, 13))
        m = int(rng.integers(1, total))
        n = total - m
        pts = rng.normal(size=(total, 4))
        full = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        q, g = labels("q", m), labels("g", n)
        qg = DistanceMatrix(q, g, full[:m, m:])
        qq = DistanceMatrix(q, q, full[:m, :m])
        gg = DistanceMatrix(g, g, full[m:, m:])

        same = k_reciprocal_rerank(qg, qq, gg, RerankParams(min(3, total - 1), 1, 1.0))
        assert same.values.tobytes() == qg.values.tobytes()

        k1 = int(rng.integers(1, min(5, total - 1) + 1))
        k2 = int(rng.integers(1, k1 + 1))
        lam = float(rng.uniform())
        got = k_reciprocal_rerank(qg, qq, gg, RerankParams(k1, k2, lam)).values
        expected = np.array(rerank_literal(qg.values.tolist(), qq.values.tolist(), gg.values.tolist(), k1, k2, lam))
        worst = max(worst, float(np.max(np.abs(got - expected))))
    assert worst <= 1e-9, f"max deviation {worst:.3e}"


@criterion("8. mAP hand values")
def test_map_hand_values():
    r, t = single([0, 1, 2], {0, 2})
    assert round(mean_average_precision(r, t).map_score, 4) == round(5 / 6, 4)
    r, t = single([0, 1, 2], {0})
    assert round(mean_average_precision(r, t).map_score, 4) == 1.0


def _pipeline(root):
    d = root
    steps = [
        ["synth", "--identities", 5, "--frames", 5, "--dim", 6, "--step-sigma", 2.0, "--seed", 77, "--out-dir", d],
        ["dist", "--queries", d / "queries.csv", "--gallery", d / "gallery.csv", "--out", d / "qg.mat"],
        ["dist", "--queries", d / "queries.csv", "--out", d / "qq.mat"],
        ["dist", "--queries", d / "gallery.csv", "--metric", "cosine", "--out", d / "gg_cos.mat"],
        ["dist", "--queries", d / "gallery.csv", "--out", d / "gg.mat"],
        ["rerank", "--qg", d / "qg.mat", "--qq", d / "qq.mat", "--gg", d / "gg.mat", "--k1", 5, "--k2", 2,
         "--out", d / "qg_rk.mat", "--gg-out", d / "gg_rk.mat"],
        ["mine", "--qg", d / "qg.mat", "--variant", "direct", "--out", d / "direct.txt"],
        ["mine", "--qg", d / "qg_rk.mat", "--gg", d / "gg_rk.mat", "--window", 2, "--out", d / "l2.txt"],
        ["mine", "--qg", d / "qg.mat", "--gg", d / "gg.mat", "--window", 3, "--with-ref",
         "--aggregation", "mean", "--out", d / "l3ref.txt"],
        ["mine", "--qg", d / "qg.mat", "--gg", d / "gg.mat", "--variant", "global", "--out", d / "global.txt"],
        ["fuse", "--rankings", d / "l2.txt", d / "l3ref.txt", d / "global.txt",
         "--matrices", d / "qg_rk.mat", d / "qg.mat", d / "qg.mat", "--normalize", "--out", d / "fused.txt"],
        ["eval", "--ranking", d / "fused.txt", "--truth", d / "truth.csv", "--out", d / "fused.kv"],
    ]
    for argv in steps:
        assert main([str(a) for a in argv]) == 0, argv
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


@criterion("9. Determinism")
def test_pipeline_determinism(tmp_path, capsys):
    first = _pipeline(tmp_path / "a")
    second = _pipeline(tmp_path / "b")
    capsys.readouterr()
    assert len(first) == 15
    assert first == second
    # loaded files feed the next stage unchanged
    mat = io.read_matrix(tmp_path / "a" / "qg.mat")
    io.write_matrix(tmp_path / "again.mat", mat)
    assert (tmp_path / "again.mat").read_bytes() == first["qg.mat"]
