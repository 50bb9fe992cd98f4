"""Acceptance gate. Each test prints one PASS/FAIL line; the lines are also
collected into the terminal summary."""

import hashlib
import random
import time

import numpy as np
import pytest

import conftest
from oracles import auc_judd_oracle, cc_oracle, dbscan_oracle, kl_oracle, message_oracle, nss_oracle, sim_oracle
from strategies import mutate, random_message

from gazesal.cgrpo import (
    GrpoConfig,
    ToyPolicy,
    evaluate_policy,
    group_advantages,
    grpo_objective,
    policy_kl,
    sample_group,
    synthetic_group_dataset,
    train,
    GroupBatch,
)
from gazesal.cli import main
from gazesal.clustering import cluster_count_by_eps, dbscan
from gazesal.data import synthesize_corpus
from gazesal.geometry import normalize_to_grid
from gazesal.metrics import auc_judd, cc, kl_div, nss, sim
from gazesal.protocol import ParseOutcome, PointMessage, parse, serialize
from gazesal.rewards import format_reward, spatial_reward


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    conftest.ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def _outcome(n_ref, n_actual, valid=True):
    pts = [(0, 0)] * n_actual
    return ParseOutcome(valid, n_ref if valid else None, pts)


# 1 ---------------------------------------------------------------------------


def test_criterion_1_reward_closed_forms():
    checks = {
        "format(10,10)=1.0": format_reward(_outcome(10, 10)) == 1.0,
        "format(10,5)=0.6": format_reward(_outcome(10, 5)) == 0.6,
        "invalid=0.0": format_reward(_outcome(10, 10, valid=False)) == 0.0,
        "spatial max pair=exp(-1)": abs(spatial_reward([[0, 0]], [[1000, 1000]]) - np.exp(-1)) <= 1e-12,
    }
    bad = [k for k, v in checks.items() if not v]
    _report(1, not bad, "all closed forms exact" if not bad else f"failed: {bad}")


# 2 ---------------------------------------------------------------------------


def test_criterion_2_metric_identities_and_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    errs = []
    g = rng.random((8, 8)) + 0.01
    g /= g.sum()
    ident = kl_div(g, g) <= 1e-6 and abs(cc(g, g) - 1) <= 1e-9 and abs(sim(g, g) - 1) <= 1e-9
    fix = rng.uniform(0, 1000, size=(5, 2))
    ident = ident and abs(auc_judd(np.full((8, 8), 3.0), fix) - 0.5) <= 1e-6
    for _ in range(50):
        gt, pred = rng.random((8, 8)), rng.random((8, 8))
        gt, pred = gt / gt.sum(), pred / pred.sum()
        fix = rng.uniform(0, 1000, size=(int(rng.integers(1, 10)), 2))
        gl, pl, fl = gt.tolist(), pred.tolist(), fix.tolist()
        errs += [
            abs(kl_div(gt, pred) - kl_oracle(gl, pl)),
            abs(cc(gt, pred) - cc_oracle(gl, pl)),
            abs(sim(gt, pred) - sim_oracle(gl, pl)),
            abs(nss(pred, fix) - nss_oracle(pl, fl)),
            abs(auc_judd(pred, fix) - auc_judd_oracle(pl, fl)),
        ]
    worst = max(errs)
    dt = time.perf_counter() - t0
    _report(2, ident and worst <= 1e-9 and dt < 10, f"identities {'ok' if ident else 'broken'}, max oracle error {worst:.2e}, {dt:.1f}s")


# 3 ---------------------------------------------------------------------------


def test_criterion_3_dbscan_oracle_and_eps_trend():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(500):
        n = int(rng.integers(0, 41))
        pts = rng.integers(0, 1001, size=(n, 2)).astype(float)
        if rng.random() < 0.5 and n:
            pts = np.clip(pts[:1] + rng.normal(0, 40, size=(n, 2)).round(), 0, 1000)
        eps = float(rng.choice([0.01, 0.03, 0.04, 0.05, 0.1, 0.2]))
        min_pts = int(rng.integers(1, 6))
        res = dbscan(pts, eps, min_pts)
        if (res.clusters, res.noise) != dbscan_oracle(pts.tolist(), eps, min_pts):
            mismatches += 1

    corpus = synthesize_corpus(n_videos=2, n_observers=24, seconds=3, seed=5)
    by_scene = {}
    for s in corpus.samples:
        v = corpus.videos[s.video_id]
        by_scene.setdefault((s.video_id, int(np.floor(s.t))), []).append(normalize_to_grid(s.x, s.y, v.width, v.height))
    counts = np.array([cluster_count_by_eps(np.array(p), [0.03, 0.04, 0.05], 1) for p in by_scene.values()])
    monotone = bool(np.all(np.diff(counts, axis=1) <= 0))
    maxn = counts.max(axis=0).tolist()
    dt = time.perf_counter() - t0
    _report(3, mismatches == 0 and monotone and maxn[0] >= maxn[1] >= maxn[2] and dt < 30,
            f"{mismatches}/500 oracle mismatches, maxN_Pts over eps 0.03/0.04/0.05 = {maxn}, {dt:.1f}s")


# 4 ---------------------------------------------------------------------------


def test_criterion_4_parser_round_trip_and_fuzz():
    t0 = time.perf_counter()
    rng = random.Random(4)
    bad_rt = bad_mut = 0
    for _ in range(10_000):
        msg = random_message(rng)
        out = parse(serialize(msg))
        if not out.valid_format or out.to_message() != msg:
            bad_rt += 1
    for _ in range(10_000):
        text = mutate(serialize(random_message(rng)), rng)
        try:
            out = parse(text)
        except Exception:
            bad_mut += 1
            continue
        valid, n_ref, points = message_oracle(text)
        consistent = out.valid_format == (
            out.n_ref is not None and all(0 <= x <= 1000 and 0 <= y <= 1000 for x, y in out.points) and out.valid_format
        )
        if out.valid_format != valid or out.n_ref != n_ref or not consistent or (points is not None and out.points != points):
            bad_mut += 1
    dt = time.perf_counter() - t0
    _report(4, bad_rt == 0 and bad_mut == 0 and dt < 30, f"{bad_rt} round-trip failures, {bad_mut} mutation disagreements, {dt:.1f}s")


# 5 ---------------------------------------------------------------------------


def test_criterion_5_toy_training():
    t0 = time.perf_counter()
    ds = synthetic_group_dataset()
    cfg = GrpoConfig(stochastic_delimiters=True)
    assert cfg.iterations <= 5000
    init = ToyPolicy.initial([e.context for e in ds], cfg)
    before = evaluate_policy(init, ds)
    policy, _ = train(ds, cfg)
    after = evaluate_policy(policy, ds)
    mx = after.mean_x
    diverge = mx["male|s0"] < mx["female|s0"] and mx["male_under30|s0"] < mx["female_over30|s0"]
    drop = 1 - after.mean_nn_dist / before.mean_nn_dist
    dt = time.perf_counter() - t0
    ok = (
        abs(before.valid_rate - 0.5) <= 0.1 and after.valid_rate >= 0.95
        and after.mean_reward - before.mean_reward >= 0.5 and drop >= 0.5 and diverge and dt < 300
    )
    _report(5, ok, f"validity {before.valid_rate:.3f}->{after.valid_rate:.3f}, reward {before.mean_reward:.3f}->"
                   f"{after.mean_reward:.3f}, NN distance -{100 * drop:.0f}%, mean x male {mx['male|s0']:.0f} vs "
                   f"female {mx['female|s0']:.0f}, {cfg.iterations} iterations, {dt:.0f}s")


# 6 ---------------------------------------------------------------------------


def _fd_worst(policy, ref, batch, cfg, h=1e-6):
    _, grads, _ = grpo_objective(policy, ref, batch, cfg)
    worst = 0.0
    for k, table in enumerate(policy.tables):
        for idx in np.ndindex(table.shape):
            up, dn = policy.copy(), policy.copy()
            up.tables[k][idx] += h
            dn.tables[k][idx] -= h
            fd = (grpo_objective(up, ref, batch, cfg, False)[0] - grpo_objective(dn, ref, batch, cfg, False)[0]) / (2 * h)
            worst = max(worst, abs(fd - grads[k][idx]) / max(1.0, abs(fd)))
    return worst


def test_criterion_6_grpo_numerics():
    # 2-token policy: one count token plus one x-bin/end-of-list token
    cfg = GrpoConfig(beta=0.5, k_max=1, bins=1)
    pol = ToyPolicy.initial(["a"], cfg, noise=0.7, seed=1)
    ref = ToyPolicy.initial(["a"], cfg, noise=0.7, seed=2)
    old = ToyPolicy.initial(["a"], cfg, noise=0.7, seed=3)
    ss = sample_group(old, "a", 6, 0)
    adv = group_advantages(np.arange(6.0))
    batch = GroupBatch(0, [s.tokens for s in ss], [s.logp for s in ss], adv)
    fd = _fd_worst(pol, ref, batch, cfg)

    rng = np.random.default_rng(6)
    adv_sum = max(abs(group_advantages(rng.normal(size=int(rng.integers(2, 17))) * 10).sum()) for _ in range(1000))

    ds = synthetic_group_dataset()
    init = ToyPolicy.initial([e.context for e in ds], GrpoConfig(stochastic_delimiters=True))
    kl = {}
    for beta in (0.0, 10.0):
        c = GrpoConfig(iterations=1500, stochastic_delimiters=True, beta=beta, lr=1.0, seed=11)
        p, _ = train(ds, c)
        kl[beta] = policy_kl(p, init)
    ok = fd < 1e-5 and adv_sum <= 1e-9 and kl[10.0] < kl[0.0]
    _report(6, ok, f"FD relative error {fd:.1e}, max |sum A| {adv_sum:.1e}, KL to reference beta=10 {kl[10.0]:.4f} < beta=0 {kl[0.0]:.4f}")


# 7 ---------------------------------------------------------------------------


def _tree(root):
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_7_pipeline_determinism(tmp_path):
    assert main(["synth", str(tmp_path), "--videos", "2", "--observers", "16", "--seconds", "3", "--seed", "7"]) == 0
    cfg = str(tmp_path / "config.toml")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    pngs = sum(k.endswith(".png") for k in a)
    diff = sorted(set(a.items()) ^ set(b.items()))
    _report(7, a == b and pngs > 0, f"{len(a)} files ({pngs} PNGs), {len(diff)} differing entries")
