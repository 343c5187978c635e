"""Acceptance criteria, one test per criterion.

Every test records a single PASS/FAIL line (printed in the terminal summary)
before asserting. Tolerances are fixed constants below.

LER reproduction uses the same configuration for every decoder: normalized
min-sum with alpha 0.875, at most 100 iterations, LLR clip 50, 100-failure
stopping, seed 0. BP uses the flooding schedule, BP-Serial and MBBP-LD use
the check-serial schedule, and MBBP-LD decodes with the bases of a single
subtree partition.
"""

import json
import math
import time
from functools import lru_cache

import numpy as np

from acceptance_log import record
from mbbpld.bp import BpConfig, BpDecoder
from mbbpld.cli import main
from mbbpld.codes import load_preset
from mbbpld.gf2 import SparseBinaryMatrix, mat_vec_mod2
from mbbpld.mbbp import fws_select
from mbbpld.sim import SimulationConfig, compare_tree_vs_random, run_point
from mbbpld.subtree import build_augmented_bases, build_partition, build_partitions, verify_lemma_bound
from mbbpld.tanner import TannerGraph, is_check_regular
from oracles import SMALL_ROWS, small_dense, ml_table, random_forest_matrix, random_lists, reference_fws

# two-sided 95% interval for an LER estimated from 100 failures: +-1.96/sqrt(100) relative
FAILURES = 100
LER_REL_TOL = 1.96 / math.sqrt(FAILURES)
SEED = 0

REF_BB144 = {  # [[144,12,12]]
    "bp_flooding": {0.08: 0.4197, 0.09: 0.6055, 0.10: 0.7821},
    "bp_serial": {0.08: 0.3607, 0.09: 0.5688, 0.10: 0.7051},
    "mbbp_ld": {0.08: 0.2768, 0.09: 0.4587, 0.10: 0.6410},
}
REF_BB288 = {  # [[288,12,18]]
    "mbbp_ld": {0.08: 0.2681, 0.10: 0.6250},
    "bp_flooding": {0.08: 0.4772, 0.10: 0.7875},
}
ORDER_P = (0.06, 0.07, 0.08, 0.09, 0.10)


@lru_cache(maxsize=None)
def measure(preset: str, decoder: str, p: float):
    cfg = SimulationConfig(
        load_preset(preset), (p,), decoder=decoder, target_failures=FAILURES, seed=SEED,
        partitions=1, bp=BpConfig(schedule="serial"),
    )
    return run_point(cfg, p)


def test_criterion_1_worked_example():
    t0 = time.perf_counter()
    H = SparseBinaryMatrix.from_rows(SMALL_ROWS, 6)
    part = build_partition(TannerGraph.from_matrix(H), [0, 3, 1, 2])  # (c1, c4, c2, c3)
    b1, b2 = build_augmented_bases(H, part)
    elapsed = time.perf_counter() - t0
    dense = small_dense()
    want1 = np.vstack([dense, [[1, 1, 1, 0, 0, 0], [1, 0, 0, 1, 1, 0]]])
    want2 = np.vstack([dense, [[0, 0, 0, 1, 1, 1], [0, 1, 1, 0, 0, 1]]])
    ok = (
        part.subtrees() == [[0, 2], [3, 1]]
        and {(c, eta) for s, c, eta in part.rejections if s == 1} == {(1, 2), (3, 2)}
        and np.array_equal(b1.matrix.to_dense(), want1)
        and np.array_equal(b2.matrix.to_dense(), want2)
        and elapsed < 1.0
    )
    record(1, ok, "worked example", f"t1={part.subtrees()[0]} t2={part.subtrees()[1]} (0-based) in {elapsed:.3f}s")
    assert ok


def test_criterion_2_lemma_bound():
    t0 = time.perf_counter()
    details, ok = [], True
    for preset in ("bb144", "bb288"):
        H = load_preset(preset).hz
        g = TannerGraph.from_matrix(H)
        w = is_check_regular(g)
        bound = (g.num_vars - 1) // (w - 1)
        worst = 0
        for part in build_partitions(g, 100, SEED):
            rep = verify_lemma_bound(g, part)
            worst = max(worst, rep.max_size)
            ok &= rep.applicable and rep.w == 6 and rep.passed
            ok &= rep.max_size <= bound and rep.max_size <= 0.4 * g.num_checks
        details.append(f"{preset}: max {worst} <= {bound}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    record(2, ok, "subtree size bound", "; ".join(details) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_3_tree_exactness():
    syndromes = converged = unique = mismatches = 0
    examples = []
    for k in range(50):
        dense = random_forest_matrix(np.random.default_rng(k), max_vars=12)
        H = SparseBinaryMatrix.from_dense(dense)
        decoders = [BpDecoder(H, BpConfig(schedule=s)) for s in ("flooding", "serial")]
        for sb, best in ml_table(dense).items():
            s = np.frombuffer(sb, dtype=np.uint8)
            syndromes += 1
            unique += len(best) == 1
            for dec in decoders:
                out = dec.decode(s)
                if not out.converged:
                    continue
                converged += 1
                if not any(np.array_equal(out.estimate, b) for b in best):
                    mismatches += 1
                    examples.append((k, dec.cfg.schedule, int(out.estimate.sum()), int(best[0].sum())))
    ok = mismatches == 0
    record(3, ok, "tree exactness", f"{syndromes} syndromes ({unique} with a unique minimum), "
           f"{converged} converged decodes, {mismatches} not maximum-likelihood {examples[:3]}")
    assert ok


def _reproduce(number, preset, table):
    ok, parts = True, []
    for decoder, points in table.items():
        for p, ref in points.items():
            rec = measure(preset, decoder, p)
            rel = (rec.ler - ref) / ref
            good = abs(rel) <= LER_REL_TOL
            ok &= good
            parts.append(f"{decoder}@{p}: {rec.ler:.4f} vs {ref} ({rel:+.1%}){'' if good else ' OUT'}")
    record(number, ok, f"{preset} LER within +-{LER_REL_TOL:.1%}", "; ".join(parts))
    return ok


def test_criterion_4_bb144_reproduction():
    assert _reproduce(4, "bb144", REF_BB144)


def test_criterion_5_bb288_reproduction():
    assert _reproduce(5, "bb288", REF_BB288)


def test_criterion_6_ordering():
    ok, notes = True, []
    for preset in ("bb144", "bb288"):
        for p in ORDER_P:
            mb, ser, bp = (measure(preset, d, p) for d in ("mbbp_ld", "bp_serial", "bp_flooding"))
            for lo_rec, hi_rec, name in ((mb, ser, "MBBP>Serial"), (ser, bp, "Serial>BP")):
                if lo_rec.ler > hi_rec.ler:
                    # a reversal only counts when the intervals are disjoint
                    strict = lo_rec.wilson_ci_95[0] > hi_rec.wilson_ci_95[1]
                    ok &= not strict
                    notes.append(f"{preset}@{p} {name}{' STRICT' if strict else ' (overlapping)'}")
    detail = f"{2 * len(ORDER_P)} points; " + ("; ".join(notes) if notes else "no reversals")
    record(6, ok, "MBBP-LD <= BP-Serial <= BP", detail)
    assert ok


def test_criterion_7_tree_vs_random():
    per_partition = 50  # 20 partitions x 50 = 1000 pooled failures per mode
    cfg = SimulationConfig(load_preset("bb288"), (0.07, 0.08), target_failures=per_partition,
                           seed=SEED, bp=BpConfig(schedule="serial"))
    t0 = time.perf_counter()
    rows = compare_tree_vs_random(cfg, num_partitions=20)
    elapsed = time.perf_counter() - t0
    ok, parts = elapsed <= 3600, []
    for row in rows:
        d = row.row()
        ok &= d["tree_mean_ler"] < d["random_mean_ler"]
        ok &= d["tree_failures"] >= 300 and d["random_failures"] >= 300
        parts.append(f"p={d['p']}: tree {d['tree_mean_ler']:.4f} vs random {d['random_mean_ler']:.4f} "
                     f"({d['tree_failures']}/{d['random_failures']} failures)")
    record(7, ok, "subtree beats matched random", "; ".join(parts) + f"; {elapsed:.0f}s")
    assert ok


def test_criterion_8_substitute_properties():
    fws_ok = all(np.array_equal(fws_select(lst), reference_fws(lst)) for lst in random_lists(8, 1000))
    code = load_preset("bb144")
    H = code.hz
    rng = np.random.default_rng(SEED)
    decoders = {}
    unsound = converged = 0
    trials = 100_000
    ps = (0.02, 0.04, 0.06, 0.08, 0.10, 0.12)
    for t in range(trials):
        p = ps[t % len(ps)]
        schedule = "flooding" if t % 2 else "serial"
        dec = decoders.get((p, schedule))
        if dec is None:
            dec = decoders[(p, schedule)] = BpDecoder(H, BpConfig(channel_p=p, schedule=schedule))
        s = mat_vec_mod2(H, (rng.random(code.n) < p).astype(np.uint8))
        out = dec.decode(s)
        if out.converged:
            converged += 1
            unsound += not np.array_equal(mat_vec_mod2(H, out.estimate), s)
    ok = fws_ok and unsound == 0
    record(8, ok, "substituted properties",
           f"low-LER and B1 points declared out of desk scale; FWS vs reference on 1000 lists: "
           f"{'agree' if fws_ok else 'DIFFER'}; {trials} trials, {converged} converged, {unsound} unsound")
    assert ok


def test_criterion_9_determinism(tmp_path):
    outputs = {}
    for decoder in ("mbbp_ld", "bp_flooding"):
        for workers in (1, 2, 4):
            out = tmp_path / f"{decoder}_{workers}.csv"
            rc = main(["simulate", "--preset", "bb144", "--decoder", decoder, "--p", "0.09,0.1",
                       "--failures", "20", "--partitions", "2", "--seed", "9",
                       "--workers", str(workers), "--out", str(out)])
            assert rc == 0
            outputs.setdefault(decoder, set()).add(out.read_bytes())
            json.loads((tmp_path / f"{decoder}_{workers}.csv.manifest.json").read_text())
    ok = all(len(v) == 1 for v in outputs.values())
    record(9, ok, "byte-identical CSV across workers 1/2/4",
           ", ".join(f"{d}: {len(v)} distinct" for d, v in outputs.items()))
    assert ok
