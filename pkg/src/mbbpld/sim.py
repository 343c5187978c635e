"""Monte-Carlo estimation of logical error rates over an X-error binary
symmetric channel.

Every trial draws its error from its own Philox stream keyed by
``(seed, p, trial index)``. Results therefore do not depend on how trials are
scheduled across workers, and all decoders evaluated with the same seed see
the same error sequence.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from .bp import BpConfig, BpDecoder
from .codes import CssCode, FailureTest
from .mbbp import MbbpDecoder
from .subtree import (
    SubtreePartition,
    build_augmented_bases,
    build_partitions,
    build_random_bases,
)
from .tanner import TannerGraph

log = logging.getLogger(__name__)

DECODERS = ("bp_flooding", "bp_serial", "mbbp_ld", "mbbp_random")
FAILURE_COUNTING = ("logical", "nonconverged")


@dataclass(frozen=True)
class SimulationConfig:
    code: CssCode
    p_values: tuple[float, ...]
    decoder: str = "mbbp_ld"
    target_failures: int = 100
    max_trials: int = 10_000_000
    seed: int = 0
    # number of root permutations whose subtree bases are pooled into one decoder
    partitions: int = 1
    bp: BpConfig = field(default_factory=lambda: BpConfig(schedule="serial"))
    error_type: str = "X"
    count: str = "logical"
    workers: int = 1
    block_size: int = 64

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.target_failures < 1:
            raise ValueError("target_failures must be >= 1")
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if self.partitions < 1:
            raise ValueError("partitions must be >= 1")
        if self.count not in FAILURE_COUNTING:
            raise ValueError(f"count must be one of {FAILURE_COUNTING}")
        for p in self.p_values:
            if not 0 < p < 0.5:
                raise ValueError(f"physical error rate {p} outside (0, 0.5)")


@dataclass
class PointRecord:
    p: float
    trials: int
    failures: int
    nonconverged: int
    sum_iterations: int
    sum_iterations_per_instance: float
    sum_k_max: int

    @property
    def ler(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def wilson_ci_95(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    @property
    def avg_iterations(self) -> float:
        return self.sum_iterations / self.trials if self.trials else 0.0

    @property
    def avg_iterations_per_instance(self) -> float:
        return self.sum_iterations_per_instance / self.trials if self.trials else 0.0

    @property
    def avg_k_max(self) -> float:
        return self.sum_k_max / self.trials if self.trials else 0.0

    def row(self) -> dict:
        lo, hi = self.wilson_ci_95
        return {
            "p": self.p,
            "trials": self.trials,
            "failures": self.failures,
            "ler": self.ler,
            "ci_low": lo,
            "ci_high": hi,
            "avg_iters_total": self.avg_iterations,
            "avg_iters_per_instance": self.avg_iterations_per_instance,
            "avg_k_max": self.avg_k_max,
        }


@dataclass
class SimulationResult:
    records: list[PointRecord]

    def rows(self) -> list[dict]:
        return [r.row() for r in self.records]


CSV_COLUMNS = (
    "p", "trials", "failures", "ler", "ci_low", "ci_high",
    "avg_iters_total", "avg_iters_per_instance", "avg_k_max",
)


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(failures, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


# ---------------------------------------------------------------------------
# Sampling


def _p_key(p: float) -> int:
    # stable integer identity of p, independent of its position in a sweep
    return int(round(p * 1e12))


def trial_rng(seed: int, p: float, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, _p_key(p), trial])
    return np.random.Generator(np.random.Philox(ss))


def sample_error(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= p < 0.5:
        raise ValueError(f"p must lie in [0, 0.5), got {p}")
    return (rng.random(n) < p).astype(np.uint8)


# ---------------------------------------------------------------------------
# Decoders


@dataclass(frozen=True)
class TrialOutcome:
    estimate: np.ndarray
    converged: bool
    iterations: int
    k_max: int
    instances: int


def _bp_runner(dec: BpDecoder) -> Callable[[np.ndarray], TrialOutcome]:
    def run(s):
        out = dec.decode(s)
        return TrialOutcome(out.estimate, out.converged, out.iterations_used, out.iterations_used, 1)
    return run


def _mbbp_runner(dec: MbbpDecoder) -> Callable[[np.ndarray], TrialOutcome]:
    def run(s):
        out = dec.decode(s)
        return TrialOutcome(out.estimate, out.any_converged, out.total_iterations, out.k_max, len(dec.bases))
    return run


def decoder_partitions(cfg: SimulationConfig, syndrome_matrix) -> list[SubtreePartition]:
    return build_partitions(TannerGraph.from_matrix(syndrome_matrix), cfg.partitions, cfg.seed)


def make_decoder(cfg: SimulationConfig, p: float, failure_test: FailureTest,
                 partitions: Sequence[SubtreePartition] | None = None):
    H = failure_test.syndrome_matrix
    if cfg.decoder == "bp_flooding":
        return _bp_runner(BpDecoder(H, replace(cfg.bp, channel_p=p, schedule="flooding")))
    if cfg.decoder == "bp_serial":
        return _bp_runner(BpDecoder(H, replace(cfg.bp, channel_p=p, schedule="serial")))
    if partitions is None:
        partitions = decoder_partitions(cfg, H)
    if cfg.decoder == "mbbp_ld":
        bases = [b for part in partitions for b in build_augmented_bases(H, part)]
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 1])))
        bases = [b for part in partitions for b in build_random_bases(H, part, rng)]
    return _mbbp_runner(MbbpDecoder(H, bases, replace(cfg.bp, channel_p=p)))


# ---------------------------------------------------------------------------
# Driver


def _run_trials(decoders, failure_test: FailureTest, n: int, p: float, seed: int,
                first: int, count: int) -> list[list[tuple]]:
    """Per trial, one ``(failed, nonconverged, outcome)`` tuple per decoder."""
    results = []
    for t in range(first, first + count):
        e = sample_error(n, p, trial_rng(seed, p, t))
        s = failure_test.syndrome(e)
        row = []
        for dec in decoders:
            out = dec(s)
            row.append((failure_test(e, out.estimate), not out.converged, out))
        results.append(row)
    return results


def _blocks(max_trials: int, block: int):
    start = 0
    while start < max_trials:
        yield start, min(block, max_trials - start)
        start += block


def run_paired(cfg: SimulationConfig, p: float, decoders, failure_test: FailureTest,
               stop: Callable[[list[int]], bool], executor: Executor | None = None) -> list[PointRecord]:
    """Run several decoders on one shared error stream.

    Trials are consumed strictly in index order; ``stop`` sees the failure
    counts (per decoder) after every trial, so the stopping point does not
    depend on how blocks were scheduled.
    """
    recs = [PointRecord(p, 0, 0, 0, 0, 0.0, 0) for _ in decoders]
    n = cfg.code.n
    blocks = list(_blocks(cfg.max_trials, cfg.block_size))
    width = max(cfg.workers, 1)

    def submit(i):
        first, count = blocks[i]
        if executor is None:
            return _run_trials(decoders, failure_test, n, p, cfg.seed, first, count)
        return executor.submit(_run_trials, decoders, failure_test, n, p, cfg.seed, first, count)

    pending = [submit(i) for i in range(min(width, len(blocks)))]
    nxt = len(pending)
    while pending:
        res = pending.pop(0)
        rows = res if executor is None else res.result()
        if nxt < len(blocks):
            pending.append(submit(nxt))
            nxt += 1
        for row in rows:
            for rec, (failed, nonconv, out) in zip(recs, row):
                rec.trials += 1
                rec.nonconverged += nonconv
                rec.failures += (failed if cfg.count == "logical" else nonconv)
                rec.sum_iterations += out.iterations
                rec.sum_iterations_per_instance += out.iterations / out.instances
                rec.sum_k_max += out.k_max
            if stop([r.failures for r in recs]):
                for f in pending:
                    if executor is not None:
                        f.cancel()
                return recs
    return recs


def _executor(cfg: SimulationConfig):
    return ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None


def run_point(cfg: SimulationConfig, p: float, executor: Executor | None = None) -> PointRecord:
    ft = FailureTest(cfg.code, cfg.error_type)
    dec = make_decoder(cfg, p, ft)
    own = executor is None and cfg.workers > 1
    pool = _executor(cfg) if own else executor
    try:
        (rec,) = run_paired(cfg, p, [dec], ft, lambda f: f[0] >= cfg.target_failures, pool)
    finally:
        if own:
            pool.shutdown()
    log.info("p=%g trials=%d failures=%d ler=%.4g", p, rec.trials, rec.failures, rec.ler)
    return rec


def run_sweep(cfg: SimulationConfig) -> SimulationResult:
    pool = _executor(cfg)
    try:
        return SimulationResult([run_point(cfg, p, pool) for p in cfg.p_values])
    finally:
        if pool is not None:
            pool.shutdown()


# ---------------------------------------------------------------------------
# Structured vs random augmentation


@dataclass
class ComparisonRow:
    p: float
    tree: list[PointRecord]
    random: list[PointRecord]

    @staticmethod
    def _pooled(recs):
        trials = sum(r.trials for r in recs)
        return sum(r.failures for r in recs) / trials if trials else 0.0

    def row(self) -> dict:
        t = [r.ler for r in self.tree]
        rnd = [r.ler for r in self.random]
        return {
            "p": self.p,
            "tree_mean_ler": float(np.mean(t)),
            "tree_best_ler": float(np.min(t)),
            "random_mean_ler": float(np.mean(rnd)),
            "random_best_ler": float(np.min(rnd)),
            "tree_pooled_ler": self._pooled(self.tree),
            "random_pooled_ler": self._pooled(self.random),
            "tree_failures": sum(r.failures for r in self.tree),
            "random_failures": sum(r.failures for r in self.random),
            "trials": sum(r.trials for r in self.tree),
        }


COMPARISON_COLUMNS = (
    "p", "tree_mean_ler", "tree_best_ler", "random_mean_ler", "random_best_ler",
    "tree_pooled_ler", "random_pooled_ler", "tree_failures", "random_failures", "trials",
)


def compare_tree_vs_random(cfg: SimulationConfig, num_partitions: int = 20) -> list[ComparisonRow]:
    """Each of ``num_partitions`` partitions is decoded as its own MBBP decoder,
    once with its subtree bases and once with matched random bases.

    Both modes of a partition run on identical trials; the pair stops once each
    mode has ``target_failures`` failures.
    """
    ft = FailureTest(cfg.code, cfg.error_type)
    H = ft.syndrome_matrix
    parts = build_partitions(TannerGraph.from_matrix(H), num_partitions, cfg.seed)
    pool = _executor(cfg)
    rows = []
    try:
        for p in cfg.p_values:
            bp = replace(cfg.bp, channel_p=p)
            tree, rand = [], []
            for i, part in enumerate(parts):
                rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, 2, i])))
                decs = [
                    _mbbp_runner(MbbpDecoder(H, build_augmented_bases(H, part), bp)),
                    _mbbp_runner(MbbpDecoder(H, build_random_bases(H, part, rng), bp)),
                ]
                t_rec, r_rec = run_paired(
                    cfg, p, decs, ft, lambda f: min(f) >= cfg.target_failures, pool
                )
                tree.append(t_rec)
                rand.append(r_rec)
            rows.append(ComparisonRow(p, tree, rand))
            log.info("compare p=%g %s", p, rows[-1].row())
    finally:
        if pool is not None:
            pool.shutdown()
    return rows
