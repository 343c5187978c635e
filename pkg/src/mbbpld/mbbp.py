"""Multiple-bases BP list decoding.

Every augmented basis gets its own BP instance fed with the replicated
syndrome. Instances that reach a valid error pattern put their estimate on a
candidate list (a multiset), and the output is chosen by frequency-weighted
scoring: ``count(e) / (weight(e) + 1)``.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bp import BpConfig, BpDecoder, BpOutcome
from .gf2 import DimensionError, SparseBinaryMatrix, as_bits
from .subtree import AugmentedBasis, replicate_syndrome


@dataclass(frozen=True)
class Candidate:
    estimate: np.ndarray
    source: int
    iterations: int


@dataclass
class CandidateList:
    entries: list[Candidate] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def append(self, c: Candidate) -> None:
        self.entries.append(c)


@dataclass(frozen=True)
class MbbpOutcome:
    estimate: np.ndarray
    any_converged: bool
    list_size: int
    k_max: int
    total_iterations: int
    per_instance: tuple[BpOutcome, ...] = field(repr=False, default=())

    @property
    def mean_iterations(self) -> float:
        return self.total_iterations / max(len(self.per_instance), 1)


def fws_select(candidates: CandidateList | Sequence[np.ndarray]) -> np.ndarray:
    """Highest ``frequency / (weight + 1)``; ties go to lower weight, then to the
    lexicographically smallest support."""
    vectors = [c.estimate if isinstance(c, Candidate) else np.asarray(c)
               for c in getattr(candidates, "entries", candidates)]
    if not vectors:
        raise ValueError("empty candidate list")
    counts: dict[bytes, int] = {}
    first: dict[bytes, np.ndarray] = {}
    for v in vectors:
        key = as_bits(v).tobytes()
        counts[key] = counts.get(key, 0) + 1
        first.setdefault(key, v)

    def rank(key):
        v = first[key]
        w = int(np.count_nonzero(v))
        return (-counts[key] / (w + 1), w, tuple(np.flatnonzero(v).tolist()))

    return as_bits(first[min(counts, key=rank)]).copy()


def _instance_order(basis: AugmentedBasis, cfg: BpConfig) -> np.ndarray | None:
    if cfg.serial_order == "ascending":
        return None
    # interleaved: each duplicated row directly follows its original
    extra_by_origin: dict[int, list[int]] = {}
    for idx in range(basis.num_base_rows, basis.matrix.num_rows):
        extra_by_origin.setdefault(basis.row_origin[idx], []).append(idx)
    order = []
    for r in range(basis.num_base_rows):
        order.append(r)
        order.extend(extra_by_origin.get(r, ()))
    return np.asarray(order, dtype=np.int32)


class MbbpDecoder:
    """Parallel BP over a fixed set of augmented bases of ``H``."""

    def __init__(self, H: SparseBinaryMatrix, bases: Sequence[AugmentedBasis], cfg: BpConfig):
        for b in bases:
            if b.num_base_rows != H.num_rows or b.matrix.num_cols != H.num_cols:
                raise DimensionError(
                    f"basis {b.subtree_index} is {b.matrix.shape}, built on {b.num_base_rows} rows; "
                    f"H is {H.shape}"
                )
        self.H = H
        self.bases = list(bases)
        self.cfg = cfg
        self.instances = [BpDecoder(b.matrix, cfg, order=_instance_order(b, cfg)) for b in self.bases]

    def decode(self, syndrome, executor: Executor | None = None) -> MbbpOutcome:
        s = as_bits(syndrome)
        if s.shape[0] != self.H.num_rows:
            raise DimensionError(f"syndrome length {s.shape[0]} != {self.H.num_rows} checks")
        jobs = [(inst, replicate_syndrome(b, s)) for inst, b in zip(self.instances, self.bases)]
        if executor is None:
            outcomes = [inst.decode(sx) for inst, sx in jobs]
        else:
            outcomes = list(executor.map(lambda job: job[0].decode(job[1]), jobs))

        # reduction in basis order, independent of completion order
        candidates = CandidateList()
        for b, out in zip(self.bases, outcomes):
            if out.converged:
                candidates.append(Candidate(out.estimate[: self.H.num_cols], b.subtree_index, out.iterations_used))
        if candidates.entries:
            estimate = fws_select(candidates)
        else:
            estimate = np.zeros(self.H.num_cols, dtype=np.uint8)
        iters = [o.iterations_used for o in outcomes]
        return MbbpOutcome(
            estimate=estimate,
            any_converged=bool(candidates.entries),
            list_size=len(candidates),
            k_max=max(iters, default=0),
            total_iterations=sum(iters),
            per_instance=tuple(outcomes),
        )


def mbbp_decode(
    H: SparseBinaryMatrix, bases: Sequence[AugmentedBasis], syndrome, cfg: BpConfig
) -> MbbpOutcome:
    return MbbpDecoder(H, bases, cfg).decode(syndrome)
