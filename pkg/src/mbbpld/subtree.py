"""Maximal cycle-free subtree partitions of the check nodes and the augmented
parity-check bases built from them.

A partition is grown root by root in the order of a permutation of the checks.
From each still-unassigned root a BFS runs over checks; a dequeued check joins
the current subtree iff at most one of its variable neighbours is already
covered by that subtree, which keeps the induced subgraph a tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gf2 import DimensionError, SparseBinaryMatrix, as_bits, vertical_stack
from .tanner import TannerGraph, is_check_regular


@dataclass(frozen=True)
class SubtreePartition:
    """Subtree index per check (1-based) and the root order that produced it.

    ``admitted`` lists each subtree's checks in the order the BFS accepted
    them, root first. ``rejections`` records ``(subtree, check, eta)`` for every
    check that was tested during a subtree's BFS but refused because
    ``eta >= 2`` covered variables would have closed a cycle.
    """

    check_sets: tuple[int, ...]
    num_subtrees: int
    permutation: tuple[int, ...]
    admitted: tuple[tuple[int, ...], ...] = field(default=(), repr=False)
    rejections: tuple[tuple[int, int, int], ...] = field(default=(), repr=False, compare=False)

    def members(self, s: int) -> list[int]:
        """Checks in subtree ``s`` (1-based), ascending."""
        return [c for c, t in enumerate(self.check_sets) if t == s]

    def subtrees(self) -> list[list[int]]:
        """Checks of every subtree in admission order."""
        if self.admitted:
            return [list(a) for a in self.admitted]
        groups: list[list[int]] = [[] for _ in range(self.num_subtrees)]
        for c, t in enumerate(self.check_sets):
            groups[t - 1].append(c)
        return groups

    def sizes(self) -> list[int]:
        return [len(g) for g in self.subtrees()]


def _check_permutation(pi: Sequence[int], m: int) -> tuple[int, ...]:
    pi = tuple(int(c) for c in pi)
    if len(pi) != m or sorted(pi) != list(range(m)):
        raise ValueError(f"not a permutation of the {m} check indices")
    return pi


def build_partition(g: TannerGraph, pi: Sequence[int]) -> SubtreePartition:
    pi = _check_permutation(pi, g.num_checks)
    check_sets = [0] * g.num_checks
    rejections: list[tuple[int, int, int]] = []
    admitted: list[tuple[int, ...]] = []
    s = 0

    def grow(root: int) -> None:
        visited_vars: set[int] = set()
        # A check queued twice is resolved identically at its first dequeue
        # (eta only grows within one BFS), so one entry per check suffices.
        queued = {root}
        queue = deque([root])
        order = []
        while queue:
            u = queue.popleft()
            nbrs = g.check_neighbors[u]
            eta = sum(1 for v in nbrs if v in visited_vars)
            if eta > 1:
                rejections.append((s, u, eta))
                continue
            check_sets[u] = s
            order.append(u)
            for v in nbrs:
                visited_vars.add(v)
                for c in g.var_neighbors[v]:
                    if c not in queued and check_sets[c] == 0:
                        queued.add(c)
                        queue.append(c)
        admitted.append(tuple(order))

    # Every check is offered as a root in pi order, so one sweep assigns all of
    # them; the outer loop only guards that contract.
    pending = list(pi)
    while pending:
        for c in pending:
            if check_sets[c] == 0:
                s += 1
                grow(c)
        pending = [c for c in pi if check_sets[c] == 0]

    return SubtreePartition(tuple(check_sets), s, pi, tuple(admitted), tuple(rejections))


def random_permutations(num_checks: int, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.Generator(np.random.Philox(seed))
    return [rng.permutation(num_checks) for _ in range(count)]


def build_partitions(g: TannerGraph, count: int, seed: int) -> list[SubtreePartition]:
    return [build_partition(g, pi) for pi in random_permutations(g.num_checks, count, seed)]


# ---------------------------------------------------------------------------
# Size bound


@dataclass
class LemmaReport:
    applicable: bool
    max_size: int
    bound: float | None
    w: int | None

    @property
    def passed(self) -> bool:
        return not self.applicable or self.max_size <= self.bound


def subtree_size_bound(num_vars: int, w: int) -> float:
    """Largest check count a subtree of a check-regular graph can reach."""
    return (num_vars - 1) / (w - 1)


def verify_lemma_bound(g: TannerGraph, part: SubtreePartition) -> LemmaReport:
    w = is_check_regular(g)
    max_size = max(part.sizes(), default=0)
    if w is None or w < 2:
        return LemmaReport(False, max_size, None, w)
    return LemmaReport(True, max_size, subtree_size_bound(g.num_vars, w), w)


# ---------------------------------------------------------------------------
# Augmented bases


@dataclass(frozen=True, eq=False)
class AugmentedBasis:
    """``H`` with the rows of one subtree appended below it.

    ``row_origin[i]`` is the row of ``H`` that row ``i`` of ``matrix`` copies.
    """

    subtree_index: int
    matrix: SparseBinaryMatrix
    row_origin: tuple[int, ...] = field(repr=False)
    num_base_rows: int = 0

    @property
    def num_extra_rows(self) -> int:
        return self.matrix.num_rows - self.num_base_rows

    @property
    def extra_rows(self) -> tuple[int, ...]:
        return self.row_origin[self.num_base_rows:]


def _augment(H: SparseBinaryMatrix, index: int, rows: Sequence[int]) -> AugmentedBasis:
    rows = [int(r) for r in rows]
    matrix = vertical_stack(H, H.select_rows(rows))
    origin = tuple(range(H.num_rows)) + tuple(rows)
    return AugmentedBasis(index, matrix, origin, num_base_rows=H.num_rows)


def build_augmented_bases(H: SparseBinaryMatrix, part: SubtreePartition) -> list[AugmentedBasis]:
    if len(part.check_sets) != H.num_rows:
        raise DimensionError(
            f"partition covers {len(part.check_sets)} checks but H has {H.num_rows} rows"
        )
    return [_augment(H, s + 1, rows) for s, rows in enumerate(part.subtrees())]


def build_random_bases(
    H: SparseBinaryMatrix, part: SubtreePartition, rng: np.random.Generator,
    disjoint: bool = False,
) -> list[AugmentedBasis]:
    """Matched random baseline: same number of bases and duplicated-row counts.

    Each subtree's rows are replaced by as many distinct rows of ``H`` drawn
    uniformly at random, independently per basis. With ``disjoint=True`` the
    rows are instead shuffled once and cut into consecutive groups of the
    subtree sizes, so the random groups also partition the checks.
    """
    if len(part.check_sets) != H.num_rows:
        raise DimensionError(
            f"partition covers {len(part.check_sets)} checks but H has {H.num_rows} rows"
        )
    bases = []
    if disjoint:
        order, start = rng.permutation(H.num_rows), 0
        for s, size in enumerate(part.sizes()):
            bases.append(_augment(H, s + 1, order[start:start + size].tolist()))
            start += size
        return bases
    for s, size in enumerate(part.sizes()):
        bases.append(_augment(H, s + 1, rng.choice(H.num_rows, size=size, replace=False).tolist()))
    return bases


def replicate_syndrome(basis: AugmentedBasis, s) -> np.ndarray:
    """Extend a syndrome of ``H`` to the rows of the augmented matrix."""
    s = as_bits(s)
    if s.shape[0] != basis.num_base_rows:
        raise DimensionError(
            f"syndrome length {s.shape[0]} != {basis.num_base_rows} original checks"
        )
    return s[np.asarray(basis.row_origin, dtype=np.intp)]


def partition_record(g: TannerGraph, part: SubtreePartition) -> dict:
    report = verify_lemma_bound(g, part)
    return {
        "permutation": list(part.permutation),
        "check_sets": list(part.check_sets),
        "subtree_sizes": part.sizes(),
        "lemma_bound": report.bound,
        "max_size": report.max_size,
        "lemma_ok": report.passed,
    }
