import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbbpld.codes import load_preset
from mbbpld.gf2 import DimensionError, SparseBinaryMatrix
from mbbpld.subtree import (
    build_augmented_bases,
    build_partition,
    build_partitions,
    build_random_bases,
    partition_record,
    random_permutations,
    replicate_syndrome,
    subtree_size_bound,
    verify_lemma_bound,
)
from mbbpld.tanner import TannerGraph
from oracles import SMALL_ROWS, UnionFind, small_dense, induced_is_tree, random_forest_matrix


def graph(dense):
    return TannerGraph.from_matrix(SparseBinaryMatrix.from_dense(dense))


def random_graph(seed, m=30, n=40):
    rng = np.random.default_rng(seed)
    H = np.zeros((m, n), dtype=np.uint8)
    for c in range(m):
        H[c, rng.choice(n, size=int(rng.integers(2, 5)), replace=False)] = 1
    return H


@pytest.fixture(scope="module")
def small():
    H = SparseBinaryMatrix.from_rows(SMALL_ROWS, 6)
    return H, build_partition(TannerGraph.from_matrix(H), [0, 3, 1, 2])


def test_small_partition(small):
    _, part = small
    assert part.check_sets == (1, 2, 1, 2)
    assert part.subtrees() == [[0, 2], [3, 1]]
    assert part.members(2) == [1, 3]
    # c2 and c4 were refused by the first subtree with two covered variables each
    assert (1, 1, 2) in part.rejections and (1, 3, 2) in part.rejections


def test_small_augmented_bases(small):
    H, part = small
    b1, b2 = build_augmented_bases(H, part)
    dense = small_dense()
    np.testing.assert_array_equal(b1.matrix.to_dense(), np.vstack([dense, dense[[0, 2]]]))
    np.testing.assert_array_equal(b2.matrix.to_dense(), np.vstack([dense, dense[[3, 1]]]))
    assert b1.extra_rows == (0, 2) and b2.extra_rows == (3, 1)
    np.testing.assert_array_equal(replicate_syndrome(b1, [1, 0, 0, 0]), [1, 0, 0, 0, 1, 0])
    np.testing.assert_array_equal(replicate_syndrome(b2, [0, 1, 0, 1]), [0, 1, 0, 1, 1, 1])


def test_replicate_wrong_length(small):
    H, part = small
    with pytest.raises(DimensionError):
        replicate_syndrome(build_augmented_bases(H, part)[0], [1, 0, 0])


def test_partition_dimension_mismatch(small):
    _, part = small
    with pytest.raises(DimensionError):
        build_augmented_bases(SparseBinaryMatrix.zeros(3, 6), part)


def test_bad_permutation():
    g = graph(small_dense())
    with pytest.raises(ValueError):
        build_partition(g, [0, 1, 1, 3])
    with pytest.raises(ValueError):
        build_partition(g, [0, 1, 2])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_forest_gives_one_subtree_per_component(seed):
    H = random_forest_matrix(np.random.default_rng(seed))
    m, n = H.shape
    uf = UnionFind(m + n)
    for c, v in zip(*np.nonzero(H)):
        uf.union(int(c), m + int(v))
    components = {uf.find(c) for c in range(m)}
    pi = np.random.default_rng(seed + 1).permutation(m)
    part = build_partition(graph(H), pi)
    assert part.num_subtrees == len(components)
    assert not part.rejections


@pytest.mark.parametrize("seed", range(5))
def test_random_graph_partitions(seed):
    H = random_graph(seed)
    rows = [np.flatnonzero(r).tolist() for r in H]
    g = graph(H)
    for part in build_partitions(g, 10, seed):
        groups = part.subtrees()
        # disjoint cover with 1-based contiguous labels
        assert sorted(c for grp in groups for c in grp) == list(range(H.shape[0]))
        assert all(groups)
        for t, grp in enumerate(groups, start=1):
            assert induced_is_tree(rows, grp)
            covered = {v for c in grp for v in rows[c]}
            # maximality: every later adjacent check would close a cycle
            for c, owner in enumerate(part.check_sets):
                if owner > t and covered & set(rows[c]):
                    assert not induced_is_tree(rows, grp + [c])
        for s, c, eta in part.rejections:
            assert eta >= 2 and part.check_sets[c] != s


def test_acyclic_union_find_many_permutations():
    H = random_graph(99)
    rows = [np.flatnonzero(r).tolist() for r in H]
    for part in build_partitions(graph(H), 50, 3):
        for grp in part.subtrees():
            assert induced_is_tree(rows, grp)


def test_deterministic():
    g = graph(random_graph(4))
    a = build_partitions(g, 5, 17)
    b = build_partitions(g, 5, 17)
    assert [p.check_sets for p in a] == [p.check_sets for p in b]
    assert [p.permutation for p in a] != [p.permutation for p in build_partitions(g, 5, 18)]
    assert all(sorted(p) == list(range(30)) for p in random_permutations(30, 4, 0))


def test_lemma_bound_bb144():
    code = load_preset("bb144")
    g = TannerGraph.from_matrix(code.hz)
    bound = subtree_size_bound(144, 6)
    assert bound == pytest.approx(28.6)
    for part in build_partitions(g, 100, 5):
        rep = verify_lemma_bound(g, part)
        assert rep.applicable and rep.w == 6 and rep.passed
        assert rep.max_size <= bound


def test_lemma_not_applicable_for_irregular():
    H = SparseBinaryMatrix.from_rows([[0, 1], [1, 2, 3]], 4)
    part = build_partition(TannerGraph.from_matrix(H), [0, 1])
    rep = verify_lemma_bound(TannerGraph.from_matrix(H), part)
    assert not rep.applicable and rep.passed


def test_random_bases_match_subtree_sizes():
    code = load_preset("bb144")
    g = TannerGraph.from_matrix(code.hz)
    part = build_partitions(g, 1, 2)[0]
    bases = build_random_bases(code.hz, part, np.random.default_rng(0))
    assert [b.num_extra_rows for b in bases] == part.sizes()
    for b in bases:
        assert len(set(b.extra_rows)) == b.num_extra_rows
    disjoint = build_random_bases(code.hz, part, np.random.default_rng(0), disjoint=True)
    assert [b.num_extra_rows for b in disjoint] == part.sizes()
    extra = sorted(r for b in disjoint for r in b.extra_rows)
    assert extra == list(range(code.hz.num_rows))


def test_partition_record_fields():
    g = graph(small_dense())
    rec = partition_record(g, build_partition(g, [3, 2, 1, 0]))
    assert rec["permutation"] == [3, 2, 1, 0]
    assert sum(rec["subtree_sizes"]) == 4
    assert rec["lemma_ok"] and rec["lemma_bound"] == pytest.approx(2.5)
