import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import construct
import cosine
import matkernel
import minmax_sampling
import spanning
from exceptions import InvalidPartition, NotPositiveBasis, NotUnit, Singular

SQ3 = np.sqrt(3.0) / 2.0
D2 = np.array([[1.0, -0.5, -0.5], [0.0, SQ3, -SQ3]])


def _d35_shifted():
    D, _ = construct.compose_partition(
        [(construct.optimal_minimal(2, 3), None), (construct.optimal_minimal(1, 3, 2), [-1.0, 0.0, 0.0])]
    )
    return D


def test_enumerate_bases_counts():
    D, _ = construct.maximal(2)
    assert list(cosine.enumerate_bases(D)) == [[0, 1], [0, 3], [1, 2], [2, 3]]
    assert len(list(cosine.enumerate_bases(D2))) == 3
    D, _ = construct.optimal_intermediate(3, 5)
    assert len(list(cosine.enumerate_bases(D))) == 6


def test_structured_bases_count():
    for n, s in [(3, 5), (5, 8), (6, 9), (4, 8)]:
        D, part = construct.optimal_intermediate(n, s)
        bases = list(cosine.structured_bases(part))
        assert len(bases) == construct.count_bases(part)
        assert sorted(map(tuple, bases)) == sorted(map(tuple, cosine.enumerate_bases(D)))


def test_evaluate_basis_orthonormal():
    D, _ = construct.maximal(2)
    ev = cosine.evaluate_basis(D, [0, 1])
    assert_allclose(ev.gamma, 1 / np.sqrt(2))
    assert_allclose(ev.u, [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert_allclose(ev.p_max, 1 / np.sqrt(2))


def test_evaluate_basis_simplex():
    ev = cosine.evaluate_basis(D2, [0, 1])
    assert_allclose(ev.gamma, 0.5)
    assert_allclose(D2[:, :2].T @ ev.u, 0.5, atol=1e-12)
    assert ev.p_max >= ev.gamma - 1e-12


def test_evaluate_basis_block_diagonal():
    D, _ = construct.optimal_intermediate(3, 5)
    ev = cosine.evaluate_basis(D, [0, 2, 3])
    assert_allclose(ev.gamma, 1 / np.sqrt(5))
    assert_allclose(np.linalg.norm(ev.u), 1.0, atol=1e-12)
    assert_allclose(D[:, [0, 2, 3]].T @ ev.u, ev.gamma, atol=1e-12)


def test_evaluate_basis_without_dots():
    D, _ = construct.optimal_intermediate(3, 5)
    ev = cosine.evaluate_basis(D, [0, 2, 3], with_dots=False)
    assert ev.p is None
    assert ev.p_max == ev.gamma


def test_evaluate_basis_rank_deficient():
    D, _ = construct.maximal(2)
    with pytest.raises(Singular):
        cosine.evaluate_basis(D, [0, 2])


def _narrow_wedge(eps):
    d1 = np.array([1.0, 0.0])
    d2 = np.array([math.cos(eps), math.sin(eps)])
    d3 = -(d1 + d2) / np.linalg.norm(d1 + d2)
    return np.column_stack([d1, d2, d3])


@pytest.mark.parametrize("eps", [1e-5, 1e-6, 1e-7])
def test_cm_ill_conditioned_basis(eps):
    D = _narrow_wedge(eps)
    assert spanning.is_positive_basis(D)
    bases = list(cosine.enumerate_bases(D))
    assert bases == [[0, 1], [0, 2], [1, 2]]
    for idx in bases:
        cosine.evaluate_basis(D, idx)
    result = cosine.cosine_measure_full(D)
    assert_allclose(result.value, math.sin(eps / 4), rtol=1e-6)
    assert sorted(result.argmin_bases) == [[0, 2], [1, 2]]


def test_cm_line():
    result = cosine.cosine_measure_full(np.array([[1.0, -1.0]]))
    assert result.value == 1.0
    assert len(result.cosine_vectors) == 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cm_optimal_minimal(n):
    result = cosine.cosine_measure_full(construct.optimal_minimal(n))
    assert_allclose(result.value, 1 / n, atol=1e-10)
    assert len(result.argmin_bases) == n + 1


def test_cm_d35_shifted_below_optimum():
    D = _d35_shifted()
    result = cosine.cosine_measure_full(D)
    assert result.value < 1 / np.sqrt(5)
    assert 0 < result.value < 1
    sampled = cosine.cosine_measure_sampled(D, 1_000_000, seed=3)
    assert result.value - 1e-12 <= sampled <= result.value + 5e-3


def test_cm_rejects_non_positive_basis():
    with pytest.raises(NotPositiveBasis):
        cosine.cosine_measure_full(np.eye(2))


def test_active_sets_contain_a_basis():
    for D in (D2, construct.optimal_intermediate(3, 5)[0], _d35_shifted(), construct.maximal(3)[0]):
        result = cosine.cosine_measure_full(D)
        n = D.shape[0]
        for u, active in zip(result.cosine_vectors, result.active_sets):
            assert len(active) >= n
            assert matkernel.rank(D[:, active]) == n
            dots = u @ D
            assert_allclose(dots[active], result.value, atol=1e-8)
            assert np.all(dots <= result.value + 1e-8)


def test_cosine_vectors_are_deduplicated():
    result = cosine.cosine_measure_full(construct.maximal(2)[0])
    assert len(result.argmin_bases) == 4
    assert len(result.cosine_vectors) == 4
    for i, u in enumerate(result.cosine_vectors):
        for v in result.cosine_vectors[i + 1 :]:
            assert np.abs(u - v).max() > 1e-6


def test_active_set():
    D, _ = construct.maximal(2)
    u = np.array([1.0, 1.0]) / np.sqrt(2)
    assert cosine.active_set(D, u, 1 / np.sqrt(2)) == [0, 1]
    with pytest.raises(NotUnit):
        cosine.active_set(D, 2 * u, 1 / np.sqrt(2))


def test_structured_matches_full():
    for n, s in [(3, 5), (4, 6), (4, 7), (5, 7)]:
        D, part = construct.optimal_intermediate(n, s)
        structured = cosine.cosine_measure_structured(D, part)
        full = cosine.cosine_measure_full(D)
        assert abs(structured.value - full.value) <= 1e-10
        assert_allclose(structured.value, construct.cm_formula(n, s), atol=1e-10)


def test_structured_values():
    D, part = construct.maximal(2)
    assert_allclose(cosine.cosine_measure_structured(D, part).value, 1 / np.sqrt(2), atol=1e-12)
    D, part = construct.optimal_intermediate(4, 5)
    assert_allclose(cosine.cosine_measure_structured(D, part).value, 0.25, atol=1e-12)


def test_structured_negativity():
    D, part = construct.optimal_intermediate(5, 8)
    for idx in cosine.structured_bases(part):
        ev = cosine.evaluate_basis(D, idx)
        rest = np.delete(ev.p, idx)
        assert np.all(rest <= 1e-10)
        assert_allclose(ev.p_max, ev.gamma, atol=1e-12)


def test_structured_rejects_bad_partition():
    D, _ = construct.optimal_intermediate(3, 5)
    bad = construct.Partition.from_blocks(3, 5, [((0, 2), 1, None), ((1, 3, 4), 2, None)])
    with pytest.raises(InvalidPartition):
        cosine.cosine_measure_structured(D, bad)


def test_orthonormal_invariance(rng):
    D, _ = construct.optimal_intermediate(4, 7)
    Q = matkernel.random_orthonormal(4, rng)
    assert abs(cosine.cosine_measure_full(Q @ D).value - cosine.cosine_measure_full(D).value) <= 1e-10


def test_full_threads_agree():
    D, _ = construct.optimal_intermediate(4, 6)
    a = cosine.cosine_measure_full(D, threads=1)
    b = cosine.cosine_measure_full(D, threads=4)
    assert a.value == b.value
    assert a.argmin_bases == b.argmin_bases


def test_full_passes_threads_to_verification(monkeypatch):
    seen = []
    check = spanning.is_positive_basis

    def spy(D, require_unit=True, threads=1):
        seen.append(threads)
        return check(D, require_unit=require_unit, threads=threads)

    monkeypatch.setattr(spanning, "is_positive_basis", spy)
    cosine.cosine_measure_full(D2, threads=3)
    assert seen == [3]


def test_sampled_line():
    assert cosine.cosine_measure_sampled(np.array([[1.0, -1.0]]), 10, seed=0) == 1.0


def test_sampled_is_reproducible_and_monotone():
    D, _ = construct.optimal_intermediate(3, 5)
    a = cosine.cosine_measure_sampled(D, 5000, seed=11, chunk_size=1000)
    b = cosine.cosine_measure_sampled(D, 5000, seed=11, chunk_size=1000, threads=3)
    c = cosine.cosine_measure_sampled(D, 20000, seed=11, chunk_size=1000)
    assert a == b
    assert c <= a
    assert c >= 1 / math.sqrt(5) - 1e-12


def test_sampled_rejects_zero_samples():
    with pytest.raises(ValueError):
        cosine.cosine_measure_sampled(D2, 0, seed=1)


def test_minmax_kernel():
    units = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert minmax_sampling.minmax(units, D2) == pytest.approx(SQ3)


def test_unit_vectors_chunk():
    a = minmax_sampling.unit_vectors_chunk(3, 100, 5, 2)
    b = minmax_sampling.unit_vectors_chunk(3, 100, 5, 2)
    assert_allclose(a, b)
    assert_allclose(np.linalg.norm(a, axis=1), 1.0)
    assert not np.allclose(a, minmax_sampling.unit_vectors_chunk(3, 100, 5, 3))


@pytest.mark.slow
@pytest.mark.parametrize(
    "D, expected",
    [
        (D2, 0.5),
        (construct.optimal_intermediate(3, 5)[0], 1 / math.sqrt(5)),
    ],
)
def test_sampled_close_to_exact(D, expected):
    value = cosine.cosine_measure_sampled(D, 1_000_000, seed=7)
    assert expected - 1e-12 <= value <= expected + 2e-3


def test_grand_sum_orthogonal_case():
    B2 = construct.optimal_minimal(2, 3)[:, :2]
    lhs, rhs = cosine.grand_sum_decomposition_check(B2, [0.0, 0.0, 1.0])
    assert_allclose(lhs, 5.0, atol=1e-12)
    assert_allclose(rhs, 5.0, atol=1e-12)


def test_grand_sum_tilted(rng):
    B2 = construct.optimal_minimal(2, 3)[:, :2]
    base = matkernel.grand_sum(matkernel.invert(matkernel.gram(B2)))
    for _ in range(20):
        b1 = rng.standard_normal(3)
        b1 /= np.linalg.norm(b1)
        lhs, rhs = cosine.grand_sum_decomposition_check(B2, b1)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
        assert lhs >= base - 1e-9


def test_grand_sum_singular():
    B2 = construct.optimal_minimal(2, 3)[:, :2]
    with pytest.raises(Singular):
        cosine.grand_sum_decomposition_check(B2, B2[:, 0])


def test_result_to_dict():
    D, part = construct.optimal_intermediate(3, 5)
    out = cosine.cosine_measure_structured(D, part).to_dict()
    assert out["method"] == cosine.STRUCTURED
    assert set(out) == {"method", "value", "cosine_vectors", "active_sets", "argmin_bases"}
