#!/usr/bin/env python3
"""
Тесты тензорной алгебры, классических структур и вполне положительных отображений
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import itertools

import numpy as np
import pytest

from src.kernel import (
    ClassicalStructure,
    DensityMatrix,
    KrausMap,
    apply_kraus,
    apply_to_axis,
    as_tensor,
    choi,
    choi_apply,
    choi_compose,
    computational_structure,
    contract,
    fourier_structure,
    inverse_permutation,
    is_psd,
    partial_trace_out,
    random_density_matrix,
    random_structure,
    random_unitary,
    rearrange,
    tensor_from_json,
    tensor_to_json,
)


def test_as_tensor_rejects_non_finite():
    """
    Конструктор тензора не принимает NaN и несовпадение формы
    """
    with pytest.raises(ValueError):
        as_tensor([1.0, np.nan])
    with pytest.raises(ValueError):
        as_tensor([1, 2, 3], shape=(2, 2))
    assert as_tensor([1, 2, 3, 4], shape=(2, 2)).shape == (2, 2)


def test_contract_matches_matrix_product():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 5))
    np.testing.assert_allclose(contract(a, b, [(1, 0)]), a @ b, atol=1e-12)


def contract_by_loops(a, b, pairs):
    free_a = [i for i in range(a.ndim) if i not in {p[0] for p in pairs}]
    free_b = [j for j in range(b.ndim) if j not in {p[1] for p in pairs}]
    out_shape = tuple(a.shape[i] for i in free_a) + tuple(b.shape[j] for j in free_b)
    summed = [range(a.shape[i]) for i, _ in pairs]
    result = np.zeros(out_shape, dtype=np.complex128)
    for out_index in itertools.product(*(range(n) for n in out_shape)):
        total = 0j
        for inner in itertools.product(*summed):
            index_a = [0] * a.ndim
            index_b = [0] * b.ndim
            for axis, value in zip(free_a, out_index[: len(free_a)]):
                index_a[axis] = value
            for axis, value in zip(free_b, out_index[len(free_a):]):
                index_b[axis] = value
            for (i, j), value in zip(pairs, inner):
                index_a[i] = value
                index_b[j] = value
            total += a[tuple(index_a)] * b[tuple(index_b)]
        result[out_index] = total
    return result


@pytest.mark.parametrize(
    "shape_a, shape_b, pairs",
    [
        ((2, 3, 4), (4, 3, 2), [(1, 1), (2, 0)]),
        ((4, 4, 4, 4), (4, 4), [(3, 0), (0, 1)]),
        ((3, 2, 2, 3), (2, 3, 2, 3), [(0, 3), (2, 2), (3, 1)]),
        ((2, 2), (2, 2, 2, 2), [(0, 3)]),
    ],
)
def test_contract_matches_loops(shape_a, shape_b, pairs):
    """
    Свертка совпадает с прямым суммированием в циклах, свободные оси a идут перед осями b
    """
    rng = np.random.default_rng(len(shape_a) + 10 * len(pairs))
    a = rng.standard_normal(shape_a) + 1j * rng.standard_normal(shape_a)
    b = rng.standard_normal(shape_b) + 1j * rng.standard_normal(shape_b)
    np.testing.assert_allclose(contract(a, b, pairs), contract_by_loops(a, b, pairs), atol=1e-12)


def test_contract_errors():
    a = np.zeros((2, 3))
    with pytest.raises(ValueError):
        contract(a, np.zeros((4, 2)), [(1, 0)])
    with pytest.raises(ValueError):
        contract(a, np.zeros((2, 2)), [(0, 0), (0, 1)])


def test_contract_without_pairs_is_outer_product():
    a = np.arange(2)
    b = np.arange(3)
    np.testing.assert_array_equal(contract(a, b, []), np.outer(a, b))


def test_rearrange_and_inverse():
    t = np.arange(24).reshape(2, 3, 4)
    perm = [2, 0, 1]
    moved = rearrange(t, perm)
    assert moved.shape == (4, 2, 3)
    np.testing.assert_array_equal(rearrange(moved, inverse_permutation(perm)), t)
    with pytest.raises(ValueError):
        rearrange(t, [0, 0, 1])


def test_rearrange_conjugates():
    t = np.array([[1 + 1j, 2], [3, 4 - 2j]])
    np.testing.assert_array_equal(rearrange(t, [1, 0], conjugate=True), t.conj().T)
    rng = np.random.default_rng(3)
    t = rng.standard_normal((2, 3, 4, 2)) + 1j * rng.standard_normal((2, 3, 4, 2))
    for perm in itertools.permutations(range(4)):
        moved = rearrange(t, perm, conjugate=True)
        np.testing.assert_array_equal(rearrange(moved, inverse_permutation(perm), conjugate=True), t)


def test_apply_to_axis_keeps_axis_order():
    rng = np.random.default_rng(1)
    t = rng.standard_normal((2, 3, 4))
    m = rng.standard_normal((3, 3))
    expected = np.einsum("ij,ajb->aib", m, t)
    np.testing.assert_allclose(apply_to_axis(t, 1, m), expected, atol=1e-12)


@pytest.mark.parametrize("d", range(1, 17))
def test_fourier_structure(d):
    """
    Базис Фурье ортонормирован, последний столбец равномерный
    """
    z = fourier_structure(d)
    np.testing.assert_allclose(z.basis.conj().T @ z.basis, np.eye(d), atol=1e-12)
    np.testing.assert_allclose(z.vector(d - 1), np.full(d, 1 / np.sqrt(d)), atol=1e-12)
    assert not z.is_computational or d == 1


def test_structure_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        ClassicalStructure(dim=2, basis=[[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        computational_structure(0)


def test_random_unitary_is_reproducible():
    u = random_unitary(4, seed=3)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    np.testing.assert_array_equal(u, random_unitary(4, seed=3))
    assert random_structure(3, seed=5).dim == 3


def test_is_psd():
    assert is_psd(np.eye(2))
    assert not is_psd(np.diag([1.0, -0.1]))
    assert not is_psd(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        is_psd(np.zeros((2, 3)))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(dim=2, mat=np.diag([1.0, -0.5]))
    rho = random_density_matrix(3, rank=2, seed=11)
    assert rho.trace == pytest.approx(1.0)
    assert np.linalg.matrix_rank(rho.mat, tol=1e-10) == 2
    assert 0 < rho.purity() <= 1 + 1e-12


def test_kraus_choi_agree():
    """
    Применение через матрицу Чоя совпадает с формой Крауса
    """
    rng = np.random.default_rng(2)
    kraus = [rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)) for _ in range(2)]
    channel = KrausMap(in_dim=3, out_dim=2, kraus=kraus)
    sigma = random_density_matrix(3, 3, seed=4).mat
    c = choi(channel)
    assert c.shape == (6, 6)
    np.testing.assert_allclose(choi_apply(c, sigma, 3, 2), apply_kraus(channel, sigma), atol=1e-12)


def test_choi_compose():
    rng = np.random.default_rng(5)
    first = KrausMap(in_dim=2, out_dim=3, kraus=[rng.standard_normal((3, 2))])
    second = KrausMap(in_dim=3, out_dim=2, kraus=[rng.standard_normal((2, 3)), rng.standard_normal((2, 3))])
    composed = KrausMap(in_dim=2, out_dim=2, kraus=[k2 @ k1 for k2 in second.kraus for k1 in first.kraus])
    np.testing.assert_allclose(
        choi_compose(choi(second), choi(first), 2, 3, 2), choi(composed), atol=1e-12
    )


def test_trace_preservation():
    u = random_unitary(3, seed=8)
    unitary = KrausMap(in_dim=3, out_dim=3, kraus=[u])
    assert unitary.is_trace_preserving()
    np.testing.assert_allclose(partial_trace_out(choi(unitary), 3, 3), np.eye(3), atol=1e-12)
    half = KrausMap(in_dim=3, out_dim=3, kraus=[u / 2])
    assert not half.is_trace_preserving()


def test_kraus_shape_errors():
    with pytest.raises(ValueError):
        KrausMap(in_dim=2, out_dim=2, kraus=[])
    with pytest.raises(ValueError):
        KrausMap(in_dim=2, out_dim=2, kraus=[np.eye(3)])


def test_tensor_json_roundtrip():
    t = np.array([[1 + 2j, 0.5], [-1j, 3]])
    payload = tensor_to_json(t)
    assert payload["shape"] == [2, 2]
    assert payload["data"][0] == [1.0, 2.0]
    np.testing.assert_array_equal(tensor_from_json(payload), t)
    with pytest.raises(ValueError):
        tensor_from_json({"shape": [2]})


def test_choi_is_psd_for_random_kraus_maps():
    """
    Матрица Чоя положительна на 200 случайных отображениях, d <= 4
    """
    rng = np.random.default_rng(20)
    for i in range(200):
        d_in, d_out = 1 + i % 4, 1 + (i // 4) % 4
        kraus = [
            rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))
            for _ in range(1 + i % 3)
        ]
        c = choi(KrausMap(in_dim=d_in, out_dim=d_out, kraus=kraus))
        scale = max(1.0, float(np.max(np.abs(c))))
        assert is_psd(c, 1e-10 * scale)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_identity_channel_choi_is_rank_one(d):
    c = choi(KrausMap(in_dim=d, out_dim=d, kraus=[np.eye(d)]))
    vec = np.eye(d).reshape(-1)
    np.testing.assert_allclose(c, np.outer(vec, vec), atol=1e-15)
    assert np.linalg.matrix_rank(c) == 1


def test_random_density_matrix_determinism_and_purity():
    first = random_density_matrix(4, rank=3, seed=9)
    np.testing.assert_array_equal(first.mat, random_density_matrix(4, rank=3, seed=9).mat)
    assert np.max(np.abs(first.mat - random_density_matrix(4, rank=3, seed=10).mat)) > 1e-6
    for seed in range(5):
        assert random_density_matrix(3, rank=1, seed=seed).purity() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        random_density_matrix(3, rank=4, seed=0)


def test_density_matrix_tolerance_from_context():
    """
    Допуск положительности можно передать через контекст валидации
    """
    payload = {"dim": 2, "mat": np.diag([1.0, -5e-10])}
    with pytest.raises(ValueError):
        DensityMatrix.model_validate(payload)
    rho = DensityMatrix.model_validate(payload, context={"tol": 1e-9})
    assert rho.mat[1, 1] == pytest.approx(-5e-10)
