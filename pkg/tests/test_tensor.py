import numpy as np
import pytest
from numpy.testing import assert_allclose

from merakit.errors import (
    ArgumentError,
    CapacityError,
    ConvergenceError,
    ShapeError,
)
from merakit.tensor import (
    FlopMeter,
    contract,
    dominant_eig,
    eig_all,
    fuse,
    ncon,
    ncon_cost,
    norm,
    permute,
    random_isometry,
    split,
    svd,
)

X = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_contract_identity_on_vector():
    vec = np.array([1.0, 0.0])
    assert_allclose(contract(np.eye(2), vec, [(1, 0)]), vec)


def test_contract_pauli_x_squares_to_identity():
    assert_allclose(contract(X, X, [(1, 0)]), np.eye(2))


def test_contract_matches_loop_reference():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
    b = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    ref = np.zeros(3, dtype=complex)
    for i in range(3):
        for j in range(4):
            for k in range(5):
                ref[i] += a[i, j, k] * b[k, j]
    assert_allclose(contract(a, b, [(2, 0), (1, 1)]), ref, atol=1e-12)


def test_contract_is_bilinear():
    rng = np.random.default_rng(8)
    a, b = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
    c = rng.standard_normal((3, 4))
    al, be = 0.37, -1.21
    lhs = contract(al * a + be * b, c, [(2, 0), (1, 1)])
    rhs = al * contract(a, c, [(2, 0), (1, 1)]) + be * contract(b, c, [(2, 0), (1, 1)])
    assert norm(lhs - rhs) <= 1e-12 * max(norm(lhs), 1.0)


def test_contract_rejects_bad_pairs():
    a = np.zeros((2, 3))
    with pytest.raises(ShapeError):
        contract(a, a, [(0, 1)])
    with pytest.raises(ArgumentError):
        contract(a, a, [(0, 0), (0, 1)])


def test_permute_identity_and_involution():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((2, 3))
    assert_allclose(permute(a, (0, 1)), a)
    twice = permute(permute(a, (1, 0)), (1, 0))
    assert np.array_equal(twice, a)


def test_permute_exhaustive_index_check():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((2, 3, 4))
    p = permute(a, (2, 0, 1))
    for i in range(2):
        for j in range(3):
            for k in range(4):
                assert p[k, i, j] == a[i, j, k]
    assert norm(p) == norm(a)


def test_permute_rejects_non_permutation():
    with pytest.raises(ArgumentError):
        permute(np.zeros((2, 2)), (0, 0))


def test_fuse_split_round_trip_bit_exact():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((2, 2))
    fused = fuse(a, [[0, 1]])
    assert np.array_equal(split(fused, (2, 2)), a)


def test_fuse_row_major_index_mapping():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((2, 3, 4))
    fused = fuse(a, [[0], [1, 2]])
    assert fused.shape == (2, 12)
    for i in range(2):
        for j in range(3):
            for k in range(4):
                assert fused[i, j * 4 + k] == a[i, j, k]


def test_fuse_all_preserves_norm():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((2, 2, 2))
    assert norm(fuse(a, [[0, 1, 2]])) == norm(a)


def test_split_rejects_incompatible_shape():
    with pytest.raises(ShapeError):
        split(np.zeros((2, 3)), (4, 2))


def test_svd_identity_and_degenerate():
    res = svd(np.eye(2), [0])
    assert_allclose(res.s, [1.0, 1.0])
    res = svd(np.diag([3.0, 0.0]), [0])
    assert_allclose(res.s, [3.0, 0.0])


def test_svd_isometry_and_reconstruction():
    rng = np.random.default_rng(14)
    a = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
    u, s, vh = svd(a, [0])
    assert norm(u.conj().T @ u - np.eye(5)) <= 1e-12 * 5
    assert norm(vh @ vh.conj().T - np.eye(5)) <= 1e-12 * 5
    assert norm(u @ np.diag(s) @ vh - a) <= 1e-10 * norm(a)
    assert abs(np.sum(s**2) - norm(a) ** 2) <= 1e-10 * norm(a) ** 2
    assert np.all(np.diff(s) <= 0)


def test_svd_tensor_matricization():
    rng = np.random.default_rng(15)
    a = rng.standard_normal((2, 3, 4))
    res = svd(a, [0, 2])
    recon = np.einsum("abk,kc->abc", res.u, res.vh * res.s[:, None])
    assert norm(np.transpose(recon, (0, 2, 1)) - a) <= 1e-10 * norm(a)


def _charpoly_coeffs(mat):
    # Faddeev-LeVerrier recursion; independent of any eigensolver.
    n = mat.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(mat, dtype=complex)
    for k in range(1, n + 1):
        m = mat @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(mat @ m) / k)
    return np.array(coeffs)


def test_eig_all_trivial_cases():
    assert_allclose(eig_all(np.eye(3)).values, np.ones(3))
    vals = sorted(eig_all(X).values.real)
    assert_allclose(vals, [-1.0, 1.0], atol=1e-12)


def test_eig_all_matches_companion_matrix_oracle():
    rng = np.random.default_rng(16)
    mat = rng.standard_normal((9, 9))
    roots = np.roots(_charpoly_coeffs(mat))
    got = eig_all(mat).values
    assert_allclose(
        np.sort_complex(np.round(got, 10)),
        np.sort_complex(np.round(roots, 10)),
        atol=1e-8,
    )


def test_eig_all_capacity_cap():
    with pytest.raises(CapacityError):
        eig_all(np.eye(8), cap=4)


def test_dominant_eig_identity_map():
    start = np.array([0.3, -0.4, 1.2])
    res = dominant_eig(lambda v: v, start)
    assert_allclose(res.values[0], 1.0, atol=1e-10)
    vec = res.vectors[0]
    overlap = abs(np.vdot(vec, start)) / (norm(vec) * norm(start))
    assert_allclose(overlap, 1.0, atol=1e-10)


def test_dominant_eig_diagonal_map():
    diag = np.array([2.0, 1.0])
    res = dominant_eig(lambda v: diag * v, np.array([1.0, 1.0]))
    assert_allclose(res.values[0], 2.0, atol=1e-10)
    vec = res.vectors[0] / res.vectors[0][0]
    assert_allclose(vec, [1.0, 0.0], atol=1e-8)


def test_dominant_eig_black_box_matches_dense():
    rng = np.random.default_rng(17)
    mat = rng.standard_normal((16, 16))
    dense = eig_all(mat)
    res = dominant_eig(lambda v: mat @ v, rng.standard_normal(16), tol=1e-12)
    # a real matrix may carry its leading modulus on a conjugate pair
    leading = [w for w in dense.values if abs(w) >= abs(dense.values[0]) - 1e-12]
    assert min(abs(res.values[0] - w) for w in leading) <= 1e-8 * abs(dense.values[0])


def test_dominant_eig_agrees_with_eig_all_on_hermitian_map():
    rng = np.random.default_rng(18)
    a = rng.standard_normal((20, 20))
    mat = a + a.T
    res = dominant_eig(lambda v: mat @ v, rng.standard_normal(20), tol=1e-11)
    assert abs(abs(res.values[0]) - np.abs(eig_all(mat).values[0])) <= 1e-9


def test_dominant_eig_reports_nonconvergence():
    rng = np.random.default_rng(19)
    mat = rng.standard_normal((64, 64))
    # two iterations cannot converge a random spectrum
    with pytest.raises(ConvergenceError) as info:
        dominant_eig(lambda v: mat @ v, np.ones(64), tol=1e-14, max_iter=2)
    assert info.value.residual is None or info.value.residual > 0


def test_dominant_eig_rejects_zero_start():
    with pytest.raises(ArgumentError):
        dominant_eig(lambda v: v, np.zeros(4))


def test_ncon_closed_network_and_flop_meter():
    rng = np.random.default_rng(20)
    a = rng.standard_normal((4, 5))
    b = rng.standard_normal((5, 4))
    with FlopMeter() as meter:
        val = ncon([a, b], [(1, 2), (2, 1)])
    assert_allclose(val, np.trace(a @ b))
    assert meter.total > 0
    assert ncon_cost([(4, 5), (5, 4)], [(1, 2), (2, 1)]) == meter.total


def test_ncon_output_leg_ordering():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((2, 3, 4))
    b = rng.standard_normal((4, 5))
    out = ncon([a, b], [(-2, -1, 1), (1, -3)])
    ref = np.einsum("abc,cd->bad", a, b)
    assert_allclose(out, ref)


def test_random_isometry_deterministic_and_isometric():
    w1 = random_isometry(8, 3, np.random.default_rng(5))
    w2 = random_isometry(8, 3, np.random.default_rng(5))
    assert np.array_equal(w1, w2)
    assert norm(w1.T @ w1 - np.eye(3)) <= 1e-12 * 3
