import numpy as np
import pytest

from hermann.catalog import su_model, su_pq_t_basis
from hermann.errors import ClosureError, InvariantSubspaceError, NonCommutingError
from hermann.liealg import (
    LieAlgebraModel,
    LinearOperatorOnSubspace,
    ad_operator,
    joint_eigen_decomposition,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture(scope="module")
def su2():
    return LieAlgebraModel([1j * SX, 1j * SY, 1j * SZ], metric_scale=0.5, name="su(2)")


def test_bracket_antisymmetric(su2):
    x = np.array([0.3, -1.2, 0.7])
    assert np.allclose(su2.bracket(x, x), 0)


def test_pauli_bracket(su2):
    # [i sx / 2, i sy / 2] = -i sz / 2, from the 2x2 matrix product
    got = su2.bracket([0.5, 0, 0], [0, 0.5, 0])
    assert np.allclose(su2.matrix(got), -0.5j * SZ)
    assert np.allclose(got, [0, 0, -0.5])


def test_jacobi():
    model = su_model(4)
    rng = np.random.default_rng(3)
    x, y, z = rng.standard_normal((3, model.dim))
    b = model.bracket
    jac = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
    assert np.abs(jac).max() < 1e-12


def test_bracket_matches_ad_matrix():
    model = su_model(3)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, model.dim))
    assert np.allclose(model.ad_matrix(x) @ y, model.bracket(x, y))


def test_inner_symmetric_and_invariant():
    model = su_model(4)
    rng = np.random.default_rng(1)
    x, y, z = rng.standard_normal((3, model.dim))
    assert model.inner(x, y) == pytest.approx(model.inner(y, x))
    lhs = model.inner(model.bracket(z, x), y) + model.inner(x, model.bracket(z, y))
    assert abs(lhs) < 1e-12
    assert model.ad_invariance_residual() < 1e-12
    assert model.closure_residual < 1e-12


def test_e1_unit_norm():
    # tr(e_1^2) = -2 for e_1 = i(E_{1,3} + E_{3,1}); c = 1/2 gives norm 1
    model = su_model(3)
    e1 = su_pq_t_basis(model, 2, 1)[0]
    assert np.trace(model.matrix(e1) @ model.matrix(e1)).real == pytest.approx(-2.0)
    assert model.inner(e1, e1) == pytest.approx(1.0)


def test_ad_operator_zero():
    model = su_model(3)
    op = ad_operator(model, np.zeros(model.dim))
    assert np.allclose(op.matrix, 0)


def test_ad_operator_on_root_pair():
    # [i sz, i sx] = -2 i sy, [i sz, i sy] = 2 i sx
    model = LieAlgebraModel([1j * SX, 1j * SY, 1j * SZ], metric_scale=0.5)
    x, y = np.eye(3)[0], np.eye(3)[1]  # [eta, x] = -2 y, [eta, y] = 2 x
    op = ad_operator(model, [0, 0, 1], np.array([x, y]))
    assert np.allclose(op.matrix, [[0, 2], [-2, 0]])


def test_ad_e1_spectrum():
    # dense eigensolve of ad(e_1) on su(3): {0 x2, +-i x2, +-2i x1}
    model = su_model(3)
    e1 = su_pq_t_basis(model, 2, 1)[0]
    ev = np.linalg.eigvals(model.ad_matrix(e1))
    assert np.abs(ev.real).max() < 1e-12
    assert np.allclose(np.sort(ev.imag), [-2, -1, -1, 0, 0, 1, 1, 2])


def test_ad_operator_not_invariant():
    model = su_model(3)
    e1 = su_pq_t_basis(model, 2, 1)[0]
    with pytest.raises(InvariantSubspaceError, match="not ad-invariant"):
        ad_operator(model, e1, np.eye(model.dim)[:1])


def test_coords_rejects_outside():
    model = su_model(2)
    with pytest.raises(ClosureError):
        model.coords(np.eye(2))


def test_not_closed():
    with pytest.raises(ClosureError, match="not closed"):
        LieAlgebraModel([1j * SX, 1j * SY], metric_scale=0.5)


def _op(mat):
    mat = np.asarray(mat, dtype=float)
    return LinearOperatorOnSubspace(np.eye(len(mat)), mat)


def test_joint_single_diagonal():
    spaces = joint_eigen_decomposition([_op(np.diag([2.0, 2.0, 5.0]))])
    assert sorted(s.dim for s in spaces) == [1, 2]


def test_joint_shared_kernel():
    a = np.zeros((4, 4))
    a[2, 3], a[3, 2] = 1, -1
    b = np.zeros((4, 4))
    b[2, 3], b[3, 2] = 2, -2
    spaces = joint_eigen_decomposition([_op(a), _op(b)])
    zero = [s for s in spaces if np.allclose(s.values, 0)]
    assert len(zero) == 1 and zero[0].dim == 2
    assert sum(s.dim for s in spaces) == 4


def test_joint_noncommuting():
    with pytest.raises(NonCommutingError):
        joint_eigen_decomposition([_op([[1, 0], [0, 2]]), _op([[0, 1], [1, 0]])])


def test_joint_eigenspaces_orthogonal_and_invariant():
    from tests.conftest import built

    pair, _, _ = built("su_pq_so", p=3, q=2)
    model = pair.model
    frame = model.orthonormal_basis()
    ops = [ad_operator(model, eta, frame) for eta in pair.t_basis]
    assert np.abs(ops[0].matrix @ ops[1].matrix - ops[1].matrix @ ops[0].matrix).max() < 1e-9
    spaces = joint_eigen_decomposition(ops)
    assert sum(s.dim for s in spaces) == model.dim
    vecs = np.vstack([s.vectors for s in spaces])
    gram = vecs.conj() @ model.gram @ vecs.T
    assert np.abs(gram - np.eye(model.dim)).max() < 1e-8
    for s in spaces:
        for k, eta in enumerate(pair.t_basis):
            res = model.ad_matrix(eta) @ s.vectors.T - s.values[k] * s.vectors.T
            assert np.abs(res).max() < 1e-8
    # tuples i alpha(eta) reproduce the roots e_i, 2e_i, e_1 +- e_2 and their negatives
    alphas = {tuple(np.round(s.values.imag, 6)) for s in spaces if np.abs(s.values).max() > 1e-6}
    assert alphas == {(1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (1, -1), (-1, 0), (0, -1), (-2, 0),
                      (0, -2), (-1, -1), (-1, 1)}
