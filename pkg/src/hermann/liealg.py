"""Matrix realisations of compact Lie algebras.

A :class:`LieAlgebraModel` is a real Lie algebra given by a real-linear basis
of complex square matrices together with the invariant inner product
``<X, Y> = -c Re tr(XY)``. Algebra elements are plain coordinate vectors
(``numpy`` arrays of length ``dim``) with respect to that basis; complex
coordinate vectors represent elements of the complexification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    ClosureError,
    DegenerateCombinationError,
    HermannError,
    InvariantSubspaceError,
    NonCommutingError,
)
from .numerics import DEFAULT_TOL, Tolerances, cluster_points

AlgebraElement = np.ndarray


class LieAlgebraModel:
    """A finite-dimensional real Lie algebra realised by matrices.

    Args:
        basis: array of shape ``(dim, n, n)``; a real-linear basis of the algebra.
        metric_scale: positive ``c`` in ``<X, Y> = -c Re tr(XY)``.
        tol: tolerances for the structural checks run at construction.
        name: optional label used in diagnostics.

    Raises:
        HermannError: the Gram matrix is not positive definite.
        ClosureError: some bracket of basis elements leaves the span.
    """

    def __init__(self, basis, metric_scale: float = 1.0, tol: Tolerances = DEFAULT_TOL, name: str = ""):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must have shape (dim, n, n)")
        if not metric_scale > 0:
            raise ValueError("metric_scale must be positive")
        self.name = name
        self.tol = tol
        self.basis = basis
        self.metric_scale = float(metric_scale)
        self.dim = basis.shape[0]
        self.size = basis.shape[1]

        flat = basis.reshape(self.dim, -1)
        self._flat = np.concatenate([flat.real, flat.imag], axis=1).T
        self._q, self._r = np.linalg.qr(self._flat)
        if self.dim and np.min(np.abs(np.diag(self._r))) < 1e-12 * np.max(np.abs(np.diag(self._r))):
            raise HermannError("basis matrices are not real-linearly independent")

        self.gram = -self.metric_scale * np.einsum("aij,bji->ab", basis, basis).real
        self.gram = 0.5 * (self.gram + self.gram.T)
        if self.dim:
            if np.linalg.eigvalsh(self.gram).min() <= 0:
                raise HermannError("Gram matrix is not positive definite; -c Re tr(XY) is not a metric here")
            self._chol = np.linalg.cholesky(self.gram)
        else:
            self._chol = np.zeros((0, 0))
        self._chol_inv = la.solve_triangular(self._chol, np.eye(self.dim), lower=True) if self.dim else self._chol

        comms = np.einsum("aij,bjk->abik", basis, basis) - np.einsum("bij,ajk->abik", basis, basis)
        coeffs, residual = self._expand(comms.reshape(self.dim * self.dim, self.size, self.size))
        self.closure_residual = residual
        if residual > tol.structural:
            raise ClosureError(f"{name or 'model'}: not closed under bracket (residual {residual:.2e})")
        # structure[i, j, k]: coefficient of basis_k in [basis_i, basis_j]
        self.structure = coeffs.reshape(self.dim, self.dim, self.dim)
        self.structure[np.abs(self.structure) < 1e-14] = 0.0
        self._ad_basis = np.transpose(self.structure, (0, 2, 1))

    # -- coordinates -------------------------------------------------------

    def _expand(self, mats: np.ndarray) -> tuple[np.ndarray, float]:
        flat = mats.reshape(mats.shape[0], -1)
        vecs = np.concatenate([flat.real, flat.imag], axis=1).T
        coeffs = la.solve_triangular(self._r, self._q.T @ vecs) if self.dim else np.zeros((0, vecs.shape[1]))
        resid = self._flat @ coeffs - vecs
        scale = max(1.0, float(np.abs(vecs).max(initial=0.0)))
        return coeffs.T, float(np.abs(resid).max(initial=0.0)) / scale

    def matrix(self, x: AlgebraElement) -> np.ndarray:
        """Matrix of the element with coordinates ``x``."""
        return np.tensordot(np.asarray(x), self.basis, axes=1)

    def coords(self, mat, *, check: bool = True) -> AlgebraElement:
        """Coordinates of a matrix lying in the algebra.

        Raises:
            ClosureError: the matrix is not in the real span of the basis.
        """
        coeffs, residual = self._expand(np.asarray(mat, dtype=complex)[None])
        if check and residual > self.tol.structural:
            raise ClosureError(f"matrix is not in the algebra (residual {residual:.2e})")
        return coeffs[0]

    # -- algebra operations ------------------------------------------------

    def bracket(self, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
        """Coordinates of the matrix commutator ``XY - YX``."""
        X, Y = self.matrix(x), self.matrix(y)
        return self.coords(X @ Y - Y @ X)

    def ad_matrix(self, x: AlgebraElement) -> np.ndarray:
        """Matrix of ``ad(x)`` acting on coordinate columns."""
        return np.tensordot(np.asarray(x), self._ad_basis, axes=1)

    def inner(self, x: AlgebraElement, y: AlgebraElement) -> float:
        return float(np.asarray(x) @ self.gram @ np.asarray(y))

    def hermitian(self, z, w) -> complex:
        """Hermitian extension ``<z, w> = conj(z)^T G w`` to the complexification."""
        return complex(np.conj(z) @ self.gram @ w)

    def norm(self, x) -> float:
        return float(np.sqrt(abs(self.hermitian(x, x))))

    def ad_invariance_residual(self) -> float:
        """max over basis triples of ``|<[Z,X],Y> + <X,[Z,Y]>|``."""
        if not self.dim:
            return 0.0
        G = self.gram
        res = np.einsum("kl,zkm->zlm", G, self._ad_basis)
        res = res + np.transpose(res, (0, 2, 1))
        return float(np.abs(res).max())

    # -- orthonormal frames ------------------------------------------------

    def to_orthonormal(self, x) -> np.ndarray:
        """Coordinates in an orthonormal frame (works on rows of a 2-d array)."""
        return np.asarray(x) @ self._chol

    def from_orthonormal(self, u) -> np.ndarray:
        return np.asarray(u) @ self._chol_inv

    def orthonormal_basis(self) -> np.ndarray:
        """Rows form an orthonormal basis of the algebra."""
        return self._chol_inv.copy()

    def orthonormalize(self, vectors, rank_tol: float = 1e-9) -> np.ndarray:
        """Orthonormal rows spanning the same space as the given rows."""
        vectors = np.atleast_2d(np.asarray(vectors))
        if vectors.size == 0:
            return np.zeros((0, self.dim), dtype=vectors.dtype)
        u = self.to_orthonormal(vectors)
        _, s, vh = np.linalg.svd(u, full_matrices=False)
        rank = int(np.sum(s > rank_tol * max(1.0, s.max(initial=0.0))))
        return self.from_orthonormal(vh[:rank])

    def null_space(self, ops, rank_tol: float = 1e-9) -> np.ndarray:
        """Orthonormal rows spanning the joint kernel of linear maps on the algebra."""
        if not self.dim:
            return np.zeros((0, 0))
        # in orthonormal coordinates op becomes L^T op L^{-T}
        stacked = np.vstack([self._chol.T @ op @ self._chol_inv.T for op in ops])
        ns = la.null_space(stacked, rcond=rank_tol)
        return self.from_orthonormal(ns.T)

    def __repr__(self):
        return f"LieAlgebraModel({self.name or '?'}, dim={self.dim}, n={self.size}, c={self.metric_scale})"


@dataclass(frozen=True, eq=False)
class LinearOperatorOnSubspace:
    """Matrix of a linear operator in a basis of an invariant subspace.

    ``basis`` holds one vector per row (model coordinates, possibly complex);
    column ``j`` of ``matrix`` expands the image of ``basis[j]``.
    """

    basis: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        k = len(self.basis)
        if self.matrix.shape != (k, k):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match subspace dimension {k}")

    @property
    def dim(self) -> int:
        return len(self.basis)


def ad_operator(model: LieAlgebraModel, eta: AlgebraElement, subspace=None) -> LinearOperatorOnSubspace:
    """Restrict ``ad(eta)`` to a subspace given by basis rows.

    Args:
        model: the ambient algebra.
        eta: element whose adjoint action is restricted.
        subspace: rows spanning the subspace; the whole algebra (orthonormal
            frame) when omitted.

    Raises:
        InvariantSubspaceError: ``[eta, .]`` leaves the subspace.
    """
    B = model.orthonormal_basis() if subspace is None else np.atleast_2d(np.asarray(subspace))
    if B.size == 0:
        return LinearOperatorOnSubspace(np.zeros((0, model.dim)), np.zeros((0, 0)))
    images = model.ad_matrix(eta) @ B.T
    G = model.gram
    gram_b = np.conj(B) @ G @ B.T
    M = np.linalg.solve(gram_b, np.conj(B) @ G @ images)
    resid = model.to_orthonormal((B.T @ M - images).T)
    scale = max(1.0, float(np.abs(images).max(initial=0.0)))
    if np.abs(resid).max(initial=0.0) > model.tol.invariance * scale:
        raise InvariantSubspaceError("not ad-invariant subspace: [eta, x] leaves the span")
    if not np.iscomplexobj(B):
        M = M.real
    return LinearOperatorOnSubspace(B, M)


@dataclass(frozen=True, eq=False)
class JointEigenspace:
    """One joint eigenspace of a commuting family.

    Attributes:
        values: eigenvalue of each operator on this space.
        local: orthonormal rows, coordinates w.r.t. the operators' subspace basis.
        vectors: the same vectors expressed in ambient coordinates.
    """

    values: np.ndarray
    local: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.local)


def joint_eigen_decomposition(
    ops: list[LinearOperatorOnSubspace],
    tol: Tolerances = DEFAULT_TOL,
    seed: int = 0,
    retries: int = 5,
) -> list[JointEigenspace]:
    """Simultaneously diagonalise commuting normal operators.

    A random real combination of the operators is Schur-decomposed; each
    operator's eigenvalue is read off every Schur vector and the resulting
    tuples are clustered. A combination that merges distinct tuples is
    detected through eigenvector residuals and redrawn.

    Raises:
        NonCommutingError: two operators do not commute, or one is not normal.
        DegenerateCombinationError: ``retries`` draws all failed to separate.
        ClusteringAmbiguityError: two eigenvalue tuples fall in the guard band.
    """
    if not ops:
        raise ValueError("need at least one operator")
    k = ops[0].dim
    mats = [np.asarray(op.matrix, dtype=complex) for op in ops]
    if any(m.shape != (k, k) for m in mats):
        raise ValueError("operators act on subspaces of different dimension")
    if k == 0:
        return []
    scale = max(1.0, max(float(np.abs(m).max()) for m in mats))
    for i, a in enumerate(mats):
        if np.abs(a @ a.conj().T - a.conj().T @ a).max() > tol.invariance * scale**2:
            raise NonCommutingError(f"operator {i} is not normal")
        for j in range(i):
            if np.abs(a @ mats[j] - mats[j] @ a).max() > tol.invariance * scale**2:
                raise NonCommutingError(f"operators {j} and {i} do not commute")

    rng = np.random.default_rng(seed)
    for _ in range(retries):
        coeffs = rng.standard_normal(len(mats))
        combo = sum(c * m for c, m in zip(coeffs, mats))
        _, Z = la.schur(combo, output="complex")
        vals = np.array([[np.vdot(Z[:, j], m @ Z[:, j]) for m in mats] for j in range(k)])
        ok = all(
            np.linalg.norm(m @ Z[:, j] - vals[j, i] * Z[:, j]) <= tol.invariance * scale
            for j in range(k)
            for i, m in enumerate(mats)
        )
        if not ok:
            continue
        groups = cluster_points(vals, tol.cluster * max(1.0, float(np.abs(vals).max())), tol.guard)
        spaces = []
        for g in groups:
            local = Z[:, g].T
            spaces.append(JointEigenspace(vals[g].mean(axis=0), local, local @ ops[0].basis))
        spaces.sort(key=lambda s: tuple(np.round(np.concatenate([s.values.real, s.values.imag]), 9)))
        return spaces
    raise DegenerateCombinationError(f"no separating combination found after {retries} random draws")
