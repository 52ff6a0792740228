"""Involution pairs, canonical splits and restricted root systems.

Linear maps on the algebra (``sigma``, ``tau``) are ``dim x dim`` real
matrices acting on coordinate columns. Subspaces are stored as orthonormal
rows. Roots are linear functionals on ``t`` written as coordinate rows with
respect to the orthonormal ``t_basis``, so a root's coordinate row doubles as
the coordinates of its metric-dual vector in that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
import scipy.linalg as la

from .errors import (
    InvolutionError,
    MaximalAbelianError,
    RootSystemError,
)
from .liealg import LieAlgebraModel, ad_operator, joint_eigen_decomposition
from .numerics import DEFAULT_TOL, Tolerances, clean_array, clean_float, cluster_points


@dataclass(frozen=True)
class InvolutionReport:
    square_residual: float
    bracket_residual: float
    inner_residual: float
    tol: float
    offending_pair: tuple[int, int] | None = None

    @property
    def passed(self) -> bool:
        return max(self.square_residual, self.bracket_residual, self.inner_residual) < self.tol

    def __bool__(self):
        return self.passed


def validate_involution(theta, model: LieAlgebraModel, tol: Tolerances = DEFAULT_TOL) -> InvolutionReport:
    """Residuals of ``theta^2 = id``, bracket and inner-product preservation."""
    theta = np.asarray(theta, dtype=float)
    d = model.dim
    if theta.shape != (d, d):
        raise ValueError(f"involution must be a {d}x{d} matrix")
    sq = float(np.abs(theta @ theta - np.eye(d)).max(initial=0.0))
    C = model.structure
    # theta[e_i, e_j] versus [theta e_i, theta e_j], both as coordinate vectors
    lhs = np.einsum("ijk,lk->ijl", C, theta)
    rhs = np.einsum("ai,bj,abl->ijl", theta, theta, C)
    diff = np.abs(lhs - rhs)
    br = float(diff.max(initial=0.0))
    inner = float(np.abs(theta.T @ model.gram @ theta - model.gram).max(initial=0.0))
    offending = None
    if br >= tol.structural:
        i, j, _ = np.unravel_index(np.argmax(diff), diff.shape)
        offending = (int(i), int(j))
    return InvolutionReport(sq, br, inner, tol.structural, offending)


def canonical_split(theta, model: LieAlgebraModel, tol: Tolerances = DEFAULT_TOL):
    """Orthonormal bases (rows) of the +1 and -1 eigenspaces of an involution.

    Raises:
        InvolutionError: ``theta`` fails :func:`validate_involution`.
    """
    report = validate_involution(theta, model, tol)
    if not report.passed:
        raise InvolutionError(f"not an isometric involutive automorphism: {report}")
    if model.dim == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    L = model._chol
    sym = L.T @ np.asarray(theta, dtype=float) @ model._chol_inv.T
    vals, vecs = np.linalg.eigh(0.5 * (sym + sym.T))
    plus = model.from_orthonormal(vecs[:, vals > 0].T)
    minus = model.from_orthonormal(vecs[:, vals < 0].T)
    return plus, minus


@dataclass(frozen=True)
class MaximalAbelianCertificate:
    is_maximal: bool
    abelian: bool
    centralizer_dim: int
    dim_t: int
    dim_m_cap_p: int
    bracket_residual: float

    def __bool__(self):
        return self.is_maximal


@dataclass(frozen=True, eq=False)
class InvolutionPair:
    """Two commuting-or-not involutions with their splits and a chosen ``t``.

    Build through :meth:`build`, which validates everything.
    """

    model: LieAlgebraModel
    sigma: np.ndarray
    tau: np.ndarray
    k: np.ndarray
    m: np.ndarray
    h: np.ndarray
    p: np.ndarray
    m_cap_p: np.ndarray
    t_basis: np.ndarray
    tol: Tolerances = DEFAULT_TOL

    @classmethod
    def build(cls, model, sigma, tau, t_basis, tol: Tolerances = DEFAULT_TOL) -> "InvolutionPair":
        sigma = np.asarray(sigma, dtype=float)
        tau = np.asarray(tau, dtype=float)
        k, m = canonical_split(sigma, model, tol)
        h, p = canonical_split(tau, model, tol)
        d = model.dim
        mp = model.null_space([sigma + np.eye(d), tau + np.eye(d)], rank_tol=1e-10)
        t_basis = np.atleast_2d(np.asarray(t_basis, dtype=float)).reshape(-1, d)
        pair = cls(model, sigma, tau, k, m, h, p, mp, t_basis, tol)
        if len(t_basis):
            gram_t = t_basis @ model.gram @ t_basis.T
            if np.abs(gram_t - np.eye(len(t_basis))).max() > tol.structural:
                raise MaximalAbelianError("t_basis must be orthonormal")
        cert = verify_maximal_abelian(t_basis, pair)
        if not cert.is_maximal:
            raise MaximalAbelianError(f"t is not maximal abelian in m ∩ p: {cert}")
        return pair

    @property
    def dim_t(self) -> int:
        return len(self.t_basis)

    @property
    def sigma_tau(self) -> np.ndarray:
        return self.sigma @ self.tau

    def commutator_norm(self) -> float:
        return float(np.abs(self.sigma @ self.tau - self.tau @ self.sigma).max(initial=0.0))

    def t_element(self, coords) -> np.ndarray:
        """Algebra coordinates of the element of ``t`` with the given ``t``-coordinates."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim_t,):
            raise ValueError(f"expected {self.dim_t} t-coordinates, got shape {coords.shape}")
        return coords @ self.t_basis if self.dim_t else np.zeros(self.model.dim)


def verify_maximal_abelian(t_basis, pair: InvolutionPair) -> MaximalAbelianCertificate:
    """Check that ``t_basis`` spans a maximal abelian subspace of ``m ∩ p``.

    Maximality is decided by comparing ``dim t`` with the joint kernel of
    ``ad(eta)`` restricted to ``m ∩ p``.

    Raises:
        MaximalAbelianError: some vector of ``t_basis`` lies outside ``m ∩ p``.
    """
    model = pair.model
    tol = pair.tol
    t_basis = np.atleast_2d(np.asarray(t_basis, dtype=float)).reshape(-1, model.dim)
    mp = pair.m_cap_p
    for eta in t_basis:
        out = pair.sigma @ eta + eta, pair.tau @ eta + eta
        if max(np.abs(o).max() for o in out) > tol.structural * max(1.0, np.abs(eta).max()):
            raise MaximalAbelianError("t is not inside m ∩ p")
    br = 0.0
    for a, b in combinations(range(len(t_basis)), 2):
        br = max(br, float(np.abs(model.ad_matrix(t_basis[a]) @ t_basis[b]).max()))
    abelian = br < tol.structural
    if len(mp) == 0:
        cdim = 0
    elif len(t_basis) == 0:
        cdim = len(mp)
    else:
        # joint kernel of ad(t) inside span(mp): solve for coefficient vectors
        blocks = [model.to_orthonormal((model.ad_matrix(eta) @ mp.T).T).T for eta in t_basis]
        cdim = la.null_space(np.vstack(blocks), rcond=1e-9).shape[1]
    return MaximalAbelianCertificate(
        is_maximal=bool(abelian and cdim == len(t_basis)),
        abelian=bool(abelian),
        centralizer_dim=int(cdim),
        dim_t=len(t_basis),
        dim_m_cap_p=len(mp),
        bracket_residual=br,
    )


@dataclass(frozen=True, eq=False)
class EpsComponent:
    """The piece of a root space on which ``sigma∘tau`` acts by ``exp(i eps_angle)``.

    ``m_basis`` rows ``y_i`` and ``k_basis`` rows ``x_i = psi(y_i)`` satisfy
    ``[eta, x_i] = -alpha(eta) y_i`` and ``[eta, y_i] = alpha(eta) x_i``.
    """

    eps_angle: float
    multiplicity: int
    k_basis: np.ndarray
    m_basis: np.ndarray

    @property
    def eps(self) -> complex:
        return complex(np.exp(1j * self.eps_angle))


@dataclass(frozen=True, eq=False)
class RootDatum:
    alpha: np.ndarray
    alpha_vec: np.ndarray
    m_alpha: int
    root_space: np.ndarray
    eps_components: tuple[EpsComponent, ...] = ()

    @property
    def norm_sq(self) -> float:
        return float(self.alpha @ self.alpha)

    @property
    def m_basis(self) -> np.ndarray:
        parts = [c.m_basis for c in self.eps_components]
        return np.vstack(parts) if parts else np.zeros((0, len(self.alpha_vec)))

    def to_dict(self) -> dict:
        return {
            "alpha": clean_array(self.alpha),
            "multiplicity": int(self.m_alpha),
            "eps": [
                {"angle": clean_float(c.eps_angle), "multiplicity": int(c.multiplicity)}
                for c in self.eps_components
            ],
        }


@dataclass(frozen=True, eq=False)
class G0Component:
    """``sigma∘tau`` eigen-piece of the centraliser ``g_0`` for ``eps`` with ``Im eps >= 0``."""

    eps_angle: float
    k_dim: int
    m_dim: int
    k_basis: np.ndarray
    m_basis: np.ndarray


@dataclass(frozen=True, eq=False)
class RootSystemData:
    pair: InvolutionPair
    positive_roots: tuple[RootDatum, ...]
    regular_witness: np.ndarray
    g0_basis: np.ndarray
    g0_eps: tuple[G0Component, ...] = ()

    @property
    def refined(self) -> bool:
        return all(r.eps_components for r in self.positive_roots) and (
            bool(self.g0_eps) or len(self.g0_basis) == 0
        )

    @property
    def rank(self) -> int:
        return self.pair.dim_t

    def dims(self) -> dict:
        """Dimension bookkeeping for ``g``, ``k``, ``m`` and their ``g_0`` parts."""
        model, sigma = self.pair.model, self.pair.sigma
        g0 = self.g0_basis
        if len(g0):
            sig0 = model.to_orthonormal(g0) @ model.to_orthonormal((sigma @ g0.T).T).T
            k0 = int(np.sum(np.linalg.eigvalsh(0.5 * (sig0 + sig0.T)) > 0))
        else:
            k0 = 0
        total = sum(r.m_alpha for r in self.positive_roots)
        return {
            "dim_g": model.dim,
            "dim_k": len(self.pair.k),
            "dim_m": len(self.pair.m),
            "dim_g0": len(g0),
            "dim_k0": k0,
            "dim_m0": len(g0) - k0,
            "sum_m_alpha": total,
        }

    def root_index(self, alpha, tol: float = 1e-7) -> int:
        alpha = np.asarray(alpha, dtype=float)
        for i, r in enumerate(self.positive_roots):
            if np.abs(r.alpha - alpha).max() < tol:
                return i
        raise KeyError(f"no positive root {alpha}")

    def multiplicity(self, alpha) -> int:
        try:
            return self.positive_roots[self.root_index(alpha)].m_alpha
        except KeyError:
            return 0

    def is_reduced(self) -> bool:
        return not root_lines(self, check=False) or all(len(line) == 1 for line in root_lines(self, check=False))

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "rank": self.rank,
            "regular_witness": clean_array(self.regular_witness),
            "positive_roots": [r.to_dict() for r in self.positive_roots],
            "g0": [
                {"angle": clean_float(c.eps_angle), "k_dim": c.k_dim, "m_dim": c.m_dim}
                for c in self.g0_eps
            ],
        }


def root_lines(rs: RootSystemData, check: bool = True) -> list[list[tuple[int, int]]]:
    """Group positive roots into lines through the origin.

    Each line is a list of ``(root_index, ratio)`` with ratio 1 for the
    shortest root ``beta`` on the line and 2 for ``2 beta``.

    Raises:
        RootSystemError: (when ``check``) a ratio other than 1/2 or 2 appears.
    """
    roots = [r.alpha for r in rs.positive_roots]
    n = len(roots)
    used = [False] * n
    lines = []
    for i in range(n):
        if used[i]:
            continue
        members = [i]
        used[i] = True
        for j in range(i + 1, n):
            a, b = roots[i], roots[j]
            cross = np.linalg.norm(np.outer(a, b) - np.outer(b, a))
            if cross < 1e-7 * (1 + np.linalg.norm(a) * np.linalg.norm(b)):
                members.append(j)
                used[j] = True
        norms = [np.linalg.norm(roots[k]) for k in members]
        base = members[int(np.argmin(norms))]
        line = []
        for k in members:
            ratio = np.linalg.norm(roots[k]) / np.linalg.norm(roots[base])
            lam = int(round(ratio))
            if check and (abs(ratio - lam) > 1e-7 or lam not in (1, 2)):
                raise RootSystemError(f"collinear roots with unsupported ratio {ratio:.6g}")
            line.append((k, lam))
        if check and len({lam for _, lam in line}) != len(line):
            raise RootSystemError("duplicate root on a line")
        line.sort(key=lambda e: e[1])
        lines.append(line)
    return lines


def _lex_positive(alpha: np.ndarray, tol: float) -> bool:
    for a in alpha:
        if abs(a) > tol:
            return a > 0
    raise RootSystemError("zero functional has no sign")


def _regular_witness(roots: list[np.ndarray], c: int) -> np.ndarray:
    """An element of ``t`` on which every positive (lexicographic) root is positive."""
    delta = 0.1
    for _ in range(60):
        wit = delta ** np.arange(c)
        vals = [a @ wit for a in roots]
        if all(v > 1e-9 for v in vals):
            return wit
        delta /= 3
    raise RootSystemError("could not find a regular witness")


def extract_root_system(pair: InvolutionPair, seed: int = 0) -> RootSystemData:
    """Restricted roots of ``t`` with multiplicities ``m(alpha) = dim_C g(alpha)``.

    The complexified adjoint actions of an orthonormal basis of ``t`` are
    jointly diagonalised; eigenvalue tuples ``i alpha(eta_k)`` give the root
    functionals. Positivity is lexicographic in ``t``-coordinates.

    Raises:
        RootSystemError: a root is not matched by its negative, or the
            eigenvalues are not purely imaginary.
        ClusteringAmbiguityError: two roots are too close to separate.
    """
    model, tol = pair.model, pair.tol
    c = pair.dim_t
    frame = model.orthonormal_basis()
    if c == 0:
        g0 = frame
        return RootSystemData(pair, (), np.zeros(0), g0)
    ops = [ad_operator(model, eta, frame) for eta in pair.t_basis]
    spaces = joint_eigen_decomposition(ops, tol, seed=seed)
    scale = max(1.0, max(float(np.abs(s.values).max()) for s in spaces))
    zero_tol = tol.cluster * scale
    roots: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    negatives = []
    g0_dim = 0
    for s in spaces:
        if np.abs(s.values.real).max() > zero_tol:
            raise RootSystemError("ad(t) has eigenvalues with nonzero real part")
        alpha = s.values.imag
        if np.abs(alpha).max() <= zero_tol:
            g0_dim += s.dim
            continue
        if _lex_positive(alpha, zero_tol):
            roots[len(roots)] = (alpha, s.vectors)
        else:
            negatives.append((alpha, s.dim))
    for alpha, dim in negatives:
        match = [a for a, v in roots.values() if np.abs(a + alpha).max() <= zero_tol and len(v) == dim]
        if not match:
            raise RootSystemError(f"root {-alpha} has no positive partner of matching dimension")
    if len(negatives) != len(roots):
        raise RootSystemError("positive and negative roots are unbalanced")

    data = []
    def order(e):
        return (round(float(np.linalg.norm(e[0])), 7), tuple(np.round(-e[0], 7)))

    for alpha, vectors in sorted(roots.values(), key=order):
        alpha = np.where(np.abs(alpha - np.round(alpha)) < zero_tol, np.round(alpha), alpha) + 0.0
        data.append(RootDatum(alpha, alpha @ pair.t_basis, len(vectors), vectors))
    g0 = model.null_space([model.ad_matrix(eta) for eta in pair.t_basis], rank_tol=1e-9)
    if len(g0) != g0_dim:
        raise RootSystemError(f"centraliser dimension mismatch ({len(g0)} real vs {g0_dim} complex)")
    witness = _regular_witness([d.alpha for d in data], c)
    rs = RootSystemData(pair, tuple(data), witness, g0)
    root_lines(rs)
    return rs


def _canonical_angle(phi: float, tol: float) -> float:
    if phi <= -np.pi + tol:
        return float(np.pi)
    if abs(phi) <= tol:
        return 0.0
    return float(phi)


def psi_map(root: RootDatum, x, model: LieAlgebraModel, check: bool = True) -> np.ndarray:
    """``psi_alpha(x) = [alpha_vec, x] / <alpha, alpha>``: isometry ``m_alpha -> k_alpha``.

    Raises:
        ValueError: ``x`` is not in ``m_alpha`` (only when the root is refined
            and ``check`` is set).
    """
    x = np.asarray(x)
    if check and root.eps_components:
        mb = root.m_basis
        coeff = mb @ model.gram @ x
        if model.norm(x - coeff @ mb) > 1e-7 * max(1.0, model.norm(x)):
            raise ValueError("x is not in m_alpha")
    return model.ad_matrix(root.alpha_vec) @ x / root.norm_sq


def _refine_root(root: RootDatum, pair: InvolutionPair) -> RootDatum:
    model, tol = pair.model, pair.tol
    d = model.dim
    st = pair.sigma_tau
    Z = root.root_space.T  # columns, Hermitian-orthonormal
    G = model.gram
    Q = Z.conj().T @ G @ (st @ Z)
    if np.abs(st @ Z - Z @ Q).max() > tol.invariance * max(1.0, np.abs(Z).max()):
        raise RootSystemError("root space is not invariant under sigma∘tau")
    T, V = la.schur(Q, output="complex")
    eps = np.diag(T)
    if np.abs(np.abs(eps) - 1).max() > 1e-8:
        raise RootSystemError("sigma∘tau eigenvalue off the unit circle")
    groups = cluster_points(eps, tol.cluster, tol.guard)
    p_m = 0.5 * (np.eye(d) - pair.sigma)
    comps = []
    for g in groups:
        W = Z @ V[:, g]
        e = complex(eps[g].mean())
        angle = _canonical_angle(float(np.angle(e)), tol.cluster)
        real = np.hstack([W.real, W.imag])
        Y = model.orthonormalize((p_m @ real).T, rank_tol=1e-7)
        if len(Y) != len(g):
            raise RootSystemError(f"m-part of g(alpha, eps) has dimension {len(Y)}, expected {len(g)}")
        X = np.array([psi_map(root, y, model, check=False) for y in Y])
        e_unit = np.exp(1j * angle)
        rho_minus = st - pair.tau @ pair.sigma
        resid = max(
            float(np.abs(rho_minus @ y - 2 * e_unit.imag * x).max()) for x, y in zip(X, Y)
        )
        if resid > tol.relation:
            raise RootSystemError(f"rho^- characterisation fails (residual {resid:.2e})")
        comps.append(EpsComponent(angle, len(g), X, Y))
    comps.sort(key=lambda comp: comp.eps_angle)
    total = sum(comp.multiplicity for comp in comps)
    if total != root.m_alpha:
        raise RootSystemError(f"sum of m(alpha, eps) is {total}, expected {root.m_alpha}")
    return replace(root, eps_components=tuple(comps))


def _refine_g0(rs: RootSystemData) -> tuple[G0Component, ...]:
    pair = rs.pair
    model, tol = pair.model, pair.tol
    g0 = rs.g0_basis
    if len(g0) == 0:
        return ()
    U = model.to_orthonormal(g0)
    st = pair.sigma_tau
    Rm = U @ model.to_orthonormal((st @ g0.T).T).T  # orthogonal, in the g0 frame
    rho = Rm + Rm.T
    vals, vecs = np.linalg.eigh(0.5 * (rho + rho.T))
    groups = cluster_points(vals, tol.cluster, tol.guard)
    comps = []
    for g in groups:
        lam = float(np.clip(vals[g].mean() / 2, -1, 1))
        angle = 0.0 if abs(lam - 1) < tol.cluster else (np.pi if abs(lam + 1) < tol.cluster else float(np.arccos(lam)))
        sub = vecs[:, g].T @ g0
        sig = model.to_orthonormal(sub) @ model.to_orthonormal((pair.sigma @ sub.T).T).T
        sv, svec = np.linalg.eigh(0.5 * (sig + sig.T))
        kb = svec[:, sv > 0].T @ sub
        mb = svec[:, sv < 0].T @ sub
        comps.append(G0Component(angle, len(kb), len(mb), kb, mb))
    comps.sort(key=lambda comp: comp.eps_angle)
    return tuple(comps)


def refine_by_sigma_tau(rs: RootSystemData) -> RootSystemData:
    """Split every root space and ``g_0`` by the eigenvalues of ``sigma∘tau``."""
    roots = tuple(_refine_root(r, rs.pair) for r in rs.positive_roots)
    return replace(rs, positive_roots=roots, g0_eps=_refine_g0(rs))


def analyze_pair(pair: InvolutionPair, seed: int = 0) -> RootSystemData:
    """Extract and refine the restricted root system in one step."""
    return refine_by_sigma_tau(extract_root_system(pair, seed=seed))


def basis_relation_residual(rs: RootSystemData) -> float:
    """max residual of ``[eta, x] = -alpha(eta) y`` and ``[eta, y] = alpha(eta) x``."""
    model = rs.pair.model
    worst = 0.0
    for r in rs.positive_roots:
        for k, eta in enumerate(rs.pair.t_basis):
            ad = model.ad_matrix(eta)
            a = r.alpha[k]
            for comp in r.eps_components:
                for x, y in zip(comp.k_basis, comp.m_basis):
                    worst = max(worst, float(np.abs(ad @ x + a * y).max()), float(np.abs(ad @ y - a * x).max()))
    return worst


def psi_isometry_residual(rs: RootSystemData) -> float:
    """How far ``psi_alpha`` is from an isometry ``m_{alpha,eps} -> k_{alpha,eps}``."""
    model, pair = rs.pair.model, rs.pair
    worst = 0.0
    for r in rs.positive_roots:
        for comp in r.eps_components:
            if not comp.multiplicity:
                continue
            X = np.array([psi_map(r, y, model) for y in comp.m_basis])
            gram = X @ model.gram @ X.T
            worst = max(worst, float(np.abs(gram - np.eye(len(X))).max()))
            worst = max(worst, float(np.abs(pair.sigma @ X.T - X.T).max()))
            worst = max(worst, float(np.abs(comp.k_basis - X).max()))
    return worst


@dataclass(frozen=True)
class Hypotheses:
    """Declared properties of an involution pair, consumed by theorem checks."""

    reduced: bool = False
    sigma_eq_tau: bool = False
    commuting: bool = False
    simple: bool = False

    def to_dict(self) -> dict:
        return {k: bool(v) for k, v in self.__dict__.items()}


def observed_hypotheses(rs: RootSystemData, simple: bool = False) -> Hypotheses:
    pair = rs.pair
    return Hypotheses(
        reduced=rs.is_reduced(),
        sigma_eq_tau=bool(np.abs(pair.sigma - pair.tau).max(initial=0.0) < pair.tol.structural),
        commuting=pair.commutator_norm() < pair.tol.structural,
        simple=simple,
    )


__all__ = [
    "EpsComponent",
    "G0Component",
    "Hypotheses",
    "InvolutionPair",
    "InvolutionReport",
    "MaximalAbelianCertificate",
    "RootDatum",
    "RootSystemData",
    "analyze_pair",
    "basis_relation_residual",
    "canonical_split",
    "extract_root_system",
    "observed_hypotheses",
    "psi_isometry_residual",
    "psi_map",
    "refine_by_sigma_tau",
    "root_lines",
    "validate_involution",
    "verify_maximal_abelian",
]
