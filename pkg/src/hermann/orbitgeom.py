"""Phases, tangent/normal splits and principal-curvature spectra of orbits.

An orbit point ``w`` and a normal direction ``xi`` are both given in
``t``-coordinates. For a root ``alpha`` and an eigenvalue ``eps`` of
``sigma∘tau`` the phase is ``theta = alpha(w) + arg(eps) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PhaseAmbiguityError
from .numerics import DEFAULT_TOL, Tolerances, clean_array, clean_float, lattice_distance, merge_weighted
from .sympair import RootSystemData


@dataclass(frozen=True)
class OrbitPoint:
    """A point ``w`` of ``t`` in ``t``-coordinates."""

    w: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if not np.all(np.isfinite(w)):
            raise ValueError("orbit point has non-finite coordinates")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class PhaseEntry:
    """One ``(alpha, eps)`` pair evaluated at ``w``.

    ``residue`` is ``theta mod pi`` in ``[0, pi)``; it is 0 exactly for perp
    entries.
    """

    root_index: int
    alpha: np.ndarray
    eps_angle: float
    multiplicity: int
    alpha_w: float
    theta: float
    residue: float
    kind: str
    star: bool

    @property
    def cot(self) -> float:
        if self.kind == "perp":
            raise ValueError("cot(theta) is undefined on a perp phase")
        if not self.star:
            return 0.0
        return float(1.0 / np.tan(self.residue))

    def to_dict(self) -> dict:
        return {
            "alpha": clean_array(self.alpha),
            "eps_angle": clean_float(self.eps_angle),
            "multiplicity": self.multiplicity,
            "alpha_w": clean_float(self.alpha_w),
            "theta": clean_float(self.theta),
            "theta_mod_pi": clean_float(self.residue),
            "kind": self.kind,
            "star": self.star,
        }


@dataclass(frozen=True, eq=False)
class PhaseClassification:
    w: np.ndarray
    entries: tuple[PhaseEntry, ...]
    g0_top: tuple[tuple[float, int], ...]
    dim_t: int
    dim_m: int

    @property
    def top(self) -> list[PhaseEntry]:
        return [e for e in self.entries if e.kind == "top"]

    @property
    def perp(self) -> list[PhaseEntry]:
        return [e for e in self.entries if e.kind == "perp"]

    @property
    def star(self) -> list[PhaseEntry]:
        return [e for e in self.entries if e.star]

    def for_root(self, index: int) -> list[PhaseEntry]:
        return [e for e in self.entries if e.root_index == index]

    @property
    def is_regular(self) -> bool:
        return not self.perp

    @property
    def g0_tangent_dim(self) -> int:
        return sum(m for _, m in self.g0_top)

    def to_dict(self) -> dict:
        return {
            "w": clean_array(self.w),
            "regular": self.is_regular,
            "entries": [e.to_dict() for e in self.entries],
            "g0_tangent": [{"eps_angle": clean_float(a), "m_dim": m} for a, m in self.g0_top],
        }


def _lattice_test(x: float, step: float, tol: Tolerances, what: str) -> bool:
    d = lattice_distance(x, step)
    if d <= tol.phase:
        return True
    if d <= tol.guard * tol.phase:
        raise PhaseAmbiguityError(
            f"{what} = {x!r} is {d:.2e} from the lattice {step:.6g}Z, inside the guard band; "
            "give w exactly (rational multiples of pi) or move it"
        )
    return False


def _as_point(rs: RootSystemData, w) -> np.ndarray:
    w = OrbitPoint(w).w if not isinstance(w, OrbitPoint) else w.w
    if w.shape != (rs.rank,):
        raise ValueError(f"w must have {rs.rank} t-coordinates, got {w.shape[0]}")
    return w


def classify_phases(rs: RootSystemData, w, tol: Tolerances | None = None) -> PhaseClassification:
    """Sort every ``(alpha, eps)`` into top / perp and mark the star phases.

    Raises:
        ValueError: ``rs`` is not refined by ``sigma∘tau``, or ``w`` has the
            wrong length.
        PhaseAmbiguityError: a phase sits inside the lattice guard band.
    """
    if not rs.refined:
        raise ValueError("root system must be refined by sigma∘tau first")
    tol = tol or rs.pair.tol
    w = _as_point(rs, w)
    entries = []
    for idx, r in enumerate(rs.positive_roots):
        aw = float(r.alpha @ w)
        for comp in r.eps_components:
            theta = aw + comp.eps_angle / 2
            what = f"theta({list(r.alpha)}, eps angle {comp.eps_angle:.6g})"
            if _lattice_test(theta, np.pi, tol, what):
                kind, residue, star = "perp", 0.0, False
            else:
                kind = "top"
                residue = float(np.mod(theta, np.pi))
                star = not _lattice_test(theta, np.pi / 2, tol, what)
            entries.append(PhaseEntry(idx, r.alpha, comp.eps_angle, comp.multiplicity, aw, theta, residue, kind, star))
    g0_top = tuple((c.eps_angle, c.m_dim) for c in rs.g0_eps if c.eps_angle != 0.0 and c.m_dim)
    return PhaseClassification(w, tuple(entries), g0_top, rs.rank, len(rs.pair.m))


@dataclass(frozen=True)
class TangentNormal:
    tangent: int
    normal: int
    assignment: tuple[tuple[int, float, str, int], ...]

    @property
    def total(self) -> int:
        return self.tangent + self.normal


def tangent_normal_dims(pc: PhaseClassification) -> TangentNormal:
    """Dimensions of the tangent and normal spaces of the orbit through ``exp w``.

    ``assignment`` lists ``(root_index, eps_angle, 'tangent' | 'normal', mult)``.
    """
    tangent = pc.g0_tangent_dim + sum(e.multiplicity for e in pc.top)
    normal = pc.dim_t + sum(e.multiplicity for e in pc.perp)
    assign = tuple(
        (e.root_index, e.eps_angle, "tangent" if e.kind == "top" else "normal", e.multiplicity) for e in pc.entries
    )
    return TangentNormal(tangent, normal, assign)


def _xi_coords(rs: RootSystemData, xi) -> np.ndarray:
    """``xi`` as ``t``-coordinates; algebra coordinates are accepted if they lie in ``t``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    c = rs.rank
    if xi.shape == (c,):
        return xi
    model = rs.pair.model
    if xi.shape == (model.dim,):
        tb = rs.pair.t_basis
        coords = tb @ model.gram @ xi
        if model.norm(xi - coords @ tb) > 1e-8 * max(1.0, model.norm(xi)):
            raise ValueError("xi is not in t")
        return coords
    raise ValueError(f"xi must have {c} t-coordinates (or {model.dim} algebra coordinates)")


@dataclass(frozen=True)
class FiniteSpectrum:
    """Principal curvatures in direction ``xi`` as ``(value, multiplicity)``, sorted by value."""

    values: tuple[tuple[float, int], ...]
    xi: np.ndarray

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.values)

    @property
    def zero_multiplicity(self) -> int:
        return sum(m for v, m in self.values if v == 0.0)

    def as_list(self) -> list[float]:
        return [v for v, m in self.values for _ in range(m)]

    def to_rows(self) -> list[tuple[float, int]]:
        return [(clean_float(v), m) for v, m in self.values]


def finite_spectrum(rs: RootSystemData, w, xi, tol: Tolerances | None = None) -> FiniteSpectrum:
    """Eigenvalues ``-alpha(xi) cot(theta)`` of the shape operator ``A_xi`` of the orbit.

    Raises:
        ValueError: ``xi`` does not lie in ``t``.
    """
    tol = tol or rs.pair.tol
    pc = classify_phases(rs, w, tol)
    xi = _xi_coords(rs, xi)
    vals, mults = [], []
    scale = max(1.0, max((float(np.abs(r.alpha).sum()) for r in rs.positive_roots), default=1.0))
    scale *= max(1.0, float(np.abs(xi).max(initial=0.0)))
    zero = pc.g0_tangent_dim
    for e in pc.top:
        v = -float(e.alpha @ xi) * e.cot
        if abs(v) <= tol.vector * scale:
            zero += e.multiplicity
        else:
            vals.append(v)
            mults.append(e.multiplicity)
    out = []
    if vals:
        reps, ws = merge_weighted(np.array(vals), mults, tol.cluster * scale, tol.guard)
        out = [(float(r[0]), int(m)) for r, m in zip(reps, ws)]
    if zero:
        out.append((0.0, zero))
    out.sort()
    return FiniteSpectrum(tuple(out), xi)


@dataclass(frozen=True)
class CurvatureVector:
    vector: np.ndarray
    multiplicity: int
    root_index: int = -1
    eps_angle: float = 0.0


@dataclass(frozen=True, eq=False)
class CurvatureVectorSet:
    """Curvature vectors as functionals on ``t`` with multiplicities.

    ``form`` is ``"spectrum"`` for ``-cot(theta) alpha`` over all top phases or
    ``"austere"`` for ``cot(theta) alpha`` over the star phases.
    ``zero_multiplicity`` counts the tangent part coming from ``m_0``.
    """

    entries: tuple[CurvatureVector, ...]
    form: str
    zero_multiplicity: int = 0

    def merged(self, tol: float = 1e-8, guard: float = 10.0) -> list[tuple[np.ndarray, int]]:
        """Coincident vectors merged, sorted lexicographically."""
        if not self.entries:
            return []
        pts = np.array([e.vector for e in self.entries])
        reps, ws = merge_weighted(pts, [e.multiplicity for e in self.entries], tol, guard)
        reps = np.where(np.abs(reps) < tol, 0.0, reps)
        order = sorted(range(len(reps)), key=lambda i: tuple(np.round(reps[i], 9)))
        return [(reps[i], int(ws[i])) for i in order]

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "zero_multiplicity": self.zero_multiplicity,
            "entries": [{"vector": clean_array(v), "multiplicity": m} for v, m in self.merged()],
        }


def curvature_vectors(rs: RootSystemData, w, form: str = "spectrum", tol: Tolerances | None = None) -> CurvatureVectorSet:
    """The ``xi``-independent curvature vectors of the orbit through ``exp w``."""
    if form not in ("spectrum", "austere"):
        raise ValueError("form must be 'spectrum' or 'austere'")
    pc = classify_phases(rs, w, tol)
    if form == "spectrum":
        ents = [CurvatureVector(-e.cot * e.alpha, e.multiplicity, e.root_index, e.eps_angle) for e in pc.top]
    else:
        ents = [CurvatureVector(e.cot * e.alpha, e.multiplicity, e.root_index, e.eps_angle) for e in pc.star]
    return CurvatureVectorSet(tuple(ents), form, pc.g0_tangent_dim)


@dataclass(frozen=True)
class ArctanFamily:
    """The values ``-alpha(xi) / (theta + m pi)``, ``m`` in Z, each with ``multiplicity``."""

    alpha: np.ndarray
    alpha_xi: float
    theta_mod_pi: float
    multiplicity: int
    eps_angle: float = 0.0

    def value(self, m: int) -> float:
        return -self.alpha_xi / (self.theta_mod_pi + m * np.pi)


@dataclass(frozen=True)
class NpiFamily:
    """The values ``alpha(xi) / (n pi)``, ``n != 0``, each with ``multiplicity``."""

    alpha: np.ndarray
    alpha_xi: float
    multiplicity: int

    def value(self, n: int) -> float:
        return self.alpha_xi / (n * np.pi)


@dataclass(frozen=True, eq=False)
class PFSpectrum:
    arctan_families: tuple[ArctanFamily, ...]
    npi_families: tuple[NpiFamily, ...]
    xi: np.ndarray
    has_zero: bool = True

    def values(self, M: int) -> list[tuple[float, int]]:
        """Family values for ``|m| <= M`` (and ``1 <= |n| <= M``), sorted; the zero is omitted."""
        out = []
        for f in self.arctan_families:
            out += [(f.value(m), f.multiplicity) for m in range(-M, M + 1)]
        for f in self.npi_families:
            out += [(f.value(n), f.multiplicity) for n in range(-M, M + 1) if n]
        return sorted(out)

    def scaled(self, c: float) -> "PFSpectrum":
        return PFSpectrum(
            tuple(ArctanFamily(f.alpha, c * f.alpha_xi, f.theta_mod_pi, f.multiplicity, f.eps_angle) for f in self.arctan_families),
            tuple(NpiFamily(f.alpha, c * f.alpha_xi, f.multiplicity) for f in self.npi_families),
            c * self.xi,
            self.has_zero,
        )

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "xi": clean_array(self.xi),
            "zero": {"present": self.has_zero, "multiplicity": "infinite"},
            "families": [
                {
                    "kind": "arctan",
                    "alpha": clean_array(f.alpha),
                    "alpha_xi": clean_float(f.alpha_xi),
                    "eps_angle": clean_float(f.eps_angle),
                    "theta_mod_pi": clean_float(f.theta_mod_pi),
                    "multiplicity": f.multiplicity,
                }
                for f in self.arctan_families
            ]
            + [
                {
                    "kind": "npi",
                    "alpha": clean_array(f.alpha),
                    "alpha_xi": clean_float(f.alpha_xi),
                    "multiplicity": f.multiplicity,
                }
                for f in self.npi_families
            ],
        }


def pf_spectrum(rs: RootSystemData, w, xi, tol: Tolerances | None = None) -> PFSpectrum:
    """Principal curvatures of the path-group orbit over ``exp w`` in direction ``xi``.

    Raises:
        ValueError: ``xi`` does not lie in ``t``.
    """
    tol = tol or rs.pair.tol
    pc = classify_phases(rs, w, tol)
    xi = _xi_coords(rs, xi)
    scale = max(1.0, float(np.abs(xi).max(initial=0.0)))
    arctan, npi = [], []
    for idx, r in enumerate(rs.positive_roots):
        a_xi = float(r.alpha @ xi)
        if abs(a_xi) <= tol.vector * scale:
            continue
        ents = pc.for_root(idx)
        for e in ents:
            if e.kind == "top":
                arctan.append(ArctanFamily(r.alpha, a_xi, e.residue, e.multiplicity, e.eps_angle))
        perp = sum(e.multiplicity for e in ents if e.kind == "perp")
        if perp:
            npi.append(NpiFamily(r.alpha, a_xi, perp))
    return PFSpectrum(tuple(arctan), tuple(npi), xi)


@dataclass(frozen=True)
class PFBlock:
    """A multiplicity-one slice of the PF shape operator for one ``(alpha, eps)``."""

    kind: str
    alpha_xi: float
    theta_mod_pi: float = 0.0
    root_index: int = -1
    eps_angle: float = 0.0

    @property
    def lam_xi(self) -> float:
        """``<lambda, xi> = -cot(theta) alpha(xi)`` for a top block."""
        if self.kind != "top":
            return 0.0
        return float(-self.alpha_xi / np.tan(self.theta_mod_pi))


def blocks_from_phases(rs: RootSystemData, w, xi, tol: Tolerances | None = None) -> list[PFBlock]:
    pc = classify_phases(rs, w, tol)
    xi = _xi_coords(rs, xi)
    return [PFBlock(e.kind, float(e.alpha @ xi), e.residue, e.root_index, e.eps_angle) for e in pc.entries]


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    symmetrization_defect: float
    N: int
    block: PFBlock


def truncated_pf_operator(block: PFBlock, N: int) -> TruncatedOperator:
    """Finite section of the PF shape operator on one block.

    The top block acts on ``{y, x sin(n pi t), y cos(n pi t) : n <= N}``,
    the perp block on ``{x sin(n pi t), y cos(n pi t)}``. The action is
    assembled in that (non-orthonormal) basis, rescaled to the orthonormal
    one (modes have L2 norm ``1/sqrt(2)``) and symmetrised; the defect
    ``max|M - M^T|`` before symmetrising is reported.

    Raises:
        ValueError: ``N < 1`` or unknown block kind.
    """
    N = int(N)
    if N < 1:
        raise ValueError("truncation order N must be at least 1")
    a = block.alpha_xi
    n = np.arange(1, N + 1)
    c = a / (n * np.pi)
    if block.kind == "top":
        size = 2 * N + 1
        u, v = 2 * n - 1, 2 * n  # x sin, y cos
        R = np.zeros((size, size))
        R[0, 0] = block.lam_xi
        R[u, 0] = 2 * a / (n * np.pi)  # A y = <lambda,xi> y + (2a/pi) sum x sin / n
        R[0, u] = c  # A(x sin) = -c y (-1 + cos)
        R[v, u] = -c
        R[u, v] = -c  # A(y cos) = -c x sin
        norms = np.r_[1.0, np.full(2 * N, 1 / np.sqrt(2))]
    elif block.kind == "perp":
        size = 2 * N
        u, v = 2 * n - 2, 2 * n - 1
        R = np.zeros((size, size))
        R[v, u] = -c
        R[u, v] = -c
        norms = np.full(size, 1 / np.sqrt(2))
    else:
        raise ValueError(f"unknown block kind {block.kind!r}")
    M = norms[:, None] * R / norms[None, :]
    defect = float(np.abs(M - M.T).max())
    M = 0.5 * (M + M.T)
    return TruncatedOperator(M, np.linalg.eigvalsh(M), defect, N, block)


def closed_form_values(block: PFBlock, k: int) -> np.ndarray:
    """The ``k`` largest-magnitude exact eigenvalues of a block, sorted by value."""
    a = block.alpha_xi
    if block.kind == "perp":
        n = np.arange(1, k // 2 + 2)
        vals = np.r_[a / (n * np.pi), -a / (n * np.pi)]
    else:
        m = np.arange(-k - 1, k + 2)
        vals = -a / (block.theta_mod_pi + m * np.pi)
    return np.sort(vals[np.argsort(-np.abs(vals), kind="stable")[:k]])


def truncation_deviation(op: TruncatedOperator, k: int = 10) -> float:
    """Max deviation between the ``k`` largest-magnitude truncated and exact eigenvalues.

    For perp blocks all ``2N`` eigenvalues are compared with ``±alpha(xi)/(n pi)``.
    """
    ev = op.eigenvalues
    if op.block.kind == "perp":
        n = np.arange(1, op.N + 1)
        exact = np.sort(np.r_[op.block.alpha_xi / (n * np.pi), -op.block.alpha_xi / (n * np.pi)])
        return float(np.abs(np.sort(ev) - exact).max())
    top = np.sort(ev[np.argsort(-np.abs(ev), kind="stable")[:k]])
    return float(np.abs(top - closed_form_values(op.block, k)).max())


@dataclass(frozen=True)
class CurvatureAdaptedReport:
    passed: bool
    max_residual: float
    offending: tuple = ()
    checked: int = 0

    def __bool__(self):
        return self.passed


def curvature_adapted_check(rs: RootSystemData, w, blocks=None, tol: float = 1e-7) -> CurvatureAdaptedReport:
    """Every ``m_{alpha,eps}`` vector is an eigenvector of each ``ad(eta)^2`` with eigenvalue ``-alpha(eta)^2``.

    Args:
        blocks: optional replacement list of ``(root_index, basis_rows)``
            used instead of the computed bases (for negative controls).
    """
    classify_phases(rs, w)
    model = rs.pair.model
    if blocks is None:
        blocks = [(i, c.m_basis) for i, r in enumerate(rs.positive_roots) for c in r.eps_components]
    worst, offending, checked = 0.0, [], 0
    for k, eta in enumerate(rs.pair.t_basis):
        ad = model.ad_matrix(eta)
        ad2 = ad @ ad
        for idx, basis in blocks:
            a = rs.positive_roots[idx].alpha[k]
            for y in np.atleast_2d(basis):
                res = float(np.abs(ad2 @ y + a * a * y).max()) / max(1.0, float(np.abs(y).max()))
                checked += 1
                worst = max(worst, res)
                if res > tol:
                    offending.append((idx, k))
    return CurvatureAdaptedReport(not offending, worst, tuple(sorted(set(offending))), checked)


__all__ = [
    "ArctanFamily",
    "CurvatureAdaptedReport",
    "CurvatureVector",
    "CurvatureVectorSet",
    "FiniteSpectrum",
    "NpiFamily",
    "OrbitPoint",
    "PFBlock",
    "PFSpectrum",
    "PhaseClassification",
    "PhaseEntry",
    "TangentNormal",
    "TruncatedOperator",
    "blocks_from_phases",
    "classify_phases",
    "closed_form_values",
    "curvature_adapted_check",
    "curvature_vectors",
    "finite_spectrum",
    "pf_spectrum",
    "tangent_normal_dims",
    "truncated_pf_operator",
    "truncation_deviation",
]

