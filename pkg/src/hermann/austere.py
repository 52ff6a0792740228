"""Austere, minimal and totally geodesic orbits, and theorem verification.

Finite orbits are austere when their curvature-vector multiset is symmetric
under negation. For the path-group orbit each family
``alpha / (theta + m pi)`` along a root line ``R beta`` with ``alpha =
lambda beta`` has reciprocal coefficients ``(theta + m pi) / lambda``; these
split into ``lambda`` step-pi progressions, so symmetry of the infinite
multiset reduces to symmetry of finitely many offsets in ``[0, pi)`` under
``o -> -o mod pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import PhaseAmbiguityError
from .numerics import DEFAULT_TOL, Tolerances, circular_distance, clean_array, clean_float, merge_weighted
from .orbitgeom import PhaseClassification, classify_phases
from .sympair import Hypotheses, RootSystemData, root_lines


def _pc(rs: RootSystemData, w, tol) -> PhaseClassification:
    return w if isinstance(w, PhaseClassification) else classify_phases(rs, w, tol)


@dataclass(frozen=True)
class Verdict:
    """A boolean decision with the data that justifies it.

    ``matched`` holds ``(entry, partner, multiplicity)`` triples; ``unmatched``
    the entries without a partner of equal multiplicity.
    """

    value: bool
    matched: tuple = ()
    unmatched: tuple = ()

    def __bool__(self):
        return self.value

    def to_dict(self) -> dict:
        def enc(x):
            return clean_array(x) if np.ndim(x) else clean_float(x)

        return {
            "value": self.value,
            "matched": [[enc(a), enc(b), int(m)] for a, b, m in self.matched],
            "unmatched": [[enc(a), int(m)] for a, m in self.unmatched],
        }


def _negation_matching(reps: np.ndarray, weights, tol: float) -> Verdict:
    """Pair every vector with its negative of equal weight."""
    if len(reps) == 0:
        return Verdict(True)
    weights = np.asarray(weights, dtype=int)
    tree = cKDTree(reps)
    hits = tree.query_ball_point(-reps, tol)
    matched, unmatched = [], []
    for i, js in enumerate(hits):
        js = [j for j in js if weights[j] == weights[i]]
        if not js:
            unmatched.append((reps[i], int(weights[i])))
        elif i <= min(js):
            matched.append((reps[i], reps[min(js)], int(weights[i])))
    return Verdict(not unmatched, tuple(matched), tuple(unmatched))


def austere_finite(rs: RootSystemData, w, tol: Tolerances | None = None) -> Verdict:
    """Negation symmetry of ``{cot(theta) alpha}`` over the star phases.

    Raises:
        ClusteringAmbiguityError: two vectors fall inside the guard band.
    """
    tol = tol or rs.pair.tol
    pc = _pc(rs, w, tol)
    star = pc.star
    if not star:
        return Verdict(True)
    pts = np.array([e.cot * e.alpha for e in star])
    reps, ws = merge_weighted(pts, [e.multiplicity for e in star], tol.vector, tol.guard)
    return _negation_matching(reps, ws, tol.vector)


@dataclass(frozen=True)
class LineOffsets:
    base: np.ndarray
    offsets: tuple[tuple[float, int], ...]

    def negated(self) -> "LineOffsets":
        neg = tuple(sorted((float(np.mod(np.pi - o, np.pi)), m) for o, m in self.offsets))
        return LineOffsets(self.base, neg)


@dataclass(frozen=True)
class APOffsetMultiset:
    """Offsets ``[0, pi)`` of the step-pi progressions per root line."""

    lines: tuple[LineOffsets, ...]

    def negated(self) -> "APOffsetMultiset":
        return APOffsetMultiset(tuple(line.negated() for line in self.lines))

    def close_to(self, other: "APOffsetMultiset", tol: float = 1e-9) -> bool:
        if len(self.lines) != len(other.lines):
            return False
        for a, b in zip(self.lines, other.lines):
            if len(a.offsets) != len(b.offsets):
                return False
            for (oa, ma), (ob, mb) in zip(sorted(a.offsets), sorted(b.offsets)):
                if ma != mb or circular_distance(oa, ob) > tol:
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "lines": [
                {"base": clean_array(l.base), "offsets": [[clean_float(o), m] for o, m in l.offsets]}
                for l in self.lines
            ]
        }


def _merge_offsets(raw: list[tuple[float, int]], tol: float, guard: float) -> tuple[tuple[float, int], ...]:
    if not raw:
        return ()
    ang = np.array([o for o, _ in raw])
    # embed the circle R/piZ so that wrap-around neighbours are merged too
    pts = np.c_[np.cos(2 * ang), np.sin(2 * ang)] / 2
    reps, ws = merge_weighted(pts, [m for _, m in raw], tol, guard)
    offs = np.mod(np.arctan2(reps[:, 1], reps[:, 0]) / 2, np.pi)
    offs = np.where(np.abs(offs - np.pi) < tol, 0.0, offs)
    return tuple(sorted((float(o), int(m)) for o, m in zip(offs, ws)))


def ap_offsets(rs: RootSystemData, w, tol: Tolerances | None = None) -> APOffsetMultiset:
    """Offsets contributed by the star families, grouped by root line."""
    tol = tol or rs.pair.tol
    pc = _pc(rs, w, tol)
    lines = []
    for line in root_lines(rs):
        base = rs.positive_roots[line[0][0]].alpha
        ratio = dict(line)
        raw = []
        for e in pc.star:
            lam = ratio.get(e.root_index)
            if lam is None:
                continue
            for j in range(lam):
                raw.append((float(np.mod((e.residue + j * np.pi) / lam, np.pi)), e.multiplicity))
        lines.append(LineOffsets(base, _merge_offsets(raw, tol.phase, tol.guard)))
    return APOffsetMultiset(tuple(lines))


def austere_pf(rs: RootSystemData, w, tol: Tolerances | None = None) -> Verdict:
    """Negation symmetry of the path-group orbit spectrum via the offset reduction.

    Raises:
        RootSystemError: a root line carries a ratio outside ``{1, 2}``.
        ClusteringAmbiguityError: two offsets fall inside the guard band.
    """
    tol = tol or rs.pair.tol
    ap = ap_offsets(rs, w, tol)
    matched, unmatched = [], []
    for line in ap.lines:
        offs = line.offsets
        for i, (o, m) in enumerate(offs):
            target = np.mod(-o, np.pi)
            js = [j for j, (p, mp) in enumerate(offs) if mp == m and circular_distance(p, target) <= tol.phase]
            if js:
                if i <= js[0]:
                    matched.append((o, offs[js[0]][0], m))
            else:
                unmatched.append((o, m))
    return Verdict(not unmatched, tuple(matched), tuple(unmatched))


def austere_pf_windowed(rs: RootSystemData, w, M: int = 50, tol: float = 1e-9) -> bool:
    """Brute-force negation check of the path-group spectrum on a window.

    Every family value ``alpha / (theta + m pi)`` with ``|m| <= M`` and every
    ``alpha / (n pi)`` with ``1 <= |n| <= M`` is enumerated as a vector. Only
    vectors above ``max|alpha| / ((M - 1) pi)`` are compared; that window is
    complete, since every value above it comes from an enumerated index.
    """
    if M < 10:
        raise ValueError("window M must be at least 10")
    pc = _pc(rs, w, DEFAULT_TOL)
    if not rs.positive_roots:
        return True
    vecs, ws = [], []
    for e in pc.top:
        for m in range(-M, M + 1):
            vecs.append(e.alpha / (e.residue + m * np.pi))
            ws.append(e.multiplicity)
    for idx, r in enumerate(rs.positive_roots):
        perp = sum(e.multiplicity for e in pc.for_root(idx) if e.kind == "perp")
        if perp:
            for n in range(1, M + 1):
                for s in (1, -1):
                    vecs.append(r.alpha / (s * n * np.pi))
                    ws.append(perp)
    if not vecs:
        return True
    vecs = np.array(vecs)
    ws = np.array(ws)
    norms = np.linalg.norm(vecs, axis=1)
    T = max(np.linalg.norm(r.alpha) for r in rs.positive_roots) / ((M - 1) * np.pi)
    # keep the cut away from any vector norm
    while np.any(np.abs(norms - T) <= 1e3 * tol):
        T *= 1 + 1e-3
    keep = norms > T
    reps, weights = merge_weighted(vecs[keep], ws[keep], tol, guard=None)
    return _negation_matching(reps, weights, tol).value


def totally_geodesic(rs: RootSystemData, w, tol: Tolerances | None = None) -> bool:
    """All shape operators vanish: every tangent phase sits at ``pi/2 mod pi``."""
    return not _pc(rs, w, tol).star


def mean_curvature_functional(rs: RootSystemData, w, tol: Tolerances | None = None) -> np.ndarray:
    """``sum m(alpha, eps) cot(theta) alpha`` over the tangent phases."""
    pc = _pc(rs, w, tol)
    total = np.zeros(rs.rank)
    for e in pc.star:
        total += e.multiplicity * e.cot * e.alpha
    return total


def minimal_finite(rs: RootSystemData, w, tol: Tolerances | None = None) -> bool:
    """Vanishing mean curvature, tested as an equation of functionals on ``t``."""
    tol = tol or rs.pair.tol
    pc = _pc(rs, w, tol)
    H = mean_curvature_functional(rs, pc)
    scale = max(1.0, sum(e.multiplicity * abs(e.cot) * np.linalg.norm(e.alpha) for e in pc.star))
    return bool(np.linalg.norm(H) < tol.vector * scale)


def root_configuration(rs: RootSystemData) -> dict:
    """Positive roots carrying ``eps = 1`` and ``eps = -1`` components."""
    plus, minus = [], []
    for r in rs.positive_roots:
        angles = [c.eps_angle for c in r.eps_components if c.multiplicity]
        if any(abs(a) < 1e-9 for a in angles):
            plus.append(clean_array(r.alpha))
        if any(abs(a - np.pi) < 1e-9 for a in angles):
            minus.append(clean_array(r.alpha))
    return {"delta_plus": [clean_array(r.alpha) for r in rs.positive_roots], "delta_1": plus, "delta_minus_1": minus}


@dataclass(frozen=True)
class PropertyReport:
    w: np.ndarray
    austere_finite: bool
    austere_pf: bool
    totally_geodesic: bool
    minimal: bool
    certificates: dict = field(default_factory=dict)

    def chain_holds(self) -> bool:
        """``totally geodesic => austere => minimal``."""
        return (not self.totally_geodesic or self.austere_finite) and (not self.austere_finite or self.minimal)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "w": clean_array(self.w),
            "austere_finite": self.austere_finite,
            "austere_pf": self.austere_pf,
            "totally_geodesic": self.totally_geodesic,
            "minimal": self.minimal,
            "certificates": self.certificates,
        }


def analyze_properties(rs: RootSystemData, w, tol: Tolerances | None = None) -> PropertyReport:
    tol = tol or rs.pair.tol
    pc = classify_phases(rs, w, tol)
    a = austere_finite(rs, pc, tol)
    b = austere_pf(rs, pc, tol)
    certs = {
        "austere_finite": a.to_dict(),
        "austere_pf": b.to_dict(),
        "ap_offsets": ap_offsets(rs, pc, tol).to_dict(),
        "mean_curvature": clean_array(mean_curvature_functional(rs, pc)),
        "root_configuration": root_configuration(rs),
    }
    return PropertyReport(pc.w, a.value, b.value, totally_geodesic(rs, pc), minimal_finite(rs, pc, tol), certs)


def austere_by_line(rs: RootSystemData, w, tol: Tolerances | None = None) -> list[tuple[bool, bool]]:
    """Finite and path-group verdicts restricted to each root line."""
    tol = tol or rs.pair.tol
    pc = _pc(rs, w, tol)
    out = []
    for line in root_lines(rs):
        idx = {i for i, _ in line}
        star = [e for e in pc.star if e.root_index in idx]
        if star:
            pts = np.array([e.cot * e.alpha for e in star])
            reps, ws = merge_weighted(pts, [e.multiplicity for e in star], tol.vector, tol.guard)
            fin = _negation_matching(reps, ws, tol.vector).value
        else:
            fin = True
        offs = ap_offsets(rs, pc, tol)
        base = rs.positive_roots[line[0][0]].alpha
        lo = next(l for l in offs.lines if np.array_equal(l.base, base))
        pf = APOffsetMultiset((lo,)).close_to(APOffsetMultiset((lo.negated(),)), tol.phase)
        out.append((fin, pf))
    return out


@dataclass
class TheoremReport:
    """Outcome of the theorem checks over a set of sample points."""

    hypotheses: Hypotheses
    samples: int = 0
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def _count(self, name: str):
        self.checks[name] = self.checks.get(name, 0) + 1

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "hypotheses": self.hypotheses.to_dict(),
            "samples": self.samples,
            "checks": dict(sorted(self.checks.items())),
            "passed": self.passed,
            "violations": [{"check": c, "w": clean_array(w)} for c, w in self.violations],
            "b_not_a_witnesses": [clean_array(w) for w in self.witnesses],
            "skipped": [clean_array(w) for w in self.skipped],
        }


def multiplicity_lemma_violations(rs: RootSystemData) -> list[tuple[list, int, int]]:
    """Pairs ``(alpha, 2 alpha)`` with ``m(alpha) <= m(2 alpha)``."""
    bad = []
    for line in root_lines(rs, check=False):
        ratios = dict((lam, i) for i, lam in line)
        if 1 in ratios and 2 in ratios:
            m1 = rs.positive_roots[ratios[1]].m_alpha
            m2 = rs.positive_roots[ratios[2]].m_alpha
            if not m1 > m2:
                bad.append((clean_array(rs.positive_roots[ratios[1]].alpha), m1, m2))
    return bad


def verify_theorems(rs: RootSystemData, w_samples, hypotheses: Hypotheses, tol: Tolerances | None = None) -> TheoremReport:
    """Check the implications that the declared hypotheses promise.

    Always checked: ``TG => A => minimal`` and ``m(alpha) > m(2 alpha)``.
    Reduced: ``A <=> B``. ``sigma = tau``: ``A <=> B <=> TG``. Commuting or
    simple: ``A => B``. Points in the phase guard band are skipped and listed.
    """
    tol = tol or rs.pair.tol
    rep = TheoremReport(hypotheses)
    # one lemma check per collinear pair (alpha, 2 alpha)
    rep.checks["lemma_multiplicity"] = sum(
        1 for line in root_lines(rs, check=False) if {lam for _, lam in line} >= {1, 2}
    )
    for alpha, m1, m2 in multiplicity_lemma_violations(rs):
        rep.violations.append((f"lemma_multiplicity m({alpha})={m1} <= m(2alpha)={m2}", np.zeros(rs.rank)))
    for w in w_samples:
        try:
            pr = analyze_properties(rs, w, tol)
        except PhaseAmbiguityError:
            rep.skipped.append(np.asarray(w, dtype=float))
            continue
        rep.samples += 1
        A, B, TG = pr.austere_finite, pr.austere_pf, pr.totally_geodesic
        rep._count("chain")
        if not pr.chain_holds():
            rep.violations.append(("chain", pr.w))
        if hypotheses.reduced:
            rep._count("reduced_equivalence")
            if A != B:
                rep.violations.append(("reduced_equivalence", pr.w))
        if hypotheses.sigma_eq_tau:
            rep._count("sigma_eq_tau_equivalence")
            if not A == B == TG:
                rep.violations.append(("sigma_eq_tau_equivalence", pr.w))
        if hypotheses.commuting or hypotheses.simple:
            rep._count("implication")
            if A and not B:
                rep.violations.append(("implication", pr.w))
        if B and not A:
            rep.witnesses.append(pr.w)
    return rep


def search_counterexample(rs: RootSystemData, grid, tol: Tolerances | None = None) -> list[np.ndarray]:
    """Points where the orbit is minimal, not austere, yet its path-group orbit is austere."""
    out = []
    for w in grid:
        try:
            pr = analyze_properties(rs, w, tol)
        except PhaseAmbiguityError:
            continue
        if pr.minimal and not pr.austere_finite and pr.austere_pf:
            out.append(pr.w)
    return out


def _guard_safe(rs: RootSystemData, w, tol: Tolerances) -> bool:
    try:
        classify_phases(rs, w, tol)
    except PhaseAmbiguityError:
        return False
    return True


def axis_grid(rs: RootSystemData, start: float, stop: float, count: int, tol: Tolerances | None = None) -> list[np.ndarray]:
    """Product grid with ``count`` points per axis on ``[start, stop)``, minus guard-band points."""
    tol = tol or rs.pair.tol
    if count < 1:
        raise ValueError("grid count must be positive")
    axis = start + (stop - start) * np.arange(count) / count
    mesh = np.stack(np.meshgrid(*([axis] * rs.rank), indexing="ij"), -1).reshape(-1, rs.rank)
    return [w for w in mesh if _guard_safe(rs, w, tol)]


def default_grid(rs: RootSystemData, n_points: int = 200, tol: Tolerances | None = None) -> list[np.ndarray]:
    """At least ``n_points`` guard-safe points on ``[0, pi)^c``.

    The per-axis count is a multiple of 8 so that ``pi/8`` lies on the grid.
    """
    c = rs.rank
    if c == 0:
        return [np.zeros(0)]
    k = int(np.ceil(n_points ** (1 / c) - 1e-9))
    k = 8 * int(np.ceil(k / 8))
    while True:
        pts = axis_grid(rs, 0.0, np.pi, k, tol)
        if len(pts) >= n_points:
            return pts
        k += 8


def random_points(rs: RootSystemData, n: int, seed: int = 0, tol: Tolerances | None = None) -> list[np.ndarray]:
    """``n`` guard-safe uniform points of ``[0, pi)^c``."""
    tol = tol or rs.pair.tol
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        w = rng.uniform(0, np.pi, rs.rank)
        if _guard_safe(rs, w, tol):
            out.append(w)
    return out


__all__ = [
    "APOffsetMultiset",
    "LineOffsets",
    "PropertyReport",
    "TheoremReport",
    "Verdict",
    "analyze_properties",
    "ap_offsets",
    "austere_by_line",
    "austere_finite",
    "austere_pf",
    "austere_pf_windowed",
    "axis_grid",
    "default_grid",
    "mean_curvature_functional",
    "minimal_finite",
    "multiplicity_lemma_violations",
    "random_points",
    "root_configuration",
    "search_counterexample",
    "totally_geodesic",
    "verify_theorems",
]
