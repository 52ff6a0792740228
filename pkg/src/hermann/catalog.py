"""Concrete involution pairs on su(n) with embedded ground-truth records."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import HermannError, MaximalAbelianError
from .liealg import LieAlgebraModel
from .numerics import DEFAULT_TOL, Tolerances
from .sympair import Hypotheses, InvolutionPair, RootSystemData, observed_hypotheses

DEFAULT_CAP = 8
# with -1/2 Re tr(XY) every basis element below has unit norm
SU_METRIC_SCALE = 0.5


def _unit(n: int, j: int, k: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[j, k] = 1.0
    return e


def su_basis(n: int) -> np.ndarray:
    """Orthonormal basis of su(n) for ``<X, Y> = -1/2 Re tr(XY)``.

    Order: ``i(E_jk + E_kj)`` and ``E_jk - E_kj`` for ``j < k`` (lexicographic),
    then the diagonal elements ``i D_k``.
    """
    if n < 2:
        raise ValueError("su(n) needs n >= 2")
    mats = []
    for j, k in combinations(range(n), 2):
        mats.append(1j * (_unit(n, j, k) + _unit(n, k, j)))
        mats.append(_unit(n, j, k) - _unit(n, k, j))
    for k in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        d[np.arange(k), np.arange(k)] = 1.0
        d[k, k] = -k
        mats.append(1j * np.sqrt(2.0 / (k * (k + 1))) * d)
    return np.array(mats)


def su_model(n: int, tol: Tolerances = DEFAULT_TOL) -> LieAlgebraModel:
    return LieAlgebraModel(su_basis(n), metric_scale=SU_METRIC_SCALE, tol=tol, name=f"su({n})")


def linear_map(model: LieAlgebraModel, fn) -> np.ndarray:
    """Coordinate matrix of a real-linear map given on matrices."""
    cols = [model.coords(fn(b)) for b in model.basis]
    return np.array(cols).T if cols else np.zeros((0, 0))


def conjugation_by(model: LieAlgebraModel, g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    ginv = np.linalg.inv(g)
    return linear_map(model, lambda x: g @ x @ ginv)


def complex_conjugation(model: LieAlgebraModel) -> np.ndarray:
    return linear_map(model, np.conj)


def signature_matrix(n_minus: int, n_plus: int) -> np.ndarray:
    """``diag(-E_{n_minus}, E_{n_plus})``."""
    return np.diag(np.r_[-np.ones(n_minus), np.ones(n_plus)]).astype(complex)


@dataclass(frozen=True)
class CatalogEntry:
    """Descriptor of a catalog pair together with its expected data.

    ``expected`` holds ``roots`` as ``[coords, m_alpha, {eps_angle: mult}]``
    triples and ``points`` mapping a name to ``{"w": ..., "verdicts": ...}``.
    """

    name: str
    params: dict
    flags: Hypotheses
    expected: dict = field(default_factory=dict)
    description: str = ""

    def to_dict(self) -> dict:
        roots = [
            {"alpha": list(map(float, a)), "multiplicity": m, "eps": {str(k): v for k, v in sorted(e.items())}}
            for a, m, e in self.expected.get("roots", [])
        ]
        points = {
            k: {"w": list(map(float, v["w"])), "verdicts": dict(sorted(v["verdicts"].items()))}
            for k, v in sorted(self.expected.get("points", {}).items())
        }
        return {
            "name": self.name,
            "params": dict(sorted(self.params.items())),
            "flags": self.flags.to_dict(),
            "description": self.description,
            "expected": {"roots": roots, "points": points} if self.expected else {},
        }


def _check_cap(n: int, cap: int):
    if n > cap:
        raise ValueError(f"matrix size {n} exceeds the cap {cap}")


def _su_pq_expected(p: int, q: int) -> dict:
    roots = []
    for i in range(q):
        e = np.zeros(q)
        e[i] = 1.0
        roots.append((tuple(e), 2 * (p - q), {0.0: p - q, np.pi: p - q}))
        roots.append((tuple(2 * e), 1, {np.pi: 1}))
    for i, j in combinations(range(q), 2):
        for s in (1.0, -1.0):
            a = np.zeros(q)
            a[i], a[j] = 1.0, s
            roots.append((tuple(a), 2, {0.0: 1, np.pi: 1}))
    w = tuple(np.full(q, np.pi / 8))
    verdicts = {
        "austere_finite": False,
        "austere_pf": p - q == 1,
        "minimal": p - q == 1,
        "totally_geodesic": False,
    }
    return {"roots": roots, "points": {"counterexample": {"w": w, "verdicts": verdicts}}}


def su_pq_t_basis(model: LieAlgebraModel, p: int, q: int) -> np.ndarray:
    """The elements ``e_i = i(E_{i,p+i} + E_{p+i,i})``, ``i < q``."""
    n = p + q
    return np.array([model.coords(1j * (_unit(n, i, p + i) + _unit(n, p + i, i))) for i in range(q)])


def build_su_pq_so(p: int, q: int, cap: int = DEFAULT_CAP, tol: Tolerances = DEFAULT_TOL):
    """``su(p+q)`` with ``sigma = Ad(diag(-E_p, E_q))`` and ``tau`` complex conjugation.

    Returns:
        (InvolutionPair, CatalogEntry)
    """
    p, q = int(p), int(q)
    if not p > q >= 1:
        raise ValueError(f"su_pq_so needs p > q >= 1, got p={p}, q={q}")
    _check_cap(p + q, cap)
    model = su_model(p + q, tol)
    sigma = conjugation_by(model, signature_matrix(p, q))
    tau = complex_conjugation(model)
    pair = InvolutionPair.build(model, sigma, tau, su_pq_t_basis(model, p, q), tol)
    entry = CatalogEntry(
        "su_pq_so",
        {"p": p, "q": q},
        Hypotheses(reduced=False, sigma_eq_tau=False, commuting=True, simple=True),
        _su_pq_expected(p, q),
        f"(SU({p + q}), S(U({p}) x U({q})), SO({p + q}))",
    )
    return pair, entry


def diagonal_t_basis(model: LieAlgebraModel) -> np.ndarray:
    """Coordinates of the traceless diagonal elements ``i D_k``."""
    n = model.size
    return np.array([model.coords(b) for b in su_basis(n)[n * (n - 1):]])


def build_sigma_eq_tau_su_so(n: int, cap: int = DEFAULT_CAP, tol: Tolerances = DEFAULT_TOL):
    """``su(n)`` with ``sigma = tau`` = complex conjugation (K = H = SO(n))."""
    n = int(n)
    if n < 3:
        raise ValueError(f"sigma_eq_tau needs n >= 3, got n={n}")
    _check_cap(n, cap)
    model = su_model(n, tol)
    tau = complex_conjugation(model)
    t = diagonal_t_basis(model)
    pair = InvolutionPair.build(model, tau, tau, t, tol)
    # roots e_j - e_k in the D-basis: coefficient of D_l is the D_l-entry difference
    diag = np.array([np.diag(-1j * su_basis(n)[n * (n - 1) + l]).real for l in range(n - 1)])
    roots = []
    for j, k in combinations(range(n), 2):
        a = diag[:, j] - diag[:, k]
        if a[np.flatnonzero(np.abs(a) > 1e-12)[0]] < 0:
            a = -a
        roots.append((tuple(a), 1, {0.0: 1}))
    entry = CatalogEntry(
        "sigma_eq_tau",
        {"n": n},
        Hypotheses(reduced=True, sigma_eq_tau=True, commuting=True, simple=True),
        {"roots": roots, "points": {"origin": {"w": tuple(np.zeros(n - 1)), "verdicts": {
            "austere_finite": True, "austere_pf": True, "minimal": True, "totally_geodesic": True}}}},
        f"(SU({n}), SO({n}), SO({n}))",
    )
    return pair, entry


def default_commuting_t(model: LieAlgebraModel, sig_s, sig_t) -> np.ndarray:
    """Greedy choice of ``i(E_jk + E_kj)`` over disjoint index pairs with both signs differing."""
    n = model.size
    used = set()
    t = []
    for j, k in combinations(range(n), 2):
        if j in used or k in used:
            continue
        if sig_s[j] != sig_s[k] and sig_t[j] != sig_t[k]:
            used.update((j, k))
            t.append(model.coords(1j * (_unit(n, j, k) + _unit(n, k, j))))
    return np.array(t).reshape(-1, model.dim)


# reduced flags established by extracting the root systems of these entries
_COMMUTING_REDUCED = {(4, 2, 2, 3, 1): False, (5, 3, 2, 4, 1): False, (4, 2, 2, 2, 2): True}


def build_commuting_su(n, pq, rs, t_basis=None, cap: int = DEFAULT_CAP, tol: Tolerances = DEFAULT_TOL):
    """``su(n)`` with ``sigma = Ad(I_pq)`` and ``tau = Ad(I_rs)``.

    Raises:
        ValueError: parameters out of range.
        MaximalAbelianError: the supplied (or default) ``t`` fails verification.
    """
    n = int(n)
    p, q = map(int, pq)
    r, s = map(int, rs)
    if p + q != n or r + s != n or min(p, q, r, s) < 0:
        raise ValueError(f"need p+q = r+s = n with nonnegative parts, got n={n}, ({p},{q}), ({r},{s})")
    _check_cap(n, cap)
    model = su_model(n, tol)
    I_s, I_t = signature_matrix(p, q), signature_matrix(r, s)
    sigma = conjugation_by(model, I_s)
    tau = conjugation_by(model, I_t)
    if t_basis is None:
        t_basis = default_commuting_t(model, np.diag(I_s).real, np.diag(I_t).real)
    pair = InvolutionPair.build(model, sigma, tau, t_basis, tol)
    reduced = _COMMUTING_REDUCED.get((n, p, q, r, s))
    if reduced is None:
        from .sympair import extract_root_system

        reduced = extract_root_system(pair).is_reduced()
    entry = CatalogEntry(
        "commuting_su",
        {"n": n, "p": p, "q": q, "r": r, "s": s},
        Hypotheses(reduced=bool(reduced), sigma_eq_tau=(p, q) == (r, s), commuting=True, simple=True),
        {},
        f"su({n}) with Ad(I_{p}{q}) and Ad(I_{r}{s})",
    )
    return pair, entry


_BUILDERS = {
    "su_pq_so": (build_su_pq_so, {"p": 2, "q": 1}, "p > q >= 1, p + q <= cap"),
    "sigma_eq_tau": (build_sigma_eq_tau_su_so, {"n": 3}, "3 <= n <= cap"),
    "commuting_su": (
        lambda n, p, q, r, s, **kw: build_commuting_su(n, (p, q), (r, s), **kw),
        {"n": 4, "p": 2, "q": 2, "r": 3, "s": 1},
        "p + q = r + s = n <= cap",
    ),
}


def list_catalog() -> list[dict]:
    """Deterministic descriptors of the available builders."""
    return [
        {"name": name, "defaults": dict(defaults), "ranges": ranges}
        for name, (_, defaults, ranges) in _BUILDERS.items()
    ]


def build_entry(name: str, params: dict | None = None, cap: int = DEFAULT_CAP, tol: Tolerances = DEFAULT_TOL):
    """Build a catalog entry by name; missing parameters take the defaults.

    Raises:
        KeyError: unknown entry name.
    """
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}; choose from {sorted(_BUILDERS)}")
    fn, defaults, _ = _BUILDERS[name]
    merged = dict(defaults)
    for k, v in (params or {}).items():
        if k not in defaults:
            raise KeyError(f"entry {name!r} has no parameter {k!r}")
        merged[k] = int(v)
    return fn(**merged, cap=cap, tol=tol)


def verify_flags(entry: CatalogEntry, rs: RootSystemData) -> dict:
    """Compare the declared hypothesis flags with those observed on ``rs``.

    Returns:
        mapping flag -> (declared, observed) for every mismatching flag.
    """
    obs = observed_hypotheses(rs, simple=entry.flags.simple)
    out = {}
    for key in ("reduced", "sigma_eq_tau", "commuting"):
        if getattr(entry.flags, key) != getattr(obs, key):
            out[key] = (getattr(entry.flags, key), getattr(obs, key))
    return out


def match_expected_roots(entry: CatalogEntry, rs: RootSystemData, tol: float = 1e-7) -> list[str]:
    """Differences between the embedded root record and extracted roots (empty if equal)."""
    problems = []
    expected = entry.expected.get("roots")
    if expected is None:
        return problems
    seen = set()
    for coords, m, eps in expected:
        try:
            idx = rs.root_index(np.array(coords), tol)
        except KeyError:
            problems.append(f"missing root {coords}")
            continue
        seen.add(idx)
        r = rs.positive_roots[idx]
        if r.m_alpha != m:
            problems.append(f"root {coords}: m = {r.m_alpha}, expected {m}")
        if r.eps_components:
            got = {}
            for c in r.eps_components:
                got[round(c.eps_angle, 9)] = got.get(round(c.eps_angle, 9), 0) + c.multiplicity
            want = {round(a, 9): v for a, v in eps.items() if v}
            if got != want:
                problems.append(f"root {coords}: eps split {got}, expected {want}")
    for i, r in enumerate(rs.positive_roots):
        if i not in seen:
            problems.append(f"unexpected root {list(r.alpha)}")
    return problems


__all__ = [
    "CatalogEntry",
    "DEFAULT_CAP",
    "HermannError",
    "MaximalAbelianError",
    "build_commuting_su",
    "build_entry",
    "build_sigma_eq_tau_su_so",
    "build_su_pq_so",
    "complex_conjugation",
    "conjugation_by",
    "list_catalog",
    "match_expected_roots",
    "su_basis",
    "su_model",
    "verify_flags",
]
