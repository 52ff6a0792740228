from functools import lru_cache

import pytest

from hermann.catalog import build_entry
from hermann.sympair import analyze_pair

SU_PQ = [(2, 1), (3, 1), (3, 2), (4, 2)]
ALL_ENTRIES = [
    ("su_pq_so", {"p": 2, "q": 1}),
    ("su_pq_so", {"p": 3, "q": 1}),
    ("su_pq_so", {"p": 3, "q": 2}),
    ("su_pq_so", {"p": 4, "q": 2}),
    ("sigma_eq_tau", {"n": 3}),
    ("sigma_eq_tau", {"n": 4}),
    ("commuting_su", {"n": 4, "p": 2, "q": 2, "r": 3, "s": 1}),
    ("commuting_su", {"n": 5, "p": 3, "q": 2, "r": 4, "s": 1}),
]


def entry_id(item):
    name, params = item
    return name + "-" + "-".join(f"{k}{v}" for k, v in params.items())


@lru_cache(maxsize=None)
def _cached(name, items):
    pair, entry = build_entry(name, dict(items))
    return pair, entry, analyze_pair(pair)


def built(name, **params):
    """(pair, entry, refined root system), cached across tests."""
    return _cached(name, tuple(sorted(params.items())))


@pytest.fixture(params=ALL_ENTRIES, ids=entry_id)
def any_entry(request):
    name, params = request.param
    return built(name, **params)
