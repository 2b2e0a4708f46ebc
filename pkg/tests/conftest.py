"""Shared fixtures and brute-force oracles.

The oracles below re-derive validity straight from the feature definitions,
without touching the library's compiled masks, so they can check it.
"""

from itertools import product

import numpy as np
import pytest

from fmlearn import bundled_model, configuration
from fmlearn.model import ALTERNATIVE, MANDATORY, REQUIRES


@pytest.fixture(scope="session")
def webapp():
    return bundled_model("webapp")


@pytest.fixture(scope="session")
def webapp_evolved():
    return bundled_model("webapp-evolved")


@pytest.fixture
def start_config():
    return configuration("WebApplication", "DataLogging", "Max", "ContentDiscovery", "Recommendation")


def brute_valid(model, active) -> bool:
    """Validity of a set of feature ids, straight from the definitions."""
    active = set(active)
    feats = model.features
    if any(f not in feats for f in active):
        return False
    root = next(f for f, v in feats.items() if v.parent is None)
    if root not in active:
        return False
    for fid in active:
        f = feats[fid]
        if f.parent is not None and f.parent not in active:
            return False
        members = [c for c in f.children if feats[c].group is not None]
        for c in f.children:
            if feats[c].variability == MANDATORY and c not in active:
                return False
        if members:
            on = sum(1 for c in members if c in active)
            if feats[members[0]].group == ALTERNATIVE and on != 1:
                return False
            if on < 1:
                return False
    for con in model.constraints:
        lhs = all(f in active for f in con.lhs)
        rhs = any(f in active for f in con.rhs)
        if con.kind == REQUIRES and lhs and not rhs:
            return False
        if con.kind != REQUIRES and lhs and rhs:
            return False
    return True


def brute_enumerate(model) -> set[frozenset]:
    """Every subset of the features that is valid, by exhaustive search.

    Vectorised over all 2^n subsets with numpy, so models with up to about
    20 features take well under a second.
    """
    ids = sorted(model.features)
    n = len(ids)
    pos = {f: i for i, f in enumerate(ids)}
    x = np.arange(1 << n, dtype=np.int64)
    bit = {f: (x >> pos[f]) & 1 for f in ids}
    ok = np.ones(1 << n, dtype=bool)
    feats = model.features
    for fid, f in feats.items():
        if f.parent is None:
            ok &= bit[fid] == 1
            continue
        ok &= bit[fid] <= bit[f.parent]
        if f.variability == MANDATORY:
            ok &= bit[fid] >= bit[f.parent]
    for fid, f in feats.items():
        members = [c for c in f.children if feats[c].group is not None]
        if not members:
            continue
        on = sum(bit[c] for c in members)
        parent_on = bit[fid] == 1
        if feats[members[0]].group == ALTERNATIVE:
            ok &= ~parent_on | (on == 1)
        else:
            ok &= ~parent_on | (on >= 1)
    for con in model.constraints:
        lhs = np.ones(1 << n, dtype=bool)
        for f in con.lhs:
            lhs &= bit[f] == 1
        rhs = np.zeros(1 << n, dtype=bool)
        for f in con.rhs:
            rhs |= bit[f] == 1
        ok &= ~(lhs & ~rhs) if con.kind == REQUIRES else ~(lhs & rhs)
    out = set()
    for v in np.nonzero(ok)[0]:
        out.add(frozenset(ids[i] for i in range(n) if (int(v) >> i) & 1))
    return out


def as_sets(configs) -> set[frozenset]:
    return {frozenset(c.active) for c in configs}


def all_subsets(ids):
    ids = list(ids)
    for bits in product((0, 1), repeat=len(ids)):
        yield {f for f, b in zip(ids, bits) if b}


# --------------------------------------------------------- acceptance

_VERDICTS: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and print it."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
