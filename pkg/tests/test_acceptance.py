"""Acceptance checks, one per criterion.  Each prints a PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` for just the summary lines.
"""
import sys

import pytest

from plconf.harness import CRITERIA, run_criterion

SEED = 0
_cache: dict = {}


def result(number: int):
    if number not in _cache:
        _cache[number] = run_criterion(number, SEED)
    return _cache[number]


def report(capsys, number: int):
    r = result(number)
    with capsys.disabled():
        print(f"\n{r.line}")
        if not r.passed:
            print(f"        details: {r.details}")
    return r


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(capsys, number):
    r = report(capsys, number)
    assert r.passed, r.details


def test_nonlamplike_product_exponent_is_five():
    rows = result(4).details
    assert [v["prod_k"] for k, v in rows.items() if k.startswith("nonlamplike")] == [5, 5]


def test_slope_at_one_third():
    # 2^2 = 4 = 1 mod 3, so the fixing slope is 4
    assert result(3).details["one_third"] is True


def test_number_theory_against_plain_closure():
    # recompute the closure of {3} up to 10^6 without the library and recheck the estimate
    N, found, frontier = 10**6, {3}, [3]
    while frontier:
        nxt = [c for s in frontier for c in (2 * s, 32 * s - 1, 32 * s + 1) if c <= N and c not in found]
        found.update(nxt)
        frontier = nxt
    far = [j for j in found if not any(16 * abs(j - (3 << p)) < (1 << p) for p in range(j.bit_length() + 1))]
    assert far == [] == result(8).details["violations"]
    assert result(8).details["odd_set"][0] == 3


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        r = run_criterion(k, SEED)
        print(r.line)
        failed += not r.passed
    sys.exit(1 if failed else 0)
