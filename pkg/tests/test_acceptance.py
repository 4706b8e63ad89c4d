"""Acceptance matrix: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

from __future__ import annotations

import pytest

from rperm.suite import DEFAULT_SEED, run_criterion

# stated runtime ceilings in seconds
LIMITS = {1: 60, 2: 60, 3: 1, 4: 30, 5: 5, 6: 120, 7: 120, 8: 30, 9: 30, 10: 10, 11: 10, 12: 5, 13: 30}


@pytest.mark.parametrize("number", sorted(LIMITS))
def test_criterion(number):
    row = run_criterion(number, seed=DEFAULT_SEED)
    print(f"\n{'PASS' if row.ok else 'FAIL'} criterion {number}: {row.name}: {row.detail} ({row.seconds:.2f}s)")
    assert row.seconds < LIMITS[number], f"took {row.seconds:.1f}s, limit {LIMITS[number]}s"
    assert row.ok, row.detail
