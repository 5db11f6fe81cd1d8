"""Runs every acceptance criterion at its stated tolerance.

One ``[PASS]``/``[FAIL]`` line per criterion is printed in the terminal
summary (see ``conftest.py``) so the outcome is visible without ``-s``.
"""

import json

import pytest

from pfaffgeom import acceptance

RESULTS = {}


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: f"criterion_{c.__name__.split('_')[1]}")
def test_criterion(criterion):
    result = criterion()
    RESULTS[result["id"]] = result
    line = f"[{'PASS' if result['passed'] else 'FAIL'}] {result['id']:>2} {result['name']}"
    print(line)
    assert result["passed"], line + "\n" + json.dumps(result["measured"], indent=2, default=str)
