"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import json

import pytest

from fronttrack.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    res = run_criterion(k)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, json.dumps(res.detail, default=str, indent=1)[:4000]
