from __future__ import annotations

import pytest

from courseforge.beamer.report import REPORT_KINDS, render_success_table, success_report
from courseforge.errors import InvalidDocument
from courseforge.review.rubric import OutputKind


def counts(sl: tuple[int, int], others: tuple[int, int] = (400, 400)):
    table = {kind: others for kind in REPORT_KINDS}
    table[OutputKind.SL] = sl
    return table


def test_per_kind_rates_reproduce_reference_row():
    row = success_report(counts((231, 400)), label="gpt-4o")
    assert row.formatted(OutputKind.SL) == "57.75%"
    assert row.formatted_average == "91.55%"
    for kind in (OutputKind.LO, OutputKind.SY, OutputKind.SC, OutputKind.AS):
        assert row.formatted(kind) == "100.00%"


def test_all_success_is_100_everywhere():
    row = success_report(counts((10, 10), others=(10, 10)), label="x")
    assert all(row.formatted(kind) == "100.00%" for kind in REPORT_KINDS)
    assert row.formatted_average == "100.00%"


def test_three_of_eight_decks():
    row = success_report(counts((3, 8)), label="x")
    assert row.formatted(OutputKind.SL) == "37.50%"
    assert row.formatted_average == "87.50%"


def test_counts_validation():
    with pytest.raises(InvalidDocument):
        success_report(counts((5, 0)))
    with pytest.raises(InvalidDocument):
        success_report(counts((9, 8)))
    with pytest.raises(InvalidDocument):
        success_report({OutputKind.SL: (1, 1)})


def test_render_table_layout():
    table = render_success_table([success_report(counts((231, 400)), label="gpt-4o")])
    lines = table.splitlines()
    assert lines[0] == "| Model | LO | SY | SL | SC | AS | Avg |"
    assert "| gpt-4o | 100.00% | 100.00% | 57.75% | 100.00% | 100.00% | 91.55% |" in table
