from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from binfair.valuations import ValuationSpec


@dataclass(frozen=True)
class TableSpec(ValuationSpec):
    """Test-only valuation given by an explicit value per subset mask."""

    table: tuple[int, ...]

    kind = "raw_table"

    @classmethod
    def from_function(cls, m: int, fn) -> TableSpec:
        return cls(tuple(int(fn(s)) for s in range(1 << m)))

    def value(self, mask: int) -> int:
        return self.table[mask]

    def values(self, masks: np.ndarray) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)[np.asarray(masks, dtype=np.int64)]


_outcomes: dict[int, dict] = defaultdict(lambda: {"title": "", "ok": True, "notes": []})


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    entry = _outcomes[number]
    entry["title"] = title
    if call.excinfo is not None:
        entry["ok"] = False
    for key, value in item.user_properties:
        entry["notes"].append(f"{key}={value}")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        status = "PASS" if entry["ok"] else "FAIL"
        notes = f"  [{', '.join(entry['notes'])}]" if entry["notes"] else ""
        terminalreporter.write_line(f"{status}  criterion {number}: {entry['title']}{notes}")
