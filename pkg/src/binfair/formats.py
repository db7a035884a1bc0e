"""JSON encodings for instances, allocations and graphs.

Instance:   {"n": 2, "m": 3, "valuations": [{"type": "xos_family", "sets": [[0, 1], [2]]}, ...]}
Allocation: {"bundles": [[0], [1, 2]], "unassigned_policy": "max_bundle"}
Graph:      {"vertices": 4, "edges": [[0, 1], ...]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .core import Allocation, Instance
from .valuations import spec_from_json


class FormatError(ValueError):
    """Input file is not valid JSON or does not match the expected schema."""


def instance_to_json(inst: Instance) -> dict[str, Any]:
    return {
        "n": inst.n,
        "m": inst.m,
        "valuations": [spec.to_json() for spec in inst.valuations],
    }


def instance_from_json(obj: Any) -> Instance:
    try:
        return Instance(
            int(obj["n"]), int(obj["m"]), tuple(spec_from_json(v) for v in obj["valuations"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad instance: {exc}") from exc


def allocation_to_json(alloc: Allocation, policy: str = "max_bundle") -> dict[str, Any]:
    return {"bundles": alloc.as_lists(), "unassigned_policy": policy}


def allocation_from_json(obj: Any) -> Allocation:
    """Read ``bundles``; overlap raises :class:`~binfair.core.InvalidAllocation`."""
    try:
        bundles = obj["bundles"]
        parsed = tuple(frozenset(int(g) for g in b) for b in bundles)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad allocation: {exc}") from exc
    return Allocation(parsed)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(read_json(path))


def load_allocation(path: str | Path) -> Allocation:
    return allocation_from_json(read_json(path))
