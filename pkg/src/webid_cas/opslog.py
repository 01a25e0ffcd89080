"""Process-local operation-coverage recorder.

The demo workflow is expected to touch every core operation; integration
tests reset this registry, run the workflow in-process, and assert on the
recorded set. Recording is a single set.add per call, cheap enough to leave
always on.
"""

from __future__ import annotations

_RECORDED: set[str] = set()


def note(operation: str) -> None:
    _RECORDED.add(operation)


def recorded() -> frozenset[str]:
    return frozenset(_RECORDED)


def reset() -> None:
    _RECORDED.clear()
