"""Canonical notification-log rendering.

One JSON object per line, keys in the fixed order produced by
Notification.to_record, distances already rounded to 0.1 m and scores to
4 decimals. Replaying the same trace must yield byte-identical files.
"""

from __future__ import annotations

import json
from typing import Iterable

from .notify import Notification


def render_record(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def render_log(notifications: Iterable[Notification]) -> str:
    lines = [render_record(n.to_record()) for n in notifications]
    return "".join(line + "\n" for line in lines)


def write_log(notifications: Iterable[Notification], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_log(notifications))
