"""Result records: JSON lines with sorted keys, plus CSV summaries.

One record per grid cell.  Values are rounded through ``repr`` of the
float, so identical runs produce byte-identical lines; the timestamp is
carried separately and excluded from equality comparisons.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class ResultRecord:
    command: str
    config_hash: str
    quantity: str
    keys: dict
    value: float
    exact: bool
    ci: tuple[float, float] | None = None
    timestamp: float = 0.0

    def payload(self, with_timestamp: bool = True) -> dict:
        out = {
            "command": self.command,
            "config": self.config_hash,
            "quantity": self.quantity,
            "value": self.value,
            "exact": self.exact,
        }
        out.update({f"key.{k}": v for k, v in self.keys.items()})
        if self.ci is not None:
            out["ci_lo"], out["ci_hi"] = self.ci
        if with_timestamp:
            out["timestamp"] = self.timestamp
        return out

    def to_json(self, with_timestamp: bool = True) -> str:
        return json.dumps(self.payload(with_timestamp), sort_keys=True)


def stamp(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    now = time.time()
    return [ResultRecord(**{**r.__dict__, "timestamp": now}) for r in records]


def write_jsonl(records: Sequence[ResultRecord], path: str | None,
                stream=None) -> None:
    lines = [r.to_json() for r in records]
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    elif stream is not None:
        for line in lines:
            stream.write(line + "\n")


def summary_csv(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    fields = sorted({k for row in rows for k in row})
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
