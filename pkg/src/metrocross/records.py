"""Row formatting and CSV/JSON writers shared by the command-line tools.

Numbers are written with 12 significant digits so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

SIG_DIGITS = 12

SWEEP_COLUMNS = (
    "channel",
    "param_name",
    "param_value",
    "strategy",
    "n_uses",
    "block_qfi",
    "total_qfi",
    "bound_value",
    "classical_reference",
    "starts_converged",
    "spread",
    "seed",
)


@dataclass
class SweepRecord:
    channel: str
    param_name: str
    param_value: float
    strategy: str
    n_uses: int
    block_qfi: float
    total_qfi: float
    bound_value: float | None
    classical_reference: float | None
    starts_converged: int | None
    spread: float | None
    seed: int


def round_sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def format_value(x: Any) -> str:
    """CSV cell text: empty for missing or undefined values, 12 significant digits for floats."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if not math.isfinite(x):
            return ""
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def json_value(x: Any) -> Any:
    if isinstance(x, float):
        return round_sig(x) if math.isfinite(x) else None
    if isinstance(x, Mapping):
        return {k: json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_value(v) for v in x]
    return x


def to_csv(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(payload: Any) -> str:
    return json.dumps(json_value(payload), indent=2, sort_keys=False) + "\n"


def render(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rows, columns)
    if fmt == "json":
        return to_json([{c: row.get(c) for c in columns} for row in rows])
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")


def records_to_rows(records: Iterable[SweepRecord]) -> list[dict[str, Any]]:
    return [asdict(r) for r in records]


def write_text(path: str | Path | None, text: str, stdout) -> None:
    """Write to ``path``, or to ``stdout`` when no path (or ``-``) is given."""
    if path is None or str(path) == "-":
        stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
