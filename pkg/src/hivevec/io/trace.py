"""Run traces: one JSON object per line.

Record kinds, in file order::

    {"kind": "start", "width": 256, "height": 256, "initial_paths": 16, ...}
    {"kind": "iter", "iteration": 0, "loss": 0.0123, "paths": 16, "psnr": 19.2}
    {"kind": "control", "iteration": 200, "pruned": [3], "split": [], "cloned": [[5, [0.6, -0.8]]], ...}
    {"kind": "end", "final_paths": 18, "final_psnr": 31.4, "final_loss": 0.0002}

``psnr`` appears every 25 iterations. An exact reconstruction is written
as the string ``"exact"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("start", "iter", "control", "end")


class TraceError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def encode_psnr(value: float):
    return "exact" if math.isinf(value) else round(float(value), 6)


def decode_psnr(value) -> float:
    return math.inf if value == "exact" else float(value)


@dataclass
class RunTrace:
    records: list[dict] = field(default_factory=list)

    def append(self, record: dict) -> None:
        self.records.append(record)

    def of_kind(self, kind: str) -> list[dict]:
        return [r for r in self.records if r.get("kind") == kind]

    @property
    def losses(self) -> list[float]:
        return [r["loss"] for r in self.of_kind("iter")]

    @property
    def events(self) -> list[dict]:
        return self.of_kind("control")

    @property
    def final_psnr(self) -> float:
        end = self.of_kind("end")
        if not end:
            raise ValueError("trace has no end record")
        return decode_psnr(end[-1]["final_psnr"])

    def to_text(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


def write_trace(trace: RunTrace, path) -> None:
    Path(path).write_text(trace.to_text(), encoding="utf-8")


def parse_trace(text: str) -> RunTrace:
    trace = RunTrace()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(lineno, f"not valid JSON ({exc.msg})") from None
        if not isinstance(rec, dict) or rec.get("kind") not in KINDS:
            raise TraceError(lineno, "record must be an object with kind in " + ", ".join(KINDS))
        try:
            _check_record(rec)
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceError(lineno, f"malformed {rec['kind']} record ({exc})") from None
        trace.append(rec)
    return trace


def _check_record(rec: dict) -> None:
    kind = rec["kind"]
    if kind == "start":
        int(rec["initial_paths"])
    elif kind == "iter":
        int(rec["iteration"])
        float(rec["loss"])
    elif kind == "control":
        int(rec["iteration"])
        for key in ("pruned", "split", "cloned"):
            if not isinstance(rec[key], list):
                raise TypeError(f"{key} must be a list")
    elif kind == "end":
        int(rec["final_paths"])


def read_trace(path) -> RunTrace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def event_rows(trace: RunTrace) -> list[tuple[int, int, int, int]]:
    """``(iteration, pruned, split, cloned)`` counts per control event."""
    return [(int(e["iteration"]), len(e["pruned"]), len(e["split"]), len(e["cloned"])) for e in trace.events]


def path_ledger(trace: RunTrace) -> dict:
    """Recompute the final path count from the initial count and every event.

    A split replaces one path by two, so it adds one path, the same as a clone.
    """
    start = trace.of_kind("start")
    end = trace.of_kind("end")
    initial = int(start[0]["initial_paths"]) if start else None
    rows = event_rows(trace)
    pruned = sum(r[1] for r in rows)
    splits = sum(r[2] for r in rows)
    clones = sum(r[3] for r in rows)
    expected = None if initial is None else initial + clones + splits - pruned
    final = int(end[-1]["final_paths"]) if end else None
    return {
        "initial": initial,
        "pruned": pruned,
        "split": splits,
        "cloned": clones,
        "expected_final": expected,
        "final": final,
        "balanced": expected is not None and expected == final,
    }


def report(trace: RunTrace) -> str:
    lines = []
    losses = trace.losses
    if losses:
        lines.append(
            f"iterations: {len(losses)}  loss first={losses[0]:.6g} last={losses[-1]:.6g} "
            f"min={min(losses):.6g} mean={sum(losses) / len(losses):.6g}"
        )
    else:
        lines.append("iterations: 0")
    end = trace.of_kind("end")
    if end:
        psnr = decode_psnr(end[-1]["final_psnr"])
        lines.append("final psnr: " + ("exact" if math.isinf(psnr) else f"{psnr:.3f} dB"))
    lines.append(f"{'iteration':>9} {'pruned':>7} {'split':>6} {'cloned':>7}")
    rows = event_rows(trace)
    for it, p, s, c in rows:
        lines.append(f"{it:>9} {p:>7} {s:>6} {c:>7}")
    totals = path_ledger(trace)
    lines.append(f"{'total':>9} {totals['pruned']:>7} {totals['split']:>6} {totals['cloned']:>7}")
    lines.append(
        f"paths: initial={totals['initial']} + cloned={totals['cloned']} + split={totals['split']} "
        f"- pruned={totals['pruned']} = {totals['expected_final']}; final={totals['final']} "
        f"({'balanced' if totals['balanced'] else 'UNBALANCED'})"
    )
    return "\n".join(lines) + "\n"
