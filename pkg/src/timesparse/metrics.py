"""Accuracy, speed, and lattice-cost accounting for evaluation runs.

Timing convention: wall time covers the decode call only, and the real-time
factor divides by the duration the ORIGINAL frames represent (frame count
times frame shift), so a stride that shrinks the decoded sequence shows up
as a smaller RTF.  Timings are taken single-threaded; absolute values are
only comparable within one machine.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import ContractError
from .pooling import WindowConfig, sparse_length


class EditStats(NamedTuple):
    distance: int
    substitutions: int
    insertions: int
    deletions: int


def edit_distance(ref: Sequence, hyp: Sequence) -> EditStats:
    """Levenshtein distance from ``ref`` to ``hyp`` with per-kind counts.

    Ties between edit kinds resolve substitution over deletion over
    insertion, so the counts are deterministic (the distance never depends
    on tie order).
    """
    R, H = len(ref), len(hyp)
    # cell = (distance, subs, ins, dels)
    prev = [(j, 0, j, 0) for j in range(H + 1)]
    for i in range(1, R + 1):
        cur = [(i, 0, 0, i)]
        for j in range(1, H + 1):
            if ref[i - 1] == hyp[j - 1]:
                cur.append(prev[j - 1])
                continue
            diag, up, left = prev[j - 1], prev[j], cur[j - 1]
            best = diag
            kind = 0
            if up[0] < best[0]:
                best, kind = up, 1
            if left[0] < best[0]:
                best, kind = left, 2
            d, s, ins, dl = best
            if kind == 0:
                cur.append((d + 1, s + 1, ins, dl))
            elif kind == 1:
                cur.append((d + 1, s, ins, dl + 1))
            else:
                cur.append((d + 1, s, ins + 1, dl))
        prev = cur
    return EditStats(*prev[H])


def cer(refs: Sequence[Sequence], hyps: Sequence[Sequence]) -> float:
    """Summed edit distance as a percentage of total reference length.

    >>> cer([(1, 2, 3, 4)], [(1, 2, 3, 5)])
    25.0
    >>> cer([(1, 2), (3, 4)], [(1, 2), ()])
    50.0
    >>> cer([(1, 2, 3), (4, 5)], [(1, 2, 3), (4, 5)])
    0.0
    """
    if len(refs) != len(hyps):
        raise ContractError(f"{len(refs)} references vs {len(hyps)} hypotheses")
    total_ref = sum(len(r) for r in refs)
    if total_ref == 0:
        raise ContractError("error rate needs at least one reference symbol")
    total = sum(edit_distance(r, h).distance for r, h in zip(refs, hyps))
    return 100.0 * total / total_ref


def rtf(wall_seconds: float, n_frames: int, frame_shift_ms: float = 10.0) -> float:
    """Processing time over represented audio time."""
    if n_frames < 1:
        raise ContractError("rtf needs at least one frame")
    if wall_seconds <= 0.0:
        raise ContractError(f"wall time must be positive, got {wall_seconds}")
    return wall_seconds / (n_frames * frame_shift_ms / 1000.0)


def lattice_cost(n_frames: int, n_labels: int, cfg: WindowConfig) -> tuple[int, int, float]:
    """(sparse frame count, lattice cells, cell ratio versus stride 1)."""
    if n_labels < 0:
        raise ContractError("negative label count")
    sparse_frames = sparse_length(n_frames, cfg.stride)
    cells = sparse_frames * (n_labels + 1)
    return sparse_frames, cells, cells / (n_frames * (n_labels + 1))


CSV_FIELDS = ("config_id", "window_length", "window_stride", "strategy", "decoder",
              "beam", "cer_percent", "rtf", "lattice_cells", "joint_calls", "wall_ms")


@dataclass
class EvalReport:
    config_id: str
    window_length: int
    window_stride: int
    strategy: str
    decoder: str
    beam: int
    cer_percent: float
    rtf: float
    lattice_cells: int
    joint_calls: int
    wall_ms: float

    def row(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


def append_report(path: str, report: EvalReport) -> None:
    """Append one CSV row, writing the header only when the file is new."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_FIELDS)
        writer.writerow(report.row())
