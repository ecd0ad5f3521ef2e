"""RMSE similarity and cumulative match scores, with text/CSV table output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classify import RankedMatches
from .errors import ConfigError, DataError
from .image import GrayImage
from .modality import DEFAULT_LEVELS, OffsetI, SourceKind, to_new_dimension


@dataclass(frozen=True)
class CmcCurve:
    ranks: tuple[float, ...]
    n_probes: int

    def percent(self) -> list[float]:
        return [100.0 * r for r in self.ranks]


@dataclass(frozen=True)
class ModalityRow:
    pair: str
    original_rmse: float
    new_dimension_rmse: float


def rmse(F: GrayImage, S: GrayImage) -> float:
    if F.dims != S.dims:
        raise DataError(f"dimension mismatch: {F.dims} vs {S.dims}")
    d = F.pixels - S.pixels
    peak = float(np.max(np.abs(d)))
    if peak == 0.0:
        return 0.0
    d = d / peak  # scale first so tiny differences do not underflow when squared
    return peak * math.sqrt(float(np.sum(d * d)) / d.size)


def pair_name(i: int) -> str:
    """a, b, ..., z, aa, ab, ..."""
    name = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        name = chr(ord("a") + r) + name
    return name


def modality_report(
    pairs: Sequence[tuple[GrayImage, GrayImage]],
    I: OffsetI,
    levels: int = DEFAULT_LEVELS,
    names: Sequence[str] | None = None,
) -> list[ModalityRow]:
    """Per pair, RMSE of the originals and of their new-dimension images."""
    rows = []
    for i, (photo, sketch) in enumerate(pairs):
        nd_photo = to_new_dimension(photo, SourceKind.PHOTO, levels=levels).img
        nd_sketch = to_new_dimension(sketch, SourceKind.SKETCH, I, levels=levels).img
        rows.append(
            ModalityRow(
                pair=names[i] if names is not None else pair_name(i),
                original_rmse=rmse(photo, sketch),
                new_dimension_rmse=rmse(nd_photo, nd_sketch),
            )
        )
    return rows


def cmc(rank_lists: Sequence[tuple[str, RankedMatches]], max_rank: int) -> CmcCurve:
    """Fraction of probes whose true label sits within each rank 1..max_rank."""
    if max_rank < 1:
        raise ConfigError(f"max_rank must be >= 1, got {max_rank}")
    if not rank_lists:
        raise DataError("no probes to evaluate")
    hits = np.zeros(max_rank, dtype=np.int64)
    for true_label, matches in rank_lists:
        pos = matches.position(true_label)
        if pos is None:
            raise DataError(f"true label {true_label!r} missing from its rank list")
        if pos <= max_rank:
            hits[pos - 1:] += 1
    n = len(rank_lists)
    return CmcCurve(tuple(float(h) / n for h in hits), n)


def format_modality_table(rows: Sequence[ModalityRow]) -> str:
    head = ("Pair", "RMSE original pair", "RMSE new dimension pair")
    body = [(r.pair, f"{r.original_rmse:.4f}", f"{r.new_dimension_rmse:.4f}") for r in rows]
    return _align([head, *body])


def format_cmc_table(curves: dict[str, CmcCurve]) -> str:
    width = max((len(c.ranks) for c in curves.values()), default=0)
    head = ("Rank", *(str(r + 1) for r in range(width)))
    body = [(name, *(f"{p:.1f}" for p in c.percent())) for name, c in curves.items()]
    return _align([head, *body])


def _align(rows: list[tuple[str, ...]]) -> str:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


CSV_HEADER = ["table", "row", "column", "value"]


def modality_csv_rows(rows: Sequence[ModalityRow]) -> list[list[str]]:
    out = []
    for r in rows:
        out.append(["modality", r.pair, "original_rmse", repr(r.original_rmse)])
        out.append(["modality", r.pair, "new_dimension_rmse", repr(r.new_dimension_rmse)])
    return out


def cmc_csv_rows(curves: dict[str, CmcCurve]) -> list[list[str]]:
    out = []
    for name, curve in curves.items():
        for r, value in enumerate(curve.ranks):
            out.append(["cmc", name, f"rank{r + 1}", repr(value)])
    return out


def to_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()
