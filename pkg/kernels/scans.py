"""k-ladder scans of kernel values and their flat-file outputs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from spectral.projector import SpectralProjectorRep

from .services import KernelError, KernelSample, UnstableSummation, common_support, kernel_eval

logger = logging.getLogger(__name__)

SCAN_COLUMNS = ["point_id", "k", "re_value", "im_value", "terms_used"]


@dataclass(frozen=True)
class NamedPoint:
    id: str
    z: tuple[complex, ...]


@dataclass(frozen=True)
class NamedPair:
    id: str
    z: tuple[complex, ...]
    w: tuple[complex, ...]


@dataclass(frozen=True)
class ScanRow:
    point_id: str
    k: float
    sample: KernelSample

    @property
    def value(self) -> complex:
        return self.sample.value


def evaluate(proj: SpectralProjectorRep, z, w) -> KernelSample:
    """kernel_eval with the correctly rounded path as fallback."""
    try:
        return kernel_eval(proj, z, w)
    except UnstableSummation as err:
        logger.debug("Switching to exact summation at k=%s: %s", proj.k, err)
        return kernel_eval(proj, z, w, precise=True)


def _check_ladder(k_ladder: Sequence[float]) -> None:
    if not k_ladder:
        raise KernelError("k ladder is empty")
    if any(b <= a for a, b in zip(k_ladder, k_ladder[1:])):
        raise KernelError(f"k ladder must be strictly ascending: {list(k_ladder)}")


def _scan(builder: Callable, pairs: Sequence[NamedPair], k_ladder: Sequence[float]) -> list[ScanRow]:
    if not pairs:
        raise KernelError("nothing to scan")
    _check_ladder(k_ladder)
    rows = []
    for pair in pairs:
        active = tuple(bool(v) for v in common_support(pair.z, pair.w))
        for k in k_ladder:
            proj = builder(k, active)
            rows.append(ScanRow(pair.id, float(k), evaluate(proj, pair.z, pair.w)))
        logger.debug("Scanned %s over %s values of k", pair.id, len(k_ladder))
    rows.sort(key=lambda row: (row.point_id, row.k))
    return rows


def diagonal_scan(builder: Callable, points: Sequence[NamedPoint], k_ladder: Sequence[float]) -> list[ScanRow]:
    """K(z, z; k) for every point and k; the projector is rebuilt per k."""
    return _scan(builder, [NamedPair(p.id, p.z, p.z) for p in points], k_ladder)


def offdiagonal_scan(builder: Callable, pairs: Sequence[NamedPair], k_ladder: Sequence[float]) -> list[ScanRow]:
    return _scan(builder, pairs, k_ladder)


def scan_frame(rows: Sequence[ScanRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (row.point_id, row.k, row.value.real, row.value.imag, row.sample.terms_used)
            for row in rows
        ],
        columns=SCAN_COLUMNS,
    )


def values_for(rows: Sequence[ScanRow], point_id: str) -> tuple[np.ndarray, np.ndarray]:
    selected = [row for row in rows if row.point_id == point_id]
    return (
        np.array([row.k for row in selected]),
        np.array([row.value for row in selected], dtype=complex),
    )


def write_scan_csv(rows: Sequence[ScanRow], directory: Path | str, kind: str) -> list[Path]:
    """One ``scan_<kind>_<point>.csv`` per point."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frame = scan_frame(rows)
    written = []
    for point_id, group in frame.groupby("point_id", sort=True):
        path = directory / f"scan_{kind}_{point_id}.csv"
        group.to_csv(path, index=False, float_format="%.17g")
        written.append(path)
    return written


def write_plot_data(rows: Sequence[ScanRow], directory: Path | str, kind: str) -> list[Path]:
    """Two-column ``k value`` files (|value| for off-diagonal scans)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for point_id in sorted({row.point_id for row in rows}):
        ks, values = values_for(rows, point_id)
        column = values.real if kind == "diagonal" else np.abs(values)
        path = directory / f"scan_{kind}_{point_id}.dat"
        np.savetxt(path, np.column_stack([ks, column]), fmt="%.17g")
        written.append(path)
    return written
