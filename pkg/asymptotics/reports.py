"""Verification reports: one JSON file per claim plus a summary table."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
from django.core.serializers.json import DjangoJSONEncoder
from django.db import models


class Verdict(models.TextChoices):
    PASS = "pass", "Pass"
    FAIL = "fail", "Fail"



class ReportEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, complex):
            return [o.real, o.imag]
        return super().default(o)


@dataclass(frozen=True)
class AsymptoticsReport:
    claim_id: str
    description: str
    inputs: dict[str, Any] = field(default_factory=dict)
    ladder: list[float] = field(default_factory=list)
    empirical: dict[str, Any] = field(default_factory=dict)
    predicted: dict[str, Any] = field(default_factory=dict)
    ratios: list[float] = field(default_factory=list)
    tolerance: float | None = None
    clauses: dict[str, bool] = field(default_factory=dict)
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.clauses and all(self.clauses.values()):
            return Verdict.PASS.value
        return Verdict.FAIL.value

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def failed_clauses(self) -> list[str]:
        return sorted(name for name, ok in self.clauses.items() if not ok)

    def with_provenance(self, **extra) -> "AsymptoticsReport":
        return replace(self, provenance={**self.provenance, **extra})

    def to_dict(self) -> dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "description": self.description,
            "inputs": self.inputs,
            "ladder": list(self.ladder),
            "empirical": self.empirical,
            "predicted": self.predicted,
            "ratios": list(self.ratios),
            "tolerance": self.tolerance,
            "clauses": {name: bool(ok) for name, ok in self.clauses.items()},
            "verdict": self.verdict,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), cls=ReportEncoder, sort_keys=True, indent=2, ensure_ascii=False)

    def write(self, directory: Path | str) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"report_{self.claim_id}.json"
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def combine(cls, claim_id: str, description: str, parts: Sequence["AsymptoticsReport"]) -> "AsymptoticsReport":
        """Merge sub-reports under one claim; clause names get the part's id."""
        if not parts:
            raise ValueError(f"nothing to combine for {claim_id}")
        clauses = {}
        for part in parts:
            for name, ok in part.clauses.items():
                clauses[f"{part.claim_id}.{name}"] = ok
        provenance: dict[str, Any] = {}
        for part in parts:
            provenance.update(part.provenance)
        tolerances = {p.tolerance for p in parts if p.tolerance is not None}
        return cls(
            claim_id=claim_id,
            description=description,
            inputs={p.claim_id: p.inputs for p in parts},
            ladder=list(parts[0].ladder),
            empirical={p.claim_id: p.empirical for p in parts},
            predicted={p.claim_id: p.predicted for p in parts},
            ratios=[],
            tolerance=tolerances.pop() if len(tolerances) == 1 else None,
            clauses=clauses,
            provenance=provenance,
        )


SUMMARY_COLUMNS = ["claim_id", "verdict", "clauses_passed", "clauses_total", "tolerance", "failed"]


def summary_frame(reports: Sequence[AsymptoticsReport]) -> pd.DataFrame:
    rows = [
        (
            r.claim_id,
            r.verdict,
            sum(bool(ok) for ok in r.clauses.values()),
            len(r.clauses),
            r.tolerance,
            ";".join(r.failed_clauses()),
        )
        for r in sorted(reports, key=lambda r: r.claim_id)
    ]
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def write_summary(reports: Sequence[AsymptoticsReport], directory: Path | str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "summary.csv"
    summary_frame(reports).to_csv(path, index=False, float_format="%.17g")
    return path
