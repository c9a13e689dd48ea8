"""Verification runs: staged suites, reports on disk and a run log."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from django.conf import settings
from django.db import models
from django.utils import timezone

from asymptotics.reports import AsymptoticsReport, write_summary

from .config import RunConfig
from .tasks import run_suites

logger = logging.getLogger(__name__)


class RunStatus(models.TextChoices):
    PENDING = "pending", "Pending"
    RUNNING = "running", "Running"
    WRITING = "writing", "Writing reports"
    COMPLETED = "completed", "Completed"
    FAILED = "failed", "Failed"


@dataclass
class VerificationRun:
    config: RunConfig
    status: str = RunStatus.PENDING
    reports: list[AsymptoticsReport] = field(default_factory=list)
    written: list[Path] = field(default_factory=list)
    logs: str = ""
    error: str = ""
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def append_log(self, message: str) -> None:
        timestamp = timezone.now().isoformat()
        with self._lock:
            self.logs += f"[{timestamp}] {message}\n"

    def mark_failed(self, error: str) -> None:
        self.error = error
        self.status = RunStatus.FAILED
        self.append_log(f"FAILED: {error}")

    @property
    def passed(self) -> bool:
        return self.status == RunStatus.COMPLETED and all(r.passed for r in self.reports)

    @property
    def failed_reports(self) -> list[AsymptoticsReport]:
        return [r for r in self.reports if not r.passed]


class VerificationRunner:
    def __init__(self, jobs: int | None = None) -> None:
        self.jobs = settings.LAB_JOBS if jobs is None else jobs

    def _write(self, run: VerificationRun) -> None:
        out = run.config.output_dir
        for report in run.reports:
            run.written.append(report.write(out))
        run.written.append(write_summary(run.reports, out))
        run.append_log(f"Wrote {len(run.written)} files to {out}")

    def _write_log(self, run: VerificationRun) -> None:
        out = run.config.output_dir
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "run.log").write_text(run.logs, encoding="utf-8")
        except OSError as err:
            logger.warning("Could not write run log to %s: %s", out, err)

    def run(
        self,
        config: RunConfig,
        *,
        suites: Sequence[str] | None = None,
        norm_table: Path | None = None,
    ) -> VerificationRun:
        run = VerificationRun(config)
        try:
            # Suites
            run.status = RunStatus.RUNNING
            run.append_log(
                f"Started {config.name} ({config.config_hash[:12]}), seed {config.seed}, "
                f"suites {', '.join(suites or config.suites)}, {self.jobs} worker(s)"
            )
            run.reports = run_suites(
                config, suites, jobs=self.jobs, norm_table=norm_table, log=run.append_log
            )

            # Reports
            run.status = RunStatus.WRITING
            self._write(run)
            run.status = RunStatus.COMPLETED
            verdicts = ", ".join(f"{r.claim_id}={r.verdict}" for r in run.reports)
            run.append_log(f"Completed: {verdicts}")
        except Exception as exc:  # noqa: BLE001
            run.mark_failed(str(exc))
            raise
        finally:
            self._write_log(run)
        return run
