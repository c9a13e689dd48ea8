"""Suite orchestration: sequential or on a thread pool, merged by claim id."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

from asymptotics.reports import AsymptoticsReport
from domains.catalog import CapacityExceeded
from spectral.galerkin import QuadratureBudgetExceeded

from .config import RunConfig
from .services import run_suite

logger = logging.getLogger(__name__)


def _process_suite(
    config: RunConfig,
    suite: str,
    *,
    norm_table: Path | None = None,
    log: Callable[[str], None] | None = None,
) -> AsymptoticsReport:
    """Run one suite and record its outcome in the run log."""

    log = log or (lambda message: None)
    log(f"Running suite {suite}")
    try:
        report = run_suite(config, suite, norm_table=norm_table)
    except (CapacityExceeded, QuadratureBudgetExceeded) as err:
        log(f"Budget exceeded in {suite}: {err}")
        raise
    except Exception as exc:  # noqa: BLE001
        log(f"Unexpected failure in {suite}: {exc}")
        raise

    failed = report.failed_clauses()
    log(f"Suite {suite}: {report.verdict}" + (f" (failed: {', '.join(failed)})" if failed else ""))
    return report


def run_suites(
    config: RunConfig,
    suites: Sequence[str] | None = None,
    *,
    jobs: int = 1,
    norm_table: Path | None = None,
    log: Callable[[str], None] | None = None,
) -> list[AsymptoticsReport]:
    suites = list(suites or config.suites)
    if jobs <= 1 or len(suites) <= 1:
        reports = [_process_suite(config, s, norm_table=norm_table, log=log) for s in suites]
    else:
        with ThreadPoolExecutor(max_workers=jobs, thread_name_prefix="suite") as pool:
            futures = [pool.submit(_process_suite, config, s, norm_table=norm_table, log=log) for s in suites]
            reports = [future.result() for future in futures]
    logger.debug("Finished %s suites with %s workers", len(reports), jobs)
    return sorted(reports, key=lambda report: report.claim_id)
