from __future__ import annotations

from pathlib import Path

from django.core.management.base import CommandError

from lab.forms import Suite
from lab.runner import VerificationRunner

from ._base import EXIT_CONFIG, EXIT_VERDICT, LabCommand


class Command(LabCommand):
    help = "Check closed forms against Monte Carlo, Helffer-Sjostrand and Galerkin oracles"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--norm-table",
            default=None,
            help="Also check a norm table CSV written by the norms command.",
        )

    def handle(self, *args, **options):
        config = self.load(options)
        norm_table = Path(options["norm_table"]) if options["norm_table"] else None
        if norm_table is not None and not norm_table.is_file():
            raise CommandError(f"norm table {norm_table} not found", returncode=EXIT_CONFIG)

        with self.budget_guard():
            run = VerificationRunner(jobs=1).run(config, suites=[Suite.ORACLES.value], norm_table=norm_table)

        report = run.reports[0]
        for name, ok in sorted(report.clauses.items()):
            style = self.style.SUCCESS if ok else self.style.ERROR
            self.stdout.write(style(f"{name}: {'ok' if ok else 'FAILED'}"))
        if not report.passed:
            raise CommandError(
                f"Oracle checks failed: {', '.join(report.failed_clauses())}", returncode=EXIT_VERDICT
            )
        self.stdout.write(self.style.SUCCESS("All oracle checks pass"))
