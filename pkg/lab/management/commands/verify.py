from __future__ import annotations

from django.core.management.base import CommandError

from lab.forms import Suite
from lab.runner import VerificationRunner

from ._base import EXIT_VERDICT, LabCommand


class Command(LabCommand):
    help = "Run the verification suites of a config and write report_<claim>.json and summary.csv"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--suite",
            action="append",
            choices=Suite.values,
            help="Run only this suite (repeatable); defaults to the suites in the config.",
        )

    def handle(self, *args, **options):
        config = self.load(options)
        runner = VerificationRunner(jobs=self.jobs(options))
        self.stdout.write(self.style.NOTICE(f"Verifying {config.name} into {config.output_dir}"))

        with self.budget_guard():
            run = runner.run(config, suites=options["suite"])

        for report in run.reports:
            line = f"{report.claim_id}: {report.verdict}"
            if report.passed:
                self.stdout.write(self.style.SUCCESS(line))
            else:
                self.stdout.write(self.style.ERROR(f"{line} ({', '.join(report.failed_clauses())})"))

        if not run.passed:
            failed = ", ".join(r.claim_id for r in run.failed_reports)
            raise CommandError(f"Verification failed for: {failed}", returncode=EXIT_VERDICT)
        self.stdout.write(self.style.SUCCESS(f"All {len(run.reports)} claims pass"))
