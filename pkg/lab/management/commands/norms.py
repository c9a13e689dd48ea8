from __future__ import annotations

from pathlib import Path

from django.core.management.base import CommandError

from domains.catalog import NormTable, NormTableError, build_norm_table

from ._base import EXIT_CONFIG, EXIT_VERDICT, LabCommand


class Command(LabCommand):
    help = "Export the closed-form monomial norm table of the config domain, or check an existing one"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--degree", type=int, default=None, help="Largest |α| (default: oracles.max_degree).")
        parser.add_argument("--check", default=None, help="Check this CSV against the closed form instead.")

    def handle(self, *args, **options):
        config = self.load(options)

        if options["check"]:
            path = Path(options["check"])
            try:
                problems = NormTable.from_csv(path, config.domain).problems()
            except (OSError, NormTableError) as err:
                raise CommandError(str(err), returncode=EXIT_CONFIG) from err
            if problems:
                raise CommandError(f"{path}: {'; '.join(problems)}", returncode=EXIT_VERDICT)
            self.stdout.write(self.style.SUCCESS(f"{path} matches the closed form"))
            return

        degree = config.max_degree if options["degree"] is None else options["degree"]
        if degree < 0:
            raise CommandError("--degree must be non-negative", returncode=EXIT_CONFIG)
        with self.budget_guard():
            table = build_norm_table(config.domain, degree, budget=config.max_indices)
        path = table.to_csv(config.output_dir / f"norms_{config.domain.label()}_D{degree}.csv")
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(table.alphas)} norms to {path}"))
