from __future__ import annotations

from django.core.management.base import CommandError

from kernels.scans import diagonal_scan, offdiagonal_scan, write_plot_data, write_scan_csv
from spectral.projector import ProjectorBuilder, ProjectorVariant

from ._base import EXIT_CONFIG, LabCommand

DIAGONAL = "diagonal"
OFFDIAGONAL = "offdiag"


class Command(LabCommand):
    help = "Write raw kernel scans (scan_<kind>_<point>.csv and .dat plot data) without verdicts"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--kind", choices=[DIAGONAL, OFFDIAGONAL], default=DIAGONAL)
        parser.add_argument(
            "--variant",
            choices=ProjectorVariant.values,
            default=ProjectorVariant.INTERIOR.value,
            help="Bergman projector of the domain or the Szegő projector of the sphere.",
        )

    def handle(self, *args, **options):
        config = self.load(options)
        kind, variant = options["kind"], options["variant"]
        builder = ProjectorBuilder(config.domain, config.generator, config.chi, variant, budget=config.max_indices)

        with self.budget_guard():
            if kind == DIAGONAL:
                points = [p.named for p in config.points]
                if not points:
                    raise CommandError("config has no points to scan", returncode=EXIT_CONFIG)
                rows = diagonal_scan(builder, points, config.k_ladder)
            else:
                if not config.pairs:
                    raise CommandError("config has no pairs to scan", returncode=EXIT_CONFIG)
                rows = offdiagonal_scan(builder, config.pairs, config.k_ladder)

        written = write_scan_csv(rows, config.output_dir, kind) + write_plot_data(rows, config.output_dir, kind)
        for path in written:
            self.stdout.write(f"Wrote {path}")
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} kernel values scanned"))
