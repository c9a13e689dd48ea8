from __future__ import annotations

from contextlib import contextmanager

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domains.catalog import CapacityExceeded
from lab.config import ConfigError, RunConfig, load_config
from spectral.galerkin import QuadratureBudgetExceeded

EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


class LabCommand(BaseCommand):
    """Shared flags and the exit-code contract of the lab commands."""

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            required=True,
            help="Config name under LAB_CONFIG_DIR (e.g. ball-n2-default) or a path to a TOML file.",
        )
        parser.add_argument("--out", default=None, help="Output directory (overrides the config).")
        parser.add_argument("--seed", type=int, default=None, help="Seed for every random stream.")
        parser.add_argument(
            "--jobs",
            type=int,
            default=None,
            help="Worker threads for independent suites (default LAB_JOBS).",
        )
        parser.add_argument("--max-indices", type=int, default=None, help="Index-record budget.")
        parser.add_argument("--max-quadrature-nodes", type=int, default=None, help="Quadrature-node budget.")

    def load(self, options) -> RunConfig:
        try:
            return load_config(
                options["config"],
                seed=options["seed"],
                output_dir=options["out"],
                max_indices=options["max_indices"],
                max_quadrature_nodes=options["max_quadrature_nodes"],
            )
        except ConfigError as err:
            raise CommandError(str(err), returncode=EXIT_CONFIG) from err

    def jobs(self, options) -> int:
        jobs = settings.LAB_JOBS if options["jobs"] is None else options["jobs"]
        if jobs < 1:
            raise CommandError("--jobs must be at least 1", returncode=EXIT_CONFIG)
        return jobs

    @contextmanager
    def budget_guard(self):
        try:
            yield
        except (CapacityExceeded, QuadratureBudgetExceeded) as err:
            raise CommandError(f"Budget exceeded: {err}", returncode=EXIT_BUDGET) from err
