import json
import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from .config import ConfigError, load_config, parse_config
from .forms import Suite
from .runner import RunStatus, VerificationRunner

DISK = """
[domain]
kind = "ball"
n = 1

[chi]
center = {center}
radius = {radius}

[ladder]
k = {ladder}

[[points]]
id = "x1"
z = [1.0]

[[points]]
id = "z09"
role = "interior"
z = [0.9]

[suites]
{suites}

[oracles]
mc_samples = 10000
random_indices = 2
max_degree = 3
hs_size = 10
galerkin_degree = 4

[output]
seed = 7
"""


def disk_config(center=1.5, radius=0.5, ladder="[50, 100, 200, 400]", suites="leading = true\ntrace = true"):
    return DISK.format(center=center, radius=radius, ladder=ladder, suites=suites)


class ConfigTests(SimpleTestCase):
    def test_shipped_default(self):
        config = load_config("ball-n2-default")
        self.assertEqual(config.name, "ball-n2-default")
        self.assertTrue(config.domain.is_ball)
        self.assertEqual(config.domain.n, 2)
        self.assertEqual(config.k_ladder, (50.0, 100.0, 200.0, 400.0))
        self.assertEqual(config.suites, tuple(Suite.values))
        self.assertEqual([p.id for p in config.boundary_points], ["x1", "x2"])
        self.assertEqual([p.id for p in config.interior_points], ["z09"])
        self.assertEqual([p.id for p in config.pairs], ["half", "orth", "inner"])
        self.assertEqual(config.seed, 20240601)

    def test_all_shipped_configs_parse(self):
        for name in ("ball-n1-default", "ball-n2-default", "ball-n2-weighted", "ball-n3-default", "ellipsoid-n2"):
            config = load_config(name)
            self.assertEqual(config.generator.n, config.domain.n)

    def test_chi_support_rule(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(disk_config(center=0.5, radius=0.5))
        self.assertIn("(0, +∞)", str(ctx.exception))

    def test_descending_ladder(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(disk_config(ladder="[400, 200, 100]"))
        self.assertIn("ascending", str(ctx.exception))

    def test_weights_must_match_dimension(self):
        text = disk_config() + "\n[generator]\nweights = [1.0, 2.0]\n"
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertIn("weights", str(ctx.exception))

    def test_boundary_point_must_lie_on_the_boundary(self):
        text = disk_config().replace("z = [1.0]", "z = [0.5]")
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text)
        self.assertIn("not on the boundary", str(ctx.exception))

    def test_budgets_must_be_positive(self):
        with self.assertRaises(ConfigError):
            parse_config(disk_config(), max_indices=0)

    def test_syntax_error_and_missing_file(self):
        with self.assertRaises(ConfigError):
            parse_config("[domain\nkind = ")
        with self.assertRaises(ConfigError):
            load_config("no-such-config")

    def test_hash_and_overrides(self):
        a = parse_config(disk_config(), seed=3)
        b = parse_config(disk_config(), seed=3)
        self.assertEqual(a.config_hash, b.config_hash)
        self.assertEqual(a.seed, 3)
        self.assertNotEqual(parse_config(disk_config(ladder="[10, 20]")).config_hash, a.config_hash)


class RunnerTests(SimpleTestCase):
    def test_run_writes_reports_summary_and_log(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = parse_config(disk_config(), name="disk", output_dir=tmp)
            run = VerificationRunner(jobs=1).run(config)
            self.assertEqual(run.status, RunStatus.COMPLETED)
            self.assertTrue(run.passed, [r.failed_clauses() for r in run.reports])
            names = sorted(p.name for p in Path(tmp).iterdir())
            self.assertEqual(names, ["report_leading.json", "report_trace.json", "run.log", "summary.csv"])
            data = json.loads((Path(tmp) / "report_leading.json").read_text())
            self.assertEqual(data["provenance"]["config_hash"], config.config_hash)
            self.assertEqual(data["provenance"]["seed"], 7)
            self.assertIn("Completed", (Path(tmp) / "run.log").read_text())

    def test_parallel_run_is_byte_identical(self):
        outputs = []
        with tempfile.TemporaryDirectory() as tmp:
            for jobs in (1, 2):
                out = Path(tmp) / f"jobs{jobs}"
                config = parse_config(disk_config(), name="disk", output_dir=out)
                VerificationRunner(jobs=jobs).run(config)
                outputs.append({p.name: p.read_bytes() for p in out.iterdir() if p.name != "run.log"})
        self.assertEqual(outputs[0], outputs[1])


class CommandTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, text, name="run.toml"):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **options)
        return out.getvalue()

    def test_verify_passes(self):
        output = self.call("verify", config=self.write(disk_config()), out=str(self.tmp / "out"))
        self.assertIn("All 2 claims pass", output)
        self.assertTrue((self.tmp / "out" / "summary.csv").exists())

    def test_verify_config_errors_exit_2(self):
        for text in (disk_config(center=0.4, radius=0.5), disk_config(ladder="[100, 50]")):
            with self.assertRaises(CommandError) as ctx:
                self.call("verify", config=self.write(text), out=str(self.tmp / "out"))
            self.assertEqual(ctx.exception.returncode, 2)

    def test_verify_failed_verdict_exits_1(self):
        path = self.write(disk_config(ladder="[5, 6, 7, 8]", suites="leading = true"))
        with self.assertRaises(CommandError) as ctx:
            self.call("verify", config=path, out=str(self.tmp / "out"))
        self.assertEqual(ctx.exception.returncode, 1)
        summary = pd.read_csv(self.tmp / "out" / "summary.csv")
        self.assertEqual(list(summary["verdict"]), ["fail"])

    def test_verify_budget_exits_3(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("verify", config=self.write(disk_config()), out=str(self.tmp / "out"), max_indices=10)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_oracles(self):
        path = self.write(disk_config(suites="oracles = true"))
        output = self.call("oracles", config=path, out=str(self.tmp / "out"))
        self.assertIn("All oracle checks pass", output)
        self.assertIn("galerkin.diagonal: ok", output)

    def test_oracles_quadrature_budget_exits_3(self):
        path = self.write(disk_config(suites="oracles = true"))
        with self.assertRaises(CommandError) as ctx:
            self.call("oracles", config=path, out=str(self.tmp / "out"), max_quadrature_nodes=10)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_norm_table_export_check_and_corruption(self):
        path = self.write(disk_config())
        self.call("norms", config=path, out=str(self.tmp / "out"), degree=6)
        table = self.tmp / "out" / "norms_ball-n1_D6.csv"
        self.assertEqual(len(pd.read_csv(table)), 7)
        self.assertIn("matches", self.call("norms", config=path, out=str(self.tmp / "out"), check=str(table)))

        frame = pd.read_csv(table)
        frame.loc[3, "log_norm_sq"] += 0.5
        frame.to_csv(table, index=False)
        with self.assertRaises(CommandError) as ctx:
            self.call("norms", config=path, out=str(self.tmp / "out"), check=str(table))
        self.assertEqual(ctx.exception.returncode, 1)
        with self.assertRaises(CommandError) as ctx:
            self.call("oracles", config=path, out=str(self.tmp / "out"), norm_table=str(table))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_diagonal_scan(self):
        self.call("scan", config=self.write(disk_config()), out=str(self.tmp / "out"), kind="diagonal")
        frame = pd.read_csv(self.tmp / "out" / "scan_diagonal_x1.csv")
        self.assertEqual(len(frame), 4)
        self.assertEqual(list(frame["k"]), [50.0, 100.0, 200.0, 400.0])
        self.assertTrue((self.tmp / "out" / "scan_diagonal_z09.dat").exists())

    def test_offdiagonal_scan(self):
        text = disk_config() + '\n[[pairs]]\nid = "p"\nz = [1.0]\nw = [[0.0, 1.0]]\n'
        self.call("scan", config=self.write(text), out=str(self.tmp / "out"), kind="offdiag")
        frame = pd.read_csv(self.tmp / "out" / "scan_offdiag_p.csv")
        self.assertEqual(len(frame), 4)

    def test_scan_without_pairs_exits_2(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("scan", config=self.write(disk_config()), out=str(self.tmp / "out"), kind="offdiag")
        self.assertEqual(ctx.exception.returncode, 2)

    def test_shipped_default_config(self):
        output = self.call("verify", config="ball-n2-default", out=str(self.tmp / "out"), jobs=2)
        self.assertIn("All 6 claims pass", output)
        reports = sorted(p.name for p in (self.tmp / "out").glob("report_*.json"))
        self.assertEqual(
            reports,
            [f"report_{claim}.json" for claim in sorted(Suite.values)],
        )
