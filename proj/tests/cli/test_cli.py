"""End-to-end checks of the gwts command line on generated data.

Run as: GWTS_BIN=/path/to/gwts python3 test_cli.py
"""

import csv
import filecmp
import json
import math
import os
import random
import subprocess
import tempfile
import unittest
from pathlib import Path

GWTS = os.environ.get("GWTS_BIN", "gwts")


def quarters(n, start=2000):
    return [f"{start + i // 4}-Q{i % 4 + 1}" for i in range(n)]


def write_single(path, n=85, station="Patiyapura", seed=1):
    rng = random.Random(seed)
    x = [0.0, 0.0, 0.0]
    rows = []
    for t, date in enumerate(quarters(n)):
        season = math.sin(2 * math.pi * t / 4)
        e = [rng.gauss(0, 1) for _ in range(3)]
        x = [
            0.4 * x[0] + e[0],
            0.5 * x[1] + 0.1 * x[0] + 0.5 * e[1],
            0.6 * x[2] + 0.3 * x[1] + 0.2 * x[0] + 0.4 * e[2],
        ]
        values = {
            "precipitation": 40 + 25 * season + 5 * x[0],
            "temperature": 30 + 3 * season + x[1],
            "gwl": 12 + x[2],
        }
        for var, v in values.items():
            rows.append([station, date, var, f"{v:.6f}", "22.275", "73.44167"])
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["station", "date", "variable", "value", "latitude", "longitude"])
        w.writerows(rows)


def write_network(path, n=85, seed=2):
    rng = random.Random(seed)
    common = [rng.gauss(0, 1) for _ in range(n)]
    rows = []
    for s in range(5):
        weight = 0.95 if s < 2 else 0.2
        for t, date in enumerate(quarters(n)):
            v = weight * common[t] + math.sqrt(1 - weight**2) * rng.gauss(0, 1)
            rows.append([f"S{s}", date, "gwl", f"{v:.6f}", f"{22 + s * 0.1:.2f}", f"{73 + s * 0.1:.2f}"])
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["station", "date", "variable", "value", "latitude", "longitude"])
        w.writerows(rows)


def run(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("GWTS_SEED", None)
    full_env.pop("GWTS_FIXTURE_DIR", None)
    if env:
        full_env.update(env)
    return subprocess.run([GWTS, *map(str, args)], capture_output=True, text=True, env=full_env, cwd=cwd)


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        cls.single = cls.dir / "single.csv"
        cls.net = cls.dir / "net.csv"
        write_single(cls.single)
        write_network(cls.net)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def out(self, name):
        return self.dir / name

    def fit(self, out, *extra):
        r = run("fit", "-i", self.single, "-o", out, *extra)
        self.assertEqual(r.returncode, 0, r.stderr)
        return json.loads((out / "var_model.json").read_text())

    def test_fit_diagnose_structural(self):
        out = self.out("pipeline")
        model = self.fit(out)
        self.assertEqual(len(model["lags"]), model["p"])
        self.assertEqual(model["var_names"], ["precipitation", "temperature", "gwl"])
        self.assertTrue((out / "lag_selection.csv").exists())
        r = run("diagnose", "-o", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        for f in ("diagnostics.json", "efp.csv", "efp.svg"):
            self.assertTrue((out / f).exists(), f)
        r = run("structural", "-o", out, "--boot", 20, "--seed", 3)
        self.assertEqual(r.returncode, 0, r.stderr)
        for f in ("granger.json", "irf.csv", "irf.svg", "fevd.csv", "fevd.svg"):
            self.assertTrue((out / f).exists(), f)

    def test_fixed_lag_and_config_precedence(self):
        cfg = self.dir / "cfg.ini"
        cfg.write_text("[fit]\nlag = 2\n")
        out = self.out("cfg")
        r = run("--config", cfg, "fit", "-i", self.single, "-o", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        p_cfg = json.loads((out / "var_model.json").read_text())["p"]
        self.assertEqual(p_cfg, 2)
        r = run("--config", cfg, "fit", "-i", self.single, "-o", out, "--lag", 3)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(json.loads((out / "var_model.json").read_text())["p"], 3)

    def test_seed_determinism(self):
        a, b, c = self.out("seed_a"), self.out("seed_b"), self.out("seed_c")
        for d in (a, b, c):
            self.fit(d, "--lag", 2)
        self.assertEqual(run("structural", "-o", a, "--boot", 30, "--seed", 7).returncode, 0)
        self.assertEqual(run("structural", "-o", b, "--boot", 30, env={"GWTS_SEED": "7"}).returncode, 0)
        self.assertEqual(run("structural", "-o", c, "--boot", 30, "--seed", 8).returncode, 0)
        self.assertTrue(filecmp.cmp(a / "irf.csv", b / "irf.csv", shallow=False))
        self.assertFalse(filecmp.cmp(a / "irf.csv", c / "irf.csv", shallow=False))

    def test_cdd_thresholds(self):
        out = self.out("cdd")
        r = run("cdd", "-i", self.net, "-o", out, "--threshold", 0)
        self.assertEqual(r.returncode, 0, r.stderr)
        lines = (out / "edges.csv").read_text().splitlines()
        self.assertEqual(len(lines), 1 + 10)
        geo = json.loads((out / "network.geojson").read_text())
        self.assertEqual(geo["type"], "FeatureCollection")
        r = run("cdd", "-i", self.net, "-o", out, "--threshold", 1.5)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual((out / "edges.csv").read_text().splitlines(), [lines[0]])

    def test_shelflife(self):
        out = self.out("shelf")
        r = run("shelflife", "-i", self.single, "-o", out, "--lag", 1)
        self.assertEqual(r.returncode, 0, r.stderr)
        result = json.loads((out / "shelf_life.json").read_text())
        self.assertIn("shelf_life_quarters", result)
        self.assertTrue((out / "ape.csv").exists())
        self.assertTrue((out / "plot.svg").exists())
        r = run("shelflife", "-i", self.single, "-o", self.out("shelf_sn"), "--forecaster", "seasonal-naive", "--period", 4)
        self.assertEqual(r.returncode, 0, r.stderr)

    def test_usage_errors_exit_2(self):
        cases = [
            ("fit", "-i", self.single, "--lag", 0),
            ("diagnose", "--alpha", 1),
            ("structural", "--h", 0),
            ("cdd", "-i", self.net, "--estimator", "nope"),
            ("nosuchcommand",),
            (),
        ]
        for args in cases:
            with self.subTest(args=args):
                self.assertEqual(run(*args, cwd=self.dir).returncode, 2)
        out = self.out("noseed")
        self.fit(out, "--lag", 1)
        r = run("structural", "-o", out, "--boot", 10)
        self.assertEqual(r.returncode, 2)
        self.assertIn("seed", r.stderr.lower())

    def test_runtime_errors_exit_1(self):
        r = run("fit", "-i", self.dir / "missing.csv", "-o", self.out("m"))
        self.assertEqual(r.returncode, 1)
        r = run("diagnose", "-o", self.out("empty_model_dir"))
        self.assertEqual(r.returncode, 1)
        self.assertIn("gwts fit", r.stderr)
        r = run("reproduce", "--data-dir", self.dir / "nofixtures", "-o", self.out("rp_missing"))
        self.assertEqual(r.returncode, 1)
        self.assertIn("patiyapura.csv", r.stderr)

    def test_reproduce_is_deterministic(self):
        fx = self.dir / "fixtures"
        fx.mkdir(exist_ok=True)
        write_single(fx / "patiyapura.csv")
        write_network(fx / "vadodara_gwl.csv")
        a, b = self.out("rp_a"), self.out("rp_b")
        for d in (a, b):
            r = run("reproduce", "-o", d, "--boot", 10, "--seed", 42, env={"GWTS_FIXTURE_DIR": str(fx)})
            self.assertEqual(r.returncode, 0, r.stderr)
        for f in ("summary.csv", "summary.md", "var_model.json", "irf.csv", "edges.csv", "shelf_life.json"):
            self.assertTrue((a / f).exists(), f)
        cmp = filecmp.dircmp(a, b)
        self.assertEqual(cmp.diff_files, [])
        self.assertEqual(cmp.left_only + cmp.right_only, [])


if __name__ == "__main__":
    unittest.main(verbosity=2)
