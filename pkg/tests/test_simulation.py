import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from dpsurv.datasets import save_dataset
from dpsurv.exceptions import HarnessError, UnknownDataset
from dpsurv.managers import RecordStore
from dpsurv.simulation.report import ReportWriter, emit_report, load_summaries
from dpsurv.simulation.runner import (
    WorkItem,
    compute_baseline,
    run,
    work_items,
)
from dpsurv.structures import MethodTag, SimulationPlan

from .misc import make_record, synthetic_dataset


EPSILONS = (1.0, math.inf)


class SimulationTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        cls.dataset = synthetic_dataset(n=150, seed=3)
        cls.fixture = cls.root / "synthetic.csv"
        save_dataset(cls.dataset, cls.fixture)

    @classmethod
    def tearDownClass(cls) -> None:
        cls.tmp.cleanup()

    def plan(self, iterations=3, methods=tuple(MethodTag), epsilons=EPSILONS):
        return SimulationPlan(
            datasets=(str(self.fixture),),
            methods=methods,
            epsilons=epsilons,
            iterations=iterations,
            base_seed=7,
        )


class TestRunner(SimulationTestCase):
    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        plan = SimulationPlan(
            datasets=(str(cls.fixture),),
            methods=tuple(MethodTag),
            epsilons=EPSILONS,
            iterations=3,
            base_seed=7,
        )
        cls.store = run(plan, RecordStore(cls.root / "serial"))

    def test_records(self):
        self.assertEqual(
            self.store.conditions(),
            {
                ("synthetic", tag.value, eps): 3
                for tag in MethodTag
                for eps in EPSILONS
            },
        )

    def test_infinite_budget_reproduces_baseline(self):
        baseline = self.store.read_baselines()["synthetic"]

        for tag in (MethodTag.PHASE1, MethodTag.PHASE2, MethodTag.OUTPUT):
            for record in self.store.read("synthetic", tag.value):
                if math.isinf(record.epsilon):
                    self.assertTrue(record.converged)
                    np.testing.assert_array_equal(
                        record.p_value, baseline.cox.p_value
                    )
                    np.testing.assert_array_equal(record.hr, baseline.cox.hr)

        config = baseline.metrics_config(MethodTag.PHASE3)
        for record in self.store.read("synthetic", MethodTag.PHASE3.value):
            if math.isinf(record.epsilon):
                np.testing.assert_array_equal(
                    record.p_value, list(config.baseline_p.values())
                )

    def test_shared_splits(self):
        # at eps=inf phase 1 and phase 2 fit the same training rows
        phase1 = self.store.read("synthetic", "phase1")
        phase2 = self.store.read("synthetic", "phase2")

        for a, b in zip(phase1, phase2):
            if math.isinf(a.epsilon):
                self.assertEqual(a.train_c, b.train_c)
                self.assertEqual(a.test_c, b.test_c)

    def test_manifest(self):
        manifest = self.store.read_manifest()

        self.assertEqual(manifest["plan"]["iterations"], 3)
        self.assertEqual(manifest["plan"]["base_seed"], 7)
        self.assertEqual(len(manifest["fixtures"]["synthetic"]), 64)

    def test_worker_count(self):
        store = run(self.plan(), RecordStore(self.root / "parallel"), workers=2)

        for name in ("baselines.json", "manifest.json"):
            self.assertEqual(
                (store.root / name).read_bytes(),
                (self.store.root / name).read_bytes(),
            )

        for dataset, method in self.store.pairs():
            self.assertEqual(
                store.shard_path(dataset, method).read_bytes(),
                self.store.shard_path(dataset, method).read_bytes(),
            )

    def test_rerun_is_identical(self):
        store = run(self.plan(), RecordStore(self.root / "again"))

        for dataset, method in self.store.pairs():
            self.assertEqual(
                store.shard_path(dataset, method).read_bytes(),
                self.store.shard_path(dataset, method).read_bytes(),
            )

    def test_unknown_dataset(self):
        plan = SimulationPlan(
            datasets=("nope",), methods=(MethodTag.PHASE1,), epsilons=(1.0,)
        )

        with self.assertRaises(UnknownDataset):
            run(plan, RecordStore(self.root / "unknown"))


class TestWorkItems(unittest.TestCase):
    def test_order(self):
        plan = SimulationPlan(
            datasets=("a",),
            methods=(MethodTag.PHASE1, MethodTag.OUTPUT),
            epsilons=(1.0, math.inf),
            iterations=2,
        )

        items = work_items(plan, ["a"])

        self.assertEqual(len(items), 8)
        self.assertEqual(items[0], WorkItem("a", MethodTag.PHASE1, 1.0, 0))
        self.assertEqual(items[-1], WorkItem("a", MethodTag.OUTPUT, math.inf, 1))


class TestBaseline(unittest.TestCase):
    def test_compute_baseline(self):
        dataset = synthetic_dataset(n=200)
        baseline = compute_baseline(dataset)

        self.assertTrue(baseline.cox.converged)
        self.assertEqual(baseline.grid.K, min(dataset.events, 8))
        self.assertEqual(
            baseline.glm.terms[baseline.grid.K :], baseline.cox.terms
        )
        self.assertGreater(baseline.c_index, 0.5)
        self.assertLessEqual(baseline.exclusions, set(baseline.cox.terms))


class TestReport(SimulationTestCase):
    def test_empty_store(self):
        store = RecordStore(self.root / "empty")

        paths = emit_report(store, self.root / "empty-report")

        self.assertIn("thresholds.csv", paths)
        for name, path in paths.items():
            if name.endswith(".csv"):
                self.assertEqual(len(path.read_text().splitlines()), 1, name)

    def test_missing_baseline(self):
        store = RecordStore(self.root / "orphan")
        store.write([make_record([0.1, 0.2, 0.3])])

        with self.assertRaises(HarnessError):
            load_summaries(store)

    def test_report(self):
        store = run(
            self.plan(iterations=2, methods=(MethodTag.PHASE1, MethodTag.OUTPUT)),
            RecordStore(self.root / "reported"),
        )

        with self.assertLogs("dpsurv", level="WARNING"):
            paths = emit_report(store)

        # the stored grid is not the full default grid
        self.assertNotIn("thresholds.csv", paths)
        summary = paths["summary.csv"].read_text().splitlines()
        self.assertEqual(len(summary), 1 + 2 * len(EPSILONS))

        paths = emit_report(store, epsilons=EPSILONS)
        self.assertIn("thresholds.csv", paths)
        self.assertEqual(len(paths["thresholds.csv"].read_text().splitlines()), 3)

        summaries = load_summaries(store)
        infinite = [s for s in summaries if math.isinf(s.epsilon)]
        for s in infinite:
            self.assertEqual(s.delta_c, 0.0)
            self.assertEqual(s.nonconverged_rate, 0.0)

    def test_hr_distribution(self):
        store = run(
            self.plan(iterations=2, methods=(MethodTag.PHASE1,)),
            RecordStore(self.root / "distribution"),
        )
        writer = ReportWriter(store, self.root / "distribution-report")
        writer.output_dir.mkdir(parents=True)

        path = writer.write_hr_distribution()
        lines = path.read_text().splitlines()

        # 4 terms, all shown, per converged iteration
        converged = sum(r.converged for r in store.read())
        self.assertEqual(len(lines), 1 + 4 * converged)
        self.assertEqual(lines[1].split(",")[5], "1")


if __name__ == "__main__":
    unittest.main()
