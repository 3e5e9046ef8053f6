import json
import pickle

import numpy as np
import pytest

from depthrank.core.errors import DomainError, ReplicationError
from depthrank.services.depth import DepthSpec
from depthrank.services.model import GaussianMixture, alternative_families
from depthrank.services.powerlab import (
    LOCATION_GRID,
    METHOD_LABELS,
    TABLE4_DEPTH,
    TABLE4_SIZE,
    TABLES,
    SimPlan,
    Stopwatch,
    cell_seed,
    mc_power,
    power_grid,
    reference_row,
    reproduce,
    run_manifest,
    save_grid,
)

MAHALANOBIS = DepthSpec(method="mahalanobis")


def location_plan(**overrides):
    options = dict(
        test="q",
        F=GaussianMixture.standard(),
        G=alternative_families("location-scale", 0.3),
        m=30,
        n=30,
        replications=40,
        seed=11,
        depth=MAHALANOBIS,
    )
    options.update(overrides)
    return SimPlan(**options)


class TestMonteCarlo:
    def test_worker_count_does_not_change_rate(self):
        plan = location_plan()
        assert mc_power(plan, n_jobs=1) == mc_power(plan, n_jobs=2)

    def test_same_seed_same_rate(self):
        assert mc_power(location_plan(test="t2"), n_jobs=1) == mc_power(location_plan(test="t2"), n_jobs=1)

    def test_single_replication(self):
        rate, se = mc_power(location_plan(replications=1), n_jobs=1)
        assert rate in (0.0, 1.0)
        assert se == 0.0

    def test_standard_error(self):
        rate, se = mc_power(location_plan(replications=40), n_jobs=1)
        assert se == pytest.approx(np.sqrt(rate * (1 - rate) / 40))

    def test_t2_null_rate(self):
        plan = location_plan(test="t2", G=GaussianMixture.standard(), replications=400, seed=3)
        rate, _ = mc_power(plan, n_jobs=1)
        assert 0.01 <= rate <= 0.10

    def test_failure_names_replication(self):
        plan = location_plan(depth=DepthSpec(method="cdf1d"), replications=3)
        with pytest.raises(ReplicationError) as info:
            mc_power(plan, n_jobs=1)
        assert info.value.replication == 0
        assert info.value.exit_code == 2

    def test_replication_error_pickles(self):
        plan = location_plan(depth=DepthSpec(method="cdf1d"), replications=3)
        with pytest.raises(ReplicationError) as info:
            mc_power(plan, n_jobs=1)
        copy = pickle.loads(pickle.dumps(info.value))
        assert copy.replication == 0
        assert copy.exit_code == info.value.exit_code
        assert copy.to_dict() == info.value.to_dict()

    def test_plan_validation(self):
        with pytest.raises(DomainError):
            location_plan(test="kolmogorov")
        with pytest.raises(DomainError):
            location_plan(replications=0)
        with pytest.raises(DomainError):
            location_plan(F=GaussianMixture.standard(3))

    def test_plan_dict(self):
        doc = location_plan().to_dict()
        assert doc["test"] == "q"
        assert doc["replications"] == 40
        assert len(doc["G"]["components"]) == 1
        json.dumps(doc)

    def test_cell_seeds_distinct(self):
        seeds = {cell_seed(0, i) for i in range(500)}
        assert len(seeds) == 500
        assert cell_seed(1, 0) != cell_seed(0, 0)
        assert all(0 <= s < 2 ** 64 for s in seeds)


class TestReproduce:
    def test_table1_analytic_only(self):
        grid = reproduce("table1", monte_carlo=False)
        assert grid.methods() == ["T2", "O", "Q"]
        assert grid.groups() == ["n=100", "n=200"]
        np.testing.assert_allclose(grid.row("T2", "n=200"), reference_row("table1", "n=200", "T2"), atol=0.005)
        assert all(v is None for v in grid.row("O", "n=100"))
        assert grid.params("n=100") == list(LOCATION_GRID)

    def test_table3_q_monotone(self):
        grid = reproduce("table3", monte_carlo=False)
        for group in grid.groups():
            row = grid.row("Q", group)
            assert row == sorted(row)

    def test_table4_analytic_only_is_empty(self):
        assert reproduce("table4", monte_carlo=False).cells == []

    def test_fig1(self):
        grid = reproduce("fig1")
        assert len(grid.cells) == 13 * 21
        assert grid.cell("Q", 0.0, "sigma2=1").power == pytest.approx(0.5)

    def test_fig2_analytic_only(self):
        grid = reproduce("fig2", monte_carlo=False)
        assert all(c.power is None for c in grid.cells if c.method == "O")

    def test_unknown_target_and_budget(self):
        with pytest.raises(DomainError):
            reproduce("table9")
        with pytest.raises(DomainError):
            reproduce("table1", budget="huge")

    def test_reference_row_lookup(self):
        assert reference_row("table3", "n=100", "T2")[3] == 0.493
        with pytest.raises(DomainError):
            reference_row("table3", "n=300", "T2")

    @pytest.mark.slow
    @pytest.mark.parametrize("test, tolerance", [("q", 0.05), ("t2", 0.03)])
    @pytest.mark.parametrize("row", TABLES["table4"].rows, ids=lambda row: row.family)
    def test_table4_rows(self, row, test, tolerance):
        grid = power_grid(
            row.family, row.params, TABLE4_SIZE, TABLE4_SIZE, test=test,
            replications=1000, seed=4, depth=TABLE4_DEPTH,
        )
        expected = row.reference[METHOD_LABELS[test]]
        np.testing.assert_allclose([c.power for c in grid.cells], expected, atol=tolerance)

    @pytest.mark.slow
    def test_table3_oja_point(self):
        grid = power_grid("location-scale", [0.25], 100, 100, test="oja", replications=1000, seed=5)
        assert grid.cells[0].power == pytest.approx(reference_row("table3", "n=100", "O")[3], abs=0.04)


class TestPowerGrid:
    def test_cells(self):
        grid = power_grid("pure-location", [0.0, 0.5], 20, 20, test="t2", replications=30, seed=2, n_jobs=1)
        assert grid.target == "power:pure-location"
        assert [c.param for c in grid.cells] == [0.0, 0.5]
        assert all(c.method == "T2" and c.source == "monte-carlo" for c in grid.cells)
        assert grid.groups() == ["m=20,n=20"]

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            power_grid("shear", [1.0], 10, 10)

    def test_save_grid(self, tmp_path):
        grid = reproduce("table1", monte_carlo=False)
        with Stopwatch() as clock:
            manifest = run_manifest("table1", {"budget": "paper"}, wall_time=0.0, seed=0, budget="paper")
        paths = save_grid(grid, manifest.model_copy(update={"wall_time": clock.elapsed}), tmp_path / "out")
        assert [p.name for p in paths] == ["table1.csv", "table1.manifest.json"]
        assert paths[0].read_text().splitlines()[0] == "param,method,power,mc_se,source,group"
        saved = json.loads(paths[1].read_text())
        assert saved["outputs"] == ["table1.csv", "table1.manifest.json"]
        assert saved["budget"] == "paper"
