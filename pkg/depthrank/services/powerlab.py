"""
Seeded Monte Carlo power estimation and the table/figure drivers.

Replication r of a plan draws X ~ F, then Y ~ G, then any random
directions the test needs, all from RngStream(seed, r). Replications are
grouped into ordered chunks and only an integer reject count is reduced,
so a plan gives the same rate for every worker count.
"""

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from depthrank import __version__
from depthrank.core.config import settings
from depthrank.core.errors import DepthRankError, DomainError, ReplicationError
from depthrank.schemas.mixture import MixtureDocument
from depthrank.schemas.power import PowerCell, PowerGrid, RunManifest
from depthrank.services.competitors import OjaConfig, hotelling_t2_test, oja_test
from depthrank.services.depth import DepthSpec
from depthrank.services.model import (
    FAMILIES,
    GaussianMixture,
    RngStream,
    alternative_families,
    sample,
)
from depthrank.services.parallel import chunk_ranges, ordered_map
from depthrank.services.ranksum import null_test
from depthrank.services.theory import PowerQuery, beta_q, beta_t2, figure_grids

logger = logging.getLogger(__name__)

TESTS = ("q", "t2", "oja")
TARGETS = ("table1", "table2", "table3", "table4", "fig1", "fig2")
METHOD_LABELS = {"t2": "T2", "q": "Q", "oja": "O"}

LOCATION_GRID = (0.0, 0.15, 0.20, 0.25, 0.30, 0.35)
SCALE_GRID = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)
TABLE4_SIZE = 25
TABLE4_DEPTH = DepthSpec(method="projection", mode="approximate", n_directions=1000, location_scale="median-mad")


@dataclass(frozen=True)
class SimPlan:
    """One Monte Carlo experiment: a test applied to repeated samples from F and G."""

    test: str
    F: GaussianMixture
    G: GaussianMixture
    m: int
    n: int
    alpha: float = 0.05
    replications: int = 1000
    seed: int = 0
    depth: DepthSpec = field(default_factory=DepthSpec)
    oja: OjaConfig = field(default_factory=OjaConfig)

    def __post_init__(self):
        if self.test not in TESTS:
            raise DomainError(f"unknown test '{self.test}'", valid=list(TESTS))
        if self.replications < 1:
            raise DomainError("replications must be positive", replications=self.replications)
        if self.m < 1 or self.n < 1:
            raise DomainError("sample sizes must be positive", m=self.m, n=self.n)
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)", alpha=self.alpha)
        if self.F.dim != self.G.dim:
            raise DomainError("F and G have different dimensions", f_dim=self.F.dim, g_dim=self.G.dim)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer", seed=self.seed)

    def to_dict(self) -> Dict:
        out = {
            "test": self.test,
            "F": MixtureDocument.from_mixture(self.F).model_dump(),
            "G": MixtureDocument.from_mixture(self.G).model_dump(),
            "m": self.m,
            "n": self.n,
            "alpha": self.alpha,
            "replications": self.replications,
            "seed": int(self.seed),
        }
        if self.test == "q":
            out["depth"] = self.depth.label()
            out["n_directions"] = self.depth.n_directions
        if self.test == "oja":
            out["oja_mode"] = self.oja.mode
            out["n_subsets"] = self.oja.n_subsets
        return out


def _replication_rejects(plan: SimPlan, r: int) -> bool:
    gen = RngStream(plan.seed, r).generator()
    X = sample(plan.F, plan.m, gen)
    Y = sample(plan.G, plan.n, gen)
    if plan.test == "q":
        report = null_test(X, Y, plan.depth, plan.alpha, rng=gen)
    elif plan.test == "t2":
        report = hotelling_t2_test(X, Y, plan.alpha)
    else:
        report = oja_test(X, Y, plan.oja, plan.alpha, rng=gen)
    return report.reject


def _count_rejects(plan: SimPlan, bounds: Tuple[int, int]) -> int:
    count = 0
    for r in range(*bounds):
        try:
            count += int(_replication_rejects(plan, r))
        except DepthRankError as exc:
            raise ReplicationError(r, exc) from exc
    return count


def mc_power(plan: SimPlan, n_jobs: Optional[int] = None, desc: Optional[str] = None) -> Tuple[float, float]:
    """
    Rejection rate of plan.test over plan.replications seeded replications,
    with its Monte Carlo standard error √(r(1−r)/R).
    """
    tasks = chunk_ranges(plan.replications, settings.REPLICATION_CHUNK)
    counts = ordered_map(lambda b: _count_rejects(plan, b), tasks, n_jobs=n_jobs, desc=desc)
    rejects = int(sum(counts))
    rate = rejects / plan.replications
    mc_se = float(np.sqrt(rate * (1.0 - rate) / plan.replications))
    logger.debug(f"mc_power {plan.test}: {rejects}/{plan.replications} rejections")
    return rate, mc_se


def cell_seed(seed: int, index: int) -> int:
    """Independent seed for the index-th Monte Carlo cell of a run."""
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


# Table definitions

@dataclass(frozen=True)
class TableRow:
    group: str
    family: str
    params: Tuple[float, ...]
    n: int
    reference: Dict[str, Tuple[float, ...]]


@dataclass(frozen=True)
class TableDefinition:
    target: str
    description: str
    param_name: str
    rows: Tuple[TableRow, ...]
    monte_carlo_only: bool = False


TABLES: Dict[str, TableDefinition] = {
    "table1": TableDefinition(
        target="table1",
        description="asymptotic power under contaminated location shift",
        param_name="u",
        rows=(
            TableRow("n=100", "contaminated-location", LOCATION_GRID, 100, {
                "T2": (0.050, 0.117, 0.155, 0.196, 0.239, 0.284),
                "Q": (0.051, 0.245, 0.286, 0.307, 0.381, 0.443),
                "O": (0.046, 0.157, 0.296, 0.423, 0.558, 0.687),
            }),
            TableRow("n=200", "contaminated-location", LOCATION_GRID, 200, {
                "T2": (0.050, 0.193, 0.273, 0.357, 0.441, 0.521),
                "Q": (0.051, 0.430, 0.508, 0.549, 0.659, 0.746),
                "O": (0.056, 0.342, 0.546, 0.712, 0.881, 0.941),
            }),
        ),
    ),
    "table2": TableDefinition(
        target="table2",
        description="asymptotic power under contaminated scale change",
        param_name="sigma2",
        rows=(
            TableRow("n=100", "contaminated-scale", SCALE_GRID, 100, {
                "T2": (0.050, 0.050, 0.052, 0.054, 0.056, 0.059),
                "Q": (0.051, 0.181, 0.430, 0.734, 0.891, 0.963),
                "O": (0.048, 0.054, 0.057, 0.064, 0.068, 0.070),
            }),
            TableRow("n=200", "contaminated-scale", SCALE_GRID, 200, {
                "T2": (0.050, 0.051, 0.054, 0.058, 0.063, 0.068),
                "Q": (0.051, 0.299, 0.740, 0.950, 0.994, 1.000),
                "O": (0.052, 0.059, 0.063, 0.085, 0.112, 0.139),
            }),
        ),
    ),
    "table3": TableDefinition(
        target="table3",
        description="asymptotic power under location-scale change",
        param_name="u",
        rows=(
            TableRow("n=100", "location-scale", LOCATION_GRID, 100, {
                "T2": (0.050, 0.219, 0.348, 0.493, 0.634, 0.755),
                "Q": (0.051, 0.437, 0.662, 0.839, 0.941, 0.983),
                "O": (0.046, 0.218, 0.324, 0.430, 0.573, 0.708),
            }),
            TableRow("n=200", "location-scale", LOCATION_GRID, 200, {
                "T2": (0.050, 0.404, 0.625, 0.805, 0.916, 0.970),
                "Q": (0.049, 0.725, 0.922, 0.987, 0.999, 1.000),
                "O": (0.056, 0.357, 0.569, 0.755, 0.882, 0.944),
            }),
        ),
    ),
    "table4": TableDefinition(
        target="table4",
        description="observed rejection frequency at m = n = 25",
        param_name="param",
        monte_carlo_only=True,
        rows=(
            TableRow("contaminated-location", "contaminated-location", LOCATION_GRID, TABLE4_SIZE, {
                "T2": (0.058, 0.083, 0.108, 0.142, 0.151, 0.189),
                "Q": (0.057, 0.154, 0.156, 0.170, 0.203, 0.216),
                "O": (0.047, 0.084, 0.116, 0.152, 0.201, 0.254),
            }),
            TableRow("contaminated-scale", "contaminated-scale", SCALE_GRID, TABLE4_SIZE, {
                "T2": (0.059, 0.063, 0.059, 0.073, 0.061, 0.067),
                "Q": (0.063, 0.145, 0.243, 0.377, 0.469, 0.581),
                "O": (0.051, 0.058, 0.041, 0.053, 0.043, 0.055),
            }),
            TableRow("location-scale", "location-scale", LOCATION_GRID, TABLE4_SIZE, {
                "T2": (0.069, 0.113, 0.147, 0.183, 0.220, 0.269),
                "Q": (0.060, 0.245, 0.324, 0.418, 0.498, 0.587),
                "O": (0.044, 0.082, 0.089, 0.127, 0.197, 0.221),
            }),
        ),
    ),
}


@dataclass(frozen=True)
class Budget:
    """Replication counts and Oja settings for one reproduction budget."""

    name: str
    oja_replications: int
    table4_replications: int
    oja: OjaConfig


BUDGETS: Dict[str, Budget] = {
    "paper": Budget("paper", oja_replications=2000, table4_replications=1000, oja=OjaConfig()),
    "quick": Budget(
        "quick",
        oja_replications=100,
        table4_replications=200,
        oja=OjaConfig(mode="subset-sampled", n_subsets=2000),
    ),
}


def reference_row(target: str, group: str, method: str) -> Tuple[float, ...]:
    """Printed reference values of one table row."""
    table = TABLES.get(target)
    if table is None:
        raise DomainError(f"unknown table '{target}'", valid=sorted(TABLES))
    for row in table.rows:
        if row.group == group:
            return row.reference[method]
    raise DomainError(f"table {target} has no group '{group}'", valid=[r.group for r in table.rows])


def _mc_cell(
    test: str,
    family: str,
    param: float,
    n: int,
    replications: int,
    seed: int,
    alpha: float,
    group: str,
    depth: DepthSpec,
    oja: OjaConfig,
    n_jobs: Optional[int],
) -> PowerCell:
    plan = SimPlan(
        test=test,
        F=GaussianMixture.standard(2),
        G=alternative_families(family, param),
        m=n,
        n=n,
        alpha=alpha,
        replications=replications,
        seed=seed,
        depth=depth,
        oja=oja,
    )
    rate, se = mc_power(plan, n_jobs=n_jobs, desc=f"{METHOD_LABELS[test]} {group} {param:g}")
    return PowerCell(param=param, method=METHOD_LABELS[test], power=rate, mc_se=se, source="monte-carlo", group=group)


def reproduce(
    target: str,
    budget: str = "paper",
    seed: int = 0,
    alpha: float = 0.05,
    monte_carlo: bool = True,
    n_jobs: Optional[int] = None,
) -> PowerGrid:
    """
    Rebuild one of the published tables or figures.

    Tables 1–3 take β_T² and β_Q from the asymptotic formulas and β_O from
    Monte Carlo; table 4 is Monte Carlo throughout at m = n = 25; the
    figures come from the analytic grids, with fig2's β_O filled by Monte
    Carlo. With monte_carlo=False the Monte Carlo cells stay empty.
    """
    if target not in TARGETS:
        raise DomainError(f"unknown target '{target}'", valid=list(TARGETS))
    if budget not in BUDGETS:
        raise DomainError(f"unknown budget '{budget}'", valid=sorted(BUDGETS))
    plan = BUDGETS[budget]
    logger.info(f"Reproducing {target} with the {budget} budget")

    if target == "fig1":
        return figure_grids("fig1", alpha=alpha)
    if target == "fig2":
        grid = figure_grids("fig2", alpha=alpha, n_jobs=n_jobs)
        if not monte_carlo:
            return grid
        cells = []
        for index, cell in enumerate(grid.cells):
            if cell.method == "O":
                n = int(cell.group.split("=")[1])
                cell = _mc_cell(
                    "oja", "pure-scale", cell.param, n, plan.oja_replications,
                    cell_seed(seed, index), alpha, cell.group, DepthSpec(), plan.oja, n_jobs,
                )
            cells.append(cell)
        return grid.model_copy(update={"cells": cells})

    table = TABLES[target]
    cells: List[PowerCell] = []
    index = 0
    for row in table.rows:
        for param in row.params:
            if table.monte_carlo_only:
                if monte_carlo:
                    for test in ("t2", "oja", "q"):
                        cells.append(_mc_cell(
                            test, row.family, param, row.n, plan.table4_replications,
                            cell_seed(seed, index), alpha, row.group, TABLE4_DEPTH, plan.oja, n_jobs,
                        ))
                        index += 1
                continue

            query = PowerQuery(row.family, param, row.n, row.n, alpha)
            cells.append(PowerCell(param=param, method="T2", power=beta_t2(query), source="analytic", group=row.group))
            if monte_carlo:
                cells.append(_mc_cell(
                    "oja", row.family, param, row.n, plan.oja_replications,
                    cell_seed(seed, index), alpha, row.group, DepthSpec(), plan.oja, n_jobs,
                ))
            else:
                cells.append(PowerCell(param=param, method="O", source="monte-carlo", group=row.group))
            index += 1
            cells.append(PowerCell(param=param, method="Q", power=beta_q(query), source="analytic", group=row.group))

    logger.info(f"Finished {target}: {len(cells)} cells")
    return PowerGrid(target=target, description=table.description, param_name=table.param_name, cells=cells)


def power_grid(
    family: str,
    params: Sequence[float],
    m: int,
    n: int,
    test: str = "q",
    alpha: float = 0.05,
    replications: int = 1000,
    seed: int = 0,
    depth: Optional[DepthSpec] = None,
    oja: Optional[OjaConfig] = None,
    n_jobs: Optional[int] = None,
) -> PowerGrid:
    """Monte Carlo power of one test along a parameter grid of a family, F = N₂(0, I₂)."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family '{family}'", valid=list(FAMILIES))
    if test not in TESTS:
        raise DomainError(f"unknown test '{test}'", valid=list(TESTS))
    group = f"m={m},n={n}"
    cells = []
    for index, param in enumerate(params):
        plan = SimPlan(
            test=test,
            F=GaussianMixture.standard(2),
            G=alternative_families(family, float(param)),
            m=m,
            n=n,
            alpha=alpha,
            replications=replications,
            seed=cell_seed(seed, index),
            depth=depth or DepthSpec(),
            oja=oja or OjaConfig(),
        )
        rate, se = mc_power(plan, n_jobs=n_jobs, desc=f"{METHOD_LABELS[test]} {float(param):g}")
        cells.append(
            PowerCell(param=float(param), method=METHOD_LABELS[test], power=rate, mc_se=se, source="monte-carlo", group=group)
        )
    return PowerGrid(target=f"power:{family}", description=f"{test} power, {family}", cells=cells)


def run_manifest(
    target: str,
    plan: Dict,
    wall_time: float,
    seed: Optional[int] = None,
    budget: Optional[str] = None,
    replications: Optional[int] = None,
    threads: int = 1,
    outputs: Sequence[str] = (),
) -> RunManifest:
    return RunManifest(
        target=target,
        version=__version__,
        plan=plan,
        seed=seed,
        budget=budget,
        replications=replications,
        threads=threads,
        wall_time=wall_time,
        created=datetime.now(timezone.utc).isoformat(),
        outputs=list(outputs),
    )


def save_grid(grid: PowerGrid, manifest: RunManifest, out_dir, stem: Optional[str] = None) -> List[Path]:
    """Write <stem>.csv and <stem>.manifest.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or grid.target.replace(":", "-")
    csv_path = out / f"{stem}.csv"
    manifest_path = out / f"{stem}.manifest.json"
    csv_path.write_text(grid.to_csv(), encoding="utf-8")
    manifest = manifest.model_copy(update={"outputs": [csv_path.name, manifest_path.name]})
    manifest_path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Wrote {csv_path} and {manifest_path}")
    return [csv_path, manifest_path]


class Stopwatch:
    """Wall-clock timer for run manifests."""

    def __enter__(self) -> "Stopwatch":
        self.start = time.perf_counter()
        self.elapsed = 0.0
        return self

    def __exit__(self, *exc) -> None:
        self.elapsed = time.perf_counter() - self.start
