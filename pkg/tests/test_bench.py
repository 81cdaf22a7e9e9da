import math

import numpy as np
import pytest

from stratmc.bench import (
    CELL_COLUMNS,
    DESK_SCHEDULES,
    INTEGRATION,
    ORDER_COLUMNS,
    CellResult,
    ConvergenceReport,
    ExperimentConfig,
    check_size,
    efficiency,
    emit_csv,
    fit_line,
    fit_order,
    read_cells,
    replicate,
    simulate_once,
)
from stratmc.errors import ConfigurationError
from stratmc.finance import EUROPEAN, GbmParams, OptionSpec


def synthetic_report(c, alpha, Ns=(16, 64, 256, 1024)):
    rep = ConvergenceReport(EUROPEAN)
    for N in Ns:
        rep.cells.append(CellResult("mc", N, 10, 0.0, c * N ** -alpha, 1.0, 1.0))
    return rep


class TestFit:
    def test_exact_first_order(self):
        assert abs(fit_order(synthetic_report(3.0, 1.0), "mc") - 1.0) < 1e-9

    def test_three_halves(self):
        assert fit_order(synthetic_report(0.2, 1.5), "mc") == pytest.approx(1.5, abs=1e-9)

    def test_intercept(self):
        order, intercept = fit_line([4, 8, 16], [8 * 4 ** -2, 8 * 8 ** -2, 8 * 16 ** -2])
        assert order == pytest.approx(2.0) and intercept == pytest.approx(3.0)

    def test_zero_excluded_with_warning(self):
        warnings = []
        order, _ = fit_line([2, 4, 8, 16], [0.5, 0.25, 0.0, 0.0625], warnings)
        assert order == pytest.approx(1.0) and len(warnings) == 1

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_line([2, 4, 8], [1.0, 0.0, 0.5])


class TestEfficiency:
    def test_values(self):
        assert efficiency(0.5, 2.0) == 1.0
        assert efficiency(0.25, 2.0) == 2 * efficiency(0.5, 2.0)

    @pytest.mark.parametrize("v,t", [(0.0, 1.0), (1.0, 0.0), (math.nan, 1.0)])
    def test_missing(self, v, t):
        assert math.isnan(efficiency(v, t))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(EUROPEAN, (256,))
        assert cfg.params.P == 100 and cfg.option.strike == 90 and cfg.dimension == 2

    @pytest.mark.parametrize("kwargs", [dict(experiment="bermudan"), dict(reps=1), dict(samplers=("qmc",))])
    def test_invalid(self, kwargs):
        args = dict(experiment=EUROPEAN, schedule=(256,)) | kwargs
        with pytest.raises(ConfigurationError):
            ExperimentConfig(**args)

    def test_check_size(self):
        cfg = ExperimentConfig(EUROPEAN, (256,))
        check_size(cfg, "ss", 256)
        check_size(cfg, "mc", 300)
        with pytest.raises(ConfigurationError):
            check_size(cfg, "ss", 300)
        with pytest.raises(ConfigurationError):
            check_size(cfg, "smc", 1)

    def test_desk_schedules_are_powers(self):
        assert DESK_SCHEDULES["european"] == (256, 1024, 4096, 16384, 65536)
        assert DESK_SCHEDULES["asian"][0] == 125 and DESK_SCHEDULES["asian"][-1] == 64000


def small_config(**kw):
    params = GbmParams(S0=100, r=0.06, sigma=0.2, T=1.0, P=4)
    args = dict(experiment=EUROPEAN, schedule=(16, 64, 256), reps=8, seed=3,
                params=params, option=OptionSpec(90.0)) | kw
    return ExperimentConfig(**args)


class TestReplicate:
    def test_no_noise_gives_zero_variance(self):
        params = GbmParams(S0=100, r=0.06, sigma=0.0, T=1.0, P=4)
        rep = replicate(small_config(params=params))
        for c in rep.cells:
            assert c.variance == pytest.approx(0.0, abs=1e-20)
            assert math.isnan(c.efficiency)
        assert not rep.orders

    def test_identical_seeds_degenerate(self):
        cfg = small_config(reps=2)
        assert simulate_once(cfg, "ss", 64, 0) == simulate_once(cfg, "ss", 64, 0)
        assert simulate_once(cfg, "ss", 64, 0) != simulate_once(cfg, "ss", 64, 1)

    def test_report_shape(self):
        rep = replicate(small_config())
        assert len(rep.cells) == 4 * 3
        assert set(rep.orders) == {"mc", "smc", "lhs", "ss"}
        for c in rep.cells:
            assert c.error is None and c.variance > 0 and c.cpu_seconds > 0 and c.efficiency > 0

    def test_bad_cell_recorded(self):
        rep = replicate(small_config(schedule=(16, 50, 64, 256), samplers=("ss", "mc")))
        assert rep.cell("ss", 50).error is not None
        assert rep.cell("mc", 50).error is None
        assert rep.failed
        assert "ss" in rep.orders

    def test_deterministic(self):
        a = replicate(small_config(samplers=("lhs", "ss")))
        b = replicate(small_config(samplers=("lhs", "ss")))
        assert [(c.mean, c.variance) for c in a.cells] == [(c.mean, c.variance) for c in b.cells]

    def test_parallel_matches_serial(self):
        a = replicate(small_config(samplers=("ss",)))
        b = replicate(small_config(samplers=("ss",), jobs=2))
        assert [(c.mean, c.variance) for c in a.cells] == [(c.mean, c.variance) for c in b.cells]

    def test_integration_experiment(self):
        cfg = ExperimentConfig(INTEGRATION, (16, 64, 256), reps=20, seed=1)
        rep = replicate(cfg)
        for c in rep.cells:
            assert abs(c.mean - 0.5) < 0.1


class TestCsv:
    def test_header_only(self, tmp_path):
        cells, orders = emit_csv(ConvergenceReport(EUROPEAN), tmp_path / "r.csv")
        assert cells.read_text() == ",".join(CELL_COLUMNS) + "\n"
        assert orders.read_text() == ",".join(ORDER_COLUMNS) + "\n"
        assert orders.name == "orders.csv"

    def test_round_trip(self, tmp_path):
        rep = replicate(small_config(samplers=("mc", "ss")))
        path, orders = emit_csv(rep, tmp_path / "r.csv")
        rows = read_cells(path)
        assert all(len(r) == 8 for r in rows)
        for sampler in ("mc", "ss"):
            sel = [r for r in rows if r["sampler"] == sampler]
            order, _ = fit_line([float(r["N"]) for r in sel], [float(r["variance"]) for r in sel])
            assert abs(order - rep.orders[sampler][0]) < 1e-12
        assert len(read_cells(orders)) == 2

    def test_missing_values_blank(self, tmp_path):
        rep = ConvergenceReport(EUROPEAN, [CellResult("ss", 50, 10, error="bad")])
        path, _ = emit_csv(rep, tmp_path / "r.csv")
        row = read_cells(path)[0]
        assert row["variance"] == "" and row["N"] == "50"

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            emit_csv(ConvergenceReport(EUROPEAN), tmp_path / "missing" / "r.csv")
