import numpy as np
import pytest

from splitqc import one_local_z
from splitqc.gradients import parameter_shift_gradient
from splitqc.scans import (
    CSV_SCHEMA,
    ScanConfig,
    VarianceRecord,
    _batched_costs,
    _CellEvaluator,
    _draw_params,
    fit_decay,
    read_records_csv,
    run_scan,
    scan_delta_cost,
    scan_ecs,
    scan_first_param_gradient,
    scan_layers,
    write_records_csv,
)


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig((4,), (4,), (1,), samples=1)
    with pytest.raises(ValueError):
        ScanConfig((4,), (4,), (1,), statistic="mystery")
    with pytest.raises(ValueError):
        ScanConfig((4,), (4,), (1,), observable="mystery")
    with pytest.raises(ValueError):
        ScanConfig((6, 9), (4,), (1,))  # 4 divides neither
    with pytest.raises(ValueError):
        ScanConfig((4,), ("q",), (1,))
    cfg = ScanConfig((4, 6), (4, "n"), (1,))
    # m=4 cell at N=6 is skipped, sentinel expands everywhere
    assert cfg.cells() == [(4, 4, 1, 0), (4, 4, 1, 0), (6, 6, 1, 0)]


def test_zero_layer_cell_has_zero_variance():
    recs = run_scan(ScanConfig((4,), ("n",), (0,), samples=10, seed=1))
    assert recs[0].variance == 0.0


def test_records_validate():
    with pytest.raises(ValueError):
        VarianceRecord(4, 4, 1, 0, "delta_cost", -1e-3, 10, 0)
    with pytest.raises(ValueError):
        VarianceRecord(4, 4, 1, 0, "delta_cost", float("nan"), 10, 0)


def test_scan_determinism_and_worker_independence():
    cfg = ScanConfig((4, 6), (2, "n"), (2,), samples=60, seed=9)
    a = run_scan(cfg)
    b = run_scan(cfg)
    c = run_scan(cfg, workers=3)
    assert a == b == c


def test_block_path_matches_full_simulation():
    ev = _CellEvaluator(6, 2, 2, 0, "one_local_z", "ladder_ry_cx")
    assert ev.views is not None
    draws = _draw_params(7, 6, 2, 2, 0, 40, ev.num_params)
    via_blocks = ev.costs(draws)
    full = _batched_costs(ev.circuit, draws, one_local_z(6))
    assert np.max(np.abs(via_blocks - full)) < 1e-10


def test_costs_stay_in_spectral_range():
    ev = _CellEvaluator(5, 5, 3, 0, "one_local_z", "ladder_ry_cx")
    draws = _draw_params(0, 5, 5, 3, 0, 200, ev.num_params)
    costs = ev.costs(draws)
    assert np.all(costs <= 1.0 + 1e-12) and np.all(costs >= -1.0 - 1e-12)


def test_wide_split_cell_is_cheap_but_full_cell_is_capped():
    rec = run_scan(ScanConfig((24,), (2,), (2,), samples=20, seed=0))[0]
    assert rec.variance > 0
    with pytest.raises(ValueError):
        run_scan(ScanConfig((16,), ("n",), (1,), samples=10, seed=0))


def test_gradient_statistic_matches_shift_rule():
    cfg = ScanConfig((4,), ("n",), (2,), samples=25, seed=11,
                     statistic="first_param_grad")
    rec = run_scan(cfg)[0]
    ev = _CellEvaluator(4, 4, 2, 0, "one_local_z", "ladder_ry_cx")
    draws = _draw_params(11, 4, 4, 2, 0, 25, ev.num_params)
    obs = one_local_z(4)
    manual = np.array([parameter_shift_gradient(ev.circuit, row, obs)[0] for row in draws])
    assert rec.variance == pytest.approx(float(np.var(manual, ddof=1)), rel=1e-12)


def test_gradient_statistic_block_path():
    # for a split cell only block 0 matters for theta_0
    ev = _CellEvaluator(6, 2, 2, 0, "one_local_z", "ladder_ry_cx")
    draws = _draw_params(3, 6, 2, 2, 0, 30, ev.num_params)
    g_block = ev.first_param_gradients(draws)
    obs = one_local_z(6)
    g_full = np.array([parameter_shift_gradient(ev.circuit, row, obs)[0] for row in draws])
    assert np.max(np.abs(g_block - g_full)) < 1e-10


def test_gradient_mean_is_centered_for_deep_circuit():
    cfg = ScanConfig((6,), ("n",), (6,), samples=400, seed=21,
                     statistic="first_param_grad")
    ev = _CellEvaluator(6, 6, 6, 0, "one_local_z", "ladder_ry_cx")
    draws = _draw_params(21, 6, 6, 6, 0, 400, ev.num_params)
    g = ev.first_param_gradients(draws)
    se = g.std(ddof=1) / np.sqrt(g.size)
    assert abs(g.mean()) < 4 * se
    assert run_scan(cfg)[0].variance == pytest.approx(float(np.var(g, ddof=1)))


def test_half_sample_stability():
    ev = _CellEvaluator(6, 6, 6, 0, "one_local_z", "ladder_ry_cx")
    draws = _draw_params(5, 6, 6, 6, 0, 800, ev.num_params)
    costs = ev.costs(draws)
    deltas = costs[0::2] - costs[1::2]
    va = np.var(deltas[: deltas.size // 2], ddof=1)
    vb = np.var(deltas[deltas.size // 2:], ddof=1)
    assert abs(va - vb) / max(va, vb) < 0.30


def test_scan_layers_cap():
    with pytest.raises(ValueError):
        scan_layers(ScanConfig((4,), (4,), (250,), samples=4, seed=0))


def test_scan_ecs_t_zero_vs_t_full():
    cfg = ScanConfig((4,), (2,), (1,), t_values=(0, 3), samples=40, seed=2,
                     observable="tfih")
    recs = scan_ecs(cfg, total_depth=3)
    assert [(r.l, r.t) for r in recs] == [(0, 3), (3, 0)]
    assert all(r.variance >= 0 and np.isfinite(r.variance) for r in recs)


def test_scan_ecs_m_is_irrelevant_at_full_tail():
    a = scan_ecs(ScanConfig((4,), (2,), (1,), t_values=(2,), samples=50, seed=6),
                 total_depth=2)[0]
    b = scan_ecs(ScanConfig((4,), (4,), (1,), t_values=(2,), samples=50, seed=6),
                 total_depth=2)[0]
    assert a.variance == b.variance
    with pytest.raises(ValueError):
        scan_ecs(ScanConfig((4,), (2,), (1,), t_values=(5,)), total_depth=2)


def test_fit_decay_exact_exponential():
    recs = [VarianceRecord(n, n, 1, 0, "delta_cost", 2.0 ** (-6 * n), 10, 0)
            for n in (4, 6, 8, 10)]
    fit = fit_decay(recs, "n")
    assert fit["slope"] == pytest.approx(-6.0, abs=1e-9)
    assert fit["r_squared"] == pytest.approx(1.0)


def test_fit_decay_polynomial_with_log_axis():
    recs = [VarianceRecord(n, n, 1, 0, "delta_cost", float(n) ** -6, 10, 0)
            for n in (4, 8, 16, 32)]
    fit = fit_decay(recs, "n", log_x=True)
    assert fit["slope"] == pytest.approx(-6.0, abs=1e-9)


def test_fit_decay_guards():
    recs = [VarianceRecord(4, 4, 1, 0, "delta_cost", 0.5, 10, 0)]
    with pytest.raises(ValueError):
        fit_decay(recs, "n")
    with pytest.raises(ValueError):
        fit_decay(recs, "q")
    zero = recs + [VarianceRecord(6, 6, 1, 0, "delta_cost", 0.0, 10, 0),
                   VarianceRecord(8, 8, 1, 0, "delta_cost", 0.25, 10, 0),
                   VarianceRecord(10, 10, 1, 0, "delta_cost", 0.125, 10, 0)]
    with pytest.warns(UserWarning):
        fit = fit_decay(zero, "n")
    assert fit["points"] == 3


def test_csv_round_trip_and_schema(tmp_path):
    recs = run_scan(ScanConfig((4,), (2, "n"), (1, 2), samples=10, seed=4))
    path = tmp_path / "records.csv"
    write_records_csv(recs, path)
    first = path.read_text().splitlines()[0]
    assert first == f"# schema={CSV_SCHEMA}"
    assert read_records_csv(path) == recs
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=other.v9\nn,m\n")
    with pytest.raises(ValueError):
        read_records_csv(bad)


def test_entry_point_wrappers_fix_statistic():
    cfg = ScanConfig((4,), ("n",), (1,), samples=20, seed=8,
                     statistic="first_param_grad")
    assert scan_delta_cost(cfg)[0].statistic == "delta_cost"
    assert scan_first_param_gradient(cfg)[0].statistic == "first_param_grad"
