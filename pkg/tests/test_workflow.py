"""Tests for the simulation pipeline, alignment sweeps, optimizer, and model check."""

import dataclasses
import warnings

import numpy as np
import pytest

from wgmtwin.analytic import RingSpec
from wgmtwin.dipole import farfield_map, hemisphere_grid
from wgmtwin.geometry import DeviceGeometry, fold_to_reduced_domain
from wgmtwin.metrics import RefinementWarning, ZeroIntensityError
from wgmtwin.nearfield import CavityMode, purcell_factor, zpl_efficiency
from wgmtwin.workflow import (
    OPT_PARAMS,
    RunConfig,
    alignment_sweep,
    model_compare,
    optimize_geometry,
    ring_dipoles,
    run_pipeline,
    write_compare_csv,
    write_sweep_csv,
    write_trace_csv,
)


def _fast_config(**overrides):
    base = dict(n_theta=41, n_phi=48, annulus=(0.7687, 1.7687),
                na_grid=np.linspace(0.0, 1.0, 11))
    base.update(overrides)
    return RunConfig(**base)


@pytest.fixture(autouse=True)
def _quiet_refinement():
    # the deliberately coarse test grids trip the resolution check; that
    # advisory path has its own dedicated tests
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RefinementWarning)
        yield


class TestRunPipeline:
    def test_deterministic_repeat(self):
        cfg = _fast_config()
        rep1, map1 = run_pipeline(cfg)
        rep2, map2 = run_pipeline(cfg)
        assert rep1.eta_col == rep2.eta_col
        assert rep1.overlap_gauss == rep2.overlap_gauss
        assert np.array_equal(rep1.curve, rep2.curve)
        assert np.array_equal(map1.e_theta, map2.e_theta)
        assert np.array_equal(map1.e_phi, map2.e_phi)

    def test_report_consistency(self):
        rep, fmap = run_pipeline(_fast_config(eta_ex=0.96))
        assert 0 < rep.eta_col <= 0.96
        assert abs(rep.eta_tot - rep.eta_zpl * rep.eta_col) < 1e-12
        assert 0 <= rep.overlap_gauss <= 1
        assert rep.curve[0, 1] == 0.0
        assert abs(rep.curve[-1, 1] - 0.96) < 1e-9
        assert np.isclose(fmap.intensity.max(), 1.0, rtol=1e-12)

    def test_cavity_mode_sets_zpl(self):
        mode = CavityMode(Q=1e4, V=3.0, n_eff=2.4)
        rep, _ = run_pipeline(_fast_config(mode=mode))
        want = zpl_efficiency(purcell_factor(mode), 0.25)
        assert np.isclose(rep.eta_zpl, want, rtol=1e-12)

    def test_dark_configuration_is_rejected(self):
        cfg = _fast_config(geometry=DeviceGeometry(alpha1=0.0, alpha2=0.0))
        with pytest.raises(ZeroIntensityError):
            run_pipeline(cfg)

    def test_layer_two_only_differs(self):
        rep_full, _ = run_pipeline(_fast_config())
        rep_l2, _ = run_pipeline(_fast_config(include_direct=False))
        assert rep_full.eta_col != rep_l2.eta_col


class TestAlignmentSweep:
    def test_grid_and_reference_point(self):
        cfg = _fast_config()
        result = alignment_sweep(cfg, 1, grid_n=3)
        assert result.offsets.shape == (6, 2)
        assert np.allclose(result.offsets[0], [0.0, 0.0])
        assert result.layer_id == 1
        assert np.all((0 <= result.eta_col) & (result.eta_col <= cfg.eta_ex))
        rep, _ = run_pipeline(cfg)
        assert result.eta_col[0] == rep.eta_col

    def test_fold_equivalent_offsets_match(self):
        cfg = _fast_config()
        g = cfg.geometry
        u, v = 0.9 * g.a1, -0.4 * g.a1
        fu, fv = fold_to_reduced_domain(u, v, g.a1)
        result = alignment_sweep(cfg, 1,
                                 offsets=np.array([[u, v], [fu, fv]]))
        assert abs(result.eta_col[0] - result.eta_col[1]) < 1e-10

    def test_second_layer_sweep_uses_own_lattice(self):
        cfg = _fast_config()
        r1 = alignment_sweep(cfg, 1, grid_n=2)
        r2 = alignment_sweep(cfg, 2, grid_n=2)
        # offsets span each layer's reduced triangle
        assert r1.offsets[:, 0].max() == pytest.approx(cfg.geometry.a1 / 2)
        assert r2.offsets[:, 0].max() == pytest.approx(cfg.geometry.a2 / 2)

    def test_keep_maps(self):
        result = alignment_sweep(_fast_config(), 2, grid_n=2, keep_maps=True)
        assert len(result.maps) == len(result.offsets)
        assert all(np.isclose(m.intensity.max(), 1.0, rtol=1e-12)
                   for m in result.maps)

    def test_invalid_layer(self):
        with pytest.raises(ValueError):
            alignment_sweep(_fast_config(), 3, grid_n=2)

    def test_csv(self, tmp_path):
        result = alignment_sweep(_fast_config(), 1, grid_n=2)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(result, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "u,v,eta_col"
        assert len(lines) == 1 + len(result.offsets)


class TestOptimizer:
    def test_single_evaluation_budget_returns_start(self):
        cfg = _fast_config(n_theta=31, n_phi=36)
        geom, trace = optimize_geometry(cfg, budget=1)
        assert geom == cfg.geometry
        assert trace.shape == (1, 11)
        assert trace[0, 0] == 1.0
        assert trace[0, -1] == trace[0, -2]

    def test_budget_bounds_and_progress(self):
        cfg = _fast_config(n_theta=31, n_phi=36)
        bounds = {name: (getattr(cfg.geometry, name) * 0.9,
                         getattr(cfg.geometry, name) * 1.1)
                  for name in OPT_PARAMS}
        geom, trace = optimize_geometry(cfg, bounds=bounds, budget=40, seed=3)
        assert trace.shape == (40, 11)
        assert np.all(np.diff(trace[:, -1]) >= 0)       # best-so-far climbs
        assert trace[-1, -1] >= trace[0, -2] - 1e-12    # never below start
        for j, name in enumerate(OPT_PARAMS, start=1):
            lo, hi = bounds[name]
            assert np.all(trace[:, j] >= lo - 1e-12)
            assert np.all(trace[:, j] <= hi + 1e-12)
            assert lo <= getattr(geom, name) <= hi

    def test_seeded_repeatability(self):
        cfg = _fast_config(n_theta=31, n_phi=36)
        _, t1 = optimize_geometry(cfg, budget=15, seed=9)
        _, t2 = optimize_geometry(cfg, budget=15, seed=9)
        assert np.array_equal(t1, t2)

    def test_recovers_perturbed_geometry(self):
        cfg = _fast_config(n_theta=31, n_phi=36)
        _, ref_trace = optimize_geometry(cfg, budget=1)
        reference = ref_trace[0, -1]
        rng = np.random.default_rng(11)
        while True:
            factors = rng.uniform(0.9, 1.1, len(OPT_PARAMS))
            try:
                start = dataclasses.replace(
                    cfg.geometry,
                    **{n: getattr(cfg.geometry, n) * f
                       for n, f in zip(OPT_PARAMS, factors)})
                break
            except ValueError:
                continue
        bounds = {n: (getattr(start, n) * 0.85, getattr(start, n) * 1.15)
                  for n in OPT_PARAMS}
        perturbed = dataclasses.replace(cfg, geometry=start)
        _, trace = optimize_geometry(perturbed, bounds=bounds, budget=200,
                                     seed=3)
        assert trace[-1, -1] >= 0.95 * reference

    def test_infeasible_evaluations_are_sentineled(self):
        cfg = _fast_config(n_theta=31, n_phi=36)
        # wide open hole radii allow geometrically impossible trial points
        bounds = {name: (getattr(cfg.geometry, name) * 0.9,
                         getattr(cfg.geometry, name) * 1.1)
                  for name in OPT_PARAMS}
        bounds["r_h2"] = (0.05, 0.25)
        bounds["a2"] = (0.25, 0.45)
        geom, trace = optimize_geometry(cfg, bounds=bounds, budget=60, seed=1)
        assert np.isfinite(trace[:, -2]).all()
        assert trace[-1, -1] > 0
        assert geom.r_h2 < geom.a2 / 2

    def test_trace_csv(self, tmp_path):
        cfg = _fast_config(n_theta=31, n_phi=36)
        _, trace = optimize_geometry(cfg, budget=3, seed=0)
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "eval,r_d,h,a1,a2,d1,d2,r_h1,r_h2,objective,best"
        assert len(lines) == 4


class TestRingDipoles:
    def test_count_plane_and_orientation(self):
        ring = RingSpec(N=12)
        ds = ring_dipoles(ring, z=0.4)
        assert ds.positions.shape == (12, 3)
        assert np.all(ds.positions[:, 2] == 0.4)
        assert np.allclose(np.hypot(ds.positions[:, 0], ds.positions[:, 1]),
                           ring.rho_n, rtol=1e-12)
        vert = ring_dipoles(RingSpec(N=12, orientation="z"))
        assert np.all(vert.moments[:, :2] == 0)

    def test_moment_winding(self):
        ring = RingSpec(N=24, L=3)
        ds = ring_dipoles(ring)
        phi = np.arctan2(ds.positions[:, 1], ds.positions[:, 0])
        radial = ds.moments[:, 0] * np.cos(phi) + ds.moments[:, 1] * np.sin(phi)
        steps = np.angle(np.roll(radial, -1) / radial)
        assert np.isclose(steps.sum() / (2 * np.pi), 3.0, atol=1e-9)

    def test_count_override(self):
        ds = ring_dipoles(RingSpec(N=18), n=30)
        assert len(ds.positions) == 30


class TestModelCompare:
    def test_table_shape(self):
        table = model_compare(RingSpec(), [6, 12])
        assert table.shape == (2, 3)
        assert np.array_equal(table[:, 0], [6, 12])

    def test_coarse_ring_error_shrinks(self):
        table = model_compare(RingSpec(), [6, 60])
        assert table[1, 1] < table[0, 1]
        assert table[1, 2] < table[0, 2]

    def test_dense_ring_matches_closed_form(self):
        table = model_compare(RingSpec(), [60])
        assert table[0, 1] < 0.05

    def test_rejects_unsorted_counts(self):
        with pytest.raises(ValueError):
            model_compare(RingSpec(), [12, 6])

    def test_charge_zero_ring_keeps_lattice_symmetry(self):
        ds = ring_dipoles(RingSpec(N=6, L=0))
        theta, phi = hemisphere_grid(21, 24)
        fmap = farfield_map([ds], theta, phi)
        rolled = np.roll(fmap.intensity, 24 // 6, axis=1)
        assert np.abs(fmap.intensity - rolled).max() < 1e-10

    def test_csv(self, tmp_path):
        table = model_compare(RingSpec(), [6, 12])
        path = tmp_path / "compare.csv"
        write_compare_csv(table, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "N,rms_if,rms_ff"
        assert len(lines) == 3
        assert lines[1].startswith("6,")
