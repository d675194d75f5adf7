"""Tests for the closed-form ring fields, selection rule, and profile tables."""

import numpy as np
import pytest
from scipy.special import jv

from wgmtwin.analytic import (
    RingSpec,
    encircled_fraction,
    farfield_prefactor,
    ff_closed_form,
    fig2_profiles,
    fresnel_prefactor,
    if_components,
    if_transverse,
    onaxis_selection,
    prefactor_state,
    write_fig2_csv,
)

K = 2 * np.pi


class TestRingSpec:
    def test_defaults(self):
        ring = RingSpec()
        assert ring.N == 18
        assert ring.rho_n == 1.5702
        assert ring.L == 1 and ring.orientation == "rho"
        assert ring.Q_ring == 36
        assert ring.r_q == 3.75 and ring.theta_q == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            RingSpec(N=0)
        with pytest.raises(ValueError):
            RingSpec(rho_n=-1.0)
        with pytest.raises(ValueError):
            RingSpec(theta_q=np.pi / 2)
        with pytest.raises(ValueError):
            RingSpec(orientation="x")
        with pytest.raises(ValueError):
            RingSpec(Q_ring=0)


class TestPrefactors:
    def test_fresnel_magnitude(self):
        f = fresnel_prefactor(0.7, 1e3, amp=2.0, alpha1=0.5)
        assert np.isclose(abs(f), K * 0.5 * 2.0 / 1e6, rtol=1e-12)

    def test_fresnel_requires_positive_height(self):
        with pytest.raises(ValueError):
            fresnel_prefactor(0.5, 0.0)

    def test_farfield_magnitude(self):
        ring = RingSpec()
        z_q = ring.r_q * np.cos(ring.theta_q)
        g = farfield_prefactor(ring, 0.3, r=1e4)
        assert np.isclose(abs(g), K ** 2 * ring.N * (K / z_q ** 2) / 1e4,
                          rtol=1e-12)

    def test_state_is_finite_nonzero(self):
        st = prefactor_state(RingSpec())
        assert np.isfinite(st.f_val) and st.f_val != 0
        assert np.isfinite(st.g_val) and st.g_val != 0


class TestIntermediateComponents:
    def test_radial_component_vanishes_for_charge_zero(self):
        ring = RingSpec(L=0)
        e_rho, e_phi, e_z = if_components(ring, np.linspace(0.01, 0.4, 9), 0.7)
        assert np.all(np.abs(e_rho) == 0.0)
        assert np.abs(e_z).max() > 0

    def test_all_components_vanish_on_axis_for_charge_two(self):
        e_rho, e_phi, e_z = if_components(RingSpec(L=2), 0.0, 0.0)
        assert e_rho == 0 and e_phi == 0 and e_z == 0

    def test_charge_one_survives_on_axis(self):
        e_rho, e_phi, e_z = if_components(RingSpec(L=1), 0.0, 0.0)
        assert abs(e_rho) > 0 and abs(e_phi) > 0
        assert e_z == 0  # J_1(0) = 0

    def test_vertical_to_radial_ratio(self):
        # radial drive: |E_z / E_rho| = (3/2) x / L with x = k rho_n tan(theta)
        ring = RingSpec(L=2)
        theta = np.array([0.05, 0.12, 0.25])
        e_rho, _, e_z = if_components(ring, theta, 0.4)
        x = K * ring.rho_n * np.tan(theta)
        assert np.allclose(np.abs(e_z / e_rho), 1.5 * x / ring.L, rtol=1e-12)

    def test_vertical_drive_swaps_weights(self):
        ring = RingSpec(L=2, orientation="z")
        theta = np.array([0.05, 0.12, 0.25])
        e_rho, _, e_z = if_components(ring, theta, 0.4)
        x = K * ring.rho_n * np.tan(theta)
        assert np.allclose(np.abs(e_z / e_rho), (2.0 / 3.0) * x / ring.L,
                           rtol=1e-12)

    def test_rejects_grazing_angles(self):
        with pytest.raises(ValueError):
            if_components(RingSpec(), np.pi / 2, 0.0)


class TestTransversePattern:
    def test_intensity_matches_cylindrical_components(self):
        ring = RingSpec(L=3)
        rng = np.random.default_rng(8)
        theta = rng.uniform(0.01, 0.6, 40)
        phi = rng.uniform(0, 2 * np.pi, 40)
        e_rho, e_phi, _ = if_components(ring, theta, phi)
        ex, ey = if_transverse(ring, theta, phi)
        lhs = np.abs(e_rho) ** 2 + np.abs(e_phi) ** 2
        rhs = np.abs(ex) ** 2 + np.abs(ey) ** 2
        assert np.allclose(lhs, rhs, rtol=1e-12)

    def test_total_intensity_formula(self):
        # |E_x|^2 + |E_y|^2 = 2 |N f|^2 (J_{L-1}^2 + J_{L+1}^2)
        ring = RingSpec(L=2)
        z = 1e3
        theta = np.linspace(0.02, 0.5, 25)
        ex, ey = if_transverse(ring, theta, 1.1, z=z)
        x = K * ring.rho_n * np.tan(theta)
        f = fresnel_prefactor(z * np.tan(theta), z)
        expected = 2 * (ring.N * np.abs(f)) ** 2 * (jv(1, x) ** 2 + jv(3, x) ** 2)
        assert np.allclose(np.abs(ex) ** 2 + np.abs(ey) ** 2, expected,
                           rtol=1e-12)

    def test_intensity_independent_of_phi(self):
        ring = RingSpec(L=2)
        theta = 0.3
        phis = np.linspace(0, 2 * np.pi, 33, endpoint=False)
        ex, ey = if_transverse(ring, theta, phis)
        inten = np.abs(ex) ** 2 + np.abs(ey) ** 2
        assert np.ptp(inten) < 1e-12 * inten.max()

    def test_opposite_charges_share_intensity(self):
        theta = np.linspace(0.01, 0.5, 17)
        ex_p, ey_p = if_transverse(RingSpec(L=3), theta, 0.4)
        ex_m, ey_m = if_transverse(RingSpec(L=-3), theta, 0.4)
        assert np.allclose(np.abs(ex_p) ** 2 + np.abs(ey_p) ** 2,
                           np.abs(ex_m) ** 2 + np.abs(ey_m) ** 2, rtol=1e-12)

    def test_charge_one_is_circular_on_axis(self):
        ex, ey = if_transverse(RingSpec(L=1), 0.0, 0.0)
        assert abs(ex) > 0
        assert np.isclose(ey / ex, 1j, rtol=1e-12)

    def test_vertical_drive_scales_three_halves(self):
        theta = np.array([0.05, 0.2, 0.4])
        ex_r, ey_r = if_transverse(RingSpec(L=1, orientation="rho"), theta, 0.3)
        ex_z, ey_z = if_transverse(RingSpec(L=1, orientation="z"), theta, 0.3)
        assert np.allclose(ex_z / ex_r, 1.5, rtol=1e-12)
        assert np.allclose(ey_z / ey_r, 1.5, rtol=1e-12)


class TestFarFieldClosedForm:
    def test_onaxis_selection_rule(self):
        peak = None
        for L in (0, 1, 2, 3):
            ex, ey = ff_closed_form(RingSpec(L=L), 0.0, 0.0)
            inten = abs(ex) ** 2 + abs(ey) ** 2
            if L == 1:
                peak = inten
                assert inten > 0
            else:
                assert inten <= 1e-20 * (peak or 1.0)

    def test_selection_predicate(self):
        assert onaxis_selection(1) and onaxis_selection(-1)
        for L in (-3, -2, 0, 2, 3):
            assert not onaxis_selection(L)

    def test_intensity_independent_of_phi(self):
        phis = np.linspace(0, 2 * np.pi, 41, endpoint=False)
        ex, ey = ff_closed_form(RingSpec(L=2), 0.25, phis)
        inten = np.abs(ex) ** 2 + np.abs(ey) ** 2
        assert np.ptp(inten) < 1e-12 * inten.max()

    def test_radiated_field_scales_inverse_with_radius(self):
        ex1, ey1 = ff_closed_form(RingSpec(), 0.2, 0.0, r=1e4)
        ex2, ey2 = ff_closed_form(RingSpec(), 0.2, 0.0, r=2e4)
        assert np.isclose(abs(ex1) / abs(ex2), 2.0, rtol=1e-12)
        assert np.isclose(abs(ey1) / abs(ey2), 2.0, rtol=1e-12)

    def test_circular_channel_zeros_follow_bessel(self):
        # the co-rotating channel carries J_{L-1}(k r_q sin(theta) sin(theta_q))
        ring = RingSpec(L=1)
        scale = K * ring.r_q * np.sin(ring.theta_q)
        theta_zero = np.arcsin(2.404825557695773 / scale)
        theta = np.linspace(0.01, 0.5, 101)
        ex, ey = ff_closed_form(ring, theta, 0.0)
        co = 0.5 * (ex - 1j * ey)
        ex0, ey0 = ff_closed_form(ring, theta_zero, 0.0)
        co0 = 0.5 * (ex0 - 1j * ey0)
        assert abs(co0) < 1e-10 * np.abs(co).max()


class TestProfileTables:
    def test_structure_and_normalization(self):
        table = fig2_profiles([0, 1, 2, 3])
        assert sorted(table) == [0, 1, 2, 3]
        for L, rows in table.items():
            assert rows.shape == (191, 3)
            assert rows[0, 0] == 0.0
            assert np.isclose(rows[:, 1].max(), 1.0, rtol=1e-12)
            assert np.isclose(rows[:, 2].max(), 1.0, rtol=1e-12)

    def test_charge_one_peaks_on_axis(self):
        rows = fig2_profiles([1])[1]
        assert np.argmax(rows[:, 1]) == 0
        assert np.argmax(rows[:, 2]) == 0

    def test_higher_charges_dark_on_axis(self):
        table = fig2_profiles([0, 2, 3])
        for L, rows in table.items():
            assert rows[0, 1] < 1e-20
            assert rows[0, 2] < 1e-20

    def test_far_field_concentrates_low_angles(self):
        table = fig2_profiles([2, 3])
        for L, rows in table.items():
            e_if = encircled_fraction(rows[:, 0], rows[:, 1], 0.3)
            e_ff = encircled_fraction(rows[:, 0], rows[:, 2], 0.3)
            assert e_ff > e_if

    def test_custom_na_grid(self):
        na = np.linspace(0.0, 0.5, 26)
        rows = fig2_profiles([1], na=na)[1]
        assert rows.shape == (26, 3)
        assert np.allclose(rows[:, 0], na)

    def test_csv_output(self, tmp_path):
        table = fig2_profiles([0, 1], na=np.linspace(0.0, 0.9, 10))
        path = tmp_path / "profiles.csv"
        write_fig2_csv(table, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "L,NA,intensity_IF,intensity_FF"
        assert len(lines) == 1 + 2 * 10
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 0.0


class TestEncircledFraction:
    def test_uniform_intensity_matches_solid_angle(self):
        na = np.linspace(0.0, 0.95, 191)
        inten = np.ones_like(na)
        for cut in (0.3, 0.5, 0.8):
            got = encircled_fraction(na, inten, cut)
            want = (1 - np.sqrt(1 - cut ** 2)) / (1 - np.sqrt(1 - 0.95 ** 2))
            assert np.isclose(got, want, atol=1e-3)

    def test_limits_and_monotonicity(self):
        na = np.linspace(0.0, 0.95, 191)
        inten = np.exp(-(na / 0.4) ** 2)
        cuts = np.linspace(0.05, 0.95, 10)
        vals = [encircled_fraction(na, inten, c) for c in cuts]
        assert np.all(np.diff(vals) > 0)
        assert np.isclose(vals[-1], 1.0, rtol=1e-12)
        with pytest.raises(ValueError):
            encircled_fraction(na, inten, 0.0)
