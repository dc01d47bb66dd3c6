import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewalk import experiments as ex
from ewalk.spectral import dominant_frequency

HADAMARD = math.pi / 4


class TestLaw:
    def test_extrema_values(self):
        phi1, phi2 = ex.law_extrema(1.0)
        assert phi1 == pytest.approx(0.739, abs=1e-3)
        assert phi2 == pytest.approx(2.402, abs=1e-3)
        assert phi1 == pytest.approx(math.cos(phi1), abs=1e-12)

    def test_extrema_are_extrema(self):
        phis = np.linspace(0, 2 * math.pi, 200_001)
        v = ex.velocity_law(phis)
        phi1, phi2 = ex.law_extrema(1.0)
        assert phis[np.argmax(v)] == pytest.approx(phi1, abs=1e-4)
        assert phis[np.argmin(v)] == pytest.approx(phi2, abs=1e-4)

    def test_zeros(self):
        # cos(cos(phi) - phi) vanishes where cos(phi) - phi = -pi/2 or -3pi/2,
        # which on [0, 2 pi) are exactly pi/2 and 3 pi/2.  The second is a
        # cubic zero, so double precision only pins it to ~1e-5.
        zeros = ex.law_zeros(1.0)
        assert zeros[0] == pytest.approx(math.pi / 2, abs=1e-10)
        assert zeros[1] == pytest.approx(3 * math.pi / 2, abs=1e-4)
        assert len(zeros) == 2

    @given(st.floats(0.0, 3.0))
    def test_zeros_are_roots(self, d):
        for z in ex.law_zeros(d):
            assert abs(ex.velocity_law(z, d)) < 1e-9

    @settings(max_examples=30)
    @given(st.floats(0.01, 1.0), st.floats(-0.3, 0.3), st.floats(0.5, 2.0))
    def test_fit_recovers_parameters(self, v0, offset, d):
        phis = ex.phi_grid(64)
        v = v0 * ex.velocity_law(phis + offset, d)
        fv0, foff, resid = ex.fit_velocity_law(phis, v, d, fit_offset=True)
        assert fv0 == pytest.approx(v0, rel=1e-6)
        assert foff == pytest.approx(offset, abs=1e-6)
        assert resid < 1e-6 * v0

    def test_fit_without_offset_is_projection(self):
        phis = ex.phi_grid(32)
        v = 0.2 * ex.velocity_law(phis) + 0.01 * np.sin(3 * phis)
        v0, off, resid = ex.fit_velocity_law(phis, v)
        model = ex.velocity_law(phis)
        assert off == 0.0
        assert v0 == pytest.approx(np.dot(v, model) / np.dot(model, model))
        assert resid == pytest.approx(np.max(np.abs(v - v0 * model)))

    def test_fit_skips_nan(self):
        phis = ex.phi_grid(16)
        v = 0.1 * ex.velocity_law(phis)
        v[3] = np.nan
        assert ex.fit_velocity_law(phis, v)[0] == pytest.approx(0.1)


class TestGrids:
    def test_phi_grid(self):
        g = ex.phi_grid(64)
        assert g.size == 64 and g[0] == 0 and g[-1] < 2 * math.pi
        assert np.diff(g) == pytest.approx(np.full(63, 2 * math.pi / 64))

    def test_theta_grid_open_interval(self):
        g = ex.theta_grid(48)
        assert g.size == 48 and g[0] > 0 and g[-1] < math.pi
        assert g[0] == pytest.approx(math.pi / 96)
        np.testing.assert_allclose(g + g[::-1], math.pi)


class TestBloch:
    def test_returns_after_one_period(self):
        run = ex.run_bloch(100, HADAMARD, 1000, 1000)
        assert abs(run.trace.samples[100] - 500) < 1
        assert abs(run.trace.samples[50] - 500) > 5

    def test_m50_frequency(self):
        run = ex.run_bloch(50, HADAMARD, 1000, 10_000)
        assert abs(dominant_frequency(run.spectrum) - 2 * math.pi / 50) <= run.spectrum.resolution

    def test_no_secular_drift(self):
        run = ex.run_bloch(100, HADAMARD, 1000, 10_000)
        means = run.trace.samples[:10_000].reshape(100, 100).mean(axis=1)
        assert np.ptp(means) < 2

    def test_density(self):
        run = ex.run_bloch(100, HADAMARD, 400, 200, density_stride=10)
        assert run.density.rows.shape == (21, 400)


class TestSBO:
    def test_peaks_and_amplitude(self):
        sbo = ex.run_sbo(100, 0.01, HADAMARD, 1000, 40_000)
        res = sbo.spectrum.resolution
        (f1, _), (f2, _) = sbo.peaks[:2]
        assert abs(f1 - 0.01) <= res
        assert abs(f2 - 2 * math.pi / 100) <= res
        bloch = ex.run_bloch(100, HADAMARD, 1000, 40_000)
        assert np.ptp(sbo.trace.samples) > 3 * np.ptp(bloch.trace.samples)

    def test_large_detuning_back_to_bloch(self):
        sbo = ex.run_sbo(100, 0.1, HADAMARD, 1000, 20_000)
        assert abs(dominant_frequency(sbo.spectrum) - 2 * math.pi / 100) <= sbo.spectrum.resolution


class TestResonantDrift:
    @pytest.mark.parametrize("phi", [0.0, 0.739, 2.402, math.pi, 4.0, 5.5])
    def test_sign_follows_law(self, phi):
        v = ex.run_resonant_drift(100, HADAMARD, phi).velocity
        assert np.sign(v) == np.sign(ex.velocity_law(phi))

    def test_zero_of_law(self):
        phi_star = ex.law_zeros(1.0)[0]
        v_star = ex.run_resonant_drift(100, HADAMARD, phi_star).velocity
        v_max = ex.run_resonant_drift(100, HADAMARD, ex.law_extrema(1.0)[0]).velocity
        # Same tolerance as the normalized fit residual allowed for the curve.
        assert abs(v_star) < 0.15 * abs(v_max)

    def test_pauli_x_trapped(self):
        assert abs(ex.run_resonant_drift(100, math.pi / 2, 0.7).velocity) < 1e-12

    def test_edge_guard(self):
        with pytest.raises(ex.EdgeLeakError):
            ex.run_resonant_drift(100, 0.05, 0.0, n_sites=400)


def test_velocity_curve_zero_structure():
    curve = ex.velocity_curve(100, HADAMARD, ex.phi_grid(16))
    signs = np.sign(curve.velocities)
    changes = int(np.sum(signs != np.roll(signs, 1)))
    assert changes == len(ex.law_zeros(1.0)) == 2
    assert curve.fitted_v0 > 0
    assert curve.errors == {}


def test_velocity_map_records_errors_in_place():
    vmap = ex.velocity_map(100, np.array([0.05, math.pi / 2]), np.array([0.0, 1.0]), n_sites=300, steps=600)
    assert vmap.v.shape == (2, 2)
    assert set(vmap.errors) == {(0, 0), (0, 1)}
    assert np.isnan(vmap.v[0]).all()
    assert np.all(np.abs(vmap.v[1]) < 1e-12)


def test_velocity_map_jobs_independent():
    kw = dict(thetas=np.array([0.6, 1.2]), phis=np.array([0.0, 2.0]), n_sites=1500, steps=600)
    a = ex.velocity_map(100, jobs=1, **kw)
    b = ex.velocity_map(100, jobs=2, **kw)
    assert a.v.tobytes() == b.v.tobytes()


@pytest.fixture(scope="module")
def maps():
    return ex.density_experiment(100, HADAMARD, 1000, 1000, stride=5)


class TestDensity:
    def test_rows_normalized(self, maps):
        assert set(maps) == {"bloch", "sbo", "resonant"}
        for dmap in maps.values():
            assert dmap.rows.shape == (201, 1000)
            np.testing.assert_allclose(dmap.rows.sum(axis=1), 1, atol=1e-10)

    def test_qualitative_regimes(self, maps):
        n = np.arange(1000)
        cent = {k: v.rows @ n for k, v in maps.items()}
        # (a) packet breathes in place, (b) wide slow excursion, (c) net displacement
        assert np.ptp(cent["bloch"]) < 15
        assert np.ptp(cent["sbo"]) > 2 * np.ptp(cent["bloch"])
        assert abs(cent["resonant"][-1] - 500) > 30

    def test_checksums_reproducible(self, maps):
        again = ex.density_experiment(100, HADAMARD, 1000, 1000, stride=5)
        for k in maps:
            assert ex.density_checksums(maps[k]) == ex.density_checksums(again[k])


@pytest.mark.slow
def test_extremal_theta_moves_toward_boundary_for_weaker_field():
    thetas = ex.theta_grid(24)[:12]
    phi1 = ex.law_extrema(1.0)[0]
    best = {}
    for m in (100, 200):
        vmap = ex.velocity_map(m, thetas, np.array([phi1]), jobs=None)
        best[m] = thetas[np.nanargmax(np.abs(vmap.v[:, 0]))]
    print(f"argmax theta: m=100 -> {best[100]:.3f}, m=200 -> {best[200]:.3f}")
    assert best[200] < best[100]
