import numpy as np
import pytest

from spinlace.dynamics import ThermalSpec, TimeSeries, correlation, kicked_evolution
from spinlace.lattice import (
    SpinLaceSpec,
    build,
    dynamical_symmetry_op,
    total_spin,
)
from spinlace.paulis import PauliSum, PauliString, commutator, hs_inner
from spinlace.spectral import (
    Spectrum,
    default_omega_grid,
    finite_time_ft,
    linear_response,
    peak_report,
)


def trapezoid_oracle(times, values, omega):
    """Independent closed form of the trapezoid rule applied to exp(i w t) C(t)
    when C is itself a sampled exponential: plain composite-trapezoid sum."""
    t = times - times[0]
    integrand = np.exp(1j * omega * t) * values
    h = t[1] - t[0]
    return h * (integrand[0] / 2 + integrand[1:-1].sum() + integrand[-1] / 2) / t[-1]


class TestFiniteTimeFt:
    def test_on_grid_exponential_recovers_amplitude(self):
        w0 = 2 * np.pi
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        c0 = 0.7 - 0.2j
        series = TimeSeries(times=times, values=c0 * np.exp(1j * w0 * times))
        # the transform kernel exp(i w t) peaks where w = -w0
        spec = finite_time_ft(series, np.array([-w0]))
        assert abs(spec.values[0] - c0) < 1e-6

    def test_matches_discrete_closed_form_everywhere(self):
        w0 = 2 * np.pi
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        series = TimeSeries(times=times, values=np.exp(-1j * w0 * times))
        grid = default_omega_grid(20.0, 4 * np.pi)
        spec = finite_time_ft(series, grid)
        for w, value in zip(grid, spec.values):
            assert abs(value - trapezoid_oracle(times, series.values, w)) < 1e-12

    def test_finite_window_kernel(self):
        # continuum kernel (1/T) int_0^T exp(i (w - w0) t) dt at modest detuning,
        # where the quadrature error of dt = 0.05 stays below 1e-3
        w0 = 2.0
        t_max, dt = 20.0, 0.05
        times = np.arange(0.0, t_max + dt / 2, dt)
        series = TimeSeries(times=times, values=np.exp(-1j * w0 * times))
        for w in (1.7, 2.0, 2.4):
            delta = w - w0
            if delta == 0:
                kernel = 1.0
            else:
                kernel = (np.exp(1j * delta * t_max) - 1) / (1j * delta * t_max)
            spec = finite_time_ft(series, np.array([w]))
            assert abs(spec.values[0] - kernel) < 1e-3

    def test_constant_series(self):
        times = np.arange(0.0, 10.0 + 0.05, 0.1)
        series = TimeSeries(times=times, values=np.full(len(times), 0.5 + 0j))
        spec = finite_time_ft(series, np.array([0.0]))
        assert abs(spec.values[0] - 0.5) < 1e-12

    def test_linearity(self):
        times = np.arange(0.0, 5.0, 0.05)
        x = TimeSeries(times=times, values=np.exp(1j * times))
        y = TimeSeries(times=times, values=np.cos(3 * times).astype(complex))
        grid = default_omega_grid(5.0, 8.0)
        a, b = 1.3 - 0.4j, -0.8
        combo = TimeSeries(times=times, values=a * x.values + b * y.values)
        lhs = finite_time_ft(combo, grid).values
        rhs = a * finite_time_ft(x, grid).values + b * finite_time_ft(y, grid).values
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_rejects_nonuniform_grid(self):
        times = np.array([0.0, 0.1, 0.3])
        series = TimeSeries(times=times, values=np.zeros(3, dtype=complex))
        with pytest.raises(ValueError):
            finite_time_ft(series, np.array([0.0]))

    def test_rejects_short_series(self):
        series = TimeSeries(times=np.array([0.0]), values=np.array([1j]))
        with pytest.raises(ValueError):
            finite_time_ft(series, np.array([0.0]))

    def test_default_grid_covers_twice_the_marker(self):
        grid = default_omega_grid(20.0, 4 * np.pi)
        assert grid[0] == 0.0
        assert grid[-1] >= 4 * np.pi
        assert np.allclose(np.diff(grid), 2 * np.pi / 80)


class TestPeakReport:
    def test_pure_tone_flagged(self):
        w0 = 2 * np.pi
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        series = TimeSeries(times=times, values=np.exp(-1j * w0 * times))
        grid = default_omega_grid(20.0, 4 * np.pi)
        report = peak_report(finite_time_ft(series, grid), w0)
        assert report.matched
        assert abs(report.peaks[0].omega - w0) <= report.grid_spacing

    def test_flat_spectrum_has_no_peaks(self):
        spec = Spectrum(
            omegas=np.linspace(0, 10, 101),
            values=np.zeros(101, dtype=complex),
            window=20.0,
        )
        report = peak_report(spec, 2.0)
        assert report.peaks == []
        assert not report.matched

    def test_empty_spectrum_rejected(self):
        spec = Spectrum(omegas=np.array([]), values=np.array([]), window=1.0)
        with pytest.raises(ValueError):
            peak_report(spec, 1.0)

    def test_report_text_contains_match_flag(self):
        spec = Spectrum(
            omegas=np.linspace(0, 10, 101),
            values=np.zeros(101, dtype=complex),
            window=20.0,
        )
        text = peak_report(spec, 2.0).to_text()
        assert "matched=false" in text


class TestLinearResponse:
    def test_identity_kick_gives_zero(self, ordered_r2):
        _, h, _, sm = ordered_r2
        sx = PauliSum.single(sm.node(2), "x", sm.nsites)
        times = np.linspace(0.0, 5.0, 11)
        series = linear_response(h, sx, PauliSum.identity(sm.nsites), times, ThermalSpec(beta=0.5))
        assert np.abs(series.values).max() < 1e-12

    def test_beta_zero_vanishes_by_cyclicity(self, ordered_r2):
        _, h, _, sm = ordered_r2
        sx = PauliSum.single(sm.node(2), "x", sm.nsites)
        a = dynamical_symmetry_op(2, sm)
        times = np.linspace(0.0, 5.0, 11)
        series = linear_response(h, a, sx, times)
        assert np.abs(series.values).max() < 1e-10

    def test_symmetry_response_is_single_frequency(self, ordered_r2):
        # -i <[A(t), P]> = -i e^{i w t} <[A, P]> with w = -2B
        _, h, _, sm = ordered_r2
        a = dynamical_symmetry_op(2, sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        beta = 0.5
        times = np.arange(0.0, 10.0, 0.05)
        series = linear_response(h, a, kick, times, ThermalSpec(beta=beta))
        # amplitude from the exact trace correlator identity at t = 0
        expected = series.values[0] * np.exp(-2j * np.pi * times)
        assert np.abs(series.values - expected).max() < 1e-10
        assert abs(series.values[0]) > 1e-5
        # |series| constant
        mags = np.abs(series.values)
        assert mags.max() - mags.min() < 1e-8

    def test_response_spectrum_concentrates_single_signed(self, ordered_r2):
        _, h, _, sm = ordered_r2
        a = dynamical_symmetry_op(2, sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        series = linear_response(h, a, kick, times, ThermalSpec(beta=0.5))
        spacing = 2 * np.pi / 80
        grid = np.arange(-4 * np.pi, 4 * np.pi + spacing / 2, spacing)
        spec = finite_time_ft(series, grid)
        peak_at = grid[np.argmax(np.abs(spec.values))]
        # the oscillation e^{-2 i pi t} shows up at +2B only
        assert abs(peak_at - 2 * np.pi) <= spacing
        mirrored = np.abs(spec.values[np.argmin(np.abs(grid + 2 * np.pi))])
        assert mirrored < 0.05 * np.abs(spec.values).max()

    def test_relaxing_observable_loses_memory(self, ordered_r3):
        # a rung total spin has no overlap with any symmetry or charge, so
        # its correlator decays to small fluctuations, while the symmetry
        # correlator keeps full amplitude forever (window-averaged contrast)
        _, h, _, sm = ordered_r3
        probe = PauliSum.single(sm.node(2), "x", sm.nsites)
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        relaxing = correlation(h, total_spin(2, "x", sm), probe, times)
        persistent = correlation(h, dynamical_symmetry_op(2, sm), probe, times)
        late = times >= 15.0

        def late_over_peak(series):
            return np.abs(series.values[late]).mean() / np.abs(series.values).max()

        assert late_over_peak(relaxing) < 0.2
        assert late_over_peak(persistent) > 0.99

    def test_relaxing_observable_response_shrinks(self, ordered_r3):
        # the finite-beta kick response of the same observable decays from
        # its transient peak (finite lattice: down, not all the way to zero)
        _, h, _, sm = ordered_r3
        obs = total_spin(2, "x", sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        times = np.arange(0.0, 20.0 + 0.025, 0.05)
        series = linear_response(h, obs, kick, times, ThermalSpec(beta=0.5))
        late = np.abs(series.values[times >= 15.0]).mean()
        assert late < 0.75 * np.abs(series.values).max()


class TestKickedVsLinearResponse:
    def test_first_order_convergence_finite_beta(self, ordered_r2):
        # node sigma^z has a leading O(eps) mismatch: measured C = dev/eps
        # must stay flat across a decade of eps
        _, h, _, sm = ordered_r2
        obs = PauliSum.single(sm.node(2), "z", sm.nsites)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        thermal = ThermalSpec(beta=0.5)
        times = np.linspace(0.0, 10.0, 51)
        lr = linear_response(h, obs, kick, times, thermal)
        devs = {}
        for eps in (1e-2, 1e-3):
            kicked = kicked_evolution(h, kick, eps, obs, times, thermal)
            devs[eps] = np.abs(kicked.values - lr.values).max()
        assert devs[1e-3] < devs[1e-2]
        c_large = devs[1e-2] / 1e-2
        c_small = devs[1e-3] / 1e-3
        assert 0.2 < c_small / c_large < 5.0

    def test_charge_kick_response_constant_and_first_order(self, ordered_r2):
        # the conserved charge responds with a flat offset; its Kubo response
        # vanishes for any Gibbs state, so the whole offset is O(eps)
        _, h, _, sm = ordered_r2
        from spinlace.lattice import symmetry_charge

        charge = symmetry_charge(2, sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        thermal = ThermalSpec(beta=0.5)
        times = np.linspace(0.0, 10.0, 51)
        lr = linear_response(h, charge, kick, times, thermal)
        assert np.abs(lr.values).max() < 1e-10
        slopes = {}
        for eps in (1e-2, 1e-3):
            kicked = kicked_evolution(h, kick, eps, charge, times, thermal)
            assert np.abs(kicked.values - kicked.values[0]).max() < 1e-10
            assert abs(kicked.values[0]) > 1e-6 * eps / 1e-2
            slopes[eps] = np.abs(kicked.values - lr.values).max() / eps
        assert 0.5 < slopes[1e-3] / slopes[1e-2] < 2.0

    def test_symmetry_operator_converges_even_faster(self, ordered_r2):
        # for the symmetry operator the O(eps) term vanishes by symmetry;
        # convergence is then better than first order, never worse
        _, h, _, sm = ordered_r2
        obs = dynamical_symmetry_op(2, sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        thermal = ThermalSpec(beta=0.5)
        times = np.linspace(0.0, 10.0, 51)
        lr = linear_response(h, obs, kick, times, thermal)
        devs = {}
        for eps in (1e-2, 1e-3):
            kicked = kicked_evolution(h, kick, eps, obs, times, thermal)
            devs[eps] = np.abs(kicked.values - lr.values).max()
        assert devs[1e-3] <= devs[1e-2]
        assert devs[1e-2] <= 1e-4

    def test_beta_zero_agreement_is_exact(self, ordered_r2):
        _, h, _, sm = ordered_r2
        obs = dynamical_symmetry_op(2, sm)
        kick = PauliSum.single(sm.node(2), "x", sm.nsites)
        times = np.linspace(0.0, 10.0, 21)
        lr = linear_response(h, obs, kick, times)
        for eps in (1e-2, 1e-3):
            kicked = kicked_evolution(h, kick, eps, obs, times)
            assert np.abs(kicked.values - lr.values).max() <= 1e-6 * eps


class TestSpectrumCsv:
    def test_roundtrip(self):
        grid = np.linspace(0, 10, 11)
        spec = Spectrum(
            omegas=grid,
            values=np.exp(1j * grid),
            window=20.0,
            label="demo",
            meta={"config_hash": "ff"},
        )
        again = Spectrum.from_csv(spec.to_csv())
        assert np.allclose(again.omegas, grid)
        assert np.allclose(again.values, spec.values)
        assert again.window == 20.0
        assert again.meta["config_hash"] == "ff"
