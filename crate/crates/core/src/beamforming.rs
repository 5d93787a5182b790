//! True-time-delay and phase-shift beamformers, and the squint criterion
//! that says when phase shifting stops being good enough.
//!
//! TTD advances each trace by `tau + p * x_n` before summing, so a matched
//! plane wave adds coherently at every frequency. Phase-shift beamforming
//! replaces the true delay by a single phase rotation at the carrier
//! frequency; the neglected frequency-dependent term `(w - w_c) p x_n`
//! grows with bandwidth and aperture, and once the worst-case phase error
//! exceeds pi/4 (equivalently, once `(B / f_c) * (L / lambda_c) > 1/2`)
//! the beam squints and coherence is lost.

use crate::axis::Axis;
use crate::wavefield::{ArrayGeometry, PulseSpec, SpaceTimeGrid};
use crate::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// True-time-delay beamformer output over `t_axis`:
/// `a_hat(t) = sum_n f(t + tau + p * x_n, x_n)`.
///
/// Sweeping `tau` at fixed `t = 0` reproduces a slowness column of the
/// forward Radon transform scaled by `1/dx`.
pub fn ttd_beamform(data: &SpaceTimeGrid, tau: f64, p: f64, t_axis: Axis) -> Vec<f64> {
    let mut out = vec![0.0; t_axis.len];
    for (n, &x) in data.geometry().element_x().iter().enumerate() {
        let shift = tau + p * x;
        for (i, o) in out.iter_mut().enumerate() {
            *o += data.interp_or_zero(n, t_axis.value(i) + shift);
        }
    }
    out
}

/// Phase-shift beamformer output on the data's own time axis.
#[derive(Debug, Clone)]
pub struct PhaseShiftBeam {
    /// Real part of the summed analytic signal.
    pub real: Vec<f64>,
    /// Magnitude (envelope) of the summed analytic signal.
    pub magnitude: Vec<f64>,
}

/// Conventional phase-shift beamformer: form each trace's analytic signal,
/// rotate it by the carrier phase `exp(i * 2 pi f_c * p * x_n)` (no time
/// shift), and sum across traces.
///
/// The rotation sign matches the synthesis convention `a(t - t0 - s * x)`,
/// so a matched narrowband plane wave adds coherently at `p = s`. For
/// wideband signals the unshifted envelopes stay misaligned across the
/// aperture, which is precisely the squint loss.
pub fn phase_shift_beamform(
    data: &SpaceTimeGrid,
    p: f64,
    carrier_freq: f64,
) -> Result<PhaseShiftBeam> {
    if !(carrier_freq > 0.0) {
        return Err(Error::invalid("carrier frequency must be positive"));
    }
    let n_t = data.n_t();
    let mut sum = vec![Complex::new(0.0, 0.0); n_t];
    for (n, &x) in data.geometry().element_x().iter().enumerate() {
        let z = analytic_signal(data.trace(n));
        let phase = 2.0 * std::f64::consts::PI * carrier_freq * p * x;
        let w = Complex::new(phase.cos(), phase.sin());
        for (s, zv) in sum.iter_mut().zip(z) {
            *s += w * zv;
        }
    }
    Ok(PhaseShiftBeam {
        real: sum.iter().map(|c| c.re).collect(),
        magnitude: sum.iter().map(|c| c.norm()).collect(),
    })
}

/// Whether a geometry/pulse pair needs true time delay, and by how much.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquintReport {
    /// Two-sided bandwidth over carrier frequency, `B / f_c`.
    pub bandwidth_ratio: f64,
    /// Aperture in carrier wavelengths, `L / lambda_c`.
    pub aperture_ratio: f64,
    /// The squint product `(B / f_c) * (L / lambda_c)`.
    pub product: f64,
    /// True when the product strictly exceeds 1/2.
    pub ttd_required: bool,
    /// Worst-case phase-shift error `pi * B * |p| * L / 2` (radians) at the
    /// band edge and array edge for the given steering slowness.
    pub worst_phase_error: f64,
}

/// Evaluate the beam-squint criterion for steering slowness `p`.
///
/// The carrier here is the pulse's center frequency (the signal being
/// beamformed), not the array's design frequency. The boundary case
/// `product == 1/2` reports `ttd_required = false`: the criterion is a
/// strict inequality.
pub fn squint_report(geometry: &ArrayGeometry, pulse: &PulseSpec, p: f64) -> SquintReport {
    let two_sided = 2.0 * pulse.single_side_bandwidth;
    let f_c = pulse.center_freq;
    let lambda_c = crate::SPEED_OF_LIGHT / f_c;
    let l = geometry.aperture();
    let bandwidth_ratio = two_sided / f_c;
    let aperture_ratio = l / lambda_c;
    let product = bandwidth_ratio * aperture_ratio;
    SquintReport {
        bandwidth_ratio,
        aperture_ratio,
        product,
        ttd_required: product > 0.5,
        worst_phase_error: std::f64::consts::PI * two_sided * p.abs() * l / 2.0,
    }
}

/// Envelope of a real series via the analytic-signal magnitude.
pub fn envelope(series: &[f64]) -> Vec<f64> {
    analytic_signal(series).iter().map(|c| c.norm()).collect()
}

/// One-sided-spectrum analytic signal: zero the negative frequencies,
/// double the positive ones, keep DC (and Nyquist for even lengths).
/// The real part equals the input exactly.
fn analytic_signal(x: &[f64]) -> Vec<Complex<f64>> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == half) {
            // DC and Nyquist stay as-is
        } else if k < half || (!n.is_multiple_of(2) && k == half) {
            *b *= 2.0;
        } else {
            *b = Complex::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::slowness_axis;
    use crate::radon::forward_radon;
    use crate::wavefield::{
        default_time_axis, make_array, synthesize, PulseSpec, SourceSpec, SpaceTimeGrid,
    };

    fn wideband() -> PulseSpec {
        PulseSpec::gaussian(16e9, 8e9).unwrap()
    }

    fn narrowband() -> PulseSpec {
        PulseSpec::gaussian(16e9, 16e9 / 100.0).unwrap()
    }

    #[test]
    fn ttd_of_zero_data_is_zero() {
        let g = make_array(4, 24e9).unwrap();
        let time = Axis::new(0.0, 1e-11, 32);
        let data = SpaceTimeGrid::zeros(g, time);
        assert!(ttd_beamform(&data, 1e-10, 1e-9, time)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn matched_ttd_peak_scales_with_element_count() {
        // Oracle: M aligned unit-peak traces sum to M. The synthesis axis is
        // laid so the pulse peak falls exactly on a sample.
        let g = make_array(20, 24e9).unwrap();
        let t0 = 0.7e-9;
        let src = SourceSpec::far_field(0.0, t0, wideband()).unwrap();
        let dt = 1.0 / (4.0 * 24e9);
        let time = Axis::new(t0 - 80.0 * dt, dt, 161);
        let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let out = ttd_beamform(&data, t0, 0.0, Axis::new(-10.0 * dt, dt, 21));
        let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 20.0).abs() < 1e-6, "peak {peak}");
    }

    #[test]
    fn ttd_sweep_reproduces_radon_column() {
        let g = make_array(12, 24e9).unwrap();
        let src = SourceSpec::far_field(1.1e-9, 0.2e-9, wideband()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let p_axis = slowness_axis(11);
        let r = forward_radon(&data, p_axis, time);
        let k = 7;
        let p = p_axis.value(k);
        let dx = g.spacing();
        for j in (0..time.len).step_by(37) {
            let single_t = Axis::new(0.0, time.step, 1);
            let ttd = ttd_beamform(&data, time.value(j), p, single_t);
            assert!(
                (r.value(j, k) - dx * ttd[0]).abs() <= 1e-12 * r.max_abs().max(1.0),
                "tau index {j}"
            );
        }
    }

    #[test]
    fn phase_shift_at_broadside_matches_ttd() {
        // p = 0: the rotations vanish, so the real part of the phase-shift
        // sum equals the TTD output with tau = 0, p = 0 exactly (the
        // analytic signal's real part is the original trace).
        let g = make_array(16, 24e9).unwrap();
        let src = SourceSpec::far_field(0.0, 0.5e-9, wideband()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let ps = phase_shift_beamform(&data, 0.0, 16e9).unwrap();
        let ttd = ttd_beamform(&data, 0.0, 0.0, time);
        let scale = ttd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in ps.real.iter().zip(&ttd) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    /// Slowness aligned to the sampling grid of an odd-length array:
    /// `s * x_n` is then a whole number of samples on every trace, so the
    /// TTD comparison is free of interpolation loss and measures only the
    /// beamformer physics.
    fn aligned_slowness(g: &crate::wavefield::ArrayGeometry, dt: f64) -> f64 {
        dt / g.spacing()
    }

    #[test]
    fn narrowband_phase_shift_matches_ttd_within_one_percent() {
        // Oracle: numerical comparison of envelope peaks at B_ss = f0/100.
        let g = make_array(33, 24e9).unwrap();
        let dt = 1.0 / (4.0 * (16e9 + 16e9 / 100.0));
        let s_x = aligned_slowness(&g, dt);
        let src = SourceSpec::far_field(s_x, 0.0, narrowband()).unwrap();
        let t0_span = 40e-9;
        let time = Axis::new(-t0_span, dt, (2.0 * t0_span / dt) as usize);
        let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let ttd_env = envelope(&ttd_beamform(&data, 0.0, s_x, time));
        let ttd_peak = ttd_env.iter().fold(0.0f64, |m, v| m.max(*v));
        let ps = phase_shift_beamform(&data, s_x, 16e9).unwrap();
        let ps_peak = ps.magnitude.iter().fold(0.0f64, |m, v| m.max(*v));
        assert!(
            (ps_peak - ttd_peak).abs() <= 0.01 * ttd_peak,
            "ps {ps_peak} vs ttd {ttd_peak}"
        );
    }

    #[test]
    fn wideband_phase_shift_loses_coherence() {
        let g = make_array(65, 24e9).unwrap();
        let dt = 1.0 / (4.0 * 24e9);
        let s_x = aligned_slowness(&g, dt);
        let src = SourceSpec::far_field(s_x, 0.0, wideband()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let ttd_env = envelope(&ttd_beamform(&data, 0.0, s_x, time));
        let ttd_peak = ttd_env.iter().fold(0.0f64, |m, v| m.max(*v));
        let ps = phase_shift_beamform(&data, s_x, 16e9).unwrap();
        let ps_peak = ps.magnitude.iter().fold(0.0f64, |m, v| m.max(*v));
        assert!(
            ps_peak < ttd_peak,
            "wideband phase shift should lose coherence: {ps_peak} vs {ttd_peak}"
        );
    }

    #[test]
    fn coherence_loss_grows_with_bandwidth() {
        // Fixed geometry, steering, and sampling; only the bandwidth moves.
        let g = make_array(49, 24e9).unwrap();
        let dt = 1.0 / (4.0 * 24e9);
        let s_x = aligned_slowness(&g, dt);
        let mut last_loss = 0.0;
        for bss in [0.5e9, 2e9, 5e9, 8e9] {
            let pulse = PulseSpec::gaussian(16e9, bss).unwrap();
            let src = SourceSpec::far_field(s_x, 0.0, pulse).unwrap();
            let pad = 6.0 * pulse.sigma_t() + 1e-9;
            let time = Axis::new(-pad, dt, (2.0 * pad / dt) as usize);
            let data = synthesize(&g, &[src], time, 0.0, 0).unwrap();
            let ttd_env = envelope(&ttd_beamform(&data, 0.0, s_x, time));
            let ttd_peak = ttd_env.iter().fold(0.0f64, |m, v| m.max(*v));
            let ps = phase_shift_beamform(&data, s_x, 16e9).unwrap();
            let ps_peak = ps.magnitude.iter().fold(0.0f64, |m, v| m.max(*v));
            let loss = ttd_peak / ps_peak;
            assert!(
                loss >= last_loss * 0.999,
                "loss not monotone: {loss} after {last_loss} at B_ss {bss}"
            );
            last_loss = loss;
        }
        assert!(last_loss > 1.1, "widest band should show real squint loss");
    }

    #[test]
    fn squint_report_reference_parameters() {
        // 251 half-wavelength elements at 24 GHz carrying a 16 GHz pulse with
        // 8 GHz single-side bandwidth: product = B * L / c = 83.3.
        let g = make_array(251, 24e9).unwrap();
        let rep = squint_report(&g, &wideband(), 1.0 / crate::SPEED_OF_LIGHT);
        assert!((rep.bandwidth_ratio - 1.0).abs() < 1e-12);
        assert!((rep.product - 83.3).abs() < 0.1, "product {}", rep.product);
        assert!(rep.ttd_required);
        // worst phase error far beyond pi/4 at endfire
        assert!(rep.worst_phase_error > std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn squint_report_narrowband_limit_and_boundary() {
        let g = make_array(16, 24e9).unwrap();
        // B -> 0 gives product -> 0 and no TTD requirement
        let tiny = PulseSpec::gaussian(16e9, 1.0).unwrap();
        let rep = squint_report(&g, &tiny, 1e-9);
        assert!(rep.product < 1e-6);
        assert!(!rep.ttd_required);
        // exact boundary product = 1/2 stays false (strict inequality)
        let l = g.aperture();
        let bss_boundary = 0.25 * crate::SPEED_OF_LIGHT / l;
        let pulse = PulseSpec::gaussian(16e9, bss_boundary).unwrap();
        let rep = squint_report(&g, &pulse, 0.0);
        assert!((rep.product - 0.5).abs() < 1e-12);
        assert!(!rep.ttd_required);
    }

    #[test]
    fn squint_product_scales_linearly() {
        let g1 = make_array(51, 24e9).unwrap();
        let g2 = make_array(101, 24e9).unwrap();
        let p1 = squint_report(&g1, &wideband(), 0.0).product;
        let p2 = squint_report(&g2, &wideband(), 0.0).product;
        assert!((p2 / p1 - 2.0).abs() < 1e-12, "aperture doubling");
        let half_band = PulseSpec::gaussian(16e9, 4e9).unwrap();
        let p3 = squint_report(&g1, &half_band, 0.0).product;
        assert!((p1 / p3 - 2.0).abs() < 1e-12, "bandwidth halving");
    }
}
