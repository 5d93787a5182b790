//! Synthetic space/time array data from far-field and near-field sources.
//!
//! A uniform linear array centered on the origin samples wideband modulated
//! Gaussian pulses. Far-field emitters arrive as plane waves
//! `a(t - t0 - s_x * x)` characterized by a slowness `s_x`; near-field
//! emitters arrive as spherical waves `a(t - t0 - R/c) / R` with
//! `R = sqrt((x - x0)^2 + z0^2)`, tracing a hyperbolic moveout across the
//! array.

use crate::axis::{interp_uniform, Axis};
use crate::{map_indexed, Error, Result, SPEED_OF_LIGHT};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Element positions of a uniform linear array on the x-axis, centered at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    element_x: Vec<f64>,
    dx: f64,
    carrier_wavelength: f64,
}

impl ArrayGeometry {
    /// Element x-coordinates (m), strictly increasing and symmetric about 0.
    pub fn element_x(&self) -> &[f64] {
        &self.element_x
    }

    /// Element spacing (m).
    pub fn spacing(&self) -> f64 {
        self.dx
    }

    /// Number of elements.
    pub fn element_count(&self) -> usize {
        self.element_x.len()
    }

    /// Carrier wavelength the array was designed for (m).
    pub fn carrier_wavelength(&self) -> f64 {
        self.carrier_wavelength
    }

    /// Physical aperture length `L = (M - 1) * dx` (m).
    pub fn aperture(&self) -> f64 {
        (self.element_count() - 1) as f64 * self.dx
    }

    /// Fraunhofer distance `2 L^2 / lambda_c` (m): beyond it a source is
    /// effectively far-field for this aperture.
    pub fn fraunhofer_distance(&self) -> f64 {
        let l = self.aperture();
        2.0 * l * l / self.carrier_wavelength
    }

    /// Internal constructor for derived geometries (sub-arrays). The caller
    /// guarantees the uniform, centered layout.
    pub(crate) fn from_parts(
        element_x: Vec<f64>,
        dx: f64,
        carrier_wavelength: f64,
    ) -> ArrayGeometry {
        ArrayGeometry {
            element_x,
            dx,
            carrier_wavelength,
        }
    }
}

/// Build a half-wavelength-spaced uniform linear array centered at x = 0.
///
/// `dx = c / (2 * carrier_freq)`, so `carrier_freq` is the highest frequency
/// sampled without spatial aliasing.
pub fn make_array(element_count: usize, carrier_freq: f64) -> Result<ArrayGeometry> {
    if element_count < 2 {
        return Err(Error::invalid("array needs at least 2 elements"));
    }
    if !(carrier_freq > 0.0) {
        return Err(Error::invalid("carrier frequency must be positive"));
    }
    let dx = SPEED_OF_LIGHT / (2.0 * carrier_freq);
    let half = (element_count - 1) as f64 / 2.0;
    let element_x = (0..element_count).map(|n| (n as f64 - half) * dx).collect();
    Ok(ArrayGeometry {
        element_x,
        dx,
        carrier_wavelength: SPEED_OF_LIGHT / carrier_freq,
    })
}

/// Envelope family of a transmitted pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeShape {
    Gaussian,
}

/// A modulated pulse: `amplitude * a(t) * cos(2 pi f0 t)`.
///
/// For the Gaussian envelope `a(t) = exp(-t^2 / (2 sigma_t^2))` the time
/// constant is fixed at `sigma_t = 1 / (pi * B_ss)`, which puts the baseband
/// spectrum magnitude at `f = B_ss` a factor `e^-2` (about -17.4 dB) below
/// its peak. That convention keeps essentially all pulse energy inside the
/// stated single-side bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub center_freq: f64,
    pub single_side_bandwidth: f64,
    pub envelope: EnvelopeShape,
    pub amplitude: f64,
}

impl PulseSpec {
    /// A unit-amplitude Gaussian pulse at `center_freq` with single-side
    /// bandwidth `single_side_bandwidth` (both Hz).
    pub fn gaussian(center_freq: f64, single_side_bandwidth: f64) -> Result<PulseSpec> {
        if !(center_freq > 0.0) {
            return Err(Error::invalid("pulse center frequency must be positive"));
        }
        if !(single_side_bandwidth > 0.0 && single_side_bandwidth <= center_freq) {
            return Err(Error::invalid(
                "single-side bandwidth must satisfy 0 < B_ss <= f0",
            ));
        }
        Ok(PulseSpec {
            center_freq,
            single_side_bandwidth,
            envelope: EnvelopeShape::Gaussian,
            amplitude: 1.0,
        })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> PulseSpec {
        self.amplitude = amplitude;
        self
    }

    /// Gaussian time constant `sigma_t = 1 / (pi * B_ss)` (s).
    pub fn sigma_t(&self) -> f64 {
        1.0 / (std::f64::consts::PI * self.single_side_bandwidth)
    }

    /// Effective pulse duration, `6 sigma_t` (s). Used as the default
    /// semblance window length.
    pub fn duration(&self) -> f64 {
        6.0 * self.sigma_t()
    }
}

/// Evaluate the modulated pulse at time `t` relative to the pulse center.
pub fn gaussian_pulse(t: f64, pulse: &PulseSpec) -> f64 {
    let sigma = pulse.sigma_t();
    let envelope = (-t * t / (2.0 * sigma * sigma)).exp();
    pulse.amplitude * envelope * (2.0 * std::f64::consts::PI * pulse.center_freq * t).cos()
}

/// What kind of emitter a source is, and where/when it radiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Plane wave `a(t - delay - slowness * x)`; `|slowness| <= 1/c`.
    FarField { slowness: f64, delay: f64 },
    /// Spherical wave `a(t - delay - R/c) / R` from `(x, z)` with `z > 0`.
    NearField { x: f64, z: f64, delay: f64 },
}

/// One emitter: its kind plus the pulse it transmits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub pulse: PulseSpec,
}

impl SourceSpec {
    pub fn far_field(slowness: f64, delay: f64, pulse: PulseSpec) -> Result<SourceSpec> {
        if slowness.abs() > 1.0 / SPEED_OF_LIGHT {
            return Err(Error::invalid(
                "far-field slowness exceeds 1/c (not a propagating wave)",
            ));
        }
        Ok(SourceSpec {
            kind: SourceKind::FarField { slowness, delay },
            pulse,
        })
    }

    pub fn near_field(x: f64, z: f64, delay: f64, pulse: PulseSpec) -> Result<SourceSpec> {
        if !(z > 0.0) {
            return Err(Error::invalid(
                "near-field source must be in front of the array (z > 0)",
            ));
        }
        Ok(SourceSpec {
            kind: SourceKind::NearField { x, z, delay },
            pulse,
        })
    }

    /// Pulse-center arrival time at array position `x_elem`.
    pub fn arrival_time(&self, x_elem: f64) -> f64 {
        match self.kind {
            SourceKind::FarField { slowness, delay } => delay + slowness * x_elem,
            SourceKind::NearField { x, z, delay } => delay + (x_elem - x).hypot(z) / SPEED_OF_LIGHT,
        }
    }

    fn contribution(&self, t: f64, x_elem: f64) -> f64 {
        match self.kind {
            SourceKind::FarField { slowness, delay } => {
                gaussian_pulse(t - delay - slowness * x_elem, &self.pulse)
            }
            SourceKind::NearField { x, z, delay } => {
                let r = (x_elem - x).hypot(z);
                gaussian_pulse(t - delay - r / SPEED_OF_LIGHT, &self.pulse) / r
            }
        }
    }
}

/// Sampled space/time data `f(t, x)`: one trace per array element.
///
/// Traces are stored contiguously (trace-major) because every transform
/// interpolates along time within a single trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    samples: Vec<f64>,
    time: Axis,
    geometry: ArrayGeometry,
}

impl SpaceTimeGrid {
    pub fn zeros(geometry: ArrayGeometry, time: Axis) -> SpaceTimeGrid {
        SpaceTimeGrid {
            samples: vec![0.0; time.len * geometry.element_count()],
            time,
            geometry,
        }
    }

    /// Build a grid from row-major samples (`n_t` rows of `element_count`
    /// values each). Rejects non-finite samples and shape mismatches.
    pub fn from_rows(geometry: ArrayGeometry, time: Axis, rows: &[f64]) -> Result<SpaceTimeGrid> {
        let m = geometry.element_count();
        if rows.len() != time.len * m {
            return Err(Error::invalid(format!(
                "expected {} samples ({} x {}), got {}",
                time.len * m,
                time.len,
                m,
                rows.len()
            )));
        }
        if !rows.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("space/time samples must all be finite"));
        }
        let mut grid = SpaceTimeGrid::zeros(geometry, time);
        for i in 0..time.len {
            for n in 0..m {
                *grid.sample_mut(i, n) = rows[i * m + n];
            }
        }
        Ok(grid)
    }

    pub fn time(&self) -> Axis {
        self.time
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn n_t(&self) -> usize {
        self.time.len
    }

    /// Sample at time index `i`, element index `n`.
    #[inline]
    pub fn sample(&self, i: usize, n: usize) -> f64 {
        self.samples[n * self.time.len + i]
    }

    #[inline]
    pub fn sample_mut(&mut self, i: usize, n: usize) -> &mut f64 {
        &mut self.samples[n * self.time.len + i]
    }

    /// The full trace recorded by element `n`.
    #[inline]
    pub fn trace(&self, n: usize) -> &[f64] {
        &self.samples[n * self.time.len..(n + 1) * self.time.len]
    }

    /// Linear interpolation of trace `n` at time `t`; `None` outside the
    /// recorded window.
    #[inline]
    pub fn interp(&self, n: usize, t: f64) -> Option<f64> {
        interp_uniform(self.trace(n), self.time.start, 1.0 / self.time.step, t)
    }

    /// Like [`interp`](Self::interp) but with zero extension outside the
    /// recorded window.
    #[inline]
    pub fn interp_or_zero(&self, n: usize, t: f64) -> f64 {
        self.interp(n, t).unwrap_or(0.0)
    }

    /// Largest absolute sample value.
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    #[cfg(test)]
    pub(crate) fn raw(&self) -> &[f64] {
        &self.samples
    }

    pub(crate) fn from_traces(
        geometry: ArrayGeometry,
        time: Axis,
        traces: Vec<Vec<f64>>,
    ) -> SpaceTimeGrid {
        debug_assert_eq!(traces.len(), geometry.element_count());
        let mut samples = Vec::with_capacity(time.len * traces.len());
        for trace in &traces {
            debug_assert_eq!(trace.len(), time.len);
            samples.extend_from_slice(trace);
        }
        SpaceTimeGrid {
            samples,
            time,
            geometry,
        }
    }
}

/// Synthesize array data: the superposition of every source's contribution,
/// plus optional white Gaussian noise.
///
/// Noise is drawn per sample (trace by trace, time ascending) from a
/// ChaCha8 stream seeded with `seed`, so identical inputs produce
/// bit-identical grids regardless of thread count.
pub fn synthesize(
    geometry: &ArrayGeometry,
    sources: &[SourceSpec],
    time: Axis,
    noise_std: f64,
    seed: u64,
) -> Result<SpaceTimeGrid> {
    if !(time.step > 0.0) || time.len < 1 {
        return Err(Error::invalid("time axis must have dt > 0 and n_t >= 1"));
    }
    if !(noise_std >= 0.0) {
        return Err(Error::invalid("noise standard deviation must be >= 0"));
    }

    let traces = map_indexed(geometry.element_count(), |n| {
        let x = geometry.element_x[n];
        let mut trace = Vec::with_capacity(time.len);
        for i in 0..time.len {
            let t = time.value(i);
            let mut v = 0.0;
            for src in sources {
                v += src.contribution(t, x);
            }
            trace.push(v);
        }
        trace
    });
    let mut grid = SpaceTimeGrid::from_traces(geometry.clone(), time, traces);

    if noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in grid.samples.iter_mut() {
            *v += noise_std * standard_normal(&mut rng);
        }
    }
    Ok(grid)
}

/// Standard normal deviate via Box-Muller on a uniform (0, 1] pair.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // 53-bit uniforms; shifting into (0, 1] keeps ln() finite.
    let u1 = 1.0 - uniform_01(rng.next_u64());
    let u2 = uniform_01(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[inline]
fn uniform_01(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Default sampling interval: `1 / (4 (f0 + B_ss))` of the widest-band
/// source, i.e. 4x oversampling of the highest significant frequency.
pub fn default_time_step(sources: &[SourceSpec]) -> Option<f64> {
    sources
        .iter()
        .map(|s| 1.0 / (4.0 * (s.pulse.center_freq + s.pulse.single_side_bandwidth)))
        .min_by(|a, b| a.total_cmp(b))
}

/// Default time window: every arrival across all sources and elements,
/// padded by five Gaussian time constants on each side so no pulse is
/// truncated.
pub fn default_time_window(geometry: &ArrayGeometry, sources: &[SourceSpec]) -> Option<(f64, f64)> {
    if sources.is_empty() {
        return None;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for src in sources {
        let pad = 5.0 * src.pulse.sigma_t();
        for &x in geometry.element_x() {
            let t = src.arrival_time(x);
            lo = lo.min(t - pad);
            hi = hi.max(t + pad);
        }
    }
    Some((lo, hi))
}

/// Default time axis combining [`default_time_step`] and
/// [`default_time_window`]; `None` when there are no sources.
pub fn default_time_axis(geometry: &ArrayGeometry, sources: &[SourceSpec]) -> Option<Axis> {
    let dt = default_time_step(sources)?;
    let (lo, hi) = default_time_window(geometry, sources)?;
    let n_t = ((hi - lo) / dt).ceil() as usize + 1;
    Some(Axis::new(lo, dt, n_t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_pulse() -> PulseSpec {
        PulseSpec::gaussian(16e9, 8e9).unwrap()
    }

    #[test]
    fn make_array_reference_geometry() {
        // 251 elements at half-wavelength spacing for 24 GHz:
        // dx = c / 48e9, L = 250 * dx.
        let g = make_array(251, 24e9).unwrap();
        let dx = SPEED_OF_LIGHT / 48e9;
        assert!((g.spacing() - dx).abs() < 1e-18);
        assert!((g.spacing() - 6.2457e-3).abs() < 1e-7);
        assert!((g.aperture() - 250.0 * dx).abs() < 1e-12);
        assert!((g.aperture() - 1.5614).abs() < 1e-4);
        assert!((g.carrier_wavelength() - 2.0 * dx).abs() < 1e-18);
        // centered: symmetric end elements, middle element at exactly 0
        assert_eq!(g.element_count(), 251);
        assert_eq!(g.element_x()[125], 0.0);
        assert!((g.element_x()[0] + g.element_x()[250]).abs() < 1e-15);
    }

    #[test]
    fn make_array_two_elements_flank_origin() {
        let g = make_array(2, 10e9).unwrap();
        let dx = g.spacing();
        assert_eq!(g.element_x(), &[-dx / 2.0, dx / 2.0]);
    }

    #[test]
    fn make_array_three_elements_at_15ghz() {
        // dx = c / 30e9 = 9.993 mm, hand-checked.
        let g = make_array(3, 15e9).unwrap();
        let dx = SPEED_OF_LIGHT / 30e9;
        assert!((dx - 9.993e-3).abs() < 1e-6);
        assert!((g.element_x()[0] + dx).abs() < 1e-15);
        assert_eq!(g.element_x()[1], 0.0);
        assert!((g.element_x()[2] - dx).abs() < 1e-15);
    }

    #[test]
    fn make_array_rejects_bad_inputs() {
        assert!(make_array(1, 24e9).is_err());
        assert!(make_array(8, 0.0).is_err());
        assert!(make_array(8, -1.0).is_err());
    }

    #[test]
    fn pulse_peaks_at_origin_and_decays() {
        let p = test_pulse().with_amplitude(2.5);
        assert_eq!(gaussian_pulse(0.0, &p), 2.5);
        assert!(gaussian_pulse(10.0 * p.sigma_t(), &p).abs() < 1e-18);
        assert!(gaussian_pulse(-10.0 * p.sigma_t(), &p).abs() < 1e-18);
    }

    #[test]
    fn pulse_spectrum_band_edge_is_e_minus_2() {
        // Oracle: DFT of the sampled pulse. The spectrum magnitude at
        // f0 +/- B_ss must be e^-2 of the magnitude at f0.
        let p = test_pulse();
        let dt = 1.0 / (16.0 * (p.center_freq + p.single_side_bandwidth));
        let half = (10.0 * p.sigma_t() / dt).ceil() as i64;
        let samples: Vec<f64> = (-half..=half)
            .map(|i| gaussian_pulse(i as f64 * dt, &p))
            .collect();
        let n = samples.len();
        let dft_mag = |f: f64| -> f64 {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in samples.iter().enumerate() {
                let ph = -2.0 * std::f64::consts::PI * f * (i as f64 - half as f64) * dt;
                re += v * ph.cos();
                im += v * ph.sin();
            }
            re.hypot(im) / n as f64
        };
        let peak = dft_mag(p.center_freq);
        let upper = dft_mag(p.center_freq + p.single_side_bandwidth);
        let lower = dft_mag(p.center_freq - p.single_side_bandwidth);
        let target = (-2.0f64).exp();
        assert!((upper / peak - target).abs() < 0.01 * target, "upper edge");
        assert!((lower / peak - target).abs() < 0.01 * target, "lower edge");
    }

    #[test]
    fn broadside_plane_wave_hits_all_elements_at_once() {
        let g = make_array(16, 24e9).unwrap();
        let src = SourceSpec::far_field(0.0, 1e-9, test_pulse()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let grid = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        for n in 1..16 {
            assert_eq!(grid.trace(n), grid.trace(0), "trace {n} differs");
        }
    }

    #[test]
    fn near_field_moveout_is_hyperbolic() {
        // Oracle: arrival time on element n is t0 + R_n / c, evaluated
        // directly; the sampled peak must land within one sample of it.
        let g = make_array(64, 24e9).unwrap();
        let z0 = 0.5;
        let t0 = 2e-9;
        let src = SourceSpec::near_field(0.0, z0, t0, test_pulse()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let grid = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        for n in [0usize, 21, 47, 63] {
            let x = g.element_x()[n];
            let expected = t0 + x.hypot(z0) / SPEED_OF_LIGHT;
            let peak = (0..grid.n_t())
                .max_by(|&a, &b| grid.sample(a, n).abs().total_cmp(&grid.sample(b, n).abs()))
                .unwrap();
            assert!(
                (time.value(peak) - expected).abs() <= time.step,
                "element {n}: peak at {} vs expected {}",
                time.value(peak),
                expected
            );
        }
    }

    #[test]
    fn near_field_amplitude_decays_as_one_over_range() {
        // Sampled at 16x the top frequency so the carrier peak is captured
        // to well under the 2% budget on every trace.
        let g = make_array(64, 24e9).unwrap();
        let z0 = 0.4;
        let src = SourceSpec::near_field(0.0, z0, 0.0, test_pulse()).unwrap();
        let coarse = default_time_axis(&g, &[src]).unwrap();
        let time = Axis::new(coarse.start, coarse.step / 4.0, coarse.len * 4);
        let grid = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        for n in [0usize, 16, 32, 63] {
            let r = g.element_x()[n].hypot(z0);
            let peak = (0..grid.n_t())
                .map(|i| grid.sample(i, n).abs())
                .fold(0.0f64, f64::max);
            let expected = 1.0 / r;
            assert!(
                (peak - expected).abs() <= 0.02 * expected,
                "element {n}: peak {peak} vs 1/R {expected}"
            );
        }
    }

    #[test]
    fn far_field_moveout_lag_between_adjacent_traces() {
        // Oracle: cross-correlation lag between adjacent traces equals
        // round(s_x * dx / dt).
        let g = make_array(8, 24e9).unwrap();
        let s_x = 2.1e-9; // s/m
        let src = SourceSpec::far_field(s_x, 0.0, test_pulse()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let grid = synthesize(&g, &[src], time, 0.0, 0).unwrap();
        let expected_lag = (s_x * g.spacing() / time.step).round() as i64;
        assert!(expected_lag > 0);
        for n in 0..7 {
            let (a, b) = (grid.trace(n), grid.trace(n + 1));
            let mut best = (0i64, f64::NEG_INFINITY);
            for lag in -3 * expected_lag..=3 * expected_lag {
                let mut acc = 0.0;
                for (i, &av) in a.iter().enumerate() {
                    let j = i as i64 + lag;
                    if j >= 0 && (j as usize) < b.len() {
                        acc += av * b[j as usize];
                    }
                }
                if acc > best.1 {
                    best = (lag, acc);
                }
            }
            assert_eq!(best.0, expected_lag, "adjacent pair {n}");
        }
    }

    #[test]
    fn superposition_is_exact() {
        let g = make_array(12, 24e9).unwrap();
        let a = SourceSpec::far_field(1.0e-9, 0.5e-9, test_pulse()).unwrap();
        let b = SourceSpec::near_field(0.02, 0.3, 0.0, test_pulse()).unwrap();
        let time = default_time_axis(&g, &[a, b]).unwrap();
        let both = synthesize(&g, &[a, b], time, 0.0, 0).unwrap();
        let only_a = synthesize(&g, &[a], time, 0.0, 0).unwrap();
        let only_b = synthesize(&g, &[b], time, 0.0, 0).unwrap();
        for i in 0..time.len {
            for n in 0..12 {
                let sum = only_a.sample(i, n) + only_b.sample(i, n);
                assert!((both.sample(i, n) - sum).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let g = make_array(6, 24e9).unwrap();
        let src = SourceSpec::far_field(0.0, 0.0, test_pulse()).unwrap();
        let time = default_time_axis(&g, &[src]).unwrap();
        let a = synthesize(&g, &[src], time, 0.1, 42).unwrap();
        let b = synthesize(&g, &[src], time, 0.1, 42).unwrap();
        let c = synthesize(&g, &[src], time, 0.1, 43).unwrap();
        assert_eq!(a.raw(), b.raw());
        assert_ne!(a.raw(), c.raw());
    }

    #[test]
    fn empty_source_list_gives_zeros_or_pure_noise() {
        let g = make_array(4, 24e9).unwrap();
        let time = Axis::new(0.0, 1e-11, 64);
        let silent = synthesize(&g, &[], time, 0.0, 0).unwrap();
        assert!(silent.raw().iter().all(|&v| v == 0.0));
        let noisy = synthesize(&g, &[], time, 0.5, 7).unwrap();
        assert!(noisy.raw().iter().any(|&v| v != 0.0));
        assert!(noisy.raw().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn source_validation() {
        let p = test_pulse();
        assert!(SourceSpec::far_field(1.1 / SPEED_OF_LIGHT, 0.0, p).is_err());
        assert!(SourceSpec::far_field(-1.0 / SPEED_OF_LIGHT, 0.0, p).is_ok());
        assert!(SourceSpec::near_field(0.0, 0.0, 0.0, p).is_err());
        assert!(SourceSpec::near_field(0.0, -1.0, 0.0, p).is_err());
        assert!(PulseSpec::gaussian(16e9, 17e9).is_err());
        assert!(PulseSpec::gaussian(0.0, 1e9).is_err());
    }
}
