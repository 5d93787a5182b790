//! Interactive browser demo of slant-stack near-field/far-field
//! separation.
//!
//! A small linear array (48 elements at 24 GHz) receives two far-field
//! plane waves and one movable near-field source. The page exposes three
//! operations, each backed by the core crate:
//!
//! 1. synthesize and render the space/time wavefield,
//! 2. render the Radon image with the predicted ellipse locus and the
//!    detected slowness bands overlaid,
//! 3. run the full separation (mask, inverse transform) and the sub-array
//!    localization, rendering the near-field-only wavefield.
//!
//! All methods exchange plain buffers (RGBA bytes, coordinate pairs) so
//! the page needs no framework, just canvases.

use slantstack::axis::{slowness_axis, Axis};
use slantstack::localization::{localize_and_extract, LocalizeConfig, PositionEstimate};
use slantstack::radon::{ellipse_locus, forward_radon, inverse_radon, RadonGrid};
use slantstack::semblance::{
    default_window_len, detect_plane_waves, semblance, slowness_profile, SlownessBand, WindowShape,
};
use slantstack::slowness_filter::{apply_mask, build_mask};
use slantstack::wavefield::{
    make_array, synthesize, ArrayGeometry, PulseSpec, SourceSpec, SpaceTimeGrid,
};
use slantstack::SPEED_OF_LIGHT;
use wasm_bindgen::prelude::*;

const ELEMENT_COUNT: usize = 48;
const CARRIER_FREQ: f64 = 24e9;
const PULSE_F0: f64 = 16e9;
const PULSE_BSS: f64 = 8e9;
const N_P: usize = 201;
const GUARD_CELLS: usize = 1;
const TAPER_CELLS: usize = 2;

struct Computed {
    data: SpaceTimeGrid,
    radon: RadonGrid,
    filtered_st: SpaceTimeGrid,
    bands: Vec<SlownessBand>,
    position: Result<PositionEstimate, String>,
    p_axis: Axis,
    tau_axis: Axis,
}

/// The interactive scene: two fixed-delay far-field arrivals, one movable
/// near-field source, and the processing knobs.
#[wasm_bindgen]
pub struct Demo {
    geometry: ArrayGeometry,
    pulse: PulseSpec,
    near_x: f64,
    near_z: f64,
    far_slowness: f64,
    threshold: f64,
    noise_std: f64,
    seed: u64,
    computed: Option<Computed>,
}

impl Default for Demo {
    fn default() -> Self {
        Demo::new()
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        Demo {
            geometry: make_array(ELEMENT_COUNT, CARRIER_FREQ).unwrap(),
            pulse: PulseSpec::gaussian(PULSE_F0, PULSE_BSS).unwrap(),
            near_x: 0.05,
            near_z: 0.35,
            far_slowness: 2.4e-9,
            threshold: 0.2,
            noise_std: 0.0,
            seed: 7,
            computed: None,
        }
    }

    /// Move the near-field source (meters; z is clamped to stay in front
    /// of the array).
    pub fn set_near_field(&mut self, x_m: f64, z_m: f64) {
        self.near_x = x_m.clamp(-0.12, 0.12);
        self.near_z = z_m.clamp(0.2, 0.8);
        self.computed = None;
    }

    /// Steer the adjustable far-field interferer (ns/m).
    pub fn set_far_slowness(&mut self, p_ns_per_m: f64) {
        let limit = 1.0 / SPEED_OF_LIGHT;
        self.far_slowness = (p_ns_per_m * 1e-9).clamp(-limit, limit);
        self.computed = None;
    }

    /// Detection threshold for the slowness profile.
    pub fn set_threshold(&mut self, epsilon: f64) {
        self.threshold = epsilon.clamp(0.05, 0.95);
        self.computed = None;
    }

    /// Additive white noise standard deviation.
    pub fn set_noise(&mut self, std: f64) {
        self.noise_std = std.max(0.0);
        self.computed = None;
    }

    /// Run the whole chain for the current parameters.
    pub fn recompute(&mut self) {
        let sources = self.sources();
        let time = Axis::new(-0.65e-9, 1.0 / 96e9, 250);
        let tau_axis = Axis::new(0.0, time.step, 126);
        let p_axis = slowness_axis(N_P);
        let data = synthesize(&self.geometry, &sources, time, self.noise_std, self.seed).unwrap();
        let radon = forward_radon(&data, p_axis, tau_axis);

        let window = default_window_len(&self.pulse, tau_axis.step);
        let semb = semblance(&data, p_axis, tau_axis, window, WindowShape::Rectangular).unwrap();
        let profile = slowness_profile(&semb);
        let bands = detect_plane_waves(&profile, self.threshold).unwrap();
        let mask = build_mask(&bands, p_axis, GUARD_CELLS, TAPER_CELLS);
        let filtered = apply_mask(&radon, &mask).unwrap();
        let filtered_st = inverse_radon(&filtered, &self.geometry, time);

        let mut cfg = LocalizeConfig::new(window);
        cfg.n_p = N_P;
        cfg.k_max = 16;
        cfg.min_energy_frac = 0.05;
        let position = localize_and_extract(&filtered_st, &data, &cfg)
            .map(|(pos, _)| pos)
            .map_err(|e| e.to_string());

        self.computed = Some(Computed {
            data,
            radon,
            filtered_st,
            bands,
            position,
            p_axis,
            tau_axis,
        });
    }

    fn computed(&mut self) -> &Computed {
        if self.computed.is_none() {
            self.recompute();
        }
        self.computed.as_ref().unwrap()
    }

    pub fn wavefield_width(&mut self) -> usize {
        self.computed().data.geometry().element_count()
    }

    pub fn wavefield_height(&mut self) -> usize {
        self.computed().data.n_t()
    }

    /// Space/time measurement as RGBA pixels (one per sample, elements
    /// across, time down), on a diverging colormap.
    pub fn wavefield_rgba(&mut self) -> Vec<u8> {
        let c = self.computed();
        spacetime_rgba(&c.data, c.data.max_abs())
    }

    /// Near-field-only reconstruction on the same color scale as the
    /// measurement.
    pub fn filtered_rgba(&mut self) -> Vec<u8> {
        let c = self.computed();
        spacetime_rgba(&c.filtered_st, c.data.max_abs())
    }

    pub fn radon_width(&mut self) -> usize {
        self.computed().p_axis.len
    }

    pub fn radon_height(&mut self) -> usize {
        self.computed().tau_axis.len
    }

    /// Radon-domain magnitude (slowness across, delay down) on a sequential
    /// colormap.
    pub fn radon_rgba(&mut self) -> Vec<u8> {
        let c = self.computed();
        let max = c.radon.max_abs().max(f64::MIN_POSITIVE);
        let (n_tau, n_p) = (c.tau_axis.len, c.p_axis.len);
        let mut out = Vec::with_capacity(n_tau * n_p * 4);
        for j in 0..n_tau {
            for k in 0..n_p {
                let v = (c.radon.value(j, k).abs() / max).powf(0.5);
                out.extend_from_slice(&heat(v));
            }
        }
        out
    }

    /// Predicted ellipse locus for the current near-field source, as
    /// (column, row) pixel pairs on the Radon image; aperture-supported
    /// points only.
    pub fn ellipse_overlay(&mut self) -> Vec<f32> {
        let near = (self.near_x, self.near_z);
        let geometry = self.geometry.clone();
        let c = self.computed();
        let (_, points) = match ellipse_locus(near.0, near.1, -0.2e-9, c.p_axis, &geometry) {
            Ok(result) => result,
            Err(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        for pt in points.iter().filter(|pt| pt.aperture_supported) {
            let col = c.p_axis.fractional_index(pt.slowness);
            let row = c.tau_axis.fractional_index(pt.delay);
            if row >= 0.0 && row < c.tau_axis.len as f64 {
                out.push(col as f32);
                out.push(row as f32);
            }
        }
        out
    }

    /// Detected stop bands as (first, last) pixel-column pairs on the
    /// Radon image.
    pub fn detected_band_edges(&mut self) -> Vec<f32> {
        let c = self.computed();
        let mut out = Vec::new();
        for band in &c.bands {
            out.push(c.p_axis.fractional_index(band.p_low) as f32);
            out.push(c.p_axis.fractional_index(band.p_high) as f32);
        }
        out
    }

    /// `[x_hat, z_hat, residual, sub_array_count]`, or empty when the
    /// localization failed (see [`status`](Self::status)).
    pub fn localization(&mut self) -> Vec<f64> {
        match &self.computed().position {
            Ok(pos) => vec![pos.x, pos.z, pos.residual, pos.estimates.len() as f64],
            Err(_) => Vec::new(),
        }
    }

    /// The true near-field position `[x, z]` for comparison.
    pub fn true_position(&self) -> Vec<f64> {
        vec![self.near_x, self.near_z]
    }

    /// Human-readable summary of the last run.
    pub fn status(&mut self) -> String {
        let threshold = self.threshold;
        let c = self.computed();
        let bands = c.bands.len();
        match &c.position {
            Ok(pos) => format!(
                "{bands} band(s) at threshold {threshold}; localized at ({:.3} m, {:.3} m), residual {:.1} mm, {} sub-arrays",
                pos.x,
                pos.z,
                pos.residual * 1e3,
                pos.estimates.len()
            ),
            Err(e) => format!("{bands} band(s) at threshold {threshold}; localization failed: {e}"),
        }
    }

    /// Beam-squint product `(B / f_c) * (L / lambda_c)` for this scene;
    /// values above 0.5 mean phase-shift beamforming would squint and true
    /// time delay is required.
    pub fn squint_product(&self) -> f64 {
        slantstack::beamforming::squint_report(&self.geometry, &self.pulse, 0.0).product
    }
}

impl Demo {
    fn sources(&self) -> Vec<SourceSpec> {
        vec![
            SourceSpec::far_field(-3.0e-9, 0.9e-9, self.pulse).unwrap(),
            SourceSpec::far_field(self.far_slowness, 0.4e-9, self.pulse).unwrap(),
            SourceSpec::near_field(self.near_x, self.near_z, -0.2e-9, self.pulse).unwrap(),
        ]
    }
}

fn spacetime_rgba(grid: &SpaceTimeGrid, scale: f64) -> Vec<u8> {
    let scale = scale.max(f64::MIN_POSITIVE);
    let (n_t, m) = (grid.n_t(), grid.geometry().element_count());
    let mut out = Vec::with_capacity(n_t * m * 4);
    for i in 0..n_t {
        for n in 0..m {
            out.extend_from_slice(&diverging(grid.sample(i, n) / scale));
        }
    }
    out
}

/// Diverging blue-white-red map for signed values in [-1, 1].
fn diverging(v: f64) -> [u8; 4] {
    let v = v.clamp(-1.0, 1.0);
    let t = v.abs().powf(0.7);
    let (r, g, b) = if v >= 0.0 {
        (1.0, 1.0 - 0.75 * t, 1.0 - t)
    } else {
        (1.0 - t, 1.0 - 0.75 * t, 1.0)
    };
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8, 255]
}

/// Sequential dark-to-bright heat map for values in [0, 1].
fn heat(v: f64) -> [u8; 4] {
    let v = v.clamp(0.0, 1.0);
    let r = (3.0 * v).min(1.0);
    let g = (3.0 * v - 1.0).clamp(0.0, 1.0);
    let b = (3.0 * v - 2.0).clamp(0.0, 1.0);
    [(r * 255.0) as u8, (g * 200.0) as u8, (b * 255.0) as u8, 255]
}
