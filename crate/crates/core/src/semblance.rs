//! Windowed semblance over the (tau, slowness) plane, the normalized
//! slowness profile, and threshold detection of plane-wave arrivals.
//!
//! Semblance is the ratio of stacked (coherent) energy to total energy along
//! a trial line, smoothed along tau by a window:
//!
//! ```text
//! s_w(tau, p) = [((1/M') sum_n f(tau + p x_n, x_n))^2 * w]
//!             / [ (1/M') sum_n f^2(tau + p x_n, x_n)  * w]
//! ```
//!
//! It equals one exactly for a pure plane wave and is invariant to overall
//! data amplitude, so thresholding it behaves like a constant false-alarm
//! rate test: weak arrivals are detected next to strong ones.
//!
//! `M'` counts only the traces whose interpolation point falls inside the
//! recorded window, which keeps record edges from diluting the ratio.

use crate::axis::Axis;
use crate::wavefield::{PulseSpec, SpaceTimeGrid};
use crate::{map_indexed, Error, Result};

/// Tau-domain smoothing window applied to semblance numerator and
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    Rectangular,
    RaisedCosine,
    BlackmanHarris,
}

impl WindowShape {
    /// Window sample values; all non-negative, so windowing preserves the
    /// semblance bound `numerator <= denominator`.
    pub fn samples(&self, len: usize) -> Vec<f64> {
        assert!(len >= 1);
        if len == 1 {
            return vec![1.0];
        }
        let n = (len - 1) as f64;
        (0..len)
            .map(|i| {
                let u = i as f64 / n;
                match self {
                    WindowShape::Rectangular => 1.0,
                    WindowShape::RaisedCosine => {
                        0.5 * (1.0 - (2.0 * std::f64::consts::PI * u).cos())
                    }
                    WindowShape::BlackmanHarris => {
                        let t = 2.0 * std::f64::consts::PI * u;
                        0.35875 - 0.48829 * t.cos() + 0.14128 * (2.0 * t).cos()
                            - 0.01168 * (3.0 * t).cos()
                    }
                }
            })
            .collect()
    }
}

/// Windowed semblance values on a (tau, slowness) grid, each in `[0, 1]`
/// (up to 1e-9 of numerical slack).
#[derive(Debug, Clone, PartialEq)]
pub struct SemblanceGrid {
    values: Vec<f64>,
    tau: Axis,
    p: Axis,
    window_len: usize,
    window_shape: WindowShape,
}

impl SemblanceGrid {
    pub fn tau(&self) -> Axis {
        self.tau
    }

    pub fn p(&self) -> Axis {
        self.p
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn window_shape(&self) -> WindowShape {
        self.window_shape
    }

    #[inline]
    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[k * self.tau.len + j]
    }

    /// The tau series at slowness index `k`.
    #[inline]
    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k * self.tau.len..(k + 1) * self.tau.len]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Indices `(j, k)` of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for k in 0..self.p.len {
            for (j, v) in self.column(k).iter().enumerate() {
                if *v > best_v {
                    best_v = *v;
                    best = (j, k);
                }
            }
        }
        best
    }

    #[cfg(test)]
    pub(crate) fn raw(&self) -> &[f64] {
        &self.values
    }

    /// Rebuild a grid from row-major values plus the window descriptor it
    /// was computed with (used when reading semblance back from a file,
    /// which does not store the window).
    pub fn from_parts(
        rows: Vec<f64>,
        tau: Axis,
        p: Axis,
        window_len: usize,
        window_shape: WindowShape,
    ) -> Result<SemblanceGrid> {
        if rows.len() != tau.len * p.len {
            return Err(Error::invalid(format!(
                "expected {} semblance values, got {}",
                tau.len * p.len,
                rows.len()
            )));
        }
        if !rows.iter().all(|v| (0.0..=1.0 + 1e-9).contains(v)) {
            return Err(Error::invalid("semblance values must lie in [0, 1]"));
        }
        let mut values = vec![0.0; rows.len()];
        for j in 0..tau.len {
            for k in 0..p.len {
                values[k * tau.len + j] = rows[j * p.len + k];
            }
        }
        Ok(SemblanceGrid {
            values,
            tau,
            p,
            window_len,
            window_shape,
        })
    }
}

/// Default semblance window length in samples: the pulse duration
/// (six Gaussian time constants), at least one sample.
pub fn default_window_len(pulse: &PulseSpec, d_tau: f64) -> usize {
    ((pulse.duration() / d_tau).round() as usize).max(1)
}

/// Compute windowed semblance of `data` over the given axes.
///
/// Cells whose denominator is zero (no energy, or no trace in the record)
/// map to semblance 0, never NaN.
pub fn semblance(
    data: &SpaceTimeGrid,
    p_axis: Axis,
    tau_axis: Axis,
    window_len: usize,
    window_shape: WindowShape,
) -> Result<SemblanceGrid> {
    Ok(semblance_with_energy(data, p_axis, tau_axis, window_len, window_shape)?.0)
}

/// Semblance plus the windowed stack energy (the denominator of the ratio,
/// column-major like the grid). The energy tells real arrivals apart from
/// low-amplitude coherent artifacts, which semblance alone cannot do.
pub(crate) fn semblance_with_energy(
    data: &SpaceTimeGrid,
    p_axis: Axis,
    tau_axis: Axis,
    window_len: usize,
    window_shape: WindowShape,
) -> Result<(SemblanceGrid, Vec<f64>)> {
    if window_len < 1 {
        return Err(Error::invalid("semblance window must be >= 1 sample"));
    }
    let window = window_shape.samples(window_len);
    let columns = map_indexed(p_axis.len, |k| {
        let p = p_axis.value(k);
        let n_tau = tau_axis.len;
        let mut num0 = vec![0.0; n_tau];
        let mut den0 = vec![0.0; n_tau];
        for j in 0..n_tau {
            let tau = tau_axis.value(j);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut fold = 0usize;
            for (n, &x) in data.geometry().element_x().iter().enumerate() {
                if let Some(v) = data.interp(n, tau + p * x) {
                    sum += v;
                    sum_sq += v * v;
                    fold += 1;
                }
            }
            if fold > 0 {
                let mean = sum / fold as f64;
                num0[j] = mean * mean;
                den0[j] = sum_sq / fold as f64;
            }
        }
        let num = convolve_same(&num0, &window);
        let den = convolve_same(&den0, &window);
        let ratio = num
            .iter()
            .zip(&den)
            .map(|(n, d)| if *d > 0.0 { n / d } else { 0.0 })
            .collect::<Vec<f64>>();
        (ratio, den)
    });
    let mut values = Vec::with_capacity(tau_axis.len * p_axis.len);
    let mut energy = Vec::with_capacity(tau_axis.len * p_axis.len);
    for (ratio, den) in &columns {
        values.extend_from_slice(ratio);
        energy.extend_from_slice(den);
    }
    Ok((
        SemblanceGrid {
            values,
            tau: tau_axis,
            p: p_axis,
            window_len,
            window_shape,
        },
        energy,
    ))
}

/// Centered same-length convolution with zero extension at the ends.
fn convolve_same(v: &[f64], w: &[f64]) -> Vec<f64> {
    let half = w.len() / 2;
    (0..v.len())
        .map(|j| {
            let mut acc = 0.0;
            for (m, &wv) in w.iter().enumerate() {
                let idx = j as isize + m as isize - half as isize;
                if idx >= 0 && (idx as usize) < v.len() {
                    acc += wv * v[idx as usize];
                }
            }
            acc
        })
        .collect()
}

/// Semblance summed over tau and normalized to peak at one.
#[derive(Debug, Clone, PartialEq)]
pub struct SlownessProfile {
    values: Vec<f64>,
    p: Axis,
}

impl SlownessProfile {
    pub fn p(&self) -> Axis {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// Sum semblance over tau per slowness and normalize by the maximum.
/// An identically zero grid yields an identically zero profile.
pub fn slowness_profile(s: &SemblanceGrid) -> SlownessProfile {
    let mut values: Vec<f64> = (0..s.p().len)
        .map(|k| s.column(k).iter().sum::<f64>())
        .collect();
    let max = values.iter().fold(0.0f64, |m, v| m.max(*v));
    if max > 0.0 {
        for v in values.iter_mut() {
            *v /= max;
        }
    }
    SlownessProfile { values, p: s.p() }
}

/// A closed slowness interval flagged for filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlownessBand {
    pub p_low: f64,
    pub p_high: f64,
}

impl SlownessBand {
    pub fn contains(&self, p: f64) -> bool {
        p >= self.p_low && p <= self.p_high
    }
}

/// Detect plane-wave arrivals: maximal contiguous runs of the profile at or
/// above `epsilon`, reported as closed slowness intervals.
pub fn detect_plane_waves(profile: &SlownessProfile, epsilon: f64) -> Result<Vec<SlownessBand>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("detection threshold must be in (0, 1)"));
    }
    let p = profile.p();
    let mut bands = Vec::new();
    let mut run_start: Option<usize> = None;
    for (k, &v) in profile.values().iter().enumerate() {
        if v >= epsilon {
            run_start.get_or_insert(k);
        } else if let Some(start) = run_start.take() {
            bands.push(SlownessBand {
                p_low: p.value(start),
                p_high: p.value(k - 1),
            });
        }
    }
    if let Some(start) = run_start {
        bands.push(SlownessBand {
            p_low: p.value(start),
            p_high: p.value(p.len - 1),
        });
    }
    Ok(bands)
}
