//! Uniformly sampled 1-D axes shared by all grid types.

use crate::SPEED_OF_LIGHT;

/// A uniform axis: `value(i) = start + i * step` for `i in 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    /// A uniform axis with strictly positive step.
    pub fn new(start: f64, step: f64, len: usize) -> Axis {
        assert!(step > 0.0, "axis step must be positive");
        assert!(len >= 1, "axis must have at least one sample");
        Axis { start, step, len }
    }

    /// The value at sample `i`.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// The last sample's value.
    pub fn end(&self) -> f64 {
        self.value(self.len - 1)
    }

    /// Iterator over all sample values.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.value(i))
    }

    /// Fractional index of `v` on this axis.
    #[inline]
    pub fn fractional_index(&self, v: f64) -> f64 {
        (v - self.start) / self.step
    }

    /// Index of the sample nearest to `v`, clamped to the axis.
    pub fn nearest_index(&self, v: f64) -> usize {
        let u = self.fractional_index(v).round();
        if u <= 0.0 {
            0
        } else {
            (u as usize).min(self.len - 1)
        }
    }

    /// True if `v` lies within `[start, end]`.
    pub fn contains(&self, v: f64) -> bool {
        v >= self.start && v <= self.end()
    }
}

/// Default slowness axis: `n_p` points spanning `[-1/c, +1/c]`.
///
/// `1/c` is the largest physical slowness of a propagating wave, so the
/// default axis covers every possible plane-wave arrival.
pub fn slowness_axis(n_p: usize) -> Axis {
    assert!(n_p >= 2, "slowness axis needs at least two points");
    let max = 1.0 / SPEED_OF_LIGHT;
    Axis::new(-max, 2.0 * max / (n_p - 1) as f64, n_p)
}

/// Linear interpolation into a uniformly sampled series.
///
/// `t` is located on the axis `(start, step)`; returns `None` outside the
/// sampled range. This is the one interpolant shared by the slant stack,
/// the TTD sum, semblance, and backprojection, so identities between those
/// operations hold exactly.
#[inline]
pub(crate) fn interp_uniform(samples: &[f64], start: f64, inv_step: f64, t: f64) -> Option<f64> {
    let u = (t - start) * inv_step;
    if u < 0.0 {
        return None;
    }
    let i = u as usize; // floor, since u >= 0
    if i + 1 < samples.len() {
        let frac = u - i as f64;
        Some(samples[i] + frac * (samples[i + 1] - samples[i]))
    } else if i + 1 == samples.len() && u == i as f64 {
        // exactly the last sample
        Some(samples[i])
    } else {
        None
    }
}
