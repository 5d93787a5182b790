//! Sub-array near-field localization.
//!
//! A source inside the full array's near field can be in the far field of
//! every sub-array once the array is partitioned finely enough, since the
//! Fraunhofer boundary shrinks with the square of the sub-aperture. The
//! adaptive loop doubles the sub-array count until every sub-array's peak
//! semblance looks plane-wave-like, estimates an angle of arrival per
//! sub-array from its semblance peak, intersects the resulting rays by
//! least squares to locate the source, and finally stacks the original data
//! along the located hyperbola to extract the transmitted envelope.

use crate::axis::{slowness_axis, Axis};
use crate::radon::hyperbolic_stack;
use crate::semblance::{semblance_with_energy, SemblanceGrid, WindowShape};
use crate::wavefield::{ArrayGeometry, SpaceTimeGrid};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// A contiguous run of elements within a parent array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubArray {
    /// First element index in the parent geometry.
    pub start: usize,
    /// Number of elements.
    pub count: usize,
    /// Center x-coordinate in the parent frame (m).
    pub center_x: f64,
    /// Physical length `(count - 1) * dx` (m).
    pub length: f64,
}

impl SubArray {
    /// Slice this sub-array's traces out of `data`, re-centering the element
    /// coordinates on the sub-array's own midpoint so the result is again a
    /// valid centered geometry.
    pub fn extract(&self, data: &SpaceTimeGrid) -> SpaceTimeGrid {
        let parent = data.geometry();
        let xs: Vec<f64> = parent.element_x()[self.start..self.start + self.count]
            .iter()
            .map(|&x| x - self.center_x)
            .collect();
        let geometry = ArrayGeometry::from_parts(xs, parent.spacing(), parent.carrier_wavelength());
        let time = data.time();
        let mut out = SpaceTimeGrid::zeros(geometry, time);
        for n in 0..self.count {
            for i in 0..time.len {
                *out.sample_mut(i, n) = data.sample(i, self.start + n);
            }
        }
        out
    }

    /// Fraunhofer distance of this sub-aperture for the parent's carrier.
    pub fn fraunhofer_distance(&self, parent: &ArrayGeometry) -> f64 {
        2.0 * self.length * self.length / parent.carrier_wavelength()
    }
}

/// Split `geometry` into `k` contiguous, non-overlapping sub-arrays covering
/// every element, with sizes differing by at most one (larger ones first).
pub fn partition(geometry: &ArrayGeometry, k: usize) -> Result<Vec<SubArray>> {
    let m = geometry.element_count();
    if k < 2 || k > m {
        return Err(Error::invalid(format!(
            "sub-array count {k} must be in 2..={m}"
        )));
    }
    let base = m / k;
    let extra = m % k;
    let mut subs = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let count = base + usize::from(i < extra);
        let xs = geometry.element_x();
        let center_x = (xs[start] + xs[start + count - 1]) / 2.0;
        subs.push(SubArray {
            start,
            count,
            center_x,
            length: (count - 1) as f64 * geometry.spacing(),
        });
        start += count;
    }
    debug_assert_eq!(start, m);
    Ok(subs)
}

/// A per-sub-array arrival estimate from the semblance Radon transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoAEstimate {
    /// Sub-array center in the parent frame (m).
    pub center_x: f64,
    /// Estimated slowness at the sub-array (s/m), parabola-refined.
    pub slowness: f64,
    /// Estimated delay at the semblance peak (s).
    pub delay: f64,
    /// Peak semblance value in [0, 1].
    pub peak_semblance: f64,
}

/// Estimate the dominant arrival of `sub_data` as the argmax of its
/// semblance grid, with the slowness refined by a three-point parabola fit
/// across the peak.
///
/// Two restrictions keep the argmax on real arrivals:
///
/// - cells whose interpolation span (trial line plus smoothing window)
///   leaves the recorded window are excluded: partial-fold cells at the
///   record edges can score spuriously high semblance from a single trace;
/// - cells whose windowed stack energy is below `min_energy_frac` of the
///   grid's maximum are excluded: semblance is amplitude-invariant, so
///   low-level coherent artifacts (e.g. backprojection smears on
///   reconstructed data) would otherwise outrank the arrival.
///
/// `min_energy_frac = 0` disables the energy gate. If no cell satisfies
/// the restrictions they are dropped in turn.
pub fn estimate_aoa(
    sub_data: &SpaceTimeGrid,
    p_axis: Axis,
    tau_axis: Axis,
    window_len: usize,
    window_shape: WindowShape,
    min_energy_frac: f64,
) -> Result<AoAEstimate> {
    let (grid, energy) =
        semblance_with_energy(sub_data, p_axis, tau_axis, window_len, window_shape)?;
    let (j, k) = argmax_full_fold(sub_data, &grid, &energy, min_energy_frac);
    let peak = grid.value(j, k);
    if peak <= 0.0 {
        return Err(Error::NoArrival);
    }

    // three-point parabolic interpolation along slowness
    let refined = if k > 0 && k + 1 < p_axis.len {
        let ym = grid.value(j, k - 1);
        let y0 = grid.value(j, k);
        let yp = grid.value(j, k + 1);
        let denom = ym - 2.0 * y0 + yp;
        let delta = if denom.abs() > 1e-300 {
            (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        p_axis.value(k) + delta * p_axis.step
    } else {
        p_axis.value(k)
    };

    let xs = sub_data.geometry().element_x();
    let center_x = (xs[0] + xs[xs.len() - 1]) / 2.0;
    Ok(AoAEstimate {
        center_x,
        slowness: refined,
        delay: tau_axis.value(j),
        peak_semblance: peak,
    })
}

/// Argmax over cells with full interpolation fold and (optionally) enough
/// stack energy; the restrictions are dropped in turn when nothing
/// qualifies.
fn argmax_full_fold(
    data: &SpaceTimeGrid,
    grid: &SemblanceGrid,
    energy: &[f64],
    min_energy_frac: f64,
) -> (usize, usize) {
    let half_span = data
        .geometry()
        .element_x()
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let time = data.time();
    let tau = grid.tau();
    let window_margin = (grid.window_len() / 2 + 1) as f64 * tau.step;
    let energy_floor = min_energy_frac * energy.iter().fold(0.0f64, |m, v| m.max(*v));

    let search = |gate: bool| -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for k in 0..grid.p().len {
            let reach = grid.p().value(k).abs() * half_span + window_margin;
            let col = grid.column(k);
            for (j, &v) in col.iter().enumerate() {
                let t = tau.value(j);
                if t - reach < time.start || t + reach > time.end() {
                    continue;
                }
                if gate && energy[k * tau.len + j] < energy_floor {
                    continue;
                }
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((j, k, v));
                }
            }
        }
        best
    };

    search(min_energy_frac > 0.0)
        .or_else(|| search(false))
        .map(|(j, k, _)| (j, k))
        .unwrap_or_else(|| grid.argmax())
}

/// Result of the adaptive sub-array sizing loop.
#[derive(Debug, Clone)]
pub struct AdaptivePartition {
    /// The sub-array count the loop settled on.
    pub k: usize,
    pub sub_arrays: Vec<SubArray>,
    pub estimates: Vec<AoAEstimate>,
}

/// Options for the adaptive localization chain.
#[derive(Debug, Clone, Copy)]
pub struct LocalizeConfig {
    /// Per-sub-array peak semblance required to call the source far-field
    /// (plane-wave-like) for that sub-array.
    pub theta_ff: f64,
    /// Largest sub-array count the doubling schedule may reach.
    pub k_max: usize,
    /// Slowness grid resolution used for the sub-array semblance.
    pub n_p: usize,
    /// Semblance smoothing window length in samples.
    pub window_len: usize,
    pub window_shape: WindowShape,
    /// Energy gate for the AoA argmax (fraction of the per-sub-array
    /// maximum windowed stack energy); see [`estimate_aoa`].
    pub min_energy_frac: f64,
}

impl LocalizeConfig {
    pub fn new(window_len: usize) -> LocalizeConfig {
        LocalizeConfig {
            theta_ff: 0.95,
            k_max: 32,
            n_p: 501,
            window_len,
            window_shape: WindowShape::Rectangular,
            min_energy_frac: 0.01,
        }
    }
}

/// Double the sub-array count (k = 2, 4, 8, ...) until every sub-array's
/// peak semblance reaches `theta_ff`, then return that partition and its
/// per-sub-array arrival estimates.
///
/// The semblance criterion stands in for the geometric Fraunhofer test
/// because the source range is unknown at this stage; each sub-array's
/// `2 L_sub^2 / lambda` remains available as a diagnostic via
/// [`SubArray::fraunhofer_distance`].
pub fn adaptive_partition(data: &SpaceTimeGrid, cfg: &LocalizeConfig) -> Result<AdaptivePartition> {
    if !(cfg.theta_ff > 0.0 && cfg.theta_ff < 1.0) {
        return Err(Error::invalid("theta_ff must be in (0, 1)"));
    }
    let m = data.geometry().element_count();
    let p_axis = slowness_axis(cfg.n_p);
    let tau_axis = data.time();

    let mut best: Option<(usize, f64)> = None; // (k, worst sub-array peak)
    let mut k = 2;
    while k <= cfg.k_max && k <= m {
        let subs = partition(data.geometry(), k)?;
        let mut estimates = Vec::with_capacity(k);
        let mut worst = f64::INFINITY;
        for sub in &subs {
            let sub_grid = sub.extract(data);
            match estimate_aoa(
                &sub_grid,
                p_axis,
                tau_axis,
                cfg.window_len,
                cfg.window_shape,
                cfg.min_energy_frac,
            ) {
                Ok(mut est) => {
                    est.center_x += sub.center_x;
                    worst = worst.min(est.peak_semblance);
                    estimates.push(est);
                }
                Err(Error::NoArrival) => return Err(Error::NoArrival),
                Err(e) => return Err(e),
            }
        }
        if worst >= cfg.theta_ff {
            return Ok(AdaptivePartition {
                k,
                sub_arrays: subs,
                estimates,
            });
        }
        if best.is_none_or(|(_, w)| worst > w) {
            best = Some((k, worst));
        }
        k *= 2;
    }
    Err(Error::SourceTooClose {
        best_k: best.map_or(2, |(k, _)| k),
    })
}

/// Fused position from intersecting the sub-array rays.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionEstimate {
    /// Estimated source x (m).
    pub x: f64,
    /// Estimated source z (m), always positive.
    pub z: f64,
    /// RMS perpendicular distance of the estimate to the rays (m).
    pub residual: f64,
    /// The per-sub-array estimates the fusion used.
    pub estimates: Vec<AoAEstimate>,
}

/// Condition-number bound above which the triangulation normal equations
/// are treated as unsolvable (rays effectively parallel).
pub const TRIANGULATION_CONDITION_LIMIT: f64 = 1e8;

/// Intersect the sub-array rays by least squares.
///
/// Each estimate defines a ray from `(center_x, 0)` into `z > 0`. The
/// measured slowness is the local moveout slope `dT/dx`, which for a source
/// at bearing `theta` from broadside equals `-sin(theta) / c`; the ray
/// direction is therefore `(-c * slowness, sqrt(1 - (c * slowness)^2))`.
/// The returned point minimizes the summed squared perpendicular distance
/// to all rays (closed-form 2x2 solve).
pub fn triangulate(estimates: &[AoAEstimate]) -> Result<PositionEstimate> {
    if estimates.len() < 2 {
        return Err(Error::invalid("triangulation needs at least two rays"));
    }
    let first = estimates[0].center_x;
    if estimates.iter().all(|e| e.center_x == first) {
        return Err(Error::invalid(
            "triangulation needs rays from distinct sub-array centers",
        ));
    }

    // A = sum (I - d d^T), b = sum (I - d d^T) o
    let (mut a00, mut a01, mut a11) = (0.0, 0.0, 0.0);
    let (mut b0, mut b1) = (0.0, 0.0);
    let mut rays = Vec::with_capacity(estimates.len());
    for est in estimates {
        let cp = (SPEED_OF_LIGHT * est.slowness).clamp(-1.0, 1.0);
        let dir = (-cp, (1.0 - cp * cp).sqrt());
        let origin = (est.center_x, 0.0);
        let (p00, p01, p11) = (1.0 - dir.0 * dir.0, -dir.0 * dir.1, 1.0 - dir.1 * dir.1);
        a00 += p00;
        a01 += p01;
        a11 += p11;
        b0 += p00 * origin.0 + p01 * origin.1;
        b1 += p01 * origin.0 + p11 * origin.1;
        rays.push((origin, dir));
    }

    // eigenvalues of the symmetric 2x2 normal matrix
    let trace = a00 + a11;
    let det = a00 * a11 - a01 * a01;
    let gap = ((trace * trace - 4.0 * det).max(0.0)).sqrt();
    let lam_max = 0.5 * (trace + gap);
    let lam_min = 0.5 * (trace - gap);
    let cond = if lam_min > 0.0 {
        lam_max / lam_min
    } else {
        f64::INFINITY
    };
    if !cond.is_finite() || cond > TRIANGULATION_CONDITION_LIMIT {
        return Err(Error::IllConditioned { cond });
    }

    let inv_det = 1.0 / det;
    let x = inv_det * (a11 * b0 - a01 * b1);
    let z = inv_det * (a00 * b1 - a01 * b0);
    if z <= 0.0 {
        return Err(Error::BehindArray { z });
    }

    let mut sq_sum = 0.0;
    for (origin, dir) in &rays {
        let rx = x - origin.0;
        let rz = z - origin.1;
        let along = rx * dir.0 + rz * dir.1;
        let px = rx - along * dir.0;
        let pz = rz - along * dir.1;
        sq_sum += px * px + pz * pz;
    }
    Ok(PositionEstimate {
        x,
        z,
        residual: (sq_sum / rays.len() as f64).sqrt(),
        estimates: estimates.to_vec(),
    })
}

/// Envelope series extracted along the located hyperbola, on its own time
/// axis (the emission-time frame, shifted back from the record by the
/// per-element propagation delays).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedEnvelope {
    pub time: Axis,
    pub values: Vec<f64>,
}

impl ExtractedEnvelope {
    /// Index of the largest absolute value.
    pub fn peak_index(&self) -> usize {
        (0..self.values.len())
            .max_by(|&a, &b| self.values[a].abs().total_cmp(&self.values[b].abs()))
            .unwrap_or(0)
    }
}

/// Full localization chain: adaptive partition and AoA estimation on
/// `data` (typically the slowness-filtered, inverse-Radon output),
/// triangulation, then hyperbolic-stack envelope extraction at the fused
/// position on `original` (the unfiltered measurement).
///
/// The extraction axis is the record axis shifted back by the propagation
/// delays to the estimated position, so a matched source peaks at its
/// emission delay `t0`.
///
/// Errors from the stages propagate with a stage label.
pub fn localize_and_extract(
    data: &SpaceTimeGrid,
    original: &SpaceTimeGrid,
    cfg: &LocalizeConfig,
) -> Result<(PositionEstimate, ExtractedEnvelope)> {
    let adaptive = adaptive_partition(data, cfg).map_err(|e| e.in_stage("adaptive_partition"))?;
    let position = triangulate(&adaptive.estimates).map_err(|e| e.in_stage("triangulate"))?;

    let record = original.time();
    let (mut r_min, mut r_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in original.geometry().element_x() {
        let r = (x - position.x).hypot(position.z);
        r_min = r_min.min(r);
        r_max = r_max.max(r);
    }
    let start = record.start - r_max / SPEED_OF_LIGHT;
    let end = record.end() - r_min / SPEED_OF_LIGHT;
    let len = ((end - start) / record.step).floor() as usize + 1;
    let t_axis = Axis::new(start, record.step, len.max(1));

    let values = hyperbolic_stack(original, position.x, position.z, t_axis)
        .map_err(|e| e.in_stage("hyperbolic_stack"))?;
    Ok((
        position,
        ExtractedEnvelope {
            time: t_axis,
            values,
        },
    ))
}
