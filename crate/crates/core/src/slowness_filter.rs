//! Slowness bandstop filtering in the Radon domain.
//!
//! Exactly analogous to a frequency bandstop filter, but applied over
//! slowness: a zero/one mask (optionally widened by guard cells and softened
//! by a raised-cosine taper) multiplies every tau sample of the flagged
//! slowness columns, removing detected plane-wave arrivals while leaving the
//! rest of the Radon image untouched.

use crate::axis::Axis;
use crate::radon::RadonGrid;
use crate::semblance::SlownessBand;
use crate::{Error, Result};

/// A per-slowness gain vector in `[0, 1]`: zero across each stopped band's
/// core, one elsewhere, with monotone taper ramps in between. The mask is
/// independent of tau.
#[derive(Debug, Clone, PartialEq)]
pub struct SlownessMask {
    values: Vec<f64>,
    p: Axis,
    bands: Vec<SlownessBand>,
    taper_cells: usize,
}

impl SlownessMask {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p(&self) -> Axis {
        self.p
    }

    /// The stopped bands the mask was built from (merged, in slowness order).
    pub fn bands(&self) -> &[SlownessBand] {
        &self.bands
    }

    pub fn taper_cells(&self) -> usize {
        self.taper_cells
    }
}

/// Build a bandstop mask over `p_axis`.
///
/// Each band is mapped to the grid cells it covers, widened by
/// `guard_cells` on each side, and zeroed; overlapping bands merge. With
/// `taper_cells > 0` a raised-cosine ramp climbs from 0 to 1 over that many
/// cells beyond each zeroed edge; `taper_cells = 0` reproduces the hard
/// zero/one mask exactly.
pub fn build_mask(
    bands: &[SlownessBand],
    p_axis: Axis,
    guard_cells: usize,
    taper_cells: usize,
) -> SlownessMask {
    let mut values: Vec<f64> = vec![1.0; p_axis.len];

    // Index ranges of band cores after guard widening, merged where they
    // overlap or touch.
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    for band in bands {
        if band.p_high < p_axis.start || band.p_low > p_axis.end() {
            continue;
        }
        // cells whose center lies inside the closed interval; the epsilon
        // absorbs rounding when band edges coincide with grid values
        let eps = 1e-9 * p_axis.step;
        let lo_f = (band.p_low - p_axis.start) / p_axis.step;
        let hi_f = (band.p_high - p_axis.start) / p_axis.step;
        let lo = (lo_f - eps).ceil().max(0.0) as usize;
        let hi = ((hi_f + eps).floor() as usize).min(p_axis.len - 1);
        if lo > hi {
            continue;
        }
        let lo = lo.saturating_sub(guard_cells);
        let hi = (hi + guard_cells).min(p_axis.len - 1);
        ranges.push((lo, hi));
    }
    ranges.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in ranges {
        match merged.last_mut() {
            Some((_, last_hi)) if lo <= *last_hi + 1 => *last_hi = (*last_hi).max(hi),
            _ => merged.push((lo, hi)),
        }
    }

    for &(lo, hi) in &merged {
        for v in values.iter_mut().take(hi + 1).skip(lo) {
            *v = 0.0;
        }
        // raised-cosine ramp: cell at distance d from the core edge gets
        // 0.5 * (1 - cos(pi d / (taper + 1))), monotone from 0 to 1
        for d in 1..=taper_cells {
            let ramp =
                0.5 * (1.0 - (std::f64::consts::PI * d as f64 / (taper_cells + 1) as f64).cos());
            if lo >= d {
                let idx = lo - d;
                values[idx] = values[idx].min(ramp);
            }
            if hi + d < p_axis.len {
                let idx = hi + d;
                values[idx] = values[idx].min(ramp);
            }
        }
    }

    let bands = merged
        .iter()
        .map(|&(lo, hi)| SlownessBand {
            p_low: p_axis.value(lo),
            p_high: p_axis.value(hi),
        })
        .collect();
    SlownessMask {
        values,
        p: p_axis,
        bands,
        taper_cells,
    }
}

/// Multiply each slowness column of `radon` by its mask gain. Axes are
/// unchanged; the mask length must match the grid's slowness axis.
pub fn apply_mask(radon: &RadonGrid, mask: &SlownessMask) -> Result<RadonGrid> {
    let p = radon.p();
    if mask.values.len() != p.len {
        return Err(Error::invalid(format!(
            "mask length {} does not match slowness axis length {}",
            mask.values.len(),
            p.len
        )));
    }
    let mut out = radon.clone();
    for (k, &gain) in mask.values.iter().enumerate() {
        for j in 0..radon.tau().len {
            *out.value_mut(j, k) *= gain;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::slowness_axis;
    use crate::SPEED_OF_LIGHT;

    fn band(p_low: f64, p_high: f64) -> SlownessBand {
        SlownessBand { p_low, p_high }
    }

    fn zero_runs(values: &[f64]) -> usize {
        let mut runs = 0;
        let mut in_run = false;
        for &v in values {
            if v == 0.0 && !in_run {
                runs += 1;
                in_run = true;
            } else if v != 0.0 {
                in_run = false;
            }
        }
        runs
    }

    #[test]
    fn empty_band_list_is_identity() {
        let mask = build_mask(&[], slowness_axis(101), 1, 2);
        assert!(mask.values().iter().all(|&v| v == 1.0));
        assert!(mask.bands().is_empty());
    }

    #[test]
    fn full_cover_band_zeroes_everything() {
        let p = slowness_axis(101);
        let mask = build_mask(&[band(p.start, p.end())], p, 0, 0);
        assert!(mask.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn five_bands_make_five_zero_runs() {
        // Oracle: count maximal zero runs in the mask vector.
        let p = slowness_axis(501);
        let c = SPEED_OF_LIGHT;
        let bands: Vec<SlownessBand> = [-2.8e-9, -1.5e-9, 0.3e-9, 1.2e-9, 2.4e-9]
            .iter()
            .map(|&s| band(s - 2.0 * p.step, s + 2.0 * p.step))
            .collect();
        assert!(bands.iter().all(|b| b.p_high < 1.0 / c));
        let mask = build_mask(&bands, p, 1, 0);
        assert_eq!(zero_runs(mask.values()), 5);
        assert_eq!(mask.bands().len(), 5);
    }

    #[test]
    fn taper_ramps_are_monotone_and_hard_mask_is_binary() {
        let p = slowness_axis(101);
        let hard = build_mask(&[band(p.value(40), p.value(60))], p, 0, 0);
        assert!(hard.values().iter().all(|&v| v == 0.0 || v == 1.0));

        let soft = build_mask(&[band(p.value(40), p.value(60))], p, 0, 3);
        // inside the core
        assert!(soft.values()[40..=60].iter().all(|&v| v == 0.0));
        // ramp climbs monotonically away from both edges
        for d in 1..=3usize {
            assert!(soft.values()[60 + d] > soft.values()[60 + d - 1]);
            assert!(soft.values()[40 - d] > soft.values()[40 - d + 1]);
            assert!(soft.values()[60 + d] > 0.0 && soft.values()[60 + d] < 1.0);
        }
        assert_eq!(soft.values()[64], 1.0);
        assert_eq!(soft.values()[36], 1.0);
    }

    #[test]
    fn overlapping_bands_merge() {
        let p = slowness_axis(101);
        let mask = build_mask(
            &[
                band(p.value(10), p.value(30)),
                band(p.value(25), p.value(45)),
            ],
            p,
            0,
            0,
        );
        assert_eq!(mask.bands().len(), 1);
        assert_eq!(zero_runs(mask.values()), 1);
    }

    #[test]
    fn guard_cells_widen_the_stop_band() {
        let p = slowness_axis(101);
        let no_guard = build_mask(&[band(p.value(50), p.value(50))], p, 0, 0);
        let guarded = build_mask(&[band(p.value(50), p.value(50))], p, 2, 0);
        let count = |m: &SlownessMask| m.values().iter().filter(|&&v| v == 0.0).count();
        assert_eq!(count(&no_guard), 1);
        assert_eq!(count(&guarded), 5);
    }

    mod apply {
        use super::*;
        use crate::radon::RadonGrid;
        use crate::Axis;

        fn test_grid() -> RadonGrid {
            let tau = Axis::new(0.0, 1e-11, 40);
            let p = slowness_axis(21);
            let mut grid = RadonGrid::zeros(tau, p);
            for k in 0..21 {
                for j in 0..40 {
                    *grid.value_mut(j, k) = ((j * 21 + k) as f64 * 0.618).sin();
                }
            }
            grid
        }

        #[test]
        fn all_ones_mask_is_bit_identical() {
            let grid = test_grid();
            let mask = build_mask(&[], grid.p(), 1, 2);
            let out = apply_mask(&grid, &mask).unwrap();
            assert_eq!(out, grid);
        }

        #[test]
        fn full_mask_zeroes_grid_and_is_idempotent() {
            let grid = test_grid();
            let p = grid.p();
            let mask = build_mask(&[band(p.start, p.end())], p, 0, 0);
            let out = apply_mask(&grid, &mask).unwrap();
            assert!(out.raw().iter().all(|&v| v == 0.0));

            let part = build_mask(&[band(p.value(5), p.value(9))], p, 1, 0);
            let once = apply_mask(&grid, &part).unwrap();
            let twice = apply_mask(&once, &part).unwrap();
            assert_eq!(once, twice, "hard masks are idempotent");
        }

        #[test]
        fn masking_never_increases_energy() {
            let grid = test_grid();
            let p = grid.p();
            let mask = build_mask(&[band(p.value(3), p.value(7))], p, 1, 3);
            let out = apply_mask(&grid, &mask).unwrap();
            let energy = |g: &RadonGrid| g.raw().iter().map(|v| v * v).sum::<f64>();
            assert!(energy(&out) <= energy(&grid));
        }

        #[test]
        fn length_mismatch_is_rejected() {
            let grid = test_grid();
            let other = build_mask(&[], slowness_axis(11), 0, 0);
            assert!(apply_mask(&grid, &other).is_err());
        }
    }
}
