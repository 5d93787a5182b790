//! Ultra-wideband linear-array processing built around the slant-stack
//! (linear Radon / tau-p) transform.
//!
//! The crate synthesizes space/time data measured by a uniform linear array
//! receiving wideband pulses from far-field (plane-wave) and near-field
//! (spherical-wave) emitters, and provides the processing chain that
//! separates and localizes them:
//!
//! 1. [`wavefield`]: synthetic array data from modulated Gaussian pulses.
//! 2. [`radon`]: forward slant stack, ramp-filtered backprojection inverse,
//!    near-field ellipse locus, and hyperbolic stacking.
//! 3. [`beamforming`]: true-time-delay and phase-shift beamformers plus the
//!    beam-squint criterion that decides between them.
//! 4. [`semblance`]: windowed coherence over the (tau, slowness) plane and
//!    the normalized slowness profile used for plane-wave detection.
//! 5. [`slowness_filter`]: bandstop masks over slowness applied in the
//!    Radon domain.
//! 6. [`localization`]: sub-array partitioning, per-sub-array
//!    angle-of-arrival estimation, and least-squares triangulation.
//! 7. [`pipeline`]: configuration-driven orchestration with reproducible
//!    grid-file output (see also [`config`] and [`gridfile`]).
//!
//! Far-field arrivals trace straight lines in space/time and collapse to
//! single peaks in the Radon domain; near-field arrivals trace hyperbolas
//! and map to elliptical ridges. Detecting the line slownesses with
//! semblance, masking them out, and inverting the Radon transform leaves
//! only the near-field signal, which can then be localized by sub-array
//! triangulation and extracted by stacking along its hyperbola.

// validation guards use `!(x > 0.0)` so NaN inputs fail them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axis;
pub mod beamforming;
pub mod config;
pub mod gridfile;
pub mod localization;
pub mod pipeline;
pub mod radon;
pub mod semblance;
pub mod slowness_filter;
pub mod wavefield;

mod error;

pub use axis::Axis;
pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Map `0..n` through `f`, in parallel when the `parallel` feature is on.
///
/// Used by the transforms to fan out over slowness columns or output traces;
/// each index is computed independently so results are identical (bit for
/// bit) with or without the feature.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
