//! Scenario configuration: a human-readable TOML file with sections
//! mirroring the processing modules.
//!
//! All units in the file are SI: Hz, seconds, meters, s/m. Fields that can
//! be derived from the physics accept the string `"auto"`:
//!
//! - `sampling.dt_s`: defaults to `1 / (4 (f0 + B_ss))`.
//! - `sampling.t_start_s` / `sampling.n_t`: default to covering every
//!   arrival padded by five pulse time constants.
//! - `radon.tau_start_s` / `radon.n_tau` / `radon.d_tau_s`: default to the
//!   time axis.
//! - `semblance.window_len`: defaults to the pulse duration in samples.
//!
//! ```toml
//! [array]
//! element_count = 251
//! carrier_freq_hz = 24.0e9
//!
//! [pulse]
//! center_freq_hz = 16.0e9
//! single_side_bandwidth_hz = 8.0e9
//!
//! [[sources]]
//! kind = "far_field"
//! slowness_s_per_m = -2.8e-9
//! delay_s = 2.2e-9
//!
//! [[sources]]
//! kind = "near_field"
//! x_m = 0.3
//! z_m = 0.8
//! delay_s = -1.2e-9
//!
//! [semblance]
//! threshold = 0.2
//! ```

use crate::axis::{slowness_axis, Axis};
use crate::localization::LocalizeConfig;
use crate::semblance::{default_window_len, WindowShape};
use crate::wavefield::{
    default_time_axis, default_time_step, make_array, ArrayGeometry, PulseSpec, SourceSpec,
};
use crate::{Error, Result};
use serde::Deserialize;

/// A field that is either an explicit value or the keyword `"auto"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Value(T),
    Auto(AutoKeyword),
}

/// The literal string `"auto"`.
#[derive(Debug, Clone, Copy, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

impl<T> AutoOr<T> {
    pub fn explicit(self) -> Option<T> {
        match self {
            AutoOr::Value(v) => Some(v),
            AutoOr::Auto(_) => None,
        }
    }
}

impl<T> Default for AutoOr<T> {
    fn default() -> Self {
        AutoOr::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub element_count: usize,
    pub carrier_freq_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub center_freq_hz: f64,
    pub single_side_bandwidth_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSection {
    FarField {
        slowness_s_per_m: f64,
        delay_s: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    NearField {
        x_m: f64,
        z_m: f64,
        delay_s: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSection {
    pub dt_s: AutoOr<f64>,
    pub t_start_s: AutoOr<f64>,
    pub n_t: AutoOr<usize>,
    pub noise_std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadonSection {
    pub n_p: usize,
    pub tau_start_s: AutoOr<f64>,
    pub n_tau: AutoOr<usize>,
    pub d_tau_s: AutoOr<f64>,
}

impl Default for RadonSection {
    fn default() -> Self {
        RadonSection {
            n_p: 501,
            tau_start_s: AutoOr::default(),
            n_tau: AutoOr::default(),
            d_tau_s: AutoOr::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemblanceSection {
    pub window_shape: WindowShapeName,
    pub window_len: AutoOr<usize>,
    pub threshold: f64,
}

impl Default for SemblanceSection {
    fn default() -> Self {
        SemblanceSection {
            window_shape: WindowShapeName::Rectangular,
            window_len: AutoOr::default(),
            threshold: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShapeName {
    Rectangular,
    RaisedCosine,
    BlackmanHarris,
}

impl From<WindowShapeName> for WindowShape {
    fn from(name: WindowShapeName) -> WindowShape {
        match name {
            WindowShapeName::Rectangular => WindowShape::Rectangular,
            WindowShapeName::RaisedCosine => WindowShape::RaisedCosine,
            WindowShapeName::BlackmanHarris => WindowShape::BlackmanHarris,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub guard_cells: usize,
    pub taper_cells: usize,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            guard_cells: 1,
            taper_cells: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationSection {
    pub theta_ff: f64,
    pub k_max: usize,
    pub min_energy_frac: f64,
}

impl Default for LocalizationSection {
    fn default() -> Self {
        LocalizationSection {
            theta_ff: 0.95,
            k_max: 32,
            min_energy_frac: 0.01,
        }
    }
}

/// The parsed scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArraySection,
    pub pulse: PulseSection,
    #[serde(default)]
    pub sources: Vec<SourceSection>,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub radon: RadonSection,
    #[serde(default)]
    pub semblance: SemblanceSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub localization: LocalizationSection,
}

impl ScenarioConfig {
    /// Parse a TOML scenario. Parse errors carry the offending line.
    pub fn from_toml_str(text: &str) -> Result<ScenarioConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', "; ")))
    }

    /// Resolve every `"auto"` field against the physics and validate the
    /// result.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let geometry = make_array(self.array.element_count, self.array.carrier_freq_hz)
            .map_err(|e| Error::Config(format!("[array]: {e}")))?;
        let pulse = PulseSpec::gaussian(
            self.pulse.center_freq_hz,
            self.pulse.single_side_bandwidth_hz,
        )
        .map_err(|e| Error::Config(format!("[pulse]: {e}")))?;

        let mut sources = Vec::with_capacity(self.sources.len());
        for (i, s) in self.sources.iter().enumerate() {
            let built = match *s {
                SourceSection::FarField {
                    slowness_s_per_m,
                    delay_s,
                    amplitude,
                } => SourceSpec::far_field(
                    slowness_s_per_m,
                    delay_s,
                    pulse.with_amplitude(amplitude),
                ),
                SourceSection::NearField {
                    x_m,
                    z_m,
                    delay_s,
                    amplitude,
                } => SourceSpec::near_field(x_m, z_m, delay_s, pulse.with_amplitude(amplitude)),
            };
            sources.push(built.map_err(|e| Error::Config(format!("[[sources]] #{i}: {e}")))?);
        }

        let time_axis = self.resolve_time_axis(&geometry, &sources)?;
        let tau_axis = self.resolve_tau_axis(time_axis)?;
        if self.radon.n_p < 2 {
            return Err(Error::Config("[radon]: n_p must be at least 2".into()));
        }
        let p_axis = slowness_axis(self.radon.n_p);

        let window_len = match self.semblance.window_len.explicit() {
            Some(w) if w >= 1 => w,
            Some(_) => {
                return Err(Error::Config(
                    "[semblance]: window_len must be at least 1".into(),
                ))
            }
            None => default_window_len(&pulse, tau_axis.step),
        };
        if !(self.semblance.threshold > 0.0 && self.semblance.threshold < 1.0) {
            return Err(Error::Config(
                "[semblance]: threshold must be in (0, 1)".into(),
            ));
        }
        if !(self.localization.theta_ff > 0.0 && self.localization.theta_ff < 1.0) {
            return Err(Error::Config(
                "[localization]: theta_ff must be in (0, 1)".into(),
            ));
        }
        if !(self.sampling.noise_std >= 0.0) {
            return Err(Error::Config(
                "[sampling]: noise_std must be non-negative".into(),
            ));
        }

        let window_shape: WindowShape = self.semblance.window_shape.into();
        let localize = LocalizeConfig {
            theta_ff: self.localization.theta_ff,
            k_max: self.localization.k_max,
            n_p: self.radon.n_p,
            window_len,
            window_shape,
            min_energy_frac: self.localization.min_energy_frac,
        };
        Ok(ResolvedScenario {
            geometry,
            pulse,
            sources,
            time_axis,
            tau_axis,
            p_axis,
            noise_std: self.sampling.noise_std,
            seed: self.sampling.seed,
            window_len,
            window_shape,
            epsilon: self.semblance.threshold,
            guard_cells: self.filter.guard_cells,
            taper_cells: self.filter.taper_cells,
            localize,
        })
    }

    fn resolve_time_axis(&self, geometry: &ArrayGeometry, sources: &[SourceSpec]) -> Result<Axis> {
        let dt = match self.sampling.dt_s.explicit() {
            Some(dt) if dt > 0.0 => dt,
            Some(_) => return Err(Error::Config("[sampling]: dt_s must be positive".into())),
            None => default_time_step(sources).ok_or_else(|| {
                Error::Config("[sampling]: dt_s = \"auto\" needs at least one source".into())
            })?,
        };
        let auto = default_time_axis(geometry, sources);
        let t_start = match self.sampling.t_start_s.explicit() {
            Some(t) => t,
            None => {
                auto.ok_or_else(|| {
                    Error::Config(
                        "[sampling]: t_start_s = \"auto\" needs at least one source".into(),
                    )
                })?
                .start
            }
        };
        let n_t = match self.sampling.n_t.explicit() {
            Some(n) if n >= 1 => n,
            Some(_) => return Err(Error::Config("[sampling]: n_t must be at least 1".into())),
            None => {
                let a = auto.ok_or_else(|| {
                    Error::Config("[sampling]: n_t = \"auto\" needs at least one source".into())
                })?;
                // cover the auto window's end from the chosen start and step
                ((a.end() - t_start) / dt).ceil().max(0.0) as usize + 1
            }
        };
        Ok(Axis::new(t_start, dt, n_t))
    }

    fn resolve_tau_axis(&self, time_axis: Axis) -> Result<Axis> {
        let d_tau = match self.radon.d_tau_s.explicit() {
            Some(d) if d > 0.0 => d,
            Some(_) => return Err(Error::Config("[radon]: d_tau_s must be positive".into())),
            None => time_axis.step,
        };
        let tau_start = self.radon.tau_start_s.explicit().unwrap_or(time_axis.start);
        let n_tau = match self.radon.n_tau.explicit() {
            Some(n) if n >= 1 => n,
            Some(_) => return Err(Error::Config("[radon]: n_tau must be at least 1".into())),
            None => ((time_axis.end() - tau_start) / d_tau).ceil().max(0.0) as usize + 1,
        };
        Ok(Axis::new(tau_start, d_tau, n_tau))
    }
}

/// Every `"auto"` resolved and validated: the concrete inputs for a
/// pipeline run.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub geometry: ArrayGeometry,
    pub pulse: PulseSpec,
    pub sources: Vec<SourceSpec>,
    pub time_axis: Axis,
    pub tau_axis: Axis,
    pub p_axis: Axis,
    pub noise_std: f64,
    pub seed: u64,
    pub window_len: usize,
    pub window_shape: WindowShape,
    pub epsilon: f64,
    pub guard_cells: usize,
    pub taper_cells: usize,
    pub localize: LocalizeConfig,
}
