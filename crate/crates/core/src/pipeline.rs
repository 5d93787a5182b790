//! Configuration-driven pipeline orchestration with reproducible file
//! output.
//!
//! The full chain is: synthesize -> forward Radon -> semblance -> slowness
//! profile -> detection -> bandstop mask -> masked Radon -> inverse Radon
//! -> sub-array localization -> hyperbolic envelope extraction. Each stage
//! writes its product as a self-describing [`GridFile`] (or a small
//! key=value text file), and a manifest lists every file written together
//! with the detections, the position estimate, and stage timings.
//!
//! Every stage is a pure function of its inputs, so re-running any stage
//! from the same files and configuration reproduces its output byte for
//! byte; only the `timing_*` manifest lines vary between runs.

use crate::config::{ResolvedScenario, ScenarioConfig};
use crate::gridfile::{scenario_hash, GridFile};
use crate::localization::{localize_and_extract, ExtractedEnvelope, PositionEstimate};
use crate::radon::{forward_radon, inverse_radon, RadonGrid};
use crate::semblance::{
    detect_plane_waves, semblance, slowness_profile, SemblanceGrid, SlownessBand,
};
use crate::slowness_filter::{apply_mask, build_mask, SlownessMask};
use crate::wavefield::{synthesize, SpaceTimeGrid};
#[cfg(test)]
use crate::Error;
use crate::Result;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SPACETIME_FILE: &str = "spacetime.grid";
pub const RADON_FILE: &str = "radon.grid";
pub const SEMBLANCE_FILE: &str = "semblance.grid";
pub const DETECTIONS_FILE: &str = "detections.txt";
pub const RADON_FILTERED_FILE: &str = "radon_filtered.grid";
pub const SPACETIME_FILTERED_FILE: &str = "spacetime_filtered.grid";
pub const LOCALIZATION_FILE: &str = "localization.txt";
pub const ENVELOPE_FILE: &str = "envelope.grid";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Synthesize the scenario's array data.
pub fn stage_synth(r: &ResolvedScenario) -> Result<SpaceTimeGrid> {
    synthesize(&r.geometry, &r.sources, r.time_axis, r.noise_std, r.seed)
}

/// Forward slant stack on the scenario's delay/slowness axes.
pub fn stage_radon(r: &ResolvedScenario, data: &SpaceTimeGrid) -> RadonGrid {
    forward_radon(data, r.p_axis, r.tau_axis)
}

/// Windowed semblance on the scenario's axes.
pub fn stage_semblance(r: &ResolvedScenario, data: &SpaceTimeGrid) -> Result<SemblanceGrid> {
    semblance(data, r.p_axis, r.tau_axis, r.window_len, r.window_shape)
}

/// Detection plus masking: slowness profile, thresholding, bandstop mask,
/// and the masked Radon grid.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub bands: Vec<SlownessBand>,
    pub mask: SlownessMask,
    pub filtered: RadonGrid,
}

pub fn stage_filter(
    r: &ResolvedScenario,
    radon: &RadonGrid,
    semblance_grid: &SemblanceGrid,
) -> Result<FilterOutcome> {
    let profile = slowness_profile(semblance_grid);
    let bands = detect_plane_waves(&profile, r.epsilon)?;
    let mask = build_mask(&bands, r.p_axis, r.guard_cells, r.taper_cells);
    let filtered = apply_mask(radon, &mask)?;
    Ok(FilterOutcome {
        bands,
        mask,
        filtered,
    })
}

/// Filtered backprojection back to the space/time domain on the scenario's
/// time axis.
pub fn stage_invert(r: &ResolvedScenario, filtered: &RadonGrid) -> SpaceTimeGrid {
    inverse_radon(filtered, &r.geometry, r.time_axis)
}

/// Localize the near-field source on the filtered data and extract its
/// envelope from the original data.
pub fn stage_localize(
    r: &ResolvedScenario,
    filtered: &SpaceTimeGrid,
    original: &SpaceTimeGrid,
) -> Result<(PositionEstimate, ExtractedEnvelope)> {
    localize_and_extract(filtered, original, &r.localize)
}

/// Everything a pipeline run reports beyond its files.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    /// Files written to the output directory, in write order.
    pub files: Vec<String>,
    pub bands: Vec<SlownessBand>,
    pub position: Option<PositionEstimate>,
    pub sub_array_count: Option<usize>,
    pub envelope_peak_time: Option<f64>,
    /// Stage name and wall-clock milliseconds.
    pub timings: Vec<(&'static str, f64)>,
}

/// Run the whole pipeline for a scenario file's text, writing all stage
/// products into `out_dir`.
///
/// `seed_override` replaces the configured noise seed when given (the
/// scenario hash still reflects only the file text). On a stage failure the
/// manifest is still written with an `error_stage` entry before the error
/// propagates.
pub fn run_pipeline(
    config_text: &str,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<PipelineReport> {
    let config = ScenarioConfig::from_toml_str(config_text)?;
    let mut resolved = config.resolve()?;
    if let Some(seed) = seed_override {
        resolved.seed = seed;
    }
    let hash = scenario_hash(config_text);
    fs::create_dir_all(out_dir)?;

    let mut report = PipelineReport {
        files: Vec::new(),
        bands: Vec::new(),
        position: None,
        sub_array_count: None,
        envelope_peak_time: None,
        timings: Vec::new(),
    };

    let result = run_stages(&resolved, &hash, out_dir, &mut report);
    let error_note = result.as_ref().err().map(|e| e.to_string());
    write_manifest(out_dir, &hash, resolved.seed, &mut report, error_note)?;
    result?;
    Ok(report)
}

fn run_stages(
    r: &ResolvedScenario,
    hash: &str,
    out_dir: &Path,
    report: &mut PipelineReport,
) -> Result<()> {
    let mut clock = StageClock::new();
    let result = run_stages_inner(r, hash, out_dir, report, &mut clock);
    report.timings = clock.laps;
    result
}

fn run_stages_inner(
    r: &ResolvedScenario,
    hash: &str,
    out_dir: &Path,
    report: &mut PipelineReport,
    clock: &mut StageClock,
) -> Result<()> {
    let data = stage_synth(r).map_err(|e| e.in_stage("synth"))?;
    write_grid(
        out_dir,
        SPACETIME_FILE,
        &GridFile::from_spacetime(&data, hash),
        report,
    )?;
    clock.lap("synth");

    let radon = stage_radon(r, &data);
    write_grid(
        out_dir,
        RADON_FILE,
        &GridFile::from_radon(&radon, hash),
        report,
    )?;
    clock.lap("radon");

    let semb = stage_semblance(r, &data).map_err(|e| e.in_stage("semblance"))?;
    write_grid(
        out_dir,
        SEMBLANCE_FILE,
        &GridFile::from_semblance(&semb, hash),
        report,
    )?;
    clock.lap("semblance");

    let filter = stage_filter(r, &radon, &semb).map_err(|e| e.in_stage("filter"))?;
    report.bands = filter.bands.clone();
    write_text(out_dir, DETECTIONS_FILE, &detections_text(&filter), report)?;
    write_grid(
        out_dir,
        RADON_FILTERED_FILE,
        &GridFile::from_radon(&filter.filtered, hash),
        report,
    )?;
    clock.lap("filter");

    let filtered_st = stage_invert(r, &filter.filtered);
    write_grid(
        out_dir,
        SPACETIME_FILTERED_FILE,
        &GridFile::from_spacetime(&filtered_st, hash),
        report,
    )?;
    clock.lap("invert");

    let (position, envelope) =
        stage_localize(r, &filtered_st, &data).map_err(|e| e.in_stage("localize"))?;
    let peak_idx = envelope.peak_index();
    report.envelope_peak_time = Some(envelope.time.value(peak_idx));
    report.sub_array_count = Some(position.estimates.len());
    write_text(
        out_dir,
        LOCALIZATION_FILE,
        &localization_text(&position, &envelope),
        report,
    )?;
    write_grid(
        out_dir,
        ENVELOPE_FILE,
        &GridFile::from_envelope(&envelope, hash),
        report,
    )?;
    report.position = Some(position);
    clock.lap("localize");

    Ok(())
}

struct StageClock {
    laps: Vec<(&'static str, f64)>,
    last: Instant,
}

impl StageClock {
    fn new() -> StageClock {
        StageClock {
            laps: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.laps
            .push((name, now.duration_since(self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}

fn write_grid(dir: &Path, name: &str, grid: &GridFile, report: &mut PipelineReport) -> Result<()> {
    grid.write(&dir.join(name))?;
    report.files.push(name.to_string());
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str, report: &mut PipelineReport) -> Result<()> {
    fs::write(dir.join(name), text)?;
    report.files.push(name.to_string());
    Ok(())
}

fn detections_text(filter: &FilterOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "count={}", filter.bands.len());
    for band in &filter.bands {
        let _ = writeln!(out, "band={},{}", band.p_low, band.p_high);
    }
    let zero_cells = filter.mask.values().iter().filter(|&&v| v == 0.0).count();
    let _ = writeln!(out, "mask_zero_cells={zero_cells}");
    let _ = writeln!(out, "taper_cells={}", filter.mask.taper_cells());
    out
}

fn localization_text(position: &PositionEstimate, envelope: &ExtractedEnvelope) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sub_array_count={}", position.estimates.len());
    let _ = writeln!(out, "position_x_m={}", position.x);
    let _ = writeln!(out, "position_z_m={}", position.z);
    let _ = writeln!(out, "residual_m={}", position.residual);
    let peak = envelope.peak_index();
    let _ = writeln!(out, "envelope_peak_t_s={}", envelope.time.value(peak));
    let _ = writeln!(out, "envelope_peak_value={}", envelope.values[peak]);
    for est in &position.estimates {
        let _ = writeln!(
            out,
            "aoa={},{},{},{}",
            est.center_x, est.slowness, est.delay, est.peak_semblance
        );
    }
    out
}

fn write_manifest(
    out_dir: &Path,
    hash: &str,
    seed: u64,
    report: &mut PipelineReport,
    error_note: Option<String>,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "producer={}", crate::gridfile::producer_string());
    let _ = writeln!(out, "scenario_hash={hash}");
    let _ = writeln!(out, "seed={seed}");
    for file in &report.files {
        let _ = writeln!(out, "file={file}");
    }
    let _ = writeln!(out, "file={MANIFEST_FILE}");
    let _ = writeln!(out, "detected_bands={}", report.bands.len());
    for band in &report.bands {
        let _ = writeln!(out, "band={},{}", band.p_low, band.p_high);
    }
    if let Some(pos) = &report.position {
        let _ = writeln!(out, "position_x_m={}", pos.x);
        let _ = writeln!(out, "position_z_m={}", pos.z);
        let _ = writeln!(out, "position_residual_m={}", pos.residual);
    }
    if let Some(k) = report.sub_array_count {
        let _ = writeln!(out, "sub_array_count={k}");
    }
    if let Some(t) = report.envelope_peak_time {
        let _ = writeln!(out, "envelope_peak_t_s={t}");
    }
    match &error_note {
        None => {
            let _ = writeln!(out, "status=ok");
        }
        Some(msg) => {
            let _ = writeln!(out, "status=error");
            let _ = writeln!(out, "error={msg}");
        }
    }
    // wall-clock timings are the one non-reproducible part of the output
    for (name, ms) in &report.timings {
        let _ = writeln!(out, "timing_{name}_ms={ms:.3}");
    }
    fs::write(out_dir.join(MANIFEST_FILE), out)?;
    report.files.push(MANIFEST_FILE.to_string());
    Ok(())
}

/// Read a scenario file, returning the parsed config together with the raw
/// text (the text is what gets hashed into output headers).
pub fn load_scenario(path: &Path) -> Result<(ScenarioConfig, String)> {
    let text = fs::read_to_string(path)?;
    let config = ScenarioConfig::from_toml_str(&text)?;
    Ok((config, text))
}

/// Resolve the standard output path of a stage file under `out_dir`.
pub fn stage_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn temp_dir(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("slantstack-pipeline-{}-{name}", std::process::id()));
        fs::create_dir_all(&p).unwrap();
        p
    }

    // Two far-field interferers whose slownesses lie outside the near-field
    // hyperbola's slope range, so masking them leaves the hyperbola intact.
    const SMALL_SCENARIO: &str = r#"
[array]
element_count = 48
carrier_freq_hz = 24.0e9

[pulse]
center_freq_hz = 16.0e9
single_side_bandwidth_hz = 8.0e9

[[sources]]
kind = "far_field"
slowness_s_per_m = -2.6e-9
delay_s = 0.9e-9

[[sources]]
kind = "far_field"
slowness_s_per_m = 2.4e-9
delay_s = 0.4e-9

[[sources]]
kind = "near_field"
x_m = 0.05
z_m = 0.35
delay_s = -0.2e-9

[sampling]
t_start_s = -0.65e-9
n_t = 250

[radon]
n_p = 301
tau_start_s = 0.0
n_tau = 126

[localization]
k_max = 16
min_energy_frac = 0.05
"#;

    #[test]
    fn pipeline_runs_end_to_end_and_is_deterministic() {
        let dir_a = temp_dir("run-a");
        let dir_b = temp_dir("run-b");
        let report_a = run_pipeline(SMALL_SCENARIO, &dir_a, None).unwrap();
        let report_b = run_pipeline(SMALL_SCENARIO, &dir_b, None).unwrap();

        assert_eq!(report_a.files, report_b.files);
        assert_eq!(report_a.bands.len(), 2, "two far-field detections");
        let pos = report_a.position.as_ref().unwrap();
        assert!((pos.x - 0.05).abs() < 0.03, "x: {}", pos.x);
        assert!((pos.z - 0.35).abs() < 0.05, "z: {}", pos.z);

        // every file listed in the manifest exists, and nothing else was
        // written
        let manifest = fs::read_to_string(dir_a.join(MANIFEST_FILE)).unwrap();
        let listed: Vec<&str> = manifest
            .lines()
            .filter_map(|l| l.strip_prefix("file="))
            .collect();
        for file in &listed {
            assert!(dir_a.join(file).exists(), "{file} missing");
        }
        let mut on_disk: Vec<String> = fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        on_disk.sort();
        let mut expected: Vec<String> = listed.iter().map(|s| s.to_string()).collect();
        expected.sort();
        assert_eq!(on_disk, expected, "no orphan outputs");

        // byte-identical grids across runs; manifests agree modulo timings
        for file in &report_a.files {
            if file == MANIFEST_FILE {
                continue;
            }
            let a = fs::read(dir_a.join(file)).unwrap();
            let b = fs::read(dir_b.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
        let strip = |text: &str| {
            text.lines()
                .filter(|l| !l.starts_with("timing_"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let manifest_b = fs::read_to_string(dir_b.join(MANIFEST_FILE)).unwrap();
        assert_eq!(strip(&manifest), strip(&manifest_b));

        fs::remove_dir_all(&dir_a).ok();
        fs::remove_dir_all(&dir_b).ok();
    }

    #[test]
    fn far_field_only_scenario_fails_to_localize() {
        // with nothing but plane waves, the filter removes essentially
        // everything; whatever low-level residue remains cannot support a
        // consistent sub-array triangulation
        let near_field_block = "[[sources]]\nkind = \"near_field\"\nx_m = 0.05\nz_m = 0.35\ndelay_s = -0.2e-9\n";
        let far_only = SMALL_SCENARIO.replace(near_field_block, "");
        assert_ne!(far_only, SMALL_SCENARIO, "near-field block not found");
        let dir = temp_dir("far-only");
        match run_pipeline(&far_only, &dir, None) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "localize"),
            other => panic!("expected a localize stage error, got {other:?}"),
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_scenario_fails_in_localize_with_no_arrival() {
        let dir = temp_dir("empty");
        let text = r#"
[array]
element_count = 16
carrier_freq_hz = 24.0e9

[pulse]
center_freq_hz = 16.0e9
single_side_bandwidth_hz = 8.0e9

[sampling]
dt_s = 1.0e-11
t_start_s = 0.0
n_t = 256
"#;
        match run_pipeline(text, &dir, None) {
            Err(Error::Stage { stage, source }) => {
                assert_eq!(stage, "localize");
                assert!(source.to_string().contains("no arrival"), "{source}");
            }
            other => panic!("expected localize stage error, got {other:?}"),
        }
        // the synth grid exists and is all zeros; detections report no bands
        let grid = GridFile::read(&dir.join(SPACETIME_FILE)).unwrap();
        assert!(grid.values.iter().all(|&v| v == 0.0));
        let detections = fs::read_to_string(dir.join(DETECTIONS_FILE)).unwrap();
        assert!(detections.starts_with("count=0"));
        // manifest records the failure
        let manifest = fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap();
        assert!(manifest.contains("status=error"));
        assert!(manifest.contains("error_stage") || manifest.contains("error="));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn seed_override_changes_noise_but_not_hash() {
        let dir_a = temp_dir("seed-a");
        let dir_b = temp_dir("seed-b");
        let text = format!("{SMALL_SCENARIO}\n[sampling.noise]\n");
        // reuse the scenario with noise enabled through the sampling table
        let noisy = text.replace("[sampling]", "[sampling]\nnoise_std = 0.05");
        let noisy = noisy.replace("\n[sampling.noise]\n", "");
        run_pipeline(&noisy, &dir_a, Some(1)).unwrap();
        run_pipeline(&noisy, &dir_b, Some(2)).unwrap();
        let a = fs::read(dir_a.join(SPACETIME_FILE)).unwrap();
        let b = fs::read(dir_b.join(SPACETIME_FILE)).unwrap();
        assert_ne!(a, b, "different seeds must change the noise");
        // headers (including the scenario hash) are identical
        let head = |bytes: &[u8]| {
            let end = bytes.windows(2).position(|w| w == b"\n\n").unwrap();
            bytes[..end].to_vec()
        };
        assert_eq!(head(&a), head(&b));
        fs::remove_dir_all(&dir_a).ok();
        fs::remove_dir_all(&dir_b).ok();
    }
}
