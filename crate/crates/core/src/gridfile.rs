//! Self-describing grid files: an ASCII key=value header, a blank line,
//! then the payload as raw little-endian IEEE-754 f64 values in row-major
//! order.
//!
//! ```text
//! kind=radon
//! n_rows=481
//! n_cols=501
//! row_axis_start=-0.0000000003
//! row_axis_step=0.000000000010416666666666666
//! row_axis_unit=s
//! col_axis_start=-0.0000000033356409519815205
//! col_axis_step=0.000000000013342563807926082
//! col_axis_unit=s/m
//! producer=slantstack 0.1.0
//! scenario_hash=5d3f2a1b9c8e7d60
//!
//! <n_rows * n_cols * 8 bytes>
//! ```
//!
//! The header is enough to plot the grid; no scenario file is needed to
//! read one. Floats are written with Rust's shortest round-trip formatting,
//! so a text round trip preserves the exact values.

use crate::axis::Axis;
use crate::localization::ExtractedEnvelope;
use crate::radon::RadonGrid;
use crate::semblance::SemblanceGrid;
use crate::wavefield::{ArrayGeometry, SpaceTimeGrid};
use crate::{Error, Result};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// What a grid file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    SpaceTime,
    Radon,
    Semblance,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::SpaceTime => "spacetime",
            GridKind::Radon => "radon",
            GridKind::Semblance => "semblance",
        }
    }

    fn parse(s: &str) -> Option<GridKind> {
        match s {
            "spacetime" => Some(GridKind::SpaceTime),
            "radon" => Some(GridKind::Radon),
            "semblance" => Some(GridKind::Semblance),
            _ => None,
        }
    }
}

/// One axis of a stored grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisDescriptor {
    pub start: f64,
    pub step: f64,
    pub unit: String,
}

impl AxisDescriptor {
    fn from_axis(axis: Axis, unit: &str) -> AxisDescriptor {
        AxisDescriptor {
            start: axis.start,
            step: axis.step,
            unit: unit.to_string(),
        }
    }

    fn to_axis(&self, len: usize) -> Result<Axis> {
        if !(self.step > 0.0) {
            return Err(Error::invalid("grid axis step must be positive"));
        }
        Ok(Axis::new(self.start, self.step, len))
    }
}

/// An in-memory grid file: header fields plus row-major payload.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub kind: GridKind,
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_axis: AxisDescriptor,
    pub col_axis: AxisDescriptor,
    pub producer: String,
    pub scenario_hash: String,
    /// Row-major values, `n_rows * n_cols` of them.
    pub values: Vec<f64>,
}

/// The producer string this build writes into headers.
pub fn producer_string() -> String {
    format!("slantstack {}", env!("CARGO_PKG_VERSION"))
}

/// FNV-1a hash of the scenario text, as 16 hex digits. Stamped into every
/// grid header so outputs can be traced back to their configuration.
pub fn scenario_hash(config_text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in config_text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

impl GridFile {
    pub fn from_spacetime(grid: &SpaceTimeGrid, scenario_hash: &str) -> GridFile {
        let m = grid.geometry().element_count();
        let mut values = Vec::with_capacity(grid.n_t() * m);
        for i in 0..grid.n_t() {
            for n in 0..m {
                values.push(grid.sample(i, n));
            }
        }
        GridFile {
            kind: GridKind::SpaceTime,
            n_rows: grid.n_t(),
            n_cols: m,
            row_axis: AxisDescriptor::from_axis(grid.time(), "s"),
            col_axis: AxisDescriptor {
                start: grid.geometry().element_x()[0],
                step: grid.geometry().spacing(),
                unit: "m".to_string(),
            },
            producer: producer_string(),
            scenario_hash: scenario_hash.to_string(),
            values,
        }
    }

    pub fn from_radon(grid: &RadonGrid, scenario_hash: &str) -> GridFile {
        let (tau, p) = (grid.tau(), grid.p());
        let mut values = Vec::with_capacity(tau.len * p.len);
        for j in 0..tau.len {
            for k in 0..p.len {
                values.push(grid.value(j, k));
            }
        }
        GridFile {
            kind: GridKind::Radon,
            n_rows: tau.len,
            n_cols: p.len,
            row_axis: AxisDescriptor::from_axis(tau, "s"),
            col_axis: AxisDescriptor::from_axis(p, "s/m"),
            producer: producer_string(),
            scenario_hash: scenario_hash.to_string(),
            values,
        }
    }

    pub fn from_semblance(grid: &SemblanceGrid, scenario_hash: &str) -> GridFile {
        let (tau, p) = (grid.tau(), grid.p());
        let mut values = Vec::with_capacity(tau.len * p.len);
        for j in 0..tau.len {
            for k in 0..p.len {
                values.push(grid.value(j, k));
            }
        }
        GridFile {
            kind: GridKind::Semblance,
            n_rows: tau.len,
            n_cols: p.len,
            row_axis: AxisDescriptor::from_axis(tau, "s"),
            col_axis: AxisDescriptor::from_axis(p, "s/m"),
            producer: producer_string(),
            scenario_hash: scenario_hash.to_string(),
            values,
        }
    }

    /// A single-column space/time grid holding an extracted envelope.
    pub fn from_envelope(env: &ExtractedEnvelope, scenario_hash: &str) -> GridFile {
        GridFile {
            kind: GridKind::SpaceTime,
            n_rows: env.values.len(),
            n_cols: 1,
            row_axis: AxisDescriptor::from_axis(env.time, "s"),
            col_axis: AxisDescriptor {
                start: 0.0,
                step: 1.0,
                unit: "m".to_string(),
            },
            producer: producer_string(),
            scenario_hash: scenario_hash.to_string(),
            values: env.values.clone(),
        }
    }

    /// Rebuild a [`SpaceTimeGrid`]. The geometry is reconstructed from the
    /// column axis under the half-wavelength design rule
    /// (`lambda_c = 2 * dx`); pass `expected` to check the file against a
    /// known geometry instead.
    pub fn to_spacetime(&self, expected: Option<&ArrayGeometry>) -> Result<SpaceTimeGrid> {
        if self.kind != GridKind::SpaceTime {
            return Err(Error::invalid(format!(
                "expected a spacetime grid, found {}",
                self.kind.as_str()
            )));
        }
        let geometry = match expected {
            Some(g) => {
                let ok = g.element_count() == self.n_cols
                    && (g.element_x()[0] - self.col_axis.start).abs() <= 1e-9 * g.spacing()
                    && (g.spacing() - self.col_axis.step).abs() <= 1e-9 * g.spacing();
                if !ok {
                    return Err(Error::invalid(
                        "grid file column axis does not match the scenario geometry",
                    ));
                }
                g.clone()
            }
            None => {
                let xs: Vec<f64> = (0..self.n_cols)
                    .map(|n| self.col_axis.start + n as f64 * self.col_axis.step)
                    .collect();
                ArrayGeometry::from_parts(xs, self.col_axis.step, 2.0 * self.col_axis.step)
            }
        };
        let time = self.row_axis.to_axis(self.n_rows)?;
        SpaceTimeGrid::from_rows(geometry, time, &self.values)
    }

    /// Rebuild a [`RadonGrid`].
    pub fn to_radon(&self) -> Result<RadonGrid> {
        if self.kind != GridKind::Radon {
            return Err(Error::invalid(format!(
                "expected a radon grid, found {}",
                self.kind.as_str()
            )));
        }
        let tau = self.row_axis.to_axis(self.n_rows)?;
        let p = self.col_axis.to_axis(self.n_cols)?;
        let mut grid = RadonGrid::zeros(tau, p);
        for j in 0..self.n_rows {
            for k in 0..self.n_cols {
                *grid.value_mut(j, k) = self.values[j * self.n_cols + k];
            }
        }
        Ok(grid)
    }

    /// Rebuild a [`SemblanceGrid`]. The window descriptor is not stored in
    /// the file, so the caller supplies it (normally from the same scenario
    /// configuration that produced the file).
    pub fn to_semblance(
        &self,
        window_len: usize,
        window_shape: crate::semblance::WindowShape,
    ) -> Result<SemblanceGrid> {
        if self.kind != GridKind::Semblance {
            return Err(Error::invalid(format!(
                "expected a semblance grid, found {}",
                self.kind.as_str()
            )));
        }
        let tau = self.row_axis.to_axis(self.n_rows)?;
        let p = self.col_axis.to_axis(self.n_cols)?;
        SemblanceGrid::from_parts(self.values.clone(), tau, p, window_len, window_shape)
    }

    fn header_string(&self) -> String {
        format!(
            "kind={}\nn_rows={}\nn_cols={}\nrow_axis_start={}\nrow_axis_step={}\nrow_axis_unit={}\ncol_axis_start={}\ncol_axis_step={}\ncol_axis_unit={}\nproducer={}\nscenario_hash={}\n\n",
            self.kind.as_str(),
            self.n_rows,
            self.n_cols,
            self.row_axis.start,
            self.row_axis.step,
            self.row_axis.unit,
            self.col_axis.start,
            self.col_axis.step,
            self.col_axis.unit,
            self.producer,
            self.scenario_hash,
        )
    }

    /// Write header plus payload to `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        debug_assert_eq!(self.values.len(), self.n_rows * self.n_cols);
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(self.header_string().as_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read and validate a grid file.
    pub fn read(path: &Path) -> Result<GridFile> {
        let bytes = fs::read(path)?;
        GridFile::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<GridFile> {
        let parse_err = |line: usize, message: &str| Error::GridParse {
            line,
            message: message.to_string(),
        };

        let mut kind = None;
        let mut n_rows = None;
        let mut n_cols = None;
        let mut row_axis = AxisDescriptor {
            start: f64::NAN,
            step: f64::NAN,
            unit: String::new(),
        };
        let mut col_axis = row_axis.clone();
        let mut producer = None;
        let mut scenario_hash = None;

        let mut offset = 0usize;
        let mut line_no = 0usize;
        loop {
            let rest = &bytes[offset..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| parse_err(line_no + 1, "header not terminated by a blank line"))?;
            let line = &rest[..end];
            offset += end + 1;
            line_no += 1;
            if line.is_empty() {
                break; // blank line ends the header
            }
            let text = std::str::from_utf8(line)
                .map_err(|_| parse_err(line_no, "header line is not ASCII text"))?;
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, "expected key=value"))?;
            let bad_num = || parse_err(line_no, "malformed number");
            match key {
                "kind" => {
                    kind = Some(
                        GridKind::parse(value)
                            .ok_or_else(|| parse_err(line_no, "unknown grid kind"))?,
                    )
                }
                "n_rows" => n_rows = Some(value.parse::<usize>().map_err(|_| bad_num())?),
                "n_cols" => n_cols = Some(value.parse::<usize>().map_err(|_| bad_num())?),
                "row_axis_start" => row_axis.start = value.parse().map_err(|_| bad_num())?,
                "row_axis_step" => row_axis.step = value.parse().map_err(|_| bad_num())?,
                "row_axis_unit" => row_axis.unit = value.to_string(),
                "col_axis_start" => col_axis.start = value.parse().map_err(|_| bad_num())?,
                "col_axis_step" => col_axis.step = value.parse().map_err(|_| bad_num())?,
                "col_axis_unit" => col_axis.unit = value.to_string(),
                "producer" => producer = Some(value.to_string()),
                "scenario_hash" => scenario_hash = Some(value.to_string()),
                _ => return Err(parse_err(line_no, "unknown header key")),
            }
        }

        let kind = kind.ok_or_else(|| parse_err(line_no, "missing kind"))?;
        let n_rows = n_rows.ok_or_else(|| parse_err(line_no, "missing n_rows"))?;
        let n_cols = n_cols.ok_or_else(|| parse_err(line_no, "missing n_cols"))?;
        if !row_axis.start.is_finite() || !row_axis.step.is_finite() {
            return Err(parse_err(line_no, "missing row axis"));
        }
        if !col_axis.start.is_finite() || !col_axis.step.is_finite() {
            return Err(parse_err(line_no, "missing col axis"));
        }

        let payload = &bytes[offset..];
        let expected = n_rows
            .checked_mul(n_cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| parse_err(line_no, "grid dimensions overflow"))?;
        if payload.len() != expected {
            return Err(parse_err(
                line_no,
                &format!(
                    "payload is {} bytes, expected {} (= {} x {} x 8)",
                    payload.len(),
                    expected,
                    n_rows,
                    n_cols
                ),
            ));
        }
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for chunk in payload.chunks_exact(8) {
            let v = f64::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(parse_err(line_no, "payload contains non-finite values"));
            }
            values.push(v);
        }

        Ok(GridFile {
            kind,
            n_rows,
            n_cols,
            row_axis,
            col_axis,
            producer: producer.unwrap_or_default(),
            scenario_hash: scenario_hash.unwrap_or_default(),
            values,
        })
    }

    /// Export as CSV: a header row with the column-axis values, then one
    /// row per row-axis sample, first cell being the row-axis value.
    /// Shortest round-trip float formatting preserves full precision.
    pub fn export_csv(&self, out: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(out)?);
        write!(w, "axis")?;
        for k in 0..self.n_cols {
            write!(
                w,
                ",{}",
                self.col_axis.start + k as f64 * self.col_axis.step
            )?;
        }
        writeln!(w)?;
        for j in 0..self.n_rows {
            write!(w, "{}", self.row_axis.start + j as f64 * self.row_axis.step)?;
            for k in 0..self.n_cols {
                write!(w, ",{}", self.values[j * self.n_cols + k])?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse a CSV file written by [`export_csv`](Self::export_csv) back
    /// into (row axis values, col axis values, row-major data).
    pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::GridParse {
            line: 1,
            message: "empty csv".into(),
        })?;
        let mut cols = Vec::new();
        for cell in header.split(',').skip(1) {
            cols.push(cell.parse::<f64>().map_err(|_| Error::GridParse {
                line: 1,
                message: format!("malformed header cell '{cell}'"),
            })?);
        }
        let mut rows = Vec::new();
        let mut data = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut cells = line.split(',');
            let parse = |cell: &str| {
                cell.parse::<f64>().map_err(|_| Error::GridParse {
                    line: idx + 1,
                    message: format!("malformed cell '{cell}'"),
                })
            };
            rows.push(parse(cells.next().unwrap_or(""))?);
            let mut count = 0;
            for cell in cells {
                data.push(parse(cell)?);
                count += 1;
            }
            if count != cols.len() {
                return Err(Error::GridParse {
                    line: idx + 1,
                    message: format!("expected {} data cells, found {count}", cols.len()),
                });
            }
        }
        Ok((rows, cols, data))
    }
}

/// Validate a grid file and copy it byte-for-byte (the "binary" export
/// format is the grid file format itself).
pub fn export_binary(grid_path: &Path, out: &Path) -> Result<()> {
    GridFile::read(grid_path)?;
    fs::copy(grid_path, out)?;
    Ok(())
}

/// Read just enough of a grid file to re-expose it, then write CSV or
/// binary next to the requested path.
pub fn export_plot_data(grid_path: &Path, out: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Csv => GridFile::read(grid_path)?.export_csv(out),
        ExportFormat::Binary => export_binary(grid_path, out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Binary,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExportFormat> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "binary" => Ok(ExportFormat::Binary),
            other => Err(Error::invalid(format!(
                "unknown export format '{other}' (expected csv or binary)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::make_array;
    use std::path::PathBuf;

    fn temp_path(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("slantstack-gridfile-{}-{name}", std::process::id()));
        p
    }

    fn sample_grid() -> GridFile {
        GridFile {
            kind: GridKind::Radon,
            n_rows: 3,
            n_cols: 2,
            row_axis: AxisDescriptor {
                start: -1.0e-9,
                step: 0.5e-9,
                unit: "s".into(),
            },
            col_axis: AxisDescriptor {
                start: -3.0e-9,
                step: 3.0e-9,
                unit: "s/m".into(),
            },
            producer: producer_string(),
            scenario_hash: scenario_hash("test"),
            values: vec![1.0, -2.5, 0.125, 1.0 / 3.0, -0.0, 9.87e-21],
        }
    }

    #[test]
    fn write_read_round_trip_is_exact() {
        let path = temp_path("roundtrip.grid");
        let grid = sample_grid();
        grid.write(&path).unwrap();
        let back = GridFile::read(&path).unwrap();
        assert_eq!(back, grid);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn payload_size_is_8_bytes_per_value() {
        let path = temp_path("payload.grid");
        let grid = sample_grid();
        grid.write(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_len = grid.header_string().len();
        assert_eq!(bytes.len(), header_len + 8 * grid.n_rows * grid.n_cols);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn truncated_payload_is_rejected_with_line_number() {
        let path = temp_path("truncated.grid");
        let grid = sample_grid();
        grid.write(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 5);
        match GridFile::from_bytes(&bytes) {
            Err(Error::GridParse { line, message }) => {
                assert!(line > 0);
                assert!(message.contains("payload"), "{message}");
            }
            other => panic!("expected GridParse, got {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn malformed_header_reports_offending_line() {
        let bytes = b"kind=radon\nn_rows=oops\n\n".to_vec();
        match GridFile::from_bytes(&bytes) {
            Err(Error::GridParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected GridParse, got {other:?}"),
        }
        let bytes = b"kind=radon\nsurprise\n\n".to_vec();
        match GridFile::from_bytes(&bytes) {
            Err(Error::GridParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected GridParse, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let path = temp_path("grid.csv");
        let grid = sample_grid();
        grid.export_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let (rows, cols, data) = GridFile::parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(cols.len(), 2);
        assert_eq!(data, grid.values);
        for (j, &r) in rows.iter().enumerate() {
            assert_eq!(r, grid.row_axis.start + j as f64 * grid.row_axis.step);
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn binary_export_is_byte_identical() {
        let src = temp_path("src.grid");
        let dst = temp_path("dst.grid");
        sample_grid().write(&src).unwrap();
        export_binary(&src, &dst).unwrap();
        assert_eq!(std::fs::read(&src).unwrap(), std::fs::read(&dst).unwrap());
        std::fs::remove_file(&src).ok();
        std::fs::remove_file(&dst).ok();
    }

    #[test]
    fn spacetime_round_trip_through_file() {
        let g = make_array(5, 24e9).unwrap();
        let time = Axis::new(-1e-10, 1e-11, 7);
        let mut st = SpaceTimeGrid::zeros(g.clone(), time);
        for i in 0..7 {
            for n in 0..5 {
                *st.sample_mut(i, n) = (i * 5 + n) as f64 * 0.25 - 3.0;
            }
        }
        let file = GridFile::from_spacetime(&st, "0123456789abcdef");
        let back = file.to_spacetime(Some(&g)).unwrap();
        assert_eq!(back, st);
        // geometry mismatch is caught
        let other = make_array(6, 24e9).unwrap();
        assert!(file.to_spacetime(Some(&other)).is_err());
        // reconstruction without the expected geometry uses the column axis
        let rebuilt = file.to_spacetime(None).unwrap();
        assert_eq!(rebuilt.geometry().element_count(), 5);
        assert!((rebuilt.geometry().spacing() - g.spacing()).abs() < 1e-18);
    }

    #[test]
    fn radon_round_trip_through_file() {
        let tau = Axis::new(0.0, 1e-11, 4);
        let p = Axis::new(-1e-9, 1e-9, 3);
        let mut grid = RadonGrid::zeros(tau, p);
        for j in 0..4 {
            for k in 0..3 {
                *grid.value_mut(j, k) = (j as f64) - (k as f64) * 0.5;
            }
        }
        let file = GridFile::from_radon(&grid, "00");
        let back = file.to_radon().unwrap();
        assert_eq!(back, grid);
        assert!(file.to_spacetime(None).is_err(), "kind mismatch rejected");
    }

    #[test]
    fn scenario_hash_is_stable_and_sensitive() {
        let a = scenario_hash("hello");
        assert_eq!(a, scenario_hash("hello"));
        assert_ne!(a, scenario_hash("hello "));
        assert_eq!(a.len(), 16);
    }
}
