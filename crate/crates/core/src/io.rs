//! File formats: grid CSV (`n1,n2,spacing` first row, then `n1` rows of `n2`
//! values, `NA` for no data, row 0 northernmost), draw matrices, JSON
//! sidecars and PPM heatmaps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};

pub const NO_DATA: &str = "NA";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed grid: {0}")]
    MalformedGrid(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| IoError::File {
            path: dir.display().to_string(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        NO_DATA.to_string()
    } else {
        format!("{v}")
    }
}

fn parse_value(s: &str) -> Result<f64, IoError> {
    let s = s.trim();
    if s == NO_DATA {
        return Ok(f64::NAN);
    }
    s.parse()
        .map_err(|_| IoError::MalformedGrid(format!("cannot parse value {s:?}")))
}

/// Row-major grid of values; `NaN` marks no data.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(n1: usize, n2: usize, spacing: f64, values: Vec<f64>) -> Result<Self, IoError> {
        if values.len() != n1 * n2 || n1 == 0 || n2 == 0 {
            return Err(IoError::MalformedGrid(format!(
                "{} values for a {n1}×{n2} grid",
                values.len()
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(IoError::MalformedGrid(format!("spacing {spacing}")));
        }
        Ok(Self { n1, n2, spacing, values })
    }

    /// Scatters slot values onto the lattice grid; inactive nodes get no data.
    pub fn from_slots(lat: &Lattice, slot_values: &[f64]) -> Self {
        Self {
            n1: lat.n1(),
            n2: lat.n2(),
            spacing: lat.spacing(),
            values: lat.to_grid(slot_values, f64::NAN),
        }
    }

    /// Lattice whose observed nodes are the finite cells. All cells are
    /// active unless an explicit active mask is given.
    pub fn lattice(&self, active: Option<Vec<bool>>) -> Result<Lattice, IoError> {
        let active = active.unwrap_or_else(|| vec![true; self.values.len()]);
        let observed = self
            .values
            .iter()
            .zip(&active)
            .map(|(v, &a)| a && v.is_finite())
            .collect();
        Ok(Lattice::with_masks(self.n1, self.n2, self.spacing, active, observed)?)
    }

    pub fn parse<R: Read>(reader: R) -> Result<Self, IoError> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| IoError::MalformedGrid("empty file".into()))??;
        let h: Vec<&str> = header.split(',').map(str::trim).collect();
        if h.len() != 3 {
            return Err(IoError::MalformedGrid(format!("header {header:?}")));
        }
        let n1: usize = h[0]
            .parse()
            .map_err(|_| IoError::MalformedGrid(format!("n1 {:?}", h[0])))?;
        let n2: usize = h[1]
            .parse()
            .map_err(|_| IoError::MalformedGrid(format!("n2 {:?}", h[1])))?;
        let spacing = parse_value(h[2])?;
        let mut values = Vec::with_capacity(n1 * n2);
        let mut rows = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line.split(',').map(parse_value).collect::<Result<_, _>>()?;
            if row.len() != n2 {
                return Err(IoError::MalformedGrid(format!(
                    "row {rows} has {} values, expected {n2}",
                    row.len()
                )));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != n1 {
            return Err(IoError::MalformedGrid(format!("{rows} rows, expected {n1}")));
        }
        Self::new(n1, n2, spacing, values)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), IoError> {
        writeln!(w, "{},{},{}", self.n1, self.n2, self.spacing)?;
        for row in self.values.chunks(self.n2) {
            let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, IoError> {
        Self::parse(open(path)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), IoError> {
        let mut w = create(path)?;
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Matrix with one row per draw and one column per active slot.
pub fn write_draws<D: AsRef<[f64]>>(path: &Path, draws: &[D]) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    for d in draws {
        w.write_record(d.as_ref().iter().map(|&v| format_value(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_draws(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(open(path)?);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row: Vec<f64> = rec.iter().map(parse_value).collect::<Result<_, _>>()?;
        if let Some(first) = out.first() {
            if first.len() != row.len() {
                return Err(IoError::MalformedGrid("ragged draw matrix".into()));
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Writes rows of a serializable record type with a header line.
pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    Ok(serde_json::from_reader(BufReader::new(open(path)?))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Palette {
    /// Black to white.
    #[default]
    Gray,
    /// Blue through white to red.
    Diverging,
}

/// Colour for no-data cells.
pub const NO_DATA_RGB: [u8; 3] = [255, 0, 255];

impl Palette {
    fn color(self, t: f64) -> [u8; 3] {
        let t = t.clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
        match self {
            Palette::Gray => {
                let g = lerp(0.0, 255.0, t);
                [g, g, g]
            }
            Palette::Diverging => {
                let (blue, white, red) = ([33.0, 102.0, 172.0], [247.0, 247.0, 247.0], [178.0, 24.0, 43.0]);
                let (a, b, s) = if t < 0.5 { (blue, white, 2.0 * t) } else { (white, red, 2.0 * t - 1.0) };
                [lerp(a[0], b[0], s), lerp(a[1], b[1], s), lerp(a[2], b[2], s)]
            }
        }
    }
}

/// Binary PPM (P6) with the grid's minimum and maximum at the palette ends;
/// a constant grid maps to the palette middle. Each cell becomes a
/// `cell_px`×`cell_px` block.
pub fn heatmap_ppm(grid: &Grid, palette: Palette, cell_px: usize) -> Vec<u8> {
    let cell_px = cell_px.max(1);
    let finite = grid.values.iter().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, |m, &v| m.min(v));
    let hi = finite.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let (w, h) = (grid.n2 * cell_px, grid.n1 * cell_px);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for r in 0..grid.n1 {
        let row: Vec<[u8; 3]> = (0..grid.n2)
            .map(|c| {
                let v = grid.values[r * grid.n2 + c];
                if !v.is_finite() {
                    NO_DATA_RGB
                } else if hi > lo {
                    palette.color((v - lo) / (hi - lo))
                } else {
                    palette.color(0.5)
                }
            })
            .collect();
        for _ in 0..cell_px {
            for px in &row {
                for _ in 0..cell_px {
                    out.extend_from_slice(px);
                }
            }
        }
    }
    out
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut w = create(path)?;
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(ppm: &[u8]) -> Vec<[u8; 3]> {
        let mut newlines = 0;
        let start = ppm
            .iter()
            .position(|&b| {
                newlines += (b == b'\n') as usize;
                newlines == 3
            })
            .unwrap()
            + 1;
        ppm[start..].chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    }

    #[test]
    fn grid_round_trip_with_no_data() {
        let g = Grid::new(2, 3, 0.5, vec![1.0, f64::NAN, -2.5, 0.1, 1e-17, 3.0]).unwrap();
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2,3,0.5\n1,NA,-2.5\n"));
        let back = Grid::parse(buf.as_slice()).unwrap();
        assert_eq!(back.n1, 2);
        assert!(back.values[1].is_nan());
        assert_eq!(back.values[4], 1e-17);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(Grid::parse("2,2,1\n1,2\n3\n".as_bytes()).is_err());
        assert!(Grid::parse("2,2,1\n1,2\n".as_bytes()).is_err());
        assert!(Grid::parse("2,2\n1,2\n3,4\n".as_bytes()).is_err());
        assert!(Grid::parse("1,2,1\nx,2\n".as_bytes()).is_err());
    }

    #[test]
    fn missing_cells_become_unobserved() {
        let g = Grid::new(2, 2, 1.0, vec![1.0, f64::NAN, 2.0, 3.0]).unwrap();
        let lat = g.lattice(None).unwrap();
        assert_eq!(lat.n_active(), 4);
        assert_eq!(lat.n_observed(), 3);
    }

    #[test]
    fn checkerboard_heatmap() {
        let g = Grid::new(2, 2, 1.0, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let px = pixels(&heatmap_ppm(&g, Palette::Gray, 1));
        assert_eq!(px, vec![[0; 3], [255; 3], [255; 3], [0; 3]]);
    }

    #[test]
    fn constant_grid_is_mid_palette() {
        let g = Grid::new(2, 2, 1.0, vec![4.0; 4]).unwrap();
        let px = pixels(&heatmap_ppm(&g, Palette::Gray, 1));
        assert!(px.iter().all(|&p| p == [128; 3]));
    }

    #[test]
    fn one_no_data_cell_one_reserved_pixel() {
        let g = Grid::new(2, 2, 1.0, vec![0.0, f64::NAN, 1.0, 2.0]).unwrap();
        let bytes = heatmap_ppm(&g, Palette::Diverging, 1);
        let px = pixels(&bytes);
        assert_eq!(px.iter().filter(|&&p| p == NO_DATA_RGB).count(), 1);
        assert_eq!(bytes, heatmap_ppm(&g, Palette::Diverging, 1));
        assert_eq!(pixels(&heatmap_ppm(&g, Palette::Gray, 3)).len(), 36);
    }
}
