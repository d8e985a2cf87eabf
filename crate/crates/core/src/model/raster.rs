//! Plain-text per-cell rasters: a header line `nx ny`, then `nx * ny`
//! whitespace-separated positive values, row-major from the lower-left cell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::StructuredGrid;

/// Piecewise-constant per-cell coefficient of one continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    n: usize,
    values: Vec<f64>,
}

impl CoefficientField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, an {n}x{n} grid needs {}",
                values.len(),
                n * n
            )));
        }
        if let Some((cell, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "field value {v} in cell ({}, {}) is not positive",
                cell % n,
                cell / n
            )));
        }
        Ok(Self { n, values })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// Nearest-cell-centre resampling onto an `n x n` grid.
    pub fn resample(&self, n: usize) -> Self {
        if n == self.n {
            return self.clone();
        }
        let src = self.n;
        let index = |c: usize| (((c as f64 + 0.5) * src as f64 / n as f64) as usize).min(src - 1);
        let mut values = Vec::with_capacity(n * n);
        for cy in 0..n {
            let sy = index(cy);
            for cx in 0..n {
                values.push(self.values[sy * src + index(cx)]);
            }
        }
        Self { n, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Raw raster contents before any grid check.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

pub fn parse_raster(text: &str, path: &Path) -> Result<Raster> {
    let err = |line: usize, column: usize, message: String| Error::Raster {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut tokens = text.lines().enumerate().flat_map(|(li, line)| {
        line.split_whitespace().map(move |tok| {
            let col = tok.as_ptr() as usize - line.as_ptr() as usize + 1;
            (li + 1, col, tok)
        })
    });
    let mut header = |what: &str| -> Result<usize> {
        let (line, col, tok) = tokens
            .next()
            .ok_or_else(|| err(1, 1, format!("missing {what} in header")))?;
        tok.parse::<usize>()
            .ok()
            .filter(|v| *v > 0)
            .ok_or_else(|| err(line, col, format!("invalid {what} '{tok}'")))
    };
    let nx = header("nx")?;
    let ny = header("ny")?;
    let mut values = Vec::with_capacity(nx * ny);
    for (line, col, tok) in tokens {
        let idx = values.len();
        if idx == nx * ny {
            return Err(err(line, col, format!("more than {} values", nx * ny)));
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| err(line, col, format!("cannot parse '{tok}' as a number")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(
                line,
                col,
                format!("value {v} in cell ({}, {}) must be positive", idx % nx, idx / nx),
            ));
        }
        values.push(v);
    }
    if values.len() != nx * ny {
        let last = text.lines().count().max(1);
        return Err(err(last, 1, format!("expected {} values, found {}", nx * ny, values.len())));
    }
    Ok(Raster { nx, ny, values })
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Raster {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    parse_raster(&text, path)
}

/// Loads a raster whose dimensions must equal the grid's cell counts.
pub fn load_field_raster(path: &Path, grid: &StructuredGrid) -> Result<CoefficientField> {
    let r = read_raster(path)?;
    if r.nx != grid.n() || r.ny != grid.n() {
        return Err(Error::RasterDimensions {
            path: PathBuf::from(path),
            nx: r.nx,
            ny: r.ny,
            expected: grid.n(),
        });
    }
    CoefficientField::new(grid.n(), r.values)
}

/// Loads a square raster at its native resolution.
pub fn load_square_raster(path: &Path) -> Result<CoefficientField> {
    let r = read_raster(path)?;
    if r.nx != r.ny {
        return Err(Error::RasterDimensions {
            path: PathBuf::from(path),
            nx: r.nx,
            ny: r.ny,
            expected: r.nx,
        });
    }
    CoefficientField::new(r.nx, r.values)
}

/// Text form of a per-cell or per-node square array, `side` values per row.
pub fn format_raster(side: usize, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 8);
    writeln!(out, "{side} {side}").unwrap();
    for row in values.chunks(side) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.txt")
    }

    #[test]
    fn parses_row_major() {
        let r = parse_raster("2 2\n1 2\n3 4\n", p()).unwrap();
        assert_eq!(r.values, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn zero_entry_names_cell_and_location() {
        let e = parse_raster("2 2\n1 2\n0 4\n", p()).unwrap_err();
        match e {
            Error::Raster { line, column, message, .. } => {
                assert_eq!((line, column), (3, 1));
                assert!(message.contains("(0, 1)"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn parse_failures_carry_location() {
        match parse_raster("2 2\n1 2\n3 x\n", p()).unwrap_err() {
            Error::Raster { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("{other}"),
        }
        assert!(parse_raster("2 2\n1 2 3\n", p()).is_err());
        assert!(parse_raster("2 2\n1 2 3 4 5\n", p()).is_err());
        assert!(parse_raster("a 2\n", p()).is_err());
    }

    #[test]
    fn resample_preserves_aligned_features() {
        let mut v = vec![1.0; 64];
        for cx in 4..6 {
            v[3 * 8 + cx] = 9.0;
        }
        let f = CoefficientField::new(8, v).unwrap();
        let c = f.resample(4);
        assert_eq!(c.value(4 + 2), 9.0);
        assert_eq!(c.values().iter().filter(|v| **v == 9.0).count(), 1);
        assert_eq!(f.resample(16).values().iter().filter(|v| **v == 9.0).count(), 8);
    }

    #[test]
    fn format_round_trips() {
        let vals = vec![1.5, 2.0, 1e4, 0.5];
        let r = parse_raster(&format_raster(2, &vals), p()).unwrap();
        assert_eq!(r.values, vals);
    }
}
