//! Job configuration files (TOML, or JSON by extension).

use std::path::{Path, PathBuf};

use lipquo::{Complex, Polynomial, RootFinder};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Cluster validation tolerance for multiple roots.
    pub multiplicity: Option<f64>,
    /// Backward-error target of the root finder.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// `xmin,xmax,ymin,ymax,nx,ny`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(CliError::Config(format!(
                "--grid expects xmin,xmax,ymin,ymax,nx,ny, got {s:?}"
            )));
        }
        let num = |i: usize| {
            parts[i]
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("--grid field {} ({:?}): {e}", i + 1, parts[i])))
        };
        let count = |i: usize| {
            parts[i]
                .parse::<usize>()
                .map_err(|e| CliError::Config(format!("--grid field {} ({:?}): {e}", i + 1, parts[i])))
        };
        Ok(Self {
            x: [num(0)?, num(1)?],
            y: [num(2)?, num(3)?],
            nx: count(4)?,
            ny: count(5)?,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite = self.x.iter().chain(&self.y).all(|v| v.is_finite());
        if !finite || !(self.x[0] < self.x[1]) || !(self.y[0] < self.y[1]) || self.nx == 0 || self.ny == 0 {
            return Err(CliError::Config(format!(
                "empty grid rectangle: x {:?}, y {:?}, {} x {} points",
                self.x, self.y, self.nx, self.ny
            )));
        }
        Ok(())
    }

    /// Evenly spaced points including both ends, row by row.
    pub fn points(&self) -> impl Iterator<Item = Complex> + '_ {
        let at = |range: [f64; 2], n: usize, i: usize| {
            if n == 1 {
                range[0]
            } else {
                range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
            }
        };
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| Complex::new(at(self.x, self.nx, i), at(self.y, self.ny, j))))
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// `[re, im]` pairs in ascending degree.
    pub coeffs: Vec<[f64; 2]>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn polynomial(&self) -> Result<Polynomial, CliError> {
        let coeffs = self.coeffs.iter().map(|&[re, im]| Complex::new(re, im)).collect();
        Polynomial::new(coeffs).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn finder(&self) -> Result<RootFinder, CliError> {
        let mut finder = RootFinder::default();
        for (value, slot, name) in [
            (self.tolerances.multiplicity, &mut finder.multiplicity_tol, "multiplicity"),
            (self.tolerances.residual, &mut finder.residual_tol, "residual"),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v < 1.0) {
                    return Err(CliError::Config(format!("tolerances.{name} must lie in (0, 1), got {v}")));
                }
                *slot = v;
            }
        }
        Ok(finder)
    }
}
