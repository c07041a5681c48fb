//! Critical points of a polynomial and the deflated quotients `Q_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Complex, Polynomial};
use crate::roots::RootFinder;

/// A distinct zero `z` of `P'` with `P(w) = (w - z)^m Q(w) + P(z)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub z: Complex,
    /// Multiplicity of `z` as a root of `P(w) - P(z)`; at least 2.
    pub m: usize,
    /// Taylor coefficients of `Q` about `z`; `q_coeffs[0] = Q(z) != 0`.
    pub q_coeffs: Vec<Complex>,
    pub p_at_z: Complex,
}

impl CriticalPoint {
    /// `Q(y)`, evaluated from the expansion about `z`.
    pub fn q_at(&self, y: Complex) -> Complex {
        let u = y - self.z;
        self.q_coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    pub fn q_at_center(&self) -> Complex {
        self.q_coeffs[0]
    }

    /// `(y - z)^m Q(y) + P(z)`.
    pub fn reconstruct(&self, y: Complex) -> Complex {
        (y - self.z).powu(self.m as u32) * self.q_at(y) + self.p_at_z
    }
}

/// Distinct critical points with multiplicities, using the default solver and tolerance.
pub fn critical_points(p: &Polynomial) -> Result<Vec<CriticalPoint>> {
    critical_points_with(p, &RootFinder::default())
}

pub fn critical_points_with(p: &Polynomial, finder: &RootFinder) -> Result<Vec<CriticalPoint>> {
    match p.degree() {
        0 => return Err(Error::ConstantPolynomial),
        1 => return Ok(Vec::new()),
        _ => {}
    }
    let dp = p.derivative();
    let roots = finder.distinct_roots(&dp)?;
    roots
        .into_iter()
        .map(|root| {
            let z = root.z;
            let m = p.multiplicity(z, finder.multiplicity_tol)?;
            if m < 2 {
                return Err(Error::InvalidPolynomial(format!(
                    "critical point {z} is not a multiple root of P - P(z) at tolerance {}",
                    finder.multiplicity_tol
                )));
            }
            let b = p.shifted_expansion(z);
            Ok(CriticalPoint {
                z,
                m,
                q_coeffs: b[m..].to_vec(),
                p_at_z: b[0],
            })
        })
        .collect()
}
