//! Dense complex polynomials in ascending-degree order.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Default relative tolerance for [`Polynomial::multiplicity`].
pub const DEFAULT_MULTIPLICITY_TOL: f64 = 1e-7;

/// `coeffs[k]` is the coefficient of `z^k`. The zero polynomial is stored as `[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl Polynomial {
    /// Builds a polynomial, trimming exact trailing zeros.
    pub fn new(mut coeffs: Vec<Complex>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPolynomial(format!(
                "coefficient {bad} is not finite"
            )));
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(0.0, 0.0));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![Complex::new(0.0, 0.0)],
        }
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex::new(0.0, 0.0)
    }

    pub fn leading(&self) -> Complex {
        *self.coeffs.last().expect("non-empty by construction")
    }

    /// `1 + max |a_k|`, the reference magnitude for relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// Value and first derivative in a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex) -> (Complex, Complex) {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &a in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    }

    /// `Σ |a_k| |z|^k`, the magnitude scale of a backward-error residual at `z`.
    pub fn abs_eval(&self, z: Complex) -> f64 {
        let t = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a.norm())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * k as f64)
            .collect();
        Polynomial::new(coeffs).expect("derivative of finite coefficients is finite")
    }

    /// Taylor coefficients about `z0`: `P(z0 + u) = Σ b_k u^k`, by repeated
    /// synthetic division.
    pub fn shifted_expansion(&self, z0: Complex) -> Vec<Complex> {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let upper = b[j + 1];
                b[j] += z0 * upper;
            }
        }
        b
    }

    /// Multiplicity of `z0` as a root of `P(z) - P(z0)`: the smallest `k >= 1`
    /// whose shifted coefficient is above `tol` relative to the coefficient mass.
    pub fn multiplicity(&self, z0: Complex, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "multiplicity tolerance must be positive, got {tol}"
            )));
        }
        let b = self.shifted_expansion(z0);
        let mass: f64 = b.iter().skip(1).map(|c| c.norm()).sum();
        b.iter()
            .enumerate()
            .skip(1)
            .find(|(_, c)| c.norm() > tol * mass)
            .map(|(k, _)| k)
            .ok_or(Error::DegeneratePolynomial)
    }

    /// Splits `P = a·Q` with `Q` monic.
    pub fn normalize_monic(&self) -> Result<(Complex, Polynomial)> {
        if self.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let a = self.leading();
        let mut coeffs: Vec<Complex> = self.coeffs.iter().map(|&c| c / a).collect();
        *coeffs.last_mut().expect("non-empty") = Complex::new(1.0, 0.0);
        Ok((a, Polynomial::new(coeffs)?))
    }

    /// `P(z) - w`.
    pub fn minus_constant(&self, w: Complex) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= w;
        Polynomial { coeffs }
    }

    pub fn scaled(&self, a: Complex) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * a).collect())
            .expect("scaling finite coefficients")
    }
}

impl TryFrom<Vec<[f64; 2]>> for Polynomial {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidPolynomial("empty coefficient list".into()));
        }
        Polynomial::new(pairs.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
    }
}

impl From<Polynomial> for Vec<[f64; 2]> {
    fn from(p: Polynomial) -> Self {
        p.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex::new(0.0, 0.0) && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

/// Evaluates `Σ_{k>=1} b_k u^k` without the constant term.
pub(crate) fn eval_increment(b: &[Complex], u: Complex) -> Complex {
    b.iter()
        .skip(1)
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, &c| (acc + c) * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn eval_small_cases() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.eval(c(2.0, 0.0)), c(5.0, 0.0));
        assert!(p.eval(c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_naive_power_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<Complex> = (0..6)
            .map(|_| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            .collect();
        let p = Polynomial::new(coeffs.clone()).unwrap();
        for _ in 0..100 {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let naive: Complex = coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * z.powu(k as u32))
                .sum();
            assert!((p.eval(z) - naive).norm() <= 1e-12 * (1.0 + naive.norm()));
        }
    }

    #[test]
    fn derivative_cases() {
        let p = Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.derivative(), Polynomial::from_real(&[-3.0, 0.0, 3.0]).unwrap());
        let lin = Polynomial::from_real(&[7.0, 1.0]).unwrap();
        assert_eq!(lin.derivative(), Polynomial::from_real(&[1.0]).unwrap());
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sq.derivative().derivative(), Polynomial::from_real(&[2.0]).unwrap());
        assert!(Polynomial::from_real(&[4.0]).unwrap().derivative().is_zero());
    }

    #[test]
    fn shifted_expansion_cases() {
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sq.shifted_expansion(c(1.0, 0.0)), vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let cubic = Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        // (1+u)^3 - 3(1+u) = -2 + 0u + 3u^2 + u^3
        assert_eq!(
            cubic.shifted_expansion(c(1.0, 0.0)),
            vec![c(-2.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)]
        );
        let p = Polynomial::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]).unwrap();
        assert_eq!(p.shifted_expansion(c(0.0, 0.0)), p.coeffs().to_vec());
    }

    proptest! {
        #[test]
        fn shifted_expansion_matches_binomial_oracle(
            raw in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 1..7),
            z0 in (-2.0f64..2.0, -2.0f64..2.0),
        ) {
            let coeffs: Vec<Complex> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            let p = Polynomial::new(coeffs.clone()).unwrap();
            let z0 = c(z0.0, z0.1);
            let b = p.shifted_expansion(z0);
            let n = coeffs.len();
            for k in 0..p.coeffs().len() {
                let oracle: Complex = (k..n)
                    .map(|j| coeffs[j] * binomial(j, k) * z0.powu((j - k) as u32))
                    .sum();
                let mass: f64 = (k..n)
                    .map(|j| coeffs[j].norm() * binomial(j, k) * z0.norm().powi((j - k) as i32))
                    .sum();
                prop_assert!((b[k] - oracle).norm() <= 1e-12 * (1.0 + mass));
            }
        }

        #[test]
        fn serde_pairs_preserve_coefficients(
            raw in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 1..7),
        ) {
            let p = Polynomial::new(raw.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let pairs: Vec<[f64; 2]> = p.clone().into();
            prop_assert_eq!(Polynomial::try_from(pairs).unwrap(), p);
        }
    }

    #[test]
    fn multiplicity_cases() {
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sq.multiplicity(c(0.0, 0.0), DEFAULT_MULTIPLICITY_TOL).unwrap(), 2);
        // z^3 - 3z + 2 = (z-1)^2 (z+2)
        let cubic = Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        assert_eq!(cubic.multiplicity(c(1.0, 0.0), DEFAULT_MULTIPLICITY_TOL).unwrap(), 2);
        let z3 = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(z3.multiplicity(c(0.0, 0.0), DEFAULT_MULTIPLICITY_TOL).unwrap(), 3);
        assert_eq!(cubic.multiplicity(c(3.0, 0.0), DEFAULT_MULTIPLICITY_TOL).unwrap(), 1);
    }

    #[test]
    fn multiplicity_of_constant_is_degenerate() {
        let k = Polynomial::from_real(&[5.0]).unwrap();
        assert_eq!(
            k.multiplicity(c(1.0, 0.0), DEFAULT_MULTIPLICITY_TOL),
            Err(Error::DegeneratePolynomial)
        );
    }

    #[test]
    fn normalize_monic_cases() {
        let p = Polynomial::from_real(&[4.0, 0.0, 2.0]).unwrap();
        let (a, q) = p.normalize_monic().unwrap();
        assert_eq!(a, c(2.0, 0.0));
        assert_eq!(q, Polynomial::from_real(&[2.0, 0.0, 1.0]).unwrap());

        let monic = Polynomial::from_real(&[1.0, -3.0, 0.0, 1.0]).unwrap();
        assert_eq!(monic.normalize_monic().unwrap(), (c(1.0, 0.0), monic.clone()));

        let iz3 = Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        let (a, q) = iz3.normalize_monic().unwrap();
        assert_eq!(a, c(0.0, 1.0));
        assert_eq!(q, Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]).unwrap());

        assert_eq!(
            Polynomial::from_real(&[3.0]).unwrap().normalize_monic(),
            Err(Error::ConstantPolynomial)
        );
    }

    #[test]
    fn rejects_non_finite_and_trims() {
        assert!(Polynomial::new(vec![c(f64::NAN, 0.0)]).is_err());
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![]).unwrap().is_zero());
    }

    #[test]
    fn increment_excludes_constant() {
        let b = vec![c(9.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert_eq!(eval_increment(&b, c(3.0, 0.0)), c(15.0, 0.0));
    }
}
