//! Counterexamples: maps that fail to be Lipschitz quotients, and the
//! non-injective homeomorphism candidate.

use rand::Rng;
use serde::Serialize;

use crate::basemaps::f_n;
use crate::error::{Error, Result};
use crate::poly::Complex;
use crate::quotient::QuotientMap;
use crate::sampling::stream;

/// `h(z) = |z|² e^{i arg z}`.
pub fn nonlip_homeo(z: Complex) -> Complex {
    z * z.norm()
}

/// `|h(R₀) - h(0)| / R₀` for `P = z`; equals `R₀`.
pub fn nonlip_homeo_growth(r0: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidArgument(format!("R0 must be positive, got {r0}")));
    }
    Ok((nonlip_homeo(Complex::new(r0, 0.0)) - nonlip_homeo(Complex::new(0.0, 0.0))).norm() / r0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioWitness {
    pub z: Complex,
    pub y: Complex,
    pub ratio: f64,
}

/// Radial pair `z = M`, `y = M + M·1e-4` for `g = f_n²`; the ratio is about `2M`.
pub fn square_unbounded_ratio(n: u32, m: f64) -> Result<RatioWitness> {
    if !(m > 1.0) || n == 0 {
        return Err(Error::InvalidArgument(format!("need n >= 1 and M > 1, got n = {n}, M = {m}")));
    }
    let z = Complex::new(m, 0.0);
    let y = Complex::new(m + m * 1e-4, 0.0);
    let g = |w: Complex| {
        let v = f_n(n, w);
        v * v
    };
    Ok(RatioWitness {
        z,
        y,
        ratio: (g(z) - g(y)).norm() / (z - y).norm(),
    })
}

/// For a fixed `h = h₂`, `(P∘h)²` has difference quotients growing without
/// bound: returns radial-pair ratios at the given moduli.
pub fn squared_composition_ratios(q: &QuotientMap, moduli: &[f64]) -> Vec<RatioWitness> {
    moduli
        .iter()
        .map(|&m| {
            let z = Complex::new(m, 0.0);
            let d = Complex::new(m * 1e-4, 0.0);
            let fz = q.f2(z);
            let dv = q.displacement_f2(z, d);
            // (a + Δ)² - a² = Δ(2a + Δ)
            let ratio = (dv * (2.0 * fz + dv)).norm() / d.norm();
            RatioWitness { z, y: z + d, ratio }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionDemo {
    pub n: usize,
    pub k: usize,
    /// Every sampled `y ∈ B_r(x)` has `f(y) ∈ B_r(f(x))`.
    pub lipschitz_evidence: bool,
    /// Every sampled target in `B_{r(1-ε)}(f(x))` has a preimage in `B_r(x)`.
    pub colipschitz_evidence: bool,
    pub witness_y: Vec<f64>,
    pub witness_image_distance: f64,
    pub witness_domain_distance: f64,
    /// Discreteness of the fiber through `x`, judged on sampled kernel points.
    pub fiber_discrete: bool,
    pub samples: usize,
    pub seed: u64,
}

impl ProjectionDemo {
    /// True when the witness defeats the strong inequality for `c`.
    pub fn defeats(&self, c: f64) -> bool {
        self.witness_image_distance < c * self.witness_domain_distance
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// The projection `ℝ^{n+k} → ℝⁿ` onto the first `n` coordinates.
pub fn projection_demo(n: usize, k: usize, x: &[f64], r: f64, samples: usize, seed: u64) -> Result<ProjectionDemo> {
    if n == 0 || k == 0 || x.len() != n + k || !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "projection demo needs n, k >= 1, a point of R^(n+k) and r > 0 (n = {n}, k = {k}, len = {}, r = {r})",
            x.len()
        )));
    }
    let f = |p: &[f64]| p[..n].to_vec();
    let fx = f(x);
    let mut rng = stream(seed, 0);
    let mut in_ball = |radius: f64, dim: usize| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
            if v.iter().map(|t| t * t).sum::<f64>().sqrt() < radius {
                return v;
            }
        }
    };
    let mut lip = true;
    let mut colip = true;
    for _ in 0..samples {
        let off = in_ball(r, n + k);
        let y: Vec<f64> = x.iter().zip(&off).map(|(a, b)| a + b).collect();
        lip &= dist(&f(&y), &fx) <= r;
        let t = in_ball(r * (1.0 - 1e-6), n);
        let target: Vec<f64> = fx.iter().zip(&t).map(|(a, b)| a + b).collect();
        // preimage keeping the kernel coordinates of x
        let mut pre = x.to_vec();
        pre[..n].copy_from_slice(&target);
        colip &= dist(&pre, x) < r && f(&pre) == target;
    }
    let mut y = x.to_vec();
    y[n] += r / 2.0;
    let fiber: Vec<Vec<f64>> = (1..=60)
        .map(|j| {
            let mut p = x.to_vec();
            p[n + k - 1] += 2f64.powi(-j);
            p
        })
        .collect();
    let min_gap = fiber
        .windows(2)
        .map(|w| dist(&w[0], &w[1]))
        .fold(f64::INFINITY, f64::min);
    Ok(ProjectionDemo {
        n,
        k,
        lipschitz_evidence: lip,
        colipschitz_evidence: colip,
        witness_image_distance: dist(&f(&y), &fx),
        witness_domain_distance: dist(&y, x),
        witness_y: y,
        fiber_discrete: !(min_gap < 1e-12 && fiber.iter().all(|p| f(p) == fx)),
        samples,
        seed,
    })
}

/// The earlier candidate homeomorphism: identity on `|z| <= R`, a blend of
/// `|z|` and `|z|^{1/n}` on `R <= |z| <= 2R`, and `|z|^{1/n} e^{i arg z}` beyond.
pub fn broken_jlps_h(big_r: f64, n: u32, z: Complex) -> Result<Complex> {
    if n < 2 || !(big_r > 2f64.powf(1.0 / (n - 1) as f64)) {
        return Err(Error::InvalidArgument(format!(
            "need n > 1 and R > 2^(1/(n-1)), got n = {n}, R = {big_r}"
        )));
    }
    let t = z.norm();
    if t <= big_r {
        return Ok(z);
    }
    let root = t.powf(1.0 / n as f64);
    let modulus = if t <= 2.0 * big_r {
        (2.0 * big_r - t) / big_r * t + (t - big_r) / big_r * root
    } else {
        root
    };
    Ok(z * (modulus / t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionWitness {
    pub z1: Complex,
    pub z2: Complex,
    pub image_distance: f64,
}

/// `z₁ = 2R` on the real axis and `z₂ = h(z₁)`, which lies in the identity
/// region, so `h(z₁) = h(z₂)` with `z₁ ≠ z₂`.
pub fn broken_jlps_collision(big_r: f64, n: u32) -> Result<CollisionWitness> {
    let z1 = Complex::new(2.0 * big_r, 0.0);
    let z2 = broken_jlps_h(big_r, n, z1)?;
    if z2.norm() >= big_r {
        return Err(Error::InvalidArgument(format!("h(2R) = {z2} is not inside B_R for R = {big_r}")));
    }
    Ok(CollisionWitness {
        z1,
        z2,
        image_distance: (broken_jlps_h(big_r, n, z1)? - broken_jlps_h(big_r, n, z2)?).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    #[test]
    fn growth_is_linear_in_r0() {
        assert_eq!(nonlip_homeo_growth(1.0).unwrap(), 1.0);
        assert_eq!(nonlip_homeo_growth(1e3).unwrap(), 1e3);
        let a = nonlip_homeo_growth(7.0).unwrap();
        let b = nonlip_homeo_growth(14.0).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!(nonlip_homeo_growth(0.0).is_err());
    }

    #[test]
    fn square_ratio_is_sum_of_moduli() {
        let w = square_unbounded_ratio(2, 100.0).unwrap();
        // (a² - b²)/(a - b) = a + b along the ray
        let oracle = w.z.re + w.y.re;
        assert!((w.ratio - oracle).abs() < 1e-6 * oracle);
        for m in [10.0, 1e3, 1e6] {
            for n in [1, 2, 3] {
                assert!(square_unbounded_ratio(n, m).unwrap().ratio >= m);
            }
        }
    }

    #[test]
    fn projection_defeats_every_constant() {
        let d = projection_demo(2, 1, &[0.0, 0.0, 0.0], 1.0, 500, 1).unwrap();
        assert!(d.lipschitz_evidence && d.colipschitz_evidence);
        assert_eq!(d.witness_y, vec![0.0, 0.0, 0.5]);
        assert_eq!(d.witness_image_distance, 0.0);
        for c in [1e-12, 1.0, 1e6] {
            assert!(d.defeats(c));
        }
        assert!(!d.fiber_discrete);
        let moved = projection_demo(2, 2, &[3.0, -1.0, 2.0, 5.0], 0.5, 200, 2).unwrap();
        assert!(moved.defeats(1.0) && !moved.fiber_discrete);
    }

    #[test]
    fn jlps_h_collides() {
        let h8 = broken_jlps_h(4.0, 2, Complex::new(8.0, 0.0)).unwrap();
        assert!((h8.re - 8f64.sqrt()).abs() < 1e-12 && h8.im == 0.0);
        let z = Complex::new(1.0, -2.0);
        assert_eq!(broken_jlps_h(4.0, 2, z).unwrap(), z);
        let w = broken_jlps_collision(4.0, 2).unwrap();
        assert!(w.image_distance < 1e-12 && (w.z1 - w.z2).norm() > 1.0);
        assert!(broken_jlps_h(1.5, 2, z).is_err());
    }

    #[test]
    fn squared_composition_grows() {
        let q = QuotientMap::build(&Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap()).unwrap();
        let w = squared_composition_ratios(&q, &[1e2, 1e4, 1e6, 1e8]);
        assert!(w.windows(2).all(|p| p[1].ratio > 10.0 * p[0].ratio), "{w:?}");
    }
}
