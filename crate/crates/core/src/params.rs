//! Construction constants: the tail radii `D_k`, the outer radius `R`, the
//! critical-ball radius `r`, the per-point `ε_j` and `α_j`, and the region
//! geometry they induce.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::critical::CriticalPoint;
use crate::error::{Error, Result};
use crate::poly::{Complex, Polynomial};

/// Multiplicative margin turning strict inequalities into attained ones.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Point where `t^{k/n}` becomes `eps/2`-Lipschitz: `(2k/(n eps))^{n/(n-k)}`.
pub fn lipschitz_tail_threshold(k: usize, n: usize, eps: f64) -> Result<f64> {
    if k >= n {
        return Err(Error::InvalidArgument(format!("need k < n, got k = {k}, n = {n}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let (k, n) = (k as f64, n as f64);
    Ok((2.0 * k / (n * eps)).powf(n / (n - k)))
}

/// `D_k` for the coefficient `a_k` of a monic degree-`n` polynomial; zero when `a_k = 0`.
pub fn compute_dk(k: usize, n: usize, a_k: Complex) -> Result<f64> {
    if k >= n {
        return Err(Error::InvalidArgument(format!("need k < n, got k = {k}, n = {n}")));
    }
    if a_k == Complex::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let eps = 1.0 / (2.0 * n as f64 * a_k.norm());
    let tail = lipschitz_tail_threshold(k, n, eps)?;
    let exponent = n as f64 / (n - k) as f64;
    let strict = (2.0 * (k + 1) as f64 / eps).powf(exponent) * (1.0 + STRICT_MARGIN);
    Ok(tail.max(strict))
}

/// `R = max(2, 1 + max D_k, 2(1 + max |z_j|))`.
pub fn choose_big_r(q: &Polynomial, cps: &[CriticalPoint]) -> Result<f64> {
    let n = q.degree();
    let mut d_max: f64 = 0.0;
    for k in 0..n {
        d_max = d_max.max(compute_dk(k, n, q.coeffs()[k])?);
    }
    let z_max = cps.iter().map(|cp| cp.z.norm()).fold(0.0, f64::max);
    Ok(2f64.max(1.0 + d_max).max(2.0 * (1.0 + z_max)))
}

/// `ε_j = |Q_j(z_j)| / (2(1+n) Σ_{k>=1} |c_{k,j}|)`, or 1 when the sum vanishes or `m_j = n`.
pub fn compute_eps_j(cp: &CriticalPoint, n: usize) -> f64 {
    let tail: f64 = cp.q_coeffs.iter().skip(1).map(|c| c.norm()).sum();
    if n > cp.m && tail != 0.0 {
        cp.q_at_center().norm() / (2.0 * (1.0 + n as f64) * tail)
    } else {
        1.0
    }
}

fn separation(cps: &[CriticalPoint]) -> f64 {
    let mut sep = f64::INFINITY;
    for (i, a) in cps.iter().enumerate() {
        for b in &cps[i + 1..] {
            sep = sep.min((a.z - b.z).norm());
        }
    }
    sep
}

/// The critical-ball radius: a fixed fraction of the separating, containing and
/// `ε_j` bounds, halved until `Σ_{l>=1} |c_{l,j}| r^l <= |c_{0,j}|/2` for all `j`.
pub fn choose_r(n: usize, big_r: f64, cps: &[CriticalPoint]) -> f64 {
    if cps.is_empty() {
        return 0.5;
    }
    let eps_bound = cps
        .iter()
        .map(|cp| compute_eps_j(cp, n).powi(cp.m as i32))
        .fold(f64::INFINITY, f64::min);
    let inside = cps
        .iter()
        .map(|cp| (big_r - cp.z.norm()) / 2.0)
        .fold(f64::INFINITY, f64::min);
    let mut r = 0.5 * 1f64.min(eps_bound).min(separation(cps) / 4.0).min(inside);
    while !cps.iter().all(|cp| quotient_tail_bound(cp, r) <= cp.q_at_center().norm() / 2.0) {
        r /= 2.0;
    }
    r
}

fn quotient_tail_bound(cp: &CriticalPoint, r: f64) -> f64 {
    cp.q_coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(l, c)| c.norm() * r.powi(l as i32))
        .sum()
}

/// Where a point sits relative to the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "region", content = "index")]
pub enum Region {
    /// Closed ball `|z - z_j| <= r`.
    Ball(usize),
    /// `|z| <= R` outside every ball.
    Inner,
    /// `R < |z| < 2ⁿRⁿ`.
    Transition,
    /// `|z| >= 2ⁿRⁿ`.
    Outer,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionConstants {
    pub n: usize,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// `D_0 … D_{n-1}`.
    pub d: Vec<f64>,
    pub r: f64,
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `2ⁿRⁿ`, where the outer form takes over.
    pub outer: f64,
    pub u1: f64,
    pub u2: f64,
    /// `min α_j`, absent when there are no critical points.
    pub c2: Option<f64>,
}

impl ConstructionConstants {
    /// Constants for a monic `q` of degree at least 2 and its critical points.
    pub fn build(q: &Polynomial, cps: &[CriticalPoint]) -> Result<Self> {
        let n = q.degree();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "construction constants need degree >= 2, got {n}"
            )));
        }
        if q.leading() != Complex::new(1.0, 0.0) {
            return Err(Error::InvalidArgument("construction constants need a monic polynomial".into()));
        }
        let d = (0..n)
            .map(|k| compute_dk(k, n, q.coeffs()[k]))
            .collect::<Result<Vec<_>>>()?;
        let big_r = choose_big_r(q, cps)?;
        let r = choose_r(n, big_r, cps);
        let eps = cps.iter().map(|cp| compute_eps_j(cp, n)).collect();
        let alpha: Vec<f64> = cps
            .iter()
            .map(|cp| r.powi(cp.m as i32 - 1) * cp.q_at_center().norm() / 2.0)
            .collect();
        let outer = (2.0 * big_r).powi(n as i32);
        if !(outer * 10.0).is_finite() {
            return Err(Error::Overflow(format!(
                "2^n R^n overflows for n = {n}, R = {big_r}"
            )));
        }
        let c2 = alpha.iter().copied().reduce(f64::min);
        Ok(Self {
            n,
            big_r,
            d,
            r,
            eps,
            alpha,
            outer,
            u1: outer + 1.0,
            u2: outer + 2.0,
            c2,
        })
    }

    pub fn region_of(&self, z: Complex, cps: &[CriticalPoint]) -> Region {
        if let Some(j) = cps.iter().position(|cp| (z - cp.z).norm() <= self.r) {
            return Region::Ball(j);
        }
        let t = z.norm();
        if t <= self.big_r {
            Region::Inner
        } else if t < self.outer {
            Region::Transition
        } else {
            Region::Outer
        }
    }
}

/// Outcome of checking the four properties required of `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusCheck {
    pub disjoint_balls: bool,
    pub inside_big_ball: bool,
    pub below_eps: bool,
    pub quotient_bounded: bool,
    /// Sampled `min |Q_j(y)| / |Q_j(z_j)|` and `max …` over all `j`.
    pub quotient_ratio_range: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

impl RadiusCheck {
    pub fn pass(&self) -> bool {
        self.disjoint_balls && self.inside_big_ball && self.below_eps && self.quotient_bounded
    }
}

/// Checks (i) disjoint closed `2r`-balls, (ii) `V_{2r}` inside `B_R`, (iii)
/// `r <= ε_j^{m_j}` and (iv) `|Q_j(z_j)|/2 <= |Q_j(y)| <= 2|Q_j(z_j)|` on sampled
/// points of `B_r(z_j)`.
pub fn check_choice_of_r(
    consts: &ConstructionConstants,
    cps: &[CriticalPoint],
    samples: usize,
    seed: u64,
) -> RadiusCheck {
    let r = consts.r;
    let disjoint_balls = separation(cps) > 4.0 * r;
    let inside_big_ball = cps.iter().all(|cp| cp.z.norm() + 2.0 * r < consts.big_r);
    let below_eps = cps
        .iter()
        .zip(&consts.eps)
        .all(|(cp, &e)| r <= e.powi(cp.m as i32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for cp in cps {
        let centre = cp.q_at_center().norm();
        for i in 0..samples {
            // every fourth sample on the boundary circle, where |Q_j| is extremal
            let rad = if i % 4 == 0 { r } else { r * rng.gen::<f64>().sqrt() };
            let y = cp.z + Complex::from_polar(rad, rng.gen_range(0.0..TAU));
            let ratio = cp.q_at(y).norm() / centre;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    if cps.is_empty() {
        lo = 1.0;
        hi = 1.0;
    }
    RadiusCheck {
        disjoint_balls,
        inside_big_ball,
        below_eps,
        quotient_bounded: lo >= 0.5 && hi <= 2.0,
        quotient_ratio_range: (lo, hi),
        samples,
        seed,
    }
}
