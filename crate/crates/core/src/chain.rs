//! Grid estimates of the final constants `ξ`, `L`, `c₀ … c₃` and `c`.
//!
//! None of these has a closed form, so each is a grid minimum or maximum
//! and the grid density travels with the numbers.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homeo::RadialProfile;
use crate::poly::Complex;
use crate::quotient::QuotientMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridDensity {
    pub radial: usize,
    pub angular: usize,
    /// Samples on each excluded circle `|ζ - z_j| = r/2`.
    pub per_circle: usize,
}

impl Default for GridDensity {
    fn default() -> Self {
        Self {
            radial: 400,
            angular: 720,
            per_circle: 2048,
        }
    }
}

/// Constants for the monic `Q`; those of `P = aQ` scale by `|a|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantChain {
    /// Half the minimum of `|Q'|` on the closure of `h₁(U₂ \ W)`.
    pub xi: f64,
    /// Where the minimum of `|Q'|` was found.
    pub xi_at: Complex,
    /// Largest pointwise Lipschitz constant of `h₁⁻¹` over `h₁(U₂)`.
    pub big_l: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c: f64,
    pub grid: GridDensity,
}

impl ConstantChain {
    pub fn estimate(q: &QuotientMap, grid: GridDensity) -> Result<Self> {
        let (Some(consts), Some(profile)) = (q.consts.as_ref(), q.h1.profile.as_ref()) else {
            return Err(Error::InvalidArgument("linear polynomial: no constant chain".into()));
        };
        if grid.radial < 2 || grid.angular < 3 || grid.per_circle < 3 {
            return Err(Error::InvalidArgument(format!("grid too coarse: {grid:?}")));
        }
        let s_max = profile.phi(consts.u2)?;
        let dq = q.q.derivative();
        let hole = consts.r / 2.0;
        let outside_w = |z: Complex| q.cps.iter().all(|cp| (z - cp.z).norm() >= hole);

        let mut best = (f64::INFINITY, Complex::new(0.0, 0.0));
        let mut visit = |z: Complex| {
            let v = dq.eval(z).norm();
            if v < best.0 {
                best = (v, z);
            }
        };
        if outside_w(Complex::new(0.0, 0.0)) {
            visit(Complex::new(0.0, 0.0));
        }
        for i in 1..=grid.radial {
            let t = s_max * i as f64 / grid.radial as f64;
            for k in 0..grid.angular {
                let z = Complex::from_polar(t, TAU * k as f64 / grid.angular as f64);
                if outside_w(z) {
                    visit(z);
                }
            }
        }
        for cp in &q.cps {
            for k in 0..grid.per_circle {
                let z = cp.z + Complex::from_polar(hole, TAU * k as f64 / grid.per_circle as f64);
                if q.cps.iter().all(|o| (z - o.z).norm() >= hole * (1.0 - 1e-12)) {
                    visit(z);
                }
            }
        }
        let xi = best.0 / 2.0;
        let big_l = inverse_lipschitz_bound(profile, s_max, grid.radial * 10);
        let c0 = xi / big_l;
        let c1 = c0.min(0.5);
        let c2 = consts.c2.unwrap_or(f64::INFINITY);
        let c3 = c0.min(c2);
        Ok(Self {
            xi,
            xi_at: best.1,
            big_l,
            c0,
            c1,
            c2,
            c3,
            c: c1.min(c2).min(c3),
            grid,
        })
    }
}

/// Grid maximum over `s ∈ (0, s_max]` of the radial slopes of `φ⁻¹` on both
/// sides of `s` and the tangential stretch `φ⁻¹(s)/s`.
fn inverse_lipschitz_bound(profile: &RadialProfile, s_max: f64, steps: usize) -> f64 {
    let mut l: f64 = 1.0;
    for i in 1..=steps {
        let s = s_max * i as f64 / steps as f64;
        let ds = 1e-7 * s;
        let up = profile.phi_inv_diff(s, ds) / ds;
        let down = -profile.phi_inv_diff(s, -ds) / ds;
        let tangential = profile.phi_inv(s).unwrap_or(s) / s;
        l = l.max(up).max(down).max(tangential);
    }
    for s in [profile.big_r, 2.0 * profile.big_r] {
        if s <= s_max {
            let ds = 1e-7 * s;
            l = l.max(profile.phi_inv_diff(s, ds) / ds).max(-profile.phi_inv_diff(s, -ds) / ds);
        }
    }
    l
}
