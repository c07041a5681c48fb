//! `F₁ = P∘h₁` and `F₂ = P∘h₂`, their regional closed forms, and fibers.

use serde::Serialize;

use crate::basemaps::{f_n, g_kn};
use crate::critical::{critical_points, CriticalPoint};
use crate::error::{Error, Result};
use crate::homeo::{PlaneHomeomorphism, RadialProfile};
use crate::params::{ConstructionConstants, Region};
use crate::planemap::PlaneMap;
use crate::poly::{eval_increment, Complex, Polynomial};
use crate::roots::RootFinder;

/// Relative residual every fiber point must reach: `|F₂(z) - w| < FIBER_TOL·(1 + |w|)`.
pub const FIBER_TOL: f64 = 1e-7;

/// Cluster validation tolerance for fibers, far tighter than for critical points.
const FIBER_CLUSTER_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct QuotientMap {
    /// The polynomial as given.
    pub p: Polynomial,
    /// Leading coefficient `a` with `P = a·Q`.
    pub lead: Complex,
    /// Monic `Q = P/a`; the construction is built for `Q`.
    pub q: Polynomial,
    pub cps: Vec<CriticalPoint>,
    /// Absent for linear `P`, where `h` is the identity.
    pub consts: Option<ConstructionConstants>,
    pub h1: PlaneHomeomorphism,
    pub h2: PlaneHomeomorphism,
    #[serde(skip)]
    pub finder: RootFinder,
}

impl QuotientMap {
    pub fn build(p: &Polynomial) -> Result<Self> {
        Self::build_with(p, RootFinder::default())
    }

    pub fn build_with(p: &Polynomial, finder: RootFinder) -> Result<Self> {
        let (lead, q) = p.normalize_monic()?;
        if q.degree() == 1 {
            return Ok(Self {
                p: p.clone(),
                lead,
                q,
                cps: Vec::new(),
                consts: None,
                h1: PlaneHomeomorphism::identity(),
                h2: PlaneHomeomorphism::identity(),
                finder,
            });
        }
        let cps = crate::critical::critical_points_with(&q, &finder)?;
        let consts = ConstructionConstants::build(&q, &cps)?;
        let profile = RadialProfile::new(consts.big_r, consts.n)?;
        Ok(Self {
            p: p.clone(),
            lead,
            h1: PlaneHomeomorphism::h1(profile),
            h2: PlaneHomeomorphism::h2(profile, &cps, consts.r),
            q,
            cps,
            consts: Some(consts),
            finder,
        })
    }

    /// Same map with the critical-ball exponent of `h₂` broken.
    pub fn with_mutated_h2(mut self) -> Self {
        self.h2 = self.h2.mutated();
        self
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    pub fn is_linear(&self) -> bool {
        self.consts.is_none()
    }

    pub fn region_of(&self, z: Complex) -> Region {
        match &self.consts {
            Some(k) => k.region_of(z, &self.cps),
            None => Region::Inner,
        }
    }

    pub fn f1(&self, z: Complex) -> Complex {
        self.p.eval(self.h1.eval(z))
    }

    pub fn f2(&self, z: Complex) -> Complex {
        self.p.eval(self.h2.eval(z))
    }

    /// `a·(a₀ + f_n(z) + Σ_{k=1}^{n-1} a_k g_{k,n}(z))` with `a_k` the monic
    /// coefficients; valid for `|z| >= 2ⁿRⁿ`.
    pub fn f1_outer_form(&self, z: Complex) -> Result<Complex> {
        let Some(k) = &self.consts else {
            return Ok(self.p.eval(z));
        };
        if z.norm() < k.outer {
            return Err(Error::OuterFormDomain {
                modulus: z.norm(),
                threshold: k.outer,
            });
        }
        let n = k.n as u32;
        let a = self.q.coeffs();
        let mut sum = a[0] + f_n(n, z);
        for (kk, &ak) in a.iter().enumerate().take(k.n).skip(1) {
            sum += ak * g_kn(kk as u32, n, z);
        }
        Ok(self.lead * sum)
    }

    /// `a·(Q(z_j) + r^{m-1} f_m(z - z_j) Q_j(h₂(z)))` when `z` lies in a critical ball.
    pub fn f2_ball_form(&self, z: Complex) -> Option<Complex> {
        let Region::Ball(j) = self.region_of(z) else {
            return None;
        };
        let k = self.consts.as_ref()?;
        let cp = &self.cps[j];
        let w = self.h2.eval(z);
        let scaled = k.r.powi(cp.m as i32 - 1) * f_n(cp.m as u32, z - cp.z) * cp.q_at(w);
        Some(self.lead * (cp.p_at_z + scaled))
    }

    /// `F(x + δ) - F(x)` for `F = P∘h` via the Taylor expansion of `P` at `h(x)`.
    fn composed_displacement(&self, h: &PlaneHomeomorphism, x: Complex, delta: Complex) -> Complex {
        let u = h.displacement(x, delta);
        let b = self.p.shifted_expansion(h.eval(x));
        eval_increment(&b, u)
    }

    /// All `z` with `F₂(z) = w`, each distinct point once.
    pub fn fiber(&self, w: Complex) -> Result<Vec<Complex>> {
        let target = self.p.minus_constant(w);
        let roots = self.finder.distinct_roots(&target)?;
        let points: Vec<Complex> = roots.iter().map(|r| self.h2.eval_inv(r.z)).collect();
        for &z in &points {
            let residual = (self.f2(z) - w).norm();
            if !(residual < FIBER_TOL * (1.0 + w.norm())) {
                return Err(Error::FiberResidual {
                    target: w.to_string(),
                    residual,
                });
            }
        }
        Ok(points)
    }

    /// Offsets `δ` with `F₂(x + δ) - F₂(x) = Δw`, each distinct solution once.
    ///
    /// Works in increments throughout, so `Δw` may be far below the
    /// resolution of `F₂(x)`.
    pub fn fiber_offsets(&self, x: Complex, dw: Complex) -> Result<Vec<Complex>> {
        let zeta = self.h2.eval(x);
        let mut b = self.p.shifted_expansion(zeta);
        b[0] = -dw;
        let local = Polynomial::new(b)?;
        // nearby simple roots must stay apart: only exact multiple roots merge
        let finder = RootFinder {
            multiplicity_tol: FIBER_CLUSTER_TOL,
            ..self.finder
        };
        let roots = finder.distinct_roots(&local)?;
        let mut out = Vec::with_capacity(roots.len());
        for r in roots {
            let delta = self.h2.inverse_displacement(x, r.z);
            let got = self.displacement_f2(x, delta);
            let residual = (got - dw).norm();
            // x + δ is only representable to a few ulps of |x| + |δ|
            let ulp = 4.0 * f64::EPSILON * (x.norm() + delta.norm());
            let slack = [Complex::new(ulp, 0.0), Complex::new(0.0, ulp)]
                .iter()
                .map(|&e| (self.displacement_f2(x, delta + e) - got).norm())
                .fold(0.0, f64::max);
            let scale = local.abs_eval(r.z);
            if !(residual <= FIBER_TOL * (f64::MIN_POSITIVE + scale) + slack) {
                return Err(Error::FiberResidual {
                    target: format!("{x} + {dw}"),
                    residual,
                });
            }
            out.push(delta);
        }
        Ok(out)
    }

    pub fn displacement_f1(&self, x: Complex, delta: Complex) -> Complex {
        self.composed_displacement(&self.h1, x, delta)
    }

    pub fn displacement_f2(&self, x: Complex, delta: Complex) -> Complex {
        self.composed_displacement(&self.h2, x, delta)
    }

    /// `F₁` as a [`PlaneMap`].
    pub fn f1_map(&self) -> F1<'_> {
        F1(self)
    }
}

impl PlaneMap for QuotientMap {
    fn eval(&self, z: Complex) -> Complex {
        self.f2(z)
    }

    fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        self.displacement_f2(x, delta)
    }
}

pub struct F1<'a>(pub &'a QuotientMap);

impl PlaneMap for F1<'_> {
    fn eval(&self, z: Complex) -> Complex {
        self.0.f1(z)
    }

    fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        self.0.displacement_f1(x, delta)
    }
}

/// The four test polynomials: `z²`, `z³ - 3z`, `z⁴ + z² + z + 1`, `z³ + (1+i)z + 2`.
pub fn default_corpus() -> Vec<Polynomial> {
    let c = Complex::new;
    vec![
        Polynomial::from_real(&[0.0, 0.0, 1.0]).expect("finite"),
        Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).expect("finite"),
        Polynomial::from_real(&[1.0, 1.0, 1.0, 0.0, 1.0]).expect("finite"),
        Polynomial::new(vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]).expect("finite"),
    ]
}

/// Critical points of the monic part, for callers that only hold `P`.
pub fn monic_critical_points(p: &Polynomial) -> Result<Vec<CriticalPoint>> {
    let (_, q) = p.normalize_monic()?;
    critical_points(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn square() -> QuotientMap {
        QuotientMap::build(&Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap()).unwrap()
    }

    fn stratified(q: &QuotientMap, rng: &mut ChaCha8Rng, i: usize) -> Complex {
        let k = q.consts.as_ref().unwrap();
        match i % 4 {
            0 => {
                let cp = &q.cps[rng.gen_range(0..q.cps.len())];
                cp.z + Complex::from_polar(k.r * rng.gen::<f64>(), rng.gen_range(0.0..TAU))
            }
            1 => Complex::from_polar(k.big_r * rng.gen::<f64>(), rng.gen_range(0.0..TAU)),
            2 => Complex::from_polar(k.big_r * (k.outer / k.big_r).powf(rng.gen::<f64>()), rng.gen_range(0.0..TAU)),
            _ => Complex::from_polar(k.outer * 10f64.powf(rng.gen::<f64>()), rng.gen_range(0.0..TAU)),
        }
    }

    #[test]
    fn square_ball_form_is_half_f2() {
        let q = square();
        for z in [c(0.1, 0.2), c(-0.3, 0.05), c(0.0, -0.45)] {
            let expect = 0.5 * f_n(2, z);
            assert!((q.f2(z) - expect).norm() < 1e-15);
            assert!((q.f2_ball_form(z).unwrap() - expect).norm() < 1e-15);
        }
        assert_eq!(q.f2(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn outer_form_cases() {
        let q = square();
        let z = c(20.0, 0.0);
        assert!((q.f1(z) - z).norm() < 1e-13);
        assert!((q.f1_outer_form(z).unwrap() - z).norm() < 1e-13);
        assert!(matches!(q.f1_outer_form(c(3.0, 0.0)), Err(Error::OuterFormDomain { .. })));
        // no lower coefficients: the outer form is f_n + a_0
        let z3 = QuotientMap::build(&Polynomial::from_real(&[2.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        let w = Complex::from_polar(3.0 * z3.consts.as_ref().unwrap().outer, 0.7);
        assert!((z3.f1_outer_form(w).unwrap() - (f_n(3, w) + 2.0)).norm() < 1e-9 * w.norm());
    }

    #[test]
    fn linear_short_circuit() {
        let q = QuotientMap::build(&Polynomial::from_real(&[5.0, 1.0]).unwrap()).unwrap();
        assert!(q.is_linear());
        assert_eq!(q.f2(c(1.0, 2.0)), c(6.0, 2.0));
        assert_eq!(q.fiber(c(6.0, 2.0)).unwrap(), vec![c(1.0, 2.0)]);
    }

    #[test]
    fn forms_agree_on_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in default_corpus() {
            let q = QuotientMap::build(&p).unwrap();
            let k = q.consts.clone().unwrap();
            for i in 0..4000 {
                let z = stratified(&q, &mut rng, i);
                let direct = q.f2(z);
                if let Some(ball) = q.f2_ball_form(z) {
                    assert!((ball - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
                }
                if z.norm() >= k.outer {
                    let outer = q.f1_outer_form(z).unwrap();
                    assert!((outer - direct).norm() <= 1e-9 * (1.0 + direct.norm()), "{p} {z}");
                }
            }
            for cp in &q.cps {
                for _ in 0..250 {
                    let z = cp.z + Complex::from_polar(k.r, rng.gen_range(0.0..TAU));
                    let (a, b) = (q.f1(z), q.f2(z));
                    assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
                }
            }
        }
    }

    #[test]
    fn non_monic_uses_leading_factor() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]).unwrap();
        let q = QuotientMap::build(&p).unwrap();
        assert_eq!(q.lead, c(0.0, 2.0));
        let z = c(0.01, 0.02);
        assert!((q.f2(z) - p.eval(q.h2.eval(z))).norm() < 1e-15);
        assert!((q.f2_ball_form(z).unwrap() - q.f2(z)).norm() < 1e-14);
    }

    #[test]
    fn square_fibers() {
        let q = square();
        assert_eq!(q.fiber(c(0.0, 0.0)).unwrap(), vec![c(0.0, 0.0)]);
        let mut f = q.fiber(c(1.0, 0.0)).unwrap();
        f.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((f[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((f[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fibers_reproduce_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in default_corpus() {
            let q = QuotientMap::build(&p).unwrap();
            for _ in 0..200 {
                let w = Complex::from_polar(10f64.powf(rng.gen_range(-3.0..12.0)), rng.gen_range(0.0..TAU));
                let fiber = q.fiber(w).unwrap();
                assert!(!fiber.is_empty() && fiber.len() <= p.degree());
                for z in fiber {
                    assert!((q.f2(z) - w).norm() < FIBER_TOL * (1.0 + w.norm()));
                }
            }
        }
    }

    #[test]
    fn offsets_resolve_tiny_targets_far_out() {
        let q = QuotientMap::build(&default_corpus()[2]).unwrap();
        let k = q.consts.clone().unwrap();
        let x = Complex::from_polar(3.0 * k.outer, 0.4);
        let dw = Complex::from_polar(1e-3, 2.0);
        let offsets = q.fiber_offsets(x, dw).unwrap();
        // f_n is 1-co-Lipschitz out here: the nearest offset has length ≈ |Δw|
        let nearest = offsets.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1.1e-3 && nearest > 0.9e-3, "{nearest}");
        for d in offsets.iter().filter(|d| d.norm() < 1.0) {
            let got = q.displacement_f2(x, *d);
            assert!((got - dw).norm() < 1e-9, "{got}");
        }
    }

    #[test]
    fn displacement_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in default_corpus() {
            let q = QuotientMap::build(&p).unwrap();
            for i in 0..2000 {
                let x = stratified(&q, &mut rng, i);
                let delta = Complex::from_polar(x.norm().max(1e-2) * rng.gen_range(0.0..0.3), rng.gen_range(0.0..TAU));
                let direct = q.f2(x + delta) - q.f2(x);
                let stable = q.displacement_f2(x, delta);
                let scale = 1.0 + q.f2(x).norm() + q.f2(x + delta).norm();
                assert!((direct - stable).norm() <= 1e-9 * scale, "{p} {x} {delta}");
            }
        }
    }

    #[test]
    fn offsets_near_critical_point_stay_distinct() {
        let q = QuotientMap::build(&default_corpus()[2]).unwrap();
        // two preimages a few 1e-3 apart next to a critical ball
        let x = c(0.193292485173427, -0.7844763954680916);
        let dw = c(-9.398998687626561e-6, -1.8171405251711836e-5);
        let offsets = q.fiber_offsets(x, dw).unwrap();
        assert_eq!(offsets.len(), 4);
        for d in offsets {
            assert!((q.displacement_f2(x, d) - dw).norm() <= 1e-7 * dw.norm());
        }
    }

    #[test]
    fn offsets_through_contracting_transition() {
        let q = QuotientMap::build(&default_corpus()[2]).unwrap();
        for (x, dw) in [
            (c(-3091.8730198192984, 1155.8179170174676), c(2.564435398462353e-7, 2.364242619151416e-7)),
            (c(1240979362.225783, 931496678.9509091), c(4709729572.634118, -1197958296.3156006)),
        ] {
            assert_eq!(q.fiber_offsets(x, dw).unwrap().len(), 4, "{x}");
        }
    }
}
