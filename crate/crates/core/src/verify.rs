//! Sampled Lipschitz and co-Lipschitz certificates, local injectivity,
//! discreteness and the duality and composition checks.
//!
//! Every estimate here is one-sided: a sampled supremum bounds the true
//! Lipschitz constant from below, and a passing co-Lipschitz sample set is
//! evidence, not proof. Failing certificates carry a witness that can be
//! re-evaluated independently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homeo::PlaneHomeomorphism;
use crate::planemap::{Identity, Inverse, PlaneMap, Scaling};
use crate::poly::Complex;
use crate::quotient::QuotientMap;
use crate::sampling::{ball_offset, disc_point, stream, unit};

/// Relative slack on the strong co-Lipschitz inequality.
pub const STRONG_SLACK: f64 = 1e-9;
/// Shrink searches give up below this multiple of the scale.
pub const SHRINK_FLOOR: f64 = 1e-8;
pub const MIN_LIP_SAMPLES: usize = 100;
pub const MIN_TARGETS: usize = 64;

/// A map whose local fibers can be solved exactly.
pub trait FiberMap: PlaneMap {
    /// Offsets `δ` with `F(x + δ) - F(x) = Δw`.
    fn fiber_offsets(&self, x: Complex, dw: Complex) -> Result<Vec<Complex>>;
}

impl FiberMap for QuotientMap {
    fn fiber_offsets(&self, x: Complex, dw: Complex) -> Result<Vec<Complex>> {
        QuotientMap::fiber_offsets(self, x, dw)
    }
}

impl FiberMap for Identity {
    fn fiber_offsets(&self, _x: Complex, dw: Complex) -> Result<Vec<Complex>> {
        Ok(vec![dw])
    }
}

impl FiberMap for Scaling {
    fn fiber_offsets(&self, _x: Complex, dw: Complex) -> Result<Vec<Complex>> {
        Ok(vec![dw / self.0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    /// Largest sampled difference quotient (a lower bound for the true constant).
    pub value: f64,
    pub samples: usize,
    pub region: String,
    /// `(value - value over the first half of the samples) / value`.
    pub refinement_delta: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoLipMode {
    StrongInequality,
    BallInclusion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoLipschitzCertificate {
    pub center: Complex,
    pub radius: f64,
    pub constant: f64,
    pub mode: CoLipMode,
    pub pass: bool,
    /// Violating point `y` (strong mode) or uncovered target `w` (ball mode).
    pub witness: Option<Complex>,
    /// `y - x` or `w - F(x)` for the witness, kept exact for re-checking.
    pub witness_offset: Option<Complex>,
    pub samples: usize,
    pub seed: u64,
}

impl CoLipschitzCertificate {
    /// Re-evaluates the witness. True when it is still a violation.
    pub fn witness_holds<F: FiberMap + ?Sized>(&self, f: &F) -> Result<bool> {
        let Some(offset) = self.witness_offset else {
            return Ok(false);
        };
        Ok(match self.mode {
            CoLipMode::StrongInequality => {
                f.displacement(self.center, offset).norm() < self.constant * offset.norm() * (1.0 - STRONG_SLACK)
            }
            CoLipMode::BallInclusion => !f
                .fiber_offsets(self.center, offset)?
                .iter()
                .any(|d| d.norm() < self.radius),
        })
    }

    /// Witness check for maps without exact fibers (strong mode only).
    pub fn strong_witness_holds<F: PlaneMap + ?Sized>(&self, f: &F) -> bool {
        match (self.mode, self.witness_offset) {
            (CoLipMode::StrongInequality, Some(d)) => {
                f.displacement(self.center, d).norm() < self.constant * d.norm() * (1.0 - STRONG_SLACK)
            }
            _ => false,
        }
    }
}

fn check_samples(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!("{what} needs at least {min} samples, got {n}")));
    }
    Ok(())
}

/// Largest `|F(y) - F(x)| / |y - x|` over `n` sampled `y ∈ B_ρ(x)`.
pub fn pointwise_lip_estimate<F: PlaneMap + ?Sized>(
    f: &F,
    x: Complex,
    rho: f64,
    n: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    check_samples(n, MIN_LIP_SAMPLES, "pointwise Lipschitz estimate")?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {rho}")));
    }
    let mut rng = stream(seed, 0);
    let mut value: f64 = 0.0;
    let mut half: f64 = 0.0;
    for i in 0..n {
        let d = ball_offset(&mut rng, rho);
        value = value.max(f.displacement(x, d).norm() / d.norm());
        if i + 1 == n / 2 {
            half = value;
        }
    }
    Ok(LipschitzEstimate {
        value,
        samples: n,
        region: format!("B({x}, {rho:e})"),
        refinement_delta: if value > 0.0 { (value - half) / value } else { 0.0 },
        seed,
    })
}

/// Smallest sampled `|F(y) - F(x)| / |y - x|` over `n` points of `B_ρ(x)`,
/// with the offset attaining it.
pub fn local_colip_ratio<F: PlaneMap + ?Sized>(f: &F, x: Complex, rho: f64, n: usize, seed: u64) -> (f64, Complex) {
    let mut rng = stream(seed, 0);
    let mut best = (f64::INFINITY, Complex::new(0.0, 0.0));
    for _ in 0..n {
        let d = ball_offset(&mut rng, rho);
        let ratio = f.displacement(x, d).norm() / d.norm();
        if ratio < best.0 {
            best = (ratio, d);
        }
    }
    best
}

/// Empirical local co-Lipschitz ratio on `B_ρ(x)`: the smaller of the
/// sampled ratio and refined circle minima at radii `ρ, ρ/10, …, ρ·1e-6`.
/// Random directions alone miss thin directions of strong contraction.
pub fn local_colip_constant<F: PlaneMap + ?Sized>(f: &F, x: Complex, rho: f64, n: usize, seed: u64) -> f64 {
    let (sampled, _) = local_colip_ratio(f, x, rho, n, seed);
    (0..=6)
        .map(|k| circle_min_ratio(f, x, rho * 10f64.powi(-k), 256))
        .fold(sampled, f64::min)
}

/// Passes iff `|F(y) - F(x)| >= c|y - x|(1 - 1e-9)` at `n` sampled `y ∈ B_ρ(x)`.
pub fn strong_colip_check<F: PlaneMap + ?Sized>(
    f: &F,
    x: Complex,
    c: f64,
    rho: f64,
    n: usize,
    seed: u64,
) -> CoLipschitzCertificate {
    let mut rng = stream(seed, 0);
    let mut witness = None;
    for _ in 0..n {
        let d = ball_offset(&mut rng, rho);
        if f.displacement(x, d).norm() < c * d.norm() * (1.0 - STRONG_SLACK) {
            witness = Some(d);
            break;
        }
    }
    CoLipschitzCertificate {
        center: x,
        radius: rho,
        constant: c,
        mode: CoLipMode::StrongInequality,
        pass: witness.is_none(),
        witness: witness.map(|d| x + d),
        witness_offset: witness,
        samples: n,
        seed,
    }
}

/// Halves `ρ` from `rho0` until `pred(ρ)` holds; `None` once `ρ < 1e-8·scale`.
pub fn shrink_search(rho0: f64, scale: f64, mut pred: impl FnMut(f64) -> bool) -> Option<f64> {
    let mut rho = rho0;
    while rho >= SHRINK_FLOOR * scale {
        if pred(rho) {
            return Some(rho);
        }
        rho /= 2.0;
    }
    None
}

/// Strong check with `ρ` found by shrink search; on failure the certificate
/// of the smallest radius tried is returned.
pub fn strong_colip_shrink<F: PlaneMap + ?Sized>(
    f: &F,
    x: Complex,
    c: f64,
    rho0: f64,
    n: usize,
    seed: u64,
) -> CoLipschitzCertificate {
    let scale = rho0.max(f64::MIN_POSITIVE);
    let mut last = None;
    shrink_search(rho0, scale, |rho| {
        let cert = strong_colip_check(f, x, c, rho, n, seed);
        let pass = cert.pass;
        last = Some(cert);
        pass
    });
    last.expect("shrink search tries at least one radius")
}

/// Checks `B_{cr}(F(x)) ⊆ F(B_r(x))` on `m` targets of the boundary circle of
/// radius `cr(1 - 1e-6)` and `m/4` interior targets, via exact local fibers.
pub fn ball_inclusion_check<F: FiberMap + ?Sized>(
    f: &F,
    x: Complex,
    r: f64,
    c: f64,
    m: usize,
    seed: u64,
) -> Result<CoLipschitzCertificate> {
    check_samples(m, MIN_TARGETS, "ball inclusion check")?;
    if !(r > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument(format!("need r, c > 0, got r = {r}, c = {c}")));
    }
    let mut rng = stream(seed, 0);
    let rim = c * r * (1.0 - 1e-6);
    let phase = unit(&mut rng);
    let mut targets: Vec<Complex> = (0..m)
        .map(|k| rim * phase * Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect();
    targets.extend((0..m / 4).map(|_| disc_point(&mut rng, rim)));
    let mut witness = None;
    for dw in &targets {
        let covered = f.fiber_offsets(x, *dw)?.iter().any(|d| d.norm() < r);
        if !covered {
            witness = Some(*dw);
            break;
        }
    }
    Ok(CoLipschitzCertificate {
        center: x,
        radius: r,
        constant: c,
        mode: CoLipMode::BallInclusion,
        pass: witness.is_none(),
        witness: witness.map(|dw| f.eval(x) + dw),
        witness_offset: witness,
        samples: targets.len(),
        seed,
    })
}

/// Whether exactly one point of the fiber through `x` lies within `ρ` of `x`.
pub fn local_injectivity_check(q: &QuotientMap, x: Complex, rho: f64) -> Result<bool> {
    let offsets = q.fiber_offsets(x, Complex::new(0.0, 0.0))?;
    Ok(offsets.iter().filter(|d| d.norm() < rho).count() == 1)
}

/// Whether `F₂⁻¹(w)` is finite (at most `deg P` points) with distinct points.
pub fn discreteness_check(q: &QuotientMap, w: Complex) -> Result<bool> {
    let fiber = q.fiber(w)?;
    let min_gap = fiber
        .iter()
        .enumerate()
        .flat_map(|(i, a)| fiber[i + 1..].iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    Ok(!fiber.is_empty() && fiber.len() <= q.degree() && min_gap > 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityOutcome {
    pub holds: bool,
    pub strong: CoLipschitzCertificate,
    /// Estimated pointwise Lipschitz constant of `h⁻¹` at `h(x)`, when the strong check passed.
    pub inverse_estimate: Option<LipschitzEstimate>,
}

/// If `h` passes the strong `c` check on `B_ρ(x)`, the sampled Lipschitz
/// constant of `h⁻¹` on `B_{cρ/2}(h(x))` must not exceed `(1/c)(1 + 1e-6)`.
pub fn inverse_duality_check<H: PlaneMap + ?Sized, G: PlaneMap + ?Sized>(
    h: &H,
    h_inv: &G,
    x: Complex,
    c: f64,
    rho: f64,
    n: usize,
    seed: u64,
) -> Result<DualityOutcome> {
    let hx = h.eval(x);
    // round trip in the image, where it is well conditioned
    let back = h.eval(h_inv.eval(hx));
    if (back - hx).norm() > 1e-9 * hx.norm().max(1.0) {
        return Err(Error::RoundTrip {
            point: x.to_string(),
            error: (back - hx).norm(),
        });
    }
    let strong = strong_colip_check(h, x, c, rho, n, seed);
    if !strong.pass {
        return Ok(DualityOutcome {
            holds: true,
            strong,
            inverse_estimate: None,
        });
    }
    let est = pointwise_lip_estimate(h_inv, hx, c * rho / 2.0, n, seed.wrapping_add(1))?;
    Ok(DualityOutcome {
        holds: est.value <= (1.0 / c) * (1.0 + 1e-6),
        strong,
        inverse_estimate: Some(est),
    })
}

/// Duality check on `h₁` with `c` set from the sampled local co-Lipschitz ratio.
pub fn h1_duality_check(h1: &PlaneHomeomorphism, x: Complex, n: usize, seed: u64) -> Result<DualityOutcome> {
    let rho = 1e-3 * x.norm().max(1.0);
    let c = local_colip_constant(h1, x, rho, n, seed) * (1.0 - 1e-3);
    inverse_duality_check(h1, &Inverse(h1), x, c, rho, n, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionOutcome {
    /// Local co-Lipschitz constant of `h₁` at `x`, from the inverse estimate.
    pub a: f64,
    /// Half the minimum of `|P'|` on a small disc around `h₁(x)`.
    pub b: f64,
    pub certificate: CoLipschitzCertificate,
}

/// Checks that `F₁` is strongly `0.9·a·b`-co-Lipschitz at `x`, where `a` is
/// the local co-Lipschitz constant of `h₁` and `b` that of `P` at `h₁(x)`.
/// `constant_override` replaces `0.9·a·b` for falsification runs.
pub fn composition_colip_check(
    q: &QuotientMap,
    x: Complex,
    n: usize,
    seed: u64,
    constant_override: Option<f64>,
) -> Result<CompositionOutcome> {
    let h1 = &q.h1;
    let hx = h1.eval(x);
    let rho_a = 1e-6 * hx.norm().max(1.0);
    let inv = pointwise_lip_estimate(&Inverse(h1), hx, rho_a, n, seed)?;
    let a = 1.0 / inv.value;
    let dp = q.p.derivative();
    let mut rng = stream(seed, 1);
    let mut min_dp = dp.eval(hx).norm();
    for _ in 0..n {
        min_dp = min_dp.min(dp.eval(hx + disc_point(&mut rng, rho_a)).norm());
    }
    let b = 0.5 * min_dp;
    let c = constant_override.unwrap_or(0.9 * a * b);
    let rho0 = 1e-3 * x.norm().max(1.0);
    let certificate = strong_colip_shrink(&q.f1_map(), x, c, rho0, n, seed.wrapping_add(2));
    Ok(CompositionOutcome { a, b, certificate })
}

/// Smallest `|F(x + r e^{iθ}) - F(x)| / r` over a dense angle grid refined
/// by golden-section search around the best grid points.
pub fn circle_min_ratio<F: PlaneMap + ?Sized>(f: &F, x: Complex, r: f64, grid: usize) -> f64 {
    let tau = std::f64::consts::TAU;
    let g = |theta: f64| f.displacement(x, Complex::from_polar(r, theta)).norm() / r;
    let values: Vec<f64> = (0..grid).map(|k| g(tau * k as f64 / grid as f64)).collect();
    let mut order: Vec<usize> = (0..grid).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let step = tau / grid as f64;
    let mut best = values[order[0]];
    for &k in order.iter().take(4) {
        let (mut lo, mut hi) = (tau * k as f64 / grid as f64 - step, tau * k as f64 / grid as f64 + step);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        let (mut fa, mut fb) = (g(a), g(b));
        // strongly anisotropic maps have minima only ~1e-11 rad wide
        while hi - lo > 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            if fa < fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = g(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = g(b);
            }
        }
        best = best.min(fa).min(fb);
    }
    best
}

/// Sampled global Lipschitz estimate of a quotient map over pairs anchored
/// round-robin at the origin and each critical point, with anchor distances
/// log-uniform up to `10·2ⁿRⁿ` and steps log-uniform in `[1e-6, 1]` relative.
pub fn global_lip_estimate(q: &QuotientMap, pairs: usize, seed: u64) -> Result<LipschitzEstimate> {
    check_samples(pairs, MIN_LIP_SAMPLES, "global Lipschitz estimate")?;
    let outer = q.consts.as_ref().map_or(10.0, |k| k.outer);
    let mut anchors = vec![Complex::new(0.0, 0.0)];
    anchors.extend(q.cps.iter().map(|cp| cp.z));
    let hi = 10.0 * outer;
    let ratios: Vec<f64> = {
        use rayon::prelude::*;
        (0..pairs)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i as u64);
                let anchor = anchors[i % anchors.len()];
                let t = crate::sampling::log_uniform(&mut rng, 1e-3, hi);
                let x = anchor + t * unit(&mut rng);
                let step = t.max(1e-3) * crate::sampling::log_uniform(&mut rng, 1e-6, 1.0);
                let d = step * unit(&mut rng);
                q.displacement_f2(x, d).norm() / d.norm()
            })
            .collect()
    };
    let value = ratios.iter().copied().fold(0.0, f64::max);
    let half = ratios[..pairs / 2].iter().copied().fold(0.0, f64::max);
    Ok(LipschitzEstimate {
        value,
        samples: pairs,
        region: format!("|z - anchor| <= {hi:e}"),
        refinement_delta: if value > 0.0 { (value - half) / value } else { 0.0 },
        seed,
    })
}
