//! The acceptance criteria as runnable checks, shared by the command line
//! and the acceptance test target.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::demos;
use crate::error::{Error, Result};
use crate::params::check_choice_of_r;
use crate::planemap::{PlaneMap, Winding};
use crate::poly::{Complex, Polynomial};
use crate::quotient::QuotientMap;
use crate::report::{CheckRecord, CriterionResult, Evidence};
use crate::sampling::{disc_point, log_uniform, stream, unit};
use crate::verify::{
    ball_inclusion_check, circle_min_ratio, composition_colip_check, discreteness_check, global_lip_estimate,
    h1_duality_check, local_colip_constant, local_injectivity_check, strong_colip_check, strong_colip_shrink,
    CoLipschitzCertificate,
};

pub const DEFAULT_SEED: u64 = 20_240_229;
pub const DEFAULT_SAMPLES: usize = 200;
/// Radii of the ball inclusion checks.
pub const INCLUSION_RADII: [f64; 4] = [1e-2, 1e-1, 1.0, 10.0];
/// Relative tolerance of round trips and specialised forms.
pub const FORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Samples per certificate (sampled balls, strong checks).
    pub samples: usize,
    /// Replaces every co-Lipschitz constant of the ball inclusion and strong checks.
    pub force_c: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            force_c: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    All,
    Construction,
    Metric,
    Demos,
}

impl SuiteKind {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            SuiteKind::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
            SuiteKind::Construction => &[2, 3, 6],
            SuiteKind::Metric => &[1, 4, 5, 7],
            SuiteKind::Demos => &[8],
        }
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SuiteKind::All),
            "construction" => Ok(SuiteKind::Construction),
            "metric" => Ok(SuiteKind::Metric),
            "demos" => Ok(SuiteKind::Demos),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite {other:?} (expected all, construction, metric or demos)"
            ))),
        }
    }
}

/// Runs the criteria of `kind` on `maps`, in criterion order.
pub fn run_suite(kind: SuiteKind, maps: &[QuotientMap], opts: &SuiteOptions) -> Result<Vec<CriterionResult>> {
    kind.criteria()
        .iter()
        .map(|&id| match id {
            1 => Ok(criterion1(opts)),
            2 => Ok(criterion2(maps, opts)),
            3 => Ok(criterion3(maps, opts)),
            4 => criterion4(maps, opts).map(|(r, _)| r),
            5 => criterion5(maps, opts).map(|(r, _)| r),
            6 => criterion6(maps, opts),
            7 => criterion7(maps, opts),
            8 => criterion8(maps, opts),
            9 => criterion9(maps, opts),
            _ => unreachable!("criteria ids are 1 to 9"),
        })
        .collect()
}

/// Regions the sample points are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    CriticalPoint,
    BallInterior,
    BallBoundary,
    NearBoundary,
    Inner,
    Transition,
    Outer,
}

impl Stratum {
    fn name(self) -> &'static str {
        match self {
            Stratum::CriticalPoint => "critical_point",
            Stratum::BallInterior => "ball_interior",
            Stratum::BallBoundary => "ball_boundary",
            Stratum::NearBoundary => "near_boundary",
            Stratum::Inner => "inner",
            Stratum::Transition => "transition",
            Stratum::Outer => "outer",
        }
    }
}

/// A point of `stratum`; `index` picks the critical point where one is needed.
pub fn sample_stratum(q: &QuotientMap, stratum: Stratum, index: usize, rng: &mut impl Rng) -> Complex {
    let Some(k) = q.consts.as_ref() else {
        return disc_point(rng, 10.0);
    };
    let cp = q.cps.get(index % q.cps.len().max(1)).map(|cp| cp.z);
    let in_v = |z: Complex| q.cps.iter().any(|cp| (z - cp.z).norm() <= k.r);
    match (stratum, cp) {
        (Stratum::CriticalPoint, Some(z)) => z,
        (Stratum::BallInterior, Some(z)) => z + disc_point(rng, k.r),
        (Stratum::BallBoundary, Some(z)) => z + k.r * unit(rng),
        (Stratum::NearBoundary, Some(z)) => {
            let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            z + k.r * (1.0 + side * log_uniform(rng, 1e-6, 1e-2)) * unit(rng)
        }
        (Stratum::Transition, _) => log_uniform(rng, k.big_r, k.outer) * unit(rng),
        (Stratum::Outer, _) => log_uniform(rng, k.outer, 10.0 * k.outer) * unit(rng),
        _ => loop {
            let z = disc_point(rng, k.big_r);
            if !in_v(z) {
                return z;
            }
        },
    }
}

fn point(z: Complex) -> String {
    format!("({:e}, {:e})", z.re, z.im)
}

fn label(q: &QuotientMap) -> String {
    format!("P = {}", q.p)
}

/// Pass/fail tally of many instances folded into one record.
struct Tally {
    check: &'static str,
    input: String,
    evidence: Evidence,
    seed: u64,
    count: usize,
    failures: usize,
    worst: Option<f64>,
    constant: Option<f64>,
    witness: Option<String>,
}

impl Tally {
    fn new(check: &'static str, input: String, evidence: Evidence, seed: u64) -> Self {
        Self {
            check,
            input,
            evidence,
            seed,
            count: 0,
            failures: 0,
            worst: None,
            constant: None,
            witness: None,
        }
    }

    fn add(&mut self, pass: bool, value: Option<f64>, witness: impl FnOnce() -> String) {
        self.count += 1;
        if let Some(v) = value {
            self.worst = Some(self.worst.map_or(v, |w| w.max(v)));
        }
        if !pass {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn record(self) -> CheckRecord {
        let mut rec = CheckRecord::new(self.check, self.input, self.failures == 0, self.evidence, self.count, self.seed)
            .witness(self.witness);
        rec.value = self.worst;
        rec.constant = self.constant;
        rec
    }
}

/// Winding maps: Lipschitz constant `n` in the annulus and strong 1-co-Lipschitz everywhere.
pub fn criterion1(opts: &SuiteOptions) -> CriterionResult {
    const PAIRS: usize = 10_000;
    const CENTERS: usize = 100;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for n in [2u32, 3, 5] {
        let map = Winding(n);
        let mut rng = stream(opts.seed, n as u64);
        let mut est: f64 = 0.0;
        for _ in 0..PAIRS {
            let x = Complex::from_polar(rng.gen_range(0.25f64..4.0).sqrt(), rng.gen_range(0.0..TAU));
            let mut d = x.norm() * log_uniform(&mut rng, 1e-6, 1e-1) * unit(&mut rng);
            let inside = |y: Complex| (0.5..=2.0).contains(&y.norm());
            if !inside(x + d) {
                d = -d;
            }
            if !inside(x + d) {
                continue;
            }
            est = est.max(map.displacement(x, d).norm() / d.norm());
        }
        let lip_ok = est >= n as f64 - 0.05 && est <= n as f64 + 1e-9;
        records.push(
            CheckRecord::new(
                "c1_winding_lipschitz",
                format!("n = {n}; 1/2 <= |z| <= 2"),
                lip_ok,
                Evidence::LowerBoundEstimate,
                PAIRS,
                opts.seed,
            )
            .value(est),
        );
        let mut tally = Tally::new(
            "c1_winding_strong_colip",
            format!("n = {n}; c = 1"),
            Evidence::FalsificationTest,
            opts.seed,
        );
        tally.constant = Some(1.0);
        for i in 0..CENTERS {
            let mut rng = stream(opts.seed.wrapping_add(n as u64), i as u64);
            let z0 = log_uniform(&mut rng, 1e-3, 1e3) * unit(&mut rng);
            let cert = strong_colip_shrink(&map, z0, 1.0, z0.norm() / 2.0, opts.samples, opts.seed + i as u64);
            tally.add(cert.pass, None, || witness_text(&cert));
        }
        parts.push(format!(
            "n={n}: Lip est {est:.6}, strong 1-co-Lip {}/{CENTERS}",
            CENTERS - tally.failures
        ));
        records.push(tally.record());
    }
    CriterionResult::from_records(1, "archetype constants", parts.join("; "), records)
}

fn witness_text(cert: &CoLipschitzCertificate) -> String {
    match (cert.witness, cert.witness_offset) {
        (Some(w), Some(d)) => format!(
            "center {} radius {:e} c {:e}: witness {} offset {}",
            point(cert.center),
            cert.radius,
            cert.constant,
            point(w),
            point(d)
        ),
        _ => format!("center {} radius {:e}: no witness", point(cert.center), cert.radius),
    }
}

fn rel_err(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Round trips of `h₂`, the specialised forms of `F₁`/`F₂`, and `F₁ = F₂` on `∂V`.
pub fn criterion2(maps: &[QuotientMap], opts: &SuiteOptions) -> CriterionResult {
    const ROUND_TRIPS: usize = 10_000;
    const FORMS: usize = 1_000;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for (qi, q) in maps.iter().enumerate() {
        if q.consts.is_none() {
            records.push(CheckRecord::new(
                "c2_round_trip",
                format!("{}; linear", label(q)),
                true,
                Evidence::Computed,
                0,
                opts.seed,
            ));
            continue;
        }
        let h = &q.h2;
        let strata = [
            Stratum::BallInterior,
            Stratum::BallBoundary,
            Stratum::Inner,
            Stratum::Transition,
            Stratum::Outer,
        ];
        let mut fwd = Tally::new("c2_round_trip", format!("{}; h2(h2^-1(z))", label(q)), Evidence::FalsificationTest, opts.seed);
        let mut back = Tally::new("c2_round_trip", format!("{}; h2^-1(h2(z))", label(q)), Evidence::FalsificationTest, opts.seed);
        let (mut raw_fwd, mut raw_back): (f64, f64) = (0.0, 0.0);
        let mut rng = stream(opts.seed, 100 + qi as u64);
        for i in 0..ROUND_TRIPS {
            let z = sample_stratum(q, strata[i % strata.len()], i, &mut rng);
            let scale = z.norm().max(1.0);
            let e1 = (h.eval(h.eval_inv(z)) - z).norm();
            raw_fwd = raw_fwd.max(e1);
            fwd.add(e1 <= FORM_TOL * scale, Some(e1 / scale), || format!("z = {} error {e1:e}", point(z)));
            let w = h.eval(z);
            let budget = scale.max(h.inverse_stretch(w) * w.norm().max(1.0));
            let e2 = (h.eval_inv(w) - z).norm();
            raw_back = raw_back.max(e2);
            back.add(e2 <= FORM_TOL * budget, Some(e2 / budget), || format!("z = {} error {e2:e}", point(z)));
        }
        records.push(fwd.record());
        records.push(back.record());

        let mut ball = Tally::new("c2_ball_form", label(q), Evidence::FalsificationTest, opts.seed);
        let mut outer = Tally::new("c2_outer_form", label(q), Evidence::FalsificationTest, opts.seed);
        let mut seam = Tally::new("c2_f1_equals_f2_on_boundary", label(q), Evidence::FalsificationTest, opts.seed);
        for i in 0..FORMS {
            let z = sample_stratum(q, Stratum::BallInterior, i, &mut rng);
            let direct = q.f2(z);
            match q.f2_ball_form(z) {
                Some(v) => {
                    let e = rel_err(v, direct);
                    ball.add(e <= FORM_TOL, Some(e), || format!("z = {} error {e:e}", point(z)));
                }
                None => ball.add(false, None, || format!("z = {} not in a ball", point(z))),
            }
            let z = sample_stratum(q, Stratum::Outer, i, &mut rng);
            let direct = q.f1(z);
            match q.f1_outer_form(z) {
                Ok(v) => {
                    let e = rel_err(v, direct);
                    outer.add(e <= FORM_TOL, Some(e), || format!("z = {} error {e:e}", point(z)));
                }
                Err(err) => outer.add(false, None, || format!("z = {}: {err}", point(z))),
            }
            let z = sample_stratum(q, Stratum::BallBoundary, i, &mut rng);
            let e = rel_err(q.f2(z), q.f1(z));
            seam.add(e <= FORM_TOL, Some(e), || format!("z = {} error {e:e}", point(z)));
        }
        parts.push(format!(
            "{}: round trip raw max {raw_fwd:.1e}/{raw_back:.1e}, forms {:.1e}/{:.1e}, seam {:.1e}",
            q.p,
            ball.worst.unwrap_or(f64::NAN),
            outer.worst.unwrap_or(f64::NAN),
            seam.worst.unwrap_or(f64::NAN)
        ));
        records.extend([ball.record(), outer.record(), seam.record()]);
    }
    CriterionResult::from_records(2, "construction soundness", parts.join("; "), records)
}

fn is_poly(q: &QuotientMap, coeffs: &[f64]) -> bool {
    Polynomial::from_real(coeffs).is_ok_and(|p| p == q.p)
}

/// The radius checker on every map, and the closed-form constants of `z³ - 3z`.
pub fn criterion3(maps: &[QuotientMap], opts: &SuiteOptions) -> CriterionResult {
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for q in maps {
        let Some(k) = q.consts.as_ref() else { continue };
        let rc = check_choice_of_r(k, &q.cps, 1000, opts.seed);
        records.push(
            CheckRecord::new("c3_choice_of_r", label(q), rc.pass(), Evidence::FalsificationTest, rc.samples, opts.seed)
                .constant(k.r)
                .witness((!rc.pass()).then(|| format!("{rc:?}"))),
        );
        parts.push(format!("{}: r = {:e} {}", q.p, k.r, if rc.pass() { "ok" } else { "FAILED" }));
        if is_poly(q, &[0.0, -3.0, 0.0, 1.0]) {
            let r = 9.0 / 128.0;
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
            let ok = close(k.r, r)
                && k.eps.iter().all(|&e| close(e, 3.0 / 8.0))
                && k.alpha.iter().all(|&a| close(a, 1.5 * r));
            records.push(
                CheckRecord::new("c3_closed_form_constants", label(q), ok, Evidence::Computed, 1, opts.seed)
                    .constant(k.r)
                    .witness((!ok).then(|| format!("eps {:?} r {:e} alpha {:?}", k.eps, k.r, k.alpha))),
            );
        }
    }
    CriterionResult::from_records(3, "constant ledger", parts.join("; "), records)
}

/// Global sampled Lipschitz estimates; returns them alongside the result.
pub fn criterion4(maps: &[QuotientMap], opts: &SuiteOptions) -> Result<(CriterionResult, Vec<f64>)> {
    const PAIRS: usize = 100_000;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    let mut estimates = Vec::new();
    for q in maps {
        let est = global_lip_estimate(q, PAIRS, opts.seed)?;
        let ok = est.value.is_finite() && est.value > 0.0 && est.refinement_delta < 0.05;
        records.push(
            CheckRecord::new("c4_global_lipschitz", label(q), ok, Evidence::LowerBoundEstimate, PAIRS, opts.seed)
                .value(est.value)
                .witness((!ok).then(|| format!("refinement change {:.3}", est.refinement_delta))),
        );
        parts.push(format!("{}: L ~ {:.6e} (doubling change {:.2}%)", q.p, est.value, 100.0 * est.refinement_delta));
        estimates.push(est.value);
    }
    Ok((CriterionResult::from_records(4, "Lipschitzness of F2", parts.join("; "), records), estimates))
}

/// Centers for the co-Lipschitz checks: each critical point, then fixed
/// shares of the other strata.
pub fn colip_centers(q: &QuotientMap, count: usize, seed: u64) -> Vec<(Stratum, Complex)> {
    let mut out: Vec<(Stratum, Complex)> = q.cps.iter().map(|cp| (Stratum::CriticalPoint, cp.z)).collect();
    let plan: &[(Stratum, usize)] = if q.consts.is_some() {
        &[
            (Stratum::BallBoundary, 30),
            (Stratum::NearBoundary, 30),
            (Stratum::BallInterior, 20),
            (Stratum::Inner, 30),
            (Stratum::Transition, 45),
        ]
    } else {
        &[]
    };
    let mut rng = stream(seed, 7);
    for &(s, k) in plan {
        for i in 0..k {
            if out.len() < count {
                out.push((s, sample_stratum(q, s, i, &mut rng)));
            }
        }
    }
    let mut i = 0;
    while out.len() < count {
        let s = if q.consts.is_some() { Stratum::Outer } else { Stratum::Inner };
        out.push((s, sample_stratum(q, s, i, &mut rng)));
        i += 1;
    }
    out
}

/// Small radius at which local constants are measured around `x`.
fn local_radius(q: &QuotientMap) -> f64 {
    q.consts.as_ref().map_or(1e-2, |k| 1e-2 * k.r)
}

/// Half the empirical local constant at `x`: the smaller of the local
/// strong-inequality ratio and, for each inclusion radius `r`, the inclusion
/// radius certified by circles, `max_{r' <= r} min_θ |F(x + r'e^{iθ}) - F(x)| / r`.
/// The ball of that radius about `F(x)` avoids `F(∂B_{r'}(x))`, so by the
/// winding number it lies in `F(B_r(x))`.
pub fn empirical_colip_constant(q: &QuotientMap, x: Complex, samples: usize, seed: u64) -> f64 {
    let local = local_colip_constant(q, x, local_radius(q), samples, seed);
    let inclusion = INCLUSION_RADII
        .iter()
        .map(|&r| {
            (0..12)
                .map(|k| {
                    let rr = r * 0.5f64.powi(k);
                    circle_min_ratio(q, x, rr, 256) * rr / r
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    0.5 * local.min(inclusion)
}

struct CenterOutcome {
    stratum: Stratum,
    ball: Vec<CoLipschitzCertificate>,
    strong: CoLipschitzCertificate,
}

/// Ball inclusion and strong checks at 200 stratified centers per map.
/// Also returns every failing certificate for re-checking.
pub fn criterion5(
    maps: &[QuotientMap],
    opts: &SuiteOptions,
) -> Result<(CriterionResult, Vec<(usize, CoLipschitzCertificate)>)> {
    const CENTERS: usize = 200;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    let mut failing = Vec::new();
    for (qi, q) in maps.iter().enumerate() {
        let centers = colip_centers(q, CENTERS, opts.seed.wrapping_add(qi as u64));
        let outcomes: Vec<CenterOutcome> = centers
            .par_iter()
            .enumerate()
            .map(|(i, &(stratum, x))| -> Result<CenterOutcome> {
                let seed = opts.seed.wrapping_add(1000 * qi as u64 + i as u64);
                let c = match opts.force_c {
                    Some(c) => c,
                    None => empirical_colip_constant(q, x, opts.samples, seed),
                };
                if !(c > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "non-positive local constant {c:e} at {}",
                        point(x)
                    )));
                }
                let ball = INCLUSION_RADII
                    .iter()
                    .map(|&r| ball_inclusion_check(q, x, r, c, 64, seed))
                    .collect::<Result<Vec<_>>>()?;
                let strong = strong_colip_shrink(q, x, c, local_radius(q), opts.samples, seed);
                Ok(CenterOutcome { stratum, ball, strong })
            })
            .collect::<Result<_>>()?;
        let mut strata: Vec<Stratum> = outcomes.iter().map(|o| o.stratum).collect();
        strata.sort();
        strata.dedup();
        let mut min_c = f64::INFINITY;
        for s in strata {
            let mut ball = Tally::new("c5_ball_inclusion", format!("{}; {}", label(q), s.name()), Evidence::FalsificationTest, opts.seed);
            let mut strong = Tally::new("c5_strong_colip", format!("{}; {}", label(q), s.name()), Evidence::FalsificationTest, opts.seed);
            for o in outcomes.iter().filter(|o| o.stratum == s) {
                for cert in &o.ball {
                    min_c = min_c.min(cert.constant);
                    ball.add(cert.pass, None, || witness_text(cert));
                    if !cert.pass {
                        failing.push((qi, cert.clone()));
                    }
                }
                strong.add(o.strong.pass, None, || witness_text(&o.strong));
                if !o.strong.pass {
                    failing.push((qi, o.strong.clone()));
                }
            }
            records.push(ball.record());
            records.push(strong.record());
        }
        let fails = outcomes
            .iter()
            .filter(|o| !o.strong.pass || o.ball.iter().any(|c| !c.pass))
            .count();
        parts.push(format!("{}: {}/{} centers pass, min c {min_c:.3e}", q.p, centers.len() - fails, centers.len()));
    }
    Ok((
        CriterionResult::from_records(5, "co-Lipschitzness of F2", parts.join("; "), records),
        failing,
    ))
}

/// Local injectivity away from `E` and discreteness of fibers.
pub fn criterion6(maps: &[QuotientMap], opts: &SuiteOptions) -> Result<CriterionResult> {
    const POINTS: usize = 100;
    const TARGETS: usize = 1_000;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for (qi, q) in maps.iter().enumerate() {
        let r = q.consts.as_ref().map_or(1.0, |k| k.r);
        let mut rng = stream(opts.seed, 300 + qi as u64);
        let strata = [
            Stratum::BallInterior,
            Stratum::BallBoundary,
            Stratum::Inner,
            Stratum::Transition,
            Stratum::Outer,
        ];
        let mut inj = Tally::new("c6_local_injectivity", label(q), Evidence::FalsificationTest, opts.seed);
        let mut i = 0;
        while inj.count < POINTS {
            let x = sample_stratum(q, strata[i % strata.len()], i, &mut rng);
            i += 1;
            if q.cps.iter().any(|cp| (x - cp.z).norm() <= r / 2.0) {
                continue;
            }
            let ok = local_injectivity_check(q, x, r / 4.0)?;
            inj.add(ok, None, || format!("x = {} rho {:e}", point(x), r / 4.0));
        }
        let mut disc = Tally::new("c6_discreteness", label(q), Evidence::FalsificationTest, opts.seed);
        let mut largest = 0;
        for i in 0..TARGETS {
            let w = if i % 2 == 0 {
                q.f2(sample_stratum(q, strata[(i / 2) % strata.len()], i, &mut rng))
            } else {
                let scale = q.consts.as_ref().map_or(10.0, |k| q.p.abs_eval(Complex::new(2.0 * k.big_r, 0.0)));
                log_uniform(&mut rng, 1e-3, scale) * unit(&mut rng)
            };
            let fiber_len = q.fiber(w)?.len();
            largest = largest.max(fiber_len);
            let ok = discreteness_check(q, w)? && fiber_len <= q.degree();
            disc.add(ok, Some(fiber_len as f64), || format!("w = {} fiber size {fiber_len}", point(w)));
        }
        parts.push(format!("{}: injective {}/{POINTS}, largest fiber {largest}", q.p, POINTS - inj.failures));
        records.push(inj.record());
        records.push(disc.record());
    }
    Ok(CriterionResult::from_records(6, "local injectivity and discreteness", parts.join("; "), records))
}

/// Inverse duality on `h₁`, composition on `U₂ \ W`, and the implication
/// ball inclusion ⇒ strong inequality under local injectivity.
pub fn criterion7(maps: &[QuotientMap], opts: &SuiteOptions) -> Result<CriterionResult> {
    const INSTANCES: usize = 50;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for (qi, q) in maps.iter().enumerate() {
        let Some(k) = q.consts.as_ref() else { continue };
        let mut rng = stream(opts.seed, 400 + qi as u64);

        let mut dual = Tally::new("c7_inverse_duality", label(q), Evidence::FalsificationTest, opts.seed);
        let strata = [Stratum::Inner, Stratum::Transition, Stratum::Outer];
        for i in 0..INSTANCES {
            let x = if i == 0 {
                Complex::new(3.0 * k.outer, 0.0)
            } else {
                sample_stratum(q, strata[i % strata.len()], i, &mut rng)
            };
            let out = h1_duality_check(&q.h1, x, opts.samples, opts.seed.wrapping_add(i as u64))?;
            let value = out.inverse_estimate.as_ref().map(|e| e.value * out.strong.constant);
            dual.add(out.holds, value, || format!("x = {} {:?}", point(x), out.inverse_estimate));
        }

        let mut comp = Tally::new("c7_composition", label(q), Evidence::FalsificationTest, opts.seed);
        let u2 = k.u2;
        let mut i = 0;
        while comp.count < INSTANCES {
            let x = match i % 3 {
                0 => sample_stratum(q, Stratum::Inner, i, &mut rng),
                1 => sample_stratum(q, Stratum::BallInterior, i, &mut rng),
                _ => sample_stratum(q, Stratum::Transition, i, &mut rng),
            };
            i += 1;
            if x.norm() >= u2 || q.cps.iter().any(|cp| (x - cp.z).norm() <= k.r / 2.0) {
                continue;
            }
            let out = composition_colip_check(q, x, opts.samples, opts.seed.wrapping_add(i as u64), None)?;
            comp.add(out.certificate.pass, None, || witness_text(&out.certificate));
        }

        let mut equiv = Tally::new("c7_equivalence_under_injectivity", label(q), Evidence::FalsificationTest, opts.seed);
        let strata = [
            Stratum::BallInterior,
            Stratum::NearBoundary,
            Stratum::Inner,
            Stratum::Transition,
            Stratum::Outer,
        ];
        let mut i = 0;
        let r_test = 1e-3 * k.r;
        while equiv.count < INSTANCES {
            let x = sample_stratum(q, strata[i % strata.len()], i, &mut rng);
            i += 1;
            if !local_injectivity_check(q, x, k.r / 4.0)? {
                continue;
            }
            let seed = opts.seed.wrapping_add(i as u64);
            let c = 0.5 * local_colip_constant(q, x, r_test, opts.samples, seed);
            let ball = ball_inclusion_check(q, x, r_test, c, 64, seed)?;
            let holds = if ball.pass {
                strong_colip_shrink(q, x, c * (1.0 - 1e-3), r_test, opts.samples, seed).pass
            } else {
                true
            };
            equiv.add(holds, None, || format!("x = {} c {c:e}", point(x)));
        }
        parts.push(format!(
            "{}: duality {}/{INSTANCES}, composition {}/{INSTANCES}, equivalence {}/{INSTANCES}",
            q.p,
            INSTANCES - dual.failures,
            INSTANCES - comp.failures,
            INSTANCES - equiv.failures
        ));
        records.extend([dual.record(), comp.record(), equiv.record()]);
    }
    Ok(CriterionResult::from_records(7, "duality and composition", parts.join("; "), records))
}

/// The counterexamples.
pub fn criterion8(maps: &[QuotientMap], opts: &SuiteOptions) -> Result<CriterionResult> {
    let seed = opts.seed;
    let mut records = Vec::new();
    let growth = demos::nonlip_homeo_growth(1e3)?;
    records.push(
        CheckRecord::new("c8_nonlip_homeo_growth", "R0 = 1e3", growth >= 1e3, Evidence::Computed, 1, seed).value(growth),
    );
    let mut worst_square = f64::INFINITY;
    for m in [10.0, 1e3, 1e6] {
        let w = demos::square_unbounded_ratio(2, m)?;
        worst_square = worst_square.min(w.ratio / m);
        records.push(
            CheckRecord::new("c8_square_unbounded_ratio", format!("n = 2; M = {m:e}"), w.ratio >= m, Evidence::Computed, 1, seed)
                .value(w.ratio)
                .witness(Some(format!("z = {} y = {}", point(w.z), point(w.y)))),
        );
    }
    let proj = demos::projection_demo(2, 1, &[0.0, 0.0, 0.0], 1.0, opts.samples, seed)?;
    let defeats = [1e-12, 1.0, 1e12].iter().all(|&c| proj.defeats(c));
    let proj_ok = proj.lipschitz_evidence && proj.colipschitz_evidence && defeats && !proj.fiber_discrete;
    records.push(
        CheckRecord::new("c8_projection", "n = 2; k = 1; x = 0; r = 1", proj_ok, Evidence::Computed, proj.samples, seed)
            .value(proj.witness_image_distance)
            .witness(Some(format!("y = {:?}", proj.witness_y))),
    );
    let hit = demos::broken_jlps_collision(4.0, 2)?;
    let jlps_ok = hit.image_distance < 1e-12 && (hit.z1 - hit.z2).norm() > 0.0;
    records.push(
        CheckRecord::new("c8_broken_jlps_h", "R = 4; n = 2", jlps_ok, Evidence::Computed, 1, seed)
            .value(hit.image_distance)
            .witness(Some(format!("z1 = {} z2 = {}", point(hit.z1), point(hit.z2)))),
    );
    for q in maps.iter().filter(|q| q.consts.is_some()) {
        let k = q.consts.as_ref().expect("filtered");
        let moduli: Vec<f64> = (0..4).map(|i| k.outer * 10f64.powi(i)).collect();
        let w = demos::squared_composition_ratios(q, &moduli);
        let grows = w.windows(2).all(|p| p[1].ratio > p[0].ratio);
        records.push(
            CheckRecord::new("c8_squared_composition", label(q), grows, Evidence::Computed, w.len(), seed)
                .value(w.last().map_or(0.0, |x| x.ratio)),
        );
    }
    let summary = format!(
        "growth {growth:e}, square ratio/M >= {worst_square:.3}, projection witness distance {}, collision distance {:e}",
        proj.witness_image_distance, hit.image_distance
    );
    Ok(CriterionResult::from_records(8, "counterexamples", summary, records))
}

/// Falsification controls: an inflated constant must fail criterion 5 with
/// witnesses that re-check, and a mutated `h₂` must fail criterion 2 or 5.
pub fn criterion9(maps: &[QuotientMap], opts: &SuiteOptions) -> Result<CriterionResult> {
    let mut records = Vec::new();
    let mut parts = Vec::new();
    let (_, lips) = criterion4(maps, opts)?;
    for (q, lip) in maps.iter().zip(lips) {
        let forced = SuiteOptions {
            force_c: Some(10.0 * lip),
            ..*opts
        };
        let (res, failing) = criterion5(std::slice::from_ref(q), &forced)?;
        let rechecked = !failing.is_empty()
            && failing
                .iter()
                .all(|(_, cert)| cert.witness_holds(q).unwrap_or(false));
        let ok = !res.pass && rechecked;
        records.push(
            CheckRecord::new("c9_forced_constant", label(q), ok, Evidence::FalsificationTest, failing.len(), opts.seed)
                .constant(10.0 * lip)
                .witness(failing.first().map(|(_, c)| witness_text(c))),
        );
        parts.push(format!("{}: forced c fails with {} re-checked witnesses", q.p, failing.len()));
        if q.consts.is_some() {
            let mutated = q.clone().with_mutated_h2();
            let honest = SuiteOptions { force_c: None, ..*opts };
            let c2 = criterion2(std::slice::from_ref(&mutated), &honest);
            let detected = !c2.pass
                || criterion5(std::slice::from_ref(&mutated), &honest).map_or(true, |(r, _)| !r.pass);
            records.push(CheckRecord::new(
                "c9_mutated_h2",
                label(q),
                detected,
                Evidence::FalsificationTest,
                1,
                opts.seed,
            ));
            parts.push(format!("{}: mutated h2 {}", q.p, if detected { "caught" } else { "MISSED" }));
        }
    }
    Ok(CriterionResult::from_records(9, "falsifiability controls", parts.join("; "), records))
}

/// The strong check at a critical point with `c = α_j(1 - 1e-6)` on `B_{r/2}`.
pub fn critical_point_strong_check(q: &QuotientMap, j: usize, samples: usize, seed: u64) -> Option<CoLipschitzCertificate> {
    let k = q.consts.as_ref()?;
    let cp = q.cps.get(j)?;
    let c = k.alpha[j] * q.lead.norm() * (1.0 - 1e-6);
    Some(strong_colip_check(q, cp.z, c, k.r / 2.0, samples, seed))
}
