//! The radial profile `φ`, the homeomorphisms `h₁` and `h₂`, and their exact
//! inverses.
//!
//! Besides pointwise evaluation every map offers `displacement(x, δ) =
//! h(x + δ) - h(x)` and `inverse_displacement(x, u) = h⁻¹(h(x) + u) - x`,
//! evaluated from polar increments so that they stay accurate when `|δ|` is
//! far below the resolution of `|x|`.

use serde::Serialize;

use crate::basemaps::modulus_increment;
use crate::critical::CriticalPoint;
use crate::error::{Error, Result};
use crate::poly::Complex;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Piece {
    Identity,
    Linear(f64),
    /// `coef · t^exp`
    Power { coef: f64, exp: f64 },
}

impl Piece {
    /// Increment of the piece from `t` to `t + d`, both inside the piece.
    fn diff(self, t: f64, d: f64) -> f64 {
        match self {
            Piece::Identity => d,
            Piece::Linear(slope) => d * slope,
            Piece::Power { coef, exp } => {
                if t == 0.0 {
                    coef * d.powf(exp)
                } else {
                    coef * t.powf(exp) * (exp * (d / t).ln_1p()).exp_m1()
                }
            }
        }
    }
}

/// A continuous increasing piecewise map of `[0, ∞)`; `pieces.len() == breaks.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
struct Pieces {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl Pieces {
    /// `ρ(t + d) - ρ(t)`, summed piece by piece across any breakpoints.
    fn diff(&self, t: f64, d: f64) -> f64 {
        let t1 = t + d;
        if d >= 0.0 {
            let crossed: Vec<f64> = self.breaks.iter().copied().filter(|&b| b > t && b < t1).collect();
            if crossed.is_empty() {
                return self.above(t).diff(t, d);
            }
            let mut acc = 0.0;
            let mut cur = t;
            for b in crossed {
                acc += self.above(cur).diff(cur, b - cur);
                cur = b;
            }
            acc + self.above(cur).diff(cur, t1 - cur)
        } else {
            let crossed: Vec<f64> = self.breaks.iter().rev().copied().filter(|&b| b < t && b > t1).collect();
            if crossed.is_empty() {
                return self.below(t).diff(t, d);
            }
            let mut acc = 0.0;
            let mut cur = t;
            for b in crossed {
                acc += self.below(cur).diff(cur, b - cur);
                cur = b;
            }
            acc + self.below(cur).diff(cur, (t1 - cur).max(-cur))
        }
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breaks.iter().filter(|&&b| b <= t).count()
    }

    fn above(&self, t: f64) -> Piece {
        self.pieces[self.breaks.iter().filter(|&&b| b <= t).count()]
    }

    fn below(&self, t: f64) -> Piece {
        self.pieces[self.breaks.iter().filter(|&&b| b < t).count()]
    }
}

/// `ρ⁻¹(ρ(t) + ds) - t` for the pair `fwd = ρ`, `inv = ρ⁻¹`.
///
/// Offsets of `ρ(t)` from the image breakpoints are taken from `fwd` at `t`
/// itself, so `t` just past a breakpoint of a strongly contracting piece is
/// not lost to the rounding of `ρ(t)`.
fn inverse_increment(fwd: &Pieces, inv: &Pieces, t: f64, s: f64, ds: f64) -> f64 {
    let own = fwd.piece_index(t);
    let offsets: Vec<f64> = fwd.breaks.iter().map(|&b| fwd.diff(b, t - b)).collect();
    let landing = offsets.iter().filter(|&&o| o + ds >= 0.0).count();
    if landing == own {
        inv.pieces[own].diff(s, ds)
    } else if landing == 0 {
        // anchored at the lowest breakpoint rather than at 0, which would cancel
        let d = (offsets[0] + ds).max(-inv.breaks[0]);
        (fwd.breaks[0] - t) + inv.pieces[0].diff(inv.breaks[0], d)
    } else {
        let i = landing - 1;
        (fwd.breaks[i] - t) + inv.pieces[landing].diff(inv.breaks[i], offsets[i] + ds)
    }
}

/// `(1+ε)/|1+ε| - 1` given `m1 = |1+ε| - 1`. The real part is formed
/// without cancellation, which matters when `ρ` contracts radially and the
/// rotation carries almost all of the step.
fn unit_increment(eps: Complex, m1: f64) -> Complex {
    let n = 1.0 + m1;
    let re1 = 1.0 + eps.re;
    if re1 > 0.0 {
        Complex::new(-eps.im * eps.im / (n * (re1 + n)), eps.im / n)
    } else {
        (eps - m1) / n
    }
}

/// Increment of `z ↦ ρ(|v|) v/|v|` at `v = theta·a` (with `ρ(a) = b`) for an
/// increment `delta` of `v`; `None` when `a = 0`.
fn radial_step(theta: Complex, a: f64, b: f64, delta: Complex, diff: impl Fn(f64, f64) -> f64) -> Option<Complex> {
    if a == 0.0 {
        return None;
    }
    let eps = delta / (theta * a);
    if Complex::new(1.0, 0.0) + eps == Complex::new(0.0, 0.0) {
        return Some(-theta * b);
    }
    let m1 = modulus_increment(eps);
    let rot_m1 = unit_increment(eps, m1);
    let db = diff(a, a * m1);
    Some(theta * (db * (Complex::new(1.0, 0.0) + rot_m1) + b * rot_m1))
}

/// `φ`: identity up to `R`, linear up to `2ⁿRⁿ`, then `t^{1/n}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialProfile {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub n: usize,
    /// `2ⁿR^{n-1} - 1`, the reciprocal slope of the middle piece.
    pub slope: f64,
    /// `2ⁿRⁿ`.
    pub outer: f64,
}

impl RadialProfile {
    pub fn new(big_r: f64, n: usize) -> Result<Self> {
        if !(big_r > 1.0) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "radial profile needs R > 1 and n >= 2, got R = {big_r}, n = {n}"
            )));
        }
        let ni = n as i32;
        let outer = (2.0 * big_r).powi(ni);
        if !outer.is_finite() {
            return Err(Error::Overflow(format!("2^n R^n overflows for n = {n}, R = {big_r}")));
        }
        Ok(Self {
            big_r,
            n,
            slope: 2f64.powi(ni) * big_r.powi(ni - 1) - 1.0,
            outer,
        })
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("phi needs t >= 0, got {t}")));
        }
        Ok(self.phi_unchecked(t))
    }

    pub fn phi_inv(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("phi_inv needs s >= 0, got {s}")));
        }
        Ok(self.phi_inv_unchecked(s))
    }

    fn phi_unchecked(&self, t: f64) -> f64 {
        if t <= self.big_r {
            t
        } else if t < self.outer {
            (t - self.big_r) / self.slope + self.big_r
        } else {
            t.powf(1.0 / self.n as f64)
        }
    }

    fn phi_inv_unchecked(&self, s: f64) -> f64 {
        if s <= self.big_r {
            s
        } else if s < 2.0 * self.big_r {
            (s - self.big_r) * self.slope + self.big_r
        } else {
            s.powi(self.n as i32)
        }
    }

    fn forward_pieces(&self) -> Pieces {
        Pieces {
            breaks: vec![self.big_r, self.outer],
            pieces: vec![
                Piece::Identity,
                Piece::Linear(1.0 / self.slope),
                Piece::Power { coef: 1.0, exp: 1.0 / self.n as f64 },
            ],
        }
    }

    fn inverse_pieces(&self) -> Pieces {
        Pieces {
            breaks: vec![self.big_r, 2.0 * self.big_r],
            pieces: vec![
                Piece::Identity,
                Piece::Linear(self.slope),
                Piece::Power { coef: 1.0, exp: self.n as f64 },
            ],
        }
    }

    /// `φ(t + d) - φ(t)`.
    pub fn phi_diff(&self, t: f64, d: f64) -> f64 {
        self.forward_pieces().diff(t, d)
    }

    /// `φ⁻¹(s + d) - φ⁻¹(s)`.
    pub fn phi_inv_diff(&self, s: f64, d: f64) -> f64 {
        self.inverse_pieces().diff(s, d)
    }
}

/// `h₁(z) = φ(|z|) e^{i arg z}`.
pub fn h1(profile: &RadialProfile, z: Complex) -> Complex {
    let t = z.norm();
    if t <= profile.big_r {
        return z;
    }
    z * (profile.phi_unchecked(t) / t)
}

pub fn h1_inv(profile: &RadialProfile, w: Complex) -> Complex {
    let s = w.norm();
    if s <= profile.big_r {
        return w;
    }
    let t = profile.phi_inv_unchecked(s);
    w / s * t
}

/// The ball `B_r(z_j)` of one critical point and its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalBall {
    pub center: Complex,
    pub m: usize,
    pub r: f64,
}

impl CriticalBall {
    fn contains(&self, z: Complex) -> bool {
        (z - self.center).norm() <= self.r
    }

    fn forward_exp(&self, mutated: bool) -> f64 {
        if mutated {
            1.0
        } else {
            1.0 / self.m as f64
        }
    }

    fn rho(&self, t: f64, mutated: bool) -> f64 {
        let m = self.m as f64;
        self.r.powf(1.0 - 1.0 / m) * t.powf(self.forward_exp(mutated))
    }

    fn rho_inv(&self, s: f64) -> f64 {
        s.powi(self.m as i32) * self.r.powi(1 - self.m as i32)
    }

    fn forward_pieces(&self) -> Pieces {
        let m = self.m as f64;
        Pieces {
            breaks: vec![self.r],
            pieces: vec![
                Piece::Power { coef: self.r.powf(1.0 - 1.0 / m), exp: 1.0 / m },
                Piece::Identity,
            ],
        }
    }

    fn inverse_pieces(&self) -> Pieces {
        Pieces {
            breaks: vec![self.r],
            pieces: vec![
                Piece::Power { coef: self.r.powi(1 - self.m as i32), exp: self.m as f64 },
                Piece::Identity,
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HomeoKind {
    Identity,
    H1,
    H2,
}

/// Identity, `h₁`, or `h₂` (which replaces `h₁` on the critical balls).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneHomeomorphism {
    pub kind: HomeoKind,
    pub profile: Option<RadialProfile>,
    pub balls: Vec<CriticalBall>,
    /// Replaces the ball exponent `1/m_j` by 1 while keeping the inverse; a
    /// deliberately broken map for falsification runs.
    pub mutated: bool,
}

enum Zone {
    Ball(usize),
    Outside,
}

impl PlaneHomeomorphism {
    pub fn identity() -> Self {
        Self {
            kind: HomeoKind::Identity,
            profile: None,
            balls: Vec::new(),
            mutated: false,
        }
    }

    pub fn h1(profile: RadialProfile) -> Self {
        Self {
            kind: HomeoKind::H1,
            profile: Some(profile),
            balls: Vec::new(),
            mutated: false,
        }
    }

    pub fn h2(profile: RadialProfile, cps: &[CriticalPoint], r: f64) -> Self {
        Self {
            kind: HomeoKind::H2,
            profile: Some(profile),
            balls: cps
                .iter()
                .map(|cp| CriticalBall { center: cp.z, m: cp.m, r })
                .collect(),
            mutated: false,
        }
    }

    pub fn mutated(mut self) -> Self {
        self.mutated = true;
        self
    }

    fn zone(&self, z: Complex) -> Zone {
        match self.balls.iter().position(|b| b.contains(z)) {
            Some(j) => Zone::Ball(j),
            None => Zone::Outside,
        }
    }

    fn outside_h1(&self, z: Complex) -> Complex {
        match &self.profile {
            Some(p) => h1(p, z),
            None => z,
        }
    }

    fn outside_h1_inv(&self, w: Complex) -> Complex {
        match &self.profile {
            Some(p) => h1_inv(p, w),
            None => w,
        }
    }

    pub fn eval(&self, z: Complex) -> Complex {
        match self.zone(z) {
            Zone::Ball(j) => {
                let ball = &self.balls[j];
                let v = z - ball.center;
                let t = v.norm();
                if t == 0.0 {
                    return ball.center;
                }
                ball.center + v * (ball.rho(t, self.mutated) / t)
            }
            Zone::Outside => self.outside_h1(z),
        }
    }

    pub fn eval_inv(&self, w: Complex) -> Complex {
        match self.zone(w) {
            Zone::Ball(j) => {
                let ball = &self.balls[j];
                let v = w - ball.center;
                let s = v.norm();
                if s == 0.0 {
                    return ball.center;
                }
                ball.center + v * (ball.rho_inv(s) / s)
            }
            Zone::Outside => self.outside_h1_inv(w),
        }
    }

    /// Local Lipschitz bound of `h⁻¹` at `w`: the larger of its radial
    /// derivative and its tangential stretch.
    pub fn inverse_stretch(&self, w: Complex) -> f64 {
        if self.mutated || self.kind == HomeoKind::Identity {
            return 1.0;
        }
        match self.zone(w) {
            Zone::Ball(j) => {
                let ball = &self.balls[j];
                let s = (w - ball.center).norm() / ball.r;
                (ball.m as f64 * s.powi(ball.m as i32 - 1)).max(1.0)
            }
            Zone::Outside => {
                let Some(p) = &self.profile else { return 1.0 };
                let s = w.norm();
                if s <= p.big_r {
                    1.0
                } else if s < 2.0 * p.big_r {
                    p.slope
                } else {
                    p.n as f64 * s.powi(p.n as i32 - 1)
                }
            }
        }
    }

    /// Ball whose centred profile describes the map at both `a` and `b`, if any.
    fn shared_ball(&self, a: Complex, b: Complex) -> Option<usize> {
        let (za, zb) = (self.zone(a), self.zone(b));
        let inner = |z: Complex| self.profile.map_or(true, |p| z.norm() <= p.big_r);
        match (za, zb) {
            (Zone::Ball(i), Zone::Ball(j)) if i == j => Some(i),
            (Zone::Ball(i), Zone::Outside) if inner(b) => Some(i),
            (Zone::Outside, Zone::Ball(j)) if inner(a) => Some(j),
            _ => None,
        }
    }

    /// `h(x + δ) - h(x)`.
    pub fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        let y = x + delta;
        let direct = || self.eval(y) - self.eval(x);
        if self.kind == HomeoKind::Identity {
            return delta;
        }
        if self.mutated {
            return direct();
        }
        if let Some(j) = self.shared_ball(x, y) {
            let ball = &self.balls[j];
            let v = x - ball.center;
            let t = v.norm();
            if t == 0.0 {
                return direct();
            }
            let pieces = ball.forward_pieces();
            let s = if t <= ball.r { ball.rho(t, false) } else { t };
            return radial_step(v / t, t, s, delta, |a, d| pieces.diff(a, d)).unwrap_or_else(direct);
        }
        match (self.zone(x), self.zone(y), &self.profile) {
            (Zone::Outside, Zone::Outside, Some(p)) => {
                let t = x.norm();
                if t == 0.0 {
                    return direct();
                }
                let pieces = p.forward_pieces();
                radial_step(x / t, t, p.phi_unchecked(t), delta, |a, d| pieces.diff(a, d)).unwrap_or_else(direct)
            }
            _ => direct(),
        }
    }

    /// `h⁻¹(h(x) + u) - x`.
    pub fn inverse_displacement(&self, x: Complex, u: Complex) -> Complex {
        if self.kind == HomeoKind::Identity {
            return u;
        }
        let w0 = self.eval(x);
        let w1 = w0 + u;
        let direct = || self.eval_inv(w1) - x;
        if self.mutated {
            return direct();
        }
        if let Some(j) = self.shared_ball(w0, w1) {
            let ball = &self.balls[j];
            let v = x - ball.center;
            let t = v.norm();
            if t == 0.0 {
                return direct();
            }
            let (fwd, inv) = (ball.forward_pieces(), ball.inverse_pieces());
            let s = if t <= ball.r { ball.rho(t, false) } else { t };
            return radial_step(v / t, s, t, u, |a, d| inverse_increment(&fwd, &inv, t, a, d))
                .unwrap_or_else(direct);
        }
        match (self.zone(w0), self.zone(w1), &self.profile) {
            (Zone::Outside, Zone::Outside, Some(p)) => {
                let t = x.norm();
                if t == 0.0 {
                    return direct();
                }
                let (fwd, inv) = (p.forward_pieces(), p.inverse_pieces());
                radial_step(x / t, p.phi_unchecked(t), t, u, |a, d| inverse_increment(&fwd, &inv, t, a, d))
                    .unwrap_or_else(direct)
            }
            _ => direct(),
        }
    }
}
