//! Simultaneous all-roots iteration (Aberth–Ehrlich) with multiplicity
//! clustering.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{Complex, Polynomial};

/// Estimates closer than `STRICT_MERGE * (1 + max|z|)` always collapse into one root.
pub const STRICT_MERGE: f64 = 1e-8;

/// Radius at which candidate clusters are first formed and then validated.
const CANDIDATE_MERGE: f64 = 1e-2;

/// A distinct root together with the number of estimates it absorbed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub z: Complex,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct RootFinder {
    pub max_iterations: usize,
    /// Backward-error target: `|p(z)| <= residual_tol * Σ|a_k||z|^k`.
    pub residual_tol: f64,
    /// Tolerance used to validate candidate clusters as multiple roots.
    pub multiplicity_tol: f64,
    pub seed: u64,
}

impl Default for RootFinder {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            residual_tol: 1e-12,
            multiplicity_tol: crate::poly::DEFAULT_MULTIPLICITY_TOL,
            seed: 0x5eed_0f_a11_5eed,
        }
    }
}

impl RootFinder {
    /// All `deg p` root estimates, unclustered.
    pub fn roots(&self, p: &Polynomial) -> Result<Vec<Complex>> {
        let deg = p.degree();
        if deg == 0 {
            return Err(Error::ConstantPolynomial);
        }
        // exact zero roots are peeled off so the relative residual test stays meaningful
        let zeros = p.coeffs().iter().take_while(|c| **c == Complex::new(0.0, 0.0)).count();
        let mut out = vec![Complex::new(0.0, 0.0); zeros];
        if zeros == deg {
            return Ok(out);
        }
        let reduced = Polynomial::new(p.coeffs()[zeros..].to_vec())?;
        if reduced.degree() == 1 {
            let c = reduced.coeffs();
            out.push(-c[0] / c[1]);
            return Ok(out);
        }
        out.extend(self.aberth(&reduced)?);
        Ok(out)
    }

    /// Distinct roots with multiplicities.
    pub fn distinct_roots(&self, p: &Polynomial) -> Result<Vec<Root>> {
        let estimates = self.roots(p)?;
        Ok(cluster_roots(p, &estimates, self.multiplicity_tol))
    }

    fn initial_ring(&self, p: &Polynomial) -> Vec<Complex> {
        let deg = p.degree();
        let a = p.coeffs();
        let lead = a[deg];
        let centre = -a[deg - 1] / (lead * deg as f64);
        let shifted = p.shifted_expansion(centre);
        // radius: geometric mean of root moduli about the centroid, floored by a Cauchy-type bound fraction
        let mut radius = (shifted[0] / lead).norm().powf(1.0 / deg as f64);
        if !(radius.is_finite() && radius > 0.0) {
            radius = 1.0
                + shifted[..deg]
                    .iter()
                    .map(|c| (c / lead).norm())
                    .fold(0.0, f64::max);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let phase: f64 = rng.gen_range(0.0..TAU);
        (0..deg)
            .map(|k| {
                let jitter: f64 = rng.gen_range(0.9..1.1);
                let angle = phase + TAU * k as f64 / deg as f64 + 0.4 / deg as f64;
                centre + Complex::from_polar(radius * jitter, angle)
            })
            .collect()
    }

    fn aberth(&self, p: &Polynomial) -> Result<Vec<Complex>> {
        let deg = p.degree();
        let mut z = self.initial_ring(p);
        let mut done = vec![false; deg];
        let mut settled_sweeps = 0usize;

        for _ in 0..self.max_iterations {
            let mut all_done = true;
            for k in 0..deg {
                let (v, dv) = p.eval_with_derivative(z[k]);
                let scale = p.abs_eval(z[k]);
                if v.norm() <= self.residual_tol * scale {
                    done[k] = true;
                }
                if v == Complex::new(0.0, 0.0) {
                    continue;
                }
                let ratio = v / dv;
                let repulsion: Complex = (0..deg)
                    .filter(|&j| j != k)
                    .map(|j| {
                        let d = z[k] - z[j];
                        if d == Complex::new(0.0, 0.0) {
                            Complex::new(0.0, 0.0)
                        } else {
                            d.inv()
                        }
                    })
                    .sum();
                let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
                if step.re.is_finite() && step.im.is_finite() {
                    z[k] -= step;
                } else if dv == Complex::new(0.0, 0.0) {
                    // stationary point of p: nudge off it
                    let nudge = Complex::new(1e-7, 1e-7) * (1.0 + z[k].norm());
                    z[k] += nudge;
                }
                if !done[k] {
                    all_done = false;
                }
            }
            if all_done {
                settled_sweeps += 1;
                // a few extra sweeps tighten clustered (multiple) roots before clustering
                if settled_sweeps > 8 {
                    return Ok(self.polish(p, z));
                }
            }
        }

        let residual = z
            .iter()
            .map(|&zk| p.eval(zk).norm() / p.abs_eval(zk).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if done.iter().all(|&d| d) {
            return Ok(self.polish(p, z));
        }
        Err(Error::NonConvergence {
            iterations: self.max_iterations,
            residual,
        })
    }

    /// Newton steps, each kept only if it lowers the residual.
    fn polish(&self, p: &Polynomial, mut z: Vec<Complex>) -> Vec<Complex> {
        for zk in z.iter_mut() {
            for _ in 0..4 {
                let (v, dv) = p.eval_with_derivative(*zk);
                if v == Complex::new(0.0, 0.0) || dv == Complex::new(0.0, 0.0) {
                    break;
                }
                let cand = *zk - v / dv;
                if p.eval(cand).norm() < v.norm() {
                    *zk = cand;
                } else {
                    break;
                }
            }
        }
        z
    }
}

/// Groups root estimates into distinct roots.
///
/// Candidate groups are formed by single linkage at a loose radius. A group
/// of size `k` is accepted as a `k`-fold root when, after refining its
/// centroid with Newton's method on `p^(k-1)`, the Taylor coefficients
/// `b_0..b_{k-1}` of `p` there all vanish to `tol` relative to the
/// coefficient mass. Rejected groups are re-split at a tenth of the radius;
/// at the strict radius members are merged unconditionally.
pub fn cluster_roots(p: &Polynomial, estimates: &[Complex], tol: f64) -> Vec<Root> {
    let scale = 1.0 + estimates.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    split_groups(p, estimates.to_vec(), CANDIDATE_MERGE * scale, STRICT_MERGE * scale, tol, &mut out);
    out.sort_by(|a, b| {
        a.z.re
            .partial_cmp(&b.z.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.z.im.partial_cmp(&b.z.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}

fn split_groups(
    p: &Polynomial,
    points: Vec<Complex>,
    radius: f64,
    strict: f64,
    tol: f64,
    out: &mut Vec<Root>,
) {
    for group in single_linkage(&points, radius) {
        if group.len() == 1 {
            out.push(Root {
                z: group[0],
                multiplicity: 1,
            });
            continue;
        }
        let centroid = group.iter().sum::<Complex>() / group.len() as f64;
        if radius <= strict {
            out.push(Root {
                z: centroid,
                multiplicity: group.len(),
            });
            continue;
        }
        match validate_multiple(p, centroid, group.len(), radius, tol) {
            Some(z) => out.push(Root {
                z,
                multiplicity: group.len(),
            }),
            None => split_groups(p, group, (radius / 10.0).max(strict), strict, tol, out),
        }
    }
}

fn single_linkage(points: &[Complex], radius: f64) -> Vec<Vec<Complex>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut j = i;
        while label[j] != r {
            let next = label[j];
            label[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(points[i]),
            None => groups.push((root, vec![points[i]])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn validate_multiple(p: &Polynomial, centroid: Complex, k: usize, radius: f64, tol: f64) -> Option<Complex> {
    let mut d = p.clone();
    for _ in 0..k - 1 {
        d = d.derivative();
    }
    let mut z = centroid;
    for _ in 0..30 {
        let (v, dv) = d.eval_with_derivative(z);
        if v == Complex::new(0.0, 0.0) || dv == Complex::new(0.0, 0.0) {
            break;
        }
        let step = v / dv;
        if !(step.norm() <= radius) {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - centroid).norm() > radius {
        z = centroid;
    }
    let b = p.shifted_expansion(z);
    let mass: f64 = b.iter().map(|c| c.norm()).sum();
    b[..k]
        .iter()
        .all(|c| c.norm() <= tol * mass)
        .then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn from_roots(roots: &[Complex]) -> Polynomial {
        let mut coeffs = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        Polynomial::new(coeffs).unwrap()
    }

    fn contains(roots: &[Root], z: Complex, m: usize, tol: f64) -> bool {
        roots.iter().any(|r| (r.z - z).norm() < tol && r.multiplicity == m)
    }

    #[test]
    fn simple_roots_of_cubic() {
        let p = Polynomial::from_real(&[0.0, -3.0, 0.0, 1.0]).unwrap();
        let roots = RootFinder::default().distinct_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        let s3 = 3f64.sqrt();
        for z in [c(0.0, 0.0), c(s3, 0.0), c(-s3, 0.0)] {
            assert!(contains(&roots, z, 1, 1e-12), "{roots:?}");
        }
    }

    #[test]
    fn double_root_is_clustered() {
        // (z - 1)^2 (z + 2)
        let p = Polynomial::from_real(&[2.0, -3.0, 0.0, 1.0]).unwrap();
        let roots = RootFinder::default().distinct_roots(&p).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        assert!(contains(&roots, c(1.0, 0.0), 2, 1e-12));
        assert!(contains(&roots, c(-2.0, 0.0), 1, 1e-12));
    }

    #[test]
    fn triple_and_quadruple_roots() {
        let p = from_roots(&[c(0.5, 1.0), c(0.5, 1.0), c(0.5, 1.0), c(-1.0, 0.0)]);
        let roots = RootFinder::default().distinct_roots(&p).unwrap();
        assert!(contains(&roots, c(0.5, 1.0), 3, 1e-10), "{roots:?}");
        let q = from_roots(&[c(2.0, 0.0); 4]);
        let roots = RootFinder::default().distinct_roots(&q).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(contains(&roots, c(2.0, 0.0), 4, 1e-10), "{roots:?}");
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        let roots = RootFinder::default().distinct_roots(&p).unwrap();
        assert_eq!(roots, vec![Root { z: c(0.0, 0.0), multiplicity: 2 }]);
    }

    #[test]
    fn close_but_distinct_roots_are_kept_apart() {
        let p = from_roots(&[c(1.0, 0.0), c(1.001, 0.0), c(-3.0, 0.5)]);
        let roots = RootFinder::default().distinct_roots(&p).unwrap();
        assert_eq!(roots.len(), 3, "{roots:?}");
    }

    #[test]
    fn widely_scaled_roots() {
        let p = from_roots(&[c(1e-9, 0.0), c(4000.0, 3000.0), c(-2.0, 1.0)]);
        let roots = RootFinder::default().roots(&p).unwrap();
        for z in [c(1e-9, 0.0), c(4000.0, 3000.0), c(-2.0, 1.0)] {
            assert!(roots.iter().any(|r| (r - z).norm() <= 1e-12 * (1.0 + z.norm())), "{roots:?}");
        }
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(RootFinder::default().roots(&Polynomial::from_real(&[2.0]).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn recovers_random_simple_roots(
            raw in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..7),
        ) {
            let roots: Vec<Complex> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            let min_sep = roots.iter().enumerate().flat_map(|(i, a)| {
                roots[i + 1..].iter().map(move |b| (a - b).norm())
            }).fold(f64::INFINITY, f64::min);
            prop_assume!(min_sep > 1e-2);
            let p = from_roots(&roots);
            let found = RootFinder::default().distinct_roots(&p).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for r in &roots {
                prop_assert!(found.iter().any(|f| (f.z - r).norm() < 1e-8));
            }
        }
    }
}
