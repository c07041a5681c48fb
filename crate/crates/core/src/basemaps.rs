//! Elementary maps: the principal argument, winding maps `f_n`, fractional
//! winding maps `g_{k,n}` and the divided difference `Φ_{l,m}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly::Complex;

/// Tolerance for deciding `f_m(z) = f_m(w)` in [`phi_lm`].
pub const A_M_TOL: f64 = 1e-14;

/// Argument in `(-π, π]`; the negative real axis maps to `+π`.
pub fn principal_arg(z: Complex) -> Result<f64> {
    if z == Complex::new(0.0, 0.0) {
        return Err(Error::ArgumentAtOrigin);
    }
    let theta = z.im.atan2(z.re);
    Ok(if theta <= -PI { PI } else { theta })
}

fn arg_or_zero(z: Complex) -> f64 {
    principal_arg(z).unwrap_or(0.0)
}

/// `|z|^a e^{i b arg z}`, zero at the origin.
pub fn radial_power(a: f64, b: f64, z: Complex) -> Complex {
    if z == Complex::new(0.0, 0.0) {
        return z;
    }
    let modulus = (a * z.norm().ln()).exp();
    Complex::from_polar(modulus, b * arg_or_zero(z))
}

/// `f_n(z) = |z| e^{i n arg z}`.
pub fn f_n(n: u32, z: Complex) -> Complex {
    if z == Complex::new(0.0, 0.0) {
        return z;
    }
    Complex::from_polar(z.norm(), n as f64 * arg_or_zero(z))
}

/// `g_{k,n}(z) = |z|^{k/n} e^{i k arg z}`.
pub fn g_kn(k: u32, n: u32, z: Complex) -> Complex {
    radial_power(k as f64 / n as f64, k as f64, z)
}

/// `|1 + ε| - 1` without cancellation.
pub(crate) fn modulus_increment(eps: Complex) -> f64 {
    let s = 2.0 * eps.re + eps.norm_sqr();
    s / ((Complex::new(1.0, 0.0) + eps).norm() + 1.0)
}

/// `|1+ε|^a e^{i b arg(1+ε)} - 1` for `|ε|` small or large, accurate to a
/// few ulps relative to the result.
pub(crate) fn unit_power_increment(a: f64, b: f64, eps: Complex) -> Complex {
    let one_plus = Complex::new(1.0, 0.0) + eps;
    if one_plus == Complex::new(0.0, 0.0) {
        return Complex::new(-1.0, 0.0);
    }
    let phi = eps.im.atan2(1.0 + eps.re);
    let radial = (a * modulus_increment(eps).ln_1p()).exp_m1();
    let half = 0.5 * b * phi;
    let rot = Complex::new(-2.0 * half.sin().powi(2), (b * phi).sin());
    // (1 + radial) e^{i b φ} - 1
    rot + radial * (Complex::new(1.0, 0.0) + rot)
}

/// `f_n(z + δ) - f_n(z)`, accurate when `|δ| << |z|`.
pub fn f_n_displacement(n: u32, z: Complex, delta: Complex) -> Complex {
    radial_power_displacement(1.0, n as f64, z, delta)
}

/// `(|·|^a e^{i b arg ·})(z + δ) - (same)(z)` for integer `b`.
pub fn radial_power_displacement(a: f64, b: f64, z: Complex, delta: Complex) -> Complex {
    if z == Complex::new(0.0, 0.0) {
        return radial_power(a, b, delta);
    }
    radial_power(a, b, z) * unit_power_increment(a, b, delta / z)
}

/// `Φ_{l,m}(z, w)`: the divided difference of `g(ζ) = ζ^{(l+m)/m}` between
/// `f_m(z)` and `f_m(w)`, and its limit `g'(f_m(w))` on the diagonal.
pub fn phi_lm(l: u32, m: u32, z: Complex, w: Complex) -> Result<Complex> {
    let zero = Complex::new(0.0, 0.0);
    if z == w {
        if w == zero {
            return Err(Error::OutsideDomain { m });
        }
        let factor = (l + m) as f64 / m as f64;
        return Ok(factor * radial_power(l as f64 / m as f64, l as f64, w));
    }
    let denom = f_n(m, z) - f_n(m, w);
    if denom.norm() <= A_M_TOL {
        return Err(Error::OutsideDomain { m });
    }
    let exponent = (l + m) as f64 / m as f64;
    let numer = radial_power(exponent, (l + m) as f64, z) - radial_power(exponent, (l + m) as f64, w);
    Ok(numer / denom)
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

    #[test]
    fn principal_arg_cases() {
        assert_eq!(principal_arg(c(1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(principal_arg(c(-1.0, 0.0)).unwrap(), PI);
        assert_eq!(principal_arg(c(-1.0, -0.0)).unwrap(), PI);
        assert!((principal_arg(c(0.0, 1.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(principal_arg(c(0.0, 0.0)), Err(Error::ArgumentAtOrigin));
    }

    #[test]
    fn winding_map_cases() {
        assert!((f_n(2, c(0.0, 1.0)) - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(f_n(3, c(0.0, 0.0)), c(0.0, 0.0));
        assert!((g_kn(1, 2, c(4.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((g_kn(1, 2, c(-4.0, 0.0)) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn continuity_across_branch_cut() {
        for t in [0.3, 1.0, 7.5] {
            let above = c(-t, 1e-10);
            let below = c(-t, -1e-10);
            for n in 1..6 {
                assert!((f_n(n, above) - f_n(n, below)).norm() < 1e-8);
                for k in 1..n {
                    assert!((g_kn(k, n, above) - g_kn(k, n, below)).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn f2_sampled_lipschitz_is_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let z = Complex::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-PI..PI));
            let delta = Complex::from_polar(10f64.powf(rng.gen_range(-6.0..-1.0)), rng.gen_range(-PI..PI));
            let ratio = f_n_displacement(2, z, delta).norm() / delta.norm();
            best = best.max(ratio);
        }
        assert!((1.95..=2.0 + 1e-9).contains(&best), "{best}");
    }

    #[test]
    fn displacement_agrees_with_direct_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let z = Complex::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(-PI..PI));
            let delta = Complex::from_polar(rng.gen_range(0.01..20.0), rng.gen_range(-PI..PI));
            for n in 1..5 {
                let direct = f_n(n, z + delta) - f_n(n, z);
                let stable = f_n_displacement(n, z, delta);
                assert!((direct - stable).norm() < 1e-12 * (1.0 + z.norm() + delta.norm()));
                for k in 1..n {
                    let direct = g_kn(k, n, z + delta) - g_kn(k, n, z);
                    let stable = radial_power_displacement(k as f64 / n as f64, k as f64, z, delta);
                    assert!((direct - stable).norm() < 1e-12 * (1.0 + z.norm() + delta.norm()));
                }
            }
        }
    }

    #[test]
    fn phi_cases() {
        assert!((phi_lm(1, 1, c(2.0, 0.0), c(1.0, 0.0)).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
        let w = c(0.7, -1.3);
        assert!((phi_lm(1, 1, w, w).unwrap() - 2.0 * w).norm() < 1e-14);
        let expect = 1.5 * w.norm().sqrt() * Complex::from_polar(1.0, principal_arg(w).unwrap());
        assert!((phi_lm(1, 2, w, w).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn phi_rejects_points_outside_domain() {
        assert_eq!(phi_lm(1, 2, c(0.0, 0.0), c(0.0, 0.0)), Err(Error::OutsideDomain { m: 2 }));
        // f_2(1) = f_2(-1)
        assert_eq!(phi_lm(1, 2, c(1.0, 0.0), c(-1.0, 0.0)), Err(Error::OutsideDomain { m: 2 }));
    }

    #[test]
    fn phi_tends_to_diagonal_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let w = Complex::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(-PI..PI));
            let u = Complex::from_polar(1.0, rng.gen_range(-PI..PI));
            for (l, m) in [(1, 2), (2, 3), (1, 4), (3, 2)] {
                let limit = phi_lm(l, m, w, w).unwrap();
                let errs: Vec<f64> = (3..=8)
                    .map(|k| (phi_lm(l, m, w + 10f64.powi(-k) * u, w).unwrap() - limit).norm())
                    .collect();
                assert!(errs[5] < 1e-4, "{errs:?}");
                assert!(errs[5] < errs[0]);
            }
        }
    }

    #[test]
    fn phi_bounded_near_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let w = Complex::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(-PI..PI));
            let bound = 1.0 + phi_lm(1, 3, w, w).unwrap().norm();
            let mut rho = w.norm();
            let found = loop {
                let ok = (0..200).all(|_| {
                    let z = w + Complex::from_polar(rho * rng.gen_range(1e-6f64..1.0), rng.gen_range(-PI..PI));
                    phi_lm(1, 3, z, w).map(|v| v.norm() < bound).unwrap_or(false)
                });
                if ok || rho < 1e-8 {
                    break ok;
                }
                rho /= 2.0;
            };
            assert!(found);
        }
    }

    proptest! {
        #[test]
        fn moduli_are_exact(re in -50.0f64..50.0, im in -50.0f64..50.0, n in 2u32..7) {
            let z = c(re, im);
            prop_assert!((f_n(n, z).norm() - z.norm()).abs() <= 1e-13 * (1.0 + z.norm()));
            for k in 1..n {
                let expect = z.norm().powf(k as f64 / n as f64);
                prop_assert!((g_kn(k, n, z).norm() - expect).abs() <= 1e-13 * (1.0 + expect));
            }
        }
    }
}
