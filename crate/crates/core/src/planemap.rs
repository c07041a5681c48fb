//! Maps of the plane that the verifiers sample.

use crate::basemaps::{f_n, f_n_displacement};
use crate::homeo::PlaneHomeomorphism;
use crate::poly::Complex;

pub trait PlaneMap: Sync {
    fn eval(&self, z: Complex) -> Complex;

    /// `F(x + δ) - F(x)`; implementors override this when they can do better
    /// than subtracting two rounded values.
    fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        self.eval(x + delta) - self.eval(x)
    }
}

/// Wraps a closure.
pub struct FnMap<F>(pub F);

impl<F: Fn(Complex) -> Complex + Sync> PlaneMap for FnMap<F> {
    fn eval(&self, z: Complex) -> Complex {
        (self.0)(z)
    }
}

pub struct Identity;

impl PlaneMap for Identity {
    fn eval(&self, z: Complex) -> Complex {
        z
    }

    fn displacement(&self, _x: Complex, delta: Complex) -> Complex {
        delta
    }
}

/// `z ↦ a z`.
pub struct Scaling(pub Complex);

impl PlaneMap for Scaling {
    fn eval(&self, z: Complex) -> Complex {
        self.0 * z
    }

    fn displacement(&self, _x: Complex, delta: Complex) -> Complex {
        self.0 * delta
    }
}

/// The winding map `f_n`.
pub struct Winding(pub u32);

impl PlaneMap for Winding {
    fn eval(&self, z: Complex) -> Complex {
        f_n(self.0, z)
    }

    fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        f_n_displacement(self.0, x, delta)
    }
}

impl PlaneMap for PlaneHomeomorphism {
    fn eval(&self, z: Complex) -> Complex {
        PlaneHomeomorphism::eval(self, z)
    }

    fn displacement(&self, x: Complex, delta: Complex) -> Complex {
        PlaneHomeomorphism::displacement(self, x, delta)
    }
}

/// The inverse of a homeomorphism as a map in its own right.
pub struct Inverse<'a>(pub &'a PlaneHomeomorphism);

impl PlaneMap for Inverse<'_> {
    fn eval(&self, w: Complex) -> Complex {
        self.0.eval_inv(w)
    }

    fn displacement(&self, w: Complex, delta: Complex) -> Complex {
        self.0.inverse_displacement(self.0.eval_inv(w), delta)
    }
}
