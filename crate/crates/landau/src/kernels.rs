//! Pointwise collision kernel and Gaussian mollifier evaluation.
//!
//! The collision kernel is A(z) = lambda |z|^gamma (|z|^2 I - z (x) z), a
//! symmetric positive semi-definite matrix with A(z) z = 0. A(0) is defined
//! as the zero matrix for every gamma: self-interaction terms vanish anyway
//! and the convention avoids evaluating |z|^gamma at the origin for gamma < 0.

use crate::config::KernelSpec;
use crate::linalg;

/// d x d symmetric positive semi-definite kernel value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMatrix<const D: usize>(pub [[f64; D]; D]);

impl<const D: usize> KernelMatrix<D> {
    pub fn zero() -> Self {
        KernelMatrix([[0.0; D]; D])
    }

    pub fn mul_vec(&self, x: [f64; D]) -> [f64; D] {
        let mut r = [0.0; D];
        for a in 0..D {
            let mut s = 0.0;
            for b in 0..D {
                s += self.0[a][b] * x[b];
            }
            r[a] = s;
        }
        r
    }
}

/// |z|^gamma with the optional minimum-distance floor applied for gamma < 0.
#[inline(always)]
fn radial_factor(r_sq: f64, spec: &KernelSpec) -> f64 {
    if spec.gamma == 0.0 {
        return 1.0;
    }
    let mut r = r_sq.sqrt();
    if spec.gamma < 0.0 && r < spec.delta_min {
        r = spec.delta_min;
    }
    if spec.gamma == -3.0 {
        // Coulomb case, avoids powf in the hot loop
        1.0 / (r * r * r)
    } else {
        r.powf(spec.gamma)
    }
}

/// Evaluate A(z); returns the zero matrix at z = 0.
pub fn collision_kernel<const D: usize>(z: [f64; D], spec: &KernelSpec) -> KernelMatrix<D> {
    debug_assert_eq!(D, spec.d);
    let r_sq = linalg::norm_sq(z);
    if r_sq == 0.0 {
        return KernelMatrix::zero();
    }
    let c = spec.lambda * radial_factor(r_sq, spec);
    let mut m = [[0.0; D]; D];
    for a in 0..D {
        for b in 0..D {
            let mut v = -z[a] * z[b];
            if a == b {
                v += r_sq;
            }
            m[a][b] = c * v;
        }
    }
    KernelMatrix(m)
}

/// A(z) x without forming the matrix: lambda |z|^gamma (|z|^2 x - z (z . x)).
///
/// Bitwise-odd in x and even in z, which is what the pairwise momentum
/// cancellation in the stepper relies on.
#[inline(always)]
pub fn kernel_apply<const D: usize>(z: [f64; D], x: [f64; D], spec: &KernelSpec) -> [f64; D] {
    let r_sq = linalg::norm_sq(z);
    if r_sq == 0.0 {
        return [0.0; D];
    }
    let c = spec.lambda * radial_factor(r_sq, spec);
    let zx = linalg::dot(z, x);
    let mut r = [0.0; D];
    for k in 0..D {
        r[k] = c * (r_sq * x[k] - z[k] * zx);
    }
    r
}

/// Isotropic Gaussian mollifier (2 pi eps)^{-d/2} exp(-|v|^2 / (2 eps)).
#[inline(always)]
pub fn mollifier<const D: usize>(v: [f64; D], epsilon: f64) -> f64 {
    mollifier_norm::<D>(epsilon) * (-linalg::norm_sq(v) / (2.0 * epsilon)).exp()
}

/// Normalization constant (2 pi eps)^{-d/2}.
#[inline(always)]
pub fn mollifier_norm<const D: usize>(epsilon: f64) -> f64 {
    (2.0 * std::f64::consts::PI * epsilon).powi(-(D as i32)).sqrt()
}

/// Gradient of the mollifier: -(v / eps) psi_eps(v).
#[inline(always)]
pub fn mollifier_gradient<const D: usize>(v: [f64; D], epsilon: f64) -> [f64; D] {
    let psi = mollifier(v, epsilon);
    let mut g = [0.0; D];
    for k in 0..D {
        g[k] = -(v[k] / epsilon) * psi;
    }
    g
}
