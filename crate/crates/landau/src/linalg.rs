//! Small fixed-dimension vector helpers used throughout the crate.

#[inline(always)]
pub fn sub<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for k in 0..D {
        r[k] = a[k] - b[k];
    }
    r
}

#[inline(always)]
pub fn add<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut r = [0.0; D];
    for k in 0..D {
        r[k] = a[k] + b[k];
    }
    r
}

#[inline(always)]
pub fn scale<const D: usize>(a: [f64; D], s: f64) -> [f64; D] {
    let mut r = [0.0; D];
    for k in 0..D {
        r[k] = a[k] * s;
    }
    r
}

#[inline(always)]
pub fn dot<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        s += a[k] * b[k];
    }
    s
}

#[inline(always)]
pub fn norm_sq<const D: usize>(a: [f64; D]) -> f64 {
    dot(a, a)
}

#[inline(always)]
pub fn norm<const D: usize>(a: [f64; D]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline(always)]
pub fn dist_sq<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

pub fn all_finite<const D: usize>(a: &[f64; D]) -> bool {
    a.iter().all(|x| x.is_finite())
}
