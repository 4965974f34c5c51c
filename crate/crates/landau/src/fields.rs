//! Blob densities, regularized entropies and first-variation gradients.
//!
//! Every sum runs in ascending index order. The sigma-truncated paths (with
//! or without a cell list) therefore produce bitwise-identical results, and
//! sigma = infinity reproduces the untruncated sums exactly.

use crate::config::ParticleEnsemble;
use crate::grid::VelocityGrid;
use crate::kernels::{mollifier_gradient, mollifier_norm};
use crate::linalg;
use crate::neighbor::{brute_force_within, CellList};
use crate::{Error, Result};

/// Guards log underflow for nonzero grid densities.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-300;

/// Exponent below which exp underflows to exactly 0.0, so the term can be
/// skipped without changing the sum.
const EXP_UNDERFLOW: f64 = -746.0;

#[inline(always)]
fn gaussian_term<const D: usize>(diff: [f64; D], inv_two_eps: f64, norm: f64) -> f64 {
    let arg = -linalg::norm_sq(diff) * inv_two_eps;
    if arg < EXP_UNDERFLOW {
        0.0
    } else {
        norm * arg.exp()
    }
}

/// Blob density sum_{k: |t - v_k| <= sigma} w_k psi_eps(t - v_k) at each target.
///
/// `sigma = f64::INFINITY` gives the untruncated sum. When a cell list over
/// the ensemble velocities is supplied it must have been built with the same
/// sigma; without one, truncation falls back to a brute-force distance filter.
pub fn blob_density<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    targets: &[[f64; D]],
    epsilon: f64,
    sigma: f64,
    cl: Option<&CellList<D>>,
) -> Vec<f64> {
    assert!(epsilon > 0.0);
    let norm = mollifier_norm::<D>(epsilon);
    let inv_two_eps = 1.0 / (2.0 * epsilon);
    let vels = &ensemble.velocities;
    let ws = &ensemble.weights;
    let mut out = Vec::with_capacity(targets.len());
    if sigma.is_infinite() {
        for &t in targets {
            let mut s = 0.0;
            for (v, w) in vels.iter().zip(ws) {
                s += w * gaussian_term(linalg::sub(t, *v), inv_two_eps, norm);
            }
            out.push(s);
        }
    } else if let Some(cl) = cl {
        debug_assert_eq!(cl.n_points(), vels.len());
        let mut idx = Vec::new();
        for &t in targets {
            cl.query_within_into(t, vels, &mut idx);
            let mut s = 0.0;
            for &k in &idx {
                let k = k as usize;
                s += ws[k] * gaussian_term(linalg::sub(t, vels[k]), inv_two_eps, norm);
            }
            out.push(s);
        }
    } else {
        let sigma_sq = sigma * sigma;
        for &t in targets {
            let mut s = 0.0;
            for (v, w) in vels.iter().zip(ws) {
                let diff = linalg::sub(t, *v);
                if linalg::norm_sq(diff) <= sigma_sq {
                    s += w * gaussian_term(diff, inv_two_eps, norm);
                }
            }
            out.push(s);
        }
    }
    out
}

/// log f per grid cell: NaN marks cells with exactly zero density (excluded
/// from the type-I variation sums); positive densities are floored before the
/// log to guard underflow.
pub fn log_density(density: &[f64], floor: f64) -> Vec<f64> {
    density
        .iter()
        .map(|&f| if f == 0.0 { f64::NAN } else { f.max(floor).ln() })
        .collect()
}

/// Type-I variation gradient:
/// F_i = sum_{l: |v_i - v_l^c| <= sigma} h^d grad psi_eps(v_i - v_l^c) log f_l^c.
///
/// NaN entries of `log_density_on_grid` are excluded cells; an infinite entry
/// inside some truncation ball is an error.
pub fn variation_gradient_type1<const D: usize>(
    particles: &[[f64; D]],
    grid: &VelocityGrid<D>,
    log_density_on_grid: &[f64],
    epsilon: f64,
    sigma: f64,
    cl_grid: Option<&CellList<D>>,
) -> Result<Vec<[f64; D]>> {
    assert_eq!(log_density_on_grid.len(), grid.centers.len());
    let h_d = grid.cell_volume();
    let mut out = Vec::with_capacity(particles.len());
    let mut idx = Vec::new();
    for &v in particles {
        let mut acc = [0.0; D];
        let mut add = |l: usize| -> Result<()> {
            let log_f = log_density_on_grid[l];
            if log_f.is_nan() {
                return Ok(()); // empty cell, contributes nothing
            }
            if log_f.is_infinite() {
                return Err(Error::numerical(format!(
                    "non-finite log density at grid cell {l}"
                )));
            }
            let g = mollifier_gradient(linalg::sub(v, grid.centers[l]), epsilon);
            for k in 0..D {
                acc[k] += h_d * g[k] * log_f;
            }
            Ok(())
        };
        if sigma.is_infinite() {
            for l in 0..grid.centers.len() {
                add(l)?;
            }
        } else if let Some(cl) = cl_grid {
            debug_assert_eq!(cl.n_points(), grid.centers.len());
            cl.query_within_into(v, &grid.centers, &mut idx);
            for &l in &idx {
                add(l as usize)?;
            }
        } else {
            let sigma_sq = sigma * sigma;
            for (l, c) in grid.centers.iter().enumerate() {
                if linalg::dist_sq(v, *c) <= sigma_sq {
                    add(l)?;
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Type-II variation gradient:
/// F_i = sum_{k: |v_i - v_k| <= sigma} w_k grad psi_eps(v_i - v_k) (1/f_i + 1/f_k).
///
/// Zero-weight terms are skipped (they contribute nothing and their density
/// may legitimately vanish).
pub fn variation_gradient_type2<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    density_at_particles: &[f64],
    epsilon: f64,
    sigma: f64,
    cl: Option<&CellList<D>>,
) -> Result<Vec<[f64; D]>> {
    let vels = &ensemble.velocities;
    let ws = &ensemble.weights;
    let f = density_at_particles;
    assert_eq!(f.len(), vels.len());
    for i in 0..vels.len() {
        if ws[i] > 0.0 && !(f[i] > 0.0) {
            return Err(Error::numerical(format!(
                "non-positive density {} at weighted particle {i}",
                f[i]
            )));
        }
    }
    let mut out = Vec::with_capacity(vels.len());
    let mut idx = Vec::new();
    for i in 0..vels.len() {
        let v = vels[i];
        let inv_fi = if f[i] > 0.0 { 1.0 / f[i] } else { 0.0 };
        let mut acc = [0.0; D];
        let mut add = |k: usize| {
            if k == i || ws[k] == 0.0 {
                return; // self gradient vanishes; zero weights never contribute
            }
            let g = mollifier_gradient(linalg::sub(v, vels[k]), epsilon);
            // f_k >= w_k psi(0) > 0 for weighted particles
            let coeff = ws[k] * (inv_fi + 1.0 / f[k]);
            for a in 0..D {
                acc[a] += g[a] * coeff;
            }
        };
        if sigma.is_infinite() {
            for k in 0..vels.len() {
                add(k);
            }
        } else if let Some(cl) = cl {
            debug_assert_eq!(cl.n_points(), vels.len());
            cl.query_within_into(v, vels, &mut idx);
            for &k in &idx {
                add(k as usize);
            }
        } else {
            let sigma_sq = sigma * sigma;
            for k in 0..vels.len() {
                if linalg::dist_sq(v, vels[k]) <= sigma_sq {
                    add(k);
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Grid-quadrature entropy sum_l h^d f_l log f_l with 0 log 0 = 0.
pub fn entropy_type1<const D: usize>(grid: &VelocityGrid<D>, density_on_grid: &[f64]) -> f64 {
    let h_d = grid.cell_volume();
    let mut s = 0.0;
    for &f in density_on_grid {
        if f > 0.0 {
            s += h_d * f * f.ln();
        }
    }
    s
}

/// Quadrature-free entropy sum_i w_i log f_i.
pub fn entropy_type2<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    density_at_particles: &[f64],
) -> Result<f64> {
    let mut s = 0.0;
    for (i, (&w, &f)) in ensemble
        .weights
        .iter()
        .zip(density_at_particles)
        .enumerate()
    {
        if w == 0.0 {
            continue;
        }
        if !(f > 0.0) {
            return Err(Error::numerical(format!(
                "non-positive density {f} at weighted particle {i}"
            )));
        }
        s += w * f.ln();
    }
    Ok(s)
}

/// Brute-force sigma filter used by the truncation paths when no cell list is
/// available; re-exported for the oracle tests.
pub fn sigma_filtered_indices<const D: usize>(
    points: &[[f64; D]],
    x: [f64; D],
    sigma: f64,
) -> Vec<u32> {
    brute_force_within(points, x, sigma)
}
