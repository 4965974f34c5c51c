//! Conserved-quantity, entropy and error measurements.

use crate::config::ParticleEnsemble;
use crate::fields::blob_density;
use crate::grid::VelocityGrid;
use crate::linalg;
use crate::{Error, Result};

/// One diagnostics row. Momentum is stored padded to three components so the
/// record type stays dimension-independent; only the first d entries are used.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub momentum: Vec<f64>,
    /// Sum w_i |v_i|^2.
    pub energy: f64,
    pub entropy: f64,
    pub rel_l2_error: Option<f64>,
    pub wall_time_step: f64,
}

/// (mass, momentum, energy) in fixed ascending-index summation order.
pub fn moments<const D: usize>(ensemble: &ParticleEnsemble<D>) -> (f64, [f64; D], f64) {
    let mut mass = 0.0;
    let mut momentum = [0.0; D];
    let mut energy = 0.0;
    for (v, w) in ensemble.velocities.iter().zip(&ensemble.weights) {
        mass += w;
        for k in 0..D {
            momentum[k] += w * v[k];
        }
        energy += w * linalg::norm_sq(*v);
    }
    (mass, momentum, energy)
}

/// Relative grid-l2 distance between the exact density and the untruncated
/// blob of the ensemble:
/// sqrt(sum_l h^d |exact_l - blob_l|^2) / sqrt(sum_l h^d |exact_l|^2).
pub fn relative_l2_error<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    grid: &VelocityGrid<D>,
    exact: impl Fn([f64; D]) -> f64,
    epsilon: f64,
) -> Result<f64> {
    let blob = blob_density(ensemble, &grid.centers, epsilon, f64::INFINITY, None);
    let h_d = grid.cell_volume();
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, &c) in grid.centers.iter().enumerate() {
        let e = exact(c);
        let d = e - blob[l];
        num += h_d * d * d;
        den += h_d * e * e;
    }
    if den == 0.0 {
        return Err(Error::numerical(
            "exact density vanishes on every grid center".to_string(),
        ));
    }
    Ok((num / den).sqrt())
}
