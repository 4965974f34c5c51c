//! Uniform velocity grid for the type-I quadrature and error measurement.

use crate::{Error, Result};

/// Cell centers of the n_o^d congruent cells tiling [-L, L]^d.
///
/// Centers are enumerated row-major with the last axis fastest, so snapshot
/// files are reproducible byte-for-byte.
#[derive(Debug, Clone)]
pub struct VelocityGrid<const D: usize> {
    pub l: f64,
    pub n_o: usize,
    pub h: f64,
    pub centers: Vec<[f64; D]>,
}

pub fn build_grid<const D: usize>(l: f64, n_o: usize) -> Result<VelocityGrid<D>> {
    if !(l > 0.0) {
        return Err(Error::Config("grid half-extent L must be positive".into()));
    }
    if n_o < 2 {
        return Err(Error::Config("grid needs n_o >= 2 points per dimension".into()));
    }
    let total = n_o
        .checked_pow(D as u32)
        .ok_or_else(|| Error::Config(format!("grid size {n_o}^{D} overflows")))?;
    let h = 2.0 * l / n_o as f64;
    let axis: Vec<f64> = (0..n_o).map(|k| -l + (k as f64 + 0.5) * h).collect();
    let mut centers = Vec::with_capacity(total);
    let mut idx = [0usize; D];
    for _ in 0..total {
        let mut c = [0.0; D];
        for k in 0..D {
            c[k] = axis[idx[k]];
        }
        centers.push(c);
        // increment with last axis fastest
        for k in (0..D).rev() {
            idx[k] += 1;
            if idx[k] < n_o {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(VelocityGrid { l, n_o, h, centers })
}

impl<const D: usize> VelocityGrid<D> {
    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(D as i32)
    }

    /// Flat indices of the cut along the first axis through the middle cell
    /// of every other axis, i.e. f(:, n_o/2, ..., n_o/2).
    pub fn axis_cut_indices(&self) -> Vec<usize> {
        let mid = self.n_o / 2;
        let mut stride = 1usize;
        // first axis is slowest
        let mut offset = 0usize;
        for _ in 1..D {
            offset = offset * self.n_o + mid;
        }
        for _ in 1..D {
            stride *= self.n_o;
        }
        (0..self.n_o).map(|k| k * stride + offset).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_construction_2d() {
        let g = build_grid::<2>(1.0, 2).unwrap();
        assert_eq!(g.h, 1.0);
        assert_eq!(
            g.centers,
            vec![[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [0.5, 0.5]]
        );
    }

    #[test]
    fn first_center_is_offset_by_half_cell() {
        let g = build_grid::<2>(8.0, 40).unwrap();
        assert!((g.h - 0.4).abs() < 1e-15);
        assert!((g.centers[0][0] + 7.8).abs() < 1e-12);
        assert!((g.centers[0][1] + 7.8).abs() < 1e-12);
    }

    #[test]
    fn middle_cell_3d() {
        let g = build_grid::<3>(1.0, 3).unwrap();
        assert_eq!(g.centers.len(), 27);
        assert_eq!(g.centers[13], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn total_volume() {
        let g = build_grid::<2>(3.0, 7).unwrap();
        let total = g.cell_volume() * g.centers.len() as f64;
        assert!((total - 36.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_quadrature_exact_for_linear() {
        let g = build_grid::<2>(2.0, 5).unwrap();
        let f = |v: [f64; 2]| 3.0 + 1.5 * v[0] - 0.5 * v[1];
        let quad: f64 = g.centers.iter().map(|&c| g.cell_volume() * f(c)).sum();
        // integral of the constant over [-2,2]^2; linear terms cancel
        assert!((quad - 3.0 * 16.0).abs() < 1e-10);
    }

    #[test]
    fn axis_cut_walks_first_axis() {
        let g = build_grid::<3>(1.0, 4).unwrap();
        let cut = g.axis_cut_indices();
        assert_eq!(cut.len(), 4);
        for (k, &l) in cut.iter().enumerate() {
            let c = g.centers[l];
            assert_eq!(c[1], g.centers[g.n_o / 2 * 4 + g.n_o / 2][1]);
            assert!((c[0] - (-1.0 + (k as f64 + 0.5) * g.h)).abs() < 1e-14);
            // middle cell along the other axes
            assert!((c[1] - g.h / 2.0).abs() < 1e-14 || (c[1] + g.h / 2.0).abs() < 1e-14);
            assert_eq!(c[1], c[2]);
        }
    }
}
