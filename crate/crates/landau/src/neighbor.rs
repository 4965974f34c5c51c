//! Cell-list spatial index over velocity points.
//!
//! Cells have side sigma and queries scan the 3^d adjacent cells, then apply
//! an exact distance filter, so the cell list can never change results versus
//! brute force -- only speed. Returned indices are sorted ascending so that
//! truncated sums accumulate in the same order as a brute-force sigma filter.

#[derive(Debug, Clone)]
pub struct CellList<const D: usize> {
    cell_size: f64,
    origin: [f64; D],
    dims: [usize; D],
    /// Flattened buckets, row-major over `dims` with the last axis fastest.
    buckets: Vec<Vec<u32>>,
    n_points: usize,
}

pub fn build_cell_list<const D: usize>(points: &[[f64; D]], sigma: f64) -> CellList<D> {
    assert!(sigma > 0.0, "cell list needs sigma > 0");
    let mut origin = [f64::INFINITY; D];
    let mut max = [f64::NEG_INFINITY; D];
    for p in points {
        for k in 0..D {
            origin[k] = origin[k].min(p[k]);
            max[k] = max[k].max(p[k]);
        }
    }
    if points.is_empty() {
        origin = [0.0; D];
        max = [0.0; D];
    }
    let mut dims = [1usize; D];
    let mut n_cells = 1usize;
    for k in 0..D {
        let extent = (max[k] - origin[k]).max(0.0);
        dims[k] = (extent / sigma).floor() as usize + 1;
        n_cells *= dims[k];
    }
    let mut buckets = vec![Vec::new(); n_cells];
    for (i, p) in points.iter().enumerate() {
        let cell = cell_of(p, &origin, sigma, &dims);
        buckets[flat(&cell, &dims)].push(i as u32);
    }
    CellList {
        cell_size: sigma,
        origin,
        dims,
        buckets,
        n_points: points.len(),
    }
}

#[inline]
fn cell_of<const D: usize>(
    p: &[f64; D],
    origin: &[f64; D],
    size: f64,
    dims: &[usize; D],
) -> [usize; D] {
    let mut c = [0usize; D];
    for k in 0..D {
        let raw = ((p[k] - origin[k]) / size).floor();
        c[k] = (raw.max(0.0) as usize).min(dims[k] - 1);
    }
    c
}

#[inline]
fn flat<const D: usize>(cell: &[usize; D], dims: &[usize; D]) -> usize {
    let mut idx = 0;
    for k in 0..D {
        idx = idx * dims[k] + cell[k];
    }
    idx
}

impl<const D: usize> CellList<D> {
    pub fn sigma(&self) -> f64 {
        self.cell_size
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Indices i with |x - points[i]| <= sigma, ascending, appended to `out`.
    pub fn query_within_into(&self, x: [f64; D], points: &[[f64; D]], out: &mut Vec<u32>) {
        out.clear();
        let sigma_sq = self.cell_size * self.cell_size;
        // cell coordinate of x, possibly outside the indexed box
        let mut lo = [0usize; D];
        let mut hi = [0usize; D];
        for k in 0..D {
            let c = ((x[k] - self.origin[k]) / self.cell_size).floor();
            let l = c - 1.0;
            let h = c + 1.0;
            if h < 0.0 || l >= self.dims[k] as f64 {
                return; // query box does not intersect the indexed box
            }
            lo[k] = l.max(0.0) as usize;
            hi[k] = (h.min(self.dims[k] as f64 - 1.0)).max(0.0) as usize;
        }
        let mut cell = lo;
        loop {
            for &i in &self.buckets[flat(&cell, &self.dims)] {
                if crate::linalg::dist_sq(points[i as usize], x) <= sigma_sq {
                    out.push(i);
                }
            }
            // advance over the (up to) 3^d neighborhood
            let mut k = D;
            loop {
                if k == 0 {
                    out.sort_unstable();
                    return;
                }
                k -= 1;
                if cell[k] < hi[k] {
                    cell[k] += 1;
                    break;
                }
                cell[k] = lo[k];
            }
        }
    }

    pub fn query_within(&self, x: [f64; D], points: &[[f64; D]]) -> Vec<u32> {
        let mut out = Vec::new();
        self.query_within_into(x, points, &mut out);
        out
    }
}

/// Brute-force reference: indices within sigma of x, ascending.
pub fn brute_force_within<const D: usize>(
    points: &[[f64; D]],
    x: [f64; D],
    sigma: f64,
) -> Vec<u32> {
    let sigma_sq = sigma * sigma;
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| crate::linalg::dist_sq(**p, x) <= sigma_sq)
        .map(|(i, _)| i as u32)
        .collect()
}
