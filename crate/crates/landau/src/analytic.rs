//! Exact solutions, initial conditions, equilibria and particle initialization
//! for the four benchmark problems.

use crate::config::{KernelSpec, ParticleEnsemble, RegType};
use crate::grid::build_grid;
use crate::linalg;
use crate::{Error, Result};
use std::f64::consts::PI;

/// The benchmark problems with their fixed kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// 2D Maxwell molecules, lambda = 1/16, gamma = 0, closed-form solution.
    Bkw2d,
    /// 3D Maxwell molecules, lambda = 1/24, gamma = 0, closed-form solution.
    Bkw3d,
    /// 2D Coulomb relaxation of a bi-Maxwellian, lambda = 1/16, gamma = -3.
    BiMaxwellian2d { u1: [f64; 2], u2: [f64; 2] },
    /// 3D Coulomb Rosenbluth problem, lambda = 1/(4 pi), gamma = -3.
    Rosenbluth3d { mu: f64, s: f64 },
}

impl Scenario {
    pub fn bi_maxwellian() -> Scenario {
        Scenario::BiMaxwellian2d {
            u1: [-2.0, 1.0],
            u2: [0.0, -1.0],
        }
    }

    pub fn rosenbluth() -> Scenario {
        Scenario::Rosenbluth3d { mu: 0.3, s: 10.0 }
    }

    pub fn parse(s: &str) -> Result<Scenario> {
        match s {
            "bkw2d" => Ok(Scenario::Bkw2d),
            "bkw3d" => Ok(Scenario::Bkw3d),
            "bimaxwellian2d" | "bimax2d" => Ok(Scenario::bi_maxwellian()),
            "rosenbluth3d" => Ok(Scenario::rosenbluth()),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}' (expected bkw2d, bkw3d, bimaxwellian2d or rosenbluth3d)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Bkw2d => "bkw2d",
            Scenario::Bkw3d => "bkw3d",
            Scenario::BiMaxwellian2d { .. } => "bimaxwellian2d",
            Scenario::Rosenbluth3d { .. } => "rosenbluth3d",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Scenario::Bkw2d | Scenario::BiMaxwellian2d { .. } => 2,
            Scenario::Bkw3d | Scenario::Rosenbluth3d { .. } => 3,
        }
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        let (d, gamma, lambda) = match self {
            Scenario::Bkw2d => (2, 0.0, 1.0 / 16.0),
            Scenario::Bkw3d => (3, 0.0, 1.0 / 24.0),
            Scenario::BiMaxwellian2d { .. } => (2, -3.0, 1.0 / 16.0),
            Scenario::Rosenbluth3d { .. } => (3, -3.0, 1.0 / (4.0 * PI)),
        };
        KernelSpec {
            d,
            gamma,
            lambda,
            delta_min: 0.0,
        }
    }

    pub fn default_t0(&self) -> f64 {
        match self {
            Scenario::Bkw3d => 5.5,
            _ => 0.0,
        }
    }

    pub fn default_t_end(&self) -> f64 {
        match self {
            Scenario::Bkw2d => 5.0,
            Scenario::Bkw3d => 6.0,
            Scenario::BiMaxwellian2d { .. } => 40.0,
            Scenario::Rosenbluth3d { .. } => 225.0,
        }
    }

    pub fn default_dt(&self) -> f64 {
        match self {
            Scenario::Bkw2d | Scenario::Bkw3d => 0.01,
            Scenario::BiMaxwellian2d { .. } => 0.1,
            Scenario::Rosenbluth3d { .. } => 0.2,
        }
    }

    pub fn default_l(&self, reg_type: RegType) -> f64 {
        match self {
            Scenario::Bkw2d => match reg_type {
                RegType::TypeI => 8.0,
                RegType::TypeII => 10.0,
            },
            Scenario::Bkw3d => 8.0,
            Scenario::BiMaxwellian2d { .. } => 10.0,
            Scenario::Rosenbluth3d { .. } => 1.0,
        }
    }

    pub fn default_support_l(&self) -> f64 {
        match self {
            Scenario::Bkw2d | Scenario::Bkw3d => 4.0,
            Scenario::BiMaxwellian2d { .. } => 10.0,
            Scenario::Rosenbluth3d { .. } => 1.0,
        }
    }

    pub fn default_q_o(&self) -> usize {
        match self {
            Scenario::Bkw2d | Scenario::BiMaxwellian2d { .. } => 5,
            Scenario::Bkw3d => 2,
            Scenario::Rosenbluth3d { .. } => 4,
        }
    }

    /// Density at time t; for the scenarios without a closed-form solution
    /// only t = t0 is meaningful and t is ignored.
    pub fn density(&self, t: f64, v: &[f64]) -> Result<f64> {
        debug_assert_eq!(v.len(), self.dimension());
        match self {
            Scenario::Bkw2d => Ok(bkw2d(t, [v[0], v[1]])),
            Scenario::Bkw3d => bkw3d(t, [v[0], v[1], v[2]]),
            Scenario::BiMaxwellian2d { u1, u2 } => {
                Ok(bimaxwellian_init([v[0], v[1]], *u1, *u2))
            }
            Scenario::Rosenbluth3d { mu, s } => {
                Ok(rosenbluth_init([v[0], v[1], v[2]], *mu, *s))
            }
        }
    }

    /// Exact time-dependent solution, where one exists.
    pub fn has_exact(&self) -> bool {
        matches!(self, Scenario::Bkw2d | Scenario::Bkw3d)
    }

    /// Total mass of the initial condition.
    pub fn analytic_mass(&self) -> f64 {
        match self {
            Scenario::Bkw2d | Scenario::Bkw3d | Scenario::BiMaxwellian2d { .. } => 1.0,
            Scenario::Rosenbluth3d { mu, s } => rosenbluth_equilibrium(*mu, *s).0,
        }
    }
}

/// 2D BKW solution, K = 1 - exp(-t/8)/2; mass 1, zero momentum, energy 2.
pub fn bkw2d(t: f64, v: [f64; 2]) -> f64 {
    let k = 1.0 - (-t / 8.0).exp() / 2.0;
    let v_sq = linalg::norm_sq(v);
    (1.0 / (2.0 * PI * k))
        * (-v_sq / (2.0 * k)).exp()
        * ((2.0 * k - 1.0) / k + (1.0 - k) / (2.0 * k * k) * v_sq)
}

/// 3D BKW solution, K = 1 - exp(-t/6); singular at t = 0 (K = 0).
pub fn bkw3d(t: f64, v: [f64; 3]) -> Result<f64> {
    let k = 1.0 - (-t / 6.0).exp();
    if !(k > 0.0) {
        return Err(Error::numerical(format!(
            "3D BKW profile undefined at t = {t} (K = {k} <= 0)"
        )));
    }
    let v_sq = linalg::norm_sq(v);
    Ok((2.0 * PI * k).powf(-1.5)
        * (-v_sq / (2.0 * k)).exp()
        * ((5.0 * k - 3.0) / (2.0 * k) + (1.0 - k) / (2.0 * k * k) * v_sq))
}

/// Local Maxwellian rho (2 pi T)^{-d/2} exp(-|v-u|^2 / (2T)).
pub fn maxwellian<const D: usize>(rho: f64, u: [f64; D], temp: f64, v: [f64; D]) -> f64 {
    let r_sq = linalg::dist_sq(v, u);
    rho * (2.0 * PI * temp).powi(-(D as i32)).sqrt() * (-r_sq / (2.0 * temp)).exp()
}

/// Sum of two half-mass unit-temperature Gaussians at u1 and u2.
pub fn bimaxwellian_init(v: [f64; 2], u1: [f64; 2], u2: [f64; 2]) -> f64 {
    (1.0 / (4.0 * PI))
        * ((-linalg::dist_sq(v, u1) / 2.0).exp() + (-linalg::dist_sq(v, u2) / 2.0).exp())
}

/// Radially symmetric shell profile S^{-2} exp(-S (|v| - mu)^2 / mu^2).
pub fn rosenbluth_init(v: [f64; 3], mu: f64, s: f64) -> f64 {
    let r = linalg::norm(v);
    (1.0 / (s * s)) * (-s * (r - mu) * (r - mu) / (mu * mu)).exp()
}

/// Closed-form moments of the shell profile: the long-time limit is the
/// Maxwellian with these (rho, u = 0, T).
pub fn rosenbluth_equilibrium(mu: f64, s: f64) -> (f64, [f64; 3], f64) {
    let erfc_m = libm::erfc(-s.sqrt());
    let sqrt_pi_s = (PI / s).sqrt();
    let rho = (2.0 * PI * mu.powi(3) / (s * s))
        * ((1.0 / (2.0 * s) + 1.0) * sqrt_pi_s * erfc_m + (-s).exp() / s);
    let temp = (1.0 / (3.0 * rho))
        * (2.0 * PI * mu.powi(5) / (s * s))
        * ((1.0 + 3.0 / s + 3.0 / (4.0 * s * s)) * sqrt_pi_s * erfc_m
            + (1.0 / s + 5.0 / (2.0 * s * s)) * (-s).exp());
    (rho, [0.0; 3], temp)
}

/// Particles at the cell centers of [-support_L, support_L]^d with weights
/// f(t0, v_k) h^d; with `normalize` the weights are rescaled so the total
/// mass equals the analytic mass.
pub fn init_particles<const D: usize>(
    scenario: Scenario,
    t0: f64,
    support_l: f64,
    n_o_init: usize,
    normalize: bool,
) -> Result<ParticleEnsemble<D>> {
    debug_assert_eq!(D, scenario.dimension());
    let grid = build_grid::<D>(support_l, n_o_init.max(2))?;
    let h_d = if n_o_init == 1 {
        (2.0 * support_l).powi(D as i32)
    } else {
        grid.cell_volume()
    };
    let centers = if n_o_init == 1 {
        vec![[0.0; D]]
    } else {
        grid.centers
    };
    let mut weights = Vec::with_capacity(centers.len());
    for c in &centers {
        weights.push(scenario.density(t0, c)? * h_d);
    }
    if normalize {
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::numerical("initial weights sum to zero".to_string()));
        }
        let scale = scenario.analytic_mass() / mass;
        for w in &mut weights {
            *w *= scale;
        }
    }
    ParticleEnsemble::new(centers, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint quadrature of g over [-l, l]^2.
    fn quad2<F: Fn([f64; 2]) -> f64>(l: f64, n: usize, g: F) -> f64 {
        let h = 2.0 * l / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let x = -l + (i as f64 + 0.5) * h;
            for j in 0..n {
                let y = -l + (j as f64 + 0.5) * h;
                s += h * h * g([x, y]);
            }
        }
        s
    }

    fn quad3<F: Fn([f64; 3]) -> f64>(l: f64, n: usize, g: F) -> f64 {
        let h = 2.0 * l / n as f64;
        let axis: Vec<f64> = (0..n).map(|k| -l + (k as f64 + 0.5) * h).collect();
        let mut s = 0.0;
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    s += h * h * h * g([x, y, z]);
                }
            }
        }
        s
    }

    #[test]
    fn bkw2d_vanishes_at_origin_initially() {
        // K = 1/2 at t = 0 makes the polynomial factor 2K-1 = 0
        assert_eq!(bkw2d(0.0, [0.0, 0.0]), 0.0);
    }

    #[test]
    fn bkw2d_maxwellian_limit() {
        let v = [0.7, -1.1];
        let limit = maxwellian(1.0, [0.0, 0.0], 1.0, v);
        assert!((bkw2d(1e6, v) - limit).abs() < 1e-12);
    }

    #[test]
    fn bkw2d_moments_by_quadrature() {
        let mass = quad2(8.0, 320, |v| bkw2d(0.0, v));
        let energy = quad2(8.0, 320, |v| bkw2d(0.0, v) * linalg::norm_sq(v));
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
        assert!((energy - 2.0).abs() < 1e-6, "energy = {energy}");
    }

    #[test]
    fn bkw2d_moments_constant_in_time() {
        for t in [0.0, 2.5] {
            let mass = quad2(8.0, 320, |v| bkw2d(t, v));
            let energy = quad2(8.0, 320, |v| bkw2d(t, v) * linalg::norm_sq(v));
            assert!((mass - 1.0).abs() < 1e-6);
            assert!((energy - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bkw3d_k_value_and_singularity() {
        assert!(bkw3d(0.0, [0.0; 3]).is_err());
        let k = 1.0 - (-5.5f64 / 6.0).exp();
        assert!((k - (1.0 - (-11.0f64 / 12.0).exp())).abs() < 1e-15);
        assert!(bkw3d(5.5, [0.0; 3]).is_ok());
    }

    #[test]
    fn bkw3d_moments_by_quadrature() {
        let mass = quad3(8.0, 120, |v| bkw3d(5.5, v).unwrap());
        let energy = quad3(8.0, 120, |v| bkw3d(5.5, v).unwrap() * linalg::norm_sq(v));
        assert!((mass - 1.0).abs() < 1e-5, "mass = {mass}");
        assert!((energy - 3.0).abs() < 1e-5, "energy = {energy}");
    }

    #[test]
    fn bkw3d_maxwellian_limit() {
        let v = [0.4, 0.1, -0.9];
        let limit = maxwellian(1.0, [0.0; 3], 1.0, v);
        assert!((bkw3d(1e6, v).unwrap() - limit).abs() < 1e-12);
    }

    #[test]
    fn maxwellian_values_and_shift() {
        assert!(
            (maxwellian(1.0, [0.0, 0.0], 1.0, [0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-16
        );
        let u = [0.4, -0.3];
        let v = [1.0, 0.8];
        let shifted = maxwellian(2.0, u, 0.7, v);
        let centered = maxwellian(2.0, [0.0, 0.0], 0.7, linalg::sub(v, u));
        assert_eq!(shifted, centered);
        let mass = quad2(10.0, 200, |v| maxwellian(2.0, u, 0.7, v));
        assert!((mass - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bimaxwellian_values() {
        let (u1, u2) = ([-2.0, 1.0], [0.0, -1.0]);
        let at_u1 = bimaxwellian_init(u1, u1, u2);
        let expect = (1.0 + (-4.0f64).exp()) / (4.0 * PI);
        assert!((at_u1 - expect).abs() < 1e-15);
        // swapping the two centers leaves the profile unchanged
        assert_eq!(bimaxwellian_init([0.3, 0.7], u1, u2), bimaxwellian_init([0.3, 0.7], u2, u1));
        let mass = quad2(10.0, 250, |v| bimaxwellian_init(v, u1, u2));
        assert!((mass - 1.0).abs() < 1e-8, "mass = {mass}");
    }

    #[test]
    fn rosenbluth_init_values() {
        let (mu, s) = (0.3, 10.0);
        assert!((rosenbluth_init([mu, 0.0, 0.0], mu, s) - 0.01).abs() < 1e-17);
        assert!((rosenbluth_init([0.0; 3], mu, s) - 0.01 * (-10.0f64).exp()).abs() < 1e-17);
        // radial symmetry
        let r = 0.42;
        let a = rosenbluth_init([r, 0.0, 0.0], mu, s);
        let b = rosenbluth_init([0.0, r, 0.0], mu, s);
        assert!((a - b).abs() < 1e-18);
    }

    #[test]
    fn rosenbluth_equilibrium_matches_quadrature() {
        let (mu, s) = (0.3, 10.0);
        let (rho, u, temp) = rosenbluth_equilibrium(mu, s);
        assert_eq!(u, [0.0; 3]);
        let rho_quad = quad3(1.0, 200, |v| rosenbluth_init(v, mu, s));
        assert!(
            (rho - rho_quad).abs() <= 1e-6 * rho_quad,
            "rho = {rho} vs quadrature {rho_quad}"
        );
        let energy_quad = quad3(1.0, 200, |v| rosenbluth_init(v, mu, s) * linalg::norm_sq(v));
        let temp_quad = energy_quad / (3.0 * rho_quad);
        assert!(
            (temp - temp_quad).abs() <= 1e-6 * temp_quad,
            "T = {temp} vs quadrature {temp_quad}"
        );
    }

    #[test]
    fn init_particles_mass_converges_second_order() {
        let coarse = init_particles::<2>(Scenario::Bkw2d, 0.0, 4.0, 6, false).unwrap();
        let fine = init_particles::<2>(Scenario::Bkw2d, 0.0, 4.0, 12, false).unwrap();
        let err_c = (coarse.mass() - 1.0).abs();
        let err_f = (fine.mass() - 1.0).abs();
        assert!(err_c < 0.1, "coarse mass error {err_c}");
        // at least second order in h
        assert!(err_f < err_c / 4.0, "{err_f} !< {err_c}/4");
    }

    #[test]
    fn init_particles_constant_density_weights() {
        // every weight is c * h^d for a constant density c
        let ens = init_particles::<2>(Scenario::bi_maxwellian(), 0.0, 10.0, 8, false).unwrap();
        let h_d = (20.0f64 / 8.0) * (20.0 / 8.0);
        for (c, w) in ens.velocities.iter().zip(&ens.weights) {
            let expect = bimaxwellian_init(*c, [-2.0, 1.0], [0.0, -1.0]) * h_d;
            assert!((w - expect).abs() <= 1e-15 * expect.max(1e-30));
        }
    }

    #[test]
    fn init_particles_normalized_mass_is_exact() {
        let ens = init_particles::<2>(Scenario::Bkw2d, 0.0, 4.0, 30, true).unwrap();
        assert!((ens.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn init_moments_converge_to_analytic() {
        // mass/energy midpoint sums converge at O(h^2) as n doubles
        let moment_errs = |n: usize| {
            let ens = init_particles::<2>(Scenario::Bkw2d, 0.0, 4.0, n, false).unwrap();
            let mass = ens.mass();
            let energy: f64 = ens
                .velocities
                .iter()
                .zip(&ens.weights)
                .map(|(v, w)| w * linalg::norm_sq(*v))
                .sum();
            ((mass - 1.0).abs(), (energy - 2.0).abs())
        };
        let (m1, e1) = moment_errs(6);
        let (m2, e2) = moment_errs(12);
        assert!(m2 < m1 / 4.0 && e2 < e1 / 4.0, "({m1},{e1}) -> ({m2},{e2})");
    }
}
