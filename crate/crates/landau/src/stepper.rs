//! Forward-Euler particle updates (full-sum and random-batch) and the
//! simulation driver.

use crate::analytic::init_particles;
use crate::batching::{make_batches, BatchPlan};
use crate::config::{validate, KernelSpec, ParticleEnsemble, RegType, SimConfig};
use crate::diagnostics::{moments, relative_l2_error, DiagnosticsRecord};
use crate::fields::{
    blob_density, entropy_type1, entropy_type2, log_density, variation_gradient_type1,
    variation_gradient_type2, DEFAULT_DENSITY_FLOOR,
};
use crate::grid::build_grid;
use crate::kernels::kernel_apply;
use crate::linalg;
use crate::neighbor::{build_cell_list, CellList};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Per-step parameters shared by both update rules.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub kernel: &'a KernelSpec,
    pub dt: f64,
}

fn check_finite<const D: usize>(vels: &[[f64; D]]) -> Result<()> {
    for (i, v) in vels.iter().enumerate() {
        if !linalg::all_finite(v) {
            return Err(Error::numerical(format!(
                "non-finite velocity update for particle {i} \
                 (coincident particles with a singular kernel?)"
            )));
        }
    }
    Ok(())
}

/// Synchronous full-sum update:
/// v_i <- v_i - dt sum_{j != i} w_j A(v_i - v_j)(F_i - F_j).
pub fn full_step<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    f_var: &[[f64; D]],
    ctx: StepContext,
) -> Result<Vec<[f64; D]>> {
    assert_eq!(f_var.len(), ensemble.len());
    let vels = &ensemble.velocities;
    let ws = &ensemble.weights;
    let n = vels.len();
    // A(z) is even in z and the field difference is antisymmetric, so each
    // unordered pair shares one kernel evaluation:
    // drift_i += w_j A(z)(F_i - F_j), drift_j -= w_i A(z)(F_i - F_j).
    let mut drift = vec![[0.0; D]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if ws[i] == 0.0 && ws[j] == 0.0 {
                continue;
            }
            let z = linalg::sub(vels[i], vels[j]);
            let b = linalg::sub(f_var[i], f_var[j]);
            let a = kernel_apply(z, b, ctx.kernel);
            if ws[j] != 0.0 {
                for k in 0..D {
                    drift[i][k] += ws[j] * a[k];
                }
            }
            if ws[i] != 0.0 {
                for k in 0..D {
                    drift[j][k] -= ws[i] * a[k];
                }
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vels[i];
        for k in 0..D {
            v[k] -= ctx.dt * drift[i][k];
        }
        out.push(v);
    }
    check_finite(&out)?;
    Ok(out)
}

/// Random-batch update: interactions restricted to batchmates, rescaled by
/// (N-1)/(|C|-1) per batch. Singleton batches leave their particle unchanged.
pub fn rbm_step<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    f_var: &[[f64; D]],
    plan: &BatchPlan,
    ctx: StepContext,
) -> Result<Vec<[f64; D]>> {
    assert_eq!(f_var.len(), ensemble.len());
    assert_eq!(plan.n(), ensemble.len());
    let vels = &ensemble.velocities;
    let ws = &ensemble.weights;
    let n = vels.len();
    let mut out = vels.clone();
    for v in 0..plan.q() {
        let batch = plan.batch(v);
        if batch.len() < 2 {
            continue;
        }
        let factor = (n as f64 - 1.0) / (batch.len() as f64 - 1.0);
        let m = batch.len();
        // shared kernel evaluation per unordered pair, as in `full_step`
        let mut drift = vec![[0.0; D]; m];
        for bi in 0..m {
            let i = batch[bi] as usize;
            for bj in (bi + 1)..m {
                let j = batch[bj] as usize;
                if ws[i] == 0.0 && ws[j] == 0.0 {
                    continue;
                }
                let z = linalg::sub(vels[i], vels[j]);
                let b = linalg::sub(f_var[i], f_var[j]);
                let a = kernel_apply(z, b, ctx.kernel);
                if ws[j] != 0.0 {
                    for k in 0..D {
                        drift[bi][k] += ws[j] * a[k];
                    }
                }
                if ws[i] != 0.0 {
                    for k in 0..D {
                        drift[bj][k] -= ws[i] * a[k];
                    }
                }
            }
        }
        for (bi, &iu) in batch.iter().enumerate() {
            let i = iu as usize;
            for k in 0..D {
                out[i][k] = vels[i][k] - ctx.dt * factor * drift[bi][k];
            }
        }
    }
    check_finite(&out)?;
    Ok(out)
}

/// Final state plus the per-step diagnostics series.
pub struct RunOutput<const D: usize> {
    pub ensemble: ParticleEnsemble<D>,
    pub records: Vec<DiagnosticsRecord>,
}

/// Run the configured method from t0 to t_end.
///
/// The sink is called once per emitted record (including the initial state)
/// with the step index, current ensemble and the record.
pub fn run<const D: usize>(
    config: &SimConfig,
    mut sink: impl FnMut(usize, &ParticleEnsemble<D>, &DiagnosticsRecord),
) -> Result<RunOutput<D>> {
    assert_eq!(D, config.dim(), "dimension dispatch mismatch");
    let report = validate(config);
    if !report.is_empty() {
        return Err(Error::Config(report.join("; ")));
    }
    let kernel = config.kernel_spec();
    let epsilon = config.resolved_epsilon();
    let reg_type = config.method.reg_type();
    let is_rbm = config.method.is_random_batch();
    // deterministic methods use the untruncated sums; RBM methods truncate
    let sigma = if is_rbm {
        config.resolved_sigma()
    } else {
        f64::INFINITY
    };
    let grid = build_grid::<D>(config.l, config.n_o)?;
    let cl_grid = if is_rbm && reg_type == RegType::TypeI {
        Some(build_cell_list(&grid.centers, sigma))
    } else {
        None
    };
    let mut ens = init_particles::<D>(
        config.scenario,
        config.t0,
        config.support_l,
        config.n_o_init,
        config.normalize_weights,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_steps = config.n_steps();
    let q = config.batch_count();
    let ctx = StepContext {
        kernel: &kernel,
        dt: config.dt,
    };
    let error_every = config.output.error_every;
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut prev_wall = 0.0f64;

    for n in 0..=n_steps {
        let t = config.t0 + n as f64 * config.dt;
        let phase_start = Instant::now();
        // phase 1: blob density at the type-matched targets
        let cl_particles: Option<CellList<D>> = if is_rbm {
            Some(build_cell_list(&ens.velocities, sigma))
        } else {
            None
        };
        let density = match reg_type {
            RegType::TypeI => {
                blob_density(&ens, &grid.centers, epsilon, sigma, cl_particles.as_ref())
            }
            RegType::TypeII => blob_density(
                &ens,
                &ens.velocities,
                epsilon,
                sigma,
                cl_particles.as_ref(),
            ),
        };
        let phase1_wall = phase_start.elapsed().as_secs_f64();

        // diagnostics for the current state (not counted as step cost)
        let entropy = match reg_type {
            RegType::TypeI => entropy_type1(&grid, &density),
            RegType::TypeII => entropy_type2(&ens, &density).map_err(|e| e.at_step(n))?,
        };
        let (mass, momentum, energy) = moments(&ens);
        let measure_error = config.scenario.has_exact()
            && (n == 0 || n == n_steps || (error_every > 0 && n % error_every == 0));
        let rel_l2 = if measure_error {
            let scenario = config.scenario;
            Some(relative_l2_error(
                &ens,
                &grid,
                |c| scenario.density(t, &c).unwrap_or(f64::NAN),
                epsilon,
            )?)
        } else {
            None
        };
        let record = DiagnosticsRecord {
            step: n,
            t,
            mass,
            momentum: momentum.to_vec(),
            energy,
            entropy,
            rel_l2_error: rel_l2,
            wall_time_step: prev_wall,
        };
        sink(n, &ens, &record);
        records.push(record);
        if n == n_steps {
            break;
        }

        // phases 2-3: variation gradient and velocity update
        let phase_start = Instant::now();
        let f_var = match reg_type {
            RegType::TypeI => {
                let log_f = log_density(&density, DEFAULT_DENSITY_FLOOR);
                variation_gradient_type1(
                    &ens.velocities,
                    &grid,
                    &log_f,
                    epsilon,
                    sigma,
                    cl_grid.as_ref(),
                )
            }
            RegType::TypeII => variation_gradient_type2(
                &ens,
                &density,
                epsilon,
                sigma,
                cl_particles.as_ref(),
            ),
        }
        .map_err(|e| e.at_step(n))?;
        let new_vels = if is_rbm {
            let plan = make_batches(ens.len(), q, &mut rng).map_err(|e| e.at_step(n))?;
            rbm_step(&ens, &f_var, &plan, ctx)
        } else {
            full_step(&ens, &f_var, ctx)
        }
        .map_err(|e| e.at_step(n))?;
        ens.velocities = new_vels;
        prev_wall = phase1_wall + phase_start.elapsed().as_secs_f64();
    }

    Ok(RunOutput {
        ensemble: ens,
        records,
    })
}
