//! Domain types, configuration and validation shared by all modules.

use crate::analytic::Scenario;
use crate::linalg;
use crate::{Error, Result};

/// The N interacting particles: velocities plus fixed non-negative weights.
///
/// Weights may be zero (such particles are advected but never influence
/// others); the total mass must be positive.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble<const D: usize> {
    pub velocities: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> ParticleEnsemble<D> {
    pub fn new(velocities: Vec<[f64; D]>, weights: Vec<f64>) -> Result<Self> {
        if velocities.is_empty() || velocities.len() != weights.len() {
            return Err(Error::Config(format!(
                "ensemble needs matching non-empty velocities/weights, got {}/{}",
                velocities.len(),
                weights.len()
            )));
        }
        if !velocities.iter().all(linalg::all_finite) {
            return Err(Error::Config("non-finite particle velocity".into()));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Config("weights must be finite and >= 0".into()));
        }
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::Config("total mass must be positive".into()));
        }
        Ok(Self {
            velocities,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    /// Total mass, fixed ascending-index summation order.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Collision kernel parameters: A(z) = lambda |z|^gamma (|z|^2 I - z (x) z).
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub d: usize,
    pub gamma: f64,
    pub lambda: f64,
    /// Minimum-distance floor for the |z|^gamma factor with gamma < 0.
    /// 0.0 disables it.
    pub delta_min: f64,
}

impl KernelSpec {
    pub fn new(d: usize, gamma: f64, lambda: f64) -> Result<Self> {
        let spec = Self {
            d,
            gamma,
            lambda,
            delta_min: 0.0,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let mut report = Vec::new();
        self.collect_violations(&mut report);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(report.join("; ")))
        }
    }

    fn collect_violations(&self, out: &mut Vec<String>) {
        if self.d != 2 && self.d != 3 {
            out.push(format!("kernel dimension must be 2 or 3, got {}", self.d));
        }
        if !(self.lambda > 0.0) {
            out.push("kernel strength lambda must be positive".into());
        }
        let lo = -(self.d as f64) - 1.0;
        if !(self.gamma >= lo && self.gamma <= 1.0) {
            out.push(format!(
                "gamma = {} outside [{}, 1] for d = {}",
                self.gamma, lo, self.d
            ));
        }
        if !(self.delta_min >= 0.0) {
            out.push("delta_min must be >= 0".into());
        }
    }
}

/// Which regularized entropy drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegType {
    TypeI,
    TypeII,
}

/// Mollifier width, truncation radius and the velocity grid extent.
#[derive(Debug, Clone, Copy)]
pub struct RegularizationConfig {
    pub epsilon: f64,
    pub sigma: f64,
    pub reg_type: RegType,
    /// Half-extent of the velocity box [-L, L]^d.
    pub l: f64,
    /// Grid points per dimension.
    pub n_o: usize,
}

impl RegularizationConfig {
    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n_o as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DeterministicI,
    DeterministicII,
    RandomBatchI,
    RandomBatchII,
}

impl Method {
    pub fn reg_type(self) -> RegType {
        match self {
            Method::DeterministicI | Method::RandomBatchI => RegType::TypeI,
            Method::DeterministicII | Method::RandomBatchII => RegType::TypeII,
        }
    }

    pub fn is_random_batch(self) -> bool {
        matches!(self, Method::RandomBatchI | Method::RandomBatchII)
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "deterministic1" | "det1" => Ok(Method::DeterministicI),
            "deterministic2" | "det2" => Ok(Method::DeterministicII),
            "rbm1" => Ok(Method::RandomBatchI),
            "rbm2" => Ok(Method::RandomBatchII),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected det1, det2, rbm1 or rbm2)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::DeterministicI => "det1",
            Method::DeterministicII => "det2",
            Method::RandomBatchI => "rbm1",
            Method::RandomBatchII => "rbm2",
        }
    }
}

/// Output paths and cadence.
#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub output_dir: std::path::PathBuf,
    /// Particle/slice snapshot cadence in steps; 0 disables periodic snapshots.
    pub snapshot_every: usize,
    /// Relative L2 error cadence in steps; 0 means initial and final only.
    pub error_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            output_dir: "out".into(),
            snapshot_every: 0,
            error_every: 10,
        }
    }
}

/// Fully resolved simulation configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub method: Method,
    /// Grid points (and default particles) per dimension.
    pub n_o: usize,
    /// Velocity box half-extent for the grid.
    pub l: f64,
    /// Mollifier width; `None` resolves to 0.64 h^1.98.
    pub epsilon: Option<f64>,
    /// Truncation radius; `None` resolves to 4 sqrt(epsilon).
    pub sigma: Option<f64>,
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    /// Batches per dimension for the random-batch methods; q = q_o^d.
    pub q_o: usize,
    /// Direct batch-count override (takes precedence over q_o when set).
    pub q_override: Option<usize>,
    pub seed: u64,
    /// Half-extent of the particle initialization box.
    pub support_l: f64,
    /// Initialization points per dimension.
    pub n_o_init: usize,
    pub normalize_weights: bool,
    pub delta_min: f64,
    /// Forces fixed-order serial reductions and zeroed wall-time columns so
    /// reruns are byte-identical.
    pub deterministic: bool,
    pub output: OutputConfig,
}

impl SimConfig {
    /// Config with scenario-derived defaults for the given method and resolution.
    pub fn for_scenario(scenario: Scenario, method: Method, n_o: usize) -> Self {
        SimConfig {
            scenario,
            method,
            n_o,
            l: scenario.default_l(method.reg_type()),
            epsilon: None,
            sigma: None,
            dt: scenario.default_dt(),
            t0: scenario.default_t0(),
            t_end: scenario.default_t_end(),
            q_o: scenario.default_q_o(),
            q_override: None,
            seed: 0,
            support_l: scenario.default_support_l(),
            n_o_init: n_o,
            normalize_weights: false,
            delta_min: 0.0,
            deterministic: true,
            output: OutputConfig::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.scenario.dimension()
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n_o as f64
    }

    pub fn resolved_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| 0.64 * self.h().powf(1.98))
    }

    pub fn resolved_sigma(&self) -> f64 {
        self.sigma
            .unwrap_or_else(|| 4.0 * self.resolved_epsilon().sqrt())
    }

    pub fn kernel_spec(&self) -> KernelSpec {
        let mut k = self.scenario.kernel_spec();
        k.delta_min = self.delta_min;
        k
    }

    pub fn reg_config(&self) -> RegularizationConfig {
        RegularizationConfig {
            epsilon: self.resolved_epsilon(),
            sigma: self.resolved_sigma(),
            reg_type: self.method.reg_type(),
            l: self.l,
            n_o: self.n_o,
        }
    }

    /// Number of particles, n_o_init^d.
    pub fn particle_count(&self) -> usize {
        self.n_o_init.pow(self.dim() as u32)
    }

    /// Total batch count for the random-batch methods.
    pub fn batch_count(&self) -> usize {
        self.q_override
            .unwrap_or_else(|| self.q_o.pow(self.dim() as u32))
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t0) / self.dt).floor() as usize
    }
}

/// List of violated invariants; empty iff the config is runnable.
pub type ValidationReport = Vec<String>;

/// Pure report-style validation: same config always yields the same report.
pub fn validate(config: &SimConfig) -> ValidationReport {
    let mut report = Vec::new();
    config.kernel_spec().collect_violations(&mut report);
    if !(config.dt > 0.0) {
        report.push("dt must be positive".into());
    }
    if !(config.t_end >= config.t0) {
        report.push("t_end must be >= t0".into());
    }
    if !(config.l > 0.0) {
        report.push("L must be positive".into());
    }
    if config.n_o < 2 {
        report.push("n_o must be >= 2".into());
    }
    if !(config.support_l > 0.0) {
        report.push("support_L must be positive".into());
    }
    if config.n_o_init < 1 {
        report.push("n_o_init must be >= 1".into());
    }
    if let Some(eps) = config.epsilon {
        if !(eps > 0.0) {
            report.push("epsilon must be positive".into());
        }
    }
    if let Some(sigma) = config.sigma {
        if !(sigma > 0.0) {
            report.push("sigma must be positive".into());
        }
    }
    if config.method.is_random_batch() {
        let q = config.batch_count();
        if q < 1 {
            report.push("batch count q must be >= 1".into());
        }
        let n = config.particle_count();
        if q > n {
            report.push(format!("batch count q = {q} exceeds particle count N = {n}"));
        }
    }
    let n = config
        .n_o_init
        .checked_pow(config.dim() as u32)
        .and_then(|n| config.n_o.checked_pow(config.dim() as u32).map(|_| n));
    if n.is_none() {
        report.push("n_o^d overflows the index type".into());
    }
    report
}
