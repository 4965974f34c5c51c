//! Flat-file configuration parsing, experiment runners and CSV output.

use crate::analytic::Scenario;
use crate::config::{Method, SimConfig};
use crate::fields::blob_density;
use crate::grid::build_grid;
use crate::stepper::{run, RunOutput};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// All recognized configuration keys, in documentation order.
const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "method",
    "n_o",
    "L",
    "dt",
    "t0",
    "t_end",
    "epsilon",
    "sigma",
    "q_o",
    "q",
    "seed",
    "deterministic",
    "normalize_weights",
    "output_dir",
    "snapshot_every",
    "error_every",
    "support_L",
    "n_o_init",
    "delta_min",
];

/// One `key = value` assignment with its provenance for error messages.
#[derive(Debug, Clone)]
struct Assignment {
    key: String,
    value: String,
    /// 1-based line in the config file, or 0 for a command-line override.
    line: usize,
}

fn parse_assignments(text: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {line}: expected `key = value`, got '{body}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {line}: unknown key '{key}'")));
        }
        out.push(Assignment { key, value, line });
    }
    Ok(out)
}

fn where_at(line: usize) -> String {
    if line == 0 {
        "command line".to_string()
    } else {
        format!("line {line}")
    }
}

fn parse_value<T: std::str::FromStr>(a: &Assignment) -> Result<T> {
    a.value.parse().map_err(|_| {
        Error::Config(format!(
            "{}: invalid value '{}' for key '{}'",
            where_at(a.line),
            a.value,
            a.key
        ))
    })
}

fn parse_bool(a: &Assignment) -> Result<bool> {
    match a.value.as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "{}: invalid boolean '{other}' for key '{}'",
            where_at(a.line),
            a.key
        ))),
    }
}

/// Build a config from file text plus command-line overrides (applied last,
/// so flags win). Overrides use the same key names as the file.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<SimConfig> {
    let mut assignments = parse_assignments(text)?;
    for (key, value) in overrides {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("command line: unknown key '{key}'")));
        }
        assignments.push(Assignment {
            key: key.clone(),
            value: value.clone(),
            line: 0,
        });
    }

    let find_last = |key: &str| assignments.iter().rev().find(|a| a.key == key);
    let scenario_a = find_last("scenario")
        .ok_or_else(|| Error::Config("missing required key 'scenario'".into()))?;
    let scenario = Scenario::parse(&scenario_a.value)?;
    let method_a = find_last("method")
        .ok_or_else(|| Error::Config("missing required key 'method'".into()))?;
    let method = Method::parse(&method_a.value)?;
    let n_o_a =
        find_last("n_o").ok_or_else(|| Error::Config("missing required key 'n_o'".into()))?;
    let n_o: usize = parse_value(n_o_a)?;

    let mut cfg = SimConfig::for_scenario(scenario, method, n_o);
    let mut seed_present = false;
    for a in &assignments {
        match a.key.as_str() {
            "scenario" | "method" | "n_o" => {} // handled above
            "L" => cfg.l = parse_value(a)?,
            "dt" => cfg.dt = parse_value(a)?,
            "t0" => cfg.t0 = parse_value(a)?,
            "t_end" => cfg.t_end = parse_value(a)?,
            "epsilon" => cfg.epsilon = Some(parse_value(a)?),
            "sigma" => cfg.sigma = Some(parse_value(a)?),
            "q_o" => cfg.q_o = parse_value(a)?,
            "q" => cfg.q_override = Some(parse_value(a)?),
            "seed" => {
                cfg.seed = parse_value(a)?;
                seed_present = true;
            }
            "deterministic" => cfg.deterministic = parse_bool(a)?,
            "normalize_weights" => cfg.normalize_weights = parse_bool(a)?,
            "output_dir" => cfg.output.output_dir = PathBuf::from(&a.value),
            "snapshot_every" => cfg.output.snapshot_every = parse_value(a)?,
            "error_every" => cfg.output.error_every = parse_value(a)?,
            "support_L" => cfg.support_l = parse_value(a)?,
            "n_o_init" => cfg.n_o_init = parse_value(a)?,
            "delta_min" => cfg.delta_min = parse_value(a)?,
            other => unreachable!("unvetted key {other}"),
        }
    }
    if method.is_random_batch() && !seed_present {
        return Err(Error::Config(
            "random-batch methods require an explicit 'seed' (file key or flag)".into(),
        ));
    }
    let report = crate::config::validate(&cfg);
    if !report.is_empty() {
        return Err(Error::Config(report.join("; ")));
    }
    Ok(cfg)
}

/// Parse a configuration file.
pub fn parse_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path)?;
    parse_config_with_overrides(&text, &[])
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Snapshot emission steps: 0, every `every` steps, and the final step.
fn snapshot_steps(n_steps: usize, every: usize) -> Vec<usize> {
    if every == 0 {
        return Vec::new();
    }
    let mut steps: Vec<usize> = (0..=n_steps).step_by(every).collect();
    if steps.last() != Some(&n_steps) {
        steps.push(n_steps);
    }
    steps
}

fn manifest_text(config: &SimConfig, outputs: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "scenario = {}", config.scenario.name());
    let _ = writeln!(s, "method = {}", config.method.name());
    let _ = writeln!(s, "d = {}", config.dim());
    let _ = writeln!(s, "n_o = {}", config.n_o);
    let _ = writeln!(s, "L = {}", fmt_f64(config.l));
    let _ = writeln!(s, "dt = {}", fmt_f64(config.dt));
    let _ = writeln!(s, "t0 = {}", fmt_f64(config.t0));
    let _ = writeln!(s, "t_end = {}", fmt_f64(config.t_end));
    let _ = writeln!(s, "epsilon = {}", fmt_f64(config.resolved_epsilon()));
    let _ = writeln!(s, "sigma = {}", fmt_f64(config.resolved_sigma()));
    let _ = writeln!(s, "q_o = {}", config.q_o);
    let _ = writeln!(s, "q = {}", config.batch_count());
    let _ = writeln!(s, "seed = {}", config.seed);
    let _ = writeln!(s, "deterministic = {}", config.deterministic);
    let _ = writeln!(s, "normalize_weights = {}", config.normalize_weights);
    let _ = writeln!(s, "support_L = {}", fmt_f64(config.support_l));
    let _ = writeln!(s, "n_o_init = {}", config.n_o_init);
    let _ = writeln!(s, "delta_min = {}", fmt_f64(config.delta_min));
    let _ = writeln!(s, "snapshot_every = {}", config.output.snapshot_every);
    let _ = writeln!(s, "error_every = {}", config.output.error_every);
    let _ = writeln!(s, "n_steps = {}", config.n_steps());
    let _ = writeln!(s, "n_particles = {}", config.particle_count());
    let _ = writeln!(s, "outputs = {}", outputs.join(","));
    s
}

fn momentum_header(d: usize) -> String {
    ["momentum_x", "momentum_y", "momentum_z"][..d].join(",")
}

/// Run the configured evolution, writing diagnostics.csv, periodic particle
/// and density-slice snapshots, and manifest.txt. Returns the written paths.
pub fn run_evolve(config: &SimConfig) -> Result<Vec<PathBuf>> {
    match config.dim() {
        2 => run_evolve_dim::<2>(config),
        3 => run_evolve_dim::<3>(config),
        d => Err(Error::Config(format!("unsupported dimension {d}"))),
    }
}

fn run_evolve_dim<const D: usize>(config: &SimConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output.output_dir;
    fs::create_dir_all(dir)?;
    let n_steps = config.n_steps();
    let snaps = snapshot_steps(n_steps, config.output.snapshot_every);
    let mut outputs = vec!["manifest.txt".to_string(), "diagnostics.csv".to_string()];
    for &s in &snaps {
        outputs.push(format!("particles_{s}.csv"));
        outputs.push(format!("slice_{s}.csv"));
    }
    // manifest goes out before the run so a crashed run is still identifiable
    fs::write(dir.join("manifest.txt"), manifest_text(config, &outputs))?;

    let grid = build_grid::<D>(config.l, config.n_o)?;
    let cut: Vec<[f64; D]> = grid
        .axis_cut_indices()
        .into_iter()
        .map(|l| grid.centers[l])
        .collect();
    let epsilon = config.resolved_epsilon();
    let zero_wall = config.deterministic;

    let mut diag = BufWriter::new(fs::File::create(dir.join("diagnostics.csv"))?);
    writeln!(
        diag,
        "t,mass,{},energy,entropy,rel_l2_error,wall_time_step",
        momentum_header(D)
    )?;
    let mut io_err: Option<std::io::Error> = None;
    run::<D>(config, |step, ens, rec| {
        if io_err.is_some() {
            return;
        }
        let wall = if zero_wall { 0.0 } else { rec.wall_time_step };
        let row = format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(rec.t),
            fmt_f64(rec.mass),
            rec.momentum.iter().map(|&p| fmt_f64(p)).collect::<Vec<_>>().join(","),
            fmt_f64(rec.energy),
            fmt_f64(rec.entropy),
            fmt_opt(rec.rel_l2_error),
            fmt_f64(wall),
        );
        let mut write_all = || -> std::io::Result<()> {
            writeln!(diag, "{row}")?;
            if snaps.contains(&step) {
                let mut pf =
                    BufWriter::new(fs::File::create(dir.join(format!("particles_{step}.csv")))?);
                let vcols: Vec<String> = (1..=D).map(|k| format!("v_{k}")).collect();
                writeln!(pf, "{},w", vcols.join(","))?;
                for (v, w) in ens.velocities.iter().zip(&ens.weights) {
                    let coords: Vec<String> = v.iter().map(|&c| fmt_f64(c)).collect();
                    writeln!(pf, "{},{}", coords.join(","), fmt_f64(*w))?;
                }
                pf.flush()?;
                let f = blob_density(ens, &cut, epsilon, f64::INFINITY, None);
                let mut sf =
                    BufWriter::new(fs::File::create(dir.join(format!("slice_{step}.csv")))?);
                writeln!(sf, "v,f")?;
                for (c, fv) in cut.iter().zip(&f) {
                    writeln!(sf, "{},{}", fmt_f64(c[0]), fmt_f64(*fv))?;
                }
                sf.flush()?;
            }
            Ok(())
        };
        if let Err(e) = write_all() {
            io_err = Some(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    diag.flush()?;
    Ok(outputs.into_iter().map(|f| dir.join(f)).collect())
}

/// One resolution's result in a convergence sweep.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n_o: usize,
    pub h: f64,
    pub epsilon: f64,
    /// Final-time relative L2 error, averaged over seeds for RBM methods.
    pub rel_l2_error: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceSummary {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted log-log slope of error vs 1/n_o.
    pub slope: f64,
}

/// Least-squares slope of ln(y) against ln(x).
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn final_error_and_wall<const D: usize>(out: &RunOutput<D>) -> Result<(f64, f64)> {
    let last = out.records.last().expect("at least the initial record");
    let err = last.rel_l2_error.ok_or_else(|| {
        Error::numerical("final record carries no relative L2 error".to_string())
    })?;
    let wall: f64 = out.records.iter().map(|r| r.wall_time_step).sum();
    Ok((err, wall))
}

/// Run the template at each resolution (n_o_init follows n_o; epsilon and
/// sigma re-resolve from h) and fit the error decay order. RBM results are
/// averaged over `seeds`; deterministic methods run once per resolution.
pub fn run_convergence(
    template: &SimConfig,
    n_o_list: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceSummary> {
    if n_o_list.len() < 3 {
        return Err(Error::Config(
            "convergence sweep needs at least 3 resolutions".into(),
        ));
    }
    let seeds: &[u64] = if template.method.is_random_batch() && !seeds.is_empty() {
        seeds
    } else {
        &[template.seed]
    };
    let mut rows = Vec::new();
    for &n_o in n_o_list {
        let mut cfg = template.clone();
        cfg.n_o = n_o;
        cfg.n_o_init = n_o;
        cfg.epsilon = None;
        cfg.sigma = None;
        let mut err_sum = 0.0;
        let mut wall_sum = 0.0;
        for &seed in seeds {
            cfg.seed = seed;
            let (err, wall) = match cfg.dim() {
                2 => final_error_and_wall(&run::<2>(&cfg, |_, _, _| {})?)?,
                _ => final_error_and_wall(&run::<3>(&cfg, |_, _, _| {})?)?,
            };
            err_sum += err;
            wall_sum += wall;
        }
        rows.push(ConvergenceRow {
            n_o,
            h: cfg.h(),
            epsilon: cfg.resolved_epsilon(),
            rel_l2_error: err_sum / seeds.len() as f64,
            wall_time: wall_sum / seeds.len() as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| 1.0 / r.n_o as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.rel_l2_error).collect();
    let slope = loglog_slope(&xs, &ys);
    let dir = &template.output.output_dir;
    fs::create_dir_all(dir)?;
    let mut f = BufWriter::new(fs::File::create(dir.join("convergence.csv"))?);
    writeln!(f, "n_o,h,epsilon,rel_l2_error,wall_time")?;
    for r in &rows {
        let wall = if template.deterministic { 0.0 } else { r.wall_time };
        writeln!(
            f,
            "{},{},{},{},{}",
            r.n_o,
            fmt_f64(r.h),
            fmt_f64(r.epsilon),
            fmt_f64(r.rel_l2_error),
            fmt_f64(wall)
        )?;
    }
    f.flush()?;
    fs::write(
        dir.join("convergence_slope.txt"),
        format!("slope = {}\n", fmt_f64(slope)),
    )?;
    Ok(ConvergenceSummary { rows, slope })
}

#[derive(Debug, Clone)]
pub struct CostRow {
    pub n_o: usize,
    pub n_particles: usize,
    /// Mean wall-clock seconds per step over the timed steps.
    pub mean_step_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CostSummary {
    pub rows: Vec<CostRow>,
    /// Fitted log-log slope of step time vs particle count N.
    pub slope: f64,
}

/// Time `k_steps` steps at each resolution and fit wall time against N.
/// Timings are always real; cost.csv is therefore not rerun-stable.
pub fn run_cost_scaling(
    template: &SimConfig,
    n_o_list: &[usize],
    k_steps: usize,
) -> Result<CostSummary> {
    if n_o_list.len() < 3 {
        return Err(Error::Config(
            "cost sweep needs at least 3 resolutions".into(),
        ));
    }
    if k_steps == 0 {
        return Err(Error::Config("cost sweep needs k_steps >= 1".into()));
    }
    let mut rows = Vec::new();
    for &n_o in n_o_list {
        let mut cfg = template.clone();
        cfg.n_o = n_o;
        cfg.n_o_init = n_o;
        cfg.epsilon = None;
        cfg.sigma = None;
        cfg.t_end = cfg.t0 + k_steps as f64 * cfg.dt;
        cfg.output.error_every = 0; // error metric is outside the timed phases anyway
        let records = match cfg.dim() {
            2 => run::<2>(&cfg, |_, _, _| {})?.records,
            _ => run::<3>(&cfg, |_, _, _| {})?.records,
        };
        // record 0 predates the first step and carries no cost
        let timed: f64 = records.iter().skip(1).map(|r| r.wall_time_step).sum();
        rows.push(CostRow {
            n_o,
            n_particles: cfg.particle_count(),
            mean_step_seconds: timed / (records.len() - 1) as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n_particles as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_step_seconds).collect();
    let slope = loglog_slope(&xs, &ys);
    let dir = &template.output.output_dir;
    fs::create_dir_all(dir)?;
    let mut f = BufWriter::new(fs::File::create(dir.join("cost.csv"))?);
    writeln!(f, "n_o,n_particles,mean_step_seconds")?;
    for r in &rows {
        writeln!(
            f,
            "{},{},{}",
            r.n_o,
            r.n_particles,
            fmt_f64(r.mean_step_seconds)
        )?;
    }
    f.flush()?;
    Ok(CostSummary { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RegType;

    const EXAMPLE_1: &str = "\
# 2d bkw benchmark setup
method = rbm1
scenario = bkw2d
n_o = 40
L = 8
dt = 0.01
t_end = 5
q_o = 5
seed = 1
";

    #[test]
    fn parses_rbm_example() {
        let cfg = parse_config_with_overrides(EXAMPLE_1, &[]).unwrap();
        assert_eq!(cfg.scenario, Scenario::Bkw2d);
        assert_eq!(cfg.method, Method::RandomBatchI);
        assert_eq!(cfg.n_o, 40);
        assert_eq!(cfg.l, 8.0);
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.t_end, 5.0);
        assert_eq!(cfg.batch_count(), 25);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.method.reg_type(), RegType::TypeI);
    }

    #[test]
    fn missing_scenario_names_the_key() {
        let err = parse_config_with_overrides("method = det1\nn_o = 10\n", &[]).unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
    }

    #[test]
    fn epsilon_defaults_from_h() {
        let cfg =
            parse_config_with_overrides("scenario = bkw2d\nmethod = det1\nn_o = 40\n", &[])
                .unwrap();
        let h = 2.0 * 8.0 / 40.0_f64;
        assert_eq!(cfg.resolved_epsilon(), 0.64 * h.powf(1.98));
        assert_eq!(cfg.resolved_sigma(), 4.0 * cfg.resolved_epsilon().sqrt());
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let err = parse_config_with_overrides(
            "scenario = bkw2d\nmethod = det1\nn_o = 10\nbogus = 3\n",
            &[],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn bad_value_reports_line() {
        let err = parse_config_with_overrides(
            "scenario = bkw2d\nmethod = det1\nn_o = ten\n",
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn rbm_requires_seed() {
        let err = parse_config_with_overrides(
            "scenario = bkw2d\nmethod = rbm1\nn_o = 10\n",
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        // flag override satisfies the requirement
        assert!(parse_config_with_overrides(
            "scenario = bkw2d\nmethod = rbm1\nn_o = 10\n",
            &[("seed".to_string(), "7".to_string())],
        )
        .is_ok());
    }

    #[test]
    fn flags_override_file_keys() {
        let cfg = parse_config_with_overrides(
            EXAMPLE_1,
            &[
                ("n_o".to_string(), "60".to_string()),
                ("seed".to_string(), "9".to_string()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.n_o, 60);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let cfg = parse_config_with_overrides(
            "\n# header\nscenario = bkw2d # trailing\n\nmethod = det1\nn_o = 12\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.n_o, 12);
    }

    #[test]
    fn invalid_config_fails_validation() {
        let err = parse_config_with_overrides(
            "scenario = bkw2d\nmethod = det1\nn_o = 10\ndt = -1\n",
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn snapshot_steps_cover_start_and_end() {
        assert_eq!(snapshot_steps(10, 0), Vec::<usize>::new());
        assert_eq!(snapshot_steps(10, 4), vec![0, 4, 8, 10]);
        assert_eq!(snapshot_steps(10, 5), vec![0, 5, 10]);
    }

    #[test]
    fn loglog_slope_recovers_power_law() {
        let xs = [1.0_f64, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.7).abs() < 1e-12);
    }
}
