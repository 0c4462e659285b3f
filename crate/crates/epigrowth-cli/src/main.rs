//! Command line driver: one trajectory runs, Monte Carlo studies across the
//! mollifier ladder, and closed-form analytics, all writing CSV + summary +
//! manifest into an output directory.
//!
//! Exit codes: 0 success (all gates passed), 2 a statistical gate failed,
//! 1 any other error.

mod config_file;
mod manifest;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use config_file::Overrides;
use epigrowth::moments;
use epigrowth::profile::RegularizationProfile;
use epigrowth::solver::{simulate, SimulationConfig};
use epigrowth::studies::{
    coupled_convergence_study, grad_v_bound_study, ladder_trunc, moment_validation_suite,
    nonlinearity_decay_study, BoundParams, ConvergeParams, DecayParams,
};
use epigrowth::transform::to_physical;
use manifest::Manifest;
use report::{num, write_csv, Summary};

/// Threshold-map exponent for the computable decay bound.
const UCV_BETA: f64 = 0.25;
/// Threshold floor for the same bound.
const UCV_FLOOR: f64 = 1.0;

#[derive(Parser)]
#[command(name = "epigrowth", version, about = "Stochastic surface-growth simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one trajectory; write diagnostics CSV, snapshots, and a heightmap
    Simulate(CommonOpts),
    /// Validate closed-form noise moments against Monte Carlo
    Moments(CommonOpts),
    /// Slope-current moment decay across the mollifier ladder
    Decay(CommonOpts),
    /// Coupled convergence to the linear equation as the mollifier opens
    Converge(CommonOpts),
    /// Uniform gradient bound for the noise-subtracted component
    Bound(CommonOpts),
    /// Closed-form covariance, determinant, and bound table (no simulation)
    Analyze(CommonOpts),
}

#[derive(Args, Debug)]
struct CommonOpts {
    /// Flat key = value config file; flags below override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for all randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensembles (0 = one per core)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Domain side length
    #[arg(long = "L", value_name = "LEN")]
    domain_len: Option<f64>,
    /// Mode truncation per axis
    #[arg(long = "N", value_name = "MODES")]
    trunc: Option<i32>,
    /// Surface-tension coefficient of the fourth-order term
    #[arg(long)]
    delta: Option<f64>,
    /// Noise amplitude
    #[arg(long)]
    sigma: Option<f64>,
    /// Mollifier strength
    #[arg(long)]
    eps: Option<f64>,
    /// Mollifier family: sharp-cutoff | smooth-rational | exponential | identity
    #[arg(long)]
    profile: Option<String>,
    /// Tail exponent of the smooth-rational family
    #[arg(long)]
    profile_decay: Option<f64>,
    /// Time step
    #[arg(long)]
    dt: Option<f64>,
    /// Time horizon
    #[arg(long = "T", value_name = "TIME")]
    horizon: Option<f64>,
    /// Physical grid points per axis (default 4N)
    #[arg(long)]
    n_grid: Option<usize>,
    /// Ensemble size (per-study default otherwise)
    #[arg(long)]
    samples: Option<usize>,
    /// Moment exponent for decay/analyze
    #[arg(long)]
    p: Option<f64>,
    /// Evaluation time for decay/analyze (default T)
    #[arg(long = "t-eval")]
    t_eval: Option<f64>,
    /// Comma-separated mollifier ladder for the studies
    #[arg(long, value_name = "LIST")]
    epsilons: Option<String>,
}

impl CommonOpts {
    fn to_overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            domain_len: self.domain_len,
            trunc: self.trunc,
            delta: self.delta,
            sigma: self.sigma,
            profile: self
                .profile
                .as_deref()
                .map(config_file::parse_profile)
                .transpose()?,
            eps: self.eps,
            profile_decay: self.profile_decay,
            dt: self.dt,
            horizon: self.horizon,
            seed: self.seed,
            n_grid: self.n_grid,
            workers: self.workers,
            samples: self.samples,
            p: self.p,
            t_eval: self.t_eval,
            epsilons: self
                .epsilons
                .as_deref()
                .map(config_file::parse_eps_list)
                .transpose()?,
        })
    }
}

/// A fully resolved invocation: defaults, then config file, then flags.
struct Run {
    cfg: SimulationConfig,
    workers: usize,
    out: PathBuf,
    epsilons: Vec<f64>,
    samples: Option<usize>,
    p: f64,
    t_eval: Option<f64>,
}

fn resolve(opts: &CommonOpts) -> Result<Run> {
    let mut over = Overrides::default();
    if let Some(path) = &opts.config {
        over = config_file::load(path)?;
    }
    let over = over.merge(opts.to_overrides()?);

    let mut cfg = SimulationConfig {
        seed: 0,
        ..SimulationConfig::default()
    };
    if let Some(v) = over.domain_len {
        cfg.domain_len = v;
    }
    if let Some(v) = over.trunc {
        cfg.trunc = v;
    }
    if let Some(v) = over.delta {
        cfg.delta = v;
    }
    if let Some(v) = over.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = over.profile {
        cfg.profile = v;
    }
    if let Some(v) = over.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = over.profile_decay {
        cfg.profile_decay = v;
    }
    if let Some(v) = over.dt {
        cfg.dt = v;
    }
    if let Some(v) = over.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = over.seed {
        cfg.seed = v;
    }
    // unless pinned explicitly, the grid tracks the truncation at the
    // standard padding factor
    cfg.n_grid = over.n_grid.unwrap_or(4 * cfg.trunc.unsigned_abs() as usize);
    cfg.validate()?;

    Ok(Run {
        cfg,
        workers: over.workers.unwrap_or(0),
        out: opts.out.clone(),
        epsilons: over.epsilons.unwrap_or_else(|| vec![0.25, 0.125, 0.0625]),
        samples: over.samples,
        p: over.p.unwrap_or(2.0),
        t_eval: over.t_eval,
    })
}

fn put_config(m: &mut Manifest, cfg: &SimulationConfig) {
    m.put("config.L", num(cfg.domain_len));
    m.put("config.N", cfg.trunc);
    m.put("config.delta", num(cfg.delta));
    m.put("config.sigma", num(cfg.sigma));
    m.put("config.profile", cfg.profile.as_str());
    m.put("config.eps", num(cfg.epsilon));
    m.put("config.profile_decay", num(cfg.profile_decay));
    m.put("config.dt", num(cfg.dt));
    m.put("config.T", num(cfg.horizon));
    m.put("config.n_grid", cfg.n_grid);
    m.put("seed", cfg.seed);
}

fn eps_label(eps: &[f64]) -> String {
    eps.iter().map(|e| num(*e)).collect::<Vec<_>>().join(",")
}

fn create_file(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn cmd_simulate(opts: &CommonOpts) -> Result<u8> {
    let mut run = resolve(opts)?;
    let steps = (run.cfg.horizon / run.cfg.dt).floor() as usize;
    run.cfg.snapshot_every = (steps / 10).max(1);
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "simulate");
    put_config(&mut m, &run.cfg);

    let traj = simulate(&run.cfg)?;

    let diag_path = run.out.join("diagnostics.csv");
    let rows: Vec<Vec<String>> = traj
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.energy),
                num(r.l2_norm),
                num(r.h1_norm),
                num(r.f_l2),
                num(r.sup_grad_v),
            ]
        })
        .collect();
    write_csv(
        &diag_path,
        &["t", "energy", "l2_norm", "h1_norm", "f_l2", "sup_grad_v"],
        &rows,
    )?;
    m.add_output(&diag_path);

    for (i, (_, field)) in traj.snapshots.iter().enumerate() {
        let path = run.out.join(format!("snapshot_{i:03}.spf1"));
        let mut w = create_file(&path)?;
        epigrowth::io::write_spectral(&mut w, field)?;
        std::io::Write::flush(&mut w)?;
        m.add_output(&path);
    }

    let last = traj.final_field();
    let grid = to_physical(last, run.cfg.n_grid)?;
    let spf = run.out.join("final.spf1");
    let mut w = create_file(&spf)?;
    epigrowth::io::write_spectral(&mut w, last)?;
    std::io::Write::flush(&mut w)?;
    m.add_output(&spf);
    let grd = run.out.join("final.grd1");
    let mut w = create_file(&grd)?;
    epigrowth::io::write_grid(&mut w, &grid)?;
    std::io::Write::flush(&mut w)?;
    m.add_output(&grd);
    let pgm = run.out.join("final.pgm");
    let mut w = create_file(&pgm)?;
    epigrowth::io::write_pgm(&mut w, &grid)?;
    std::io::Write::flush(&mut w)?;
    m.add_output(&pgm);

    m.put("snapshots", traj.snapshots.len());
    m.finish()?;
    Ok(0)
}

fn cmd_moments(opts: &CommonOpts) -> Result<u8> {
    let run = resolve(opts)?;
    let samples = run.samples.unwrap_or(10_000);
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "moments");
    put_config(&mut m, &run.cfg);
    m.put("samples", samples);

    let report = moment_validation_suite(&run.cfg, samples, run.workers)?;

    let csv_path = run.out.join("moments.csv");
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .filter(|r| r.alpha.is_some())
        .map(|r| {
            vec![
                report.profile.as_str().to_string(),
                num(report.epsilon),
                num(report.t),
                num(r.alpha.unwrap()),
                num(r.closed_form),
                num(r.mc),
                num(r.se),
                report.samples.to_string(),
            ]
        })
        .collect();
    write_csv(
        &csv_path,
        &[
            "profile_kind",
            "epsilon",
            "t",
            "alpha",
            "closed_form",
            "mc_estimate",
            "mc_stderr",
            "n_samples",
        ],
        &rows,
    )?;
    m.add_output(&csv_path);

    let mut s = Summary::new("moments");
    s.put("profile", report.profile.as_str());
    s.put("eps", num(report.epsilon));
    s.put("t", num(report.t));
    s.put("samples", report.samples);
    for r in &report.rows {
        s.put(format!("row.{}.closed_form", r.name), num(r.closed_form));
        s.put(format!("row.{}.mc_estimate", r.name), num(r.mc));
        s.put(format!("row.{}.mc_stderr", r.name), num(r.se));
        s.put(format!("row.{}.z", r.name), num(r.z));
    }
    let ok = s.gates(std::slice::from_ref(&report.gate));
    let sum_path = run.out.join("summary.txt");
    s.write(&sum_path)?;
    m.add_output(&sum_path);
    m.finish()?;
    Ok(if ok { 0 } else { 2 })
}

fn cmd_decay(opts: &CommonOpts) -> Result<u8> {
    let run = resolve(opts)?;
    let t_eval = run.t_eval.unwrap_or(run.cfg.horizon);
    ensure!(
        t_eval > 0.0 && t_eval <= run.cfg.horizon,
        "t_eval must lie in (0, T], got {t_eval}"
    );
    let params = DecayParams {
        epsilons: run.epsilons.clone(),
        samples: run.samples.unwrap_or(400),
        t_eval,
        p: run.p,
        beta: UCV_BETA,
        floor: UCV_FLOOR,
        workers: run.workers,
    };
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "decay");
    put_config(&mut m, &run.cfg);
    m.put("epsilons", eps_label(&params.epsilons));
    m.put("samples", params.samples);
    m.put("t_eval", num(params.t_eval));
    m.put("p", num(params.p));

    let study = nonlinearity_decay_study(&run.cfg, &params)?;

    let csv_path = run.out.join("decay.csv");
    let rows: Vec<Vec<String>> = (0..study.epsilons.len())
        .map(|i| {
            vec![
                num(study.epsilons[i]),
                study.truncs[i].to_string(),
                num(study.sup_moment.points[i].mean),
                num(study.sup_moment.points[i].stderr),
                num(study.lp_moment.points[i].mean),
                num(study.lp_moment.points[i].stderr),
                num(study.bound[i]),
                params.samples.to_string(),
            ]
        })
        .collect();
    write_csv(
        &csv_path,
        &[
            "epsilon",
            "trunc",
            "sup_moment_mean",
            "sup_moment_stderr",
            "lp_moment_mean",
            "lp_moment_stderr",
            "ucv_bound",
            "samples",
        ],
        &rows,
    )?;
    m.add_output(&csv_path);

    let mut s = Summary::new("decay");
    s.put("t_eval", num(params.t_eval));
    s.put("p", num(params.p));
    s.put("samples", params.samples);
    s.put("epsilons", eps_label(&study.epsilons));
    let ok = s.gates(&study.gates);
    let sum_path = run.out.join("summary.txt");
    s.write(&sum_path)?;
    m.add_output(&sum_path);
    m.finish()?;
    Ok(if ok { 0 } else { 2 })
}

fn cmd_converge(opts: &CommonOpts) -> Result<u8> {
    let run = resolve(opts)?;
    let params = ConvergeParams {
        epsilons: run.epsilons.clone(),
        samples: run.samples.unwrap_or(200),
        workers: run.workers,
    };
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "converge");
    put_config(&mut m, &run.cfg);
    m.put("epsilons", eps_label(&params.epsilons));
    m.put("samples", params.samples);

    let study = coupled_convergence_study(&run.cfg, &params)?;

    let csv_path = run.out.join("converge.csv");
    let rows: Vec<Vec<String>> = (0..study.epsilons.len())
        .map(|i| {
            vec![
                num(study.epsilons[i]),
                study.truncs[i].to_string(),
                num(study.total.points[i].mean),
                num(study.total.points[i].stderr),
                num(study.v_part.points[i].mean),
                num(study.v_part.points[i].stderr),
                num(study.z_part.points[i].mean),
                num(study.z_part.points[i].stderr),
                num(study.z_l2_gap.points[i].mean),
                num(study.z_l2_gap.points[i].stderr),
                num(study.z_l2_closed[i]),
                params.samples.to_string(),
            ]
        })
        .collect();
    write_csv(
        &csv_path,
        &[
            "epsilon",
            "trunc",
            "total_mean",
            "total_stderr",
            "v_part_mean",
            "v_part_stderr",
            "z_part_mean",
            "z_part_stderr",
            "z_l2_mean",
            "z_l2_stderr",
            "z_l2_closed",
            "samples",
        ],
        &rows,
    )?;
    m.add_output(&csv_path);

    let mut s = Summary::new("converge");
    s.put("T", num(run.cfg.horizon));
    s.put("samples", params.samples);
    s.put("epsilons", eps_label(&study.epsilons));
    let ok = s.gates(&study.gates);
    let sum_path = run.out.join("summary.txt");
    s.write(&sum_path)?;
    m.add_output(&sum_path);
    m.finish()?;
    Ok(if ok { 0 } else { 2 })
}

fn cmd_bound(opts: &CommonOpts) -> Result<u8> {
    let run = resolve(opts)?;
    let params = BoundParams {
        epsilons: run.epsilons.clone(),
        samples: run.samples.unwrap_or(50),
        uniformity_factor: 2.0,
        workers: run.workers,
    };
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "bound");
    put_config(&mut m, &run.cfg);
    m.put("epsilons", eps_label(&params.epsilons));
    m.put("samples", params.samples);

    let study = grad_v_bound_study(&run.cfg, &params)?;

    let csv_path = run.out.join("bound.csv");
    let rows: Vec<Vec<String>> = (0..study.epsilons.len())
        .map(|i| {
            vec![
                num(study.epsilons[i]),
                study.truncs[i].to_string(),
                num(study.sup_grad_v[i]),
                num(study.sup_grad_z[i]),
                params.samples.to_string(),
            ]
        })
        .collect();
    write_csv(
        &csv_path,
        &["epsilon", "trunc", "sup_grad_v", "sup_grad_z", "samples"],
        &rows,
    )?;
    m.add_output(&csv_path);

    let mut s = Summary::new("bound");
    s.put("T", num(run.cfg.horizon));
    s.put("samples", params.samples);
    s.put("epsilons", eps_label(&study.epsilons));
    let ok = s.gates(&study.gates);
    let sum_path = run.out.join("summary.txt");
    s.write(&sum_path)?;
    m.add_output(&sum_path);
    m.finish()?;
    Ok(if ok { 0 } else { 2 })
}

fn cmd_analyze(opts: &CommonOpts) -> Result<u8> {
    let run = resolve(opts)?;
    let t = run.t_eval.unwrap_or(run.cfg.horizon);
    ensure!(t > 0.0, "t_eval must be positive, got {t}");
    ensure!(run.p > 1.0, "p must exceed 1, got {}", run.p);
    std::fs::create_dir_all(&run.out)?;
    let mut m = Manifest::start(&run.out, "analyze");
    put_config(&mut m, &run.cfg);
    m.put("epsilons", eps_label(&run.epsilons));
    m.put("t_eval", num(t));
    m.put("p", num(run.p));

    let s2 = run.cfg.sigma * run.cfg.sigma;
    let mut rows = Vec::new();
    let mut s = Summary::new("analyze");
    s.put("t", num(t));
    s.put("p", num(run.p));
    for &eps in &run.epsilons {
        let trunc = ladder_trunc(eps);
        let lattice = epigrowth::WavenumberLattice::new(run.cfg.domain_len, trunc)?;
        let profile =
            RegularizationProfile::make(run.cfg.profile, eps, run.cfg.profile_decay, &lattice)?;
        let cov = moments::grad_covariance(&profile, t, run.cfg.delta)?;
        let det = s2 * s2 * moments::grad_covariance_det(&cov);
        let series = moments::quarter_series(&profile);
        let k = moments::k_from_series(series, UCV_BETA, UCV_FLOOR)?;
        let bound = moments::ucv_bound_from_parts(k, UCV_FLOOR, run.p, det / k.powi(4));
        rows.push(vec![
            num(eps),
            trunc.to_string(),
            num(t),
            num(s2 * cov.matrix[0][0]),
            num(s2 * cov.matrix[1][1]),
            num(det),
            num(series),
            num(k),
            num(bound),
        ]);
        let tag = format!("eps.{}", num(eps));
        s.put(format!("{tag}.sigma_00"), num(s2 * cov.matrix[0][0]));
        s.put(format!("{tag}.det"), num(det));
        s.put(format!("{tag}.k"), num(k));
        s.put(format!("{tag}.ucv_bound"), num(bound));
    }

    let csv_path = run.out.join("analyze.csv");
    write_csv(
        &csv_path,
        &[
            "epsilon",
            "trunc",
            "t",
            "sigma_00",
            "sigma_11",
            "det",
            "quarter_series",
            "k_eps",
            "ucv_bound",
        ],
        &rows,
    )?;
    m.add_output(&csv_path);
    let sum_path = run.out.join("summary.txt");
    s.write(&sum_path)?;
    m.add_output(&sum_path);
    m.finish()?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.cmd {
        Cmd::Simulate(o) => cmd_simulate(o),
        Cmd::Moments(o) => cmd_moments(o),
        Cmd::Decay(o) => cmd_decay(o),
        Cmd::Converge(o) => cmd_converge(o),
        Cmd::Bound(o) => cmd_bound(o),
        Cmd::Analyze(o) => cmd_analyze(o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
