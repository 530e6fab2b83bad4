//! The four subcommands behind the `smvar` binary, separated from argument
//! parsing so integration tests can drive them in-process.
//!
//! Exit codes are a stable contract: 0 success, 1 verification failure,
//! 2 invalid model or configuration, 3 solver non-convergence. I/O problems
//! map to 4, outside the numeric contract.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use thiserror::Error;

use crate::bounds::{self, BoundsError};
use crate::config::{ConfigError, RunConfig};
use crate::energy::FaultInjection;
use crate::model::{
    check_hypotheses, nonexistence_ratio, weight_integrability, HypothesisReport,
    IntegrabilityReport, ModelError,
};
use crate::report::{
    self, IntervalView, NonexistenceView, ReportError, SolutionRecord, SolveReport,
};
use crate::solvers::{self, SolverError};
use crate::verify::{run_battery, VerifyReport};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::InvalidModel(_) => 2,
            CommandError::Solver(_) => 3,
            CommandError::Io(_) => 4,
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(io) => CommandError::Io(io.to_string()),
            other => CommandError::InvalidModel(other.to_string()),
        }
    }
}

impl From<ModelError> for CommandError {
    fn from(e: ModelError) -> Self {
        CommandError::InvalidModel(e.to_string())
    }
}

impl From<SolverError> for CommandError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotConverged { .. } | SolverError::PathCollapse(_) => {
                CommandError::Solver(e.to_string())
            }
            other => CommandError::InvalidModel(other.to_string()),
        }
    }
}

impl From<BoundsError> for CommandError {
    fn from(e: BoundsError) -> Self {
        CommandError::InvalidModel(e.to_string())
    }
}

impl From<ReportError> for CommandError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io(io) => CommandError::Io(io.to_string()),
            other => CommandError::Io(other.to_string()),
        }
    }
}

fn embedding_constants(cfg: &RunConfig) -> Result<(f64, f64), CommandError> {
    let grid = cfg.build_grid()?;
    let d_star = cfg
        .constants
        .d_star
        .unwrap_or_else(|| crate::embedding::estimate_d_star(&grid));
    let s_12_5 = cfg
        .constants
        .s_12_5
        .unwrap_or_else(|| crate::embedding::estimate_s_p(&grid, 2.4));
    if !(d_star > 0.0) || !(s_12_5 > 0.0) {
        return Err(CommandError::InvalidModel(
            "embedding constants must be positive".into(),
        ));
    }
    Ok((d_star, s_12_5))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConstantsReport {
    pub c_f: f64,
    pub n_f: f64,
    pub l_f: Option<f64>,
    pub threshold: Option<f64>,
    pub threshold_infinite: bool,
    pub hypotheses: HypothesisReport,
    pub weight_integrability: IntegrabilityReport,
    pub d_star: f64,
    pub s_12_5: f64,
}

/// `smvar constants`: the model constants and hypothesis certificates.
/// A hypothesis failure is an invalid-model error naming the failed item.
pub fn cmd_constants(cfg: &RunConfig) -> Result<ConstantsReport, CommandError> {
    let f = cfg.build_nonlinearity()?;
    let weight = cfg.build_weight()?;
    let grid = cfg.build_grid()?;
    let hyp = check_hypotheses(&f, &f.default_sampling())?;
    if !hyp.all_ok() {
        let mut failed = Vec::new();
        if !hyp.f1_ok {
            failed.push(format!("(f1) tail ratio {} above tolerance", hyp.tail_ratio));
        }
        if !hyp.f2_ok {
            failed.push(format!(
                "(f2) origin ratio {} above tolerance",
                hyp.origin_ratio
            ));
        }
        if !hyp.f3_ok {
            failed.push("(f3) no sampled point with positive primitive".into());
        }
        return Err(CommandError::InvalidModel(format!(
            "hypothesis failure: {}",
            failed.join("; ")
        )));
    }
    let c_f = nonexistence_ratio(&f, cfg.problem.e)?;
    let threshold_raw = if weight.sup_norm() == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (weight.sup_norm() * c_f)
    };
    let (threshold, threshold_infinite) = if threshold_raw.is_finite() {
        (Some(threshold_raw), false)
    } else {
        (None, true)
    };
    let integ = weight_integrability(&weight, &grid);
    let (d_star, s_12_5) = embedding_constants(cfg)?;
    Ok(ConstantsReport {
        c_f,
        n_f: f.linear_bound(),
        l_f: f.lipschitz(),
        threshold,
        threshold_infinite,
        hypotheses: hyp,
        weight_integrability: integ,
        d_star,
        s_12_5,
    })
}

pub struct SolveOutcome {
    pub report: SolveReport,
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

fn kind_slug(kind: crate::solvers::SolutionKind) -> &'static str {
    match kind {
        crate::solvers::SolutionKind::Trivial => "trivial",
        crate::solvers::SolutionKind::Minimizer => "minimizer",
        crate::solvers::SolutionKind::MountainPass => "mountain-pass",
    }
}

/// `smvar solve`: multi-start search at the configured λ, with the
/// non-existence certificate embedded when λ sits below the threshold.
/// Writes solutions.json plus one profile CSV per solution.
pub fn cmd_solve(cfg: &RunConfig, out_dir: &Path) -> Result<SolveOutcome, CommandError> {
    let lambda = cfg.problem.lambda;
    let prob = cfg.build_problem(lambda)?;
    let opts = cfg.solver_options();
    let plateau = bounds::best_start_truncation(&prob);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let outcome = solvers::multi_start(&prob, &opts, plateau.as_ref().map(|(_, u)| u), &mut rng)?;

    let threshold = crate::model::nonexistence_threshold(
        prob.nonlinearity(),
        prob.weight(),
        prob.coupling(),
    )?;
    let nonexistence = if lambda < threshold {
        let mut candidates = outcome.solutions.clone();
        if let Some(t) = &outcome.trivial {
            candidates.push(t.clone());
        }
        let rep = solvers::certify_nonexistence(&prob, &candidates, &opts)?;
        Some(NonexistenceView::from_report(&rep)?)
    } else {
        None
    };
    let window = {
        let (d_star, s_12_5) = embedding_constants(cfg)?;
        match bounds::interval_estimate(&prob, d_star, s_12_5) {
            Ok(est) => Some(IntervalView::from_estimate(&est)?),
            Err(
                BoundsError::NotApplicable(_)
                | BoundsError::HypothesesFail
                | BoundsError::NoPositiveBound,
            ) => None,
            Err(other) => return Err(other.into()),
        }
    };

    let mut solutions = Vec::new();
    for pair in &outcome.solutions {
        solutions.push(SolutionRecord::from_pair(pair)?);
    }
    if let Some(t) = &outcome.trivial {
        solutions.push(SolutionRecord::from_pair(t)?);
    }
    let (thr_opt, thr_inf) = if threshold.is_finite() {
        (Some(threshold), false)
    } else {
        (None, true)
    };
    let report = SolveReport {
        lambda,
        threshold: thr_opt,
        threshold_infinite: thr_inf,
        n_solutions: outcome.solutions.len(),
        failed_jobs: outcome.failures,
        solutions,
        nonexistence,
        window,
    };

    fs::create_dir_all(out_dir).map_err(|e| CommandError::Io(e.to_string()))?;
    let mut files = Vec::new();
    let json = cfg.output.formats.iter().any(|f| f == "json");
    let csv = cfg.output.formats.iter().any(|f| f == "csv");
    if json {
        let path = out_dir.join("solutions.json");
        let file = fs::File::create(&path).map_err(|e| CommandError::Io(e.to_string()))?;
        report::write_json(file, &report)?;
        files.push(path);
    }
    if csv {
        let mut all = outcome.solutions.clone();
        if let Some(t) = &outcome.trivial {
            all.push(t.clone());
        }
        for (i, pair) in all.iter().enumerate() {
            let path = out_dir.join(format!("solution_{:02}_{}.csv", i, kind_slug(pair.kind)));
            let file = fs::File::create(&path).map_err(|e| CommandError::Io(e.to_string()))?;
            report::write_profile_csv(file, pair)?;
            files.push(path);
        }
    }
    let exit_code = if outcome.failures > 0 { 3 } else { 0 };
    Ok(SolveOutcome {
        report,
        files,
        exit_code,
    })
}

pub struct SweepOutcome {
    pub records: Vec<solvers::SweepRecord>,
    pub csv_path: PathBuf,
    pub exit_code: i32,
}

/// `smvar sweep`: the multi-start search over the configured λ list, with
/// per-row failure marks. λ jobs fan out to a rayon pool sized by `jobs`
/// (0 = default); output order is sorted by λ regardless of scheduling.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<SweepOutcome, CommandError> {
    let mut lambdas = cfg.problem.lambda_list.clone();
    lambdas.sort_by(f64::total_cmp);
    let prob = cfg.build_problem(0.0)?;
    let opts = cfg.solver_options();
    let plateau = bounds::best_start_truncation(&prob);

    let run = || solvers::sweep(&prob, &lambdas, &opts, plateau.as_ref().map(|(_, u)| u));
    let records = if jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CommandError::Io(e.to_string()))?;
        pool.install(run)?
    } else {
        run()?
    };

    fs::create_dir_all(out_dir).map_err(|e| CommandError::Io(e.to_string()))?;
    let csv_path = out_dir.join("sweep.csv");
    let file = fs::File::create(&csv_path).map_err(|e| CommandError::Io(e.to_string()))?;
    report::write_sweep_csv(file, &records)?;

    let all_failed = !records.is_empty() && records.iter().all(|r| r.failed_jobs >= 5);
    let exit_code = if all_failed { 3 } else { 0 };
    Ok(SweepOutcome {
        records,
        csv_path,
        exit_code,
    })
}

pub struct VerifyOutcome {
    pub report: VerifyReport,
    pub json_path: PathBuf,
    pub exit_code: i32,
}

/// `smvar verify`: the full invariant battery; exit 0 iff every check
/// passes. SMVAR_FAULT=coupling-sign injects the known gradient defect for
/// harness tests.
pub fn cmd_verify(cfg: &RunConfig, out_dir: &Path) -> Result<VerifyOutcome, CommandError> {
    let fault = match std::env::var("SMVAR_FAULT").ok().as_deref() {
        Some("coupling-sign") => FaultInjection::CouplingSignFlip,
        _ => FaultInjection::None,
    };
    cmd_verify_with_fault(cfg, out_dir, fault)
}

pub fn cmd_verify_with_fault(
    cfg: &RunConfig,
    out_dir: &Path,
    fault: FaultInjection,
) -> Result<VerifyOutcome, CommandError> {
    let prob = cfg.build_problem(cfg.problem.lambda)?;
    let opts = cfg.solver_options();
    let (d_star, s_12_5) = embedding_constants(cfg)?;
    let report = run_battery(&prob, &opts, d_star, s_12_5, fault);
    fs::create_dir_all(out_dir).map_err(|e| CommandError::Io(e.to_string()))?;
    let json_path = out_dir.join("verify.json");
    let file = fs::File::create(&json_path).map_err(|e| CommandError::Io(e.to_string()))?;
    report::write_json(file, &report)?;
    let exit_code = if report.all_pass { 0 } else { 1 };
    Ok(VerifyOutcome {
        report,
        json_path,
        exit_code,
    })
}
