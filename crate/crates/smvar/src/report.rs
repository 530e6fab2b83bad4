//! Structured output: JSON reports and CSV profiles. Every numeric field is
//! checked finite before it is written; quantities that are legitimately
//! infinite (the non-existence threshold for a vanishing weight) are
//! represented as an absent value plus an explicit flag.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::IntervalEstimate;
use crate::energy::EnergyBreakdown;
use crate::solvers::{NonexistenceReport, SolutionKind, SolutionPair, SweepRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("refusing to write non-finite value for field '{0}'")]
    NonFinite(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn finite(name: &'static str, v: f64) -> Result<f64, ReportError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ReportError::NonFinite(name))
    }
}

fn optional_infinite(v: f64) -> (Option<f64>, bool) {
    if v.is_finite() {
        (Some(v), false)
    } else {
        (None, true)
    }
}

/// Serializable view of one solution (profiles go to CSV, not JSON).
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub lambda: f64,
    pub kind: SolutionKind,
    pub energy: EnergyBreakdown,
    pub h1_norm: f64,
    pub d12_norm: f64,
    pub residual: f64,
}

impl SolutionRecord {
    pub fn from_pair(pair: &SolutionPair) -> Result<Self, ReportError> {
        for (name, v) in [
            ("lambda", pair.lambda),
            ("h1_norm", pair.h1_norm),
            ("d12_norm", pair.d12_norm),
            ("residual", pair.residual),
            ("energy.total", pair.energy.total),
            ("energy.potential", pair.energy.potential),
        ] {
            finite(name, v)?;
        }
        Ok(Self {
            lambda: pair.lambda,
            kind: pair.kind,
            energy: pair.energy,
            h1_norm: pair.h1_norm,
            d12_norm: pair.d12_norm,
            residual: pair.residual,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalView {
    pub threshold: Option<f64>,
    pub threshold_infinite: bool,
    pub s0: f64,
    pub sigma: f64,
    pub t_value: f64,
    pub n_value: f64,
    pub m_value: f64,
    pub upper: f64,
    pub upper_energy: Option<f64>,
    pub vacuous: bool,
}

impl IntervalView {
    pub fn from_estimate(est: &IntervalEstimate) -> Result<Self, ReportError> {
        let (threshold, threshold_infinite) = optional_infinite(est.threshold);
        let (upper_energy, _) = optional_infinite(est.upper_energy);
        Ok(Self {
            threshold,
            threshold_infinite,
            s0: finite("s0", est.s0)?,
            sigma: finite("sigma", est.sigma)?,
            t_value: finite("t_value", est.t_value)?,
            n_value: finite("n_value", est.n_value)?,
            m_value: finite("m_value", est.m_value)?,
            upper: finite("upper", est.upper)?,
            upper_energy,
            vacuous: est.vacuous,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceView {
    pub lambda: f64,
    pub threshold: Option<f64>,
    pub threshold_infinite: bool,
    pub factor: f64,
    pub applicable: bool,
    pub passes: bool,
    pub inconsistency: bool,
    pub candidates_total: usize,
    pub candidates_trivial: usize,
    pub worst_identity_defect: f64,
}

impl NonexistenceView {
    pub fn from_report(rep: &NonexistenceReport) -> Result<Self, ReportError> {
        let (threshold, threshold_infinite) = optional_infinite(rep.threshold);
        let worst = rep
            .candidates
            .iter()
            .map(|c| c.identity_defect)
            .fold(0.0f64, f64::max);
        Ok(Self {
            lambda: finite("lambda", rep.lambda)?,
            threshold,
            threshold_infinite,
            factor: finite("factor", rep.factor)?,
            applicable: rep.applicable,
            passes: rep.passes,
            inconsistency: rep.inconsistency,
            candidates_total: rep.candidates.len(),
            candidates_trivial: rep.candidates.iter().filter(|c| c.is_trivial).count(),
            worst_identity_defect: worst,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub lambda: f64,
    pub threshold: Option<f64>,
    pub threshold_infinite: bool,
    pub n_solutions: usize,
    pub failed_jobs: usize,
    pub solutions: Vec<SolutionRecord>,
    pub nonexistence: Option<NonexistenceView>,
    pub window: Option<IntervalView>,
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(w, "{text}")?;
    Ok(())
}

/// Profile CSV: one row per node, columns r, u, phi.
pub fn write_profile_csv<W: Write>(mut w: W, pair: &SolutionPair) -> Result<(), ReportError> {
    writeln!(w, "r,u,phi")?;
    let r = pair.u.grid().nodes();
    for i in 0..r.len() {
        let (u, phi) = (pair.u.values()[i], pair.phi.values()[i]);
        finite("u", u)?;
        finite("phi", phi)?;
        writeln!(w, "{},{},{}", r[i], u, phi)?;
    }
    Ok(())
}

/// Sweep CSV with one row per λ, deterministic under a fixed seed.
pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<(), ReportError> {
    writeln!(w, "lambda,n_solutions,min_energy,mp_energy,u_norms,failed_jobs")?;
    for rec in records {
        finite("lambda", rec.lambda)?;
        let fmt_opt = |v: Option<f64>| -> Result<String, ReportError> {
            match v {
                Some(x) => Ok(finite("energy", x)?.to_string()),
                None => Ok(String::new()),
            }
        };
        let norms: Vec<String> = rec
            .h1_norms
            .iter()
            .map(|&x| finite("u_norm", x).map(|v| v.to_string()))
            .collect::<Result<_, _>>()?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            rec.lambda,
            rec.n_solutions,
            fmt_opt(rec.min_energy)?,
            fmt_opt(rec.mp_energy)?,
            norms.join(";"),
            rec.failed_jobs
        )?;
    }
    Ok(())
}
