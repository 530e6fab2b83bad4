//! Critical-point finders: multi-start energy descent, the mountain-pass
//! search between the two wells, the non-existence certificate for small λ,
//! and the λ-sweep driver.
//!
//! The descent direction is the H¹ representation of the derivative: solve
//! (-Δ_h + 1) w = I_λ'(u) and step along -w with Armijo backtracking. The
//! same solve yields the dual-norm residual, so each iteration costs one
//! tridiagonal solve. Plain pointwise descent would need O(h⁻²) iterations
//! on these grids; the preconditioned flow converges in hundreds.
//!
//! The mountain-pass search deforms the segment family joining 0 to the
//! minimizer: the max-energy node of a 32-node path is pushed downhill with
//! the path respaced in the H¹ metric, which localizes the barrier; the
//! saddle is then pinned by bisecting the path transversal across the basin
//! boundary and riding the descent flow along the separatrix until the
//! max-energy node's residual passes the tolerance.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::energy::{
    breakdown_values, energy_value, gradient_covector, residual_from_covector, EnergyBreakdown,
    EnergyError, FaultInjection, Problem,
};
use crate::grid::{norms, GridError, RadialFunction};
use crate::model::{nonexistence_ratio, ModelError};
use crate::poisson::{newton_core, newton_potential, PoissonError};
use crate::profiles;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("descent did not converge after {iterations} iterations (residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("mountain-pass search needs a nontrivial minimizer with negative energy, got {energy}")]
    PreconditionViolated { energy: f64 },
    #[error("mountain-pass path collapsed onto the wells: {0}")]
    PathCollapse(&'static str),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Solver tuning knobs. The tolerances are dual-norm residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol_residual: f64,
    pub tol_mountain_pass: f64,
    pub max_iter: usize,
    /// H¹ norm below which a terminal point counts as the trivial solution.
    pub nontrivial_cutoff: f64,
    /// H¹ distance below which two solutions count as the same.
    pub distinct_cutoff: f64,
    pub path_nodes: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-6,
            tol_mountain_pass: 1e-5,
            max_iter: 100_000,
            nontrivial_cutoff: 1e-4,
            distinct_cutoff: 1e-2,
            path_nodes: 32,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    Trivial,
    Minimizer,
    MountainPass,
}

/// A terminal point of a solver run: the matter field, its potential, and
/// the verification data.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub u: RadialFunction,
    pub phi: RadialFunction,
    pub lambda: f64,
    pub energy: EnergyBreakdown,
    pub residual: f64,
    pub kind: SolutionKind,
    pub h1_norm: f64,
    pub d12_norm: f64,
}

fn make_pair(
    prob: &Problem,
    values: Vec<f64>,
    kind: Option<SolutionKind>,
    opts: &SolverOptions,
) -> Result<SolutionPair, SolverError> {
    let u = RadialFunction::new_h1(prob.grid().clone(), values)?;
    let sol = newton_potential(&u, prob.coupling())?;
    let energy = breakdown_values(prob, u.values());
    let b = gradient_covector(prob, u.values(), FaultInjection::None);
    let residual = residual_from_covector(prob, &b).0;
    let h1_norm = norms(&u)?.h1;
    let kind = kind.unwrap_or(if h1_norm < opts.nontrivial_cutoff {
        SolutionKind::Trivial
    } else {
        SolutionKind::Minimizer
    });
    Ok(SolutionPair {
        u,
        phi: sol.phi,
        lambda: prob.lambda(),
        energy,
        residual,
        kind,
        h1_norm,
        d12_norm: sol.d12_norm,
    })
}

enum DescendExit {
    Converged,
    Cap { residual: f64, iterations: usize },
    Stalled { residual: f64, iterations: usize },
}

/// Armijo-backtracked descent along the preconditioned gradient, in place.
/// The trial step is the spectral (Barzilai–Borwein) length in the
/// (-Δ_h + 1) metric with a nonmonotone acceptance window, which keeps the
/// iteration count flat in λ; plain unit steps crawl once the weighted term
/// stiffens the Hessian.
fn descend(prob: &Problem, u: &mut Vec<f64>, tol: f64, max_iter: usize) -> DescendExit {
    let n = u.len();
    let m = prob.metric().len();
    let mut residual = f64::INFINITY;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut history: Vec<f64> = Vec::new();
    for iter in 0..max_iter {
        let b = gradient_covector(prob, u, FaultInjection::None);
        let (res, w) = residual_from_covector(prob, &b);
        residual = res;
        if res <= tol {
            return DescendExit::Converged;
        }
        let mut t = 1.0f64;
        if let Some((u_prev, b_prev)) = &prev {
            let s: Vec<f64> = u.iter().zip(u_prev).map(|(a, c)| a - c).collect();
            let sy: f64 = s[..m]
                .iter()
                .zip(b[..m].iter().zip(&b_prev[..m]))
                .map(|(si, (bi, bpi))| si * (bi - bpi))
                .sum();
            if sy > 0.0 {
                let sas = prob.metric().quadratic_form(&s[..m]);
                let bb = sas / sy;
                if bb.is_finite() {
                    t = bb.clamp(1e-4, 100.0);
                }
            }
        }
        let i0 = energy_value(prob, u);
        history.push(i0);
        if history.len() > 8 {
            history.remove(0);
        }
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slope = -(res * res);
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = u.clone();
            for k in 0..n - 1 {
                trial[k] -= t * w[k];
            }
            let i1 = energy_value(prob, &trial);
            if i1.is_finite() && i1 <= reference + 1e-4 * t * slope {
                prev = Some((std::mem::replace(u, trial), b));
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return DescendExit::Stalled {
                residual: res,
                iterations: iter,
            };
        }
    }
    DescendExit::Cap {
        residual,
        iterations: max_iter,
    }
}

/// Gradient descent with Armijo backtracking on I_λ from `u_init` until the
/// dual residual passes the tolerance. Terminal points are classified
/// trivial below the H¹ cutoff; hitting the iteration cap is an explicit
/// error, never a silently returned solution.
pub fn minimize(
    prob: &Problem,
    u_init: &RadialFunction,
    opts: &SolverOptions,
) -> Result<SolutionPair, SolverError> {
    crate::energy::energy(u_init, prob)?;
    let mut u = u_init.values().to_vec();
    match descend(prob, &mut u, opts.tol_residual, opts.max_iter) {
        DescendExit::Converged => make_pair(prob, u, None, opts),
        DescendExit::Cap {
            residual,
            iterations,
        }
        | DescendExit::Stalled {
            residual,
            iterations,
        } => Err(SolverError::NotConverged {
            iterations,
            residual,
        }),
    }
}

fn a_norm(prob: &Problem, x: &[f64]) -> f64 {
    let m = prob.metric().len();
    prob.metric().quadratic_form(&x[..m]).max(0.0).sqrt()
}

fn a_dist(prob: &Problem, x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    a_norm(prob, &diff)
}

fn lerp(x: &[f64], y: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect()
}

/// Respace the polyline to uniform H¹ arclength, endpoints pinned.
fn respace(prob: &Problem, path: &mut Vec<Vec<f64>>) {
    let k = path.len();
    let mut cum = vec![0.0; k];
    for j in 1..k {
        cum[j] = cum[j - 1] + a_dist(prob, &path[j - 1], &path[j]);
    }
    let total = cum[k - 1];
    if total <= 0.0 {
        return;
    }
    let mut fresh = Vec::with_capacity(k);
    fresh.push(path[0].clone());
    let mut seg = 0usize;
    for i in 1..k - 1 {
        let target = total * i as f64 / (k - 1) as f64;
        while seg + 2 < k && cum[seg + 1] < target {
            seg += 1;
        }
        let span = (cum[seg + 1] - cum[seg]).max(1e-300);
        let frac = (target - cum[seg]) / span;
        fresh.push(lerp(&path[seg], &path[seg + 1], frac));
    }
    fresh.push(path[k - 1].clone());
    *path = fresh;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Zero,
    Well,
}

/// Which basin a descent trajectory from `x` commits to.
fn basin_side(prob: &Problem, x: &[f64], well_h1a: f64, well_energy: f64) -> Side {
    let mut u = x.to_vec();
    let n = u.len();
    let mut t_warm = 1.0f64;
    for _ in 0..2500 {
        let h1a = a_norm(prob, &u);
        if h1a < 0.3 * well_h1a {
            return Side::Zero;
        }
        if energy_value(prob, &u) < 0.5 * well_energy {
            return Side::Well;
        }
        let b = gradient_covector(prob, &u, FaultInjection::None);
        let (res, w) = residual_from_covector(prob, &b);
        if res < 1e-12 {
            break;
        }
        let i0 = energy_value(prob, &u);
        let slope = -(res * res);
        let mut t = (4.0 * t_warm).min(1.0);
        let mut moved = false;
        for _ in 0..50 {
            let mut trial = u.clone();
            for k in 0..n - 1 {
                trial[k] -= t * w[k];
            }
            let i1 = energy_value(prob, &trial);
            if i1.is_finite() && i1 <= i0 + 1e-4 * t * slope {
                u = trial;
                t_warm = t;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if a_norm(prob, &u) < 0.5 * well_h1a {
        Side::Zero
    } else {
        Side::Well
    }
}

struct RideOutcome {
    success: Option<Vec<f64>>,
    best: Vec<f64>,
    escape: Option<Vec<f64>>,
}

/// Descend from a near-separatrix point, watching the residual: near the
/// saddle it dips below tolerance before the trajectory peels off into a
/// well.
fn ride_separatrix(prob: &Problem, start: &[f64], tol: f64, well_energy: f64) -> RideOutcome {
    let mut u = start.to_vec();
    let n = u.len();
    let start_h1a = a_norm(prob, start);
    let mut best = u.clone();
    let mut best_residual = f64::INFINITY;
    let mut t_warm = 1.0f64;
    for _ in 0..20_000 {
        let b = gradient_covector(prob, &u, FaultInjection::None);
        let (res, w) = residual_from_covector(prob, &b);
        if res < best_residual {
            best_residual = res;
            best = u.clone();
        }
        if res <= tol {
            return RideOutcome {
                success: Some(u),
                best,
                escape: None,
            };
        }
        let i0 = energy_value(prob, &u);
        if i0 < (-1e-10f64).min(0.5 * well_energy.max(-1e9)) || a_norm(prob, &u) < 0.25 * start_h1a
        {
            return RideOutcome {
                success: None,
                best,
                escape: Some(u),
            };
        }
        let slope = -(res * res);
        let mut t = (4.0 * t_warm).min(1.0);
        let mut moved = false;
        for _ in 0..50 {
            let mut trial = u.clone();
            for k in 0..n - 1 {
                trial[k] -= t * w[k];
            }
            let i1 = energy_value(prob, &trial);
            if i1.is_finite() && i1 <= i0 + 1e-4 * t * slope {
                u = trial;
                t_warm = t;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    RideOutcome {
        success: None,
        best: best.clone(),
        escape: Some(best),
    }
}

/// Deformation mountain-pass search between the trivial well and a negative
/// energy minimizer. Terminates when the max-energy point of the deformed
/// path has dual residual below `tol_mountain_pass`; a path that slides onto
/// the wells without producing a distinct critical point is an explicit
/// not-found error.
pub fn mountain_pass(
    prob: &Problem,
    u_well: &SolutionPair,
    opts: &SolverOptions,
) -> Result<SolutionPair, SolverError> {
    if u_well.kind == SolutionKind::Trivial || !(u_well.energy.total < 0.0) {
        return Err(SolverError::PreconditionViolated {
            energy: u_well.energy.total,
        });
    }
    let k = opts.path_nodes.max(8);
    let n = prob.grid().len();
    let well = u_well.u.values().to_vec();
    let well_h1a = a_norm(prob, &well);
    let well_energy = u_well.energy.total;

    let mut path: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let t = j as f64 / (k - 1) as f64;
            well.iter().map(|v| t * v).collect()
        })
        .collect();

    // stage 1: lower the max-energy node along the preconditioned gradient,
    // respacing the path in the H¹ metric
    let spacing_cap = 0.5 * well_h1a / (k - 1) as f64;
    let mut t_warm = 1.0f64;
    let mut last_level = f64::INFINITY;
    let mut stalled = 0usize;
    let mut jmax = k / 2;
    for _ in 0..600 {
        let energies: Vec<f64> = path.iter().map(|x| energy_value(prob, x)).collect();
        jmax = (1..k - 1)
            .max_by(|&a, &b| energies[a].total_cmp(&energies[b]))
            .unwrap();
        let level = energies[jmax];
        let b = gradient_covector(prob, &path[jmax], FaultInjection::None);
        let (res, w) = residual_from_covector(prob, &b);
        if res <= 20.0 * opts.tol_mountain_pass {
            break;
        }
        if (last_level - level).abs() <= 1e-12 * level.abs().max(1.0) {
            stalled += 1;
            if stalled > 50 {
                break;
            }
        } else {
            stalled = 0;
        }
        last_level = level;

        let slope = -(res * res);
        let mut t = (4.0 * t_warm).min(1.0);
        let w_a = a_norm(prob, &w);
        if w_a > 0.0 {
            t = t.min(spacing_cap / w_a);
        }
        for _ in 0..40 {
            let mut trial = path[jmax].clone();
            for i in 0..n - 1 {
                trial[i] -= t * w[i];
            }
            let i1 = energy_value(prob, &trial);
            if i1.is_finite() && i1 <= level + 1e-4 * t * slope {
                path[jmax] = trial;
                t_warm = t;
                break;
            }
            t *= 0.5;
        }
        respace(prob, &mut path);
    }

    // stage 2: pin the saddle by bisecting a transversal across the basin
    // boundary and riding the flow along it
    let side_of = |x: &[f64]| basin_side(prob, x, well_h1a, well_energy);
    let mut p = path[jmax.saturating_sub(1)].clone();
    let mut q = path[(jmax + 1).min(k - 1)].clone();
    if side_of(&p) == side_of(&q) {
        p = path[0].clone();
        q = path[k - 1].clone();
    }
    let mut side_p = side_of(&p);
    if side_p == side_of(&q) {
        return Err(SolverError::PathCollapse(
            "no basin boundary crossing along the deformed path",
        ));
    }

    for _round in 0..12 {
        // bisect the segment [p, q] across the separatrix
        for _ in 0..70 {
            if a_dist(prob, &p, &q) <= 1e-10 * well_h1a.max(1.0) {
                break;
            }
            let mid = lerp(&p, &q, 0.5);
            if side_of(&mid) == side_p {
                p = mid;
            } else {
                q = mid;
            }
        }
        let crossing = lerp(&p, &q, 0.5);
        let ride = ride_separatrix(prob, &crossing, opts.tol_mountain_pass, well_energy);
        if let Some(x) = ride.success {
            let pair = make_pair(prob, x, Some(SolutionKind::MountainPass), opts)?;
            if pair.energy.total < -1e-9 {
                return Err(SolverError::PathCollapse(
                    "terminal point fell below the zero level",
                ));
            }
            if pair.h1_norm < opts.nontrivial_cutoff
                || pair.u.h1_distance(&u_well.u)? < opts.distinct_cutoff
            {
                return Err(SolverError::PathCollapse(
                    "terminal point is not distinct from the wells",
                ));
            }
            return Ok(pair);
        }
        // restart the bisection on a short transversal through the best
        // near-saddle iterate, oriented along the observed escape direction
        let escape = ride.escape.unwrap_or_else(|| ride.best.clone());
        let mut dir: Vec<f64> = escape.iter().zip(&ride.best).map(|(a, b)| a - b).collect();
        let dir_norm = a_norm(prob, &dir);
        if dir_norm <= 0.0 {
            return Err(SolverError::PathCollapse("separatrix ride made no progress"));
        }
        let mut delta = (2.0 * dir_norm).clamp(1e-8 * well_h1a, 0.05 * well_h1a);
        for v in &mut dir {
            *v /= dir_norm;
        }
        let mut found = false;
        for _ in 0..4 {
            let cand_p: Vec<f64> = ride
                .best
                .iter()
                .zip(&dir)
                .map(|(x, d)| x + delta * d)
                .collect();
            let cand_q: Vec<f64> = ride
                .best
                .iter()
                .zip(&dir)
                .map(|(x, d)| x - delta * d)
                .collect();
            let sp = side_of(&cand_p);
            if sp != side_of(&cand_q) {
                p = cand_p;
                q = cand_q;
                side_p = sp;
                found = true;
                break;
            }
            delta *= 8.0;
        }
        if !found {
            return Err(SolverError::PathCollapse(
                "transversal through the barrier could not be re-bracketed",
            ));
        }
    }
    Err(SolverError::PathCollapse(
        "saddle refinement exhausted its rounds",
    ))
}

/// Result of the multi-start policy at one λ.
#[derive(Debug, Clone)]
pub struct MultiStartOutcome {
    /// Distinct nontrivial solutions, sorted by energy.
    pub solutions: Vec<SolutionPair>,
    /// A converged trivial terminal point, when any start produced one.
    pub trivial: Option<SolutionPair>,
    /// Starts (or the mountain-pass job) that failed to converge.
    pub failures: usize,
}

/// Multi-start minimization (zero start, plateau start, three random bumps)
/// followed by a mountain-pass search when a negative-energy minimizer
/// exists. Solutions are deduplicated by H¹ distance.
pub fn multi_start(
    prob: &Problem,
    opts: &SolverOptions,
    plateau_start: Option<&RadialFunction>,
    rng: &mut ChaCha8Rng,
) -> Result<MultiStartOutcome, SolverError> {
    let mut starts: Vec<RadialFunction> = vec![RadialFunction::zero(prob.grid().clone())];
    if let Some(p) = plateau_start {
        starts.push(p.clone());
    }
    for _ in 0..3 {
        starts.push(profiles::random_bump(prob.grid(), rng));
    }

    let mut solutions: Vec<SolutionPair> = Vec::new();
    let mut trivial: Option<SolutionPair> = None;
    let mut failures = 0usize;
    for start in &starts {
        match minimize(prob, start, opts) {
            Ok(pair) => {
                if pair.kind == SolutionKind::Trivial {
                    let better = trivial
                        .as_ref()
                        .map_or(true, |t| pair.residual < t.residual);
                    if better {
                        trivial = Some(pair);
                    }
                } else {
                    solutions.push(pair);
                }
            }
            Err(SolverError::NotConverged { .. }) => failures += 1,
            Err(other) => return Err(other),
        }
    }
    solutions.sort_by(|a, b| a.energy.total.total_cmp(&b.energy.total));
    let mut distinct: Vec<SolutionPair> = Vec::new();
    for pair in solutions {
        let mut dup = false;
        for kept in &distinct {
            if pair.u.h1_distance(&kept.u)? < opts.distinct_cutoff {
                dup = true;
                break;
            }
        }
        if !dup {
            distinct.push(pair);
        }
    }

    let has_negative_min = distinct
        .first()
        .map(|p| p.energy.total < 0.0)
        .unwrap_or(false);
    if has_negative_min {
        let well = distinct[0].clone();
        match mountain_pass(prob, &well, opts) {
            Ok(mp) => {
                let mut dup = false;
                for kept in &distinct {
                    if mp.u.h1_distance(&kept.u)? < opts.distinct_cutoff {
                        dup = true;
                        break;
                    }
                }
                if !dup {
                    distinct.push(mp);
                }
            }
            Err(SolverError::NotConverged { .. }) | Err(SolverError::PathCollapse(_)) => {
                failures += 1
            }
            Err(other) => return Err(other),
        }
    }
    distinct.sort_by(|a, b| a.energy.total.total_cmp(&b.energy.total));
    Ok(MultiStartOutcome {
        solutions: distinct,
        trivial,
        failures,
    })
}

/// One row of the λ-sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    /// Count of distinct nontrivial solutions found.
    pub n_solutions: usize,
    pub energies: Vec<f64>,
    pub h1_norms: Vec<f64>,
    /// Non-existence bound ‖α‖∞⁻¹ c_f⁻¹ (infinite for a vanishing weight).
    pub threshold: f64,
    pub min_energy: Option<f64>,
    pub mp_energy: Option<f64>,
    pub failed_jobs: usize,
}

/// Multi-start search over a sorted λ list. Independent λ jobs run on the
/// ambient rayon pool; per-λ generators are derived from the base seed, so
/// records are deterministic whatever the pool size. Per-λ failures are
/// recorded in the row, never aborting the sweep.
pub fn sweep(
    prob_base: &Problem,
    lambdas: &[f64],
    opts: &SolverOptions,
    plateau_start: Option<&RadialFunction>,
) -> Result<Vec<SweepRecord>, SolverError> {
    let threshold = crate::model::nonexistence_threshold(
        prob_base.nonlinearity(),
        prob_base.weight(),
        prob_base.coupling(),
    )?;
    let records: Vec<SweepRecord> = lambdas
        .par_iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            let seed = opts
                .seed
                .wrapping_add((idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let prob = match prob_base.with_lambda(lambda) {
                Ok(p) => p,
                Err(_) => {
                    return SweepRecord {
                        lambda,
                        n_solutions: 0,
                        energies: Vec::new(),
                        h1_norms: Vec::new(),
                        threshold,
                        min_energy: None,
                        mp_energy: None,
                        failed_jobs: 5,
                    }
                }
            };
            match multi_start(&prob, opts, plateau_start, &mut rng) {
                Ok(out) => {
                    let energies: Vec<f64> =
                        out.solutions.iter().map(|s| s.energy.total).collect();
                    let h1_norms: Vec<f64> = out.solutions.iter().map(|s| s.h1_norm).collect();
                    let min_energy = out
                        .solutions
                        .iter()
                        .filter(|s| s.kind == SolutionKind::Minimizer)
                        .map(|s| s.energy.total)
                        .fold(None, |acc: Option<f64>, v| {
                            Some(acc.map_or(v, |a| a.min(v)))
                        });
                    let mp_energy = out
                        .solutions
                        .iter()
                        .find(|s| s.kind == SolutionKind::MountainPass)
                        .map(|s| s.energy.total);
                    SweepRecord {
                        lambda,
                        n_solutions: out.solutions.len(),
                        energies,
                        h1_norms,
                        threshold,
                        min_energy,
                        mp_energy,
                        failed_jobs: out.failures,
                    }
                }
                Err(_) => SweepRecord {
                    lambda,
                    n_solutions: 0,
                    energies: Vec::new(),
                    h1_norms: Vec::new(),
                    threshold,
                    min_energy: None,
                    mp_energy: None,
                    failed_jobs: 5,
                },
            }
        })
        .collect();
    Ok(records)
}

/// Per-candidate data of the non-existence certificate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CandidateCheck {
    pub h1_norm: f64,
    pub is_trivial: bool,
    /// Relative defect of ∫(|∇u|² + u² + eφu²) = λ∫α f(u)u.
    pub identity_defect: f64,
    /// Slack of 4√π e∫|u|³ ≤ ∫((1/4π)|∇φ|² + |∇u|²); negative means violated.
    pub young_slack: f64,
    /// Ceiling forced on ∫(u² + 4√π e|u|³) by the contraction chain.
    pub contraction_bound: f64,
    pub solution_like: bool,
    pub consistent: bool,
}

/// Outcome of the non-existence certificate below the threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NonexistenceReport {
    pub lambda: f64,
    pub threshold: f64,
    /// λ ‖α‖∞ c_f, the contraction factor; must be < 1 for applicability.
    pub factor: f64,
    pub applicable: bool,
    pub candidates: Vec<CandidateCheck>,
    /// True when every solution-like candidate is trivial.
    pub passes: bool,
    /// A nontrivial candidate satisfying the solution identities below the
    /// threshold: theoretically impossible, so it flags a solver or
    /// quadrature inconsistency.
    pub inconsistency: bool,
}

const IDENTITY_TOL: f64 = 1e-4;

/// Evaluate the contraction chain of the non-existence argument on each
/// candidate: below the threshold every candidate passing the weak-solution
/// identity must be trivial.
pub fn certify_nonexistence(
    prob: &Problem,
    candidates: &[SolutionPair],
    opts: &SolverOptions,
) -> Result<NonexistenceReport, SolverError> {
    let cf = nonexistence_ratio(prob.nonlinearity(), prob.coupling())?;
    let sup = prob.weight().sup_norm();
    let threshold = if sup == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (sup * cf)
    };
    let factor = prob.lambda() * sup * cf;
    let applicable = prob.lambda() < threshold;
    if !applicable {
        return Ok(NonexistenceReport {
            lambda: prob.lambda(),
            threshold,
            factor,
            applicable,
            candidates: Vec::new(),
            passes: false,
            inconsistency: false,
        });
    }

    let grid = prob.grid();
    let sqrt_pi_4e = 4.0 * std::f64::consts::PI.sqrt() * prob.coupling();
    let mut checks = Vec::with_capacity(candidates.len());
    let mut inconsistency = false;
    for cand in candidates {
        let u = cand.u.values();
        let b = breakdown_values(prob, u);
        let core = newton_core(grid, u, prob.coupling());
        let lhs = 2.0 * b.dirichlet + 2.0 * b.mass + 4.0 * b.coupling;
        let rhs = prob.lambda() * crate::energy::weighted_f_pairing(prob, u);
        let defect = (lhs - rhs).abs();
        let identity_defect = defect / lhs.abs().max(rhs.abs()).max(1.0);
        let solution_like = identity_defect <= IDENTITY_TOL;

        let cubes: Vec<f64> = u.iter().map(|&x| x.abs().powi(3)).collect();
        let cube_integral = grid.integrate_r3_samples(&cubes);
        let young_lhs = sqrt_pi_4e * cube_integral;
        let young_rhs = core.d12_sq / (4.0 * std::f64::consts::PI) + 2.0 * b.dirichlet;
        let young_slack = young_rhs - young_lhs;

        let squares: Vec<f64> = u.iter().map(|&x| x * x).collect();
        let a_val = grid.integrate_r3_samples(&squares) + young_lhs;
        // identity defect between (1/4π)‖∇φ‖² and e∫φu² enters the chain
        let poisson_defect = (core.d12_sq / (4.0 * std::f64::consts::PI)
            - prob.coupling() * core.interaction)
            .abs();
        let slack_budget = defect + poisson_defect + young_slack.max(0.0) + 1e-9;
        let contraction_bound = if factor < 1.0 {
            slack_budget / (1.0 - factor)
        } else {
            f64::INFINITY
        };
        let is_trivial = cand.h1_norm < opts.nontrivial_cutoff;
        let contraction_ok = a_val <= contraction_bound * (1.0 + 1e-9) + 1e-12;
        let consistent = !(solution_like && !is_trivial) && contraction_ok;
        if !consistent {
            inconsistency = true;
        }
        checks.push(CandidateCheck {
            h1_norm: cand.h1_norm,
            is_trivial,
            identity_defect,
            young_slack,
            contraction_bound,
            solution_like,
            consistent,
        });
    }
    let passes = !inconsistency
        && checks
            .iter()
            .all(|c| !c.solution_like || c.is_trivial);
    Ok(NonexistenceReport {
        lambda: prob.lambda(),
        threshold,
        factor,
        applicable,
        candidates: checks,
        passes,
        inconsistency,
    })
}
