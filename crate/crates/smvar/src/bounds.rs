//! Explicit constants and interval estimates: annulus-plateau truncation
//! profiles, the closed-form lower bound M for their weighted primitive
//! energy, the upper bound N for their quadratic energy, and the resulting
//! localization of the two-solution parameter window
//!
//!   Λ ⊂ ( ‖α‖∞⁻¹ c_f⁻¹ ,  4N/M ).

use thiserror::Error;

use std::sync::Arc;

use crate::energy::{breakdown_values, EnergyError, Problem};
use crate::grid::{GridError, RadialFunction, RadialGrid, FOUR_PI};
use crate::model::{
    check_hypotheses, nonexistence_threshold, ModelError, Nonlinearity, Weight,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("shape parameter sigma must lie in (0,1), got {0}")]
    BadSigma(f64),
    #[error("annulus radii must satisfy R_outer > r_inner >= 0, got ({0}, {1})")]
    BadRadii(f64, f64),
    #[error("truncation support R_outer = {r_outer} exceeds the domain r_max = {r_max}")]
    DomainTooSmall { r_outer: f64, r_max: f64 },
    #[error("plateau value must have positive primitive, got F({s0}) = {value}")]
    NonPositivePrimitive { s0: f64, value: f64 },
    #[error("weight has no positive annulus floor")]
    NoAnnulusFloor,
    #[error("no sigma in the scan menu gives a positive lower bound")]
    NoPositiveBound,
    #[error("estimate not applicable: {0}")]
    NotApplicable(&'static str),
    #[error("nonlinearity fails the sampled hypotheses")]
    HypothesesFail,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Annulus-plateau truncation: plateau value `s0` on
/// [r_inner, r_inner + σ(R-r_inner)], linear ramps down to the support
/// endpoints, support inside [(r_inner - (1-σ)(R-r_inner))₊, R].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TruncationSpec {
    pub s0: f64,
    pub sigma: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl TruncationSpec {
    pub fn new(s0: f64, sigma: f64, r_inner: f64, r_outer: f64) -> Result<Self, BoundsError> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(BoundsError::BadSigma(sigma));
        }
        if !(r_inner >= 0.0 && r_outer > r_inner) || !r_outer.is_finite() {
            return Err(BoundsError::BadRadii(r_inner, r_outer));
        }
        if !s0.is_finite() {
            return Err(BoundsError::BadSigma(s0));
        }
        Ok(Self {
            s0,
            sigma,
            r_inner,
            r_outer,
        })
    }

    /// Left end of the support, clamped at the origin.
    pub fn support_left(&self) -> f64 {
        (self.r_inner - (1.0 - self.sigma) * (self.r_outer - self.r_inner)).max(0.0)
    }

    /// Outer edge of the plateau, r_inner + σ(R - r_inner).
    pub fn plateau_right(&self) -> f64 {
        self.r_inner + self.sigma * (self.r_outer - self.r_inner)
    }

    /// Pointwise evaluation of the piecewise-linear profile.
    pub fn eval(&self, r: f64) -> f64 {
        let left = self.support_left();
        let p_right = self.plateau_right();
        if r < left || r > self.r_outer {
            0.0
        } else if r < self.r_inner {
            self.s0 * (r - left) / (self.r_inner - left)
        } else if r <= p_right {
            self.s0
        } else {
            self.s0 * (self.r_outer - r) / (self.r_outer - p_right)
        }
    }
}

/// Sample the truncation on the grid. Fails when the support does not fit
/// inside the domain.
pub fn build_truncation(
    spec: &TruncationSpec,
    grid: &Arc<RadialGrid>,
) -> Result<RadialFunction, BoundsError> {
    if spec.r_outer > grid.r_max() {
        return Err(BoundsError::DomainTooSmall {
            r_outer: spec.r_outer,
            r_max: grid.r_max(),
        });
    }
    let values: Vec<f64> = grid.nodes().iter().map(|&r| spec.eval(r)).collect();
    Ok(RadialFunction::new_h1(grid.clone(), values)?)
}

/// Closed-form lower bound M(α₀, s₀, σ, R, r) for the weighted primitive
/// energy E₂ of the truncation: the plateau contributes at least
/// α₀ F(s₀)·vol, and the ramp shells are penalized with the worst primitive
/// value over [-|s₀|, |s₀|], located by dense scan.
pub fn potential_lower_bound(weight: &Weight, f: &Nonlinearity, spec: &TruncationSpec) -> f64 {
    let annulus = weight.annulus();
    let r = spec.r_inner;
    let big_r = spec.r_outer;
    let plateau_right = spec.plateau_right();
    let left = spec.support_left();
    let f_s0 = f.primitive(spec.s0);
    let max_abs_f = max_primitive_magnitude(f, spec.s0.abs());
    FOUR_PI / 3.0
        * (annulus.alpha0 * f_s0 * (plateau_right.powi(3) - r.powi(3))
            - weight.sup_norm()
                * max_abs_f
                * (r.powi(3) - left.powi(3) + big_r.powi(3) - plateau_right.powi(3)))
}

fn max_primitive_magnitude(f: &Nonlinearity, s_max: f64) -> f64 {
    if s_max == 0.0 {
        return 0.0;
    }
    let steps = 10_000;
    let mut worst = 0.0f64;
    for k in 0..=steps {
        let s = -s_max + 2.0 * s_max * k as f64 / steps as f64;
        worst = worst.max(f.primitive(s).abs());
    }
    worst
}

const SIGMA_MENU: [f64; 8] = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999];

/// Scan the σ menu and return the truncation shape maximizing the lower
/// bound M, provided it is positive.
pub fn sigma_search(
    weight: &Weight,
    f: &Nonlinearity,
    s0: f64,
) -> Result<TruncationSpec, BoundsError> {
    let annulus = weight.annulus();
    if annulus.alpha0 <= 0.0 {
        return Err(BoundsError::NoAnnulusFloor);
    }
    let f_s0 = f.primitive(s0);
    if !(f_s0 > 0.0) {
        return Err(BoundsError::NonPositivePrimitive { s0, value: f_s0 });
    }
    let mut best: Option<(f64, TruncationSpec)> = None;
    for &sigma in &SIGMA_MENU {
        let spec = TruncationSpec::new(s0, sigma, annulus.r_inner, annulus.r_outer)?;
        let m = potential_lower_bound(weight, f, &spec);
        if m > 0.0 && best.as_ref().map_or(true, |(bm, _)| m > *bm) {
            best = Some((m, spec));
        }
    }
    best.map(|(_, spec)| spec).ok_or(BoundsError::NoPositiveBound)
}

/// The pair (t, N): t bounds ‖u_σ‖²_{H¹} in closed form and
/// N = t/2 + π e d*² s_{12/5}⁴ t² bounds the quadratic energy E₁(u_σ).
/// Only derived for truncations centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadraticBound {
    pub t: f64,
    pub n: f64,
}

pub fn quadratic_upper_bound(
    spec: &TruncationSpec,
    e: f64,
    d_star: f64,
    s_12_5: f64,
) -> Result<QuadraticBound, BoundsError> {
    if spec.r_inner != 0.0 {
        return Err(BoundsError::NotApplicable(
            "the closed-form energy bound assumes an annulus touching the origin",
        ));
    }
    let sigma = spec.sigma;
    let big_r = spec.r_outer;
    let t = FOUR_PI / 3.0
        * big_r
        * spec.s0
        * spec.s0
        * (big_r * big_r + (1.0 + sigma + sigma * sigma) / (1.0 - sigma));
    let n = 0.5 * t
        + std::f64::consts::PI * e * d_star * d_star * s_12_5.powi(4) * t * t;
    Ok(QuadraticBound { t, n })
}

/// The computed enclosure of the two-solution window, with both the
/// closed-form route 4N/M and the sharper quadrature route 4E₁/E₂ for the
/// same truncation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntervalEstimate {
    /// ‖α‖∞⁻¹ c_f⁻¹; +∞ when the weight vanishes.
    pub threshold: f64,
    pub s0: f64,
    pub sigma: f64,
    pub t_value: f64,
    pub n_value: f64,
    pub m_value: f64,
    /// 4N/M.
    pub upper: f64,
    /// 4 E₁(u_σ)/E₂(u_σ) by quadrature on the grid.
    pub upper_energy: f64,
    /// Set when the window is empty (upper ≤ threshold) or the weight
    /// vanishes.
    pub vacuous: bool,
}

const S0_MENU: [f64; 9] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0];

/// Compute the window enclosure for the problem, scanning plateau values and
/// shapes for the tightest closed-form upper bound. The plateau value is a
/// free choice (any witness with F(s₀) > 0 yields a valid enclosure); the
/// scan reports the smallest resulting 4N/M.
pub fn interval_estimate(
    prob: &Problem,
    d_star: f64,
    s_12_5: f64,
) -> Result<IntervalEstimate, BoundsError> {
    let weight = prob.weight();
    let f = prob.nonlinearity();
    if weight.sup_norm() == 0.0 {
        return Ok(IntervalEstimate {
            threshold: f64::INFINITY,
            s0: 0.0,
            sigma: 0.0,
            t_value: 0.0,
            n_value: 0.0,
            m_value: 0.0,
            upper: 0.0,
            upper_energy: 0.0,
            vacuous: true,
        });
    }
    let report = check_hypotheses(f, &f.default_sampling())?;
    if !report.all_ok() {
        return Err(BoundsError::HypothesesFail);
    }
    if weight.annulus().r_inner != 0.0 {
        return Err(BoundsError::NotApplicable(
            "window localization requires a weight floor on a ball around the origin",
        ));
    }
    let threshold = nonexistence_threshold(f, weight, prob.coupling())?;

    let mut best: Option<(f64, TruncationSpec, QuadraticBound, f64)> = None;
    for &mag in &S0_MENU {
        for s0 in [mag, -mag] {
            if !(f.primitive(s0) > 0.0) {
                continue;
            }
            let spec = match sigma_search(weight, f, s0) {
                Ok(s) => s,
                Err(BoundsError::NoPositiveBound) => continue,
                Err(other) => return Err(other),
            };
            let m = potential_lower_bound(weight, f, &spec);
            let qb = quadratic_upper_bound(&spec, prob.coupling(), d_star, s_12_5)?;
            let upper = 4.0 * qb.n / m;
            if best.as_ref().map_or(true, |(u, ..)| upper < *u) {
                best = Some((upper, spec, qb, m));
            }
        }
    }
    let (upper, spec, qb, m) = best.ok_or(BoundsError::NoPositiveBound)?;

    let u = build_truncation(&spec, prob.grid())?;
    let b = breakdown_values(prob, u.values());
    let upper_energy = if b.potential > 0.0 {
        4.0 * b.base / b.potential
    } else {
        f64::INFINITY
    };

    Ok(IntervalEstimate {
        threshold,
        s0: spec.s0,
        sigma: spec.sigma,
        t_value: qb.t,
        n_value: qb.n,
        m_value: m,
        upper,
        upper_energy,
        vacuous: !(upper > threshold),
    })
}

/// The admissible-parameter scale ā = (1+ρ₀) / (E₂(u₁)/E₁(u₁) - sup-ratio)
/// from the three-critical-point setup, where sup-ratio is the sampled
/// sup{E₂ : E₁ < ρ₀}/ρ₀. Returns +∞ when the denominator underflows; errors
/// when either hypothesis fails.
pub fn admissible_upper(
    rho0: f64,
    e1_u1: f64,
    e2_u1: f64,
    sup_ratio: f64,
) -> Result<f64, BoundsError> {
    if !(rho0 > 0.0) || !rho0.is_finite() {
        return Err(BoundsError::NotApplicable("rho0 must be positive"));
    }
    if !(e1_u1 > rho0) {
        return Err(BoundsError::NotApplicable(
            "hypothesis (i) fails: need rho0 < E1(u1)",
        ));
    }
    let ratio = e2_u1 / e1_u1;
    if !(sup_ratio < ratio) {
        return Err(BoundsError::NotApplicable(
            "hypothesis (ii) fails: small-ball ratio must stay below E2(u1)/E1(u1)",
        ));
    }
    Ok((1.0 + rho0) / (ratio - sup_ratio))
}

/// Truncation start profile for the descent solvers: the (s₀, σ) pair from
/// a coarse menu minimizing the computable ratio E₁/E₂ on the grid. A low
/// ratio start has negative energy for the smallest λ and descends to the
/// nontrivial well.
pub fn best_start_truncation(prob: &Problem) -> Option<(TruncationSpec, RadialFunction)> {
    let annulus = prob.weight().annulus();
    if annulus.alpha0 <= 0.0 || annulus.r_outer > prob.grid().r_max() {
        return None;
    }
    let f = prob.nonlinearity();
    let mut best: Option<(f64, TruncationSpec, RadialFunction)> = None;
    for &mag in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        for s0 in [mag, -mag] {
            if !(f.primitive(s0) > 0.0) {
                continue;
            }
            for &sigma in &[0.3, 0.5, 0.7, 0.8, 0.9, 0.95] {
                let Ok(spec) = TruncationSpec::new(s0, sigma, annulus.r_inner, annulus.r_outer)
                else {
                    continue;
                };
                let Ok(u) = build_truncation(&spec, prob.grid()) else {
                    continue;
                };
                let b = breakdown_values(prob, u.values());
                if b.potential <= 0.0 {
                    continue;
                }
                let ratio = b.base / b.potential;
                if best.as_ref().map_or(true, |(r, ..)| ratio < *r) {
                    best = Some((ratio, spec, u));
                }
            }
        }
    }
    best.map(|(_, spec, u)| (spec, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norms, QuadratureRule};
    use crate::model::Annulus;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(r_max, n, QuadratureRule::Trapezoid).unwrap())
    }

    fn default_problem() -> Problem {
        Problem::new(
            grid(20.0, 2001),
            1.0,
            1.0,
            Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap(),
            Nonlinearity::min_abs_powers(0.5, 2.0).unwrap(),
        )
        .unwrap()
    }

    /// f(s) = 2|s| as a table: F(s) = s|s| exactly under trapezoid
    /// integration, so F(1) = 1 and max |F| over [-1,1] is 1.
    fn double_abs_table() -> Nonlinearity {
        Nonlinearity::from_table(vec![-1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0]).unwrap()
    }

    #[test]
    fn truncation_matches_piecewise_formula() {
        let g = grid(2.0, 801); // h = 0.0025, all probe radii on nodes
        let spec = TruncationSpec::new(1.0, 0.5, 0.0, 1.0).unwrap();
        let u = build_truncation(&spec, &g).unwrap();
        let at = |r: f64| {
            let i = g.nodes().iter().position(|&x| (x - r).abs() < 1e-12).unwrap();
            u.values()[i]
        };
        assert_eq!(at(0.25), 1.0);
        assert!((at(0.75) - 0.5).abs() < 1e-12);
        assert_eq!(at(1.0), 0.0);
    }

    #[test]
    fn truncation_sup_is_plateau_value() {
        let g = grid(3.0, 601);
        for (s0, sigma, r, big_r) in [(1.0, 0.5, 0.0, 1.0), (-2.0, 0.8, 0.5, 2.0), (0.3, 0.9, 1.0, 2.5)]
        {
            let spec = TruncationSpec::new(s0, sigma, r, big_r).unwrap();
            let u = build_truncation(&spec, &g).unwrap();
            assert!(
                (u.max_abs() - s0.abs()).abs() < 1e-12,
                "sup {} vs |s0| {}",
                u.max_abs(),
                s0.abs()
            );
        }
    }

    #[test]
    fn truncation_outside_domain_is_rejected() {
        let g = grid(2.0, 64);
        let spec = TruncationSpec::new(1.0, 0.5, 0.0, 3.0).unwrap();
        assert!(matches!(
            build_truncation(&spec, &g),
            Err(BoundsError::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn h1_norm_dominates_plateau_volume_bound() {
        // ‖u_σ‖²_{H¹} ≥ (4π s0²/3)[(r+σ(R-r))³ - r³]
        let g = grid(20.0, 2001);
        for (s0, sigma, r, big_r) in [
            (1.0, 0.5, 0.0, 1.0),
            (2.0, 0.8, 0.0, 2.0),
            (0.5, 0.9, 0.5, 1.5),
            (-1.5, 0.75, 0.0, 4.0),
        ] {
            let spec = TruncationSpec::new(s0, sigma, r, big_r).unwrap();
            let u = build_truncation(&spec, &g).unwrap();
            let h1_sq = norms(&u).unwrap().h1.powi(2);
            let bound = FOUR_PI * s0 * s0 / 3.0
                * (spec.plateau_right().powi(3) - r.powi(3));
            assert!(
                h1_sq >= bound - 1e-3 * bound,
                "h1² = {h1_sq} below bound {bound} for sigma {sigma}"
            );
        }
    }

    #[test]
    fn lower_bound_reproduces_hand_value() {
        // α₀ = ‖α‖∞ = 1, r = 0, R = 1, σ = ½, F(s0) = 1, max|F| = 1:
        // M = (4π/3)(1/8 - 7/8) = -π
        let w = Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap();
        let f = double_abs_table();
        let spec = TruncationSpec::new(1.0, 0.5, 0.0, 1.0).unwrap();
        let m = potential_lower_bound(&w, &f, &spec);
        assert!(
            (m + std::f64::consts::PI).abs() < 1e-9,
            "hand value -π, got {m}"
        );
    }

    #[test]
    fn lower_bound_reaches_plateau_limit_as_sigma_tends_to_one() {
        let w = Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap();
        let f = Nonlinearity::min_abs_powers(0.5, 2.0).unwrap();
        let s0 = 1.0;
        let spec = TruncationSpec::new(s0, 1.0 - 1e-6, 0.0, 1.0).unwrap();
        let m = potential_lower_bound(&w, &f, &spec);
        let limit = FOUR_PI / 3.0 * f.primitive(s0); // α₀ F(s0) R³ volume term
        assert!(
            (m - limit).abs() < 1e-4 * limit,
            "M = {m} vs σ→1 limit {limit}"
        );
    }

    #[test]
    fn lower_bound_vanishes_for_zero_nonlinearity() {
        let w = Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap();
        let f = Nonlinearity::from_table(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]).unwrap();
        let spec = TruncationSpec::new(1.0, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(potential_lower_bound(&w, &f, &spec), 0.0);
    }

    #[test]
    fn sigma_search_finds_positive_bound_for_defaults() {
        let w = Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap();
        let f = Nonlinearity::min_abs_powers(0.5, 2.0).unwrap();
        let spec = sigma_search(&w, &f, 1.0).unwrap();
        let m = potential_lower_bound(&w, &f, &spec);
        assert!(m > 0.0);
        // maximizer property over the scanned menu
        let at_09 = potential_lower_bound(
            &w,
            &f,
            &TruncationSpec::new(1.0, 0.9, 0.0, 1.0).unwrap(),
        );
        assert!(m >= at_09);
    }

    #[test]
    fn sigma_search_rejects_nonpositive_primitive() {
        let w = Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap();
        let f = Nonlinearity::from_table(vec![-1.0, 0.0, 1.0], vec![-2.0, 0.0, -2.0]).unwrap();
        assert!(matches!(
            sigma_search(&w, &f, 1.0),
            Err(BoundsError::NonPositivePrimitive { .. })
        ));
    }

    #[test]
    fn quadratic_bound_reproduces_hand_value() {
        // R = 1, σ = ½, s0 = 1: t = (4π/3)(1 + 3.5) = 6π
        let spec = TruncationSpec::new(1.0, 0.5, 0.0, 1.0).unwrap();
        let (d_star, s) = (0.43, 0.4);
        let qb = quadratic_upper_bound(&spec, 1.0, d_star, s).unwrap();
        let six_pi = 6.0 * std::f64::consts::PI;
        assert!((qb.t - six_pi).abs() < 1e-6, "t = {}", qb.t);
        let expected_n = 3.0 * std::f64::consts::PI
            + std::f64::consts::PI * d_star * d_star * s.powi(4) * six_pi * six_pi;
        assert!((qb.n - expected_n).abs() < 1e-9 * expected_n);
    }

    #[test]
    fn quadratic_bound_degenerates_at_zero_plateau() {
        let spec = TruncationSpec::new(0.0, 0.5, 0.0, 1.0).unwrap();
        let qb = quadratic_upper_bound(&spec, 1.0, 0.4, 0.4).unwrap();
        assert_eq!(qb.t, 0.0);
        assert_eq!(qb.n, 0.0);
    }

    #[test]
    fn quadratic_bound_requires_origin_annulus() {
        let spec = TruncationSpec::new(1.0, 0.5, 0.5, 1.0).unwrap();
        assert!(matches!(
            quadratic_upper_bound(&spec, 1.0, 0.4, 0.4),
            Err(BoundsError::NotApplicable(_))
        ));
    }

    #[test]
    fn quadratic_bound_dominates_grid_energy() {
        let prob = default_problem();
        let d_star = crate::embedding::estimate_d_star(prob.grid());
        let s = crate::embedding::estimate_s_p(prob.grid(), 2.4);
        for sigma in [0.5, 0.8, 0.9] {
            let spec = TruncationSpec::new(1.0, sigma, 0.0, 1.0).unwrap();
            let u = build_truncation(&spec, prob.grid()).unwrap();
            let e1 = breakdown_values(&prob, u.values()).base;
            let qb = quadratic_upper_bound(&spec, 1.0, d_star, s).unwrap();
            assert!(
                e1 <= qb.n + 1e-3 * qb.n,
                "E1 = {e1} above N = {} at sigma {sigma}",
                qb.n
            );
            assert!(qb.t >= norms(&u).unwrap().h1.powi(2) - 1e-3 * qb.t);
        }
    }

    #[test]
    fn interval_estimate_is_nonvacuous_for_defaults() {
        let prob = default_problem();
        let d_star = crate::embedding::estimate_d_star(prob.grid());
        let s = crate::embedding::estimate_s_p(prob.grid(), 2.4);
        let est = interval_estimate(&prob, d_star, s).unwrap();
        assert!(!est.vacuous);
        assert!(est.threshold.is_finite() && est.threshold > 0.0);
        assert!(est.upper > est.threshold);
        assert!(est.m_value > 0.0);
        // the closed-form route dominates the sharper quadrature route
        assert!(
            est.upper >= est.upper_energy * (1.0 - 1e-9),
            "4N/M = {} below 4E1/E2 = {}",
            est.upper,
            est.upper_energy
        );
    }

    #[test]
    fn interval_estimate_vacuous_for_zero_weight() {
        let prob = Problem::new(
            grid(20.0, 2001),
            1.0,
            1.0,
            Weight::constant_annulus(0.0, 0.0, 1.0, 0.5).unwrap(),
            Nonlinearity::min_abs_powers(0.5, 2.0).unwrap(),
        )
        .unwrap();
        let est = interval_estimate(&prob, 0.43, 0.4).unwrap();
        assert!(est.vacuous);
        assert!(est.threshold.is_infinite());
    }

    #[test]
    fn interval_estimate_rejects_zero_nonlinearity() {
        let prob = Problem::new(
            grid(20.0, 2001),
            1.0,
            1.0,
            Weight::constant_annulus(1.0, 0.0, 1.0, 0.5).unwrap(),
            Nonlinearity::from_table(vec![-1e6, 0.0, 1e6], vec![0.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            interval_estimate(&prob, 0.43, 0.4),
            Err(BoundsError::HypothesesFail)
        ));
    }

    #[test]
    fn admissible_upper_matches_hand_value() {
        // sup-ratio 0, ρ₀ = ½, E₂/E₁ = 1: ā = 1.5
        let abar = admissible_upper(0.5, 2.0, 2.0, 0.0).unwrap();
        assert!((abar - 1.5).abs() < 1e-12);
    }

    #[test]
    fn admissible_upper_reports_unbounded_denominator() {
        // ratio E2/E1 subnormal, sup-ratio zero: the division overflows and
        // the unbounded scale is reported as +inf
        let abar = admissible_upper(0.5, 2.0, 1e-308, 0.0).unwrap();
        assert!(abar.is_infinite());
    }

    #[test]
    fn admissible_upper_enforces_hypotheses() {
        assert!(admissible_upper(3.0, 2.0, 2.0, 0.0).is_err()); // (i)
        assert!(admissible_upper(0.5, 2.0, 2.0, 1.5).is_err()); // (ii)
    }

    #[test]
    fn admissible_upper_stays_below_four_energy_ratio() {
        // with ρ₀ < 1 and sup-ratio < E₂/(2E₁)·ρ₀... the over-bound ā < 4E₁/E₂
        let (e1, e2) = (3.0, 1.2);
        for rho0 in [0.1, 0.5, 0.9] {
            let sup_ratio = 0.4 * e2 / e1; // < E₂/(2E₁)
            let abar = admissible_upper(rho0, e1, e2, sup_ratio).unwrap();
            assert!(
                abar < 4.0 * e1 / e2,
                "abar = {abar} vs 4E1/E2 = {}",
                4.0 * e1 / e2
            );
        }
    }

    #[test]
    fn start_truncation_has_low_energy_ratio() {
        let prob = default_problem();
        let (spec, u) = best_start_truncation(&prob).unwrap();
        let b = breakdown_values(&prob, u.values());
        assert!(b.potential > 0.0);
        assert!(spec.sigma > 0.0 && spec.sigma < 1.0);
        // the selected ratio must not exceed the plain σ = 0.5, s0 = 1 choice
        let baseline = build_truncation(
            &TruncationSpec::new(1.0, 0.5, 0.0, 1.0).unwrap(),
            prob.grid(),
        )
        .unwrap();
        let bb = breakdown_values(&prob, baseline.values());
        assert!(b.base / b.potential <= bb.base / bb.potential + 1e-9);
    }

    #[test]
    fn annulus_report_type_serializes() {
        let a = Annulus {
            r_inner: 0.0,
            r_outer: 1.0,
            alpha0: 1.0,
        };
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("r_outer"));
    }
}
