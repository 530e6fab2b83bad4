//! Grids, quadrature and norm algebra for radially symmetric functions on ℝ³
//! truncated to `[0, r_max]`.
//!
//! Every integral over ℝ³ of a radial integrand g reduces to
//! `4π ∫₀^{r_max} r² g(r) dr`; the r² weight is folded into the quadrature
//! weights. Composite trapezoid is the default rule (robust for the
//! kink-bearing truncation profiles), composite Simpson is available for
//! smooth integrands.

use std::sync::Arc;

use thiserror::Error;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("radial grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid nodes must start at r = 0, got {0}")]
    NonzeroOrigin(f64),
    #[error("grid nodes must be strictly increasing and finite (violation near index {0})")]
    NotIncreasing(usize),
    #[error("r_max must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("non-finite sample at node {index} (r = {radius})")]
    NonFiniteSample { index: usize, radius: f64 },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("matter fields must vanish at r_max, got {0}")]
    NonzeroTail(f64),
    #[error("Simpson quadrature requires a uniform grid")]
    SimpsonNeedsUniform,
    #[error("derivative needs at least 3 nodes, got {0}")]
    TooFewForDerivative(usize),
}

/// Composite quadrature rule used by [`RadialGrid::integrate_r3`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// Strictly increasing radii r_0 = 0 < … < r_{n-1} = r_max with the
/// quadrature weights for `4π ∫ r² · dr` precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    /// Weights of the configured rule, with the 4π r² factor folded in.
    weights: Vec<f64>,
    /// Plain trapezoid weights on `dr` (no r² factor). The Newton-potential
    /// cumulatives and the interaction form must stay on the trapezoid rule
    /// independent of the configured rule; see the `poisson` module.
    trap_dr: Vec<f64>,
    rule: QuadratureRule,
    uniform: bool,
}

impl RadialGrid {
    /// Uniform grid on `[0, r_max]` with `n` nodes.
    pub fn uniform(r_max: f64, n: usize, rule: QuadratureRule) -> Result<Self, GridError> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(GridError::BadRadius(r_max));
        }
        if n < 16 {
            return Err(GridError::TooFewNodes(n));
        }
        let h = r_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        nodes[n - 1] = r_max;
        Self::from_nodes(nodes, rule)
    }

    /// Grid from explicit nodes. Must be strictly increasing, start at 0 and
    /// have at least 16 entries.
    pub fn from_nodes(nodes: Vec<f64>, rule: QuadratureRule) -> Result<Self, GridError> {
        if nodes.len() < 16 {
            return Err(GridError::TooFewNodes(nodes.len()));
        }
        if nodes[0] != 0.0 {
            return Err(GridError::NonzeroOrigin(nodes[0]));
        }
        for i in 1..nodes.len() {
            if !nodes[i].is_finite() || nodes[i] <= nodes[i - 1] {
                return Err(GridError::NotIncreasing(i));
            }
        }
        let n = nodes.len();
        let h0 = nodes[1] - nodes[0];
        let uniform = nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-12 * h0.max(1.0));

        let trap_dr = trapezoid_dr_weights(&nodes);
        let weights = match rule {
            QuadratureRule::Trapezoid => nodes
                .iter()
                .zip(&trap_dr)
                .map(|(&r, &w)| FOUR_PI * r * r * w)
                .collect(),
            QuadratureRule::Simpson => {
                if !uniform {
                    return Err(GridError::SimpsonNeedsUniform);
                }
                simpson_dr_weights(n, h0)
                    .into_iter()
                    .enumerate()
                    .map(|(i, w)| FOUR_PI * nodes[i] * nodes[i] * w)
                    .collect()
            }
        };

        Ok(Self {
            nodes,
            weights,
            trap_dr,
            rule,
            uniform,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Quadrature weights of the configured rule including the `4π r²` factor.
    pub fn r3_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Trapezoid weights on plain `dr` (no volume factor).
    pub fn trapezoid_dr(&self) -> &[f64] {
        &self.trap_dr
    }

    /// `4π ∫₀^{r_max} r² g(r) dr` from nodal samples.
    pub fn integrate_r3_samples(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.nodes.len());
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, g)| w * g)
            .sum()
    }

    /// Same as [`integrate_r3_samples`](Self::integrate_r3_samples) but always
    /// on the trapezoid rule, whatever the configured rule is.
    pub fn integrate_r3_trapezoid(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.nodes.len());
        self.nodes
            .iter()
            .zip(&self.trap_dr)
            .zip(samples)
            .map(|((&r, &w), g)| FOUR_PI * r * r * w * g)
            .sum()
    }
}

fn trapezoid_dr_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Composite Simpson weights on a uniform grid. An odd interval count is
/// handled with a Simpson-3/8 block on the last three intervals, which keeps
/// the composite order at O(h⁴).
fn simpson_dr_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals % 2 == 0 {
        intervals
    } else {
        intervals - 3
    };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// A sampled radial profile on a [`RadialGrid`]. Samples are validated finite
/// on construction; matter fields (u ∈ H¹) additionally carry the Dirichlet
/// truncation u(r_max) = 0, checked by [`RadialFunction::new_h1`]. Potentials
/// φ ∈ D^{1,2} do not vanish at r_max: they continue as a monopole tail κ/r
/// beyond the grid (see the `poisson` module).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::GridMismatch);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFiniteSample {
                    index: i,
                    radius: grid.nodes()[i],
                });
            }
        }
        Ok(Self { grid, values })
    }

    /// A matter field: finite samples with the Dirichlet tail u(r_max) = 0.
    pub fn new_h1(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self, GridError> {
        let f = Self::new(grid, values)?;
        let tail = *f.values.last().unwrap();
        if tail != 0.0 {
            return Err(GridError::NonzeroTail(tail));
        }
        Ok(f)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_dirichlet(&self) -> bool {
        *self.values.last().unwrap() == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| t * v).collect(),
        }
    }

    pub(crate) fn from_values_unchecked(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    fn same_grid(&self, other: &Self) -> Result<(), GridError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }
}

/// `4π ∫ r² g(r) dr` over the truncated domain.
pub fn integrate_r3(g: &RadialFunction) -> f64 {
    g.grid.integrate_r3_samples(&g.values)
}

/// Nodal derivative: second-order central differences in the interior,
/// second-order one-sided stencils at r = 0 and r_max. For an even profile
/// the derivative at the origin vanishes to O(h²).
pub fn differentiate(u: &RadialFunction) -> Result<RadialFunction, GridError> {
    let r = u.grid.nodes();
    let v = &u.values;
    let n = r.len();
    if n < 3 {
        return Err(GridError::TooFewForDerivative(n));
    }
    let mut d = vec![0.0; n];
    d[0] = three_point(r[0], r[0], r[1], r[2], v[0], v[1], v[2]);
    for i in 1..n - 1 {
        d[i] = three_point(r[i], r[i - 1], r[i], r[i + 1], v[i - 1], v[i], v[i + 1]);
    }
    d[n - 1] = three_point(
        r[n - 1],
        r[n - 3],
        r[n - 2],
        r[n - 1],
        v[n - 3],
        v[n - 2],
        v[n - 1],
    );
    Ok(RadialFunction::from_values_unchecked(u.grid.clone(), d))
}

/// Derivative at `x` of the quadratic through (x0,f0), (x1,f1), (x2,f2).
fn three_point(x: f64, x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    f0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + f1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// H¹, D^{1,2} and L^p norms (p ∈ {2, 12/5, 3, 6}) of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NormReport {
    pub h1: f64,
    pub d12: f64,
    pub l2: f64,
    pub l12_5: f64,
    pub l3: f64,
    pub l6: f64,
}

impl NormReport {
    pub fn lp(&self, p: f64) -> Option<f64> {
        if p == 2.0 {
            Some(self.l2)
        } else if p == 2.4 {
            Some(self.l12_5)
        } else if p == 3.0 {
            Some(self.l3)
        } else if p == 6.0 {
            Some(self.l6)
        } else {
            None
        }
    }
}

/// All norms of `u`: h1² = ∫(|u'|² + u²), d12² = ∫|u'|², L^p by direct
/// quadrature of |u|^p. The derivative comes from [`differentiate`].
pub fn norms(u: &RadialFunction) -> Result<NormReport, GridError> {
    let du = differentiate(u)?;
    let d12_sq = integrate_r3(&du.map(|x| x * x));
    let l2_sq = integrate_r3(&u.map(|x| x * x));
    let lp = |p: f64| integrate_r3(&u.map(|x| x.abs().powf(p))).max(0.0).powf(1.0 / p);
    Ok(NormReport {
        h1: (d12_sq + l2_sq).max(0.0).sqrt(),
        d12: d12_sq.max(0.0).sqrt(),
        l2: l2_sq.max(0.0).sqrt(),
        l12_5: lp(2.4),
        l3: lp(3.0),
        l6: lp(6.0),
    })
}

impl RadialFunction {
    fn map(&self, f: impl Fn(f64) -> f64) -> RadialFunction {
        RadialFunction::from_values_unchecked(
            self.grid.clone(),
            self.values.iter().map(|&x| f(x)).collect(),
        )
    }

    /// H¹ distance to another profile on the same grid.
    pub fn h1_distance(&self, other: &Self) -> Result<f64, GridError> {
        self.same_grid(other)?;
        let diff = RadialFunction::from_values_unchecked(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        Ok(norms(&diff)?.h1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(r_max, n, QuadratureRule::Trapezoid).unwrap())
    }

    #[test]
    fn rejects_small_and_malformed_grids() {
        assert!(matches!(
            RadialGrid::uniform(1.0, 8, QuadratureRule::Trapezoid),
            Err(GridError::TooFewNodes(8))
        ));
        let mut nodes: Vec<f64> = (0..20).map(|i| i as f64).collect();
        nodes[0] = 0.5;
        assert!(matches!(
            RadialGrid::from_nodes(nodes, QuadratureRule::Trapezoid),
            Err(GridError::NonzeroOrigin(_))
        ));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid(1.0, 32);
        let mut v = vec![0.0; 32];
        v[5] = f64::NAN;
        assert!(matches!(
            RadialFunction::new(g, v),
            Err(GridError::NonFiniteSample { index: 5, .. })
        ));
    }

    #[test]
    fn integrates_zero_to_zero() {
        let g = grid(1.0, 64);
        let z = RadialFunction::zero(g);
        assert_eq!(integrate_r3(&z), 0.0);
    }

    #[test]
    fn integrates_unit_ball_volume() {
        // g ≡ 1 on [0,1]: 4π ∫ r² dr = 4π/3.
        let g = grid(1.0, 2001);
        let one = RadialFunction::from_fn(g, |_| 1.0).unwrap();
        let exact = FOUR_PI / 3.0;
        assert!((integrate_r3(&one) - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn integrates_linear_profile() {
        // g(r) = r on [0,1]: 4π ∫ r³ dr = π.
        let g = grid(1.0, 2001);
        let lin = RadialFunction::from_fn(g, |r| r).unwrap();
        // trapezoid error for the cubic integrand is π h² at this resolution
        assert!((integrate_r3(&lin) - std::f64::consts::PI).abs() < 2e-6);
    }

    #[test]
    fn trapezoid_error_decays_quadratically() {
        // Smooth integrand: halving h divides the error by ≈ 4.
        let f = |r: f64| (1.0 + r * r).ln() * (-r).exp();
        // exact value from a very fine reference grid
        let fine = grid(2.0, 1 << 15);
        let reference = integrate_r3(&RadialFunction::from_fn(fine, f).unwrap());
        let coarse_err = {
            let g = grid(2.0, 129);
            (integrate_r3(&RadialFunction::from_fn(g, f).unwrap()) - reference).abs()
        };
        let half_err = {
            let g = grid(2.0, 257);
            (integrate_r3(&RadialFunction::from_fn(g, f).unwrap()) - reference).abs()
        };
        let ratio = coarse_err / half_err;
        assert!(
            (ratio - 4.0).abs() <= 0.8,
            "trapezoid refinement ratio {ratio} not within 4 ± 20%"
        );
    }

    #[test]
    fn simpson_beats_trapezoid_on_smooth_integrands() {
        let f = |r: f64| (1.0 + r * r).ln() * (-r).exp();
        let fine = grid(2.0, 1 << 15);
        let reference = integrate_r3(&RadialFunction::from_fn(fine, f).unwrap());
        for n in [129usize, 130] {
            let gs = Arc::new(RadialGrid::uniform(2.0, n, QuadratureRule::Simpson).unwrap());
            let gt = grid(2.0, n);
            let es = (integrate_r3(&RadialFunction::from_fn(gs, f).unwrap()) - reference).abs();
            let et = (integrate_r3(&RadialFunction::from_fn(gt, f).unwrap()) - reference).abs();
            assert!(es < et / 10.0, "simpson {es} vs trapezoid {et} at n = {n}");
        }
    }

    #[test]
    fn norms_of_zero_vanish() {
        let g = grid(2.0, 64);
        let r = norms(&RadialFunction::zero(g)).unwrap();
        assert_eq!(
            (r.h1, r.d12, r.l2, r.l12_5, r.l3, r.l6),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn tent_l2_norm_matches_exact_integral() {
        // u(r) = max(0, 1-r): ‖u‖₂² = 4π ∫₀¹ r²(1-r)² dr = 4π/30.
        let g = grid(2.0, 4001);
        let tent = RadialFunction::from_fn(g, |r| (1.0 - r).max(0.0)).unwrap();
        let l2_sq = norms(&tent).unwrap().l2.powi(2);
        let exact = FOUR_PI / 30.0;
        assert!(
            (l2_sq - exact).abs() < 1e-6,
            "tent ‖u‖₂² = {l2_sq}, exact {exact}"
        );
    }

    #[test]
    fn h1_splits_into_d12_and_l2() {
        let g = grid(3.0, 200);
        let u = RadialFunction::from_fn(g, |r| (-r * r).exp() * (1.0 + r)).unwrap();
        let n = norms(&u).unwrap();
        let lhs = n.h1 * n.h1;
        let rhs = n.d12 * n.d12 + n.l2 * n.l2;
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(1.0, 100);
        let c = RadialFunction::from_fn(g, |_| 3.25).unwrap();
        let d = differentiate(&c).unwrap();
        assert!(d.max_abs() < 1e-10);
    }

    #[test]
    fn derivative_of_square_is_linear() {
        let g = grid(1.0, 200);
        let u = RadialFunction::from_fn(g.clone(), |r| r * r).unwrap();
        let d = differentiate(&u).unwrap();
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * r).abs() < 1e-9, "du({r}) = {v}");
        }
    }

    #[test]
    fn even_profile_has_flat_origin() {
        let h = 1.0 / 199.0;
        let g = grid(1.0, 200);
        let u = RadialFunction::from_fn(g, |r| r.cos()).unwrap();
        let d0 = differentiate(&u).unwrap().values()[0];
        assert!(d0.abs() < 5.0 * h * h, "u'(0) = {d0} for cos profile");
    }

    #[test]
    fn holder_chain_bounds_interaction_integrand() {
        // ∫ u²|ψ| ≤ ‖u‖²_{12/5} ‖ψ‖₆; exact for positive-weight quadrature.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = grid(5.0, 257);
        for _ in 0..50 {
            let a: f64 = rng.gen_range(0.1..3.0);
            let b: f64 = rng.gen_range(0.1..3.0);
            let c: f64 = rng.gen_range(0.2..2.0);
            let u = RadialFunction::from_fn(g.clone(), |r| a * (-c * r * r).exp() * (1.0 - r / 5.0))
                .unwrap();
            let psi =
                RadialFunction::from_fn(g.clone(), |r| b * (r * 1.7).sin() * (-r).exp()).unwrap();
            let lhs = integrate_r3(
                &RadialFunction::from_fn(g.clone(), |_| 0.0)
                    .unwrap(),
            ) + g.integrate_r3_samples(
                &u.values()
                    .iter()
                    .zip(psi.values())
                    .map(|(x, y)| x * x * y.abs())
                    .collect::<Vec<_>>(),
            );
            let nu = norms(&u).unwrap();
            let npsi = norms(&psi).unwrap();
            let rhs = nu.l12_5 * nu.l12_5 * npsi.l6;
            assert!(
                lhs <= rhs * (1.0 + 1e-10),
                "Hölder violated: {lhs} > {rhs}"
            );
        }
    }

    #[test]
    fn norms_scale_homogeneously() {
        let g = grid(4.0, 300);
        let u = RadialFunction::from_fn(g, |r| (1.0 + r).recip() * (-(r - 1.0).powi(2)).exp())
            .unwrap();
        let n1 = norms(&u).unwrap();
        for t in [2.0, -3.5, 0.125] {
            let nt = norms(&u.scaled(t)).unwrap();
            let s = t.abs();
            for (a, b) in [
                (nt.h1, s * n1.h1),
                (nt.l2, s * n1.l2),
                (nt.l12_5, s * n1.l12_5),
                (nt.l3, s * n1.l3),
                (nt.l6, s * n1.l6),
            ] {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-30), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn h1_constructor_demands_dirichlet_tail() {
        let g = grid(1.0, 32);
        let v = vec![1.0; 32];
        assert!(matches!(
            RadialFunction::new_h1(g.clone(), v),
            Err(GridError::NonzeroTail(_))
        ));
        let mut v = vec![1.0; 32];
        v[31] = 0.0;
        assert!(RadialFunction::new_h1(g, v).is_ok());
    }
}
