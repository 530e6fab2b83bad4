//! The nonlinearity f, the weight α, and the explicit constants attached to
//! them.
//!
//! The admissible nonlinearities are continuous, superlinear at zero and
//! sublinear at infinity:
//!
//!   (f1)  f(s)/s → 0 as |s| → ∞,
//!   (f2)  f(s)/s → 0 as s → 0,
//!   (f3)  F(s₀) > 0 for some s₀, where F is the primitive of f with F(0)=0.
//!
//! These limits cannot be proven numerically; [`check_hypotheses`] certifies
//! them at a sampled resolution and records the witnesses. The non-existence
//! threshold for the coupled system is `1/(‖α‖∞ · c_f)` where `c_f` is the
//! sup of `|f(s)| / (|s| + 4√π e s²)`, computed by [`nonexistence_ratio`].

use crate::grid::{RadialGrid, FOUR_PI};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("exponents must satisfy 0 < r < 1 < p, got r = {r}, p = {p}")]
    BadExponents { r: f64, p: f64 },
    #[error("tabulated function needs at least 2 strictly increasing finite nodes")]
    BadTable,
    #[error("tabulated function must bracket s = 0")]
    TableMissingOrigin,
    #[error("non-finite nonlinearity value at s = {0}")]
    NonFiniteValue(f64),
    #[error("operation requires a nonzero nonlinearity")]
    ZeroNonlinearity,
    #[error("sampling range must reach |s| ≥ 1e3, got {0}")]
    SamplingTooNarrow(f64),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("exponent q must lie in (0,1), got {0}")]
    BadExponentQ(f64),
    #[error("coupling e must be positive, got {0}")]
    BadCoupling(f64),
    #[error("annulus radii must satisfy R_outer > r_inner >= 0, got ({0}, {1})")]
    BadAnnulus(f64, f64),
    #[error("weight must be non-negative, found α({0}) = {1}")]
    NegativeWeight(f64, f64),
    #[error("annulus floor α₀ = {floor} exceeds sampled weight value {value} at r = {radius}")]
    AnnulusFloorTooHigh { floor: f64, value: f64, radius: f64 },
}

const HYPOTHESIS_TOL: f64 = 1e-3;

// ---------------------------------------------------------------------------
// Nonlinearity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum NonlinearityKind {
    /// f(s) = min(|s|^r, |s|^p), even in s.
    MinAbsPowers { r: f64, p: f64 },
    /// f(s) = min(s₊^r, s₊^p), zero for s ≤ 0.
    MinPlusPowers { r: f64, p: f64 },
    /// f(s) = ln(1 + s²).
    LogSquare,
    /// Piecewise-linear table; primitive by exact integration of the pieces.
    Table(TableData),
}

#[derive(Debug, Clone, PartialEq)]
struct TableData {
    s: Vec<f64>,
    f: Vec<f64>,
    /// Cumulative integral of the interpolant from s[0], shifted so F(0) = 0.
    cumulative: Vec<f64>,
}

impl TableData {
    fn new(s: Vec<f64>, f: Vec<f64>) -> Result<Self, ModelError> {
        if s.len() < 2 || s.len() != f.len() {
            return Err(ModelError::BadTable);
        }
        for i in 0..s.len() {
            if !s[i].is_finite() || !f[i].is_finite() {
                return Err(ModelError::BadTable);
            }
            if i > 0 && s[i] <= s[i - 1] {
                return Err(ModelError::BadTable);
            }
        }
        if s[0] > 0.0 || *s.last().unwrap() < 0.0 {
            return Err(ModelError::TableMissingOrigin);
        }
        let mut cumulative = vec![0.0; s.len()];
        for i in 1..s.len() {
            cumulative[i] =
                cumulative[i - 1] + 0.5 * (f[i - 1] + f[i]) * (s[i] - s[i - 1]);
        }
        let at_zero = raw_cumulative(&s, &f, &cumulative, 0.0);
        for c in &mut cumulative {
            *c -= at_zero;
        }
        Ok(Self { s, f, cumulative })
    }

    fn eval(&self, x: f64) -> f64 {
        let s = &self.s;
        if x <= s[0] {
            return self.f[0];
        }
        if x >= *s.last().unwrap() {
            return *self.f.last().unwrap();
        }
        let i = s.partition_point(|v| *v <= x) - 1;
        let t = (x - s[i]) / (s[i + 1] - s[i]);
        self.f[i] + t * (self.f[i + 1] - self.f[i])
    }

    fn primitive(&self, x: f64) -> f64 {
        let s = &self.s;
        if x < s[0] {
            return self.cumulative[0] + self.f[0] * (x - s[0]);
        }
        if x > *s.last().unwrap() {
            return *self.cumulative.last().unwrap()
                + *self.f.last().unwrap() * (x - *s.last().unwrap());
        }
        raw_cumulative(s, &self.f, &self.cumulative, x)
    }

    fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }
}

/// Exact integral of the piecewise-linear interpolant up to `x` (inside the
/// table range), relative to the same anchor as `cumulative`.
fn raw_cumulative(s: &[f64], f: &[f64], cumulative: &[f64], x: f64) -> f64 {
    let i = (s.partition_point(|v| *v <= x).max(1) - 1).min(s.len() - 2);
    let dx = x - s[i];
    let slope = (f[i + 1] - f[i]) / (s[i + 1] - s[i]);
    cumulative[i] + f[i] * dx + 0.5 * slope * dx * dx
}

/// A continuous nonlinearity together with its primitive `F` (F(0) = 0), the
/// linear bound `n_f` with |f(s)| ≤ n_f |s| on the sampled range, and the
/// Lipschitz constant when a closed form is known.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    n_f: f64,
    lipschitz: Option<f64>,
}

impl Nonlinearity {
    pub fn min_abs_powers(r: f64, p: f64) -> Result<Self, ModelError> {
        check_exponents(r, p)?;
        Ok(Self::finish(NonlinearityKind::MinAbsPowers { r, p }, Some(p)))
    }

    pub fn min_plus_powers(r: f64, p: f64) -> Result<Self, ModelError> {
        check_exponents(r, p)?;
        Ok(Self::finish(NonlinearityKind::MinPlusPowers { r, p }, Some(p)))
    }

    pub fn log_square() -> Self {
        Self::finish(NonlinearityKind::LogSquare, Some(1.0))
    }

    pub fn from_table(s: Vec<f64>, f: Vec<f64>) -> Result<Self, ModelError> {
        let data = TableData::new(s, f)?;
        Ok(Self::finish(NonlinearityKind::Table(data), None))
    }

    fn finish(kind: NonlinearityKind, lipschitz: Option<f64>) -> Self {
        let mut nl = Self {
            kind,
            n_f: 0.0,
            lipschitz,
        };
        let spec = nl.default_sampling();
        nl.n_f = sampled_sup(&nl, &spec, |f_s, s| {
            if s == 0.0 {
                0.0
            } else {
                (f_s / s).abs()
            }
        });
        nl
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::MinAbsPowers { r, p } => {
                let a = s.abs();
                a.powf(*r).min(a.powf(*p))
            }
            NonlinearityKind::MinPlusPowers { r, p } => {
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(*r).min(s.powf(*p))
                }
            }
            NonlinearityKind::LogSquare => (1.0 + s * s).ln(),
            NonlinearityKind::Table(t) => t.eval(s),
        }
    }

    /// The primitive F(s) = ∫₀^s f(t) dt. Closed form for the built-in kinds,
    /// exact piecewise integration for tables.
    pub fn primitive(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::MinAbsPowers { r, p } => {
                s.signum() * min_power_primitive(s.abs(), *r, *p)
            }
            NonlinearityKind::MinPlusPowers { r, p } => {
                if s <= 0.0 {
                    0.0
                } else {
                    min_power_primitive(s, *r, *p)
                }
            }
            NonlinearityKind::LogSquare => s * (1.0 + s * s).ln() - 2.0 * s + 2.0 * s.atan(),
            NonlinearityKind::Table(t) => t.primitive(s),
        }
    }

    /// Smallest sampled bound with |f(s)| ≤ n_f |s|.
    pub fn linear_bound(&self) -> f64 {
        self.n_f
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            NonlinearityKind::MinAbsPowers { .. } => "min-abs-powers",
            NonlinearityKind::MinPlusPowers { .. } => "min-plus-powers",
            NonlinearityKind::LogSquare => "log-square",
            NonlinearityKind::Table(_) => "custom-table",
        }
    }

    /// Default sampling range: |s| ∈ [1e-6, 1e6] on a log scale, clipped to
    /// the table range for tabulated kinds.
    pub fn default_sampling(&self) -> SamplingSpec {
        let mut spec = SamplingSpec::default();
        if let NonlinearityKind::Table(t) = &self.kind {
            let (lo, hi) = t.range();
            spec.abs_max = hi.abs().max(lo.abs()).max(1.0);
        }
        spec
    }
}

fn check_exponents(r: f64, p: f64) -> Result<(), ModelError> {
    if r > 0.0 && r < 1.0 && p > 1.0 && r.is_finite() && p.is_finite() {
        Ok(())
    } else {
        Err(ModelError::BadExponents { r, p })
    }
}

/// ∫₀^x min(t^r, t^p) dt for x ≥ 0: the p-branch applies on [0,1], the
/// r-branch beyond.
fn min_power_primitive(x: f64, r: f64, p: f64) -> f64 {
    if x <= 1.0 {
        x.powf(p + 1.0) / (p + 1.0)
    } else {
        1.0 / (p + 1.0) + (x.powf(r + 1.0) - 1.0) / (r + 1.0)
    }
}

// ---------------------------------------------------------------------------
// Sampling and scanning helpers
// ---------------------------------------------------------------------------

/// Log-scale sampling plan for the hypothesis and envelope scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub abs_min: f64,
    pub abs_max: f64,
    pub per_decade: usize,
    pub both_signs: bool,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            abs_min: 1e-6,
            abs_max: 1e6,
            per_decade: 250,
            both_signs: true,
        }
    }
}

impl SamplingSpec {
    fn magnitudes(&self) -> Vec<f64> {
        let decades = (self.abs_max / self.abs_min).log10();
        let count = ((decades * self.per_decade as f64).ceil() as usize).max(2);
        let log_lo = self.abs_min.ln();
        let log_hi = self.abs_max.ln();
        let mut mags: Vec<f64> = (0..=count)
            .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / count as f64).exp())
            .collect();
        // pin the endpoints exactly; exp(ln(x)) wobbles in the last ulp
        mags[0] = self.abs_min;
        *mags.last_mut().unwrap() = self.abs_max;
        mags
    }

    fn signed_samples(&self) -> Vec<f64> {
        let mags = self.magnitudes();
        if self.both_signs {
            let mut out = Vec::with_capacity(2 * mags.len());
            out.extend(mags.iter().map(|m| -m));
            out.extend(mags.iter());
            out
        } else {
            mags
        }
    }
}

/// Max of `score(f(s), s)` over the sampled range, sharpened by
/// golden-section refinement around the best bracket.
fn sampled_sup(f: &Nonlinearity, spec: &SamplingSpec, score: impl Fn(f64, f64) -> f64) -> f64 {
    let mags = spec.magnitudes();
    let signs: &[f64] = if spec.both_signs { &[1.0, -1.0] } else { &[1.0] };
    let mut best = 0.0f64;
    for &sign in signs {
        let mut best_idx = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &m) in mags.iter().enumerate() {
            let s = sign * m;
            let v = score(f.eval(s), s);
            if v > best_val {
                best_val = v;
                best_idx = i;
            }
        }
        let lo = mags[best_idx.saturating_sub(1)];
        let hi = mags[(best_idx + 1).min(mags.len() - 1)];
        let refined = golden_max(|m| score(f.eval(sign * m), sign * m), lo, hi);
        best = best.max(best_val.max(refined));
    }
    best
}

/// Golden-section maximizer on [a, b].
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..120 {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        }
    }
    g1.max(g2)
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

/// Sampled certification of (f1)-(f3) with witness data.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HypothesisReport {
    pub f1_ok: bool,
    pub f2_ok: bool,
    pub f3_ok: bool,
    /// Sampled sup of |f(s)/s| at the largest sampled |s|.
    pub tail_ratio: f64,
    /// Sampled sup of |f(s)/s| at the smallest sampled |s|.
    pub origin_ratio: f64,
    /// Witness maximizing the sampled primitive F; present when f3 holds.
    pub s0: Option<f64>,
    /// F(s0) at the witness.
    pub f_primitive_max: f64,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.f1_ok && self.f2_ok && self.f3_ok
    }
}

/// Check (f1)-(f3) over the sampled range. Tolerance 1e-3 on the limit
/// ratios, inclusive: the certified claim is "the ratio has dropped to the
/// tolerance at the edge of the sampled range", nothing stronger.
pub fn check_hypotheses(
    f: &Nonlinearity,
    spec: &SamplingSpec,
) -> Result<HypothesisReport, ModelError> {
    if spec.abs_max < 1e3 {
        return Err(ModelError::SamplingTooNarrow(spec.abs_max));
    }
    let samples = spec.signed_samples();
    let mut tail_ratio = 0.0f64;
    let mut origin_ratio = 0.0f64;
    let mut best_f = f64::NEG_INFINITY;
    let mut s0 = 0.0;
    let largest = spec.abs_max;
    let smallest = spec.abs_min;
    for &s in &samples {
        let v = f.eval(s);
        if !v.is_finite() {
            return Err(ModelError::NonFiniteValue(s));
        }
        let ratio = (v / s).abs();
        if s.abs() >= largest * (1.0 - 1e-12) {
            tail_ratio = tail_ratio.max(ratio);
        }
        if s.abs() <= smallest * (1.0 + 1e-12) {
            origin_ratio = origin_ratio.max(ratio);
        }
        let big_f = f.primitive(s);
        if !big_f.is_finite() {
            return Err(ModelError::NonFiniteValue(s));
        }
        if big_f > best_f {
            best_f = big_f;
            s0 = s;
        }
    }
    let f3_ok = best_f > 0.0;
    // inclusive comparison: min(|s|^r,|s|^p)/|s| sits exactly at the
    // tolerance for r = 1/2 at the edge of the default range
    let tol = HYPOTHESIS_TOL * (1.0 + 1e-9);
    Ok(HypothesisReport {
        f1_ok: tail_ratio <= tol,
        f2_ok: origin_ratio <= tol,
        f3_ok,
        tail_ratio,
        origin_ratio,
        s0: f3_ok.then_some(s0),
        f_primitive_max: best_f,
    })
}

// ---------------------------------------------------------------------------
// The ratio constant c_f and the growth envelopes
// ---------------------------------------------------------------------------

/// c_f = sup over s ≠ 0 of |f(s)| / (|s| + 4√π e s²). Its reciprocal scaled
/// by ‖α‖∞⁻¹ is the non-existence threshold for λ. Located by a log-grid
/// scan over |s| ∈ [1e-6, 1e6] (both signs) plus golden-section refinement.
pub fn nonexistence_ratio(f: &Nonlinearity, e: f64) -> Result<f64, ModelError> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(ModelError::BadCoupling(e));
    }
    let c = 4.0 * std::f64::consts::PI.sqrt() * e;
    let spec = f.default_sampling();
    let sup = sampled_sup(f, &spec, |fs, s| fs.abs() / (s.abs() + c * s * s));
    if !sup.is_finite() {
        return Err(ModelError::NonFiniteValue(sup));
    }
    if sup <= 0.0 {
        return Err(ModelError::ZeroNonlinearity);
    }
    Ok(sup)
}

/// Non-existence threshold ‖α‖∞⁻¹ c_f⁻¹, with the convention 1/0 = +∞ for a
/// vanishing weight.
pub fn nonexistence_threshold(f: &Nonlinearity, weight: &Weight, e: f64) -> Result<f64, ModelError> {
    let cf = nonexistence_ratio(f, e)?;
    if weight.sup_norm() == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / (weight.sup_norm() * cf))
    }
}

/// Smallest sampled c_ε with |f(s)| ≤ ε|s| + c_ε s² on the sampled range.
pub fn quadratic_envelope(f: &Nonlinearity, eps: f64) -> Result<f64, ModelError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ModelError::BadEpsilon(eps));
    }
    let spec = f.default_sampling();
    let sup = sampled_sup(f, &spec, |fs, s| (fs.abs() - eps * s.abs()) / (s * s));
    Ok(sup.max(0.0))
}

/// Smallest sampled M_ε with |f(s)| ≤ ε|s| + M_ε |s|^q. The scan mirrors the
/// splitting behind the estimate: near zero the ε|s| term dominates, near
/// infinity again, and the middle band is controlled by |s|^q; each band is
/// sampled on its own log scale.
pub fn subcritical_envelope(f: &Nonlinearity, eps: f64, q: f64) -> Result<f64, ModelError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ModelError::BadEpsilon(eps));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(ModelError::BadExponentQ(q));
    }
    let base = f.default_sampling();
    let bands = [
        SamplingSpec {
            abs_max: base.abs_max.min(1e-2),
            per_decade: 400,
            ..base
        },
        SamplingSpec {
            abs_min: 1e-2_f64.min(base.abs_max),
            abs_max: base.abs_max.min(1e2),
            per_decade: 800,
            ..base
        },
        SamplingSpec {
            abs_min: 1e2_f64.min(base.abs_max),
            ..base
        },
    ];
    let mut sup = 0.0f64;
    for band in bands {
        if band.abs_min >= band.abs_max {
            continue;
        }
        sup = sup.max(sampled_sup(f, &band, |fs, s| {
            (fs.abs() - eps * s.abs()) / s.abs().powf(q)
        }));
    }
    Ok(sup.max(0.0))
}

// ---------------------------------------------------------------------------
// Weight
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum WeightKind {
    /// α = α₀ on the annulus, 0 outside.
    ConstantAnnulus,
    /// α(r) = exp(-r²).
    Gaussian,
    /// α(r) = (1 + r)^{-β}.
    PowerDecay { beta: f64 },
    /// Piecewise-linear radial table.
    Table { r: Vec<f64>, a: Vec<f64> },
}

/// Annulus on which the weight is bounded below: essinf over
/// [r_inner, r_outer] is at least `alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Annulus {
    pub r_inner: f64,
    pub r_outer: f64,
    pub alpha0: f64,
}

/// Radial weight α ≥ 0 with its sup norm, the exponent q ∈ (0,1) from the
/// integrability hypothesis α ∈ L^{6/(5-q)}, and annulus floor data.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    sup_norm: f64,
    q: f64,
    annulus: Annulus,
}

impl Weight {
    pub fn constant_annulus(
        alpha0: f64,
        r_inner: f64,
        r_outer: f64,
        q: f64,
    ) -> Result<Self, ModelError> {
        if !(alpha0 >= 0.0) || !alpha0.is_finite() {
            return Err(ModelError::NegativeWeight(r_inner, alpha0));
        }
        let annulus = Annulus {
            r_inner,
            r_outer,
            alpha0,
        };
        Self::validated(WeightKind::ConstantAnnulus, alpha0, q, annulus)
    }

    pub fn gaussian(r_inner: f64, r_outer: f64, q: f64) -> Result<Self, ModelError> {
        let annulus = Annulus {
            r_inner,
            r_outer,
            alpha0: (-r_outer * r_outer).exp(),
        };
        Self::validated(WeightKind::Gaussian, 1.0, q, annulus)
    }

    pub fn power_decay(beta: f64, r_inner: f64, r_outer: f64, q: f64) -> Result<Self, ModelError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ModelError::NegativeWeight(0.0, beta));
        }
        let annulus = Annulus {
            r_inner,
            r_outer,
            alpha0: (1.0 + r_outer).powf(-beta),
        };
        Self::validated(WeightKind::PowerDecay { beta }, 1.0, q, annulus)
    }

    pub fn from_table(
        r: Vec<f64>,
        a: Vec<f64>,
        annulus: Annulus,
        q: f64,
    ) -> Result<Self, ModelError> {
        if r.len() < 2 || r.len() != a.len() {
            return Err(ModelError::BadTable);
        }
        let mut sup: f64 = 0.0;
        for i in 0..r.len() {
            if !r[i].is_finite() || !a[i].is_finite() || (i > 0 && r[i] <= r[i - 1]) {
                return Err(ModelError::BadTable);
            }
            if a[i] < 0.0 {
                return Err(ModelError::NegativeWeight(r[i], a[i]));
            }
            sup = sup.max(a[i]);
        }
        Self::validated(WeightKind::Table { r, a }, sup, q, annulus)
    }

    fn validated(
        kind: WeightKind,
        sup_norm: f64,
        q: f64,
        annulus: Annulus,
    ) -> Result<Self, ModelError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(ModelError::BadExponentQ(q));
        }
        if !(annulus.r_inner >= 0.0 && annulus.r_outer > annulus.r_inner) {
            return Err(ModelError::BadAnnulus(annulus.r_inner, annulus.r_outer));
        }
        let w = Self {
            kind,
            sup_norm,
            q,
            annulus,
        };
        // essinf check at sampled resolution: the floor may not exceed any
        // sampled value on the annulus.
        for k in 0..=1024 {
            let r = annulus.r_inner
                + (annulus.r_outer - annulus.r_inner) * k as f64 / 1024.0;
            let v = w.eval(r);
            if v < annulus.alpha0 - 1e-12 * annulus.alpha0.abs().max(1.0) {
                return Err(ModelError::AnnulusFloorTooHigh {
                    floor: annulus.alpha0,
                    value: v,
                    radius: r,
                });
            }
        }
        Ok(w)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match &self.kind {
            WeightKind::ConstantAnnulus => {
                if r >= self.annulus.r_inner && r <= self.annulus.r_outer {
                    self.annulus.alpha0
                } else {
                    0.0
                }
            }
            WeightKind::Gaussian => (-r * r).exp(),
            WeightKind::PowerDecay { beta } => (1.0 + r).powf(-beta),
            WeightKind::Table { r: rs, a } => {
                if r <= rs[0] {
                    a[0]
                } else if r >= *rs.last().unwrap() {
                    *a.last().unwrap()
                } else {
                    let i = rs.partition_point(|v| *v <= r) - 1;
                    let t = (r - rs[i]) / (rs[i + 1] - rs[i]);
                    a[i] + t * (a[i + 1] - a[i])
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn annulus(&self) -> Annulus {
        self.annulus
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            WeightKind::ConstantAnnulus => "constant-annulus",
            WeightKind::Gaussian => "gaussian",
            WeightKind::PowerDecay { .. } => "power-decay",
            WeightKind::Table { .. } => "custom-table",
        }
    }
}

/// ‖α‖_{6/(5-q)} on the truncated domain plus a divergence probe.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegrabilityReport {
    pub norm: f64,
    /// Value recomputed with r_max doubled.
    pub norm_doubled: f64,
    /// Set when doubling r_max moves the norm by more than 1%: the weight
    /// decays too slowly for the truncation to be trusted.
    pub divergence_flag: bool,
}

/// Computes ‖α‖_{6/(5-q)} over `[0, r_max]` and flags slow decay by
/// re-evaluating on a domain twice as large.
pub fn weight_integrability(weight: &Weight, grid: &RadialGrid) -> IntegrabilityReport {
    let p = 6.0 / (5.0 - weight.q());
    let norm = lp_norm_on(weight, grid.nodes(), p);
    let n2 = 2 * grid.len() - 1;
    let r2 = 2.0 * grid.r_max();
    let doubled: Vec<f64> = (0..n2).map(|i| r2 * i as f64 / (n2 - 1) as f64).collect();
    let norm_doubled = lp_norm_on(weight, &doubled, p);
    let divergence_flag = if norm == 0.0 {
        norm_doubled > 0.0
    } else {
        (norm_doubled - norm).abs() / norm > 0.01
    };
    IntegrabilityReport {
        norm,
        norm_doubled,
        divergence_flag,
    }
}

fn lp_norm_on(weight: &Weight, nodes: &[f64], p: f64) -> f64 {
    let mut integral = 0.0;
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        let fa = nodes[i] * nodes[i] * weight.eval(nodes[i]).powf(p);
        let fb = nodes[i + 1] * nodes[i + 1] * weight.eval(nodes[i + 1]).powf(p);
        integral += 0.5 * (fa + fb) * h;
    }
    (FOUR_PI * integral).max(0.0).powf(1.0 / p)
}
