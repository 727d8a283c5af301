//! Independent evaluation routes for the generalized binomial theorem, the
//! explicit moment generating function and the explicit characteristic
//! function of the fractional binomial law.
//!
//! Each explicit formula is a finite sum over [`RootsOfUnity`] minus a
//! `sin(απ)`-weighted integral over `(0, 1)` against `t^{α-1}(1-t)^{αn}`.
//! Integrals are taken against the normalized Beta(α, αn+1) density so the
//! quadrature sees an O(1) integrand, and large powers are carried in log
//! domain relative to the dominant `ω = 1` term.

pub mod quadrature;
pub mod roots;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::{log_normalizing_constant, DistributionTable, Params};
use crate::error::{Error, Result};
use crate::specfun::{is_near_integer, log_add_exp, log_gamma_unchecked, principal_pow, NeumaierSum};

pub use quadrature::{integrate, integrate_01, QuadValue, QuadratureConfig};
pub use roots::{roots_of_unity, RootsOfUnity};

/// Below this distance to an integer, `α` is evaluated but flagged.
pub const NEAR_INTEGER_WARN: f64 = 1e-3;

/// Attached to results whose `α` is close to, but not treated as, an integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditioningWarning {
    pub alpha: f64,
    pub distance_to_integer: f64,
}

impl fmt::Display for ConditioningWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha = {} is {:e} from an integer; the integral correction is ill-conditioned",
            self.alpha, self.distance_to_integer
        )
    }
}

/// A value together with an optional conditioning warning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub warning: Option<ConditioningWarning>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum AlphaKind {
    /// `α/2 ∈ ℕ`.
    EvenInteger,
    OddInteger,
    Fractional,
}

/// `α` snapped to an integer when within tolerance, plus its kind.
#[derive(Clone, Copy, Debug)]
struct AlphaClass {
    alpha: f64,
    kind: AlphaKind,
    warning: Option<ConditioningWarning>,
}

impl AlphaClass {
    fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if is_near_integer(alpha) {
            let a = alpha.round();
            let kind = if a as u64 % 2 == 0 { AlphaKind::EvenInteger } else { AlphaKind::OddInteger };
            return Ok(AlphaClass { alpha: a, kind, warning: None });
        }
        let distance = (alpha - alpha.round()).abs();
        let warning = (distance < NEAR_INTEGER_WARN)
            .then_some(ConditioningWarning { alpha, distance_to_integer: distance });
        Ok(AlphaClass { alpha, kind: AlphaKind::Fractional, warning })
    }

    fn has_integral(&self) -> bool {
        self.kind == AlphaKind::Fractional
    }
}

/// Radius `θ_α` of the interval on which the explicit CF formula is valid.
///
/// `2π` for integer `α`, otherwise `π` times the distance from `α` to the
/// nearest even integer.
pub fn theta_alpha(alpha: f64) -> f64 {
    if is_near_integer(alpha) {
        return 2.0 * PI;
    }
    let lower = 2.0 * (alpha / 2.0).floor();
    let upper = 2.0 * (alpha / 2.0).ceil();
    (alpha - lower).min(upper - alpha) * PI
}

/// `ln B(α, αn + 1)`.
fn log_beta_weight(alpha: f64, an: f64) -> f64 {
    log_gamma_unchecked(alpha) + log_gamma_unchecked(an + 1.0) - log_gamma_unchecked(alpha + an + 1.0)
}

/// Beta(α, αn+1) density at `t`.
fn beta_density(t: f64, alpha: f64, an: f64, log_beta: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    ((alpha - 1.0) * t.ln() + an * (-t).ln_1p() - log_beta).exp()
}

/// `|a - b e^{iφ}|²` for real `a, b`, written to avoid cancellation in the
/// imaginary direction.
#[inline]
fn abs2_diff_rotated(a: f64, b: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let re = a - b * c;
    let im = b * s;
    re * re + im * im
}

fn real_part_checked(sum: Complex64) -> Result<f64> {
    if sum.im.abs() > 1e-10 * sum.re.abs() + 1e-12 {
        return Err(Error::ImaginaryResidue { real: sum.re, imag: sum.im });
    }
    Ok(sum.re)
}

/// Right-hand side of the generalized binomial theorem divided by `(1+λ)^{αn}`.
struct ScaledGbt {
    log_scale: f64,
    scaled: f64,
    warning: Option<ConditioningWarning>,
}

fn gbt_scaled(alpha: f64, n: u32, lambda: f64, config: &QuadratureConfig) -> Result<ScaledGbt> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let class = AlphaClass::new(alpha)?;
    let a = class.alpha;
    let an = a * n as f64;
    let log1p_lambda = lambda.ln_1p();
    let log_scale = an * log1p_lambda;

    let mut sum = Complex64::new(0.0, 0.0);
    for w in RootsOfUnity::new(a).omegas() {
        let base = (Complex64::new(1.0, 0.0) + w * lambda) / (1.0 + lambda);
        sum += principal_pow(base, an)?;
    }
    let mut scaled = real_part_checked(sum)?;

    if class.has_integral() {
        let log_beta = log_beta_weight(a, an);
        let ln_lambda = lambda.ln();
        let la = lambda.powf(a);
        let c1 = (log_beta - log_scale).exp();
        let c2 = (log_beta + an * (ln_lambda - log1p_lambda)).exp();
        let phase = -a * PI;
        let integral: f64 = integrate_01(
            |t| {
                let w = beta_density(t, a, an, log_beta);
                if w == 0.0 {
                    return 0.0;
                }
                let ta = t.powf(a);
                let d1 = abs2_diff_rotated(ta, la, phase);
                // |e^{-iαπ} - (λt)^α|² = |(λt)^α - e^{-iαπ}|².
                let d2 = abs2_diff_rotated((lambda * t).powf(a), 1.0, phase);
                w * (c1 / d1 + c2 / d2)
            },
            a,
            config,
        )?;
        scaled -= a * la * (a * PI).sin() / PI * integral;
    }
    Ok(ScaledGbt { log_scale, scaled, warning: class.warning })
}

/// `Σ_{ω∈K_α}(1+λω)^{αn} − (αλ^α sin απ / π) ∫₀¹ t^{α-1}(1-t)^{αn}{…} dt`.
///
/// Equals `α Σ_j binom(αn, αj) λ^{αj}`. The integral term is dropped for
/// integer `α`.
pub fn gbt_rhs(alpha: f64, n: u32, lambda: f64, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    let g = gbt_scaled(alpha, n, lambda, config)?;
    Ok(Evaluated { value: g.log_scale.exp() * g.scaled, warning: g.warning })
}

/// Natural log of [`gbt_rhs`], safe for `αn ln(1+λ)` beyond the double range.
pub fn gbt_log_rhs(alpha: f64, n: u32, lambda: f64, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    let g = gbt_scaled(alpha, n, lambda, config)?;
    Ok(Evaluated { value: g.log_scale + g.scaled.ln(), warning: g.warning })
}

/// Direct left-hand side `α Σ_j binom(αn, αj) λ^{αj}` in log domain.
pub fn gbt_log_lhs(alpha: f64, n: u32, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    let w = alpha * n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|j| {
            let z = if j == n { w } else { alpha * j as f64 };
            crate::specfun::log_gen_binom(w, z).map(|c| alpha.ln() + c.ln() + z * lambda.ln())
        })
        .collect::<Result<_>>()?;
    Ok(crate::specfun::log_sum_exp(&terms))
}

/// `ln Z_{α,x}^{(n)}` through the generalized binomial theorem at `λ = x/(1-x)`.
pub fn log_normalizing_constant_gbt(params: &Params, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    params.require_open_x()?;
    let x = params.x;
    let lambda = x / (1.0 - x);
    let g = gbt_log_rhs(params.alpha, params.n, lambda, config)?;
    let an = AlphaClass::new(params.alpha)?.alpha * params.n as f64;
    Ok(Evaluated { value: an * (-x).ln_1p() + g.value, warning: g.warning })
}

/// `Z - 1` from the correction terms of the generalized binomial theorem.
///
/// The roots-of-unity terms other than `ω = 1` and the integral term are
/// summed directly, so the excess is resolved far below double-precision
/// resolution of `Z` itself.
pub fn normalizing_excess(params: &Params, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    params.require_open_x()?;
    let class = AlphaClass::new(params.alpha)?;
    let a = class.alpha;
    let x = params.x;
    let an = a * params.n as f64;

    let mut sum = Complex64::new(0.0, 0.0);
    for w in RootsOfUnity::new(a).nontrivial() {
        sum += principal_pow(Complex64::new(1.0 - x, 0.0) + w * x, an)?;
    }
    let mut excess = real_part_checked(sum)?;

    if class.has_integral() {
        let log_beta = log_beta_weight(a, an);
        let (lx, l1x) = (x.ln(), (-x).ln_1p());
        let c1 = (log_beta + an * l1x).exp();
        let c2 = (log_beta + an * lx).exp();
        let (xa, ya) = (x.powf(a), (1.0 - x).powf(a));
        let phase = -a * PI;
        let integral: f64 = integrate_01(
            |t| {
                let w = beta_density(t, a, an, log_beta);
                if w == 0.0 {
                    return 0.0;
                }
                // |{t(1-x)}^α - x^α e^{-iαπ}|² and |(1-x)^α e^{-iαπ} - (tx)^α|².
                let d1 = abs2_diff_rotated((t * (1.0 - x)).powf(a), xa, phase);
                let d2 = abs2_diff_rotated((t * x).powf(a), ya, phase);
                w * (c1 / d1 + c2 / d2)
            },
            a,
            config,
        )?;
        excess -= a * xa * ya * (a * PI).sin() / PI * integral;
    }
    Ok(Evaluated { value: excess, warning: class.warning })
}

/// `M(ξ) = E[e^{ξS}]` by log-sum-exp over the table.
pub fn mgf_direct(table: &DistributionTable, xi: f64) -> f64 {
    log_mgf_direct(table, xi).exp()
}

/// `ln M(ξ)` by log-sum-exp over the table.
pub fn log_mgf_direct(table: &DistributionTable, xi: f64) -> f64 {
    let terms: Vec<f64> = table
        .log_pmf_values()
        .iter()
        .enumerate()
        .map(|(j, lp)| xi * j as f64 + lp)
        .collect();
    crate::specfun::log_sum_exp(&terms)
}

/// `ln M(ξ)` from the explicit roots-of-unity plus integral expression.
pub fn log_mgf_explicit(params: &Params, xi: f64, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    params.require_open_x()?;
    if !xi.is_finite() {
        return Err(Error::domain("xi must be finite"));
    }
    let class = AlphaClass::new(params.alpha)?;
    let a = class.alpha;
    let x = params.x;
    let nf = params.n as f64;
    let an = a * nf;
    let log_z = log_normalizing_constant(params)?;
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    // D = 1 - x + x e^{ξ/α}; every term is scaled by D^{-αn}.
    let log_d = log_add_exp(l1x, lx + xi / a);
    let d = log_d.exp();
    let tilt = (xi / a).exp();

    let mut sum = Complex64::new(0.0, 0.0);
    for w in RootsOfUnity::new(a).omegas() {
        let base = (Complex64::new(1.0 - x, 0.0) + w * (x * tilt)) / d;
        sum += principal_pow(base, an)?;
    }
    let mut bracket = real_part_checked(sum)?;

    if class.has_integral() {
        let log_beta = log_beta_weight(a, an);
        let scale = log_beta - an * log_d + (a / PI).ln() + xi;
        let c1 = (scale + a * lx + a * (nf + 1.0) * l1x).exp();
        let c2 = (scale + a * (nf + 1.0) * lx + a * l1x + xi * nf).exp();
        let xa_e = x.powf(a) * xi.exp();
        let ya = (1.0 - x).powf(a);
        let integral: f64 = integrate_01(
            |t| {
                let w = beta_density(t, a, an, log_beta);
                if w == 0.0 {
                    return 0.0;
                }
                // |{t(1-x)}^α - x^α e^{ξ-iαπ}|² and |(1-x)^α - (tx)^α e^{ξ+iαπ}|².
                let d1 = abs2_diff_rotated((t * (1.0 - x)).powf(a), xa_e, -a * PI);
                let d2 = abs2_diff_rotated(ya, (t * x).powf(a) * xi.exp(), a * PI);
                w * (c1 / d1 + c2 / d2)
            },
            a,
            config,
        )?;
        bracket -= (a * PI).sin() * integral;
    }
    if !(bracket > 0.0) {
        return Err(Error::Quadrature { estimate: bracket, error_estimate: f64::NAN });
    }
    Ok(Evaluated { value: an * log_d - log_z + bracket.ln(), warning: class.warning })
}

/// `M(ξ)` from the explicit expression; see [`log_mgf_explicit`].
pub fn mgf_explicit(params: &Params, xi: f64, config: &QuadratureConfig) -> Result<Evaluated<f64>> {
    let e = log_mgf_explicit(params, xi, config)?;
    Ok(Evaluated { value: e.value.exp(), warning: e.warning })
}

/// `φ(ξ) = E[e^{iξS}]` summed over the table.
pub fn cf_direct(table: &DistributionTable, xi: f64) -> Complex64 {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for (j, lp) in table.log_pmf_values().iter().enumerate() {
        let (s, c) = (xi * j as f64).sin_cos();
        let p = lp.exp();
        re.add(p * c);
        im.add(p * s);
    }
    Complex64::new(re.total(), im.total())
}

/// `φ(ξ)` from the explicit expression with the four `ψ` denominators.
///
/// Valid only for `|ξ| < θ_α`; see [`theta_alpha`].
pub fn cf_explicit(params: &Params, xi: f64, config: &QuadratureConfig) -> Result<Evaluated<Complex64>> {
    params.require_open_x()?;
    let theta = theta_alpha(params.alpha);
    if !(xi.abs() < theta) {
        return Err(Error::domain(format!(
            "explicit characteristic function needs |xi| < {theta}, got {xi}"
        )));
    }
    let class = AlphaClass::new(params.alpha)?;
    let a = class.alpha;
    let x = params.x;
    let nf = params.n as f64;
    let an = a * nf;
    let log_z = log_normalizing_constant(params)?;
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    let rot = Complex64::from_polar(1.0, xi / a);

    let mut sum = Complex64::new(0.0, 0.0);
    for w in RootsOfUnity::new(a).omegas() {
        sum += principal_pow(Complex64::new(1.0 - x, 0.0) + w * rot * x, an)?;
    }

    if class.has_integral() {
        let log_beta = log_beta_weight(a, an);
        let k1 = Complex64::from_polar((log_beta + a * lx + a * (nf + 1.0) * l1x).exp(), xi);
        let k2 = Complex64::from_polar((log_beta + a * (nf + 1.0) * lx + a * l1x).exp(), xi * (nf - 1.0));
        let (xa, ya) = (x.powf(a), (1.0 - x).powf(a));
        let e_minus = Complex64::from_polar(1.0, xi - a * PI);
        let e_plus = Complex64::from_polar(1.0, xi + a * PI);
        let integral: Complex64 = integrate_01(
            |t| {
                let w = beta_density(t, a, an, log_beta);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let u = (t * (1.0 - x)).powf(a);
                let v = (t * x).powf(a);
                let psi1 = u - e_minus * xa;
                let psi2 = u - e_plus * xa;
                let psi3 = e_plus.conj() * ya - v;
                let psi4 = e_minus.conj() * ya - v;
                (k1 / (psi1 * psi2) + k2 / (psi3 * psi4)) * w
            },
            a,
            config,
        )?;
        sum -= integral * (a * (a * PI).sin() / PI);
    }
    Ok(Evaluated { value: sum * (-log_z).exp(), warning: class.warning })
}
