//! Rate functions, limiting cumulant functions and exact finite-n checks of
//! the large deviation, moderate deviation and normal approximation
//! behaviour of the fractional binomial law.
//!
//! Nothing here samples: every empirical quantity is an exact tail sum or
//! a scan over jump points of the exact distribution function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{build_distribution, build_nu, DistributionTable, Params};
use crate::error::{Error, Result};
use crate::specfun::{log_add_exp, std_normal_cdf, NeumaierSum};
use crate::transforms::log_mgf_direct;

/// Arguments of the rate functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub alpha: f64,
    pub x: f64,
    pub z: f64,
}

impl RateQuery {
    pub fn new(alpha: f64, x: f64, z: f64) -> Result<Self> {
        check_alpha_x(alpha, x)?;
        if z.is_nan() {
            return Err(Error::params("z must not be NaN"));
        }
        Ok(RateQuery { alpha, x, z })
    }
}

fn check_alpha_x(alpha: f64, x: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::params(format!("alpha must be positive, got {alpha}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::params(format!("x must lie in (0, 1), got {x}")));
    }
    Ok(())
}

/// `c_n = n^β` with `1/2 < β < 1`, together with the `n` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModerateScale {
    beta: f64,
    grid: Vec<u32>,
}

impl ModerateScale {
    pub fn new(beta: f64, grid: Vec<u32>) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::params(format!("beta must lie in (0.5, 1), got {beta}")));
        }
        check_grid(&grid)?;
        Ok(ModerateScale { beta, grid })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &[u32] {
        &self.grid
    }

    pub fn c(&self, n: u32) -> f64 {
        (n as f64).powf(self.beta)
    }
}

impl Default for ModerateScale {
    fn default() -> Self {
        ModerateScale { beta: 0.7, grid: vec![400, 800, 1600, 3200, 6400] }
    }
}

pub(crate) fn check_grid(grid: &[u32]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::params("grid must not be empty"));
    }
    if grid[0] == 0 {
        return Err(Error::params("grid values must be at least 1"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::params("grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: u32,
    pub empirical: f64,
    pub theoretical: f64,
    pub abs_error: f64,
}

/// Empirical versus limiting rates along an `n` grid, sorted by `n`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub rows: Vec<DeviationRow>,
}

impl DeviationReport {
    pub fn abs_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.abs_error).collect()
    }
}

/// Which one-sided event a deviation experiment measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// `P(S/n >= z)`.
    Upper,
    /// `P(S/n <= z)`.
    Lower,
}

/// `α { z ln(z/x) + (1-z) ln((1-z)/(1-x)) }` on `[0, 1]`, `+∞` outside.
pub fn rate_ldp(q: &RateQuery) -> f64 {
    let RateQuery { alpha, x, z } = *q;
    if !(0.0..=1.0).contains(&z) {
        return f64::INFINITY;
    }
    let xlog = |p: f64, r: f64| if p == 0.0 { 0.0 } else { p * (p / r).ln() };
    alpha * (xlog(z, x) + xlog(1.0 - z, 1.0 - x))
}

/// `α z² / (2 x (1-x))`.
pub fn rate_mdp(q: &RateQuery) -> f64 {
    q.alpha * q.z * q.z / (2.0 * q.x * (1.0 - q.x))
}

/// `Λ(ξ) = α ln(1 - x + x e^{ξ/α})`, the limit of `(1/n) ln E[e^{ξS}]`.
pub fn lambda_limit(alpha: f64, x: f64, xi: f64) -> f64 {
    alpha * log_add_exp((-x).ln_1p(), x.ln() + xi / alpha)
}

/// `Λ̃(ξ) = x(1-x) ξ² / (2α)`, the moderate-deviation limit cumulant.
pub fn mdp_lambda_limit(alpha: f64, x: f64, xi: f64) -> f64 {
    x * (1.0 - x) * xi * xi / (2.0 * alpha)
}

fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `sup_ξ (ξ z − Λ(ξ))`.
///
/// The maximizer solves `Λ'(ξ) = z`; it is seeded from
/// `ξ* = α ln(z(1-x) / (x(1-z)))` and polished by Newton steps on `Λ'`.
/// At `z ∈ {0, 1}` the supremum is the limit `ξ → ∓∞`; outside `[0, 1]` it
/// diverges.
pub fn fenchel_legendre(alpha: f64, x: f64, z: f64) -> f64 {
    if !(0.0..=1.0).contains(&z) {
        return f64::INFINITY;
    }
    if z == 0.0 {
        return -lambda_limit(alpha, x, f64::NEG_INFINITY);
    }
    if z == 1.0 {
        // ξ − Λ(ξ) → −α ln x as ξ → ∞.
        return -alpha * x.ln();
    }
    let logit_x = x.ln() - (-x).ln_1p();
    let mut xi = alpha * ((z.ln() - (-z).ln_1p()) - logit_x);
    for _ in 0..3 {
        let s = logistic(xi / alpha + logit_x);
        let curvature = s * (1.0 - s) / alpha;
        if curvature <= 0.0 {
            break;
        }
        xi -= (s - z) / curvature;
    }
    xi * z - lambda_limit(alpha, x, xi)
}

/// Golden-section maximization of `ξ z − f(ξ)` for a convex `f`, expanding
/// the bracket until it contains the maximizer.
pub fn legendre_transform_numeric(f: impl Fn(f64) -> f64, z: f64) -> f64 {
    let g = |xi: f64| xi * z - f(xi);
    let mut half = 1.0;
    while half < 1e6 && (g(half) > g(half / 2.0) || g(-half) > g(-half / 2.0)) {
        half *= 2.0;
    }
    let (mut a, mut b) = (-half, half);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + c.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// `⌈v⌉` (or `⌊v⌋`) with values within rounding of an integer snapped to it.
fn snapped_ceil(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r
    } else {
        v.ceil()
    }
}

fn snapped_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r
    } else {
        v.floor()
    }
}

/// `ln P(S >= threshold)` (upper) or `ln P(S <= threshold)` (lower) for a
/// real threshold.
fn log_tail(table: &DistributionTable, threshold: f64, tail: Tail) -> Result<f64> {
    let n = table.n() as f64;
    match tail {
        Tail::Upper => {
            let j0 = snapped_ceil(threshold);
            if j0 > n {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(table.log_upper_tail(j0.max(0.0) as usize)?.ln())
        }
        Tail::Lower => {
            let j0 = snapped_floor(threshold);
            if j0 < 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(table.log_lower_tail(j0.min(n) as usize)?.ln())
        }
    }
}

fn rows_in_order(
    grid: &[u32],
    row: impl Fn(u32) -> Result<DeviationRow> + Sync,
) -> Result<DeviationReport> {
    let rows = grid.par_iter().map(|&n| row(n)).collect::<Result<Vec<_>>>()?;
    Ok(DeviationReport { rows })
}

/// `−(1/n) ln P(S/n ≥ z)` (or `≤ z` for [`Tail::Lower`]) against `I^{(L)}(z)`.
///
/// The closed set `{S ≥ ⌈nz⌉}` includes `nz` when it is an integer.
pub fn ldp_empirical(alpha: f64, x: f64, z: f64, grid: &[u32], tail: Tail) -> Result<DeviationReport> {
    check_alpha_x(alpha, x)?;
    check_grid(grid)?;
    let ok = match tail {
        Tail::Upper => z > x && z < 1.0,
        Tail::Lower => z > 0.0 && z < x,
    };
    if !ok {
        return Err(Error::params(format!(
            "z = {z} is outside the {} deviation range for x = {x}",
            if tail == Tail::Upper { "upper (x, 1)" } else { "lower (0, x)" }
        )));
    }
    let theoretical = rate_ldp(&RateQuery { alpha, x, z });
    rows_in_order(grid, |n| {
        let table = build_distribution(Params::new(alpha, x, n)?)?;
        let lp = log_tail(&table, n as f64 * z, tail)?;
        let empirical = -lp / n as f64;
        Ok(DeviationRow { n, empirical, theoretical, abs_error: (empirical - theoretical).abs() })
    })
}

/// `−(n/c_n²) ln P(S − nx ≥ c_n a)` (`≤` when `a < 0`) against `I^{(M)}(a)`.
pub fn mdp_empirical(alpha: f64, x: f64, a: f64, scale: &ModerateScale) -> Result<DeviationReport> {
    check_alpha_x(alpha, x)?;
    if a == 0.0 || !a.is_finite() {
        return Err(Error::params(format!("a must be finite and nonzero, got {a}")));
    }
    let tail = if a > 0.0 { Tail::Upper } else { Tail::Lower };
    let theoretical = rate_mdp(&RateQuery { alpha, x, z: a });
    rows_in_order(scale.grid(), |n| {
        let table = build_distribution(Params::new(alpha, x, n)?)?;
        let nf = n as f64;
        let c = scale.c(n);
        let lp = log_tail(&table, nf * x + c * a, tail)?;
        let empirical = -lp * nf / (c * c);
        Ok(DeviationRow { n, empirical, theoretical, abs_error: (empirical - theoretical).abs() })
    })
}

/// `(1/n) ln E[e^{ξS}]`, the scaled cumulant of `S/n` at `nξ`, which tends to
/// [`lambda_limit`].
pub fn scaled_log_mgf(table: &DistributionTable, xi: f64) -> f64 {
    log_mgf_direct(table, xi) / table.n() as f64
}

/// `(n/c_n²) ln E[exp((c_n²/n) ξ Y)]` with `Y = (S − nx)/c_n`, which tends to
/// [`mdp_lambda_limit`].
pub fn mdp_scaled_log_mgf(table: &DistributionTable, beta: f64, xi: f64) -> f64 {
    let n = table.n() as f64;
    let x = table.params().x;
    let c = n.powf(beta);
    let s = c * xi / n;
    (log_mgf_direct(table, s) - s * n * x) * n / (c * c)
}

/// Kolmogorov distance between the standardized law and `Φ`.
///
/// Scans every jump point `z_j = (j − m_n)/√v_n`, comparing `Φ(z_j)` with both
/// `F(z_j)` and the left limit `F(z_j−)`.
pub fn berry_esseen_sup(table: &DistributionTable) -> Result<f64> {
    let x = table.params().x;
    if !(x > 0.0 && x < 1.0) || !(table.variance() > 0.0) {
        return Err(Error::params("Berry-Esseen distance needs x in (0, 1) and positive variance"));
    }
    let mean = table.mean();
    let sd = table.variance().sqrt();
    let mut left = 0.0;
    let mut sup: f64 = 0.0;
    for (j, &right) in table.cdf_values().iter().enumerate() {
        let phi = std_normal_cdf((j as f64 - mean) / sd);
        sup = sup.max((right - phi).abs()).max((left - phi).abs());
        left = right;
    }
    Ok(sup)
}

/// Exact `sup_z |F_μ(z) − G_ν(z)|` over the merged jump sets of `μ` (integers)
/// and `ν` (multiples of `1/α`).
pub fn sup_distance_mu_nu(params: &Params) -> Result<f64> {
    params.require_open_x()?;
    let mu = build_distribution(*params)?;
    let nu = build_nu(*params)?;
    let f = mu.cdf_values();
    let g = nu.cdf_values();
    let support = nu.support();
    // Both cdfs are right-continuous steps, so the supremum is attained on the
    // merged jump set; points closer than 1e-9 are the same jump.
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
    let (mut i, mut k) = (0usize, 0usize);
    let (mut fv, mut gv) = (0.0, 0.0);
    let mut sup: f64 = 0.0;
    while i < f.len() || k < g.len() {
        let pi = if i < f.len() { i as f64 } else { f64::INFINITY };
        let pk = if k < g.len() { support[k] } else { f64::INFINITY };
        if same(pi, pk) {
            fv = f[i];
            gv = g[k];
            i += 1;
            k += 1;
        } else if pi < pk {
            fv = f[i];
            i += 1;
        } else {
            gv = g[k];
            k += 1;
        }
        sup = sup.max((fv - gv).abs());
    }
    Ok(sup)
}

/// `E_μ[S^m] − E_ν[T^m]` by compensated pmf-weighted sums over both supports.
pub fn moment_diff(params: &Params, m: u32) -> Result<f64> {
    params.require_open_x()?;
    if m == 0 {
        return Err(Error::params("moment order m must be at least 1"));
    }
    let nf = params.n as f64;
    if !(nf.powi(m as i32) < 1e300) {
        return Err(Error::MomentOverflow { m });
    }
    let mu = build_distribution(*params)?;
    let nu = build_nu(*params)?;
    let mu_m: NeumaierSum = mu
        .log_pmf_values()
        .iter()
        .enumerate()
        .map(|(j, lp)| lp.exp() * (j as f64).powi(m as i32))
        .collect();
    let nu_m: NeumaierSum = nu
        .support()
        .iter()
        .zip(nu.log_pmf_values())
        .map(|(s, lp)| lp.exp() * s.powi(m as i32))
        .collect();
    Ok(mu_m.total() - nu_m.total())
}
