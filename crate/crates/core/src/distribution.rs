//! The α-fractional binomial law on `{0, …, n}` and its binomial comparison
//! law on the lattice `{0, 1/α, …, ⌊αn⌋/α}`.
//!
//! Everything is built in log domain. Unnormalized weights are
//! `α·binom(αn, αj)·x^{αj}·(1-x)^{α(n-j)}` with `0^0 = 1`; the normalizing
//! constant `Z` is their log-sum-exp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_gen_binom, log_sum_exp, LogReal, NeumaierSum};

/// The triple `(α, x, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub x: f64,
    pub n: u32,
}

impl Params {
    pub fn new(alpha: f64, x: f64, n: u32) -> Result<Self> {
        let p = Params { alpha, x, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::params(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.x) {
            return Err(Error::params(format!("x must lie in [0, 1], got {}", self.x)));
        }
        if self.n == 0 {
            return Err(Error::params("n must be at least 1"));
        }
        Ok(())
    }

    /// Rejects `x ∈ {0, 1}` for operations that need a nondegenerate law.
    pub fn require_open_x(&self) -> Result<()> {
        self.validate()?;
        if self.x <= 0.0 || self.x >= 1.0 {
            return Err(Error::params(format!(
                "x must lie in the open interval (0, 1), got {}",
                self.x
            )));
        }
        Ok(())
    }

    /// `⌊αn⌋`, with products that are integers up to rounding snapped to them.
    pub fn lattice_trials(&self) -> u64 {
        let an = self.alpha * self.n as f64;
        let r = an.round();
        if (an - r).abs() <= 1e-9 * an.max(1.0) {
            r as u64
        } else {
            an.floor() as u64
        }
    }
}

/// `coef + a·ln x + b·ln(1-x)` with `0^0 = 1`.
fn log_bernoulli_weight(log_coef: f64, a: f64, b: f64, x: f64) -> f64 {
    let head = if a == 0.0 {
        0.0
    } else if x == 0.0 {
        return f64::NEG_INFINITY;
    } else {
        a * x.ln()
    };
    let tail = if b == 0.0 {
        0.0
    } else if x == 1.0 {
        return f64::NEG_INFINITY;
    } else {
        b * (-x).ln_1p()
    };
    log_coef + head + tail
}

fn prefix_cdf(log_pmf: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::default();
    let mut cdf: Vec<f64> = log_pmf
        .iter()
        .map(|&lp| {
            acc.add(lp.exp());
            acc.total().min(1.0)
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

fn two_pass_moments(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let mean = points.clone().map(|(s, p)| s * p).collect::<NeumaierSum>().total();
    let var = points
        .map(|(s, p)| {
            let d = s - mean;
            d * d * p
        })
        .collect::<NeumaierSum>()
        .total();
    (mean, var)
}

/// Immutable log-domain table of `μ_{α,x}^{(n)}`.
#[derive(Clone, Debug)]
pub struct DistributionTable {
    params: Params,
    log_weights: Vec<f64>,
    log_pmf: Vec<f64>,
    cdf: Vec<f64>,
    log_z: f64,
    mean: f64,
    variance: f64,
}

/// Unnormalized log weights `ln(α binom(αn, αj) x^{αj} (1-x)^{α(n-j)})`.
fn log_weights(params: &Params) -> Vec<f64> {
    let Params { alpha, x, n } = *params;
    let w = alpha * n as f64;
    let log_alpha = alpha.ln();
    (0..=n)
        .map(|j| {
            let z = if j == n { w } else { alpha * j as f64 };
            let coef = log_gen_binom(w, z).map(LogReal::ln).unwrap_or(f64::NEG_INFINITY);
            log_bernoulli_weight(log_alpha + coef, z, w - z, x)
        })
        .collect()
}

/// `ln Z_{α,x}^{(n)}` by direct log-sum-exp over the `n + 1` weights.
pub fn log_normalizing_constant(params: &Params) -> Result<f64> {
    params.validate()?;
    Ok(log_sum_exp(&log_weights(params)))
}

impl DistributionTable {
    pub fn build(params: Params) -> Result<Self> {
        params.validate()?;
        let log_weights = log_weights(&params);
        let log_z = log_sum_exp(&log_weights);
        let log_pmf: Vec<f64> = log_weights.iter().map(|&lw| lw - log_z).collect();
        let cdf = prefix_cdf(&log_pmf);
        let (mean, variance) =
            two_pass_moments(log_pmf.iter().enumerate().map(|(j, lp)| (j as f64, lp.exp())));
        Ok(DistributionTable { params, log_weights, log_pmf, cdf, log_z, mean, variance })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n as usize
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.n() {
            return Err(Error::IndexOutOfRange { index: j, max: self.n() });
        }
        Ok(())
    }

    pub fn log_pmf(&self, j: usize) -> Result<LogReal> {
        self.check_index(j)?;
        Ok(LogReal::from_raw(self.log_pmf[j]))
    }

    pub fn pmf(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.log_pmf[j].exp())
    }

    /// All `n + 1` log probabilities.
    pub fn log_pmf_values(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn pmf_values(&self) -> Vec<f64> {
        self.log_pmf.iter().map(|lp| lp.exp()).collect()
    }

    /// `P(S <= j)` for `j` in `0..=n`.
    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn cdf(&self, j: usize) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.cdf[j])
    }

    /// `ln P(S >= j0)`.
    pub fn log_upper_tail(&self, j0: usize) -> Result<LogReal> {
        self.check_index(j0)?;
        Ok(LogReal::from_raw(log_sum_exp(&self.log_pmf[j0..])))
    }

    /// `ln P(S <= j0)`.
    pub fn log_lower_tail(&self, j0: usize) -> Result<LogReal> {
        self.check_index(j0)?;
        Ok(LogReal::from_raw(log_sum_exp(&self.log_pmf[..=j0])))
    }

    /// `count` draws by inverse-cdf sampling from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = self.n();
        (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                self.cdf.partition_point(|&c| c <= u).min(last) as u32
            })
            .collect()
    }
}

/// Law of `X / α` with `X ~ Bin(⌊αn⌋, x)`.
#[derive(Clone, Debug)]
pub struct LatticeTable {
    alpha: f64,
    support: Vec<f64>,
    log_pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl LatticeTable {
    pub fn build(params: Params) -> Result<Self> {
        params.validate()?;
        let m = params.lattice_trials();
        let mf = m as f64;
        let log_weights: Vec<f64> = (0..=m)
            .map(|k| {
                let kf = k as f64;
                let coef = log_gen_binom(mf, kf).map(LogReal::ln).unwrap_or(f64::NEG_INFINITY);
                log_bernoulli_weight(coef, kf, mf - kf, params.x)
            })
            .collect();
        // Exactly 1 in exact arithmetic; dividing out the computed total removes
        // the accumulated log-gamma rounding, as for μ.
        let log_total = log_sum_exp(&log_weights);
        let log_pmf: Vec<f64> = log_weights.iter().map(|&lw| lw - log_total).collect();
        let support = (0..=m).map(|k| k as f64 / params.alpha).collect();
        let cdf = prefix_cdf(&log_pmf);
        Ok(LatticeTable { alpha: params.alpha, support, log_pmf, cdf })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of binomial trials `⌊αn⌋`.
    pub fn trials(&self) -> usize {
        self.support.len() - 1
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn log_pmf_values(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn pmf_values(&self) -> Vec<f64> {
        self.log_pmf.iter().map(|lp| lp.exp()).collect()
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    fn moments(&self) -> (f64, f64) {
        two_pass_moments(self.support.iter().zip(&self.log_pmf).map(|(&s, lp)| (s, lp.exp())))
    }
}

/// Builds `μ_{α,x}^{(n)}`.
pub fn build_distribution(params: Params) -> Result<DistributionTable> {
    DistributionTable::build(params)
}

/// Builds the comparison law `ν_{α,x}^{(n)}`.
pub fn build_nu(params: Params) -> Result<LatticeTable> {
    LatticeTable::build(params)
}
