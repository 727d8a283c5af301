//! Globally adaptive Gauss–Kronrod (7/15) quadrature on dyadic bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and refinement limits for [`integrate`] and [`integrate_01`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_refinements: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 1e-14, max_refinements: 30 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_refinements == 0 {
            return Err(Error::params(
                "quadrature tolerances must be positive and max_refinements >= 1",
            ));
        }
        Ok(())
    }
}

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &node) in XGK.iter().enumerate().take(7) {
        let dx = half * node;
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

struct Segment<T> {
    a: f64,
    b: f64,
    depth: u32,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl<T> Eq for Segment<T> {}

impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 20_000;

/// Integrates `f` over the partition given by consecutive `breaks`, bisecting
/// the segment with the largest error estimate until the summed estimate is
/// below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_with_breaks<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    breaks: &[f64],
    config: &QuadratureConfig,
) -> Result<T> {
    config.validate()?;
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (value, error) = kronrod15(&mut f, w[0], w[1]);
        heap.push(Segment { a: w[0], b: w[1], depth: 0, value, error });
    }
    loop {
        let (total, error) = heap
            .iter()
            .fold((T::default(), 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !error.is_finite() || total.magnitude().is_nan() {
            return Err(Error::Quadrature { estimate: total.magnitude(), error_estimate: error });
        }
        if error <= config.abs_tol.max(config.rel_tol * total.magnitude()) {
            return Ok(total);
        }
        let worst = heap.pop().expect("partition is nonempty");
        if worst.depth >= config.max_refinements || heap.len() + 2 > MAX_SEGMENTS {
            return Err(Error::Quadrature { estimate: total.magnitude(), error_estimate: error });
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod15(&mut f, a, b);
            heap.push(Segment { a, b, depth: worst.depth + 1, value, error });
        }
    }
}

/// Integrates over `[a, b]`.
pub fn integrate<T: QuadValue>(
    f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    config: &QuadratureConfig,
) -> Result<T> {
    integrate_with_breaks(f, &[a, b], config)
}

// Dyadic breakpoints 0, 2^-30, ..., 1/2, 1: resolves integrands whose mass
// sits at any scale near 0 before adaptive refinement starts.
fn dyadic_breaks() -> Vec<f64> {
    let mut breaks = vec![0.0];
    breaks.extend((0..=30).rev().map(|k| 0.5f64.powi(k)));
    breaks
}

/// `∫₀¹ f(t) dt` for integrands that may carry a `t^{α-1}` singularity at 0.
///
/// For `α < 1` the substitution `u = t^α`, `dt = u^{1/α - 1} du / α`, removes
/// the singularity before integration.
pub fn integrate_01<T: QuadValue>(
    mut integrand: impl FnMut(f64) -> T,
    alpha: f64,
    config: &QuadratureConfig,
) -> Result<T> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let breaks = dyadic_breaks();
    if alpha < 1.0 {
        let inv = 1.0 / alpha;
        integrate_with_breaks(
            |u| {
                let t = u.powf(inv);
                integrand(t) * (u.powf(inv - 1.0) * inv)
            },
            &breaks,
            config,
        )
    } else {
        integrate_with_breaks(integrand, &breaks, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::log_gamma;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn constant_integrand() {
        let v: f64 = integrate_01(|_| 1.0, 1.0, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_root_singularity() {
        let alpha: f64 = 0.5;
        let v: f64 = integrate_01(|t: f64| t.powf(alpha - 1.0), alpha, &cfg()).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn beta_function_oracle() {
        let v: f64 = integrate_01(|t: f64| t.powf(-0.5) * (1.0 - t).powi(5), 0.5, &cfg()).unwrap();
        let beta = (log_gamma(0.5).unwrap() + log_gamma(6.0).unwrap() - log_gamma(6.5).unwrap()).exp();
        assert!(((v - beta) / beta).abs() < 1e-10, "{v} vs {beta}");
    }

    #[test]
    fn concentrated_beta_density() {
        // Beta(2.5, 2e4) mass sits near 1e-4.
        let (a, b) = (2.5f64, 2.0e4f64);
        let lb = log_gamma(a).unwrap() + log_gamma(b).unwrap() - log_gamma(a + b).unwrap();
        let v: f64 = integrate_01(
            |t: f64| ((a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p() - lb).exp(),
            a,
            &cfg(),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn complex_integrand() {
        // ∫₀¹ e^{iπt} dt = 2i/π.
        let v = integrate(
            |t| Complex64::from_polar(1.0, std::f64::consts::PI * t),
            0.0,
            1.0,
            &cfg(),
        )
        .unwrap();
        assert!((v - Complex64::new(0.0, 2.0 / std::f64::consts::PI)).norm() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tight = QuadratureConfig { rel_tol: 1e-15, abs_tol: 1e-300, max_refinements: 2 };
        let err = integrate(|t: f64| (1.0 / t).sin(), 1e-8, 1.0, &tight).unwrap_err();
        match err {
            Error::Quadrature { error_estimate, .. } => assert!(error_estimate > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = QuadratureConfig { rel_tol: 0.0, ..QuadratureConfig::default() };
        assert!(integrate(|t: f64| t, 0.0, 1.0, &bad).is_err());
    }
}
