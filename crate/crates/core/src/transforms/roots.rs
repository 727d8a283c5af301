use std::f64::consts::PI;

use num_complex::Complex64;

use crate::specfun::is_near_integer;

/// The unit complex numbers `e^{iθ}`, `θ ∈ (-π, π]`, whose principal `α`-th
/// power is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RootsOfUnity {
    alpha: f64,
    omegas: Vec<Complex64>,
}

impl RootsOfUnity {
    /// Enumerates `θ = 2πk/α` over the integers `-α/2 < k <= α/2`, in increasing `θ`.
    pub fn new(alpha: f64) -> Self {
        let half = alpha / 2.0;
        let half_is_integer = is_near_integer(half);
        let k_max = if half_is_integer { half.round() as i64 } else { half.floor() as i64 };
        let k_min = if half_is_integer { -k_max + 1 } else { -k_max };
        let omegas = (k_min..=k_max)
            .map(|k| {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else if half_is_integer && k == k_max {
                    Complex64::new(-1.0, 0.0)
                } else {
                    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / alpha)
                }
            })
            .collect();
        RootsOfUnity { alpha, omegas }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omegas(&self) -> &[Complex64] {
        &self.omegas
    }

    /// All roots except 1.
    pub fn nontrivial(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.omegas.iter().copied().filter(|w| *w != Complex64::new(1.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn contains_minus_one(&self) -> bool {
        self.omegas.contains(&Complex64::new(-1.0, 0.0))
    }
}

pub fn roots_of_unity(alpha: f64) -> RootsOfUnity {
    RootsOfUnity::new(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::principal_pow;
    use proptest::prelude::*;

    #[test]
    fn small_alpha_has_only_one() {
        for alpha in [0.1, 0.5, 1.0, 1.5, 1.999] {
            assert_eq!(roots_of_unity(alpha).omegas(), &[Complex64::new(1.0, 0.0)]);
        }
    }

    #[test]
    fn alpha_two() {
        let r = roots_of_unity(2.0);
        assert_eq!(r.omegas(), &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn alpha_four_by_enumeration() {
        let r = roots_of_unity(4.0);
        let want = [
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ];
        assert_eq!(r.len(), 4);
        for (got, want) in r.omegas().iter().zip(want) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn minus_one_iff_half_alpha_integer() {
        for alpha in [2.0, 4.0, 6.0, 10.0] {
            assert!(roots_of_unity(alpha).contains_minus_one());
        }
        for alpha in [1.0, 3.0, 2.5, 5.0, std::f64::consts::PI] {
            assert!(!roots_of_unity(alpha).contains_minus_one());
        }
    }

    proptest! {
        #[test]
        fn every_root_is_a_principal_root(alpha in 0.05f64..12.0) {
            let r = roots_of_unity(alpha);
            prop_assert!(r.omegas().contains(&Complex64::new(1.0, 0.0)));
            for w in r.omegas() {
                let arg = w.im.atan2(w.re);
                prop_assert!(arg > -PI && arg <= PI);
                let p = principal_pow(*w, alpha).unwrap();
                prop_assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
