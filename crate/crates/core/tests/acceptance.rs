//! Acceptance suite. Run with `cargo test --release --test acceptance`.
//!
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::time::{Duration, Instant};

use fracbin::asymptotics::{
    berry_esseen_sup, fenchel_legendre, lambda_limit, ldp_empirical, legendre_transform_numeric,
    mdp_empirical, moment_diff, rate_ldp, sup_distance_mu_nu, ModerateScale, RateQuery, Tail,
};
use fracbin::cli::execute;
use fracbin::transforms::{
    cf_direct, cf_explicit, gbt_log_lhs, gbt_rhs, mgf_direct, mgf_explicit, normalizing_excess,
    theta_alpha, QuadratureConfig,
};
use fracbin::{build_distribution, Params};
use num_complex::Complex64;

type Outcome = (bool, String);

const ALPHAS: [f64; 6] = [0.5, 1.5, 2.0, 2.5, 3.0, std::f64::consts::PI];
const LAMBDAS: [f64; 3] = [0.25, 1.0, 3.0];
const DOUBLING: [u32; 8] = [50, 100, 200, 400, 800, 1600, 3200, 6400];
// Below this, differences are double-precision rounding.
const FLOOR: f64 = 1e-12;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn improving(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] || w[1] < FLOOR)
}

fn band(v: &[f64], factor: f64) -> (bool, f64) {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let median = if s.len() % 2 == 1 {
        s[s.len() / 2]
    } else {
        0.5 * (s[s.len() / 2 - 1] + s[s.len() / 2])
    };
    let spread = (s[s.len() - 1] / median).max(median / s[0]);
    (median > 0.0 && spread <= factor, spread)
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let t = start.elapsed();
    (ok && t < limit, format!("{detail}; {:.2}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

fn binom_u128(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn c1_classical() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut worst: f64 = 0.0;
        let (mut cf_abs, mut cf_rel): (f64, f64) = (0.0, 0.0);
        for x in [0.1, 0.5, 0.9] {
            for n in 1..=50u32 {
                let t = build_distribution(Params::new(1.0, x, n).unwrap()).unwrap();
                let pmf: Vec<f64> = (0..=n)
                    .map(|j| binom_u128(n, j) as f64 * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
                    .collect();
                let mut cdf = 0.0;
                for j in 0..=n as usize {
                    cdf += pmf[j];
                    worst = worst.max(rel(t.pmf(j).unwrap(), pmf[j]));
                    worst = worst.max(rel(t.cdf(j).unwrap(), cdf.min(1.0)));
                }
                let nf = n as f64;
                worst = worst.max(rel(t.mean(), nf * x));
                worst = worst.max(rel(t.variance(), nf * x * (1.0 - x)));
                let p = Params::new(1.0, x, n).unwrap();
                let cfg = QuadratureConfig::default();
                for xi in [-2.0, -0.5, 0.5, 2.0] {
                    let m = (1.0 - x + x * f64::exp(xi)).powi(n as i32);
                    worst = worst.max(rel(mgf_direct(&t, xi), m));
                    worst = worst.max(rel(mgf_explicit(&p, xi, &cfg).unwrap().value, m));
                    let c = (Complex64::new(1.0 - x, 0.0) + x * Complex64::new(0.0, xi).exp()).powi(n as i32);
                    // The direct sum cancels down to |φ|, so it is held to an
                    // absolute bound; its relative error is reported.
                    let d = (cf_direct(&t, xi) - c).norm();
                    cf_abs = cf_abs.max(d);
                    cf_rel = cf_rel.max(d / c.norm());
                    worst = worst.max((cf_explicit(&p, xi, &cfg).unwrap().value - c).norm() / c.norm());
                }
            }
        }
        (
            worst < 1e-11 && cf_abs < 1e-11,
            format!(
                "max relative error {worst:.3e}; direct CF sum absolute {cf_abs:.3e}, relative {cf_rel:.3e}"
            ),
        )
    })
}

fn c2_gbt() -> Outcome {
    timed(Duration::from_secs(30), || {
        let cfg = QuadratureConfig::default();
        let mut worst: f64 = 0.0;
        for alpha in ALPHAS {
            for lambda in LAMBDAS {
                for n in 1..=30 {
                    let rhs = gbt_rhs(alpha, n, lambda, &cfg).unwrap().value;
                    let lhs = gbt_log_lhs(alpha, n, lambda).unwrap().exp();
                    worst = worst.max(rel(rhs, lhs));
                }
            }
        }
        (worst < 1e-8, format!("max relative error {worst:.3e}"))
    })
}

fn c3_transforms() -> Outcome {
    timed(Duration::from_secs(60), || {
        let cfg = QuadratureConfig::default();
        let (mut mgf_worst, mut cf_worst): (f64, f64) = (0.0, 0.0);
        for alpha in ALPHAS {
            let theta = theta_alpha(alpha);
            for lambda in LAMBDAS {
                let x = lambda / (1.0 + lambda);
                for n in 1..=30 {
                    let p = Params::new(alpha, x, n).unwrap();
                    let t = build_distribution(p).unwrap();
                    for xi in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                        let e = mgf_explicit(&p, xi, &cfg).unwrap().value;
                        mgf_worst = mgf_worst.max(rel(e, mgf_direct(&t, xi)));
                    }
                    for k in [-0.9, -0.5, 0.0, 0.5, 0.9] {
                        let xi = k * theta;
                        let e = cf_explicit(&p, xi, &cfg).unwrap().value;
                        cf_worst = cf_worst.max((e - cf_direct(&t, xi)).norm());
                    }
                }
            }
        }
        (
            mgf_worst < 1e-8 && cf_worst < 1e-7,
            format!("MGF max relative error {mgf_worst:.3e}, CF max absolute error {cf_worst:.3e}"),
        )
    })
}

const MOMENT_PAIRS: [(f64, f64); 6] = [(0.5, 0.3), (0.5, 0.5), (1.5, 0.3), (1.5, 0.5), (2.5, 0.3), (2.5, 0.5)];

fn c4_z_expansion() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut ok = true;
    let mut last = Vec::new();
    for (alpha, x) in MOMENT_PAIRS {
        let e: Vec<f64> = [10, 20, 40, 80, 160]
            .iter()
            .map(|&n| normalizing_excess(&Params::new(alpha, x, n).unwrap(), &cfg).unwrap().value.abs())
            .collect();
        ok &= decreasing(&e) && e[4] < 1e-6;
        last.push(format!("({alpha},{x}):{:.2e}", e[4]));
    }
    (ok, format!("|Z-1| at n=160 {}", last.join(" ")))
}

fn c5_moments() -> Outcome {
    let mut ok = true;
    let (mut mean_worst, mut var_worst): (f64, f64) = (0.0, 0.0);
    for (alpha, x) in MOMENT_PAIRS {
        let mut me = Vec::new();
        let mut ve = Vec::new();
        for n in [10, 20, 40, 80, 160, 200] {
            let t = build_distribution(Params::new(alpha, x, n).unwrap()).unwrap();
            let nf = n as f64;
            me.push((t.mean() / nf - x).abs());
            ve.push((alpha * t.variance() / (nf * x * (1.0 - x)) - 1.0).abs());
        }
        ok &= improving(&me) && improving(&ve) && me[5] < 1e-3 && ve[5] < 1e-2;
        mean_worst = mean_worst.max(me[5]);
        var_worst = var_worst.max(ve[5]);
    }
    (ok, format!("at n=200 max |mean/n-x| {mean_worst:.2e}, max |scaled var-1| {var_worst:.2e}"))
}

fn c6_ldp() -> Outcome {
    timed(Duration::from_secs(60), || {
        let grid = [100, 200, 400, 800, 1600];
        let mut ok = true;
        let mut detail = Vec::new();
        for (alpha, x, z) in [(2.0, 0.3, 0.6), (1.0, 0.5, 0.7)] {
            let r = ldp_empirical(alpha, x, z, &grid, Tail::Upper).unwrap();
            let e = r.abs_errors();
            let last = r.rows.last().unwrap();
            let relative = last.abs_error / last.theoretical;
            ok &= decreasing(&e) && relative < 0.1;
            detail.push(format!("({alpha},{x},{z}) rel err at 1600 {relative:.3}"));
        }
        (ok, detail.join(", "))
    })
}

fn c7_mdp() -> Outcome {
    let scale = ModerateScale::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (alpha, x) in [(1.0, 0.5), (2.0, 0.3)] {
        let e = mdp_empirical(alpha, x, 1.0, &scale).unwrap().abs_errors();
        let (first, last) = (e[0], e[e.len() - 1]);
        ok &= last < first;
        detail.push(format!("({alpha},{x}) err n=400 {first:.4} n=6400 {last:.4}"));
    }
    (ok, detail.join(", "))
}

fn c8_legendre() -> Outcome {
    let x = 0.3;
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0, 2.5] {
        for k in 1..=99 {
            let z = k as f64 / 100.0;
            let closed = rate_ldp(&RateQuery::new(alpha, x, z).unwrap());
            let numeric = legendre_transform_numeric(|xi| lambda_limit(alpha, x, xi), z);
            worst = worst.max((numeric - closed).abs());
            worst = worst.max((fenchel_legendre(alpha, x, z) - closed).abs());
        }
    }
    (worst < 1e-9, format!("max absolute difference {worst:.3e}"))
}

const BE_PAIRS: [(f64, f64); 3] = [(0.5, 0.3), (2.0, 0.5), (2.5, 0.7)];

fn c9_berry_esseen() -> Outcome {
    timed(Duration::from_secs(120), || {
        let mut ok = true;
        let mut detail = Vec::new();
        for (alpha, x) in BE_PAIRS {
            let sups: Vec<f64> = DOUBLING
                .iter()
                .map(|&n| berry_esseen_sup(&build_distribution(Params::new(alpha, x, n).unwrap()).unwrap()).unwrap())
                .collect();
            let scaled: Vec<f64> = sups.iter().zip(DOUBLING).map(|(s, n)| s * (n as f64).sqrt()).collect();
            let (in_band, spread) = band(&scaled, 3.0);
            ok &= in_band && decreasing(&sups);
            detail.push(format!("({alpha},{x}) spread {spread:.3}"));
        }
        (ok, detail.join(", "))
    })
}

fn c10_moment_diff() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (alpha, x) in [(0.5, 0.3), (2.5, 0.6)] {
        for m in 1..=4u32 {
            let scaled: Vec<f64> = [50u32, 100, 200, 400]
                .iter()
                .map(|&n| {
                    let d = moment_diff(&Params::new(alpha, x, n).unwrap(), m).unwrap();
                    d.abs() / (n as f64).powi(m as i32 - 1)
                })
                .collect();
            let (in_band, spread) = band(&scaled, 3.0);
            ok &= in_band;
            if !in_band {
                detail.push(format!("({alpha},{x},m={m}) spread {spread:.1e}"));
            }
        }
    }
    if detail.is_empty() {
        detail.push("all scaled differences within band".into());
    }
    (ok, detail.join(", "))
}

fn c11_compare_nu() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (alpha, x) in BE_PAIRS {
        let scaled: Vec<f64> = DOUBLING
            .iter()
            .map(|&n| sup_distance_mu_nu(&Params::new(alpha, x, n).unwrap()).unwrap() * (n as f64).sqrt())
            .collect();
        let (in_band, spread) = band(&scaled, 3.0);
        ok &= in_band;
        detail.push(format!("({alpha},{x}) spread {spread:.3}"));
    }
    let mut classical: f64 = 0.0;
    for x in [0.1, 0.3, 0.5, 0.9] {
        for n in DOUBLING {
            classical = classical.max(sup_distance_mu_nu(&Params::new(1.0, x, n).unwrap()).unwrap());
        }
    }
    ok &= classical <= 1e-12;
    detail.push(format!("alpha=1 max {classical:.1e}"));
    (ok, detail.join(", "))
}

fn cli_suite(dir: &std::path::Path) -> Vec<Vec<u8>> {
    let runs: [&[&str]; 9] = [
        &["pmf", "--alpha", "1.5", "--x", "0.3", "--n", "40", "--samples", "20000", "--seed", "42"],
        &["verify-gbt", "--alpha", "0.5", "--x", "0.3", "--n", "10"],
        &["mgf-check", "--alpha", "2.5", "--x", "0.4", "--n", "25"],
        &["cf-check", "--alpha", "1.5", "--x", "0.6", "--n", "25"],
        &["ldp", "--alpha", "2", "--x", "0.3", "--z", "0.6"],
        &["mdp", "--alpha", "1", "--x", "0.5"],
        &["berry-esseen", "--alpha", "0.5", "--x", "0.3"],
        &["compare-nu", "--alpha", "2.5", "--x", "0.7"],
        &["moments", "--alpha", "2.5", "--x", "0.6"],
    ];
    let mut artifacts = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        for format in ["csv", "json"] {
            let path = dir.join(format!("{i}.{format}"));
            let mut full = vec!["fracbin"];
            full.extend_from_slice(args);
            full.extend(["--output", format, "--out", path.to_str().unwrap(), "--reproducible"]);
            let code = execute(full, &mut std::io::sink(), &mut std::io::sink());
            assert_eq!(code, 0, "{args:?}");
            artifacts.push(std::fs::read(&path).unwrap());
        }
    }
    artifacts
}

fn c12_determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = cli_suite(a.path());
    let second = cli_suite(b.path());
    let same = first == second;
    (same, format!("{} artifacts compared byte for byte", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 classical reduction", c1_classical),
        ("2 generalized binomial theorem", c2_gbt),
        ("3 explicit MGF and CF", c3_transforms),
        ("4 normalizing constant expansion", c4_z_expansion),
        ("5 mean and variance asymptotics", c5_moments),
        ("6 large deviations", c6_ldp),
        ("7 moderate deviations", c7_mdp),
        ("8 Fenchel-Legendre consistency", c8_legendre),
        ("9 Berry-Esseen profile", c9_berry_esseen),
        ("10 moment differences", c10_moment_diff),
        ("11 distance to lattice binomial", c11_compare_nu),
        ("12 determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!("{} criterion {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
