//! Pressure extraction: the smallest positive zero `t*` of the kneading
//! determinant, with `pressure = −log t*` and `ρ₁ = 1/t*`.
//!
//! Truncated determinants only converge inside the disc of radius
//! `1/ρ∞` (the interior weight-growth radius), so the scan is capped
//! strictly below an upper bound for that radius obtained from finite-depth
//! sup-norms `‖g^n‖_∞^{1/n}`.  A re-run at doubled truncation provides a
//! stability gap; a sign-definite dip below the dip tolerance is reported
//! as a possible even-order zero instead of a refined root.

use crate::cylinders::{self, Census};
use crate::error::{Error, Result};
use crate::kneading::{kneading_matrix, reduced_matrix};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::system::System;

#[derive(Debug, Clone)]
pub struct ZeroSearch<K> {
    /// Bisection-refined first sign change, if any.
    pub zero: Option<K>,
    /// Grid point of the smallest |value| when no sign change occurred but
    /// the dip fell below the dip tolerance.
    pub possible_even_order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PressureOptions {
    pub grid: usize,
    pub bisect_tol: f64,
    /// Sign-definite dips below this report a possible even-order zero.
    pub dip_tol: f64,
    /// Relative safety margin below the scan cap `1/ρ̂∞`.
    pub margin: f64,
    /// Depth for the sup-norm estimate of `ρ∞`.
    pub radius_depth: usize,
    pub cylinder_cap: usize,
    /// `|t*(N) − t*(2N)| < stability_factor·bisect_tol` counts as stable.
    pub stability_factor: f64,
}

impl Default for PressureOptions {
    fn default() -> Self {
        PressureOptions {
            grid: 1000,
            bisect_tol: 1e-12,
            dip_tol: 1e-8,
            margin: 0.02,
            radius_depth: 12,
            cylinder_cap: 10_000_000,
            stability_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PressureReport<K> {
    pub truncation: usize,
    /// Upper bound used for the scan cap, `min_n ‖g^n‖_∞^{1/n}`.
    pub sup_radius_bound: f64,
    pub t_max: f64,
    pub t_star: Option<K>,
    pub rho1: Option<f64>,
    pub pressure: Option<f64>,
    /// `|t*(N) − t*(2N)|`, when both zeros exist.
    pub stability_gap: Option<f64>,
    pub stable: Option<bool>,
    pub possible_even_order: Option<f64>,
    /// First zero of the reduced determinant, for the spurious-zero report.
    pub reduced_first_zero: Option<K>,
    /// True when the reduced determinant vanishes strictly before `t*`.
    pub reduced_zero_is_spurious: bool,
}

/// Scan `(0, t_max]` on a uniform grid for the first sign change of the
/// truncated series and bisect it down to `bisect_tol`.
pub fn first_positive_zero<K: Scalar>(
    series: &Series<K>,
    t_max: &K,
    opts: &PressureOptions,
) -> Result<ZeroSearch<K>> {
    if *t_max <= K::zero() {
        return Err(Error::Numeric("non-positive scan cap".into()));
    }
    if series.coeff(0) <= K::zero() {
        return Err(Error::Numeric(
            "series is non-positive already at t = 0".into(),
        ));
    }
    let mut prev_t = K::zero();
    let mut bracket: Option<(K, K)> = None;
    let mut best_dip: Option<(f64, f64)> = None;
    for i in 1..=opts.grid {
        let t = t_max.clone() * K::from_ratio(i as i64, opts.grid as i64);
        let val = series.eval(&t);
        if val <= K::zero() {
            bracket = Some((prev_t, t));
            break;
        }
        let mag = val.to_f64().abs();
        if best_dip.map_or(true, |(m, _)| mag < m) {
            best_dip = Some((mag, t.to_f64()));
        }
        prev_t = t;
    }
    match bracket {
        None => Ok(ZeroSearch {
            zero: None,
            possible_even_order: best_dip
                .filter(|(mag, _)| *mag < opts.dip_tol)
                .map(|(_, t)| t),
        }),
        Some((mut lo, mut hi)) => {
            // Invariant: series(lo) > 0 ≥ series(hi).
            while (hi.clone() - lo.clone()).to_f64() > opts.bisect_tol {
                let mid = (lo.clone() + hi.clone()) * K::half();
                if series.eval(&mid) <= K::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(ZeroSearch {
                zero: Some((lo + hi) * K::half()),
                possible_even_order: None,
            })
        }
    }
}

/// Scan cap for a system: `(1 − margin)·1/ρ̂∞`, rounded down to a dyadic
/// with denominator 4096 to keep exact-mode grid arithmetic small.
pub fn scan_cap<K: Scalar>(sys: &System<K>, opts: &PressureOptions) -> Result<(f64, K)> {
    let bound = match cylinders::census(sys, opts.radius_depth, opts.cylinder_cap) {
        Ok(c) => c.sup_radius_bound(),
        Err(Error::CylinderBudget { .. }) => {
            // One-step bound ‖g‖_∞ is always valid.
            let mut worst = 0.0f64;
            for i in 0..sys.num_branches() {
                worst = worst.max(sys.weight(i).abs().to_f64());
            }
            worst
        }
        Err(e) => return Err(e),
    };
    let t_max = if bound <= 0.0 {
        // All weights vanish: the determinant is the constant 1; any cap
        // will do for the (fruitless) scan.
        1.0
    } else {
        (1.0 - opts.margin) / bound
    };
    let dyadic = (t_max * 4096.0).floor().max(1.0);
    Ok((bound, K::from_ratio(dyadic as i64, 4096)))
}

pub fn pressure<K: Scalar>(
    sys: &System<K>,
    truncation: usize,
    opts: &PressureOptions,
) -> Result<PressureReport<K>> {
    let (sup_bound, t_max) = scan_cap(sys, opts)?;
    let matrix = kneading_matrix(sys, truncation)?;
    let det = matrix.det();
    let search = first_positive_zero(&det, &t_max, opts)?;

    let mut report = PressureReport {
        truncation,
        sup_radius_bound: sup_bound,
        t_max: t_max.to_f64(),
        t_star: search.zero.clone(),
        rho1: None,
        pressure: None,
        stability_gap: None,
        stable: None,
        possible_even_order: search.possible_even_order,
        reduced_first_zero: None,
        reduced_zero_is_spurious: false,
    };

    if let Some(t_star) = &search.zero {
        let t = t_star.to_f64();
        report.rho1 = Some(1.0 / t);
        report.pressure = Some(-t.ln());

        let det2 = kneading_matrix(sys, truncation * 2)?.det();
        if let Some(z2) = first_positive_zero(&det2, &t_max, opts)?.zero {
            let gap = (t - z2.to_f64()).abs();
            report.stability_gap = Some(gap);
            report.stable = Some(gap < opts.stability_factor * opts.bisect_tol);
        } else {
            report.stable = Some(false);
        }
    }

    let reduced_det = reduced_matrix(&matrix).det();
    if let Some(z) = first_positive_zero(&reduced_det, &t_max, opts)?.zero {
        if let Some(t_star) = &report.t_star {
            report.reduced_zero_is_spurious =
                (t_star.clone() - z.clone()).to_f64() > opts.stability_factor * opts.bisect_tol;
        }
        report.reduced_first_zero = Some(z);
    }

    Ok(report)
}

/// Finite-depth growth estimate `log‖g^n‖₁ / n` of the pressure.
pub fn l1_growth_rate<K: Scalar>(census: &Census<K>, n: usize) -> f64 {
    assert!(n >= 1 && n <= census.depth());
    census.l1[n].to_f64().ln() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::Rational;

    fn run<K: Scalar>(sys: &System<K>, n: usize) -> PressureReport<K> {
        pressure(sys, n, &PressureOptions::default()).unwrap()
    }

    #[test]
    fn tent_pressure_is_log_two() {
        let report = run(&fixtures::tent::<f64>(), 64);
        let t = report.t_star.unwrap();
        assert!((t - 0.5).abs() < 1e-11, "t* = {t}");
        assert!((report.pressure.unwrap() - 2f64.ln()).abs() < 1e-10);
        assert_eq!(report.stable, Some(true));
        assert!(!report.reduced_zero_is_spurious);
    }

    #[test]
    fn golden_mean_pressure() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let report = run(&fixtures::golden_mean::<f64>(), 64);
        assert!((report.t_star.unwrap() - 1.0 / phi).abs() < 1e-9);
        assert!((report.pressure.unwrap() - phi.ln()).abs() < 1e-9);
    }

    #[test]
    fn weighted_doubling_pressure() {
        let report = run(&fixtures::weighted_doubling::<f64>(), 64);
        assert!((report.t_star.unwrap() - 0.2).abs() < 1e-11);
        assert!((report.rho1.unwrap() - 5.0).abs() < 1e-9);
        // The sup-norm cap must still leave the zero visible: ρ∞ = 3.
        assert!((report.sup_radius_bound - 3.0).abs() < 1e-9);
        assert!(report.t_max > 0.2);
    }

    #[test]
    fn lopsided_inflow_weight_makes_reduced_zero_spurious() {
        let report = run(&fixtures::tent_with_inflow::<f64>(100.0), 64);
        assert!((report.t_star.clone().unwrap() - 0.5).abs() < 1e-11);
        let spur = report.reduced_first_zero.unwrap();
        assert!((spur - 2.0 / 101.0).abs() < 1e-9, "spurious zero {spur}");
        assert!(report.reduced_zero_is_spurious);
    }

    #[test]
    fn balanced_inflow_weight_keeps_zeros_together() {
        let report = run(&fixtures::tent_with_inflow::<f64>(2.0), 64);
        let t = report.t_star.clone().unwrap();
        let r = report.reduced_first_zero.unwrap();
        assert!((t - 0.5).abs() < 1e-11);
        assert!((r - t).abs() < 1e-9);
        assert!(!report.reduced_zero_is_spurious);
    }

    #[test]
    fn exact_mode_bisection_brackets_the_zero() {
        let report = run(&fixtures::tent::<Rational>(), 32);
        let t = report.t_star.unwrap().to_f64();
        // Truncation at 32 biases the zero upward by 2^{-34}.
        assert!((t - 0.5).abs() < 1e-9);
        assert!(t > 0.5);
        // The doubled-truncation zero moves by more than the bisection
        // resolution, so the report flags instability.
        assert_eq!(report.stable, Some(false));
    }

    #[test]
    fn even_order_dip_is_reported_not_refined() {
        // (1−2t)² dips to ~1e−7 near 0.5 on the grid without changing sign.
        let series = Series::from_coeffs(vec![1.0, -4.0, 4.0, 0.0, 0.0]);
        let opts = PressureOptions { dip_tol: 1e-5, ..PressureOptions::default() };
        let search = first_positive_zero(&series, &0.9, &opts).unwrap();
        assert!(search.zero.is_none());
        let dip = search.possible_even_order.unwrap();
        assert!((dip - 0.5).abs() < 1e-3, "dip at {dip}");
    }

    #[test]
    fn positive_series_yields_no_zero_and_no_dip() {
        let series = Series::from_coeffs(vec![1.0, 1.0, 1.0]);
        let search =
            first_positive_zero(&series, &0.9, &PressureOptions::default()).unwrap();
        assert!(search.zero.is_none());
        assert!(search.possible_even_order.is_none());
    }

    #[test]
    fn growth_rate_estimates_pressure() {
        let sys = fixtures::tent::<f64>();
        let census = crate::cylinders::census(&sys, 16, 1 << 18).unwrap();
        let rate = l1_growth_rate(&census, 16);
        assert!((rate - 2f64.ln()).abs() < 1e-12);
    }
}
