//! Scalar formulas behind the weak parallelogram constant.
//!
//! The central object is the ratio
//!
//! ```text
//! h(t) = (2^{r/q} (1 + t^p)^{r/p} - (1 + t)^r) / (1 - t)^r,    0 <= t < 1,
//! ```
//!
//! whose infimum over `[0, 1)` is the optimal lower constant `C_{p,r}`. Its
//! numerator vanishes to second order at `t = 1`, so the direct quotient loses
//! every significant digit there. [`eval_h`] instead writes the numerator as
//! `(1 + t)^r · expm1(r·D)` with
//!
//! ```text
//! D = ln((1 + t^p) / 2) / p - ln((1 + t) / 2)
//!   = ln cosh(p·ln(t) / 2) / p - ln cosh(ln(t) / 2),
//! ```
//!
//! the second form being free of cancellation as `t → 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// Width of the window below `t = 1` where [`eval_h`] switches to the
/// leading boundary series.
pub const BOUNDARY_DELTA: f64 = 1e-8;

fn check_unit_interval(t: f64) -> Result<()> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, 1)",
        })
    }
}

/// Leading term `2^r r (p-1)/8 · ε^{2-r}` of `h(1 - ε)`.
pub fn boundary_series(params: &Params, eps: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    2f64.powf(r) * r * (p - 1.0) / 8.0 * eps.powf(2.0 - r)
}

/// `ln cosh y`, accurate to a few ulps including for tiny `y`.
#[inline]
fn ln_cosh(y: f64) -> f64 {
    let s = (0.5 * y).sinh();
    (2.0 * s * s).ln_1p()
}

/// Cancellation-free evaluation of `h(t)` for `t` in `[0, 1 - BOUNDARY_DELTA]`.
fn h_direct(params: &Params, t: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    let d = if t > 0.5 {
        // With u = ln t, ln((1 + e^x)/2) = x/2 + ln cosh(x/2), and the linear
        // parts of the two logarithms cancel exactly.
        let u = (t - 1.0).ln_1p();
        ln_cosh(0.5 * p * u) / p - ln_cosh(0.5 * u)
    } else {
        let tp_minus_one = (p * t.ln()).exp_m1();
        (0.5 * tp_minus_one).ln_1p() / p - (0.5 * (t - 1.0)).ln_1p()
    };
    let ratio_pow = (r * (t.ln_1p() - (-t).ln_1p())).exp();
    ratio_pow * (r * d).exp_m1()
}

/// The objective `h(t)` whose infimum over `[0, 1)` defines `C_{p,r}`.
///
/// Accepts any admissible `p, r`, but positivity and monotonicity in `r` are
/// only guaranteed for `1 < p <= 2 <= r <= q`. Inside `(1 - BOUNDARY_DELTA, 1)`
/// the leading boundary series is returned.
pub fn eval_h(params: &Params, t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    let eps = 1.0 - t;
    if eps < BOUNDARY_DELTA {
        return Ok(boundary_series(params, eps));
    }
    Ok(h_direct(params, t))
}

/// Factor `g(t) = 2^{r/q}(1+t^p)^{r/p-1}(1+t^{p-1}) - 2(1+t)^{r-1}` of `h'(t)`.
///
/// `h'(t) = r (1-t)^{r-1} g(t) / (1-t)^{2r}`, so `g` carries the sign of the
/// derivative on `[0, 1)`.
pub fn h_prime_sign_factor(params: &Params, t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    Ok(sign_factor_unchecked(params, t))
}

pub(crate) fn sign_factor_unchecked(params: &Params, t: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    let scale = 2f64.powf(r / params.q());
    // 0^{p-1} = 0 for p > 1, the continuous extension.
    let tp = t.powf(p);
    let tp1 = t.powf(p - 1.0);
    scale * (1.0 + tp).powf(r / p - 1.0) * (1.0 + tp1) - 2.0 * (1.0 + t).powf(r - 1.0)
}

/// `g'(t)`, for Newton refinement of interior minimizers. Requires `t > 0`.
pub(crate) fn sign_factor_derivative(params: &Params, t: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    let scale = 2f64.powf(r / params.q());
    let tp = t.powf(p);
    let tp1 = t.powf(p - 1.0);
    let tp2 = t.powf(p - 2.0);
    let base = 1.0 + tp;
    let first = (r / p - 1.0) * base.powf(r / p - 2.0) * p * tp1 * (1.0 + tp1);
    let second = base.powf(r / p - 1.0) * (p - 1.0) * tp2;
    scale * (first + second) - 2.0 * (r - 1.0) * (1.0 + t).powf(r - 2.0)
}

/// Limit of `h(t)` as `t → 1⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryLimit {
    Finite(f64),
    PositiveInfinity,
}

impl BoundaryLimit {
    pub fn as_f64(self) -> f64 {
        match self {
            BoundaryLimit::Finite(v) => v,
            BoundaryLimit::PositiveInfinity => f64::INFINITY,
        }
    }
}

/// `p - 1` when `r = 2`, `+∞` when `r > 2`.
pub fn limit_h_at_one(params: &Params) -> Result<BoundaryLimit> {
    let r = params.r();
    if r < 2.0 {
        return Err(Error::Unsupported(format!(
            "limit of h at t = 1 is only characterised for r >= 2 (got r = {r})"
        )));
    }
    if r == 2.0 {
        Ok(BoundaryLimit::Finite(params.p() - 1.0))
    } else {
        Ok(BoundaryLimit::PositiveInfinity)
    }
}

/// `k(t) = 2^{r/q}(1+|t|^p)^{r/p} - |1+t|^r - C|1-t|^r` for real `t`.
pub fn eval_k(params: &Params, c: f64, t: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    let lead = 2f64.powf(r / params.q()) * (1.0 + t.abs().powf(p)).powf(r / p);
    lead - (1.0 + t).abs().powf(r) - c * (1.0 - t).abs().powf(r)
}

/// Slack in `|u+v|^r + C|u-v|^r <= 2^{r/q}(|u|^p + |v|^p)^{r/p}`.
pub fn two_point_defect(params: &Params, c: f64, u: f64, v: f64) -> f64 {
    let (p, r) = (params.p(), params.r());
    let lead = 2f64.powf(r / params.q()) * (u.abs().powf(p) + v.abs().powf(p)).powf(r / p);
    lead - (u + v).abs().powf(r) - c * (u - v).abs().powf(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(p: f64, r: f64) -> Params {
        Params::new(p, r).unwrap()
    }

    /// The raw quotient, kept as an independent reference away from t = 1.
    fn h_naive(params: &Params, t: f64) -> f64 {
        let (p, r) = (params.p(), params.r());
        let num = 2f64.powf(r - r / p) * (1.0 + t.powf(p)).powf(r / p) - (1.0 + t).powf(r);
        num / (1.0 - t).powf(r)
    }

    #[test]
    fn hilbert_case_is_constant() {
        let pr = params(2.0, 2.0);
        for &t in &[0.0, 0.1, 0.5, 0.9, 0.999_999, 1.0 - 1e-9] {
            assert_relative_eq!(eval_h(&pr, t).unwrap(), 1.0, max_relative = 1e-9);
            assert!(h_prime_sign_factor(&pr, t.min(0.999)).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn value_at_zero() {
        for &(p, r) in &[(1.5, 2.5), (1.2, 3.0), (3.0, 1.5), (1.75, 2.2)] {
            let pr = params(p, r);
            let expected = 2f64.powf(r / pr.q()) - 1.0;
            assert_relative_eq!(eval_h(&pr, 0.0).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn frozen_values() {
        // 50-digit reference evaluations of the defining quotient.
        let pr = params(1.5, 2.5);
        assert_relative_eq!(
            eval_h(&pr, 0.027307).unwrap(),
            0.777_544_913_543_095_7,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            eval_h(&pr, 1.0 - 1e-7).unwrap(),
            2_795.084_901_997_613,
            max_relative = 1e-6
        );
        let pr = params(1.5, 2.0);
        assert_relative_eq!(
            eval_h(&pr, 0.999).unwrap(),
            0.500_000_015_640_637_3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            eval_h(&pr, 1.0 - 1e-6).unwrap(),
            0.500_000_000_000_015_6,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            eval_h(&params(2.5, 1.75), 0.5).unwrap(),
            0.966_423_509_518_882_2,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            eval_h(&params(4.0, 2.0), 0.3).unwrap(),
            2.346_651_329_463_093_7,
            max_relative = 1e-13
        );
    }

    #[test]
    fn agrees_with_naive_quotient_away_from_one() {
        for &(p, r) in &[(1.5, 2.5), (1.1, 8.0), (2.5, 1.75), (1.9, 2.05)] {
            let pr = params(p, r);
            for i in 0..=90 {
                let t = i as f64 / 100.0;
                assert_relative_eq!(
                    eval_h(&pr, t).unwrap(),
                    h_naive(&pr, t),
                    max_relative = 1e-11
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        let pr = params(1.5, 2.5);
        assert!(eval_h(&pr, -1e-3).is_err());
        assert!(eval_h(&pr, 1.0).is_err());
        assert!(eval_h(&pr, f64::NAN).is_err());
        assert!(h_prime_sign_factor(&pr, 1.0).is_err());
    }

    #[test]
    fn boundary_window_uses_series() {
        let pr = params(1.5, 2.0);
        let t = 1.0 - 5e-9;
        assert_eq!(eval_h(&pr, t).unwrap(), 0.5);
        let pr = params(1.5, 2.5);
        let eps = 1.0 - t;
        assert_eq!(eval_h(&pr, t).unwrap(), boundary_series(&pr, eps));
    }

    #[test]
    fn sign_factor_at_zero_and_bracket() {
        let pr = params(1.5, 2.5);
        let g0 = h_prime_sign_factor(&pr, 0.0).unwrap();
        assert_relative_eq!(g0, 2f64.powf(2.5 / 3.0) - 2.0, max_relative = 1e-14);
        assert!(g0 < 0.0);
        assert!(h_prime_sign_factor(&pr, 0.02).unwrap() < 0.0);
        assert!(h_prime_sign_factor(&pr, 0.03).unwrap() > 0.0);
    }

    #[test]
    fn sign_factor_matches_finite_differences() {
        for &(p, r) in &[(1.5, 2.5), (1.75, 2.2), (1.3, 3.0), (5.0 / 3.0, 7.0 / 3.0)] {
            let pr = params(p, r);
            for i in 1..200 {
                let t = i as f64 / 201.0;
                let step = 1e-6;
                let fd = (eval_h(&pr, t + step).unwrap() - eval_h(&pr, t - step).unwrap())
                    / (2.0 * step);
                if fd.abs() > 1e-8 {
                    let g = h_prime_sign_factor(&pr, t).unwrap();
                    assert_eq!(g.signum(), fd.signum(), "p={p} r={r} t={t}");
                }
            }
        }
    }

    #[test]
    fn sign_factor_derivative_matches_finite_differences() {
        let pr = params(1.5, 2.5);
        for &t in &[0.01, 0.027, 0.2, 0.6] {
            let step = 1e-6;
            let fd = (sign_factor_unchecked(&pr, t + step) - sign_factor_unchecked(&pr, t - step))
                / (2.0 * step);
            assert_relative_eq!(sign_factor_derivative(&pr, t), fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn boundary_limits() {
        assert_eq!(
            limit_h_at_one(&params(1.5, 2.0)).unwrap(),
            BoundaryLimit::Finite(0.5)
        );
        assert_eq!(
            limit_h_at_one(&params(2.0, 2.0)).unwrap(),
            BoundaryLimit::Finite(1.0)
        );
        assert_eq!(
            limit_h_at_one(&params(1.5, 2.5)).unwrap(),
            BoundaryLimit::PositiveInfinity
        );
        assert!(limit_h_at_one(&params(2.5, 1.75)).is_err());
    }

    #[test]
    fn series_consistency() {
        for &(p, r) in &[(1.5, 2.5), (1.2, 4.0), (1.75, 2.2)] {
            let pr = params(p, r);
            let lead = 2f64.powf(r) * r * (p - 1.0) / 8.0;
            for &eps in &[1e-3, 1e-4, 1e-5, 1e-6] {
                let scaled = eval_h(&pr, 1.0 - eps).unwrap() * eps.powf(r - 2.0);
                assert!((scaled / lead - 1.0).abs() < 0.01, "p={p} r={r} eps={eps}");
            }
        }
    }

    #[test]
    fn positive_on_minimized_region() {
        for i in 1..=10 {
            let p = 1.0 + i as f64 / 10.0;
            let q = p / (p - 1.0);
            for j in 0..=5 {
                let r = 2.0 + (q - 2.0) * j as f64 / 5.0;
                let pr = params(p, r);
                for k in 0..=2000 {
                    let t = (1.0 - BOUNDARY_DELTA) * k as f64 / 2000.0;
                    assert!(eval_h(&pr, t).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn monotone_in_r() {
        for &p in &[1.1, 1.3, 1.5, 1.8, 2.0] {
            let q = p / (p - 1.0);
            let rs: Vec<f64> = (0..=8).map(|j| 2.0 + (q - 2.0) * j as f64 / 8.0).collect();
            for w in rs.windows(2) {
                for k in 0..50 {
                    let t = k as f64 / 50.0;
                    let lo = eval_h(&params(p, w[0]), t).unwrap();
                    let hi = eval_h(&params(p, w[1]), t).unwrap();
                    assert!(lo <= hi + 1e-12 * hi.abs().max(1.0), "p={p} t={t}");
                }
            }
        }
    }

    #[test]
    fn k_special_values() {
        let pr = params(1.5, 2.5);
        assert!(eval_k(&pr, 0.7, 1.0).abs() < 1e-13);
        let hilbert = params(2.0, 2.0);
        for &t in &[-3.0, -1.0, 0.0, 0.4, 7.0] {
            assert!(eval_k(&hilbert, 1.0, t).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_special_values() {
        let pr = params(1.5, 2.5);
        assert!(two_point_defect(&pr, 0.3, 1.0, 1.0).abs() < 1e-13);
        let c = 0.25;
        assert_relative_eq!(
            two_point_defect(&pr, c, 1.0, 0.0),
            2f64.powf(2.5 / 3.0) - 1.0 - c,
            max_relative = 1e-14
        );
    }

    proptest! {
        #[test]
        fn k_reciprocal_symmetry(p in 1.05f64..2.0, frac in 0.0f64..1.0, c in 0.05f64..1.0, t in 0.01f64..10.0) {
            let q = p / (p - 1.0);
            let pr = params(p, 2.0 + frac * (q - 2.0));
            let r = pr.r();
            let lhs = eval_k(&pr, c, t);
            let rhs = t.powf(r) * eval_k(&pr, c, 1.0 / t);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + t).powf(r));
        }

        #[test]
        fn k_even_dominance(p in 1.05f64..2.0, r in 1.1f64..6.0, c in 0.05f64..1.0, t in -10.0f64..0.0) {
            let pr = params(p, r);
            prop_assert!(eval_k(&pr, c, t) >= eval_k(&pr, c, t.abs()) - 1e-12 * (1.0 + t.abs()).powf(r));
        }

        #[test]
        fn two_point_matches_k(p in 1.05f64..3.0, r in 1.1f64..5.0, c in 0.0f64..2.0,
                               u in -50.0f64..50.0, v in -50.0f64..50.0) {
            prop_assume!(u.abs() > 1e-3);
            let pr = params(p, r);
            let lhs = two_point_defect(&pr, c, u, v);
            let rhs = u.abs().powf(r) * eval_k(&pr, c, v / u);
            let scale = (u.abs() + v.abs()).powf(r) * (1.0 + c);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn two_point_homogeneous(p in 1.05f64..3.0, r in 1.1f64..5.0, c in 0.0f64..2.0,
                                 u in -5.0f64..5.0, v in -5.0f64..5.0, s in -4.0f64..4.0) {
            let pr = params(p, r);
            let lhs = two_point_defect(&pr, c, s * u, s * v);
            let rhs = s.abs().powf(r) * two_point_defect(&pr, c, u, v);
            let scale = (s.abs() * (u.abs() + v.abs())).powf(r) * (1.0 + c) + 1e-300;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
