//! Finite-dimensional `ℓ^p` vectors and the vector-level inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_exponent, Params};
use crate::scalar::eval_h;
use crate::search::minimize_convex;
use crate::solver::Law;

/// A real coordinate vector carrying its norm exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpVector {
    exponent: f64,
    coords: Vec<f64>,
}

impl LpVector {
    pub fn new(exponent: f64, coords: Vec<f64>) -> Result<Self> {
        check_exponent("p", exponent)?;
        if coords.is_empty() {
            return Err(Error::Incompatible(
                "vector must have dimension >= 1".into(),
            ));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain {
                name: "coordinate",
                value: *bad,
                domain: "finite reals",
            });
        }
        Ok(Self { exponent, coords })
    }

    pub fn zeros(exponent: f64, dim: usize) -> Result<Self> {
        Self::new(exponent, vec![0.0; dim])
    }

    /// The basis vector `e_index` in dimension `dim`.
    pub fn basis(exponent: f64, dim: usize, index: usize) -> Result<Self> {
        let mut coords = vec![0.0; dim];
        if index >= dim {
            return Err(Error::Incompatible(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        coords[index] = 1.0;
        Self::new(exponent, coords)
    }

    #[inline]
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.exponent != other.exponent {
            return Err(Error::Incompatible(format!(
                "exponents differ: {} vs {}",
                self.exponent, other.exponent
            )));
        }
        if self.dim() != other.dim() {
            return Err(Error::Incompatible(format!(
                "dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            exponent: self.exponent,
            coords,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + t * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            exponent: self.exponent,
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn norm(&self) -> f64 {
        p_norm(self)
    }
}

/// `(Σ|x_i|^p)^{1/p}`, rescaled by the largest magnitude to avoid overflow.
pub fn p_norm(x: &LpVector) -> f64 {
    norm_of(x.exponent, &x.coords)
}

fn norm_of(p: f64, coords: &[f64]) -> f64 {
    let max = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = coords.iter().map(|c| (c.abs() / max).powf(p)).sum();
    max * sum.powf(1.0 / p)
}

/// `2^{r-1}(‖x‖^r + ‖y‖^r)`, the right-hand side of both weak parallelogram laws.
pub fn wp_scale(x: &LpVector, y: &LpVector, r: f64) -> f64 {
    2f64.powf(r - 1.0) * (x.norm().powf(r) + y.norm().powf(r))
}

/// Slack of the weak parallelogram law of the given kind at the pair `(x, y)`:
/// `RHS - LHS` for the lower law, `LHS - RHS` for the upper law, where
/// `LHS = ‖x+y‖^r + C‖x-y‖^r` and `RHS = 2^{r-1}(‖x‖^r + ‖y‖^r)`.
pub fn wp_defect(x: &LpVector, y: &LpVector, r: f64, c: f64, kind: Law) -> Result<f64> {
    check_exponent("r", r)?;
    let sum = x.add(y)?.norm();
    let diff = x.sub(y)?.norm();
    let lhs = sum.powf(r) + c * diff.powf(r);
    let rhs = wp_scale(x, y, r);
    Ok(match kind {
        Law::Lwp => rhs - lhs,
        Law::Uwp => lhs - rhs,
    })
}

/// The pair `a = t·e0 + e1`, `b = e0 + t·e1` in dimension `dim`.
pub fn extremal_pair(t: f64, p: f64, dim: usize) -> Result<(LpVector, LpVector)> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "[0, 1)",
        });
    }
    if dim < 2 {
        return Err(Error::Incompatible(
            "extremal pair needs dimension >= 2".into(),
        ));
    }
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    a[0] = t;
    a[1] = 1.0;
    b[0] = 1.0;
    b[1] = t;
    Ok((LpVector::new(p, a)?, LpVector::new(p, b)?))
}

/// The constant `C` for which the weak parallelogram defect of
/// `extremal_pair(t)` vanishes:
///
/// ```text
/// (2^{r-1}(‖a‖^r + ‖b‖^r) - ‖a+b‖^r) / ‖a-b‖^r
///     = (2^{r-r/p}(1+t^p)^{r/p} - (1+t)^r) / (1-t)^r.
/// ```
///
/// The value does not depend on `kind`. For the lower law its infimum over `t`
/// caps every admissible constant; for the upper law its supremum bounds every
/// admissible constant from below.
pub fn extremal_required_constant(p: f64, r: f64, t: f64, _kind: Law) -> Result<f64> {
    let params = Params::new(p, r)?;
    eval_h(&params, t)
}

/// Slack in Hanner's inequality
/// `(‖F‖+‖G‖)^p + |‖F‖-‖G‖|^p <= ‖F+G‖^p + ‖F-G‖^p` for `1 < p <= 2`.
pub fn hanner_defect(f: &LpVector, g: &LpVector) -> Result<f64> {
    let p = f.exponent();
    if p > 2.0 {
        return Err(Error::Unsupported(format!(
            "Hanner's inequality is used only for 1 < p <= 2 (got p = {p})"
        )));
    }
    let (nf, ng) = (f.norm(), g.norm());
    let sum = f.add(g)?.norm();
    let diff = f.sub(g)?.norm();
    Ok(sum.powf(p) + diff.powf(p) - (nf + ng).powf(p) - (nf - ng).abs().powf(p))
}

/// Slack in Clarkson's inequality: `L^p` is p-UWP(1) for `p <= 2` and p-LWP(1)
/// for `p >= 2`.
pub fn clarkson_defect(f: &LpVector, g: &LpVector) -> Result<f64> {
    let p = f.exponent();
    let kind = if p <= 2.0 { Law::Uwp } else { Law::Lwp };
    wp_defect(f, g, p, 1.0, kind)
}

/// Removes from `z` its component along `x` with respect to the norming
/// functional `φ_i = sgn(x_i)|x_i|^{p-1}`, leaving `y` with `x ⊥ y` in the
/// Birkhoff-James sense.
pub fn bj_project(x: &LpVector, z: &LpVector) -> Result<LpVector> {
    x.check_compatible(z)?;
    if x.is_zero() {
        return Err(Error::Domain {
            name: "‖x‖",
            value: 0.0,
            domain: "(0, inf)",
        });
    }
    let p = x.exponent();
    let max = x.coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let phi: Vec<f64> = x
        .coords
        .iter()
        .map(|&xi| xi.signum() * (xi.abs() / max).powf(p - 1.0))
        .collect();
    let num: f64 = z.coords.iter().zip(&phi).map(|(a, b)| a * b).sum();
    let den: f64 = x.coords.iter().zip(&phi).map(|(a, b)| a * b).sum();
    let c = num / den;
    z.axpy(-c, x)
}

/// `max(0, ‖x‖ - inf_t ‖x + t·y‖)`; zero exactly when `x ⊥ y` in the
/// Birkhoff-James sense.
pub fn bj_violation(x: &LpVector, y: &LpVector) -> Result<f64> {
    x.check_compatible(y)?;
    let nx = x.norm();
    let ny = y.norm();
    if ny == 0.0 || nx == 0.0 {
        return Ok(0.0);
    }
    // Rescale t so that the minimizer sits at unit order.
    let unit = nx / ny;
    let p = x.exponent();
    let mut buf = vec![0.0; x.dim()];
    let objective = |s: f64| {
        let t = s * unit;
        for (b, (xi, yi)) in buf.iter_mut().zip(x.coords.iter().zip(&y.coords)) {
            *b = xi + t * yi;
        }
        norm_of(p, &buf)
    };
    let best = minimize_convex(objective, 1e-12);
    Ok((nx - best.value.min(nx)).max(0.0))
}

/// Orthogonality tolerance for [`pythagorean_defect`], relative to `‖x‖`.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Slack in the Pythagorean inequality under `x ⊥ y`:
/// `‖x+y‖^r - ‖x‖^r - K‖y‖^r` for the lower law, its negation for the upper.
pub fn pythagorean_defect(x: &LpVector, y: &LpVector, r: f64, k: f64, kind: Law) -> Result<f64> {
    check_exponent("r", r)?;
    let violation = bj_violation(x, y)?;
    let tolerance = ORTHOGONALITY_TOL * x.norm();
    if violation > tolerance {
        return Err(Error::NotOrthogonal {
            violation,
            tolerance,
        });
    }
    let lhs = x.add(y)?.norm().powf(r);
    let rhs = x.norm().powf(r) + k * y.norm().powf(r);
    Ok(match kind {
        Law::Lwp => lhs - rhs,
        Law::Uwp => rhs - lhs,
    })
}

/// `K = C / (2^{r-1} - 1)`, the Pythagorean constant attached to a law constant.
pub fn pythagorean_constant(r: f64, c: f64) -> f64 {
    c / (2f64.powf(r - 1.0) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::two_point_defect;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(p: f64, c: &[f64]) -> LpVector {
        LpVector::new(p, c.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(LpVector::new(1.0, vec![1.0]).is_err());
        assert!(LpVector::new(2.0, vec![]).is_err());
        assert!(LpVector::new(2.0, vec![f64::NAN]).is_err());
        assert!(v(2.0, &[1.0]).add(&v(3.0, &[1.0])).is_err());
        assert!(v(2.0, &[1.0]).add(&v(2.0, &[1.0, 2.0])).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_relative_eq!(v(2.0, &[3.0, 4.0]).norm(), 5.0, max_relative = 1e-15);
        assert_relative_eq!(
            v(1.5, &[1.0, 1.0]).norm(),
            2f64.powf(1.0 / 1.5),
            max_relative = 1e-15
        );
        let t: f64 = 0.3;
        assert_relative_eq!(
            v(2.5, &[t, 1.0]).norm(),
            (1.0 + t.powf(2.5)).powf(1.0 / 2.5),
            max_relative = 1e-15
        );
        assert_eq!(v(3.0, &[0.0, 0.0]).norm(), 0.0);
        assert_relative_eq!(
            v(2.0, &[1e200, 1e200]).norm(),
            2f64.sqrt() * 1e200,
            max_relative = 1e-15
        );
    }

    #[test]
    fn wp_defect_special_pairs() {
        let x = v(1.5, &[0.3, -1.2, 2.0]);
        for &r in &[1.5, 2.0, 2.5] {
            assert!(wp_defect(&x, &x, r, 0.4, Law::Lwp).unwrap().abs() < 1e-12);
            let expected = 2f64.powf(r) * x.norm().powf(r) * (1.0 - 0.4);
            assert_relative_eq!(
                wp_defect(&x, &x.neg(), r, 0.4, Law::Lwp).unwrap(),
                expected,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn extremal_pair_norms() {
        let (a, b) = extremal_pair(0.0, 2.0, 2).unwrap();
        assert_eq!(a.coords(), &[0.0, 1.0]);
        assert_eq!(b.coords(), &[1.0, 0.0]);
        let (a, b) = extremal_pair(0.5, 2.0, 3).unwrap();
        assert_relative_eq!(
            a.add(&b).unwrap().norm(),
            1.5 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            a.sub(&b).unwrap().norm(),
            0.5 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(extremal_pair(0.5, 2.0, 1).is_err());
        assert!(extremal_pair(1.0, 2.0, 2).is_err());
    }

    /// The defect ratio computed directly from the vector norms.
    fn required_constant_from_norms(p: f64, r: f64, t: f64) -> f64 {
        let (a, b) = extremal_pair(t, p, 2).unwrap();
        let rhs = wp_scale(&a, &b, r);
        let sum = a.add(&b).unwrap().norm().powf(r);
        let diff = a.sub(&b).unwrap().norm().powf(r);
        (rhs - sum) / diff
    }

    #[test]
    fn required_constant_matches_h() {
        for &(p, r) in &[(1.5, 2.5), (1.75, 2.2), (2.5, 1.75), (4.0, 2.0), (1.3, 5.0)] {
            for i in 0..=999 {
                let t = 0.999 * i as f64 / 999.0;
                let via_h = extremal_required_constant(p, r, t, Law::Lwp).unwrap();
                let direct = required_constant_from_norms(p, r, t);
                // The direct route cancels as t -> 1; compare only where it keeps digits.
                let tol = if t < 0.9 { 1e-11 } else { 1e-7 };
                assert_relative_eq!(via_h, direct, max_relative = tol);
            }
        }
        assert_relative_eq!(
            extremal_required_constant(1.5, 2.5, 0.027307, Law::Lwp).unwrap(),
            0.777_545,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            extremal_required_constant(2.0, 2.0, 0.42, Law::Uwp).unwrap(),
            1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn required_constant_limit_at_p4_r2() {
        // Richardson extrapolation in ε from two near-boundary evaluations.
        let f = |eps: f64| extremal_required_constant(4.0, 2.0, 1.0 - eps, Law::Uwp).unwrap();
        let (f4, f5) = (f(1e-4), f(1e-5));
        let extrapolated = (10.0 * f5 - f4) / 9.0;
        assert!((extrapolated - 3.0).abs() < 1e-6);
    }

    #[test]
    fn hanner_examples() {
        let f = v(1.5, &[1.0, 0.0]);
        let g = v(1.5, &[0.0, 1.0]);
        assert_relative_eq!(
            hanner_defect(&f, &g).unwrap(),
            4.0 - 2f64.powf(1.5),
            max_relative = 1e-14
        );
        assert!(hanner_defect(&f, &v(1.5, &[0.0, 0.0])).unwrap().abs() < 1e-14);
        let f2 = v(2.0, &[0.3, -2.0, 1.0]);
        let g2 = v(2.0, &[1.7, 0.2, -0.4]);
        assert!(hanner_defect(&f2, &g2).unwrap().abs() < 1e-12);
        assert!(hanner_defect(&v(3.0, &[1.0]), &v(3.0, &[1.0])).is_err());
    }

    #[test]
    fn clarkson_examples() {
        let f = v(1.5, &[1.0, 0.0]);
        let g = v(1.5, &[0.0, 1.0]);
        assert_relative_eq!(
            clarkson_defect(&f, &g).unwrap(),
            4.0 - 2f64.sqrt() * 2.0,
            max_relative = 1e-14
        );
        assert!(clarkson_defect(&f, &f).unwrap().abs() < 1e-14);
        let f2 = v(2.0, &[0.3, -2.0, 1.0]);
        let g2 = v(2.0, &[1.7, 0.2, -0.4]);
        assert!(clarkson_defect(&f2, &g2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bj_project_examples() {
        let y = bj_project(&v(2.0, &[1.0, 0.0]), &v(2.0, &[1.0, 1.0])).unwrap();
        assert_eq!(y.coords(), &[0.0, 1.0]);
        for &p in &[1.3, 2.0, 3.7] {
            let y = bj_project(&v(p, &[1.0, 1.0]), &v(p, &[1.0, 0.0])).unwrap();
            assert_relative_eq!(y.coords()[0], 0.5, max_relative = 1e-15);
            assert_relative_eq!(y.coords()[1], -0.5, max_relative = 1e-15);
        }
        let x = v(3.0, &[1.0, 2.0]);
        let y = bj_project(&x, &v(3.0, &[1.0, 0.0])).unwrap();
        assert_relative_eq!(y.coords()[0], 8.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(y.coords()[1], -2.0 / 9.0, max_relative = 1e-15);
        // Oracle: a scan of ‖x + t y‖ puts the minimum at t = 0.
        let at = |t: f64| x.axpy(t, &y).unwrap().norm();
        let n0 = at(0.0);
        for i in 1..=100 {
            let t = i as f64 * 1e-3;
            assert!(at(t) >= n0 && at(-t) >= n0);
        }
        assert!(bj_project(&v(3.0, &[0.0, 0.0]), &v(3.0, &[1.0, 0.0])).is_err());
    }

    #[test]
    fn bj_violation_examples() {
        let x = v(2.5, &[1.0, -3.0, 0.5]);
        assert_eq!(bj_violation(&x, &v(2.5, &[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert!(bj_violation(&v(2.0, &[1.0, 0.0]), &v(2.0, &[0.0, 1.0])).unwrap() < 1e-12);
        assert_relative_eq!(bj_violation(&x, &x).unwrap(), x.norm(), max_relative = 1e-9);
    }

    #[test]
    fn pythagorean_examples() {
        let x = v(2.0, &[1.0, 0.0]);
        let y = v(2.0, &[0.0, 1.0]);
        assert!(
            pythagorean_defect(&x, &y, 2.0, 1.0, Law::Lwp)
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!(
            pythagorean_defect(&x, &v(2.0, &[0.0, 0.0]), 2.0, 1.0, Law::Lwp)
                .unwrap()
                .abs()
                < 1e-14
        );
        let x = v(1.5, &[1.0, 0.0]);
        let y = v(1.5, &[0.0, 1.0]);
        assert_relative_eq!(
            pythagorean_defect(&x, &y, 2.0, 0.5, Law::Lwp).unwrap(),
            2f64.powf(4.0 / 3.0) - 1.5,
            max_relative = 1e-14
        );
        let err = pythagorean_defect(&x, &v(1.5, &[1.0, 1.0]), 2.0, 0.5, Law::Lwp).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { violation, .. } if violation > 0.1));
        assert_relative_eq!(pythagorean_constant(2.0, 0.5), 0.5);
    }

    #[test]
    fn one_dimensional_proof_chain() {
        // With u = (|f+g| + |f-g|)/2 and v = (|f+g| - |f-g|)/2 the two-point
        // bound sits below the vector defect.
        let params = Params::new(1.5, 2.5).unwrap();
        let c = 0.777_544_913_543_093;
        for &(a, b) in &[(1.0, 0.3), (-2.0, 0.7), (0.1, 5.0), (3.0, -3.0)] {
            let f = v(1.5, &[a]);
            let g = v(1.5, &[b]);
            let s = (a + b).abs();
            let d = (a - b).abs();
            let (u, w) = ((s + d) / 2.0, (s - d) / 2.0);
            let two = two_point_defect(&params, c, u, w);
            let vec = wp_defect(&f, &g, 2.5, c, Law::Lwp).unwrap();
            assert!(two >= -1e-12);
            assert!(vec >= two - 1e-12 * (s + d).powf(2.5));
        }
    }

    fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, dim)
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(p in 1.01f64..8.0, c in coords(5), s in -20.0f64..20.0) {
            let x = LpVector::new(p, c).unwrap();
            let lhs = x.scale(s).norm();
            prop_assert!((lhs - s.abs() * x.norm()).abs() <= 1e-13 * (1.0 + lhs));
        }

        #[test]
        fn wp_defect_homogeneous(p in 1.01f64..6.0, r in 1.05f64..6.0, c in 0.1f64..3.0,
                                 a in coords(3), b in coords(3), s in 0.01f64..10.0, upper in any::<bool>()) {
            let kind = if upper { Law::Uwp } else { Law::Lwp };
            let x = LpVector::new(p, a).unwrap();
            let y = LpVector::new(p, b).unwrap();
            let base = wp_defect(&x, &y, r, c, kind).unwrap();
            let scaled = wp_defect(&x.scale(s), &y.scale(s), r, c, kind).unwrap();
            let scale = (1.0 + c) * wp_scale(&x.scale(s), &y.scale(s), r) + 1e-300;
            prop_assert!((scaled - s.powf(r) * base).abs() <= 1e-11 * scale);
        }

        #[test]
        fn bj_project_gives_orthogonal_pair(p in 1.1f64..6.0, a in coords(4), b in coords(4)) {
            let x = LpVector::new(p, a).unwrap();
            prop_assume!(x.norm() > 1e-3);
            let z = LpVector::new(p, b).unwrap();
            let y = bj_project(&x, &z).unwrap();
            prop_assert!(bj_violation(&x, &y).unwrap() <= 1e-9 * x.norm());
        }
    }
}
