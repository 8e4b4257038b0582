//! Classification of `(p, r)` into the weak parallelogram law regions of
//! `L^p`, and computation of the optimal constants.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{check_exponent, conjugate, Params};
use crate::scalar::{eval_h, sign_factor_derivative, sign_factor_unchecked, BOUNDARY_DELTA};
use crate::search::{golden_section, safeguarded_newton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Lwp,
    Uwp,
}

impl Law {
    pub fn flip(self) -> Self {
        match self {
            Law::Lwp => Law::Uwp,
            Law::Uwp => Law::Lwp,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Law::Lwp => "lwp",
            Law::Uwp => "uwp",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exponent applied to the base constant `C_{q,r'}` in the dual upper region.
///
/// `Paper` uses `-p/q`; `Duality` uses `-r/r'`, the exponent obtained by
/// dualising the lower law of `L^q` directly. The two agree only at `r = 2 = p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualConvention {
    Paper,
    Duality,
}

impl DualConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            DualConvention::Paper => "paper",
            DualConvention::Duality => "duality",
        }
    }

    /// The (positive) exponent `e` such that the constant is `base^{-e}`.
    pub fn exponent(self, params: &Params) -> f64 {
        match self {
            DualConvention::Paper => params.p() / params.q(),
            DualConvention::Duality => params.r() / params.r_prime(),
        }
    }
}

/// The six regions in which `L^p` satisfies an optimal weak parallelogram law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `1 < p <= 2`, `1 < r <= p`: upper law with constant 1.
    UpperUnitBelowP,
    /// `1 < p <= 2`, `2 <= r <= q`: lower law with constant `C_{p,r}`.
    LowerMinimized,
    /// `1 < p <= 2`, `q <= r`: lower law with constant 1.
    LowerUnitAboveQ,
    /// `p >= 2`, `p <= r`: lower law with constant 1.
    LowerUnitAboveP,
    /// `p >= 2`, `q <= r <= 2`: upper law with a power of `C_{q,r'}`.
    UpperDualPower,
    /// `p >= 2`, `1 < r <= q`: upper law with constant 1.
    UpperUnitBelowQ,
}

impl Region {
    pub fn law(self) -> Law {
        match self {
            Region::UpperUnitBelowP | Region::UpperDualPower | Region::UpperUnitBelowQ => Law::Uwp,
            _ => Law::Lwp,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::UpperUnitBelowP => "upper-unit-below-p",
            Region::LowerMinimized => "lower-minimized",
            Region::LowerUnitAboveQ => "lower-unit-above-q",
            Region::LowerUnitAboveP => "lower-unit-above-p",
            Region::UpperDualPower => "upper-dual-power",
            Region::UpperUnitBelowQ => "upper-unit-below-q",
        }
    }

    fn contains(self, p: f64, r: f64) -> bool {
        let q = conjugate(p);
        match self {
            Region::UpperUnitBelowP => p <= 2.0 && r <= p,
            Region::LowerMinimized => p <= 2.0 && r >= 2.0 && r <= q,
            Region::LowerUnitAboveQ => p <= 2.0 && r >= q,
            Region::LowerUnitAboveP => p >= 2.0 && r >= p,
            Region::UpperDualPower => p >= 2.0 && r >= q && r <= 2.0,
            Region::UpperUnitBelowQ => p >= 2.0 && r <= q,
        }
    }

    fn form(self, p: f64, r: f64) -> ConstantForm {
        match self {
            Region::LowerMinimized => ConstantForm::MinimizedH { p, r },
            Region::UpperDualPower => ConstantForm::DualPower {
                base_p: conjugate(p),
                base_r: conjugate(r),
            },
            _ => ConstantForm::Unit,
        }
    }
}

const ALL_REGIONS: [Region; 6] = [
    Region::UpperUnitBelowP,
    Region::LowerMinimized,
    Region::LowerUnitAboveQ,
    Region::LowerUnitAboveP,
    Region::UpperDualPower,
    Region::UpperUnitBelowQ,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstantForm {
    Unit,
    MinimizedH { p: f64, r: f64 },
    DualPower { base_p: f64, base_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawEntry {
    pub form: ConstantForm,
    pub region: Region,
    /// Further regions sharing this boundary point; they yield the same constant.
    pub also: Vec<Region>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LawClassification {
    pub p: f64,
    pub r: f64,
    pub q: f64,
    pub r_prime: f64,
    pub lwp: Option<LawEntry>,
    pub uwp: Option<LawEntry>,
}

impl LawClassification {
    pub fn entry(&self, law: Law) -> Option<&LawEntry> {
        match law {
            Law::Lwp => self.lwp.as_ref(),
            Law::Uwp => self.uwp.as_ref(),
        }
    }
}

/// Sorts the regions of `law` containing `(p, r)` with unit-constant regions first.
fn matching_regions(p: f64, r: f64, law: Law) -> Option<LawEntry> {
    let mut hits: Vec<Region> = ALL_REGIONS
        .iter()
        .copied()
        .filter(|reg| reg.law() == law && reg.contains(p, r))
        .collect();
    hits.sort_by_key(|reg| !matches!(reg.form(p, r), ConstantForm::Unit));
    let mut iter = hits.into_iter();
    let region = iter.next()?;
    Some(LawEntry {
        form: region.form(p, r),
        region,
        also: iter.collect(),
    })
}

/// Which weak parallelogram laws `L^p` satisfies at law exponent `r`.
///
/// Boundary membership is decided by exact comparison of the supplied values.
pub fn classify(p: f64, r: f64) -> Result<LawClassification> {
    let params = Params::new(p, r)?;
    Ok(LawClassification {
        p,
        r,
        q: params.q(),
        r_prime: params.r_prime(),
        lwp: matching_regions(p, r, Law::Lwp),
        uwp: matching_regions(p, r, Law::Uwp),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    GridGoldenNewton,
    DualPower,
    Unit,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::GridGoldenNewton => "grid-golden-newton",
            Method::DualPower => "dual-power",
            Method::Unit => "unit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualDetail {
    pub base_p: f64,
    pub base_r: f64,
    pub base_value: f64,
    pub convention: DualConvention,
    pub paper_value: f64,
    pub duality_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantResult {
    pub value: f64,
    /// Minimizer of `h`; `1.0` marks a boundary limit.
    pub argmin_t: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub method: Method,
    pub iterations: usize,
    pub achieved_tol: f64,
    pub dual: Option<DualDetail>,
}

impl ConstantResult {
    fn unit() -> Self {
        Self {
            value: 1.0,
            argmin_t: None,
            lower_bound: 1.0,
            upper_bound: 1.0,
            method: Method::Unit,
            iterations: 0,
            achieved_tol: 0.0,
            dual: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    /// Uniform points in the bracketing scan; geometric points near both
    /// endpoints are added on top.
    pub grid_points: usize,
    /// Golden-section stops at this bracket width.
    pub golden_width: f64,
    /// Newton tolerance on `t`.
    pub tol: f64,
    pub newton_steps: usize,
    pub max_iterations: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            grid_points: 4096,
            golden_width: 1e-8,
            tol: 1e-12,
            newton_steps: 20,
            max_iterations: 200,
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;

/// Scan abscissae on `[0, 1 - BOUNDARY_DELTA]`: a uniform grid plus
/// geometric refinements `10^{-j/8}` and `1 - 10^{-j/8}` for `j = 8..=64`.
pub fn scan_grid(points: usize) -> Vec<f64> {
    let top = 1.0 - BOUNDARY_DELTA;
    let n = points.max(2);
    let mut grid: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    for j in 8..=64 {
        let gap = 10f64.powf(-(j as f64) / 8.0);
        grid.push(gap);
        grid.push(1.0 - gap);
    }
    grid.retain(|t| *t <= top);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn region_error(p: f64, r: f64) -> Error {
    Error::OutOfRegion {
        p,
        r,
        region: "1 < p <= 2 <= r <= q",
    }
}

/// Bounds `(p-1)^{r/2} <= C_{p,r} <= 2^{r/q} - 1`.
pub fn constant_bounds(p: f64, r: f64) -> Result<(f64, f64)> {
    let params = Params::new(p, r)?;
    if !params.in_minimized_region() {
        return Err(region_error(p, r));
    }
    let lower = (p - 1.0).powf(r / 2.0);
    let upper = 2f64.powf(r / params.q()) - 1.0;
    Ok((lower, upper))
}

/// `C_{p,r} = inf_{0 <= t < 1} h(t)` for `1 < p <= 2 <= r <= q`.
pub fn minimize_h(p: f64, r: f64, tol: f64) -> Result<ConstantResult> {
    let opts = MinimizeOptions {
        tol,
        ..MinimizeOptions::default()
    };
    minimize_h_with(p, r, &opts)
}

pub fn minimize_h_with(p: f64, r: f64, opts: &MinimizeOptions) -> Result<ConstantResult> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Domain {
            name: "tol",
            value: opts.tol,
            domain: "(0, inf)",
        });
    }
    let params = Params::new(p, r)?;
    let (lower_bound, upper_bound) = constant_bounds(p, r)?;

    if r == 2.0 {
        // The infimum is the boundary limit p - 1.
        return Ok(ConstantResult {
            value: p - 1.0,
            argmin_t: Some(1.0),
            lower_bound,
            upper_bound,
            method: Method::ClosedForm,
            iterations: 0,
            achieved_tol: 0.0,
            dual: None,
        });
    }

    let h = |t: f64| eval_h(&params, t).expect("scan stays inside [0, 1)");
    let grid = scan_grid(opts.grid_points);
    let values: Vec<f64> = grid.iter().map(|&t| h(t)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < values[best] { i } else { best });

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let golden = golden_section(h, lo, hi, opts.golden_width, opts.max_iterations);
    // Improvements inside rounding noise do not displace the smaller abscissa.
    let noise = 4.0 * f64::EPSILON * values[best].abs();
    let (mut t_best, mut v_best) = if golden.value < values[best] - noise
        || (golden.value < values[best] && golden.x < grid[best])
    {
        (golden.x, golden.value)
    } else {
        (grid[best], values[best])
    };
    let mut iterations = golden.iterations;
    let mut achieved_tol = golden.hi - golden.lo;

    let g = |t: f64| sign_factor_unchecked(&params, t);
    let sign_bracket = [(golden.lo, golden.hi), (lo, hi)]
        .into_iter()
        .find(|&(a, b)| a > 0.0 && g(a) < 0.0 && g(b) > 0.0);

    match sign_bracket {
        Some((a, b)) => {
            let root = safeguarded_newton(
                g,
                |t| sign_factor_derivative(&params, t),
                a,
                b,
                golden.x.clamp(a, b),
                opts.tol,
                opts.newton_steps,
            );
            iterations += root.iterations;
            if root.last_step > opts.tol * root.x.abs().max(1.0) && root.hi - root.lo > opts.tol {
                return Err(Error::NonConvergence {
                    iterations,
                    t: root.x,
                    width: root.last_step,
                });
            }
            let v = h(root.x);
            if v <= v_best + 4.0 * f64::EPSILON * v_best.abs() {
                t_best = root.x;
                v_best = v;
            }
            achieved_tol = root.last_step.min(root.hi - root.lo);
        }
        None if t_best == 0.0 => {
            // h'(0) >= 0 (the r = q edge): the minimum sits exactly at t = 0.
            achieved_tol = 0.0;
        }
        None => {}
    }

    if iterations > opts.max_iterations {
        return Err(Error::NonConvergence {
            iterations,
            t: t_best,
            width: achieved_tol,
        });
    }

    Ok(ConstantResult {
        value: v_best,
        argmin_t: Some(t_best),
        lower_bound,
        upper_bound,
        method: Method::GridGoldenNewton,
        iterations,
        achieved_tol,
        dual: None,
    })
}

/// The base parameters `(q, r')` of the dual upper region. `r'` is clamped to
/// the base conjugate when the two differ only by rounding.
fn dual_base(params: &Params) -> Result<Params> {
    let base = params.dual();
    let base_q = base.q();
    let r = if base.r() > base_q && base.r() <= base_q * (1.0 + 1e-12) {
        base_q
    } else {
        base.r()
    };
    Params::new(base.p(), r)
}

/// The optimal constant of the requested law at `(p, r)`.
pub fn optimal_constant(
    p: f64,
    r: f64,
    law: Law,
    convention: DualConvention,
) -> Result<ConstantResult> {
    optimal_constant_tol(p, r, law, convention, DEFAULT_TOL)
}

pub fn optimal_constant_tol(
    p: f64,
    r: f64,
    law: Law,
    convention: DualConvention,
    tol: f64,
) -> Result<ConstantResult> {
    let class = classify(p, r)?;
    let entry = class.entry(law).ok_or(Error::LawNotGranted {
        p,
        r,
        law: law.as_str(),
    })?;
    match entry.form {
        ConstantForm::Unit => Ok(ConstantResult::unit()),
        ConstantForm::MinimizedH { p, r } => minimize_h(p, r, tol),
        ConstantForm::DualPower { .. } => {
            let params = Params::new(p, r)?;
            let base = dual_base(&params)?;
            let inner = minimize_h(base.p(), base.r(), tol)?;
            let paper_value = inner.value.powf(-DualConvention::Paper.exponent(&params));
            let duality_value = inner.value.powf(-DualConvention::Duality.exponent(&params));
            let e = convention.exponent(&params);
            Ok(ConstantResult {
                value: inner.value.powf(-e),
                argmin_t: inner.argmin_t,
                lower_bound: inner.upper_bound.powf(-e),
                upper_bound: inner.lower_bound.powf(-e),
                method: Method::DualPower,
                iterations: inner.iterations,
                achieved_tol: inner.achieved_tol,
                dual: Some(DualDetail {
                    base_p: base.p(),
                    base_r: base.r(),
                    base_value: inner.value,
                    convention,
                    paper_value,
                    duality_value,
                }),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualLaw {
    pub exponent: f64,
    pub law: Law,
    pub constant: f64,
}

/// A space satisfying the `exponent`-law of kind `law` with constant `c` has
/// dual satisfying the conjugate-exponent law of the other kind with constant
/// `c^{-exponent'/exponent}`.
pub fn dual_transform(exponent: f64, law: Law, c: f64) -> Result<DualLaw> {
    check_exponent("exponent", exponent)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain {
            name: "C",
            value: c,
            domain: "(0, inf)",
        });
    }
    let dual_exponent = conjugate(exponent);
    Ok(DualLaw {
        exponent: dual_exponent,
        law: law.flip(),
        constant: c.powf(-dual_exponent / exponent),
    })
}
