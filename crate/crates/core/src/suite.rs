//! Seeded verification runner.
//!
//! Each suite evaluates a family of inequality defects, normalises every
//! defect by a scale of the same homogeneity and records the most negative
//! one. A suite passes when that worst relative defect is at least `-slack`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derived::derived_constants;
use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::params::Params;
use crate::sampling::random_pair;
use crate::scalar::{eval_h, eval_k, BOUNDARY_DELTA};
use crate::solver::{
    classify, minimize_h, optimal_constant, scan_grid, ConstantForm, DualConvention, Law,
    LawClassification, DEFAULT_TOL,
};
use crate::vectors::{
    bj_project, clarkson_defect, extremal_pair, hanner_defect, pythagorean_constant,
    pythagorean_defect, wp_defect, wp_scale, LpVector,
};

pub const DEFAULT_SLACK: f64 = 1e-9;
/// Relative change of a constant that must break the law on the extremal family.
pub const OPTIMALITY_MARGIN: f64 = 1e-3;
/// Points of the uniform `t`-grid used for the extremal supremum.
pub const SUPREMUM_GRID: usize = 10_000;
/// A convention is admissible when its constant is at least `S - ADMISSIBLE_TOL`.
pub const ADMISSIBLE_TOL: f64 = 1e-6;
/// A convention is tight when it exceeds `S` by at most this relative amount.
pub const TIGHT_TOL: f64 = 1e-4;

const WP_DOMAIN: u64 = 1;
const HANNER_DOMAIN: u64 = 2;
const CLARKSON_DOMAIN: u64 = 3;
const PYTHAGOREAN_DOMAIN: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteConfig {
    pub p: f64,
    pub r: f64,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub slack: f64,
    /// Replaces the optimal constant of every granted law.
    pub constant: Option<f64>,
}

impl SuiteConfig {
    pub fn new(p: f64, r: f64, dim: usize, samples: usize, seed: u64) -> Self {
        Self {
            p,
            r,
            dim,
            samples,
            seed,
            slack: DEFAULT_SLACK,
            constant: None,
        }
    }

    pub fn validate(&self) -> Result<Params> {
        let params = Params::new(self.p, self.r)?;
        if self.dim == 0 {
            return Err(Error::Domain {
                name: "dim",
                value: 0.0,
                domain: "dim >= 1",
            });
        }
        if self.samples == 0 {
            return Err(Error::Domain {
                name: "samples",
                value: 0.0,
                domain: "samples >= 1",
            });
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::Domain {
                name: "slack",
                value: self.slack,
                domain: "[0, inf)",
            });
        }
        if let Some(c) = self.constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Domain {
                    name: "constant",
                    value: c,
                    domain: "(0, inf)",
                });
            }
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Witness {
    fn pair(label: &str, x: &LpVector, y: &LpVector) -> Self {
        Self {
            label: label.to_string(),
            x: x.coords().to_vec(),
            y: y.coords().to_vec(),
        }
    }

    fn scalar(label: &str, x: Vec<f64>) -> Self {
        Self {
            label: label.to_string(),
            x,
            y: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteResult {
    pub name: String,
    pub pairs_tested: u64,
    /// Most negative defect divided by its scale; absent when nothing was tested.
    pub worst_defect: Option<f64>,
    pub worst_witness: Option<Witness>,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DualityTight,
    PaperTight,
    BothTight,
    NeitherTight,
    /// Some convention falls below the extremal supremum.
    Inadmissible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConventionCheck {
    pub convention: DualConvention,
    pub value: f64,
    /// `value - extremalSupremum`.
    pub gap: f64,
    pub admissible: bool,
    pub tight: bool,
}

/// Comparison of the two dual-power constants with the supremum of the
/// extremal required constant, which every admissible upper-law constant
/// must reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Adjudication {
    pub base_p: f64,
    pub base_r: f64,
    pub base_value: f64,
    pub paper: ConventionCheck,
    pub duality: ConventionCheck,
    pub extremal_supremum: f64,
    pub supremum_t: f64,
    pub grid_points: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub classification: LawClassification,
    pub suites: Vec<SuiteResult>,
    pub adjudication: Option<Adjudication>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// Running minimum of relative defects; the first of equal minima is kept.
#[derive(Default)]
struct Worst {
    count: u64,
    defect: Option<f64>,
    witness: Option<Witness>,
}

impl Worst {
    fn observe(&mut self, defect: f64, witness: impl FnOnce() -> Witness) {
        self.count += 1;
        if self.defect.is_none_or(|w| defect < w) {
            self.defect = Some(defect);
            self.witness = Some(witness());
        }
    }

    fn merge(&mut self, other: Worst) {
        let count = self.count + other.count;
        if let (Some(d), Some(w)) = (other.defect, other.witness) {
            self.observe(d, || w);
        }
        self.count = count;
    }

    fn finish(self, name: &str, slack: f64, note: Option<String>) -> SuiteResult {
        SuiteResult {
            name: name.to_string(),
            pairs_tested: self.count,
            worst_defect: self.defect,
            passed: self.defect.is_none_or(|d| d >= -slack),
            worst_witness: self.witness,
            note,
        }
    }
}

fn relative(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// Evaluates `f` on every sample index in parallel, then folds the results
/// in index order so that the outcome is independent of scheduling.
fn sampled<F>(worst: &mut Worst, samples: usize, f: F) -> Result<()>
where
    F: Fn(u64) -> Result<Option<(f64, Witness)>> + Sync,
{
    let results: Vec<Result<Option<(f64, Witness)>>> =
        (0..samples as u64).into_par_iter().map(&f).collect();
    for res in results {
        if let Some((d, w)) = res? {
            worst.observe(d, || w);
        }
    }
    Ok(())
}

fn granted_laws(class: &LawClassification) -> Vec<Law> {
    [Law::Lwp, Law::Uwp]
        .into_iter()
        .filter(|&law| class.entry(law).is_some())
        .collect()
}

/// The constant under test for `law`: the override when given, otherwise the
/// optimal constant. The upper dual-power region uses the duality convention,
/// which is the tight one.
fn law_constant(cfg: &SuiteConfig, law: Law) -> Result<f64> {
    match cfg.constant {
        Some(c) => Ok(c),
        None => Ok(optimal_constant(cfg.p, cfg.r, law, DualConvention::Duality)?.value),
    }
}

fn scalar_suite(
    cfg: &SuiteConfig,
    params: &Params,
    class: &LawClassification,
) -> Result<SuiteResult> {
    let (p, r) = (params.p(), params.r());
    let mut worst = Worst::default();
    let lead = |t: f64| 2f64.powf(r / params.q()) * (1.0 + t.abs().powf(p)).powf(r / p);

    let c = match class.entry(Law::Lwp).map(|e| e.form) {
        Some(ConstantForm::MinimizedH { .. }) => Some(minimize_h(p, r, DEFAULT_TOL)?.value),
        _ => None,
    };
    let k_const = c.unwrap_or(1.0);

    let n = 2001;
    for i in 0..n {
        let t = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
        let k = eval_k(params, k_const, t);
        if c.is_some() {
            worst.observe(relative(k, lead(t)), || {
                Witness::scalar("k(t) >= 0", vec![t])
            });
        }
        let even = k - eval_k(params, k_const, t.abs());
        worst.observe(relative(even, lead(t)), || {
            Witness::scalar("k(t) >= k(|t|)", vec![t])
        });
        if t > 0.0 {
            let sym = (k - t.powf(r) * eval_k(params, k_const, 1.0 / t)).abs();
            worst.observe(-sym / (1.0 + t).powf(r), || {
                Witness::scalar("k(t) = |t|^r k(1/t)", vec![t])
            });
        }
    }

    if params.in_minimized_region() {
        let grid = scan_grid(2000);
        for &t in &grid {
            let h = eval_h(params, t)?;
            worst.observe(h, || Witness::scalar("h(t) > 0", vec![t]));
        }
        let q = params.q();
        let rs: Vec<f64> = (0..5).map(|i| 2.0 + (q - 2.0) * i as f64 / 4.0).collect();
        for pair in rs.windows(2) {
            let (lo, hi) = (Params::new(p, pair[0])?, Params::new(p, pair[1])?);
            for &t in grid.iter().step_by(20) {
                let (a, b) = (eval_h(&lo, t)?, eval_h(&hi, t)?);
                worst.observe((b - a) / a.abs().max(1.0), || {
                    Witness::scalar("h nondecreasing in r", vec![t, pair[0], pair[1]])
                });
            }
        }
    }
    let note = c.map(|c| format!("C = {}", fmt_f64(c)));
    Ok(worst.finish("scalar", cfg.slack, note))
}

fn wp_suite(cfg: &SuiteConfig, class: &LawClassification) -> Result<SuiteResult> {
    let mut worst = Worst::default();
    let laws = granted_laws(class);
    for &law in &laws {
        let c = law_constant(cfg, law)?;
        sampled(&mut worst, cfg.samples, |i| {
            let (x, y) = random_pair(cfg.seed, WP_DOMAIN, i, cfg.p, cfg.dim);
            let scale = wp_scale(&x, &y, cfg.r);
            if scale == 0.0 {
                return Ok(None);
            }
            let d = wp_defect(&x, &y, cfg.r, c, law)?;
            Ok(Some((d / scale, Witness::pair(law.as_str(), &x, &y))))
        })?;
    }
    let note = laws
        .is_empty()
        .then(|| "no weak parallelogram law at (p, r)".to_string());
    Ok(worst.finish("weak-parallelogram", cfg.slack, note))
}

fn hanner_suite(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let mut worst = Worst::default();
    if cfg.p > 2.0 {
        return Ok(worst.finish("hanner", cfg.slack, Some("p > 2: not applicable".into())));
    }
    sampled(&mut worst, cfg.samples, |i| {
        let (f, g) = random_pair(cfg.seed, HANNER_DOMAIN, i, cfg.p, cfg.dim);
        let scale = wp_scale(&f, &g, cfg.p);
        if scale == 0.0 {
            return Ok(None);
        }
        Ok(Some((
            hanner_defect(&f, &g)? / scale,
            Witness::pair("hanner", &f, &g),
        )))
    })?;
    Ok(worst.finish("hanner", cfg.slack, None))
}

fn clarkson_suite(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let mut worst = Worst::default();
    let label = if cfg.p <= 2.0 {
        "clarkson uwp"
    } else {
        "clarkson lwp"
    };
    sampled(&mut worst, cfg.samples, |i| {
        let (f, g) = random_pair(cfg.seed, CLARKSON_DOMAIN, i, cfg.p, cfg.dim);
        let scale = wp_scale(&f, &g, cfg.p);
        if scale == 0.0 {
            return Ok(None);
        }
        Ok(Some((
            clarkson_defect(&f, &g)? / scale,
            Witness::pair(label, &f, &g),
        )))
    })?;
    Ok(worst.finish("clarkson", cfg.slack, None))
}

fn pythagorean_suite(cfg: &SuiteConfig, class: &LawClassification) -> Result<SuiteResult> {
    let mut worst = Worst::default();
    let laws = granted_laws(class);
    let mut notes = Vec::new();
    for &law in &laws {
        let k = pythagorean_constant(cfg.r, law_constant(cfg, law)?);
        notes.push(format!("{law}: K = {}", fmt_f64(k)));
        sampled(&mut worst, cfg.samples, |i| {
            let (x, z) = random_pair(cfg.seed, PYTHAGOREAN_DOMAIN, i, cfg.p, cfg.dim);
            if x.is_zero() {
                return Ok(None);
            }
            let y = bj_project(&x, &z)?;
            let lhs = x.add(&y)?.norm().powf(cfg.r);
            let rhs = x.norm().powf(cfg.r) + k * y.norm().powf(cfg.r);
            let d = pythagorean_defect(&x, &y, cfg.r, k, law)?;
            Ok(Some((
                relative(d, lhs.max(rhs)),
                Witness::pair(law.as_str(), &x, &y),
            )))
        })?;
    }
    let note = if laws.is_empty() {
        Some("no weak parallelogram law at (p, r)".to_string())
    } else {
        Some(notes.join("; "))
    };
    Ok(worst.finish("pythagorean", cfg.slack, note))
}

/// Defects of the law on the extremal pairs over `grid` and on the antipodal
/// pair `(e0, -e0)`, relative to `wp_scale`.
fn extremal_scan(p: f64, r: f64, c: f64, law: Law, grid: &[f64]) -> Result<Worst> {
    let mut worst = Worst::default();
    let e0 = LpVector::basis(p, 2, 0)?;
    let anti = e0.neg();
    let d = wp_defect(&e0, &anti, r, c, law)?;
    worst.observe(d / wp_scale(&e0, &anti, r), || {
        Witness::pair("antipodal", &e0, &anti)
    });
    for &t in grid {
        let (a, b) = extremal_pair(t, p, 2)?;
        let d = wp_defect(&a, &b, r, c, law)?;
        worst.observe(d / wp_scale(&a, &b, r), || {
            Witness::pair("extremal", &a, &b)
        });
    }
    Ok(worst)
}

fn optimality_suite(cfg: &SuiteConfig, class: &LawClassification) -> Result<SuiteResult> {
    let laws = granted_laws(class);
    let grid = scan_grid(SUPREMUM_GRID);
    let mut worst = Worst::default();
    let mut notes = Vec::new();
    let mut tight = true;
    for &law in &laws {
        let c = law_constant(cfg, law)?;
        let scan = extremal_scan(cfg.p, cfg.r, c, law, &grid)?;
        worst.merge(scan);
        let perturbed = match law {
            Law::Lwp => c * (1.0 + OPTIMALITY_MARGIN),
            Law::Uwp => c * (1.0 - OPTIMALITY_MARGIN),
        };
        let probe = extremal_scan(cfg.p, cfg.r, perturbed, law, &grid)?;
        let broken = probe.defect.is_some_and(|d| d < 0.0);
        tight &= broken;
        notes.push(format!(
            "{law}: C = {}, perturbed C = {} {}",
            fmt_f64(c),
            fmt_f64(perturbed),
            if broken {
                "violated (tight)"
            } else {
                "not violated"
            }
        ));
    }
    if laws.is_empty() {
        notes.push("no weak parallelogram law at (p, r)".into());
    }
    let mut res = worst.finish("optimality", cfg.slack, Some(notes.join("; ")));
    res.passed &= tight;
    Ok(res)
}

/// Supremum of `h` over `points` uniform abscissae on `[0, 1 - BOUNDARY_DELTA]`.
pub fn extremal_supremum(p: f64, r: f64, points: usize) -> Result<(f64, f64)> {
    let params = Params::new(p, r)?;
    let top = 1.0 - BOUNDARY_DELTA;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..points {
        let t = top * i as f64 / (points - 1) as f64;
        let h = eval_h(&params, t)?;
        if h > best.0 {
            best = (h, t);
        }
    }
    Ok(best)
}

/// Adjudicates the dual-power conventions at `(p, r)`; `None` outside that region.
pub fn adjudicate(p: f64, r: f64) -> Result<Option<Adjudication>> {
    let class = classify(p, r)?;
    if !matches!(
        class.uwp.as_ref().map(|e| e.form),
        Some(ConstantForm::DualPower { .. })
    ) {
        return Ok(None);
    }
    let res = optimal_constant(p, r, Law::Uwp, DualConvention::Paper)?;
    let dual = res.dual.expect("dual-power results carry their base");
    let (s, s_t) = extremal_supremum(p, r, SUPREMUM_GRID)?;
    let check = |convention, value: f64| ConventionCheck {
        convention,
        value,
        gap: value - s,
        admissible: value >= s - ADMISSIBLE_TOL,
        tight: value >= s - ADMISSIBLE_TOL && value - s <= TIGHT_TOL * s,
    };
    let paper = check(DualConvention::Paper, dual.paper_value);
    let duality = check(DualConvention::Duality, dual.duality_value);
    let verdict = match (
        paper.admissible && duality.admissible,
        paper.tight,
        duality.tight,
    ) {
        (false, _, _) => Verdict::Inadmissible,
        (true, true, true) => Verdict::BothTight,
        (true, true, false) => Verdict::PaperTight,
        (true, false, true) => Verdict::DualityTight,
        (true, false, false) => Verdict::NeitherTight,
    };
    Ok(Some(Adjudication {
        base_p: dual.base_p,
        base_r: dual.base_r,
        base_value: dual.base_value,
        paper,
        duality,
        extremal_supremum: s,
        supremum_t: s_t,
        grid_points: SUPREMUM_GRID,
        verdict,
    }))
}

fn adjudication_suite(cfg: &SuiteConfig, adj: Option<&Adjudication>) -> SuiteResult {
    let mut worst = Worst::default();
    let Some(adj) = adj else {
        return worst.finish(
            "dual-adjudication",
            cfg.slack,
            Some("not a dual-power point".into()),
        );
    };
    let s = adj.extremal_supremum;
    for check in [adj.paper, adj.duality] {
        worst.observe(check.gap / s, || {
            Witness::scalar(
                check.convention.as_str(),
                vec![adj.supremum_t, check.value, s],
            )
        });
    }
    worst.count = adj.grid_points as u64;
    let mut res = worst.finish(
        "dual-adjudication",
        cfg.slack,
        Some(format!(
            "S = {}, paper gap = {}, duality gap = {}",
            fmt_f64(s),
            fmt_f64(adj.paper.gap),
            fmt_f64(adj.duality.gap)
        )),
    );
    res.passed = adj.paper.admissible && adj.duality.admissible;
    res
}

fn derived_suite(cfg: &SuiteConfig) -> Result<SuiteResult> {
    let rep = derived_constants(cfg.p, cfg.dim.max(2), cfg.samples, cfg.seed)?;
    let margin = rep.worst_margin();
    Ok(SuiteResult {
        name: "derived-consistency".into(),
        pairs_tested: 2 * cfg.samples as u64,
        worst_defect: margin.is_finite().then_some(margin),
        worst_witness: None,
        passed: rep.consistent(),
        note: Some(format!(
            "njEstimate = {} <= {}, jamesEstimate = {}",
            fmt_f64(rep.nj_estimate),
            fmt_f64(rep.nj_upper_bound),
            fmt_f64(rep.james_estimate)
        )),
    })
}

/// Runs every suite in order and assembles the report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let params = cfg.validate()?;
    let class = classify(cfg.p, cfg.r)?;
    let adjudication = adjudicate(cfg.p, cfg.r)?;
    let suites = vec![
        scalar_suite(cfg, &params, &class)?,
        wp_suite(cfg, &class)?,
        hanner_suite(cfg)?,
        clarkson_suite(cfg)?,
        pythagorean_suite(cfg, &class)?,
        optimality_suite(cfg, &class)?,
        adjudication_suite(cfg, adjudication.as_ref()),
        derived_suite(cfg)?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerificationReport {
        config: *cfg,
        classification: class,
        suites,
        adjudication,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lwp_point_passes_everything() {
        let rep = run_suite(&SuiteConfig::new(1.5, 2.5, 4, 2_000, 42)).unwrap();
        for s in &rep.suites {
            assert!(s.passed, "{s:?}");
        }
        assert!(rep.passed);
        assert!(rep.adjudication.is_none());
    }

    #[test]
    fn inflated_constant_fails_optimality() {
        let cfg = SuiteConfig {
            constant: Some(0.79),
            ..SuiteConfig::new(1.5, 2.5, 4, 500, 42)
        };
        let rep = run_suite(&cfg).unwrap();
        let opt = rep.suite("optimality").unwrap();
        assert!(!opt.passed);
        assert!(opt.worst_defect.unwrap() < 0.0);
        assert_eq!(opt.worst_witness.as_ref().unwrap().label, "extremal");
        assert!(!rep.passed);
    }

    #[test]
    fn hilbert_defects_vanish() {
        let rep = run_suite(&SuiteConfig::new(2.0, 2.0, 3, 1_000, 9)).unwrap();
        assert!(rep.passed, "{rep:?}");
        for name in ["weak-parallelogram", "hanner", "clarkson", "pythagorean"] {
            let d = rep.suite(name).unwrap().worst_defect.unwrap();
            assert!(d.abs() < 1e-12, "{name}: {d}");
        }
    }

    #[test]
    fn dual_point_adjudicates() {
        let rep = run_suite(&SuiteConfig::new(2.5, 1.75, 3, 1_000, 1)).unwrap();
        assert!(rep.passed, "{rep:?}");
        let adj = rep.adjudication.unwrap();
        assert!((adj.extremal_supremum - 1.0748).abs() < 1e-3);
        assert_eq!(adj.verdict, Verdict::DualityTight);
    }

    #[test]
    fn no_law_point_still_runs() {
        let rep = run_suite(&SuiteConfig::new(1.5, 1.8, 2, 200, 3)).unwrap();
        let wp = rep.suite("weak-parallelogram").unwrap();
        assert_eq!(wp.pairs_tested, 0);
        assert!(wp.passed);
    }

    #[test]
    fn report_is_deterministic_across_pools() {
        let cfg = SuiteConfig::new(1.75, 2.2, 3, 800, 5);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_suite(&cfg)).unwrap();
        let b = four.install(|| run_suite(&cfg)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn rejects_bad_config() {
        assert!(run_suite(&SuiteConfig::new(1.5, 2.5, 0, 10, 0)).is_err());
        assert!(run_suite(&SuiteConfig::new(1.5, 2.5, 2, 0, 0)).is_err());
        assert!(run_suite(&SuiteConfig::new(0.5, 2.5, 2, 10, 0)).is_err());
    }
}
