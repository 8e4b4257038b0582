//! JSON and CSV emitters, the `h` curve and the constant table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::eval_h;
use crate::solver::{
    classify, constant_bounds, optimal_constant_tol, ConstantResult, DualConvention, Law,
};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize to JSON")
}

/// Writes a header line followed by one line per row.
pub fn csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `points` equally spaced samples `(t, h(t))` on `[0, t_max]`.
pub fn curve(p: f64, r: f64, points: usize, t_max: f64) -> Result<Vec<(f64, f64)>> {
    let params = Params::new(p, r)?;
    if points < 2 {
        return Err(Error::Domain {
            name: "points",
            value: points as f64,
            domain: "points >= 2",
        });
    }
    if !(t_max > 0.0 && t_max < 1.0) {
        return Err(Error::Domain {
            name: "t-max",
            value: t_max,
            domain: "(0, 1)",
        });
    }
    (0..points)
        .map(|i| {
            let t = t_max * i as f64 / (points - 1) as f64;
            Ok((t, eval_h(&params, t)?))
        })
        .collect()
}

pub fn curve_csv(rows: &[(f64, f64)]) -> String {
    csv(
        &["t", "h"],
        rows.iter().map(|&(t, h)| vec![fmt_f64(t), fmt_f64(h)]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub r: f64,
    pub law: Option<Law>,
    pub constant: Option<f64>,
    pub argmin_t: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Optimal constants for `steps` values of `r` spread evenly over
/// `[r_min, r_max]`. Each row uses the lower law where it is granted and the
/// upper law otherwise; rows with no law carry empty fields.
pub fn table(
    p: f64,
    r_min: f64,
    r_max: f64,
    steps: usize,
    convention: DualConvention,
) -> Result<Vec<TableRow>> {
    Params::new(p, r_min)?;
    Params::new(p, r_max)?;
    if steps == 0 {
        return Err(Error::Domain {
            name: "steps",
            value: 0.0,
            domain: "steps >= 1",
        });
    }
    if r_max < r_min {
        return Err(Error::Domain {
            name: "r-max",
            value: r_max,
            domain: "r-max >= r-min",
        });
    }
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let r = if steps == 1 {
            r_min
        } else if i == steps - 1 {
            r_max
        } else {
            r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64
        };
        let class = classify(p, r)?;
        let law = if class.lwp.is_some() {
            Some(Law::Lwp)
        } else if class.uwp.is_some() {
            Some(Law::Uwp)
        } else {
            None
        };
        let mut row = TableRow {
            r,
            law,
            constant: None,
            argmin_t: None,
            lower: None,
            upper: None,
        };
        if let Some(law) = law {
            let res = optimal_constant_tol(p, r, law, convention, crate::solver::DEFAULT_TOL)?;
            row.constant = Some(res.value);
            row.argmin_t = res.argmin_t;
            let (lo, hi) = match constant_bounds(p, r) {
                Ok(b) if law == Law::Lwp => b,
                _ => (res.lower_bound, res.upper_bound),
            };
            row.lower = Some(lo);
            row.upper = Some(hi);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn table_csv(rows: &[TableRow]) -> String {
    csv(
        &["r", "constant", "argminT", "lower", "upper"],
        rows.iter().map(|row| {
            vec![
                fmt_f64(row.r),
                fmt_opt(row.constant),
                fmt_opt(row.argmin_t),
                fmt_opt(row.lower),
                fmt_opt(row.upper),
            ]
        }),
    )
}

/// The `constant` subcommand's record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantReport {
    pub p: f64,
    pub r: f64,
    pub q: f64,
    pub r_prime: f64,
    pub law: Law,
    pub convention: DualConvention,
    #[serde(flatten)]
    pub result: ConstantResult,
}

impl ConstantReport {
    pub fn new(
        params: &Params,
        law: Law,
        convention: DualConvention,
        result: ConstantResult,
    ) -> Self {
        Self {
            p: params.p(),
            r: params.r(),
            q: params.q(),
            r_prime: params.r_prime(),
            law,
            convention,
            result,
        }
    }

    /// Two aligned columns, one field per line.
    pub fn to_text(&self) -> String {
        let res = &self.result;
        let mut fields = vec![
            ("p", fmt_f64(self.p)),
            ("r", fmt_f64(self.r)),
            ("q", fmt_f64(self.q)),
            ("rPrime", fmt_f64(self.r_prime)),
            ("law", self.law.to_string()),
            ("convention", self.convention.as_str().to_string()),
            ("value", fmt_f64(res.value)),
            (
                "argminT",
                res.argmin_t.map(fmt_f64).unwrap_or_else(|| "-".into()),
            ),
            ("lowerBound", fmt_f64(res.lower_bound)),
            ("upperBound", fmt_f64(res.upper_bound)),
            ("method", res.method.as_str().to_string()),
            ("iterations", res.iterations.to_string()),
            ("achievedTol", fmt_f64(res.achieved_tol)),
        ];
        if let Some(d) = &res.dual {
            fields.push(("baseP", fmt_f64(d.base_p)));
            fields.push(("baseR", fmt_f64(d.base_r)));
            fields.push(("baseValue", fmt_f64(d.base_value)));
            fields.push(("paperValue", fmt_f64(d.paper_value)));
            fields.push(("dualityValue", fmt_f64(d.duality_value)));
        }
        aligned(&fields)
    }
}

pub fn aligned(fields: &[(&str, String)]) -> String {
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in fields {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
