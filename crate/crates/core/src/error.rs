use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the admissible domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("(p, r) = ({p}, {r}) is outside the region {region}")]
    OutOfRegion {
        p: f64,
        r: f64,
        region: &'static str,
    },

    #[error("no {law} law holds for L^{p} with r = {r}")]
    LawNotGranted { p: f64, r: f64, law: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("vectors are incompatible: {0}")]
    Incompatible(String),

    #[error("orthogonality precondition violated: violation {violation:e} exceeds tolerance {tolerance:e}")]
    NotOrthogonal { violation: f64, tolerance: f64 },

    #[error("minimization did not converge after {iterations} iterations (t = {t}, bracket width {width:e})")]
    NonConvergence {
        iterations: usize,
        t: f64,
        width: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
