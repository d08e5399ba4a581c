use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlError {
    #[error("invalid piecewise-linear function: {0}")]
    Invalid(String),
    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("domain mismatch: [{0}, {1}] vs [{2}, {3}]")]
    DomainMismatch(f64, f64, f64, f64),
    #[error("empty or inverted interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("interval [{lo}, {hi}] is not contained in the domain [{dom_lo}, {dom_hi}]")]
    IntervalOutsideDomain { lo: f64, hi: f64, dom_lo: f64, dom_hi: f64 },
    #[error("this check requires the unit domain [0, 1], got [{0}, {1}]")]
    UnitDomainRequired(f64, f64),
    #[error("malformed record field `{field}`: {reason}")]
    Record { field: String, reason: String },
}

pub type Result<T, E = PlError> = std::result::Result<T, E>;
