use thiserror::Error;

/// Errors produced by the operator, kernel, engine and statistics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinexError {
    #[error("parameter `{name}` = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tail fit failed ({n_tail} tail samples): {reason}")]
    Fit { n_tail: usize, reason: String },

    #[error("statistic undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, KinexError>;

/// Checks `lo <= value <= hi` (NaN fails).
pub(crate) fn check_closed(name: &'static str, value: f64, lo: f64, hi: f64, domain: &'static str) -> Result<f64> {
    if value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(KinexError::Domain { name, value, domain })
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    check_closed(name, value, 0.0, 1.0, "[0, 1]")
}
