use thiserror::Error;

/// Rejected parameter sets. Every variant names the violated precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("t_star requires ell/s >= 1 (got ell/s = {ratio})")]
    LevelBelowDrift { ratio: f64 },
    #[error("estimator {estimator} requires {requirement}")]
    IncompatibleMode {
        estimator: &'static str,
        requirement: &'static str,
    },
    #[error("noise and delay cannot both be active (epsilon = {epsilon}, delay = {delay})")]
    MixedChannel { epsilon: f64, delay: u64 },
    #[error("a horizon cap must be given explicitly when the drift is zero")]
    MissingHorizonCap,
    #[error("sweep is empty")]
    EmptySweep,
    #[error("empty sample")]
    EmptySample,
    #[error("theory constant is zero at {what} = {value}; the ratio is undefined")]
    DegenerateConstant { what: &'static str, value: f64 },
}

pub type Result<T, E = ParamError> = std::result::Result<T, E>;

pub(crate) fn check(
    ok: bool,
    name: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            requirement,
            value,
        })
    }
}
