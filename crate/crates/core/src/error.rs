use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{MacKind, Violation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("profile `{profile}` is {actual:?}-kind, expected {expected:?}")]
    WrongKind {
        profile: String,
        expected: MacKind,
        actual: MacKind,
    },

    #[error("literal expected-delay construction is only defined for BE = 3 (got {be})")]
    UnsupportedBe { be: u8 },

    #[error(
        "literal expected-delay denominator vanishes for {num_devices} device(s) at BE = {be}"
    )]
    DegenerateLiteral { be: u8, num_devices: u32 },

    #[error("exact contention enumeration needs {states} states (limit {limit})")]
    IntractableEnumeration { states: u128, limit: u128 },

    #[error("no samples to summarize")]
    EmptySamples,

    #[error("analytic report has {analytic} hop(s) but simulation has {simulated}")]
    ShapeMismatch { analytic: usize, simulated: usize },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter `{param}` cannot take value {value}")]
    TypeMismatch { param: String, value: String },

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("scenario is invalid ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
}
