//! Duration literals.
//!
//! Durations are written as a number with an optional suffix: `s`, `h` or
//! `d` (`"365d"`, `"0.96h"`, `"3600"`). A bare number is seconds. Lengths are
//! always metres and take no suffix.

use serde::Deserialize;

use crate::error::{Error, Result};

pub const HOUR: f64 = 3600.0;
pub const DAY: f64 = 86_400.0;

/// Parses a duration literal into seconds.
pub fn parse_duration(text: &str) -> Result<f64> {
    let text = text.trim();
    let (number, scale) = match text.char_indices().last() {
        Some((i, 's')) => (&text[..i], 1.0),
        Some((i, 'h')) => (&text[..i], HOUR),
        Some((i, 'd')) => (&text[..i], DAY),
        _ => (text, 1.0),
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse duration `{text}`")))?;
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "duration `{text}` must be positive"
        )));
    }
    Ok(value * scale)
}

/// A duration in a config file: seconds as a number, or a literal.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub(crate) enum DurationValue {
    Seconds(f64),
    Text(String),
}

impl DurationValue {
    pub(crate) fn seconds(&self) -> Result<f64> {
        match self {
            DurationValue::Seconds(s) => Ok(*s),
            DurationValue::Text(t) => parse_duration(t),
        }
    }
}
