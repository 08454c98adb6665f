//! Serde adapter for extended reals.
//!
//! JSON has no representation for infinities, so non-finite values are
//! written as the strings `"-inf"`, `"inf"` and `"nan"`. Finite values stay
//! plain numbers. Use with `#[serde(with = "crate::ext_real")]`.

use serde::{de, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_finite() {
        serializer.serialize_f64(*value)
    } else {
        serializer.serialize_str(&format_ext(*value))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(deserializer)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(s) => parse_ext(&s).ok_or_else(|| de::Error::custom(format!("not an extended real: {s:?}"))),
    }
}

/// Text form used in CSV and JSON: `-inf`, `inf`, `nan`, or the shortest
/// round-tripping decimal.
pub fn format_ext(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value == f64::INFINITY {
        "inf".to_string()
    } else if value == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{value}")
    }
}

pub fn parse_ext(text: &str) -> Option<f64> {
    match text.trim() {
        "-inf" => Some(f64::NEG_INFINITY),
        "inf" | "+inf" => Some(f64::INFINITY),
        "nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}
