//! Canonical JSON: keys sorted, floats rounded to 12 significant digits, so
//! parsing the output and serializing it again reproduces the same bytes.

use serde_json::{Map, Value};

/// Significant digits kept for every float in the output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn float(x: f64) -> Value {
    Value::from(round_sig(x))
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

pub fn opt_float(x: Option<f64>) -> Value {
    x.map_or(Value::Null, float)
}

/// Builds an object from `(key, value)` pairs.
pub fn object<I, K>(entries: I) -> Value
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.into(), v))
            .collect::<Map<_, _>>(),
    )
}

/// Compact canonical rendering with a trailing newline.
pub fn render(value: &Value) -> String {
    let mut out = serde_json::to_string(value).expect("JSON values always serialize");
    out.push('\n');
    out
}
