//! Canonical structured output shared by the CLI and the service.
//!
//! Every number becomes a decimal string so that a document survives
//! round trips through other JSON implementations unchanged. Object keys are
//! sorted and the text ends with a newline.

use serde::Serialize;
use serde_json::{Map, Number, Value};

fn number_text(n: &Number) -> String {
    if let Some(i) = n.as_i64() {
        i.to_string()
    } else if let Some(u) = n.as_u64() {
        u.to_string()
    } else {
        // `Display` for f64 is the shortest text that parses back exactly.
        n.as_f64().map_or_else(|| n.to_string(), |f| f.to_string())
    }
}

/// Replaces every number in `v` by its decimal string.
pub fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => Value::String(number_text(&n)),
        Value::Array(items) => Value::Array(items.into_iter().map(stringify_numbers).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, stringify_numbers(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

pub fn structured<T: Serialize>(value: &T) -> Result<Value, serde_json::Error> {
    serde_json::to_value(value).map(stringify_numbers)
}

pub fn canonical_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(&stringify_numbers(value.clone())).expect("values always serialize");
    text.push('\n');
    text
}

pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    Ok(canonical_text(&serde_json::to_value(value)?))
}
