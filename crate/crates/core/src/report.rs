//! Deterministic JSON output: sorted keys and floats rounded to 12 significant digits.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap());
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    normalize(serde_json::to_value(x).expect("serialisable"))
}

pub fn to_string<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(&to_value(x)).expect("serialisable")
}

/// A big integer as a JSON number when it fits in 64 bits, else as a decimal string.
pub fn big(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

pub fn big_vec(xs: &[BigUint]) -> Value {
    Value::Array(xs.iter().map(big).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        let v = normalize(serde_json::json!({"b": 1.0000000000001, "a": [2.0]}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":[2.0],"b":1.0}"#);
    }
}
