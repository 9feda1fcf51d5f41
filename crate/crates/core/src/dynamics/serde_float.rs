//! JSON has no encoding for ±∞ or NaN; these map them to tagged strings.

fn encode(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        serde_json::json!("NaN")
    } else if x > 0.0 {
        serde_json::json!("inf")
    } else {
        serde_json::json!("-inf")
    }
}

fn decode<E: serde::de::Error>(v: &serde_json::Value) -> Result<f64, E> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| E::custom("bad number")),
        serde_json::Value::String(s) => s.parse().map_err(|_| E::custom(format!("bad float '{s}'"))),
        serde_json::Value::Null => Ok(f64::NAN),
        other => Err(E::custom(format!("expected a float, got {other}"))),
    }
}

pub mod scalar {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::encode(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::decode(&serde_json::Value::deserialize(d)?)
    }
}

pub mod map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let encoded: BTreeMap<&String, serde_json::Value> = m.iter().map(|(k, v)| (k, super::encode(*v))).collect();
        encoded.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, serde_json::Value>::deserialize(d)?;
        raw.into_iter().map(|(k, v)| Ok((k, super::decode(&v)?))).collect()
    }
}
