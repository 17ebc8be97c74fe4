//! Serde encoding of extended reals: finite values as JSON numbers, `±∞` as `"inf"` / `"-inf"`
//! and NaN as `"nan"`. Use with `#[serde(with = "crate::extreal")]`.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

pub fn to_text(x: f64) -> Option<&'static str> {
    if x == f64::INFINITY {
        Some("inf")
    } else if x == f64::NEG_INFINITY {
        Some("-inf")
    } else if x.is_nan() {
        Some("nan")
    } else {
        None
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    match to_text(*x) {
        Some(t) => s.serialize_str(t),
        None => s.serialize_f64(*x),
    }
}

struct ExtVisitor;

impl Visitor<'_> for ExtVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        match v {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(ExtVisitor)
}

/// Newtype for use inside containers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ext(pub f64);

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize(d).map(Ext)
    }
}

/// `#[serde(with = "crate::extreal::vec")]` for `Vec<f64>`.
pub mod vec {
    use super::Ext;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Ext> = x.iter().map(|&y| Ext(y)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Ext>::deserialize(d)?.into_iter().map(|e| e.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Row {
        #[serde(with = "crate::extreal")]
        v: f64,
        #[serde(with = "crate::extreal::vec")]
        xs: Vec<f64>,
    }

    #[test]
    fn roundtrip() {
        let r = Row { v: f64::INFINITY, xs: vec![0.1, f64::NEG_INFINITY] };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"v":"inf","xs":[0.1,"-inf"]}"#);
        assert_eq!(serde_json::from_str::<Row>(&s).unwrap(), r);
    }
}
