//! Serde adapters writing non-finite floats as the strings `"inf"` / `"-inf"`.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::Deserialize;

struct Wrapped(f64);

impl serde::Serialize for Wrapped {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

impl<'de> Deserialize<'de> for Wrapped {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Wrapped;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }
            fn visit_f64<E>(self, v: f64) -> Result<Wrapped, E> {
                Ok(Wrapped(v))
            }
            fn visit_i64<E>(self, v: i64) -> Result<Wrapped, E> {
                Ok(Wrapped(v as f64))
            }
            fn visit_u64<E>(self, v: u64) -> Result<Wrapped, E> {
                Ok(Wrapped(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Wrapped, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" | "+infinity" => Ok(Wrapped(f64::INFINITY)),
                    "-inf" | "-infinity" => Ok(Wrapped(f64::NEG_INFINITY)),
                    other => other.parse().map(Wrapped).map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub(crate) mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Wrapped(*v), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Wrapped::deserialize(d).map(|w| w.0)
    }
}

pub(crate) mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &x in v {
            seq.serialize_element(&Wrapped(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v: Vec<Wrapped> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct T {
        #[serde(with = "super::vec")]
        v: Vec<f64>,
    }

    #[test]
    fn infinities_round_trip_as_strings() {
        let t = T { v: vec![1.5, f64::INFINITY, f64::NEG_INFINITY, 0.0] };
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"v":[1.5,"inf","-inf",0.0]}"#);
        assert_eq!(serde_json::from_str::<T>(&s).unwrap(), t);
        let u: T = serde_json::from_str(r#"{"v":[3, "Infinity"]}"#).unwrap();
        assert_eq!(u.v, vec![3.0, f64::INFINITY]);
    }
}
