//! Complex literals of the form `re+imj`.
//!
//! Accepted: `1.5`, `-2j`, `0.3-4e-2j`, `1+j`; `i` is accepted in place of `j`.
//! Plain TOML/JSON numbers are accepted as real entries.

use std::fmt;

use cfweave::hilbert::Scalar;
use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex literal {text:?} (expected e.g. \"1.5-0.25j\")");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Shortest round-trip form of both parts.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

/// A complex entry in a scenario or instance file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CNum(pub Scalar);

impl Serialize for CNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

impl<'de> Deserialize<'de> for CNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = CNum;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a complex literal like \"1-2j\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<CNum, E> {
                Ok(CNum(Complex64::new(x, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<CNum, E> {
                Ok(CNum(Complex64::new(x as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<CNum, E> {
                Ok(CNum(Complex64::new(x as f64, 0.0)))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<CNum, E> {
                parse_complex(s).map(CNum).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}
