//! Polynomial file format.
//!
//! A JSON document with the variable count, the degree and a list of
//! `[exponents, coefficient]` pairs. Coefficients are strings: either a
//! decimal literal (`"-0.25"`, `"3e-2"`) or an exact fraction (`"-1/5"`).
//!
//! ```json
//! { "n": 3, "degree": 4, "terms": [[[4, 0, 0], "1"], [[2, 2, 0], "-1/5"]] }
//! ```

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::form::{Form, RationalForm};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFile {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<(Vec<u32>, String)>,
}

impl PolyFile {
    pub fn from_rational(f: &RationalForm) -> Self {
        Self {
            n: f.n(),
            degree: f.degree(),
            terms: f
                .terms()
                .into_iter()
                .map(|(e, c)| (e.entries().to_vec(), format_rational(&c)))
                .collect(),
        }
    }

    /// Shortest round-trip decimal for each coefficient.
    pub fn from_f64(f: &Form<f64>) -> Self {
        Self {
            n: f.n(),
            degree: f.degree(),
            terms: f
                .terms()
                .into_iter()
                .map(|(e, c)| (e.entries().to_vec(), format!("{c:?}")))
                .collect(),
        }
    }

    pub fn to_rational(&self) -> Result<RationalForm> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((e.clone(), parse_rational(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Form::from_terms(self.n, self.degree, &terms).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_f64(&self) -> Result<Form<f64>> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| Ok((e.clone(), parse_f64(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Form::from_terms(self.n, self.degree, &terms).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("poly file serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad coefficient {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Ok(if negative { -value } else { value })
}

fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.contains('/') {
        return Ok(parse_rational(t)?.to_float());
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("bad coefficient {s:?}")))
}

/// Relative size of a rational, for diagnostics.
pub fn rational_abs_f64(r: &Rational) -> f64 {
    r.abs().to_float()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("-1/5").unwrap(), rational(-1, 5));
        assert_eq!(parse_rational("0.2").unwrap(), rational(1, 5));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), rational(-1, 4));
        assert_eq!(parse_rational("3E2").unwrap(), rational(300, 1));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn exact_round_trip() {
        let text = r#"{ "n": 3, "degree": 4, "terms": [[[4,0,0], "1"], [[2,2,0], "-1/5"], [[0,0,4], "0.125"]] }"#;
        let f = PolyFile::from_json(text).unwrap().to_rational().unwrap();
        let back = PolyFile::from_json(&PolyFile::from_rational(&f).to_json())
            .unwrap()
            .to_rational()
            .unwrap();
        assert_eq!(f, back);
        assert_eq!(f.coeff(&[0, 0, 4]), rational(1, 8));
    }

    #[test]
    fn rejects_wrong_degree_terms() {
        let text = r#"{ "n": 2, "degree": 2, "terms": [[[3,0], "1"]] }"#;
        assert!(PolyFile::from_json(text).unwrap().to_rational().is_err());
        assert!(PolyFile::from_json("{ not json").is_err());
    }
}
