//! Shared numeric primitives: exact rationals for weight arithmetic and
//! double-precision complex values for Camacho-Sad indices.

use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::BigRational;
use thiserror::Error;

/// Default absolute tolerance for index checks (reciprocity, residuals).
/// Weights and h-values never use it; those are exact.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Exact rational from a machine integer.
pub fn rational_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational n/d. Panics if d == 0.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn complex_is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumberParseError {
    #[error("empty numeric literal")]
    Empty,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
    #[error("sqrt literal requires a nonnegative argument: `{0}`")]
    NegativeSqrt(String),
}

/// Parse a real literal: a decimal number or `sqrt:N` for an irrational
/// square root (e.g. `sqrt:2`).
pub fn parse_real(s: &str) -> Result<f64, NumberParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(NumberParseError::Empty);
    }
    if let Some(rest) = s.strip_prefix("sqrt:") {
        let v: f64 = rest
            .trim()
            .parse()
            .map_err(|_| NumberParseError::Invalid(s.to_string()))?;
        if v < 0.0 {
            return Err(NumberParseError::NegativeSqrt(s.to_string()));
        }
        return Ok(v.sqrt());
    }
    if let Some(rest) = s.strip_prefix("-sqrt:") {
        let v: f64 = rest
            .trim()
            .parse()
            .map_err(|_| NumberParseError::Invalid(s.to_string()))?;
        if v < 0.0 {
            return Err(NumberParseError::NegativeSqrt(s.to_string()));
        }
        return Ok(-v.sqrt());
    }
    s.parse()
        .map_err(|_| NumberParseError::Invalid(s.to_string()))
}

/// Parse a complex literal: `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, or a real
/// `sqrt:N` form. Whitespace around the sign is accepted.
pub fn parse_complex(s: &str) -> Result<Complex64, NumberParseError> {
    let s: String = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(NumberParseError::Empty);
    }
    if !s.contains('i') {
        return Ok(Complex64::new(parse_real(&s)?, 0.0));
    }
    // Pure imaginary shorthand.
    let imag_only = |body: &str, sign: f64| -> Result<Complex64, NumberParseError> {
        let m = if body.is_empty() {
            1.0
        } else {
            parse_real(body)?
        };
        Ok(Complex64::new(0.0, sign * m))
    };
    let stripped = s.strip_suffix('i').unwrap();
    // Find the sign that splits real and imaginary parts, skipping a leading
    // sign and signs inside exponents (e.g. 1e-3).
    let bytes = stripped.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k] as char;
        if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => {
            let (re_part, im_part) = stripped.split_at(k);
            let sign = if im_part.starts_with('-') { -1.0 } else { 1.0 };
            let body = &im_part[1..];
            let im = if body.is_empty() {
                sign
            } else {
                sign * parse_real(body)?
            };
            Ok(Complex64::new(parse_real(re_part)?, im))
        }
        None => {
            // No split: the whole literal is imaginary ("2i", "-i", "i").
            if let Some(body) = stripped.strip_prefix('-') {
                imag_only(body, -1.0)
            } else {
                imag_only(stripped, 1.0)
            }
        }
    }
}

/// Serialize a complex value as the two-element array `[re, im]`.
pub mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        (z.re, z.im).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
