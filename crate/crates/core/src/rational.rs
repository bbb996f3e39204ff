//! Exact rationals.
//!
//! Backed by `num_rational::BigRational`, which keeps values in lowest terms
//! with a positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses a finite decimal (`0.25`, `1`, `.5`) or a fraction `p/q`.
pub fn parse_literal(text: &str) -> Result<Rational, &'static str> {
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_digits(p)?;
        let q = parse_digits(q)?;
        if q.is_zero() {
            return Err("zero denominator");
        }
        return Ok(Rational::new(p, q));
    }
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err("expected a number");
    }
    let whole = if whole.is_empty() {
        BigInt::zero()
    } else {
        parse_digits(whole)?
    };
    if frac.is_empty() {
        if text.ends_with('.') {
            return Err("missing digits after decimal point");
        }
        return Ok(Rational::from_integer(whole));
    }
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let frac = parse_digits(frac)?;
    Ok(Rational::new(whole * &scale + frac, scale))
}

fn parse_digits(s: &str) -> Result<BigInt, &'static str> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err("expected digits");
    }
    s.parse::<BigInt>().map_err(|_| "expected digits")
}

/// Nearest `f64`, robust to numerators and denominators beyond `f64` range.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts down to 1000-ish bits of precision first.
    let shift = r.denom().bits().saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 || !d.is_finite() {
        if r.is_negative() {
            -0.0
        } else {
            0.0
        }
    } else {
        n / d
    }
}
