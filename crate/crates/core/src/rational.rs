//! Exact rational scalars and their literal syntax.
//!
//! Every quantity in this crate (endpoints, matrix entries, measures, volumes,
//! functional values) is a [`Rational`]: an arbitrary-precision fraction kept
//! in lowest terms with positive denominator. No floating point enters any
//! computation; `f64` appears only in reporting (decimal rendering, log-log
//! slope fits).
//!
//! The literal syntax accepted by [`parse_rational`] is the one used in all
//! file I/O: an integer (`"3"`), a fraction (`"-7/2"`), or a decimal
//! (`"0.25"`, converted exactly to `1/4`).

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; always in lowest terms, denominator > 0.
pub type Rational = num_rational::BigRational;

/// Shorthand for a small integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics when `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a rational literal: integer, `p/q` fraction, or exact decimal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    // Unicode minus shows up in hand-edited files; accept it.
    let t = t.replace('\u{2212}', "-");
    let bad = || Error::BadRational(s.to_string());

    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }

    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) || int_digits.is_empty() {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let whole: BigInt = int_digits.parse().map_err(|_| bad())?;
        let frac: BigInt = frac_part.parse().map_err(|_| bad())?;
        let numer = whole * &scale + frac;
        let numer = if negative { -numer } else { numer };
        return Ok(Rational::new(numer, scale));
    }

    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Renders `p/q` (or just `p` for integers); the exact-string form used in
/// reports, CSV columns, and config files.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest-`f64` rendering, for slope fits and decimal report columns only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Decimal string with 12 significant digits, the human-readable companion of
/// the exact form in reports.
pub fn format_decimal(r: &Rational) -> String {
    format_sig(to_f64(r), 12)
}

pub(crate) fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.*e}", sig - 1, x)
    }
}

/// `|r|`.
pub fn abs(r: &Rational) -> Rational {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}
