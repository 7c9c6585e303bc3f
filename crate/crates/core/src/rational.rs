//! Exact rational numbers and their text renderings.
//!
//! Every probability in the crate is an exact fraction. Machine formats write
//! them as `num/den`; human formats use a 12-significant-digit decimal.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact probability / coefficient type used throughout the crate.
pub type Rational = Ratio<i128>;

/// Number of significant digits used by [`to_decimal`].
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal {0:?} (expected \"num/den\")")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Shorthand constructor; panics on a zero denominator.
pub fn ratio(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(text.to_string());
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| invalid())?;
            let d: i128 = d.trim().parse().map_err(|_| invalid())?;
            if d == 0 {
                return Err(ParseRationalError::ZeroDenominator(text.to_string()));
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: i128 = text.parse().map_err(|_| invalid())?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Renders as `num/den` in lowest terms (integers keep the `/1`).
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with [`DECIMAL_DIGITS`] significant digits, trailing
/// zeros trimmed.
pub fn to_decimal(value: &Rational) -> String {
    decimal_with_digits(to_f64(value), DECIMAL_DIGITS)
}

pub(crate) fn decimal_with_digits(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// True iff `0 <= value <= 1`.
pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("1").unwrap(), one());
        assert_eq!(parse_rational("-3/9").unwrap(), ratio(-1, 3));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_rational(""), Err(ParseRationalError::Empty));
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_rational("0.5"),
            Err(ParseRationalError::Invalid(_))
        ));
        assert!(matches!(
            parse_rational("a/b"),
            Err(ParseRationalError::Invalid(_))
        ));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(1, 12)), "0.0833333333333");
        assert_eq!(to_decimal(&ratio(1, 2)), "0.5");
        assert_eq!(to_decimal(&zero()), "0");
        assert_eq!(to_decimal(&one()), "1");
        assert_eq!(to_decimal(&ratio(2, 3)), "0.666666666667");
        assert_eq!(format_rational(&ratio(4, 8)), "1/2");
        assert_eq!(format_rational(&one()), "1/1");
    }
}
