//! Exact rational helpers and the high-precision float boundary.
//!
//! Everything that feeds an admissibility decision or a polymer weight stays
//! in [`Rational`]; only the final logarithm/exponential leaves exact
//! arithmetic, through [`Float`] at [`FLOAT_PRECISION`] bits.

use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

pub type Rational = RBig;
pub type Float = FBig<HalfEven, 2>;

/// Binary precision used for logarithms and exponentials.
pub const FLOAT_PRECISION: usize = 256;

pub fn ratio(numerator: i64, denominator: u64) -> Rational {
    assert!(denominator != 0, "zero denominator");
    RBig::from_parts(IBig::from(numerator), UBig::from(denominator))
}

pub fn integer(value: i64) -> Rational {
    RBig::from(IBig::from(value))
}

/// Rational upper bound for e (e < 2.7182818285).
pub fn e_upper() -> Rational {
    ratio(2_718_281_829, 1_000_000_000)
}

/// Rational upper bound for e^4 (e^4 = 54.598... < 54.6).
pub fn e4_upper() -> Rational {
    ratio(546, 10)
}

pub fn pow(base: &Rational, exponent: usize) -> Rational {
    base.pow(exponent as isize)
}

pub fn sum<I: IntoIterator<Item = Rational>>(items: I) -> Rational {
    items.into_iter().fold(Rational::ZERO, |acc, x| acc + x)
}

pub fn product<I: IntoIterator<Item = Rational>>(items: I) -> Rational {
    items.into_iter().fold(Rational::ONE, |acc, x| acc * x)
}

pub fn factorial(n: usize) -> UBig {
    (1..=n).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

pub fn factorial_rational(n: usize) -> Rational {
    RBig::from(factorial(n))
}

pub fn is_negative(value: &Rational) -> bool {
    *value < RBig::ZERO
}

pub fn abs(value: &Rational) -> Rational {
    if is_negative(value) {
        -value.clone()
    } else {
        value.clone()
    }
}

/// Parses `p/q` or a bare integer `p`. Decimal literals are rejected on
/// purpose: every downstream comparison is exact.
pub fn parse_fraction(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("expected a rational literal p/q, got `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let numerator = IBig::from_str(num).map_err(|_| bad())?;
    let denominator = IBig::from_str(den).map_err(|_| bad())?;
    if denominator == IBig::ZERO {
        return Err(Error::Parse(format!("zero denominator in `{text}`")));
    }
    Ok(RBig::from_parts_signed(numerator, denominator))
}

/// Always `p/q`, including `q = 1`, so consumers can parse uniformly.
pub fn fraction_string(value: &Rational) -> String {
    format!("{}/{}", value.numerator(), value.denominator())
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().value()
}

pub fn to_float(value: &Rational) -> Float {
    value.to_float::<HalfEven, 2>(FLOAT_PRECISION).value()
}

pub fn float_from_f64(value: f64) -> Float {
    let exact = Float::try_from(value).expect("finite float");
    exact.with_precision(FLOAT_PRECISION).value()
}

/// Natural log of a positive rational at [`FLOAT_PRECISION`] bits.
pub fn ln(value: &Rational) -> Float {
    assert!(*value > RBig::ZERO, "ln of a non-positive rational");
    to_float(value).ln()
}

/// Decimal rendering with `digits` significant digits, in scientific form.
pub fn decimal_string(value: &Float, digits: usize) -> String {
    let decimal = value.to_decimal().value();
    let rounded = decimal.with_precision(digits).value();
    format_scientific(&rounded.to_string())
}

// dashu prints either plain decimals or `ddd...e+x`/`ddd...E-x`; normalize to
// a single `d.ddd...e±x` layout.
fn format_scientific(raw: &str) -> String {
    let (mantissa, exponent) = match raw.find(['e', 'E']) {
        Some(idx) => (&raw[..idx], raw[idx + 1..].parse::<i64>().unwrap_or(0)),
        None => (raw, 0),
    };
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let leading = digits.chars().take_while(|c| *c == '0').count();
    if leading == digits.len() {
        return "0".to_string();
    }
    let significant = digits[leading..].trim_end_matches('0');
    let point_shift = int_part.len() as i64 - leading as i64 - 1;
    let exp = exponent + point_shift;
    let (head, tail) = significant.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}
