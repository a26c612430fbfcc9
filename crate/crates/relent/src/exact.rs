//! Exact rational arithmetic helpers: parsing, formatting and logarithms.
//!
//! Coordinates, distances and thresholds are kept as `BigRational` throughout
//! so that every comparison the detectors make is exact. Floating point only
//! appears when a report converts a certified rational enclosure to `f64`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Parse a decimal-or-fraction string into an exact rational.
///
/// Accepted forms: `"3"`, `"-7"`, `"0.25"`, `"-1.5"`, `"7/10"`, `"-3/4"`.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse(s, "empty numeric string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(s, "invalid fraction numerator"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::parse(s, "invalid fraction denominator"))?;
        if d.is_zero() {
            return Err(Error::parse(s, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(s, "invalid decimal fraction part"));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(s, "invalid decimal integer part"));
        }
        let digits = format!("{int_digits}{frac_part}");
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::parse(s, "invalid decimal digits"))?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        let value = BigRational::new(n, d);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| Error::parse(s, "invalid integer"))?;
    Ok(BigRational::from(n))
}

/// Format a rational as `"p"` or `"p/q"`, matching the document schema.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Natural log of a positive big integer, accurate to f64 precision even when
/// the value does not fit in an `f64`.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 52 {
        return (n.to_f64().unwrap()).ln();
    }
    let shift = bits - 52;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(q: &BigRational) -> f64 {
    assert!(q.is_positive(), "ln of non-positive rational");
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    ln_biguint(n) - ln_biguint(d)
}

/// `f64` value of a rational (saturating, used only in reports).
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// True when `q` is the square of a rational; returns that square root.
pub fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(
            BigInt::from(sn),
            BigInt::from(sd),
        ))
    } else {
        None
    }
}

/// Integer power of a rational with a `u32` exponent.
pub fn pow(q: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= q;
    }
    acc
}

/// Greatest common divisor helper re-exported for callers that need it.
pub fn gcd_usize(a: usize, b: usize) -> usize {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_integers_decimals_and_fractions() {
        assert_eq!(q("3"), BigRational::from(BigInt::from(3)));
        assert_eq!(q("-7"), BigRational::from(BigInt::from(-7)));
        assert_eq!(q("0.25"), BigRational::new(BigInt::from(1), BigInt::from(4)));
        assert_eq!(q("-1.5"), BigRational::new(BigInt::from(-3), BigInt::from(2)));
        assert_eq!(q("7/10"), BigRational::new(BigInt::from(7), BigInt::from(10)));
        assert_eq!(q(" 91/400 "), BigRational::new(BigInt::from(91), BigInt::from(400)));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "1/0", "1.2.3", "a", "1/ b", "0x2", "1.", ".5e1"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_round_trip() {
        for s in ["0", "3", "-7", "1/4", "-3/2", "91/400"] {
            assert_eq!(format_rational(&q(s)), s);
        }
        assert_eq!(format_rational(&q("0.25")), "1/4");
    }

    #[test]
    fn big_logarithms() {
        let n = BigUint::from(2u32).pow(200);
        let expected = 200.0 * std::f64::consts::LN_2;
        assert!((ln_biguint(&n) - expected).abs() < 1e-9);
        let r = BigRational::new(BigInt::from(610), BigInt::from(1));
        assert!((ln_rational(&r) - 610f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(exact_sqrt(&q("9/4")), Some(q("3/2")));
        assert_eq!(exact_sqrt(&q("2")), None);
        assert_eq!(exact_sqrt(&q("0")), Some(q("0")));
        assert_eq!(exact_sqrt(&q("-1")), None);
    }
}
