//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::AbError;

pub type Rational = BigRational;

/// `n / d` as a reduced rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p`, `-p`, or `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational, AbError> {
    let s = s.trim();
    let bad = || AbError::Parse {
        line: 0,
        col: 0,
        msg: format!("invalid rational literal `{s}`"),
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `p/q` rendering, or `p` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Representative of `r mod 1` in the half-open interval `(0, 1]`.
pub fn class_mod_one(r: &Rational) -> Rational {
    let f = r - r.floor();
    if f.is_zero() {
        Rational::one()
    } else {
        f
    }
}

/// True when `r` is a non-negative integer.
pub fn is_nonneg_integer(r: &Rational) -> bool {
    r.is_integer() && !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), rat(3, 2));
        assert_eq!(fmt_rational(&rat(-2, 4)), "-1/2");
        assert_eq!(fmt_rational(&int(3)), "3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn classes() {
        assert_eq!(class_mod_one(&rat(3, 2)), rat(1, 2));
        assert_eq!(class_mod_one(&rat(-1, 3)), rat(2, 3));
        assert_eq!(class_mod_one(&int(2)), int(1));
    }
}
