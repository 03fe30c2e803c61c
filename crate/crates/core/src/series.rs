//! Truncated formal power series in `b` over exact rationals.
//!
//! A `TruncSeries` with precision `p` stores the coefficients of
//! `b^0 .. b^{p-1}`; everything from `b^p` on is unknown. Binary operations
//! return the smaller of the input precisions, so an answer never claims
//! more than the inputs support. Multiplying by an exact power `b^n` is the
//! one operation that gains precision.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{exhausted, AbError, Result};
use crate::scalar::{fmt_rational, parse_rational, Rational};

pub const DEFAULT_PRECISION: usize = 32;

/// Largest precision accepted from external input.
pub const MAX_PRECISION: usize = 4096;

#[derive(Clone, Debug)]
pub struct TruncSeries {
    coeffs: Vec<Rational>,
}

impl TruncSeries {
    pub fn zero(prec: usize) -> Self {
        TruncSeries {
            coeffs: vec![Rational::zero(); prec],
        }
    }

    pub fn one(prec: usize) -> Self {
        Self::constant(Rational::one(), prec)
    }

    pub fn constant(c: Rational, prec: usize) -> Self {
        Self::monomial(c, 0, prec)
    }

    /// `c * b^n`, truncated at `prec`.
    pub fn monomial(c: Rational, n: usize, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        if n < prec {
            s.coeffs[n] = c;
        }
        s
    }

    /// Coefficients `c_0, c_1, ...`; precision is the slice length.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        TruncSeries { coeffs }
    }

    /// A polynomial read as a series of the given precision (padded or cut).
    pub fn from_poly(coeffs: &[Rational], prec: usize) -> Self {
        let mut s = Self::zero(prec);
        for (i, c) in coeffs.iter().enumerate().take(prec) {
            s.coeffs[i] = c.clone();
        }
        s
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `b^i`, or zero beyond precision (caller's responsibility).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Index of the first nonzero coefficient, `None` if zero to precision.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Valuation, with `prec` standing in for "zero as far as known".
    pub fn valuation_or_prec(&self) -> usize {
        self.valuation().unwrap_or(self.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs.first().is_some_and(|c| !c.is_zero())
    }

    pub fn truncate(&self, prec: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(prec);
        TruncSeries { coeffs: c }
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        TruncSeries {
            coeffs: (0..p).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        TruncSeries {
            coeffs: (0..p).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Cauchy product truncated at the smaller precision.
    pub fn mul(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        let mut out = vec![Rational::zero(); p];
        for (i, x) in self.coeffs.iter().enumerate().take(p) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.coeffs.iter().enumerate().take(p - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        TruncSeries { coeffs: out }
    }

    /// Multiplicative inverse of a unit.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(AbError::NotAUnit);
        }
        let p = self.prec();
        let inv0 = self.coeffs[0].recip();
        let mut out: Vec<Rational> = Vec::with_capacity(p);
        out.push(inv0.clone());
        for n in 1..p {
            let mut acc = Rational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out[n - k];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(TruncSeries { coeffs: out })
    }

    /// `dS/db`; loses one order of precision.
    pub fn derivative(&self) -> Self {
        TruncSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        }
    }

    /// Multiplication by the exact monomial `b^n`; gains `n` orders.
    pub fn mul_b_pow(&self, n: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); n];
        coeffs.extend(self.coeffs.iter().cloned());
        TruncSeries { coeffs }
    }

    /// Exact division by `b^n`. Fails if a known coefficient below `b^n`
    /// is nonzero, or if fewer than `n` coefficients are known.
    pub fn div_b_pow(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(self.clone());
        }
        if self.prec() < n {
            return Err(exhausted(format!(
                "division by b^{n} needs precision above {}",
                self.prec()
            )));
        }
        if self.coeffs[..n].iter().any(|c| !c.is_zero()) {
            return Err(AbError::Invalid(format!(
                "series is not divisible by b^{n}"
            )));
        }
        Ok(TruncSeries {
            coeffs: self.coeffs[n..].to_vec(),
        })
    }

    /// Splits into `(low, high)` with `self = low + b^n * high`, `low` of
    /// degree below `n`. `high` has precision `prec - n`.
    pub fn split_at(&self, n: usize) -> (Self, Self) {
        let n = n.min(self.prec());
        let low = TruncSeries::from_poly(&self.coeffs[..n], self.prec());
        let high = TruncSeries {
            coeffs: self.coeffs[n..].to_vec(),
        };
        (low, high)
    }

    /// Value of `S(c)` for a polynomial-truncated series (used for shifts).
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Parses a polynomial expression in `var`, e.g. `1+b-2*b^2` or `3/2*b`.
    pub fn parse_poly(text: &str, var: char) -> Result<Vec<Rational>> {
        parse_poly_expr(text, var)
    }
}

impl PartialEq for TruncSeries {
    /// Agreement up to the shared precision.
    fn eq(&self, other: &Self) -> bool {
        let p = self.prec().min(other.prec());
        self.coeffs[..p] == other.coeffs[..p]
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_poly(&self.coeffs, "b"))
    }
}

/// Renders `c_0 + c_1 v + ...` with explicit powers, e.g. `1 + b - 2*b^2`.
pub fn render_poly(coeffs: &[Rational], var: &str) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{k}"),
        };
        if k == 0 {
            out.push_str(&fmt_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{}*{}", fmt_rational(&mag), mono));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn parse_poly_expr(text: &str, var: char) -> Result<Vec<Rational>> {
    let err = |msg: String| AbError::Parse {
        line: 0,
        col: 0,
        msg,
    };
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty polynomial".into()));
    }
    let mut coeffs: Vec<Rational> = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let mut sign = Rational::one();
        if chars[i] == '+' || chars[i] == '-' {
            if chars[i] == '-' {
                sign = -sign;
            }
            i += 1;
        } else if i != 0 {
            return Err(err(format!("expected `+` or `-` in `{s}`")));
        }
        let start = i;
        while i < chars.len() && chars[i] != '+' && chars[i] != '-' {
            i += 1;
        }
        let term: String = chars[start..i].iter().collect();
        if term.is_empty() {
            return Err(err(format!("empty term in `{s}`")));
        }
        let (coef, power) =
            parse_term(&term, var).ok_or_else(|| err(format!("bad term `{term}`")))?;
        if power > 4096 {
            return Err(err(format!("exponent too large in `{term}`")));
        }
        if coeffs.len() <= power {
            coeffs.resize(power + 1, Rational::zero());
        }
        coeffs[power] += sign * coef;
    }
    Ok(coeffs)
}

fn parse_term(term: &str, var: char) -> Option<(Rational, usize)> {
    let (coef_part, var_part) = match term.find(var) {
        None => (term, None),
        Some(pos) => {
            let (c, v) = term.split_at(pos);
            let c = c.strip_suffix('*').unwrap_or(c);
            (c, Some(&v[var.len_utf8()..]))
        }
    };
    let coef = if coef_part.is_empty() {
        var_part?;
        Rational::one()
    } else {
        parse_rational(coef_part).ok()?
    };
    let power = match var_part {
        None => 0,
        Some("") => 1,
        Some(rest) => rest.strip_prefix('^')?.parse::<usize>().ok()?,
    };
    Some((coef, power))
}

/// JSON shape `{ "coeffs": ["1", "-1/2", ...], "prec": n }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesJson {
    pub coeffs: Vec<String>,
    pub prec: usize,
}

impl From<&TruncSeries> for SeriesJson {
    fn from(s: &TruncSeries) -> Self {
        let last = s
            .coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |i| i + 1);
        SeriesJson {
            coeffs: s.coeffs[..last].iter().map(fmt_rational).collect(),
            prec: s.prec(),
        }
    }
}

impl TryFrom<&SeriesJson> for TruncSeries {
    type Error = AbError;
    fn try_from(j: &SeriesJson) -> Result<Self> {
        if j.prec > MAX_PRECISION {
            return Err(AbError::Invalid(format!(
                "precision {} exceeds {MAX_PRECISION}",
                j.prec
            )));
        }
        if j.coeffs.len() > j.prec {
            return Err(AbError::Invalid("more coefficients than precision".into()));
        }
        let cs = j
            .coeffs
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncSeries::from_poly(&cs, j.prec))
    }
}
