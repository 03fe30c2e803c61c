//! The algebra of operators in `a` and `b` subject to `ab - ba = b^2`.
//!
//! Elements are kept in the normal form `sum_q b^q Pi_q(a)` with the powers
//! of `b` on the left, truncated at `b^prec`. The only rewriting rule needed
//! is `a b^q Pi(a) = b^q a Pi(a) + q b^{q+1} Pi(a)`, which is the relation
//! `a S(b) = S(b) a + b^2 S'(b)` applied to `S = b^q`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{AbError, Result};
use crate::scalar::{fmt_rational, Rational};
use crate::series::TruncSeries;

/// Default bound on the `a`-degree for operators meant for modules of rank `k`.
pub fn default_a_degree_bound(rank: usize) -> usize {
    2 * rank + 4
}

#[derive(Clone, Debug)]
pub struct AbOperator {
    /// `terms[q]` holds the coefficients of `Pi_q(a)` in ascending powers of `a`.
    terms: Vec<Vec<Rational>>,
    prec: usize,
    a_degree_bound: usize,
}

/// Letters of a word in the algebra.
#[derive(Clone, Debug)]
pub enum Generator {
    A,
    B,
    Series(TruncSeries),
    Scalar(Rational),
}

impl AbOperator {
    pub fn zero(prec: usize, a_degree_bound: usize) -> Self {
        AbOperator {
            terms: vec![Vec::new(); prec],
            prec,
            a_degree_bound,
        }
    }

    pub fn one(prec: usize, a_degree_bound: usize) -> Self {
        Self::scalar(Rational::one(), prec, a_degree_bound)
    }

    pub fn scalar(c: Rational, prec: usize, a_degree_bound: usize) -> Self {
        let mut op = Self::zero(prec, a_degree_bound);
        if prec > 0 {
            op.terms[0] = vec![c];
        }
        op.trim();
        op
    }

    pub fn a(prec: usize, a_degree_bound: usize) -> Self {
        let mut op = Self::zero(prec, a_degree_bound);
        if prec > 0 {
            op.terms[0] = vec![Rational::zero(), Rational::one()];
        }
        op
    }

    pub fn b(prec: usize, a_degree_bound: usize) -> Self {
        Self::series(
            &TruncSeries::monomial(Rational::one(), 1, prec),
            a_degree_bound,
        )
    }

    /// A series `S(b)` viewed as an operator; precision is that of `S`.
    pub fn series(s: &TruncSeries, a_degree_bound: usize) -> Self {
        let mut op = Self::zero(s.prec(), a_degree_bound);
        for (q, c) in s.coeffs().iter().enumerate() {
            if !c.is_zero() {
                op.terms[q] = vec![c.clone()];
            }
        }
        op
    }

    /// `a - lambda b`
    pub fn linear_factor(lambda: &Rational, prec: usize, a_degree_bound: usize) -> Self {
        let mut op = Self::a(prec, a_degree_bound);
        if prec > 1 {
            op.terms[1] = vec![-lambda.clone()];
        }
        op.trim();
        op
    }

    /// Builds from `(q, coefficients of Pi_q)` pairs.
    pub fn from_terms(
        terms: &[(usize, Vec<Rational>)],
        prec: usize,
        a_degree_bound: usize,
    ) -> Result<Self> {
        let mut op = Self::zero(prec, a_degree_bound);
        for (q, poly) in terms {
            if *q < prec {
                let slot = &mut op.terms[*q];
                if slot.len() < poly.len() {
                    slot.resize(poly.len(), Rational::zero());
                }
                for (i, c) in poly.iter().enumerate() {
                    slot[i] += c;
                }
            }
        }
        op.trim();
        op.check_degree()?;
        Ok(op)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn a_degree_bound(&self) -> usize {
        self.a_degree_bound
    }

    /// Coefficients of `Pi_q(a)`.
    pub fn pi(&self, q: usize) -> &[Rational] {
        self.terms.get(q).map_or(&[], |v| v.as_slice())
    }

    pub fn a_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_empty())
    }

    fn trim(&mut self) {
        for t in &mut self.terms {
            while t.last().is_some_and(|c| c.is_zero()) {
                t.pop();
            }
        }
    }

    fn check_degree(&self) -> Result<()> {
        let d = self.a_degree();
        if d > self.a_degree_bound {
            Err(AbError::ADegreeOverflow {
                degree: d,
                bound: self.a_degree_bound,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let mut out = Self::zero(prec, self.a_degree_bound.max(o.a_degree_bound));
        for q in 0..prec {
            let (x, y) = (self.pi(q), o.pi(q));
            let n = x.len().max(y.len());
            out.terms[q] = (0..n)
                .map(|i| {
                    x.get(i).cloned().unwrap_or_else(Rational::zero)
                        + y.get(i).cloned().unwrap_or_else(Rational::zero)
                })
                .collect();
        }
        out.trim();
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            for x in t.iter_mut() {
                *x *= c;
            }
        }
        out.trim();
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    /// `a * self`
    pub fn left_mul_a(&self) -> Result<Self> {
        let mut out = Self::zero(self.prec, self.a_degree_bound);
        for q in 0..self.prec {
            let pi = self.pi(q);
            if pi.is_empty() {
                continue;
            }
            // b^q a Pi(a)
            let slot = &mut out.terms[q];
            if slot.len() < pi.len() + 1 {
                slot.resize(pi.len() + 1, Rational::zero());
            }
            for (i, c) in pi.iter().enumerate() {
                slot[i + 1] += c;
            }
            // q b^{q+1} Pi(a)
            if q > 0 && q + 1 < self.prec {
                let qq = Rational::from_integer((q as i64).into());
                let slot = &mut out.terms[q + 1];
                if slot.len() < pi.len() {
                    slot.resize(pi.len(), Rational::zero());
                }
                for (i, c) in pi.iter().enumerate() {
                    slot[i] += c * &qq;
                }
            }
        }
        out.trim();
        out.check_degree()?;
        Ok(out)
    }

    /// `S(b) * self`
    pub fn left_mul_series(&self, s: &TruncSeries) -> Self {
        let prec = self.prec.min(s.prec());
        let mut out = Self::zero(prec, self.a_degree_bound);
        for (i, c) in s.coeffs().iter().enumerate().take(prec) {
            if c.is_zero() {
                continue;
            }
            for q in 0..prec - i {
                let pi = self.pi(q);
                let slot = &mut out.terms[q + i];
                if slot.len() < pi.len() {
                    slot.resize(pi.len(), Rational::zero());
                }
                for (k, x) in pi.iter().enumerate() {
                    slot[k] += c * x;
                }
            }
        }
        out.trim();
        out
    }

    /// Product in normal form; precision is the smaller of the two.
    pub fn mul(&self, y: &Self) -> Result<Self> {
        let prec = self.prec.min(y.prec);
        let bound = self.a_degree_bound.max(y.a_degree_bound);
        let mut y = y.clone();
        y.prec = prec;
        y.terms.truncate(prec);
        y.a_degree_bound = bound;
        // a^m y for m = 0..deg
        let deg = self.a_degree();
        let mut a_pows = vec![y];
        for _ in 0..deg {
            let next = a_pows.last().unwrap().left_mul_a()?;
            a_pows.push(next);
        }
        let mut out = Self::zero(prec, bound);
        for q in 0..prec {
            for (m, c) in self.pi(q).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let shifted = a_pows[m].left_mul_series(&TruncSeries::monomial(c.clone(), q, prec));
                out = out.add(&shifted);
            }
        }
        out.a_degree_bound = bound;
        out.check_degree()?;
        Ok(out)
    }

    /// Normal form of a finite word, read as a product left to right.
    pub fn normalize(word: &[Generator], prec: usize, a_degree_bound: usize) -> Result<Self> {
        let mut acc = Self::one(prec, a_degree_bound);
        for g in word.iter().rev() {
            acc = match g {
                Generator::A => acc.left_mul_a()?,
                Generator::B => {
                    acc.left_mul_series(&TruncSeries::monomial(Rational::one(), 1, prec))
                }
                Generator::Series(s) => acc.left_mul_series(s),
                Generator::Scalar(c) => acc.scale(c),
            };
        }
        Ok(acc)
    }

    /// Regroups as `sum_m T_m(b) a^m`; entry `m` of the result is `T_m`.
    pub fn to_left_form(&self) -> Vec<TruncSeries> {
        let deg = self.a_degree();
        (0..=deg)
            .map(|m| {
                TruncSeries::from_coeffs(
                    (0..self.prec)
                        .map(|q| self.pi(q).get(m).cloned().unwrap_or_else(Rational::zero))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_empty())
                .map(|(q, p)| json!({"q": q, "poly": p.iter().map(fmt_rational).collect::<Vec<_>>()}))
                .collect(),
        )
    }
}

impl PartialEq for AbOperator {
    /// Agreement of all terms below the shared precision.
    fn eq(&self, o: &Self) -> bool {
        let p = self.prec.min(o.prec);
        (0..p).all(|q| self.pi(q) == o.pi(q))
    }
}

impl fmt::Display for AbOperator {
    /// `b^2*a + 2*b^3`: terms ordered by b-power, then a-power.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for q in 0..self.prec {
            for (m, c) in self.pi(q).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut factors = Vec::new();
                match q {
                    0 => {}
                    1 => factors.push("b".to_string()),
                    _ => factors.push(format!("b^{q}")),
                }
                match m {
                    0 => {}
                    1 => factors.push("a".to_string()),
                    _ => factors.push(format!("a^{m}")),
                }
                let mag = c.abs();
                let body = if factors.is_empty() {
                    fmt_rational(&mag)
                } else if mag.is_one() {
                    factors.join("*")
                } else {
                    format!("{}*{}", fmt_rational(&mag), factors.join("*"))
                };
                if out.is_empty() {
                    if c.is_negative() {
                        out.push('-');
                    }
                } else {
                    out.push_str(if c.is_negative() { " - " } else { " + " });
                }
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use Generator::*;

    const P: usize = 8;
    const D: usize = 10;

    fn op(terms: &[(usize, &[i64])]) -> AbOperator {
        let t: Vec<(usize, Vec<Rational>)> = terms
            .iter()
            .map(|(q, p)| (*q, p.iter().map(|&c| int(c)).collect()))
            .collect();
        AbOperator::from_terms(&t, P, D).unwrap()
    }

    #[test]
    fn commutation_relation() {
        let ab = AbOperator::normalize(&[A, B], P, D).unwrap();
        assert_eq!(ab, op(&[(1, &[0, 1]), (2, &[1])]));
        assert_eq!(ab.to_string(), "b*a + b^2");
        let lhs = ab.sub(&AbOperator::normalize(&[B, A], P, D).unwrap());
        let rel = lhs.sub(&AbOperator::normalize(&[B, B], P, D).unwrap());
        assert!(rel.is_zero());
    }

    #[test]
    fn a_squared_b() {
        let x = AbOperator::normalize(&[A, A, B], P, D).unwrap();
        assert_eq!(x, op(&[(1, &[0, 0, 1]), (2, &[0, 2]), (3, &[2])]));
        assert_eq!(x.to_string(), "b*a^2 + 2*b^2*a + 2*b^3");
    }

    #[test]
    fn a_times_unit() {
        let s = TruncSeries::from_poly(&[int(1), int(1)], P);
        let x = AbOperator::normalize(&[A, Series(s)], P, D).unwrap();
        // (1+b) a + b^2
        assert_eq!(x, op(&[(0, &[0, 1]), (1, &[0, 1]), (2, &[1])]));
    }

    #[test]
    fn products() {
        let f2 = AbOperator::linear_factor(&int(2), P, D);
        let f1 = AbOperator::linear_factor(&int(1), P, D);
        let p = f2.mul(&f1).unwrap();
        assert_eq!(p, op(&[(0, &[0, 0, 1]), (1, &[0, -3]), (2, &[1])]));
        assert_eq!(p.to_string(), "a^2 - 3*b*a + b^2");
        assert_eq!(p.mul(&AbOperator::one(P, D)).unwrap(), p);
        let ba = op(&[(1, &[0, 1])]);
        assert_eq!(AbOperator::normalize(&[B, A], P, D).unwrap(), ba);
    }

    #[test]
    fn left_forms() {
        let p = op(&[(0, &[0, 0, 1]), (1, &[0, -3]), (2, &[1])]);
        let lf = p.to_left_form();
        assert_eq!(lf[2], TruncSeries::one(P));
        assert_eq!(lf[1], TruncSeries::from_poly(&[int(0), int(-3)], P));
        assert_eq!(lf[0], TruncSeries::from_poly(&[int(0), int(0), int(1)], P));

        let f = AbOperator::linear_factor(&int(1), P, D);
        let unit = AbOperator::series(&TruncSeries::from_poly(&[int(1), int(1)], P), D);
        let q = f.mul(&unit).unwrap().mul(&f).unwrap();
        let lf = q.to_left_form();
        assert_eq!(lf[2], TruncSeries::from_poly(&[int(1), int(1)], P));
        assert_eq!(
            lf[1],
            TruncSeries::from_poly(&[int(0), int(-2), int(-1)], P)
        );
        assert_eq!(
            lf[0],
            TruncSeries::from_poly(&[int(0), int(0), int(0), int(-1)], P)
        );

        let s = TruncSeries::from_poly(&[int(2), rat(1, 2)], P);
        let lf = AbOperator::series(&s, D).to_left_form();
        assert_eq!(lf.len(), 1);
        assert_eq!(lf[0], s);
    }

    #[test]
    fn degree_bound_is_hard() {
        let err = AbOperator::normalize(&[A, A, A], P, 2).unwrap_err();
        assert_eq!(
            err,
            AbError::ADegreeOverflow {
                degree: 3,
                bound: 2
            }
        );
    }
}
