//! Univariate polynomials over Q and their rational-root factorization.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::scalar::{fmt_rational, Rational};

/// Dense polynomial in `x`, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Polynomial::new(vec![Rational::one()])
    }

    /// `x - r`
    pub fn linear(r: &Rational) -> Self {
        Polynomial::new(vec![-r, Rational::one()])
    }

    /// `prod (x - r)^m`
    pub fn from_roots(roots: &[(Rational, usize)]) -> Self {
        let mut p = Polynomial::one();
        for (r, m) in roots {
            for _ in 0..*m {
                p = p.mul(&Polynomial::linear(r));
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        Polynomial::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
                        + o.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Polynomial::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `p(x + c)`
    pub fn shift(&self, c: &Rational) -> Self {
        // Horner in the polynomial ring
        let xc = Polynomial::new(vec![c.clone(), Rational::one()]);
        let mut acc = Polynomial::zero();
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(&xc).add(&Polynomial::new(vec![a.clone()]));
        }
        acc
    }

    /// Euclidean division by a nonzero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dl = d.leading();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &rem[k + dd] / &dl;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        (Polynomial::new(q), Polynomial::new(rem))
    }

    /// Splits off all rational roots (with multiplicity). `hints` are extra
    /// candidates tried before the rational-root-theorem enumeration.
    pub fn rational_roots(&self, hints: &[Rational]) -> (Vec<(Rational, usize)>, Polynomial) {
        let mut rest = self.monic();
        let mut roots: Vec<(Rational, usize)> = Vec::new();
        if rest.is_zero() {
            return (roots, rest);
        }
        let take = |rest: &mut Polynomial, r: &Rational, roots: &mut Vec<(Rational, usize)>| {
            let mut m = 0;
            loop {
                if rest.degree() == 0 || !rest.eval(r).is_zero() {
                    break;
                }
                let (q, _) = rest.div_rem(&Polynomial::linear(r));
                *rest = q;
                m += 1;
            }
            if m > 0 {
                roots.push((r.clone(), m));
            }
        };
        take(&mut rest, &Rational::zero(), &mut roots);
        for h in hints {
            take(&mut rest, h, &mut roots);
        }
        if rest.degree() > 0 {
            for cand in root_candidates(&rest) {
                take(&mut rest, &cand, &mut roots);
                if rest.degree() == 0 {
                    break;
                }
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, rest)
    }
}

/// Candidates `±p/q` from the rational root theorem. Gives up (returns the
/// candidates found so far) on coefficients too large to factor by trial
/// division.
fn root_candidates(p: &Polynomial) -> Vec<Rational> {
    let lcm = p
        .coeffs
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p
        .coeffs
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let a0 = ints[0].abs();
    let an = ints.last().unwrap().abs();
    let (Some(nums), Some(dens)) = (divisors(&a0), divisors(&an)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for n in &nums {
        for d in &dens {
            let r = Rational::new(n.clone(), d.clone());
            out.push(r.clone());
            out.push(-r);
        }
    }
    out.sort();
    out.dedup();
    out
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    const LIMIT: u64 = 1_000_000;
    if n.is_zero() {
        return Some(vec![BigInt::one()]);
    }
    let mut rest = n.clone();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut f: u64 = 2;
    while f <= LIMIT {
        let fb = BigInt::from(f);
        if &fb * &fb > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &fb).is_zero() {
            rest /= &fb;
            e += 1;
        }
        if e > 0 {
            primes.push((fb, e));
        }
        f += 1;
    }
    if rest > BigInt::one() {
        let lim = BigInt::from(LIMIT);
        if rest > &lim * &lim {
            return None;
        }
        primes.push((rest, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::new();
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    if divs.len() > 20_000 {
        return None;
    }
    Some(divs)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // descending powers: x^2 + 1/2 x - 3
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for k in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[k];
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
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            if k == 0 {
                out.push_str(&fmt_rational(&mag));
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{} {}", fmt_rational(&mag), mono));
            }
        }
        f.write_str(&out)
    }
}

/// A monic polynomial together with its rational roots and any factor left
/// unsplit over Q (Bernstein data).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolynomial {
    pub poly: Polynomial,
    pub roots: Vec<(Rational, usize)>,
    pub unsplit: Option<Polynomial>,
}

impl RationalPolynomial {
    pub fn from_poly(p: &Polynomial, hints: &[Rational]) -> Self {
        let poly = p.monic();
        let (roots, rest) = poly.rational_roots(hints);
        RationalPolynomial {
            poly,
            roots,
            unsplit: if rest.degree() > 0 { Some(rest) } else { None },
        }
    }

    pub fn from_roots(roots: &[(Rational, usize)]) -> Self {
        Self::from_poly(&Polynomial::from_roots(roots), &[])
    }

    pub fn one() -> Self {
        Self::from_poly(&Polynomial::one(), &[])
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn is_split(&self) -> bool {
        self.unsplit.is_none()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let hints: Vec<Rational> = self
            .roots
            .iter()
            .chain(&o.roots)
            .map(|r| r.0.clone())
            .collect();
        Self::from_poly(&self.poly.mul(&o.poly), &hints)
    }

    /// `B(x + c)`
    pub fn shift(&self, c: &Rational) -> Self {
        let hints: Vec<Rational> = self.roots.iter().map(|r| &r.0 - c).collect();
        Self::from_poly(&self.poly.shift(c), &hints)
    }

    /// Roots all simple.
    pub fn has_simple_roots(&self) -> bool {
        self.roots.iter().all(|r| r.1 == 1) && self.unsplit.is_none()
    }

    /// Factor whose roots satisfy the predicate (only split roots qualify).
    pub fn part_where(&self, keep: impl Fn(&Rational) -> bool) -> Self {
        let kept: Vec<(Rational, usize)> =
            self.roots.iter().filter(|r| keep(&r.0)).cloned().collect();
        Self::from_roots(&kept)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coeffs": self.poly.coeffs().iter().map(fmt_rational).collect::<Vec<_>>(),
            "roots": self.roots.iter().map(|(v, m)| json!({"value": fmt_rational(v), "mult": m})).collect::<Vec<_>>(),
            "unsplit": self.unsplit.as_ref().map(|u| u.coeffs().iter().map(fmt_rational).collect::<Vec<_>>()),
        })
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("1");
        }
        let mut parts: Vec<String> = Vec::new();
        for (r, m) in &self.roots {
            let lin = Polynomial::linear(r);
            let base = if r.is_zero() {
                "x".to_string()
            } else {
                format!("({lin})")
            };
            parts.push(if *m > 1 { format!("{base}^{m}") } else { base });
        }
        if let Some(u) = &self.unsplit {
            parts.push(format!("({u})"));
        }
        f.write_str(&parts.join(" "))
    }
}

/// Multiplicity of `r` in a root list.
pub fn multiplicity(roots: &[(Rational, usize)], r: &Rational) -> usize {
    roots.iter().find(|x| &x.0 == r).map_or(0, |x| x.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn split_products() {
        let p = Polynomial::from_roots(&[(rat(-1, 2), 2), (rat(-1, 3), 1)]);
        let rp = RationalPolynomial::from_poly(&p, &[]);
        assert!(rp.is_split());
        assert_eq!(rp.roots, vec![(rat(-1, 2), 2), (rat(-1, 3), 1)]);
        assert_eq!(rp.to_string(), "(x + 1/2)^2 (x + 1/3)");
    }

    #[test]
    fn unsplit_factor_kept() {
        // (x^2 - 2)(x + 1)
        let p = Polynomial::new(vec![int(-2), int(0), int(1)]).mul(&Polynomial::linear(&int(-1)));
        let rp = RationalPolynomial::from_poly(&p, &[]);
        assert_eq!(rp.roots, vec![(int(-1), 1)]);
        assert_eq!(
            rp.unsplit.unwrap(),
            Polynomial::new(vec![int(-2), int(0), int(1)])
        );
    }

    #[test]
    fn shift_and_divide() {
        let p = Polynomial::linear(&rat(-3, 2)); // x + 3/2
        assert_eq!(p.shift(&int(-1)), Polynomial::linear(&rat(-1, 2)));
        let q = Polynomial::from_roots(&[(int(2), 1), (int(3), 1)]);
        let (d, r) = q.div_rem(&Polynomial::linear(&int(2)));
        assert!(r.is_zero());
        assert_eq!(d, Polynomial::linear(&int(3)));
        assert_eq!(
            Polynomial::new(vec![int(1), rat(1, 2), int(1)]).to_string(),
            "x^2 + 1/2 x + 1"
        );
    }
}
