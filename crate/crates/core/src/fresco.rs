//! Cyclic modules `A / A P` and their exact-sequence calculus.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::algebra::{default_a_degree_bound, AbOperator};
use crate::error::{exhausted, AbError, Result};
use crate::lattice::{quotient_module, Lattice};
use crate::linalg::QMatrix;
use crate::module::{AbModule, BernsteinMode, ModuleElement};
use crate::poly::{Polynomial, RationalPolynomial};
use crate::saturation::bernstein_polynomial;
use crate::scalar::{fmt_rational, int, Rational};
use crate::series::TruncSeries;

/// `P = (a - l_1 b) S_1 (a - l_2 b) S_2 ... (a - l_k b) [S_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrescoPresentation {
    pub factors: Vec<(Rational, Option<TruncSeries>)>,
}

impl FrescoPresentation {
    pub fn new(factors: Vec<(Rational, Option<TruncSeries>)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(AbError::Invalid(
                "a presentation needs at least one factor".into(),
            ));
        }
        for (_, s) in &factors {
            if let Some(s) = s {
                if !s.is_unit() {
                    return Err(AbError::NotAUnit);
                }
            }
        }
        Ok(FrescoPresentation { factors })
    }

    /// Presentation with every unit equal to 1.
    pub fn from_lambdas(lambdas: &[Rational]) -> Self {
        FrescoPresentation {
            factors: lambdas.iter().map(|l| (l.clone(), None)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn lambdas(&self) -> Vec<Rational> {
        self.factors.iter().map(|f| f.0.clone()).collect()
    }

    /// The operator `P` in normal form.
    pub fn operator(&self, prec: usize) -> Result<AbOperator> {
        let bound = default_a_degree_bound(self.rank());
        let mut p = AbOperator::one(prec, bound);
        for (l, s) in &self.factors {
            p = p.mul(&AbOperator::linear_factor(l, prec, bound))?;
            if let Some(s) = s {
                if !s.is_unit() {
                    return Err(AbError::NotAUnit);
                }
                p = p.mul(&AbOperator::series(&s.truncate(prec), bound))?;
            }
        }
        Ok(p)
    }

    /// Candidate Bernstein roots `-(l_j + j - k)`.
    pub fn root_hints(&self) -> Vec<Rational> {
        let k = self.rank() as i64;
        self.factors
            .iter()
            .enumerate()
            .map(|(j, (l, _))| -(l + int(j as i64 + 1 - k)))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.factors
                .iter()
                .map(|(l, s)| json!({"lambda": fmt_rational(l), "unit": s.as_ref().map(|s| s.to_string())}))
                .collect(),
        )
    }
}

/// A module generated by a single element.
#[derive(Clone, Debug)]
pub struct Fresco {
    pub module: AbModule,
    pub generator: ModuleElement,
    pub presentation: Option<FrescoPresentation>,
    /// `T_0, ..., T_k` with `(sum_m T_m a^m) generator = 0`.
    pub left_form: Option<Vec<TruncSeries>>,
}

impl Fresco {
    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "module": self.module.to_json(),
            "generator": self.generator.to_json(),
            "presentation": self.presentation.as_ref().map(|p| p.to_json()),
            "left_form": self.left_form.as_ref().map(|t| render_left_form(t)),
        })
    }
}

/// `T_2*a^2 + T_1*a + T_0` with each series in parentheses.
pub fn render_left_form(t: &[TruncSeries]) -> String {
    let mut parts = Vec::new();
    for (m, s) in t.iter().enumerate().rev() {
        if s.is_zero() {
            continue;
        }
        let a = match m {
            0 => String::new(),
            1 => "a".to_string(),
            _ => format!("a^{m}"),
        };
        let c = s.to_string();
        parts.push(match (a.is_empty(), c.as_str()) {
            (true, _) => format!("({c})"),
            (false, "1") => a,
            (false, _) => format!("({c})*{a}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Module on `[1], [a], ..., [a^{k-1}]` with `[a^k]` reduced through the
/// left form of `P`.
pub fn fresco_from_presentation(p: &FrescoPresentation, prec: usize) -> Result<Fresco> {
    let op = p.operator(prec)?;
    let t = op.to_left_form();
    let k = p.rank();
    if t.len() != k + 1 {
        return Err(AbError::Invalid(
            "presentation operator has unexpected a-degree".into(),
        ));
    }
    let inv = t[k].invert()?;
    let mut mat = vec![vec![TruncSeries::zero(prec); k]; k];
    for j in 0..k - 1 {
        mat[j + 1][j] = TruncSeries::one(prec);
    }
    for (i, row) in mat.iter_mut().enumerate() {
        row[k - 1] = t[i].mul(&inv).neg();
    }
    let module = AbModule::from_matrix(mat)?;
    let generator = module.basis(0);
    Ok(Fresco {
        module,
        generator,
        presentation: Some(p.clone()),
        left_form: Some(t),
    })
}

/// `prod_j (x + l_j + j - k)`, plus the list of factors whose root is not
/// negative.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaBernstein {
    pub polynomial: RationalPolynomial,
    pub non_negative_roots: Vec<Rational>,
}

pub fn bernstein_via_formula(p: &FrescoPresentation) -> FormulaBernstein {
    let roots: Vec<Rational> = p.root_hints();
    let poly = roots
        .iter()
        .fold(Polynomial::one(), |acc, r| acc.mul(&Polynomial::linear(r)));
    FormulaBernstein {
        polynomial: RationalPolynomial::from_poly(&poly, &roots),
        non_negative_roots: roots
            .into_iter()
            .filter(|r| *r >= Rational::zero())
            .collect(),
    }
}

/// Lattice spanned by `x, a x, a^2 x, ...`, with the powers `x, ..., a^k x`
/// where `a^k x` is the first one already in the span.
pub fn generated_lattice(e: &AbModule, x: &ModuleElement) -> Result<(Lattice, Vec<ModuleElement>)> {
    if x.is_zero() {
        return Err(AbError::Invalid(
            "the zero element generates nothing".into(),
        ));
    }
    let k = e.rank();
    let cap = k + e.prec();
    let mut powers = vec![x.clone()];
    let mut lat = Lattice::reduce(k, &powers)?;
    for _ in 0..cap {
        let next = e.apply_a(powers.last().unwrap())?;
        if lat.contains(&next)? {
            powers.push(next);
            return Ok((lat, powers));
        }
        powers.push(next);
        lat = Lattice::reduce(k, &powers)?;
    }
    Err(exhausted("a-powers of the element did not close up"))
}

/// The sub-module `A x`, with the relation `(a^k + sum_{m<k} T_m a^m) x = 0`
/// when `x, ..., a^{k-1} x` is a basis.
pub fn generated_submodule(e: &AbModule, x: &ModuleElement) -> Result<Fresco> {
    let (lat, powers) = generated_lattice(e, x)?;
    let module = lat.as_module(e)?;
    let generator = ModuleElement::new(
        lat.coordinates(x)?
            .ok_or_else(|| AbError::Invalid("generator escaped its own span".into()))?,
    );
    let kk = powers.len() - 1;
    let left_form = if kk == lat.rank() {
        relation(&powers, &lat)?
    } else {
        None
    };
    Ok(Fresco {
        module,
        generator,
        presentation: None,
        left_form,
    })
}

/// Solves `sum_{m<k} c_m V_m = V_k` order by order; returns the left form
/// `(-c_0, ..., -c_{k-1}, 1)` truncated to the orders it determines.
fn relation(powers: &[ModuleElement], lat: &Lattice) -> Result<Option<Vec<TruncSeries>>> {
    let k = powers.len() - 1;
    let rank = powers[0].rank();
    let pe = powers.iter().map(|v| v.prec()).min().unwrap_or(0);
    let vmax = lat.pivots().iter().map(|p| p.1).max().unwrap_or(0);
    if pe <= vmax {
        return Err(exhausted(
            "relation needs more precision than the powers carry",
        ));
    }
    let mut m = QMatrix::zeros(rank * pe, k * pe);
    let mut rhs = vec![Rational::zero(); rank * pe];
    for i in 0..rank {
        for t in 0..pe {
            let row = i * pe + t;
            rhs[row] = powers[k].coords[i].coeff(t);
            for (mi, v) in powers[..k].iter().enumerate() {
                for n in 0..=t {
                    let c = v.coords[i].coeff(t - n);
                    if !c.is_zero() {
                        m[(row, mi * pe + n)] = c;
                    }
                }
            }
        }
    }
    let Some(sol) = m.solve(&rhs) else {
        return Ok(None);
    };
    let keep = pe - vmax;
    let mut t: Vec<TruncSeries> = (0..k)
        .map(|mi| {
            TruncSeries::from_coeffs(sol[mi * pe..mi * pe + keep].iter().map(|c| -c).collect())
        })
        .collect();
    t.push(TruncSeries::one(keep));
    Ok(Some(t))
}

/// Bernstein data of a short exact sequence `0 -> sub -> F -> quot -> 0`.
#[derive(Clone, Debug)]
pub struct JhReport {
    pub b_sub: RationalPolynomial,
    pub b_quot: RationalPolynomial,
    pub b_f: RationalPolynomial,
    pub q: usize,
    /// `B_F(x) = B_sub(x - q) B_quot(x)`
    pub minus_variant: bool,
    /// `B_F(x) = B_sub(x + q) B_quot(x)`
    pub plus_variant: bool,
}

impl JhReport {
    /// The `+q` variant holds where the `-q` one fails.
    pub fn flagged(&self) -> bool {
        self.plus_variant && !self.minus_variant
    }

    pub fn to_json(&self) -> Value {
        json!({
            "b_sub": self.b_sub.to_string(),
            "b_quot": self.b_quot.to_string(),
            "b_f": self.b_f.to_string(),
            "q": self.q,
            "minus_variant": self.minus_variant,
            "plus_variant": self.plus_variant,
            "flagged": self.flagged(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct JhSplit {
    pub sub: Fresco,
    pub quot: Option<Fresco>,
    pub report: JhReport,
}

/// Splits `F` along the normal hull of `A x`.
pub fn jh_split(f: &Fresco, x: &ModuleElement, cap: Option<usize>) -> Result<JhSplit> {
    let e = &f.module;
    let (lat, _) = generated_lattice(e, x)?;
    let hull = lat.normal_hull()?;
    let sub_module = hull.as_module(e)?;
    let sub_gen = ModuleElement::new(
        hull.coordinates(x)?
            .ok_or_else(|| AbError::Invalid("element escaped its normal hull".into()))?,
    );
    let sub = Fresco {
        module: sub_module,
        generator: sub_gen,
        presentation: None,
        left_form: None,
    };
    let hints: Vec<Rational> = f
        .presentation
        .as_ref()
        .map(|p| p.root_hints())
        .unwrap_or_default();
    let b_f = bernstein_polynomial(e, BernsteinMode::Characteristic, &hints, cap)?;
    let b_sub = bernstein_polynomial(&sub.module, BernsteinMode::Characteristic, &hints, cap)?;
    let (quot, b_quot) = if hull.rank() == e.rank() {
        (None, RationalPolynomial::one())
    } else {
        let qm = quotient_module(e, &hull)?;
        let b = bernstein_polynomial(&qm.module, BernsteinMode::Characteristic, &hints, cap)?;
        let generator = qm.project(&f.generator);
        (
            Some(Fresco {
                module: qm.module,
                generator,
                presentation: None,
                left_form: None,
            }),
            b,
        )
    };
    let q = quot.as_ref().map_or(0, |g| g.rank());
    let qr = int(q as i64);
    let minus_variant = b_sub.shift(&-qr.clone()).poly.mul(&b_quot.poly) == b_f.poly;
    let plus_variant = b_sub.shift(&qr).poly.mul(&b_quot.poly) == b_f.poly;
    Ok(JhSplit {
        sub,
        quot,
        report: JhReport {
            b_sub,
            b_quot,
            b_f,
            q,
            minus_variant,
            plus_variant,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::build_xi_tensor;
    use crate::scalar::rat;

    const P: usize = 12;

    fn s(cs: &[i64]) -> TruncSeries {
        TruncSeries::from_poly(&cs.iter().map(|&c| int(c)).collect::<Vec<_>>(), P)
    }

    #[test]
    fn rank_one_is_e_lambda() {
        let f =
            fresco_from_presentation(&FrescoPresentation::from_lambdas(&[rat(2, 3)]), P).unwrap();
        assert_eq!(f.module, AbModule::e_lambda(&rat(2, 3), P));
    }

    #[test]
    fn rank_two_companion() {
        let p =
            FrescoPresentation::new(vec![(rat(3, 2), Some(s(&[1]))), (rat(1, 2), None)]).unwrap();
        let f = fresco_from_presentation(&p, P).unwrap();
        let m = f.module.a_matrix();
        assert_eq!(m[1][0], s(&[1]));
        assert!(m[0][0].is_zero());
        assert_eq!(m[1][1], TruncSeries::monomial(int(2), 1, P));
        assert_eq!(m[0][1], TruncSeries::monomial(rat(-1, 4), 2, P));
    }

    #[test]
    fn left_form_with_unit() {
        let p = FrescoPresentation::new(vec![(int(1), Some(s(&[1, 1]))), (int(1), None)]).unwrap();
        let t = p.operator(P).unwrap().to_left_form();
        assert_eq!(t[2], s(&[1, 1]));
        assert_eq!(t[1], s(&[0, -2, -1]));
        assert_eq!(t[0], s(&[0, 0, 0, -1]));
    }

    #[test]
    fn non_unit_rejected() {
        let r = FrescoPresentation::new(vec![(int(1), Some(s(&[0, 1]))), (int(1), None)]);
        assert_eq!(r.unwrap_err(), AbError::NotAUnit);
    }

    #[test]
    fn formula_examples() {
        let p = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)]);
        assert_eq!(
            bernstein_via_formula(&p).polynomial.roots,
            vec![(rat(-1, 2), 2)]
        );
        let p = FrescoPresentation::from_lambdas(&[int(2), int(1)]);
        assert_eq!(
            bernstein_via_formula(&p).polynomial.roots,
            vec![(int(-1), 2)]
        );
        let p = FrescoPresentation::from_lambdas(&[int(-3)]);
        assert_eq!(bernstein_via_formula(&p).non_negative_roots, vec![int(3)]);
    }

    #[test]
    fn generated_examples() {
        let xi = build_xi_tensor(&[rat(1, 2)], 1, 1, P).unwrap();
        let g = generated_submodule(&xi, &xi.basis(0)).unwrap();
        assert_eq!(g.rank(), 1);
        let t = g.left_form.unwrap();
        assert_eq!(t[0], TruncSeries::monomial(rat(-1, 2), 1, P));
        let be0 = xi.apply_b(&xi.basis(0)).unwrap();
        let t = generated_submodule(&xi, &be0).unwrap().left_form.unwrap();
        assert_eq!(t[0], TruncSeries::monomial(rat(-3, 2), 1, P));
        let g = generated_submodule(&xi, &xi.basis(1)).unwrap();
        assert_eq!(g.rank(), 2);
        let t = g.left_form.unwrap();
        let expected = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)])
            .operator(P)
            .unwrap()
            .to_left_form();
        for m in 0..3 {
            assert_eq!(t[m], expected[m], "T_{m}");
        }
    }

    #[test]
    fn jh_worked_example() {
        let p = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)]);
        let f = fresco_from_presentation(&p, P).unwrap();
        // (a - b/2)[1] = [a] - (1/2) b [1]
        let x = ModuleElement::new(vec![TruncSeries::monomial(rat(-1, 2), 1, P), s(&[1])]);
        let split = jh_split(&f, &x, None).unwrap();
        assert_eq!(split.sub.rank(), 1);
        assert_eq!(split.report.q, 1);
        assert_eq!(split.report.b_sub.roots, vec![(rat(-3, 2), 1)]);
        assert_eq!(split.report.b_quot.roots, vec![(rat(-1, 2), 1)]);
        assert!(split.report.minus_variant);
        assert!(!split.report.plus_variant);
    }

    #[test]
    fn jh_trivial_cases() {
        let p = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)]);
        let f = fresco_from_presentation(&p, P).unwrap();
        let split = jh_split(&f, &f.generator, None).unwrap();
        assert!(split.quot.is_none());
        assert!(split.report.minus_variant && split.report.plus_variant);
        let f1 =
            fresco_from_presentation(&FrescoPresentation::from_lambdas(&[rat(1, 3)]), P).unwrap();
        let bx = f1.generator.mul_b_pow(1).truncate(P);
        let split = jh_split(&f1, &bx, None).unwrap();
        assert_eq!(split.sub.rank(), 1);
        assert!(split.quot.is_none());
    }
}
