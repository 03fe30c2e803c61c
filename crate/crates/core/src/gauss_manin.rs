//! Differential systems, embeddings into `Xi` modules and the singular
//! terms they predict.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::decomposition::{higher_bernstein, root_classes};
use crate::error::{exhausted, AbError, Result};
use crate::lattice::Lattice;
use crate::linalg::{Parametric, QMatrix};
use crate::module::{AbModule, BernsteinMode, ModuleElement, XiLayout};
use crate::poly::multiplicity;
use crate::saturation::{bernstein_of_saturated, certify, saturate};
use crate::scalar::{fmt_rational, int, parse_rational, Rational};
use crate::series::TruncSeries;

/// `z d/dz F = A(z) F` with polynomial entries; `entries[i][j][n]` is the
/// `z^n` coefficient of `A_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffSystem {
    pub entries: Vec<Vec<Vec<Rational>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffSystemJson {
    pub size: usize,
    pub entries: Vec<Vec<Vec<String>>>,
}

impl DiffSystem {
    pub fn new(entries: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(AbError::Invalid("system must have size at least 1".into()));
        }
        for row in &entries {
            if row.len() != k {
                return Err(AbError::NonSquare {
                    rows: k,
                    cols: row.len(),
                });
            }
        }
        Ok(DiffSystem { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn degree(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Constant matrix of `z^n` coefficients.
    pub fn coefficient(&self, n: usize) -> QMatrix {
        QMatrix::from_rows(
            self.entries
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|p| p.get(n).cloned().unwrap_or_else(Rational::zero))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: DiffSystemJson = serde_json::from_str(text)
            .map_err(|e| AbError::Invalid(format!("system JSON: {e}")))?;
        let entries = j
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|p| {
                        p.iter()
                            .map(|c| parse_rational(c))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != j.size {
            return Err(AbError::Invalid(format!(
                "size {} does not match {} rows",
                j.size,
                entries.len()
            )));
        }
        DiffSystem::new(entries)
    }

    pub fn to_json(&self) -> Value {
        json!(DiffSystemJson {
            size: self.size(),
            entries: self
                .entries
                .iter()
                .map(|r| r
                    .iter()
                    .map(|p| p.iter().map(fmt_rational).collect())
                    .collect())
                .collect(),
        })
    }
}

/// The module with `a e_j = sum_i b [sum_n (A_n)_ij (a + b)^n] e_i`,
/// found as a `b`-adic fixed point.
pub fn from_differential_system(sys: &DiffSystem, prec: usize) -> Result<AbModule> {
    let k = sys.size();
    let deg = sys.degree();
    let coeffs: Vec<QMatrix> = (0..=deg).map(|n| sys.coefficient(n)).collect();
    let mut current = AbModule::from_matrix(vec![vec![TruncSeries::zero(prec); k]; k])?;
    for _ in 0..prec + 2 {
        let next = fixed_point_step(&current, &coeffs, prec)?;
        if next == current {
            return Ok(next);
        }
        current = next;
    }
    Err(exhausted("differential system iteration did not converge"))
}

fn fixed_point_step(m: &AbModule, coeffs: &[QMatrix], prec: usize) -> Result<AbModule> {
    let k = m.rank();
    // powers[n][i] = (a + b)^n e_i
    let mut powers: Vec<Vec<ModuleElement>> = vec![(0..k).map(|i| m.basis(i)).collect()];
    for _ in 1..coeffs.len() {
        let prev = powers.last().unwrap();
        let next = prev
            .iter()
            .map(|x| Ok(m.apply_a(x)?.add(&m.apply_b(x)?)))
            .collect::<Result<Vec<_>>>()?;
        powers.push(next);
    }
    let mut mat = vec![vec![TruncSeries::zero(prec); k]; k];
    for j in 0..k {
        let mut acc = ModuleElement::zero(k, prec);
        for (n, a) in coeffs.iter().enumerate() {
            for i in 0..k {
                let c = &a[(i, j)];
                if !c.is_zero() {
                    acc = acc.add(&powers[n][i].scale(c));
                }
            }
        }
        let col = acc.mul_b_pow(1).truncate(prec);
        for i in 0..k {
            mat[i][j] = col.coords[i].clone();
        }
    }
    AbModule::from_matrix(mat)
}

/// An `a`-equivariant injective map `E -> Xi^(N) (x) V`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub layout: XiLayout,
    pub target: AbModule,
    /// `phi(e_j)` in the coordinates of the target.
    pub images: Vec<ModuleElement>,
}

impl Embedding {
    pub fn apply(&self, x: &ModuleElement) -> ModuleElement {
        let p = x
            .prec()
            .min(self.images.iter().map(|i| i.prec()).min().unwrap_or(0));
        let mut acc = ModuleElement::zero(self.target.rank(), p);
        for (c, img) in x.coords.iter().zip(&self.images) {
            acc = acc.add(&img.mul_series(c));
        }
        acc.truncate(p)
    }

    /// Whether `phi(a e_j) = a phi(e_j)` for every basis vector.
    pub fn check_equivariance(&self, e: &AbModule) -> Result<bool> {
        for (j, img) in self.images.iter().enumerate() {
            let lhs = self.apply(&e.a_column(j));
            let rhs = self.target.apply_a(img)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        let names = self.layout.names();
        json!({
            "alphas": self.layout.alphas.iter().map(fmt_rational).collect::<Vec<_>>(),
            "n": self.layout.n,
            "dim_v": self.layout.dim_v,
            "images": self.images.iter().map(|x| x.render(&names)).collect::<Vec<_>>(),
        })
    }
}

const DRAWS: usize = 4;

/// Searches `dim V = 1..=rank` and, inside, `N = 0..rank`, for an injective
/// equivariant map; parameters of the solution space are drawn from a
/// seeded generator.
pub fn embed_into_xi(e: &AbModule, seed: u64, cap: Option<usize>) -> Result<Embedding> {
    let sat = saturate(e, cap)?;
    let b = bernstein_of_saturated(&sat.module, BernsteinMode::Minimal, &[]);
    let cert = certify(b.clone());
    if !cert.geometric {
        return Err(AbError::NotGeometric(cert.reason));
    }
    let alphas = root_classes(&b);
    let k = e.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for dim_v in 1..=k {
        for n in 0..k {
            let layout = XiLayout::new(alphas.clone(), n, dim_v)?;
            let target = layout.build(sat.module.prec());
            let Some(space) = equivariant_maps(&sat.module, &target)? else {
                continue;
            };
            for _ in 0..DRAWS {
                let theta = space.random_point(&mut rng);
                let y = space.map(&theta);
                // phi on E: the columns of Y times the inclusion E -> E#
                let images: Vec<ModuleElement> = sat
                    .inclusion
                    .iter()
                    .map(|c| {
                        let mut acc = ModuleElement::zero(target.rank(), y[0].prec());
                        for (s, col) in c.coords.iter().zip(&y) {
                            acc = acc.add(&col.mul_series(s));
                        }
                        acc
                    })
                    .collect();
                if images.iter().any(|x| x.is_zero()) {
                    continue;
                }
                if Lattice::reduce(target.rank(), &images)?.rank() < k {
                    continue;
                }
                let emb = Embedding {
                    layout: layout.clone(),
                    target: target.clone(),
                    images,
                };
                if emb.check_equivariance(e)? {
                    return Ok(emb);
                }
            }
        }
    }
    Err(AbError::NoEmbeddingFound {
        max_n: k - 1,
        max_dim: k,
    })
}

/// Solution space of `Y X = b J Y + b^2 Y'` for maps from a simple-pole
/// module into a target with constant residue.
struct MapSpace {
    par: Parametric,
    basis: Vec<Vec<Rational>>,
    rows: usize,
    cols: usize,
}

impl MapSpace {
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<Rational> {
        loop {
            let mut theta = vec![Rational::zero(); self.par.params];
            let mut any = false;
            for v in &self.basis {
                let c: i64 = rng.gen_range(-5..=5);
                if c != 0 {
                    any = true;
                    for (t, x) in theta.iter_mut().zip(v) {
                        *t += x * int(c);
                    }
                }
            }
            if any {
                return theta;
            }
        }
    }

    /// Images of the source basis, one element per column of `Y`.
    fn map(&self, theta: &[Rational]) -> Vec<ModuleElement> {
        let flat = self.par.element(theta);
        (0..self.cols)
            .map(|c| {
                ModuleElement::new(
                    (0..self.rows)
                        .map(|r| flat.coords[r + self.rows * c].clone())
                        .collect(),
                )
            })
            .collect()
    }
}

fn unvec(v: &[Rational], rows: usize, cols: usize) -> QMatrix {
    let mut m = QMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = v[r + rows * c].clone();
        }
    }
    m
}

fn vec_of(m: &QMatrix) -> Vec<Rational> {
    let mut v = Vec::with_capacity(m.rows() * m.cols());
    for c in 0..m.cols() {
        for r in 0..m.rows() {
            v.push(m[(r, c)].clone());
        }
    }
    v
}

fn equivariant_maps(x: &AbModule, target: &AbModule) -> Result<Option<MapSpace>> {
    let k = x.rank();
    let t = target.rank();
    let r = x.coefficient_matrix(1);
    let j = target.coefficient_matrix(1);
    let nmax = x.prec().min(target.prec()).saturating_sub(1);
    let spec_r = crate::decomposition::rational_eigenvalues(&r);
    let spec_j = crate::decomposition::rational_eigenvalues(&j);
    let last_resonance = spec_r
        .iter()
        .flat_map(|mu| spec_j.iter().map(move |a| mu - a))
        .filter(|d| d.is_integer() && *d >= Rational::zero())
        .max();
    if let Some(n) = last_resonance {
        if n >= int(nmax as i64) {
            return Err(exhausted(
                "embedding resonance lies beyond the available precision",
            ));
        }
    }
    let xs: Vec<QMatrix> = (0..=nmax).map(|i| x.coefficient_matrix(i)).collect();
    let size = t * k;
    let mut par = Parametric::new(size);
    for n in 0..nmax {
        // (J + n) Y - Y R, vectorized
        let jn = j.add_scalar(&int(n as i64));
        let mut op = QMatrix::zeros(size, size);
        for c in 0..k {
            for row in 0..t {
                let idx = row + t * c;
                for r2 in 0..t {
                    let v = &jn[(row, r2)];
                    if !v.is_zero() {
                        op[(idx, r2 + t * c)] += v;
                    }
                }
                for c2 in 0..k {
                    let v = &r[(c2, c)];
                    if !v.is_zero() {
                        op[(idx, row + t * c2)] -= v;
                    }
                }
            }
        }
        let mut rhs = par.zero_rhs();
        for i in 2..=n + 1 {
            if xs[i].is_zero() {
                continue;
            }
            let prev = &par.terms[n + 1 - i];
            for p in 0..par.params {
                let col = vec_of(&unvec(&prev.column(p), t, k).mul(&xs[i]));
                for (row, v) in col.into_iter().enumerate() {
                    rhs[(row, p)] += v;
                }
            }
        }
        par.push(&op, &rhs);
    }
    let basis = par.solutions();
    if basis.is_empty() {
        return Ok(None);
    }
    Ok(Some(MapSpace {
        par,
        basis,
        rows: t,
        cols: k,
    }))
}

/// `coeff * s^(alpha + m - 1) * (Log s)^j`, on component `component` of `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionTerm {
    pub alpha: Rational,
    pub m: usize,
    pub j: usize,
    pub coeff: Rational,
    pub component: usize,
}

impl ExpansionTerm {
    pub fn exponent(&self) -> Rational {
        &self.alpha + int(self.m as i64) - int(1)
    }

    pub fn render(&self, show_component: bool) -> String {
        let mut factors = Vec::new();
        let e = self.exponent();
        if !e.is_zero() {
            factors.push(if e.is_one() {
                "s".to_string()
            } else if e.is_integer() && e > Rational::zero() {
                format!("s^{}", fmt_rational(&e))
            } else {
                format!("s^({})", fmt_rational(&e))
            });
        }
        match self.j {
            0 => {}
            1 => factors.push("log(s)".into()),
            j => factors.push(format!("log(s)^{j}")),
        }
        if show_component {
            factors.push(format!("v{}", self.component));
        }
        let c = &self.coeff;
        let cs = if c.is_integer() {
            fmt_rational(c)
        } else {
            format!("({})", fmt_rational(c))
        };
        if factors.is_empty() {
            return cs;
        }
        let body = factors.join("*");
        if c.is_one() {
            body
        } else if *c == -Rational::one() {
            format!("-{body}")
        } else {
            format!("{cs}*{body}")
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": fmt_rational(&self.alpha),
            "m": self.m,
            "j": self.j,
            "coeff": fmt_rational(&self.coeff),
            "component": self.component,
        })
    }
}

/// Finite sums of `s^(alpha + m - 1) (Log s)^j` terms with exact
/// coefficients, keyed by `(alpha, m, j, component)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expansion {
    pub terms: std::collections::BTreeMap<(Rational, usize, usize, usize), Rational>,
}

impl Expansion {
    fn insert(&mut self, key: (Rational, usize, usize, usize), c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Expansion::default();
        for (k, v) in &self.terms {
            out.insert(k.clone(), v * c);
        }
        out
    }

    /// Multiplication by `s`.
    pub fn mul_s(&self) -> Self {
        Expansion {
            terms: self
                .terms
                .iter()
                .map(|((a, m, j, v), c)| ((a.clone(), m + 1, *j, *v), c.clone()))
                .collect(),
        }
    }

    /// Term-wise primitive vanishing at 0:
    /// `int_0^s t^B L^p = s^(B+1) sum_i (-1)^i p!/(p-i)! L^(p-i) / (B+1)^(i+1)`.
    pub fn integrate(&self) -> Self {
        let mut out = Expansion::default();
        for ((a, m, p, v), c) in &self.terms {
            let b1 = a + int(*m as i64);
            let mut falling = Rational::one();
            let mut denom = b1.clone();
            for i in 0..=*p {
                let sign = if i % 2 == 0 { int(1) } else { int(-1) };
                out.insert((a.clone(), m + 1, p - i, *v), c * &sign * &falling / &denom);
                falling *= int((p - i) as i64);
                denom *= &b1;
            }
        }
        out
    }

    /// Drops terms with `m > order`.
    pub fn truncate(&self, order: usize) -> Self {
        Expansion {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.1 <= order)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_terms(&self) -> Vec<ExpansionTerm> {
        self.terms
            .iter()
            .map(|((a, m, j, v), c)| ExpansionTerm {
                alpha: a.clone(),
                m: *m,
                j: *j,
                coeff: c.clone(),
                component: *v,
            })
            .collect()
    }

    pub fn render(&self, show_component: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.to_terms()
            .iter()
            .map(|t| t.render(show_component))
            .collect::<Vec<_>>()
            .join(" + ")
            .replace("+ -", "- ")
    }
}

/// Realization of a basis vector: `e_(alpha, v, j) -> alpha^j/j! s^(alpha-1) (Log s)^j`.
pub fn realize_basis(layout: &XiLayout, idx: usize) -> Expansion {
    let (ai, v, j) = layout.locate(idx);
    let alpha = layout.alphas[ai].clone();
    let mut c = Rational::one();
    for i in 1..=j {
        c = c * &alpha / int(i as i64);
    }
    let mut e = Expansion::default();
    e.insert((alpha, 0, j, v), c);
    e
}

/// Expansion of an element of a `Xi` module, through `s`-order `order`
/// (terms `s^(alpha + m - 1)` with `m <= order`, capped by the precision).
pub fn realize_expansion(layout: &XiLayout, x: &ModuleElement, order: usize) -> Expansion {
    let order = order.min(x.prec().saturating_sub(1));
    let mut out = Expansion::default();
    for (idx, s) in x.coords.iter().enumerate() {
        if s.is_zero() {
            continue;
        }
        let mut current = realize_basis(layout, idx);
        for q in 0..=order {
            let c = s.coeff(q);
            if !c.is_zero() {
                out = out.add(&current.scale(&c));
            }
            if q < order {
                current = current.integrate();
            }
        }
    }
    out.truncate(order)
}

/// Predicted singular term for one class: `|s|^(2 alpha - 2) s^m
/// (Log |s|^2)^p`, with `m'` left open.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTerm {
    pub alpha: Rational,
    pub nilpotent_order: usize,
    pub root: Rational,
    pub m: usize,
    pub abs_exponent: Rational,
    pub log_power: usize,
    /// Multiplicity of the root in the Bernstein polynomial of the fresco.
    pub root_order: usize,
}

impl SingularTerm {
    pub fn render(&self) -> String {
        format!(
            "|s|^({})*s^{}*(Log|s|^2)^{} [alpha {}, d {}, root {}, order {}]",
            fmt_rational(&self.abs_exponent),
            self.m,
            self.log_power,
            fmt_rational(&self.alpha),
            self.nilpotent_order,
            fmt_rational(&self.root),
            self.root_order
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": fmt_rational(&self.alpha),
            "nilpotent_order": self.nilpotent_order,
            "root": fmt_rational(&self.root),
            "m": self.m,
            "m_prime": Value::Null,
            "abs_exponent": fmt_rational(&self.abs_exponent),
            "log_power": self.log_power,
            "root_order": self.root_order,
            "kind": "algebraic prediction",
        })
    }
}

/// For each class: the roots `-alpha - m` of the last higher Bernstein
/// polynomial and the log power `d - 1` (or `d` when `alpha = 1`).
pub fn singular_term_report(f: &AbModule, cap: Option<usize>) -> Result<Vec<SingularTerm>> {
    let h = higher_bernstein(f, cap)?;
    let mut out = Vec::new();
    for c in &h.classes {
        let d = c.levels.len();
        let Some(last) = c.levels.last() else {
            continue;
        };
        let log_power = if c.alpha.is_one() { d } else { d - 1 };
        for (r, _) in &last.poly.roots {
            let m = -r - &c.alpha;
            if !m.is_integer() || m < Rational::zero() {
                return Err(AbError::Validation(format!(
                    "root {} is not in -{} - N",
                    fmt_rational(r),
                    fmt_rational(&c.alpha)
                )));
            }
            out.push(SingularTerm {
                alpha: c.alpha.clone(),
                nilpotent_order: d,
                root: r.clone(),
                m: m.to_integer().try_into().unwrap_or(usize::MAX),
                abs_exponent: &c.alpha * int(2) - int(2),
                log_power,
                root_order: multiplicity(&h.bernstein.roots, r),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fresco::{fresco_from_presentation, FrescoPresentation};
    use crate::module::build_xi_tensor;
    use crate::saturation::bernstein_polynomial;
    use crate::scalar::rat;

    const P: usize = 12;

    fn constant_system(rows: &[&[Rational]]) -> DiffSystem {
        DiffSystem::new(
            rows.iter()
                .map(|r| r.iter().map(|c| vec![c.clone()]).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_systems() {
        let e = from_differential_system(&constant_system(&[&[rat(1, 3)]]), P).unwrap();
        assert_eq!(e, AbModule::e_lambda(&rat(1, 3), P));
        let a = rat(2, 5);
        let e = from_differential_system(
            &constant_system(&[&[a.clone(), int(1)], &[int(0), a.clone()]]),
            P,
        )
        .unwrap();
        assert!(e.is_simple_pole());
        assert_eq!(e.entry(0, 1), &TruncSeries::monomial(int(1), 1, P));
        let b = bernstein_polynomial(&e, BernsteinMode::Minimal, &[], None).unwrap();
        assert_eq!(b.roots, vec![(-a, 2)]);
    }

    #[test]
    fn one_dimensional_fixed_point() {
        // X (1 - b) = alpha b + b^2
        let a = rat(1, 2);
        let sys = DiffSystem::new(vec![vec![vec![a.clone(), int(1)]]]).unwrap();
        let e = from_differential_system(&sys, P).unwrap();
        let x = e.entry(0, 0);
        assert!(x.coeff(0).is_zero());
        assert_eq!(x.coeff(1), a);
        for n in 2..P {
            assert_eq!(x.coeff(n), &a + int(1), "b^{n}");
        }
    }

    #[test]
    fn system_json() {
        let sys = DiffSystem::from_json(r#"{"size":1,"entries":[[["1/2","1"]]]}"#).unwrap();
        assert_eq!(sys.entries[0][0], vec![rat(1, 2), int(1)]);
        assert_eq!(
            DiffSystem::from_json(&sys.to_json().to_string()).unwrap(),
            sys
        );
        assert!(DiffSystem::from_json(r#"{"size":2,"entries":[[["1"]]]}"#).is_err());
    }

    #[test]
    fn embed_rank_one_shifted() {
        let e = AbModule::e_lambda(&rat(3, 2), P);
        let emb = embed_into_xi(&e, 7, None).unwrap();
        assert_eq!((emb.layout.n, emb.layout.dim_v), (0, 1));
        assert_eq!(emb.layout.alphas, vec![rat(1, 2)]);
        let img = &emb.images[0];
        assert!(img.coords[0].coeff(0).is_zero());
        assert!(!img.coords[0].coeff(1).is_zero());
        assert!(emb.check_equivariance(&e).unwrap());
    }

    #[test]
    fn embed_theme_uses_one_dimensional_v() {
        let p = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)]);
        let f = fresco_from_presentation(&p, P).unwrap().module;
        let emb = embed_into_xi(&f, 1, None).unwrap();
        assert_eq!((emb.layout.n, emb.layout.dim_v), (1, 1));
        assert!(emb.check_equivariance(&f).unwrap());
        // (a - b/2)[1] lands on a multiple of b e_0
        let x = ModuleElement::new(vec![
            TruncSeries::monomial(rat(-1, 2), 1, P),
            TruncSeries::one(P),
        ]);
        let y = emb.apply(&x);
        assert!(y.coords[1].is_zero());
        assert_eq!(y.coords[0].valuation(), Some(1));
    }

    #[test]
    fn embed_xi_itself() {
        let xi = build_xi_tensor(&[rat(1, 2)], 1, 1, P).unwrap();
        let emb = embed_into_xi(&xi, 3, None).unwrap();
        assert_eq!(emb.layout.n, 1);
        let l = Lattice::reduce(2, &emb.images).unwrap();
        assert_eq!(l.rank(), 2);
    }

    #[test]
    fn embed_two_classes() {
        let e = build_xi_tensor(&[rat(1, 2), rat(1, 3)], 0, 1, P).unwrap();
        let emb = embed_into_xi(&e, 0, None).unwrap();
        assert_eq!(emb.layout.alphas, vec![rat(1, 3), rat(1, 2)]);
        assert!(emb.check_equivariance(&e).unwrap());
    }

    /// `int_0^s t^B L^p` by integration by parts, as (exponent, log power) -> coeff.
    fn parts(b: &Rational, p: usize) -> Vec<(usize, Rational)> {
        let b1 = b + int(1);
        if p == 0 {
            return vec![(0, int(1) / &b1)];
        }
        let mut out = vec![(p, int(1) / &b1)];
        for (j, c) in parts(b, p - 1) {
            out.push((j, -c * int(p as i64) / &b1));
        }
        out
    }

    #[test]
    fn integration_matches_parts() {
        for (a, m, p) in [(rat(1, 2), 0, 3), (rat(1, 3), 2, 2), (int(1), 1, 4)] {
            let mut e = Expansion::default();
            e.insert((a.clone(), m, p, 0), int(1));
            let got = e.integrate();
            let b = &a + int(m as i64) - int(1);
            for (j, c) in parts(&b, p) {
                assert_eq!(got.terms.get(&(a.clone(), m + 1, j, 0)), Some(&c));
            }
            assert_eq!(got.terms.len(), p + 1);
        }
    }

    #[test]
    fn realization_examples() {
        let xi0 = XiLayout::new(vec![rat(1, 2)], 0, 1).unwrap();
        let e0 = ModuleElement::basis(1, 0, P);
        assert_eq!(realize_expansion(&xi0, &e0, 4).render(false), "s^(-1/2)");
        let be0 = e0.mul_b_pow(1).truncate(P);
        assert_eq!(realize_expansion(&xi0, &be0, 4).render(false), "2*s^(1/2)");
        let xi1 = XiLayout::new(vec![rat(1, 2)], 1, 1).unwrap();
        let e1 = ModuleElement::basis(2, 1, P);
        assert_eq!(
            realize_expansion(&xi1, &e1, 4).render(false),
            "(1/2)*s^(-1/2)*log(s)"
        );
    }

    #[test]
    fn realization_intertwines() {
        let layout = XiLayout::new(vec![rat(1, 2)], 1, 1).unwrap();
        let xi = layout.build(P);
        let x = ModuleElement::new(vec![
            TruncSeries::from_poly(&[int(1), int(2), rat(1, 3)], P),
            TruncSeries::from_poly(&[int(0), int(-1), int(4)], P),
        ]);
        let order = 6;
        let rx = realize_expansion(&layout, &x, order);
        let ax = xi.apply_a(&x).unwrap();
        assert_eq!(
            realize_expansion(&layout, &ax, order),
            rx.mul_s().truncate(order)
        );
        let bx = xi.apply_b(&x).unwrap();
        assert_eq!(
            realize_expansion(&layout, &bx, order),
            rx.integrate().truncate(order)
        );
    }

    #[test]
    fn singular_terms() {
        let p = FrescoPresentation::from_lambdas(&[rat(3, 2), rat(1, 2)]);
        let f = fresco_from_presentation(&p, P).unwrap().module;
        let r = singular_term_report(&f, None).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!((r[0].nilpotent_order, r[0].m, r[0].log_power), (2, 0, 1));
        assert_eq!(r[0].abs_exponent, int(-1));
        let r = singular_term_report(&AbModule::e_lambda(&rat(1, 2), P), None).unwrap();
        assert_eq!(r[0].log_power, 0);
        let r = singular_term_report(&AbModule::e_lambda(&int(1), P), None).unwrap();
        assert_eq!((r[0].alpha.clone(), r[0].log_power), (int(1), 1));
    }
}
