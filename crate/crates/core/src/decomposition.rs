//! Eigen elements, the semi-simple filtration, primitive parts and higher
//! Bernstein polynomials.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{exhausted, AbError, Result};
use crate::lattice::{quotient_module, Lattice, Quotient};
use crate::linalg::{sylvester, Parametric, QMatrix};
use crate::module::{AbModule, BernsteinMode, ModuleElement};
use crate::poly::{Polynomial, RationalPolynomial};
use crate::saturation::{bernstein_of_saturated, certify, saturate, Saturation};
use crate::scalar::{class_mod_one, fmt_rational, int, Rational};
use crate::series::TruncSeries;

/// Distinct rational eigenvalues of a constant matrix.
pub(crate) fn rational_eigenvalues(r: &QMatrix) -> Vec<Rational> {
    r.charpoly()
        .rational_roots(&[])
        .0
        .into_iter()
        .map(|x| x.0)
        .collect()
}

/// Eigen elements `(a - lambda b) y = 0` of a simple-pole module, as a basis
/// of the rational solution space.
fn eigen_sharp(x: &AbModule, lambda: &Rational) -> Result<Vec<ModuleElement>> {
    let k = x.rank();
    let r = x.coefficient_matrix(1);
    let nmax = x.prec().saturating_sub(1);
    let resonant = rational_eigenvalues(&r)
        .into_iter()
        .map(|mu| lambda - mu)
        .filter(|d| d.is_integer() && *d >= Rational::zero())
        .map(|d| d.to_integer())
        .max();
    if let Some(n) = resonant {
        if n >= num_bigint::BigInt::from(nmax) {
            return Err(exhausted(format!(
                "eigenvalue {} resonates beyond the available precision",
                fmt_rational(lambda)
            )));
        }
    }
    let xs: Vec<QMatrix> = (0..=nmax).map(|i| x.coefficient_matrix(i)).collect();
    let mut par = Parametric::new(k);
    for n in 0..nmax {
        let mut rhs = par.zero_rhs();
        for i in 2..=n + 1 {
            if !xs[i].is_zero() {
                rhs = rhs.sub(&xs[i].mul(&par.terms[n + 1 - i]));
            }
        }
        let m = r.add_scalar(&(int(n as i64) - lambda));
        par.push(&m, &rhs);
    }
    Ok(par.solutions().iter().map(|t| par.element(t)).collect())
}

fn saturated_geometric(e: &AbModule, cap: Option<usize>) -> Result<Saturation> {
    let sat = saturate(e, cap)?;
    let c = certify(bernstein_of_saturated(
        &sat.module,
        BernsteinMode::Minimal,
        &[],
    ));
    if !c.geometric {
        return Err(AbError::NotGeometric(c.reason));
    }
    Ok(sat)
}

/// Lattice spanned by the solutions of `(a - lambda b) x = 0` in `E`.
pub fn eigen_elements(e: &AbModule, lambda: &Rational, cap: Option<usize>) -> Result<Lattice> {
    let k = e.rank();
    let sat = saturate(e, cap)?;
    let ys = eigen_sharp(&sat.module, lambda)?;
    let zs: Vec<ModuleElement> = ys.iter().map(|y| sat.pull_back_scaled(y)).collect();
    let s = sat.shift;
    let elements = if s == 0 || zs.is_empty() {
        zs
    } else {
        // combinations whose coefficients below b^s vanish
        let rows: Vec<Vec<Rational>> = (0..k)
            .flat_map(|c| (0..s).map(move |t| (c, t)))
            .map(|(c, t)| zs.iter().map(|z| z.coords[c].coeff(t)).collect())
            .collect();
        QMatrix::from_rows(rows)
            .kernel()
            .into_iter()
            .map(|comb| {
                let mut acc = ModuleElement::zero(k, zs[0].prec());
                for (c, z) in comb.iter().zip(&zs) {
                    acc = acc.add(&z.scale(c));
                }
                acc.div_b_pow(s)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let elements: Vec<ModuleElement> = elements.into_iter().filter(|z| !z.is_zero()).collect();
    if elements.is_empty() {
        return Ok(Lattice::zero(k, e.prec()));
    }
    Lattice::reduce(k, &elements)
}

/// Normal hull of the span of all eigen elements (requires a geometric module).
pub fn semisimple_part(e: &AbModule, cap: Option<usize>) -> Result<Lattice> {
    let k = e.rank();
    let sat = saturated_geometric(e, cap)?;
    let mut gens = Vec::new();
    for mu in rational_eigenvalues(&sat.module.coefficient_matrix(1)) {
        for y in eigen_sharp(&sat.module, &mu)? {
            let z = sat.pull_back_scaled(&y);
            if !z.is_zero() {
                gens.push(z);
            }
        }
    }
    if gens.is_empty() {
        return Ok(Lattice::zero(k, e.prec()));
    }
    Lattice::reduce(k, &gens)?.normal_hull()
}

pub fn is_semisimple(e: &AbModule, cap: Option<usize>) -> Result<bool> {
    Ok(semisimple_part(e, cap)?.rank() == e.rank())
}

/// `S_1 ⊂ ... ⊂ S_d = E`.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub steps: Vec<Lattice>,
}

impl Filtration {
    pub fn nilpotent_order(&self) -> usize {
        self.steps.len()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.rank()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nilpotent_order": self.nilpotent_order(),
            "ranks": self.ranks(),
            "steps": self.steps.iter().map(|s| s.basis().iter().map(|b| b.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// `S_{j+1}` is the preimage of the semi-simple part of `E / S_j`.
pub fn semisimple_filtration(e: &AbModule, cap: Option<usize>) -> Result<Filtration> {
    let k = e.rank();
    let mut steps = vec![semisimple_part(e, cap)?];
    loop {
        let last = steps.last().unwrap();
        if last.rank() == k {
            return Ok(Filtration { steps });
        }
        if last.rank() == 0 || steps.len() > k {
            return Err(AbError::Validation(
                "semi-simple filtration stopped growing".into(),
            ));
        }
        let q = quotient_module(e, last)?;
        let s = semisimple_part(&q.module, cap)?;
        if s.rank() == 0 {
            return Err(AbError::Validation("quotient has no eigen elements".into()));
        }
        let next = q.preimage(&s)?;
        steps.push(next);
    }
}

/// Sub-quotient `S_j / S_{j-1}` of a filtration, as a module.
pub fn filtration_layer(e: &AbModule, f: &Filtration, j: usize) -> Result<AbModule> {
    let sj = &f.steps[j];
    let mj = sj.as_module(e)?;
    if j == 0 {
        return Ok(mj);
    }
    let prev = f.steps[j - 1].relative_to(sj)?;
    Ok(quotient_module(&mj, &prev)?.module)
}

/// `E_not` (the part with Bernstein roots outside `-classes`) and the
/// primitive quotient `E / E_not`.
#[derive(Clone, Debug)]
pub struct PrimitiveSplit {
    pub not: Lattice,
    /// `None` when no Bernstein root lies in the chosen classes.
    pub part: Option<Quotient>,
}

fn in_classes(mu: &Rational, classes: &[Rational]) -> bool {
    let c = class_mod_one(mu);
    classes.iter().any(|a| class_mod_one(a) == c)
}

/// Splits off the classes `classes` (mod Z) by a block gauge transform on
/// the saturation, then intersects back with `E`.
pub fn primitive_split(
    e: &AbModule,
    classes: &[Rational],
    cap: Option<usize>,
) -> Result<PrimitiveSplit> {
    let k = e.rank();
    let sat = saturated_geometric(e, cap)?;
    let x = &sat.module;
    let r = x.coefficient_matrix(1);
    let (roots, _) = r.charpoly().rational_roots(&[]);
    let mut inside: Vec<Vec<Rational>> = Vec::new();
    let mut outside: Vec<Vec<Rational>> = Vec::new();
    for (mu, m) in &roots {
        let mut pw = QMatrix::identity(k);
        let shifted = r.add_scalar(&-mu.clone());
        for _ in 0..*m {
            pw = pw.mul(&shifted);
        }
        let space = pw.kernel();
        if in_classes(mu, classes) {
            inside.extend(space);
        } else {
            outside.extend(space);
        }
    }
    let n_in = inside.len();
    if n_in == 0 {
        return Ok(PrimitiveSplit {
            not: Lattice::full(k, e.prec()),
            part: None,
        });
    }
    let not = if outside.is_empty() {
        Lattice::zero(k, e.prec())
    } else {
        let mut cols = inside;
        cols.extend(outside);
        let q = QMatrix::from_columns(k, &cols);
        let qinv = q
            .inverse()
            .ok_or_else(|| AbError::Validation("eigenspaces do not span".into()))?;
        let p = x.prec();
        let xt: Vec<QMatrix> = (0..p)
            .map(|i| qinv.mul(&x.coefficient_matrix(i)).mul(&q))
            .collect();
        let gs = block_gauge(&xt, n_in)?;
        let gens: Vec<ModuleElement> = (n_in..k)
            .map(|j| {
                let y = ModuleElement::new(
                    (0..k)
                        .map(|i| {
                            TruncSeries::from_coeffs(
                                gs.iter().map(|g| q.mul(g)[(i, j)].clone()).collect(),
                            )
                        })
                        .collect(),
                );
                sat.pull_back_scaled(&y)
            })
            .collect();
        Lattice::reduce(k, &gens)?.normal_hull()?
    };
    let part = quotient_module(e, &not)?;
    Ok(PrimitiveSplit {
        not,
        part: Some(part),
    })
}

/// Gauge `G = I + sum G_n b^n` (off-diagonal blocks only) with
/// `G^{-1}(X G + b^2 G')` block diagonal; returns `G_0, G_1, ...`.
fn block_gauge(xt: &[QMatrix], n_in: usize) -> Result<Vec<QMatrix>> {
    let k = xt[0].rows();
    let p = xt.len();
    let r = &xt[1];
    let blk = |m: &QMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        QMatrix::from_rows(
            rows.map(|i| cols.clone().map(|j| m[(i, j)].clone()).collect())
                .collect(),
        )
    };
    let r_in = blk(r, 0..n_in, 0..n_in);
    let r_out = blk(r, n_in..k, n_in..k);
    if !blk(r, 0..n_in, n_in..k).is_zero() || !blk(r, n_in..k, 0..n_in).is_zero() {
        return Err(AbError::Validation("residue is not block diagonal".into()));
    }
    let mut g = vec![QMatrix::identity(k)];
    let mut y = vec![QMatrix::zeros(k, k), r.clone()];
    for n in 1..p - 1 {
        let mut c = xt[n + 1].clone();
        for i in 2..=n {
            c = c.add(&xt[i].mul(&g[n + 1 - i]));
        }
        for j in 1..n {
            c = c.sub(&g[j].mul(&y[n + 1 - j]));
        }
        let nn = int(n as i64);
        let x12 = sylvester(
            &r_in.add_scalar(&nn),
            &r_out,
            &blk(&c, 0..n_in, n_in..k).scale(&int(-1)),
        )
        .ok_or_else(|| exhausted("gauge equation has no solution"))?;
        let x21 = sylvester(
            &r_out.add_scalar(&nn),
            &r_in,
            &blk(&c, n_in..k, 0..n_in).scale(&int(-1)),
        )
        .ok_or_else(|| exhausted("gauge equation has no solution"))?;
        let mut gn = QMatrix::zeros(k, k);
        let mut yn = QMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let same = (i < n_in) == (j < n_in);
                if same {
                    yn[(i, j)] = c[(i, j)].clone();
                } else if i < n_in {
                    gn[(i, j)] = x12[(i, j - n_in)].clone();
                } else {
                    gn[(i, j)] = x21[(i - n_in, j)].clone();
                }
            }
        }
        g.push(gn);
        y.push(yn);
    }
    Ok(g)
}

/// Classes mod Z (in `(0, 1]`) of the Bernstein roots, ordered.
pub fn root_classes(b: &RationalPolynomial) -> Vec<Rational> {
    let mut cs: Vec<Rational> = b
        .roots
        .iter()
        .map(|r| class_mod_one(&-r.0.clone()))
        .collect();
    cs.sort();
    cs.dedup();
    cs
}

/// One level `B_j = B~_j(x - delta_j)` of a class.
#[derive(Clone, Debug)]
pub struct Level {
    pub j: usize,
    pub delta: usize,
    pub layer: RationalPolynomial,
    pub poly: RationalPolynomial,
}

#[derive(Clone, Debug)]
pub struct ClassLevels {
    pub alpha: Rational,
    pub rank: usize,
    pub levels: Vec<Level>,
}

#[derive(Clone, Debug)]
pub struct HigherBernstein {
    pub classes: Vec<ClassLevels>,
    /// `B_j(F)`: product over classes of the class levels.
    pub assembled: Vec<RationalPolynomial>,
    pub bernstein: RationalPolynomial,
    pub product_check: bool,
    pub diagnostics: Vec<String>,
}

impl HigherBernstein {
    pub fn nilpotent_order(&self) -> usize {
        self.assembled.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "classes": self.classes.iter().map(|c| json!({
                "alpha": fmt_rational(&c.alpha),
                "nilpotent_order": c.levels.len(),
                "levels": c.levels.iter().map(|l| json!({
                    "j": l.j,
                    "delta": l.delta,
                    "poly": l.poly.to_string(),
                    "roots": l.poly.to_json()["roots"].clone(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "assembled": self.assembled.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            "bernstein": self.bernstein.to_string(),
            "product_check": self.product_check,
            "diagnostics": self.diagnostics,
        })
    }
}

/// Higher Bernstein polynomials of a geometric fresco module, validated
/// against the product theorem, simple roots and non-increasing degrees.
pub fn higher_bernstein(f: &AbModule, cap: Option<usize>) -> Result<HigherBernstein> {
    let sat = saturated_geometric(f, cap)?;
    let bernstein = bernstein_of_saturated(&sat.module, BernsteinMode::Characteristic, &[]);
    let mut diagnostics = Vec::new();
    let mut classes = Vec::new();
    for alpha in root_classes(&bernstein) {
        let split = primitive_split(f, std::slice::from_ref(&alpha), cap)?;
        let Some(part) = split.part else { continue };
        let m = &part.module;
        let filt = semisimple_filtration(m, cap)?;
        let mut levels = Vec::new();
        for j in 0..filt.nilpotent_order() {
            let layer_mod = filtration_layer(m, &filt, j)?;
            let layer = crate::saturation::bernstein_polynomial(
                &layer_mod,
                BernsteinMode::Characteristic,
                &[],
                cap,
            )?;
            let delta = m.rank() - filt.steps[j].rank();
            let poly = layer.shift(&-int(delta as i64));
            if poly.degree() != layer_mod.rank() {
                diagnostics.push(format!(
                    "class {}: level {} has degree {} but the layer has rank {}",
                    fmt_rational(&alpha),
                    j + 1,
                    poly.degree(),
                    layer_mod.rank()
                ));
            }
            if !poly.has_simple_roots() {
                diagnostics.push(format!(
                    "class {}: level {} has a repeated root: {}",
                    fmt_rational(&alpha),
                    j + 1,
                    poly
                ));
            }
            levels.push(Level {
                j: j + 1,
                delta,
                layer,
                poly,
            });
        }
        for w in levels.windows(2) {
            if w[1].poly.degree() > w[0].poly.degree() {
                diagnostics.push(format!(
                    "class {}: degree rises from level {} to {}",
                    fmt_rational(&alpha),
                    w[0].j,
                    w[1].j
                ));
            }
        }
        classes.push(ClassLevels {
            alpha,
            rank: m.rank(),
            levels,
        });
    }
    let d = classes.iter().map(|c| c.levels.len()).max().unwrap_or(0);
    let assembled: Vec<RationalPolynomial> = (0..d)
        .map(|j| {
            classes
                .iter()
                .filter_map(|c| c.levels.get(j))
                .fold(RationalPolynomial::one(), |acc, l| acc.mul(&l.poly))
        })
        .collect();
    let product = assembled
        .iter()
        .fold(Polynomial::one(), |acc, b| acc.mul(&b.poly));
    let product_check = product == bernstein.poly;
    if !product_check {
        diagnostics.push(format!(
            "product of levels differs from the Bernstein polynomial {bernstein}"
        ));
    }
    Ok(HigherBernstein {
        classes,
        assembled,
        bernstein,
        product_check,
        diagnostics,
    })
}
