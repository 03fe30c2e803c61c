//! (a,b)-modules: free modules of finite rank over truncated series in `b`,
//! with `a` prescribed on a basis.
//!
//! The `a`-matrix is stored column-wise in the usual sense: column `j` holds
//! the coordinates of `a e_j`. On a general element `a` acts by
//! `a (S e_j) = S (a e_j) + b^2 S' e_j`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::AbOperator;
use crate::error::{AbError, Result};
use crate::scalar::{fmt_rational, parse_rational, Rational};
use crate::series::{SeriesJson, TruncSeries};

/// Coordinates of an element on the basis of its host module.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    pub coords: Vec<TruncSeries>,
}

impl ModuleElement {
    pub fn new(coords: Vec<TruncSeries>) -> Self {
        ModuleElement { coords }
    }

    pub fn zero(rank: usize, prec: usize) -> Self {
        ModuleElement {
            coords: vec![TruncSeries::zero(prec); rank],
        }
    }

    /// The basis vector `e_i`.
    pub fn basis(rank: usize, i: usize, prec: usize) -> Self {
        let mut x = Self::zero(rank, prec);
        x.coords[i] = TruncSeries::one(prec);
        x
    }

    /// `sum_i c_i e_i` with rational constants.
    pub fn from_constants(cs: &[Rational], prec: usize) -> Self {
        ModuleElement {
            coords: cs
                .iter()
                .map(|c| TruncSeries::constant(c.clone(), prec))
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    /// Smallest coordinate precision.
    pub fn prec(&self) -> usize {
        self.coords
            .iter()
            .map(|c| c.prec())
            .min()
            .unwrap_or(usize::MAX)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Smallest known coordinate valuation, `None` if zero to precision.
    pub fn valuation(&self) -> Option<usize> {
        self.coords.iter().filter_map(|c| c.valuation()).min()
    }

    pub fn add(&self, o: &Self) -> Self {
        ModuleElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(x, y)| x.add(y))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ModuleElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(x, y)| x.sub(y))
                .collect(),
        }
    }

    /// `S(b) * x`
    pub fn mul_series(&self, s: &TruncSeries) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|x| x.scale(c)).collect(),
        }
    }

    pub fn mul_b_pow(&self, n: usize) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|c| c.mul_b_pow(n)).collect(),
        }
    }

    pub fn div_b_pow(&self, n: usize) -> Result<Self> {
        Ok(ModuleElement {
            coords: self
                .coords
                .iter()
                .map(|c| c.div_b_pow(n))
                .collect::<Result<_>>()?,
        })
    }

    pub fn truncate(&self, prec: usize) -> Self {
        ModuleElement {
            coords: self.coords.iter().map(|c| c.truncate(prec)).collect(),
        }
    }

    /// Coefficient vector of `b^n`.
    pub fn coeff_vector(&self, n: usize) -> Vec<Rational> {
        self.coords.iter().map(|c| c.coeff(n)).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coords
                .iter()
                .map(|c| json!(SeriesJson::from(c)))
                .collect(),
        )
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (c, n) in self.coords.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            if s == "1" {
                parts.push(n.clone());
            } else {
                parts.push(format!("({s})*{n}"));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Which polynomial of the residue is reported as the Bernstein polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BernsteinMode {
    Minimal,
    Characteristic,
}

#[derive(Clone, Debug)]
pub struct AbModule {
    a_matrix: Vec<Vec<TruncSeries>>,
    prec: usize,
}

impl AbModule {
    /// Module with `a e_j = sum_i mat[i][j] e_i`. Precision is the smallest
    /// entry precision.
    pub fn from_matrix(mat: Vec<Vec<TruncSeries>>) -> Result<Self> {
        let k = mat.len();
        if k == 0 {
            return Err(AbError::Invalid("rank must be at least 1".into()));
        }
        for row in &mat {
            if row.len() != k {
                return Err(AbError::NonSquare {
                    rows: k,
                    cols: row.len(),
                });
            }
        }
        let prec = mat.iter().flatten().map(|s| s.prec()).min().unwrap_or(0);
        if prec == 0 {
            return Err(AbError::Invalid(
                "a-matrix entries need positive precision".into(),
            ));
        }
        let a_matrix = mat
            .into_iter()
            .map(|r| r.into_iter().map(|s| s.truncate(prec)).collect())
            .collect();
        Ok(AbModule { a_matrix, prec })
    }

    /// Module from a constant residue: `a e_j = b * sum_i r[i][j] e_i`.
    pub fn from_residue(r: &crate::linalg::QMatrix, prec: usize) -> Result<Self> {
        let k = r.rows();
        let mat = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| TruncSeries::monomial(r[(i, j)].clone(), 1, prec))
                    .collect()
            })
            .collect();
        Self::from_matrix(mat)
    }

    /// The rank one module `E_lambda`: `a e = lambda b e`.
    pub fn e_lambda(lambda: &Rational, prec: usize) -> Self {
        Self::from_matrix(vec![vec![TruncSeries::monomial(lambda.clone(), 1, prec)]])
            .expect("rank one")
    }

    pub fn rank(&self) -> usize {
        self.a_matrix.len()
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn a_matrix(&self) -> &[Vec<TruncSeries>] {
        &self.a_matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &TruncSeries {
        &self.a_matrix[i][j]
    }

    /// Coordinates of `a e_j`.
    pub fn a_column(&self, j: usize) -> ModuleElement {
        ModuleElement::new(
            (0..self.rank())
                .map(|i| self.a_matrix[i][j].clone())
                .collect(),
        )
    }

    /// Constant matrix of the `b^n` coefficients of the `a`-matrix.
    pub fn coefficient_matrix(&self, n: usize) -> crate::linalg::QMatrix {
        let k = self.rank();
        crate::linalg::QMatrix::from_rows(
            (0..k)
                .map(|i| (0..k).map(|j| self.a_matrix[i][j].coeff(n)).collect())
                .collect(),
        )
    }

    pub fn basis(&self, i: usize) -> ModuleElement {
        ModuleElement::basis(self.rank(), i, self.prec)
    }

    fn check(&self, x: &ModuleElement) -> Result<()> {
        if x.rank() != self.rank() {
            return Err(AbError::HostMismatch {
                expected: self.rank(),
                got: x.rank(),
            });
        }
        Ok(())
    }

    /// `a x`
    pub fn apply_a(&self, x: &ModuleElement) -> Result<ModuleElement> {
        self.check(x)?;
        let k = self.rank();
        let p = self.prec.min(x.prec());
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let mut acc = x.coords[i].derivative().mul_b_pow(2).truncate(p);
            for j in 0..k {
                let xj = &x.coords[j];
                if xj.is_zero() {
                    continue;
                }
                acc = acc.add(&self.a_matrix[i][j].mul(xj));
            }
            out.push(acc.truncate(p));
        }
        Ok(ModuleElement::new(out))
    }

    /// `b x`, kept at the precision of `x`.
    pub fn apply_b(&self, x: &ModuleElement) -> Result<ModuleElement> {
        self.check(x)?;
        Ok(x.mul_b_pow(1).truncate(x.prec()))
    }

    /// Action of an operator in normal form `sum_q b^q Pi_q(a)`.
    pub fn act(&self, op: &AbOperator, x: &ModuleElement) -> Result<ModuleElement> {
        self.check(x)?;
        let p = x.prec().min(op.prec()).min(self.prec);
        let x = x.truncate(p);
        let deg = op.a_degree();
        let mut pows = vec![x.clone()];
        for _ in 0..deg {
            let next = self.apply_a(pows.last().unwrap())?;
            pows.push(next);
        }
        let mut acc = ModuleElement::zero(self.rank(), p);
        for q in 0..p {
            for (m, c) in op.pi(q).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let term = pows[m].scale(c).mul_b_pow(q).truncate(p);
                acc = acc.add(&term);
            }
        }
        Ok(acc)
    }

    /// `a E` contained in `b E`.
    pub fn is_simple_pole(&self) -> bool {
        self.a_matrix.iter().flatten().all(|s| s.coeff(0).is_zero())
    }

    /// Same module, coefficients cut to a lower precision.
    pub fn truncate(&self, prec: usize) -> Self {
        let prec = prec.min(self.prec).max(1);
        AbModule {
            a_matrix: self
                .a_matrix
                .iter()
                .map(|r| r.iter().map(|s| s.truncate(prec)).collect())
                .collect(),
            prec,
        }
    }

    /// Direct sum with block-diagonal `a`-matrix.
    pub fn direct_sum(&self, o: &Self) -> Self {
        let p = self.prec.min(o.prec);
        let (k1, k2) = (self.rank(), o.rank());
        let mut mat = vec![vec![TruncSeries::zero(p); k1 + k2]; k1 + k2];
        for i in 0..k1 {
            for j in 0..k1 {
                mat[i][j] = self.a_matrix[i][j].truncate(p);
            }
        }
        for i in 0..k2 {
            for j in 0..k2 {
                mat[k1 + i][k1 + j] = o.a_matrix[i][j].truncate(p);
            }
        }
        AbModule {
            a_matrix: mat,
            prec: p,
        }
    }

    pub fn to_json(&self) -> Value {
        json!(ModuleJson::from(self))
    }

    pub fn render_matrix(&self) -> Vec<String> {
        self.a_matrix
            .iter()
            .map(|r| {
                format!(
                    "[{}]",
                    r.iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
            .collect()
    }
}

impl PartialEq for AbModule {
    /// Same rank and `a`-matrices agreeing at the shared precision.
    fn eq(&self, o: &Self) -> bool {
        self.a_matrix == o.a_matrix
    }
}

/// JSON shape `{rank, prec, a_matrix: [[series]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleJson {
    pub rank: usize,
    pub prec: usize,
    pub a_matrix: Vec<Vec<SeriesJson>>,
}

impl From<&AbModule> for ModuleJson {
    fn from(m: &AbModule) -> Self {
        ModuleJson {
            rank: m.rank(),
            prec: m.prec,
            a_matrix: m
                .a_matrix
                .iter()
                .map(|r| r.iter().map(SeriesJson::from).collect())
                .collect(),
        }
    }
}

impl TryFrom<&ModuleJson> for AbModule {
    type Error = AbError;
    fn try_from(j: &ModuleJson) -> Result<Self> {
        if j.a_matrix.len() != j.rank {
            return Err(AbError::Invalid("rank does not match a_matrix".into()));
        }
        let mat = j
            .a_matrix
            .iter()
            .map(|r| {
                r.iter()
                    .map(TruncSeries::try_from)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = AbModule::from_matrix(mat)?;
        Ok(m.truncate(j.prec))
    }
}

/// Parses the module JSON format.
pub fn module_from_json(text: &str) -> Result<AbModule> {
    let j: ModuleJson =
        serde_json::from_str(text).map_err(|e| AbError::Invalid(format!("module JSON: {e}")))?;
    AbModule::try_from(&j)
}

/// Index layout of `(oplus_alpha Xi_alpha^(N)) (x) V`: basis vector
/// `e_{alpha, v, j}` sits at `((alpha_index * dim_v) + v) * (N + 1) + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiLayout {
    pub alphas: Vec<Rational>,
    pub n: usize,
    pub dim_v: usize,
}

impl XiLayout {
    pub fn new(alphas: Vec<Rational>, n: usize, dim_v: usize) -> Result<Self> {
        for a in &alphas {
            if !a.is_positive() || a > &Rational::one() {
                return Err(AbError::BadAlpha(fmt_rational(a)));
            }
        }
        if alphas.is_empty() || dim_v == 0 {
            return Err(AbError::Invalid(
                "need at least one alpha and dim V >= 1".into(),
            ));
        }
        Ok(XiLayout { alphas, n, dim_v })
    }

    pub fn rank(&self) -> usize {
        self.alphas.len() * self.dim_v * (self.n + 1)
    }

    pub fn index(&self, alpha: usize, v: usize, j: usize) -> usize {
        (alpha * self.dim_v + v) * (self.n + 1) + j
    }

    /// Inverse of [`XiLayout::index`].
    pub fn locate(&self, idx: usize) -> (usize, usize, usize) {
        let j = idx % (self.n + 1);
        let rest = idx / (self.n + 1);
        (rest / self.dim_v, rest % self.dim_v, j)
    }

    /// Basis labels like `e[1/2;0,1]` (alpha; V-index, log level).
    pub fn names(&self) -> Vec<String> {
        (0..self.rank())
            .map(|i| {
                let (a, v, j) = self.locate(i);
                if self.alphas.len() == 1 && self.dim_v == 1 {
                    format!("e{j}")
                } else {
                    format!("e[{};{},{}]", fmt_rational(&self.alphas[a]), v, j)
                }
            })
            .collect()
    }

    /// `a e_j = alpha b (e_j + e_{j-1})` on every block.
    pub fn build(&self, prec: usize) -> AbModule {
        let k = self.rank();
        let mut mat = vec![vec![TruncSeries::zero(prec); k]; k];
        for (ai, alpha) in self.alphas.iter().enumerate() {
            for v in 0..self.dim_v {
                for j in 0..=self.n {
                    let col = self.index(ai, v, j);
                    mat[col][col] = TruncSeries::monomial(alpha.clone(), 1, prec);
                    if j > 0 {
                        mat[self.index(ai, v, j - 1)][col] =
                            TruncSeries::monomial(alpha.clone(), 1, prec);
                    }
                }
            }
        }
        AbModule::from_matrix(mat).expect("square by construction")
    }
}

/// `(oplus_{alpha} Xi_alpha^(N)) (x) V` with `dim V = dim_v`.
pub fn build_xi_tensor(
    alphas: &[Rational],
    n: usize,
    dim_v: usize,
    prec: usize,
) -> Result<AbModule> {
    Ok(XiLayout::new(alphas.to_vec(), n, dim_v)?.build(prec))
}

/// Parses a rational matrix entry list like `[["1/2", "0"], ...]`.
pub fn parse_constant_matrix(rows: &[Vec<String>]) -> Result<crate::linalg::QMatrix> {
    let r = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::linalg::QMatrix::from_rows(r))
}
