//! Dense exact linear algebra over Q.

use num_traits::{One, Zero};

use crate::poly::Polynomial;
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, x) in row.into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Rational> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c * I`
    pub fn add_scalar(&self, c: &Rational) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += c;
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += &self[(i, j)] * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Columns `idx` as a new matrix.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let cols: Vec<Vec<Rational>> = idx.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &cols)
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        let mut m = Self::zeros(self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..o.cols {
                m[(i, self.cols + j)] = o[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &pc) in piv.iter().enumerate() {
                    v[pc] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let (r, piv) = self.hstack(&QMatrix::identity(n)).rref();
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Solves `self * x = rhs` (any solution, free variables zero).
    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        PartialSolver::new(self).solve(rhs)
    }

    /// Characteristic polynomial `det(x I - M)` by Faddeev-LeVerrier.
    pub fn charpoly(&self) -> Polynomial {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut mk = QMatrix::zeros(n, n);
        let ident = QMatrix::identity(n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(A M_k)/k
            mk = self.mul(&mk).add(&ident.scale(&coeffs[n - k + 1]));
            let amk = self.mul(&mk);
            let tr: Rational = (0..n).map(|i| amk[(i, i)].clone()).sum();
            coeffs[n - k] = -tr / Rational::from_integer((k as i64).into());
        }
        Polynomial::new(coeffs)
    }

    /// Minimal polynomial via the first linear dependency among powers of M.
    pub fn minpoly(&self) -> Polynomial {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 0 {
            return Polynomial::one();
        }
        let flat = |m: &QMatrix| m.data.clone();
        let mut powers = vec![flat(&QMatrix::identity(n))];
        let mut cur = QMatrix::identity(n);
        for d in 1..=n {
            cur = cur.mul(self);
            let basis = QMatrix::from_columns(n * n, &powers);
            if let Some(c) = basis.solve(&flat(&cur)) {
                let mut coeffs: Vec<Rational> = c.into_iter().map(|x| -x).collect();
                coeffs.push(Rational::one());
                debug_assert_eq!(coeffs.len(), d + 1);
                return Polynomial::new(coeffs);
            }
            powers.push(flat(&cur));
        }
        unreachable!("Cayley-Hamilton bounds the minimal polynomial degree")
    }

    /// `p(M)`
    pub fn eval_poly(&self, p: &Polynomial) -> QMatrix {
        let n = self.rows;
        let mut acc = QMatrix::zeros(n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add_scalar(c);
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Precomputed elimination for repeated solves `M x = f` where `f` may or
/// may not lie in the range of `M`.
#[derive(Clone, Debug)]
pub struct PartialSolver {
    /// Row transform `T` with `T M = rref(M)`.
    transform: QMatrix,
    pivots: Vec<usize>,
    cols: usize,
}

impl PartialSolver {
    pub fn new(m: &QMatrix) -> Self {
        let (r, piv) = m.hstack(&QMatrix::identity(m.rows)).rref();
        let piv: Vec<usize> = piv.into_iter().filter(|&c| c < m.cols).collect();
        let mut t = QMatrix::zeros(m.rows, m.rows);
        for i in 0..m.rows {
            for j in 0..m.rows {
                t[(i, j)] = r[(i, m.cols + j)].clone();
            }
        }
        PartialSolver {
            transform: t,
            pivots: piv,
            cols: m.cols,
        }
    }

    /// Rows `w` with `w^T M = 0`; `f` is in the range iff `w . f = 0` for all.
    pub fn left_kernel(&self) -> Vec<Vec<Rational>> {
        (self.pivots.len()..self.transform.rows())
            .map(|i| self.transform.row(i))
            .collect()
    }

    /// Linear map `G` with `M G f = f` for every `f` in the range of `M`.
    pub fn particular(&self) -> QMatrix {
        let mut g = QMatrix::zeros(self.cols, self.transform.rows());
        for (row, &pc) in self.pivots.iter().enumerate() {
            for j in 0..self.transform.rows() {
                g[(pc, j)] = self.transform[(row, j)].clone();
            }
        }
        g
    }

    pub fn solve(&self, f: &[Rational]) -> Option<Vec<Rational>> {
        for w in self.left_kernel() {
            let dot: Rational = w.iter().zip(f).map(|(a, b)| a * b).sum();
            if !dot.is_zero() {
                return None;
            }
        }
        Some(self.particular().mul_vec(f))
    }
}

/// Parametric solution of a linear recursion: `x_n = X_n theta` subject to
/// `C theta = 0`.
pub(crate) struct Parametric {
    pub(crate) k: usize,
    pub(crate) params: usize,
    pub(crate) terms: Vec<QMatrix>,
    constraints: Vec<Vec<Rational>>,
}

impl Parametric {
    pub(crate) fn new(k: usize) -> Self {
        Parametric {
            k,
            params: 0,
            terms: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub(crate) fn widen(&mut self, extra: usize) {
        let n = self.params + extra;
        for t in self.terms.iter_mut() {
            *t = t.hstack(&QMatrix::zeros(t.rows(), extra));
        }
        for c in self.constraints.iter_mut() {
            c.resize(n, Rational::zero());
        }
        self.params = n;
    }

    /// Solves `m x_n = rhs` where `rhs` is `k x params`; unsolvable parts
    /// become constraints and the kernel of `m` becomes new parameters.
    pub(crate) fn push(&mut self, m: &QMatrix, rhs: &QMatrix) {
        let ps = PartialSolver::new(m);
        for w in ps.left_kernel() {
            let row: Vec<Rational> = (0..self.params)
                .map(|j| w.iter().enumerate().map(|(i, wi)| wi * &rhs[(i, j)]).sum())
                .collect();
            if row.iter().any(|c| !c.is_zero()) {
                self.constraints.push(row);
            }
        }
        let mut xn = ps.particular().mul(rhs);
        let ker = m.kernel();
        if !ker.is_empty() {
            self.widen(ker.len());
            xn = xn.hstack(&QMatrix::from_columns(self.k, &ker));
        }
        self.terms.push(xn);
    }

    /// Zero matrix of the current width.
    pub(crate) fn zero_rhs(&self) -> QMatrix {
        QMatrix::zeros(self.k, self.params)
    }

    /// Basis of the admissible parameter space.
    pub(crate) fn solutions(&self) -> Vec<Vec<Rational>> {
        if self.params == 0 {
            return Vec::new();
        }
        if self.constraints.is_empty() {
            return (0..self.params)
                .map(|i| {
                    let mut v = vec![Rational::zero(); self.params];
                    v[i] = Rational::one();
                    v
                })
                .collect();
        }
        QMatrix::from_rows(self.constraints.clone()).kernel()
    }

    pub(crate) fn element(&self, theta: &[Rational]) -> crate::module::ModuleElement {
        let prec = self.terms.len();
        let cols: Vec<Vec<Rational>> = self.terms.iter().map(|t| t.mul_vec(theta)).collect();
        crate::module::ModuleElement::new(
            (0..self.k)
                .map(|i| {
                    crate::series::TruncSeries::from_coeffs(
                        (0..prec).map(|n| cols[n][i].clone()).collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Solves `A X - X B = C` for `X` (A is m x m, B is n x n).
pub fn sylvester(a: &QMatrix, b: &QMatrix, c: &QMatrix) -> Option<QMatrix> {
    let m = a.rows();
    let n = b.rows();
    // vec(X) column-major: index i + m*j
    let mut big = QMatrix::zeros(m * n, m * n);
    for j in 0..n {
        for i in 0..m {
            let row = i + m * j;
            for k in 0..m {
                big[(row, k + m * j)] += &a[(i, k)];
            }
            for l in 0..n {
                big[(row, i + m * l)] -= &b[(l, j)];
            }
        }
    }
    let mut rhs = vec![Rational::zero(); m * n];
    for j in 0..n {
        for i in 0..m {
            rhs[i + m * j] = c[(i, j)].clone();
        }
    }
    let x = big.solve(&rhs)?;
    let mut out = QMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            out[(i, j)] = x[i + m * j].clone();
        }
    }
    Some(out)
}
