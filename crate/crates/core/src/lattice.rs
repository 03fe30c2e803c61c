//! Finitely generated sub-modules of a free module over truncated series.
//!
//! Generators are reduced to a valuation-pivot echelon form: pivots are
//! chosen by lowest valuation first (ties to the lowest column), each pivot
//! entry is scaled to the pure power `b^v`, and every entry of a basis
//! vector with pivot `b^v` has valuation at least `v`. Because elimination
//! only ever divides by the current minimal valuation, it does not lose
//! precision.

use num_traits::Zero;

use crate::error::{exhausted, AbError, Result};
use crate::module::{AbModule, ModuleElement};
use crate::series::TruncSeries;

#[derive(Clone, Debug)]
pub struct Lattice {
    rank_host: usize,
    /// Nominal precision: membership answers are certified modulo `b^prec`.
    prec: usize,
    basis: Vec<ModuleElement>,
    /// `(column, valuation)` of each basis vector's pivot.
    pivots: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn zero(rank_host: usize, prec: usize) -> Self {
        Lattice {
            rank_host,
            prec,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// The whole host module.
    pub fn full(rank_host: usize, prec: usize) -> Self {
        let gens: Vec<ModuleElement> = (0..rank_host)
            .map(|i| ModuleElement::basis(rank_host, i, prec))
            .collect();
        Self::reduce(rank_host, &gens).expect("basis vectors reduce")
    }

    /// Reduces generators; nominal precision is the smallest generator precision.
    pub fn reduce(rank_host: usize, gens: &[ModuleElement]) -> Result<Self> {
        let prec = gens.iter().map(|g| g.prec()).min().unwrap_or(usize::MAX);
        Self::reduce_with_prec(rank_host, gens, prec)
    }

    pub fn reduce_with_prec(rank_host: usize, gens: &[ModuleElement], prec: usize) -> Result<Self> {
        for g in gens {
            if g.rank() != rank_host {
                return Err(AbError::HostMismatch {
                    expected: rank_host,
                    got: g.rank(),
                });
            }
        }
        let mut work: Vec<ModuleElement> = gens.to_vec();
        let mut basis: Vec<ModuleElement> = Vec::new();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        loop {
            // lowest valuation, then lowest column, then earliest generator
            let mut best: Option<(usize, usize, usize)> = None;
            for (gi, g) in work.iter().enumerate() {
                for (c, s) in g.coords.iter().enumerate() {
                    if let Some(v) = s.valuation() {
                        let key = (v, c, gi);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
            }
            let Some((v, c, gi)) = best else { break };
            let g = work.swap_remove(gi);
            // g = b^v h with h_c a unit
            let h = g.div_b_pow(v).map_err(|_| {
                exhausted(format!(
                    "pivot b^{v} needs more precision than a generator carries"
                ))
            })?;
            let inv = h.coords[c].invert()?;
            let h = h.mul_series(&inv);
            let mut pivot_vec = h.mul_b_pow(v);
            pivot_vec.coords[c] =
                TruncSeries::monomial(num_traits::One::one(), v, pivot_vec.coords[c].prec());
            for w in work.iter_mut() {
                let wc = &w.coords[c];
                if wc.is_zero() {
                    continue;
                }
                let q = wc
                    .div_b_pow(v)
                    .map_err(|_| exhausted(format!("elimination by b^{v} needs more precision")))?;
                let mut nw = w.sub(&h.mul_series(&q).mul_b_pow(v));
                nw.coords[c] = TruncSeries::zero(w.coords[c].prec());
                *w = nw;
            }
            work.retain(|w| !w.is_zero());
            basis.push(pivot_vec);
            pivots.push((c, v));
        }
        // reduce above: entries in later pivot columns taken modulo b^{v_j}
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let (cj, vj) = pivots[j];
                let entry = basis[i].coords[cj].clone();
                if entry.is_zero() {
                    continue;
                }
                let (low, high) = entry.split_at(vj);
                if high.is_zero() {
                    continue;
                }
                let hj = basis[j].div_b_pow(vj)?;
                let mut nb = basis[i].sub(&hj.mul_series(&high).mul_b_pow(vj));
                nb.coords[cj] = low.truncate(entry.prec());
                basis[i] = nb;
            }
        }
        Ok(Lattice {
            rank_host,
            prec,
            basis,
            pivots,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn rank_host(&self) -> usize {
        self.rank_host
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn basis(&self) -> &[ModuleElement] {
        &self.basis
    }

    pub fn pivots(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    /// Normal means `L cap bE = bL`, i.e. every pivot is a unit.
    pub fn is_normal(&self) -> bool {
        self.pivots.iter().all(|p| p.1 == 0)
    }

    /// Coordinates of `x` on the basis, `None` if `x` is not in the lattice.
    pub fn coordinates(&self, x: &ModuleElement) -> Result<Option<Vec<TruncSeries>>> {
        if x.rank() != self.rank_host {
            return Err(AbError::HostMismatch {
                expected: self.rank_host,
                got: x.rank(),
            });
        }
        let mut r = x.clone();
        let mut coords = Vec::with_capacity(self.rank());
        for (g, &(c, v)) in self.basis.iter().zip(&self.pivots) {
            let rc = &r.coords[c];
            if rc.prec() < v && rc.is_zero() {
                return Err(exhausted(format!(
                    "membership needs coefficient b^{} but only {} are known",
                    v,
                    rc.prec()
                )));
            }
            let (low, high) = rc.split_at(v);
            if !low.is_zero() {
                return Ok(None);
            }
            let h = g.div_b_pow(v)?;
            r = r.sub(&h.mul_series(&high).mul_b_pow(v));
            coords.push(high);
        }
        let need = self.prec.min(x.prec());
        for s in &r.coords {
            if !s.is_zero() {
                return Ok(None);
            }
            if s.prec() < need {
                return Err(exhausted(format!(
                    "residual is zero only to b^{} but b^{} is needed",
                    s.prec(),
                    need
                )));
            }
        }
        Ok(Some(coords))
    }

    pub fn contains(&self, x: &ModuleElement) -> Result<bool> {
        Ok(self.coordinates(x)?.is_some())
    }

    /// Mutual containment.
    pub fn same_as(&self, o: &Lattice) -> Result<bool> {
        if self.rank() != o.rank() {
            return Ok(false);
        }
        for x in &self.basis {
            if !o.contains(x)? {
                return Ok(false);
            }
        }
        for x in &o.basis {
            if !self.contains(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest normal sub-module containing `self`: `{x : b^N x in L}`.
    pub fn normal_hull(&self) -> Result<Lattice> {
        if self.is_normal() {
            return Ok(self.clone());
        }
        let gens = self
            .basis
            .iter()
            .zip(&self.pivots)
            .map(|(g, &(_, v))| {
                g.div_b_pow(v)
                    .map_err(|_| exhausted("normal hull needs more precision"))
            })
            .collect::<Result<Vec<_>>>()?;
        Lattice::reduce(self.rank_host, &gens)
    }

    /// Sum of two lattices.
    pub fn join(&self, o: &Lattice) -> Result<Lattice> {
        let gens: Vec<ModuleElement> = self.basis.iter().chain(&o.basis).cloned().collect();
        Lattice::reduce_with_prec(self.rank_host, &gens, self.prec.min(o.prec))
    }

    /// Whether `a L` is contained in `L`.
    pub fn is_a_stable(&self, host: &AbModule) -> Result<bool> {
        for g in &self.basis {
            if !self.contains(&host.apply_a(g)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The lattice as an (a,b)-module on its own basis.
    pub fn as_module(&self, host: &AbModule) -> Result<AbModule> {
        if self.rank() == 0 {
            return Err(AbError::Invalid(
                "zero lattice has no module structure".into(),
            ));
        }
        let k = self.rank();
        let mut mat = vec![Vec::with_capacity(k); k];
        for g in &self.basis {
            let ag = host.apply_a(g)?;
            let coords = self.coordinates(&ag)?.ok_or(AbError::NotAStable)?;
            for (i, c) in coords.into_iter().enumerate() {
                mat[i].push(c);
            }
        }
        AbModule::from_matrix(mat)
    }

    /// Expresses each basis vector of `self` in the basis of `outer`, giving a
    /// lattice inside `outer.as_module(..)`.
    pub fn relative_to(&self, outer: &Lattice) -> Result<Lattice> {
        let gens = self
            .basis
            .iter()
            .map(|g| {
                outer
                    .coordinates(g)?
                    .map(ModuleElement::new)
                    .ok_or_else(|| {
                        AbError::Invalid("lattice is not contained in the outer lattice".into())
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Lattice::reduce(outer.rank(), &gens)
    }

    /// Image of a lattice of `outer.as_module(..)` back in the host.
    pub fn lift_from(inner: &Lattice, outer: &Lattice) -> Result<Lattice> {
        let prec = outer
            .basis
            .iter()
            .map(|b| b.prec())
            .min()
            .unwrap_or(outer.prec);
        let gens: Vec<ModuleElement> = inner
            .basis
            .iter()
            .map(|c| {
                let mut acc = ModuleElement::zero(outer.rank_host, prec);
                for (s, g) in c.coords.iter().zip(&outer.basis) {
                    acc = acc.add(&g.mul_series(s));
                }
                acc
            })
            .collect();
        Lattice::reduce(outer.rank_host, &gens)
    }
}

/// The quotient of a module by a normal, `a`-stable lattice.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub module: AbModule,
    pub sub: Lattice,
    /// Host columns kept as the quotient basis.
    pub free_cols: Vec<usize>,
}

impl Quotient {
    /// Class of `x` in the quotient.
    pub fn project(&self, x: &ModuleElement) -> ModuleElement {
        let mut r = x.clone();
        for (g, &(c, _)) in self.sub.basis.iter().zip(&self.sub.pivots) {
            let coef = r.coords[c].clone();
            if !coef.is_zero() {
                r = r.sub(&g.mul_series(&coef));
            }
        }
        ModuleElement::new(
            self.free_cols
                .iter()
                .map(|&c| r.coords[c].clone())
                .collect(),
        )
    }

    /// Representative in the host with zero pivot-column entries.
    pub fn lift(&self, y: &ModuleElement) -> ModuleElement {
        let prec = y.prec();
        let mut x = ModuleElement::zero(self.sub.rank_host, prec);
        for (s, &c) in y.coords.iter().zip(&self.free_cols) {
            x.coords[c] = s.clone();
        }
        x
    }

    /// Preimage in the host of a lattice of the quotient, joined with `sub`.
    pub fn preimage(&self, l: &Lattice) -> Result<Lattice> {
        let mut gens: Vec<ModuleElement> = self.sub.basis.clone();
        gens.extend(l.basis.iter().map(|y| self.lift(y)));
        Lattice::reduce_with_prec(self.sub.rank_host, &gens, self.sub.prec.min(l.prec))
    }

    /// Image in the quotient of a host lattice.
    pub fn image(&self, l: &Lattice) -> Result<Lattice> {
        let gens: Vec<ModuleElement> = l.basis.iter().map(|x| self.project(x)).collect();
        Lattice::reduce_with_prec(self.free_cols.len(), &gens, l.prec)
    }
}

/// `E / L` for a normal, `a`-stable `L`.
pub fn quotient_module(host: &AbModule, l: &Lattice) -> Result<Quotient> {
    if !l.is_normal() {
        return Err(AbError::NotNormal);
    }
    if !l.is_a_stable(host)? {
        return Err(AbError::NotAStable);
    }
    let pivot_cols: Vec<usize> = l.pivots.iter().map(|p| p.0).collect();
    let free_cols: Vec<usize> = (0..host.rank())
        .filter(|c| !pivot_cols.contains(c))
        .collect();
    if free_cols.is_empty() {
        return Err(AbError::Invalid(
            "quotient by the whole module is zero".into(),
        ));
    }
    let partial = Quotient {
        module: host.clone(),
        sub: l.clone(),
        free_cols: free_cols.clone(),
    };
    let k = free_cols.len();
    let mut mat = vec![Vec::with_capacity(k); k];
    for &c in &free_cols {
        let img = partial.project(&host.a_column(c));
        for (i, s) in img.coords.into_iter().enumerate() {
            mat[i].push(s);
        }
    }
    Ok(Quotient {
        module: AbModule::from_matrix(mat)?,
        sub: l.clone(),
        free_cols,
    })
}

/// Whether every entry of `x` is divisible by `b` (x lies in `bE`).
pub(crate) fn in_b_host(x: &ModuleElement) -> bool {
    x.coords.iter().all(|c| c.coeff(0).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::build_xi_tensor;
    use crate::scalar::{int, rat};

    const P: usize = 12;

    fn elt(cs: &[&[i64]]) -> ModuleElement {
        ModuleElement::new(
            cs.iter()
                .map(|c| TruncSeries::from_poly(&c.iter().map(|&x| int(x)).collect::<Vec<_>>(), P))
                .collect(),
        )
    }

    #[test]
    fn absorption() {
        let l = Lattice::reduce(1, &[elt(&[&[0, 1]]), elt(&[&[1]])]).unwrap();
        assert_eq!(l.rank(), 1);
        assert_eq!(l.pivots(), &[(0, 0)]);
        assert_eq!(Lattice::reduce(3, &[]).unwrap().rank(), 0);
    }

    #[test]
    fn one_elimination_step() {
        // span{e1 + b e2, b e1} = span{e1 + b e2, b^2 e2}
        let l = Lattice::reduce(2, &[elt(&[&[1], &[0, 1]]), elt(&[&[0, 1], &[0]])]).unwrap();
        assert_eq!(l.rank(), 2);
        assert_eq!(l.pivots(), &[(0, 0), (1, 2)]);
        // (1+b) e1 + b^2 e2 would need b^{-1} e... not a member
        assert!(!l.contains(&elt(&[&[1, 1], &[0, 0, 1]])).unwrap());
        assert!(l.contains(&elt(&[&[1, 1], &[0, 1, 1]])).unwrap());
    }

    #[test]
    fn membership_basics() {
        let l = Lattice::reduce(1, &[elt(&[&[1]])]).unwrap();
        assert!(l.contains(&elt(&[&[0, 1]])).unwrap());
        let lb = Lattice::reduce(1, &[elt(&[&[0, 1]])]).unwrap();
        assert!(!lb.contains(&elt(&[&[1]])).unwrap());
    }

    #[test]
    fn undecidable_membership() {
        // pivot b^10, element only known to b^8 and zero there
        let mut g = elt(&[&[0]]);
        g.coords[0] = TruncSeries::monomial(int(1), 10, P);
        let l = Lattice::reduce(1, &[g]).unwrap();
        let x = ModuleElement::new(vec![TruncSeries::zero(8)]);
        assert!(matches!(
            l.coordinates(&x),
            Err(AbError::PrecisionExhausted(_))
        ));
        // membership is judged at the element's own precision
        let l2 = Lattice::reduce(2, &[elt(&[&[1], &[0]])]).unwrap();
        let y = ModuleElement::new(vec![TruncSeries::one(P), TruncSeries::zero(4)]);
        assert!(l2.contains(&y).unwrap());
    }

    #[test]
    fn hulls() {
        let xi = build_xi_tensor(&[rat(1, 2)], 1, 1, P).unwrap();
        let be0 = xi.apply_b(&xi.basis(0)).unwrap();
        let l = Lattice::reduce(2, std::slice::from_ref(&be0)).unwrap();
        let h = l.normal_hull().unwrap();
        assert!(h
            .same_as(&Lattice::reduce(2, &[xi.basis(0)]).unwrap())
            .unwrap());
        assert!(h.is_normal());
        let n = Lattice::reduce(2, &[xi.basis(0)]).unwrap();
        assert!(n.normal_hull().unwrap().same_as(&n).unwrap());
        let whole = Lattice::reduce(2, &[xi.basis(1), be0])
            .unwrap()
            .normal_hull()
            .unwrap();
        assert!(whole.same_as(&Lattice::full(2, P)).unwrap());
    }

    #[test]
    fn quotients() {
        let xi = build_xi_tensor(&[rat(1, 2)], 1, 1, P).unwrap();
        let l = Lattice::reduce(2, &[xi.basis(0)]).unwrap();
        let q = quotient_module(&xi, &l).unwrap();
        assert_eq!(q.module, crate::module::AbModule::e_lambda(&rat(1, 2), P));
        let e = crate::module::AbModule::e_lambda(&rat(1, 2), P);
        let bad = Lattice::reduce(1, &[elt(&[&[0, 1]])]).unwrap();
        assert_eq!(quotient_module(&e, &bad).unwrap_err(), AbError::NotNormal);
        let zero = Lattice::zero(2, P);
        assert_eq!(quotient_module(&xi, &zero).unwrap().module, xi);
        let not_stable = Lattice::reduce(2, &[xi.basis(1)]).unwrap();
        assert_eq!(
            quotient_module(&xi, &not_stable).unwrap_err(),
            AbError::NotAStable
        );
    }

    #[test]
    fn submodule_structure() {
        let xi = build_xi_tensor(&[rat(1, 2)], 1, 1, P).unwrap();
        let be0 = xi.apply_b(&xi.basis(0)).unwrap();
        let l = Lattice::reduce(2, &[be0]).unwrap();
        let m = l.as_module(&xi).unwrap();
        assert_eq!(m.entry(0, 0).coeff(1), rat(3, 2));
    }
}
