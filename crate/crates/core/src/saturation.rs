//! Saturation by `b^{-1} a` and Bernstein polynomials.

use serde_json::{json, Value};

use crate::error::{AbError, Result};
use crate::lattice::{in_b_host, Lattice};
use crate::module::{AbModule, BernsteinMode, ModuleElement};
use crate::poly::RationalPolynomial;
use crate::scalar::{fmt_rational, Rational};

/// The saturation `E#` of `E`: the smallest simple-pole module containing
/// `E` inside `E (x) K`.
///
/// The basis of `E#` is `b^{-shift} basis[j]`, with `basis[j]` written in
/// the coordinates of `E`.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub module: AbModule,
    pub basis: Vec<ModuleElement>,
    pub shift: usize,
    /// `e_i` of `E` in the coordinates of `E#`.
    pub inclusion: Vec<ModuleElement>,
    pub iterations: usize,
}

impl Saturation {
    /// Coordinates in `E#` of an element of `E`.
    pub fn include(&self, x: &ModuleElement) -> ModuleElement {
        let k = self.module.rank();
        let p = x.prec().min(self.module.prec());
        let mut acc = ModuleElement::zero(k, p);
        for (c, col) in x.coords.iter().zip(&self.inclusion) {
            acc = acc.add(&col.mul_series(c));
        }
        acc.truncate(p)
    }

    /// `b^shift` times an element of `E#`, written in the coordinates of `E`.
    pub fn pull_back_scaled(&self, y: &ModuleElement) -> ModuleElement {
        let k = self.basis.first().map_or(0, |b| b.rank());
        let mut acc = ModuleElement::zero(k, y.prec());
        for (c, col) in y.coords.iter().zip(&self.basis) {
            acc = acc.add(&col.mul_series(c));
        }
        acc
    }

    /// Residue of `b^{-1} a` on `E#/bE#`.
    pub fn residue(&self) -> crate::linalg::QMatrix {
        self.module.coefficient_matrix(1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "iterations": self.iterations,
            "shift": self.shift,
            "module": self.module.to_json(),
            "basis": self.basis.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Default iteration cap: `rank * prec`.
pub fn default_saturation_cap(e: &AbModule) -> usize {
    e.rank() * e.prec()
}

/// Iterates `L <- L + b^{-1} a L` from `L = E` until `L` has a simple pole.
pub fn saturate(e: &AbModule, cap: Option<usize>) -> Result<Saturation> {
    let cap = cap.unwrap_or_else(|| default_saturation_cap(e));
    let k = e.rank();
    let mut m: Vec<ModuleElement> = (0..k).map(|i| e.basis(i)).collect();
    let mut shift = 0usize;
    let mut iterations = 0usize;
    loop {
        let images = m.iter().map(|x| e.apply_a(x)).collect::<Result<Vec<_>>>()?;
        let bm: Vec<ModuleElement> = m.iter().map(|x| x.mul_b_pow(1)).collect();
        let lb = Lattice::reduce(k, &bm)?;
        let mut stable = true;
        for y in &images {
            if !lb.contains(y)? {
                stable = false;
                break;
            }
        }
        if stable {
            break;
        }
        if iterations >= cap {
            return Err(AbError::NotRegular { iterations });
        }
        iterations += 1;
        let mut gens = bm;
        gens.extend(images);
        m = Lattice::reduce(k, &gens)?.basis().to_vec();
        shift += 1;
        while shift > 0 && m.iter().all(in_b_host) {
            m = m
                .iter()
                .map(|x| x.div_b_pow(1))
                .collect::<Result<Vec<_>>>()?;
            shift -= 1;
        }
    }
    let lat = Lattice::reduce(k, &m)?;
    let m = lat.basis().to_vec();
    // a (b^{-s} m_j) = b^{-s} (a m_j - s b m_j)
    let s = Rational::from_integer(shift.into());
    let mut mat = vec![Vec::with_capacity(k); k];
    for x in &m {
        let y = e.apply_a(x)?.sub(&x.mul_b_pow(1).scale(&s));
        let c = lat.coordinates(&y)?.ok_or(AbError::NotAStable)?;
        for (i, ci) in c.into_iter().enumerate() {
            mat[i].push(ci);
        }
    }
    let module = AbModule::from_matrix(mat)?;
    let inclusion = (0..k)
        .map(|i| {
            let x = e.basis(i).mul_b_pow(shift);
            lat.coordinates(&x)?
                .map(ModuleElement::new)
                .ok_or_else(|| AbError::Invalid("input does not embed in its saturation".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Saturation {
        module,
        basis: m,
        shift,
        inclusion,
        iterations,
    })
}

/// Bernstein polynomial from the residue of `-b^{-1}a` on `E#/bE#`.
pub fn bernstein_polynomial(
    e: &AbModule,
    mode: BernsteinMode,
    hints: &[Rational],
    cap: Option<usize>,
) -> Result<RationalPolynomial> {
    let sat = saturate(e, cap)?;
    Ok(bernstein_of_saturated(&sat.module, mode, hints))
}

/// Bernstein polynomial of a module that already has a simple pole.
pub fn bernstein_of_saturated(
    e: &AbModule,
    mode: BernsteinMode,
    hints: &[Rational],
) -> RationalPolynomial {
    let r = e
        .coefficient_matrix(1)
        .scale(&Rational::from_integer((-1).into()));
    let p = match mode {
        BernsteinMode::Minimal => r.minpoly(),
        BernsteinMode::Characteristic => r.charpoly(),
    };
    RationalPolynomial::from_poly(&p, hints)
}

/// Outcome of the geometric test, with the roots or offending factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricCertificate {
    pub geometric: bool,
    pub bernstein: RationalPolynomial,
    pub reason: String,
}

impl GeometricCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "geometric": self.geometric,
            "bernstein": self.bernstein.to_json(),
            "reason": self.reason,
        })
    }
}

/// Whether all Bernstein roots are rational and negative.
pub fn is_geometric(e: &AbModule, cap: Option<usize>) -> Result<GeometricCertificate> {
    let b = bernstein_polynomial(e, BernsteinMode::Minimal, &[], cap)?;
    Ok(certify(b))
}

pub(crate) fn certify(b: RationalPolynomial) -> GeometricCertificate {
    let reason = if let Some(u) = &b.unsplit {
        format!("factor {u} has no rational roots")
    } else if let Some((r, _)) = b
        .roots
        .iter()
        .find(|(r, _)| *r >= Rational::from_integer(0.into()))
    {
        format!("root {} is not negative", fmt_rational(r))
    } else {
        let rs: Vec<String> = b
            .roots
            .iter()
            .map(|(r, m)| format!("{} x{}", fmt_rational(r), m))
            .collect();
        return GeometricCertificate {
            geometric: true,
            bernstein: b,
            reason: format!("roots {}", rs.join(", ")),
        };
    };
    GeometricCertificate {
        geometric: false,
        bernstein: b,
        reason,
    }
}

/// Fails with `NotGeometric` unless the module is geometric.
pub fn require_geometric(e: &AbModule, cap: Option<usize>) -> Result<GeometricCertificate> {
    let c = is_geometric(e, cap)?;
    if !c.geometric {
        return Err(AbError::NotGeometric(c.reason));
    }
    Ok(c)
}
