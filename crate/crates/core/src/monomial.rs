//! Abstract operator polynomials: sums of Pauli strings (spin) or ordered
//! CAR monomials (fermion), independent of any matrix representation.
//!
//! A monomial acts on an occupation/spin basis state as at most one basis
//! state with a phase, so polynomials materialize on an arbitrary ordered
//! site context in O(terms · 2^n) and expectation values against a density
//! matrix take O(terms · 2^n) without forming the dense operator. The
//! fermionic factors carry the Jordan-Wigner sign over the sites that
//! precede them in the context ordering, which makes translation shifts and
//! re-labelled (canonical) representations of subalgebras exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Statistics of a lattice system: tensor-product spins or CAR fermions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Spin,
    Fermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiOp {
    Create,
    Annihilate,
}

/// A single factor of a monomial, attached to a lattice site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Pauli { site: i64, axis: PauliAxis },
    Fermi { site: i64, op: FermiOp },
}

impl Factor {
    pub fn site(&self) -> i64 {
        match self {
            Factor::Pauli { site, .. } | Factor::Fermi { site, .. } => *site,
        }
    }

    fn shifted(&self, x: i64) -> Factor {
        match *self {
            Factor::Pauli { site, axis } => Factor::Pauli {
                site: site + x,
                axis,
            },
            Factor::Fermi { site, op } => Factor::Fermi { site: site + x, op },
        }
    }
}

/// An ordered product of factors with a complex coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub factors: Vec<Factor>,
}

/// A finite sum of monomials over one statistics sector.
#[derive(Debug, Clone)]
pub struct OperatorPoly {
    pub statistics: Statistics,
    pub terms: Vec<Monomial>,
}

impl OperatorPoly {
    pub fn zero(statistics: Statistics) -> Self {
        OperatorPoly {
            statistics,
            terms: vec![],
        }
    }

    pub fn identity(statistics: Statistics) -> Self {
        OperatorPoly {
            statistics,
            terms: vec![Monomial {
                coeff: Complex64::new(1.0, 0.0),
                factors: vec![],
            }],
        }
    }

    pub fn monomial(statistics: Statistics, coeff: Complex64, factors: Vec<Factor>) -> Self {
        OperatorPoly {
            statistics,
            terms: vec![Monomial { coeff, factors }],
        }
    }

    /// Annihilator `c_i` (fermion statistics).
    pub fn annihilate(site: i64) -> Self {
        Self::monomial(
            Statistics::Fermion,
            Complex64::new(1.0, 0.0),
            vec![Factor::Fermi {
                site,
                op: FermiOp::Annihilate,
            }],
        )
    }

    /// Creator `c_i†` (fermion statistics).
    pub fn create(site: i64) -> Self {
        Self::monomial(
            Statistics::Fermion,
            Complex64::new(1.0, 0.0),
            vec![Factor::Fermi {
                site,
                op: FermiOp::Create,
            }],
        )
    }

    pub fn pauli(site: i64, axis: PauliAxis) -> Self {
        Self::monomial(
            Statistics::Spin,
            Complex64::new(1.0, 0.0),
            vec![Factor::Pauli { site, axis }],
        )
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        OperatorPoly {
            statistics: self.statistics,
            terms: self
                .terms
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff * s,
                    factors: m.factors.clone(),
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &OperatorPoly) -> Self {
        debug_assert_eq!(self.statistics, other.statistics);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.clone());
        OperatorPoly {
            statistics: self.statistics,
            terms,
        }
    }

    pub fn times(&self, other: &OperatorPoly) -> Self {
        debug_assert_eq!(self.statistics, other.statistics);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().copied());
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    factors,
                });
            }
        }
        OperatorPoly {
            statistics: self.statistics,
            terms,
        }
    }

    /// Hermitian conjugate: reverse factor order, conjugate coefficients,
    /// swap creators and annihilators.
    pub fn dagger(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|m| Monomial {
                coeff: m.coeff.conj(),
                factors: m
                    .factors
                    .iter()
                    .rev()
                    .map(|f| match *f {
                        Factor::Pauli { site, axis } => Factor::Pauli { site, axis },
                        Factor::Fermi { site, op } => Factor::Fermi {
                            site,
                            op: match op {
                                FermiOp::Create => FermiOp::Annihilate,
                                FermiOp::Annihilate => FermiOp::Create,
                            },
                        },
                    })
                    .collect(),
            })
            .collect();
        OperatorPoly {
            statistics: self.statistics,
            terms,
        }
    }

    pub fn shifted(&self, x: i64) -> Self {
        OperatorPoly {
            statistics: self.statistics,
            terms: self
                .terms
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff,
                    factors: m.factors.iter().map(|f| f.shifted(x)).collect(),
                })
                .collect(),
        }
    }

    /// Sorted set of sites touched by any factor.
    pub fn support_sites(&self) -> Vec<i64> {
        let mut sites: Vec<i64> = self
            .terms
            .iter()
            .flat_map(|m| m.factors.iter().map(|f| f.site()))
            .collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// Fermion grading of the polynomial: all monomials of even length,
    /// all odd, or mixed. Spin polynomials are even by convention since the
    /// grading automorphism is trivial there.
    pub fn grading(&self) -> Parity {
        if self.statistics == Statistics::Spin {
            return Parity::Even;
        }
        let mut even = false;
        let mut odd = false;
        for m in &self.terms {
            if m.factors.len() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Dense matrix over the ordered site context (ascending site order,
    /// first site on the most significant bit).
    pub fn materialize(&self, context: &[i64]) -> Result<CMat> {
        let n = context.len();
        if n > 30 {
            return Err(Error::Shape(format!(
                "context of {n} sites is too large to materialize"
            )));
        }
        let dim = 1usize << n;
        let mut out = CMat::zeros((dim, dim));
        for mono in &self.terms {
            let actions = factor_bits(mono, context)?;
            for col in 0..dim {
                if let Some((row, phase)) = apply_monomial(&actions, col, n) {
                    out[(row, col)] += mono.coeff * phase;
                }
            }
        }
        Ok(out)
    }

    /// `Tr(D · self)` over the ordered site context carried by `d`, without
    /// materializing the operator.
    pub fn expectation(&self, d: &CMat, context: &[i64]) -> Result<Complex64> {
        let n = context.len();
        let dim = 1usize << n;
        if d.nrows() != dim {
            return Err(Error::Shape(format!(
                "state dim {} does not match context of {n} sites",
                d.nrows()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for mono in &self.terms {
            let actions = factor_bits(mono, context)?;
            let mut term = Complex64::new(0.0, 0.0);
            for col in 0..dim {
                if let Some((row, phase)) = apply_monomial(&actions, col, n) {
                    term += d[(col, row)] * phase;
                }
            }
            acc += mono.coeff * term;
        }
        Ok(acc)
    }
}

/// Grading of an operator under the fermion parity automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

enum BitAction {
    PauliX(usize),
    PauliY(usize),
    PauliZ(usize),
    // bit position plus the mask of more-significant bits (earlier sites)
    Create(usize, usize),
    Annihilate(usize, usize),
}

fn factor_bits(mono: &Monomial, context: &[i64]) -> Result<Vec<BitAction>> {
    let n = context.len();
    mono.factors
        .iter()
        .map(|f| {
            let pos = context.iter().position(|&s| s == f.site()).ok_or_else(|| {
                Error::Shape(format!(
                    "site {} outside the materialization context",
                    f.site()
                ))
            })?;
            let bit = n - 1 - pos;
            Ok(match f {
                Factor::Pauli { axis, .. } => match axis {
                    PauliAxis::X => BitAction::PauliX(bit),
                    PauliAxis::Y => BitAction::PauliY(bit),
                    PauliAxis::Z => BitAction::PauliZ(bit),
                },
                Factor::Fermi { op, .. } => {
                    let above =
                        usize::MAX.checked_shl((bit + 1) as u32).unwrap_or(0) & ((1usize << n) - 1);
                    match op {
                        FermiOp::Create => BitAction::Create(bit, above),
                        FermiOp::Annihilate => BitAction::Annihilate(bit, above),
                    }
                }
            })
        })
        .collect()
}

/// Apply the monomial to a basis state, rightmost factor first. Returns the
/// image basis state and accumulated phase, or `None` if annihilated.
fn apply_monomial(actions: &[BitAction], state: usize, _n: usize) -> Option<(usize, Complex64)> {
    let mut s = state;
    let mut phase = Complex64::new(1.0, 0.0);
    for act in actions.iter().rev() {
        match *act {
            BitAction::PauliX(b) => {
                s ^= 1 << b;
            }
            BitAction::PauliY(b) => {
                let set = (s >> b) & 1 == 1;
                phase *= if set {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                s ^= 1 << b;
            }
            BitAction::PauliZ(b) => {
                if (s >> b) & 1 == 1 {
                    phase = -phase;
                }
            }
            BitAction::Create(b, above) => {
                if (s >> b) & 1 == 1 {
                    return None;
                }
                if (s & above).count_ones() % 2 == 1 {
                    phase = -phase;
                }
                s |= 1 << b;
            }
            BitAction::Annihilate(b, above) => {
                if (s >> b) & 1 == 0 {
                    return None;
                }
                if (s & above).count_ones() % 2 == 1 {
                    phase = -phase;
                }
                s &= !(1 << b);
            }
        }
    }
    Some((s, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_matrices_on_one_site() {
        let ctx = [0i64];
        let x = OperatorPoly::pauli(0, PauliAxis::X)
            .materialize(&ctx)
            .unwrap();
        let y = OperatorPoly::pauli(0, PauliAxis::Y)
            .materialize(&ctx)
            .unwrap();
        let z = OperatorPoly::pauli(0, PauliAxis::Z)
            .materialize(&ctx)
            .unwrap();
        // basis order: index 0 = spin-up (bit clear)
        assert_eq!(x[(0, 1)], c(1., 0.));
        assert_eq!(x[(1, 0)], c(1., 0.));
        assert_eq!(y[(1, 0)], c(0., 1.));
        assert_eq!(y[(0, 1)], c(0., -1.));
        assert_eq!(z[(0, 0)], c(1., 0.));
        assert_eq!(z[(1, 1)], c(-1., 0.));
    }

    #[test]
    fn jordan_wigner_string_sign() {
        // c_1 on context {0,1}: JW string over site 0 (more significant bit).
        let ctx = [0i64, 1];
        let c1 = OperatorPoly::annihilate(1).materialize(&ctx).unwrap();
        // |11> = index 3 -> c_1 |11> = -|10> (site 0 occupied gives the sign)
        assert_eq!(c1[(2, 3)], c(-1., 0.));
        // |01> = index 1 -> c_1 |01> = |00>
        assert_eq!(c1[(0, 1)], c(1., 0.));
    }

    #[test]
    fn expectation_matches_materialized_trace() {
        let ctx = [0i64, 1, 2];
        let poly = OperatorPoly::create(0)
            .times(&OperatorPoly::annihilate(2))
            .plus(&OperatorPoly::create(2).times(&OperatorPoly::annihilate(0)));
        let m = poly.materialize(&ctx).unwrap();
        // random-ish Hermitian density surrogate
        let dim = 8;
        let mut d = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                d[(i, j)] = c((i * dim + j) as f64 / 64.0, (i as f64 - j as f64) / 17.0);
            }
        }
        let via_trace = linalg::trace_of_product(&d, &m);
        let via_expect = poly.expectation(&d, &ctx).unwrap();
        assert!((via_trace - via_expect).norm() < 1e-13);
    }

    #[test]
    fn dagger_materializes_to_adjoint() {
        let ctx = [0i64, 1];
        let poly = OperatorPoly::monomial(
            Statistics::Fermion,
            c(0.3, 0.7),
            vec![
                Factor::Fermi {
                    site: 0,
                    op: FermiOp::Create,
                },
                Factor::Fermi {
                    site: 1,
                    op: FermiOp::Annihilate,
                },
            ],
        );
        let m = poly.materialize(&ctx).unwrap();
        let md = poly.dagger().materialize(&ctx).unwrap();
        let adj = linalg::adjoint(&m);
        for i in 0..4 {
            for j in 0..4 {
                assert!((md[(i, j)] - adj[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_relabels_support() {
        let poly = OperatorPoly::create(0).times(&OperatorPoly::annihilate(1));
        let shifted = poly.shifted(3);
        assert_eq!(shifted.support_sites(), vec![3, 4]);
        // materialization on the shifted context agrees entrywise
        let m0 = poly.materialize(&[0, 1]).unwrap();
        let m3 = shifted.materialize(&[3, 4]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((m0[(i, j)] - m3[(i, j)]).norm() < 1e-15);
            }
        }
    }
}
