//! Translation-invariant finite-range potentials and the Hamiltonians they
//! induce on windows: inner Hamiltonians, surface energies, open-boundary
//! Hamiltonians, the half-chain coupling `W_LR`, and cut-decoupled
//! restrictions.
//!
//! A potential is a list of base terms anchored at the origin (minimum site
//! of each base set is 0); the term at `K + x` is the shift of the base
//! term. A multi-site term belongs to the unique base set whose support,
//! shifted so its minimum is 0, matches — this removes double counting in
//! the sum over K.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LocalOperator, Region, Window};
use crate::linalg;
use crate::monomial::{OperatorPoly, Parity, PauliAxis, Statistics};

/// One anchored interaction term: the base set (containing 0, min = 0) and
/// the Hermitian operator rule on it.
#[derive(Debug, Clone)]
pub struct BaseTerm {
    pub sites: Vec<i64>,
    pub poly: OperatorPoly,
}

/// A translation-invariant finite-range potential, optionally decoupled
/// across a cut (all terms meeting both sides of the cut dropped).
#[derive(Debug, Clone)]
pub struct Potential {
    base_terms: Vec<BaseTerm>,
    statistics: Statistics,
    range: i64,
    cut: Option<i64>,
}

impl Potential {
    pub fn new(base_terms: Vec<BaseTerm>, statistics: Statistics) -> Result<Potential> {
        let mut range = 0i64;
        for term in &base_terms {
            if term.sites.is_empty() || term.sites.iter().min() != Some(&0) {
                return Err(Error::Contract(
                    "every base set must contain 0 as its minimum site".into(),
                ));
            }
            if term.poly.statistics != statistics {
                return Err(Error::Contract("base term statistics mismatch".into()));
            }
            let support = term.poly.support_sites();
            if support.iter().any(|s| !term.sites.contains(s)) {
                return Err(Error::Contract(
                    "base term operator leaves its base set".into(),
                ));
            }
            // Hermiticity of the materialized term
            let m = term.poly.materialize(&term.sites)?;
            if linalg::hermiticity_defect(&m) > 1e-12 {
                return Err(Error::Contract("base term is not Hermitian".into()));
            }
            if statistics == Statistics::Fermion && term.poly.grading() != Parity::Even {
                return Err(Error::Contract("fermionic base terms must be even".into()));
            }
            range = range.max(*term.sites.iter().max().unwrap());
        }
        Ok(Potential {
            base_terms,
            statistics,
            range,
            cut: None,
        })
    }

    pub fn base_terms(&self) -> &[BaseTerm] {
        &self.base_terms
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    /// Interaction range d(Φ): the largest diameter of a base set.
    pub fn range(&self) -> i64 {
        self.range
    }

    pub fn cut(&self) -> Option<i64> {
        self.cut
    }

    /// Largest operator norm among the base terms (the constant c_Φ in the
    /// geometric surface bound).
    pub fn max_term_norm(&self) -> f64 {
        self.base_terms
            .iter()
            .map(|t| {
                let m = t.poly.materialize(&t.sites).expect("validated support");
                linalg::operator_norm(&m)
            })
            .fold(0.0, f64::max)
    }

    /// Whether the shifted term with support `k_sites` survives the cut
    /// restriction (terms meeting both half-lines are removed).
    fn term_active(&self, k_sites: &[i64]) -> bool {
        match self.cut {
            None => true,
            Some(cut) => {
                let left = k_sites.iter().any(|&s| s < cut);
                let right = k_sites.iter().any(|&s| s >= cut);
                !(left && right)
            }
        }
    }

    /// Enumerate shifted terms `(shift, shifted base sites, term index)`
    /// whose base set intersects the given site set.
    fn shifts_meeting<'a>(
        &'a self,
        sites: &'a [i64],
    ) -> impl Iterator<Item = (usize, i64, Vec<i64>)> + 'a {
        let lo = sites.iter().copied().min();
        let hi = sites.iter().copied().max();
        self.base_terms
            .iter()
            .enumerate()
            .flat_map(move |(idx, term)| {
                let tmax = *term.sites.iter().max().unwrap();
                let (mut a, mut b) = (0i64, -1i64);
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    a = lo - tmax;
                    b = hi;
                }
                (a..=b).filter_map(move |x| {
                    let shifted: Vec<i64> = term.sites.iter().map(|s| s + x).collect();
                    if shifted.iter().any(|s| sites.contains(s)) {
                        Some((idx, x, shifted))
                    } else {
                        None
                    }
                })
            })
    }

    /// Sum of all terms fully contained in the region, as a polynomial.
    pub fn inner_poly(&self, region: &Region) -> OperatorPoly {
        self.inner_poly_on_sites(region.sites())
    }

    /// Same on a raw ordered site list; used by the Gaussian path, which
    /// never materializes window-dimension matrices and so is not subject
    /// to the dense window cap.
    pub fn inner_poly_on_sites(&self, sites: &[i64]) -> OperatorPoly {
        let mut acc = OperatorPoly::zero(self.statistics);
        for (idx, x, shifted) in self.shifts_meeting(sites) {
            if shifted.iter().all(|s| sites.contains(s)) && self.term_active(&shifted) {
                acc = acc.plus(&self.base_terms[idx].poly.shifted(x));
            }
        }
        acc
    }
}

/// Inner local Hamiltonian `H_I`: the sum of all interaction terms fully
/// contained in `I`, materialized on I's window.
pub fn inner_hamiltonian(phi: &Potential, region: &Region) -> Result<LocalOperator> {
    let window = region.window();
    if phi.statistics != window.statistics() {
        return Err(Error::Contract(
            "potential statistics do not match the window".into(),
        ));
    }
    let poly = phi.inner_poly(region);
    LocalOperator::from_poly(&poly, &window)
}

/// Surface energy of a region together with its support and a truncation
/// marker for crossing terms that stick out of the window.
#[derive(Debug, Clone)]
pub struct SurfaceEnergy {
    pub op: LocalOperator,
    /// Support of the materialized surface energy (union of crossing-term
    /// supports inside the window).
    pub boundary: Region,
    /// Operator norm `‖H_∂I‖`, computed on the support representation.
    pub norm: f64,
    /// True when some crossing term extends beyond the window and had to be
    /// dropped, i.e. the materialized operator underestimates the true
    /// surface energy of the infinite chain.
    pub truncated: bool,
}

/// Surface energy `H_∂I`: all terms meeting both `I` and its complement
/// (complement taken in the infinite chain; terms leaving the window are
/// dropped and flagged).
pub fn surface_energy(phi: &Potential, region: &Region, window: &Window) -> Result<SurfaceEnergy> {
    if phi.statistics != window.statistics() {
        return Err(Error::Contract(
            "potential statistics do not match the window".into(),
        ));
    }
    let mut poly = OperatorPoly::zero(phi.statistics);
    let mut truncated = false;
    for (idx, x, shifted) in phi.shifts_meeting(region.sites()) {
        let meets_complement = shifted.iter().any(|s| !region.contains(*s));
        if !meets_complement || !phi.term_active(&shifted) {
            continue;
        }
        if shifted.iter().all(|s| window.contains(*s)) {
            poly = poly.plus(&phi.base_terms[idx].poly.shifted(x));
        } else {
            truncated = true;
        }
    }
    let boundary = Region::new(poly.support_sites(), *window)?;
    let norm = support_norm(&poly)?;
    let op = LocalOperator::from_poly(&poly, window)?;
    Ok(SurfaceEnergy {
        op,
        boundary,
        norm,
        truncated,
    })
}

/// Operator norm of a Hermitian polynomial on its support representation.
fn support_norm(poly: &OperatorPoly) -> Result<f64> {
    let support = poly.support_sites();
    if support.is_empty() {
        return Ok(poly.terms.iter().map(|m| m.coeff).sum::<Complex64>().norm());
    }
    let small = poly.materialize(&support)?;
    let eig = linalg::eigh(&small)?;
    Ok(eig.values.iter().fold(0.0f64, |m, &l| m.max(l.abs())))
}

/// Open-boundary Hamiltonian `H̃_I = H_I + H_∂I` on the window.
#[derive(Debug, Clone)]
pub struct OpenHamiltonian {
    pub op: LocalOperator,
    pub truncated: bool,
}

pub fn open_hamiltonian(
    phi: &Potential,
    region: &Region,
    window: &Window,
) -> Result<OpenHamiltonian> {
    let inner = inner_hamiltonian(phi, region)?;
    let surface = surface_energy(phi, region, window)?;
    let support = inner.support.union(&surface.op.support)?;
    let op = LocalOperator {
        matrix: &inner.matrix + &surface.op.matrix,
        support,
        parity: Parity::Even,
        window: *window,
    };
    Ok(OpenHamiltonian {
        op,
        truncated: surface.truncated,
    })
}

/// The half-chain coupling `W_LR` with its operator norm.
#[derive(Debug, Clone)]
pub struct HalfChainCoupling {
    pub op: LocalOperator,
    pub norm: f64,
    pub truncated: bool,
}

/// Sum of all terms meeting both half-lines `{s < cut}` and `{s ≥ cut}`,
/// materialized on the window. The norm is the largest eigenvalue modulus,
/// computed on the support representation.
pub fn half_chain_coupling(
    phi: &Potential,
    cut: i64,
    window: &Window,
) -> Result<HalfChainCoupling> {
    if phi.statistics != window.statistics() {
        return Err(Error::Contract(
            "potential statistics do not match the window".into(),
        ));
    }
    // every crossing term touches one of the `range` sites left of the cut
    let strip: Vec<i64> = (cut - phi.range().max(1)..cut).collect();
    let mut poly = OperatorPoly::zero(phi.statistics);
    let mut truncated = false;
    for (idx, x, shifted) in phi.shifts_meeting(&strip) {
        let left = shifted.iter().any(|&s| s < cut);
        let right = shifted.iter().any(|&s| s >= cut);
        if !(left && right) || !phi.term_active(&shifted) {
            continue;
        }
        if shifted.iter().all(|s| window.contains(*s)) {
            poly = poly.plus(&phi.base_terms[idx].poly.shifted(x));
        } else {
            truncated = true;
        }
    }
    let norm = if poly.support_sites().is_empty() {
        0.0
    } else {
        support_norm(&poly)?
    };
    let op = LocalOperator::from_poly(&poly, window)?;
    Ok(HalfChainCoupling {
        op,
        norm,
        truncated,
    })
}

/// The decoupled potential Φ_{L,R}: all interactions between the two sides
/// of the cut removed.
pub fn decoupled_potential(phi: &Potential, cut: i64) -> Potential {
    let mut out = phi.clone();
    out.cut = Some(cut);
    out
}

/// Number of nearest-neighbour bonds of the window crossed by the region
/// boundary; the geometric `|∂A|` for range-1 potentials.
pub fn boundary_bond_count(region: &Region) -> usize {
    let w = region.window();
    (w.lo()..w.hi())
        .filter(|&i| region.contains(i) != region.contains(i + 1))
        .count()
}

/// The model catalog: concrete translation-invariant range-1 potentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// `H = -J Σ Z_i Z_{i+1} - g Σ X_i`
    Tfim { j: f64, g: f64 },
    /// `H = Jxy Σ (X_i X_{i+1} + Y_i Y_{i+1})/4 + Jz Σ Z_i Z_{i+1}/4 - h Σ Z_i/2`
    Xxz { jxy: f64, jz: f64, h: f64 },
    /// `H = Σ [-t(c†_i c_{i+1} + h.c.) + Δ(c_i c_{i+1} + h.c.) - μ(c†_i c_i - 1/2)]`
    KitaevChain { t: f64, delta: f64, mu: f64 },
}

impl ModelSpec {
    pub fn statistics(&self) -> Statistics {
        match self {
            ModelSpec::Tfim { .. } | ModelSpec::Xxz { .. } => Statistics::Spin,
            ModelSpec::KitaevChain { .. } => Statistics::Fermion,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Tfim { .. } => "tfim",
            ModelSpec::Xxz { .. } => "xxz",
            ModelSpec::KitaevChain { .. } => "kitaev",
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        let re = |x: f64| Complex64::new(x, 0.0);
        match *self {
            ModelSpec::Tfim { j, g } => {
                if !j.is_finite() || !g.is_finite() {
                    return Err(Error::Domain("TFIM parameters must be finite".into()));
                }
                let mut terms = vec![];
                if j != 0.0 {
                    let zz = OperatorPoly::pauli(0, PauliAxis::Z)
                        .times(&OperatorPoly::pauli(1, PauliAxis::Z))
                        .scaled(re(-j));
                    terms.push(BaseTerm {
                        sites: vec![0, 1],
                        poly: zz,
                    });
                }
                if g != 0.0 {
                    let x = OperatorPoly::pauli(0, PauliAxis::X).scaled(re(-g));
                    terms.push(BaseTerm {
                        sites: vec![0],
                        poly: x,
                    });
                }
                Potential::new(terms, Statistics::Spin)
            }
            ModelSpec::Xxz { jxy, jz, h } => {
                if ![jxy, jz, h].iter().all(|p| p.is_finite()) {
                    return Err(Error::Domain("XXZ parameters must be finite".into()));
                }
                let mut terms = vec![];
                if jxy != 0.0 || jz != 0.0 {
                    let xx = OperatorPoly::pauli(0, PauliAxis::X)
                        .times(&OperatorPoly::pauli(1, PauliAxis::X));
                    let yy = OperatorPoly::pauli(0, PauliAxis::Y)
                        .times(&OperatorPoly::pauli(1, PauliAxis::Y));
                    let zz = OperatorPoly::pauli(0, PauliAxis::Z)
                        .times(&OperatorPoly::pauli(1, PauliAxis::Z));
                    let bond = xx
                        .scaled(re(jxy / 4.0))
                        .plus(&yy.scaled(re(jxy / 4.0)))
                        .plus(&zz.scaled(re(jz / 4.0)));
                    terms.push(BaseTerm {
                        sites: vec![0, 1],
                        poly: bond,
                    });
                }
                if h != 0.0 {
                    let z = OperatorPoly::pauli(0, PauliAxis::Z).scaled(re(-h / 2.0));
                    terms.push(BaseTerm {
                        sites: vec![0],
                        poly: z,
                    });
                }
                Potential::new(terms, Statistics::Spin)
            }
            ModelSpec::KitaevChain { t, delta, mu } => {
                if ![t, delta, mu].iter().all(|p| p.is_finite()) {
                    return Err(Error::Domain("Kitaev parameters must be finite".into()));
                }
                let mut terms = vec![];
                if t != 0.0 || delta != 0.0 {
                    let hop = OperatorPoly::create(0)
                        .times(&OperatorPoly::annihilate(1))
                        .plus(&OperatorPoly::create(1).times(&OperatorPoly::annihilate(0)));
                    let pair = OperatorPoly::annihilate(0)
                        .times(&OperatorPoly::annihilate(1))
                        .plus(&OperatorPoly::create(1).times(&OperatorPoly::create(0)));
                    let bond = hop.scaled(re(-t)).plus(&pair.scaled(re(delta)));
                    terms.push(BaseTerm {
                        sites: vec![0, 1],
                        poly: bond,
                    });
                }
                if mu != 0.0 {
                    let num = OperatorPoly::create(0).times(&OperatorPoly::annihilate(0));
                    let site = num
                        .plus(&OperatorPoly::identity(Statistics::Fermion).scaled(re(-0.5)))
                        .scaled(re(-mu));
                    terms.push(BaseTerm {
                        sites: vec![0],
                        poly: site,
                    });
                }
                Potential::new(terms, Statistics::Fermion)
            }
        }
    }
}
