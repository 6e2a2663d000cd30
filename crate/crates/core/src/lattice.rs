//! Operator algebra of a finite window of the chain: spin-1/2 sites as a
//! tensor product, spinless fermions through the Jordan-Wigner
//! representation, the grading automorphism Θ and the θ-sign calculus.
//!
//! A window `[lo, hi]` is a contiguous truncation of the infinite chain; all
//! operators materialize as dense matrices of dimension `2^(hi-lo+1)`, and
//! subsystems are addressed through (possibly non-contiguous) regions.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::monomial::{OperatorPoly, Parity, PauliAxis, Statistics};

/// Hard cap on window size; `2^14` keeps dense complex matrices under control.
pub const MAX_WINDOW_SITES: usize = 14;

/// A contiguous interval of sites, the representation context for operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
    statistics: Statistics,
}

impl Window {
    pub fn new(lo: i64, hi: i64, statistics: Statistics) -> Result<Window> {
        if lo > hi {
            return Err(Error::Precondition(format!("window [{lo}, {hi}] is empty")));
        }
        let sites = (hi - lo + 1) as usize;
        if sites > MAX_WINDOW_SITES {
            return Err(Error::DimensionCap {
                sites,
                cap: MAX_WINDOW_SITES as u32,
            });
        }
        Ok(Window { lo, hi, statistics })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn num_sites(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// Hilbert-space dimension `2^n` of the window algebra.
    pub fn dim(&self) -> usize {
        1usize << self.num_sites()
    }

    pub fn sites(&self) -> Vec<i64> {
        (self.lo..=self.hi).collect()
    }

    pub fn contains(&self, site: i64) -> bool {
        self.lo <= site && site <= self.hi
    }

    /// Position of a site in the window's ordered context.
    pub fn position(&self, site: i64) -> Option<usize> {
        self.contains(site).then_some((site - self.lo) as usize)
    }

    /// The whole window as a region.
    pub fn full_region(&self) -> Region {
        Region {
            sites: self.sites(),
            window: *self,
        }
    }

    pub fn region(&self, sites: impl IntoIterator<Item = i64>) -> Result<Region> {
        Region::new(sites.into_iter().collect(), *self)
    }

    pub fn range_region(&self, lo: i64, hi: i64) -> Result<Region> {
        Region::new((lo..=hi).collect(), *self)
    }
}

/// An ordered set of sites inside a window; may be non-contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    sites: Vec<i64>,
    window: Window,
}

impl Region {
    pub fn new(mut sites: Vec<i64>, window: Window) -> Result<Region> {
        sites.sort_unstable();
        sites.dedup();
        if let Some(&s) = sites.iter().find(|&&s| !window.contains(s)) {
            return Err(Error::Precondition(format!(
                "site {s} lies outside the window [{}, {}]",
                window.lo, window.hi
            )));
        }
        Ok(Region { sites, window })
    }

    pub fn sites(&self) -> &[i64] {
        &self.sites
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        1usize << self.sites.len()
    }

    pub fn contains(&self, site: i64) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_contiguous(&self) -> bool {
        self.sites.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Whether the region is the prefix `{lo..m}` of its window.
    pub fn is_window_prefix(&self) -> bool {
        !self.sites.is_empty() && self.sites[0] == self.window.lo && self.is_contiguous()
    }

    pub fn complement(&self) -> Region {
        let sites = self
            .window
            .sites()
            .into_iter()
            .filter(|s| !self.contains(*s))
            .collect();
        Region {
            sites,
            window: self.window,
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        Region::new(sites, self.window)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        let sites = self
            .sites
            .iter()
            .copied()
            .filter(|s| other.contains(*s))
            .collect();
        Region {
            sites,
            window: self.window,
        }
    }

    pub fn is_disjoint_from(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| !other.contains(*s))
    }

    /// Positions of the region's sites within the window context.
    pub fn window_positions(&self) -> Vec<usize> {
        self.sites
            .iter()
            .map(|&s| (s - self.window.lo) as usize)
            .collect()
    }

    /// Positions of the region's sites within an arbitrary ordered site list.
    pub fn positions_in(&self, context: &[i64]) -> Result<Vec<usize>> {
        self.sites
            .iter()
            .map(|&s| {
                context.iter().position(|&c| c == s).ok_or_else(|| {
                    Error::Precondition(format!("site {s} not contained in the context"))
                })
            })
            .collect()
    }
}

/// A dense operator on a window with declared support and parity.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub matrix: CMat,
    pub support: Region,
    pub parity: Parity,
    pub window: Window,
}

impl LocalOperator {
    /// Materialize an abstract polynomial on the full window.
    pub fn from_poly(poly: &OperatorPoly, window: &Window) -> Result<LocalOperator> {
        if poly.statistics != window.statistics {
            return Err(Error::Contract(
                "operator statistics do not match the window".into(),
            ));
        }
        let support = Region::new(poly.support_sites(), *window)?;
        Ok(LocalOperator {
            matrix: poly.materialize(&window.sites())?,
            support,
            parity: poly.grading(),
            window: *window,
        })
    }

    pub fn zero(window: &Window) -> LocalOperator {
        LocalOperator {
            matrix: CMat::zeros((window.dim(), window.dim())),
            support: Region {
                sites: vec![],
                window: *window,
            },
            parity: Parity::Even,
            window: *window,
        }
    }

    pub fn identity(window: &Window) -> LocalOperator {
        LocalOperator {
            matrix: CMat::eye(window.dim()),
            support: Region {
                sites: vec![],
                window: *window,
            },
            parity: Parity::Even,
            window: *window,
        }
    }

    /// Operator norm on the window representation.
    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermiticity_defect(&self.matrix) <= tol
    }
}

/// Even/odd decomposition of an operator under Θ.
#[derive(Debug, Clone)]
pub struct GradedPart {
    pub even: LocalOperator,
    pub odd: LocalOperator,
}

/// Diagonal of the fermion parity unitary `P = ∏_i (1 - 2 c_i† c_i)` as ±1
/// entries over the occupation basis of `n` sites.
pub fn parity_diagonal(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Generators per site, materialized on the full window: Pauli `X, Y, Z`
/// for spin windows, `c_i` and `c_i†` (Jordan-Wigner) for fermion windows.
pub fn site_operators(window: &Window) -> Result<BTreeMap<i64, Vec<LocalOperator>>> {
    let mut map = BTreeMap::new();
    for site in window.sites() {
        let gens = match window.statistics {
            Statistics::Spin => vec![
                OperatorPoly::pauli(site, PauliAxis::X),
                OperatorPoly::pauli(site, PauliAxis::Y),
                OperatorPoly::pauli(site, PauliAxis::Z),
            ],
            Statistics::Fermion => vec![OperatorPoly::annihilate(site), OperatorPoly::create(site)],
        };
        map.insert(
            site,
            gens.iter()
                .map(|p| LocalOperator::from_poly(p, window))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(map)
}

/// The grading automorphism Θ applied as conjugation by the parity unitary:
/// `Θ(A) = P A P`. Acts as the identity on spin windows.
pub fn parity_map(op: &LocalOperator) -> LocalOperator {
    if op.window.statistics == Statistics::Spin {
        return op.clone();
    }
    let n = op.window.num_sites();
    let p = parity_diagonal(n);
    let mut m = op.matrix.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= p[i] * p[j];
        }
    }
    LocalOperator {
        matrix: m,
        support: op.support.clone(),
        parity: op.parity,
        window: op.window,
    }
}

/// Split an operator into its even and odd parts, `A = (A + Θ(A))/2 + (A - Θ(A))/2`.
pub fn even_odd_decompose(op: &LocalOperator) -> GradedPart {
    let theta = parity_map(op);
    let half = Complex64::new(0.5, 0.0);
    let even = LocalOperator {
        matrix: (&op.matrix + &theta.matrix).mapv(|z| z * half),
        support: op.support.clone(),
        parity: Parity::Even,
        window: op.window,
    };
    let odd = LocalOperator {
        matrix: (&op.matrix - &theta.matrix).mapv(|z| z * half),
        support: op.support.clone(),
        parity: Parity::Odd,
        window: op.window,
    };
    GradedPart { even, odd }
}

/// The ±1 sign governing graded commutation: −1 iff both arguments are odd.
pub fn theta_sign(p: Parity, q: Parity) -> Result<i32> {
    match (p, q) {
        (Parity::Mixed, _) | (_, Parity::Mixed) => Err(Error::Contract(
            "theta sign requires definite parities".into(),
        )),
        (Parity::Odd, Parity::Odd) => Ok(-1),
        _ => Ok(1),
    }
}

/// Residual of the graded locality relation `a b = θ(a,b) b a` for operators
/// with disjoint supports and definite parities. Returns `‖ab − θ ba‖`.
pub fn graded_locality_check(a: &LocalOperator, b: &LocalOperator) -> Result<f64> {
    if !a.support.is_disjoint_from(&b.support) {
        return Err(Error::Precondition(
            "graded locality requires disjoint supports".into(),
        ));
    }
    let theta = theta_sign(a.parity, b.parity)? as f64;
    let ab = linalg::matmul(&a.matrix, &b.matrix);
    let ba = linalg::matmul(&b.matrix, &a.matrix);
    let diff = &ab - &ba.mapv(|z| z * theta);
    Ok(linalg::operator_norm(&diff))
}
