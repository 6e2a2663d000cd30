//! Density-matrix states on windows: Gibbs and ground states, graded-aware
//! reductions to subregions, product extensions, finite-dimensional Araki
//! perturbations `e^{log D + h}`, and channel-generated trial states for the
//! local-stability checks.
//!
//! A state carries the ordered site list of its representation, so reduced
//! states on non-contiguous regions live in the canonical (re-labelled)
//! representation of dimension `2^|A|`.

use num_complex::Complex64;
use rand::Rng;

use crate::bits;
use crate::error::{Error, Result};
use crate::lattice::{parity_diagonal, LocalOperator, Region};
use crate::linalg::{self, CMat};
use crate::monomial::{OperatorPoly, Statistics};
use crate::potential::Potential;

/// Parity classification of a fermionic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityFlag {
    Even,
    NonEven,
    Unknown,
}

/// A density matrix over an ordered site context.
#[derive(Debug, Clone)]
pub struct DensityState {
    pub matrix: CMat,
    pub sites: Vec<i64>,
    pub statistics: Statistics,
    pub parity_flag: ParityFlag,
}

const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-12;
const EVEN_TOL: f64 = 1e-12;
/// Eigenvalue floor below which a state no longer counts as faithful.
pub const FAITHFUL_TOL: f64 = 1e-12;
/// Floor applied to eigenvalues inside matrix logarithms (0·log 0 := 0).
const LOG_FLOOR: f64 = 1e-300;

fn check_sites(sites: &[i64]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::Precondition("state needs at least one site".into()));
    }
    if sites.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "state sites must be strictly ascending".into(),
        ));
    }
    Ok(())
}

impl DensityState {
    /// Validate and wrap a density matrix: Hermitian, unit trace, positive
    /// semidefinite within tolerance. The fermionic parity flag is computed
    /// from the entrywise defect of `PDP - D`.
    pub fn new(matrix: CMat, sites: Vec<i64>, statistics: Statistics) -> Result<DensityState> {
        check_sites(&sites)?;
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "state matrix {}x{} for {} sites",
                matrix.nrows(),
                matrix.ncols(),
                sites.len()
            )));
        }
        if linalg::hermiticity_defect(&matrix) > 1e-10 {
            return Err(Error::Contract("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Contract(format!(
                "density matrix trace {} ≠ 1",
                tr.re
            )));
        }
        let eig = linalg::eigh(&matrix)?;
        if eig.values.first().copied().unwrap_or(0.0) < PSD_TOL {
            return Err(Error::Contract(format!(
                "density matrix has eigenvalue {}",
                eig.values[0]
            )));
        }
        Ok(Self::unchecked(matrix, sites, statistics))
    }

    /// Wrap without the eigensolve; used where positivity holds by
    /// construction. The parity flag is still computed.
    pub(crate) fn unchecked(matrix: CMat, sites: Vec<i64>, statistics: Statistics) -> DensityState {
        let parity_flag = match statistics {
            Statistics::Spin => ParityFlag::Even,
            Statistics::Fermion => {
                if parity_defect(&matrix) <= EVEN_TOL {
                    ParityFlag::Even
                } else {
                    ParityFlag::NonEven
                }
            }
        };
        DensityState {
            matrix,
            sites,
            statistics,
            parity_flag,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The tracial state `1/2^n`.
    pub fn tracial(sites: Vec<i64>, statistics: Statistics) -> Result<DensityState> {
        check_sites(&sites)?;
        let dim = 1usize << sites.len();
        let m = CMat::eye(dim).mapv(|z| z / dim as f64);
        Ok(Self::unchecked(m, sites, statistics))
    }

    /// Pure state `|ψ⟩⟨ψ|` from a normalized vector.
    pub fn pure(
        psi: &[Complex64],
        sites: Vec<i64>,
        statistics: Statistics,
    ) -> Result<DensityState> {
        check_sites(&sites)?;
        let dim = 1usize << sites.len();
        if psi.len() != dim {
            return Err(Error::Shape("state vector length mismatch".into()));
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::Contract("state vector is not normalized".into()));
        }
        let mut m = CMat::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self::unchecked(m, sites, statistics))
    }

    /// Expectation of an operator given on the same representation.
    pub fn expectation(&self, op: &CMat) -> Complex64 {
        linalg::trace_of_product(&self.matrix, op)
    }

    /// Expectation of a window operator; the operator's window must carry
    /// exactly the state's sites.
    pub fn expectation_op(&self, op: &LocalOperator) -> Result<Complex64> {
        if op.window.sites() != self.sites {
            return Err(Error::Shape(
                "operator window does not match the state's sites".into(),
            ));
        }
        Ok(self.expectation(&op.matrix))
    }

    /// Expectation of an abstract polynomial over the state's sites.
    pub fn expect_poly(&self, poly: &OperatorPoly) -> Result<Complex64> {
        poly.expectation(&self.matrix, &self.sites)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::eigh(&self.matrix)?
            .values
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    pub fn is_faithful(&self) -> Result<bool> {
        Ok(self.min_eigenvalue()? > FAITHFUL_TOL)
    }
}

/// Entrywise defect `max |PDP - D|` under the parity unitary.
fn parity_defect(matrix: &CMat) -> f64 {
    let n = matrix.nrows().trailing_zeros() as usize;
    let p = parity_diagonal(n);
    let mut defect = 0.0f64;
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if p[i] * p[j] < 0.0 {
                defect = defect.max(matrix[(i, j)].norm());
            }
        }
    }
    defect
}

/// Evenness test for fermionic states: the operator-norm residual
/// `‖PDP - D‖` and whether it clears the evenness tolerance.
pub fn is_even(rho: &DensityState) -> Result<(bool, f64)> {
    if rho.statistics != Statistics::Fermion {
        return Err(Error::Precondition("evenness is a fermionic notion".into()));
    }
    let n = rho.num_sites();
    let p = parity_diagonal(n);
    let mut diff = rho.matrix.clone();
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            diff[(i, j)] = rho.matrix[(i, j)] * (p[i] * p[j] - 1.0);
        }
    }
    let residual = linalg::operator_norm(&diff);
    Ok((residual <= EVEN_TOL, residual))
}

/// A Gibbs state kept in spectral form `U diag(p) U†`, with the Hamiltonian
/// eigenvalues retained for energy bookkeeping.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub basis: CMat,
    pub energies: Vec<f64>,
    pub probs: Vec<f64>,
    pub sites: Vec<i64>,
    pub statistics: Statistics,
}

impl SpectralState {
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    pub fn mean_energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.probs)
            .map(|(e, p)| e * p)
            .sum()
    }

    pub fn to_density(&self) -> DensityState {
        let d: Vec<Complex64> = self.probs.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        let m = linalg::recompose(&self.basis, &d);
        DensityState::unchecked(m, self.sites.clone(), self.statistics)
    }

    /// Reduced density matrix on the given site positions, assembled from
    /// the spectral form without materializing the full matrix. Weights
    /// below `1e-17` of the maximum are dropped.
    pub fn reduce_to_positions(&self, keep: &[usize]) -> CMat {
        let total = self.sites.len();
        let rest: Vec<usize> = (0..total).filter(|p| !keep.contains(p)).collect();
        let dim_a = 1usize << keep.len();
        let dim_r = 1usize << rest.len();
        let sa: Vec<usize> = (0..dim_a)
            .map(|a| bits::scatter_sub(a, keep, total))
            .collect();
        let sr: Vec<usize> = (0..dim_r)
            .map(|r| bits::scatter_sub(r, &rest, total))
            .collect();
        let pmax = self.probs.iter().fold(0.0f64, |m, &p| m.max(p));
        let kept: Vec<usize> = (0..self.probs.len())
            .filter(|&k| self.probs[k] > 1e-17 * pmax)
            .collect();
        // T[a, (k,r)] = sqrt(p_k) u_k[idx(a,r)]; the reduction is T T†.
        let mut t = CMat::zeros((dim_a, kept.len() * dim_r));
        for (kk, &k) in kept.iter().enumerate() {
            let w = self.probs[k].sqrt();
            for (r, &srr) in sr.iter().enumerate() {
                let col = kk * dim_r + r;
                for (a, &saa) in sa.iter().enumerate() {
                    t[(a, col)] = self.basis[(saa | srr, k)] * w;
                }
            }
        }
        linalg::matmul(&t, &linalg::adjoint(&t))
    }
}

/// The local Gibbs state `exp(-β H_I)/Tr exp(-β H_I)` in spectral form,
/// with `H_I` the inner Hamiltonian materialized on the canonical
/// representation of the region.
pub fn gibbs_spectral(phi: &Potential, region: &Region, beta: f64) -> Result<SpectralState> {
    if beta.is_nan() || beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )));
    }
    if region.is_empty() {
        return Err(Error::Precondition(
            "Gibbs state needs a nonempty region".into(),
        ));
    }
    let h = phi.inner_poly(region).materialize(region.sites())?;
    let eig = linalg::eigh(&h)?;
    let e0 = eig.values.first().copied().unwrap();
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|&e| (-beta * (e - e0)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(SpectralState {
        basis: eig.vectors,
        energies: eig.values,
        probs: weights.into_iter().map(|w| w / z).collect(),
        sites: region.sites().to_vec(),
        statistics: phi.statistics(),
    })
}

/// The local Gibbs state as a density matrix. Faithful by construction;
/// even in the fermion case since the Hamiltonian is even.
pub fn gibbs_state(phi: &Potential, region: &Region, beta: f64) -> Result<DensityState> {
    Ok(gibbs_spectral(phi, region, beta)?.to_density())
}

/// A ground state together with its degeneracy.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: DensityState,
    pub degeneracy: usize,
    pub energy: f64,
}

/// Normalized projector onto the lowest-energy eigenspace (tolerance 1e-10
/// relative gap). A degenerate lowest eigenspace yields the maximally mixed
/// state over it.
pub fn ground_state(phi: &Potential, region: &Region) -> Result<GroundState> {
    if region.is_empty() {
        return Err(Error::Precondition(
            "ground state needs a nonempty region".into(),
        ));
    }
    let h = phi.inner_poly(region).materialize(region.sites())?;
    let eig = linalg::eigh(&h)?;
    let e0 = eig.values[0];
    let scale = 1.0f64.max(e0.abs());
    let deg = eig
        .values
        .iter()
        .take_while(|&&e| (e - e0).abs() <= 1e-10 * scale)
        .count();
    let d: Vec<Complex64> = (0..eig.values.len())
        .map(|k| {
            if k < deg {
                Complex64::new(1.0 / deg as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let m = linalg::recompose(&eig.vectors, &d);
    Ok(GroundState {
        state: DensityState::unchecked(m, region.sites().to_vec(), phi.statistics()),
        degeneracy: deg,
        energy: e0,
    })
}

/// Restriction of a state to a subregion.
///
/// Spin: the partial trace over the complementary sites. Fermion: the
/// reduction onto the CAR subalgebra generated by the region's modes,
/// expanded over a Hermitian-orthogonal monomial basis and represented
/// canonically at dimension `2^|A|`; for contiguous prefixes (and for even
/// states on contiguous segments, where the Jordan-Wigner strings cancel)
/// this coincides with the partial trace, which is taken as the fast path.
pub fn reduce(rho: &DensityState, region: &Region) -> Result<DensityState> {
    let positions: Vec<usize> = region
        .sites()
        .iter()
        .map(|&s| {
            rho.sites
                .iter()
                .position(|&t| t == s)
                .ok_or_else(|| Error::Precondition(format!("site {s} not in the state's support")))
        })
        .collect::<Result<Vec<_>>>()?;
    if positions.is_empty() {
        return Err(Error::Precondition("reduction to the empty region".into()));
    }
    if positions.len() == rho.num_sites() {
        return Ok(rho.clone());
    }
    let total = rho.num_sites();
    let contiguous = positions.windows(2).all(|w| w[1] == w[0] + 1);
    let use_partial_trace = match rho.statistics {
        Statistics::Spin => true,
        Statistics::Fermion => {
            let prefix = contiguous && positions[0] == 0;
            prefix || (contiguous && rho.parity_flag == ParityFlag::Even)
        }
    };
    let m = if use_partial_trace {
        bits::partial_trace(&rho.matrix, total, &positions)
    } else {
        fermion_moment_reduce(rho, &positions)?
    };
    Ok(DensityState::unchecked(
        m,
        region.sites().to_vec(),
        rho.statistics,
    ))
}

/// Per-site Hermitian-orthogonal factor basis `{1, c, c†, 2c†c - 1}`.
fn site_factor(site: i64, which: usize) -> OperatorPoly {
    match which {
        0 => OperatorPoly::identity(Statistics::Fermion),
        1 => OperatorPoly::annihilate(site),
        2 => OperatorPoly::create(site),
        _ => OperatorPoly::create(site)
            .times(&OperatorPoly::annihilate(site))
            .scaled(Complex64::new(2.0, 0.0))
            .plus(&OperatorPoly::identity(Statistics::Fermion).scaled(Complex64::new(-1.0, 0.0))),
    }
}

/// Moment-matching reduction: `D_A = Σ_k ρ(e_k†) e_k / Tr(e_k† e_k)` over the
/// monomial basis of the subalgebra generated by the region's modes.
fn fermion_moment_reduce(rho: &DensityState, positions: &[usize]) -> Result<CMat> {
    let a_sites: Vec<i64> = positions.iter().map(|&p| rho.sites[p]).collect();
    let na = a_sites.len();
    let dim_a = 1usize << na;
    // canonical relabeled context for the small representation
    let canon: Vec<i64> = (0..na as i64).collect();
    let mut out = CMat::zeros((dim_a, dim_a));
    for code in 0..4usize.pow(na as u32) {
        let mut big = OperatorPoly::identity(Statistics::Fermion);
        let mut small = OperatorPoly::identity(Statistics::Fermion);
        let mut c = code;
        for j in 0..na {
            let which = c % 4;
            c /= 4;
            if which != 0 {
                big = big.times(&site_factor(a_sites[j], which));
                small = small.times(&site_factor(canon[j], which));
            }
        }
        let moment = big.dagger().expectation(&rho.matrix, &rho.sites)?;
        let e_small = small.materialize(&canon)?;
        let norm2 = linalg::trace_of_product(&linalg::adjoint(&e_small), &e_small).re;
        out = out + e_small.mapv(|z| z * moment / norm2);
    }
    // symmetrize away roundoff
    let out = (&out + &linalg::adjoint(&out)).mapv(|z| z * 0.5);
    Ok(out)
}

/// Product extension of two states on disjoint site sets.
///
/// Spin: the tensor product in site order (the site sets may interleave).
/// Fermion: the CAR product extension, implemented for even states across a
/// contiguous left/right cut, where it is the Kronecker product in the
/// Jordan-Wigner representation.
pub fn product_extend(a: &DensityState, b: &DensityState) -> Result<DensityState> {
    if a.statistics != b.statistics {
        return Err(Error::Precondition(
            "product extension across statistics".into(),
        ));
    }
    if a.sites.iter().any(|s| b.sites.contains(s)) {
        return Err(Error::Precondition(
            "product extension needs disjoint site sets".into(),
        ));
    }
    match a.statistics {
        Statistics::Spin => {
            let mut merged: Vec<i64> = a.sites.iter().chain(b.sites.iter()).copied().collect();
            merged.sort_unstable();
            let total = merged.len();
            let pos_a: Vec<usize> = a
                .sites
                .iter()
                .map(|s| merged.iter().position(|t| t == s).unwrap())
                .collect();
            let pos_b: Vec<usize> = b
                .sites
                .iter()
                .map(|s| merged.iter().position(|t| t == s).unwrap())
                .collect();
            let dim = 1usize << total;
            let mut m = CMat::zeros((dim, dim));
            let ia: Vec<usize> = (0..dim)
                .map(|n| bits::gather_sub(n, &pos_a, total))
                .collect();
            let ib: Vec<usize> = (0..dim)
                .map(|n| bits::gather_sub(n, &pos_b, total))
                .collect();
            for n in 0..dim {
                for np in 0..dim {
                    m[(n, np)] = a.matrix[(ia[n], ia[np])] * b.matrix[(ib[n], ib[np])];
                }
            }
            Ok(DensityState::unchecked(m, merged, Statistics::Spin))
        }
        Statistics::Fermion => {
            if a.parity_flag != ParityFlag::Even || b.parity_flag != ParityFlag::Even {
                return Err(Error::UnsupportedExtension(
                    "fermionic product extension is implemented for even factors only".into(),
                ));
            }
            // the CAR extension of even states is symmetric in its factors
            let (l, r) = if a.sites.first() <= b.sites.first() {
                (a, b)
            } else {
                (b, a)
            };
            let contiguous = |s: &[i64]| s.windows(2).all(|w| w[1] == w[0] + 1);
            let left_of = l.sites.last().unwrap() + 1 == *r.sites.first().unwrap();
            if !contiguous(&l.sites) || !contiguous(&r.sites) || !left_of {
                return Err(Error::UnsupportedExtension(
                    "fermionic product extension needs contiguous left/right factors".into(),
                ));
            }
            let m = linalg::kron(&l.matrix, &r.matrix);
            let mut sites = l.sites.clone();
            sites.extend_from_slice(&r.sites);
            Ok(DensityState::unchecked(m, sites, Statistics::Fermion))
        }
    }
}

/// The perturbed state `e^{log D + h} / Tr e^{log D + h}` of a faithful
/// state by a Hermitian element; the finite-dimensional form of the Araki
/// perturbation.
pub fn perturb(omega: &DensityState, h: &LocalOperator) -> Result<DensityState> {
    if h.window.sites() != omega.sites {
        return Err(Error::Shape(
            "perturbation operator lives on a different representation".into(),
        ));
    }
    perturb_matrix(omega, &h.matrix)
}

/// Same as [`perturb`] with a raw Hermitian matrix on the state's
/// representation.
pub fn perturb_matrix(omega: &DensityState, h: &CMat) -> Result<DensityState> {
    if h.nrows() != omega.dim() || h.ncols() != omega.dim() {
        return Err(Error::Shape("perturbation dimension mismatch".into()));
    }
    if linalg::hermiticity_defect(h) > 1e-10 {
        return Err(Error::Contract("perturbation must be Hermitian".into()));
    }
    let eig = linalg::eigh(&omega.matrix)?;
    if eig.values.first().copied().unwrap_or(0.0) <= FAITHFUL_TOL {
        return Err(Error::Domain(format!(
            "perturbation needs a faithful state (min eigenvalue {:.3e})",
            eig.values.first().copied().unwrap_or(0.0)
        )));
    }
    let logs: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&l| Complex64::new(l.max(LOG_FLOOR).ln(), 0.0))
        .collect();
    let log_d = linalg::recompose(&eig.vectors, &logs);
    let exponent = &log_d + h;
    let exp_eig = linalg::eigh(&exponent)?;
    let top = exp_eig.values.last().copied().unwrap();
    let weights: Vec<f64> = exp_eig.values.iter().map(|&l| (l - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let d: Vec<Complex64> = weights
        .iter()
        .map(|&w| Complex64::new(w / z, 0.0))
        .collect();
    let m = linalg::recompose(&exp_eig.vectors, &d);
    Ok(DensityState::unchecked(
        m,
        omega.sites.clone(),
        omega.statistics,
    ))
}

/// A quantum channel given by Kraus operators on the canonical
/// representation of its support region.
#[derive(Debug, Clone)]
pub struct Channel {
    pub kraus: Vec<CMat>,
    pub support: Region,
}

impl Channel {
    /// Validate completeness `Σ K†K = 1` (and evenness of every Kraus
    /// operator in the fermion case, which makes the channel commute with Θ).
    pub fn new(kraus: Vec<CMat>, support: Region) -> Result<Channel> {
        if kraus.is_empty() {
            return Err(Error::Contract(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let dim = support.dim();
        let mut sum = CMat::zeros((dim, dim));
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::Shape("Kraus operator dimension mismatch".into()));
            }
            sum = sum + linalg::matmul(&linalg::adjoint(k), k);
        }
        let defect = linalg::max_abs(&(&sum - &CMat::eye(dim)));
        if defect > 1e-12 {
            return Err(Error::Contract(format!(
                "channel is not trace preserving (defect {defect:.3e})"
            )));
        }
        if support.window().statistics() == Statistics::Fermion {
            if !support.is_contiguous() {
                return Err(Error::Precondition(
                    "fermionic channels need contiguous support".into(),
                ));
            }
            let n = support.len();
            let p = parity_diagonal(n);
            for k in &kraus {
                let mut defect = 0.0f64;
                for i in 0..dim {
                    for j in 0..dim {
                        if p[i] * p[j] < 0.0 {
                            defect = defect.max(k[(i, j)].norm());
                        }
                    }
                }
                if defect > 1e-12 {
                    return Err(Error::Contract(
                        "fermionic Kraus operators must be even (parity preserving)".into(),
                    ));
                }
            }
        }
        Ok(Channel { kraus, support })
    }

    /// Identity channel on a region.
    pub fn identity(support: Region) -> Channel {
        Channel {
            kraus: vec![CMat::eye(support.dim())],
            support,
        }
    }

    /// Completely depolarizing channel (spin regions): sends every input to
    /// the tracial state on the support.
    pub fn depolarizing(support: Region) -> Result<Channel> {
        if support.window().statistics() != Statistics::Spin {
            return Err(Error::Precondition(
                "depolarizing channel is provided for spin regions".into(),
            ));
        }
        let dim = support.dim();
        let scale = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMat::zeros((dim, dim));
                k[(i, j)] = Complex64::new(scale, 0.0);
                kraus.push(k);
            }
        }
        Channel::new(kraus, support)
    }

    /// Random unitary channel `exp(i H)` from a random Hermitian generator;
    /// fermionic supports get a parity-block generator so the unitary is even.
    pub fn random_unitary<R: Rng>(rng: &mut R, support: Region) -> Result<Channel> {
        let h = random_hermitian(
            rng,
            support.dim(),
            support.window().statistics() == Statistics::Fermion,
        );
        let u = linalg::expm_hermitian(&h, Complex64::new(0.0, 1.0))?;
        Channel::new(vec![u], support)
    }

    /// Random dephasing channel: projectors onto the eigenbasis of a random
    /// Hermitian operator (parity-blocked in the fermion case).
    pub fn random_dephasing<R: Rng>(rng: &mut R, support: Region) -> Result<Channel> {
        let h = random_hermitian(
            rng,
            support.dim(),
            support.window().statistics() == Statistics::Fermion,
        );
        let eig = linalg::eigh(&h)?;
        let dim = support.dim();
        let mut kraus = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut p = CMat::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    p[(i, j)] = eig.vectors[(i, k)] * eig.vectors[(j, k)].conj();
                }
            }
            kraus.push(p);
        }
        Channel::new(kraus, support)
    }

    /// Random mixture of a unitary kick and dephasing.
    pub fn random_mixture<R: Rng>(rng: &mut R, support: Region) -> Result<Channel> {
        let lambda: f64 = rng.random_range(0.1..0.9);
        let u = Self::random_unitary(rng, support.clone())?;
        let d = Self::random_dephasing(rng, support.clone())?;
        let mut kraus: Vec<CMat> = u
            .kraus
            .into_iter()
            .map(|k| k.mapv(|z| z * lambda.sqrt()))
            .collect();
        kraus.extend(
            d.kraus
                .into_iter()
                .map(|k| k.mapv(|z| z * (1.0 - lambda).sqrt())),
        );
        Channel::new(kraus, support)
    }

    /// Apply the channel to a full-window state: `ψ = (ch ⊗ id)(ρ)`.
    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        let positions = self.support.positions_in(&rho.sites)?;
        let total = rho.num_sites();
        let mut out = CMat::zeros((rho.dim(), rho.dim()));
        for k in &self.kraus {
            let kw = bits::embed(k, total, &positions);
            let tmp = linalg::matmul(&kw, &rho.matrix);
            out = out + linalg::matmul(&tmp, &linalg::adjoint(&kw));
        }
        Ok(DensityState::unchecked(
            out,
            rho.sites.clone(),
            rho.statistics,
        ))
    }
}

fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, parity_blocked: bool) -> CMat {
    let n = dim.trailing_zeros() as usize;
    let p = parity_diagonal(n);
    let mut h = CMat::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..=i {
            if parity_blocked && p[i] * p[j] < 0.0 {
                continue;
            }
            let z = if i == j {
                Complex64::new(rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            };
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Random faithful density matrix: a Wishart draw mixed with the tracial
/// state. Fermionic draws restricted to the even sector when `even` is set.
pub fn random_density<R: Rng>(
    rng: &mut R,
    sites: Vec<i64>,
    statistics: Statistics,
    even: bool,
) -> Result<DensityState> {
    check_sites(&sites)?;
    let dim = 1usize << sites.len();
    let n = sites.len();
    let p = parity_diagonal(n);
    let mut g = CMat::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            if even && p[i] * p[j] < 0.0 {
                continue;
            }
            g[(i, j)] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let w = linalg::matmul(&g, &linalg::adjoint(&g));
    let tr = linalg::trace(&w).re;
    let eps = 1e-2;
    let mut m = w.mapv(|z| z * ((1.0 - eps) / tr));
    for i in 0..dim {
        m[(i, i)] += Complex64::new(eps / dim as f64, 0.0);
    }
    Ok(DensityState::unchecked(m, sites, statistics))
}

/// Trial state for the stability check: apply a channel supported on `I`,
/// leaving the exterior marginal untouched. The exterior-marginal contract
/// is verified and a violation reported as an invariant error.
pub fn lts_trial(rho: &DensityState, region: &Region, ch: &Channel) -> Result<DensityState> {
    if ch.support.sites() != region.sites() {
        return Err(Error::Precondition(
            "channel support differs from the trial region".into(),
        ));
    }
    if rho.statistics == Statistics::Fermion && rho.parity_flag != ParityFlag::Even {
        return Err(Error::Precondition(
            "fermionic trials need an even state".into(),
        ));
    }
    let psi = ch.apply(rho)?;
    // exterior marginal must be untouched
    let exterior_sites: Vec<i64> = rho
        .sites
        .iter()
        .copied()
        .filter(|s| !region.contains(*s))
        .collect();
    if !exterior_sites.is_empty() {
        let ext = region.window().region(exterior_sites)?;
        let before = reduce(rho, &ext)?;
        let after = reduce(&psi, &ext)?;
        let residual = linalg::trace_norm(&(&after.matrix - &before.matrix));
        if residual > 1e-12 {
            return Err(Error::Invariant(format!(
                "trial channel disturbed the exterior marginal (residual {residual:.3e})"
            )));
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;
    use crate::potential::ModelSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entropy_of(m: &CMat) -> f64 {
        let eig = linalg::eigh(m).unwrap();
        -eig.values
            .iter()
            .filter(|&&l| l > 1e-300)
            .map(|&l| l * l.ln())
            .sum::<f64>()
    }

    #[test]
    fn gibbs_rejects_nonpositive_beta() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 1, Statistics::Spin).unwrap();
        assert!(matches!(
            gibbs_state(&phi, &w.full_region(), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gibbs_state(&phi, &w.full_region(), -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gibbs_infinite_temperature_limit() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 2, Statistics::Spin).unwrap();
        let d = gibbs_state(&phi, &w.full_region(), 1e-8).unwrap();
        let tracial = DensityState::tracial(w.sites(), Statistics::Spin).unwrap();
        assert!(linalg::max_abs(&(&d.matrix - &tracial.matrix)) < 1e-6);
    }

    #[test]
    fn gibbs_single_spin_closed_form() {
        // H = -X on one site: eigenvalues ∓1 for |±⟩
        let phi = ModelSpec::Tfim { j: 0.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 0, Statistics::Spin).unwrap();
        let beta = 1.0;
        let d = gibbs_state(&phi, &w.full_region(), beta).unwrap();
        let z = 1.0f64.exp() + (-1.0f64).exp();
        let pp = 1.0f64.exp() / z;
        let pm = (-1.0f64).exp() / z;
        // |+⟩⟨+| = [[.5,.5],[.5,.5]], |-⟩⟨-| = [[.5,-.5],[-.5,.5]]
        let expect00 = 0.5 * (pp + pm);
        let expect01 = 0.5 * (pp - pm);
        assert!((d.matrix[(0, 0)].re - expect00).abs() < 1e-12);
        assert!((d.matrix[(0, 1)].re - expect01).abs() < 1e-12);
    }

    #[test]
    fn gibbs_energy_matches_spectral_bookkeeping() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let spec = gibbs_spectral(&phi, &w.full_region(), 1.0).unwrap();
        let d = spec.to_density();
        let h = crate::potential::inner_hamiltonian(&phi, &w.full_region()).unwrap();
        let direct = d.expectation(&h.matrix).re;
        assert!((direct - spec.mean_energy()).abs() < 1e-10);
    }

    #[test]
    fn gibbs_minimizes_free_energy_among_random_states() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 0.7 }.potential().unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let beta = 1.3;
        let h = crate::potential::inner_hamiltonian(&phi, &w.full_region()).unwrap();
        let gibbs = gibbs_state(&phi, &w.full_region(), beta).unwrap();
        let f_gibbs = gibbs.expectation(&h.matrix).re - entropy_of(&gibbs.matrix) / beta;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let psi = random_density(&mut rng, w.sites(), Statistics::Spin, false).unwrap();
            let f_psi = psi.expectation(&h.matrix).re - entropy_of(&psi.matrix) / beta;
            assert!(f_gibbs <= f_psi + 1e-10);
        }
    }

    #[test]
    fn ground_state_dominant_field_is_plus_product() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 100.0 }.potential().unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let gs = ground_state(&phi, &w.full_region()).unwrap();
        assert_eq!(gs.degeneracy, 1);
        // fidelity against |+...+⟩
        let dim = w.dim();
        let amp = 1.0 / (dim as f64).sqrt();
        let mut fidelity = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                fidelity += (gs.state.matrix[(i, j)] * amp * amp).re;
            }
        }
        assert!(fidelity >= 1.0 - 1e-3, "fidelity {fidelity}");
    }

    #[test]
    fn ground_state_gibbs_consistency_at_low_temperature() {
        // gapped TFIM: S(ground | gibbs(β=50)) ≤ 1e-4
        let phi = ModelSpec::Tfim { j: 1.0, g: 2.0 }.potential().unwrap();
        let w = Window::new(0, 5, Statistics::Spin).unwrap();
        let gs = ground_state(&phi, &w.full_region()).unwrap();
        assert_eq!(gs.degeneracy, 1);
        let gibbs = gibbs_state(&phi, &w.full_region(), 50.0).unwrap();
        // relative entropy with the ground state as rho: -S(gs) - Tr(gs log gibbs)
        let eig = linalg::eigh(&gibbs.matrix).unwrap();
        let mut cross = 0.0;
        for k in 0..w.dim() {
            let v = eig.vectors.column(k).to_owned();
            let mut p = Complex64::new(0.0, 0.0);
            for i in 0..w.dim() {
                for j in 0..w.dim() {
                    p += v[i].conj() * gs.state.matrix[(i, j)] * v[j];
                }
            }
            cross += p.re * eig.values[k].max(1e-300).ln();
        }
        let rel = -entropy_of(&gs.state.matrix) - cross;
        assert!(rel.abs() <= 1e-4, "relative entropy {rel}");
    }

    #[test]
    fn ground_state_degenerate_zero_potential_is_tracial() {
        let phi = ModelSpec::Tfim { j: 0.0, g: 0.0 }.potential().unwrap();
        let w = Window::new(0, 2, Statistics::Spin).unwrap();
        let gs = ground_state(&phi, &w.full_region()).unwrap();
        assert_eq!(gs.degeneracy, w.dim());
        let tracial = DensityState::tracial(w.sites(), Statistics::Spin).unwrap();
        assert!(linalg::max_abs(&(&gs.state.matrix - &tracial.matrix)) < 1e-12);
    }

    #[test]
    fn reduce_product_returns_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(&mut rng, vec![0, 1], Statistics::Spin, false).unwrap();
        let b = random_density(&mut rng, vec![2, 3], Statistics::Spin, false).unwrap();
        let ab = product_extend(&a, &b).unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let ra = reduce(&ab, &w.range_region(0, 1).unwrap()).unwrap();
        let rb = reduce(&ab, &w.range_region(2, 3).unwrap()).unwrap();
        assert!(linalg::max_abs(&(&ra.matrix - &a.matrix)) < 1e-12);
        assert!(linalg::max_abs(&(&rb.matrix - &b.matrix)) < 1e-12);
    }

    #[test]
    fn reduce_tracial_is_tracial() {
        let w = Window::new(0, 3, Statistics::Fermion).unwrap();
        let tr = DensityState::tracial(w.sites(), Statistics::Fermion).unwrap();
        let r = reduce(&tr, &w.region([1, 3]).unwrap()).unwrap();
        let small = DensityState::tracial(vec![1, 3], Statistics::Fermion).unwrap();
        assert!(linalg::max_abs(&(&r.matrix - &small.matrix)) < 1e-12);
    }

    #[test]
    fn reduce_is_trace_preserving_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Window::new(0, 4, Statistics::Spin).unwrap();
        let rho = random_density(&mut rng, w.sites(), Statistics::Spin, false).unwrap();
        let ab = w.region([0, 1, 3]).unwrap();
        let a = w.region([0, 3]).unwrap();
        let r_ab = reduce(&rho, &ab).unwrap();
        assert!((linalg::trace(&r_ab.matrix).re - 1.0).abs() < 1e-12);
        let r_a_direct = reduce(&rho, &a).unwrap();
        let r_a_iter = reduce(&r_ab, &a).unwrap();
        assert!(linalg::max_abs(&(&r_a_direct.matrix - &r_a_iter.matrix)) < 1e-12);
    }

    #[test]
    fn fermionic_prefix_reduce_matches_moment_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = Window::new(0, 3, Statistics::Fermion).unwrap();
        // non-even state: prefix fast path must still agree with the expansion
        let rho = random_density(&mut rng, w.sites(), Statistics::Fermion, false).unwrap();
        let prefix = w.range_region(0, 1).unwrap();
        let fast = reduce(&rho, &prefix).unwrap();
        let slow = fermion_moment_reduce(&rho, &[0, 1]).unwrap();
        assert!(linalg::max_abs(&(&fast.matrix - &slow)) < 1e-12);
    }

    #[test]
    fn fermionic_noncontiguous_reduce_matches_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Window::new(0, 3, Statistics::Fermion).unwrap();
        let rho = random_density(&mut rng, w.sites(), Statistics::Fermion, true).unwrap();
        let region = w.region([0, 2]).unwrap();
        let reduced = reduce(&rho, &region).unwrap();
        // oracle: every subalgebra moment matches the original expectation
        let canon = [0i64, 1];
        for code in 0..16usize {
            let (mut big, mut small) = (
                OperatorPoly::identity(Statistics::Fermion),
                OperatorPoly::identity(Statistics::Fermion),
            );
            let (mut c, sites) = (code, [0i64, 2]);
            for j in 0..2 {
                let which = c % 4;
                c /= 4;
                if which != 0 {
                    big = big.times(&site_factor(sites[j], which));
                    small = small.times(&site_factor(canon[j], which));
                }
            }
            let lhs = small.expectation(&reduced.matrix, &canon).unwrap();
            let rhs = big.expectation(&rho.matrix, &rho.sites).unwrap();
            assert!((lhs - rhs).norm() < 1e-12, "moment mismatch at code {code}");
        }
    }

    #[test]
    fn fermionic_even_contiguous_segment_fast_path_matches_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = Window::new(0, 3, Statistics::Fermion).unwrap();
        let rho = random_density(&mut rng, w.sites(), Statistics::Fermion, true).unwrap();
        assert_eq!(rho.parity_flag, ParityFlag::Even);
        let mid = w.range_region(1, 2).unwrap();
        let fast = reduce(&rho, &mid).unwrap();
        let slow = fermion_moment_reduce(&rho, &[1, 2]).unwrap();
        assert!(linalg::max_abs(&(&fast.matrix - &slow)) < 1e-12);
    }

    #[test]
    fn product_extension_factorizes_on_monomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_density(&mut rng, vec![0, 1], Statistics::Fermion, true).unwrap();
        let b = random_density(&mut rng, vec![2, 3], Statistics::Fermion, true).unwrap();
        let ab = product_extend(&a, &b).unwrap();
        let ctx = [0i64, 1, 2, 3];
        let mut worst = 0.0f64;
        for code_a in 0..16usize {
            for code_b in 0..16usize {
                let mut pa = OperatorPoly::identity(Statistics::Fermion);
                let mut ca = code_a;
                for j in 0..2 {
                    let which = ca % 4;
                    ca /= 4;
                    if which != 0 {
                        pa = pa.times(&site_factor(j as i64, which));
                    }
                }
                let mut pb = OperatorPoly::identity(Statistics::Fermion);
                let mut cb = code_b;
                for j in 0..2 {
                    let which = cb % 4;
                    cb /= 4;
                    if which != 0 {
                        pb = pb.times(&site_factor(2 + j as i64, which));
                    }
                }
                let joint = pa.times(&pb).expectation(&ab.matrix, &ctx).unwrap();
                let ea = a.expect_poly(&pa).unwrap();
                let eb = pb.expectation(&b.matrix, &[2, 3]).unwrap();
                worst = worst.max((joint - ea * eb).norm());
            }
        }
        assert!(worst < 1e-12, "factorization residual {worst}");
    }

    #[test]
    fn product_extension_tracial_factors() {
        let a = DensityState::tracial(vec![0, 1], Statistics::Fermion).unwrap();
        let b = DensityState::tracial(vec![2], Statistics::Fermion).unwrap();
        let ab = product_extend(&a, &b).unwrap();
        let tr = DensityState::tracial(vec![0, 1, 2], Statistics::Fermion).unwrap();
        assert!(linalg::max_abs(&(&ab.matrix - &tr.matrix)) < 1e-14);
    }

    #[test]
    fn fermionic_extension_rejects_noneven() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_density(&mut rng, vec![0], Statistics::Fermion, false).unwrap();
        assert_eq!(a.parity_flag, ParityFlag::NonEven);
        let b = DensityState::tracial(vec![1], Statistics::Fermion).unwrap();
        assert!(matches!(
            product_extend(&a, &b),
            Err(Error::UnsupportedExtension(_))
        ));
    }

    #[test]
    fn spin_interleaved_product_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_density(&mut rng, vec![0, 2], Statistics::Spin, false).unwrap();
        let b = random_density(&mut rng, vec![1, 3], Statistics::Spin, false).unwrap();
        let ab = product_extend(&a, &b).unwrap();
        assert_eq!(ab.sites, vec![0, 1, 2, 3]);
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let ra = reduce(&ab, &w.region([0, 2]).unwrap()).unwrap();
        let rb = reduce(&ab, &w.region([1, 3]).unwrap()).unwrap();
        assert!(linalg::max_abs(&(&ra.matrix - &a.matrix)) < 1e-12);
        assert!(linalg::max_abs(&(&rb.matrix - &b.matrix)) < 1e-12);
    }

    #[test]
    fn perturb_exponent_arithmetic() {
        // perturbing a Gibbs state by -β·(extra field) matches the Gibbs
        // state of the enlarged Hamiltonian
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 2, Statistics::Spin).unwrap();
        let beta = 0.7;
        let gibbs = gibbs_state(&phi, &w.full_region(), beta).unwrap();
        let field = ModelSpec::Tfim { j: 0.0, g: 1.0 }.potential().unwrap();
        let v = crate::potential::inner_hamiltonian(&field, &w.full_region()).unwrap();
        let h_pert = v.matrix.mapv(|z| z * -beta);
        let perturbed = perturb_matrix(&gibbs, &h_pert).unwrap();
        let phi2 = ModelSpec::Tfim { j: 1.0, g: 2.0 }.potential().unwrap();
        let oracle = gibbs_state(&phi2, &w.full_region(), beta).unwrap();
        assert!(linalg::max_abs(&(&perturbed.matrix - &oracle.matrix)) < 1e-10);
    }

    #[test]
    fn perturb_by_zero_and_scalar_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = random_density(&mut rng, vec![0, 1], Statistics::Spin, false).unwrap();
        let zero = CMat::zeros((4, 4));
        let p0 = perturb_matrix(&rho, &zero).unwrap();
        assert!(linalg::max_abs(&(&p0.matrix - &rho.matrix)) < 1e-11);
        let scalar = CMat::eye(4).mapv(|z| z * 3.7);
        let pc = perturb_matrix(&rho, &scalar).unwrap();
        assert!(linalg::max_abs(&(&pc.matrix - &rho.matrix)) < 1e-11);
    }

    #[test]
    fn perturb_chain_rule_for_commuting_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let rho = random_density(&mut rng, vec![0, 1], Statistics::Spin, false).unwrap();
        let mut h1 = CMat::zeros((4, 4));
        let mut h2 = CMat::zeros((4, 4));
        for i in 0..4 {
            h1[(i, i)] = Complex64::new(0.3 * i as f64, 0.0);
            h2[(i, i)] = Complex64::new(0.1 * (i * i) as f64 - 0.2, 0.0);
        }
        let two_step = perturb_matrix(&perturb_matrix(&rho, &h1).unwrap(), &h2).unwrap();
        let one_step = perturb_matrix(&rho, &(&h1 + &h2)).unwrap();
        assert!(linalg::max_abs(&(&two_step.matrix - &one_step.matrix)) < 1e-10);
    }

    #[test]
    fn perturb_rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rho = random_density(&mut rng, vec![0], Statistics::Spin, false).unwrap();
        let mut nonherm = CMat::zeros((2, 2));
        nonherm[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            perturb_matrix(&rho, &nonherm),
            Err(Error::Contract(_))
        ));
        let pure = DensityState::pure(
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![0],
            Statistics::Spin,
        )
        .unwrap();
        let zero = CMat::zeros((2, 2));
        assert!(matches!(
            perturb_matrix(&pure, &zero),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gibbs_condition_window_identity() {
        // perturbing the window Gibbs state by βH_∂I decouples it exactly
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 5, Statistics::Spin).unwrap();
        let beta = 1.0;
        let inner = w.range_region(2, 3).unwrap();
        let outer = inner.complement();
        let gibbs_w = gibbs_state(&phi, &w.full_region(), beta).unwrap();
        let surf = crate::potential::surface_energy(&phi, &inner, &w).unwrap();
        let h = surf.op.matrix.mapv(|z| z * beta);
        let pert = perturb_matrix(&gibbs_w, &h).unwrap();
        let gi = gibbs_state(&phi, &inner, beta).unwrap();
        let go = gibbs_state(&phi, &outer, beta).unwrap();
        let prod = product_extend(&gi, &go).unwrap();
        assert!(linalg::max_abs(&(&pert.matrix - &prod.matrix)) < 1e-10);
    }

    #[test]
    fn identity_channel_trial_returns_state() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let rho = gibbs_state(&phi, &w.full_region(), 1.0).unwrap();
        let region = w.range_region(1, 2).unwrap();
        let trial = lts_trial(&rho, &region, &Channel::identity(region.clone())).unwrap();
        assert!(linalg::max_abs(&(&trial.matrix - &rho.matrix)) < 1e-13);
    }

    #[test]
    fn depolarizing_trial_is_tracial_cross_product() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let rho = gibbs_state(&phi, &w.full_region(), 1.0).unwrap();
        let region = w.range_region(1, 2).unwrap();
        let trial = lts_trial(
            &rho,
            &region,
            &Channel::depolarizing(region.clone()).unwrap(),
        )
        .unwrap();
        let tr_i = DensityState::tracial(vec![1, 2], Statistics::Spin).unwrap();
        let ext = reduce(&rho, &region.complement()).unwrap();
        let oracle = product_extend(&tr_i, &ext).unwrap();
        assert!(linalg::max_abs(&(&trial.matrix - &oracle.matrix)) < 1e-12);
    }

    #[test]
    fn random_channels_preserve_exterior_marginal() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 0.5 }.potential().unwrap();
        let w = Window::new(0, 4, Statistics::Spin).unwrap();
        let rho = gibbs_state(&phi, &w.full_region(), 0.8).unwrap();
        let region = w.range_region(1, 2).unwrap();
        let ext = region.complement();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for k in 0..100 {
            let ch = match k % 3 {
                0 => Channel::random_unitary(&mut rng, region.clone()).unwrap(),
                1 => Channel::random_dephasing(&mut rng, region.clone()).unwrap(),
                _ => Channel::random_mixture(&mut rng, region.clone()).unwrap(),
            };
            let trial = lts_trial(&rho, &region, &ch).unwrap();
            let before = reduce(&rho, &ext).unwrap();
            let after = reduce(&trial, &ext).unwrap();
            assert!(linalg::trace_norm(&(&after.matrix - &before.matrix)) <= 1e-12);
        }
    }

    #[test]
    fn fermionic_channels_are_even_and_preserve_marginals() {
        let phi = ModelSpec::KitaevChain {
            t: 1.0,
            delta: 0.5,
            mu: 0.7,
        }
        .potential()
        .unwrap();
        let w = Window::new(0, 3, Statistics::Fermion).unwrap();
        let rho = gibbs_state(&phi, &w.full_region(), 1.0).unwrap();
        assert_eq!(rho.parity_flag, ParityFlag::Even);
        let region = w.range_region(1, 2).unwrap();
        let ext = region.complement();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..20 {
            let ch = Channel::random_mixture(&mut rng, region.clone()).unwrap();
            let trial = lts_trial(&rho, &region, &ch).unwrap();
            assert_eq!(trial.parity_flag, ParityFlag::Even);
            let before = reduce(&rho, &ext).unwrap();
            let after = reduce(&trial, &ext).unwrap();
            assert!(linalg::trace_norm(&(&after.matrix - &before.matrix)) <= 1e-12);
        }
    }

    #[test]
    fn evenness_detection() {
        let phi = ModelSpec::KitaevChain {
            t: 1.0,
            delta: 0.5,
            mu: 0.7,
        }
        .potential()
        .unwrap();
        let w = Window::new(0, 2, Statistics::Fermion).unwrap();
        let gibbs = gibbs_state(&phi, &w.full_region(), 1.0).unwrap();
        let (even, res) = is_even(&gibbs).unwrap();
        assert!(even, "Gibbs state of an even Hamiltonian, residual {res}");
        let tr = DensityState::tracial(w.sites(), Statistics::Fermion).unwrap();
        assert!(is_even(&tr).unwrap().0);
        // a one-mode superposition of occupations is not even
        let amp = 1.0 / 2.0f64.sqrt();
        let psi = DensityState::pure(
            &[Complex64::new(amp, 0.0), Complex64::new(amp, 0.0)],
            vec![0],
            Statistics::Fermion,
        )
        .unwrap();
        let (even, res) = is_even(&psi).unwrap();
        assert!(!even);
        assert!(res > 0.5);
    }

    #[test]
    fn spectral_reduction_matches_partial_trace() {
        let phi = ModelSpec::Tfim { j: 1.0, g: 1.0 }.potential().unwrap();
        let w = Window::new(0, 5, Statistics::Spin).unwrap();
        let spec = gibbs_spectral(&phi, &w.full_region(), 0.9).unwrap();
        let d = spec.to_density();
        let left = spec.reduce_to_positions(&[0, 1, 2]);
        let direct = bits::partial_trace(&d.matrix, 6, &[0, 1, 2]);
        assert!(linalg::max_abs(&(&left - &direct)) < 1e-12);
        let mid = spec.reduce_to_positions(&[2, 4]);
        let direct_mid = bits::partial_trace(&d.matrix, 6, &[2, 4]);
        assert!(linalg::max_abs(&(&mid - &direct_mid)) < 1e-12);
    }
}
