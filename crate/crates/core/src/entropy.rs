//! Entropy functionals: von Neumann, Umegaki relative entropy, conditional
//! entropy with exhausting-window limits, mutual entropy (two independent
//! routes), Donald's decomposition, Pinsker and strong-subadditivity gaps,
//! and trace distance.
//!
//! Natural logarithm throughout; infinite relative entropy is an explicit
//! sentinel carrying the support-violation flag, never a large float.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Region, Window};
use crate::linalg::{self, CMat};
use crate::monomial::Statistics;
use crate::potential::Potential;
use crate::states::{self, DensityState, ParityFlag};

/// Entropy in nats, with an explicit infinity sentinel for relative
/// entropies whose support condition fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub nats: f64,
    pub support_violation: bool,
}

impl EntropyValue {
    pub fn finite(nats: f64) -> EntropyValue {
        EntropyValue {
            nats,
            support_violation: false,
        }
    }

    pub fn infinite() -> EntropyValue {
        EntropyValue {
            nats: f64::INFINITY,
            support_violation: true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.support_violation
    }
}

/// Eigenvalue weight on near-kernel directions of σ above which the
/// relative entropy is declared infinite.
const SUPPORT_KERNEL_TOL: f64 = 1e-12;
const SUPPORT_WEIGHT_TOL: f64 = 1e-10;

/// `-Σ λ log λ` of a density matrix.
pub fn matrix_entropy(m: &CMat) -> Result<f64> {
    let eig = linalg::eigh(m)?;
    Ok(-eig
        .values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>())
}

/// Von Neumann entropy of the reduction of a state to a region.
pub fn von_neumann(rho: &DensityState, region: &Region) -> Result<EntropyValue> {
    let reduced = states::reduce(rho, region)?;
    Ok(EntropyValue::finite(matrix_entropy(&reduced.matrix)?))
}

/// Von Neumann entropy of the state on its full support.
pub fn von_neumann_full(rho: &DensityState) -> Result<f64> {
    matrix_entropy(&rho.matrix)
}

/// Umegaki relative entropy `Tr D_ρ (log D_ρ - log D_σ)`; infinite when ρ
/// puts more than `1e-10` weight on the near-kernel of σ.
pub fn relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<EntropyValue> {
    if rho.sites != sigma.sites || rho.statistics != sigma.statistics {
        return Err(Error::Precondition(
            "relative entropy needs states on the same subsystem".into(),
        ));
    }
    let n = rho.dim();
    let rho_eig = linalg::eigh(&rho.matrix)?;
    let tr_rho_log_rho: f64 = rho_eig
        .values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum();
    let sig_eig = linalg::eigh(&sigma.matrix)?;
    // diagonal weights p_k = <v_k| ρ |v_k> in σ's eigenbasis
    let dv = linalg::matmul(&rho.matrix, &sig_eig.vectors);
    let mut cross = 0.0f64;
    let mut kernel_weight = 0.0f64;
    for k in 0..n {
        let mut p = Complex64::new(0.0, 0.0);
        for i in 0..n {
            p += sig_eig.vectors[(i, k)].conj() * dv[(i, k)];
        }
        let p = p.re.max(0.0);
        let s = sig_eig.values[k];
        if s < SUPPORT_KERNEL_TOL {
            kernel_weight += p;
        } else {
            cross += p * s.ln();
        }
    }
    if kernel_weight > SUPPORT_WEIGHT_TOL {
        return Ok(EntropyValue::infinite());
    }
    Ok(EntropyValue::finite(tr_rho_log_rho - cross))
}

/// Conditional entropy `S̃_{I|J} = S_{I∪J} - S_J`; reduces to `S_I` for
/// empty `J`. May be negative.
pub fn conditional_entropy(rho: &DensityState, i: &Region, j: &Region) -> Result<f64> {
    if !i.is_disjoint_from(j) {
        return Err(Error::Precondition(
            "conditional entropy needs disjoint regions".into(),
        ));
    }
    if j.is_empty() {
        return Ok(von_neumann(rho, i)?.nats);
    }
    let union = i.union(j)?;
    let s_union = von_neumann(rho, &union)?.nats;
    let s_j = von_neumann(rho, j)?.nats;
    Ok(s_union - s_j)
}

/// Direction tag recorded with a convergence series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotoneDirection {
    NonIncreasing,
    NonDecreasing,
}

/// A sequence of values along growing regions, with convergence metadata.
#[derive(Debug, Clone)]
pub struct ConvergenceSeries {
    /// Pairs `(region size, value)` in ladder order.
    pub points: Vec<(usize, f64)>,
    pub converged: bool,
    pub tolerance: f64,
    pub direction: MonotoneDirection,
}

impl ConvergenceSeries {
    pub fn last_value(&self) -> Option<f64> {
        self.points.last().map(|&(_, v)| v)
    }

    /// Largest violation of the declared monotonicity direction (0 when
    /// perfectly monotone).
    pub fn monotonicity_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for w in self.points.windows(2) {
            let step = w[1].1 - w[0].1;
            let bad = match self.direction {
                MonotoneDirection::NonIncreasing => step,
                MonotoneDirection::NonDecreasing => -step,
            };
            defect = defect.max(bad);
        }
        defect
    }
}

/// The exhausting-region limit of the conditional entropy: for each window
/// of the ladder, `S̃_{I|Λ}` with `Λ = W ∖ I` for the window Gibbs state.
/// The sequence must be non-increasing within a `1e-9` slack (strong
/// subadditivity along the exhaustion); convergence is declared when the
/// last successive difference drops below the tolerance.
pub fn conditional_entropy_limit(
    phi: &Potential,
    beta: f64,
    i_sites: &[i64],
    ladder: &[Window],
    tolerance: f64,
) -> Result<ConvergenceSeries> {
    if ladder.is_empty() {
        return Err(Error::Precondition("empty window ladder".into()));
    }
    let mut points = Vec::with_capacity(ladder.len());
    for w in ladder {
        let i_region = w.region(i_sites.iter().copied())?;
        if i_region.len() != i_sites.len() {
            return Err(Error::Precondition(
                "conditioned region must lie inside every ladder window".into(),
            ));
        }
        let lambda = i_region.complement();
        let spec = states::gibbs_spectral(phi, &w.full_region(), beta)?;
        let s_all = spec.entropy();
        let lambda_positions: Vec<usize> = lambda.window_positions();
        let reduced = spec.reduce_to_positions(&lambda_positions);
        let s_lambda = matrix_entropy(&reduced)?;
        points.push((lambda.len(), s_all - s_lambda));
    }
    let series = ConvergenceSeries {
        converged: points
            .windows(2)
            .last()
            .map(|w| (w[1].1 - w[0].1).abs() < tolerance)
            .unwrap_or(false),
        points,
        tolerance,
        direction: MonotoneDirection::NonIncreasing,
    };
    if series.monotonicity_defect() > 1e-9 {
        return Err(Error::Invariant(format!(
            "conditional entropy series increased by {:.3e} along the exhaustion",
            series.monotonicity_defect()
        )));
    }
    Ok(series)
}

/// Mutual entropy `I(A:B) = S_A + S_B - S_{A∪B}` through the entropy
/// combination route.
pub fn mutual_entropy(rho: &DensityState, a: &Region, b: &Region) -> Result<f64> {
    if !a.is_disjoint_from(b) {
        return Err(Error::Precondition(
            "mutual entropy needs disjoint regions".into(),
        ));
    }
    let s_a = von_neumann(rho, a)?.nats;
    let s_b = von_neumann(rho, b)?.nats;
    let s_ab = von_neumann(rho, &a.union(b)?)?.nats;
    Ok(s_a + s_b - s_ab)
}

/// Mutual entropy through the relative-entropy route
/// `S(ρ_{A∪B} | ρ_A ⊗ ρ_B)`, available whenever the product extension of
/// the reduced states exists.
pub fn mutual_entropy_via_relative(
    rho: &DensityState,
    a: &Region,
    b: &Region,
) -> Result<EntropyValue> {
    if !a.is_disjoint_from(b) {
        return Err(Error::Precondition(
            "mutual entropy needs disjoint regions".into(),
        ));
    }
    let rho_ab = states::reduce(rho, &a.union(b)?)?;
    let rho_a = states::reduce(rho, a)?;
    let rho_b = states::reduce(rho, b)?;
    let product = states::product_extend(&rho_a, &rho_b)?;
    relative_entropy(&rho_ab, &product)
}

/// The four quantities of Donald's decomposition and their closure residual.
#[derive(Debug, Clone)]
pub struct DonaldReport {
    pub mutual: f64,
    pub joint_relative: f64,
    pub left_relative: f64,
    pub right_relative: f64,
    /// `|I - S(ϖ|ρ_L⊗ρ_R) + S(ϖ_L|ρ_L) + S(ϖ_R|ρ_R)|`
    pub residual: f64,
}

/// Donald's formula: `S(ϖ | ρ_L ⊗ ρ_R) = I_ϖ(L:R) + S(ϖ_L|ρ_L) + S(ϖ_R|ρ_R)`
/// for a faithful joint state and arbitrary faithful reference states on the
/// two halves (even states in the fermionic case).
pub fn donald_decompose(
    varpi: &DensityState,
    rho_l: &DensityState,
    rho_r: &DensityState,
) -> Result<DonaldReport> {
    let mut expected = rho_l.sites.clone();
    expected.extend_from_slice(&rho_r.sites);
    if varpi.sites != expected {
        return Err(Error::Precondition(
            "reference states must tile the joint state's sites".into(),
        ));
    }
    for (name, st) in [("joint", varpi), ("left", rho_l), ("right", rho_r)] {
        if !st.is_faithful()? {
            return Err(Error::Domain(format!("{name} state is not faithful")));
        }
    }
    if varpi.statistics == Statistics::Fermion && varpi.parity_flag != ParityFlag::Even {
        return Err(Error::Precondition(
            "fermionic Donald decomposition needs even states".into(),
        ));
    }
    // regions relative to varpi's representation
    let w = Window::new(
        varpi.sites[0],
        *varpi.sites.last().unwrap(),
        varpi.statistics,
    )?;
    let left = w.region(rho_l.sites.iter().copied())?;
    let right = w.region(rho_r.sites.iter().copied())?;
    let mutual = mutual_entropy(varpi, &left, &right)?;
    let product = states::product_extend(rho_l, rho_r)?;
    let joint_relative = relative_entropy(varpi, &product)?;
    let left_relative = relative_entropy(&states::reduce(varpi, &left)?, rho_l)?;
    let right_relative = relative_entropy(&states::reduce(varpi, &right)?, rho_r)?;
    if joint_relative.is_infinite() || left_relative.is_infinite() || right_relative.is_infinite() {
        return Err(Error::Domain(
            "faithful inputs produced an infinite relative entropy".into(),
        ));
    }
    let residual = (mutual - joint_relative.nats + left_relative.nats + right_relative.nats).abs();
    Ok(DonaldReport {
        mutual,
        joint_relative: joint_relative.nats,
        left_relative: left_relative.nats,
        right_relative: right_relative.nats,
        residual,
    })
}

/// Trace distance `‖ρ - σ‖₁` via singular values of the difference.
pub fn trace_distance(rho: &DensityState, sigma: &DensityState) -> f64 {
    linalg::trace_norm(&(&rho.matrix - &sigma.matrix))
}

/// Pinsker gap `2 S(ρ|σ) - ‖ρ-σ‖₁²`; infinite relative entropy gives an
/// infinite gap.
pub fn pinsker_gap(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    let rel = relative_entropy(rho, sigma)?;
    if rel.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let dist = trace_distance(rho, sigma);
    Ok(2.0 * rel.nats - dist * dist)
}

/// Strong-subadditivity gap `S_X + S_Y - S_{X∩Y} - S_{X∪Y}` (regions may
/// overlap; the entropy of the empty region is zero).
pub fn ssa_gap(rho: &DensityState, x: &Region, y: &Region) -> Result<f64> {
    let s = |r: &Region| -> Result<f64> {
        if r.is_empty() {
            Ok(0.0)
        } else {
            Ok(von_neumann(rho, r)?.nats)
        }
    };
    let s_x = s(x)?;
    let s_y = s(y)?;
    let s_cap = s(&x.intersection(y))?;
    let s_cup = s(&x.union(y)?)?;
    Ok(s_x + s_y - s_cap - s_cup)
}

/// Slack report for the entropy inequalities on a pair of disjoint regions.
#[derive(Debug, Clone)]
pub struct EntropyBoundsReport {
    /// `S_I - |S̃_{I|J}|` (triangle inequality of the conditional entropy).
    pub triangle_slack: f64,
    /// `2 S_I - I(I:J)`.
    pub two_entropy_slack: f64,
    /// `I(I : full complement) - I(I:J)` (monotonicity in the outer region).
    pub monotone_slack: f64,
    /// Set when the state is fermionic and non-even: the bounds are not
    /// guaranteed there and the check is skipped.
    pub skipped_noneven: bool,
}

/// Check `|S̃_{I|J}| ≤ S_I`, `I(I:J) ≤ 2 S_I` and mutual-entropy
/// monotonicity for a state and disjoint regions `I`, `J`.
pub fn entropy_bounds_check(
    rho: &DensityState,
    i: &Region,
    j: &Region,
) -> Result<EntropyBoundsReport> {
    if !i.is_disjoint_from(j) {
        return Err(Error::Precondition(
            "bound check needs disjoint regions".into(),
        ));
    }
    if rho.statistics == Statistics::Fermion && rho.parity_flag != ParityFlag::Even {
        return Ok(EntropyBoundsReport {
            triangle_slack: f64::NAN,
            two_entropy_slack: f64::NAN,
            monotone_slack: f64::NAN,
            skipped_noneven: true,
        });
    }
    let s_i = von_neumann(rho, i)?.nats;
    let cond = conditional_entropy(rho, i, j)?;
    let mutual = mutual_entropy(rho, i, j)?;
    // full in-representation complement of I
    let w = i.window();
    let full_j: Vec<i64> = rho
        .sites
        .iter()
        .copied()
        .filter(|s| !i.contains(*s))
        .collect();
    let mutual_full = if full_j.is_empty() {
        0.0
    } else {
        mutual_entropy(rho, i, &w.region(full_j)?)?
    };
    Ok(EntropyBoundsReport {
        triangle_slack: s_i - cond.abs(),
        two_entropy_slack: 2.0 * s_i - mutual,
        monotone_slack: mutual_full - mutual,
        skipped_noneven: false,
    })
}
