//! The verification layer: variational stability checks, the thermal
//! area-law inequality chain, Gibbs-condition product formulas, decoupled
//! dynamics, perturbation bounds, correlation estimates, ground-state
//! mutual-entropy identities, and the half-chain mutual-entropy series with
//! its `2β‖W_LR‖` bound.
//!
//! Every conditional quantity uses the finite-window surrogate `J = W ∖ I`;
//! reports carry window sizes and truncation flags so the finite-volume
//! approximation stays explicit.

use num_complex::Complex64;
use rand::Rng;

use crate::entropy::{self, ConvergenceSeries, MonotoneDirection};
use crate::error::{Error, Result};
use crate::lattice::{parity_map, LocalOperator, Region, Window};
use crate::linalg::{self, CMat};
use crate::monomial::Statistics;
use crate::potential::{self, Potential};
use crate::states::{self, Channel, DensityState};

/// Split a window at `cut` into the left region `{s < cut}` and right
/// region `{s ≥ cut}`.
pub fn split_at(window: &Window, cut: i64) -> Result<(Region, Region)> {
    if cut <= window.lo() || cut > window.hi() {
        return Err(Error::Precondition(format!(
            "cut {cut} outside the window interior"
        )));
    }
    Ok((
        window.range_region(window.lo(), cut - 1)?,
        window.range_region(cut, window.hi())?,
    ))
}

/// Conditional free energy `F̃_I(ψ) = ψ(H̃_I) - (1/β) S̃_I(ψ)` with the
/// window complement standing in for the infinite exterior.
pub fn conditional_free_energy(
    psi: &DensityState,
    region: &Region,
    phi: &Potential,
    beta: f64,
) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let window = region.window();
    if psi.sites != window.sites() {
        return Err(Error::Precondition(
            "state must live on the region's window".into(),
        ));
    }
    let open = potential::open_hamiltonian(phi, region, &window)?;
    let energy = psi.expectation(&open.op.matrix).re;
    let s_all = entropy::von_neumann_full(psi)?;
    let complement = region.complement();
    let s_cond = if complement.is_empty() {
        s_all
    } else {
        s_all - entropy::von_neumann(psi, &complement)?.nats
    };
    Ok(energy - s_cond / beta)
}

/// Outcome of the variational stability check on one region.
#[derive(Debug, Clone)]
pub struct LtsReport {
    pub f_phi: f64,
    /// `(trial id, F̃_I(ψ), margin)` per random channel trial.
    pub trial_results: Vec<(usize, f64, f64)>,
    pub min_margin: f64,
}

/// Check that the window Gibbs state minimizes the conditional free energy
/// among channel-generated trial states agreeing with it outside `I`.
pub fn lts_check<R: Rng>(
    phi: &Potential,
    region: &Region,
    beta: f64,
    n_trials: usize,
    rng: &mut R,
) -> Result<LtsReport> {
    let window = region.window();
    let gibbs = states::gibbs_state(phi, &window.full_region(), beta)?;
    let f_phi = conditional_free_energy(&gibbs, region, phi, beta)?;
    let mut trial_results = Vec::with_capacity(n_trials);
    let mut min_margin = f64::INFINITY;
    for id in 0..n_trials {
        let ch = match id % 3 {
            0 => Channel::random_unitary(rng, region.clone())?,
            1 => Channel::random_dephasing(rng, region.clone())?,
            _ => Channel::random_mixture(rng, region.clone())?,
        };
        let trial = states::lts_trial(&gibbs, region, &ch)?;
        let f_psi = conditional_free_energy(&trial, region, phi, beta)?;
        let margin = f_psi - f_phi;
        min_margin = min_margin.min(margin);
        trial_results.push((id, f_psi, margin));
    }
    Ok(LtsReport {
        f_phi,
        trial_results,
        min_margin,
    })
}

/// The three-step thermal area-law chain on one region.
#[derive(Debug, Clone)]
pub struct AreaLawReport {
    /// `I_φ(A : W∖A)`.
    pub mutual: f64,
    /// `β (φ_A ⊗ φ_{A^c} - φ)(H_∂A)`.
    pub energy_gap_term: f64,
    /// `2 β ‖H_∂A‖`.
    pub norm_bound: f64,
    /// `energy_gap_term - mutual`.
    pub slack1: f64,
    /// `norm_bound - energy_gap_term`.
    pub slack2: f64,
    /// `c_Φ |∂A|` with `|∂A|` the boundary bond count.
    pub geometric_bound: f64,
    /// `I(A : W∖A) - I(A : B)` for an inner exterior block `B ⊂ W∖A`.
    pub monotone_slack: Option<f64>,
    /// Surface energy truncated at the window edge.
    pub truncation_flag: bool,
}

/// Evaluate the mutual-entropy chain
/// `I ≤ β(φ_A⊗φ_{A^c} - φ)(H_∂A) ≤ 2β‖H_∂A‖` for the window Gibbs state.
pub fn area_law_chain(
    phi: &Potential,
    beta: f64,
    window: &Window,
    a: &Region,
) -> Result<AreaLawReport> {
    let spec = states::gibbs_spectral(phi, &window.full_region(), beta)?;
    let gibbs = spec.to_density();
    let b = a.complement();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition(
            "area-law region must cut the window".into(),
        ));
    }
    let rho_a = states::reduce(&gibbs, a)?;
    let rho_b = states::reduce(&gibbs, &b)?;
    let s_a = entropy::matrix_entropy(&rho_a.matrix)?;
    let s_b = entropy::matrix_entropy(&rho_b.matrix)?;
    let mutual = s_a + s_b - spec.entropy();
    let surface = potential::surface_energy(phi, a, window)?;
    let product = states::product_extend(&rho_a, &rho_b)?;
    let energy_gap_term =
        beta * (product.expectation(&surface.op.matrix) - gibbs.expectation(&surface.op.matrix)).re;
    let norm_bound = 2.0 * beta * surface.norm;
    let geometric_bound = phi.max_term_norm() * potential::boundary_bond_count(a) as f64;
    // monotonicity bonus: drop the exterior sites farthest from A
    let monotone_slack = if b.len() >= 2 {
        let keep = b.len() - 1;
        let b_sites: Vec<i64> = if b.sites()[0] > a.sites()[0] {
            b.sites().iter().copied().take(keep).collect()
        } else {
            b.sites().iter().copied().skip(b.len() - keep).collect()
        };
        let b_sub = window.region(b_sites)?;
        let sub_mutual = entropy::mutual_entropy(&gibbs, a, &b_sub)?;
        Some(mutual - sub_mutual)
    } else {
        None
    };
    Ok(AreaLawReport {
        mutual,
        energy_gap_term,
        norm_bound,
        slack1: energy_gap_term - mutual,
        slack2: norm_bound - energy_gap_term,
        geometric_bound,
        monotone_slack,
        truncation_flag: surface.truncated,
    })
}

/// Residuals of the Gibbs-condition product formula on a window.
#[derive(Debug, Clone)]
pub struct GibbsConditionReport {
    /// `‖ [φ^{βH_∂I}]|_I - ρ_I^{β,Φ} ‖₁`.
    pub reduction_residual: f64,
    /// `‖ [φ^{βH_∂I}] - ρ_I^{β,Φ} ⊗ [φ^{βH_∂I}]|_{I^c} ‖₁`.
    pub product_residual: f64,
    pub truncated: bool,
}

/// Perturb the window Gibbs state by `βH_∂I` and compare against the local
/// Gibbs state on `I` and the product with the exterior restriction. Exact
/// identities at finite window: the exponents decouple.
pub fn gibbs_condition_check(
    phi: &Potential,
    beta: f64,
    window: &Window,
    region: &Region,
) -> Result<GibbsConditionReport> {
    let gibbs_w = states::gibbs_state(phi, &window.full_region(), beta)?;
    let surface = potential::surface_energy(phi, region, window)?;
    let perturbed = states::perturb_matrix(&gibbs_w, &surface.op.matrix.mapv(|z| z * beta))?;
    let local_gibbs = states::gibbs_state(phi, region, beta)?;
    let restricted = states::reduce(&perturbed, region)?;
    let reduction_residual = linalg::trace_norm(&(&restricted.matrix - &local_gibbs.matrix));
    let exterior = states::reduce(&perturbed, &region.complement())?;
    let product = states::product_extend(&local_gibbs, &exterior)?;
    let product_residual = linalg::trace_norm(&(&perturbed.matrix - &product.matrix));
    Ok(GibbsConditionReport {
        reduction_residual,
        product_residual,
        truncated: surface.truncated,
    })
}

/// Perturb the window Gibbs state by `βW_LR` and compare with the product
/// of the half-window Gibbs states; returns the trace-norm residual.
pub fn araki_gibbs_halves_check(
    phi: &Potential,
    beta: f64,
    window: &Window,
    cut: i64,
) -> Result<f64> {
    let (left, right) = split_at(window, cut)?;
    let gibbs_w = states::gibbs_state(phi, &window.full_region(), beta)?;
    let coupling = potential::half_chain_coupling(phi, cut, window)?;
    let perturbed = states::perturb_matrix(&gibbs_w, &coupling.op.matrix.mapv(|z| z * beta))?;
    let product = states::product_extend(
        &states::gibbs_state(phi, &left, beta)?,
        &states::gibbs_state(phi, &right, beta)?,
    )?;
    Ok(linalg::trace_norm(&(&perturbed.matrix - &product.matrix)))
}

/// Factorization of the cut-decoupled dynamics:
/// `‖e^{it(H_W - W_LR)} - e^{itH_L} ⊗ e^{itH_R}‖` over a time grid.
/// Returns per-time residuals and the evenness defect of the half
/// generators (fermionic case; zero for spin).
#[derive(Debug, Clone)]
pub struct DynamicsReport {
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
    pub generator_evenness_defect: f64,
}

pub fn decoupled_dynamics_check(
    phi: &Potential,
    window: &Window,
    cut: i64,
    t_grid: &[f64],
) -> Result<DynamicsReport> {
    let (left, right) = split_at(window, cut)?;
    let h_w = potential::inner_hamiltonian(phi, &window.full_region())?;
    let coupling = potential::half_chain_coupling(phi, cut, window)?;
    let decoupled = &h_w.matrix - &coupling.op.matrix;
    let h_l = phi.inner_poly(&left).materialize(left.sites())?;
    let h_r = phi.inner_poly(&right).materialize(right.sites())?;
    let mut evenness = 0.0f64;
    if phi.statistics() == Statistics::Fermion {
        for (h, region) in [(&h_l, &left), (&h_r, &right)] {
            let small_window = Window::new(
                region.sites()[0],
                *region.sites().last().unwrap(),
                Statistics::Fermion,
            )?;
            let op = LocalOperator {
                matrix: h.clone(),
                support: small_window.full_region(),
                parity: crate::monomial::Parity::Even,
                window: small_window,
            };
            let fixed = parity_map(&op);
            evenness = evenness.max(linalg::max_abs(&(&fixed.matrix - h)));
        }
    }
    let mut residuals = Vec::with_capacity(t_grid.len());
    let mut max_residual = 0.0f64;
    for &t in t_grid {
        let u_full = linalg::expm_hermitian(&decoupled, Complex64::new(0.0, t))?;
        let u_l = linalg::expm_hermitian(&h_l, Complex64::new(0.0, t))?;
        let u_r = linalg::expm_hermitian(&h_r, Complex64::new(0.0, t))?;
        let u_prod = linalg::kron(&u_l, &u_r);
        let residual = linalg::operator_norm(&(&u_full - &u_prod));
        max_residual = max_residual.max(residual);
        residuals.push((t, residual));
    }
    Ok(DynamicsReport {
        residuals,
        max_residual,
        generator_evenness_defect: evenness,
    })
}

/// Slack report for the perturbed-state relative entropy bounds
/// `S([ω^h]|ω) ≤ [ω^h](h) - ω(h) ≤ 2‖h‖` and `S(ω|[ω^h]) ≤ 2‖h‖`.
///
/// With the perturbation convention `[ω^h] ∝ e^{log D + h}`, the
/// Peierls-Bogoliubov inequality gives
/// `S([ω^h]|ω) = [ω^h](h) - log Tr e^{log D + h} ≤ [ω^h](h) - ω(h)`,
/// and the tilted expectation always dominates the unperturbed one.
#[derive(Debug, Clone)]
pub struct PerturbationBoundReport {
    pub forward_relative: f64,
    /// `[ω^h](h) - ω(h)`.
    pub energy_difference: f64,
    pub reverse_relative: f64,
    pub h_norm: f64,
    /// `([ω^h](h) - ω(h)) - S([ω^h]|ω)`.
    pub slack_entropy_vs_energy: f64,
    /// `2‖h‖ - ([ω^h](h) - ω(h))`.
    pub slack_energy_vs_norm: f64,
    /// `2‖h‖ - S(ω|[ω^h])`.
    pub slack_reverse: f64,
}

pub fn perturbation_bound_check(omega: &DensityState, h: &CMat) -> Result<PerturbationBoundReport> {
    let perturbed = states::perturb_matrix(omega, h)?;
    let forward = entropy::relative_entropy(&perturbed, omega)?;
    let reverse = entropy::relative_entropy(omega, &perturbed)?;
    if forward.is_infinite() || reverse.is_infinite() {
        return Err(Error::Invariant(
            "faithful perturbation produced infinite relative entropy".into(),
        ));
    }
    let energy_difference = (perturbed.expectation(h) - omega.expectation(h)).re;
    let h_norm = linalg::operator_norm(h);
    Ok(PerturbationBoundReport {
        forward_relative: forward.nats,
        energy_difference,
        reverse_relative: reverse.nats,
        h_norm,
        slack_entropy_vs_energy: energy_difference - forward.nats,
        slack_energy_vs_norm: 2.0 * h_norm - energy_difference,
        slack_reverse: 2.0 * h_norm - reverse.nats,
    })
}

/// Covariance bound from the area law:
/// `|φ(O_A O_B) - φ(O_A)φ(O_B)| ≤ 2 (β‖H_∂A‖)^{1/2}` for unit-norm
/// observables, plus the Pinsker-level distance bound.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub covariance: f64,
    pub bound: f64,
    pub slack: f64,
    /// `4β‖H_∂A‖ - ‖φ_A ⊗ φ_{A^c} - φ‖₁²`.
    pub pinsker_slack: f64,
    pub truncated: bool,
}

pub fn correlation_estimate_check(
    phi: &Potential,
    beta: f64,
    window: &Window,
    a: &Region,
    o_a: &LocalOperator,
    o_b: &LocalOperator,
) -> Result<CorrelationReport> {
    let b = a.complement();
    if !o_a.support.sites().iter().all(|s| a.contains(*s)) {
        return Err(Error::Precondition("O_A must be supported in A".into()));
    }
    if !o_b.support.sites().iter().all(|s| b.contains(*s)) {
        return Err(Error::Precondition(
            "O_B must be supported in the complement of A".into(),
        ));
    }
    let (na, nb) = (o_a.norm(), o_b.norm());
    if na > 1.0 + 1e-12 || nb > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "observables must have norm ≤ 1 (got {na:.3}, {nb:.3})"
        )));
    }
    let gibbs = states::gibbs_state(phi, &window.full_region(), beta)?;
    let joint = gibbs.expectation(&linalg::matmul(&o_a.matrix, &o_b.matrix));
    let cov = (joint - gibbs.expectation(&o_a.matrix) * gibbs.expectation(&o_b.matrix)).norm();
    let surface = potential::surface_energy(phi, a, window)?;
    let bound = 2.0 * (beta * surface.norm).sqrt();
    let rho_a = states::reduce(&gibbs, a)?;
    let rho_b = states::reduce(&gibbs, &b)?;
    let product = states::product_extend(&rho_a, &rho_b)?;
    let distance = linalg::trace_norm(&(&product.matrix - &gibbs.matrix));
    Ok(CorrelationReport {
        covariance: cov,
        bound,
        slack: bound - cov,
        pinsker_slack: 4.0 * beta * surface.norm - distance * distance,
        truncated: surface.truncated,
    })
}

/// Ground-state check of the pure-state identity `I(A:A^c) = 2 S_A`,
/// with the entanglement-entropy ladder over growing prefixes.
#[derive(Debug, Clone)]
pub struct GroundStateMutualReport {
    pub mutual: f64,
    pub block_entropy: f64,
    /// `|I(A:A^c) - 2 S_A|`.
    pub identity_residual: f64,
    /// `(prefix size, S_prefix)` over the window.
    pub entropy_ladder: Vec<(usize, f64)>,
    pub degeneracy: usize,
    /// Set when the ground space is degenerate; the identity check is
    /// skipped (the identity assumes a pure state).
    pub skipped_degenerate: bool,
}

pub fn ground_state_mutual_check(
    phi: &Potential,
    window: &Window,
    a: &Region,
) -> Result<GroundStateMutualReport> {
    let gs = states::ground_state(phi, &window.full_region())?;
    let mut ladder = Vec::new();
    for k in 1..window.num_sites() {
        let prefix = window.range_region(window.lo(), window.lo() + k as i64 - 1)?;
        ladder.push((k, entropy::von_neumann(&gs.state, &prefix)?.nats));
    }
    if gs.degeneracy > 1 {
        return Ok(GroundStateMutualReport {
            mutual: f64::NAN,
            block_entropy: f64::NAN,
            identity_residual: f64::NAN,
            entropy_ladder: ladder,
            degeneracy: gs.degeneracy,
            skipped_degenerate: true,
        });
    }
    let b = a.complement();
    let mutual = entropy::mutual_entropy(&gs.state, a, &b)?;
    let s_a = entropy::von_neumann(&gs.state, a)?.nats;
    Ok(GroundStateMutualReport {
        mutual,
        block_entropy: s_a,
        identity_residual: (mutual - 2.0 * s_a).abs(),
        entropy_ladder: ladder,
        degeneracy: gs.degeneracy,
        skipped_degenerate: false,
    })
}

/// The half-chain mutual-entropy series over symmetric windows, with the
/// `2β‖W_LR‖` bound and the Donald-route relative entropy per window.
#[derive(Debug, Clone)]
pub struct HalvesSeriesReport {
    /// `(window size, I(left : right))` per ladder rung.
    pub series: ConvergenceSeries,
    /// `S(φ_W | ρ_L^{β,Φ_L} ⊗ ρ_R^{β,Φ_R})` per rung.
    pub donald_route: Vec<f64>,
    /// `2β‖W_LR‖`.
    pub bound: f64,
    pub wlr_norm: f64,
    /// `max(series, donald) - bound`, positive means a violation.
    pub max_excess: f64,
}

/// For windows `W_k = [-k, k-1]` with the cut at 0: the mutual entropy
/// between the halves of the window Gibbs state, each term bounded by
/// `2β‖W_LR‖`, and the Donald-route bound
/// `S(φ | ρ_L ⊗ ρ_R) ≤ 2β‖W_LR‖` checked per window.
pub fn halves_mutual_series(
    phi: &Potential,
    beta: f64,
    k_ladder: &[i64],
    tolerance: f64,
) -> Result<HalvesSeriesReport> {
    if k_ladder.is_empty() {
        return Err(Error::Precondition("empty window ladder".into()));
    }
    let mut points = Vec::with_capacity(k_ladder.len());
    let mut donald_route = Vec::with_capacity(k_ladder.len());
    let mut wlr_norm = 0.0f64;
    for &k in k_ladder {
        if k < 1 {
            return Err(Error::Precondition("ladder indices must be ≥ 1".into()));
        }
        let window = Window::new(-k, k - 1, phi.statistics())?;
        let (left, right) = split_at(&window, 0)?;
        let coupling = potential::half_chain_coupling(phi, 0, &window)?;
        wlr_norm = coupling.norm;

        let spec = states::gibbs_spectral(phi, &window.full_region(), beta)?;
        let s_w = spec.entropy();
        let left_pos: Vec<usize> = (0..k as usize).collect();
        let right_pos: Vec<usize> = (k as usize..2 * k as usize).collect();
        let d_l = spec.reduce_to_positions(&left_pos);
        let d_r = spec.reduce_to_positions(&right_pos);
        let s_l = entropy::matrix_entropy(&d_l)?;
        let s_r = entropy::matrix_entropy(&d_r)?;
        points.push((window.num_sites(), s_l + s_r - s_w));

        // Donald route: S(φ | g_L ⊗ g_R) = -S(φ) - Tr(φ_L log g_L) - Tr(φ_R log g_R)
        let g_l = states::gibbs_spectral(phi, &left, beta)?;
        let g_r = states::gibbs_spectral(phi, &right, beta)?;
        let mut rel = -s_w;
        for (d, g) in [(&d_l, &g_l), (&d_r, &g_r)] {
            let logs: Vec<Complex64> = g
                .probs
                .iter()
                .map(|&p| Complex64::new(p.max(1e-300).ln(), 0.0))
                .collect();
            let log_g = linalg::recompose(&g.basis, &logs);
            rel -= linalg::trace_of_product(d, &log_g).re;
        }
        donald_route.push(rel);
    }
    let bound = 2.0 * beta * wlr_norm;
    let series = ConvergenceSeries {
        converged: points
            .windows(2)
            .last()
            .map(|w| (w[1].1 - w[0].1).abs() < tolerance)
            .unwrap_or(false),
        points,
        tolerance,
        direction: MonotoneDirection::NonDecreasing,
    };
    let max_excess = series
        .points
        .iter()
        .map(|&(_, v)| v)
        .chain(donald_route.iter().copied())
        .map(|v| v - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HalvesSeriesReport {
        series,
        donald_route,
        bound,
        wlr_norm,
        max_excess,
    })
}

/// Direct free-energy minimality check: `F(φ) ≤ F(φ_A ⊗ φ_{A^c})` for the
/// window Gibbs state; returns the slack (non-negative when satisfied).
pub fn free_energy_product_slack(
    phi: &Potential,
    beta: f64,
    window: &Window,
    a: &Region,
) -> Result<f64> {
    let h = potential::inner_hamiltonian(phi, &window.full_region())?;
    let gibbs = states::gibbs_state(phi, &window.full_region(), beta)?;
    let f = |st: &DensityState| -> Result<f64> {
        Ok(st.expectation(&h.matrix).re - entropy::von_neumann_full(st)? / beta)
    };
    let product = states::product_extend(
        &states::reduce(&gibbs, a)?,
        &states::reduce(&gibbs, &a.complement())?,
    )?;
    Ok(f(&product)? - f(&gibbs)?)
}

/// Report of one Donald-formula evaluation (re-exported shape used by the
/// result tables).
pub use crate::entropy::DonaldReport;
