//! Experiment orchestration: expand the configuration into grid points,
//! execute them in parallel, and collect deterministic result records.
//!
//! Each grid point derives its own random generator from `(seed, index)`,
//! so results are identical across thread counts; records are sorted by
//! `(suite, model, β, window, region)` at the end.

use std::collections::BTreeMap;

use lattherm::entropy;
use lattherm::gaussian;
use lattherm::monomial::Statistics;
use lattherm::potential::Potential;
use lattherm::states::random_density;
use lattherm::verify;
use lattherm::Window;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RegionSpec, Suite};
use crate::report::{format_beta, ResultRecord};

#[derive(Debug, Clone)]
struct GridPoint {
    suite: Suite,
    beta: f64,
    window: usize,
    region: Option<RegionSpec>,
}

fn statistics_name(s: Statistics) -> &'static str {
    match s {
        Statistics::Spin => "spin",
        Statistics::Fermion => "fermion",
    }
}

fn grid(config: &ExperimentConfig) -> Vec<GridPoint> {
    let mut points = Vec::new();
    for &suite in &config.suites {
        match suite {
            Suite::AreaLaw | Suite::Lts | Suite::GibbsCondition => {
                for &beta in &config.beta_grid {
                    for &window in &config.window_ladder {
                        for region in &config.regions {
                            points.push(GridPoint {
                                suite,
                                beta,
                                window,
                                region: Some(region.clone()),
                            });
                        }
                    }
                }
            }
            Suite::GroundState => {
                for &window in &config.window_ladder {
                    for region in &config.regions {
                        points.push(GridPoint {
                            suite,
                            beta: f64::INFINITY,
                            window,
                            region: Some(region.clone()),
                        });
                    }
                }
            }
            Suite::HalvesSeries => {
                for &beta in &config.beta_grid {
                    points.push(GridPoint {
                        suite,
                        beta,
                        window: *config.window_ladder.iter().max().unwrap_or(&0),
                        region: None,
                    });
                }
            }
            Suite::Donald | Suite::Pinsker | Suite::Ssa | Suite::Dynamics => {
                for &window in &config.window_ladder {
                    points.push(GridPoint {
                        suite,
                        beta: f64::NAN,
                        window,
                        region: None,
                    });
                }
            }
            Suite::GaussianScan => {
                for &beta in &config.beta_grid {
                    points.push(GridPoint {
                        suite,
                        beta,
                        window: *config.gaussian_sizes.iter().max().unwrap_or(&0),
                        region: None,
                    });
                }
            }
        }
    }
    points
}

fn blank_record(config: &ExperimentConfig, point: &GridPoint) -> ResultRecord {
    ResultRecord {
        suite: point.suite.name().to_string(),
        model: config.model.name().to_string(),
        statistics: statistics_name(config.model.statistics()).to_string(),
        beta: if point.beta.is_nan() {
            "-".to_string()
        } else {
            format_beta(point.beta)
        },
        window: point.window,
        region: point
            .region
            .as_ref()
            .map(|r| r.label())
            .unwrap_or_else(|| "-".to_string()),
        quantities: BTreeMap::new(),
        slacks: BTreeMap::new(),
        tolerance: config.tolerance_for(point.suite),
        truncated: false,
        converged: true,
        skipped: false,
        note: String::new(),
        pass: false,
    }
}

/// Execute the configured sweep. Individual point failures become skipped
/// failing records; they never abort the sweep.
pub fn run(config: &ExperimentConfig) -> Vec<ResultRecord> {
    let phi = match config.model.potential() {
        Ok(p) => p,
        Err(e) => panic!("catalog model failed to build: {e}"),
    };
    let points = grid(config);
    let mut records: Vec<ResultRecord> = points
        .par_iter()
        .enumerate()
        .map(|(index, point)| {
            let seed = config
                .seed
                .wrapping_mul(0x9E3779B97F4A7C15)
                .wrapping_add(index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let record = blank_record(config, point);
            match execute(config, &phi, point, record.clone(), &mut rng) {
                Ok(r) => r.finalize(),
                Err(e) => {
                    let mut r = record;
                    r.skipped = true;
                    r.note = format!("error: {e}");
                    r.pass = false;
                    r
                }
            }
        })
        .collect();
    records.sort_by(|a, b| {
        a.sort_key()
            .partial_cmp(&b.sort_key())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    records
}

fn execute(
    config: &ExperimentConfig,
    phi: &Potential,
    point: &GridPoint,
    mut record: ResultRecord,
    rng: &mut ChaCha8Rng,
) -> lattherm::Result<ResultRecord> {
    let stat = config.model.statistics();
    match point.suite {
        Suite::AreaLaw => {
            let w = Window::new(0, point.window as i64 - 1, stat)?;
            let sites = resolve_region(point, point.window)?;
            let a = w.region(sites)?;
            let rep = verify::area_law_chain(phi, point.beta, &w, &a)?;
            record.quantities.insert("mutual".into(), rep.mutual);
            record
                .quantities
                .insert("energy_gap_term".into(), rep.energy_gap_term);
            record
                .quantities
                .insert("norm_bound".into(), rep.norm_bound);
            record
                .quantities
                .insert("geometric_bound".into(), rep.geometric_bound);
            record.slacks.insert("slack1".into(), rep.slack1);
            record.slacks.insert("slack2".into(), rep.slack2);
            if let Some(m) = rep.monotone_slack {
                record.slacks.insert("monotone".into(), m);
            }
            record.truncated = rep.truncation_flag;
        }
        Suite::Lts => {
            let w = Window::new(0, point.window as i64 - 1, stat)?;
            let a = w.region(resolve_region(point, point.window)?)?;
            let rep = verify::lts_check(phi, &a, point.beta, config.trials, rng)?;
            record.quantities.insert("f_phi".into(), rep.f_phi);
            record
                .quantities
                .insert("trials".into(), rep.trial_results.len() as f64);
            record.slacks.insert("min_margin".into(), rep.min_margin);
        }
        Suite::GibbsCondition => {
            let w = Window::new(0, point.window as i64 - 1, stat)?;
            let a = w.region(resolve_region(point, point.window)?)?;
            let rep = verify::gibbs_condition_check(phi, point.beta, &w, &a)?;
            record
                .quantities
                .insert("reduction_residual".into(), rep.reduction_residual);
            record
                .quantities
                .insert("product_residual".into(), rep.product_residual);
            record
                .slacks
                .insert("neg_reduction_residual".into(), -rep.reduction_residual);
            record
                .slacks
                .insert("neg_product_residual".into(), -rep.product_residual);
            record.truncated = rep.truncated;
        }
        Suite::HalvesSeries => {
            let ks: Vec<i64> = config
                .window_ladder
                .iter()
                .map(|&w| (w / 2) as i64)
                .collect();
            let rep = verify::halves_mutual_series(phi, point.beta, &ks, 1e-4)?;
            for (i, &(size, v)) in rep.series.points.iter().enumerate() {
                record.quantities.insert(format!("mutual_w{size:02}"), v);
                record
                    .quantities
                    .insert(format!("donald_w{size:02}"), rep.donald_route[i]);
            }
            record.quantities.insert("bound".into(), rep.bound);
            record.quantities.insert("wlr_norm".into(), rep.wlr_norm);
            record.slacks.insert("bound_margin".into(), -rep.max_excess);
            record
                .slacks
                .insert("monotone".into(), -rep.series.monotonicity_defect());
            record.converged = rep.series.converged;
        }
        Suite::Donald => {
            let n = point.window;
            if n < 2 || !n.is_multiple_of(2) {
                return Err(lattherm::Error::Precondition(format!(
                    "donald suite needs an even window of ≥ 2 sites, got {n}"
                )));
            }
            let even = stat == Statistics::Fermion;
            let left: Vec<i64> = (0..(n / 2) as i64).collect();
            let right: Vec<i64> = ((n / 2) as i64..n as i64).collect();
            let mut max_residual = 0.0f64;
            let mut sum = 0.0f64;
            for _ in 0..config.trials {
                let varpi = random_density(rng, (0..n as i64).collect(), stat, even)?;
                let rho_l = random_density(rng, left.clone(), stat, even)?;
                let rho_r = random_density(rng, right.clone(), stat, even)?;
                let rep = entropy::donald_decompose(&varpi, &rho_l, &rho_r)?;
                max_residual = max_residual.max(rep.residual);
                sum += rep.residual;
            }
            record
                .quantities
                .insert("max_residual".into(), max_residual);
            record
                .quantities
                .insert("mean_residual".into(), sum / config.trials as f64);
            record
                .slacks
                .insert("neg_max_residual".into(), -max_residual);
        }
        Suite::Pinsker => {
            let sites: Vec<i64> = (0..point.window as i64).collect();
            let mut min_gap = f64::INFINITY;
            for _ in 0..config.trials {
                let a = random_density(rng, sites.clone(), stat, stat == Statistics::Fermion)?;
                let b = random_density(rng, sites.clone(), stat, stat == Statistics::Fermion)?;
                let gap = entropy::pinsker_gap(&a, &b)?;
                min_gap = min_gap.min(gap);
            }
            record.quantities.insert("min_gap".into(), min_gap);
            record.slacks.insert("min_gap".into(), min_gap);
        }
        Suite::Ssa => {
            let n = point.window;
            if n < 3 {
                return Err(lattherm::Error::Precondition(
                    "ssa suite needs ≥ 3 sites".into(),
                ));
            }
            let w = Window::new(0, n as i64 - 1, stat)?;
            let x = w.range_region(0, (2 * n / 3) as i64 - 1)?;
            let y = w.range_region((n / 3) as i64, n as i64 - 1)?;
            let mut min_gap = f64::INFINITY;
            for _ in 0..config.trials {
                let rho = random_density(rng, w.sites(), stat, stat == Statistics::Fermion)?;
                min_gap = min_gap.min(entropy::ssa_gap(&rho, &x, &y)?);
            }
            record.quantities.insert("min_gap".into(), min_gap);
            record.slacks.insert("min_gap".into(), min_gap);
        }
        Suite::GroundState => {
            let w = Window::new(0, point.window as i64 - 1, stat)?;
            let a = w.region(resolve_region(point, point.window)?)?;
            let rep = verify::ground_state_mutual_check(phi, &w, &a)?;
            record
                .quantities
                .insert("degeneracy".into(), rep.degeneracy as f64);
            if rep.skipped_degenerate {
                record.skipped = true;
                record.note = "degenerate ground space; pure-state identity skipped".into();
            } else {
                record.quantities.insert("mutual".into(), rep.mutual);
                record
                    .quantities
                    .insert("block_entropy".into(), rep.block_entropy);
                record
                    .quantities
                    .insert("identity_residual".into(), rep.identity_residual);
                record
                    .slacks
                    .insert("neg_identity_residual".into(), -rep.identity_residual);
            }
        }
        Suite::GaussianScan => {
            let rep = gaussian::thermal_destruction_scan(
                &config.model,
                &[point.beta],
                &config.gaussian_sizes,
                None,
            )?;
            let values: Vec<f64> = rep.points.iter().map(|p| p.mutual).collect();
            for p in &rep.points {
                record
                    .quantities
                    .insert(format!("mutual_l{:03}", p.sites), p.mutual);
                if p.zero_mode_flagged {
                    record.note =
                        "zero modes at beta=inf; chemical potential shifted by 1e-9".into();
                }
            }
            record.quantities.insert("wlr_norm".into(), rep.wlr_norm);
            if point.beta.is_infinite() {
                let min_growth = values
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                record.quantities.insert("min_growth".into(), min_growth);
                record.converged = false;
                record.note = format!(
                    "{}unbounded growth along the ladder is a surrogate for the infinite mutual entropy, not a verified infinity",
                    if record.note.is_empty() { String::new() } else { format!("{}; ", record.note) }
                );
            } else {
                let bound = 2.0 * point.beta * rep.wlr_norm;
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                record.quantities.insert("bound".into(), bound);
                record.slacks.insert("bound_margin".into(), bound - max);
                record.converged = values.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-3);
            }
        }
        Suite::Dynamics => {
            let n = point.window as i64;
            let w = Window::new(0, n - 1, stat)?;
            let rep = verify::decoupled_dynamics_check(phi, &w, n / 2, &[0.1, 0.5, 1.0])?;
            record
                .quantities
                .insert("max_residual".into(), rep.max_residual);
            record
                .quantities
                .insert("evenness_defect".into(), rep.generator_evenness_defect);
            record
                .slacks
                .insert("neg_max_residual".into(), -rep.max_residual);
        }
    }
    Ok(record)
}

fn resolve_region(point: &GridPoint, window: usize) -> lattherm::Result<Vec<i64>> {
    point
        .region
        .as_ref()
        .expect("region-based suite")
        .resolve(window)
        .map_err(lattherm::Error::Precondition)
}

/// Render purpose-built terse lines for `verify`.
pub fn terse_lines(records: &[ResultRecord]) -> Vec<String> {
    records
        .iter()
        .map(|r| {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            let worst = r
                .slacks
                .iter()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(k, v)| format!(" worst {k}={v:.3e}"))
                .unwrap_or_default();
            let note = if r.note.is_empty() {
                String::new()
            } else {
                format!(" [{}]", r.note)
            };
            format!(
                "[{verdict}] {} {} beta={} window={} region={}{}{}",
                r.suite, r.model, r.beta, r.window, r.region, worst, note
            )
        })
        .collect()
}
