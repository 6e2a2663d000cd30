//! Experiment configuration: a single TOML document selecting the model,
//! temperature grid, window ladder, regions and verification suites.
//!
//! The schema is the compatibility surface of the tool and is documented in
//! the repository README.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use lattherm::{ModelSpec, Statistics, MAX_WINDOW_SITES};
use serde::Deserialize;

/// The verification suites the runner knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    AreaLaw,
    Lts,
    GibbsCondition,
    HalvesSeries,
    Donald,
    Pinsker,
    Ssa,
    GroundState,
    GaussianScan,
    Dynamics,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "area_law" => Suite::AreaLaw,
            "lts" => Suite::Lts,
            "gibbs_condition" => Suite::GibbsCondition,
            "halves_series" => Suite::HalvesSeries,
            "donald" => Suite::Donald,
            "pinsker" => Suite::Pinsker,
            "ssa" => Suite::Ssa,
            "ground_state" => Suite::GroundState,
            "gaussian_scan" => Suite::GaussianScan,
            "dynamics" => Suite::Dynamics,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::AreaLaw => "area_law",
            Suite::Lts => "lts",
            Suite::GibbsCondition => "gibbs_condition",
            Suite::HalvesSeries => "halves_series",
            Suite::Donald => "donald",
            Suite::Pinsker => "pinsker",
            Suite::Ssa => "ssa",
            Suite::GroundState => "ground_state",
            Suite::GaussianScan => "gaussian_scan",
            Suite::Dynamics => "dynamics",
        }
    }

    /// Default pass tolerance on the slack entries of this suite.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Suite::Donald => 1e-8,
            Suite::Pinsker | Suite::Ssa => 1e-10,
            Suite::GaussianScan => 1e-6,
            _ => 1e-9,
        }
    }

    /// Whether the suite needs dense window matrices (and so respects the
    /// window-size cap).
    pub fn is_exact_diagonalization(&self) -> bool {
        !matches!(self, Suite::GaussianScan)
    }

    /// Whether β = ∞ makes sense for the suite.
    pub fn supports_ground_state(&self) -> bool {
        matches!(self, Suite::GroundState | Suite::GaussianScan)
    }

    pub fn uses_regions(&self) -> bool {
        matches!(
            self,
            Suite::AreaLaw | Suite::Lts | Suite::GibbsCondition | Suite::GroundState
        )
    }
}

/// A named region pattern, resolved against a concrete window.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Half,
    Central(usize),
    Prefix(usize),
    Custom(Vec<i64>),
}

impl RegionSpec {
    pub fn parse(text: &str) -> Result<RegionSpec, String> {
        if text == "half" {
            return Ok(RegionSpec::Half);
        }
        if let Some(k) = text.strip_prefix("central-") {
            return k
                .parse::<usize>()
                .map(RegionSpec::Central)
                .map_err(|_| format!("bad central region {text:?}"));
        }
        if let Some(k) = text.strip_prefix("prefix-") {
            return k
                .parse::<usize>()
                .map(RegionSpec::Prefix)
                .map_err(|_| format!("bad prefix region {text:?}"));
        }
        if let Some(list) = text.strip_prefix("sites:") {
            let sites = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| format!("bad site list {text:?}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(RegionSpec::Custom(sites));
        }
        Err(format!(
            "unknown region pattern {text:?} (expected half | central-k | prefix-k | sites:a,b,c)"
        ))
    }

    pub fn label(&self) -> String {
        match self {
            RegionSpec::Half => "half".into(),
            RegionSpec::Central(k) => format!("central-{k}"),
            RegionSpec::Prefix(k) => format!("prefix-{k}"),
            RegionSpec::Custom(sites) => {
                let parts: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
                format!("sites:{}", parts.join(","))
            }
        }
    }

    /// Concrete site list inside a window `[0, n-1]`.
    pub fn resolve(&self, window_sites: usize) -> Result<Vec<i64>, String> {
        let n = window_sites as i64;
        let sites = match self {
            RegionSpec::Half => (0..n / 2).collect(),
            RegionSpec::Central(k) => {
                let k = *k as i64;
                if k >= n {
                    return Err(format!("central-{k} does not fit a {n}-site window"));
                }
                let lo = (n - k) / 2;
                (lo..lo + k).collect()
            }
            RegionSpec::Prefix(k) => {
                let k = *k as i64;
                if k >= n {
                    return Err(format!("prefix-{k} does not cut a {n}-site window"));
                }
                (0..k).collect()
            }
            RegionSpec::Custom(sites) => {
                if sites.iter().any(|&s| s < 0 || s >= n) {
                    return Err(format!(
                        "custom region {sites:?} leaves the {n}-site window"
                    ));
                }
                sites.clone()
            }
        };
        if sites.is_empty() {
            return Err("empty region".into());
        }
        Ok(sites)
    }
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    model: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    beta_grid: Vec<f64>,
    #[serde(default)]
    window_ladder: Vec<usize>,
    #[serde(default)]
    regions: Vec<String>,
    suites: Vec<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    trials: Option<usize>,
    #[serde(default)]
    gaussian: Option<RawGaussian>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
struct RawGaussian {
    sizes: Vec<usize>,
}

/// A validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub beta_grid: Vec<f64>,
    pub window_ladder: Vec<usize>,
    pub regions: Vec<RegionSpec>,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub trials: usize,
    pub gaussian_sizes: Vec<usize>,
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn tolerance_for(&self, suite: Suite) -> f64 {
        self.tolerances
            .get(suite.name())
            .copied()
            .unwrap_or_else(|| suite.default_tolerance())
    }
}

/// Aggregated validation failure.
#[derive(Debug)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn build_model(
    name: &str,
    params: &BTreeMap<String, f64>,
    problems: &mut Vec<String>,
) -> Option<ModelSpec> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    let known = |allowed: &[&str], problems: &mut Vec<String>| {
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                problems.push(format!("unknown parameter {key:?} for model {name:?}"));
            }
        }
    };
    match name {
        "tfim" => {
            known(&["j", "g"], problems);
            Some(ModelSpec::Tfim {
                j: get("j", 1.0),
                g: get("g", 1.0),
            })
        }
        "xxz" => {
            known(&["jxy", "jz", "h"], problems);
            Some(ModelSpec::Xxz {
                jxy: get("jxy", 1.0),
                jz: get("jz", 0.5),
                h: get("h", 0.0),
            })
        }
        "kitaev" => {
            known(&["t", "delta", "mu"], problems);
            Some(ModelSpec::KitaevChain {
                t: get("t", 1.0),
                delta: get("delta", 1.0),
                mu: get("mu", 0.5),
            })
        }
        _ => {
            problems.push(format!(
                "unknown model {name:?} (catalog: tfim, xxz, kitaev)"
            ));
            None
        }
    }
}

/// Parse and validate a configuration file; all problems are aggregated.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        problems: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        problems: vec![format!("TOML parse error: {e}")],
    })?;
    let mut problems = Vec::new();

    let model = build_model(&raw.model, &raw.params, &mut problems);

    let mut suites = Vec::new();
    for name in &raw.suites {
        match Suite::parse(name) {
            Some(s) => suites.push(s),
            None => problems.push(format!("unknown suite {name:?}")),
        }
    }
    suites.sort();
    suites.dedup();

    let ground_capable = suites.iter().all(|s| s.supports_ground_state());
    for &beta in &raw.beta_grid {
        if beta.is_nan() || beta <= 0.0 {
            problems.push(format!("inverse temperature must be positive, got {beta}"));
        } else if beta.is_infinite() && !ground_capable && !suites.is_empty() {
            problems.push("beta = inf is only allowed when every selected suite handles ground states (ground_state, gaussian_scan)".into());
        }
    }

    let needs_ed = suites.iter().any(|s| s.is_exact_diagonalization());
    for &w in &raw.window_ladder {
        if w < 2 {
            problems.push(format!("window of {w} sites is too small"));
        }
        if needs_ed && w > MAX_WINDOW_SITES {
            problems.push(format!(
                "window of {w} sites exceeds the exact-diagonalization cap of {MAX_WINDOW_SITES} sites (2^{MAX_WINDOW_SITES} dimensions)"
            ));
        }
    }
    if raw.window_ladder.is_empty()
        && suites.iter().any(|s| s.is_exact_diagonalization())
        && !suites.is_empty()
    {
        problems.push("window_ladder must not be empty for exact-diagonalization suites".into());
    }
    if suites.contains(&Suite::HalvesSeries) {
        for &w in &raw.window_ladder {
            if w % 2 != 0 {
                problems.push(format!("halves_series needs even window sizes, got {w}"));
            }
        }
    }

    let mut regions = Vec::new();
    for text in &raw.regions {
        match RegionSpec::parse(text) {
            Ok(r) => regions.push(r),
            Err(e) => problems.push(e),
        }
    }
    if regions.is_empty() && suites.iter().any(|s| s.uses_regions()) {
        problems.push("regions must not be empty for region-based suites".into());
    }
    for region in &regions {
        for &w in &raw.window_ladder {
            if let Err(e) = region.resolve(w) {
                problems.push(format!("window {w}: {e}"));
            }
        }
    }

    let gaussian_sizes = raw.gaussian.map(|g| g.sizes).unwrap_or_default();
    if suites.contains(&Suite::GaussianScan) {
        if gaussian_sizes.is_empty() {
            problems.push("gaussian_scan needs a [gaussian] table with a sizes list".into());
        }
        if let Some(m) = &model {
            if m.statistics() != Statistics::Fermion {
                problems.push("gaussian_scan needs a quadratic fermionic model (kitaev)".into());
            }
        }
    }

    for key in raw.tolerances.keys() {
        if Suite::parse(key).is_none() {
            problems.push(format!("tolerance override for unknown suite {key:?}"));
        }
    }

    match (model, problems.is_empty()) {
        (Some(model), true) => Ok(ExperimentConfig {
            model,
            beta_grid: raw.beta_grid,
            window_ladder: raw.window_ladder,
            regions,
            suites,
            seed: raw.seed.unwrap_or(0),
            trials: raw.trials.unwrap_or(100),
            gaussian_sizes,
            tolerances: raw.tolerances,
        }),
        _ => Err(ConfigError { problems }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
model = "tfim"
beta_grid = [1.0]
window_ladder = [8]
regions = ["half"]
suites = ["area_law"]
"#;

    #[test]
    fn minimal_config_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.model.name(), "tfim");
        assert_eq!(cfg.suites, vec![Suite::AreaLaw]);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn negative_beta_is_rejected() {
        let bad = MINIMAL.replace("[1.0]", "[-1.0]");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.problems.iter().any(|p| p.contains("positive")));
    }

    #[test]
    fn oversized_window_is_rejected_for_ed_suites() {
        let bad = MINIMAL.replace("[8]", "[20]");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.problems.iter().any(|p| p.contains("cap")));
    }

    #[test]
    fn unknown_model_is_rejected() {
        let bad = MINIMAL.replace("\"tfim\"", "\"heisenberg3d\"");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.problems.iter().any(|p| p.contains("unknown model")));
    }

    #[test]
    fn region_patterns_parse_and_resolve() {
        assert_eq!(
            RegionSpec::parse("half").unwrap().resolve(8).unwrap(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(
            RegionSpec::parse("central-2").unwrap().resolve(8).unwrap(),
            vec![3, 4]
        );
        assert_eq!(
            RegionSpec::parse("prefix-3").unwrap().resolve(8).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(
            RegionSpec::parse("sites:0,2,5")
                .unwrap()
                .resolve(8)
                .unwrap(),
            vec![0, 2, 5]
        );
        assert!(RegionSpec::parse("ring-3").is_err());
        assert!(RegionSpec::parse("central-9").unwrap().resolve(8).is_err());
    }

    #[test]
    fn infinite_beta_requires_ground_capable_suites() {
        let bad = MINIMAL.replace("[1.0]", "[inf]");
        assert!(parse_config(&bad).is_err());
        let ok = r#"
model = "kitaev"
beta_grid = [inf, 2.0]
window_ladder = []
suites = ["gaussian_scan"]
[gaussian]
sizes = [32, 64]
"#;
        let cfg = parse_config(ok).unwrap();
        assert!(cfg.beta_grid[0].is_infinite());
    }
}
