//! Experiment configuration: a TOML file with one section per pipeline
//! stage. Loading fills in every default, so the effective configuration is
//! fully explicit and can be echoed and hashed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pacmc_core::lp::{load_model, PilotSizes};
use pacmc_core::montecarlo::{DEFAULT_COUNT, DEFAULT_DELTA_T, PLOT_POINTS};
use pacmc_core::oracle::{
    make_benchmark, BenchmarkOracle, BenchmarkParams, TrajectoryOracle, DATASET_STEP,
    GROUND_TRUTH_STEP,
};
use pacmc_core::pac::{Budget, PacBudget, TwoLevelBudget};
use pacmc_core::sampling::{
    read_dataset, sample_inputs_with, stream_rng, Dataset, InputSet, Stream,
};
use pacmc_core::template::{freeze, ModelTemplate, TemplateSpec};
use pacmc_core::verify::{InputScope, UnsafeSet};
use pacmc_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_BOUND: f64 = 100.0;
const DEFAULT_PLOT_TRAJECTORIES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub sampling: SamplingSection,
    pub template: TemplateSection,
    pub budget: BudgetSection,
    #[serde(default)]
    pub lp: LpSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub validation: ValidationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staged: Option<StagedSection>,
}

/// Either a named benchmark or an external dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<String>,
    /// Size parameter of the scalable benchmark.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Integration step used to produce training data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// Exactly one of `x0`, `x0_list` and `set` names the inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_list: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Time samples per input `M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_times: Option<usize>,
    /// Inputs `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_inputs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSection {
    pub spec: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub epsilon: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uxi: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsafe_set: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Integration step of the ground-truth trajectories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_trajectories: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagedSection {
    pub pilot_times: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_inputs: Option<usize>,
}

/// Where training inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Point(Vec<f64>),
    List(Vec<Vec<f64>>),
    Set(InputSet),
}

pub enum SystemSource {
    Benchmark(BenchmarkOracle),
    Dataset(Dataset),
}

/// A validated configuration with every derived object built.
pub struct Plan {
    /// Effective configuration with all defaults filled in.
    pub config: ExperimentConfig,
    pub hash: String,
    pub system: SystemSource,
    pub inputs: InputSource,
    pub horizon: f64,
    pub template: ModelTemplate,
    pub budget: Budget,
    pub unsafe_set: UnsafeSet,
    pub staged: Option<PilotSizes>,
    pub n_times: usize,
    pub n_inputs: usize,
    pub seed: u64,
    pub uc: f64,
    pub uxi: f64,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Any error raised while building the plan is a configuration error.
fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(format!("cannot parse configuration: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| config_err(format!("cannot serialize configuration: {e}")))
    }
}

impl Plan {
    /// Reads and resolves a configuration file; relative paths inside it are
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::resolve(ExperimentConfig::from_toml(&text)?, base)
    }

    pub fn resolve(config: ExperimentConfig, base_dir: &Path) -> Result<Self> {
        resolve(config, base_dir).map_err(as_config)
    }

    /// The effective configuration as TOML, headed by its hash.
    pub fn effective_toml(&self) -> Result<String> {
        Ok(format!(
            "# config_hash = {}\n{}",
            self.hash,
            self.config.to_toml()?
        ))
    }

    pub fn oracle(&self) -> Option<&BenchmarkOracle> {
        match &self.system {
            SystemSource::Benchmark(o) => Some(o),
            SystemSource::Dataset(_) => None,
        }
    }

    /// Time-level accuracy the verdict and validation refer to.
    pub fn epsilon(&self) -> f64 {
        self.config.budget.epsilon
    }

    /// Inputs drawn for training from an input set.
    pub fn drawn_inputs(
        &self,
        set: &InputSet,
        count: usize,
        stream: Stream,
    ) -> Result<Vec<Vec<f64>>> {
        sample_inputs_with(set, count, &mut stream_rng(self.seed, stream))
    }

    /// Inputs the verdict speaks about.
    pub fn scope(&self) -> Result<InputScope> {
        Ok(match (&self.inputs, &self.budget) {
            (InputSource::Point(x), _) => InputScope::Single(x.clone()),
            (InputSource::List(xs), _) => InputScope::Listed(xs.clone()),
            (InputSource::Set(set), Budget::TwoLevel(_)) => InputScope::Set(set.clone()),
            (InputSource::Set(set), Budget::Single(_)) => {
                InputScope::Listed(self.drawn_inputs(set, self.n_inputs, Stream::Inputs)?)
            }
        })
    }
}

fn resolve(mut cfg: ExperimentConfig, base_dir: &Path) -> Result<Plan> {
    let seed = *cfg.sampling.seed.get_or_insert(DEFAULT_SEED);

    // System and horizon.
    let system = match (&cfg.system.benchmark, &cfg.system.dataset) {
        (Some(name), None) => {
            let horizon = cfg
                .system
                .horizon
                .ok_or_else(|| config_err("[system] horizon is required for a benchmark"))?;
            let step = *cfg.system.step.get_or_insert(DATASET_STEP);
            let params = BenchmarkParams {
                horizon,
                step,
                l: cfg.system.l,
            };
            SystemSource::Benchmark(make_benchmark(name, &params)?)
        }
        (None, Some(path)) => {
            let ds = read_dataset(&base_dir.join(path))?;
            if cfg.system.step.is_some() || cfg.system.l.is_some() {
                return Err(config_err("[system] step and l only apply to benchmarks"));
            }
            match cfg.system.horizon {
                Some(h) if h != ds.horizon => {
                    return Err(config_err(format!(
                        "[system] horizon {h} differs from the dataset horizon {}",
                        ds.horizon
                    )))
                }
                _ => cfg.system.horizon = Some(ds.horizon),
            }
            SystemSource::Dataset(ds)
        }
        _ => {
            return Err(config_err(
                "[system] needs exactly one of `benchmark` and `dataset`",
            ))
        }
    };
    let horizon = cfg.system.horizon.expect("set above");

    // Budget kind.
    let two_level = match (cfg.budget.epsilon2, cfg.budget.beta2) {
        (Some(e2), Some(b2)) => Some((e2, b2)),
        (None, None) => None,
        _ => {
            return Err(config_err(
                "[budget] epsilon2 and beta2 must be given together",
            ))
        }
    };

    // Inputs.
    let s = &cfg.sampling;
    let inputs = match &system {
        SystemSource::Benchmark(oracle) => {
            let source = match (&s.x0, &s.x0_list, &s.set) {
                (Some(x), None, None) => InputSource::Point(x.clone()),
                (None, Some(xs), None) if !xs.is_empty() => InputSource::List(xs.clone()),
                (None, None, Some(set)) => InputSource::Set(set.parse()?),
                _ => {
                    return Err(config_err(
                        "[sampling] needs exactly one of `x0`, a nonempty `x0_list` and `set`",
                    ))
                }
            };
            let dim = oracle.input_dimension();
            let dims_ok = match &source {
                InputSource::Point(x) => x.len() == dim,
                InputSource::List(xs) => xs.iter().all(|x| x.len() == dim),
                InputSource::Set(set) => set.dimension() == dim,
            };
            if !dims_ok {
                return Err(config_err(format!(
                    "inputs must have dimension {dim} for this system"
                )));
            }
            source
        }
        SystemSource::Dataset(ds) => {
            if s.x0.is_some() || s.x0_list.is_some() {
                return Err(config_err(
                    "inputs of an external dataset come from the dataset itself",
                ));
            }
            match (&s.set, two_level) {
                (Some(set), Some(_)) => InputSource::Set(set.parse()?),
                (None, Some(_)) => {
                    return Err(config_err(
                        "a two-level budget over a dataset needs [sampling] set",
                    ))
                }
                _ if ds.n_inputs() == 1 => InputSource::Point(ds.inputs[0].clone()),
                _ => InputSource::List(ds.inputs.clone()),
            }
        }
    };
    if two_level.is_some() && !matches!(inputs, InputSource::Set(_)) {
        return Err(config_err(
            "a two-level budget needs inputs drawn from [sampling] set",
        ));
    }

    // Template.
    let spec: TemplateSpec = cfg.template.spec.parse()?;
    let input_dim = match &inputs {
        InputSource::Point(x) => x.len(),
        InputSource::List(xs) => xs[0].len(),
        InputSource::Set(set) => set.dimension(),
    };
    let template = match &spec {
        TemplateSpec::Frozen(path) => {
            let m = load_model(&base_dir.join(path))?;
            if m.template.input_dimension() != input_dim || m.template.time_scale() != horizon {
                return Err(config_err(format!(
                    "model `{}` does not match this system's input dimension and horizon",
                    path.display()
                )));
            }
            freeze(&m.template, &m.coefficients)?
        }
        other => other.build_polynomial(input_dim, horizon)?,
    };
    cfg.template.spec = spec.to_string();

    // Staged learning.
    let staged = match &mut cfg.staged {
        None => None,
        Some(st) => {
            if matches!(system, SystemSource::Dataset(_)) {
                return Err(config_err(
                    "staged learning needs a benchmark to draw a pilot sample",
                ));
            }
            if template.is_frozen() {
                return Err(config_err(
                    "staged learning needs a template with free coefficients",
                ));
            }
            let default_inputs = match &inputs {
                InputSource::Point(_) => 1,
                InputSource::List(xs) => xs.len(),
                InputSource::Set(_) => st.pilot_times,
            };
            let pilot = PilotSizes {
                times: st.pilot_times,
                inputs: *st.pilot_inputs.get_or_insert(default_inputs),
            };
            if pilot.times == 0 || pilot.inputs == 0 {
                return Err(config_err("[staged] pilot sizes must be at least 1"));
            }
            Some(pilot)
        }
    };

    let dims = if staged.is_some() {
        1
    } else {
        template.decision_dims()
    };
    let budget = match two_level {
        Some((e2, b2)) => Budget::TwoLevel(TwoLevelBudget::new(
            cfg.budget.epsilon,
            cfg.budget.beta,
            e2,
            b2,
            dims,
        )?),
        None => Budget::Single(PacBudget::new(cfg.budget.epsilon, cfg.budget.beta, dims)?),
    };
    let (m_req, n_req) = budget.required_sizes()?;

    // Sample sizes default to the bound; explicit sizes may differ and are
    // checked when learning.
    let n_times = *cfg.sampling.n_times.get_or_insert(m_req as usize);
    let n_inputs = match (&inputs, &system) {
        (InputSource::Point(_), _) => 1,
        (InputSource::List(xs), _) => xs.len(),
        (InputSource::Set(_), SystemSource::Dataset(ds)) => ds.n_inputs(),
        (InputSource::Set(_), SystemSource::Benchmark(_)) => n_req.unwrap_or(1) as usize,
    };
    let n_inputs = *cfg.sampling.n_inputs.get_or_insert(n_inputs);
    if let SystemSource::Dataset(ds) = &system {
        if n_times != ds.n_times() || n_inputs != ds.n_inputs() {
            return Err(config_err(format!(
                "[sampling] sizes ({n_times} times, {n_inputs} inputs) differ from the dataset ({} x {})",
                ds.n_times(),
                ds.n_inputs()
            )));
        }
    }
    match &inputs {
        InputSource::Point(_) | InputSource::List(_) if n_inputs != input_count(&inputs) => {
            return Err(config_err(
                "[sampling] n_inputs must equal the number of listed inputs",
            ))
        }
        _ => {}
    }
    if n_times == 0 || n_inputs == 0 {
        return Err(config_err("[sampling] sizes must be at least 1"));
    }

    let uc = *cfg.lp.uc.get_or_insert(DEFAULT_BOUND);
    let uxi = *cfg.lp.uxi.get_or_insert(DEFAULT_BOUND);
    if !(uc > 0.0 && uc.is_finite() && uxi > 0.0 && uxi.is_finite()) {
        return Err(config_err("[lp] uc and uxi must be positive and finite"));
    }
    let unsafe_set: UnsafeSet = cfg
        .verify
        .unsafe_set
        .get_or_insert_with(|| "none".into())
        .parse()?;
    cfg.verify.unsafe_set = Some(unsafe_set.to_string());

    let v = &mut cfg.validation;
    let count = match &inputs {
        InputSource::Set(_) if two_level.is_some() => *v.count.get_or_insert(DEFAULT_COUNT),
        InputSource::Set(_) => *v.count.insert(n_inputs),
        other => *v.count.insert(input_count(other)),
    };
    let delta_t = *v.delta_t.get_or_insert(DEFAULT_DELTA_T);
    let threshold = *v.threshold.get_or_insert(cfg.budget.epsilon);
    let vstep = *v.step.get_or_insert(GROUND_TRUTH_STEP);
    v.seed.get_or_insert(seed);
    let points = *v.plot_points.get_or_insert(PLOT_POINTS);
    v.plot_trajectories
        .get_or_insert(DEFAULT_PLOT_TRAJECTORIES.min(count));
    if count == 0
        || points < 2
        || !(delta_t > 0.0)
        || !(vstep > 0.0)
        || !(0.0..=1.0).contains(&threshold)
    {
        return Err(config_err(
            "[validation] needs count >= 1, plot_points >= 2, positive delta_t and step, threshold in [0, 1]",
        ));
    }

    let hash = hash_config(&cfg)?;
    Ok(Plan {
        config: cfg,
        hash,
        system,
        inputs,
        horizon,
        template,
        budget,
        unsafe_set,
        staged,
        n_times,
        n_inputs,
        seed,
        uc,
        uxi,
    })
}

fn input_count(inputs: &InputSource) -> usize {
    match inputs {
        InputSource::Point(_) => 1,
        InputSource::List(xs) => xs.len(),
        InputSource::Set(_) => 0,
    }
}

/// SHA-256 of the canonical TOML rendering, as lowercase hex.
pub fn hash_config(cfg: &ExperimentConfig) -> Result<String> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[system]
benchmark = "van_der_pol"
horizon = 10.0

[sampling]
x0 = [1.4, 2.3]

[template]
spec = "poly_time(degree = 6)"

[budget]
epsilon = 0.01
beta = 1e-20

[verify]
unsafe_set = "y>=3"
"#;

    fn plan(text: &str) -> Result<Plan> {
        Plan::resolve(ExperimentConfig::from_toml(text)?, Path::new("."))
    }

    #[test]
    fn defaults_are_filled_in() {
        let p = plan(EXAMPLE).unwrap();
        assert_eq!(p.n_times, 10811);
        assert_eq!(p.n_inputs, 1);
        assert_eq!(p.config.lp.uc, Some(100.0));
        assert_eq!(p.config.template.spec, "poly_time(degree=6)");
        assert_eq!(p.config.verify.unsafe_set.as_deref(), Some("y >= 3"));
        assert_eq!(p.config.validation.threshold, Some(0.01));
        assert_eq!(p.config.validation.count, Some(1));
        assert_eq!(p.scope().unwrap(), InputScope::Single(vec![1.4, 2.3]));
    }

    #[test]
    fn effective_config_is_a_fixed_point() {
        let p = plan(EXAMPLE).unwrap();
        let again = plan(&p.effective_toml().unwrap()).unwrap();
        assert_eq!(again.config, p.config);
        assert_eq!(again.hash, p.hash);
        assert_eq!(p.hash.len(), 64);
    }

    #[test]
    fn hash_tracks_content() {
        let a = plan(EXAMPLE).unwrap();
        let b = plan(&EXAMPLE.replace("epsilon = 0.01", "epsilon = 0.02")).unwrap();
        assert_ne!(a.hash, b.hash);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        for (from, to) in [
            ("x0 = [1.4, 2.3]", "x0 = [1.4]"),
            (
                "x0 = [1.4, 2.3]",
                "x0 = [1.4, 2.3]\nset = \"box([0,0],[1,1])\"",
            ),
            ("beta = 1e-20", "beta = 1e-20\nepsilon2 = 0.1"),
            ("beta = 1e-20", "beta = 1e-20\nepsilon2 = 0.1\nbeta2 = 0.1"),
            ("unsafe_set = \"y>=3\"", "unsafe_set = \"y>3\""),
            ("horizon = 10.0", ""),
            ("benchmark = \"van_der_pol\"", "benchmark = \"duffing\""),
            ("epsilon = 0.01", "epsilon = 1.5"),
            ("[verify]", "[verify]\nextra = 1"),
        ] {
            let text = EXAMPLE.replace(from, to);
            assert!(
                matches!(plan(&text), Err(Error::Config(_))),
                "accepted: {to}"
            );
        }
    }

    #[test]
    fn two_level_budget_over_a_set() {
        let text = EXAMPLE
            .replace("x0 = [1.4, 2.3]", "set = \"box([1.25,2.28],[1.55,2.32])\"")
            .replace(
                "epsilon = 0.01\nbeta = 1e-20",
                "epsilon = 0.3\nbeta = 1e-10\nepsilon2 = 0.5\nbeta2 = 1e-10",
            );
        let p = plan(&text).unwrap();
        assert_eq!((p.n_times, p.n_inputs), (207, 125));
        assert!(matches!(p.scope().unwrap(), InputScope::Set(_)));
        assert_eq!(p.config.validation.count, Some(DEFAULT_COUNT));
    }

    #[test]
    fn staged_budget_counts_one_decision_variable() {
        let text = EXAMPLE
            .replace("x0 = [1.4, 2.3]", "set = \"box([1.25,2.28],[1.55,2.32])\"")
            .replace(
                "epsilon = 0.01\nbeta = 1e-20",
                "epsilon = 0.1\nbeta = 1e-10\nepsilon2 = 0.1\nbeta2 = 1e-10",
            )
            + "\n[staged]\npilot_times = 50\n";
        let p = plan(&text).unwrap();
        assert_eq!(p.budget.decision_dims(), 1);
        assert_eq!((p.n_times, p.n_inputs), (481, 481));
        assert_eq!(
            p.staged,
            Some(PilotSizes {
                times: 50,
                inputs: 50
            })
        );
    }
}
