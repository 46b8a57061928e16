//! Pipeline stages and the artifacts they write. Each stage function is the
//! body of one subcommand; `run` chains them and keeps a MANIFEST.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use pacmc_core::lp::{learn, learn_staged, model_to_string, LearnedModel};
use pacmc_core::montecarlo::{
    plot_data, validate_ensemble, validate_inputs, PlotData, ValidationReport,
};
use pacmc_core::pac::Budget;
use pacmc_core::sampling::{
    collect_dataset, dataset_to_string, read_dataset, sample_times_with, stream_rng, Dataset,
    Stream,
};
use pacmc_core::verify::{check_safety, InputScope, Verdict};
use pacmc_core::{Error, Result};
use serde::Serialize;

use crate::config::{InputSource, Plan, SystemSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Bounds,
    Sample,
    Learn,
    Verify,
    Validate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Bounds => "bounds",
            Stage::Sample => "sample",
            Stage::Learn => "learn",
            Stage::Verify => "verify",
            Stage::Validate => "validate",
        })
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl StageError {
    pub fn new(stage: Stage, error: Error) -> Self {
        Self { stage, error }
    }

    /// 2 configuration, 3 insufficient samples, 4 solver, 5 verdict stage,
    /// 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match (&self.error, self.stage) {
            (Error::Config(_), _) | (_, Stage::Config) => 2,
            (Error::InsufficientSamples { .. }, _) => 3,
            (
                Error::SolverStall { .. }
                | Error::NumericalBreakdown(_)
                | Error::Unbounded
                | Error::BoundInfeasible { .. },
                Stage::Learn,
            ) => 4,
            (_, Stage::Verify | Stage::Validate) => 5,
            _ => 1,
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

pub type StageResult<T> = std::result::Result<T, StageError>;

trait Tag<T> {
    fn at(self, stage: Stage) -> StageResult<T>;
}

impl<T> Tag<T> for Result<T> {
    fn at(self, stage: Stage) -> StageResult<T> {
        self.map_err(|e| StageError::new(stage, e))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn hash_line(hash: &str) -> String {
    format!("# config_hash = {hash}\n")
}

/// Sibling path holding the pilot sample of a staged run.
pub fn pilot_path(data: &Path) -> PathBuf {
    data.with_extension("pilot.csv")
}

pub fn summary_path(validation: &Path) -> PathBuf {
    validation.with_extension("summary.txt")
}

pub fn plot_path(validation: &Path) -> PathBuf {
    validation.with_extension("plot.csv")
}

/// Required sample sizes for `budget` as a short text.
pub fn bounds_text(budget: &Budget) -> Result<String> {
    let (m, n) = budget.required_sizes()?;
    let dims = budget.decision_dims();
    Ok(match n {
        Some(n) => format!("decision variables {dims}: M >= {m}, N >= {n}"),
        None => format!("decision variables {dims}: M >= {m}"),
    })
}

pub struct Samples {
    pub data: Dataset,
    pub pilot: Option<Dataset>,
}

fn draw(
    plan: &Plan,
    n_times: usize,
    n_inputs: usize,
    times: Stream,
    inputs: Stream,
) -> Result<Dataset> {
    let oracle = plan.oracle().expect("drawing needs a benchmark");
    let t = sample_times_with(plan.horizon, n_times, &mut stream_rng(plan.seed, times))?;
    let xs = match &plan.inputs {
        InputSource::Point(x) => vec![x.clone()],
        InputSource::List(xs) => xs.clone(),
        InputSource::Set(set) => plan.drawn_inputs(set, n_inputs, inputs)?,
    };
    let mut ds = collect_dataset(oracle, &xs, &t)?;
    ds.seed = Some(plan.seed);
    if let InputSource::Set(set) = &plan.inputs {
        ds.input_set = Some(set.to_string());
    }
    Ok(ds)
}

pub fn sample(plan: &Plan) -> StageResult<Samples> {
    let data = match &plan.system {
        SystemSource::Dataset(ds) => ds.clone(),
        SystemSource::Benchmark(_) => draw(
            plan,
            plan.n_times,
            plan.n_inputs,
            Stream::Times,
            Stream::Inputs,
        )
        .at(Stage::Sample)?,
    };
    let pilot = match plan.staged {
        Some(p) => Some(
            draw(
                plan,
                p.times,
                p.inputs,
                Stream::PilotTimes,
                Stream::PilotInputs,
            )
            .at(Stage::Sample)?,
        ),
        None => None,
    };
    Ok(Samples { data, pilot })
}

pub fn write_samples(plan: &Plan, samples: &Samples, out: &Path) -> StageResult<Vec<PathBuf>> {
    let mut written = vec![out.to_path_buf()];
    let text = hash_line(&plan.hash) + &dataset_to_string(&samples.data);
    write(out, &text).at(Stage::Sample)?;
    if let Some(pilot) = &samples.pilot {
        let path = pilot_path(out);
        write(&path, &(hash_line(&plan.hash) + &dataset_to_string(pilot))).at(Stage::Sample)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads the dataset at `data` and, for staged runs, its pilot sibling.
pub fn read_samples(plan: &Plan, data: &Path) -> StageResult<Samples> {
    let ds = read_dataset(data).at(Stage::Learn)?;
    let pilot = match plan.staged {
        Some(_) => Some(read_dataset(&pilot_path(data)).at(Stage::Learn)?),
        None => None,
    };
    Ok(Samples { data: ds, pilot })
}

pub fn learn_model(plan: &Plan, samples: &Samples) -> StageResult<LearnedModel> {
    if samples.data.horizon != plan.horizon {
        return Err(StageError::new(
            Stage::Learn,
            Error::Config(format!(
                "dataset horizon {} differs from the configured {}",
                samples.data.horizon, plan.horizon
            )),
        ));
    }
    let mut model = match &samples.pilot {
        Some(pilot) => learn_staged(
            pilot,
            &samples.data,
            &plan.template,
            plan.uc,
            plan.uxi,
            plan.budget,
        ),
        None => learn(
            &samples.data,
            &plan.template,
            plan.uc,
            plan.uxi,
            plan.budget,
        ),
    }
    .at(Stage::Learn)?;
    model.provenance.config_hash = Some(plan.hash.clone());
    Ok(model)
}

pub fn write_model(model: &LearnedModel, out: &Path) -> StageResult<()> {
    write(out, &model_to_string(model).at(Stage::Learn)?).at(Stage::Learn)
}

pub fn verify(plan: &Plan, model: &LearnedModel) -> StageResult<Verdict> {
    let scope = plan.scope().at(Stage::Verify)?;
    check_safety(model, &plan.unsafe_set, &scope, &plan.budget).at(Stage::Verify)
}

/// Statement, config hash, then the machine-readable block.
pub fn verdict_text(plan: &Plan, verdict: &Verdict) -> StageResult<String> {
    let report = verdict.to_report().at(Stage::Verify)?;
    let (statement, block) = report.split_once('\n').unwrap_or((&report, ""));
    Ok(format!("{statement}\n{}{block}", hash_line(&plan.hash)))
}

pub struct Validation {
    pub report: ValidationReport,
    pub plot: PlotData,
}

pub fn validate(plan: &Plan, model: &LearnedModel) -> StageResult<Validation> {
    let tag = |e| StageError::new(Stage::Validate, e);
    let oracle = plan
        .oracle()
        .ok_or_else(|| tag(Error::Config("validation needs a benchmark system".into())))?;
    let v = &plan.config.validation;
    let (count, delta_t, threshold, step, seed) = (
        v.count.expect("resolved"),
        v.delta_t.expect("resolved"),
        v.threshold.expect("resolved"),
        v.step.expect("resolved"),
        v.seed.expect("resolved"),
    );
    let truth = oracle.with_step(step).map_err(tag)?;
    let report = match plan.scope().map_err(tag)? {
        InputScope::Single(x) => validate_inputs(&truth, model, vec![x], delta_t, threshold, seed),
        InputScope::Listed(xs) => validate_inputs(&truth, model, xs, delta_t, threshold, seed),
        InputScope::Set(set) => {
            validate_ensemble(&truth, model, &set, count, delta_t, threshold, seed)
        }
    }
    .map_err(tag)?;
    let shown: Vec<Vec<f64>> = report
        .per_trajectory
        .iter()
        .take(v.plot_trajectories.expect("resolved").max(1))
        .map(|r| r.input.clone())
        .collect();
    let plot = plot_data(&truth, model, &shown, v.plot_points.expect("resolved")).map_err(tag)?;
    Ok(Validation { report, plot })
}

pub fn write_validation(plan: &Plan, v: &Validation, out: &Path) -> StageResult<Vec<PathBuf>> {
    let head = hash_line(&plan.hash);
    let summary = summary_path(out);
    let plot = plot_path(out);
    write(out, &(head.clone() + &v.report.to_csv())).at(Stage::Validate)?;
    write(&summary, &format!("{head}{}\n", v.report.summary())).at(Stage::Validate)?;
    write(&plot, &(head + &v.plot.to_csv())).at(Stage::Validate)?;
    Ok(vec![out.to_path_buf(), summary, plot])
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: Stage,
    pub status: &'static str,
    pub detail: String,
    pub artifacts: Vec<String>,
}

/// Completion state of a `run`, rewritten after every stage.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub complete: bool,
    #[serde(rename = "stage")]
    pub stages: Vec<StageRecord>,
    #[serde(skip)]
    dir: PathBuf,
}

impl Manifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join("MANIFEST")
    }

    fn record(
        &mut self,
        name: Stage,
        status: &'static str,
        detail: String,
        artifacts: &[PathBuf],
    ) -> Result<()> {
        let artifacts = artifacts
            .iter()
            .map(|p| p.strip_prefix(&self.dir).unwrap_or(p).display().to_string())
            .collect();
        self.stages.push(StageRecord {
            name,
            status,
            detail,
            artifacts,
        });
        self.save()
    }

    fn save(&self) -> Result<()> {
        let text = toml::to_string(self)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        write(&Self::path(&self.dir), &text)
    }
}

/// File names used by `run`.
pub struct RunPaths {
    pub config: PathBuf,
    pub dataset: PathBuf,
    pub model: PathBuf,
    pub verdict: PathBuf,
    pub validation: PathBuf,
}

impl RunPaths {
    pub fn new(dir: &Path) -> Self {
        Self {
            config: dir.join("effective.cfg"),
            dataset: dir.join("dataset.csv"),
            model: dir.join("model.toml"),
            verdict: dir.join("verdict.txt"),
            validation: dir.join("validation.csv"),
        }
    }
}

pub struct RunOutcome {
    pub verdict: Verdict,
    pub validation: Option<ValidationReport>,
}

/// Runs every stage, writing artifacts into `dir`. A failing stage is
/// recorded in the MANIFEST before the error is returned.
pub fn run(plan: &Plan, dir: &Path) -> StageResult<RunOutcome> {
    fs::create_dir_all(dir).map_err(|e| StageError::new(Stage::Config, Error::io(dir, e)))?;
    let paths = RunPaths::new(dir);
    let mut manifest = Manifest {
        config_hash: plan.hash.clone(),
        complete: false,
        stages: Vec::new(),
        dir: dir.to_path_buf(),
    };
    let setup = plan.effective_toml().and_then(|t| write(&paths.config, &t));
    setup.and_then(|_| manifest.save()).at(Stage::Config)?;

    let outcome = run_stages(plan, &paths, &mut manifest);
    match &outcome {
        Ok(_) => manifest.complete = true,
        Err(e) => {
            let _ = manifest.record(e.stage, "failed", e.error.to_string(), &[]);
        }
    }
    manifest.save().at(Stage::Config)?;
    outcome
}

fn run_stages(plan: &Plan, paths: &RunPaths, manifest: &mut Manifest) -> StageResult<RunOutcome> {
    let bounds = bounds_text(&plan.budget).at(Stage::Bounds)?;
    manifest
        .record(Stage::Bounds, "completed", bounds, &[])
        .at(Stage::Bounds)?;

    let samples = sample(plan)?;
    let files = write_samples(plan, &samples, &paths.dataset)?;
    let detail = format!(
        "{} inputs x {} times",
        samples.data.n_inputs(),
        samples.data.n_times()
    );
    manifest
        .record(Stage::Sample, "completed", detail, &files)
        .at(Stage::Sample)?;

    let model = learn_model(plan, &samples)?;
    write_model(&model, &paths.model)?;
    let detail = format!("xi = {}", model.xi);
    manifest
        .record(Stage::Learn, "completed", detail, &[paths.model.clone()])
        .at(Stage::Learn)?;

    let verdict = verify(plan, &model)?;
    write(&paths.verdict, &verdict_text(plan, &verdict)?).at(Stage::Verify)?;
    let detail = format!("{:?}", verdict.kind);
    manifest
        .record(Stage::Verify, "completed", detail, &[paths.verdict.clone()])
        .at(Stage::Verify)?;

    let validation = if plan.oracle().is_some() {
        let v = validate(plan, &model)?;
        let files = write_validation(plan, &v, &paths.validation)?;
        let detail = format!("ratio = {}", v.report.ratio);
        manifest
            .record(Stage::Validate, "completed", detail, &files)
            .at(Stage::Validate)?;
        Some(v.report)
    } else {
        let detail = "no oracle for an external dataset".to_string();
        manifest
            .record(Stage::Validate, "skipped", detail, &[])
            .at(Stage::Validate)?;
        None
    };
    Ok(RunOutcome {
        verdict,
        validation,
    })
}
