//! Repeated train/evaluate runs, parameter sweeps and their output files.

mod config;

pub use config::{
    parse_sweep_values, sweep_value_label, DatasetSource, ExperimentConfig, ModelKind,
    PartitionSpec, SweepParam,
};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::baselines::{train_centralized_rf, train_cffcp_audited, train_markovic, train_ncff};
use crate::data::{
    partition_alpha_chunking, partition_iid, stratified_split, Dataset, PartitionPlan,
};
use crate::error::Result;
use crate::eval::{evaluate, mean_report, EvalReport, MeanReport};
use crate::federation::{train_audited, FederationConfig};
use crate::rng::{derive_seed, Domain};

/// Seeds used by one run, all derived from the master seed and run index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunSeeds {
    pub run: u64,
    pub split: u64,
    pub partition: u64,
    pub model: u64,
    pub evaluation: u64,
}

impl RunSeeds {
    pub fn new(master_seed: u64, run: usize) -> Self {
        let run = derive_seed(master_seed, Domain::Run, &[run as u64]);
        Self {
            run,
            split: derive_seed(run, Domain::Split, &[]),
            partition: derive_seed(run, Domain::Partition, &[]),
            model: derive_seed(run, Domain::Model, &[]),
            evaluation: derive_seed(run, Domain::Evaluation, &[]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub report: EvalReport,
    /// Partition report followed by protocol audit lines, if any.
    pub audit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub model: ModelKind,
    pub runs: Vec<RunRecord>,
    pub summary: MeanReport,
}

pub fn partition_for(
    config: &ExperimentConfig,
    ds: &Dataset,
    train: &[usize],
    seed: u64,
) -> Result<PartitionPlan> {
    match config.partition {
        PartitionSpec::Iid => partition_iid(ds, train, config.clients, seed),
        PartitionSpec::Alpha(alpha) => {
            partition_alpha_chunking(ds, train, config.clients, alpha, seed)
        }
    }
}

/// One split, partition, training and evaluation.
pub fn run_once(config: &ExperimentConfig, ds: &Dataset, run: usize) -> Result<RunRecord> {
    let seeds = RunSeeds::new(config.master_seed, run);
    let split = stratified_split(ds, config.test_fraction, seeds.split)?;
    let plan = partition_for(config, ds, &split.train, seeds.partition)?;
    let mut audit = plan.report_text(ds);

    let federation = FederationConfig {
        trees: config.trees,
        clients: config.clients,
        growth: config.growth,
        master_seed: seeds.model,
    };
    let report = match config.model {
        ModelKind::Proposed => {
            let (model, log) = train_audited(&federation, ds, &plan, false)?;
            audit.push_str(&log.to_json_lines());
            evaluate(&model, ds, &split.test, seeds.evaluation)?
        }
        ModelKind::Cffcp => {
            let (model, log) = train_cffcp_audited(&federation, ds, &plan, false)?;
            audit.push_str(&log.to_json_lines());
            evaluate(&model, ds, &split.test, seeds.evaluation)?
        }
        ModelKind::Centralized => {
            let model =
                train_centralized_rf(ds, &split.train, config.trees, &config.growth, seeds.model)?;
            evaluate(&model, ds, &split.test, seeds.evaluation)?
        }
        ModelKind::Ncff => {
            let model = train_ncff(ds, &plan.shards, config.trees, &config.growth, seeds.model)?;
            evaluate(&model, ds, &split.test, seeds.evaluation)?
        }
        ModelKind::Markovic => {
            let model = train_markovic(
                ds,
                &plan.shards,
                &config.growth,
                &config.markovic,
                seeds.model,
            )?;
            for sel in &model.selection {
                let _ = writeln!(
                    audit,
                    "markovic client {} selected {:?}",
                    sel.client, sel.selected
                );
            }
            evaluate(&model, ds, &split.test, seeds.evaluation)?
        }
    };
    Ok(RunRecord {
        run,
        seed: seeds.run,
        report,
        audit,
    })
}

/// `config.runs` independent runs of `config.model`.
pub fn run_experiment(config: &ExperimentConfig, ds: &Dataset) -> Result<ExperimentResult> {
    config.validate_against(ds)?;
    let runs = (0..config.runs)
        .map(|r| run_once(config, ds, r))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<EvalReport> = runs.iter().map(|r| r.report.clone()).collect();
    Ok(ExperimentResult {
        model: config.model,
        summary: mean_report(&reports),
        runs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<Option<usize>>,
}

/// One cell of a sweep: a parameter value and a model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value: Option<usize>,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationResult {
    pub param: SweepParam,
    pub cells: Vec<SweepCell>,
}

impl AblationResult {
    pub fn find(&self, model: ModelKind, value: Option<usize>) -> Option<&ExperimentResult> {
        self.cells
            .iter()
            .find(|c| c.value == value && c.result.model == model)
            .map(|c| &c.result)
    }
}

/// Run every model in `models` at every sweep value. All configs are
/// validated before any training starts.
pub fn run_ablation(
    config: &ExperimentConfig,
    ds: &Dataset,
    sweep: &Sweep,
    models: &[ModelKind],
) -> Result<AblationResult> {
    let mut jobs = Vec::new();
    for &value in &sweep.values {
        for &model in models {
            let mut c = sweep.param.apply(config, value)?;
            c.model = model;
            c.validate_against(ds)?;
            jobs.push((value, c));
        }
    }
    let cells = jobs
        .into_iter()
        .map(|(value, c)| {
            Ok(SweepCell {
                value,
                result: run_experiment(&c, ds)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AblationResult {
        param: sweep.param,
        cells,
    })
}

/// A labelled experiment result, the unit written to output files.
pub struct Labelled<'a> {
    pub param: &'a str,
    pub value: String,
    pub result: &'a ExperimentResult,
}

impl<'a> Labelled<'a> {
    pub fn single(result: &'a ExperimentResult) -> Vec<Self> {
        vec![Labelled {
            param: "",
            value: String::new(),
            result,
        }]
    }

    pub fn from_ablation(ablation: &'a AblationResult) -> Vec<Self> {
        ablation
            .cells
            .iter()
            .map(|c| Labelled {
                param: ablation.param.name(),
                value: sweep_value_label(c.value),
                result: &c.result,
            })
            .collect()
    }
}

pub const RESULTS_HEADER: [&str; 12] = [
    "param",
    "value",
    "model",
    "run",
    "seed",
    "accuracy",
    "correct",
    "total",
    "mean_nodes",
    "mean_leaves",
    "mean_max_depth",
    "mean_leaf_depth",
];

pub fn results_csv(results: &[Labelled<'_>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER)?;
    for l in results {
        for run in &l.result.runs {
            let r = &run.report;
            w.write_record([
                l.param.to_string(),
                l.value.clone(),
                l.result.model.to_string(),
                run.run.to_string(),
                run.seed.to_string(),
                r.accuracy.to_string(),
                r.correct.to_string(),
                r.total.to_string(),
                r.mean_nodes.to_string(),
                r.mean_leaves.to_string(),
                r.mean_max_depth.to_string(),
                r.mean_leaf_depth.to_string(),
            ])?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    param: &'a str,
    value: &'a str,
    model: ModelKind,
    #[serde(flatten)]
    summary: &'a MeanReport,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: ExperimentConfig,
    results: Vec<SummaryEntry<'a>>,
}

pub fn summary_json(config: &ExperimentConfig, results: &[Labelled<'_>]) -> Result<String> {
    let summary = Summary {
        config: ExperimentConfig {
            out: None,
            ..config.clone()
        },
        results: results
            .iter()
            .map(|l| SummaryEntry {
                param: l.param,
                value: &l.value,
                model: l.result.model,
                summary: &l.result.summary,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}

pub fn audit_text(results: &[Labelled<'_>]) -> String {
    let mut out = String::new();
    for l in results {
        for run in &l.result.runs {
            let _ = write!(
                out,
                "# model {} run {} seed {}",
                l.result.model, run.run, run.seed
            );
            if !l.param.is_empty() {
                let _ = write!(out, " {}={}", l.param, l.value);
            }
            out.push('\n');
            out.push_str(&run.audit);
        }
    }
    out
}

/// Write `results.csv`, `summary.json` and `audit.log` into `dir`. Every
/// file is a pure function of the configuration and data.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    results: &[Labelled<'_>],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(results)?)?;
    fs::write(dir.join("summary.json"), summary_json(config, results)?)?;
    fs::write(dir.join("audit.log"), audit_text(results))?;
    Ok(())
}
