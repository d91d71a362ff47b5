//! Command-line harness for the collaborative federated forest simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fedforest::data::{stratified_split, LabelColumn};
use fedforest::experiment::{
    parse_sweep_values, partition_for, run_ablation, run_experiment, write_outputs, DatasetSource,
    ExperimentConfig, Labelled, ModelKind, PartitionSpec, RunSeeds, Sweep, SweepParam,
};
use fedforest::synth::BlobParams;
use fedforest::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fedforest",
    version,
    about = "Collaborative federated random forest simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one model over several seeded runs.
    Run(Common),
    /// Sweep one parameter and run every requested model at each value.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// alpha, max_depth, n_trees or min_samples_split.
        #[arg(long)]
        param: String,
        /// Comma-separated values; `none` removes the depth cap.
        #[arg(long)]
        values: String,
        /// Comma-separated models; defaults to the configured model.
        #[arg(long)]
        models: Option<String>,
    },
    /// Print the client partition of one run's training split.
    PartitionStats {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Write the bundled synthetic dataset to CSV.
    SynthData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        rows_per_class: Option<usize>,
    },
}

/// Flags shared by the experiment subcommands. Each overrides the config file.
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV dataset; the synthetic generator is used when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column name, or a zero-based index.
    #[arg(long, default_value = "label")]
    label: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, conflicts_with = "iid")]
    alpha: Option<usize>,
    #[arg(long)]
    iid: bool,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    clients: Option<usize>,
    /// Depth cap; `none` removes it.
    #[arg(long)]
    max_depth: Option<String>,
    #[arg(long)]
    min_split: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.data {
            let label_column = match self.label.parse() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(self.label.clone()),
            };
            c.dataset = DatasetSource::Csv {
                path: path.clone(),
                label_column,
            };
        }
        if let Some(seed) = self.seed {
            c.master_seed = seed;
        }
        if let Some(model) = &self.model {
            c.model = model.parse()?;
        }
        if let Some(alpha) = self.alpha {
            c.partition = PartitionSpec::Alpha(alpha);
        }
        if self.iid {
            c.partition = PartitionSpec::Iid;
        }
        if let Some(trees) = self.trees {
            c.trees = trees;
        }
        if let Some(clients) = self.clients {
            c.clients = clients;
        }
        if let Some(depth) = &self.max_depth {
            c.growth.max_depth = match parse_sweep_values(depth)?.as_slice() {
                [v] => *v,
                _ => return Err(Error::InvalidParameter(format!("bad max depth {depth:?}"))),
            };
        }
        if let Some(min_split) = self.min_split {
            c.growth.min_samples_split = min_split;
        }
        if let Some(runs) = self.runs {
            c.runs = runs;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn print_summary(labelled: &[Labelled<'_>]) {
    println!("param\tvalue\tmodel\truns\taccuracy\tnodes\tleaves\tdepth");
    for l in labelled {
        let s = &l.result.summary;
        println!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.1}\t{:.1}\t{:.2}",
            if l.param.is_empty() { "-" } else { l.param },
            if l.value.is_empty() { "-" } else { &l.value },
            l.result.model,
            s.runs,
            s.mean_accuracy,
            s.mean_nodes,
            s.mean_leaves,
            s.mean_max_depth
        );
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(common) => {
            let config = common.config()?;
            let ds = config.load_dataset()?;
            let result = run_experiment(&config, &ds)?;
            let labelled = Labelled::single(&result);
            print_summary(&labelled);
            if let Some(out) = &config.out {
                write_outputs(out, &config, &labelled)?;
            }
        }
        Command::Ablate {
            common,
            param,
            values,
            models,
        } => {
            let config = common.config()?;
            let sweep = Sweep {
                param: param.parse::<SweepParam>()?,
                values: parse_sweep_values(&values)?,
            };
            if sweep.values.is_empty() {
                return Err(Error::InvalidParameter("--values is empty".into()));
            }
            let models = match models {
                Some(list) => list
                    .split(',')
                    .map(|m| m.trim().parse())
                    .collect::<Result<Vec<ModelKind>>>()?,
                None => vec![config.model],
            };
            let ds = config.load_dataset()?;
            let ablation = run_ablation(&config, &ds, &sweep, &models)?;
            let labelled = Labelled::from_ablation(&ablation);
            print_summary(&labelled);
            if let Some(out) = &config.out {
                write_outputs(out, &config, &labelled)?;
            }
        }
        Command::PartitionStats { common, run } => {
            let config = common.config()?;
            let ds = config.load_dataset()?;
            let seeds = RunSeeds::new(config.master_seed, run);
            let split = stratified_split(&ds, config.test_fraction, seeds.split)?;
            let plan = partition_for(&config, &ds, &split.train, seeds.partition)?;
            print!("{}", plan.report_text(&ds));
        }
        Command::SynthData {
            out,
            seed,
            classes,
            rows_per_class,
        } => {
            let defaults = BlobParams::default();
            let params = BlobParams {
                classes: classes.unwrap_or(defaults.classes),
                rows_per_class: rows_per_class.unwrap_or(defaults.rows_per_class),
                ..defaults
            };
            let ds = params.generate(seed)?;
            ds.write_csv(&out)?;
            eprintln!("wrote {} rows to {}", ds.len(), out.display());
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_config_error() {
        1
    } else if err.is_data_error() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                Error::Config(problems) => {
                    eprintln!("error: invalid configuration");
                    for p in problems {
                        eprintln!("  - {p}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
