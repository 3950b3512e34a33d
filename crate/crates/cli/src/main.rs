use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bayestree_core::harness::{
    argmax, clamp_workers, cross_validate, emit_report, predict, read_feature_rows, scaling_sweep, DataSource,
    DatasetSummary, ExperimentConfig, ModelFile, PosteriorSummary, Preset, RunReport, SyntheticSpec, TimingRow,
};
use bayestree_core::runtime::{default_workers, TimingSummary};
use bayestree_core::samplers::{self, PosteriorSample};
use bayestree_core::{Hyperparams, Method};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bayestree",
    version,
    about = "Bayesian classification trees: sequential MCMC, SMC and data-partitioned samplers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trees on a dataset and save the retained trees to <out>/model.json.
    Fit(RunArgs),
    /// K-fold cross-validated accuracy.
    Cv {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 10)]
        folds: usize,
    },
    /// Time the sampler over a list of worker counts.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated worker counts.
        #[arg(long, value_delimiter = ',', required = true)]
        workers_list: Vec<usize>,
    },
    /// Posterior-mean class probabilities for every row of a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Zero-based label column, dropped if present; defaults to the last column.
        #[arg(long)]
        label_column: Option<usize>,
        /// The CSV starts with a header row.
        #[arg(long)]
        header: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Labelled CSV (label in the last column unless --label-column is given).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    /// Preset name (SD/SF ... BD/BF) or rows,features,classes.
    #[arg(long)]
    synthetic: Option<String>,
    /// Seed for the synthetic generator.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 8000)]
    iterations: usize,
    /// Defaults to half the iterations.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Worker count C; defaults to $BAYESTREE_WORKERS or the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tree-prior constant a.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Tree-prior depth penalty.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Cap on tree depth reachable by proposals.
    #[arg(long)]
    max_depth: Option<usize>,
    /// SMC rounds to discard; defaults to half the rounds.
    #[arg(long)]
    sumd_burn_in_rounds: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn parse_synthetic(s: &str, seed: u64) -> Result<SyntheticSpec> {
    if let Ok(p) = s.parse::<Preset>() {
        return Ok(p.spec(seed));
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [rows, features, classes] = parts.as_slice() else {
        bail!("--synthetic expects a preset name or rows,features,classes, got {s:?}");
    };
    Ok(SyntheticSpec {
        rows: rows.parse().context("synthetic rows")?,
        features: features.parse().context("synthetic features")?,
        classes: classes.parse().context("synthetic classes")?,
        seed,
    })
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let source = match (&self.data, &self.synthetic) {
            (Some(path), None) => DataSource::Csv {
                path: path.clone(),
                label_column: self.label_column,
                header: self.header,
            },
            (None, Some(s)) => DataSource::Synthetic(parse_synthetic(s, self.data_seed)?),
            _ => bail!("exactly one of --data and --synthetic is required"),
        };
        let mut hp = Hyperparams {
            a: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            burn_in: self.burn_in.unwrap_or(self.iterations / 2),
            workers: self.workers.unwrap_or_else(default_workers),
            seed: self.seed,
            sumd_burn_in_rounds: self.sumd_burn_in_rounds,
            ..Hyperparams::default()
        };
        hp.moves.max_depth = self.max_depth;
        let mut config = ExperimentConfig::new(self.method, source, hp);
        config.output = Some(self.out.clone());
        Ok(config)
    }
}

fn finish(report: &RunReport, out: &Path) -> Result<()> {
    let paths = emit_report(report, out)?;
    print!("{}", report.summary_text());
    log::info!("wrote {}", paths.json.display());
    Ok(())
}

fn fit(args: &RunArgs) -> Result<()> {
    let mut config = args.config()?;
    let loaded = config.source.load()?;
    let data = &loaded.dataset;
    let hp = &mut config.hyperparams;
    hp.workers = clamp_workers(config.method, hp.workers, data.n_rows(), hp.iterations);
    config.validate()?;

    let start = Instant::now();
    let sample = samplers::run(config.method, data, &config.hyperparams)?;
    let elapsed = start.elapsed();

    fs::create_dir_all(&args.out)?;
    let model_path = args.out.join("model.json");
    ModelFile::new(
        config.method,
        &config.hyperparams,
        data.n_features(),
        &loaded.label_names,
        &sample,
    )
    .save(&model_path)
    .with_context(|| format!("writing {}", model_path.display()))?;

    let workers = config.hyperparams.workers;
    let mut report = RunReport::new("fit", &config, DatasetSummary::of(&loaded));
    report
        .metrics
        .posterior
        .push(PosteriorSummary::of(config.method, workers, &sample));
    report.timings.push(TimingRow::new(
        config.method,
        workers,
        TimingSummary::from_samples(&[elapsed]),
    ));
    finish(&report, &args.out)?;
    println!("model: {}", model_path.display());
    Ok(())
}

fn write_predictions(samples: &PosteriorSample, rows: &[Vec<f64>], labels: &[String], out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(out)?;
    let mut header = vec!["row".to_string(), "predicted".to_string()];
    header.extend(labels.iter().map(|l| format!("p_{l}")));
    w.write_record(&header)?;
    for (i, x) in rows.iter().enumerate() {
        let p = predict(samples, x);
        let mut record = vec![i.to_string(), labels[argmax(&p)].clone()];
        record.extend(p.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Fit(args) => fit(&args),
        Command::Cv { run, folds } => {
            let mut config = run.config()?;
            config.folds = folds;
            finish(&cross_validate(&config)?, &run.out)
        }
        Command::Sweep { run, workers_list } => {
            let mut config = run.config()?;
            config.workers_list = workers_list;
            finish(&scaling_sweep(&config)?, &run.out)
        }
        Command::Predict {
            model,
            data,
            out,
            label_column,
            header,
        } => {
            let file = ModelFile::load(&model).with_context(|| format!("reading {}", model.display()))?;
            let samples = file.to_sample()?;
            let rows = read_feature_rows(&data, file.n_features, label_column, header)?;
            write_predictions(&samples, &rows, &file.label_names, &out)?;
            println!("{} predictions written to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
