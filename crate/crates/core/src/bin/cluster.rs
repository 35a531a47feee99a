use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use likert_cluster::pipeline::{self, PipelineConfig};
use likert_cluster::{Error, FeatureMode, ScalerKind};

/// Cluster Likert survey respondents by subscale profile.
#[derive(Parser)]
#[command(name = "cluster", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write every artifact.
    Run(RunArgs),
    /// Check a config without running it.
    Validate(ConfigArg),
    /// Parse and score the survey; write scores CSV.
    Score {
        #[command(flatten)]
        config: ConfigArg,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale and reduce; write scaler.json, pca.json and scree.csv.
    Pca(StageArgs),
    /// Sweep K over the configured range; write elbow.csv and print the elbow.
    Sweep(StageArgs),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scaler: Option<ScalerKind>,
    #[arg(long = "features")]
    features: Option<FeatureMode>,
    /// Keep exactly this many principal components.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct StageArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    overrides: Overrides,
}

impl Overrides {
    fn apply(&self, config: &mut PipelineConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(scaler) = self.scaler {
            config.scaler = scaler;
        }
        if let Some(mode) = self.features {
            config.feature_mode = mode;
        }
        if let Some(m) = self.components {
            config.pca_components = Some(m);
            config.variance_threshold = None;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    let mut source = std::error::Error::source(err);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    ExitCode::from(err.kind().exit_code() as u8)
}

fn write_or_fail(config: &PipelineConfig, files: &[(&str, Vec<u8>)]) -> Result<(), Error> {
    for path in pipeline::write_artifacts(&config.output_dir, files)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate(arg) => {
            let config = PipelineConfig::load(&arg.config)?;
            let diags = pipeline::validate(&config);
            if diags.is_empty() {
                println!("ok");
                return Ok(());
            }
            for d in &diags {
                println!("{d}");
            }
            Err(Error::Config {
                field: diags[0].field.clone(),
                reason: format!("{} problem(s) found", diags.len()),
            })
        }
        Command::Run(args) => {
            let mut config = PipelineConfig::load(&args.config.config)?;
            args.overrides.apply(&mut config);
            if let Some(k) = args.k {
                config.k = Some(k);
                config.k_range = None;
            }
            let summary = pipeline::run(&config)?;
            for path in &summary.artifacts {
                println!("wrote {}", path.display());
            }
            match summary.elbow_k {
                Some(e) => println!("K = {} (elbow)", e),
                None => println!("K = {} (fixed)", summary.k),
            }
            println!("PCA components = {}", summary.pca_components);
            println!("silhouette = {:.4}", summary.silhouette_mean);
            Ok(())
        }
        Command::Score { config, out } => {
            let config = PipelineConfig::load(&config.config)?;
            let scored = pipeline::run_scoring(&config)?;
            let mut buf = Vec::new();
            scored.scores.write_csv(&mut buf).map_err(|e| Error::Csv {
                path: "<scores>".into(),
                source: e,
            })?;
            match out {
                Some(path) => {
                    std::fs::write(&path, buf).map_err(|e| Error::Io { path, source: e })?
                }
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            Ok(())
        }
        Command::Pca(args) => {
            let mut config = PipelineConfig::load(&args.config.config)?;
            args.overrides.apply(&mut config);
            let reduced = pipeline::run_reduction(&config)?;
            let mut scree = Vec::new();
            reduced
                .pca
                .write_scree_csv(&mut scree)
                .map_err(|e| Error::Csv {
                    path: "<scree>".into(),
                    source: e,
                })?;
            write_or_fail(
                &config,
                &[
                    ("scaler.json", pipeline::to_pretty_json(&reduced.scaler)),
                    ("pca.json", pipeline::to_pretty_json(&reduced.pca)),
                    ("scree.csv", scree),
                ],
            )?;
            println!(
                "PCA components = {} (cumulative variance {:.4})",
                reduced.pca.n_components(),
                reduced.pca.cumulative_ratio.last().copied().unwrap_or(0.0)
            );
            Ok(())
        }
        Command::Sweep(args) => {
            let mut config = PipelineConfig::load(&args.config.config)?;
            args.overrides.apply(&mut config);
            config.k = None;
            let (lo, hi) = config.k_range.unwrap_or(pipeline::DEFAULT_K_RANGE);
            let reduced = pipeline::run_reduction(&config)?;
            let curve = pipeline::run_sweep(&config, &reduced, (lo, hi))?;
            let mut buf = Vec::new();
            curve.write_csv(&mut buf).map_err(|e| Error::Csv {
                path: "<elbow>".into(),
                source: e,
            })?;
            write_or_fail(&config, &[("elbow.csv", buf)])?;
            println!("elbow K = {}", curve.elbow_k.expect("elbow is set"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
