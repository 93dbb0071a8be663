use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dissbus_core::error::{Error, Result};
use dissbus_core::pipeline::{Pipeline, PipelineConfig, Stage};
use dissbus_core::service::serve_labeling;
use dissbus_core::upcycle::ComparisonMode;

#[derive(Parser)]
#[command(name = "dissbus", version, about = "Confirmatory aspect-based opinion mining pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split reviews into clauses.
    Disintegrate(Opts),
    /// Extract bi-terms from clauses.
    Summarize(Opts),
    /// Keep bi-terms whose count reaches the cut-point.
    Strain(Opts),
    /// Build topic bags from the labels.
    Bag(Opts),
    /// Assign topics to the remaining bi-terms.
    Upcycle(Opts),
    /// Score clauses and write the topic matrix.
    Score(Opts),
    /// Run every stage in order.
    All(Opts),
    /// Serve the labeling endpoints.
    Serve(Opts),
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "cut-point")]
    cut_point: Option<i64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<i64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ComparisonMode>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

fn parse_mode(s: &str) -> std::result::Result<ComparisonMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Opts {
    fn pipeline(&self) -> Result<Pipeline> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        let p = &mut cfg.parameters;
        if let Some(v) = self.cut_point {
            p.cut_point = v;
        }
        if let Some(v) = self.c1 {
            p.c1 = v;
        }
        if let Some(v) = self.c2 {
            p.c2 = v;
        }
        if let Some(v) = self.mode {
            p.mode = v;
        }
        if let Some(v) = self.m {
            p.m = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.tau {
            p.tau = v;
        }
        Pipeline::new(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (stage, opts) = match cli.command {
        Command::Disintegrate(o) => (Some(Stage::Disintegrate), o),
        Command::Summarize(o) => (Some(Stage::Summarize), o),
        Command::Strain(o) => (Some(Stage::Strain), o),
        Command::Bag(o) => (Some(Stage::Bag), o),
        Command::Upcycle(o) => (Some(Stage::Upcycle), o),
        Command::Score(o) => (Some(Stage::Score), o),
        Command::All(o) => {
            let report = o.pipeline()?.run_all()?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            return Ok(());
        }
        Command::Serve(o) => {
            let pipeline = o.pipeline()?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Service(e.to_string()))?;
            return rt.block_on(serve_labeling(&pipeline, o.port));
        }
    };
    let stage = stage.expect("stage commands");
    let manifest = opts.pipeline()?.run_stage(stage)?;
    println!("{}", serde_json::to_string_pretty(&manifest.counts).expect("counts serialize"));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
