use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ahls::cli;
use ahls::config::{Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "ahls",
    version,
    about = "Numerical checks of affine HLS and log-Sobolev inequality chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected chains over the corpus and write reports.
    Run(RunArgs),
    /// Summarize a directory of JSON reports.
    Summary {
        #[arg(env = "AHLS_OUTPUT_DIR", default_value = "reports")]
        dir: PathBuf,
    },
    /// Corpus operations.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// List the corpus entries and the chains each one runs.
    List {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "AHLS_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Comma-separated chain names, or `specfun` for the constant self test.
    #[arg(long, value_delimiter = ',')]
    chains: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    dimensions: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    affine_hls_alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    affine_frac_l2_alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    dilations: Option<Vec<f64>>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    sphere_nodes: Option<usize>,
    #[arg(long)]
    tolerance_multiplier: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_format)]
    formats: Option<Vec<Format>>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        _ => Err(format!("unknown format `{s}` (expected json or csv)")),
    }
}

impl RunArgs {
    fn into_config(self) -> ahls::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        set!(
            output_dir,
            chains,
            dimensions,
            functions,
            affine_hls_alphas,
            affine_frac_l2_alphas,
            dilations,
            m,
            sphere_nodes,
            tolerance_multiplier,
            seed,
            formats
        );
        Ok(c)
    }
}

fn run(args: RunArgs) -> ahls::Result<bool> {
    let config = args.into_config()?;
    let out = cli::run(&config)?;
    let failures = cli::failures(&out);
    println!(
        "{} reports, {} self checks written to {}",
        out.reports.len(),
        out.self_test.len(),
        config.output_dir.display()
    );
    for line in &failures {
        println!("FAIL {line}");
    }
    Ok(out.success())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summary { dir } => cli::summary(&dir).map(|s| {
            print!("{s}");
            true
        }),
        Command::Corpus {
            command: CorpusCommand::List { seed },
        } => {
            print!(
                "{}",
                cli::corpus_listing(seed.unwrap_or(RunConfig::default().seed))
            );
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
