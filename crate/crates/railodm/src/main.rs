use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use railodm::core::classifier::{FeatureSet, InputClass, Variant, WeightTable};
use railodm::core::sim::constants::DT_S;
use railodm::fixtures;
use railodm::model_file::{load_model, save_model};
use railodm::pipeline::{self, Dataset, Evaluator};
use railodm::report_file::{render_table, save_report};
use railodm::route_file::load_route;
use railodm::service::{self, STATE_DIR_ENV};
use railodm::weights_file::load_weights;

#[derive(Parser)]
#[command(
    name = "railodm",
    version,
    about = "Cab simulator, OwO classifier and tuning service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Features {
    Base,
    WithPi,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate runs and write them with a manifest.
    Generate {
        /// Route file; the bundled fixture when omitted.
        #[arg(long)]
        route: Option<PathBuf>,
        #[arg(long, default_value_t = pipeline::DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = pipeline::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DT_S)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a Gaussian NB model on the training split.
    Fit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = pipeline::DEFAULT_TRAIN_COUNT)]
        train_count: usize,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[arg(long, value_enum, default_value_t = Features::WithPi)]
        features: Features,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the held-out runs. Exits 1 if any comparison claim fails.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Weight table; the defaults when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Comma-separated, from NB, OwO, OwO+PI.
        #[arg(long, value_delimiter = ',', default_value = "NB,OwO,OwO+PI")]
        variants: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// generate, fit and eval with defaults into one directory.
    Pipeline {
        #[arg(long)]
        route: Option<PathBuf>,
        #[arg(long, default_value_t = pipeline::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the tuning API from a state dir.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = STATE_DIR_ENV)]
        state_dir: PathBuf,
    },
}

fn route_or_fixture(path: Option<PathBuf>) -> anyhow::Result<railodm::core::route::RouteSpec> {
    match path {
        Some(p) => Ok(load_route(&p)?),
        None => Ok(fixtures::swalwell_proxy()),
    }
}

fn parse_variants(names: &[String]) -> anyhow::Result<Vec<Variant>> {
    let mut out = Vec::new();
    for n in names {
        let Some(v) = Variant::from_name(n.trim()) else {
            bail!("unknown variant {n:?} (expected NB, OwO or OwO+PI)")
        };
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        bail!("no variants requested");
    }
    out.sort();
    Ok(out)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate {
            route,
            runs,
            seed,
            dt,
            out,
        } => {
            let route = route_or_fixture(route)?;
            let ds = pipeline::generate(&route, runs, seed, dt, &out)?;
            println!("{} rows in {} runs", ds.total_rows(), ds.runs.len());
            println!("manifest {}", ds.manifest.path.display());
        }
        Command::Fit {
            manifest,
            train_count,
            split_seed,
            features,
            out,
        } => {
            let ds = Dataset::load(&manifest)?;
            let fs = match features {
                Features::Base => FeatureSet::base(),
                Features::WithPi => FeatureSet::with_pi(),
            };
            let model = pipeline::fit_dataset(&ds, train_count, split_seed, &fs)?;
            save_model(&model, &out)?;
            println!(
                "fitted on {} rows from runs {:?}",
                model.training.train_rows, model.training.train_runs
            );
            for c in InputClass::all() {
                println!("prior {:<4} {:.6}", c.to_string(), model.model.prior(c));
            }
            println!("model {}", out.display());
        }
        Command::Eval {
            model,
            manifest,
            weights,
            variants,
            out,
        } => {
            let variants = parse_variants(&variants)?;
            let model = load_model(&model)?;
            let weights = match weights {
                Some(p) => load_weights(&p)?,
                None => WeightTable::default(),
            };
            let ds = Dataset::load(&manifest)?;
            let ev = Evaluator::new(model, &ds)?;
            let doc = ev.evaluate(&weights, &variants)?;
            save_report(&doc, &out)?;
            print!("{}", render_table(&doc.to_report()?));
            println!("report {}", out.display());
            if doc.claims_passed() == Some(false) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Pipeline { route, seed, out } => {
            let route = route_or_fixture(route)?;
            let res = pipeline::run_all(&route, seed, DT_S, &out)?;
            println!("{} rows", res.rows);
            print!("{}", render_table(&res.document.to_report()?));
            println!("report {}", res.report.display());
            if res.document.claims_passed() == Some(false) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Serve {
            port,
            host,
            state_dir,
        } => {
            let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
            rt.block_on(service::serve(SocketAddr::new(host, port), &state_dir))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
