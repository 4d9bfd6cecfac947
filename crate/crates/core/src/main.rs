use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vlasov_dlra::mesh::load_polygon_mesh;
use vlasov_dlra::scenario::{convergence, convergence_table, run_scenario, Scenario};
use vlasov_dlra::{par, Error, Result};

#[derive(Parser)]
#[command(name = "vlasov-dlra", version, about = "Low-rank Vlasov-Poisson solver with inflow boundaries")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs
    Run {
        /// Config file, or `builtin:<name>` for a preset
        config: String,
        /// Override a key, e.g. `--set dt=0.01`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Parse and validate a config, printing the resolved parameters
    Validate {
        config: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Load a mesh file and print a summary
    MeshInfo { mesh: PathBuf },
    /// Run levels 0..=L and print the maximal L2 errors
    Convergence {
        config: String,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn load(config: &str, set: &[String]) -> Result<Scenario> {
    let mut sc = match config.strip_prefix("builtin:") {
        Some(name) => Scenario::preset(name)?,
        None => {
            let text = std::fs::read_to_string(config).map_err(|e| Error::Io {
                path: config.into(),
                source: e,
            })?;
            Scenario::parse(&text)?
        }
    };
    for kv in set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config {
            key: kv.clone(),
            message: "expected KEY=VALUE".into(),
        })?;
        sc.set(k.trim(), v.trim())?;
    }
    sc.validate()?;
    Ok(sc)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, set } => {
            let sc = load(&config, &set)?;
            let out = run_scenario(&sc)?;
            let last = out.records.last().expect("at least one record");
            println!(
                "finished t = {} rank {} electric_energy {:e} mass {:e}; outputs in {}",
                last.t,
                last.rank,
                last.electric_energy,
                last.mass,
                sc.out_dir.display()
            );
        }
        Command::Validate { config, set } => {
            let sc = load(&config, &set)?;
            print!("{}", sc.resolved().to_text());
        }
        Command::MeshInfo { mesh } => {
            let text = std::fs::read_to_string(&mesh).map_err(|e| Error::Io {
                path: mesh.clone(),
                source: e,
            })?;
            print!("{}", load_polygon_mesh(&text)?.summary());
        }
        Command::Convergence { config, levels, set } => {
            let sc = load(&config, &set)?;
            print!("{}", convergence_table(&convergence(&sc, levels)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => par::with_threads(n, || execute(cli.command)),
        None => execute(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
