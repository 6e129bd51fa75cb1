use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cutdg_cli::reproduce::{execute, reproduction, IDS};
use cutdg_cli::run::{convergence_csv, convergence_table, output_dir, OUTPUT_DIR_ENV};
use cutdg_cli::verify::{verify, SUITES};
use cutdg_cli::{convergence_sweep, run_to_dir, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "cutdg", version, about = "Bound-preserving cut discontinuous Galerkin solver in 1D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write solution.csv, diagnostics.csv and report.json.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and the environment).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a configuration on several meshes and tabulate errors and orders.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a property suite (or `all`).
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Print one JSON object per check instead of text lines.
        #[arg(long)]
        json: bool,
    },
    /// Run a canned experiment (`list` prints the ids).
    Reproduce {
        id: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn resolve(output: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    output.unwrap_or_else(|| output_dir(cfg))
}

fn dispatch(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Run { config, output } => {
            let cfg = RunConfig::load(&config)?;
            let dir = resolve(output, &cfg);
            let out = run_to_dir(&cfg, &dir)?;
            let r = &out.report;
            println!(
                "{} p={} N={} t={:.6} steps={} ({:.2} s)",
                r.problem, r.degree, r.n, r.t_final, r.steps, r.runtime_s
            );
            if let Some(e) = r.errors {
                println!("L1 {:.6e}  L2 {:.6e}  Linf {:.6e}", e.l1, e.l2, e.linf);
            }
            if let (Some(lo), Some(hi)) = (r.min, r.max) {
                println!("range [{lo:.17e}, {hi:.17e}]");
            }
            if let (Some(rho), Some(p)) = (r.min_rho, r.min_p) {
                println!("min rho {rho:.6e}  min p {p:.6e}");
            }
            println!("output in {}", dir.display());
            Ok(0)
        }
        Command::Converge { config, levels, output } => {
            let cfg = RunConfig::load(&config)?;
            let rows = convergence_sweep(&cfg, &levels)?;
            let dir = resolve(output, &cfg);
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("convergence.csv"), convergence_csv(&rows))?;
            print!("{}", convergence_table(&rows));
            Ok(0)
        }
        Command::Verify { suite, json } => {
            let results = verify(&suite)?;
            for r in &results {
                if json {
                    println!("{}", serde_json::to_string(r).expect("result serializes"));
                } else {
                    println!("{}", r.line());
                }
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 3 })
        }
        Command::Reproduce { id, output } => {
            if id == "list" {
                for id in IDS {
                    println!("{id:32} {}", reproduction(id)?.summary);
                }
                println!("\nverify suites: all, {}", SUITES.join(", "));
                return Ok(0);
            }
            let rep = reproduction(&id)?;
            let root = output
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| Path::new("output").to_path_buf());
            let dir = root.join(rep.id);
            println!("{}: {}", rep.id, rep.summary);
            let outcomes = execute(&rep, &dir)?;
            for o in &outcomes {
                match &o.error {
                    None => println!("[{}]\n{}", o.label, o.text.trim_end()),
                    Some(e) if o.control => println!("[{}] aborted as expected for a control: {e}", o.label),
                    Some(e) => println!("[{}] FAILED: {e}", o.label),
                }
            }
            println!("output in {}", dir.display());
            Ok(if outcomes.iter().any(|o| o.failed()) { 4 } else { 0 })
        }
    }
}
