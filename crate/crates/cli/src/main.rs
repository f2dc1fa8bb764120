use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use subreg_cli::output::write_atomic;
use subreg_cli::replicate::{self, Options};
use subreg_cli::{exit, run, ExperimentSpec, Format};
use subreg_core::catalog;
use subreg_core::solver::{lookup_equation, EQUATION_IDS};

#[derive(Parser)]
#[command(name = "subreg", version, about = "Higher-order subregularity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Output format; overrides the spec's `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized property sampling.
    #[arg(long, global = true, default_value_t = replicate::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment spec.
    Run { spec: PathBuf },
    /// Run every acceptance criterion and print the pass/fail matrix.
    ReplicateAll,
    /// Inspect the built-in maps and equations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Describe { id: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::ERROR as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Run { spec } => run_spec(cli, spec),
        Command::ReplicateAll => replicate_all(cli),
        Command::Catalog { action: CatalogAction::List } => {
            for e in catalog::catalog() {
                println!("{:22} {}", e.id, e.notes);
            }
            for id in EQUATION_IDS {
                println!("{id:22} generalized equation");
            }
            Ok(exit::PASS)
        }
        Command::Catalog {
            action: CatalogAction::Describe { id },
        } => describe(id),
    }
}

fn run_spec(cli: &Cli, path: &Path) -> anyhow::Result<i32> {
    let spec = ExperimentSpec::from_path(path)?;
    let result = run(&spec)?;
    let format = cli.format.or(spec.output.format).unwrap_or_default();
    let written = result.write(&cli.out_dir, format)?;
    for (name, value) in &result.verdicts {
        println!("{name}: {value}");
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    eprintln!("wall clock {:.3} s", result.wall_clock_s);
    Ok(result.exit_code())
}

fn replicate_all(cli: &Cli) -> anyhow::Result<i32> {
    let opts = Options {
        seed: cli.seed,
        ..Options::default()
    };
    let matrix = replicate::replicate_all(&opts);
    print!("{}", matrix.render());
    let (path, bytes) = match cli.format.unwrap_or_default() {
        Format::Csv => (cli.out_dir.join("replicate_matrix.csv"), matrix.table().to_csv()),
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&matrix.table())?;
            b.push(b'\n');
            (cli.out_dir.join("replicate_matrix.json"), b)
        }
    };
    write_atomic(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
    let failed = matrix.rows.iter().filter(|r| !r.passed).count();
    println!("{} rows, {failed} failed; matrix in {}", matrix.rows.len(), path.display());
    Ok(if matrix.passed() { exit::PASS } else { exit::FAIL })
}

fn describe(id: &str) -> anyhow::Result<i32> {
    if let Ok(eq) = lookup_equation(id) {
        println!("id: {id}");
        println!("kind: generalized equation 0 in g(x) + F(x)");
        println!("F: {}", eq.map.label());
        if let Some(x) = eq.solution {
            println!("solution: {x}");
        }
        return Ok(exit::PASS);
    }
    let e = catalog::lookup(id)?;
    println!("id: {}", e.id);
    println!("domain: {}", e.map.domain());
    println!("base point: ({}, {})", e.base_point.0, e.base_point.1);
    if let Some(q) = e.known_order {
        println!("known order: {q}");
    }
    if let Some(b) = e.known_modulus_bound {
        println!("known modulus bound: {} on radius {}", b.eta, b.radius);
    }
    println!("inverse oracle: {}", e.map.has_inverse());
    println!("potential: {}", e.potential.is_some());
    println!("notes: {}", e.notes);
    Ok(exit::PASS)
}
