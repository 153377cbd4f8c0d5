use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use coset_tracks::harness::{
    corpus_instance, emit_dot, emit_report, oracle_labelings, oracle_orientations, random_family, run_instance,
    write_atomic, HarnessError, InstanceSpec, RunOptions,
};
use coset_tracks::pattern::{assign_labels, SetFamily, TrackSystem};
use coset_tracks::window::build_family;

const INPUT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "tracktree", version, about = "Dual trees of nested coset patterns")]
struct Cli {
    /// Override the window radius.
    #[arg(long, global = true)]
    radius: Option<usize>,
    /// Override the window boundary margin.
    #[arg(long, global = true)]
    margin: Option<usize>,
    /// Instances to run concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Record per-stage timings in reports.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and print one report per instance.
    Check {
        /// Instance files, or corpus names E1 to E4.
        #[arg(required = true)]
        specs: Vec<String>,
        /// Write `<name>.report.json` files here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the dual tree or the report of one instance.
    Tree {
        spec: String,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the brute-force oracles on one instance.
    Oracle { spec: String },
    /// Run a corpus instance and show its tree.
    Demo { name: String },
    /// Generate and check a random nested family.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        classes: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Report,
}

fn load(spec: &str, cli: &Cli) -> Result<InstanceSpec, HarnessError> {
    let path = Path::new(spec);
    let parsed = if path.exists() {
        InstanceSpec::load(path)?
    } else {
        corpus_instance(spec)
            .ok_or_else(|| HarnessError::Parse(format!("no file or corpus instance named '{spec}'")))?
    };
    parsed.with_window(cli.radius, cli.margin)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), HarnessError> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(cli: &Cli) -> RunOptions {
    RunOptions { timings: cli.timings }
}

fn check(cli: &Cli, specs: &[String], out: Option<&Path>) -> Result<u8, HarnessError> {
    let loaded: Vec<InstanceSpec> = specs.iter().map(|s| load(s, cli)).collect::<Result<_, _>>()?;
    let jobs = cli.jobs.max(1);
    let mut results = Vec::with_capacity(loaded.len());
    for chunk in loaded.chunks(jobs) {
        let batch: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|s| scope.spawn(|| run_instance(s, options(cli)))).collect();
            handles.into_iter().map(|h| h.join().expect("instance thread")).collect()
        });
        results.extend(batch);
    }
    let mut code = 0u8;
    for r in results {
        let r = r?;
        let text = emit_report(&r.report);
        match out {
            Some(dir) => {
                write_atomic(&dir.join(format!("{}.report.json", r.report.instance)), &text)?;
                eprintln!("{}: {}", r.report.instance, json!(r.report.status).as_str().unwrap_or("?"));
            }
            None => print!("{text}"),
        }
        code = code.max(r.report.exit_code() as u8);
    }
    Ok(code)
}

fn tree(cli: &Cli, spec: &str, format: Format, out: Option<&Path>) -> Result<u8, HarnessError> {
    let spec = load(spec, cli)?;
    let run = run_instance(&spec, options(cli))?;
    match format {
        Format::Report => emit(&emit_report(&run.report), out)?,
        Format::Dot => match (&run.system, &run.tree) {
            (Some(s), Some(t)) => emit(&emit_dot(&spec.name, s, t), out)?,
            _ => {
                eprintln!("{}: no tree ({})", spec.name, json!(run.report.status));
                return Ok(run.report.exit_code().max(2) as u8);
            }
        },
    }
    Ok(run.report.exit_code() as u8)
}

fn oracle(cli: &Cli, spec: &str) -> Result<u8, HarnessError> {
    let spec = load(spec, cli)?;
    let family = match &spec.explicit {
        Some(e) => SetFamily::explicit(&e.universe, &e.vertices).map_err(|e| HarnessError::Parse(e.to_string()))?,
        None => {
            let inst = spec.resolve()?;
            let parse = |e: coset_tracks::window::WindowError| HarnessError::Parse(e.to_string());
            let w =
                coset_tracks::window::build_window(&inst.model, &inst.subgroup, inst.window.radius, inst.window.margin)
                    .map_err(parse)?;
            let a = coset_tracks::window::build_base_set(&w, &inst.base_set).map_err(parse)?;
            let fam = build_family(&w, &a, &inst.translations).map_err(|e| {
                eprintln!("{}: {e}", spec.name);
                HarnessError::Parse(e.to_string())
            })?;
            SetFamily::from_vertex_family(&w, &fam)
        }
    };
    let system = TrackSystem::new(family).map_err(|e| HarnessError::TooLarge(e.to_string()))?;
    let orientations = oracle_orientations(&system).map(|o| json!(o)).unwrap_or_else(|e| json!(e.to_string()));
    let labellings = match assign_labels(&system) {
        Ok(l) => oracle_labelings(&system, &l).map(|o| json!(o)).unwrap_or_else(|e| json!(e.to_string())),
        Err(e) => json!(e.to_string()),
    };
    let doc = json!({ "instance": spec.name, "orientations": orientations, "labellings": labellings });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    Ok(0)
}

fn demo(cli: &Cli, name: &str) -> Result<u8, HarnessError> {
    let spec = corpus_instance(name).ok_or_else(|| HarnessError::Parse(format!("no corpus instance '{name}'")))?;
    let spec = spec.with_window(cli.radius, cli.margin)?;
    let run = run_instance(&spec, options(cli))?;
    for c in &run.report.checks {
        println!("{:<24} {:<11} {}", c.name, json!(c.status).as_str().unwrap_or("?"), c.detail);
        if !c.witness.is_empty() {
            println!("{:<24} {:<11} witness: {}", "", "", c.witness);
        }
    }
    if let (Some(s), Some(t)) = (&run.system, &run.tree) {
        println!();
        print!("{}", emit_dot(&spec.name, s, t));
    }
    Ok(run.report.exit_code() as u8)
}

fn random(cli: &Cli, seed: u64, classes: usize) -> Result<u8, HarnessError> {
    let spec = random_family(seed, classes)?;
    let run = run_instance(&spec, options(cli))?;
    print!("{}", emit_report(&run.report));
    Ok(run.report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { specs, out } => check(&cli, specs, out.as_deref()),
        Command::Tree { spec, format, out } => tree(&cli, spec, *format, out.as_deref()),
        Command::Oracle { spec } => oracle(&cli, spec),
        Command::Demo { name } => demo(&cli, name),
        Command::Random { seed, classes } => random(&cli, *seed, *classes),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
