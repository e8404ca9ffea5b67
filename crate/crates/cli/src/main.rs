//! `skein`: command-line driver for intertwiner traces, sweeps and the
//! acceptance suite.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use skein_core::harness::accept::{run_all, AcceptOptions};
use skein_core::harness::{
    error_json, exit_code, parse_ints, parse_matrix, parse_n_list, run, tampered_gauss_sum, CharacterSpec, Command,
    JobSpec, OutputFormat,
};
use skein_core::intertwiner::Mode;
use skein_core::quantum_torus::Sign;
use skein_core::Error;

#[derive(Parser, Debug)]
#[command(name = "skein", version, about = "Exact Kauffman-bracket intertwiners at odd roots of unity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Arithmetic backend: exact, float or auto.
    #[arg(long, global = true, default_value = "auto")]
    mode: String,

    /// Output format: json, csv or pretty.
    #[arg(long, global = true, default_value = "json")]
    output: String,

    /// Number of worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write the report to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<std::path::PathBuf>,

    /// Include per-row wall-clock timings (output is then not reproducible).
    #[arg(long, global = true)]
    timings: bool,

    /// Replace the Gauss sum with a corrupted one.
    #[arg(long, global = true, hide = true)]
    tamper_gauss: bool,
}

#[derive(Args, Debug)]
struct MatrixJob {
    /// Mapping class as a,b,c,d for [[a,b],[c,d]].
    #[arg(long, allow_hyphen_values = true)]
    matrix: String,
    /// Branch: plus or minus.
    #[arg(long, default_value = "plus")]
    sign: String,
    /// "trivial", "auto" (solve with --k) or rational angles p1,p2.
    #[arg(long, default_value = "trivial", allow_hyphen_values = true)]
    character: String,
    /// Right-hand side k1,k2 for the auto character.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Lift offsets r1,r2.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    lifts: String,
    /// Odd n: a value, a list "5,7,9" or an inclusive range "3..33".
    #[arg(long)]
    n: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// |Trace| of the normalized intertwiner via the matrix.
    Trace(MatrixJob),
    /// Build the intertwiner and report its structure.
    Intertwiner(MatrixJob),
    /// |Trace| over a range of n by the cheapest valid path.
    Sweep(MatrixJob),
    /// Run every exact check on the intertwiner.
    Verify(MatrixJob),
    /// Quadratic Gauss sum Σ (−q^{1/2})^{k t²}.
    Gauss {
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        n: String,
    },
    /// Intertwiner of the order-3 class on the once-punctured torus.
    Punctured {
        #[arg(long)]
        n: String,
    },
    /// Run the acceptance suite.
    Accept {
        /// Keep only criteria of this module (or this criterion number).
        #[arg(long)]
        only: Option<String>,
    },
}

fn parse_pair(s: &str, what: &str) -> Result<(i64, i64), Error> {
    match parse_ints(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidInput(format!("{what} must be two integers"))),
    }
}

fn build_job(cli: &Cli) -> Result<JobSpec, Error> {
    let command = match &cli.command {
        Cmd::Trace(_) => Command::Trace,
        Cmd::Intertwiner(_) => Command::Intertwiner,
        Cmd::Sweep(_) => Command::Sweep,
        Cmd::Verify(_) => Command::Verify,
        Cmd::Gauss { .. } => Command::Gauss,
        Cmd::Punctured { .. } => Command::Punctured,
        Cmd::Accept { .. } => Command::Accept,
    };
    let mut job = JobSpec::new(command);
    job.mode = cli.mode.parse::<Mode>()?;
    job.output = cli.output.parse::<OutputFormat>()?;
    job.workers = cli.workers;
    job.timings = cli.timings;
    if cli.tamper_gauss {
        job.gauss = tampered_gauss_sum;
    }
    match &cli.command {
        Cmd::Trace(m) | Cmd::Intertwiner(m) | Cmd::Sweep(m) | Cmd::Verify(m) => {
            job.matrix = Some(parse_matrix(&m.matrix)?);
            job.sign = m.sign.parse::<Sign>()?;
            job.character = m.character.parse::<CharacterSpec>()?;
            if let Some(k) = &m.k {
                job.k = vec![parse_pair(k, "--k")?.0, parse_pair(k, "--k")?.1];
            }
            job.lifts = parse_pair(&m.lifts, "--lifts")?;
            job.n_values = parse_n_list(&m.n)?;
        }
        Cmd::Gauss { k, n } => {
            job.k = vec![*k];
            job.n_values = parse_n_list(n)?;
        }
        Cmd::Punctured { n } => job.n_values = parse_n_list(n)?,
        Cmd::Accept { only } => job.only = only.clone(),
    }
    Ok(job)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(2)
}

fn accept(cli: &Cli, job: &JobSpec) -> Result<i32, Error> {
    let opts = AcceptOptions {
        only: job.only.clone(),
        gauss: job.gauss,
        ..Default::default()
    };
    let streaming = job.output == OutputFormat::Pretty && cli.out.is_none();
    let outcomes = run_all(&opts, |o| {
        if streaming {
            println!("{}", o.line());
        }
    })?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let text = match job.output {
        OutputFormat::Json => {
            let rows: Vec<_> = outcomes
                .iter()
                .map(|o| json!({"id": o.id, "module": o.module, "name": o.name, "passed": o.passed, "detail": o.detail}))
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({"criteria": rows, "failed": failed}))
                .expect("serializable");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::from("id,module,name,passed\n");
            for o in &outcomes {
                s.push_str(&format!("{},{},{},{}\n", o.id, o.module, o.name, o.passed));
            }
            s
        }
        OutputFormat::Pretty => {
            let mut s = String::new();
            if !streaming {
                for o in &outcomes {
                    s.push_str(&o.line());
                    s.push('\n');
                }
            }
            s.push_str(&format!("{} of {} criteria passed\n", outcomes.len() - failed, outcomes.len()));
            s
        }
    };
    emit(cli, &text)?;
    Ok(if failed == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::InvalidInput(e.to_string().trim().to_string())),
    };
    let job = match build_job(&cli) {
        Ok(j) => j,
        Err(e) => return fail(&e),
    };
    if job.command == Command::Accept {
        return match accept(&cli, &job) {
            Ok(code) => ExitCode::from(code as u8),
            Err(e) => fail(&e),
        };
    }
    match run(&job) {
        Ok(report) => match emit(&cli, &report.render(job.output)) {
            Ok(()) => ExitCode::from(exit_code(&report) as u8),
            Err(e) => fail(&e),
        },
        Err(e) => fail(&e),
    }
}
