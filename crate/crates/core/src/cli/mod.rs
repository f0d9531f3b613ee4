//! The `fenchel-lab` command line: instance files in, reports out.
//!
//! Exit codes: `0` all expected verdicts matched, `1` a verdict mismatch,
//! `2` schema or usage problems (including an empty directory), `3` an
//! error raised by the library.

pub mod instance;
pub mod report;
pub mod run;

pub use instance::{Expected, FeasibleSpec, FunctionSpec, Instance, ParamsSpec, PolyhedralSpec, ProbeSpec, SchemaError};
pub use run::{
    corpus_run, instance_files, run_instance, thread_count, Check, Command, CommandResult, CorpusReport,
    CorpusSummary, ErrorInfo, ParamEcho, RunReport, Status,
};

use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, clap::Parser)]
#[command(name = "fenchel-lab", version, about = "Conjugates, envelopes and epsilon-subdifferential checks on instance files")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Instance file, or a directory of `*.json` instance files.
    pub path: PathBuf,
    /// Number of ε-splits for the finite union diagnostics (overrides the file).
    #[arg(long)]
    pub splits: Option<usize>,
    /// Half-width R of the box `[-R, R]^d` that set comparisons are truncated to.
    #[arg(long)]
    pub box_radius: Option<f64>,
    /// Sampled directions for support-function comparisons (0 picks a default by dimension).
    #[arg(long)]
    pub directions: Option<usize>,
    /// Relative tolerance; the absolute one is `tol * max(1, R)`.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall time in reports (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

impl Args {
    pub fn overrides(&self) -> ParamsSpec {
        ParamsSpec { splits: self.splits, box_radius: self.box_radius, directions: self.directions, tolerance: self.tol }
    }
}

fn machine<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Runs the command and returns `(report text, exit code)`. Usage problems
/// yield an empty report and a message on the error side.
pub fn execute(args: &Args) -> Result<(String, i32), (String, i32)> {
    let overrides = args.overrides();
    if args.path.is_dir() {
        let rep = corpus_run(&args.path, args.command, &overrides, args.timing).map_err(|e| (e, 2))?;
        let text = match args.format {
            Format::Human => report::human_corpus(&rep),
            Format::Machine => machine(&rep),
        };
        Ok((text, rep.exit_code()))
    } else {
        let rep = run_instance(&args.path, args.command, &overrides, args.timing);
        let text = match args.format {
            Format::Human => report::human(&rep),
            Format::Machine => machine(&rep),
        };
        Ok((text, rep.status.exit_code()))
    }
}

/// Entry point of the binary: prints the report, writes `--out`, returns
/// the exit code.
pub fn main_with(args: &Args) -> i32 {
    match execute(args) {
        Ok((text, code)) => {
            print!("{text}");
            if let Some(out) = &args.out {
                if let Err(e) = std::fs::write(out, &text) {
                    eprintln!("fenchel-lab: cannot write {}: {e}", out.display());
                    return 2;
                }
            }
            code
        }
        Err((msg, code)) => {
            eprintln!("fenchel-lab: {msg}");
            code
        }
    }
}
