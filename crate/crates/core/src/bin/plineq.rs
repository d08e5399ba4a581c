use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use plineq::campaign::{execute, Campaign, Mode};
use plineq::exec::{init_workers, Execution, WORKERS_ENV};
use plineq::Arithmetic;

/// Verify, falsify and replay piecewise-linear integral inequality checks.
#[derive(Debug, Parser)]
#[command(name = "plineq", version)]
struct Cli {
    /// Campaign file (TOML or JSON). Flags below override its fields.
    #[arg(long)]
    campaign: Option<PathBuf>,
    /// verify | falsify | replay | sharpness
    #[arg(long)]
    mode: Option<Mode>,
    /// Inequalities to verify, comma separated.
    #[arg(long, value_delimiter = ',')]
    inequality: Vec<plineq::InequalityName>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// rational | float
    #[arg(long)]
    arithmetic: Option<Arithmetic>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Case file for replay mode.
    #[arg(long)]
    case: Option<PathBuf>,
    /// Falsification budget per search problem.
    #[arg(long)]
    budget: Option<usize>,
    /// Worker threads for trial fan-out.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Run every trial on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Cli {
    fn campaign(&self) -> Result<Campaign, String> {
        let mut c = match &self.campaign {
            Some(path) => Campaign::load(path).map_err(|e| e.to_string())?,
            None => Campaign::default(),
        };
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if !self.inequality.is_empty() {
            c.inequalities = self.inequality.clone();
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(a) = self.arithmetic {
            c.arithmetic = a;
        }
        if self.tolerance.is_some() {
            c.tolerance = self.tolerance;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.case.is_some() {
            c.case = self.case.clone();
            if self.mode.is_none() && self.campaign.is_none() {
                c.mode = Mode::Replay;
            }
        }
        if let Some(b) = self.budget {
            c.search.budget = b;
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_workers(cli.workers);
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let campaign = match cli.campaign() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match execute(&campaign, exec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &campaign.out {
        Some(path) => {
            if let Err(e) = report.write(path) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", report.to_json()),
    }
    for m in &report.mismatches {
        eprintln!("expectation not met: {m}");
    }
    ExitCode::from(report.exit_code() as u8)
}
