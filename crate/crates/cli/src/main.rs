mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use manifest::Manifest;
use report::{Report, RunError, Verdict};

/// Runs one manifest (or replays one archive) and writes `report.txt` and
/// `report.json` to the output directory.
#[derive(Debug, Parser)]
#[command(name = "cufraisse", version)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["manifest", "replay"]))]
struct Cli {
    /// Run manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Overrides the manifest depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Overrides the manifest search bound.
    #[arg(long)]
    bound: Option<usize>,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: manifest `out`, else `cufraisse-out`].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Archive written by a `fraisse` run.
    #[arg(long)]
    replay: Option<PathBuf>,
}

const INPUT_ERROR: u8 = 3;

fn threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var("CUFRAISSE_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| RunError::Input(format!("CUFRAISSE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Input(e.to_string()))
}

fn execute(cli: &Cli) -> Result<(Report, PathBuf), RunError> {
    threads()?;
    if let Some(path) = &cli.replay {
        let json = std::fs::read_to_string(path)?;
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("cufraisse-out"));
        return Ok((commands::replay(&json)?, out));
    }
    let path = cli.manifest.as_ref().expect("clap requires an input");
    let mut m: Manifest = std::fs::read_to_string(path)?.parse()?;
    if let Some(d) = cli.depth {
        m.depth = d;
    }
    if let Some(b) = cli.bound {
        m.bound = b;
    }
    if let Some(s) = cli.seed {
        m.seed = s;
    }
    let out = cli.out.clone().or_else(|| m.out.clone()).unwrap_or_else(|| PathBuf::from("cufraisse-out"));
    let command = m.command.name();
    let report = match commands::run(&m) {
        Ok(r) => r,
        // budget and verification errors still produce a report
        Err(RunError::Budget(msg)) => diagnostic(command, Verdict::Exhausted, msg),
        Err(RunError::Verify(msg)) => diagnostic(command, Verdict::Fail, msg),
        Err(e) => return Err(e),
    };
    Ok((report, out))
}

fn diagnostic(command: &str, verdict: Verdict, msg: String) -> Report {
    let mut r = Report::new(command);
    r.mark(verdict);
    r.section("diagnostic", vec![msg.clone()]);
    r.data("diagnostic", msg);
    r
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok((report, out)) => {
            print!("{}", report.text());
            if let Err(e) = report.write(&out) {
                eprintln!("error: writing {}: {e}", out.display());
                return ExitCode::from(INPUT_ERROR);
            }
            ExitCode::from(report.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
