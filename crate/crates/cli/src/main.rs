use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mallows::distributions::DEFAULT_PARTITION_EPSILON;
use mallows::limits::census;
use mallows::permutations::{assemble_two_sided, finite_from_stream, OneSidedStream, PermWindow};
use mallows::rng::{derive_seed, trial_rng};
use mallows::trees::{build_bst, mirror, sample_redwood_two_sided};
use mallows::verify::{run_all, run_suite, Overrides, Suite};
use mallows::{Error, TestReport, TwoSidedTriplet};

#[derive(Parser, Debug)]
#[command(name = "mallows", version, about = "Mallows permutations, their search trees and limit checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Mallows parameter. Values above 1 are sampled at 1/q and mirrored
    /// where the subcommand allows it.
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    radius: Option<usize>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Half-width of a two-sided window.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true, env = "MALLOWS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; 1 makes report streams byte-reproducible.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a Mallows permutation: `--n` values from the one-sided stream,
    /// or with `--window` the two-sided permutation on [-window, window].
    SamplePerm,
    /// Sample a Mallows tree, or with `--radius` the spine of the limiting
    /// two-sided tree.
    BuildTree,
    /// Radius-`r` ball census of one Mallows tree of size `n`.
    Census,
    /// Run a verification suite and emit one report per line.
    Verify {
        #[command(subcommand)]
        suite: VerifyCommand,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum VerifyCommand {
    Imt,
    Local,
    Rooted,
    Ghp,
    Ssc,
    Phi,
    Records,
    Oracle,
    Structural,
    All,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Parameter to sample at and whether to mirror the result.
fn mirrored_q(q: f64) -> Result<(f64, bool), Error> {
    if q > 1.0 && q.is_finite() {
        Ok((1.0 / q, true))
    } else if (0.0..1.0).contains(&q) {
        Ok((q, false))
    } else {
        Err(invalid(format!("q = {q} must lie in [0, 1) or be greater than 1")))
    }
}

fn text_only(c: &RunConfig, what: &str) -> Result<(), Error> {
    match c.format {
        Some(Format::Csv) => Err(invalid(format!("{what} writes plain text; --format csv does not apply"))),
        _ => Ok(()),
    }
}

fn sample_perm(c: &RunConfig) -> Result<(String, bool), Error> {
    text_only(c, "sample-perm")?;
    let (q, flip) = mirrored_q(c.q.unwrap_or(0.5))?;
    let mut rng = trial_rng(c.seed, 0);
    let w = match (c.window, c.n) {
        (Some(_), Some(_)) => return Err(invalid("give either --n or --window, not both")),
        (Some(w), None) => {
            let mut t = TwoSidedTriplet::sample(q, DEFAULT_PARTITION_EPSILON, &mut rng)?;
            let w = assemble_two_sided(&mut t, -(w as i64), w as i64)?;
            if flip {
                PermWindow { offset: w.offset, values: w.values.iter().map(|v| 1 - v).collect() }
            } else {
                w
            }
        }
        (None, n) => {
            let n = n.unwrap_or(10);
            let mut s = OneSidedStream::new(q, rng)?;
            let w = finite_from_stream(&mut s, n);
            if flip {
                PermWindow::finite(w.values.iter().map(|v| n as i64 + 1 - v).collect())
            } else {
                w
            }
        }
    };
    Ok((w.to_lines(), true))
}

fn build_tree(c: &RunConfig) -> Result<(String, bool), Error> {
    text_only(c, "build-tree")?;
    let (q, flip) = mirrored_q(c.q.unwrap_or(0.5))?;
    if let Some(r) = c.radius {
        if flip {
            return Err(invalid("--radius needs q < 1; the q > 1 limit is the mirror image"));
        }
        let t = sample_redwood_two_sided(q, r, &mut trial_rng(c.seed, 0))?;
        return Ok((t.to_lines(), true));
    }
    let n = c.n.unwrap_or(10);
    let mut s = OneSidedStream::new(q, trial_rng(c.seed, 0))?;
    let t = build_bst(&finite_from_stream(&mut s, n));
    let t = if flip { mirror(&t) } else { t };
    Ok((format!("{t}\n"), true))
}

fn run_census(c: &RunConfig) -> Result<(String, bool), Error> {
    let (q, flip) = mirrored_q(c.q.unwrap_or(0.5))?;
    let n = c.n.unwrap_or(1_000);
    if n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let mut s = OneSidedStream::new(q, trial_rng(derive_seed(c.seed, "census"), 0))?;
    let t = build_bst(&finite_from_stream(&mut s, n));
    let t = if flip { mirror(&t) } else { t };
    let result = census(&t, c.radius.unwrap_or(1));
    Ok(match c.format {
        Some(Format::Csv) => (result.to_csv(), true),
        _ => (format!("{}\n", result.to_json()), true),
    })
}

fn run_verify(c: &RunConfig, v: VerifyCommand) -> Result<(String, bool), Error> {
    let o = Overrides {
        q: c.q,
        n: c.n,
        radius: c.radius,
        depth: c.depth,
        trials: c.trials,
        window: c.window,
    };
    let suite = match v {
        VerifyCommand::Imt => Some(Suite::Imt),
        VerifyCommand::Local => Some(Suite::Local),
        VerifyCommand::Rooted => Some(Suite::Rooted),
        VerifyCommand::Ghp => Some(Suite::Ghp),
        VerifyCommand::Ssc => Some(Suite::Ssc),
        VerifyCommand::Phi => Some(Suite::Phi),
        VerifyCommand::Records => Some(Suite::Records),
        VerifyCommand::Oracle => Some(Suite::Oracle),
        VerifyCommand::Structural => Some(Suite::Structural),
        VerifyCommand::All => None,
    };
    let mut reports = match suite {
        Some(s) => run_suite(s, &o, c.seed)?,
        None => run_all(&o, c.seed)?,
    };
    if c.threads == Some(1) {
        // wall-clock time would break byte-for-byte reproducibility
        for r in &mut reports {
            r.runtime_ms = 0;
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    let mut out = String::new();
    match c.format {
        Some(Format::Csv) => {
            out.push_str(TestReport::CSV_HEADER);
            out.push('\n');
            for r in &reports {
                out.push_str(&r.to_csv_row());
                out.push('\n');
            }
        }
        _ => {
            for r in &reports {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
        }
    }
    Ok((out, pass))
}

fn run(cli: &Cli) -> Result<(String, bool), Error> {
    let c = &cli.config;
    match cli.command {
        Command::SamplePerm => sample_perm(c),
        Command::BuildTree => build_tree(c),
        Command::Census => run_census(c),
        Command::Verify { suite } => run_verify(c, suite),
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.config.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("the global pool is configured once");
    }
    let (text, pass) = match run(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write_output(cli.config.out.as_ref(), &text) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
