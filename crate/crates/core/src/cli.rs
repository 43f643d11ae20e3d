//! The `macheck` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 resource or
//! convergence failure.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::generators::{gen_polling, gen_queueing, PollingParams, QueueParams};
use crate::gspn::{build_ma, parse_gspn};
use crate::io::{parse_ma, resolve_goal, write_ma};
use crate::model::{is_clean, validate, GoalSet, MarkovAutomaton, Severity};
use crate::objectives::{
    expected_time, lra, timed_reachability, unbounded_reachability, Engine, ExpectedTimeQuery,
    Interval, LraQuery, TimedQuery,
};
use crate::result::Objective;
use crate::solvers::DEFAULT_TOL;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Default cap on explored GSPN markings.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "macheck", version, about = "Quantitative analysis of Markov automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an objective on a `.ma` model (read from stdin without --model).
    Analyze(AnalyzeArgs),
    /// Build the state space of a `.gspn` net and write it as `.ma`.
    ImportGspn {
        input: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        bound: Option<u32>,
        #[arg(long = "state-limit", default_value_t = DEFAULT_STATE_LIMIT)]
        state_limit: usize,
    },
    /// Generate a case-study model.
    Gen {
        #[command(subcommand)]
        model: GenModel,
    },
    /// Check a `.ma` or `.gspn` file and list its diagnostics.
    Validate {
        input: PathBuf,
        /// Also list notices (e.g. deadlock states).
        #[arg(long)]
        notices: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GenModel {
    Polling {
        #[arg(long = "Q")]
        q: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    Queue {
        #[arg(long)]
        l1: f64,
        #[arg(long)]
        l2: f64,
        #[arg(long)]
        mu: f64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Vi,
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Model file; `-` or absent reads stdin.
    #[arg(long)]
    model: Option<PathBuf>,
    /// One of et, lra, tbr, ur with a -min or -max suffix.
    #[arg(long, value_parser = parse_objective)]
    objective: (Objective, crate::Direction),
    /// Label or union of labels `a|b`.
    #[arg(long)]
    goal: String,
    /// Lower time bound for tbr (default 0).
    #[arg(long)]
    from: Option<String>,
    /// Upper time bound for tbr.
    #[arg(long)]
    to: Option<String>,
    /// Error bound for tbr.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = EngineArg::Vi)]
    engine: EngineArg,
    /// Stopping tolerance of value iteration.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the policy (state, action) to this file.
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_objective(s: &str) -> std::result::Result<(Objective, crate::Direction), String> {
    Objective::parse_cli(s).ok_or_else(|| {
        format!("unknown objective `{s}` (expected et|lra|tbr|ur followed by -min or -max)")
    })
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{}", first_line(&rendered))
            };
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", first_line(&e.to_string()).trim_end());
            if e.is_resource() {
                EXIT_RESOURCE
            } else if matches!(e, Error::InvalidQuery(_)) {
                EXIT_USAGE
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn first_line(s: &str) -> String {
    format!("{}\n", s.lines().next().unwrap_or(""))
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => Ok(fs::read_to_string(p)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))?),
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn emit(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) if p != Path::new("-") => fs::write(p, text)?,
        _ => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn label_goal(ma: &MarkovAutomaton, label: &str) -> GoalSet {
    GoalSet::new(ma.label(label).into_iter().flatten().copied(), label)
}

fn dispatch(command: Command, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Analyze(args) => analyze(args, stdin, stdout),
        Command::ImportGspn {
            input,
            output,
            bound,
            state_limit,
        } => {
            let net = parse_gspn(&read_input(Some(&input), stdin)?)?;
            let ma = build_ma(&net, bound, state_limit)?;
            emit(output.as_deref(), &write_ma(&ma, &GoalSet::default()), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Gen { model } => {
            let (ma, goal_label, output) = match model {
                GenModel::Polling { q, n, output } => {
                    if q == 0 || n == 0 {
                        return Err(Error::InvalidQuery("--Q and --N must be at least 1".into()));
                    }
                    (gen_polling(PollingParams { q, n }), "bothFull", output)
                }
                GenModel::Queue { l1, l2, mu, output } => {
                    if !(l1 > 0.0 && l2 > 0.0 && mu > 0.0) {
                        return Err(Error::InvalidQuery("rates must be positive".into()));
                    }
                    let p = QueueParams {
                        lambda1: l1,
                        lambda2: l2,
                        mu,
                    };
                    (gen_queueing(p), "full", output)
                }
            };
            let goal = label_goal(&ma, goal_label);
            emit(output.as_deref(), &write_ma(&ma, &goal), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Validate { input, notices } => {
            let text = read_input(Some(&input), stdin)?;
            let ma = if input.extension().is_some_and(|e| e == "gspn") {
                build_ma(&parse_gspn(&text)?, None, DEFAULT_STATE_LIMIT)?
            } else {
                parse_ma(&text)?.0
            };
            let diags = validate(&ma);
            let mut hidden = 0;
            for d in &diags {
                if d.severity == Severity::Notice && !notices {
                    hidden += 1;
                } else {
                    writeln!(stdout, "{d}")?;
                }
            }
            let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
            let summary = if is_clean(&diags) { "ok" } else if errors == 0 { "usable" } else { "invalid" };
            write!(stdout, "{summary}: {} states", ma.num_states())?;
            if hidden > 0 {
                write!(stdout, " ({hidden} notices, see --notices)")?;
            }
            writeln!(stdout)?;
            Ok(if errors == 0 { EXIT_OK } else { EXIT_INPUT })
        }
    }
}

fn analyze(args: AnalyzeArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<i32> {
    let text = read_input(args.model.as_deref(), stdin)?;
    let (ma, _) = parse_ma(&text)?;
    let invalid: Vec<String> = validate(&ma)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect();
    if !invalid.is_empty() {
        return Err(crate::model::ModelError::Invalid(invalid.join("; ")).into());
    }
    let goal = resolve_goal(&ma, &args.goal)?;
    let (objective, direction) = args.objective;
    let engine = match args.engine {
        EngineArg::Vi => Engine::ValueIteration,
        EngineArg::Lp => Engine::LinearProgram,
    };
    if !(args.tol > 0.0) {
        return Err(Error::InvalidQuery("--tol must be positive".into()));
    }
    let result = match objective {
        Objective::ExpectedTime => expected_time(
            &ma,
            &ExpectedTimeQuery {
                goal,
                direction,
                engine,
                tol: args.tol,
            },
        )?,
        Objective::LongRunAverage => lra(
            &ma,
            &LraQuery {
                goal,
                direction,
                engine,
                tol: args.tol,
            },
        )?,
        Objective::TimedReachability => {
            let to = args
                .to
                .as_deref()
                .ok_or_else(|| Error::InvalidQuery("tbr objectives need --to".into()))?;
            let interval = Interval::parse(args.from.as_deref().unwrap_or("0"), to)?;
            timed_reachability(
                &ma,
                &TimedQuery {
                    goal,
                    direction,
                    interval,
                    epsilon: args.epsilon,
                },
            )?
        }
        Objective::UnboundedReachability => unbounded_reachability(&ma, &goal, direction)?,
    };
    if let Some(path) = &args.policy {
        if let Some(text) = result.policy_text(&ma) {
            fs::write(path, text)?;
        }
    }
    match args.format {
        Format::Json => writeln!(stdout, "{}", result.to_json())?,
        Format::Text => write!(stdout, "{}", result.to_text())?,
    }
    Ok(EXIT_OK)
}
