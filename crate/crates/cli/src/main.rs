//! `yltl`: check, translate and inspect temporal-epistemic-counterfactual
//! specifications over finite lasso universes.
//!
//! Exit status: 0 satisfied (or clean), 1 not satisfied (or violations
//! found), 2 bad input.

mod report;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use yltl::casestudy::Variant;
use yltl::foe::{print_fo, translate, TranslateOptions};
use yltl::formula::{parse, Formula};
use yltl::model::{load_system, System};
use yltl::semantics::{EvalContext, Mode};
use yltl::trace::{
    generate_universe, LassoTrace, TraceUniverse, UniverseBounds, DEFAULT_MAX_TRACES,
};

#[derive(Parser)]
#[command(
    name = "yltl",
    version,
    about = "Model checking for temporal, epistemic and counterfactual properties"
)]
struct Cli {
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula on every trace of the universe at position 0.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        formula: FormulaArgs,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Evaluate positions 0..=N only instead of exact lasso semantics.
        #[arg(long, value_name = "N")]
        bounded: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the first-order translation of a formula.
    Translate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        formula: FormulaArgs,
        /// Omit the level pin on counterfactual comparison variables.
        #[arg(long)]
        faithful: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check every agent's similarity relation for the preorder conditions.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Positions to check at.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        positions: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the traces of a universe.
    Universe {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        universe: UniverseArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the hiring case study for one system variant.
    Demo {
        /// explainable, unexplainable, restricted or gender-frozen.
        variant: Option<String>,
        /// List the variants and exit.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// System description (JSON).
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long, value_name = "TEXT", conflicts_with = "formula_file")]
    formula: Option<String>,
    #[arg(long, value_name = "PATH")]
    formula_file: Option<PathBuf>,
}

#[derive(Args)]
struct UniverseArgs {
    #[arg(long, value_name = "P", default_value_t = 2)]
    universe_prefix: usize,
    #[arg(long, value_name = "L", default_value_t = 1)]
    universe_loop: usize,
    /// Only states allowed inside the loop.
    #[arg(long, value_name = "IDS", value_delimiter = ',')]
    loop_states: Option<Vec<String>>,
    /// Explicit trace literal; repeat to build the universe by hand.
    #[arg(long = "trace", value_name = "LASSO")]
    traces: Vec<String>,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_TRACES)]
    max_traces: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// An error that should end the run with status 2.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn load_formula(args: &FormulaArgs) -> Result<Formula> {
    let text = match (&args.formula, &args.formula_file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        (None, None) => bail!("one of --formula or --formula-file is required"),
    };
    parse(text.trim()).map_err(|e| anyhow!("formula: {e}"))
}

fn load_model(args: &ModelArgs) -> Result<System> {
    load_system(&args.model).with_context(|| format!("loading {}", args.model.display()))
}

fn build_universe(sys: &System, args: &UniverseArgs) -> Result<TraceUniverse> {
    if args.traces.is_empty() {
        let mut bounds = UniverseBounds::new(args.universe_prefix, args.universe_loop)
            .with_max_traces(args.max_traces);
        if let Some(states) = &args.loop_states {
            bounds = bounds.with_loop_states(states.iter().cloned());
        }
        return Ok(generate_universe(sys, &bounds)?);
    }
    let aps = sys.kripke().aps();
    let mut traces = Vec::new();
    for lit in &args.traces {
        let tr = LassoTrace::parse(lit).map_err(|e| anyhow!("trace `{lit}`: {e}"))?;
        let cells = tr.prefix().iter().chain(tr.loop_cells());
        if let Some(p) = cells.flatten().find(|p| !aps.iter().any(|a| a == *p)) {
            bail!("trace `{lit}`: unknown proposition `{p}`");
        }
        traces.push(tr);
    }
    Ok(TraceUniverse::from_traces(traces))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn run(cli: Cli) -> Result<ExitCode, InputError> {
    match cli.command {
        Command::Check {
            model,
            formula,
            universe,
            bounded,
            output,
        } => {
            let sys = load_model(&model)?;
            let f = load_formula(&formula)?;
            let u = build_universe(&sys, &universe)?;
            let mode = bounded.map_or(Mode::exact(), Mode::Bounded);
            let verdict = EvalContext::new(&sys, &u, mode).check_system(&f)?;
            let text = if output.json {
                json(&verdict)
            } else {
                report::verdict(&f, &u, &verdict)
            };
            emit(&output.out, &text)?;
            Ok(status(verdict.result))
        }
        Command::Translate {
            model,
            formula,
            faithful,
            out,
        } => {
            let sys = load_model(&model)?;
            let f = load_formula(&formula)?;
            let fo = translate(&f.desugar(), &sys, TranslateOptions { faithful })?;
            emit(&out, &(print_fo(&fo) + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            model,
            universe,
            positions,
            output,
        } => {
            let sys = load_model(&model)?;
            let u = build_universe(&sys, &universe)?;
            let ctx = EvalContext::exact(&sys, &u);
            let mut findings = Vec::new();
            for agent in sys.agents() {
                for tref in u.traces() {
                    for &i in &positions {
                        let rep = ctx.validate_similarity(&agent.name, tref, i)?;
                        if !rep.is_empty() {
                            findings.push(report::Finding {
                                agent: agent.name.clone(),
                                reference: tref.to_string(),
                                position: i,
                                report: rep,
                            });
                        }
                    }
                }
            }
            let text = if output.json {
                json(&findings)
            } else {
                report::findings(&u, &findings)
            };
            emit(&output.out, &text)?;
            Ok(status(findings.is_empty()))
        }
        Command::Universe {
            model,
            universe,
            output,
        } => {
            let sys = load_model(&model)?;
            let u = build_universe(&sys, &universe)?;
            let text = if output.json {
                json(&u)
            } else {
                report::universe(&u)
            };
            emit(&output.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo {
            variant,
            list,
            output,
        } => {
            if list {
                let text: String = Variant::ALL
                    .iter()
                    .map(|v| format!("{:<14} {}\n", v.name(), v.description()))
                    .collect();
                emit(&output.out, &text)?;
                return Ok(ExitCode::SUCCESS);
            }
            let name = variant.ok_or_else(|| anyhow!("a variant name or --list is required"))?;
            let v: Variant = name.parse().map_err(|e: String| anyhow!(e))?;
            let demo = report::demo(v)?;
            let text = if output.json {
                json(&demo)
            } else {
                demo.to_text()
            };
            emit(&output.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .stack_size(STACK)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    } else {
        // Generated specifications nest deeply; give workers room too.
        let _ = rayon::ThreadPoolBuilder::new()
            .stack_size(STACK)
            .build_global();
    }
    let worker = std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(move || run(cli));
    match worker.map(|h| h.join()) {
        Ok(Ok(Ok(code))) => code,
        Ok(Ok(Err(InputError(e)))) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        _ => {
            eprintln!("error: internal failure");
            ExitCode::from(2)
        }
    }
}

const STACK: usize = 256 << 20;
