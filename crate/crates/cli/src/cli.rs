//! `cccr` subcommands. [`run`] takes argv and output sinks and returns the
//! process exit code: 0 on success, 1 for bad arguments, 2 for a graph that
//! cannot be read or parsed, 3 for non-convergence under `--strict`.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use cccr::concurrent::{value_iterate, IterationConfig, ValueTable};
use cccr::export::{solution_doc, values_to_csv};
use cccr::simulation::{
    delayed_evasion_strategy, estimate_value, guessing_cop_strategy, run_episode, StrategyHandle, StrategyKind,
};
use cccr::turn_based::{cop_number, solve_copwin, CopwinTable};
use cccr::{generate, parse_edge_list, GameError, Graph, Placement, Side};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_ARGS: i32 = 1;
pub const EXIT_GRAPH: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cccr", version, about = "Cops and robbers with simultaneous moves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Edge-list file: one `u v` pair per line, `#` starts a comment.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Built-in graph: path:N, cycle:N, clique:N, paper-tree, gavenciak.
    #[arg(long, value_name = "SPEC")]
    pub generator: Option<String>,
}

#[derive(Debug, Args)]
pub struct Iteration {
    /// Stop when no value changes by this much in a sweep.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
}

impl Iteration {
    fn config(&self) -> IterationConfig {
        IterationConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..IterationConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value table and optimal mixed strategies.
    Solve {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1)]
        cops: usize,
        #[command(flatten)]
        iteration: Iteration,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write here instead of standard output.
        #[arg(long, short, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Exit with status 3 if the iteration does not converge.
        #[arg(long)]
        strict: bool,
    },
    /// Smallest number of cops that always catch the robber.
    CopNumber {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 4)]
        max_cops: usize,
    },
    /// Capture time with simultaneous moves and with alternating moves.
    CaptureTime {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1)]
        cops: usize,
        #[command(flatten)]
        iteration: Iteration,
    },
    /// Monte Carlo play between two strategies.
    Simulate {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1)]
        cops: usize,
        #[arg(long, default_value = "mixed-table", value_parser = parse_kind)]
        cop_strategy: StrategyKind,
        #[arg(long, default_value = "mixed-table", value_parser = parse_kind)]
        robber_strategy: StrategyKind,
        /// Start position: cop labels then the robber's, comma separated.
        #[arg(long, value_name = "X,Y")]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        episodes: u64,
        #[arg(long, default_value_t = 1_000)]
        horizon: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the first episode as JSON lines instead of a summary.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        iteration: Iteration,
    },
    /// Print a built-in graph as an edge list.
    Gen {
        spec: String,
    },
    /// Run the HTTP play service.
    Serve {
        #[arg(long, env = "CCCR_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Directory of static files (the browser client).
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|e: GameError| e.to_string())
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn args(message: impl ToString) -> Self {
        Self {
            code: EXIT_ARGS,
            message: message.to_string(),
        }
    }

    fn graph(message: impl ToString) -> Self {
        Self {
            code: EXIT_GRAPH,
            message: message.to_string(),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Graph(g) => Failure::graph(g),
            other => Failure::args(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::args(e)
    }
}

fn load(source: &GraphSource) -> Result<Graph, Failure> {
    match (&source.graph, &source.generator) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::graph(format!("{}: {e}", path.display())))?;
            parse_edge_list(&text).map_err(|e| Failure::graph(format!("{}: {e}", path.display())))
        }
        (None, Some(spec)) => generate(spec).map_err(Failure::graph),
        (None, None) => Err(Failure::args("give --graph or --generator")),
    }
}

fn iterate(g: &Graph, cops: usize, iteration: &Iteration) -> Result<ValueTable, Failure> {
    Ok(value_iterate(g, cops, &iteration.config())?.0)
}

fn fmt_time(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "inf".into()
    }
}

fn parse_start(g: &Graph, cops: usize, text: &str) -> Result<Placement, Failure> {
    let labels: Vec<&str> = text.split(',').map(str::trim).collect();
    if labels.len() != cops + 1 {
        return Err(Failure::args(format!(
            "--start needs {cops} cop label(s) and a robber label, got '{text}'"
        )));
    }
    let (robber, cop_labels) = labels.split_last().expect("non-empty");
    Placement::from_labels(g, cop_labels, robber).map_err(Failure::args)
}

fn handle(
    kind: StrategyKind,
    side: Side,
    mix: &dyn Fn() -> Result<Arc<cccr::concurrent::MixedStrategyTable>, Failure>,
    copwin: &dyn Fn() -> Result<CopwinTable, Failure>,
) -> Result<StrategyHandle, Failure> {
    Ok(match (kind, side) {
        (StrategyKind::MixedTable, _) => StrategyHandle::mixed(mix()?, side),
        (StrategyKind::UniformRandom, _) => StrategyHandle::uniform_random(side),
        (StrategyKind::Stationary, _) => StrategyHandle::stationary(side),
        (StrategyKind::GuessingCop, Side::Cop) => guessing_cop_strategy(&copwin()?)?,
        (StrategyKind::DelayedEvasion, Side::Robber) => delayed_evasion_strategy(&copwin()?)?,
        (kind, side) => {
            return Err(Failure::args(format!(
                "{kind} is not a {} strategy",
                if side == Side::Cop { "cop" } else { "robber" }
            )))
        }
    })
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            source,
            cops,
            iteration,
            format,
            output,
            strict,
        } => {
            let g = load(&source)?;
            let (values, strategies) = value_iterate(&g, cops, &iteration.config())?;
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&solution_doc(&values, &strategies))
                        .map_err(|e| Failure::args(e))?;
                    s.push('\n');
                    s
                }
                Format::Csv => values_to_csv(&values)?,
            };
            match output {
                Some(path) => fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            if !values.converged {
                writeln!(err, "warning: not converged after {} sweeps", values.iterations_used)?;
                if strict {
                    return Err(Failure {
                        code: EXIT_NOT_CONVERGED,
                        message: "value iteration did not converge".into(),
                    });
                }
            }
        }
        Command::CopNumber { source, max_cops } => {
            let g = load(&source)?;
            if max_cops == 0 {
                return Err(Failure::args("--max-cops must be at least 1"));
            }
            match cop_number(&g, max_cops)? {
                Some(k) => writeln!(out, "{k}")?,
                None => writeln!(out, "more than {max_cops}")?,
            }
        }
        Command::CaptureTime {
            source,
            cops,
            iteration,
        } => {
            let g = load(&source)?;
            let values = iterate(&g, cops, &iteration)?;
            let turn_based = solve_copwin(&g, cops)?.capture_time();
            writeln!(out, "concurrent: {}", fmt_time(values.capture_time()))?;
            writeln!(out, "turn-based: {}", turn_based.map_or("inf".to_string(), |t| t.to_string()))?;
        }
        Command::Simulate {
            source,
            cops,
            cop_strategy,
            robber_strategy,
            start,
            episodes,
            horizon,
            seed,
            trace,
            iteration,
        } => {
            let g = load(&source)?;
            let start = parse_start(&g, cops, &start)?;
            let mix_cell = std::cell::OnceCell::new();
            let mix = || -> Result<_, Failure> {
                if let Some(m) = mix_cell.get() {
                    return Ok(Arc::clone(m));
                }
                let (_, m) = value_iterate(&g, cops, &iteration.config())?;
                Ok(Arc::clone(mix_cell.get_or_init(|| Arc::new(m))))
            };
            let copwin = || Ok(solve_copwin(&g, cops)?);
            let cop = handle(cop_strategy, Side::Cop, &mix, &copwin)?;
            let robber = handle(robber_strategy, Side::Robber, &mix, &copwin)?;
            if trace {
                let t = run_episode(&g, &cop, &robber, &start, horizon, seed)?;
                out.write_all(t.to_json_lines(&g).as_bytes())?;
            } else {
                let e = estimate_value(&g, &cop, &robber, &start, episodes, horizon, seed)?;
                let summary = serde_json::json!({
                    "cop_strategy": cop_strategy.name(),
                    "robber_strategy": robber_strategy.name(),
                    "start": { "cops": start.cop_labels(&g), "robber": g.label(start.robber) },
                    "horizon": horizon,
                    "seed": seed,
                    "estimate": e,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&summary).map_err(Failure::args)?)?;
            }
        }
        Command::Gen { spec } => {
            let g = generate(&spec).map_err(Failure::graph)?;
            out.write_all(g.to_edge_list().as_bytes())?;
        }
        Command::Serve { port, bind, static_dir } => {
            if let Some(dir) = &static_dir {
                if !dir.is_dir() {
                    return Err(Failure::args(format!("{} is not a directory", dir.display())));
                }
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(SocketAddr::new(bind, port), static_dir))?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGS } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
