//! `trip` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 malformed input, 4 limit
//! reached, 5 invalid or infeasible input, 6 too large for enumeration,
//! 7 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use trip::bnb::{solve, BranchRule, SolveResult, SolveStatus, SolverConfig, TOOL_COMBINATIONS};
use trip::cuts::{box_cut, fc_cut, Cut};
use trip::dualdecomp::{dd_ascent, dd_certificate, StepRule};
use trip::heuristic::improve;
use trip::instance::{capacity_used, gen_random, read_instance, write_instance};
use trip::num::{format_rational, parse_rational, rat};
use trip::oracle::brute_force_ip;
use trip::relax::{papprox_certificate, solve_lr};
use trip::simplex::{build_lp, extract_components, solve_lp, SimplexOptions};
use trip::slip::{quadratic_tracking_oracle, run_slip, SlipOptions};
use trip::{Error, Grid, IntStep, Rational, TripInstance};

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_INVALID: u8 = 5;
const EXIT_TOO_LARGE: u8 = 6;
const EXIT_NUMERICAL: u8 = 7;

const CSV_HEADER: &str =
    "instance,tools,status,objective,bound,gap,nodes,cuts_fc,cuts_box,heur_improves,seconds";

#[derive(Parser)]
#[command(
    name = "trip",
    version,
    about = "Integer total-variation trust-region subproblem solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branch and cut to optimality or a limit.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Print the optimal step after the result row.
        #[arg(long)]
        show_step: bool,
        /// Write the per-node trace as CSV to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Root LP relaxation and its fractional structure.
    Lp { instance: PathBuf },
    /// Lagrangian relaxation of the capacity constraint.
    Lr { instance: PathBuf },
    /// Dual decomposition bound by subgradient ascent.
    Dd {
        instance: PathBuf,
        #[arg(long, default_value_t = 50)]
        iters: usize,
    },
    /// Cuts generated at the root LP vertex with their violations.
    Cuts {
        instance: PathBuf,
        #[arg(long, default_value = "fc,box")]
        cuts: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Line-DP improvement from a warm start (zero step if omitted).
    Improve {
        instance: PathBuf,
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Exhaustive optimum.
    Oracle { instance: PathBuf },
    /// Trust-region loop on a quadratic tracking objective.
    Slip {
        /// Grid of target values, one row per line.
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value = "0.1")]
        alpha: String,
        #[arg(long)]
        delta0: String,
        #[arg(long, default_value_t = 0)]
        xi_lo: i64,
        #[arg(long, default_value_t = 1)]
        xi_hi: i64,
        /// Initial control grid; all `xi_lo` if omitted.
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        max_outer: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Seeded random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        xi_lo: i64,
        #[arg(long, default_value_t = 1)]
        xi_hi: i64,
        #[arg(long)]
        delta: i64,
        #[arg(long, default_value = "1")]
        cost_scale: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solves a seeded suite under every tool combination.
    Bench {
        #[arg(long, value_enum, default_value_t = Suite::Random8)]
        suite: Suite,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = Table::Rows)]
        table: Table,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// 4x4, binary, capacity 2.
    Small,
    /// 8x8, binary, capacity 4.
    Random8,
    /// 16x16, binary, capacity 16.
    Random16,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Small => "small",
            Suite::Random8 => "random8",
            Suite::Random16 => "random16",
        }
    }

    fn instance(self, seed: u64) -> trip::Result<TripInstance> {
        let (n, delta) = match self {
            Suite::Small => (4, 2),
            Suite::Random8 => (8, 4),
            Suite::Random16 => (16, 16),
        };
        gen_random(seed, n, n, 0, 1, delta, rat(3))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    /// One result row per instance and tool combination.
    Rows,
    /// One row per instance with a node-count column per tool combination.
    Nodes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Branch {
    EvenRows,
    MostFrac,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Relative gap at which the search stops.
    #[arg(long, default_value_t = 1e-3)]
    gap: f64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Comma-separated subset of fc,box, or none.
    #[arg(long, default_value = "fc,box")]
    cuts: String,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    heuristic: Switch,
    #[arg(long, value_enum, default_value_t = Branch::EvenRows)]
    branch: Branch,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cut_families(list: &str) -> anyhow::Result<(bool, bool)> {
    let (mut fc, mut bx) = (false, false);
    for part in list.split(',').map(str::trim) {
        match part {
            "fc" => fc = true,
            "box" => bx = true,
            "none" => {}
            other => bail!(Error::OutOfRange(format!("unknown cut family '{other}'"))),
        }
    }
    Ok((fc, bx))
}

impl SolverArgs {
    fn config(&self) -> anyhow::Result<SolverConfig> {
        let (use_fc_cut, use_box_cut) = cut_families(&self.cuts)?;
        Ok(SolverConfig {
            gap_tol: self.gap,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.nodes,
            use_fc_cut,
            use_box_cut,
            heuristic_on: self.heuristic == Switch::On,
            branch_rule: match self.branch {
                Branch::EvenRows => BranchRule::EvenRowsFirst,
                Branch::MostFrac => BranchRule::MostFractional,
            },
            rng_seed: self.seed,
            ..SolverConfig::default()
        })
    }

    /// Limits and seed from the flags, tools from the combination name.
    fn config_for(&self, tools: &str) -> anyhow::Result<SolverConfig> {
        Ok(SolverConfig {
            gap_tol: self.gap,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.nodes,
            rng_seed: self.seed,
            ..SolverConfig::for_tools(tools)?
        })
    }
}

fn tools_name(cfg: &SolverConfig) -> String {
    let mut parts = Vec::new();
    if cfg.heuristic_on {
        parts.push("p");
    }
    if cfg.branch_rule == BranchRule::EvenRowsFirst {
        parts.push("b");
    }
    if cfg.use_fc_cut || cfg.use_box_cut {
        parts.push("c");
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join("-")
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin()).context("reading stdin");
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<TripInstance> {
    Ok(read_instance(&read_text(path)?)?)
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "stdin".into(), |s| s.to_string_lossy().into_owned())
}

/// Whitespace-separated grid, one row per line, `#` comments.
fn read_grid<T: Clone>(path: &Path, parse: impl Fn(&str) -> Option<T>) -> anyhow::Result<Grid<T>> {
    let text = read_text(path)?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let row = content
            .split_whitespace()
            .map(|tok| {
                parse(tok).ok_or_else(|| trip::ParseError::BadNumber {
                    line: k + 1,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<T>, _>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(Grid::from_rows(rows)?)
}

fn grid_text<T>(g: &Grid<T>, fmt: impl Fn(&T) -> String) -> String {
    let mut s = String::new();
    for i in 0..g.rows() {
        let row: Vec<String> = g.row(i).iter().map(&fmt).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn step_text(d: &IntStep) -> String {
    grid_text(d, i64::to_string)
}

fn result_row(instance: &str, tools: &str, r: &SolveResult, secs: f64) -> String {
    format!(
        "{instance},{tools},{},{},{},{},{},{},{},{},{secs:.3}",
        r.status.name(),
        format_rational(r.objective),
        r.bound,
        r.gap,
        r.nodes,
        r.cuts_fc,
        r.cuts_box,
        r.heuristic_improvements,
    )
}

fn within_limits(status: SolveStatus) -> bool {
    matches!(status, SolveStatus::Optimal | SolveStatus::GapLimit)
}

/// Error raised after output has been written, to set the exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct LimitReached(String);

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve {
            instance,
            solver,
            show_step,
            trace,
        } => {
            let inst = load_instance(&instance)?;
            let mut cfg = solver.config()?;
            cfg.trace = trace.is_some();
            let start = Instant::now();
            let r = solve(&inst, &cfg)?;
            let secs = start.elapsed().as_secs_f64();
            println!("{CSV_HEADER}");
            println!(
                "{}",
                result_row(&instance_name(&instance), &tools_name(&cfg), &r, secs)
            );
            if show_step {
                print!("{}", step_text(&r.step));
            }
            if let Some(path) = trace {
                std::fs::write(&path, r.trace_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !within_limits(r.status) {
                bail!(LimitReached(format!(
                    "search stopped with status {}",
                    r.status.name()
                )));
            }
        }
        Command::Lp { instance } => {
            let inst = load_instance(&instance)?;
            let sol = solve_lp(&build_lp(&inst, &[])?, &SimplexOptions::default());
            if !sol.is_optimal() {
                bail!(Error::Lp(format!(
                    "status {:?}: {}",
                    sol.status, sol.diagnostics
                )));
            }
            let fa = extract_components(&inst, &sol);
            let sizes: Vec<String> = fa.components.iter().map(|c| c.len().to_string()).collect();
            println!("objective {}", sol.objective);
            println!("iterations {}", sol.iterations);
            println!("integral {}", fa.is_integral);
            println!("fractional {}", fa.fractional.len());
            println!(
                "components {}",
                if sizes.is_empty() {
                    "-".into()
                } else {
                    sizes.join(",")
                }
            );
            println!("g {}", fa.g.len());
            println!("delta_out {}", fa.delta_out);
            println!("delta_r {}", fa.delta_r);
            print!("{}", grid_text(&fa.d, |v| format!("{v}")));
        }
        Command::Lr { instance } => {
            let inst = load_instance(&instance)?;
            let lr = solve_lr(&inst)?;
            let cert = papprox_certificate(&inst, &lr);
            println!("bound {}", format_rational(lr.value));
            println!("mu {}", format_rational(lr.mu_star));
            println!("capacity {}", format_rational(capacity_used(&lr.d_low)));
            println!("p {}", format_rational(cert.p));
            println!("guaranteed {}", cert.guaranteed);
            print!("{}", step_text(&lr.d_low));
        }
        Command::Dd { instance, iters } => {
            let inst = load_instance(&instance)?;
            let st = dd_ascent(&inst, iters, StepRule::Harmonic)?;
            println!("bound {}", format_rational(st.bound));
            println!("value_row {}", format_rational(st.value_row));
            println!("value_col {}", format_rational(st.value_col));
            match dd_certificate(&st) {
                Some(d) => {
                    println!("certified true");
                    print!("{}", step_text(&d));
                }
                None => println!("certified false"),
            }
        }
        Command::Cuts {
            instance,
            cuts,
            seed,
        } => {
            let inst = load_instance(&instance)?;
            let (use_fc, use_box) = cut_families(&cuts)?;
            let lp = build_lp(&inst, &[])?;
            let sol = solve_lp(&lp, &SimplexOptions::default());
            if !sol.is_optimal() {
                bail!(Error::Lp(format!(
                    "status {:?}: {}",
                    sol.status, sol.diagnostics
                )));
            }
            let fa = extract_components(&inst, &sol);
            println!("family,violation,separating,rhs,support,cut");
            if fa.is_integral {
                return Ok(());
            }
            let mut generated: Vec<Cut> = Vec::new();
            if use_fc {
                generated.extend(fc_cut(&inst, &fa, seed)?);
            }
            if use_box {
                generated.extend(box_cut(&inst, &fa)?);
            }
            for cut in generated {
                let v = cut.violation(&lp, &sol.x)?;
                println!(
                    "{},{v:.9},{},{},{},\"{}\"",
                    cut.family.name(),
                    v > trip::cuts::MIN_VIOLATION,
                    format_rational(cut.rhs),
                    cut.support.len(),
                    cut.to_text()
                );
            }
        }
        Command::Improve { instance, start } => {
            let inst = load_instance(&instance)?;
            let d0 = match start {
                Some(p) => {
                    let g = read_grid(&p, |t| t.parse::<i64>().ok())?;
                    inst.check_shape(&g)?;
                    g
                }
                None => inst.zero_step(),
            };
            let r = improve(&inst, &d0)?;
            println!("start_objective {}", format_rational(r.start_objective));
            println!("objective {}", format_rational(r.objective));
            println!("improvements {}", r.improvements);
            println!("cycles {}", r.cycles);
            println!("converged {}", r.converged);
            print!("{}", step_text(&r.step));
        }
        Command::Oracle { instance } => {
            let inst = load_instance(&instance)?;
            let r = brute_force_ip(&inst)?;
            println!("objective {}", format_rational(r.objective));
            println!(
                "optima {}{}",
                r.optima.len(),
                if r.ties_truncated { "+" } else { "" }
            );
            print!("{}", step_text(&r.optima[0]));
        }
        Command::Slip {
            target,
            alpha,
            delta0,
            xi_lo,
            xi_hi,
            start,
            max_outer,
            solver,
        } => {
            let target = read_grid(&target, parse_rational)?;
            let alpha = rational_arg("alpha", &alpha)?;
            let delta0 = rational_arg("delta0", &delta0)?;
            let v0 = match start {
                Some(p) => read_grid(&p, |t| t.parse::<i64>().ok())?,
                None => Grid::filled(target.rows(), target.cols(), xi_lo),
            };
            if v0.shape() != target.shape() {
                bail!(Error::ShapeMismatch {
                    expected: target.shape(),
                    got: v0.shape()
                });
            }
            let oracle = quadratic_tracking_oracle(target, alpha);
            let opts = SlipOptions {
                max_outer,
                sub_config: solver.config()?,
                ..SlipOptions::new(delta0)
            };
            let (v, log) = run_slip(&oracle, &v0, xi_lo, xi_hi, &opts)?;
            print!("{}", log.to_csv());
            let terminated = log
                .records
                .last()
                .is_some_and(|r| r.action == trip::slip::SlipAction::Terminate);
            eprint!("{}", step_text(&v));
            if !terminated {
                bail!(LimitReached(format!(
                    "no termination within {max_outer} outer iterations"
                )));
            }
        }
        Command::Gen {
            seed,
            rows,
            cols,
            xi_lo,
            xi_hi,
            delta,
            cost_scale,
            output,
        } => {
            let scale = rational_arg("cost-scale", &cost_scale)?;
            let inst = gen_random(seed, rows, cols, xi_lo, xi_hi, delta, scale)?;
            let text = write_instance(&inst);
            match output {
                Some(p) => {
                    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{text}"),
            }
        }
        Command::Bench {
            suite,
            seeds,
            table,
            threads,
            solver,
        } => bench(suite, seeds, table, threads, &solver)?,
    }
    Ok(())
}

fn rational_arg(name: &str, text: &str) -> anyhow::Result<Rational> {
    parse_rational(text).ok_or_else(|| {
        anyhow!(Error::OutOfRange(format!(
            "--{name}: cannot parse '{text}'"
        )))
    })
}

struct BenchCell {
    result: SolveResult,
    secs: f64,
}

fn bench(
    suite: Suite,
    seeds: u64,
    table: Table,
    threads: Option<usize>,
    solver: &SolverArgs,
) -> anyhow::Result<()> {
    let configs: Vec<SolverConfig> = TOOL_COMBINATIONS
        .iter()
        .map(|t| solver.config_for(t))
        .collect::<anyhow::Result<_>>()?;
    let instances: Vec<TripInstance> = (0..seeds)
        .map(|s| suite.instance(s))
        .collect::<trip::Result<_>>()?;
    let workers = threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, instances.len().max(1));
    let chunk = instances.len().div_ceil(workers).max(1);
    let results: Vec<trip::Result<Vec<BenchCell>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .chunks(chunk)
            .map(|part| {
                let configs = &configs;
                scope.spawn(move || {
                    part.iter()
                        .map(|inst| {
                            configs
                                .iter()
                                .map(|cfg| {
                                    let start = Instant::now();
                                    let result = solve(inst, cfg)?;
                                    Ok(BenchCell {
                                        result,
                                        secs: start.elapsed().as_secs_f64(),
                                    })
                                })
                                .collect()
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });

    let mut out = String::new();
    match table {
        Table::Rows => out.push_str(CSV_HEADER),
        Table::Nodes => {
            out.push_str("instance");
            for t in TOOL_COMBINATIONS {
                let _ = write!(out, ",{t}");
            }
        }
    }
    out.push('\n');
    let mut limited = 0;
    for (seed, cells) in results.into_iter().enumerate() {
        let cells = cells?;
        let name = format!("{}-s{seed}", suite.name());
        limited += cells
            .iter()
            .filter(|c| !within_limits(c.result.status))
            .count();
        match table {
            Table::Rows => {
                for (tools, c) in TOOL_COMBINATIONS.iter().zip(&cells) {
                    out.push_str(&result_row(&name, tools, &c.result, c.secs));
                    out.push('\n');
                }
            }
            Table::Nodes => {
                out.push_str(&name);
                for c in &cells {
                    let _ = write!(out, ",{}", c.result.nodes);
                }
                out.push('\n');
            }
        }
    }
    print!("{out}");
    if limited > 0 {
        bail!(LimitReached(format!("{limited} runs stopped at a limit")));
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<LimitReached>().is_some() {
        return EXIT_LIMIT;
    }
    if err.downcast_ref::<trip::ParseError>().is_some() {
        return EXIT_PARSE;
    }
    match err.downcast_ref::<Error>() {
        Some(e) => error_code(e),
        None => EXIT_IO,
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        Error::TooLarge(_) => EXIT_TOO_LARGE,
        Error::Lp(_) => EXIT_NUMERICAL,
        Error::Subproblem { source, .. } => error_code(source),
        Error::ShapeMismatch { .. }
        | Error::InvalidInstance(_)
        | Error::NonBinary { .. }
        | Error::InfeasibleStep(_)
        | Error::OutOfRange(_)
        | Error::UnknownVariable(_)
        | Error::MixedComponent
        | Error::IntegralSolution => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
