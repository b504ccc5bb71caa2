//! Command-line front end: instance generation, solving, evaluation,
//! verification and structural analysis with exact rational output.
//!
//! Exit codes: 0 on success, 1 when a verification finds a violation,
//! 2 on usage, parse or desk-scale cap errors.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rfot::model::text::{
    parse_instance, parse_solution, write_instance, write_tr, write_triples, Solution,
};
use rfot::model::{fmt_rat, validate_instance, Instance, Rational};
use rfot::{analysis, evaluation, generators, solvers, Caps};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rfot",
    version,
    about = "Exact solvers and analysis for budget-robust maximum flows over time"
)]
struct Cli {
    /// Maximum number of enumerated simple paths.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap_paths: u64,

    /// Maximum number of enumerated scenarios.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    cap_scenarios: u64,

    /// Maximum LP constraint-matrix nonzeros.
    #[arg(long, global = true, default_value_t = 50_000)]
    cap_lp_nonzeros: u64,

    /// Additionally render values with this many decimal digits (as
    /// comments; the exact rational output is unaffected).
    #[arg(long, global = true)]
    decimal: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct an instance family.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Optimal robust temporally repeated flow.
    SolveTr {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Also write the solution to a file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Dump the LP in plain text (exact mode only).
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Optimal general (dispatch-triple) robust solution.
    SolveGeneral {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Exact robust value of a solution file.
    RobustValue {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Worst-case scenario of a solution file.
    WorstScenario {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Check feasibility of a solution under every scenario.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Structural parameters (T-boundedness, k, eta, optionally gap/bound).
    Analyze {
        instance: PathBuf,
        /// Also solve both models for the optimality gap and the
        /// asymptotic bound.
        #[arg(long)]
        gap: bool,
    },
    /// Solve a family for a range of r and tabulate the optimality gap.
    GapSweep {
        family: SweepFamily,
        /// Inclusive range, e.g. 2..5
        #[arg(long)]
        r_range: String,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Parallel edges with complementary travel times and delays
    /// (temporally repeated optimum 1/H_r, general optimum 1).
    LogGap {
        r: u64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the robust-value-1 certificate solution.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Two layers of parallel edges with infinite delays (temporally
    /// repeated optimum 1/r, general optimum 1).
    LinearGap {
        r: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Feasibility-hardness gadget from the clique problem. GRAPH is
    /// `k<N>`, `c<N>`, or an edge-list file; the candidate solution is
    /// infeasible iff the graph has an r-clique.
    Clique {
        graph: String,
        r: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the candidate solution.
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
    /// Integral-hardness gadget from two edge-disjoint paths. GRAPH is an
    /// edge-list file of a directed graph; terminals are vertex numbers.
    DisjointPaths {
        graph: PathBuf,
        s1: usize,
        s2: usize,
        d1: usize,
        d2: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Static robust flow embedding: keeps graph, capacities and budget of
    /// an instance file, sets T = 1, tau = 0, delta = inf.
    Static {
        from: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Compact,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFamily {
    LogGap,
    LinearGap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let caps = Caps {
        max_paths: cli.cap_paths,
        max_scenarios: cli.cap_scenarios,
        max_lp_nonzeros: cli.cap_lp_nonzeros,
    };
    match run(&cli.command, &caps, cli.decimal) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `p/q` rendered with `digits` decimal places, rounded to nearest.
fn decimal_string(r: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let num = r.numer() * &scale;
    let den = r.denom();
    let two = BigInt::from(2);
    let q: BigInt = (num.abs() * &two + den) / (den * &two);
    let int_part = &q / &scale;
    let frac = &q % &scale;
    let sign = if r.is_negative() && !q.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac:0digits$}", digits = digits as usize)
    }
}

fn decimal_note(r: &Rational, decimal: Option<u32>) -> String {
    match decimal {
        Some(d) => format!(" (~{})", decimal_string(r, d)),
        None => String::new(),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("in {}", path.display()))?;
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!(
            "{} is not a valid instance: {}",
            path.display(),
            list.join("; ")
        );
    }
    Ok(inst)
}

fn load_solution(path: &Path, inst: &Instance) -> anyhow::Result<Solution> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_solution(&text, inst).with_context(|| format!("in {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Parses `k<N>`, `c<N>`, or an undirected edge-list file.
fn parse_undirected(spec: &str) -> anyhow::Result<generators::UndirectedGraph> {
    if let Some(n) = spec.strip_prefix('k').and_then(|s| s.parse::<usize>().ok()) {
        return Ok(generators::UndirectedGraph::complete(n));
    }
    if let Some(n) = spec.strip_prefix('c').and_then(|s| s.parse::<usize>().ok()) {
        if n < 3 {
            bail!("cycle graphs need at least 3 vertices");
        }
        return Ok(generators::UndirectedGraph::cycle(n));
    }
    let edges = parse_edge_list(Path::new(spec))?;
    let n = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
    Ok(generators::UndirectedGraph::new(n, edges)?)
}

/// Edge list file: one `u v` pair per line, vertices numbered from 1,
/// `#` comments.
fn parse_edge_list(path: &Path) -> anyhow::Result<Vec<(usize, usize)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 2 {
            bail!("{}:{}: expected `<u> <v>`", path.display(), i + 1);
        }
        let u: usize = toks[0]
            .parse()
            .map_err(|_| anyhow!("{}:{}: invalid vertex `{}`", path.display(), i + 1, toks[0]))?;
        let v: usize = toks[1]
            .parse()
            .map_err(|_| anyhow!("{}:{}: invalid vertex `{}`", path.display(), i + 1, toks[1]))?;
        edges.push((u, v));
    }
    Ok(edges)
}

fn run(command: &Command, caps: &Caps, decimal: Option<u32>) -> anyhow::Result<ExitCode> {
    match command {
        Command::Generate { family } => {
            generate(family, caps)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::SolveTr {
            instance,
            mode,
            output,
            dump_lp,
        } => {
            let inst = load_instance(instance)?;
            if let Some(path) = dump_lp {
                match mode {
                    Mode::Exact => {
                        let built = solvers::build_tr_exact_lp(&inst, caps)?;
                        write_file(path, &built.lp.write_lp())?;
                    }
                    Mode::Compact => bail!("--dump-lp is only supported with --mode exact"),
                }
            }
            let result = match mode {
                Mode::Exact => solvers::solve_tr_exact(&inst, caps)?,
                Mode::Compact => solvers::solve_tr_compact(&inst, caps)?,
            };
            let mode_name = match result.mode {
                solvers::TrMode::ScenarioEnumeration => "exact",
                solvers::TrMode::CompactColumnGeneration => "compact",
            };
            let mut text = format!(
                "# robust value = {}{}\n# mode = {}\n",
                fmt_rat(&result.robust_value),
                decimal_note(&result.robust_value, decimal),
                mode_name
            );
            text.push_str(&write_tr(&result.flow, &inst));
            print!("{text}");
            if let Some(path) = output {
                write_file(path, &text)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::SolveGeneral {
            instance,
            output,
            dump_lp,
        } => {
            let inst = load_instance(instance)?;
            if let Some(path) = dump_lp {
                let built = solvers::build_general_lp(&inst, caps)?;
                write_file(path, &built.lp.write_lp())?;
            }
            let result = solvers::solve_general(&inst, caps)?;
            let mut text = format!(
                "# robust value = {}{}\n",
                fmt_rat(&result.robust_value),
                decimal_note(&result.robust_value, decimal)
            );
            text.push_str(&write_triples(&result.solution, &inst));
            print!("{text}");
            if let Some(path) = output {
                write_file(path, &text)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::RobustValue { instance, solution } => {
            let inst = load_instance(instance)?;
            let report = evaluate(&inst, solution, caps)?;
            println!(
                "robust-value {}{}",
                fmt_rat(&report.robust_value),
                decimal_note(&report.robust_value, decimal)
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::WorstScenario { instance, solution } => {
            let inst = load_instance(instance)?;
            let report = evaluate(&inst, solution, caps)?;
            println!(
                "scenario z={} value={}{}",
                report.worst_scenario.display(&inst),
                fmt_rat(&report.robust_value),
                decimal_note(&report.robust_value, decimal)
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify { instance, solution } => {
            let inst = load_instance(instance)?;
            match load_solution(solution, &inst)? {
                Solution::Triples(sol) => {
                    match evaluation::verify_feasibility(&inst, &sol, caps)? {
                        evaluation::Feasibility::Feasible => {
                            println!("feasible");
                            Ok(ExitCode::SUCCESS)
                        }
                        evaluation::Feasibility::Violated(v) => {
                            println!("{}", v.display(&inst));
                            Ok(ExitCode::from(1))
                        }
                    }
                }
                // a temporally repeated flow is feasible under every
                // scenario exactly when its static loads fit the capacities
                Solution::TemporallyRepeated(flow) => match flow.first_overload(&inst) {
                    None => {
                        println!("feasible");
                        Ok(ExitCode::SUCCESS)
                    }
                    Some((e, load)) => {
                        let edge = inst.edge(e);
                        println!(
                            "violation e={} t=0 z= load={} u={}",
                            edge.id,
                            fmt_rat(&load),
                            edge.capacity
                        );
                        Ok(ExitCode::from(1))
                    }
                },
            }
        }

        Command::Analyze { instance, gap } => {
            let inst = load_instance(instance)?;
            let report = analysis::analyze(&inst, *gap, caps)?;
            println!("{}", report.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::GapSweep { family, r_range } => {
            let (lo, hi) = r_range
                .split_once("..")
                .and_then(|(a, b)| Some((a.parse::<u64>().ok()?, b.parse::<u64>().ok()?)))
                .ok_or_else(|| anyhow!("--r-range expects `<lo>..<hi>` (inclusive)"))?;
            if lo < 2 || hi < lo {
                bail!("--r-range needs 2 <= lo <= hi");
            }
            println!("# r tr general gap");
            for r in lo..=hi {
                let (inst, _) = match family {
                    SweepFamily::LogGap => generators::gen_log_gap(r),
                    SweepFamily::LinearGap => generators::gen_linear_gap(r),
                };
                let tr = solvers::solve_tr_exact(&inst, caps)?;
                let general = solvers::solve_general(&inst, caps)?;
                let gap = analysis::optimality_gap(&inst, caps)?;
                println!(
                    "{} {} {} {}",
                    r,
                    fmt_rat(&tr.robust_value),
                    fmt_rat(&general.robust_value),
                    gap.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn generate(family: &Family, _caps: &Caps) -> anyhow::Result<()> {
    match family {
        Family::LogGap {
            r,
            output,
            certificate,
        } => {
            if *r < 2 {
                bail!("log-gap needs r >= 2");
            }
            let (inst, cert) = generators::gen_log_gap(*r);
            write_file(output, &write_instance(&inst))?;
            if let Some(path) = certificate {
                write_file(path, &write_triples(&cert, &inst))?;
            }
        }
        Family::LinearGap {
            r,
            output,
            certificate,
        } => {
            if *r < 2 {
                bail!("linear-gap needs r >= 2");
            }
            let (inst, cert) = generators::gen_linear_gap(*r);
            write_file(output, &write_instance(&inst))?;
            if let Some(path) = certificate {
                write_file(path, &write_triples(&cert, &inst))?;
            }
        }
        Family::Clique {
            graph,
            r,
            output,
            candidate,
        } => {
            let g = parse_undirected(graph)?;
            let (inst, cand) = generators::gen_clique_reduction(&g, *r)?;
            write_file(output, &write_instance(&inst))?;
            if let Some(path) = candidate {
                write_file(path, &write_triples(&cand, &inst))?;
            }
        }
        Family::DisjointPaths {
            graph,
            s1,
            s2,
            d1,
            d2,
            output,
        } => {
            let edges = parse_edge_list(graph)?;
            let n = edges
                .iter()
                .flat_map(|&(u, v)| [u, v])
                .chain([*s1, *s2, *d1, *d2])
                .max()
                .unwrap_or(0);
            let g = generators::DirectedGraph { n, edges };
            let inst = generators::gen_disjoint_paths_reduction(&g, *s1, *s2, *d1, *d2)?;
            write_file(output, &write_instance(&inst))?;
        }
        Family::Static { from, output } => {
            let base = load_instance(from)?;
            let data = generators::static_data_of(&base);
            let inst = generators::gen_static_embedding(&data)?;
            write_file(output, &write_instance(&inst))?;
        }
    }
    Ok(())
}
