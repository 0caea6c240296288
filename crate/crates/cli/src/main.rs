//! `diffcons`: tables, curves and oracle runs for diffusion-based consensus.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diffusion_consensus::graph::BudgetRule;
use diffusion_consensus::rate::ThetaKind;

use crate::output::{Format, Style};

#[derive(Debug, Parser)]
#[command(name = "diffcons", version, about = "Diffusion-system consensus rates and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Render numbers with four decimals.
    #[arg(long)]
    paper_rounding: bool,
}

impl OutputArgs {
    fn style(&self) -> Style {
        Style {
            format: self.format,
            paper_rounding: self.paper_rounding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Path,
    Cycle,
    Complete,
    Star,
    Lollipop,
    Paw,
    /// Weighted graph read from `--graph`.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Constant,
    Variable,
}

impl From<KindArg> for ThetaKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Constant => ThetaKind::Constant,
            KindArg::Variable => ThetaKind::Variable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StarView {
    Robustness,
    Spectrum,
}

fn parse_budget(s: &str) -> Result<BudgetRule, String> {
    match s {
        "vertices" | "V" => Ok(BudgetRule::Vertices),
        "edges" | "E" => Ok(BudgetRule::Edges),
        _ => match s.parse::<f64>() {
            Ok(d) if d.is_finite() && d > 0.0 => Ok(BudgetRule::Explicit(d)),
            _ => Err(format!("expected vertices, edges or a positive number, got {s:?}")),
        },
    }
}

/// `"7"` or `"5-14"`.
fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected N or LO-HI, got {s:?}");
    match s.split_once('-') {
        Some((a, b)) => {
            let lo = a.trim().parse().map_err(|_| bad())?;
            let hi = b.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            Ok((lo, hi))
        }
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rates for the six connected four-vertex cores under both budget rules.
    TableN4 {
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rates for complete, path and cycle cores over a range of sizes.
    TableRates {
        /// Restrict to these families (repeatable).
        #[arg(long, value_enum)]
        topology: Vec<TopologyArg>,
        /// Vertex count or range, e.g. 5-14.
        #[arg(long, value_parser = parse_range, default_value = "5-14")]
        n: (usize, usize),
        #[arg(long, value_parser = parse_budget, default_value = "vertices")]
        budget: BudgetRule,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Slowest rate of both profiles against the core eigenvalue.
    MuCurve {
        #[arg(long, default_value_t = 1e-3)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1e3)]
        lambda_max: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Symmetric-star spectra and robustness.
    Star {
        #[arg(long, value_enum, default_value_t = StarView::Robustness)]
        view: StarView,
        /// Branch count for the spectrum view; largest branch count for
        /// the robustness view.
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// Mode cutoff K per family [default: 100000 for robustness, 10
        /// for spectrum].
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// RK4 consensus run on a core with tails; prints the decay fit.
    Simulate {
        #[arg(long, value_enum, default_value_t = TopologyArg::Path)]
        topology: TopologyArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_parser = parse_budget, default_value = "vertices")]
        budget: BudgetRule,
        /// Graph file for `--topology custom`; weights are used as given.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = KindArg::Constant)]
        kind: KindArg,
        #[arg(long, default_value_t = 20)]
        q: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step; defaults to half the stability bound.
        #[arg(long)]
        dt: Option<f64>,
        /// Fit window in units of 1/μ.
        #[arg(long, num_args = 2, value_names = ["FROM", "TO"], default_values_t = [2.0, 6.0])]
        window: Vec<f64>,
        /// Also write full states as little-endian f64 plus a JSON sidecar.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Finite-difference check that the quadratic profile maximizes the rate.
    SturmCheck {
        #[arg(long, default_value_t = 400)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> error::Result<()> {
    match cli.command {
        Command::TableN4 { theta, output } => commands::table_n4(theta, output.style(), output.out.as_deref()),
        Command::TableRates {
            topology,
            n,
            budget,
            theta,
            output,
        } => commands::table_rates(&topology, n, budget, theta, output.style(), output.out.as_deref()),
        Command::MuCurve {
            lambda_min,
            lambda_max,
            points,
            theta,
            output,
        } => commands::mu_curve(
            (lambda_min, lambda_max),
            points,
            theta,
            output.style(),
            output.out.as_deref(),
        ),
        Command::Star {
            view,
            p,
            modes,
            theta,
            output,
        } => commands::star(view, p, modes, theta, output.style(), output.out.as_deref()),
        Command::Simulate {
            topology,
            n,
            budget,
            graph,
            kind,
            q,
            theta,
            seed,
            dt,
            window,
            dump,
            output,
        } => commands::simulate(
            &commands::SimulateConfig {
                topology,
                n,
                budget,
                graph,
                kind: kind.into(),
                q,
                theta,
                seed,
                dt,
                window: (window[0], window[1]),
                dump,
            },
            output.style(),
            output.out.as_deref(),
        ),
        Command::SturmCheck {
            m,
            samples,
            seed,
            theta,
            output,
        } => commands::sturm_check(m, samples, seed, theta, output.style(), output.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("diffcons: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
