use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use diffusion_consensus::graph::{
    optimal_core_weights, BudgetRule, CoreTopology, WeightedGraph,
};
use diffusion_consensus::oracle::{
    active_subgraph, build_full_graph, empirical_decay_rate, random_initial_state,
    random_unit_mean_profile, sample_profile, simulate_consensus, sturm_liouville_smallest_eig,
    write_state_dump, FullGraphSpec, SimulationOptions, SparseLaplacian, POWER_ITERATIONS,
};
use diffusion_consensus::rate::{core_rates, log_grid, rate_curve, solve_mu, DiffusionScale, ThetaKind};
use diffusion_consensus::spectral::lambda2;
use diffusion_consensus::star::{
    robustness_curve, robustness_from_spectrum, star_spectrum, Parity, StarSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::output::{emit, Cell, Style, Table};
use crate::{StarView, TopologyArg};

/// Largest active graph whose `λ₂` is also computed densely in `simulate`.
const DENSE_LIMIT: usize = 600;
/// Target number of recorded samples in a trace.
const TRACE_SAMPLES: usize = 2000;

fn scale(theta: f64) -> Result<DiffusionScale> {
    Ok(DiffusionScale::new(theta)?)
}

fn budget_name(rule: BudgetRule) -> Value {
    match rule {
        BudgetRule::Vertices => json!("vertices"),
        BudgetRule::Edges => json!("edges"),
        BudgetRule::Explicit(d) => json!(d),
    }
}

fn topology(arg: TopologyArg, n: usize) -> Result<CoreTopology> {
    let t = match arg {
        TopologyArg::Path => CoreTopology::path(n)?,
        TopologyArg::Cycle => CoreTopology::cycle(n)?,
        TopologyArg::Complete => CoreTopology::complete(n)?,
        TopologyArg::Star => CoreTopology::star(n)?,
        TopologyArg::Lollipop if n == 4 => CoreTopology::lollipop(),
        TopologyArg::Paw if n == 4 => CoreTopology::paw(),
        TopologyArg::Lollipop | TopologyArg::Paw => {
            return Err(CliError::Config(format!("{arg:?} is only defined for n = 4")))
        }
        TopologyArg::Custom => {
            return Err(CliError::Config("custom topology needs --graph".into()))
        }
    };
    Ok(t)
}

fn format_weights(g: &WeightedGraph, rounding: bool) -> String {
    g.edges()
        .iter()
        .map(|&(i, j, w)| {
            if rounding {
                format!("{i}-{j}:{w:.4}")
            } else {
                format!("{i}-{j}:{w}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn table_n4(theta: f64, style: Style, out: Option<&Path>) -> Result<()> {
    let th = scale(theta)?;
    let mut t = Table::new(vec![
        "topology",
        "budget_rule",
        "budget",
        "lambda2",
        "mu_constant",
        "mu_variable",
        "weights",
    ]);
    for core in CoreTopology::n4_catalog() {
        for (rule, name) in [(BudgetRule::Vertices, "vertices"), (BudgetRule::Edges, "edges")] {
            let row = core_rates(&core, rule, th)?;
            let g = optimal_core_weights(&core, rule.budget_for(&core)?)?;
            t.push(vec![
                core.kind.name().into(),
                name.into(),
                row.budget.into(),
                row.lambda2.into(),
                row.mu_constant.into(),
                row.mu_variable.into(),
                format_weights(&g, style.paper_rounding).into(),
            ]);
        }
    }
    emit(&t, style, json!({"command": "table-n4", "theta": theta}), None, out)
}

pub fn table_rates(
    families: &[TopologyArg],
    (lo, hi): (usize, usize),
    rule: BudgetRule,
    theta: f64,
    style: Style,
    out: Option<&Path>,
) -> Result<()> {
    let th = scale(theta)?;
    let families = if families.is_empty() {
        vec![TopologyArg::Complete, TopologyArg::Path, TopologyArg::Cycle]
    } else {
        families.to_vec()
    };
    let mut t = Table::new(vec![
        "topology",
        "n",
        "budget",
        "lambda2",
        "mu_constant",
        "mu_variable",
        "ratio",
    ]);
    for &fam in &families {
        for n in lo..=hi {
            let row = core_rates(&topology(fam, n)?, rule, th)?;
            t.push(vec![
                row.topology.into(),
                row.n.into(),
                row.budget.into(),
                row.lambda2.into(),
                row.mu_constant.into(),
                row.mu_variable.into(),
                row.ratio.into(),
            ]);
        }
    }
    let config = json!({
        "command": "table-rates",
        "n": [lo, hi],
        "budget": budget_name(rule),
        "theta": theta,
    });
    emit(&t, style, config, None, out)
}

pub fn mu_curve(
    (lo, hi): (f64, f64),
    points: usize,
    theta: f64,
    style: Style,
    out: Option<&Path>,
) -> Result<()> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(CliError::Config(format!(
            "need 0 < lambda-min < lambda-max and at least 2 points (got {lo}, {hi}, {points})"
        )));
    }
    let curve = rate_curve(&log_grid(lo, hi, points), scale(theta)?)?;
    let mut t = Table::new(vec!["lambda", "mu_constant", "mu_variable", "ratio"]);
    for pt in curve {
        t.push(vec![
            pt.lambda.into(),
            pt.mu_constant.into(),
            pt.mu_variable.into(),
            pt.ratio().into(),
        ]);
    }
    let config = json!({
        "command": "mu-curve",
        "lambda_min": lo,
        "lambda_max": hi,
        "points": points,
        "theta": theta,
    });
    emit(&t, style, config, None, out)
}

pub fn star(
    view: StarView,
    p: usize,
    modes: Option<usize>,
    theta: f64,
    style: Style,
    out: Option<&Path>,
) -> Result<()> {
    let modes = modes.unwrap_or(match view {
        StarView::Robustness => 100_000,
        StarView::Spectrum => 10,
    });
    let config = json!({
        "command": "star",
        "view": format!("{view:?}").to_lowercase(),
        "p": p,
        "modes": modes,
        "theta": theta,
    });
    let t = match view {
        StarView::Robustness => {
            if p < 2 {
                return Err(CliError::Config("robustness view needs p >= 2".into()));
            }
            let mut t = Table::new(vec![
                "p",
                "h_constant",
                "h_variable",
                "ratio",
                "h_constant_series",
                "h_variable_series",
            ]);
            for row in robustness_curve(2..=p, theta)? {
                let s = StarSpec::continuum(row.p, theta)?;
                let series = |kind| -> Result<f64> {
                    let spec = star_spectrum(&s, kind, modes)?;
                    Ok(robustness_from_spectrum(&spec, 1e-3)?.h)
                };
                t.push(vec![
                    row.p.into(),
                    row.h_constant.into(),
                    row.h_variable.into(),
                    row.ratio.into(),
                    series(ThetaKind::Constant)?.into(),
                    series(ThetaKind::Variable)?.into(),
                ]);
            }
            t
        }
        StarView::Spectrum => {
            let s = StarSpec::continuum(p, theta)?;
            let mut t = Table::new(vec!["kind", "parity", "k", "mu", "degeneracy"]);
            for kind in [ThetaKind::Constant, ThetaKind::Variable] {
                for m in star_spectrum(&s, kind, modes)?.modes {
                    let parity = match m.parity {
                        Parity::Even => "even",
                        Parity::Odd => "odd",
                    };
                    t.push(vec![
                        kind.name().into(),
                        parity.into(),
                        m.k.into(),
                        m.mu.into(),
                        m.degeneracy.into(),
                    ]);
                }
            }
            t
        }
    };
    emit(&t, style, config, None, out)
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub topology: TopologyArg,
    pub n: usize,
    pub budget: BudgetRule,
    pub graph: Option<PathBuf>,
    pub kind: ThetaKind,
    pub q: usize,
    pub theta: f64,
    pub seed: u64,
    pub dt: Option<f64>,
    pub window: (f64, f64),
    pub dump: Option<PathBuf>,
}

pub fn simulate(cfg: &SimulateConfig, style: Style, out: Option<&Path>) -> Result<()> {
    let th = scale(cfg.theta)?;
    let core = match (cfg.topology, &cfg.graph) {
        (TopologyArg::Custom, Some(path)) => WeightedGraph::read_from(BufReader::new(File::open(path)?))?,
        (TopologyArg::Custom, None) => {
            return Err(CliError::Config("custom topology needs --graph".into()))
        }
        (arg, _) => {
            let t = topology(arg, cfg.n)?;
            optimal_core_weights(&t, cfg.budget.budget_for(&t)?)?
        }
    };
    if cfg.window.0 < 0.0 || cfg.window.1 <= cfg.window.0 {
        return Err(CliError::Config(format!("bad fit window {:?}", cfg.window)));
    }
    let core_l2 = lambda2(&core)?;
    let mu_hat = solve_mu(cfg.kind, core_l2, th, 1)?.mu;

    let full = build_full_graph(&FullGraphSpec {
        core,
        q: cfg.q,
        kind: cfg.kind,
        theta: th,
    })?;
    // Zero-weight tips never move and would pin the disagreement.
    let (g, _) = active_subgraph(&full)?;
    let graph_l2 = if g.n() <= DENSE_LIMIT {
        Some(lambda2(&g)?)
    } else {
        None
    };

    let horizon = cfg.window.1 / mu_hat;
    let lambda_max = SparseLaplacian::new(&g).lambda_max_estimate(POWER_ITERATIONS);
    let dt_guess = cfg.dt.unwrap_or(0.5 / lambda_max);
    let steps = (horizon / dt_guess).ceil() as usize;
    let opts = SimulationOptions {
        dt: cfg.dt,
        horizon,
        record_every: (steps / TRACE_SAMPLES).max(1),
        keep_states: cfg.dump.is_some(),
    };
    let x0 = random_initial_state(g.n(), cfg.seed);
    let mut trace = simulate_consensus(&g, &x0, &opts)?;
    trace.seed = Some(cfg.seed);
    let window = (cfg.window.0 / mu_hat, cfg.window.1 / mu_hat);
    let rate = empirical_decay_rate(&trace, window)?;

    if let Some(path) = &cfg.dump {
        let mut side = path.clone().into_os_string();
        side.push(".json");
        write_state_dump(&trace, File::create(path)?, File::create(side)?)?;
    }

    let summary = json!({
        "vertices": g.n(),
        "dropped_vertices": full.n() - g.n(),
        "edges": g.edge_count(),
        "dt": trace.dt,
        "lambda_max": trace.lambda_max,
        "core_lambda2": core_l2,
        "graph_lambda2": graph_l2,
        "continuum_mu": mu_hat,
        "window": [window.0, window.1],
        "empirical_rate": rate,
        "relative_error": (rate - mu_hat) / mu_hat,
        "sum_drift": trace.final_sum - trace.initial_sum,
    });
    eprintln!(
        "empirical rate {rate:.6}  continuum mu {mu_hat:.6}  relative error {:+.3e}",
        (rate - mu_hat) / mu_hat
    );
    let mut t = Table::new(vec!["t", "disagreement"]);
    for (&time, &d) in trace.times.iter().zip(&trace.disagreement) {
        t.push(vec![time.into(), d.into()]);
    }
    let config = json!({
        "command": "simulate",
        "topology": format!("{:?}", cfg.topology).to_lowercase(),
        "n": cfg.n,
        "budget": budget_name(cfg.budget),
        "graph": cfg.graph.as_ref().map(|p| p.display().to_string()),
        "kind": cfg.kind.name(),
        "q": cfg.q,
        "theta": cfg.theta,
        "seed": cfg.seed,
        "dt": cfg.dt,
    });
    emit(&t, style, config, Some(summary), out)
}

pub fn sturm_check(
    m: usize,
    samples: usize,
    seed: u64,
    theta: f64,
    style: Style,
    out: Option<&Path>,
) -> Result<()> {
    let th = scale(theta)?.value();
    let mut profiles: Vec<(String, Vec<f64>)> = vec![
        ("optimal".into(), sample_profile(m, |x| 1.5 * th * (1.0 - x * x))),
        ("constant".into(), vec![th; m + 1]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let p = random_unit_mean_profile(&mut rng, m);
        profiles.push((format!("random-{i}"), p.iter().map(|v| v * th).collect()));
    }
    let mut t = Table::new(vec!["profile", "mu", "mu_over_optimal"]);
    let mut best = f64::NAN;
    let mut all_below = true;
    for (name, prof) in &profiles {
        let mu = sturm_liouville_smallest_eig(prof)?;
        if best.is_nan() {
            best = mu;
        } else if mu > best {
            all_below = false;
        }
        t.push(vec![name.clone().into(), Cell::Num(mu), (mu / best).into()]);
    }
    eprintln!("optimal mu {best:.6} (expected {:.6}); optimal is largest: {all_below}", 3.0 * th);
    let config = json!({
        "command": "sturm-check",
        "m": m,
        "samples": samples,
        "seed": seed,
        "theta": theta,
    });
    let summary = json!({"optimal_mu": best, "expected": 3.0 * th, "optimal_is_largest": all_below});
    emit(&t, style, config, Some(summary), out)
}
