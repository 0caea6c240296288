//! Discrete checks on the continuum results: the finite core-plus-tails
//! graph, an RK4 integration of `dX/dt = −L X`, decay-rate extraction, and
//! a finite-difference Sturm–Liouville eigenvalue.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};
use crate::rate::{DiffusionScale, ThetaKind};

/// Power iterations used to estimate `λ_max`.
pub const POWER_ITERATIONS: usize = 100;
/// Default step as a fraction of `1/λ_max`.
pub const DEFAULT_STEP_FRACTION: f64 = 0.5;
/// Smallest disagreement trusted by the decay fit.
pub const DISAGREEMENT_FLOOR: f64 = 1e-12;
/// Minimum intervals for the Sturm–Liouville grid.
pub const MIN_SL_INTERVALS: usize = 200;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("tail length must be at least 2, got {0}")]
    ShortTail(usize),
    #[error("step {dt} is not below the stability bound {bound} (1/lambda_max)")]
    UnstableStep { dt: f64, bound: f64 },
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("initial state has length {got}, graph has {want} vertices")]
    DimensionMismatch { got: usize, want: usize },
    #[error("disagreement {value:e} at t = {t} is below the noise floor")]
    Underflow { t: f64, value: f64 },
    #[error("window [{lo}, {hi}] holds {count} samples; need at least 2")]
    SparseWindow { lo: f64, hi: f64, count: usize },
    #[error("grid needs at least {min} intervals, got {got}")]
    CoarseGrid { min: usize, got: usize },
    #[error("diffusion profile must be non-negative, got {value} at sample {index}")]
    NegativeProfile { index: usize, value: f64 },
    #[error("discretization is singular: half-point diffusion vanishes at interval {0}")]
    Singular(usize),
    #[error("inverse iteration did not settle after {0} steps")]
    NonConvergence(usize),
    #[error("trace holds no states")]
    NoStates,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(OracleError::NotPositive { name, value })
    }
}

/// A lattice core (edge weights `𝒲`) with a `q`-edge tail on every vertex.
#[derive(Debug, Clone)]
pub struct FullGraphSpec {
    pub core: WeightedGraph,
    pub q: usize,
    pub kind: ThetaKind,
    pub theta: DiffusionScale,
}

/// Index of vertex `j ≥ 1` on the tail of core vertex `alpha`; core vertices
/// keep their own indices `0..N`.
pub fn tail_vertex(n_core: usize, q: usize, alpha: usize, j: usize) -> usize {
    n_core + alpha * q + (j - 1)
}

/// Weight of tail edge `j` (joining positions `j−1` and `j`).
pub fn tail_weight(kind: ThetaKind, q: usize, theta: DiffusionScale, j: usize) -> f64 {
    let (q, t, j) = (q as f64, theta.value(), j as f64);
    match kind {
        ThetaKind::Constant => q * q * t,
        ThetaKind::Variable => 1.5 * q * q * t * (1.0 - j * j / (q * q)),
    }
}

/// Factor applied to the core weights.
pub fn core_scale(kind: ThetaKind, q: usize, theta: DiffusionScale) -> f64 {
    let s = q as f64 * theta.value();
    match kind {
        ThetaKind::Constant => s,
        ThetaKind::Variable => 1.5 * s,
    }
}

/// Builds the finite graph. For the quadratic profile the last tail edge
/// has weight zero, so each tip vertex is kept but isolated.
pub fn build_full_graph(spec: &FullGraphSpec) -> Result<WeightedGraph> {
    if spec.q < 2 {
        return Err(OracleError::ShortTail(spec.q));
    }
    let n = spec.core.n();
    let q = spec.q;
    let cs = core_scale(spec.kind, q, spec.theta);
    let mut edges: Vec<(usize, usize, f64)> = spec
        .core
        .edges()
        .iter()
        .map(|&(i, j, w)| (i, j, cs * w))
        .collect();
    for alpha in 0..n {
        for j in 1..=q {
            let from = if j == 1 {
                alpha
            } else {
                tail_vertex(n, q, alpha, j - 1)
            };
            edges.push((
                from,
                tail_vertex(n, q, alpha, j),
                tail_weight(spec.kind, q, spec.theta, j),
            ));
        }
    }
    Ok(WeightedGraph::new(n * (q + 1), edges)?)
}

/// Drops vertices without any positive-weight edge. Returns the reduced
/// graph and, for each kept vertex, its index in `g`.
pub fn active_subgraph(g: &WeightedGraph) -> Result<(WeightedGraph, Vec<usize>)> {
    let mut active = vec![false; g.n()];
    for &(i, j, w) in g.edges() {
        if w > 0.0 {
            active[i] = true;
            active[j] = true;
        }
    }
    let kept: Vec<usize> = (0..g.n()).filter(|&i| active[i]).collect();
    let mut new_index = vec![usize::MAX; g.n()];
    for (k, &i) in kept.iter().enumerate() {
        new_index[i] = k;
    }
    let edges = g
        .edges()
        .iter()
        .filter(|e| e.2 > 0.0)
        .map(|&(i, j, w)| (new_index[i], new_index[j], w))
        .collect();
    Ok((WeightedGraph::new(kept.len(), edges)?, kept))
}

/// Compressed Laplacian for repeated products.
#[derive(Debug, Clone)]
pub struct SparseLaplacian {
    degree: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
}

impl SparseLaplacian {
    pub fn new(g: &WeightedGraph) -> Self {
        let adj = g.adjacency();
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut neighbors = Vec::new();
        let mut degree = Vec::with_capacity(g.n());
        offsets.push(0);
        for row in &adj {
            degree.push(row.iter().map(|&(_, w)| w).sum());
            neighbors.extend(row.iter().copied());
            offsets.push(neighbors.len());
        }
        Self {
            degree,
            offsets,
            neighbors,
        }
    }

    pub fn dim(&self) -> usize {
        self.degree.len()
    }

    /// `out = −L x`.
    pub fn neg_apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = -self.degree[i] * x[i];
            for &(j, w) in &self.neighbors[self.offsets[i]..self.offsets[i + 1]] {
                acc += w * x[j];
            }
            out[i] = acc;
        }
    }

    /// Power-iteration estimate of the largest eigenvalue, started from a
    /// fixed alternating vector.
    pub fn lambda_max_estimate(&self, iterations: usize) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -0.7 } + 0.01 * i as f64 / n as f64)
            .collect();
        let mut y = vec![0.0; n];
        let mut est = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            self.neg_apply(&x, &mut y);
            est = -x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            std::mem::swap(&mut x, &mut y);
            x.iter_mut().for_each(|v| *v = -*v);
        }
        // Rayleigh quotients approach λ_max from below.
        est
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    /// Step; `None` picks `0.5 / λ_max`.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Record every this many steps (the final time is always recorded).
    pub record_every: usize,
    pub keep_states: bool,
}

impl SimulationOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            dt: None,
            horizon,
            record_every: 1,
            keep_states: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    /// Full states at `times` when requested, else empty.
    pub states: Vec<Vec<f64>>,
    /// `‖X − mean(X)·1‖₂` at `times`.
    pub disagreement: Vec<f64>,
    pub dt: f64,
    pub lambda_max: f64,
    /// Seed of the initial state, when it was drawn at random.
    pub seed: Option<u64>,
    /// `Σ X` at start and end.
    pub initial_sum: f64,
    pub final_sum: f64,
}

/// Uniform `[0, 1)` initial state from a seeded ChaCha8 stream.
pub fn random_initial_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn disagreement(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt()
}

/// Classical RK4 on `dX/dt = −L X`.
pub fn simulate_consensus(
    g: &WeightedGraph,
    x0: &[f64],
    opts: &SimulationOptions,
) -> Result<SimulationTrace> {
    if x0.len() != g.n() {
        return Err(OracleError::DimensionMismatch {
            got: x0.len(),
            want: g.n(),
        });
    }
    let horizon = positive("horizon", opts.horizon)?;
    let lap = SparseLaplacian::new(g);
    let lambda_max = lap.lambda_max_estimate(POWER_ITERATIONS);
    let bound = if lambda_max > 0.0 {
        1.0 / lambda_max
    } else {
        f64::INFINITY
    };
    let dt = match opts.dt {
        Some(dt) => {
            let dt = positive("dt", dt)?;
            if dt >= bound {
                return Err(OracleError::UnstableStep { dt, bound });
            }
            dt
        }
        None if bound.is_finite() => DEFAULT_STEP_FRACTION * bound,
        None => horizon,
    };
    let steps = (horizon / dt).ceil() as usize;
    let every = opts.record_every.max(1);

    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    let mut trace = SimulationTrace {
        times: vec![0.0],
        states: if opts.keep_states { vec![x.clone()] } else { vec![] },
        disagreement: vec![disagreement(&x)],
        dt,
        lambda_max,
        seed: None,
        initial_sum: x.iter().sum(),
        final_sum: 0.0,
    };
    for step in 1..=steps {
        lap.neg_apply(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        lap.neg_apply(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        lap.neg_apply(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        lap.neg_apply(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % every == 0 || step == steps {
            trace.times.push(step as f64 * dt);
            trace.disagreement.push(disagreement(&x));
            if opts.keep_states {
                trace.states.push(x.clone());
            }
        }
    }
    trace.final_sum = x.iter().sum();
    Ok(trace)
}

/// Negated least-squares slope of `ln(disagreement)` over `[lo, hi]`.
pub fn empirical_decay_rate(tr: &SimulationTrace, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &d) in tr.times.iter().zip(&tr.disagreement) {
        if t < lo || t > hi {
            continue;
        }
        if d <= DISAGREEMENT_FLOOR {
            return Err(OracleError::Underflow { t, value: d });
        }
        xs.push(t);
        ys.push(d.ln());
    }
    if xs.len() < 2 {
        return Err(OracleError::SparseWindow {
            lo,
            hi,
            count: xs.len(),
        });
    }
    Ok(-least_squares_slope(&xs, &ys))
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `[2/μ̂, 6/μ̂]`: late enough for faster modes to die out, early enough to
/// stay clear of round-off.
pub fn default_window(mu_hat: f64) -> (f64, f64) {
    (2.0 / mu_hat, 6.0 / mu_hat)
}

#[derive(Debug, Serialize)]
struct StateDumpHeader {
    rows: usize,
    cols: usize,
    dtype: &'static str,
    order: &'static str,
    times: Vec<f64>,
}

/// Writes the recorded states as little-endian `f64`, one row per time, and
/// a JSON sidecar describing the layout.
pub fn write_state_dump(tr: &SimulationTrace, data: impl Write, sidecar: impl Write) -> Result<()> {
    if tr.states.is_empty() {
        return Err(OracleError::NoStates);
    }
    let mut data = std::io::BufWriter::new(data);
    for row in &tr.states {
        for v in row {
            data.write_all(&v.to_le_bytes())?;
        }
    }
    data.flush()?;
    let header = StateDumpHeader {
        rows: tr.states.len(),
        cols: tr.states[0].len(),
        dtype: "f64le",
        order: "row-major",
        times: tr.times.clone(),
    };
    serde_json::to_writer_pretty(sidecar, &header)?;
    Ok(())
}

/// Smallest eigenvalue of `−(Θu′)′ = μu` on `[0, 1]` with `u(0) = 0` and
/// `Θu′ = 0` at `ξ = 1`.
///
/// `theta` holds samples at `ξ_i = i/m`. The flux form uses midpoint
/// diffusion `Θ_{i+½} = (Θ_i + Θ_{i+1})/2`, the end row is a half cell, and
/// the lumped mass `diag(1, …, 1, ½)` is folded in symmetrically so the
/// tridiagonal system stays symmetric. The eigenvalue comes from inverse
/// iteration with a Rayleigh quotient.
pub fn sturm_liouville_smallest_eig(theta: &[f64]) -> Result<f64> {
    if theta.len() < MIN_SL_INTERVALS + 1 {
        return Err(OracleError::CoarseGrid {
            min: MIN_SL_INTERVALS,
            got: theta.len().saturating_sub(1),
        });
    }
    for (index, &value) in theta.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(OracleError::NegativeProfile { index, value });
        }
    }
    let m = theta.len() - 1;
    let h2 = (1.0 / m as f64).powi(2);
    let half: Vec<f64> = theta.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if let Some(i) = half.iter().position(|&v| v <= 0.0) {
        return Err(OracleError::Singular(i));
    }
    // Unknowns u_1..u_m at indices 0..m−1.
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    for i in 1..m {
        diag[i - 1] = (half[i - 1] + half[i]) / h2;
        off[i - 1] = -half[i] / h2;
    }
    diag[m - 1] = half[m - 1] / h2;
    // Scale by M^{-1/2} with M = diag(1, …, 1, ½).
    let s = std::f64::consts::SQRT_2;
    diag[m - 1] *= 2.0;
    off[m - 2] *= s;

    let mut x = vec![1.0; m];
    let mut mu = 0.0;
    let max_iter = 2000;
    for it in 0..max_iter {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let y = solve_tridiagonal(&diag, &off, &x)?;
        // Rayleigh quotient of the new iterate.
        let ay = tridiagonal_apply(&diag, &off, &y);
        let num: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let den: f64 = y.iter().map(|v| v * v).sum();
        let new_mu = num / den;
        let done = it > 0 && (new_mu - mu).abs() <= 1e-12 * new_mu.abs();
        mu = new_mu;
        x = y;
        if done {
            return Ok(mu);
        }
    }
    Err(OracleError::NonConvergence(max_iter))
}

fn tridiagonal_apply(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut v = diag[i] * x[i];
            if i > 0 {
                v += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += off[i] * x[i + 1];
            }
            v
        })
        .collect()
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(OracleError::Singular(0));
    }
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(OracleError::Singular(i));
        }
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Samples `f` at `m + 1` uniform points on `[0, 1]`.
pub fn sample_profile(m: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..=m).map(|i| f(i as f64 / m as f64)).collect()
}

/// Random smooth non-negative profile with unit mean: a positive shift of a
/// short random cosine series, rescaled.
pub fn random_unit_mean_profile(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let terms = 4;
    let coeffs: Vec<f64> = (0..terms).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let shape = |xi: f64| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * xi).cos())
            .sum::<f64>()
    };
    let raw = sample_profile(m, shape);
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = rng.gen_range(0.05..1.0) - lo;
    let shifted: Vec<f64> = raw.iter().map(|v| v + shift).collect();
    let mean = crate::quadrature::simpson(&shifted, 1.0);
    shifted.iter().map(|v| v / mean).collect()
}
