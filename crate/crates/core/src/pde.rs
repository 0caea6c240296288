//! Modal series solutions on a lattice core with tails.
//!
//! Each tail `α` carries a profile `Q_α(ξ, t)` on `[0, 1]`; `ξ = 0` is the
//! core vertex and `ξ = 1` the free end. Expanding in the core Laplacian's
//! eigenvectors `η_k` splits the system into independent scalar problems
//! with the Robin condition `∂ξ u(0) = λ_k u(0)` and zero flux at `ξ = 1`:
//!
//! ```text
//! Q(ξ, t) = Σ_k η_k Σ_n A_{k,n} e^{−μ_{k,n} t} φ_{k,n}(ξ)
//! ```
//!
//! For the constant profile `φ = cos(x(1−ξ))`; for the quadratic profile
//! `φ = P_ν(ξ)`. Branch `k = 1` (`λ₁ = 0`) carries the consensus mode.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{build_laplacian, WeightedGraph};
use crate::quadrature::{gauss_legendre_unit, UnitGrid, GAUSS_POINTS};
use crate::rate::{solve_mu, DecayMode, DiffusionScale, RateError, ThetaKind};
use crate::special_fn::{legendre_p_nu, LegendreDegree, SpecialFnError};
use crate::spectral::{eig_sym, SpectralDecomposition, SpectralError, DISCONNECTED_TOL};

/// Overtones per branch when none is given.
pub const DEFAULT_TRUNCATION: usize = 40;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("core has no edges; use the star routines for a bare center")]
    EmptyCore,
    #[error("core is disconnected (lambda_2 = {0:e})")]
    Disconnected(f64),
    #[error("initial condition has {got} branches, core has {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("truncation must be at least 1")]
    BadTruncation,
    #[error("xi = {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("t = {0} must be finite and non-negative")]
    BadTime(f64),
    #[error("initial grid needs at least two nodes with equal-length rows")]
    BadGrid,
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PdeError>;

/// Per-branch initial profile `Q(ξ, 0)`.
pub trait InitialCondition {
    fn dim(&self) -> usize;
    fn sample(&self, xi: f64) -> Vec<f64>;
}

/// Initial condition given by a closure.
pub struct FnInitial<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> Vec<f64>> FnInitial<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> Vec<f64>> InitialCondition for FnInitial<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, xi: f64) -> Vec<f64> {
        let v = (self.f)(xi);
        debug_assert_eq!(v.len(), self.dim);
        v
    }
}

/// Initial condition sampled on a uniform grid over `[0, 1]`, linearly
/// interpolated in between.
#[derive(Debug, Clone)]
pub struct GridInitial {
    rows: Vec<Vec<f64>>,
}

impl GridInitial {
    /// `rows[i]` holds all branches at `ξ = i / (rows.len() − 1)`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 || rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
            return Err(PdeError::BadGrid);
        }
        Ok(Self { rows })
    }
}

impl InitialCondition for GridInitial {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn sample(&self, xi: f64) -> Vec<f64> {
        let m = self.rows.len() - 1;
        let s = xi.clamp(0.0, 1.0) * m as f64;
        let i = (s.floor() as usize).min(m - 1);
        let f = s - i as f64;
        self.rows[i]
            .iter()
            .zip(&self.rows[i + 1])
            .map(|(a, b)| a + f * (b - a))
            .collect()
    }
}

/// Equilibrium `(1/N)∫₀¹ 1ᵀQ(ξ, 0) dξ`, by Simpson on the default grid.
pub fn consensus_value(q0: &dyn InitialCondition) -> f64 {
    let n = q0.dim() as f64;
    UnitGrid::default().integrate_fn(|xi| q0.sample(xi).iter().sum::<f64>()) / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeTerm {
    pub mode: DecayMode,
    pub coefficient: f64,
    /// `∫₀¹ φ²`, kept for projections.
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSeries {
    pub k: usize,
    pub lambda: f64,
    pub terms: Vec<ModeTerm>,
}

#[derive(Debug, Clone)]
pub struct DiffusionSolution {
    pub kind: ThetaKind,
    pub theta: DiffusionScale,
    pub spectrum: SpectralDecomposition,
    pub branches: Vec<BranchSeries>,
    pub consensus: f64,
    pub truncation: usize,
    /// Smallest rate among the modes cut off by the truncation.
    pub slowest_omitted_mu: f64,
}

/// Mode shape of a branch at `ξ`.
pub fn mode_value(kind: ThetaKind, mode: &DecayMode, xi: f64) -> Result<f64> {
    Ok(match kind {
        ThetaKind::Constant => (mode.root * (1.0 - xi)).cos(),
        ThetaKind::Variable => legendre_p_nu(LegendreDegree::new(mode.root)?, xi)?,
    })
}

/// The modes kept on a branch. Branch 1 (`λ = 0`) keeps `n = 0..=m`, the
/// others `n = 1..=m`.
fn branch_modes(
    kind: ThetaKind,
    lambda: f64,
    theta: DiffusionScale,
    m: usize,
    consensus_branch: bool,
) -> Result<Vec<DecayMode>> {
    let range = if consensus_branch { 0..=m } else { 1..=m };
    range
        .map(|n| {
            let mode = match (kind, consensus_branch) {
                (ThetaKind::Constant, true) => solve_mu(kind, 0.0, theta, n)?,
                (ThetaKind::Variable, true) => solve_mu(kind, 0.0, theta, n + 1)?,
                _ => solve_mu(kind, lambda, theta, n)?,
            };
            Ok(DecayMode { n, ..mode })
        })
        .collect()
}

fn first_omitted(
    kind: ThetaKind,
    lambda: f64,
    theta: DiffusionScale,
    m: usize,
    consensus_branch: bool,
) -> Result<f64> {
    Ok(match (kind, consensus_branch) {
        (ThetaKind::Constant, true) => solve_mu(kind, 0.0, theta, m + 1)?.mu,
        (ThetaKind::Variable, true) => solve_mu(kind, 0.0, theta, m + 2)?.mu,
        _ => solve_mu(kind, lambda, theta, m + 1)?.mu,
    })
}

/// Analytic `∫₀¹ φ²` where one is available.
fn closed_norm(kind: ThetaKind, lambda: f64, mode: &DecayMode, consensus_branch: bool) -> Option<f64> {
    match (kind, consensus_branch) {
        (ThetaKind::Constant, true) => Some(if mode.n == 0 { 1.0 } else { 0.5 }),
        (ThetaKind::Constant, false) => {
            let s = mode.root.sin();
            Some(0.5 * (1.0 + s * s / lambda))
        }
        (ThetaKind::Variable, true) => Some(1.0 / (4 * mode.n + 1) as f64),
        (ThetaKind::Variable, false) => None,
    }
}

/// Builds the truncated series for the given profile kind.
///
/// Coefficients are projections of `η_kᵀQ(ξ, 0)` onto each mode,
/// integrated with a Gauss–Legendre rule on `[0, 1]`. The constant-profile
/// Robin modes use the norm `½(1 + sin²x/λ_k)` and the polynomial modes
/// `1/(4n+1)`; the real-degree Legendre norms are integrated numerically.
pub fn build_solution(
    kind: ThetaKind,
    core: &WeightedGraph,
    q0: &dyn InitialCondition,
    theta: DiffusionScale,
    m: usize,
) -> Result<DiffusionSolution> {
    if core.edges().iter().all(|&(_, _, w)| w == 0.0) {
        return Err(PdeError::EmptyCore);
    }
    if q0.dim() != core.n() {
        return Err(PdeError::DimensionMismatch {
            got: q0.dim(),
            want: core.n(),
        });
    }
    if m == 0 {
        return Err(PdeError::BadTruncation);
    }
    let spectrum = eig_sym(&build_laplacian(core))?;
    if core.n() > 1 && spectrum.values[1] < DISCONNECTED_TOL {
        return Err(PdeError::Disconnected(spectrum.values[1]));
    }

    let grid = gauss_legendre_unit(GAUSS_POINTS);
    let samples: Vec<Vec<f64>> = grid.nodes.iter().map(|&xi| q0.sample(xi)).collect();

    let mut branches = Vec::with_capacity(core.n());
    let mut slowest_omitted = f64::INFINITY;
    for (idx, (&lam, eta)) in spectrum.values.iter().zip(&spectrum.vectors).enumerate() {
        let consensus_branch = idx == 0;
        let lambda = if consensus_branch { 0.0 } else { lam };
        let proj: Vec<f64> = samples
            .iter()
            .map(|row| row.iter().zip(eta).map(|(q, e)| q * e).sum())
            .collect();
        let modes = branch_modes(kind, lambda, theta, m, consensus_branch)?;
        let mut terms = Vec::with_capacity(modes.len());
        for mode in modes {
            let phi: Vec<f64> = grid
                .nodes
                .iter()
                .map(|&xi| mode_value(kind, &mode, xi))
                .collect::<Result<_>>()?;
            let norm = match closed_norm(kind, lambda, &mode, consensus_branch) {
                Some(v) => v,
                None => grid.integrate(&phi.iter().map(|p| p * p).collect::<Vec<_>>()),
            };
            let inner: f64 = grid
                .weights
                .iter()
                .zip(&phi)
                .zip(&proj)
                .map(|((w, p), g)| w * p * g)
                .sum();
            terms.push(ModeTerm {
                mode: mode.with_branch(idx + 1),
                coefficient: inner / norm,
                norm,
            });
        }
        slowest_omitted = slowest_omitted.min(first_omitted(kind, lambda, theta, m, consensus_branch)?);
        branches.push(BranchSeries {
            k: idx + 1,
            lambda,
            terms,
        });
    }

    // The k = 1, n = 0 mode is flat with amplitude A/√N on every tail.
    let eta1 = &spectrum.vectors[0];
    let consensus = branches[0].terms[0].coefficient * eta1.iter().sum::<f64>() / core.n() as f64;

    Ok(DiffusionSolution {
        kind,
        theta,
        spectrum,
        branches,
        consensus,
        truncation: m,
        slowest_omitted_mu: slowest_omitted,
    })
}

pub fn build_solution_constant(
    core: &WeightedGraph,
    q0: &dyn InitialCondition,
    theta: DiffusionScale,
    m: usize,
) -> Result<DiffusionSolution> {
    build_solution(ThetaKind::Constant, core, q0, theta, m)
}

pub fn build_solution_variable(
    core: &WeightedGraph,
    q0: &dyn InitialCondition,
    theta: DiffusionScale,
    m: usize,
) -> Result<DiffusionSolution> {
    build_solution(ThetaKind::Variable, core, q0, theta, m)
}

impl DiffusionSolution {
    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    /// Per-branch scalar series `u_k(ξ, t)`.
    pub fn branch_value(&self, k_idx: usize, xi: f64, t: f64) -> Result<f64> {
        let b = &self.branches[k_idx];
        let mut acc = 0.0;
        for term in &b.terms {
            if term.coefficient == 0.0 {
                continue;
            }
            let decay = (-term.mode.mu * t).exp();
            if decay == 0.0 {
                continue;
            }
            acc += term.coefficient * decay * mode_value(self.kind, &term.mode, xi)?;
        }
        Ok(acc)
    }

    /// `Q(ξ, t)`, one value per tail.
    pub fn evaluate(&self, xi: f64, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(PdeError::OutOfRange(xi));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(PdeError::BadTime(t));
        }
        let mut out = vec![0.0; self.dim()];
        for (k_idx, eta) in self.spectrum.vectors.iter().enumerate() {
            let u = self.branch_value(k_idx, xi, t)?;
            for (o, e) in out.iter_mut().zip(eta) {
                *o += e * u;
            }
        }
        Ok(out)
    }

    /// Slowest decaying non-consensus mode.
    pub fn slowest_mode(&self) -> Option<&ModeTerm> {
        self.branches
            .iter()
            .flat_map(|b| &b.terms)
            .filter(|t| t.mode.mu > 0.0)
            .min_by(|a, b| a.mode.mu.total_cmp(&b.mode.mu))
    }

    /// `‖Q(·, t) − c·1‖` in `L²(0, 1)` summed over tails, by Simpson on
    /// `n_pts` points.
    pub fn disagreement(&self, t: f64, n_pts: usize) -> Result<f64> {
        let g = UnitGrid::new(n_pts);
        let mut vals = Vec::with_capacity(n_pts);
        for &xi in &g.nodes {
            let q = self.evaluate(xi, t)?;
            vals.push(q.iter().map(|v| (v - self.consensus).powi(2)).sum::<f64>());
        }
        Ok(g.integrate(&vals).sqrt())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct ModeOut {
            k: usize,
            n: usize,
            mu: f64,
            root: f64,
            coefficient: f64,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            kind: ThetaKind,
            theta_hat: f64,
            eigenvalues: &'a [f64],
            eigenvectors: &'a [Vec<f64>],
            consensus: f64,
            truncation: usize,
            slowest_omitted_mu: f64,
            modes: Vec<ModeOut>,
        }
        let modes = self
            .branches
            .iter()
            .flat_map(|b| &b.terms)
            .map(|t| ModeOut {
                k: t.mode.k,
                n: t.mode.n,
                mu: t.mode.mu,
                root: t.mode.root,
                coefficient: t.coefficient,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&Out {
            kind: self.kind,
            theta_hat: self.theta.value(),
            eigenvalues: &self.spectrum.values,
            eigenvectors: &self.spectrum.vectors,
            consensus: self.consensus,
            truncation: self.truncation,
            slowest_omitted_mu: self.slowest_omitted_mu,
            modes,
        })?)
    }
}
