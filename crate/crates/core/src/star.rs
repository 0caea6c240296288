//! The symmetric star: `p` identical branches of `q` edges joined at one
//! center.
//!
//! In the continuum limit each branch is a bar on `[0, 1]` and a discrete
//! Fourier transform across branches decouples the system. Sector `β = 0`
//! has a no-flux center and keeps the even modes; every sector `β ≠ 0`
//! sees a pinned center (`Q̃_β(0) = 0`) and keeps the odd ones:
//!
//! | profile   | even (β = 0)            | odd (β ≠ 0, degeneracy p−1)     |
//! |-----------|-------------------------|---------------------------------|
//! | constant  | `cos(kπξ)`, `(kπ)²Θ̂`    | `sin((2k+1)πξ/2)`, `((2k+1)π/2)²Θ̂` |
//! | quadratic | `P₂ₖ`, `3Θ̂k(2k+1)`      | `P₂ₖ₊₁`, `3Θ̂(k+1)(2k+1)`        |

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};
use crate::pde::InitialCondition;
use crate::quadrature::{gauss_legendre_unit, GAUSS_POINTS};
use crate::rate::ThetaKind;
use crate::special_fn::legendre_p_unchecked;

#[derive(Debug, Error)]
pub enum StarError {
    #[error("star needs p >= 1 branches and q >= 1 edges per branch (p = {p}, q = {q})")]
    BadShape { p: usize, q: usize },
    #[error("{name} must be finite and positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("initial condition has {got} branches, star has {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("mode cutoff must be at least 1")]
    BadCutoff,
    #[error("tail bound {bound:e} on H exceeds tolerance {tol:e}; raise the cutoff")]
    TailTooLarge { bound: f64, tol: f64 },
    #[error("xi = {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, StarError>;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(StarError::NotPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarSpec {
    pub p: usize,
    pub q: usize,
    /// Total weight over all `p·q` edges.
    pub d: f64,
    pub theta_hat: f64,
}

impl StarSpec {
    /// Discrete star with budget `d`; `Θ̂ = d / (p q³)`.
    pub fn new(p: usize, q: usize, d: f64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(StarError::BadShape { p, q });
        }
        let d = positive("D", d)?;
        Ok(Self {
            p,
            q,
            d,
            theta_hat: d / (p as f64 * (q as f64).powi(3)),
        })
    }

    /// Discrete star sized so that `Θ̂` is the given scale.
    pub fn with_theta(p: usize, q: usize, theta_hat: f64) -> Result<Self> {
        positive("theta", theta_hat)?;
        Self::new(p, q, p as f64 * (q as f64).powi(3) * theta_hat)
    }

    /// Continuum-only use: `q` is irrelevant and set to 1.
    pub fn continuum(p: usize, theta_hat: f64) -> Result<Self> {
        if p == 0 {
            return Err(StarError::BadShape { p, q: 1 });
        }
        let theta_hat = positive("theta", theta_hat)?;
        Ok(Self {
            p,
            q: 1,
            d: p as f64 * theta_hat,
            theta_hat,
        })
    }
}

/// Optimal edge weights `W_j = 3D(q+j)(q−j+1) / (pq(q+1)(2q+1))` for
/// `j = 1..=q`, counted from the center. Every branch uses the same list.
pub fn star_discrete_weights(s: &StarSpec) -> Vec<f64> {
    let (p, q) = (s.p as f64, s.q as f64);
    let den = p * q * (q + 1.0) * (2.0 * q + 1.0);
    (1..=s.q)
        .map(|j| {
            let j = j as f64;
            3.0 * s.d * (q + j) * (q - j + 1.0) / den
        })
        .collect()
}

/// `λ₂ = 6D / (pq(q+1)(2q+1))` of the optimally weighted star.
pub fn star_lambda2_discrete(s: &StarSpec) -> f64 {
    let (p, q) = (s.p as f64, s.q as f64);
    6.0 * s.d / (p * q * (q + 1.0) * (2.0 * q + 1.0))
}

/// Vertex of branch `alpha` at distance `j ≥ 1` from the center (vertex 0).
pub fn star_vertex(q: usize, alpha: usize, j: usize) -> usize {
    1 + alpha * q + (j - 1)
}

/// The whole discrete star with its optimal weights.
pub fn star_graph(s: &StarSpec) -> Result<WeightedGraph> {
    let w = star_discrete_weights(s);
    let mut edges = Vec::with_capacity(s.p * s.q);
    for alpha in 0..s.p {
        for j in 1..=s.q {
            let from = if j == 1 {
                0
            } else {
                star_vertex(s.q, alpha, j - 1)
            };
            edges.push((from, star_vertex(s.q, alpha, j), w[j - 1]));
        }
    }
    Ok(WeightedGraph::new(1 + s.p * s.q, edges)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarMode {
    pub parity: Parity,
    /// Family index `k ≥ 0`.
    pub k: usize,
    pub mu: f64,
    pub degeneracy: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StarSpectrum {
    pub kind: ThetaKind,
    pub p: usize,
    pub theta_hat: f64,
    /// Modes per family.
    pub cutoff: usize,
    /// Both families merged in increasing `μ`.
    pub modes: Vec<StarMode>,
}

/// Rate of mode `k` of a family.
pub fn star_mode_rate(kind: ThetaKind, parity: Parity, k: usize, theta_hat: f64) -> f64 {
    let kf = k as f64;
    match (kind, parity) {
        (ThetaKind::Constant, Parity::Even) => (kf * PI).powi(2) * theta_hat,
        (ThetaKind::Constant, Parity::Odd) => ((2.0 * kf + 1.0) * PI / 2.0).powi(2) * theta_hat,
        (ThetaKind::Variable, Parity::Even) => 3.0 * theta_hat * kf * (2.0 * kf + 1.0),
        (ThetaKind::Variable, Parity::Odd) => 3.0 * theta_hat * (kf + 1.0) * (2.0 * kf + 1.0),
    }
}

/// First `cutoff` modes of each family.
pub fn star_spectrum(s: &StarSpec, kind: ThetaKind, cutoff: usize) -> Result<StarSpectrum> {
    if cutoff == 0 {
        return Err(StarError::BadCutoff);
    }
    let mut modes = Vec::with_capacity(2 * cutoff);
    for k in 0..cutoff {
        for (parity, degeneracy) in [(Parity::Even, 1), (Parity::Odd, s.p - 1)] {
            modes.push(StarMode {
                parity,
                k,
                mu: star_mode_rate(kind, parity, k, s.theta_hat),
                degeneracy,
            });
        }
    }
    modes.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(StarSpectrum {
        kind,
        p: s.p,
        theta_hat: s.theta_hat,
        cutoff,
        modes,
    })
}

impl StarSpectrum {
    /// Smallest positive rate that actually occurs (degeneracy > 0).
    pub fn slowest(&self) -> Option<&StarMode> {
        self.modes.iter().find(|m| m.mu > 0.0 && m.degeneracy > 0)
    }
}

/// Closed-form robustness `H = √(Σ deg / (2μ))` over the nonzero modes.
pub fn robustness_closed(s: &StarSpec, kind: ThetaKind) -> f64 {
    let p = s.p as f64;
    let t = s.theta_hat;
    match kind {
        ThetaKind::Constant => 0.5 * ((3.0 * p - 2.0) / (3.0 * t)).sqrt(),
        ThetaKind::Variable => ((1.0 + (p - 2.0) * LN_2) / (3.0 * t)).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessEstimate {
    /// `√` of the truncated reciprocal sum.
    pub h: f64,
    /// Upper bound on the missing part of `H`.
    pub tail_bound: f64,
}

/// `H` from a truncated spectrum, with a bound on what the truncation drops.
///
/// Every family obeys `1/(2μ_k) ≤ 1/(2a(k+s)²)` with `a = π²Θ̂` (constant)
/// or `6Θ̂` (quadratic) and `s = 0` (even) or `½` (odd), so the dropped
/// terms sum to at most `deg/(2a(K−1+s))` per family. Fails with
/// [`StarError::TailTooLarge`] when the bound on `H` exceeds `tol`.
pub fn robustness_from_spectrum(spec: &StarSpectrum, tol: f64) -> Result<RobustnessEstimate> {
    let mut sum = 0.0;
    for m in &spec.modes {
        if m.mu > 0.0 {
            sum += m.degeneracy as f64 / (2.0 * m.mu);
        }
    }
    let a = match spec.kind {
        ThetaKind::Constant => PI * PI * spec.theta_hat,
        ThetaKind::Variable => 6.0 * spec.theta_hat,
    };
    let kk = spec.cutoff as f64;
    let even_tail = if spec.cutoff >= 2 {
        1.0 / (2.0 * a * (kk - 1.0))
    } else {
        f64::INFINITY
    };
    let odd_tail = (spec.p - 1) as f64 / (2.0 * a * (kk - 0.5));
    let tail = even_tail + odd_tail;
    let h = sum.sqrt();
    let tail_bound = (sum + tail).sqrt() - h;
    if tail_bound > tol {
        return Err(StarError::TailTooLarge {
            bound: tail_bound,
            tol,
        });
    }
    Ok(RobustnessEstimate { h, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub p: usize,
    pub h_constant: f64,
    pub h_variable: f64,
    pub ratio: f64,
}

/// `H_const / H_var` over a range of branch counts.
pub fn robustness_curve(
    ps: impl IntoIterator<Item = usize>,
    theta_hat: f64,
) -> Result<Vec<RobustnessRow>> {
    ps.into_iter()
        .map(|p| {
            let s = StarSpec::continuum(p, theta_hat)?;
            let hc = robustness_closed(&s, ThetaKind::Constant);
            let hv = robustness_closed(&s, ThetaKind::Variable);
            Ok(RobustnessRow {
                p,
                h_constant: hc,
                h_variable: hv,
                ratio: hc / hv,
            })
        })
        .collect()
}

/// Maximizer of the slowest odd rate over profiles with mean `Θ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalOptimum {
    pub theta_hat: f64,
    pub mu: f64,
}

impl VariationalOptimum {
    /// `Θ(ξ) = 3Θ̂(1−ξ²)/2`.
    pub fn theta(&self, xi: f64) -> f64 {
        1.5 * self.theta_hat * (1.0 - xi * xi)
    }

    /// Normalized slowest mode `Φ(ξ) = √3·ξ`.
    pub fn phi(&self, xi: f64) -> f64 {
        3f64.sqrt() * xi
    }

    pub fn phi_deriv(&self, _xi: f64) -> f64 {
        3f64.sqrt()
    }
}

pub fn variational_optimum(theta_hat: f64) -> Result<VariationalOptimum> {
    let theta_hat = positive("theta", theta_hat)?;
    Ok(VariationalOptimum {
        theta_hat,
        mu: 3.0 * theta_hat,
    })
}

/// One sector's modal series, real and imaginary parts kept apart.
#[derive(Debug, Clone)]
struct Sector {
    parity: Parity,
    coeffs: Vec<Complex64>,
    rates: Vec<f64>,
}

/// Branch-DFT series solution on the continuum star.
#[derive(Debug, Clone)]
pub struct StarSolution {
    pub kind: ThetaKind,
    pub p: usize,
    pub theta_hat: f64,
    pub cutoff: usize,
    sectors: Vec<Sector>,
    /// All-branch spatial average, the long-time limit.
    pub equilibrium: f64,
}

fn twiddle(p: usize, e: i64) -> Complex64 {
    let ang = -2.0 * PI * (e.rem_euclid(p as i64)) as f64 / p as f64;
    Complex64::from_polar(1.0, ang)
}

fn star_mode_value(kind: ThetaKind, parity: Parity, k: usize, xi: f64) -> f64 {
    match (kind, parity) {
        (ThetaKind::Constant, Parity::Even) => (k as f64 * PI * xi).cos(),
        (ThetaKind::Constant, Parity::Odd) => ((2 * k + 1) as f64 * PI * xi / 2.0).sin(),
        (ThetaKind::Variable, Parity::Even) => legendre_p_unchecked(2 * k, xi),
        (ThetaKind::Variable, Parity::Odd) => legendre_p_unchecked(2 * k + 1, xi),
    }
}

/// `1 / ∫₀¹ φ²` for a star mode.
fn inverse_norm(kind: ThetaKind, parity: Parity, k: usize) -> f64 {
    match (kind, parity) {
        (ThetaKind::Constant, Parity::Even) if k == 0 => 1.0,
        (ThetaKind::Constant, _) => 2.0,
        (ThetaKind::Variable, Parity::Even) => (4 * k + 1) as f64,
        (ThetaKind::Variable, Parity::Odd) => (4 * k + 3) as f64,
    }
}

/// Builds the series for `p` branch profiles with `cutoff` modes per sector.
///
/// The forward transform is `Q̃_β = (1/p) Σ_α ω^{αβ} Q_α` with
/// `ω = e^{−2πi/p}` and the inverse `Q_α = Σ_β ω^{−αβ} Q̃_β`.
pub fn star_solution(
    s: &StarSpec,
    kind: ThetaKind,
    q0: &dyn InitialCondition,
    cutoff: usize,
) -> Result<StarSolution> {
    if q0.dim() != s.p {
        return Err(StarError::DimensionMismatch {
            got: q0.dim(),
            want: s.p,
        });
    }
    if cutoff == 0 {
        return Err(StarError::BadCutoff);
    }
    let p = s.p;
    let grid = gauss_legendre_unit(GAUSS_POINTS);
    let samples: Vec<Vec<f64>> = grid.nodes.iter().map(|&xi| q0.sample(xi)).collect();

    let mut sectors = Vec::with_capacity(p);
    for beta in 0..p {
        let parity = if beta == 0 { Parity::Even } else { Parity::Odd };
        let transformed: Vec<Complex64> = samples
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(alpha, &v)| twiddle(p, (alpha * beta) as i64) * v)
                    .sum::<Complex64>()
                    / p as f64
            })
            .collect();
        let mut coeffs = Vec::with_capacity(cutoff);
        let mut rates = Vec::with_capacity(cutoff);
        for k in 0..cutoff {
            let inner: Complex64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .zip(&transformed)
                .map(|((&xi, &w), &g)| g * (w * star_mode_value(kind, parity, k, xi)))
                .sum();
            coeffs.push(inner * inverse_norm(kind, parity, k));
            rates.push(star_mode_rate(kind, parity, k, s.theta_hat));
        }
        sectors.push(Sector {
            parity,
            coeffs,
            rates,
        });
    }
    let equilibrium = sectors[0].coeffs[0].re;
    Ok(StarSolution {
        kind,
        p,
        theta_hat: s.theta_hat,
        cutoff,
        sectors,
        equilibrium,
    })
}

impl StarSolution {
    /// Sector amplitudes `Q̃_β(ξ, t)`.
    pub fn sector_values(&self, xi: f64, t: f64) -> Result<Vec<Complex64>> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(StarError::OutOfRange(xi));
        }
        Ok(self
            .sectors
            .iter()
            .map(|sec| {
                sec.coeffs
                    .iter()
                    .zip(&sec.rates)
                    .enumerate()
                    .map(|(k, (c, mu))| {
                        c * ((-mu * t).exp() * star_mode_value(self.kind, sec.parity, k, xi))
                    })
                    .sum()
            })
            .collect())
    }

    /// `Q_α(ξ, t)` for every branch.
    pub fn evaluate(&self, xi: f64, t: f64) -> Result<Vec<f64>> {
        let tilde = self.sector_values(xi, t)?;
        Ok((0..self.p)
            .map(|alpha| {
                tilde
                    .iter()
                    .enumerate()
                    .map(|(beta, v)| twiddle(self.p, -((alpha * beta) as i64)) * v)
                    .sum::<Complex64>()
                    .re
            })
            .collect())
    }

    /// `‖Q(·, t) − c·1‖` in `L²(0, 1)` over all branches.
    pub fn disagreement(&self, t: f64, n_pts: usize) -> Result<f64> {
        let g = crate::quadrature::UnitGrid::new(n_pts);
        let mut vals = Vec::with_capacity(n_pts);
        for &xi in &g.nodes {
            let q = self.evaluate(xi, t)?;
            vals.push(q.iter().map(|v| (v - self.equilibrium).powi(2)).sum::<f64>());
        }
        Ok(g.integrate(&vals).sqrt())
    }
}

/// Solves and evaluates in one go.
pub fn evaluate_star_solution(
    s: &StarSpec,
    kind: ThetaKind,
    q0: &dyn InitialCondition,
    cutoff: usize,
    xi: f64,
    t: f64,
) -> Result<Vec<f64>> {
    star_solution(s, kind, q0, cutoff)?.evaluate(xi, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::FnInitial;
    use crate::quadrature::simpson_fn;
    use crate::spectral::lambda2;
    use proptest::prelude::*;

    #[test]
    fn weight_examples() {
        let s = StarSpec::new(2, 1, 2.0).unwrap();
        assert_eq!(star_discrete_weights(&s), vec![1.0]);

        let s = StarSpec::new(3, 50, 7.0).unwrap();
        let w = star_discrete_weights(&s);
        let total: f64 = w.iter().sum::<f64>() * 3.0;
        assert!((total - 7.0).abs() < 1e-9 * 7.0);
        assert!(w.windows(2).all(|p| p[0] > p[1]));
        let last = 3.0 * 7.0 * 100.0 / (3.0 * 50.0 * 51.0 * 101.0);
        assert!((w[49] - last).abs() < 1e-15 && last > 0.0);
    }

    #[test]
    fn lambda2_examples() {
        let s = StarSpec::with_theta(3, 50, 1.0).unwrap();
        let want = 6.0 * 375_000.0 / (3.0 * 50.0 * 51.0 * 101.0);
        assert!((star_lambda2_discrete(&s) - want).abs() < 1e-12);
        assert!((want - 2.91206).abs() < 1e-5);
        let s200 = StarSpec::with_theta(3, 200, 1.0).unwrap();
        let e200 = 3.0 - star_lambda2_discrete(&s200);
        assert!(e200 > 0.0 && e200 < 3.0 - want);
        assert!((e200 / 3.0 - 1.5 / 200.0).abs() < 1e-4);
        let s = StarSpec::new(1, 1, 1.0).unwrap();
        assert!((star_lambda2_discrete(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn graph_lambda2_matches_closed_form() {
        for (p, q) in [(2, 3), (3, 10), (5, 7)] {
            let s = StarSpec::with_theta(p, q, 1.3).unwrap();
            let g = star_graph(&s).unwrap();
            assert_eq!(g.n(), 1 + p * q);
            let l2 = lambda2(&g).unwrap();
            let want = star_lambda2_discrete(&s);
            assert!((l2 - want).abs() < 1e-9 * want, "{p} {q}: {l2} vs {want}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = StarSpec::continuum(3, 1.0).unwrap();
        let v = star_spectrum(&s, ThetaKind::Variable, 5).unwrap();
        assert_eq!(v.slowest().unwrap().mu, 3.0);
        assert_eq!(v.slowest().unwrap().degeneracy, 2);
        let first_even = v
            .modes
            .iter()
            .find(|m| m.parity == Parity::Even && m.mu > 0.0)
            .unwrap();
        assert_eq!(first_even.mu, 9.0);
        let c = star_spectrum(&s, ThetaKind::Constant, 5).unwrap();
        assert!((c.slowest().unwrap().mu - PI * PI / 4.0).abs() < 1e-15);
        assert!(v.modes.windows(2).all(|w| w[0].mu <= w[1].mu));
        assert_eq!(v.modes.len(), 10);
    }

    #[test]
    fn single_branch_has_no_odd_multiplicity() {
        let s = StarSpec::continuum(1, 1.0).unwrap();
        let v = star_spectrum(&s, ThetaKind::Variable, 3).unwrap();
        assert!(v
            .modes
            .iter()
            .all(|m| (m.parity == Parity::Odd) == (m.degeneracy == 0)));
        assert_eq!(v.slowest().unwrap().mu, 9.0);
    }

    #[test]
    fn robustness_examples() {
        let s2 = StarSpec::continuum(2, 1.0).unwrap();
        let hc = robustness_closed(&s2, ThetaKind::Constant);
        let hv = robustness_closed(&s2, ThetaKind::Variable);
        assert!((hc - 0.57735).abs() < 1e-5);
        assert!((hv - 0.57735).abs() < 1e-5);
        assert!((hc - hv).abs() < 1e-15);
        let r10 = robustness_curve([10], 1.0).unwrap()[0].ratio;
        assert!((r10 - 1.034).abs() < 1e-3, "{r10}");
    }

    #[test]
    fn truncated_robustness_matches_closed_forms() {
        for p in [2, 3, 5, 10] {
            let s = StarSpec::continuum(p, 1.0).unwrap();
            for kind in [ThetaKind::Constant, ThetaKind::Variable] {
                let spec = star_spectrum(&s, kind, 100_000).unwrap();
                let est = robustness_from_spectrum(&spec, 1e-3).unwrap();
                let exact = robustness_closed(&s, kind);
                assert!(est.h <= exact && exact <= est.h + est.tail_bound + 1e-12);
                assert!((est.h - exact).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn short_spectrum_is_rejected() {
        let s = StarSpec::continuum(3, 1.0).unwrap();
        let spec = star_spectrum(&s, ThetaKind::Constant, 10).unwrap();
        assert!(matches!(
            robustness_from_spectrum(&spec, 1e-3),
            Err(StarError::TailTooLarge { .. })
        ));
    }

    #[test]
    fn reciprocal_sum_identities() {
        let even_sq: f64 = (1..=1_000_000).map(|k| 1.0 / (2.0 * k as f64).powi(2)).sum();
        assert!((even_sq - PI * PI / 24.0).abs() < 1e-6);
        let alt: f64 = (1..=1_000_000)
            .map(|k| {
                let k = k as f64;
                1.0 / (2.0 * k * (2.0 * k + 1.0))
            })
            .sum();
        assert!((alt - (1.0 - LN_2)).abs() < 1e-6);
    }

    #[test]
    fn variational_examples() {
        let v = variational_optimum(1.0).unwrap();
        assert_eq!((v.mu, v.theta(0.0), v.theta(1.0)), (3.0, 1.5, 0.0));
        for th in [0.5, 1.0, 4.0] {
            let v = variational_optimum(th).unwrap();
            let mean = simpson_fn(0.0, 1.0, 1001, |x| v.theta(x));
            assert!((mean - th).abs() < 1e-12);
            let norm = simpson_fn(0.0, 1.0, 1001, |x| v.phi(x).powi(2));
            assert!((norm - 1.0).abs() < 1e-12);
            let num = simpson_fn(0.0, 1.0, 1001, |x| v.theta(x) * v.phi_deriv(x).powi(2));
            assert!((num / norm - 3.0 * th).abs() < 1e-10);
        }
        assert!(variational_optimum(0.0).is_err());
    }

    /// Branch profiles that agree at the center (continuity there) with
    /// zero slope, otherwise different.
    fn generic(p: usize) -> impl Fn(f64) -> Vec<f64> {
        move |xi| {
            (0..p)
                .map(|a| {
                    let a = a as f64;
                    1.5 + (0.2 + 0.3 * a) * xi * xi
                        + (0.4 + 0.1 * a) * (1.0 - (PI * xi * (0.5 + 0.4 * a)).cos())
                        - 0.3 * a * xi.powi(3)
                })
                .collect()
        }
    }

    #[test]
    fn equal_branches_stay_in_even_sector() {
        let s = StarSpec::continuum(4, 1.0).unwrap();
        let q = FnInitial::new(4, |xi| vec![1.0 + (PI * xi).cos(); 4]);
        for kind in [ThetaKind::Constant, ThetaKind::Variable] {
            let sol = star_solution(&s, kind, &q, 20).unwrap();
            for xi in [0.0, 0.3, 0.8] {
                let v = sol.sector_values(xi, 0.1).unwrap();
                for z in &v[1..] {
                    assert!(z.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn reconstruction_and_equilibrium() {
        let p = 3;
        let f = generic(p);
        let q = FnInitial::new(p, generic(p));
        let s = StarSpec::continuum(p, 1.0).unwrap();
        let avg = simpson_fn(0.0, 1.0, 1001, |x| f(x).iter().sum::<f64>()) / p as f64;
        for kind in [ThetaKind::Constant, ThetaKind::Variable] {
            let sol = star_solution(&s, kind, &q, 40).unwrap();
            assert!((sol.equilibrium - avg).abs() < 1e-10);
            let mut worst: f64 = 0.0;
            for i in 0..=100 {
                let xi = i as f64 / 100.0;
                for (a, b) in sol.evaluate(xi, 0.0).unwrap().iter().zip(f(xi)) {
                    worst = worst.max((a - b).abs());
                }
            }
            assert!(worst < 0.02, "{kind:?}: {worst}");
            let late = sol.evaluate(0.4, 40.0).unwrap();
            assert!(late.iter().all(|v| (v - avg).abs() < 1e-12));
        }
    }

    #[test]
    fn average_is_conserved() {
        let p = 3;
        let q = FnInitial::new(p, generic(p));
        let s = StarSpec::continuum(p, 1.0).unwrap();
        for kind in [ThetaKind::Constant, ThetaKind::Variable] {
            let sol = star_solution(&s, kind, &q, 40).unwrap();
            for t in [0.01, 0.1, 1.0] {
                let total = simpson_fn(0.0, 1.0, 2001, |x| {
                    sol.evaluate(x, t).unwrap().iter().sum::<f64>()
                }) / p as f64;
                assert!((total - sol.equilibrium).abs() < 1e-6, "{kind:?} {t}: {total}");
            }
        }
    }

    #[test]
    fn decay_slope_matches_slowest_odd_mode() {
        let p = 3;
        let q = FnInitial::new(p, generic(p));
        let s = StarSpec::continuum(p, 1.0).unwrap();
        for (kind, want) in [(ThetaKind::Variable, 3.0), (ThetaKind::Constant, PI * PI / 4.0)] {
            let sol = star_solution(&s, kind, &q, 30).unwrap();
            let ts: Vec<f64> = (0..=20).map(|i| (2.0 + 4.0 * i as f64 / 20.0) / want).collect();
            let ys: Vec<f64> = ts.iter().map(|&t| sol.disagreement(t, 201).unwrap().ln()).collect();
            let n = ts.len() as f64;
            let mx = ts.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = ts.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = ts.iter().map(|a| (a - mx).powi(2)).sum();
            let rate = -sxy / sxx;
            assert!((rate / want - 1.0).abs() < 0.01, "{kind:?}: {rate}");
        }
    }

    #[test]
    fn sector_parity_matches_center_conditions() {
        // β ≠ 0 sectors vanish at the center; β = 0 has zero slope there.
        let p = 4;
        let q = FnInitial::new(p, generic(p));
        let s = StarSpec::continuum(p, 1.0).unwrap();
        for kind in [ThetaKind::Constant, ThetaKind::Variable] {
            let sol = star_solution(&s, kind, &q, 30).unwrap();
            let v0 = sol.sector_values(0.0, 0.05).unwrap();
            for z in &v0[1..] {
                assert!(z.norm() < 1e-14);
            }
            let h = 1e-5;
            let vh = sol.sector_values(h, 0.05).unwrap();
            assert!(((vh[0] - v0[0]) / h).norm() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn sturm_comparison(theta in 1e-3f64..1e3, p in 2usize..20) {
            let s = StarSpec::continuum(p, theta).unwrap();
            for kind in [ThetaKind::Constant, ThetaKind::Variable] {
                let spec = star_spectrum(&s, kind, 4).unwrap();
                let even = spec.modes.iter().find(|m| m.parity == Parity::Even && m.mu > 0.0).unwrap();
                let odd = spec.modes.iter().find(|m| m.parity == Parity::Odd).unwrap();
                prop_assert!(even.mu > odd.mu);
                prop_assert_eq!(spec.slowest().unwrap().mu, odd.mu);
            }
        }

        #[test]
        fn weights_sum_to_budget(p in 1usize..8, q in 1usize..300, d in 1e-3f64..1e6) {
            let s = StarSpec::new(p, q, d).unwrap();
            let total: f64 = star_discrete_weights(&s).iter().sum::<f64>() * p as f64;
            prop_assert!((total - d).abs() < 1e-9 * d);
        }

        #[test]
        fn robustness_ratio_exceeds_one_beyond_two(p in 3usize..200) {
            let r = robustness_curve([p], 1.0).unwrap()[0].ratio;
            prop_assert!(r > 1.0);
        }
    }
}
