//! Decay rates of the tail modes.
//!
//! For a Laplacian eigenvalue `λ` the constant profile `Θ ≡ Θ̂` gives modes
//! `cos(x(1−ξ))` with `x = λ·cot x` and rate `μ = Θ̂x²`. The quadratic profile
//! `Θ(ξ) = 3Θ̂(1−ξ²)/2` gives modes `P_ν(ξ)` with `P′_ν(0) = λ·P_ν(0)` and
//! rate `μ′ = 3Θ̂ν(ν+1)/2`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{
    lambda2_closed_form, optimal_core_weights, BudgetRule, CoreTopology, GraphError,
};
use crate::roots::{bisect_newton, RootError};
use crate::special_fn::{legendre_p_nu_with_deriv, LegendreDegree, SpecialFnError};
use crate::spectral::{lambda2, SpectralError};

/// Residual bound on `x − λ·cot x` at the returned root.
pub const CONSTANT_RESIDUAL_TOL: f64 = 1e-12;
/// Residual bound on `P′_ν(0) − λ·P_ν(0)` at the returned root, for
/// `λ ≤ 1`. Above that it scales with `λ`: the slope of the balance in `ν`
/// grows like `λ`, so one ulp in `ν` already costs about `λ·1e-16`.
pub const VARIABLE_RESIDUAL_TOL: f64 = 1e-11;
/// Step for the numerical `d/dν` used by the Newton polish.
const NU_DERIV_STEP: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("eigenvalue must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("diffusion scale must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("overtone index {0} is out of range")]
    InvalidOvertone(usize),
    #[error("root residual {residual:e} exceeds {tol:e} (lambda = {lambda}, n = {n})")]
    Residual {
        lambda: f64,
        n: usize,
        residual: f64,
        tol: f64,
    },
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type Result<T> = std::result::Result<T, RateError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaKind {
    Constant,
    Variable,
}

impl ThetaKind {
    pub fn name(self) -> &'static str {
        match self {
            ThetaKind::Constant => "constant",
            ThetaKind::Variable => "variable",
        }
    }
}

/// The diffusion scale `Θ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionScale(f64);

impl DiffusionScale {
    pub fn new(theta_hat: f64) -> Result<Self> {
        if theta_hat.is_finite() && theta_hat > 0.0 {
            Ok(Self(theta_hat))
        } else {
            Err(RateError::InvalidScale(theta_hat))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The quadratic profile `3Θ̂(1−ξ²)/2`, whose mean over `[0, 1]` is `Θ̂`.
    pub fn variable_profile(self, xi: f64) -> f64 {
        1.5 * self.0 * (1.0 - xi * xi)
    }
}

impl Default for DiffusionScale {
    fn default() -> Self {
        Self(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayMode {
    /// Laplacian branch, 1-based; branch 1 carries the consensus mode.
    pub k: usize,
    pub n: usize,
    pub kind: ThetaKind,
    pub mu: f64,
    /// `x` for the constant profile, `ν` for the quadratic one.
    pub root: f64,
}

impl DecayMode {
    pub fn with_branch(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(RateError::InvalidLambda(lambda))
    }
}

/// A root of `x = λ·cot x` on `((n−1)π, (n−½)π)` together with its
/// distances `y` and `z` from the two bracket ends, so `x = (n−1)π + y` and
/// `y + z = π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRoot {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ConstantRoot {
    /// `x − λ·cot x`, with `cot x` taken from whichever gap is smaller
    /// (`cot x = cot y = tan z`).
    pub fn residual(&self, lambda: f64) -> f64 {
        let cot = if self.y <= self.z {
            1.0 / self.y.tan()
        } else {
            self.z.tan()
        };
        self.x - lambda * cot
    }
}

/// Solves `x = λ·cot x` on the `n`-th bracket for `λ > 0`.
///
/// The unknown is the smaller of the two gaps: `y` solving
/// `x·sin y = λ·cos y` when `λ` is small against `x`, else `z` solving
/// `x·cos z = λ·sin z`. Either way the reduced unknown keeps full relative
/// precision, and so does the residual.
pub fn constant_root(lambda: f64, n: usize) -> Result<ConstantRoot> {
    check_lambda(lambda)?;
    if lambda == 0.0 || n == 0 {
        return Err(if n == 0 {
            RateError::InvalidOvertone(n)
        } else {
            RateError::InvalidLambda(lambda)
        });
    }
    let shift = (n - 1) as f64 * PI;
    let half = 0.5 * PI;
    // At y = π/4 the two sides balance when λ = x.
    let root = if lambda <= shift + 0.25 * PI {
        let y = bisect_newton(
            |y| {
                let (s, c) = y.sin_cos();
                let x = shift + y;
                (x * s - lambda * c, s + x * c + lambda * s)
            },
            0.0,
            half,
        )?;
        ConstantRoot {
            x: shift + y,
            y,
            z: half - y,
        }
    } else {
        let z = bisect_newton(
            |z| {
                let (s, c) = z.sin_cos();
                let x = shift + half - z;
                (x * c - lambda * s, -c - x * s - lambda * c)
            },
            0.0,
            half,
        )?;
        ConstantRoot {
            x: shift + half - z,
            y: half - z,
            z,
        }
    };
    let residual = root.residual(lambda);
    if residual.abs() >= CONSTANT_RESIDUAL_TOL {
        return Err(RateError::Residual {
            lambda,
            n,
            residual,
            tol: CONSTANT_RESIDUAL_TOL,
        });
    }
    Ok(root)
}

/// `n`-th root of `x = λ·cot x` and its rate `Θ̂x²`.
///
/// For `λ = 0` the Neumann rate `n²π²Θ̂` is returned with `x = nπ`, and
/// `n = 0` (the consensus mode) is allowed.
pub fn solve_mu_constant(lambda: f64, theta: DiffusionScale, n: usize) -> Result<DecayMode> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        let x = n as f64 * PI;
        return Ok(DecayMode {
            k: 1,
            n,
            kind: ThetaKind::Constant,
            mu: theta.0 * x * x,
            root: x,
        });
    }
    let x = constant_root(lambda, n)?.x;
    Ok(DecayMode {
        k: 2,
        n,
        kind: ThetaKind::Constant,
        mu: theta.0 * x * x,
        root: x,
    })
}

/// `f(ν) = P′_ν(0) − λ·P_ν(0)`.
pub fn legendre_balance(nu: f64, lambda: f64) -> Result<f64> {
    let (p, dp) = legendre_p_nu_with_deriv(LegendreDegree::new(nu)?, 0.0)?;
    Ok(dp - lambda * p)
}

/// `n`-th root of `P′_ν(0) = λ·P_ν(0)` and its rate `3Θ̂ν(ν+1)/2`.
///
/// The root lies in `(2(n−1), 2n−1)`: at the even left end `P′` vanishes and
/// at the odd right end `P` does, so the balance changes sign. For `λ = 0`
/// the root is the even degree `2(n−1)` itself.
pub fn solve_mu_variable(lambda: f64, theta: DiffusionScale, n: usize) -> Result<DecayMode> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(RateError::InvalidOvertone(n));
    }
    let lo = 2.0 * (n - 1) as f64;
    let nu = if lambda == 0.0 {
        lo
    } else {
        let mut err = None;
        let mut f = |nu: f64| match legendre_balance(nu, lambda) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        };
        let root = bisect_newton(
            |nu| {
                let h = NU_DERIV_STEP;
                let d = (f(nu + h) - f((nu - h).max(0.0))) / (nu + h - (nu - h).max(0.0));
                (f(nu), d)
            },
            lo,
            lo + 1.0,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let root = root?;
        let residual = legendre_balance(root, lambda)?;
        if residual.abs() >= VARIABLE_RESIDUAL_TOL * lambda.max(1.0) {
            return Err(RateError::Residual {
                lambda,
                n,
                residual,
                tol: VARIABLE_RESIDUAL_TOL,
            });
        }
        root
    };
    Ok(DecayMode {
        k: if lambda == 0.0 { 1 } else { 2 },
        n,
        kind: ThetaKind::Variable,
        mu: 1.5 * theta.0 * nu * (nu + 1.0),
        root: nu,
    })
}

pub fn solve_mu(kind: ThetaKind, lambda: f64, theta: DiffusionScale, n: usize) -> Result<DecayMode> {
    match kind {
        ThetaKind::Constant => solve_mu_constant(lambda, theta, n),
        ThetaKind::Variable => solve_mu_variable(lambda, theta, n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub lambda: f64,
    /// `μ₂,₁ / Θ̂` for the constant profile.
    pub mu_constant: f64,
    /// `μ′₂,₁ / Θ̂` for the quadratic profile.
    pub mu_variable: f64,
}

impl RatePoint {
    pub fn ratio(&self) -> f64 {
        self.mu_variable / self.mu_constant
    }
}

/// Slowest non-consensus rate of both profiles over a grid of `λ₂` values.
pub fn rate_curve(lambda_grid: &[f64], theta: DiffusionScale) -> Result<Vec<RatePoint>> {
    lambda_grid
        .iter()
        .map(|&lambda| {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(RateError::InvalidLambda(lambda));
            }
            Ok(RatePoint {
                lambda,
                mu_constant: solve_mu_constant(lambda, theta, 1)?.mu / theta.0,
                mu_variable: solve_mu_variable(lambda, theta, 1)?.mu / theta.0,
            })
        })
        .collect()
}

/// Logarithmically spaced `λ` grid, endpoints included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[points - 1] = hi;
    g
}

/// One topology under one budget: optimal `λ₂` and both slowest rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub topology: String,
    pub n: usize,
    pub budget: f64,
    pub lambda2: f64,
    pub mu_constant: f64,
    pub mu_variable: f64,
    pub ratio: f64,
}

/// Rates for an optimally weighted core. `λ₂` comes from the closed form
/// when one exists and from the eigensolver otherwise.
pub fn core_rates(t: &CoreTopology, rule: BudgetRule, theta: DiffusionScale) -> Result<RateRow> {
    let d = rule.budget_for(t)?;
    let l2 = match lambda2_closed_form(t, d) {
        Ok(v) => v,
        Err(GraphError::NoClosedForm(_)) => lambda2(&optimal_core_weights(t, d)?)?,
        Err(e) => return Err(e.into()),
    };
    let mu_c = solve_mu_constant(l2, theta, 1)?.mu;
    let mu_v = solve_mu_variable(l2, theta, 1)?.mu;
    Ok(RateRow {
        topology: t.kind.name().to_string(),
        n: t.n,
        budget: d.value(),
        lambda2: l2,
        mu_constant: mu_c,
        mu_variable: mu_v,
        ratio: mu_v / mu_c,
    })
}

/// Rows for one topology family over a range of vertex counts.
pub fn table_rates(
    make: impl Fn(usize) -> std::result::Result<CoreTopology, GraphError>,
    n_range: impl IntoIterator<Item = usize>,
    rule: BudgetRule,
    theta: DiffusionScale,
) -> Result<Vec<RateRow>> {
    n_range
        .into_iter()
        .map(|n| core_rates(&make(n)?, rule, theta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> DiffusionScale {
        DiffusionScale::default()
    }

    #[test]
    fn constant_examples() {
        let m = solve_mu_constant(1.0, unit(), 1).unwrap();
        assert!((m.root - 0.8603).abs() < 1e-4, "{}", m.root);
        assert!((m.mu - 0.7402).abs() < 5e-5, "{}", m.mu);
        let m = solve_mu_constant(2.0, unit(), 1).unwrap();
        assert!((m.root - 1.0768).abs() < 1e-4);
        let m = solve_mu_constant(3.0, unit(), 1).unwrap();
        assert!((m.root - 1.1924).abs() < 1e-4);
        let m = solve_mu_constant(0.0, unit(), 1).unwrap();
        assert!((m.mu - PI * PI).abs() < 1e-14);
        assert_eq!(solve_mu_constant(0.0, unit(), 0).unwrap().mu, 0.0);
    }

    #[test]
    fn variable_examples() {
        let m = solve_mu_variable(4.0 / 3.0, unit(), 1).unwrap();
        assert!((m.mu - 1.2772).abs() < 5e-4, "{}", m.mu);
        let m = solve_mu_variable(1.0, unit(), 1).unwrap();
        assert!((m.mu - 1.0586).abs() < 5e-4, "{}", m.mu);
        let m = solve_mu_variable(0.0, unit(), 1).unwrap();
        assert_eq!((m.root, m.mu), (0.0, 0.0));
        let m = solve_mu_variable(0.0, unit(), 3).unwrap();
        assert_eq!(m.root, 4.0);
        assert!((m.mu - 30.0).abs() < 1e-12);
    }

    #[test]
    fn variable_root_against_polynomial_degree_one() {
        // P₁ has P(0) = 0, so λ → ∞ pushes ν₂,₁ up to 1 and μ′ to 3Θ̂.
        let m = solve_mu_variable(1e8, unit(), 1).unwrap();
        assert!((m.root - 1.0).abs() < 1e-6);
    }

    #[test]
    fn small_lambda_matches_first_order_expansion() {
        // x² ≈ λ(1 − λ/3), ν(ν+1) ≈ λ for small λ.
        let l = 1e-6;
        let x = solve_mu_constant(l, unit(), 1).unwrap().root;
        assert!((x * x / l - 1.0).abs() < 1e-6);
        let nu = solve_mu_variable(l, unit(), 1).unwrap().root;
        assert!((nu * (nu + 1.0) / l - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rate_curve_limits() {
        let pts = rate_curve(&[1e-3, 1e6], unit()).unwrap();
        let r = pts[0].ratio();
        assert!((1.4985..=1.5005).contains(&r), "{r}");
        assert!((pts[1].mu_constant - PI * PI / 4.0).abs() < 1e-3);
        assert!((pts[1].mu_variable - 3.0).abs() < 1e-3);
        assert!(rate_curve(&[0.0], unit()).is_err());
    }

    #[test]
    fn cycle_four() {
        let p = rate_curve(&[2.0], unit()).unwrap()[0];
        assert!((p.mu_constant - 1.1597).abs() < 5e-5);
        assert!((p.mu_variable - 1.6022).abs() < 5e-4);
    }

    #[test]
    fn table_examples() {
        let rows = table_rates(CoreTopology::complete, [5], BudgetRule::Vertices, unit()).unwrap();
        assert!((rows[0].mu_constant - 1.3047).abs() < 5e-4);
        assert!((rows[0].mu_variable - 1.7792).abs() < 5e-4);
        assert!((rows[0].ratio - 1.3637).abs() < 5e-4);
        let rows = table_rates(CoreTopology::path, [10], BudgetRule::Vertices, unit()).unwrap();
        assert!((rows[0].mu_constant - 0.1165).abs() < 5e-4);
        assert!((rows[0].mu_variable - 0.1737).abs() < 5e-4);
        let rows = table_rates(CoreTopology::cycle, [14], BudgetRule::Edges, unit()).unwrap();
        assert!((rows[0].mu_constant - 0.1857).abs() < 5e-4);
        assert!((rows[0].mu_variable - 0.2756).abs() < 5e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiffusionScale::new(0.0).is_err());
        assert!(solve_mu_constant(-1.0, unit(), 1).is_err());
        assert!(solve_mu_constant(f64::NAN, unit(), 1).is_err());
        assert!(solve_mu_constant(1.0, unit(), 0).is_err());
        assert!(solve_mu_variable(1.0, unit(), 0).is_err());
    }

    #[test]
    fn scaling_is_exact() {
        for &c in &[0.25, 3.0, 17.0] {
            let t = DiffusionScale::new(c).unwrap();
            for &kind in &[ThetaKind::Constant, ThetaKind::Variable] {
                let a = solve_mu(kind, 2.5, unit(), 2).unwrap();
                let b = solve_mu(kind, 2.5, t, 2).unwrap();
                assert_eq!(a.root, b.root);
                assert!((b.mu - c * a.mu).abs() <= 1e-15 * b.mu);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn roots_are_bracketed_with_small_residual(log_l in -3.0f64..3.0, n in 1usize..=3) {
            let l = 10f64.powf(log_l);
            let c = constant_root(l, n).unwrap();
            let lo = (n - 1) as f64 * PI;
            prop_assert!(c.x > lo && c.x < lo + 0.5 * PI);
            prop_assert!(c.y > 0.0 && c.z > 0.0);
            prop_assert!(c.residual(l).abs() < CONSTANT_RESIDUAL_TOL);

            let v = solve_mu_variable(l, unit(), n).unwrap();
            let lo = 2.0 * (n - 1) as f64;
            prop_assert!(v.root > lo && v.root < lo + 1.0);
            prop_assert!(legendre_balance(v.root, l).unwrap().abs() < VARIABLE_RESIDUAL_TOL);
        }

        #[test]
        fn rates_increase_with_lambda(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            prop_assume!((a - b).abs() > 1e-9 * a.max(b));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p = rate_curve(&[lo, hi], unit()).unwrap();
            prop_assert!(p[0].mu_constant < p[1].mu_constant);
            prop_assert!(p[0].mu_variable < p[1].mu_variable);
            prop_assert!(p[0].mu_variable > p[0].mu_constant);
        }

        #[test]
        fn overtones_are_ordered(l in 1e-3f64..1e3) {
            for kind in [ThetaKind::Constant, ThetaKind::Variable] {
                let mut prev = 0.0;
                for n in 1..=4 {
                    let m = solve_mu(kind, l, unit(), n).unwrap().mu;
                    prop_assert!(m > prev);
                    prev = m;
                }
            }
        }
    }
}
