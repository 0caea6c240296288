//! Legendre polynomials, the Gauss hypergeometric series and real-degree
//! Legendre functions of the first kind on `ξ ∈ [0, 1]`.
//!
//! The real-degree functions come from the hypergeometric connection
//!
//! ```text
//! P_ν(ξ)   = ₂F₁(−ν, ν+1; 1; (1−ξ)/2)
//! P′_ν(ξ)  = ν(ν+1)/2 · ₂F₁(1−ν, ν+2; 2; (1−ξ)/2)
//! ```
//!
//! which keeps the series argument inside `[0, ½]`. For larger degrees the
//! alternating series cancels badly (its largest term grows roughly like
//! `e^{1.76ν}` at `ξ = 0`), so degrees `ν ≥ 2` are reached by the upward
//! degree recurrence seeded with the series values at `ν mod 1` and
//! `ν mod 1 + 1`.

use thiserror::Error;

/// Relative truncation tolerance of the hypergeometric series.
pub const SERIES_RTOL: f64 = 1e-15;
/// Absolute floor under which a term is considered zero.
pub const SERIES_ATOL: f64 = 1e-300;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 1_000_000;
/// Degrees below this use the series directly; above it the recurrence.
const DIRECT_SERIES_MAX_DEGREE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("argument {x} outside the domain {domain}")]
    Domain { x: f64, domain: &'static str },
    #[error("hypergeometric parameter c = {0} is zero or a negative integer")]
    PoleInC(f64),
    #[error("hypergeometric series did not converge after {0} terms")]
    NonConvergence(usize),
    #[error("invalid Legendre degree {0}")]
    InvalidDegree(f64),
}

pub type Result<T> = std::result::Result<T, SpecialFnError>;

/// Parameters of `₂F₁(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HypParams {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Self { a, b, c, z }
    }
}

/// Degree of a real-order Legendre function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LegendreDegree(f64);

impl LegendreDegree {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(SpecialFnError::InvalidDegree(nu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Legendre polynomial `Pₙ(x)` by the three-term recurrence
/// `(k+1)P_{k+1} = (2k+1)xP_k − kP_{k−1}`.
pub fn legendre_p(n: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(SpecialFnError::Domain {
            x,
            domain: "[-1, 1]",
        });
    }
    Ok(legendre_p_unchecked(n, x))
}

pub(crate) fn legendre_p_unchecked(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Gauss hypergeometric series `Σ (a)ᵣ(b)ᵣ zʳ / ((c)ᵣ r!)`.
///
/// Pochhammer ratios are applied term to term so nothing factorial is ever
/// formed. The series stops when a term falls below `1e-15·|sum|` (floor
/// `1e-300`), or exactly when `a` or `b` is a non-positive integer.
pub fn hyp2f1(p: HypParams) -> Result<f64> {
    let HypParams { a, b, c, z } = p;
    if is_nonpositive_integer(c) {
        return Err(SpecialFnError::PoleInC(c));
    }
    if !(z.abs() <= 0.5) {
        return Err(SpecialFnError::Domain {
            x: z,
            domain: "|z| <= 0.5",
        });
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for r in 0..SERIES_MAX_TERMS {
        let rf = r as f64;
        term *= (a + rf) * (b + rf) / ((c + rf) * (rf + 1.0)) * z;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if term.abs() < (SERIES_RTOL * sum.abs()).max(SERIES_ATOL) {
            return Ok(sum);
        }
    }
    Err(SpecialFnError::NonConvergence(SERIES_MAX_TERMS))
}

fn check_unit_interval(xi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(SpecialFnError::Domain {
            x: xi,
            domain: "[0, 1]",
        })
    }
}

fn p_nu_series(nu: f64, xi: f64) -> Result<f64> {
    hyp2f1(HypParams::new(-nu, nu + 1.0, 1.0, (1.0 - xi) / 2.0))
}

fn dp_nu_series(nu: f64, xi: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(0.0);
    }
    let f = hyp2f1(HypParams::new(1.0 - nu, nu + 2.0, 2.0, (1.0 - xi) / 2.0))?;
    Ok(0.5 * nu * (nu + 1.0) * f)
}

/// `(P_ν(ξ), P′_ν(ξ))` together. Shares the recurrence between both.
pub fn legendre_p_nu_with_deriv(nu: LegendreDegree, xi: f64) -> Result<(f64, f64)> {
    check_unit_interval(xi)?;
    let nu = nu.value();
    if nu < DIRECT_SERIES_MAX_DEGREE {
        return Ok((p_nu_series(nu, xi)?, dp_nu_series(nu, xi)?));
    }
    let base = nu.fract();
    let steps = (nu - base).round() as usize;
    // P_{d-1}, P_d and their derivatives, starting from d = base + 1
    let (mut p_prev, mut p_cur) = (p_nu_series(base, xi)?, p_nu_series(base + 1.0, xi)?);
    let (mut d_prev, mut d_cur) = (dp_nu_series(base, xi)?, dp_nu_series(base + 1.0, xi)?);
    let mut degree = base + 1.0;
    for _ in 1..steps {
        let p_next = ((2.0 * degree + 1.0) * xi * p_cur - degree * p_prev) / (degree + 1.0);
        let d_next = d_prev + (2.0 * degree + 1.0) * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
        degree += 1.0;
    }
    Ok((p_cur, d_cur))
}

/// Real-degree Legendre function `P_ν(ξ)` for `ξ ∈ [0, 1]`.
pub fn legendre_p_nu(nu: LegendreDegree, xi: f64) -> Result<f64> {
    legendre_p_nu_with_deriv(nu, xi).map(|(p, _)| p)
}

/// `d/dξ P_ν(ξ)` for `ξ ∈ [0, 1]`.
pub fn legendre_p_nu_deriv(nu: LegendreDegree, xi: f64) -> Result<f64> {
    legendre_p_nu_with_deriv(nu, xi).map(|(_, d)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson_fn;

    fn deg(nu: f64) -> LegendreDegree {
        LegendreDegree::new(nu).unwrap()
    }

    /// Explicit finite sum Pₙ(x) = 2⁻ⁿ Σ (−1)ᵏ C(n,k) C(2n−2k,n) x^{n−2k}.
    fn legendre_explicit(n: usize, x: f64) -> f64 {
        fn binom(n: usize, k: usize) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let mut s = 0.0;
        for k in 0..=n / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(n, k) * binom(2 * n - 2 * k, n) * x.powi((n - 2 * k) as i32);
        }
        s / 2f64.powi(n as i32)
    }

    #[test]
    fn legendre_p_examples() {
        assert_eq!(legendre_p(0, 0.7).unwrap(), 1.0);
        assert!((legendre_p(2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((legendre_p(5, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(legendre_p(3, 1.01).is_err());
        assert!(legendre_p(3, -1.0 - 1e-13).is_ok());
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for n in 0..=8 {
            for i in 0..=40 {
                let x = -1.0 + i as f64 * 0.05;
                let d = legendre_p(n, x).unwrap() - legendre_explicit(n, x);
                assert!(d.abs() < 1e-13, "n={n} x={x} diff={d}");
            }
        }
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1(HypParams::new(0.3, 1.7, 2.5, 0.0)).unwrap(), 1.0);
        // geometric series Σ (1/2)^r
        assert!((hyp2f1(HypParams::new(1.0, 2.0, 2.0, 0.5)).unwrap() - 2.0).abs() < 1e-14);
        // terminating: 1 − 3 + 1.5
        assert!((hyp2f1(HypParams::new(-2.0, 3.0, 1.0, 0.5)).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn hyp2f1_rejects_bad_input() {
        assert!(matches!(
            hyp2f1(HypParams::new(1.0, 1.0, -2.0, 0.1)),
            Err(SpecialFnError::PoleInC(_))
        ));
        assert!(hyp2f1(HypParams::new(1.0, 1.0, 1.0, 0.6)).is_err());
    }

    #[test]
    fn legendre_p_nu_examples() {
        assert!((legendre_p_nu(deg(1.0), 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((legendre_p_nu(deg(2.0), 0.5).unwrap() + 0.125).abs() < 1e-15);
        // golden value from a 30-digit direct summation of the series at z = 1/2
        let golden = 0.539_352_601_188_379_4;
        assert!((legendre_p_nu(deg(0.5), 0.0).unwrap() - golden).abs() < 1e-14);
    }

    #[test]
    fn legendre_p_nu_deriv_examples() {
        assert!((legendre_p_nu_deriv(deg(1.0), 0.9).unwrap() - 1.0).abs() < 1e-15);
        assert!((legendre_p_nu_deriv(deg(2.0), 0.5).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(legendre_p_nu_deriv(deg(0.0), 0.2).unwrap(), 0.0);
    }

    #[test]
    fn high_precision_goldens() {
        // (ν, ξ, P_ν(ξ), P′_ν(ξ)) from 30-digit arithmetic
        let cases = [
            (1.7, 0.0, -0.473_745_246_469_066_05, 0.543_579_295_664_884_3),
            (3.2, 0.0, 0.127_620_013_654_472_1, -1.466_054_197_927_690_1),
            (3.2, 0.37, -0.381_828_492_907_955_2, -0.860_038_807_823_228_9),
            (7.3, 0.0, 0.129_568_019_527_569_2, -1.987_512_878_094_487_5),
            (7.3, 0.37, -0.179_223_968_202_922_88, 1.944_791_142_193_483),
            (25.6, 0.0, -0.126_339_060_491_753_65, 2.396_176_529_079_239_6),
            (25.6, 0.37, 0.073_838_893_353_017_91, -4.036_494_659_114_456_5),
        ];
        for (nu, xi, p, dp) in cases {
            let (gp, gd) = legendre_p_nu_with_deriv(deg(nu), xi).unwrap();
            assert!((gp - p).abs() < 1e-12, "P_{nu}({xi}) = {gp}, want {p}");
            assert!((gd - dp).abs() < 1e-11, "P'_{nu}({xi}) = {gd}, want {dp}");
        }
    }

    #[test]
    fn orthogonality_on_minus_one_one() {
        // Simpson on 2001 points leaves ~1.7e-9 on the n = 8 norm, so the
        // check sits at 1e-8.
        let n_pts = 2001;
        let tol = 1e-8;
        for n in 0..=8 {
            for m in 0..=n {
                let v = simpson_fn(-1.0, 1.0, n_pts, |x| {
                    legendre_p_unchecked(n, x) * legendre_p_unchecked(m, x)
                });
                if n == m {
                    assert!((v - 2.0 / (2 * n + 1) as f64).abs() < tol, "n={n}: {v}");
                } else {
                    assert!(v.abs() < tol, "n={n} m={m}: {v}");
                }
            }
        }
    }

    #[test]
    fn real_degree_agrees_with_polynomials() {
        for n in 0..=10 {
            for i in 0..=100 {
                let xi = i as f64 / 100.0;
                let a = legendre_p_nu(deg(n as f64), xi).unwrap();
                let b = legendre_p(n, xi).unwrap();
                assert!((a - b).abs() < 1e-10, "n={n} xi={xi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn recurrence_agrees_with_direct_series() {
        for &nu in &[2.0, 2.3, 3.9, 5.5, 8.0] {
            for i in 0..=20 {
                let xi = i as f64 / 20.0;
                let (p, d) = legendre_p_nu_with_deriv(deg(nu), xi).unwrap();
                assert!((p - p_nu_series(nu, xi).unwrap()).abs() < 1e-10);
                assert!((d - dp_nu_series(nu, xi).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn legendre_ode_residual() {
        let h = 1e-4;
        for &nu in &[0.5, 1.7, 3.2] {
            let p = |x: f64| legendre_p_nu(deg(nu), x).unwrap();
            for i in 1..10 {
                let x = i as f64 / 10.0;
                let flux = |y: f64| (1.0 - y * y) * (p(y + h / 2.0) - p(y - h / 2.0)) / h;
                let op = (flux(x + h / 2.0) - flux(x - h / 2.0)) / h + nu * (nu + 1.0) * p(x);
                assert!(op.abs() < 1e-4, "nu={nu} x={x}: residual {op}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for &nu in &[0.3, 0.5, 1.7, 3.2, 6.4, 11.9] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let fd = (legendre_p_nu(deg(nu), x + h).unwrap()
                    - legendre_p_nu(deg(nu), x - h).unwrap())
                    / (2.0 * h);
                let d = legendre_p_nu_deriv(deg(nu), x).unwrap();
                assert!((d - fd).abs() < 1e-6, "nu={nu} x={x}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(legendre_p_nu(deg(1.5), -0.1).is_err());
        assert!(legendre_p_nu_deriv(deg(1.5), 1.1).is_err());
        assert!(LegendreDegree::new(-0.5).is_err());
        assert!(LegendreDegree::new(f64::NAN).is_err());
    }
}
