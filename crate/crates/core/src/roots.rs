//! Bracketed scalar root finding: bisection followed by Newton polish.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f = {flo:e}, {fhi:e})")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("function is not finite at {0}")]
    NotFinite(f64),
}

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-13;
pub const NEWTON_POLISH_STEPS: usize = 3;

/// Root of `f` inside `[lo, hi]`, assuming a sign change.
///
/// `fdf` returns `(f(x), f'(x))`. After bisection, Newton steps are only
/// accepted while they stay inside the final bracket and reduce `|f|`.
pub fn bisect_newton(
    mut fdf: impl FnMut(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (lo, hi);
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if !fa.is_finite() {
        return Err(RootError::NotFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NotFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange {
            lo,
            hi,
            flo: fa,
            fhi: fb,
        });
    }
    let sa = fa.signum();
    while b - a > BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let (fm, _) = fdf(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..NEWTON_POLISH_STEPS {
        if fx == 0.0 || dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let cand = x - fx / dfx;
        if !(cand >= a - BISECTION_WIDTH && cand <= b + BISECTION_WIDTH) {
            break;
        }
        let (fc, dfc) = fdf(cand);
        if fc.abs() > fx.abs() {
            break;
        }
        x = cand;
        fx = fc;
        dfx = dfc;
    }
    Ok(x)
}
