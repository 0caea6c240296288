//! Composite Simpson rule on uniform grids and Gauss–Legendre rules.

/// Number of quadrature points used for every coefficient integral on `[0, 1]`.
pub const DEFAULT_POINTS: usize = 1001;

/// Uniform grid of `n_pts` points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n_pts: usize) -> Vec<f64> {
    assert!(n_pts >= 2, "a grid needs at least two points");
    let h = (b - a) / (n_pts - 1) as f64;
    (0..n_pts).map(|i| a + h * i as f64).collect()
}

/// Simpson weights for `n_pts` uniform points over an interval of length `len`.
///
/// `n_pts` must be odd.
pub fn simpson_weights(len: f64, n_pts: usize) -> Vec<f64> {
    assert!(n_pts >= 3 && n_pts % 2 == 1, "Simpson needs an odd point count >= 3");
    let h = len / (n_pts - 1) as f64;
    (0..n_pts)
        .map(|i| {
            let c = if i == 0 || i == n_pts - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Integral of uniformly spaced samples over an interval of length `len`.
pub fn simpson(samples: &[f64], len: f64) -> f64 {
    simpson_weights(len, samples.len())
        .iter()
        .zip(samples)
        .map(|(w, v)| w * v)
        .sum()
}

pub fn simpson_fn(a: f64, b: f64, n_pts: usize, f: impl Fn(f64) -> f64) -> f64 {
    let samples: Vec<f64> = uniform_grid(a, b, n_pts).into_iter().map(f).collect();
    simpson(&samples, b - a)
}

/// Precomputed nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitGrid {
    pub fn new(n_pts: usize) -> Self {
        Self {
            nodes: uniform_grid(0.0, 1.0, n_pts),
            weights: simpson_weights(1.0, n_pts),
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, w)| w * f(x))
            .sum()
    }
}

impl Default for UnitGrid {
    fn default() -> Self {
        Self::new(DEFAULT_POINTS)
    }
}

/// Gauss–Legendre nodes used for modal coefficients on `[0, 1]`.
pub const GAUSS_POINTS: usize = 256;

/// `n`-point Gauss–Legendre rule mapped to `[0, 1]`, nodes ascending.
///
/// Nodes come from Newton iteration on `P_n` started at the Chebyshev-like
/// guess `cos(π(i − ¼)/(n + ½))`.
pub fn gauss_legendre_unit(n: usize) -> UnitGrid {
    assert!(n >= 1, "a rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for d in 1..n {
                let df = d as f64;
                let p2 = ((2.0 * df + 1.0) * x * p1 - df * p0) / (df + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x runs from near 1 downwards; map t = (1 ± x)/2.
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    UnitGrid { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v = simpson_fn(0.0, 2.0, 5, |x| x * x * x - x + 1.0);
        assert!((v - (4.0 - 2.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn unit_grid_integrates_cosine() {
        let g = UnitGrid::default();
        let v = g.integrate_fn(|x| (std::f64::consts::PI * x).cos().powi(2));
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gauss_rule_is_exact_to_degree_2n_minus_1() {
        for n in [1, 2, 5, 16, 64] {
            let g = gauss_legendre_unit(n);
            let total: f64 = g.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
            let d = 2 * n - 1;
            let v = g.integrate_fn(|x| x.powi(d as i32));
            assert!((v - 1.0 / (d + 1) as f64).abs() < 1e-14, "n={n}: {v}");
        }
    }

    #[test]
    fn gauss_rule_on_high_degree_legendre() {
        let g = gauss_legendre_unit(GAUSS_POINTS);
        let p80 = g.integrate_fn(|x| crate::special_fn::legendre_p_unchecked(80, x));
        assert!(p80.abs() < 1e-14);
        let norm = g.integrate_fn(|x| crate::special_fn::legendre_p_unchecked(80, x).powi(2));
        assert!((norm - 1.0 / 161.0).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn even_point_count_panics() {
        simpson_weights(1.0, 4);
    }
}
