//! Gauss–Legendre rules and a half-line integrator.
//!
//! The half-line integrator uses `t = u/(1-u)` followed by `u = sin²θ`, i.e. `t = tan²θ` on
//! `θ ∈ (0, π/2)`. Integrands behaving like `t^{-1/2}` at the origin or `t^{-3/2}` at infinity
//! become smooth in `θ`, so the Gauss rule converges geometrically.

use std::f64::consts::{FRAC_PI_2, PI};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m > 0, "rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_m
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|t| mid + half * t).collect();
        let w = self.weights.iter().map(|w| half * w).collect();
        (x, w)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let (x, w) = self.on_interval(a, b);
        x.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `∫_0^∞ f(t) dt` with the `t = tan²θ` substitution and an `m`-point rule in `θ`.
pub fn half_line_integral<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: F) -> f64 {
    rule.integrate(0.0, FRAC_PI_2, |theta| {
        let (s, c) = theta.sin_cos();
        let tan = s / c;
        // dt = 2 tanθ sec²θ dθ
        f(tan * tan) * 2.0 * tan / (c * c)
    })
}

/// Runs `half_line_integral` with doubling node counts until two successive values agree.
pub fn half_line_integral_adaptive<F: Fn(f64) -> f64>(
    f: F,
    initial_nodes: usize,
    tol: f64,
    max_nodes: usize,
) -> Option<(f64, usize)> {
    let mut m = initial_nodes;
    let mut prev = half_line_integral(&GaussLegendre::new(m), &f);
    while m < max_nodes {
        m *= 2;
        let next = half_line_integral(&GaussLegendre::new(m), &f);
        if (next - prev).abs() <= tol * next.abs().max(1.0) {
            return Some((next, m));
        }
        prev = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // exact through degree 9
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_accurate() {
        let rule = GaussLegendre::new(192);
        let v = rule.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn half_line_gaussian_integral() {
        let rule = GaussLegendre::new(96);
        let v = half_line_integral(&rule, |t| (-t).exp() / t.sqrt());
        assert!((v - PI.sqrt()).abs() < 1e-9, "{v}");
    }
}
