//! Composite Gauss-Legendre quadrature.
//!
//! Nodes and weights are computed once per rule by Newton iteration on the
//! Legendre polynomial, then reused across panels. An n-point rule is exact
//! for polynomials of degree `2n - 1`, which covers all the power-law spline
//! integrands that arise here; smooth non-polynomial integrands (bumps,
//! exponentials) are handled by splitting into panels.

/// A Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the n-point rule. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]` with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// Integrate over `[a, b]` split into `panels` equal panels.
    pub fn integrate_split<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| self.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f))
            .sum()
    }

    /// Integrate over consecutive breakpoints, splitting each segment.
    pub fn integrate_segments<F: FnMut(f64) -> f64>(
        &self,
        breaks: &[f64],
        panels_per_segment: usize,
        mut f: F,
    ) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate_split(w[0], w[1], panels_per_segment, &mut f))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_on_polynomials() {
        let rule = GaussLegendre::new(4);
        // degree 6 <= 2*4 - 1
        let v = rule.integrate(0.0, 1.0, |x| x.powi(6));
        assert_relative_eq!(v, 1.0 / 7.0, max_relative = 1e-14);
    }

    #[test]
    fn composite_sine() {
        let rule = GaussLegendre::new(8);
        let v = rule.integrate_split(0.0, std::f64::consts::PI, 4, f64::sin);
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn high_order_nodes_are_finite_and_symmetric() {
        for n in [1, 2, 3, 16, 32, 64] {
            let rule = GaussLegendre::new(n);
            assert_eq!(rule.order(), n);
            let weight_sum: f64 = rule.weights.iter().sum();
            assert_relative_eq!(weight_sum, 2.0, max_relative = 1e-12);
            for i in 0..n {
                assert!(rule.nodes[i].is_finite());
                assert_relative_eq!(rule.nodes[i], -rule.nodes[n - 1 - i], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn segments_match_single_interval() {
        let rule = GaussLegendre::new(16);
        let direct = rule.integrate_split(0.5, 3.0, 8, |x| (-x).exp() * x * x);
        let segmented = rule.integrate_segments(&[0.5, 1.0, 2.5, 3.0], 4, |x| (-x).exp() * x * x);
        assert_relative_eq!(direct, segmented, max_relative = 1e-12);
    }
}
