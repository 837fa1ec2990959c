//! Normal-axis quadrature on a uniform grid, including the one-sided
//! exponential convolutions used by the mode solvers.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalRule {
    /// Composite trapezoid, O(h²).
    #[default]
    Trapezoid,
    /// Trapezoid with Gregory end corrections, O(h⁴). Needs at least 6 nodes.
    Gregory,
}

const GREGORY_END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
// Gregory minus trapezoid, from the endpoint inwards.
const GREGORY_DELTA: [f64; 3] = [-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0];
// Cubic interpolation through nodes 0..3 integrated over [0, h].
const FIRST_CELL: [f64; 4] = [9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0];

impl NormalRule {
    pub fn weights(self, nodes: usize, h: f64) -> Vec<f64> {
        let mut w = vec![h; nodes];
        match self {
            NormalRule::Trapezoid => {
                w[0] = 0.5 * h;
                w[nodes - 1] = 0.5 * h;
            }
            NormalRule::Gregory => {
                assert!(nodes >= 6, "Gregory rule needs at least 6 nodes");
                for (j, c) in GREGORY_END.iter().enumerate() {
                    w[j] = c * h;
                    w[nodes - 1 - j] = c * h;
                }
            }
        }
        w
    }

    pub fn integrate(self, values: &[C64], h: f64) -> C64 {
        let w = self.weights(values.len(), h);
        values.iter().zip(&w).map(|(v, w)| v * *w).sum()
    }
}

/// `out[i] = ∫_0^{x_i} e^{-β(x_i - y)} f(y) dy` for every node.
pub fn left_convolution(f: &[C64], beta: f64, h: f64, rule: NormalRule) -> Vec<C64> {
    let n = f.len();
    let e = (-beta * h).exp();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut acc = C64::new(0.0, 0.0);
    for i in 1..n {
        acc = acc * e + (f[i - 1] * e + f[i]) * (0.5 * h);
        out[i] = acc;
    }
    if rule == NormalRule::Trapezoid || n < 2 {
        return out;
    }
    assert!(n >= 4, "Gregory convolution needs at least 4 nodes");
    // First cell: cubic rule on F(y_j) = e^{-β(h - y_j)} f_j.
    out[1] = (0..4)
        .map(|j| f[j] * (FIRST_CELL[j] * h * (-beta * h * (1.0 - j as f64)).exp()))
        .sum();
    // Left-end correction, shared by every i >= 2 up to the factor e^{-β x_i}.
    let left: C64 = (0..3)
        .map(|j| f[j] * (GREGORY_DELTA[j] * h * (beta * h * j as f64).exp()))
        .sum();
    for i in 2..n {
        let right: C64 = (0..3)
            .map(|j| f[i - j] * (GREGORY_DELTA[j] * h * (-beta * h * j as f64).exp()))
            .sum();
        let decay = (-beta * h * i as f64).exp();
        out[i] += right + left * decay;
    }
    out
}

/// `out[i] = ∫_{x_i}^{X} e^{-β(y - x_i)} f(y) dy` for every node.
pub fn right_convolution(f: &[C64], beta: f64, h: f64, rule: NormalRule) -> Vec<C64> {
    let rev: Vec<C64> = f.iter().rev().copied().collect();
    let mut out = left_convolution(&rev, beta, h, rule);
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, x: f64) -> (Vec<f64>, f64) {
        let h = x / (n - 1) as f64;
        ((0..n).map(|i| i as f64 * h).collect(), h)
    }

    #[test]
    fn gregory_exact_for_cubics() {
        let (xs, h) = grid(11, 2.0);
        let f: Vec<C64> = xs.iter().map(|x| C64::new(x * x * x - 2.0 * x + 1.0, 0.0)).collect();
        let exact = 16.0 / 4.0 - 4.0 + 2.0;
        let got = NormalRule::Gregory.integrate(&f, h);
        assert!((got.re - exact).abs() < 1e-13);
    }

    #[test]
    fn cumulative_integrals_exact_for_cubics_at_every_node() {
        let (xs, h) = grid(12, 3.0);
        let f: Vec<C64> = xs.iter().map(|x| C64::new(x * x * x, 0.0)).collect();
        let l = left_convolution(&f, 0.0, h, NormalRule::Gregory);
        let r = right_convolution(&f, 0.0, h, NormalRule::Gregory);
        for (i, x) in xs.iter().enumerate() {
            assert!((l[i].re - x.powi(4) / 4.0).abs() < 1e-12, "left {i}");
            assert!((r[i].re - (81.0 - x.powi(4)) / 4.0).abs() < 1e-11, "right {i}");
        }
    }

    #[test]
    fn exponential_convolution_converges_fourth_order() {
        // ∫_0^x e^{-β(x-y)} cos y dy in closed form.
        let beta = 2.5;
        let exact = |x: f64| {
            let d = 1.0 + beta * beta;
            (beta * x.cos() + x.sin() - beta * (-beta * x).exp()) / d
        };
        let err = |n: usize| {
            let (xs, h) = grid(n, 4.0);
            let f: Vec<C64> = xs.iter().map(|x| C64::new(x.cos(), 0.0)).collect();
            let l = left_convolution(&f, beta, h, NormalRule::Gregory);
            xs.iter()
                .zip(&l)
                .map(|(x, v)| (v.re - exact(*x)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(65), err(129));
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }
}
