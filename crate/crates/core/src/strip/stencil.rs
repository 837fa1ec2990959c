//! Finite-difference weights along the normal axis.

/// Fornberg's algorithm: weights `w[m][j]` such that
/// `f^(m)(z) ≈ Σ_j w[m][j] f(nodes[j])` for `m = 0..=max_order`.
pub fn fornberg(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut w = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    w[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Per-node stencil for one derivative order on a uniform grid `x_i = i h`.
#[derive(Debug, Clone)]
pub struct NormalStencil {
    pub order: usize,
    /// First node of each row's window.
    pub start: Vec<usize>,
    /// Row weights, already divided by `h^order`.
    pub weights: Vec<Vec<f64>>,
}

impl NormalStencil {
    /// Fourth-order accurate stencil for `order` in {1, 2}: centered five-point
    /// rows in the interior, one-sided windows near either end.
    pub fn fourth_order(order: usize, nodes: usize, h: f64) -> Self {
        assert!(order == 1 || order == 2);
        let centered = 5;
        let one_sided = if order == 1 { 5 } else { 6 };
        Self::build(order, nodes, h, centered, one_sided)
    }

    /// Second-order accurate stencil (three-point centered, one-sided at ends).
    pub fn second_order(order: usize, nodes: usize, h: f64) -> Self {
        assert!(order == 1 || order == 2);
        let one_sided = if order == 1 { 3 } else { 4 };
        Self::build(order, nodes, h, 3, one_sided)
    }

    fn build(order: usize, nodes: usize, h: f64, centered: usize, one_sided: usize) -> Self {
        let half = centered / 2;
        let mut start = Vec::with_capacity(nodes);
        let mut weights = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let (s, width) = if i >= half && i + half < nodes {
                (i - half, centered)
            } else if i < half {
                (0, one_sided)
            } else {
                (nodes - one_sided, one_sided)
            };
            let local: Vec<f64> = (0..width).map(|j| (s + j) as f64 - i as f64).collect();
            let w = fornberg(0.0, &local, order);
            let scale = h.powi(order as i32);
            start.push(s);
            weights.push(w[order].iter().map(|v| v / scale).collect());
        }
        NormalStencil {
            order,
            start,
            weights,
        }
    }
}

/// One-sided weights for the `order`-th derivative at `x = 0` using
/// `order + 4` nodes (accuracy order 4).
pub fn boundary_weights(order: usize, h: f64) -> Vec<f64> {
    let width = order + 4;
    let nodes: Vec<f64> = (0..width).map(|j| j as f64).collect();
    let w = fornberg(0.0, &nodes, order);
    let scale = h.powi(order as i32);
    w[order].iter().map(|v| v / scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_centered_weights() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_sided_second_order_first_derivative() {
        let w = fornberg(0.0, &[0.0, 1.0, 2.0], 1);
        let expect = [-1.5, 2.0, -0.5];
        for (a, b) in w[1].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stencils_exact_on_quartics() {
        let n = 20;
        let h = 0.1;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(4)).collect();
        for order in [1, 2] {
            let st = NormalStencil::fourth_order(order, n, h);
            for i in 0..n {
                let x = i as f64 * h;
                let approx: f64 = st.weights[i]
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * f[st.start[i] + j])
                    .sum();
                let exact = if order == 1 { 4.0 * x.powi(3) } else { 12.0 * x * x };
                assert!((approx - exact).abs() < 1e-9, "order {order} node {i}");
            }
        }
    }
}
