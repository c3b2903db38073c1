//! Gauss–Legendre panels with spectral cumulative integration.
//!
//! On a panel the integrand is represented by its values at the `n` nodes.
//! The matrix `S[i][j] = ∫_{-1}^{x_i} L_j(s) ds` (with `L_j` the Lagrange basis)
//! turns node values into the running integral at every node, which is what a
//! chain of nested integrating factors needs.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A Gauss–Legendre panel rule with its cumulative-integration matrix.
#[derive(Clone, Debug)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    cumulative: Vec<Vec<f64>>,
    end_row: Vec<f64>,
}

impl PanelRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let bw = barycentric_weights(&nodes);
        let mut cumulative = vec![vec![0.0; n]; n];
        for (i, row) in cumulative.iter_mut().enumerate() {
            // ∫_{-1}^{x_i} L_j exactly: the same rule mapped onto [-1, x_i]
            let half = 0.5 * (nodes[i] + 1.0);
            for (tk, wk) in nodes.iter().zip(&weights) {
                let s = -1.0 + half * (tk + 1.0);
                let l = lagrange_row(&nodes, &bw, s);
                for j in 0..n {
                    row[j] += wk * half * l[j];
                }
            }
        }
        let end_row = lagrange_row(&nodes, &bw, 1.0);
        PanelRule {
            nodes,
            weights,
            cumulative,
            end_row,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Physical node positions on `[a, b]` (either orientation).
    pub fn map_nodes(&self, a: f64, b: f64) -> Vec<f64> {
        self.nodes.iter().map(|t| a + 0.5 * (b - a) * (t + 1.0)).collect()
    }

    /// `∫_a^{node_i} g` for node values `g` on `[a, b]`.
    pub fn running(&self, a: f64, b: f64, g: &[f64]) -> Vec<f64> {
        let half = 0.5 * (b - a);
        self.cumulative
            .iter()
            .map(|row| half * row.iter().zip(g).map(|(s, v)| s * v).sum::<f64>())
            .collect()
    }

    /// `∫_a^b g` for node values `g`.
    pub fn total(&self, a: f64, b: f64, g: &[f64]) -> f64 {
        0.5 * (b - a) * self.weights.iter().zip(g).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Interpolated value at the right end `b` of the panel.
    pub fn endpoint(&self, g: &[f64]) -> f64 {
        self.end_row.iter().zip(g).map(|(a, b)| a * b).sum()
    }
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let p: f64 = (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            1.0 / p
        })
        .collect()
}

fn lagrange_row(x: &[f64], bw: &[f64], s: f64) -> Vec<f64> {
    if let Some(j) = x.iter().position(|&xj| xj == s) {
        let mut r = vec![0.0; x.len()];
        r[j] = 1.0;
        return r;
    }
    let terms: Vec<f64> = x.iter().zip(bw).map(|(xj, wj)| wj / (s - xj)).collect();
    let denom: f64 = terms.iter().sum();
    terms.iter().map(|t| t / denom).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn running_integral_of_exponential() {
        let r = PanelRule::new(16);
        let (a, b) = (0.3, -0.7);
        let nodes = r.map_nodes(a, b);
        let g: Vec<f64> = nodes.iter().map(|t| t.exp()).collect();
        let run = r.running(a, b, &g);
        for (t, v) in nodes.iter().zip(&run) {
            assert!((v - (t.exp() - a.exp())).abs() < 1e-14);
        }
        assert!((r.total(a, b, &g) - (b.exp() - a.exp())).abs() < 1e-14);
        let h: Vec<f64> = nodes.iter().map(|t| t.sin()).collect();
        assert!((r.endpoint(&h) - b.sin()).abs() < 1e-13);
    }
}
