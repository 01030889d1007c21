//! Quadrature rules on `[0, 1]`.

use std::f64::consts::PI;

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Newton on P_n starting from the Tricomi estimate of the i-th root.
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                let dz = p / d;
                z -= dz;
                if dz.abs() < 3e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, z);
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // Map [-1, 1] -> [0, 1]; roots come out in decreasing order.
            nodes[i] = 0.5 * (1.0 - z);
            nodes[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Trapezoid weights on the closed uniform grid of `m` points.
pub fn trapezoid_weights(m: usize) -> Vec<f64> {
    assert!(m >= 2);
    let h = 1.0 / (m - 1) as f64;
    let mut w = vec![h; m];
    w[0] = 0.5 * h;
    w[m - 1] = 0.5 * h;
    w
}

/// Result of a vector-valued Romberg integration.
#[derive(Debug, Clone)]
pub struct RombergResult {
    pub values: Vec<f64>,
    /// Max abs change between the last two diagonal entries.
    pub error_estimate: f64,
    /// Finest number of intervals used.
    pub intervals: usize,
}

/// Romberg integration of a vector-valued integrand on `[0, 1]`.
///
/// `f(x, out)` writes `dim` integrand values into `out`. The composite
/// trapezoid sums start at `base` intervals and are doubled at least until
/// `min_intervals`; refinement continues past that until the diagonal
/// converges to `tol` (absolute, scaled by `1 + |value|`) or `max_levels`
/// doublings are spent.
pub fn romberg(
    dim: usize,
    base: usize,
    min_intervals: usize,
    tol: f64,
    max_levels: usize,
    f: impl Fn(f64, &mut [f64]),
) -> RombergResult {
    let mut buf = vec![0.0; dim];
    let mut n = base.max(1);
    // Initial trapezoid sum on `n` intervals.
    let mut sum = vec![0.0; dim];
    for j in 0..=n {
        let x = j as f64 / n as f64;
        f(x, &mut buf);
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        for (s, b) in sum.iter_mut().zip(&buf) {
            *s += w * b;
        }
    }
    let mut rows: Vec<Vec<Vec<f64>>> = vec![vec![sum.iter().map(|s| s / n as f64).collect()]];
    let mut err = f64::INFINITY;
    for level in 1..=max_levels {
        // Add midpoints to refine n -> 2n.
        for j in 0..n {
            let x = (j as f64 + 0.5) / n as f64;
            f(x, &mut buf);
            for (s, b) in sum.iter_mut().zip(&buf) {
                *s += b;
            }
        }
        n *= 2;
        let mut row = vec![sum.iter().map(|s| s / n as f64).collect::<Vec<f64>>()];
        let prev = &rows[level - 1];
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let hi = &row[j - 1];
            let lo = &prev[j - 1];
            let next: Vec<f64> = hi
                .iter()
                .zip(lo)
                .map(|(h, l)| h + (h - l) / (factor - 1.0))
                .collect();
            row.push(next);
        }
        err = row[level]
            .iter()
            .zip(&prev[level - 1])
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max);
        rows.push(row);
        if n >= min_intervals && err <= tol {
            break;
        }
    }
    let last = rows.last().unwrap();
    RombergResult {
        values: last.last().unwrap().clone(),
        error_estimate: err,
        intervals: n,
    }
}
