//! Neumann cosine / Dirichlet sine bases on `[0, 1]` and the mode projector.
//!
//! Cosine basis: `w_0 = 1`, `w_k = sqrt(2) cos(pi k x)`.
//! Sine basis: `s_k = sqrt(2) sin(pi k x)`, `k >= 1`.
//! Both are orthonormal in `L^2(0, 1)`; note `w_k' = -pi k s_k`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quadrature::{trapezoid_weights, GaussLegendre};

/// `sin(pi m / n)` with exact zeros at multiples of `n`.
pub fn sin_pi_ratio(m: usize, n: usize) -> f64 {
    let period = 2 * n;
    let r = m % period;
    let (r, sign) = if r >= n { (r - n, -1.0) } else { (r, 1.0) };
    if r == 0 {
        return 0.0;
    }
    // sin(pi r/n) = sin(pi (n-r)/n); fold onto [0, pi/2].
    let r = r.min(n - r);
    if 2 * r == n {
        return sign;
    }
    sign * (PI * r as f64 / n as f64).sin()
}

/// `cos(pi m / n)` with exact `+-1` at multiples of `n` and exact zeros at
/// odd multiples of `n/2`.
pub fn cos_pi_ratio(m: usize, n: usize) -> f64 {
    let period = 2 * n;
    let r = m % period;
    // cos is symmetric about pi: fold onto [0, n].
    let r = if r > n { period - r } else { r };
    if 2 * r == n {
        return 0.0;
    }
    if r == 0 {
        return 1.0;
    }
    if r == n {
        return -1.0;
    }
    if 2 * r < n {
        (PI * r as f64 / n as f64).cos()
    } else {
        -(PI * (n - r) as f64 / n as f64).cos()
    }
}

/// Samples on the closed uniform grid `x_j = j / (M - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "a grid field needs at least two points");
        Self { values }
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_values(vec![0.0; m])
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values((0..m).map(|j| f(grid_x(j, m))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn x(&self, j: usize) -> f64 {
        grid_x(j, self.len())
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Composite trapezoid integral over `[0, 1]`.
    pub fn integrate(&self) -> f64 {
        trapezoid_weights(self.len())
            .iter()
            .zip(&self.values)
            .map(|(w, f)| w * f)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        GridField::from_values(self.values.iter().map(|v| v * v).collect())
            .integrate()
            .sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub(crate) fn grid_x(j: usize, m: usize) -> f64 {
    j as f64 / (m - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Cosine,
    Sine,
}

impl Basis {
    pub fn first_mode(self) -> usize {
        match self {
            Basis::Cosine => 0,
            Basis::Sine => 1,
        }
    }
}

/// Coefficients against one of the orthonormal bases, modes `first..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    basis: Basis,
    coeffs: Vec<f64>,
}

impl CoeffVector {
    pub fn zeros(basis: Basis, n: usize) -> Self {
        let len = n + 1 - basis.first_mode();
        Self {
            basis,
            coeffs: vec![0.0; len],
        }
    }

    /// Coefficients for modes `first..=first + len - 1`.
    pub fn from_coeffs(basis: Basis, coeffs: Vec<f64>) -> Self {
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Highest mode index `N`.
    pub fn max_mode(&self) -> usize {
        self.coeffs.len() + self.basis.first_mode() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.coeffs[k - self.basis.first_mode()]
    }

    pub fn set(&mut self, k: usize, value: f64) {
        let i = k - self.basis.first_mode();
        self.coeffs[i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(k, c_k)` pairs.
    pub fn modes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let first = self.basis.first_mode();
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i + first, c))
    }

    pub fn dot(&self, other: &CoeffVector) -> f64 {
        assert_eq!(self.basis, other.basis);
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }
}

fn check_resolution(field: &GridField, n: usize) -> Result<()> {
    if field.len() < 2 * n + 1 {
        return Err(Error::InsufficientResolution { m: field.len(), n });
    }
    Ok(())
}

/// Cosine coefficients `(f, w_k)`, `k = 0..=n`, by the closed-grid
/// trapezoid rule.
pub fn cosine_analyze(field: &GridField, n: usize) -> Result<CoeffVector> {
    check_resolution(field, n)?;
    let m = field.len();
    let w = trapezoid_weights(m);
    let coeffs = (0..=n)
        .map(|k| {
            let norm = if k == 0 { 1.0 } else { SQRT_2 };
            norm * (0..m)
                .map(|j| w[j] * field.values[j] * cos_pi_ratio(k * j, m - 1))
                .sum::<f64>()
        })
        .collect();
    Ok(CoeffVector::from_coeffs(Basis::Cosine, coeffs))
}

/// Sine coefficients `(f, s_k)`, `k = 1..=n`, by the closed-grid trapezoid
/// rule.
pub fn sine_analyze(field: &GridField, n: usize) -> Result<CoeffVector> {
    check_resolution(field, n)?;
    let m = field.len();
    let w = trapezoid_weights(m);
    let coeffs = (1..=n)
        .map(|k| {
            SQRT_2
                * (0..m)
                    .map(|j| w[j] * field.values[j] * sin_pi_ratio(k * j, m - 1))
                    .sum::<f64>()
        })
        .collect();
    Ok(CoeffVector::from_coeffs(Basis::Sine, coeffs))
}

/// Evaluates the finite series on the closed uniform grid of `m` points.
pub fn synthesize(coeffs: &CoeffVector, m: usize) -> GridField {
    let mut out = vec![0.0; m];
    for (k, c) in coeffs.modes() {
        if c == 0.0 {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            let b = match coeffs.basis {
                Basis::Cosine if k == 0 => 1.0,
                Basis::Cosine => SQRT_2 * cos_pi_ratio(k * j, m - 1),
                Basis::Sine => SQRT_2 * sin_pi_ratio(k * j, m - 1),
            };
            *o += c * b;
        }
    }
    GridField::from_values(out)
}

/// The viscous projector: zeroes modes `k <= r` and keeps `k >= r + 1`.
pub fn project_t(coeffs: &CoeffVector, r: usize) -> CoeffVector {
    let mut out = coeffs.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        if i + coeffs.basis.first_mode() <= r {
            *c = 0.0;
        }
    }
    out
}

/// `b_k = (f, w_k')` for `k = 1..=n`, i.e. `-pi k` times the sine
/// coefficient of `f`.
pub fn derivative_inner_products(field: &GridField, n: usize) -> Result<Vec<f64>> {
    let s = sine_analyze(field, n)?;
    Ok(s.modes().map(|(k, c)| -PI * k as f64 * c).collect())
}

/// `(x, w_k)` for `k >= 1`: `sqrt(2) ((-1)^k - 1) / (pi k)^2`.
pub fn x_cosine_moment(k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let pk = PI * k as f64;
    SQRT_2 * (sign - 1.0) / (pk * pk)
}

/// `int_0^1 s_k dx = sqrt(2) (1 - (-1)^k) / (pi k)`.
pub fn sine_mean(k: usize) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        2.0 * SQRT_2 / (PI * k as f64)
    }
}

/// Basis values tabulated at the uniform grid and at Gauss-Legendre nodes.
///
/// Rows are points, columns are modes `0..=N`; the `k = 0` sine column is
/// zero and the `k = 0` cosine column is one.
#[derive(Debug, Clone)]
pub struct SpectralTables {
    pub modes: usize,
    pub grid: usize,
    pub grid_cos: Vec<f64>,
    pub grid_sin: Vec<f64>,
    pub gauss: GaussLegendre,
    pub gauss_cos: Vec<f64>,
    pub gauss_sin: Vec<f64>,
}

impl SpectralTables {
    /// Tables for `n` modes on an `m`-point grid, with an `m`-point Gauss rule.
    pub fn new(n: usize, m: usize) -> Self {
        let stride = n + 1;
        let mut grid_cos = vec![0.0; m * stride];
        let mut grid_sin = vec![0.0; m * stride];
        for j in 0..m {
            for k in 0..=n {
                grid_cos[j * stride + k] = if k == 0 { 1.0 } else { SQRT_2 * cos_pi_ratio(k * j, m - 1) };
                grid_sin[j * stride + k] = if k == 0 { 0.0 } else { SQRT_2 * sin_pi_ratio(k * j, m - 1) };
            }
        }
        let gauss = GaussLegendre::new(m);
        let q = gauss.len();
        let mut gauss_cos = vec![0.0; q * stride];
        let mut gauss_sin = vec![0.0; q * stride];
        for (i, &x) in gauss.nodes.iter().enumerate() {
            for k in 0..=n {
                let arg = PI * k as f64 * x;
                gauss_cos[i * stride + k] = if k == 0 { 1.0 } else { SQRT_2 * arg.cos() };
                gauss_sin[i * stride + k] = if k == 0 { 0.0 } else { SQRT_2 * arg.sin() };
            }
        }
        Self {
            modes: n,
            grid: m,
            grid_cos,
            grid_sin,
            gauss,
            gauss_cos,
            gauss_sin,
        }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.modes + 1
    }

    #[inline]
    pub fn grid_row_cos(&self, j: usize) -> &[f64] {
        let s = self.stride();
        &self.grid_cos[j * s..(j + 1) * s]
    }

    #[inline]
    pub fn grid_row_sin(&self, j: usize) -> &[f64] {
        let s = self.stride();
        &self.grid_sin[j * s..(j + 1) * s]
    }

    #[inline]
    pub fn gauss_row_cos(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.gauss_cos[i * s..(i + 1) * s]
    }

    #[inline]
    pub fn gauss_row_sin(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.gauss_sin[i * s..(i + 1) * s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cosine_mode(k: usize) -> impl Fn(f64) -> f64 {
        move |x| if k == 0 { 1.0 } else { SQRT_2 * (PI * k as f64 * x).cos() }
    }

    fn sine_mode(k: usize) -> impl Fn(f64) -> f64 {
        move |x| SQRT_2 * (PI * k as f64 * x).sin()
    }

    #[test]
    fn exact_trig_values() {
        assert_eq!(sin_pi_ratio(0, 8), 0.0);
        assert_eq!(sin_pi_ratio(8, 8), 0.0);
        assert_eq!(sin_pi_ratio(24, 8), 0.0);
        assert_eq!(sin_pi_ratio(4, 8), 1.0);
        assert_eq!(sin_pi_ratio(12, 8), -1.0);
        assert_eq!(cos_pi_ratio(8, 8), -1.0);
        assert_eq!(cos_pi_ratio(4, 8), 0.0);
        assert_eq!(cos_pi_ratio(16, 8), 1.0);
        for m in 0..50 {
            assert_relative_eq!(sin_pi_ratio(m, 7), (PI * m as f64 / 7.0).sin(), epsilon = 4e-15);
            assert_relative_eq!(cos_pi_ratio(m, 7), (PI * m as f64 / 7.0).cos(), epsilon = 4e-15);
        }
    }

    #[test]
    fn analyze_single_cosine_mode() {
        let f = GridField::from_fn(33, cosine_mode(3));
        let c = cosine_analyze(&f, 5).unwrap();
        for (k, v) in c.modes() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-14, "k={k} v={v}");
        }
    }

    #[test]
    fn analyze_constant() {
        let f = GridField::from_fn(33, |_| 2.5);
        let c = cosine_analyze(&f, 8).unwrap();
        assert_relative_eq!(c.get(0), 2.5, epsilon = 1e-14);
        assert!(c.modes().skip(1).all(|(_, v)| v.abs() < 1e-14));
    }

    #[test]
    fn analyze_identity_function_converges_to_closed_form() {
        // Trapezoid error is O(h^2) here (the even extension of x has a kink).
        let m = 4097;
        let f = GridField::from_fn(m, |x| x);
        let c = cosine_analyze(&f, 8).unwrap();
        assert_relative_eq!(c.get(1), -2.0 * SQRT_2 / (PI * PI), epsilon = 1e-7);
        assert_relative_eq!(c.get(1), -0.286_580, epsilon = 1e-6);
        for k in 1..=8 {
            assert_relative_eq!(c.get(k), x_cosine_moment(k), epsilon = 1e-7);
        }
    }

    #[test]
    fn sine_analyze_examples() {
        let f = GridField::from_fn(33, sine_mode(2));
        let s = sine_analyze(&f, 5).unwrap();
        assert_relative_eq!(s.get(2), 1.0, epsilon = 1e-14);
        assert!(s.modes().filter(|&(k, _)| k != 2).all(|(_, v)| v.abs() < 1e-14));

        let one = GridField::from_fn(4097, |_| 1.0);
        let s = sine_analyze(&one, 4).unwrap();
        assert_relative_eq!(s.get(1), 0.900_316, epsilon = 1e-6);
        assert_relative_eq!(s.get(1), sine_mean(1), epsilon = 1e-6);
        assert!(s.get(2).abs() < 1e-14);

        let w1 = GridField::from_fn(33, cosine_mode(1));
        let s = sine_analyze(&w1, 4).unwrap();
        assert!(s.get(1).abs() < 1e-14);
    }

    #[test]
    fn resolution_is_checked() {
        let f = GridField::zeros(10);
        assert!(matches!(cosine_analyze(&f, 5), Err(Error::InsufficientResolution { m: 10, n: 5 })));
        assert!(sine_analyze(&f, 4).is_ok());
    }

    #[test]
    fn synthesize_examples() {
        let z = synthesize(&CoeffVector::zeros(Basis::Cosine, 6), 17);
        assert!(z.values().iter().all(|&v| v == 0.0));
        let mut c = CoeffVector::zeros(Basis::Cosine, 6);
        c.set(1, 1.0);
        let f = synthesize(&c, 17);
        assert_eq!(f.values()[0], SQRT_2);
        assert_eq!(f.values()[16], -SQRT_2);
        let mut s = CoeffVector::zeros(Basis::Sine, 6);
        s.set(5, 3.0);
        let f = synthesize(&s, 17);
        assert_eq!(f.values()[0], 0.0);
        assert_eq!(f.values()[16], 0.0);
    }

    #[test]
    fn projector_examples() {
        let c = CoeffVector::from_coeffs(Basis::Cosine, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let t = project_t(&c, 2);
        assert_eq!(t.as_slice(), &[0.0, 0.0, 0.0, 4.0, 5.0]);
        let t0 = project_t(&c, 0);
        assert_eq!(t0.as_slice(), &[0.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn derivative_inner_product_examples() {
        let one = GridField::from_fn(8193, |_| 1.0);
        let b = derivative_inner_products(&one, 3).unwrap();
        // brute force: (1, w_1') = -sqrt(2) pi int sin(pi x) = -2 sqrt(2)
        assert_relative_eq!(b[0], -2.0 * SQRT_2, epsilon = 1e-6);
        assert!(b[1].abs() < 1e-14);

        let f = GridField::from_fn(33, |x| sine_mode(1)(x) / -PI);
        let b = derivative_inner_products(&f, 4).unwrap();
        assert_relative_eq!(b[0], 1.0, epsilon = 1e-14);
        assert!(b[1..].iter().all(|v| v.abs() < 1e-14));

        // Even about x = 1/2: s_k is odd about 1/2 for even k.
        let g = GridField::from_fn(65, |x| (x * (1.0 - x)).exp());
        let b = derivative_inner_products(&g, 8).unwrap();
        for k in (2..=8).step_by(2) {
            assert!(b[k - 1].abs() < 1e-13, "k={k}: {}", b[k - 1]);
        }
    }

    #[test]
    fn orthonormality_and_derivative_diagonal_on_grid() {
        let n = 16;
        let m = 4 * n + 1;
        let t = SpectralTables::new(n, m);
        let w = trapezoid_weights(m);
        for j in 0..=n {
            for k in 0..=n {
                let cc: f64 = (0..m).map(|i| w[i] * t.grid_row_cos(i)[j] * t.grid_row_cos(i)[k]).sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((cc - expect).abs() <= 1e-10, "cos ({j},{k}) {cc}");
                if j >= 1 && k >= 1 {
                    let dd: f64 = (0..m)
                        .map(|i| {
                            w[i] * (PI * j as f64) * t.grid_row_sin(i)[j] * (PI * k as f64) * t.grid_row_sin(i)[k]
                        })
                        .sum();
                    let expect = if j == k { (PI * k as f64).powi(2) } else { 0.0 };
                    assert!((dd - expect).abs() <= 1e-8, "deriv ({j},{k}) {dd}");
                }
            }
        }
    }

    #[test]
    fn gauss_tables_are_orthonormal() {
        let n = 12;
        let t = SpectralTables::new(n, 4 * n + 1);
        for j in 1..=n {
            for k in 1..=n {
                let ss: f64 = (0..t.gauss.len())
                    .map(|i| t.gauss.weights[i] * t.gauss_row_sin(i)[j] * t.gauss_row_sin(i)[k])
                    .sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ss - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        let g = GaussLegendre::new(80);
        for k in 1..=10 {
            assert_relative_eq!(g.integrate(|x| x * cosine_mode(k)(x)), x_cosine_moment(k), epsilon = 1e-14);
            assert_relative_eq!(g.integrate(sine_mode(k)), sine_mean(k), epsilon = 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn analyze_synthesize_round_trip(c in proptest::collection::vec(-1.0f64..1.0, 9), s in proptest::collection::vec(-1.0f64..1.0, 8)) {
                let cv = CoeffVector::from_coeffs(Basis::Cosine, c.clone());
                let back = cosine_analyze(&synthesize(&cv, 65), 8).unwrap();
                for (a, b) in back.as_slice().iter().zip(&c) {
                    prop_assert!((a - b).abs() <= 1e-13);
                }
                let sv = CoeffVector::from_coeffs(Basis::Sine, s.clone());
                let back = sine_analyze(&synthesize(&sv, 65), 8).unwrap();
                for (a, b) in back.as_slice().iter().zip(&s) {
                    prop_assert!((a - b).abs() <= 1e-13);
                }
            }

            #[test]
            fn projector_is_orthogonal_and_idempotent(c in proptest::collection::vec(-1.0f64..1.0, 1..20), r in 0usize..25) {
                let cv = CoeffVector::from_coeffs(Basis::Cosine, c);
                let t = project_t(&cv, r);
                prop_assert_eq!(project_t(&t, r), t.clone());
                prop_assert_eq!(t.dot(&cv), t.dot(&t));
            }

            #[test]
            fn parseval(c in proptest::collection::vec(-1.0f64..1.0, 9)) {
                let cv = CoeffVector::from_coeffs(Basis::Cosine, c);
                let f = synthesize(&cv, 65);
                prop_assert!((f.l2_norm().powi(2) - cv.norm_squared()).abs() <= 1e-12);
            }
        }
    }
}
