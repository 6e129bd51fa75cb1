//! Reference-element polynomial basis and Gauss quadrature rules.
//!
//! Everything here lives on the unit reference interval `[0, 1]`. A background
//! element `I_j = [x_j, x_j + h]` maps to it through `xi = (x - x_j) / h`, and
//! cut intersections are simply sub-intervals of the reference interval.

use serde::{Deserialize, Serialize};

/// Orthonormal shifted Legendre polynomials `phi_k(xi) = sqrt(2k+1) P_k(2 xi - 1)`.
///
/// The basis is stored in monomial form in `xi`; for the degrees used here
/// (p <= 3, occasionally up to 6 in tests) this is exact in the integer
/// coefficients and cheap to differentiate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    degree: usize,
    // monomial[k][i] is the coefficient of xi^i in phi_k.
    monomial: Vec<Vec<f64>>,
    // Gauss rule with degree + 1 nodes, exact for products of two expansions' worth of degree.
    exact: QuadratureRule,
}

impl PolyBasis {
    pub fn new(degree: usize) -> Self {
        let monomial = (0..=degree)
            .map(|k| {
                let scale = ((2 * k + 1) as f64).sqrt();
                (0..=k)
                    .map(|i| {
                        let sign = if (k + i) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(k, i) * binomial(k + i, i) * scale
                    })
                    .collect()
            })
            .collect();
        Self { degree, monomial, exact: gauss_legendre(degree + 1) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Monomial coefficients of `phi_k`.
    pub fn monomial(&self, k: usize) -> &[f64] {
        &self.monomial[k]
    }

    pub fn value(&self, k: usize, xi: f64) -> f64 {
        horner(&self.monomial[k], xi)
    }

    /// `order`-th derivative of `phi_k` with respect to the reference coordinate.
    pub fn derivative(&self, k: usize, order: usize, xi: f64) -> f64 {
        let c = &self.monomial[k];
        if order > k {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in (order..c.len()).rev() {
            acc = acc * xi + c[i] * falling_factorial(i, order);
        }
        acc
    }

    /// Fills `out[k] = phi_k(xi)` for all modes.
    pub fn values_into(&self, xi: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.len()) {
            *o = self.value(k, xi);
        }
    }

    pub fn values(&self, xi: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.values_into(xi, &mut v);
        v
    }

    pub fn derivatives(&self, order: usize, xi: f64) -> Vec<f64> {
        (0..self.len()).map(|k| self.derivative(k, order, xi)).collect()
    }

    /// Evaluates the expansion `sum_k coeffs[k] phi_k(xi)`.
    pub fn eval(&self, coeffs: &[f64], xi: f64) -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| c * self.value(k, xi)).sum()
    }

    /// Exact integral of the expansion over `[xi0, xi1]`.
    pub fn integral(&self, coeffs: &[f64], xi0: f64, xi1: f64) -> f64 {
        self.exact.integrate(xi0, xi1, |xi| self.eval(coeffs, xi))
    }

    /// Converts a modal expansion to monomial coefficients in `xi`.
    pub fn to_monomial(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (k, c) in coeffs.iter().enumerate() {
            for (i, m) in self.monomial[k].iter().enumerate() {
                out[i] += c * m;
            }
        }
        out
    }
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

fn falling_factorial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureKind {
    Legendre,
    Lobatto,
}

/// Quadrature rule on the unit interval with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`; weights scale with `b - a`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (a + len * x, w * len))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n` and its derivative on `[-1, 1]`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1), valid away from the endpoints.
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Descending x from the cosine guess; store in ascending order.
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule {
        kind: QuadratureKind::Legendre,
        nodes: nodes.into_iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: weights.into_iter().map(|w| 0.5 * w).collect(),
    }
}

/// `q`-point Gauss–Lobatto rule on `[0, 1]` (endpoints included), exact to degree `2q - 3`.
pub fn gauss_lobatto(q: usize) -> QuadratureRule {
    assert!(q >= 2, "Gauss-Lobatto needs at least two nodes");
    let n = q - 1;
    let mut nodes = vec![0.0; q];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for i in 1..n {
        // interior nodes are the roots of P_n'
        let mut x = -(std::f64::consts::PI * i as f64 / n as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let d2p = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    if q % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_with_derivative(n, x);
            1.0 / ((n * (n + 1)) as f64 * p * p)
        })
        .collect();
    QuadratureRule {
        kind: QuadratureKind::Lobatto,
        nodes: nodes.into_iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights,
    }
}

/// Smallest `q >= 2` with `2q - 3 >= p`.
pub fn lobatto_order_for_degree(p: usize) -> usize {
    let mut q = 2;
    while 2 * q < p + 3 {
        q += 1;
    }
    q
}

/// Normalized first Gauss–Lobatto weight entering the high-order CFL bound.
/// The piecewise-constant scheme uses the full unit weight.
pub fn cfl_weight(p: usize) -> f64 {
    if p == 0 {
        1.0
    } else {
        gauss_lobatto(lobatto_order_for_degree(p)).weights[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(k: u32, a: f64, b: f64) -> f64 {
        (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0)
    }

    #[test]
    fn midpoint_and_two_point_rules() {
        let r = gauss_legendre(1);
        assert_eq!(r.nodes, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);
        let r = gauss_legendre(2);
        let off = 1.0 / (2.0 * 3f64.sqrt());
        assert!((r.nodes[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.nodes[1] - (0.5 + off)).abs() < 1e-15);
        for k in 0..4 {
            let q = r.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((q - monomial_integral(k as u32, 0.0, 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn three_point_legendre_integrates_quartic() {
        let r = gauss_legendre(3);
        assert!((r.integrate(0.0, 1.0, |x| x.powi(4)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn legendre_exactness_on_subintervals() {
        for n in 1..=10 {
            let r = gauss_legendre(n);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            for k in 0..(2 * n) as u32 {
                let exact = monomial_integral(k, -0.3, 1.7);
                let q = r.integrate(-0.3, 1.7, |x| x.powi(k as i32));
                assert!((q - exact).abs() <= 1e-13 * exact.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn lobatto_weights() {
        let r = gauss_lobatto(2);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        let r = gauss_lobatto(3);
        let expect = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
        for (w, e) in r.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
        assert!((gauss_lobatto(4).weights[0] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn lobatto_exactness_and_symmetry() {
        for q in 2..=8 {
            let r = gauss_lobatto(q);
            assert_eq!(r.nodes[0], 0.0);
            assert_eq!(r.nodes[q - 1], 1.0);
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!((r.weights[0] - r.weights[q - 1]).abs() < 1e-15);
            for k in 0..=(2 * q - 3) as u32 {
                let q_val = r.integrate(0.0, 1.0, |x| x.powi(k as i32));
                assert!((q_val - monomial_integral(k, 0.0, 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lobatto_order() {
        assert_eq!(lobatto_order_for_degree(0), 2);
        assert_eq!(lobatto_order_for_degree(1), 2);
        assert_eq!(lobatto_order_for_degree(2), 3);
        assert_eq!(lobatto_order_for_degree(3), 3);
        assert_eq!(lobatto_order_for_degree(4), 4);
    }

    #[test]
    fn basis_is_orthonormal() {
        for p in 0..=6 {
            let b = PolyBasis::new(p);
            let r = gauss_legendre(p + 1);
            for k in 0..=p {
                for l in 0..=p {
                    let m = r.integrate(0.0, 1.0, |x| b.value(k, x) * b.value(l, x));
                    let e = if k == l { 1.0 } else { 0.0 };
                    assert!((m - e).abs() < 1e-13, "p={p} k={k} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = PolyBasis::new(4);
        let h = f64::EPSILON.powf(1.0 / 3.0);
        for i in 0..20 {
            let x = -0.5 + 2.0 * (i as f64 + 0.3) / 20.0;
            for k in 0..=4 {
                let fd = (b.value(k, x + h) - b.value(k, x - h)) / (2.0 * h);
                let d = b.derivative(k, 1, x);
                assert!((fd - d).abs() < 1e-8 * (1.0 + d.abs()), "k={k} x={x}");
                let fd2 = (b.derivative(k, 1, x + h) - b.derivative(k, 1, x - h)) / (2.0 * h);
                assert!((fd2 - b.derivative(k, 2, x)).abs() < 1e-7 * (1.0 + fd2.abs()));
            }
        }
    }

    #[test]
    fn vandermonde_nonsingular() {
        let p = 3;
        let b = PolyBasis::new(p);
        let pts = [0.0, 0.3, 0.7, 1.0];
        let v = nalgebra::DMatrix::from_fn(p + 1, p + 1, |i, k| b.value(k, pts[i]));
        assert!(v.determinant().abs() > 1e-3);
    }
}
