//! Scalar maximum-principle limiter, Euler positivity limiter and TVB limiter,
//! all acting on unit polynomials.

use serde::{Deserialize, Serialize};

use crate::basis::{gauss_lobatto, horner, lobatto_order_for_degree, PolyBasis};
use crate::boundary::{BoundaryCondition, Side};
use crate::error::{CutDgError, Result};
use crate::mesh::MeshComplex;
use crate::reconstruction::UnitPolynomial;
use crate::state::DgState;

pub use crate::flux::pressure;

/// Admissible interval `[lower, upper]` of a scalar problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Tolerance on bound violations and on means sitting at a bound.
pub const BOUND_TOL: f64 = 1e-12;

/// Minimum and maximum of a modal expansion over `[xi0, xi1]`, computed from
/// the end points and the closed-form roots of the derivative (`p <= 3`).
/// Higher degrees fall back to dense sampling.
pub fn exact_extrema(basis: &PolyBasis, coeffs: &[f64], xi0: f64, xi1: f64) -> (f64, f64) {
    let mono = basis.to_monomial(coeffs);
    let eval = |x: f64| horner(&mono, x);
    let (mut lo, mut hi) = {
        let (a, b) = (eval(xi0), eval(xi1));
        (a.min(b), a.max(b))
    };
    let mut visit = |x: f64| {
        if x > xi0 && x < xi1 {
            let v = eval(x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    };
    match mono.len() {
        0..=2 => {}
        3 => {
            if mono[2] != 0.0 {
                visit(-mono[1] / (2.0 * mono[2]));
            }
        }
        4 => {
            // derivative 3 c3 x^2 + 2 c2 x + c1
            for r in quadratic_roots(3.0 * mono[3], 2.0 * mono[2], mono[1]) {
                visit(r);
            }
        }
        _ => {
            let n = 512;
            for i in 1..n {
                visit(xi0 + (xi1 - xi0) * i as f64 / n as f64);
            }
        }
    }
    (lo, hi)
}

/// Real roots of `a x^2 + b x + c`.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Scales the unit around its mean so that its exact range lies in `bounds`.
/// Returns `theta`.
pub fn scalar_bound_limiter(unit: &mut UnitPolynomial, basis: &PolyBasis, bounds: ScalarBounds) -> Result<f64> {
    let ubar = unit.mean(basis, 0);
    let ScalarBounds { lower: m, upper: big_m } = bounds;
    if ubar < m - BOUND_TOL || ubar > big_m + BOUND_TOL || !ubar.is_finite() {
        return Err(CutDgError::MeanOutOfBounds { mean: ubar, lower: m, upper: big_m });
    }
    let (lo, hi) = exact_extrema(basis, unit.var(0), unit.xi_left, unit.xi_right);
    if lo >= m && hi <= big_m {
        return Ok(1.0);
    }
    let mut theta: f64 = 1.0;
    if hi > big_m {
        theta = theta.min(((big_m - ubar) / (hi - ubar)).abs());
    }
    if lo < m {
        theta = theta.min(((m - ubar) / (lo - ubar)).abs());
    }
    if ubar > big_m || ubar < m {
        theta = 0.0;
    }
    scale_around_mean(unit, 0, ubar, theta);
    Ok(theta)
}

/// `u <- ubar + theta (u - ubar)` for variable `v`.
pub(crate) fn scale_around_mean(unit: &mut UnitPolynomial, v: usize, ubar: f64, theta: f64) {
    if theta >= 1.0 {
        return;
    }
    let c = unit.var_mut(v);
    c[0] = ubar + theta * (c[0] - ubar);
    for ck in &mut c[1..] {
        *ck *= theta;
    }
    unit.changed = true;
}

/// Parameters of the admissible set `{rho >= eps, p >= eps}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityParams {
    pub epsilon: f64,
    pub gamma: f64,
}

/// Outcome of the positivity limiter on one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityOutcome {
    pub theta1: f64,
    pub theta2: f64,
    /// `true` when the mean lay outside the `eps`-set and a reduced `eps` was used.
    pub reduced_epsilon: bool,
}

/// Check points of a unit in its reference coordinate: Gauss–Lobatto points
/// on the whole unit and on every member.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckPointSet {
    nodes: Vec<f64>,
}

impl CheckPointSet {
    pub fn new(degree: usize) -> Self {
        Self { nodes: gauss_lobatto(lobatto_order_for_degree(degree)).nodes }
    }

    pub fn points(&self, unit: &UnitPolynomial, mesh: &MeshComplex) -> Vec<f64> {
        let mut pts: Vec<f64> = self.nodes.iter().map(|t| unit.xi_left + (unit.xi_right - unit.xi_left) * t).collect();
        if unit.members.len() > 1 {
            for a in unit.members.clone() {
                let (l, r) = DgState::xi_range(mesh, a);
                let d = mesh.elements[a].cell as f64 - unit.cell as f64;
                pts.extend(self.nodes.iter().map(|t| l + d + (r - l) * t));
            }
        }
        pts
    }

    /// Points on a single element `a`, in its own cell's coordinate.
    pub fn element_points(&self, mesh: &MeshComplex, a: usize) -> Vec<f64> {
        let (l, r) = DgState::xi_range(mesh, a);
        self.nodes.iter().map(|t| l + (r - l) * t).collect()
    }
}

fn unit_state(unit: &UnitPolynomial, basis: &PolyBasis, xi: f64) -> [f64; 3] {
    [unit.value(basis, 0, xi), unit.value(basis, 1, xi), unit.value(basis, 2, xi)]
}

/// Zhang–Shu type limiter: first scales the density so that `rho >= eps` at
/// the check points, then all variables so that `p >= eps` there.
pub fn euler_positivity_limiter(
    unit: &mut UnitPolynomial,
    basis: &PolyBasis,
    points: &[f64],
    params: PositivityParams,
) -> Result<PositivityOutcome> {
    euler_positivity_limiter_with_margin(unit, basis, points, params, [0.0, 0.0])
}

/// As [`euler_positivity_limiter`], aiming `extra = [density, pressure]`
/// above `eps` at the check points (as far as the mean allows).
pub fn euler_positivity_limiter_with_margin(
    unit: &mut UnitPolynomial,
    basis: &PolyBasis,
    points: &[f64],
    params: PositivityParams,
    extra: [f64; 2],
) -> Result<PositivityOutcome> {
    let gamma = params.gamma;
    let mean = [unit.mean(basis, 0), unit.mean(basis, 1), unit.mean(basis, 2)];
    let pbar = pressure(&mean, gamma);
    if !(mean[0] > 0.0 && pbar > 0.0) || !pbar.is_finite() {
        return Err(CutDgError::MeanNotAdmissible { rho: mean[0], pressure: pbar });
    }
    let mut eps = params.epsilon;
    let mut reduced = false;
    if mean[0] < eps || pbar < eps {
        eps = eps.min(mean[0]).min(pbar);
        reduced = true;
    }

    // aim slightly above eps so that round-off in the scaled polynomial
    // cannot push check-point values below it
    let eps_rho = with_margin(eps, extra[0] + 64.0 * f64::EPSILON * mean[0], mean[0]);
    let rho_min = points.iter().map(|&xi| unit.value(basis, 0, xi)).fold(f64::INFINITY, f64::min);
    let theta1 = if rho_min < eps_rho { ((mean[0] - eps_rho) / (mean[0] - rho_min)).min(1.0) } else { 1.0 };
    scale_around_mean(unit, 0, mean[0], theta1);

    // pressure is a difference of energies, so its round-off scales with the
    // largest energy at the check points, not with the mean
    let mut energy_scale = mean[2].abs() + 0.5 * mean[1] * mean[1] / mean[0];
    for &xi in points {
        let q = unit_state(unit, basis, xi);
        let kinetic = if q[0] > 0.0 { 0.5 * q[1] * q[1] / q[0] } else { 0.0 };
        energy_scale = energy_scale.max(q[2].abs()).max(kinetic);
    }
    let eps_p = with_margin(eps, extra[1] + 64.0 * f64::EPSILON * (gamma - 1.0) * energy_scale, pbar);
    let mut theta2: f64 = 1.0;
    for &xi in points {
        let q = unit_state(unit, basis, xi);
        if pressure(&q, gamma) < eps_p {
            theta2 = theta2.min(segment_parameter(&mean, &q, eps_p, gamma));
        }
    }
    if theta2 < 1.0 {
        for v in 0..3 {
            scale_around_mean(unit, v, mean[v], theta2);
        }
    }
    Ok(PositivityOutcome { theta1, theta2, reduced_epsilon: reduced })
}

/// `eps + margin`, but never more than halfway from `eps` to the mean.
fn with_margin(eps: f64, margin: f64, mean: f64) -> f64 {
    (eps + margin).min(eps + 0.5 * (mean - eps)).max(eps)
}

/// Largest `t` in `[0, 1]` such that `p((1 - t) mean + t q) >= eps`, assuming
/// the mean satisfies it. Solves the quadratic `rho E - m^2/2 - eps rho/(gamma-1) = 0`
/// along the segment, with bisection as a safeguard.
pub fn segment_parameter(mean: &[f64; 3], q: &[f64; 3], eps: f64, gamma: f64) -> f64 {
    let d = [q[0] - mean[0], q[1] - mean[1], q[2] - mean[2]];
    let e0 = mean[2] - eps / (gamma - 1.0);
    let a = d[2] * d[0] - 0.5 * d[1] * d[1];
    let b = e0 * d[0] + d[2] * mean[0] - mean[1] * d[1];
    let c = e0 * mean[0] - 0.5 * mean[1] * mean[1];
    let at = |t: f64| {
        let s = [mean[0] + t * d[0], mean[1] + t * d[1], mean[2] + t * d[2]];
        pressure(&s, gamma)
    };
    let mut best = None;
    for r in quadratic_roots(a, b, c) {
        if (0.0..=1.0).contains(&r) && best.is_none_or(|b: f64| r < b) {
            best = Some(r);
        }
    }
    if let Some(t) = best {
        if at(t) >= eps * (1.0 - 1e-10) {
            return t;
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// TVB-modified minmod: returns `a1` untouched when `|a1| <= M h^2`.
pub fn tvb_minmod(a1: f64, a2: f64, a3: f64, m_tvb: f64, h: f64) -> f64 {
    if a1.abs() <= m_tvb * h * h {
        a1
    } else {
        minmod(a1, a2, a3)
    }
}

pub fn minmod(a1: f64, a2: f64, a3: f64) -> f64 {
    if a1 > 0.0 && a2 > 0.0 && a3 > 0.0 {
        a1.min(a2).min(a3)
    } else if a1 < 0.0 && a2 < 0.0 && a3 < 0.0 {
        a1.max(a2).max(a3)
    } else {
        0.0
    }
}

/// Componentwise TVB limiting of a spatially ordered list of units. A unit
/// whose end deviations are modified is replaced, per variable, by the linear
/// function with the same mean and limited end deviation. Returns the number
/// of units changed.
pub fn apply_tvb(units: &mut [UnitPolynomial], basis: &PolyBasis, bc: &BoundaryCondition, m_tvb: f64, t: f64) -> usize {
    if basis.degree() == 0 || units.is_empty() {
        return 0;
    }
    let n = units.len();
    let nvars = units[0].nvars;
    let means: Vec<[f64; 3]> = units
        .iter()
        .map(|u| {
            let mut m = [0.0; 3];
            for (v, mv) in m.iter_mut().enumerate().take(nvars) {
                *mv = u.mean(basis, v);
            }
            m
        })
        .collect();
    let lens: Vec<f64> = units.iter().map(|u| u.length).collect();
    let (ghost_l, ghost_r) = if bc.is_periodic() {
        (means[n - 1], means[0])
    } else {
        let mut gl = [0.0; 3];
        let mut gr = [0.0; 3];
        bc.ghost_state(Side::Left, &means[0][..nvars], &means[n - 1][..nvars], t, &mut gl[..nvars]);
        bc.ghost_state(Side::Right, &means[n - 1][..nvars], &means[0][..nvars], t, &mut gr[..nvars]);
        (gl, gr)
    };
    let (len_l, len_r) = if bc.is_periodic() { (lens[n - 1], lens[0]) } else { (lens[0], lens[n - 1]) };

    let mut changed = 0;
    for i in 0..n {
        let (ml, ll) = if i == 0 { (ghost_l, len_l) } else { (means[i - 1], lens[i - 1]) };
        let (mr, lr) = if i == n - 1 { (ghost_r, len_r) } else { (means[i + 1], lens[i + 1]) };
        let li = lens[i];
        let fl = 2.0 * li / (li + ll);
        let fr = 2.0 * li / (li + lr);
        let u = &mut units[i];
        let mut any = false;
        let mut limited = [f64::NAN; 3];
        for v in 0..nvars {
            let ubar = means[i][v];
            let dr = u.value(basis, v, u.xi_right) - ubar;
            let dl = ubar - u.value(basis, v, u.xi_left);
            let dp = (mr[v] - ubar) * fr;
            let dm = (ubar - ml[v]) * fl;
            let nr = tvb_minmod(dr, dp, dm, m_tvb, li);
            let nl = tvb_minmod(dl, dp, dm, m_tvb, li);
            let scale = ubar.abs().max(dr.abs()).max(dl.abs()).max(1e-300);
            if (nr - dr).abs() > 1e-12 * scale || (nl - dl).abs() > 1e-12 * scale {
                any = true;
                limited[v] = minmod(0.5 * (dr + dl), dp, dm);
            }
        }
        if !any {
            continue;
        }
        changed += 1;
        for v in 0..nvars {
            if limited[v].is_nan() {
                continue;
            }
            let ubar = means[i][v];
            let width = u.xi_right - u.xi_left;
            let center = 0.5 * (u.xi_left + u.xi_right);
            let beta = 2.0 * limited[v] / width;
            let alpha = ubar - beta * center;
            let c = u.var_mut(v);
            c.iter_mut().for_each(|x| *x = 0.0);
            c[1] = beta / (2.0 * 3f64.sqrt());
            c[0] = alpha + 0.5 * beta;
        }
        u.changed = true;
    }
    changed
}

/// Element `a` leaves `bounds` somewhere on `K_a` by more than `BOUND_TOL`.
pub fn scalar_violation(
    state: &DgState,
    mesh: &MeshComplex,
    basis: &PolyBasis,
    a: usize,
    bounds: ScalarBounds,
) -> bool {
    let (l, r) = DgState::xi_range(mesh, a);
    let (lo, hi) = exact_extrema(basis, state.element(a, 0), l, r);
    lo < bounds.lower - BOUND_TOL || hi > bounds.upper + BOUND_TOL
}

/// Density or pressure of element `a` drops below `eps` at a check point.
pub fn euler_violation(state: &DgState, basis: &PolyBasis, points: &[f64], a: usize, params: PositivityParams) -> bool {
    points.iter().any(|&xi| {
        let q = [
            basis.eval(state.element(a, 0), xi),
            basis.eval(state.element(a, 1), xi),
            basis.eval(state.element(a, 2), xi),
        ];
        q[0] < params.epsilon || pressure(&q, params.gamma) < params.epsilon
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::UnitKind;

    fn unit(basis: &PolyBasis, f: impl Fn(f64) -> Vec<f64>, nvars: usize) -> UnitPolynomial {
        // interpolate on [0, 1] at Chebyshev-like points
        let m = basis.len();
        let nodes: Vec<f64> = (0..m).map(|i| if m == 1 { 0.5 } else { i as f64 / (m - 1) as f64 }).collect();
        let v = nalgebra::DMatrix::from_fn(m, m, |i, k| basis.value(k, nodes[i]));
        let lu = v.lu();
        let mut coeffs = vec![0.0; nvars * m];
        for var in 0..nvars {
            let rhs = nalgebra::DVector::from_fn(m, |i, _| f(nodes[i])[var]);
            let c = lu.solve(&rhs).unwrap();
            coeffs[var * m..(var + 1) * m].copy_from_slice(c.as_slice());
        }
        UnitPolynomial {
            kind: UnitKind::Element(0),
            members: 0..1,
            cell: 0,
            xi_left: 0.0,
            xi_right: 1.0,
            left: 0.0,
            right: 1.0,
            length: 1.0,
            nvars,
            coeffs,
            changed: false,
        }
    }

    #[test]
    fn extrema_of_cubic() {
        let b = PolyBasis::new(3);
        // x^3 - x on [-1, 1] via coefficients on [0,1] of q(xi) = (2xi-1)^3 - (2xi-1)
        let u = unit(&b, |xi| vec![(2.0 * xi - 1.0).powi(3) - (2.0 * xi - 1.0)], 1);
        let (lo, hi) = exact_extrema(&b, &u.coeffs, 0.0, 1.0);
        let ext = 2.0 / (3.0 * 3f64.sqrt());
        assert!((lo + ext).abs() < 1e-13 && (hi - ext).abs() < 1e-13);
    }

    #[test]
    fn extrema_brute_force() {
        let b = PolyBasis::new(3);
        let c = [0.2, -0.7, 0.4, 0.9];
        let (lo, hi) = exact_extrema(&b, &c, -0.1, 1.05);
        let (mut blo, mut bhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=100_000 {
            let x = -0.1 + 1.15 * i as f64 / 100_000.0;
            let v = b.eval(&c, x);
            blo = blo.min(v);
            bhi = bhi.max(v);
        }
        assert!(lo <= blo + 1e-12 && (lo - blo).abs() < 1e-8);
        assert!(hi >= bhi - 1e-12 && (hi - bhi).abs() < 1e-8);
    }

    #[test]
    fn bound_limiter_example() {
        // linear with mean 0.9 and end values 0.7, 1.1
        let b = PolyBasis::new(1);
        let mut u = unit(&b, |xi| vec![0.7 + 0.4 * xi], 1);
        let theta = scalar_bound_limiter(&mut u, &b, ScalarBounds { lower: 0.0, upper: 1.0 }).unwrap();
        assert!((theta - 0.5).abs() < 1e-14);
        assert!((u.value(&b, 0, 1.0) - 1.0).abs() < 1e-14);
        assert!((u.value(&b, 0, 0.0) - 0.8).abs() < 1e-14);
        assert!((u.mean(&b, 0) - 0.9).abs() < 1e-14);
        assert!(u.changed);
    }

    #[test]
    fn bound_limiter_leaves_admissible_untouched() {
        let b = PolyBasis::new(2);
        let mut u = unit(&b, |xi| vec![0.2 + 0.5 * xi * xi], 1);
        let before = u.coeffs.clone();
        let theta = scalar_bound_limiter(&mut u, &b, ScalarBounds { lower: 0.0, upper: 1.0 }).unwrap();
        assert_eq!(theta, 1.0);
        assert_eq!(u.coeffs, before);
        assert!(!u.changed);
    }

    #[test]
    fn bound_limiter_rejects_bad_mean() {
        let b = PolyBasis::new(1);
        let mut u = unit(&b, |xi| vec![1.5 + 0.1 * xi], 1);
        assert!(matches!(
            scalar_bound_limiter(&mut u, &b, ScalarBounds { lower: 0.0, upper: 1.0 }),
            Err(CutDgError::MeanOutOfBounds { .. })
        ));
        // a mean a hair above the bound collapses to a constant
        let mut u = unit(&b, |xi| vec![1.0 + 5e-13 + 0.1 * (xi - 0.5)], 1);
        let theta = scalar_bound_limiter(&mut u, &b, ScalarBounds { lower: 0.0, upper: 1.0 }).unwrap();
        assert_eq!(theta, 0.0);
    }

    #[test]
    fn tvb_minmod_cases() {
        assert_eq!(tvb_minmod(0.3, 0.1, 0.2, 0.0, 0.1), 0.1);
        assert_eq!(tvb_minmod(0.3, -0.1, 0.2, 0.0, 0.1), 0.0);
        assert_eq!(tvb_minmod(0.001, 0.1, 0.2, 1.0, 0.1), 0.001);
        assert_eq!(tvb_minmod(-0.3, -0.5, -0.2, 0.0, 0.1), -0.2);
    }

    #[test]
    fn positivity_limiter_restores_pressure() {
        let b = PolyBasis::new(2);
        let g = 1.4;
        // density positive, energy dips so that pressure goes negative near xi = 0
        let mut u = unit(
            &b,
            |xi| {
                let rho = 1.0;
                let m = 0.0;
                let p = 0.4 * (xi - 0.1) * 10.0;
                vec![rho, m, p / (g - 1.0) + 0.6]
            },
            3,
        );
        let pts = CheckPointSet::new(2).points(&u, &dummy_mesh());
        let eps = 1e-8;
        let before = [u.mean(&b, 0), u.mean(&b, 1), u.mean(&b, 2)];
        let out = euler_positivity_limiter(&mut u, &b, &pts, PositivityParams { epsilon: eps, gamma: g }).unwrap();
        assert!(out.theta2 < 1.0);
        for v in 0..3 {
            assert!((u.mean(&b, v) - before[v]).abs() < 1e-13);
        }
        for &xi in &pts {
            let q = unit_state(&u, &b, xi);
            assert!(q[0] >= eps * (1.0 - 1e-9));
            assert!(pressure(&q, g) >= eps * (1.0 - 1e-9));
        }
    }

    #[test]
    fn positivity_limiter_density_stage() {
        let b = PolyBasis::new(1);
        let mut u = unit(&b, |xi| vec![-0.2 + 2.0 * xi, 0.0, 2.5], 3);
        let pts = CheckPointSet::new(1).points(&u, &dummy_mesh());
        let out = euler_positivity_limiter(&mut u, &b, &pts, PositivityParams { epsilon: 1e-8, gamma: 1.4 }).unwrap();
        assert!((out.theta1 - (0.8 - 1e-8) / 1.0).abs() < 1e-12);
        assert!(out.theta1 < (0.8 - 1e-8) / 1.0);
        assert!(u.value(&b, 0, 0.0) >= 1e-8 * (1.0 - 1e-9), "{}", u.value(&b, 0, 0.0));
        let mut bad = unit(&b, |_| vec![-1.0, 0.0, 1.0], 3);
        assert!(matches!(
            euler_positivity_limiter(&mut bad, &b, &pts, PositivityParams { epsilon: 1e-8, gamma: 1.4 }),
            Err(CutDgError::MeanNotAdmissible { .. })
        ));
    }

    #[test]
    fn segment_parameter_hits_eps() {
        let g = 1.4;
        let mean = [1.0, 0.5, 2.0];
        let q = [0.5, 1.5, 0.5];
        let t = segment_parameter(&mean, &q, 1e-6, g);
        let s = [mean[0] + t * (q[0] - mean[0]), mean[1] + t * (q[1] - mean[1]), mean[2] + t * (q[2] - mean[2])];
        assert!((pressure(&s, g) - 1e-6).abs() < 1e-12);
        assert!(t > 0.0 && t < 1.0);
    }

    fn dummy_mesh() -> MeshComplex {
        let m = crate::mesh::build_background_mesh(0.0, 4.0, 4).unwrap();
        MeshComplex::build(m, crate::mesh::InterfaceSet::empty(), 0.2).unwrap()
    }
}
