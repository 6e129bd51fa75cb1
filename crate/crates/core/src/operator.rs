//! Stabilized semi-discrete Cut-DG operator.
//!
//! For a state `u` the operator evaluates `L(u) = B^{-1} R(u)`, where `R`
//! collects the volume flux integrals, the numerical fluxes on all faces and
//! the explicit ghost penalty `-gamma0 J0(u, .)`, and `B` is the mass matrix
//! augmented by `gamma1 J1`. `B` is block diagonal over macro-elements and is
//! inverted once at assembly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{gauss_legendre, gauss_lobatto, lobatto_order_for_degree, PolyBasis};
use crate::boundary::{BoundaryCondition, Side};
use crate::error::{CutDgError, Result};
use crate::flux::{Dissipation, FluxModel};
use crate::mesh::MeshComplex;
use crate::state::DgState;

/// Choice of the derivative-jump weights in the ghost penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyWeights {
    /// `1 / ((k!)^2 (2k + 1))`
    #[default]
    Standard,
    /// `1 / (k!)^2`
    Factorial,
}

impl PenaltyWeights {
    pub fn weight(&self, k: usize) -> f64 {
        let f: f64 = (1..=k).map(|i| i as f64).product();
        match self {
            Self::Standard => 1.0 / (f * f * (2 * k + 1) as f64),
            Self::Factorial => 1.0 / (f * f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub gamma0: f64,
    pub gamma1: f64,
    pub weights: PenaltyWeights,
    /// Gauss points per element for the volume integral; `None` picks `p + 2`
    /// for linear fluxes and twice that otherwise.
    pub volume_points: Option<usize>,
    pub dissipation: Dissipation,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            gamma0: 0.25,
            gamma1: 0.75,
            weights: PenaltyWeights::Standard,
            volume_points: None,
            dissipation: Dissipation::Global,
        }
    }
}

#[derive(Debug, Clone)]
struct ElementCache {
    /// Physical quadrature weights on `K`.
    w: Vec<f64>,
    /// Basis values at the nodes, node-major.
    phi: Vec<f64>,
    /// `d phi / dx` at the nodes, node-major.
    dphi: Vec<f64>,
    /// Basis values at the left and right end of `K`.
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Penalty matrix of one stabilized edge between elements `left` and `left + 1`.
#[derive(Debug, Clone)]
struct PenaltyEdge {
    left: usize,
    /// `sum_k w_k g_k g_k^T`, dense `2m x 2m`, row-major.
    matrix: Vec<f64>,
}

#[derive(Debug, Clone)]
struct MassBlock {
    first: usize,
    size: usize,
    /// Inverse of the stabilized block, dense row-major over member modes.
    inverse: Vec<f64>,
    /// `B e`, where `e` is the unit constant on the macro-element.
    constant_column: Vec<f64>,
    length: f64,
    /// The block itself, kept for inspection.
    matrix: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SemiDiscreteOperator {
    pub mesh: MeshComplex,
    pub basis: PolyBasis,
    pub flux: FluxModel,
    pub bc: BoundaryCondition,
    pub config: OperatorConfig,
    degree: usize,
    nvars: usize,
    cache: Vec<ElementCache>,
    edges: Vec<PenaltyEdge>,
    blocks: Vec<MassBlock>,
    /// Reference check points (Gauss–Lobatto) per element for wave speeds.
    lambda_points: Vec<Vec<f64>>,
}

pub fn assemble(
    mesh: MeshComplex,
    degree: usize,
    flux: FluxModel,
    bc: BoundaryCondition,
    config: OperatorConfig,
) -> Result<SemiDiscreteOperator> {
    if !(config.gamma0 > 0.0 && config.gamma1 > 0.0) {
        return Err(CutDgError::InvalidParameter(format!(
            "penalty parameters must be positive, got gamma0 = {}, gamma1 = {}",
            config.gamma0, config.gamma1
        )));
    }
    bc.validate()?;
    let basis = PolyBasis::new(degree);
    let m = degree + 1;
    let h = mesh.h();
    let nq = config.volume_points.unwrap_or(if flux.is_linear() { degree + 2 } else { 2 * (degree + 2) });
    let vol = gauss_legendre(nq);
    let lob = gauss_lobatto(lobatto_order_for_degree(degree));

    let mut cache = Vec::with_capacity(mesh.elements.len());
    let mut lambda_points = Vec::with_capacity(mesh.elements.len());
    for a in 0..mesh.elements.len() {
        let (l, r) = DgState::xi_range(&mesh, a);
        let len = mesh.elements[a].length;
        let mut c = ElementCache {
            w: Vec::with_capacity(nq),
            phi: Vec::with_capacity(nq * m),
            dphi: Vec::with_capacity(nq * m),
            left: basis.values(l),
            right: basis.values(r),
        };
        for (node, wt) in vol.nodes.iter().zip(&vol.weights) {
            let xi = l + (r - l) * node;
            c.w.push(wt * len);
            c.phi.extend(basis.values(xi));
            c.dphi.extend(basis.derivatives(1, xi).iter().map(|d| d / h));
        }
        cache.push(c);
        lambda_points.push(lob.nodes.iter().map(|t| l + (r - l) * t).collect());
    }

    let mut edges = Vec::new();
    for mac in &mesh.macros {
        for (a, _) in mac.stabilized_edges() {
            edges.push(PenaltyEdge { left: a, matrix: penalty_matrix(&basis, config.weights) });
        }
    }

    let mut blocks = Vec::with_capacity(mesh.macros.len());
    for (id, mac) in mesh.macros.iter().enumerate() {
        let first = mac.members.start;
        let size = mac.len() * m;
        let mut b = DMatrix::<f64>::zeros(size, size);
        let exact = gauss_legendre(m);
        for (i, a) in mac.members.clone().enumerate() {
            let (l, r) = DgState::xi_range(&mesh, a);
            let len = mesh.elements[a].length;
            for (node, wt) in exact.nodes.iter().zip(&exact.weights) {
                let phi = basis.values(l + (r - l) * node);
                for k in 0..m {
                    for j in 0..m {
                        b[(i * m + k, i * m + j)] += wt * len * phi[k] * phi[j];
                    }
                }
            }
        }
        for (i, _) in mac.stabilized_edges().enumerate() {
            let p = penalty_matrix(&basis, config.weights);
            for r in 0..2 * m {
                for c in 0..2 * m {
                    b[(i * m + r, i * m + c)] += config.gamma1 * h * p[r * 2 * m + c];
                }
            }
        }
        let chol = b.clone().cholesky().ok_or(CutDgError::SingularBlock { macro_id: id })?;
        let inv = chol.inverse();
        let mut inverse = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                inverse.push(inv[(r, c)]);
            }
        }
        let constant_column = (0..size).map(|r| (0..mac.len()).map(|i| b[(r, i * m)]).sum()).collect();
        blocks.push(MassBlock { first, size, inverse, constant_column, length: mac.length, matrix: b });
    }

    Ok(SemiDiscreteOperator {
        nvars: flux.nvars(),
        mesh,
        basis,
        flux,
        bc,
        config,
        degree,
        cache,
        edges,
        blocks,
        lambda_points,
    })
}

/// `sum_k w_k g_k g_k^T` with `g_k = [-D^k phi(1); D^k phi(0)]`, `D = d/dxi`.
fn penalty_matrix(basis: &PolyBasis, weights: PenaltyWeights) -> Vec<f64> {
    let m = basis.len();
    let n = 2 * m;
    let mut p = vec![0.0; n * n];
    let mut g = vec![0.0; n];
    for k in 0..m {
        let right = basis.derivatives(k, 1.0);
        let left = basis.derivatives(k, 0.0);
        for i in 0..m {
            g[i] = -right[i];
            g[m + i] = left[i];
        }
        let w = weights.weight(k);
        for r in 0..n {
            for c in 0..n {
                p[r * n + c] += w * g[r] * g[c];
            }
        }
    }
    p
}

impl SemiDiscreteOperator {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.elements.len()
    }

    pub fn zero_state(&self) -> DgState {
        DgState::zeros(self.degree, self.nvars, self.n_elements())
    }

    /// Stabilized mass block of macro-element `m`.
    pub fn mass_block(&self, m: usize) -> &DMatrix<f64> {
        &self.blocks[m].matrix
    }

    /// Penalty matrices of all stabilized edges, keyed by the left element.
    pub fn penalty_edges(&self) -> Vec<(usize, DMatrix<f64>)> {
        let n = 2 * (self.degree + 1);
        self.edges.iter().map(|e| (e.left, DMatrix::from_row_slice(n, n, &e.matrix))).collect()
    }

    /// Traces of element `a` at the left and right end of `K_a`.
    pub fn traces(&self, state: &DgState, a: usize, ul: &mut [f64], ur: &mut [f64]) {
        let c = &self.cache[a];
        for v in 0..self.nvars {
            let e = state.element(a, v);
            ul[v] = dot(e, &c.left);
            ur[v] = dot(e, &c.right);
        }
    }

    /// Exterior states at the two domain ends.
    pub fn boundary_ghosts(&self, state: &DgState, t: f64) -> ([f64; 3], [f64; 3]) {
        let n = self.nvars;
        let last = self.n_elements() - 1;
        let (mut l0, mut r0, mut ll, mut rl) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
        self.traces(state, 0, &mut l0[..n], &mut r0[..n]);
        self.traces(state, last, &mut ll[..n], &mut rl[..n]);
        let mut gl = [0.0; 3];
        let mut gr = [0.0; 3];
        self.bc.ghost_state(Side::Left, &l0[..n], &rl[..n], t, &mut gl[..n]);
        self.bc.ghost_state(Side::Right, &rl[..n], &l0[..n], t, &mut gr[..n]);
        (gl, gr)
    }

    /// Maximal wave speed over Gauss–Lobatto points of every element,
    /// floored at `1e-12`.
    pub fn global_lambda(&self, state: &DgState) -> Result<f64> {
        let n = self.nvars;
        let mut lam: f64 = 1e-12;
        let mut u = [0.0; 3];
        let mut phi = vec![0.0; self.degree + 1];
        for a in 0..self.n_elements() {
            let f = self.flux.for_subdomain(self.mesh.elements[a].subdomain);
            for &xi in &self.lambda_points[a] {
                self.basis.values_into(xi, &mut phi);
                for v in 0..n {
                    u[v] = dot(state.element(a, v), &phi);
                }
                match f.max_speed(&u[..n]) {
                    Some(s) if s.is_finite() => lam = lam.max(s),
                    _ => {
                        let x = self.mesh.background.edge(self.mesh.elements[a].cell) + xi * self.mesh.h();
                        return Err(inadmissible(x, &u[..n], self.flux.gamma()));
                    }
                }
            }
        }
        Ok(lam)
    }

    /// Numerical fluxes through the left and right domain faces, from the
    /// first element's left trace and the last element's right trace.
    fn boundary_face_fluxes(&self, first: &[f64], last: &[f64], lambda: f64, t: f64) -> ([f64; 3], [f64; 3]) {
        let n = self.nvars;
        let (s0, s1) = (self.mesh.elements[0].subdomain, self.mesh.elements[self.n_elements() - 1].subdomain);
        let mut g = [0.0; 3];
        let (mut left, mut right) = ([0.0; 3], [0.0; 3]);
        self.bc.ghost_state(Side::Left, first, last, t, &mut g[..n]);
        self.flux.numerical_flux(s0, s0, &g[..n], first, lambda, self.config.dissipation, &mut left[..n]);
        self.bc.ghost_state(Side::Right, last, first, t, &mut g[..n]);
        self.flux.numerical_flux(s1, s1, last, &g[..n], lambda, self.config.dissipation, &mut right[..n]);
        (left, right)
    }

    /// Net flux out of the domain, `F_right - F_left`, for the residual at
    /// `(state, lambda, t)`; `d/dt` of the total mass is minus this value.
    pub fn boundary_outflow(&self, state: &DgState, lambda: f64, t: f64) -> [f64; 3] {
        if self.bc.is_periodic() {
            return [0.0; 3];
        }
        let n = self.nvars;
        let last = self.n_elements() - 1;
        let (mut l0, mut r0, mut ll, mut rl) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
        self.traces(state, 0, &mut l0[..n], &mut r0[..n]);
        self.traces(state, last, &mut ll[..n], &mut rl[..n]);
        let (left, right) = self.boundary_face_fluxes(&l0[..n], &rl[..n], lambda, t);
        [right[0] - left[0], right[1] - left[1], right[2] - left[2]]
    }

    /// Residual `R(u)` (before the mass solve) into `out`.
    pub fn residual(&self, state: &DgState, lambda: f64, t: f64, out: &mut DgState) -> Result<()> {
        let n = self.nvars;
        let m = self.degree + 1;
        let ne = self.n_elements();
        out.coeffs.iter_mut().for_each(|c| *c = 0.0);

        // traces
        let mut tl = vec![0.0; ne * n];
        let mut tr = vec![0.0; ne * n];
        for a in 0..ne {
            let (l, r) = (&mut tl[a * n..(a + 1) * n], &mut tr[a * n..(a + 1) * n]);
            self.traces(state, a, l, r);
        }

        // face fluxes: face a is the left face of element a
        let mut fh = vec![0.0; (ne + 1) * n];
        let sub = |a: usize| self.mesh.elements[a].subdomain;
        for f in 1..ne {
            let (a, b) = (f - 1, f);
            self.flux.numerical_flux(
                sub(a),
                sub(b),
                &tr[a * n..(a + 1) * n],
                &tl[b * n..(b + 1) * n],
                lambda,
                self.config.dissipation,
                &mut fh[f * n..(f + 1) * n],
            );
        }
        let last = ne - 1;
        if self.bc.is_periodic() {
            let mut flux = [0.0; 3];
            self.flux.numerical_flux(
                sub(last),
                sub(0),
                &tr[last * n..],
                &tl[..n],
                lambda,
                self.config.dissipation,
                &mut flux[..n],
            );
            fh[..n].copy_from_slice(&flux[..n]);
            fh[ne * n..].copy_from_slice(&flux[..n]);
        } else {
            let (left, right) = self.boundary_face_fluxes(&tl[..n], &tr[last * n..], lambda, t);
            fh[..n].copy_from_slice(&left[..n]);
            fh[ne * n..].copy_from_slice(&right[..n]);
        }

        // volume terms and face contributions, both taken relative to the
        // left face flux: the shift cancels analytically and makes the
        // residual of a constant state vanish exactly
        let mut u = [0.0; 3];
        let mut fu = [0.0; 3];
        for a in 0..ne {
            let c = &self.cache[a];
            let f = self.flux.for_subdomain(sub(a));
            let f_ref = &fh[a * n..(a + 1) * n];
            for (q, w) in c.w.iter().enumerate() {
                let phi = &c.phi[q * m..(q + 1) * m];
                for v in 0..n {
                    u[v] = dot(state.element(a, v), phi);
                }
                f.eval(&u[..n], &mut fu[..n]);
                let dphi = &c.dphi[q * m..(q + 1) * m];
                for v in 0..n {
                    let r = out.element_mut(a, v);
                    let df = fu[v] - f_ref[v];
                    for k in 0..m {
                        r[k] += w * df * dphi[k];
                    }
                }
            }
            for v in 0..n {
                let df = fh[(a + 1) * n + v] - fh[a * n + v];
                let r = out.element_mut(a, v);
                for k in 0..m {
                    r[k] -= df * c.right[k];
                }
            }
        }

        // explicit ghost penalty
        let g0 = self.config.gamma0;
        let mut pair = vec![0.0; 2 * m];
        for e in &self.edges {
            for v in 0..n {
                pair[..m].copy_from_slice(state.element(e.left, v));
                pair[m..].copy_from_slice(state.element(e.left + 1, v));
                for r in 0..2 * m {
                    let s = dot(&e.matrix[r * 2 * m..(r + 1) * 2 * m], &pair);
                    let (a, k) = if r < m { (e.left, r) } else { (e.left + 1, r - m) };
                    let i = out.index(a, v, k);
                    out.coeffs[i] -= g0 * s;
                }
            }
        }
        Ok(())
    }

    /// Applies `B^{-1}` block by block, in place.
    ///
    /// The constant carrying the macro-element mean of the right-hand side is
    /// split off first and only the remainder goes through the inverse, so
    /// constants are reproduced to round-off despite the conditioning of the
    /// cut blocks.
    pub fn solve_mass(&self, rhs: &mut DgState) {
        let n = self.nvars;
        let m = self.degree + 1;
        let mut buf = Vec::new();
        for b in &self.blocks {
            let members = b.size / m;
            for v in 0..n {
                buf.clear();
                for i in 0..members {
                    buf.extend_from_slice(rhs.element(b.first + i, v));
                }
                let mean = (0..members).map(|i| buf[i * m]).sum::<f64>() / b.length;
                for (r, c) in buf.iter_mut().zip(&b.constant_column) {
                    *r -= mean * c;
                }
                for i in 0..members {
                    let e = rhs.element_mut(b.first + i, v);
                    for k in 0..m {
                        let row = i * m + k;
                        e[k] = dot(&b.inverse[row * b.size..(row + 1) * b.size], &buf);
                    }
                    e[0] += mean;
                }
            }
        }
    }

    /// `L(u) = B^{-1} R(u)`.
    pub fn apply(&self, state: &DgState, lambda: f64, t: f64) -> Result<DgState> {
        let mut out = DgState::zeros_like(state);
        self.residual(state, lambda, t, &mut out)?;
        self.solve_mass(&mut out);
        out.check_finite("spatial operator")?;
        Ok(out)
    }

    /// `u + dt L(u)`, with the time advanced by `dt`.
    pub fn forward_euler_update(&self, state: &DgState, dt: f64, lambda: f64) -> Result<DgState> {
        if !(dt > 0.0) {
            return Err(CutDgError::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let l = self.apply(state, lambda, state.time)?;
        let mut next = state.clone();
        next.axpy(dt, &l);
        next.time = state.time + dt;
        Ok(next)
    }

    /// Stabilized L2 projection of `u0`; `u0(x, out)` fills all variables.
    pub fn l2_project_initial(&self, u0: impl Fn(f64, &mut [f64])) -> Result<DgState> {
        let n = self.nvars;
        let m = self.degree + 1;
        let h = self.mesh.h();
        let rule = gauss_legendre((2 * m + 4).max(12));
        let mut state = self.zero_state();
        let mut val = [0.0; 3];
        let mut phi = vec![0.0; m];
        // project u0 - u0(x_M) per macro-element and add the constant back:
        // B reproduces constants, and constant data then gives a zero right side
        let mut shift = vec![[0.0; 3]; self.mesh.elements.len()];
        for mac in &self.mesh.macros {
            let owner = &self.mesh.elements[mac.owner];
            let mut c = [0.0; 3];
            u0(0.5 * (owner.left + owner.right), &mut c[..n]);
            for a in mac.members.clone() {
                shift[a] = c;
            }
        }
        for (a, e) in self.mesh.elements.iter().enumerate() {
            let x0 = self.mesh.background.edge(e.cell);
            for (node, wt) in rule.nodes.iter().zip(&rule.weights) {
                let x = e.left + (e.right - e.left) * node;
                u0(x, &mut val[..n]);
                self.basis.values_into((x - x0) / h, &mut phi);
                for v in 0..n {
                    let r = state.element_mut(a, v);
                    let d = val[v] - shift[a][v];
                    for k in 0..m {
                        r[k] += wt * e.length * d * phi[k];
                    }
                }
            }
        }
        self.solve_mass(&mut state);
        for (a, c) in shift.iter().enumerate() {
            for v in 0..n {
                state.element_mut(a, v)[0] += c[v];
            }
        }
        state.check_finite("initial projection")?;
        Ok(state)
    }

    pub fn total_mass(&self, state: &DgState) -> Vec<f64> {
        crate::state::total_mass(state, &self.mesh, &self.basis)
    }
}

pub(crate) fn inadmissible(x: f64, u: &[f64], gamma: Option<f64>) -> CutDgError {
    let rho = u[0];
    let pressure = gamma.map_or(f64::NAN, |g| crate::flux::pressure(u, g));
    CutDgError::InadmissibleState { x, rho, pressure }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
