//! Modal coefficient storage for the discrete solution.

use crate::basis::PolyBasis;
use crate::error::{CutDgError, Result};
use crate::mesh::MeshComplex;

/// Coefficients of the piecewise polynomial solution.
///
/// Element `a` refers to the flattened, spatially ordered active element list
/// of a [`MeshComplex`]; its polynomial lives on the full background cell and
/// is evaluated in the reference coordinate of that cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DgState {
    pub degree: usize,
    pub nvars: usize,
    pub n_elements: usize,
    pub coeffs: Vec<f64>,
    pub time: f64,
}

impl DgState {
    pub fn zeros(degree: usize, nvars: usize, n_elements: usize) -> Self {
        Self { degree, nvars, n_elements, coeffs: vec![0.0; n_elements * nvars * (degree + 1)], time: 0.0 }
    }

    pub fn zeros_like(other: &Self) -> Self {
        let mut s = Self::zeros(other.degree, other.nvars, other.n_elements);
        s.time = other.time;
        s
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn index(&self, a: usize, v: usize, k: usize) -> usize {
        (a * self.nvars + v) * (self.degree + 1) + k
    }

    pub fn element(&self, a: usize, v: usize) -> &[f64] {
        let i = self.index(a, v, 0);
        &self.coeffs[i..i + self.modes()]
    }

    pub fn element_mut(&mut self, a: usize, v: usize) -> &mut [f64] {
        let i = self.index(a, v, 0);
        let m = self.modes();
        &mut self.coeffs[i..i + m]
    }

    /// All variables of element `a`, variable-major.
    pub fn block(&self, a: usize) -> &[f64] {
        let n = self.nvars * self.modes();
        &self.coeffs[a * n..(a + 1) * n]
    }

    pub fn block_mut(&mut self, a: usize) -> &mut [f64] {
        let n = self.nvars * self.modes();
        &mut self.coeffs[a * n..(a + 1) * n]
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += s * y;
        }
    }

    /// Linear combination `sum_i c_i u_i` of states with identical layout.
    pub fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = Self::zeros_like(terms[0].1);
        for (c, s) in terms {
            out.axpy(*c, s);
        }
        out
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(CutDgError::NonFinite(what))
        }
    }

    /// Reference coordinate range of element `a` inside its background cell.
    pub fn xi_range(mesh: &MeshComplex, a: usize) -> (f64, f64) {
        let e = &mesh.elements[a];
        let x0 = mesh.background.edge(e.cell);
        let h = mesh.h();
        ((e.left - x0) / h, (e.right - x0) / h)
    }

    /// Value of variable `v` at `x`, using the element of the flattened list
    /// that contains `x`.
    pub fn evaluate(&self, mesh: &MeshComplex, basis: &PolyBasis, v: usize, x: f64) -> f64 {
        let a = mesh.element_at(x);
        self.evaluate_in(mesh, basis, a, v, x)
    }

    /// Value of element `a`'s polynomial at `x` (which may lie outside `K_a`).
    pub fn evaluate_in(&self, mesh: &MeshComplex, basis: &PolyBasis, a: usize, v: usize, x: f64) -> f64 {
        let xi = (x - mesh.background.edge(mesh.elements[a].cell)) / mesh.h();
        basis.eval(self.element(a, v), xi)
    }

    /// `∫_{K_a} u_v dx`.
    pub fn element_integral(&self, mesh: &MeshComplex, basis: &PolyBasis, a: usize, v: usize) -> f64 {
        let (l, r) = Self::xi_range(mesh, a);
        // rescale by the exact physical length to avoid cancellation in r - l
        let len = mesh.elements[a].length;
        if r > l {
            basis.integral(self.element(a, v), l, r) / (r - l) * len
        } else {
            0.0
        }
    }

    pub fn element_mean(&self, mesh: &MeshComplex, basis: &PolyBasis, a: usize, v: usize) -> f64 {
        self.element_integral(mesh, basis, a, v) / mesh.elements[a].length
    }

    /// Mean of variable `v` over the macro-element `m`.
    pub fn macro_mean(&self, mesh: &MeshComplex, basis: &PolyBasis, m: usize, v: usize) -> f64 {
        let mac = &mesh.macros[m];
        mac.members.clone().map(|a| self.element_integral(mesh, basis, a, v)).sum::<f64>() / mac.length
    }
}

/// `sum_K ∫_K u dx` per variable.
pub fn total_mass(state: &DgState, mesh: &MeshComplex, basis: &PolyBasis) -> Vec<f64> {
    (0..state.nvars).map(|v| (0..state.n_elements).map(|a| state.element_integral(mesh, basis, a, v)).sum()).collect()
}
