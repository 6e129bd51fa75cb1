//! Conservative macro-element reconstruction.
//!
//! Each member polynomial of a macro-element is extended to the whole
//! macro-element, the extensions are averaged with the weights
//! `|K_j| / |I_M|`, and a constant restores the mean over `I_M`.
//!
//! The pipeline that follows (TVB and bound limiting) works on *units*: a
//! reconstructed macro-element, or a single element left as it is.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::basis::{gauss_legendre, PolyBasis};
use crate::mesh::MeshComplex;
use crate::state::DgState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionMode {
    /// Reconstruct every macro-element after every stage.
    #[default]
    All,
    /// Reconstruct only macro-elements flagged by a detector.
    OnViolation,
    Off,
}

/// Change-of-cell matrices `T_d[l][k] = ∫_0^1 phi_l(xi) phi_k(xi - d) dxi`
/// for `d = +1` and `d = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOps {
    m: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl TransferOps {
    pub fn new(basis: &PolyBasis) -> Self {
        let m = basis.len();
        let rule = gauss_legendre(m);
        let build = |d: f64| {
            let mut t = vec![0.0; m * m];
            for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
                let a = basis.values(*xi);
                let b = basis.values(xi - d);
                for l in 0..m {
                    for k in 0..m {
                        t[l * m + k] += w * a[l] * b[k];
                    }
                }
            }
            // a shift keeps the degree and the leading coefficient: T is unit
            // upper triangular, and snapping it keeps constants exact
            for l in 0..m {
                t[l * m + l] = 1.0;
                for k in 0..l {
                    t[l * m + k] = 0.0;
                }
            }
            t
        };
        Self { m, plus: build(1.0), minus: build(-1.0) }
    }

    /// Re-expresses `c` (coefficients in a cell at offset `d` from the target
    /// cell) in the target cell's basis, accumulating `scale * T_d c` into `out`.
    pub fn transfer_add(&self, d: isize, c: &[f64], scale: f64, out: &mut [f64]) {
        let m = self.m;
        let t = match d {
            0 => {
                for k in 0..m {
                    out[k] += scale * c[k];
                }
                return;
            }
            1 => &self.plus,
            -1 => &self.minus,
            _ => panic!("cell offset {d} outside a macro-element"),
        };
        for l in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += t[l * m + k] * c[k];
            }
            out[l] += scale * s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    /// A macro-element carrying one reconstructed polynomial.
    Macro(usize),
    /// A single element with its own polynomial.
    Element(usize),
}

/// One polynomial per variable on a contiguous set of active elements,
/// expressed in the basis of background cell `cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPolynomial {
    pub kind: UnitKind,
    pub members: Range<usize>,
    pub cell: usize,
    /// Extent of the unit in the reference coordinate of `cell`.
    pub xi_left: f64,
    pub xi_right: f64,
    pub left: f64,
    pub right: f64,
    pub length: f64,
    pub nvars: usize,
    /// `nvars * (p + 1)` coefficients, variable-major.
    pub coeffs: Vec<f64>,
    /// Set by any stage that modifies `coeffs`; unchanged units are not
    /// written back.
    pub changed: bool,
}

impl UnitPolynomial {
    pub fn modes(&self) -> usize {
        self.coeffs.len() / self.nvars
    }

    pub fn var(&self, v: usize) -> &[f64] {
        let m = self.modes();
        &self.coeffs[v * m..(v + 1) * m]
    }

    pub fn var_mut(&mut self, v: usize) -> &mut [f64] {
        let m = self.modes();
        &mut self.coeffs[v * m..(v + 1) * m]
    }

    /// Mean of variable `v` over the unit.
    pub fn mean(&self, basis: &PolyBasis, v: usize) -> f64 {
        basis.integral(self.var(v), self.xi_left, self.xi_right) / (self.xi_right - self.xi_left)
    }

    pub fn value(&self, basis: &PolyBasis, v: usize, xi: f64) -> f64 {
        basis.eval(self.var(v), xi)
    }

    /// Reference coordinate of physical point `x`.
    pub fn xi(&self, mesh: &MeshComplex, x: f64) -> f64 {
        (x - mesh.background.edge(self.cell)) / mesh.h()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

fn element_unit(state: &DgState, mesh: &MeshComplex, a: usize) -> UnitPolynomial {
    let e = &mesh.elements[a];
    let (l, r) = DgState::xi_range(mesh, a);
    UnitPolynomial {
        kind: UnitKind::Element(a),
        members: a..a + 1,
        cell: e.cell,
        xi_left: l,
        xi_right: r,
        left: e.left,
        right: e.right,
        length: e.length,
        nvars: state.nvars,
        coeffs: state.block(a).to_vec(),
        changed: false,
    }
}

/// Reconstructed polynomial of macro-element `id`, in its owner's basis.
pub fn reconstruct_macro(
    state: &DgState,
    mesh: &MeshComplex,
    basis: &PolyBasis,
    transfer: &TransferOps,
    id: usize,
) -> UnitPolynomial {
    let mac = &mesh.macros[id];
    if mac.len() == 1 {
        let mut u = element_unit(state, mesh, mac.owner);
        u.kind = UnitKind::Macro(id);
        return u;
    }
    let m = state.modes();
    let owner_cell = mesh.elements[mac.owner].cell;
    let mut coeffs = vec![0.0; state.nvars * m];
    for v in 0..state.nvars {
        let out = &mut coeffs[v * m..(v + 1) * m];
        let mut target = 0.0;
        for (j, a) in mac.members.clone().enumerate() {
            let d = mesh.elements[a].cell as isize - owner_cell as isize;
            transfer.transfer_add(d, state.element(a, v), mac.weights[j], out);
            target += state.element_integral(mesh, basis, a, v);
        }
        // restore the mean over I_M, measured member by member
        let mut have = 0.0;
        for a in mac.members.clone() {
            let d = mesh.elements[a].cell as f64 - owner_cell as f64;
            let (l, r) = DgState::xi_range(mesh, a);
            if r > l {
                have += basis.integral(out, l + d, r + d) / (r - l) * mesh.elements[a].length;
            }
        }
        out[0] += (target - have) / mac.length;
    }
    let (l, _) = DgState::xi_range(mesh, mac.members.start);
    let (_, r) = DgState::xi_range(mesh, mac.members.end - 1);
    let first = mesh.elements[mac.members.start].cell as f64 - owner_cell as f64;
    let last = mesh.elements[mac.members.end - 1].cell as f64 - owner_cell as f64;
    UnitPolynomial {
        kind: UnitKind::Macro(id),
        members: mac.members.clone(),
        cell: owner_cell,
        xi_left: l + first,
        xi_right: r + last,
        left: mac.left,
        right: mac.right,
        length: mac.length,
        nvars: state.nvars,
        coeffs,
        changed: true,
    }
}

/// Splits the state into units. Under `OnViolation`, `flagged(id)` selects
/// the macro-elements that are reconstructed.
pub fn build_units(
    state: &DgState,
    mesh: &MeshComplex,
    basis: &PolyBasis,
    transfer: &TransferOps,
    mode: ReconstructionMode,
    flagged: impl Fn(usize) -> bool,
) -> Vec<UnitPolynomial> {
    let mut units = Vec::with_capacity(mesh.macros.len());
    match mode {
        ReconstructionMode::Off => {
            for a in 0..mesh.elements.len() {
                units.push(element_unit(state, mesh, a));
            }
        }
        ReconstructionMode::All => {
            for id in 0..mesh.macros.len() {
                units.push(reconstruct_macro(state, mesh, basis, transfer, id));
            }
        }
        ReconstructionMode::OnViolation => {
            for (id, mac) in mesh.macros.iter().enumerate() {
                if flagged(id) {
                    units.push(reconstruct_macro(state, mesh, basis, transfer, id));
                } else {
                    for a in mac.members.clone() {
                        units.push(element_unit(state, mesh, a));
                    }
                }
            }
        }
    }
    units
}

/// Writes changed units back into `state`, restricting macro polynomials to
/// each member's own cell.
pub fn scatter_units(units: &[UnitPolynomial], mesh: &MeshComplex, transfer: &TransferOps, state: &mut DgState) {
    let m = state.modes();
    for u in units.iter().filter(|u| u.changed) {
        for a in u.members.clone() {
            let d = u.cell as isize - mesh.elements[a].cell as isize;
            for v in 0..u.nvars {
                let out = state.element_mut(a, v);
                out.iter_mut().for_each(|c| *c = 0.0);
                transfer.transfer_add(d, &u.coeffs[v * m..(v + 1) * m], 1.0, out);
            }
        }
    }
}

/// Reconstruction alone (no limiting) on every macro-element (`All`) or on
/// those selected by `flagged` (`OnViolation`).
pub fn apply_reconstruction(
    state: &DgState,
    mesh: &MeshComplex,
    basis: &PolyBasis,
    mode: ReconstructionMode,
    flagged: impl Fn(usize) -> bool,
) -> DgState {
    let transfer = TransferOps::new(basis);
    let units = build_units(state, mesh, basis, &transfer, mode, flagged);
    let mut out = state.clone();
    scatter_units(&units, mesh, &transfer, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_background_mesh, generate_interfaces, Cut, InterfaceSet};
    use crate::state::total_mass;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(seed: u64) -> MeshComplex {
        let m = build_background_mesh(0.0, 2.0, 20).unwrap();
        let set = generate_interfaces(&m, (0.75, 1.25), 0.1, seed).unwrap();
        MeshComplex::build(m, set, 0.2).unwrap()
    }

    fn random_state(mc: &MeshComplex, p: usize, nvars: usize, rng: &mut ChaCha8Rng) -> DgState {
        let mut s = DgState::zeros(p, nvars, mc.elements.len());
        s.coeffs.iter_mut().for_each(|c| *c = rng.random_range(-1.0..1.0));
        s
    }

    #[test]
    fn transfer_matches_pointwise_evaluation() {
        let basis = PolyBasis::new(3);
        let t = TransferOps::new(&basis);
        let c = [0.3, -0.2, 0.5, 0.1];
        for d in [-1isize, 1] {
            let mut out = [0.0; 4];
            t.transfer_add(d, &c, 1.0, &mut out);
            for xi in [0.0, 0.37, 1.0] {
                let want = basis.eval(&c, xi - d as f64);
                assert!((basis.eval(&out, xi) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conserves_mean_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..50 {
            let mc = mesh(seed);
            for p in 0..=3 {
                let basis = PolyBasis::new(p);
                let s = random_state(&mc, p, 1, &mut rng);
                let r = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::All, |_| true);
                for id in 0..mc.macros.len() {
                    let before = s.macro_mean(&mc, &basis, id, 0);
                    let after = r.macro_mean(&mc, &basis, id, 0);
                    assert!((before - after).abs() <= 1e-13 * before.abs().max(1.0));
                }
                let (m0, m1) = (total_mass(&s, &mc, &basis)[0], total_mass(&r, &mc, &basis)[0]);
                assert!((m0 - m1).abs() < 1e-13 * m0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn reproduces_global_polynomials() {
        let mc = mesh(3);
        let basis = PolyBasis::new(3);
        let h = mc.h();
        let q = |x: f64| 2.0 - x + 0.5 * x * x * x;
        // exact modal coefficients by interpolation at 4 points per cell
        let mut s = DgState::zeros(3, 1, mc.elements.len());
        let nodes = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        let v = nalgebra::DMatrix::from_fn(4, 4, |i, k| basis.value(k, nodes[i]));
        let lu = v.lu();
        for a in 0..mc.elements.len() {
            let x0 = mc.background.edge(mc.elements[a].cell);
            let rhs = nalgebra::DVector::from_fn(4, |i, _| q(x0 + nodes[i] * h));
            let c = lu.solve(&rhs).unwrap();
            s.element_mut(a, 0).copy_from_slice(c.as_slice());
        }
        let r = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::All, |_| true);
        for (x, y) in r.coeffs.iter().zip(&s.coeffs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn idempotent_and_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mc = mesh(4);
        let basis = PolyBasis::new(2);
        let s = random_state(&mc, 2, 1, &mut rng);
        let once = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::All, |_| true);
        let twice = apply_reconstruction(&once, &mc, &basis, ReconstructionMode::All, |_| true);
        for (x, y) in once.coeffs.iter().zip(&twice.coeffs) {
            assert!((x - y).abs() < 1e-12);
        }
        for mac in &mc.macros {
            for (a, b) in mac.stabilized_edges() {
                let x = mc.elements[a].right;
                for order in 0..=2 {
                    let ea = mc.background.edge(mc.elements[a].cell);
                    let eb = mc.background.edge(mc.elements[b].cell);
                    let da: f64 =
                        (0..3).map(|k| once.element(a, 0)[k] * basis.derivative(k, order, (x - ea) / mc.h())).sum();
                    let db: f64 =
                        (0..3).map(|k| once.element(b, 0)[k] * basis.derivative(k, order, (x - eb) / mc.h())).sum();
                    assert!((da - db).abs() < 1e-11, "order {order}: {da} vs {db}");
                }
            }
        }
    }

    #[test]
    fn p0_is_weighted_average() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet { cuts: vec![Cut { element: 5, alpha: 0.05 }], seed: 0, boundary_alpha: None };
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        let basis = PolyBasis::new(0);
        let mut s = DgState::zeros(0, 1, mc.elements.len());
        s.element_mut(4, 0)[0] = 1.0;
        s.element_mut(5, 0)[0] = 3.0;
        let r = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::All, |_| true);
        let want = (1.0 * 1.0 + 3.0 * 0.05) / 1.05;
        assert!((r.element(4, 0)[0] - want).abs() < 1e-15);
        assert!((r.element(5, 0)[0] - want).abs() < 1e-15);
    }

    #[test]
    fn selective_and_off_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mc = mesh(6);
        let basis = PolyBasis::new(1);
        let s = random_state(&mc, 1, 3, &mut rng);
        let off = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::Off, |_| true);
        assert_eq!(off, s);
        let target = mc.macros.iter().position(|m| m.len() > 1).unwrap();
        let sel = apply_reconstruction(&s, &mc, &basis, ReconstructionMode::OnViolation, |id| id == target);
        for (id, mac) in mc.macros.iter().enumerate() {
            for a in mac.members.clone() {
                if id == target {
                    assert_ne!(sel.block(a), s.block(a));
                } else {
                    assert_eq!(sel.block(a), s.block(a));
                }
            }
        }
    }
}
