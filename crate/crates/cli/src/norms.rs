//! Error norms over the physical domain, cut intersections included.

use serde::{Deserialize, Serialize};

use cutdg_core::basis::gauss_legendre;
use cutdg_core::{DgState, MeshComplex, PolyBasis};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Errors of variable `v` against `exact`, which fills all variables at `x`.
///
/// Integrals use Gauss points on every intersection `K`; the maximum is taken
/// over those points and the end points of `K`.
pub fn compute_errors(
    state: &DgState,
    mesh: &MeshComplex,
    basis: &PolyBasis,
    v: usize,
    exact: &dyn Fn(f64, &mut [f64]),
) -> ErrorNorms {
    let rule = gauss_legendre((basis.degree() + 4).max(6));
    let mut ex = vec![0.0; state.nvars];
    let mut out = ErrorNorms::default();
    let mut err_at = |a: usize, x: f64| {
        exact(x, &mut ex);
        (state.evaluate_in(mesh, basis, a, v, x) - ex[v]).abs()
    };
    for (a, e) in mesh.elements.iter().enumerate() {
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let d = err_at(a, e.left + (e.right - e.left) * node);
            out.l1 += w * e.length * d;
            out.l2 += w * e.length * d * d;
            out.linf = out.linf.max(d);
        }
        out.linf = out.linf.max(err_at(a, e.left)).max(err_at(a, e.right));
    }
    out.l2 = out.l2.sqrt();
    out
}

/// `log(e_coarse / e_fine) / log(n_fine / n_coarse)`; `log2` of the ratio
/// under mesh doubling.
pub fn eoc(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cutdg_core::problems::{advection_problem, AdvectionCase};
    use cutdg_core::{assemble, OperatorConfig};

    fn operator(n: usize, degree: usize) -> cutdg_core::SemiDiscreteOperator {
        let p = advection_problem(AdvectionCase::Smooth);
        let mesh = p.build_mesh(n, 0.2, 7).unwrap();
        assemble(mesh, degree, p.flux.clone(), p.bc.clone(), OperatorConfig::default()).unwrap()
    }

    #[test]
    fn zero_state_against_one() {
        let op = operator(20, 1);
        let e = compute_errors(&op.zero_state(), &op.mesh, &op.basis, 0, &|_, out| out[0] = 1.0);
        assert!((e.l2 - 2f64.sqrt()).abs() < 1e-13);
        assert!((e.linf - 1.0).abs() < 1e-15);
        assert!((e.l1 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn polynomials_are_exact() {
        let op = operator(20, 2);
        let f = |x: f64, out: &mut [f64]| out[0] = 1.0 - 2.0 * x + 0.5 * x * x;
        let u = op.l2_project_initial(f).unwrap();
        let e = compute_errors(&u, &op.mesh, &op.basis, 0, &f);
        assert!(e.l2 < 1e-13 && e.linf < 1e-13, "{e:?}");
    }

    #[test]
    fn projection_converges_at_order_three() {
        let f = |x: f64, out: &mut [f64]| out[0] = (std::f64::consts::PI * x).sin();
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&n| {
                let op = operator(n, 2);
                let u = op.l2_project_initial(f).unwrap();
                compute_errors(&u, &op.mesh, &op.basis, 0, &f).l2
            })
            .collect();
        let rate = eoc(errs[1], errs[2], 40, 80);
        assert!((rate - 3.0).abs() < 0.2, "{rate}");
    }
}
