use cutdg_core::basis::gauss_legendre;
use cutdg_core::flux::pressure;
use cutdg_core::limiters::CheckPointSet;
use cutdg_core::mesh::{build_background_mesh, generate_interfaces};
use cutdg_core::problems::{advection_problem, burgers_problem, euler_problem, AdvectionCase, BurgersCase};
use cutdg_core::{
    assemble, DgState, MeshComplex, OperatorConfig, Pipeline, PipelineStats, PolyBasis, ReconstructionMode,
};
use proptest::prelude::*;

fn step_values(x: f64, values: &[f64]) -> f64 {
    let k = ((x.clamp(0.0, 1.0 - 1e-12)) * values.len() as f64) as usize;
    values[k]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauss_rules_integrate_their_degree(coeffs in prop::collection::vec(-2.0f64..2.0, 1..6), a in -1.0f64..0.0, b in 0.1f64..1.5) {
        let p = coeffs.len() - 1;
        let basis = PolyBasis::new(p);
        let rule = gauss_legendre(p / 2 + 1);
        let q = rule.integrate(a, b, |x| basis.eval(&coeffs, x));
        prop_assert!((q - basis.integral(&coeffs, a, b)).abs() < 1e-12);
    }

    #[test]
    fn macro_elements_are_large_and_tile_the_domain(n in 8usize..120, cap in 0.01f64..0.5, seed in any::<u64>(), delta in 0.05f64..0.45) {
        let bg = build_background_mesh(0.0, 1.0, n).unwrap();
        let cuts = generate_interfaces(&bg, (0.2, 0.8), cap, seed).unwrap();
        let mesh = MeshComplex::build(bg, cuts, delta).unwrap();
        prop_assert!(mesh.min_macro_length() >= delta * mesh.h() * (1.0 - 1e-12));
        prop_assert!((mesh.physical_length() - 1.0).abs() < 1e-12);
        for w in mesh.elements.windows(2) {
            prop_assert!(w[0].right == w[1].left);
        }
        let covered: usize = mesh.macros.iter().map(|m| m.len()).sum();
        prop_assert_eq!(covered, mesh.elements.len());
    }

    #[test]
    fn periodic_residual_conserves_mass(p in 0usize..4, n in 10usize..40, seed in 0u64..1000, values in prop::collection::vec(-1.0f64..1.0, 2..8)) {
        for problem in [advection_problem(AdvectionCase::Smooth), burgers_problem(BurgersCase::Smooth)] {
            let op = assemble(problem.build_mesh(n, 0.2, seed).unwrap(), p, problem.flux.clone(), problem.bc.clone(), OperatorConfig::default()).unwrap();
            let u = op.l2_project_initial(|x, out| out[0] = step_values(x, &values)).unwrap();
            let lambda = op.global_lambda(&u).unwrap();
            let du = op.apply(&u, lambda, 0.0).unwrap();
            prop_assert!(op.total_mass(&du)[0].abs() < 1e-11);
        }
    }

    #[test]
    fn scalar_pipeline_keeps_mass_and_bounds(p in 1usize..4, n in 10usize..40, seed in 0u64..1000, values in prop::collection::vec(0.0f64..1.0, 2..8)) {
        let problem = advection_problem(AdvectionCase::Nonsmooth);
        let op = assemble(problem.build_mesh(n, 0.2, seed).unwrap(), p, problem.flux.clone(), problem.bc.clone(), OperatorConfig::default()).unwrap();
        let (x0, x1) = problem.domain;
        let mut u = op.l2_project_initial(|x, out| out[0] = step_values((x - x0) / (x1 - x0), &values)).unwrap();
        let before = op.total_mass(&u)[0];
        let pipe = Pipeline::new(&op, problem.limiter_config(ReconstructionMode::All)).unwrap();
        pipe.apply(&op, &mut u, &mut PipelineStats::default()).unwrap();
        prop_assert!((op.total_mass(&u)[0] - before).abs() < 1e-12);
        for a in 0..op.n_elements() {
            let e = &op.mesh.elements[a];
            for k in 0..=16 {
                let x = e.left + (e.right - e.left) * k as f64 / 16.0;
                let v = u.evaluate_in(&op.mesh, &op.basis, a, 0, x);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "u = {} at x = {}", v, x);
            }
        }
    }

    #[test]
    fn euler_pipeline_restores_positivity(p in 1usize..4, n in 10usize..40, states in prop::collection::vec((1e-6f64..1.0, -3.0f64..3.0, 1e-6f64..1.0), 2..8)) {
        let problem = euler_problem("sod").unwrap();
        let gamma = problem.flux.gamma().unwrap();
        let eps = problem.positivity().unwrap().epsilon;
        let op = assemble(problem.build_mesh(n, 0.2, 3).unwrap(), p, problem.flux.clone(), problem.bc.clone(), OperatorConfig::default()).unwrap();
        let (x0, x1) = problem.domain;
        let mut u = op.l2_project_initial(|x, out| {
            let s = (x - x0) / (x1 - x0);
            let k = ((s.clamp(0.0, 1.0 - 1e-12)) * states.len() as f64) as usize;
            let (rho, vel, pr) = states[k];
            out.copy_from_slice(&cutdg_core::flux::conserved(rho, vel, pr, gamma));
        }).unwrap();
        let before = op.total_mass(&u);
        let pipe = Pipeline::new(&op, problem.limiter_config(ReconstructionMode::All)).unwrap();
        pipe.apply(&op, &mut u, &mut PipelineStats::default()).unwrap();
        let after = op.total_mass(&u);
        for v in 0..3 {
            prop_assert!((after[v] - before[v]).abs() < 1e-11 * before[v].abs().max(1.0));
        }
        let checks = CheckPointSet::new(p);
        for a in 0..op.n_elements() {
            for xi in checks.element_points(&op.mesh, a) {
                let q: Vec<f64> = (0..3).map(|v| op.basis.eval(u.element(a, v), xi)).collect();
                prop_assert!(q[0] >= eps * (1.0 - 1e-9), "rho = {}", q[0]);
                prop_assert!(pressure(&q, gamma) >= eps * (1.0 - 1e-9), "p = {}", pressure(&q, gamma));
            }
        }
    }
}

#[test]
fn zero_state_has_zero_mass() {
    let problem = advection_problem(AdvectionCase::Smooth);
    let op = assemble(
        problem.build_mesh(12, 0.2, 0).unwrap(),
        2,
        problem.flux.clone(),
        problem.bc.clone(),
        OperatorConfig::default(),
    )
    .unwrap();
    let u: DgState = op.zero_state();
    assert_eq!(op.total_mass(&u), vec![0.0]);
}
