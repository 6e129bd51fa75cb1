//! Test problems: flux, domain, boundary conditions, initial data, admissible
//! set, default cut layout and exact solutions where known.

pub mod riemann;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryCondition, BoundaryKind};
use crate::error::{CutDgError, Result};
use crate::flux::{conserved, FluxFunction, FluxModel};
use crate::limiters::{PositivityParams, ScalarBounds};
use crate::mesh::{
    build_background_mesh, build_unfitted_boundary_mesh, generate_interfaces, InterfaceSet, MeshComplex,
};
use crate::pipeline::LimiterConfig;
use crate::reconstruction::ReconstructionMode;

use riemann::{Primitive, RiemannSolution};

pub const GAMMA: f64 = 1.4;
/// Lower bound on density and pressure enforced by the positivity limiter.
pub const EULER_EPSILON: f64 = 1e-8;
/// Floor for the Sedov blast, whose ambient pressure is `4e-13`.
pub const SEDOV_EPSILON: f64 = 1e-13;
/// Location of the flux discontinuity.
pub const FLUX_INTERFACE: f64 = 2e-5;

pub const PROBLEM_NAMES: &[&str] = &[
    "advection_smooth",
    "advection_nonsmooth",
    "advection_inflow",
    "burgers_smooth",
    "burgers_rarefaction",
    "burgers_shock",
    "discontinuous_flux",
    "low_density",
    "sod",
    "double_rarefaction",
    "sedov",
    "two_blast",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvectionCase {
    Smooth,
    Nonsmooth,
    /// Pulse entering through an unfitted left boundary: `g = 1` up to `t = 0.5`, then 0.
    Inflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurgersCase {
    Smooth,
    Riemann { ul: f64, ur: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Advection(AdvectionCase),
    Burgers(BurgersCase),
    DiscontinuousFlux,
    LowDensity,
    Sod,
    DoubleRarefaction,
    Sedov,
    TwoBlast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissible {
    Bounds(ScalarBounds),
    Positivity(PositivityParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Analytic,
    /// A fine uncut run with the given mesh size and degree.
    SelfReference {
        h: f64,
        degree: usize,
    },
    None,
}

/// Where the background mesh is cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutLayout {
    /// One random interface in every element whose left edge lies in `region`.
    Region {
        region: (f64, f64),
        alpha: f64,
    },
    /// Interfaces at fixed coordinates.
    Interfaces(Vec<f64>),
    /// Physical domain immersed in the background mesh with end cells of size `alpha h`.
    UnfittedBoundary {
        alpha: f64,
    },
    Uncut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    pub flux: FluxModel,
    /// Physical domain.
    pub domain: (f64, f64),
    pub bc: BoundaryCondition,
    pub admissible: Admissible,
    pub reference: Reference,
    pub cuts: CutLayout,
    pub t_end: f64,
    /// Default TVB constant, if the problem needs slope limiting.
    pub tvb: Option<f64>,
}

pub fn advection_problem(case: AdvectionCase) -> ProblemSpec {
    if case == AdvectionCase::Inflow {
        return ProblemSpec {
            name: "advection_inflow".into(),
            kind: ProblemKind::Advection(case),
            flux: FluxModel::uniform(FluxFunction::Linear { speed: 1.0 }),
            domain: (0.0, 1.0),
            bc: BoundaryCondition {
                left: BoundaryKind::Inflow { before: vec![1.0], after: vec![0.0], t_switch: 0.5 },
                right: BoundaryKind::Outflow,
            },
            admissible: Admissible::Bounds(ScalarBounds { lower: 0.0, upper: 1.0 }),
            reference: Reference::Analytic,
            cuts: CutLayout::UnfittedBoundary { alpha: 0.01 },
            t_end: 1.0,
            tvb: None,
        };
    }
    let (name, domain, bounds, region) = match case {
        AdvectionCase::Smooth => ("advection_smooth", (0.0, 2.0), (0.5, 1.5), (0.75, 1.25)),
        _ => ("advection_nonsmooth", (0.0, 1.0), (0.0, 1.0), (0.375, 0.625)),
    };
    ProblemSpec {
        name: name.into(),
        kind: ProblemKind::Advection(case),
        flux: FluxModel::uniform(FluxFunction::Linear { speed: 1.0 }),
        domain,
        bc: BoundaryCondition::periodic(),
        admissible: Admissible::Bounds(ScalarBounds { lower: bounds.0, upper: bounds.1 }),
        reference: Reference::Analytic,
        cuts: CutLayout::Region { region, alpha: 0.1 },
        t_end: 1.0,
        tvb: None,
    }
}

pub fn burgers_problem(case: BurgersCase) -> ProblemSpec {
    let flux = FluxModel::uniform(FluxFunction::Burgers);
    match case {
        BurgersCase::Smooth => ProblemSpec {
            name: "burgers_smooth".into(),
            kind: ProblemKind::Burgers(case),
            flux,
            domain: (0.0, 2.0),
            bc: BoundaryCondition::periodic(),
            admissible: Admissible::Bounds(ScalarBounds { lower: -1.0, upper: 1.0 }),
            reference: Reference::Analytic,
            cuts: CutLayout::Region { region: (0.75, 1.25), alpha: 0.1 },
            t_end: 0.2,
            tvb: None,
        },
        BurgersCase::Riemann { ul, ur } => ProblemSpec {
            name: if ul < ur { "burgers_rarefaction" } else { "burgers_shock" }.into(),
            kind: ProblemKind::Burgers(case),
            flux,
            domain: (-2.0, 2.0),
            bc: BoundaryCondition::outflow(),
            admissible: Admissible::Bounds(ScalarBounds { lower: ul.min(ur), upper: ul.max(ur) }),
            reference: Reference::Analytic,
            cuts: CutLayout::Region { region: (-0.5, 0.5), alpha: 0.1 },
            t_end: 0.5,
            tvb: None,
        },
    }
}

/// Transport `u_t + u_x = 0` left of the interface, Burgers to its right.
pub fn discontinuous_flux_problem() -> ProblemSpec {
    ProblemSpec {
        name: "discontinuous_flux".into(),
        kind: ProblemKind::DiscontinuousFlux,
        flux: FluxModel::split(FluxFunction::Linear { speed: 1.0 }, FluxFunction::Burgers, 1),
        domain: (-1.0, 1.0),
        bc: BoundaryCondition { left: BoundaryKind::constant_inflow(vec![0.5]), right: BoundaryKind::Outflow },
        admissible: Admissible::Bounds(ScalarBounds { lower: 0.5, upper: 2.0 }),
        reference: Reference::Analytic,
        cuts: CutLayout::Interfaces(vec![FLUX_INTERFACE]),
        t_end: 0.9,
        tvb: None,
    }
}

pub fn euler_problem(name: &str) -> Result<ProblemSpec> {
    let euler = |kind, domain: (f64, f64), bc, reference, cuts, t_end, tvb| ProblemSpec {
        name: name.to_string(),
        kind,
        flux: FluxModel::uniform(FluxFunction::Euler { gamma: GAMMA }),
        domain,
        bc,
        admissible: Admissible::Positivity(PositivityParams { epsilon: EULER_EPSILON, gamma: GAMMA }),
        reference,
        cuts,
        t_end,
        tvb,
    };
    let region = |a: f64, b: f64| CutLayout::Region { region: (a, b), alpha: 0.01 };
    let p = match name {
        "low_density" => euler(
            ProblemKind::LowDensity,
            (0.0, 2.0 * PI),
            BoundaryCondition::periodic(),
            Reference::Analytic,
            region(0.75 * PI, 1.25 * PI),
            1.0,
            None,
        ),
        "sod" => euler(
            ProblemKind::Sod,
            (0.0, 1.0),
            BoundaryCondition::outflow(),
            Reference::Analytic,
            region(0.375, 0.625),
            0.2,
            Some(0.0),
        ),
        "double_rarefaction" => euler(
            ProblemKind::DoubleRarefaction,
            (-1.0, 1.0),
            BoundaryCondition::outflow(),
            Reference::Analytic,
            region(-0.25, 0.25),
            0.6,
            None,
        ),
        "sedov" => euler(
            ProblemKind::Sedov,
            (-2.0, 2.0),
            BoundaryCondition::outflow(),
            Reference::None,
            region(-0.5, 0.5),
            0.001,
            Some(0.1),
        ),
        "two_blast" => euler(
            ProblemKind::TwoBlast,
            (0.0, 1.0),
            BoundaryCondition::walls(),
            Reference::SelfReference { h: 1.0 / 3200.0, degree: 2 },
            CutLayout::UnfittedBoundary { alpha: 0.01 },
            0.038,
            Some(0.0),
        ),
        _ => return Err(CutDgError::UnknownProblem(name.to_string())),
    };
    let mut p = p;
    if p.kind == ProblemKind::Sedov {
        p.admissible = Admissible::Positivity(PositivityParams { epsilon: SEDOV_EPSILON, gamma: GAMMA });
    }
    Ok(p)
}

pub fn problem_by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "advection_smooth" => Ok(advection_problem(AdvectionCase::Smooth)),
        "advection_nonsmooth" => Ok(advection_problem(AdvectionCase::Nonsmooth)),
        "advection_inflow" => Ok(advection_problem(AdvectionCase::Inflow)),
        "burgers_smooth" => Ok(burgers_problem(BurgersCase::Smooth)),
        "burgers_rarefaction" => Ok(burgers_problem(BurgersCase::Riemann { ul: -1.0, ur: 1.0 })),
        "burgers_shock" => Ok(burgers_problem(BurgersCase::Riemann { ul: 1.0, ur: -0.5 })),
        "discontinuous_flux" => Ok(discontinuous_flux_problem()),
        _ => euler_problem(name),
    }
}

impl ProblemSpec {
    pub fn nvars(&self) -> usize {
        self.flux.nvars()
    }

    pub fn is_euler(&self) -> bool {
        self.flux.is_euler()
    }

    /// Initial data at `x`. `h` is the background mesh size, which sets the
    /// width of the Sedov energy deposit.
    pub fn initial(&self, x: f64, h: f64, out: &mut [f64]) {
        match self.kind {
            ProblemKind::Advection(AdvectionCase::Smooth) => out[0] = 1.0 + 0.5 * (PI * x).sin(),
            ProblemKind::Advection(AdvectionCase::Nonsmooth) => out[0] = if x > 0.1 && x < 0.5 { 1.0 } else { 0.0 },
            ProblemKind::Advection(AdvectionCase::Inflow) => out[0] = 0.0,
            ProblemKind::Burgers(BurgersCase::Smooth) => out[0] = (PI * x).sin(),
            ProblemKind::Burgers(BurgersCase::Riemann { ul, ur }) => out[0] = if x <= 0.0 { ul } else { ur },
            ProblemKind::DiscontinuousFlux => out[0] = if x < -0.5 { 0.5 } else { 2.0 },
            ProblemKind::LowDensity => out.copy_from_slice(&conserved(1.0 + 0.99 * x.sin(), 1.0, 1.0, GAMMA)),
            ProblemKind::Sod | ProblemKind::DoubleRarefaction => {
                let (l, r, x0) = self.riemann_data();
                let w = if x <= x0 { l } else { r };
                out.copy_from_slice(&w.conserved(GAMMA));
            }
            ProblemKind::Sedov => {
                let e = if (0.0..=h).contains(&x) { 3.2e6 } else { 1e-12 };
                out.copy_from_slice(&[1.0, 0.0, e]);
            }
            ProblemKind::TwoBlast => {
                let p = if x < 0.1 {
                    1e3
                } else if x < 0.9 {
                    1e-2
                } else {
                    1e2
                };
                out.copy_from_slice(&conserved(1.0, 0.0, p, GAMMA));
            }
        }
    }

    /// Exact solution at `(x, t)` in conserved variables.
    pub fn exact(&self, x: f64, t: f64, out: &mut [f64]) -> Result<()> {
        match self.kind {
            ProblemKind::Advection(AdvectionCase::Inflow) => {
                let s = t - (x - self.domain.0);
                out[0] = if s > 0.0 && s <= 0.5 { 1.0 } else { 0.0 };
            }
            ProblemKind::Advection(_) => {
                let (a, b) = self.domain;
                let y = a + (x - t - a).rem_euclid(b - a);
                self.initial(y, 0.0, out);
            }
            ProblemKind::Burgers(BurgersCase::Smooth) => {
                if t >= 1.0 / PI {
                    return Err(CutDgError::NoReference(format!("{} after shock formation", self.name)));
                }
                out[0] = burgers_characteristic(x, t);
            }
            ProblemKind::Burgers(BurgersCase::Riemann { ul, ur }) => out[0] = burgers_riemann(ul, ur, x, t),
            ProblemKind::DiscontinuousFlux => out[0] = discontinuous_flux_exact(x, t),
            ProblemKind::LowDensity => out.copy_from_slice(&conserved(1.0 + 0.99 * (x - t).sin(), 1.0, 1.0, GAMMA)),
            ProblemKind::Sod | ProblemKind::DoubleRarefaction => {
                let (l, r, x0) = self.riemann_data();
                let w = RiemannSolution::solve(l, r, GAMMA)?.at(x, t, x0);
                out.copy_from_slice(&w.conserved(GAMMA));
            }
            ProblemKind::Sedov | ProblemKind::TwoBlast => return Err(CutDgError::NoReference(self.name.clone())),
        }
        Ok(())
    }

    /// Exact solution as a reusable closure; the Riemann solve is done once.
    pub fn exact_solution(&self, t: f64) -> Result<Box<dyn Fn(f64, &mut [f64]) + '_>> {
        match self.kind {
            ProblemKind::Sod | ProblemKind::DoubleRarefaction => {
                let (l, r, x0) = self.riemann_data();
                let sol = RiemannSolution::solve(l, r, GAMMA)?;
                Ok(Box::new(move |x, out: &mut [f64]| out.copy_from_slice(&sol.at(x, t, x0).conserved(GAMMA))))
            }
            _ => {
                let mut probe = [0.0; 3];
                self.exact(self.domain.0, t, &mut probe[..self.nvars()])?;
                Ok(Box::new(move |x, out: &mut [f64]| {
                    let _ = self.exact(x, t, out);
                }))
            }
        }
    }

    fn riemann_data(&self) -> (Primitive, Primitive, f64) {
        match self.kind {
            ProblemKind::Sod => (Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1), 0.5),
            _ => (Primitive::new(7.0, -1.0, 0.2), Primitive::new(7.0, 1.0, 0.2), 0.0),
        }
    }

    pub fn bounds(&self) -> Option<ScalarBounds> {
        match self.admissible {
            Admissible::Bounds(b) => Some(b),
            Admissible::Positivity(_) => None,
        }
    }

    pub fn positivity(&self) -> Option<PositivityParams> {
        match self.admissible {
            Admissible::Positivity(p) => Some(p),
            Admissible::Bounds(_) => None,
        }
    }

    /// Limiter settings matching the admissible set and the default TVB constant.
    pub fn limiter_config(&self, mode: ReconstructionMode) -> LimiterConfig {
        LimiterConfig { mode, bounds: self.bounds(), positivity: self.positivity(), tvb: self.tvb }
    }

    /// Background mesh with `n` elements cut according to `self.cuts`.
    pub fn build_mesh(&self, n: usize, delta: f64, seed: u64) -> Result<MeshComplex> {
        let (a, b) = self.domain;
        let (background, interfaces) = match &self.cuts {
            CutLayout::UnfittedBoundary { alpha } => build_unfitted_boundary_mesh(a, b, n, *alpha)?,
            layout => {
                let mesh = build_background_mesh(a, b, n)?;
                let set = match layout {
                    CutLayout::Region { region, alpha } => generate_interfaces(&mesh, *region, *alpha, seed)?,
                    CutLayout::Interfaces(xs) => InterfaceSet::at_positions(&mesh, xs)?,
                    _ => InterfaceSet::empty(),
                };
                (mesh, set)
            }
        };
        MeshComplex::build(background, interfaces, delta)
    }
}

/// Solves `u = sin(pi (x - u t))` by Newton's method safeguarded with bisection.
pub fn burgers_characteristic(x: f64, t: f64) -> f64 {
    let g = |u: f64| u - (PI * (x - u * t)).sin();
    let dg = |u: f64| 1.0 + PI * t * (PI * (x - u * t)).cos();
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut u = (PI * x).sin();
    for _ in 0..100 {
        let r = g(u);
        if r.abs() < 1e-15 {
            break;
        }
        if r < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - r / dg(u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - u).abs() < 1e-13;
        u = next;
        if done {
            break;
        }
    }
    u
}

/// Entropy solution of the Burgers Riemann problem with the jump at `x = 0`.
pub fn burgers_riemann(ul: f64, ur: f64, x: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if x <= 0.0 { ul } else { ur };
    }
    let s = x / t;
    if ul < ur {
        s.clamp(ul, ur)
    } else if s < 0.5 * (ul + ur) {
        ul
    } else {
        ur
    }
}

/// The front `0.5 | 2` travels with unit speed until it meets the interface,
/// after which the Burgers side opens a rarefaction from 1 to 2.
pub fn discontinuous_flux_exact(x: f64, t: f64) -> f64 {
    let arrival = FLUX_INTERFACE + 0.5;
    if t <= arrival {
        return if x < -0.5 + t { 0.5 } else { 2.0 };
    }
    if x < FLUX_INTERFACE {
        0.5
    } else {
        ((x - FLUX_INTERFACE) / (t - arrival)).clamp(1.0, 2.0)
    }
}
