//! Canned experiments. Each id expands to a list of runs and convergence
//! sweeps whose results land in one directory per case.

use std::fmt::Write as _;
use std::path::Path;

use cutdg_core::basis::cfl_weight;
use cutdg_core::{Dissipation, Integrator, ReconstructionMode};

use crate::config::RunConfig;
use crate::run::{convergence_csv, convergence_sweep, convergence_table, run_to_dir};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Run(RunConfig),
    Sweep { config: RunConfig, levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub task: Task,
    /// A negative control: an abort is an expected outcome, not a failure.
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reproduction {
    pub id: &'static str,
    pub summary: &'static str,
    pub cases: Vec<Case>,
}

pub const IDS: &[&str] = &[
    "advection-accuracy-ms3",
    "advection-accuracy-rk3",
    "advection-maximum-principle",
    "advection-unfitted-inflow",
    "burgers-accuracy-ms3",
    "burgers-post-shock",
    "burgers-riemann",
    "discontinuous-flux",
    "euler-low-density-accuracy",
    "euler-sod",
    "euler-double-rarefaction",
    "euler-sedov",
    "euler-two-blast",
];

pub const ADVECTION_LEVELS: [usize; 6] = [20, 40, 80, 160, 320, 640];
pub const LOW_DENSITY_LEVELS: [usize; 4] = [20, 40, 80, 160];

pub fn base(problem: &str, degree: usize, n: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.problem.name = problem.into();
    c.scheme.degree = degree;
    c.mesh.n = n;
    c
}

/// Multistep step law used for the accuracy studies: `h / 24` for `p <= 2`,
/// and `h^(4/3) / 15` for `p = 3` so that the time error stays below `h^4`.
pub fn multistep_accuracy(mut c: RunConfig) -> RunConfig {
    c.time.integrator = Integrator::SspMs3;
    if c.scheme.degree >= 3 {
        c.time.dt_coefficient = Some(1.0 / 15.0);
        c.time.exponent = 4.0 / 3.0;
    } else {
        c.time.dt_coefficient = Some(1.0 / 24.0);
        c.time.exponent = 1.0;
    }
    c
}

/// RK3 step law for the accuracy studies: `0.45 w h^e / lambda` with the
/// first Gauss–Lobatto weight `w`, and `e = 4/3` for `p = 3`.
pub fn rk3_accuracy(mut c: RunConfig) -> RunConfig {
    c.time.integrator = Integrator::SspRk3;
    c.time.dt_coefficient = Some(0.45 * cfl_weight(c.scheme.degree));
    c.time.exponent = if c.scheme.degree >= 3 { 4.0 / 3.0 } else { 1.0 };
    c
}

fn run(label: impl Into<String>, config: RunConfig) -> Case {
    Case { label: label.into(), task: Task::Run(config), control: false }
}

fn control(label: impl Into<String>, config: RunConfig) -> Case {
    Case { label: label.into(), task: Task::Run(config), control: true }
}

fn sweep(label: impl Into<String>, config: RunConfig, levels: &[usize]) -> Case {
    Case { label: label.into(), task: Task::Sweep { config, levels: levels.to_vec() }, control: false }
}

pub fn reproduction(id: &str) -> Result<Reproduction, HarnessError> {
    let (id, summary, cases): (&'static str, &'static str, Vec<Case>) = match id {
        "advection-accuracy-ms3" => (
            "advection-accuracy-ms3",
            "smooth advection, multistep, P2 and P3 with reconstruction and limiter, alpha = 0.1",
            (2..=3)
                .map(|p| {
                    let mut c = multistep_accuracy(base("advection_smooth", p, 20));
                    c.mesh.alpha = Some(0.1);
                    sweep(format!("p{p}"), c, &ADVECTION_LEVELS)
                })
                .collect(),
        ),
        "advection-accuracy-rk3" => (
            "advection-accuracy-rk3",
            "smooth advection, RK3 with limiter, P3: limiting the stages degrades the order",
            {
                let mut c = rk3_accuracy(base("advection_smooth", 3, 20));
                c.mesh.alpha = Some(0.1);
                vec![sweep("p3", c, &ADVECTION_LEVELS)]
            },
        ),
        "advection-maximum-principle" => (
            "advection-maximum-principle",
            "discontinuous advection, N = 100: plain cut DG, per-element limiting, reconstruction with limiting",
            (1..=2)
                .flat_map(|p| {
                    let limited = base("advection_nonsmooth", p, 100);
                    let mut plain = limited.clone();
                    plain.limiter.reconstruction = ReconstructionMode::Off;
                    plain.limiter.bound_preserving = false;
                    plain.time.monitor = false;
                    let mut element = limited.clone();
                    element.limiter.reconstruction = ReconstructionMode::Off;
                    element.time.monitor = false;
                    [
                        control(format!("p{p}-plain"), plain),
                        control(format!("p{p}-element-limiter"), element),
                        run(format!("p{p}-reconstructed"), limited),
                    ]
                })
                .collect(),
        ),
        "advection-unfitted-inflow" => (
            "advection-unfitted-inflow",
            "smooth advection with inflow on a domain whose end cells are cut to alpha = 0.01",
            (1..=3).map(|p| sweep(format!("p{p}"), multistep_accuracy(base("advection_inflow", p, 20)), &[20, 40, 80, 160])).collect(),
        ),
        "burgers-accuracy-ms3" => (
            "burgers-accuracy-ms3",
            "Burgers before shock formation, multistep, local Lax-Friedrichs, P2 and P3",
            (2..=3)
                .map(|p| {
                    let mut c = multistep_accuracy(base("burgers_smooth", p, 20));
                    c.scheme.dissipation = Dissipation::Local;
                    sweep(format!("p{p}"), c, &ADVECTION_LEVELS)
                })
                .collect(),
        ),
        "burgers-post-shock" => (
            "burgers-post-shock",
            "Burgers with smooth data at t = 0.5, P3, RK3: limiter without reconstruction, with reconstruction everywhere, and only where bounds are violated",
            [20, 320]
                .into_iter()
                .flat_map(|n| {
                    let mut all = base("burgers_smooth", 3, n);
                    all.problem.t_end = Some(0.5);
                    let mut off = all.clone();
                    off.limiter.reconstruction = ReconstructionMode::Off;
                    let mut selective = all.clone();
                    selective.limiter.reconstruction = ReconstructionMode::OnViolation;
                    [
                        control(format!("n{n}-no-reconstruction"), off),
                        run(format!("n{n}-all"), all),
                        run(format!("n{n}-on-violation"), selective),
                    ]
                })
                .collect(),
        ),
        "burgers-riemann" => (
            "burgers-riemann",
            "Burgers Riemann problems (rarefaction -1|1, shock 1|-0.5) at t = 0.5, P1 to P3",
            ["burgers_rarefaction", "burgers_shock"]
                .into_iter()
                .flat_map(|name| (1..=3).map(move |p| run(format!("{name}-p{p}"), base(name, p, 80))))
                .collect(),
        ),
        "discontinuous-flux" => (
            "discontinuous-flux",
            "transport switching to Burgers at a tiny cut, N = 40, P1 to P3, up to t = 0.9",
            (1..=3).map(|p| run(format!("p{p}"), base("discontinuous_flux", p, 40))).collect(),
        ),
        "euler-low-density-accuracy" => (
            "euler-low-density-accuracy",
            "Euler density wave 1 + 0.99 sin(x - t), P1 to P3, RK3",
            (1..=3)
                .map(|p| sweep(format!("p{p}"), rk3_accuracy(base("low_density", p, 20)), &LOW_DENSITY_LEVELS))
                .collect(),
        ),
        "euler-sod" => (
            "euler-sod",
            "Sod shock tube at t = 0.2 with TVB and positivity limiting, P2 and P3",
            (2..=3).map(|p| run(format!("p{p}"), base("sod", p, 200))).collect(),
        ),
        "euler-double-rarefaction" => (
            "euler-double-rarefaction",
            "double rarefaction with near vacuum at t = 0.6, positivity limiting, P1 to P3",
            (1..=3).map(|p| run(format!("p{p}"), base("double_rarefaction", p, 200))).collect(),
        ),
        "euler-sedov" => (
            "euler-sedov",
            "Sedov blast at t = 0.001, N = 200, P2, reconstruction everywhere and only where positivity fails",
            {
                let all = base("sedov", 2, 200);
                let mut selective = all.clone();
                selective.limiter.reconstruction = ReconstructionMode::OnViolation;
                vec![run("all", all), run("on-violation", selective)]
            },
        ),
        "euler-two-blast" => (
            "euler-two-blast",
            "two interacting blast waves at t = 0.038 between walls with unfitted boundary cells (alpha = 0.01), TVD and positivity limiting, P1 to P3",
            (1..=3)
                .map(|p| run(format!("p{p}"), base("two_blast", p, 400)))
                .collect(),
        ),
        other => {
            return Err(HarnessError::Config(format!("unknown reproduction `{other}` (known: {})", IDS.join(", "))))
        }
    };
    Ok(Reproduction { id, summary, cases })
}

/// Outcome of one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub label: String,
    pub control: bool,
    pub error: Option<String>,
    pub text: String,
}

impl CaseOutcome {
    /// Failures that count: aborts of cases that are not negative controls.
    pub fn failed(&self) -> bool {
        self.error.is_some() && !self.control
    }
}

/// Runs every case of `rep` into `dir/<label>`.
pub fn execute(rep: &Reproduction, dir: &Path) -> Result<Vec<CaseOutcome>, HarnessError> {
    let mut out = Vec::with_capacity(rep.cases.len());
    for case in &rep.cases {
        let case_dir = dir.join(&case.label);
        std::fs::create_dir_all(&case_dir)?;
        let (error, text) = match &case.task {
            Task::Run(cfg) => {
                std::fs::write(case_dir.join("config.toml"), cfg.to_toml())?;
                match run_to_dir(cfg, &case_dir) {
                    Ok(o) => (None, summarize(&o.report)),
                    Err(e @ HarnessError::Config(_)) => return Err(e),
                    Err(e) => (Some(e.to_string()), String::new()),
                }
            }
            Task::Sweep { config, levels } => {
                std::fs::write(case_dir.join("config.toml"), config.to_toml())?;
                match convergence_sweep(config, levels) {
                    Ok(rows) => {
                        std::fs::write(case_dir.join("convergence.csv"), convergence_csv(&rows))?;
                        (None, convergence_table(&rows))
                    }
                    Err(e @ HarnessError::Config(_)) => return Err(e),
                    Err(e) => (Some(e.to_string()), String::new()),
                }
            }
        };
        out.push(CaseOutcome { label: case.label.clone(), control: case.control, error, text });
    }
    Ok(out)
}

fn summarize(r: &crate::ErrorReport) -> String {
    let mut s = format!("t = {:.6}, {} steps, {:.2} s", r.t_final, r.steps, r.runtime_s);
    if let Some(e) = r.errors {
        let _ = write!(s, ", L1 {:.4e}, L2 {:.4e}, Linf {:.4e}", e.l1, e.l2, e.linf);
    }
    if let (Some(lo), Some(hi)) = (r.min, r.max) {
        let _ = write!(s, ", range [{lo:.15}, {hi:.15}]");
    }
    if let (Some(rho), Some(p)) = (r.min_rho, r.min_p) {
        let _ = write!(s, ", min rho {rho:.4e}, min p {p:.4e}");
    }
    s
}
