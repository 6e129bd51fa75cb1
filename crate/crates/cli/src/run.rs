//! Single runs, output files and convergence sweeps.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use cutdg_core::flux::pressure;
use cutdg_core::{
    assemble, problem_by_name, CutLayout, DgState, DtLaw, LimiterConfig, OperatorConfig, PipelineStats, ProblemSpec,
    Reference, RunResult, SemiDiscreteOperator, Solver, StepRecord, TimeConfig,
};

use crate::config::{RunConfig, TvbKeyword, TvbSetting};
use crate::norms::{compute_errors, eoc, ErrorNorms};
use crate::HarnessError;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "CUTDG_OUTPUT_DIR";
/// Solution samples per background element.
pub const SAMPLES_PER_ELEMENT: usize = 8;

/// A problem discretized according to a configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub problem: ProblemSpec,
    pub op: SemiDiscreteOperator,
    pub limiting: LimiterConfig,
    pub time: TimeConfig,
}

impl Experiment {
    pub fn new(cfg: &RunConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let mut problem = problem_by_name(&cfg.problem.name)?;
        if let Some(t) = cfg.problem.t_end {
            problem.t_end = t;
        }
        if cfg.mesh.uncut {
            problem.cuts = CutLayout::Uncut;
        }
        match &mut problem.cuts {
            CutLayout::Region { region, alpha } => {
                if let Some(a) = cfg.mesh.alpha {
                    *alpha = a;
                }
                if let Some(r) = cfg.mesh.cut_region {
                    *region = r;
                }
            }
            CutLayout::UnfittedBoundary { alpha } => {
                if let Some(a) = cfg.mesh.alpha {
                    *alpha = a;
                }
            }
            _ => {}
        }
        let mesh = problem.build_mesh(cfg.mesh.n, cfg.mesh.delta, cfg.mesh.seed)?;
        let op_config = OperatorConfig {
            gamma0: cfg.scheme.gamma0,
            gamma1: cfg.scheme.gamma1,
            weights: cfg.scheme.penalty_weights,
            volume_points: None,
            dissipation: cfg.scheme.dissipation,
        };
        let op = assemble(mesh, cfg.scheme.degree, problem.flux.clone(), problem.bc.clone(), op_config)?;

        let mut limiting = problem.limiter_config(cfg.limiter.reconstruction);
        if !cfg.limiter.bound_preserving {
            limiting.bounds = None;
            limiting.positivity = None;
        }
        if let (Some(eps), Some(p)) = (cfg.limiter.epsilon, limiting.positivity.as_mut()) {
            p.epsilon = eps;
        }
        limiting.tvb = match cfg.limiter.tvb {
            TvbSetting::Constant(m) => Some(m),
            TvbSetting::Keyword(TvbKeyword::Off) => None,
            TvbSetting::Keyword(TvbKeyword::Default) => problem.tvb,
        };
        let law = match cfg.time.dt_coefficient {
            Some(coefficient) => DtLaw::Fixed { coefficient, exponent: cfg.time.exponent },
            None => DtLaw::Cfl { safety: cfg.time.cfl, exponent: cfg.time.exponent },
        };
        let time = TimeConfig {
            integrator: cfg.time.integrator,
            law,
            t_end: problem.t_end,
            lambda_refresh: cfg.time.lambda_refresh,
            monitor: cfg.time.monitor,
            max_steps: cfg.time.max_steps,
        };
        Ok(Self { config: cfg.clone(), problem, op, limiting, time })
    }

    /// Runs to the final time, handing every step record to `observe`.
    pub fn integrate(&self, observe: impl FnMut(&StepRecord)) -> Result<RunResult, HarnessError> {
        let mut solver = Solver::new(&self.op, self.limiting, self.time)?;
        let h = self.op.mesh.h();
        let u0 = solver.initialize(|x, out| self.problem.initial(x, h, out))?;
        Ok(solver.integrate_from(u0, observe)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: String,
    pub degree: usize,
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    pub t_final: f64,
    pub steps: usize,
    /// Errors against the exact or reference solution (density for Euler).
    pub errors: Option<ErrorNorms>,
    /// Scalar problems: extrema over all steps.
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Euler problems: minimum density and pressure over all steps.
    pub min_rho: Option<f64>,
    pub min_p: Option<f64>,
    /// Largest deviation of the first conserved variable's total from its initial value.
    pub mass_drift: f64,
    /// Largest `|mass(t) + outflow(t) - mass(0)|`, with `outflow` the
    /// time-integrated numerical flux through the domain boundary.
    pub mass_balance: f64,
    pub max_lambda: f64,
    pub stats: PipelineStats,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ErrorReport,
    pub result: RunResult,
}

/// Runs `cfg` without writing files.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    let exp = Experiment::new(cfg)?;
    let start = Instant::now();
    let result = exp.integrate(|_| {})?;
    let runtime_s = start.elapsed().as_secs_f64();
    let report = build_report(&exp, &result, runtime_s)?;
    Ok(RunOutcome { report, result })
}

/// Runs `cfg` and writes the solution, diagnostics and report into `dir`.
/// Diagnostics up to the failing step are written even when the run aborts.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome, HarnessError> {
    let exp = Experiment::new(cfg)?;
    std::fs::create_dir_all(dir)?;
    let mut records = Vec::new();
    let start = Instant::now();
    let outcome = exp.integrate(|r| records.push(r.clone()));
    let euler = exp.problem.is_euler();
    if cfg.output.diagnostics {
        write_file(&dir.join("diagnostics.csv"), &diagnostics_csv(&records, euler))?;
    }
    let result = outcome?;
    let runtime_s = start.elapsed().as_secs_f64();
    let report = build_report(&exp, &result, runtime_s)?;
    write_file(&dir.join("solution.csv"), &solution_csv(&exp, &result.state))?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&dir.join("report.json"), &json)?;
    Ok(RunOutcome { report, result })
}

/// `output.dir`, unless overridden by the environment.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone())
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn build_report(exp: &Experiment, result: &RunResult, runtime_s: f64) -> Result<ErrorReport, HarnessError> {
    let op = &exp.op;
    let euler = exp.problem.is_euler();
    let recs = &result.records;
    let (lo, hi) = recs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.min), hi.max(r.max)));
    let min_p = recs.iter().map(|r| r.max).fold(f64::INFINITY, f64::min);
    let m0 = recs[0].mass[0];
    let mass_drift = recs.iter().map(|r| (r.mass[0] - m0).abs()).fold(0.0, f64::max);
    let mass_balance = recs.iter().map(|r| (r.mass[0] + r.outflow[0] - m0).abs()).fold(0.0, f64::max);
    let errors = reference_errors(exp, &result.state)?;
    Ok(ErrorReport {
        problem: exp.problem.name.clone(),
        degree: op.degree(),
        n: op.mesh.background.n_elements,
        h: op.mesh.h(),
        seed: exp.config.mesh.seed,
        t_final: result.state.time,
        steps: result.steps,
        errors,
        min: (!euler).then_some(lo),
        max: (!euler).then_some(hi),
        min_rho: euler.then_some(lo),
        min_p: euler.then_some(min_p),
        mass_drift,
        mass_balance,
        max_lambda: result.max_lambda,
        stats: result.stats,
        runtime_s,
    })
}

fn reference_errors(exp: &Experiment, state: &DgState) -> Result<Option<ErrorNorms>, HarnessError> {
    let (mesh, basis) = (&exp.op.mesh, &exp.op.basis);
    match exp.problem.reference {
        Reference::Analytic => match exp.problem.exact_solution(state.time) {
            Ok(f) => Ok(Some(compute_errors(state, mesh, basis, 0, &*f))),
            Err(cutdg_core::CutDgError::NoReference(_)) => Ok(None),
            Err(e) => Err(e.into()),
        },
        Reference::SelfReference { h, degree } if exp.config.problem.self_reference => {
            let fine = self_reference(exp, h, degree)?;
            let f = |x: f64, out: &mut [f64]| {
                for (v, o) in out.iter_mut().enumerate() {
                    *o = fine.state.evaluate(&fine.mesh, &fine.basis, v, x);
                }
            };
            Ok(Some(compute_errors(state, mesh, basis, 0, &f)))
        }
        _ => Ok(None),
    }
}

/// Fine-mesh solution on the uncut physical domain.
pub struct FineReference {
    pub mesh: cutdg_core::MeshComplex,
    pub basis: cutdg_core::PolyBasis,
    pub state: DgState,
}

pub fn self_reference(exp: &Experiment, h: f64, degree: usize) -> Result<FineReference, HarnessError> {
    let (a, b) = exp.problem.domain;
    let mut cfg = exp.config.clone();
    cfg.mesh.n = ((b - a) / h).round() as usize;
    cfg.mesh.uncut = true;
    cfg.mesh.delta = 1.0;
    cfg.scheme.degree = degree;
    cfg.time.integrator = cutdg_core::Integrator::SspRk3;
    cfg.time.dt_coefficient = None;
    cfg.time.exponent = 1.0;
    let fine = Experiment::new(&cfg)?;
    let result = fine.integrate(|_| {})?;
    Ok(FineReference { mesh: fine.op.mesh.clone(), basis: fine.op.basis.clone(), state: result.state })
}

/// Samples at `SAMPLES_PER_ELEMENT` uniform points of every background
/// element, restricted to the physical domain.
pub fn solution_csv(exp: &Experiment, state: &DgState) -> String {
    let mesh = &exp.op.mesh;
    let basis = &exp.op.basis;
    let (xl, xr) = mesh.physical_domain();
    let gamma = exp.problem.flux.gamma();
    let mut s = String::new();
    s.push_str(if gamma.is_some() { "x,rho,velocity,pressure\n" } else { "x,u\n" });
    for j in 0..mesh.background.n_elements {
        for i in 0..SAMPLES_PER_ELEMENT {
            let x = mesh.background.edge(j) + (i as f64 + 0.5) / SAMPLES_PER_ELEMENT as f64 * mesh.h();
            if x < xl || x > xr {
                continue;
            }
            match gamma {
                Some(g) => {
                    let q = [0, 1, 2].map(|v| state.evaluate(mesh, basis, v, x));
                    let _ = writeln!(s, "{x:.16e},{:.16e},{:.16e},{:.16e}", q[0], q[1] / q[0], pressure(&q, g));
                }
                None => {
                    let _ = writeln!(s, "{x:.16e},{:.16e}", state.evaluate(mesh, basis, 0, x));
                }
            }
        }
    }
    s
}

pub fn diagnostics_csv(records: &[StepRecord], euler: bool) -> String {
    let mut s = String::from(if euler { "t,dt,mass,min_rho,min_p\n" } else { "t,dt,mass,min,max\n" });
    for r in records {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.dt, r.mass[0], r.min, r.max);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub l2: f64,
    pub linf: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_linf: Option<f64>,
    pub steps: usize,
    pub runtime_s: f64,
    /// Pointwise minimum over the run (scalar), or minimum density (Euler).
    pub minimum: Option<f64>,
}

/// Per-level seed derived from the master seed.
pub fn level_seed(master: u64, n: usize) -> u64 {
    master ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs every level (in parallel threads) and tabulates errors and orders.
pub fn convergence_sweep(cfg: &RunConfig, levels: &[usize]) -> Result<Vec<ConvergenceRow>, HarnessError> {
    if levels.len() < 3 {
        return Err(HarnessError::Config(format!("a convergence sweep needs at least 3 levels, got {}", levels.len())));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Config("levels must be increasing".into()));
    }
    let outcomes: Vec<Result<RunOutcome, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| {
                let mut c = cfg.clone();
                c.mesh.n = n;
                c.mesh.seed = level_seed(cfg.mesh.seed, n);
                scope.spawn(move || run(&c))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (i, out) in outcomes.into_iter().enumerate() {
        let out = out?;
        let e = out.report.errors.ok_or_else(|| cutdg_core::CutDgError::NoReference(out.report.problem.clone()))?;
        let (eoc_l2, eoc_linf) = match rows.last() {
            Some(prev) => {
                (Some(eoc(prev.l2, e.l2, prev.n, levels[i])), Some(eoc(prev.linf, e.linf, prev.n, levels[i])))
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n: levels[i],
            h: out.report.h,
            l2: e.l2,
            linf: e.linf,
            eoc_l2,
            eoc_linf,
            steps: out.report.steps,
            runtime_s: out.report.runtime_s,
            minimum: out.report.min.or(out.report.min_rho),
        });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,h,l2,linf,eoc_l2,eoc_linf\n");
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(s, "{},{:.16e},{:.16e},{:.16e},{},{}", r.n, r.h, r.l2, r.linf, fmt(r.eoc_l2), fmt(r.eoc_linf));
    }
    s
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!("{:>6} {:>12} {:>12} {:>7} {:>12} {:>7}\n", "N", "h", "L2", "EOC", "Linf", "EOC");
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:7.3}")).unwrap_or_else(|| format!("{:>7}", "-"));
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>12.4e} {:>12.4e} {} {:>12.4e} {}",
            r.n,
            r.h,
            r.l2,
            fmt(r.eoc_l2),
            r.linf,
            fmt(r.eoc_linf)
        );
    }
    s
}
