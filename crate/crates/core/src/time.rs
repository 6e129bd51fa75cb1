//! Strong-stability-preserving time integration with reconstruction and
//! limiting after every forward Euler combination.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::basis::cfl_weight;
use crate::error::{CutDgError, Result};
use crate::limiters::{exact_extrema, pressure, CheckPointSet, PositivityParams, ScalarBounds};
use crate::operator::SemiDiscreteOperator;
use crate::pipeline::{LimiterConfig, Pipeline, PipelineStats};
use crate::state::DgState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Three-stage, third-order SSP Runge–Kutta (Shu–Osher form).
    #[default]
    SspRk3,
    /// Four-step, third-order SSP multistep method.
    SspMs3,
}

impl Integrator {
    /// SSP coefficient relative to forward Euler.
    pub fn ssp_coefficient(&self) -> f64 {
        match self {
            Self::SspRk3 => 1.0,
            Self::SspMs3 => 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtLaw {
    /// `dt = safety * delta * h^exponent * w * c_ssp / lambda`, where `w` is the
    /// first normalized Gauss–Lobatto weight (1 for `p = 0`).
    Cfl { safety: f64, exponent: f64 },
    /// `dt = coefficient * h^exponent / lambda`.
    Fixed { coefficient: f64, exponent: f64 },
}

impl Default for DtLaw {
    fn default() -> Self {
        Self::Cfl { safety: 0.9, exponent: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRefresh {
    #[default]
    Step,
    Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub integrator: Integrator,
    pub law: DtLaw,
    pub t_end: f64,
    pub lambda_refresh: LambdaRefresh,
    /// Abort when a macro mean leaves the bounds or the admissible set.
    pub monitor: bool,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            integrator: Integrator::SspRk3,
            law: DtLaw::default(),
            t_end: 1.0,
            lambda_refresh: LambdaRefresh::Step,
            monitor: true,
            max_steps: 10_000_000,
        }
    }
}

/// Time step allowed by `law` for wave speed `lambda`.
pub fn compute_dt(law: DtLaw, integrator: Integrator, h: f64, delta: f64, degree: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(CutDgError::InvalidParameter(format!("wave speed must be positive, got {lambda}")));
    }
    let dt = match law {
        DtLaw::Cfl { safety, exponent } => {
            safety * delta * h.powf(exponent) * cfl_weight(degree) * integrator.ssp_coefficient() / lambda
        }
        DtLaw::Fixed { coefficient, exponent } => coefficient * h.powf(exponent) / lambda,
    };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CutDgError::InvalidParameter(format!("non-positive time step {dt}")));
    }
    Ok(dt)
}

/// Past states and their operator evaluations for the multistep method,
/// oldest first.
#[derive(Debug, Clone, Default)]
pub struct MultistepHistory {
    entries: VecDeque<(DgState, DgState)>,
    /// Cumulative outflow at each entry and the boundary outflow rate of its
    /// operator evaluation.
    balance: VecDeque<([f64; 3], [f64; 3])>,
}

impl MultistepHistory {
    pub const DEPTH: usize = 4;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, state: DgState, l: DgState) {
        self.push_balanced(state, l, [0.0; 3], [0.0; 3]);
    }

    /// Pushes an entry with its cumulative boundary outflow and outflow rate.
    pub fn push_balanced(&mut self, state: DgState, l: DgState, outflow: [f64; 3], rate: [f64; 3]) {
        self.entries.push_back((state, l));
        self.balance.push_back((outflow, rate));
        while self.entries.len() > Self::DEPTH {
            self.entries.pop_front();
            self.balance.pop_front();
        }
    }
}

const MAX_WARM_UP_SUBSTEPS: usize = 1000;
const MAX_STEP_RETRIES: usize = 50;
/// Head room on the wave speed after a rejected step.
const STAGE_SPEED_GROWTH: f64 = 1.1;
/// Per-step decay of the remembered stage speed.
const SPEED_HINT_DECAY: f64 = 0.95;

/// Outcome of a guarded RK3 step.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Done(DgState),
    /// A stage reached this wave speed, above the one the step was sized for.
    TooFast(f64),
}

/// Diagnostics after one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: Vec<f64>,
    /// Time-integrated net flux out of the domain since the start, per variable.
    pub outflow: Vec<f64>,
    /// Scalar: pointwise minimum. Euler: minimum density.
    pub min: f64,
    /// Scalar: pointwise maximum. Euler: minimum pressure.
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: DgState,
    pub records: Vec<StepRecord>,
    pub stats: PipelineStats,
    pub steps: usize,
    pub max_lambda: f64,
}

/// Drives the time integration of one discretization.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    pub op: &'a SemiDiscreteOperator,
    pub pipeline: Pipeline,
    pub config: TimeConfig,
    pub stats: PipelineStats,
    checks: CheckPointSet,
    /// Stage speed that forced the last rejected step, decaying afterwards.
    speed_hint: f64,
    /// Time-integrated boundary outflow of the accepted steps.
    outflow: [f64; 3],
}

impl<'a> Solver<'a> {
    pub fn new(op: &'a SemiDiscreteOperator, limiting: LimiterConfig, config: TimeConfig) -> Result<Self> {
        if !(config.t_end > 0.0) {
            return Err(CutDgError::InvalidParameter(format!("t_end must be positive, got {}", config.t_end)));
        }
        Ok(Self {
            pipeline: Pipeline::new(op, limiting)?,
            op,
            config,
            stats: PipelineStats::default(),
            speed_hint: 0.0,
            outflow: [0.0; 3],
            checks: CheckPointSet::new(op.degree()),
        })
    }

    fn bounds(&self) -> Option<ScalarBounds> {
        self.pipeline.config.bounds
    }

    fn positivity(&self) -> Option<PositivityParams> {
        self.pipeline.config.positivity
    }

    /// Reconstruction and limiting, followed by the mean monitor.
    pub fn post_process(&mut self, u: &mut DgState) -> Result<()> {
        self.pipeline.apply(self.op, u, &mut self.stats)?;
        if self.config.monitor {
            self.check_means(u)?;
        }
        Ok(())
    }

    fn check_means(&self, u: &DgState) -> Result<()> {
        let mesh = &self.op.mesh;
        let basis = &self.op.basis;
        if let Some(b) = self.bounds() {
            for m in 0..mesh.macros.len() {
                let mean = u.macro_mean(mesh, basis, m, 0);
                if !(mean >= b.lower - 1e-11 && mean <= b.upper + 1e-11) {
                    return Err(CutDgError::InvariantViolation {
                        time: u.time,
                        detail: format!("macro {m} mean {mean} outside [{}, {}]", b.lower, b.upper),
                    });
                }
            }
        }
        if let Some(p) = self.positivity() {
            for m in 0..mesh.macros.len() {
                let q =
                    [u.macro_mean(mesh, basis, m, 0), u.macro_mean(mesh, basis, m, 1), u.macro_mean(mesh, basis, m, 2)];
                let pr = pressure(&q, p.gamma);
                if !(q[0] > 0.0 && pr > 0.0) {
                    return Err(CutDgError::InvariantViolation {
                        time: u.time,
                        detail: format!("macro {m} mean not admissible: rho = {}, p = {pr}", q[0]),
                    });
                }
            }
        }
        Ok(())
    }

    fn lambda(&self, u: &DgState) -> Result<f64> {
        self.op.global_lambda(u)
    }

    fn stage_lambda(&self, u: &DgState, lambda: f64) -> Result<f64> {
        match self.config.lambda_refresh {
            LambdaRefresh::Step => Ok(lambda),
            LambdaRefresh::Stage => self.lambda(u),
        }
    }

    /// `u + dt L(u)` at time `t`, without post-processing.
    fn euler(&self, u: &DgState, dt: f64, lambda: f64) -> Result<DgState> {
        self.op.forward_euler_update(u, dt, lambda)
    }

    /// One SSP-RK3 step.
    pub fn ssp_rk3_step(&mut self, u: &DgState, dt: f64, lambda: f64) -> Result<DgState> {
        match self.rk3(u, dt, lambda, false)? {
            Stage::Done(next) => Ok(next),
            Stage::TooFast(_) => unreachable!("unguarded step"),
        }
    }

    /// SSP-RK3 step that stops as soon as a post-processed stage carries a
    /// wave speed above `lambda`, the speed `dt` was chosen for.
    pub fn guarded_rk3_step(&mut self, u: &DgState, dt: f64, lambda: f64) -> Result<Stage> {
        self.rk3(u, dt, lambda, true)
    }

    fn rk3(&mut self, u: &DgState, dt: f64, lambda: f64, guard: bool) -> Result<Stage> {
        let t = u.time;
        let b0 = self.op.boundary_outflow(u, lambda, t);
        let mut u1 = self.euler(u, dt, lambda)?;
        u1.time = t + dt;
        self.post_process(&mut u1)?;
        let lam = match self.stage_speed(&u1, lambda, guard)? {
            Ok(l) => l,
            Err(s) => return Ok(Stage::TooFast(s)),
        };

        let b1 = self.op.boundary_outflow(&u1, lam, u1.time);
        let e1 = self.euler(&u1, dt, lam)?;
        let mut u2 = DgState::combine(&[(0.75, u), (0.25, &e1)]);
        u2.time = t + 0.5 * dt;
        self.post_process(&mut u2)?;
        let lam = match self.stage_speed(&u2, lambda, guard)? {
            Ok(l) => l,
            Err(s) => return Ok(Stage::TooFast(s)),
        };

        let b2 = self.op.boundary_outflow(&u2, lam, u2.time);
        let e2 = self.euler(&u2, dt, lam)?;
        // u + 2/3 (e2 - u), exact weights as in the multistep update
        let mut d = e2;
        d.axpy(-1.0, u);
        let mut next = u.clone();
        next.axpy(2.0 / 3.0, &d);
        next.time = t + dt;
        self.post_process(&mut next)?;
        for v in 0..3 {
            self.outflow[v] += dt * (b0[v] / 6.0 + b1[v] / 6.0 + 2.0 / 3.0 * b2[v]);
        }
        Ok(Stage::Done(next))
    }

    /// Dissipation speed for the next stage, or `Err(speed)` when guarding
    /// and the stage is faster than `lambda`.
    fn stage_speed(&self, u: &DgState, lambda: f64, guard: bool) -> Result<std::result::Result<f64, f64>> {
        if guard {
            let s = self.lambda(u)?;
            if s > lambda {
                return Ok(Err(s));
            }
        }
        self.stage_lambda(u, lambda).map(Ok)
    }

    /// Number of RK3 substeps per multistep start-up step. Limiting the
    /// intermediate stages costs `O(dt_sub^2)` per substep; the substeps keep
    /// the accumulated start-up error below the spatial error scale `h^(p+1)`.
    pub fn warm_up_substeps(&self, dt: f64, lambda: f64) -> usize {
        let h = self.op.mesh.h();
        let r = 9.0 * (lambda * dt).powi(2) / h.powi(self.op.degree() as i32 + 1);
        (r.ceil() as usize).clamp(1, MAX_WARM_UP_SUBSTEPS)
    }

    /// One start-up step of the multistep method, taken as RK3 substeps.
    pub fn warm_up_step(&mut self, u: &DgState, dt: f64, lambda: f64) -> Result<DgState> {
        let m = self.warm_up_substeps(dt, lambda);
        let sub = dt / m as f64;
        let mut v = self.ssp_rk3_step(u, sub, lambda)?;
        for _ in 1..m {
            v = self.ssp_rk3_step(&v, sub, lambda)?;
        }
        Ok(v)
    }

    /// One SSP multistep step `16/27 (u^n + 3 dt L(u^n)) + 11/27 (u^{n-3} + 12/11 dt L(u^{n-3}))`.
    /// The newest history entry is the current state `u^n`.
    pub fn ssp_ms3_step(&mut self, history: &MultistepHistory, dt: f64) -> Result<DgState> {
        if history.len() < MultistepHistory::DEPTH {
            return Err(CutDgError::ColdHistory { have: history.len(), need: MultistepHistory::DEPTH });
        }
        let (old, l_old) = &history.entries[0];
        let (cur, l_cur) = &history.entries[MultistepHistory::DEPTH - 1];
        let (o_old, b_old) = history.balance[0];
        let (o_cur, b_cur) = history.balance[MultistepHistory::DEPTH - 1];
        let mut a = cur.clone();
        a.axpy(3.0 * dt, l_cur);
        let mut b = old.clone();
        b.axpy(12.0 / 11.0 * dt, l_old);
        // b + 16/27 (a - b): the weights sum to one exactly, so constants are not eroded
        a.axpy(-1.0, &b);
        let mut next = b;
        next.axpy(16.0 / 27.0, &a);
        next.time = cur.time + dt;
        self.post_process(&mut next)?;
        // the outflow obeys the same recursion as the mass
        for v in 0..3 {
            self.outflow[v] =
                o_old[v] + 16.0 / 27.0 * (o_cur[v] - o_old[v]) + dt * (16.0 / 9.0 * b_cur[v] + 4.0 / 9.0 * b_old[v]);
        }
        Ok(next)
    }

    /// Projection of the initial data followed by the post-processing stage.
    pub fn initialize(&mut self, u0: impl Fn(f64, &mut [f64])) -> Result<DgState> {
        let mut s = self.op.l2_project_initial(u0)?;
        self.post_process(&mut s)?;
        Ok(s)
    }

    /// Pointwise extrema (scalar) or minimum density and pressure (Euler).
    pub fn extrema(&self, u: &DgState) -> (f64, f64) {
        let mesh = &self.op.mesh;
        let basis = &self.op.basis;
        if let Some(gamma) = self.op.flux.gamma() {
            let (mut rho, mut p) = (f64::INFINITY, f64::INFINITY);
            for a in 0..u.n_elements {
                for xi in self.checks.element_points(mesh, a) {
                    let q = [
                        basis.eval(u.element(a, 0), xi),
                        basis.eval(u.element(a, 1), xi),
                        basis.eval(u.element(a, 2), xi),
                    ];
                    rho = rho.min(q[0]);
                    p = p.min(pressure(&q, gamma));
                }
            }
            (rho, p)
        } else {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for a in 0..u.n_elements {
                let (l, r) = DgState::xi_range(mesh, a);
                let (x, y) = exact_extrema(basis, u.element(a, 0), l, r);
                lo = lo.min(x);
                hi = hi.max(y);
            }
            (lo, hi)
        }
    }

    fn record(&self, step: usize, dt: f64, u: &DgState) -> StepRecord {
        let (min, max) = self.extrema(u);
        let outflow = self.outflow[..u.nvars].to_vec();
        StepRecord { step, t: u.time, dt, mass: self.op.total_mass(u), outflow, min, max }
    }

    fn step_dt(&self, lambda: f64) -> Result<f64> {
        compute_dt(
            self.config.law,
            self.config.integrator,
            self.op.mesh.h(),
            self.op.mesh.delta,
            self.op.degree(),
            lambda,
        )
    }

    /// Integrates from `u` (already post-processed) to `t_end`, calling
    /// `observe` after every step.
    pub fn integrate_from(&mut self, mut u: DgState, mut observe: impl FnMut(&StepRecord)) -> Result<RunResult> {
        let t_end = self.config.t_end;
        self.outflow = [0.0; 3];
        let mut records = vec![self.record(0, 0.0, &u)];
        observe(&records[0]);
        let lambda0 = self.lambda(&u)?;
        let mut max_lambda = lambda0;
        let multistep = self.config.integrator == Integrator::SspMs3;
        let t0 = u.time;
        // the multistep method needs uniform steps; fix them from the initial wave speed
        let uniform_dt = if multistep || self.op.flux.is_linear() {
            let dt0 = self.step_dt(lambda0)?;
            let n = ((t_end - t0) / dt0 * (1.0 - 1e-12)).ceil().max(1.0);
            Some(((t_end - t0) / n, n as usize))
        } else {
            None
        };
        let mut history = MultistepHistory::new();
        let mut step = 0;
        let wrap = |step: usize, time: f64, e: CutDgError| CutDgError::StepFailed { step, time, source: Box::new(e) };

        loop {
            let done = match uniform_dt {
                Some((_, n)) => step >= n,
                None => u.time >= t_end * (1.0 - 1e-14),
            };
            if done {
                break;
            }
            if step >= self.config.max_steps {
                return Err(CutDgError::InvalidParameter(format!("step limit {} reached", self.config.max_steps)));
            }
            step += 1;
            let mut lambda = self.lambda(&u).map_err(|e| wrap(step, u.time, e))?;
            if uniform_dt.is_none() {
                lambda = lambda.max(self.speed_hint);
            }
            max_lambda = max_lambda.max(lambda);
            let remaining = t_end - u.time;
            let dt = match uniform_dt {
                Some((dt, _)) => {
                    if multistep && lambda > lambda0 * (1.0 + 1e-8) {
                        log::warn!("wave speed grew from {lambda0} to {lambda}; multistep step stays fixed");
                    }
                    dt
                }
                None => {
                    let dt0 = self.step_dt(lambda)?;
                    if remaining <= dt0 * (1.0 + 1e-12) {
                        remaining
                    } else if remaining < 2.0 * dt0 {
                        0.5 * remaining
                    } else {
                        dt0
                    }
                }
            };
            if multistep {
                let l = self.op.apply(&u, lambda, u.time).map_err(|e| wrap(step, u.time, e))?;
                let rate = self.op.boundary_outflow(&u, lambda, u.time);
                history.push_balanced(u.clone(), l, self.outflow, rate);
            }
            let result = if multistep && history.len() == MultistepHistory::DEPTH {
                self.ssp_ms3_step(&history, dt)
            } else if multistep {
                self.warm_up_step(&u, dt, lambda)
            } else if uniform_dt.is_none() {
                self.adaptive_rk3_step(&u, dt, lambda, remaining, &mut max_lambda)
            } else {
                self.ssp_rk3_step(&u, dt, lambda)
            };
            let mut next = result.map_err(|e| wrap(step, u.time, e))?;
            let dt = if uniform_dt.is_some() { dt } else { next.time - u.time };
            next.time = match uniform_dt {
                Some((dt, n)) if step < n => t0 + step as f64 * dt,
                Some(_) => t_end,
                None if remaining - dt <= t_end * 1e-14 => t_end,
                None => next.time,
            };
            let rec = self.record(step, dt, &next);
            observe(&rec);
            records.push(rec);
            u = next;
        }
        Ok(RunResult { state: u, records, stats: self.stats, steps: step, max_lambda })
    }

    /// RK3 step from `u`, repeated with the faster wave speed and a smaller
    /// step whenever a stage outruns the speed the step was sized for. The
    /// final state's time says which step was taken.
    fn adaptive_rk3_step(
        &mut self,
        u: &DgState,
        mut dt: f64,
        mut lambda: f64,
        remaining: f64,
        max_lambda: &mut f64,
    ) -> Result<DgState> {
        for attempt in 0..MAX_STEP_RETRIES {
            match self.guarded_rk3_step(u, dt, lambda)? {
                Stage::Done(next) => {
                    if attempt == 0 {
                        self.speed_hint *= SPEED_HINT_DECAY;
                    }
                    return Ok(next);
                }
                Stage::TooFast(speed) => {
                    self.stats.step_retries += 1;
                    lambda = STAGE_SPEED_GROWTH * speed;
                    self.speed_hint = lambda;
                    *max_lambda = max_lambda.max(lambda);
                    dt = self.step_dt(lambda)?.min(remaining);
                }
            }
        }
        Err(CutDgError::InvalidParameter(format!(
            "wave speed kept growing within a step after {MAX_STEP_RETRIES} retries (last {lambda})"
        )))
    }

    /// Projection, post-processing and integration to `t_end`.
    pub fn integrate(&mut self, u0: impl Fn(f64, &mut [f64])) -> Result<RunResult> {
        let u = self.initialize(u0)?;
        self.integrate_from(u, |_| {})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryCondition;
    use crate::flux::{FluxFunction, FluxModel};
    use crate::mesh::{build_background_mesh, generate_interfaces, MeshComplex};
    use crate::operator::{assemble, OperatorConfig};
    use crate::reconstruction::{apply_reconstruction, ReconstructionMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn op(n: usize, p: usize, seed: u64, f: FluxFunction) -> SemiDiscreteOperator {
        let m = build_background_mesh(0.0, 2.0, n).unwrap();
        let set = generate_interfaces(&m, (0.75, 1.25), 0.1, seed).unwrap();
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        assemble(mc, p, FluxModel::uniform(f), BoundaryCondition::periodic(), OperatorConfig::default()).unwrap()
    }

    fn no_limiting() -> LimiterConfig {
        LimiterConfig { mode: ReconstructionMode::Off, ..LimiterConfig::default() }
    }

    #[test]
    fn cfl_law_values() {
        let dt = compute_dt(DtLaw::Cfl { safety: 1.0, exponent: 1.0 }, Integrator::SspRk3, 0.1, 0.2, 0, 2.0).unwrap();
        assert!((dt - 0.01).abs() < 1e-16);
        let dt = compute_dt(DtLaw::Cfl { safety: 1.0, exponent: 1.0 }, Integrator::SspMs3, 0.1, 0.2, 1, 1.0).unwrap();
        assert!((dt - 0.02 * 0.5 / 3.0).abs() < 1e-16);
        let dt =
            compute_dt(DtLaw::Fixed { coefficient: 1.0 / 24.0, exponent: 1.0 }, Integrator::SspMs3, 0.1, 0.2, 2, 1.0)
                .unwrap();
        assert!((dt - 0.1 / 24.0).abs() < 1e-16);
        assert!(compute_dt(DtLaw::default(), Integrator::SspRk3, 0.1, 0.2, 1, 0.0).is_err());
    }

    #[test]
    fn multistep_needs_warm_history() {
        let o = op(20, 1, 1, FluxFunction::Linear { speed: 1.0 });
        let mut s = Solver::new(&o, no_limiting(), TimeConfig::default()).unwrap();
        let h = MultistepHistory::new();
        assert_eq!(s.ssp_ms3_step(&h, 0.01).unwrap_err(), CutDgError::ColdHistory { have: 0, need: 4 });
    }

    #[test]
    fn rk3_matches_stability_polynomial() {
        let o = op(20, 2, 3, FluxFunction::Linear { speed: 1.0 });
        let mut s = Solver::new(&o, no_limiting(), TimeConfig::default()).unwrap();
        let u = o.l2_project_initial(|x, out| out[0] = (PI * x).sin()).unwrap();
        let dt = 1e-3;
        let next = s.ssp_rk3_step(&u, dt, 1.0).unwrap();
        let l1 = o.apply(&u, 1.0, 0.0).unwrap();
        let l2 = o.apply(&l1, 1.0, 0.0).unwrap();
        let l3 = o.apply(&l2, 1.0, 0.0).unwrap();
        let want = DgState::combine(&[(1.0, &u), (dt, &l1), (dt * dt / 2.0, &l2), (dt * dt * dt / 6.0, &l3)]);
        for (a, b) in next.coeffs.iter().zip(&want.coeffs) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    fn time_error(integrator: Integrator, coefficient: f64) -> f64 {
        let o = op(10, 2, 5, FluxFunction::Linear { speed: 1.0 });
        let run = |c: f64| {
            let cfg = TimeConfig {
                integrator,
                law: DtLaw::Fixed { coefficient: c, exponent: 1.0 },
                t_end: 0.4,
                ..TimeConfig::default()
            };
            let mut s = Solver::new(&o, no_limiting(), cfg).unwrap();
            s.integrate(|x, out| out[0] = (PI * x).sin()).unwrap().state
        };
        let coarse = run(coefficient);
        let fine = run(coefficient / 32.0);
        coarse.coeffs.iter().zip(&fine.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn third_order_in_time() {
        for integrator in [Integrator::SspRk3, Integrator::SspMs3] {
            let e1 = time_error(integrator, 0.02);
            let e2 = time_error(integrator, 0.01);
            let order = (e1 / e2).log2();
            assert!(order > 2.7 && order < 3.5, "{integrator:?}: order {order}");
        }
    }

    #[test]
    fn free_stream_preserved() {
        for p in 0..=3 {
            let o = op(20, p, 8, FluxFunction::Burgers);
            let cfg = TimeConfig { t_end: 100.0 * 0.01 * 0.2 * 0.9 / 0.6, ..TimeConfig::default() };
            let limits = LimiterConfig {
                mode: ReconstructionMode::All,
                bounds: Some(ScalarBounds { lower: 0.0, upper: 1.0 }),
                ..LimiterConfig::default()
            };
            let mut s = Solver::new(&o, limits, cfg).unwrap();
            let mut u = s.initialize(|_, out| out[0] = 0.6).unwrap();
            for _ in 0..100 {
                let next = s.ssp_rk3_step(&u, 1e-3, 0.6).unwrap();
                let drift = next.coeffs.iter().zip(&u.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(drift <= 1e-13, "p = {p}: {drift}");
                u = next;
            }
        }
    }

    #[test]
    fn p0_update_matches_monotone_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for seed in 0..20 {
            let o = op(20, 0, seed, FluxFunction::Burgers);
            let mesh = &o.mesh;
            let mut u = o.zero_state();
            u.coeffs.iter_mut().for_each(|c| *c = rng.random_range(-1.0..1.0));
            let u = apply_reconstruction(&u, mesh, &o.basis, ReconstructionMode::All, |_| true);
            let lambda = o.global_lambda(&u).unwrap();
            let dt =
                compute_dt(DtLaw::Cfl { safety: 1.0, exponent: 1.0 }, Integrator::SspRk3, mesh.h(), 0.2, 0, lambda)
                    .unwrap();
            let next = o.forward_euler_update(&u, dt, lambda).unwrap();
            let next = apply_reconstruction(&next, mesh, &o.basis, ReconstructionMode::All, |_| true);
            let f = |v: f64| 0.5 * v * v;
            let nm = mesh.macros.len();
            for (id, mac) in mesh.macros.iter().enumerate() {
                let b = u.element(mac.owner, 0)[0];
                let a = u.element(mesh.macros[(id + nm - 1) % nm].owner, 0)[0];
                let c = u.element(mesh.macros[(id + 1) % nm].owner, 0)[0];
                let r = dt / mac.length;
                let hval = (1.0 - lambda * r) * b + 0.5 * r * (lambda * c - f(c)) + 0.5 * r * (lambda * a + f(a));
                let got = next.element(mac.owner, 0)[0];
                assert!((got - hval).abs() < 1e-13, "{got} vs {hval}");
                assert!(got >= a.min(b).min(c) - 1e-15 && got <= a.max(b).max(c) + 1e-15);
            }
        }
    }

    #[test]
    fn oversized_steps_trip_the_monitor() {
        let m = build_background_mesh(0.0, 1.0, 100).unwrap();
        let set = generate_interfaces(&m, (0.375, 0.625), 0.1, 1).unwrap();
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        let o = assemble(
            mc,
            1,
            FluxModel::uniform(FluxFunction::Linear { speed: 1.0 }),
            BoundaryCondition::periodic(),
            OperatorConfig::default(),
        )
        .unwrap();
        let limits = LimiterConfig {
            mode: ReconstructionMode::All,
            bounds: Some(ScalarBounds { lower: 0.0, upper: 1.0 }),
            ..LimiterConfig::default()
        };
        let cfg = TimeConfig { law: DtLaw::Cfl { safety: 5.0, exponent: 1.0 }, t_end: 0.2, ..TimeConfig::default() };
        let mut s = Solver::new(&o, limits, cfg).unwrap();
        let err = s.integrate(|x, out| out[0] = if x > 0.1 && x < 0.5 { 1.0 } else { 0.0 }).unwrap_err();
        assert!(err.is_invariant_violation(), "{err}");
    }

    #[test]
    fn boundary_outflow_closes_the_mass_balance() {
        let p = crate::problems::discontinuous_flux_problem();
        for integrator in [Integrator::SspRk3, Integrator::SspMs3] {
            let o =
                assemble(p.build_mesh(40, 0.2, 1).unwrap(), 2, p.flux.clone(), p.bc.clone(), OperatorConfig::default())
                    .unwrap();
            let cfg = TimeConfig { integrator, t_end: 0.9, ..TimeConfig::default() };
            let mut s = Solver::new(&o, p.limiter_config(ReconstructionMode::All), cfg).unwrap();
            let run = s.integrate(|x, out| p.initial(x, o.mesh.h(), out)).unwrap();
            let m0 = run.records[0].mass[0];
            for r in &run.records {
                assert!((r.mass[0] + r.outflow[0] - m0).abs() < 1e-12, "{integrator:?} at t = {}", r.t);
            }
            // inflow 0.5 and outflow 2 on the whole interval
            assert!(run.records.last().unwrap().outflow[0] > 1.0);
        }
    }

    #[test]
    fn guarded_step_rejects_fast_stages() {
        let o = op(20, 1, 3, FluxFunction::Linear { speed: 1.0 });
        let mut s = Solver::new(&o, no_limiting(), TimeConfig::default()).unwrap();
        let u = o.l2_project_initial(|x, out| out[0] = (PI * x).sin()).unwrap();
        assert_eq!(s.guarded_rk3_step(&u, 1e-3, 0.5).unwrap(), Stage::TooFast(1.0));
        assert!(matches!(s.guarded_rk3_step(&u, 1e-3, 1.0).unwrap(), Stage::Done(_)));
    }
}
