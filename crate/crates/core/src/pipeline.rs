//! The post-processing stage applied after every forward Euler update:
//! reconstruction, then TVB limiting, then bound or positivity limiting.

use serde::{Deserialize, Serialize};

use crate::error::{CutDgError, Result};
use crate::flux::pressure;
use crate::limiters::{
    apply_tvb, euler_positivity_limiter_with_margin, euler_violation, scalar_bound_limiter, scalar_violation,
    scale_around_mean, CheckPointSet, PositivityParams, ScalarBounds,
};
use crate::operator::SemiDiscreteOperator;
use crate::reconstruction::{build_units, scatter_units, ReconstructionMode, TransferOps};
use crate::state::DgState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimiterConfig {
    pub mode: ReconstructionMode,
    /// Maximum-principle limiting for scalar problems.
    pub bounds: Option<ScalarBounds>,
    /// Positivity limiting for the Euler equations.
    pub positivity: Option<PositivityParams>,
    /// TVB constant; `None` disables the TVB limiter.
    pub tvb: Option<f64>,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self { mode: ReconstructionMode::All, bounds: None, positivity: None, tvb: None }
    }
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub applications: usize,
    pub reconstructed_macros: usize,
    pub bound_limited: usize,
    pub positivity_limited: usize,
    pub tvb_limited: usize,
    pub reduced_epsilon: usize,
    /// Positivity limiter re-runs with a larger margin.
    pub positivity_retries: usize,
    /// Time steps redone because a stage outran the wave speed.
    pub step_retries: usize,
}

const MAX_MARGIN_RETRIES: usize = 8;

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: LimiterConfig,
    transfer: TransferOps,
    checks: CheckPointSet,
}

impl Pipeline {
    pub fn new(op: &SemiDiscreteOperator, config: LimiterConfig) -> Result<Self> {
        if config.positivity.is_some() && !op.flux.is_euler() {
            return Err(CutDgError::InvalidParameter("positivity limiting requires the Euler flux".into()));
        }
        if config.bounds.is_some() && op.flux.is_euler() {
            return Err(CutDgError::InvalidParameter("bound limiting applies to scalar problems".into()));
        }
        if op.degree() > 3 && (config.bounds.is_some() || config.positivity.is_some()) {
            log::warn!("limiters use sampled extrema above degree 3");
        }
        Ok(Self { config, transfer: TransferOps::new(&op.basis), checks: CheckPointSet::new(op.degree()) })
    }

    /// Applies the stage to `state` in place.
    pub fn apply(&self, op: &SemiDiscreteOperator, state: &mut DgState, stats: &mut PipelineStats) -> Result<()> {
        let cfg = &self.config;
        stats.applications += 1;
        if cfg.mode == ReconstructionMode::Off && cfg.bounds.is_none() && cfg.positivity.is_none() && cfg.tvb.is_none()
        {
            return Ok(());
        }
        let mesh = &op.mesh;
        let basis = &op.basis;
        let flagged = |id: usize| {
            let mac = &mesh.macros[id];
            if mac.len() == 1 {
                return false;
            }
            mac.members.clone().any(|a| {
                if let Some(b) = cfg.bounds {
                    scalar_violation(state, mesh, basis, a, b)
                } else if let Some(p) = cfg.positivity {
                    euler_violation(state, basis, &self.checks.element_points(mesh, a), a, p)
                } else {
                    false
                }
            })
        };
        let mut units = build_units(state, mesh, basis, &self.transfer, cfg.mode, flagged);
        stats.reconstructed_macros += units.iter().filter(|u| u.members.len() > 1).count();

        if let Some(m_tvb) = cfg.tvb {
            stats.tvb_limited += apply_tvb(&mut units, basis, &op.bc, m_tvb, state.time);
        }
        if let Some(b) = cfg.bounds {
            for u in units.iter_mut() {
                if scalar_bound_limiter(u, basis, b)? < 1.0 {
                    stats.bound_limited += 1;
                }
            }
        }
        if let Some(p) = cfg.positivity {
            for u in units.iter_mut() {
                let pts = self.checks.points(u, mesh);
                let original = u.clone();
                let mut extra = [0.0; 2];
                let mut out = euler_positivity_limiter_with_margin(u, basis, &pts, p, extra)?;
                // near vacuum the member polynomials can miss eps by round-off
                // after the transfer; aim higher until they do not
                for _ in 0..MAX_MARGIN_RETRIES {
                    let deficit = self.member_deficit(u, mesh, basis, p);
                    if deficit == [0.0; 2] {
                        break;
                    }
                    stats.positivity_retries += 1;
                    for k in 0..2 {
                        extra[k] = (2.0 * extra[k]).max(4.0 * deficit[k]);
                    }
                    *u = original.clone();
                    out = euler_positivity_limiter_with_margin(u, basis, &pts, p, extra)?;
                }
                // last resort: contract towards the mean, which is admissible
                // and reproduced exactly by every member
                let mean = [u.mean(basis, 0), u.mean(basis, 1), u.mean(basis, 2)];
                let mut halvings = 0;
                while self.member_deficit(u, mesh, basis, p) != [0.0; 2] && halvings < 64 {
                    for (v, &ubar) in mean.iter().enumerate() {
                        scale_around_mean(u, v, ubar, 0.5);
                    }
                    out.theta2 *= 0.5;
                    halvings += 1;
                }
                if halvings == 64 {
                    for (v, &ubar) in mean.iter().enumerate() {
                        scale_around_mean(u, v, ubar, 0.0);
                    }
                }
                if out.theta1 < 1.0 || out.theta2 < 1.0 {
                    stats.positivity_limited += 1;
                }
                if out.reduced_epsilon {
                    stats.reduced_epsilon += 1;
                }
            }
        }
        scatter_units(&units, mesh, &self.transfer, state);
        state.check_finite("limiting")
    }

    /// How far the members of `unit`, after the transfer to their own cells,
    /// fall below the admissible set at their check points: `[density, pressure]`.
    fn member_deficit(
        &self,
        unit: &crate::reconstruction::UnitPolynomial,
        mesh: &crate::mesh::MeshComplex,
        basis: &crate::basis::PolyBasis,
        p: PositivityParams,
    ) -> [f64; 2] {
        let m = basis.degree() + 1;
        let mean = [unit.mean(basis, 0), unit.mean(basis, 1), unit.mean(basis, 2)];
        let eps = p.epsilon.min(mean[0]).min(pressure(&mean, p.gamma));
        let mut coeffs = vec![0.0; 3 * m];
        let mut deficit = [0.0f64; 2];
        for a in unit.members.clone() {
            let d = unit.cell as isize - mesh.elements[a].cell as isize;
            coeffs.iter_mut().for_each(|c| *c = 0.0);
            for v in 0..3 {
                self.transfer.transfer_add(d, &unit.coeffs[v * m..(v + 1) * m], 1.0, &mut coeffs[v * m..(v + 1) * m]);
            }
            for xi in self.checks.element_points(mesh, a) {
                let q =
                    [basis.eval(&coeffs[..m], xi), basis.eval(&coeffs[m..2 * m], xi), basis.eval(&coeffs[2 * m..], xi)];
                deficit[0] = deficit[0].max(eps - q[0]);
                deficit[1] = deficit[1].max(eps - pressure(&q, p.gamma));
            }
        }
        deficit
    }
}
