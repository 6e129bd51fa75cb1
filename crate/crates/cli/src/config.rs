//! Run configuration, read from TOML with one table per concern.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cutdg_core::operator::PenaltyWeights;
use cutdg_core::{Dissipation, Integrator, LambdaRefresh, ReconstructionMode};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub mesh: MeshSection,
    pub scheme: SchemeSection,
    pub time: TimeSection,
    pub limiter: LimiterSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub name: String,
    /// Overrides the problem's final time.
    pub t_end: Option<f64>,
    /// Compute the fine uncut reference run for self-referenced problems.
    pub self_reference: bool,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { name: "advection_smooth".into(), t_end: None, self_reference: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub n: usize,
    /// Cap on the random cut fractions (or the boundary cut fraction).
    pub alpha: Option<f64>,
    pub cut_region: Option<(f64, f64)>,
    /// Disable all interfaces.
    pub uncut: bool,
    pub delta: f64,
    pub seed: u64,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { n: 80, alpha: None, cut_region: None, uncut: false, delta: 0.2, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub degree: usize,
    pub gamma0: f64,
    pub gamma1: f64,
    pub penalty_weights: PenaltyWeights,
    /// Global or local Lax–Friedrichs speed.
    pub dissipation: Dissipation,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            degree: 2,
            gamma0: 0.25,
            gamma1: 0.75,
            penalty_weights: PenaltyWeights::Standard,
            dissipation: Dissipation::Global,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub integrator: Integrator,
    /// Safety factor `C` of the CFL law.
    pub cfl: f64,
    /// `dt` scales like `h^exponent`.
    pub exponent: f64,
    /// When set, `dt = dt_coefficient * h^exponent / lambda` replaces the CFL law.
    pub dt_coefficient: Option<f64>,
    pub lambda_refresh: LambdaRefresh,
    pub monitor: bool,
    pub max_steps: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            integrator: Integrator::SspRk3,
            cfl: 0.9,
            exponent: 1.0,
            dt_coefficient: None,
            lambda_refresh: LambdaRefresh::Step,
            monitor: true,
            max_steps: 5_000_000,
        }
    }
}

/// TVB setting: the problem's default, off, or an explicit constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TvbSetting {
    Constant(f64),
    Keyword(TvbKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvbKeyword {
    Default,
    Off,
}

impl Default for TvbSetting {
    fn default() -> Self {
        Self::Keyword(TvbKeyword::Default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimiterSection {
    pub reconstruction: ReconstructionMode,
    /// Maximum-principle limiter (scalar) or positivity limiter (Euler).
    pub bound_preserving: bool,
    pub tvb: TvbSetting,
    /// Overrides the positivity floor.
    pub epsilon: Option<f64>,
}

impl Default for LimiterSection {
    fn default() -> Self {
        Self {
            reconstruction: ReconstructionMode::All,
            bound_preserving: true,
            tvb: TvbSetting::default(),
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write the per-step diagnostics file.
    pub diagnostics: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("output"), diagnostics: true }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |key: &str, msg: String| Err(HarnessError::Config(format!("{key}: {msg}")));
        if cutdg_core::problem_by_name(&self.problem.name).is_err() {
            return bad(
                "problem.name",
                format!(
                    "unknown problem `{}` (known: {})",
                    self.problem.name,
                    cutdg_core::problems::PROBLEM_NAMES.join(", ")
                ),
            );
        }
        if let Some(t) = self.problem.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return bad("problem.t_end", format!("must be positive, got {t}"));
            }
        }
        if self.mesh.n < 4 {
            return bad("mesh.n", format!("need at least 4 elements, got {}", self.mesh.n));
        }
        if let Some(a) = self.mesh.alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad("mesh.alpha", format!("must lie in (0, 1), got {a}"));
            }
        }
        if let Some((a, b)) = self.mesh.cut_region {
            if !(a < b) {
                return bad("mesh.cut_region", format!("empty region [{a}, {b}]"));
            }
        }
        if !(self.mesh.delta > 0.0 && self.mesh.delta <= 1.0) {
            return bad("mesh.delta", format!("must lie in (0, 1], got {}", self.mesh.delta));
        }
        if self.scheme.degree > 3 {
            return bad("scheme.degree", format!("supported degrees are 0 to 3, got {}", self.scheme.degree));
        }
        if !(self.scheme.gamma0 > 0.0 && self.scheme.gamma1 > 0.0) {
            return bad("scheme.gamma0/gamma1", "penalty parameters must be positive".into());
        }
        if !(self.time.cfl > 0.0 && self.time.cfl <= 1.0) {
            return bad("time.cfl", format!("must lie in (0, 1], got {}", self.time.cfl));
        }
        if !(self.time.exponent >= 1.0 && self.time.exponent <= 2.0) {
            return bad("time.exponent", format!("must lie in [1, 2], got {}", self.time.exponent));
        }
        if let Some(c) = self.time.dt_coefficient {
            if !(c > 0.0 && c.is_finite()) {
                return bad("time.dt_coefficient", format!("must be positive, got {c}"));
            }
        }
        if let TvbSetting::Constant(m) = self.limiter.tvb {
            if !(m >= 0.0 && m.is_finite()) {
                return bad("limiter.tvb", format!("must be nonnegative, got {m}"));
            }
        }
        if let Some(e) = self.limiter.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad("limiter.epsilon", format!("must lie in (0, 1), got {e}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.problem.name = "sod".into();
        cfg.problem.t_end = Some(0.1 + 0.2);
        cfg.mesh.cut_region = Some((0.375, 0.625));
        cfg.mesh.alpha = Some(1.0 / 3.0);
        cfg.time.integrator = Integrator::SspMs3;
        cfg.time.dt_coefficient = Some(1.0 / 24.0);
        cfg.limiter.tvb = TvbSetting::Constant(0.1);
        cfg.scheme.dissipation = Dissipation::Local;
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        cfg.limiter.tvb = TvbSetting::Keyword(TvbKeyword::Off);
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("[mesh]\nn = 40\ndelt = 0.3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("delt") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn ranges_are_checked() {
        let err = RunConfig::from_toml("[time]\ncfl = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("time.cfl"));
        let err = RunConfig::from_toml("[problem]\nname = \"kelvin\"\n").unwrap_err();
        assert!(err.to_string().contains("problem.name"));
        let ok = RunConfig::from_toml("[limiter]\ntvb = \"off\"\nreconstruction = \"on_violation\"\n").unwrap();
        assert_eq!(ok.limiter.tvb, TvbSetting::Keyword(TvbKeyword::Off));
    }
}
