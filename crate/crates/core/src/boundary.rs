//! Boundary conditions imposed weakly through ghost states.

use serde::{Deserialize, Serialize};

use crate::error::{CutDgError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryKind {
    Periodic,
    /// Zeroth-order extrapolation of the interior trace.
    Outflow,
    /// Prescribed state `before` up to `t_switch`, `after` later.
    Inflow {
        before: Vec<f64>,
        after: Vec<f64>,
        t_switch: f64,
    },
    /// Reflecting wall for the Euler equations: `(rho, -m, E)`.
    SolidWall,
}

impl BoundaryKind {
    pub fn constant_inflow(state: Vec<f64>) -> Self {
        Self::Inflow { before: state.clone(), after: state, t_switch: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl BoundaryCondition {
    pub fn new(left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        let bc = Self { left, right };
        bc.validate()?;
        Ok(bc)
    }

    pub fn periodic() -> Self {
        Self { left: BoundaryKind::Periodic, right: BoundaryKind::Periodic }
    }

    pub fn outflow() -> Self {
        Self { left: BoundaryKind::Outflow, right: BoundaryKind::Outflow }
    }

    pub fn walls() -> Self {
        Self { left: BoundaryKind::SolidWall, right: BoundaryKind::SolidWall }
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        let lp = self.left == BoundaryKind::Periodic;
        let rp = self.right == BoundaryKind::Periodic;
        if lp != rp {
            return Err(CutDgError::InvalidParameter("periodic boundaries must be used on both sides".into()));
        }
        Ok(())
    }

    pub fn kind(&self, side: Side) -> &BoundaryKind {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Exterior state at one end of the domain. `opposite` is the interior
    /// trace at the other end, used for periodic boundaries.
    pub fn ghost_state(&self, side: Side, interior: &[f64], opposite: &[f64], t: f64, out: &mut [f64]) {
        ghost_state(self.kind(side), interior, opposite, t, out)
    }
}

pub fn ghost_state(kind: &BoundaryKind, interior: &[f64], opposite: &[f64], t: f64, out: &mut [f64]) {
    let n = out.len();
    match kind {
        BoundaryKind::Periodic => out.copy_from_slice(&opposite[..n]),
        BoundaryKind::Outflow => out.copy_from_slice(&interior[..n]),
        BoundaryKind::Inflow { before, after, t_switch } => {
            let g = if t <= *t_switch { before } else { after };
            out.copy_from_slice(&g[..n]);
        }
        BoundaryKind::SolidWall => {
            out.copy_from_slice(&interior[..n]);
            if n == 3 {
                out[1] = -interior[1];
            } else {
                // scalar analogue: odd reflection
                out[0] = -interior[0];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_mirrors_momentum() {
        let mut g = [0.0; 3];
        ghost_state(&BoundaryKind::SolidWall, &[1.0, 2.0, 5.0], &[0.0; 3], 0.0, &mut g);
        assert_eq!(g, [1.0, -2.0, 5.0]);
    }

    #[test]
    fn outflow_copies() {
        let mut g = [0.0];
        ghost_state(&BoundaryKind::Outflow, &[0.7], &[9.0], 0.0, &mut g);
        assert_eq!(g, [0.7]);
    }

    #[test]
    fn inflow_switches() {
        let k = BoundaryKind::Inflow { before: vec![1.0], after: vec![0.0], t_switch: 0.5 };
        let mut g = [0.0];
        ghost_state(&k, &[0.3], &[0.3], 0.5, &mut g);
        assert_eq!(g, [1.0]);
        ghost_state(&k, &[0.3], &[0.3], 0.5 + 1e-12, &mut g);
        assert_eq!(g, [0.0]);
    }

    #[test]
    fn periodic_pairs_only() {
        assert!(BoundaryCondition::new(BoundaryKind::Periodic, BoundaryKind::Outflow).is_err());
        let bc = BoundaryCondition::periodic();
        let mut g = [0.0];
        bc.ghost_state(Side::Left, &[1.0], &[4.0], 0.0, &mut g);
        assert_eq!(g, [4.0]);
    }
}
