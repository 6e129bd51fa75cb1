//! Physical fluxes, wave speeds and the Lax–Friedrichs numerical flux.

use serde::{Deserialize, Serialize};

use crate::error::{CutDgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxFunction {
    /// `f(u) = speed * u`
    Linear { speed: f64 },
    /// `f(u) = u^2 / 2`
    Burgers,
    /// Compressible Euler in conserved variables `(rho, m, E)`.
    Euler { gamma: f64 },
}

impl FluxFunction {
    pub fn nvars(&self) -> usize {
        match self {
            Self::Euler { .. } => 3,
            _ => 1,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Linear { .. })
    }

    pub fn eval(&self, u: &[f64], out: &mut [f64]) {
        match *self {
            Self::Linear { speed } => out[0] = speed * u[0],
            Self::Burgers => out[0] = 0.5 * u[0] * u[0],
            Self::Euler { gamma } => {
                let (rho, m, e) = (u[0], u[1], u[2]);
                let v = m / rho;
                let p = (gamma - 1.0) * (e - 0.5 * m * v);
                out[0] = m;
                out[1] = m * v + p;
                out[2] = (e + p) * v;
            }
        }
    }

    /// `f'(u)` for scalar fluxes.
    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Self::Linear { speed } => speed,
            Self::Burgers => u,
            Self::Euler { .. } => f64::NAN,
        }
    }

    /// Maximal absolute wave speed at `u`; `None` for an inadmissible Euler state.
    pub fn max_speed(&self, u: &[f64]) -> Option<f64> {
        match *self {
            Self::Linear { speed } => Some(speed.abs()),
            Self::Burgers => Some(u[0].abs()),
            Self::Euler { gamma } => {
                let rho = u[0];
                let p = pressure(u, gamma);
                if rho > 0.0 && p > 0.0 && rho.is_finite() && p.is_finite() {
                    Some((u[1] / rho).abs() + (gamma * p / rho).sqrt())
                } else {
                    None
                }
            }
        }
    }
}

/// `p = (gamma - 1) (E - m^2 / (2 rho))`; returns `-inf` for non-positive density.
#[inline]
pub fn pressure(u: &[f64], gamma: f64) -> f64 {
    if u[0] <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
}

/// Pressure with an explicit error for zero density.
pub fn checked_pressure(u: &[f64], gamma: f64) -> Result<f64> {
    if u[0] == 0.0 {
        Err(CutDgError::ZeroDensity)
    } else {
        Ok((gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]))
    }
}

/// Conserved variables from `(rho, velocity, pressure)`.
pub fn conserved(rho: f64, vel: f64, p: f64, gamma: f64) -> [f64; 3] {
    [rho, rho * vel, p / (gamma - 1.0) + 0.5 * rho * vel * vel]
}

/// `f̂ = (f(uL) + f(uR)) / 2 - lambda (uR - uL) / 2`, componentwise.
pub fn lax_friedrichs_flux(ul: &[f64], ur: &[f64], lambda: f64, f: &FluxFunction, out: &mut [f64]) {
    let n = f.nvars();
    let mut fl = [0.0; 3];
    let mut fr = [0.0; 3];
    f.eval(ul, &mut fl[..n]);
    f.eval(ur, &mut fr[..n]);
    for c in 0..n {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * lambda * (ur[c] - ul[c]);
    }
}

/// Dissipation speed of the Lax–Friedrichs flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dissipation {
    /// One `lambda` for the whole domain.
    #[default]
    Global,
    /// `max(|f'(uL)|, |f'(uR)|)` per face.
    Local,
}

/// Flux function per subdomain: subdomain `i` uses the last piece whose
/// starting subdomain is `<= i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxModel {
    pub pieces: Vec<(usize, FluxFunction)>,
}

impl FluxModel {
    pub fn uniform(f: FluxFunction) -> Self {
        Self { pieces: vec![(0, f)] }
    }

    /// `left` on subdomains `< first_right`, `right` from there on.
    pub fn split(left: FluxFunction, right: FluxFunction, first_right: usize) -> Self {
        Self { pieces: vec![(0, left), (first_right, right)] }
    }

    pub fn for_subdomain(&self, i: usize) -> &FluxFunction {
        &self.pieces.iter().rev().find(|(s, _)| *s <= i).unwrap_or(&self.pieces[0]).1
    }

    pub fn nvars(&self) -> usize {
        self.pieces[0].1.nvars()
    }

    pub fn is_euler(&self) -> bool {
        matches!(self.pieces[0].1, FluxFunction::Euler { .. })
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.pieces[0].1 {
            FluxFunction::Euler { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.pieces.iter().all(|(_, f)| f.is_linear())
    }

    /// Numerical flux across a face between subdomains `il` and `ir`.
    ///
    /// Faces with the same flux on both sides use Lax–Friedrichs, with the
    /// global `lambda` or the local face speed. Where the
    /// flux changes, the upwind side's flux is taken when both one-sided
    /// characteristic speeds agree in sign, and a Lax–Friedrichs average of
    /// the two fluxes otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn numerical_flux(
        &self,
        il: usize,
        ir: usize,
        ul: &[f64],
        ur: &[f64],
        lambda: f64,
        dissipation: Dissipation,
        out: &mut [f64],
    ) {
        let fl = self.for_subdomain(il);
        let fr = self.for_subdomain(ir);
        if fl == fr {
            let lambda = match dissipation {
                Dissipation::Global => lambda,
                Dissipation::Local => match (fl.max_speed(ul), fl.max_speed(ur)) {
                    (Some(a), Some(b)) => a.max(b),
                    _ => lambda,
                },
            };
            lax_friedrichs_flux(ul, ur, lambda, fl, out);
            return;
        }
        let (sl, sr) = (fl.derivative(ul[0]), fr.derivative(ur[0]));
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        fl.eval(ul, &mut a);
        fr.eval(ur, &mut b);
        if sl >= 0.0 && sr >= 0.0 {
            out[0] = a[0];
        } else if sl <= 0.0 && sr <= 0.0 {
            out[0] = b[0];
        } else {
            out[0] = 0.5 * (a[0] + b[0]) - 0.5 * lambda * (ur[0] - ul[0]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_lf_value() {
        let mut out = [0.0];
        lax_friedrichs_flux(&[1.0], &[0.0], 1.0, &FluxFunction::Burgers, &mut out);
        assert!((out[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn local_speed_at_faces() {
        let m = FluxModel::uniform(FluxFunction::Burgers);
        let mut out = [0.0];
        m.numerical_flux(0, 0, &[0.5], &[-0.25], 1.0, Dissipation::Local, &mut out);
        // 0.5 (0.125 + 0.03125) + 0.25 * 0.75
        assert!((out[0] - 0.265625f64).abs() < 1e-15);
        m.numerical_flux(0, 0, &[0.5], &[-0.25], 1.0, Dissipation::Global, &mut out);
        assert!((out[0] - 0.453125f64).abs() < 1e-15);
    }

    #[test]
    fn consistency() {
        let f = FluxFunction::Euler { gamma: 1.4 };
        let z = [1.0, 0.0, 2.5];
        let mut out = [0.0; 3];
        lax_friedrichs_flux(&z, &z, 3.0, &f, &mut out);
        assert!(out.iter().zip([0.0, 1.0, 0.0]).all(|(a, b)| (a - b).abs() < 1e-15));
        let mut out = [0.0];
        lax_friedrichs_flux(&[0.3], &[0.3], 2.0, &FluxFunction::Burgers, &mut out);
        assert!((out[0] - 0.045).abs() < 1e-16);
    }

    #[test]
    fn sod_wave_speed() {
        let f = FluxFunction::Euler { gamma: 1.4 };
        let l = conserved(1.0, 0.0, 1.0, 1.4);
        let r = conserved(0.125, 0.0, 0.1, 1.4);
        let lam = f.max_speed(&l).unwrap().max(f.max_speed(&r).unwrap());
        assert!((lam - 1.4f64.sqrt()).abs() < 1e-14);
        assert!(f.max_speed(&[1.0, 0.0, -1.0]).is_none());
    }

    #[test]
    fn pressure_helpers() {
        assert!((pressure(&[1.0, 2.0, 5.0], 1.4) - 1.2).abs() < 1e-14);
        assert_eq!(checked_pressure(&[0.0, 0.0, 1.0], 1.4), Err(CutDgError::ZeroDensity));
    }

    #[test]
    fn split_model_upwinds() {
        let m = FluxModel::split(FluxFunction::Linear { speed: 1.0 }, FluxFunction::Burgers, 1);
        assert_eq!(*m.for_subdomain(0), FluxFunction::Linear { speed: 1.0 });
        assert_eq!(*m.for_subdomain(3), FluxFunction::Burgers);
        let mut out = [0.0];
        m.numerical_flux(0, 1, &[2.0], &[0.5], 2.0, Dissipation::Global, &mut out);
        assert_eq!(out[0], 2.0);
        m.numerical_flux(1, 1, &[2.0], &[0.5], 2.0, Dissipation::Global, &mut out);
        assert!((out[0] - (0.5 * (2.0 + 0.125) + 1.5)).abs() < 1e-15);
    }
}
