//! Exact solution of the Riemann problem for the ideal-gas Euler equations,
//! including the case where the two rarefactions open a vacuum.

use crate::error::{CutDgError, Result};

/// Primitive variables `(rho, u, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    pub fn conserved(&self, gamma: f64) -> [f64; 3] {
        crate::flux::conserved(self.rho, self.u, self.p, gamma)
    }
}

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
    /// The rarefactions separate and leave a vacuum between them.
    pub vacuum: bool,
}

impl RiemannSolution {
    pub fn solve(left: Primitive, right: Primitive, gamma: f64) -> Result<Self> {
        for s in [left, right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(CutDgError::InvalidParameter(format!(
                    "Riemann data must have positive density and pressure, got {s:?}"
                )));
            }
        }
        let (cl, cr) = (left.sound_speed(gamma), right.sound_speed(gamma));
        let du = right.u - left.u;
        let critical = 2.0 * (cl + cr) / (gamma - 1.0);
        if du >= critical * (1.0 - TOL) {
            return Ok(Self { left, right, gamma, p_star: 0.0, u_star: f64::NAN, vacuum: true });
        }

        let f = |p: f64| {
            let (fl, dl) = wave_function(p, &left, gamma);
            let (fr, dr) = wave_function(p, &right, gamma);
            (fl + fr + du, dl + dr)
        };
        // f is increasing and f(0) < 0; find an upper bracket
        let (mut lo, mut hi) = (0.0, left.p.max(right.p).max(TOL));
        while f(hi).0 < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(CutDgError::NonFinite("Riemann pressure bracket"));
            }
        }
        // two-rarefaction guess, kept inside the bracket
        let z = (gamma - 1.0) / (2.0 * gamma);
        let guess = ((cl + cr - 0.5 * (gamma - 1.0) * du) / (cl / left.p.powf(z) + cr / right.p.powf(z))).powf(1.0 / z);
        let mut p = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let (val, der) = f(p);
            if val < 0.0 {
                lo = p;
            } else {
                hi = p;
            }
            let mut next = p - val / der;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let change = (next - p).abs() / (0.5 * (next + p));
            p = next;
            if change < TOL || hi - lo <= TOL * hi {
                break;
            }
        }
        let (fl, _) = wave_function(p, &left, gamma);
        let (fr, _) = wave_function(p, &right, gamma);
        let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
        Ok(Self { left, right, gamma, p_star: p, u_star, vacuum: false })
    }

    /// The self-similar solution at `s = x / t`.
    pub fn sample(&self, s: f64) -> Primitive {
        let g = self.gamma;
        let (l, r) = (self.left, self.right);
        let (cl, cr) = (l.sound_speed(g), r.sound_speed(g));
        if self.vacuum {
            let tail_l = l.u + 2.0 * cl / (g - 1.0);
            let tail_r = r.u - 2.0 * cr / (g - 1.0);
            return if s <= l.u - cl {
                l
            } else if s <= tail_l {
                left_fan(&l, cl, s, g)
            } else if s < tail_r {
                Primitive::new(0.0, s, 0.0)
            } else if s < r.u + cr {
                right_fan(&r, cr, s, g)
            } else {
                r
            };
        }
        let (ps, us) = (self.p_star, self.u_star);
        let g6 = (g - 1.0) / (g + 1.0);
        let z = (g - 1.0) / (2.0 * g);
        if s <= us {
            if ps > l.p {
                let q = ps / l.p;
                let shock = l.u - cl * ((g + 1.0) / (2.0 * g) * q + z).sqrt();
                if s <= shock {
                    l
                } else {
                    Primitive::new(l.rho * (q + g6) / (g6 * q + 1.0), us, ps)
                }
            } else if s <= l.u - cl {
                l
            } else {
                let c_star = cl * (ps / l.p).powf(z);
                if s > us - c_star {
                    Primitive::new(l.rho * (ps / l.p).powf(1.0 / g), us, ps)
                } else {
                    left_fan(&l, cl, s, g)
                }
            }
        } else if ps > r.p {
            let q = ps / r.p;
            let shock = r.u + cr * ((g + 1.0) / (2.0 * g) * q + z).sqrt();
            if s >= shock {
                r
            } else {
                Primitive::new(r.rho * (q + g6) / (g6 * q + 1.0), us, ps)
            }
        } else if s >= r.u + cr {
            r
        } else {
            let c_star = cr * (ps / r.p).powf(z);
            if s <= us + c_star {
                Primitive::new(r.rho * (ps / r.p).powf(1.0 / g), us, ps)
            } else {
                right_fan(&r, cr, s, g)
            }
        }
    }

    /// State at `(x, t)` for a discontinuity initially at `x0`.
    pub fn at(&self, x: f64, t: f64, x0: f64) -> Primitive {
        if t <= 0.0 {
            return if x <= x0 { self.left } else { self.right };
        }
        self.sample((x - x0) / t)
    }
}

/// Shock or rarefaction branch of the pressure function and its derivative.
fn wave_function(p: f64, k: &Primitive, g: f64) -> (f64, f64) {
    if p > k.p {
        let a = 2.0 / ((g + 1.0) * k.rho);
        let b = (g - 1.0) / (g + 1.0) * k.p;
        let q = (a / (p + b)).sqrt();
        ((p - k.p) * q, q * (1.0 - 0.5 * (p - k.p) / (b + p)))
    } else {
        let c = k.sound_speed(g);
        let z = (g - 1.0) / (2.0 * g);
        let ratio = (p / k.p).max(0.0);
        let val = 2.0 * c / (g - 1.0) * (ratio.powf(z) - 1.0);
        let der = if p > 0.0 { ratio.powf(-(g + 1.0) / (2.0 * g)) / (k.rho * c) } else { f64::INFINITY };
        (val, der)
    }
}

fn left_fan(l: &Primitive, cl: f64, s: f64, g: f64) -> Primitive {
    let c = (2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (l.u - s))).max(0.0);
    let u = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * l.u + s);
    fan_state(l, cl, c, u, g)
}

fn right_fan(r: &Primitive, cr: f64, s: f64, g: f64) -> Primitive {
    let c = (2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (r.u - s))).max(0.0);
    let u = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * r.u + s);
    fan_state(r, cr, c, u, g)
}

fn fan_state(k: &Primitive, ck: f64, c: f64, u: f64, g: f64) -> Primitive {
    let ratio = c / ck;
    Primitive::new(k.rho * ratio.powf(2.0 / (g - 1.0)), u, k.p * ratio.powf(2.0 * g / (g - 1.0)))
}
