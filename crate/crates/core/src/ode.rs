//! Adaptive Dormand–Prince 5(4) integration of autonomous scalar ODEs.
//!
//! Only autonomous right-hand sides occur here, so the stage abscissae drop out.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Local error tolerance (mixed absolute/relative against `scale`).
    pub tol: f64,
    pub scale: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

/// One accepted point of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct OdePoint {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

/// Integrates `y' = f(y)` from `(x0, y0)` in the direction of `sign(h_init)`
/// until `stop(y)` returns true. Returns every accepted point including the
/// initial one.
pub fn integrate_until<F, S>(f: F, x0: f64, y0: f64, opts: &OdeOptions, stop: S) -> Result<Vec<OdePoint>>
where
    F: Fn(f64) -> f64,
    S: Fn(f64) -> bool,
{
    let dir = opts.h_init.signum();
    let mut h = opts.h_init.abs().min(opts.h_max);
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(y);
    let mut out = vec![OdePoint { x, y, dy: k1 }];
    let tol = opts.tol * opts.scale;

    for _ in 0..opts.max_steps {
        if stop(y) {
            return Ok(out);
        }
        let hs = dir * h;
        let k2 = f(y + hs * A21 * k1);
        let k3 = f(y + hs * (A31 * k1 + A32 * k2));
        let k4 = f(y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(y_new);
        let err = (hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
        if !y_new.is_finite() || !err.is_finite() {
            return Err(Error::Integration(format!("non-finite state at x = {x}")));
        }
        if err <= tol {
            x += hs;
            y = y_new;
            k1 = k7;
            out.push(OdePoint { x, y, dy: k1 });
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(opts.h_max);
        if h < opts.h_min {
            return Err(Error::Integration(format!(
                "step size underflow ({h:.3e}) at x = {x}, y = {y}"
            )));
        }
    }
    Err(Error::Integration(format!(
        "no convergence after {} steps (x = {x}, y = {y})",
        opts.max_steps
    )))
}
