//! Viscous 2-shock and boundary-layer profiles.
//!
//! The 2-shock profile solves the autonomous ODE `s mu V'/V = h(V)` with
//! `h(V) = -s^2 (V - v_-) - (p(V) - p(v_-))`. It is anchored at
//! `V(0) = (v_- + v_+)/2` and integrated outward in both directions until it
//! sits within `tail_tol * delta` of the end states; beyond that the
//! linearised exponential tails take over.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{self, p_raw, EndState, FlowRegion, GasParams};
use crate::ode::{integrate_until, OdeOptions};
use crate::quadrature::gauss3;

/// Shock strengths below this are rejected.
pub const MIN_STRENGTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub ode_tol: f64,
    /// Truncation threshold relative to the strength.
    pub tail_tol: f64,
    /// Largest sample spacing in units of the slower decay length `1/c`.
    pub max_step_decay_lengths: f64,
    pub max_steps: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            tail_tol: 1e-8,
            max_step_decay_lengths: 0.02,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub xi: f64,
    pub v: f64,
    pub u: f64,
}

/// `h(V) = -s^2 (V - v_ref) - (p(V) - p(v_ref))`.
pub fn h_function(v: f64, v_ref: f64, s: f64, g: &GasParams) -> Result<f64> {
    if !(v > 0.0) || !(v_ref > 0.0) {
        return Err(Error::domain(format!(
            "h needs positive volumes, got V = {v}, v_ref = {v_ref}"
        )));
    }
    Ok(-s * s * (v - v_ref) - (p_raw(v, g.gamma) - p_raw(v_ref, g.gamma)))
}

/// `dV/dxi = V h(V) / (s mu)` at an interior point of the profile.
pub fn profile_ode_rhs(v: f64, v_minus: f64, v_plus: f64, s: f64, g: &GasParams) -> Result<f64> {
    let (lo, hi) = if v_minus < v_plus { (v_minus, v_plus) } else { (v_plus, v_minus) };
    if !(v >= lo && v <= hi) {
        return Err(Error::domain(format!(
            "V = {v} outside the profile range [{lo}, {hi}]"
        )));
    }
    Ok(v * h_function(v, v_minus, s, g)? / (s * g.mu))
}

/// Linearised decay rates `c_pm = v_pm |p'(v_pm) + s^2| / (s mu)` at both ends.
pub fn decay_rates(v_minus: f64, v_plus: f64, s: f64, g: &GasParams) -> Result<(f64, f64)> {
    let rate = |v: f64| -> Result<f64> {
        Ok(v * (gas::dpressure(v, g)? + s * s).abs() / (s * g.mu))
    };
    Ok((rate(v_minus)?, rate(v_plus)?))
}

/// Cubic Hermite interpolation on `[x0, x1]` with end values and slopes.
#[inline]
fn hermite(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1;
    let dy = (6.0 * t2 - 6.0 * t) / h * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (-6.0 * t2 + 6.0 * t) / h * y1
        + (3.0 * t2 - 2.0 * t) * d1;
    (y, dy)
}

/// Sampled viscous 2-shock profile `(V, U)(xi)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShockProfile {
    pub gas: GasParams,
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub s: f64,
    pub delta: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub xi_left: f64,
    pub xi_right: f64,
    pub normalization: f64,
    pub options: ProfileOptions,
    samples: Vec<ProfileSample>,
    /// `dV/dxi` at each sample, from the ODE right-hand side.
    slopes: Vec<f64>,
    /// `int_{-inf}^{xi_j} (V - v_-)`.
    mass_left: Vec<f64>,
    /// `int_{xi_j}^{inf} (v_+ - V)`.
    mass_right: Vec<f64>,
    amp_left: f64,
    amp_right: f64,
}

pub fn build_shock_profile(
    v_minus: f64,
    u_minus: f64,
    v_plus: f64,
    g: &GasParams,
    opts: &ProfileOptions,
) -> Result<ShockProfile> {
    if !(v_minus > 0.0) || !(v_plus > 0.0) {
        return Err(Error::domain("end-state volumes must be positive"));
    }
    let delta = (v_plus - v_minus).abs();
    if delta < MIN_STRENGTH {
        return Err(Error::DegenerateShock(format!(
            "strength |v+ - v-| = {delta:.3e} is below {MIN_STRENGTH:.0e}"
        )));
    }
    if v_plus < v_minus {
        return Err(Error::domain(format!(
            "a 2-shock needs v+ > v-, got v- = {v_minus}, v+ = {v_plus}"
        )));
    }
    let s = gas::shock_speed(v_minus, v_plus, 2, g)?;
    let u_plus = u_minus - s * delta;
    let (c_minus, c_plus) = decay_rates(v_minus, v_plus, s, g)?;

    let gamma = g.gamma;
    let p_minus = p_raw(v_minus, gamma);
    let s_mu = s * g.mu;
    let rhs = |v: f64| v * (-s * s * (v - v_minus) - (p_raw(v, gamma) - p_minus)) / s_mu;

    let h_max = opts.max_step_decay_lengths / c_minus.max(c_plus);
    let ode = |dir: f64| OdeOptions {
        tol: opts.ode_tol,
        scale: delta,
        h_init: dir * 0.1 * h_max,
        h_max,
        h_min: 1e-12 * h_max,
        max_steps: opts.max_steps,
    };
    let mid = 0.5 * (v_minus + v_plus);
    let stop_tol = opts.tail_tol * delta;

    let right = integrate_until(rhs, 0.0, mid, &ode(1.0), |v| v_plus - v < stop_tol)?;
    let left = integrate_until(rhs, 0.0, mid, &ode(-1.0), |v| v - v_minus < stop_tol)?;

    let mut samples = Vec::with_capacity(left.len() + right.len());
    let mut slopes = Vec::with_capacity(left.len() + right.len());
    for p in left.iter().rev().chain(right.iter().skip(1)) {
        if !(p.y > v_minus && p.y < v_plus) || !(p.dy > 0.0) {
            return Err(Error::Integration(format!(
                "profile left the open interval ({v_minus}, {v_plus}) at xi = {}: V = {}",
                p.x, p.y
            )));
        }
        samples.push(ProfileSample {
            xi: p.x,
            v: p.y,
            u: u_minus - s * (p.y - v_minus),
        });
        slopes.push(p.dy);
    }

    let first = samples[0];
    let last = *samples.last().unwrap();
    let amp_left = first.v - v_minus;
    let amp_right = v_plus - last.v;

    let n = samples.len();
    let mut mass_left = vec![0.0; n];
    mass_left[0] = amp_left / c_minus;
    for j in 1..n {
        let h = samples[j].xi - samples[j - 1].xi;
        let y0 = samples[j - 1].v - v_minus;
        let y1 = samples[j].v - v_minus;
        mass_left[j] = mass_left[j - 1] + h * (y0 + y1) / 2.0 + h * h * (slopes[j - 1] - slopes[j]) / 12.0;
    }
    let mut mass_right = vec![0.0; n];
    mass_right[n - 1] = amp_right / c_plus;
    for j in (0..n - 1).rev() {
        let h = samples[j + 1].xi - samples[j].xi;
        let y0 = v_plus - samples[j].v;
        let y1 = v_plus - samples[j + 1].v;
        mass_right[j] = mass_right[j + 1] + h * (y0 + y1) / 2.0 + h * h * (slopes[j + 1] - slopes[j]) / 12.0;
    }

    Ok(ShockProfile {
        gas: *g,
        v_minus,
        u_minus,
        v_plus,
        u_plus,
        s,
        delta,
        c_minus,
        c_plus,
        xi_left: first.xi,
        xi_right: last.xi,
        normalization: mid,
        options: *opts,
        samples,
        slopes,
        mass_left,
        mass_right,
        amp_left,
        amp_right,
    })
}

impl ShockProfile {
    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn w_minus(&self) -> EndState {
        EndState { v: self.v_minus, u: self.u_minus }
    }

    pub fn w_plus(&self) -> EndState {
        EndState { v: self.v_plus, u: self.u_plus }
    }

    /// Index `j` with `xi_j <= xi < xi_{j+1}`; caller guarantees `xi` is inside.
    fn locate(&self, xi: f64) -> usize {
        let j = self.samples.partition_point(|p| p.xi <= xi);
        j.saturating_sub(1).min(self.samples.len() - 2)
    }

    /// `(V, dV/dxi)` at `xi`.
    pub fn v_and_slope(&self, xi: f64) -> (f64, f64) {
        if xi <= self.xi_left {
            let e = self.amp_left * (self.c_minus * (xi - self.xi_left)).exp();
            return (self.v_minus + e, self.c_minus * e);
        }
        if xi >= self.xi_right {
            let e = self.amp_right * (-self.c_plus * (xi - self.xi_right)).exp();
            return (self.v_plus - e, self.c_plus * e);
        }
        let j = self.locate(xi);
        let (a, b) = (&self.samples[j], &self.samples[j + 1]);
        hermite(xi, a.xi, b.xi, a.v, b.v, self.slopes[j], self.slopes[j + 1])
    }

    pub fn v_at(&self, xi: f64) -> f64 {
        self.v_and_slope(xi).0
    }

    /// Fills `out[j] = V(x0 + j dx)` for `dx > 0`, walking the samples once.
    pub fn v_on_grid(&self, x0: f64, dx: f64, out: &mut [f64]) {
        let last = self.samples.len() - 2;
        let mut k = 0usize;
        for (j, o) in out.iter_mut().enumerate() {
            let xi = x0 + j as f64 * dx;
            if xi <= self.xi_left || xi >= self.xi_right {
                *o = self.v_and_slope(xi).0;
                continue;
            }
            while k < last && self.samples[k + 1].xi <= xi {
                k += 1;
            }
            let (a, b) = (&self.samples[k], &self.samples[k + 1]);
            *o = hermite(xi, a.xi, b.xi, a.v, b.v, self.slopes[k], self.slopes[k + 1]).0;
        }
    }

    pub fn u_of_v(&self, v: f64) -> f64 {
        self.u_minus - self.s * (v - self.v_minus)
    }

    /// `(V, U)` at any real `xi`: Hermite interpolation inside the sampled
    /// window, exponential tails outside.
    pub fn evaluate(&self, xi: f64) -> (f64, f64) {
        let v = self.v_at(xi);
        (v, self.u_of_v(v))
    }

    /// `(V', U')` at `xi`.
    pub fn slope(&self, xi: f64) -> (f64, f64) {
        let dv = self.v_and_slope(xi).1;
        (dv, -self.s * dv)
    }

    /// `int_{-inf}^{y} (V - v_-)`.
    pub fn mass_below(&self, y: f64) -> f64 {
        if y <= self.xi_left {
            return self.amp_left / self.c_minus * (self.c_minus * (y - self.xi_left)).exp();
        }
        if y >= self.xi_right {
            // int_{-inf}^{y} = int_{-inf}^{xi_R} + int_{xi_R}^{y} (V - v_-)
            let n = self.samples.len();
            let head = self.mass_left[n - 1];
            let dv = self.v_plus - self.v_minus;
            let decayed = self.amp_right / self.c_plus * (1.0 - (-self.c_plus * (y - self.xi_right)).exp());
            return head + dv * (y - self.xi_right) - decayed;
        }
        let j = self.locate(y);
        let x0 = self.samples[j].xi;
        self.mass_left[j] + gauss3(|x| self.v_at(x) - self.v_minus, x0, y)
    }

    /// `int_{y}^{inf} (v_+ - V)`.
    pub fn deficit_above(&self, y: f64) -> f64 {
        if y >= self.xi_right {
            return self.amp_right / self.c_plus * (-self.c_plus * (y - self.xi_right)).exp();
        }
        if y <= self.xi_left {
            let head = self.mass_right[0];
            let dv = self.v_plus - self.v_minus;
            let grown = self.amp_left / self.c_minus * (1.0 - (self.c_minus * (y - self.xi_left)).exp());
            return head + dv * (self.xi_left - y) - grown;
        }
        let j = self.locate(y);
        let x1 = self.samples[j + 1].xi;
        self.mass_right[j + 1] + gauss3(|x| self.v_plus - self.v_at(x), y, x1)
    }

    /// Least-squares slopes of `log(V - v_-)` on the left tail and
    /// `log(v_+ - V)` on the right tail, returned as positive rates.
    pub fn fitted_tail_rates(&self) -> (f64, f64) {
        let lo = 1e2 * self.options.tail_tol * self.delta;
        let hi = 1e-3 * self.delta;
        let left: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|p| (p.v - self.v_minus) > lo && (p.v - self.v_minus) < hi)
            .map(|p| (p.xi, (p.v - self.v_minus).ln()))
            .collect();
        let right: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|p| (self.v_plus - p.v) > lo && (self.v_plus - p.v) < hi)
            .map(|p| (p.xi, (self.v_plus - p.v).ln()))
            .collect();
        (linear_fit_slope(&left), -linear_fit_slope(&right))
    }

    /// Largest `|s mu V'/V - h(V)|` over the samples, using a centered
    /// (non-uniform) three-point difference for `V'`.
    pub fn ode_residual(&self) -> f64 {
        let g = &self.gas;
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let h1 = b.xi - a.xi;
            let h2 = c.xi - b.xi;
            let dv = (h1 * h1 * c.v - h2 * h2 * a.v + (h2 * h2 - h1 * h1) * b.v) / (h1 * h2 * (h1 + h2));
            let h = -self.s * self.s * (b.v - self.v_minus) - (p_raw(b.v, g.gamma) - p_raw(self.v_minus, g.gamma));
            worst = worst.max((self.s * g.mu * dv / b.v - h).abs());
        }
        worst
    }

    pub fn max_slope(&self) -> f64 {
        self.slopes.iter().cloned().fold(0.0, f64::max)
    }
}

/// Least-squares slope of `y` against `x`; NaN with fewer than two points.
pub fn linear_fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Boundary-layer profile attached to the inflow boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlProfile {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub s_minus: f64,
    pub xi_end: f64,
    samples: Vec<ProfileSample>,
}

impl BlProfile {
    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }
}

pub fn build_bl_profile(
    v_minus: f64,
    u_minus: f64,
    v_plus: f64,
    g: &GasParams,
    opts: &ProfileOptions,
) -> Result<BlProfile> {
    let w_minus = EndState::new(v_minus, u_minus)?;
    if gas::classify(&w_minus, g)? != FlowRegion::Subsonic {
        return Err(Error::InconsistentData(format!(
            "boundary state ({v_minus}, {u_minus}) is not subsonic"
        )));
    }
    if !(v_plus > 0.0) {
        return Err(Error::domain("v+ must be positive"));
    }
    let s_minus = gas::boundary_speed(&w_minus);
    let u_plus = gas::bl_line(&w_minus, v_plus)?;
    if v_plus == v_minus {
        let p = ProfileSample { xi: 0.0, v: v_minus, u: u_minus };
        return Ok(BlProfile {
            v_minus,
            u_minus,
            v_plus,
            u_plus,
            s_minus,
            xi_end: 0.0,
            samples: vec![p],
        });
    }
    let star = gas::sonic_intersection(&w_minus, g)?;
    if v_plus > star.v * (1.0 + gas::DEFAULT_TRANSONIC_TOL) {
        return Err(Error::InconsistentData(format!(
            "v+ = {v_plus} lies beyond the sonic point v* = {} of the BL line",
            star.v
        )));
    }

    let gamma = g.gamma;
    let p_plus = p_raw(v_plus, gamma);
    let mu = g.mu;
    let rhs = |v: f64| v / (s_minus * mu) * (-s_minus * s_minus * (v - v_plus) - (p_raw(v, gamma) - p_plus));

    let strength = (v_plus - v_minus).abs();
    let linear_rate = v_plus * (s_minus * s_minus + gas::dpressure(v_plus, g)?).abs() / (s_minus.abs() * mu);
    let start_rate = (rhs(v_minus) / strength).abs();
    let h_max = opts.max_step_decay_lengths / linear_rate.max(start_rate).max(1e-300);
    let ode = OdeOptions {
        tol: opts.ode_tol,
        scale: strength,
        h_init: 0.1 * h_max,
        h_max,
        h_min: 1e-12 * h_max,
        max_steps: opts.max_steps,
    };
    let stop_tol = opts.tail_tol * strength;
    let pts = integrate_until(rhs, 0.0, v_minus, &ode, |v| (v_plus - v).abs() < stop_tol)?;
    let increasing = v_plus > v_minus;
    let mut samples = Vec::with_capacity(pts.len());
    for (k, p) in pts.iter().enumerate() {
        let ok_dir = if increasing { p.dy > 0.0 } else { p.dy < 0.0 };
        if k > 0 && !ok_dir {
            return Err(Error::Integration(format!("BL profile is not monotone at xi = {}", p.x)));
        }
        samples.push(ProfileSample { xi: p.x, v: p.y, u: -s_minus * p.y });
    }
    samples[0].v = v_minus;
    samples[0].u = u_minus;
    let xi_end = samples.last().unwrap().xi;
    Ok(BlProfile {
        v_minus,
        u_minus,
        v_plus,
        u_plus,
        s_minus,
        xi_end,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_gas() -> GasParams {
        GasParams::new(2.0, 1.0).unwrap()
    }

    fn std_profile() -> ShockProfile {
        build_shock_profile(1.0, 0.5, 2.0, &std_gas(), &ProfileOptions::default()).unwrap()
    }

    const S_STD: f64 = 0.866_025_403_784_438_6;

    #[test]
    fn h_function_examples() {
        let g = std_gas();
        assert_eq!(h_function(1.0, 1.0, S_STD, &g).unwrap(), 0.0);
        assert!(h_function(2.0, 1.0, S_STD, &g).unwrap().abs() < 1e-14);
        // -0.75*0.5 - (1/2.25 - 1)
        let expect = -0.375 - (1.0 / 2.25 - 1.0);
        assert!((h_function(1.5, 1.0, S_STD, &g).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.180_556).abs() < 1e-6);
    }

    #[test]
    fn ode_rhs_examples() {
        let g = std_gas();
        let r = profile_ode_rhs(1.5, 1.0, 2.0, S_STD, &g).unwrap();
        assert!((r - 1.5 * 0.180_555_555_555_555_6 / S_STD).abs() < 1e-12);
        assert!((r - 0.312_731).abs() < 1e-6);
        assert!(profile_ode_rhs(1.0 + 1e-12, 1.0, 2.0, S_STD, &g).unwrap().abs() < 1e-10);
        assert!(profile_ode_rhs(2.5, 1.0, 2.0, S_STD, &g).is_err());
        // 1000 interior points, deterministic stride
        for k in 1..1000 {
            let v = 1.0 + k as f64 / 1000.0;
            assert!(profile_ode_rhs(v, 1.0, 2.0, S_STD, &g).unwrap() > 0.0);
        }
    }

    #[test]
    fn decay_rate_examples() {
        let (cm, cp) = decay_rates(1.0, 2.0, S_STD, &std_gas()).unwrap();
        assert!((cm - 1.25 / S_STD).abs() < 1e-14);
        assert!((cp - 1.0 / S_STD).abs() < 1e-14);
        assert!((cm - 1.443_376).abs() < 1e-6 && (cp - 1.154_701).abs() < 1e-6);
    }

    #[test]
    fn decay_rate_vanishes_linearly_with_strength() {
        let g = std_gas();
        let ratio = |d: f64| {
            let s = gas::shock_speed(1.0, 1.0 + d, 2, &g).unwrap();
            decay_rates(1.0, 1.0 + d, s, &g).unwrap().0 / d
        };
        let (a, b) = (ratio(1e-3), ratio(5e-4));
        assert!(((a - b) / a).abs() < 0.05);
    }

    #[test]
    fn standard_profile_shape() {
        let p = std_profile();
        assert_eq!(p.evaluate(0.0).0, 1.5);
        let mut prev = f64::NEG_INFINITY;
        let mut prev_v = 0.0;
        for q in p.samples() {
            assert!(q.xi > prev && q.v > prev_v);
            assert!(q.v > 1.0 && q.v < 2.0);
            assert!(q.u < p.u_minus && q.u > p.u_plus);
            assert!((q.u - (p.u_minus - p.s * (q.v - p.v_minus))).abs() < 1e-15);
            prev = q.xi;
            prev_v = q.v;
        }
        assert!(p.v_at(p.xi_left) - 1.0 <= 1e-8);
        assert!(2.0 - p.v_at(p.xi_right) <= 1e-8);
    }

    #[test]
    fn degenerate_and_reversed_requests() {
        let g = std_gas();
        let o = ProfileOptions::default();
        assert!(matches!(build_shock_profile(1.0, 0.5, 1.0, &g, &o), Err(Error::DegenerateShock(_))));
        assert!(build_shock_profile(2.0, 0.5, 1.0, &g, &o).is_err());
    }

    #[test]
    fn tail_fits_recover_rates() {
        let p = std_profile();
        let (cm, cp) = p.fitted_tail_rates();
        assert!(((cm - p.c_minus) / p.c_minus).abs() < 0.05, "{cm} vs {}", p.c_minus);
        assert!(((cp - p.c_plus) / p.c_plus).abs() < 0.05, "{cp} vs {}", p.c_plus);
    }

    #[test]
    fn evaluation_reproduces_samples_and_tails() {
        let p = std_profile();
        for q in p.samples().iter().step_by(37) {
            let (v, u) = p.evaluate(q.xi);
            assert!((v - q.v).abs() < 1e-15 && (u - q.u).abs() < 1e-14);
        }
        let far = p.evaluate(p.xi_right + 100.0).0;
        assert!((2.0 - far) < 1e-8);
        let left_far = p.evaluate(p.xi_left - 100.0).0;
        assert!(left_far - 1.0 < 1e-8);
        // tail and interior meet continuously
        let eps = 1e-9;
        assert!((p.v_at(p.xi_right - eps) - p.v_at(p.xi_right + eps)).abs() < 1e-12);
        assert!((p.v_at(p.xi_left - eps) - p.v_at(p.xi_left + eps)).abs() < 1e-12);
    }

    #[test]
    fn ode_residual_small_on_fine_sampling() {
        let opts = ProfileOptions { max_step_decay_lengths: 1e-4, ..Default::default() };
        let p = build_shock_profile(1.0, 0.5, 2.0, &std_gas(), &opts).unwrap();
        let r = p.ode_residual();
        assert!(r < 10.0 * opts.ode_tol, "residual {r}");
    }

    #[test]
    fn mass_integrals_match_quadrature() {
        let p = std_profile();
        // brute-force midpoint sum of the interpolant
        let brute = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| {
            let n = 400_000;
            let h = (b - a) / n as f64;
            (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
        };
        for y in [-30.0, -3.0, 0.0, 2.5, 40.0] {
            let below = brute(-80.0, y, &|x| p.v_at(x) - 1.0);
            assert!((p.mass_below(y) - below).abs() < 1e-8, "y = {y}");
            let above = brute(y, 80.0, &|x| 2.0 - p.v_at(x));
            assert!((p.deficit_above(y) - above).abs() < 1e-8, "y = {y}");
        }
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let p = std_profile();
        let mut out = vec![0.0; 3001];
        p.v_on_grid(-40.0, 0.027, &mut out);
        for (j, v) in out.iter().enumerate() {
            assert_eq!(*v, p.v_at(-40.0 + j as f64 * 0.027));
        }
    }

    #[test]
    fn shift_covariance() {
        // Re-anchor: the sample where V crosses 1.25 defines a new origin. The
        // same ODE started there must reproduce the translated profile.
        let p = std_profile();
        let g = std_gas();
        let xi0 = {
            let (mut a, mut b) = (-20.0, 0.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if p.v_at(m) < 1.25 { a = m } else { b = m }
            }
            0.5 * (a + b)
        };
        let s = p.s;
        let rhs = |v: f64| v * h_function(v, 1.0, s, &g).unwrap() / s;
        let o = OdeOptions { tol: 1e-12, scale: 1.0, h_init: 1e-3, h_max: 1e-2, h_min: 1e-14, max_steps: 1_000_000 };
        let pts = integrate_until(rhs, 0.0, 1.25, &o, |v| v > 1.9).unwrap();
        for q in pts.iter().step_by(50) {
            assert!((p.v_at(q.x + xi0) - q.y).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_scales_with_strength_squared() {
        let g = std_gas();
        let ratios: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&d| {
                let p = build_shock_profile(1.0, 0.5, 1.0 + d, &g, &ProfileOptions::default()).unwrap();
                p.max_slope() / (d * d)
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!((hi - lo) / lo < 0.25, "{ratios:?}");
    }

    #[test]
    fn bl_profiles() {
        let g = std_gas();
        let o = ProfileOptions::default();
        let bl = build_bl_profile(1.0, 0.5, 1.5, &g, &o).unwrap();
        assert_eq!(bl.samples()[0].v, 1.0);
        assert!((bl.u_plus - 0.75).abs() < 1e-15);
        for w in bl.samples().windows(2) {
            assert!(w[1].v > w[0].v);
        }
        for q in bl.samples() {
            assert!((q.u + bl.s_minus * q.v).abs() < 1e-14);
        }
        assert!((bl.samples().last().unwrap().v - 1.5).abs() < 1e-8 * 0.5);
        let flat = build_bl_profile(1.0, 0.5, 1.0, &g, &o).unwrap();
        assert!(flat.samples().iter().all(|q| q.v == 1.0));
        let down = build_bl_profile(1.0, 0.5, 0.7, &g, &o).unwrap();
        for w in down.samples().windows(2) {
            assert!(w[1].v < w[0].v);
        }
        assert!(matches!(build_bl_profile(1.0, 0.5, 2.5, &g, &o), Err(Error::InconsistentData(_))));
        assert!(build_bl_profile(1.0, 2.0, 1.5, &g, &o).is_err());
    }
}
