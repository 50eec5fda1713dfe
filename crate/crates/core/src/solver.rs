//! Explicit finite-difference integrator for the inflow problem in the frame
//! `xi = x - s_- t` moving with the boundary:
//!
//! ```text
//! v_t - s_- v_xi - u_xi = 0
//! u_t - s_- u_xi + p(v)_xi = mu (u_xi / v)_xi        xi in [0, L]
//! (v, u)(t, 0) = (v_-, u_-)
//! (v, u)(t, L) = (V, U)(L - (s - s_-) t + sigma - beta)
//! ```

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{EndState, GasParams};
use crate::grid::Grid;
use crate::perturbation::profile_argument;
use crate::profile::ShockProfile;

/// `v^-gamma`, with an integer fast path.
#[derive(Debug, Clone, Copy)]
enum PressureLaw {
    Integer(i32),
    Real(f64),
}

impl PressureLaw {
    fn new(gamma: f64) -> Self {
        if gamma.fract() == 0.0 && gamma <= 16.0 {
            PressureLaw::Integer(gamma as i32)
        } else {
            PressureLaw::Real(gamma)
        }
    }

    #[inline(always)]
    fn eval(self, v: f64) -> f64 {
        match self {
            PressureLaw::Integer(k) => 1.0 / v.powi(k),
            PressureLaw::Real(g) => v.powf(-g),
        }
    }
}

/// Discretisation of the frame-drift terms `s_- v_xi`, `s_- u_xi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftScheme {
    /// Second-order centered differences.
    Centered,
    /// First-order upwinding (`s_- < 0`, so information comes from the right).
    Upwind,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cfl: f64,
    pub drift: DriftScheme,
    /// Halvings of `dt` tried before a positivity failure is fatal.
    pub max_retries: u32,
    #[serde(skip)]
    pub wall_clock_budget: Option<Duration>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            drift: DriftScheme::Centered,
            max_retries: 10,
            wall_clock_budget: None,
        }
    }
}

/// The moving-frame problem: gas, end states, the asymptotic profile and its
/// placement `(sigma, beta)`, and the computational grid.
#[derive(Debug, Clone)]
pub struct InflowProblem {
    pub gas: GasParams,
    pub profile: ShockProfile,
    pub s_minus: f64,
    pub sigma: f64,
    pub beta: f64,
    pub grid: Grid,
}

impl InflowProblem {
    pub fn new(profile: ShockProfile, sigma: f64, beta: f64, grid: Grid) -> Result<Self> {
        if !(profile.u_minus > 0.0) {
            return Err(Error::domain(format!(
                "inflow requires u_- > 0, got {}",
                profile.u_minus
            )));
        }
        let s_minus = -profile.u_minus / profile.v_minus;
        Ok(Self {
            gas: profile.gas,
            s_minus,
            sigma,
            beta,
            grid,
            profile,
        })
    }

    pub fn w_minus(&self) -> EndState {
        self.profile.w_minus()
    }

    /// Speed of the shock relative to the boundary, `s - s_-`.
    pub fn relative_speed(&self) -> f64 {
        self.profile.s - self.s_minus
    }

    /// Argument of the shifted profile at `(t, xi)`.
    pub fn profile_arg(&self, xi: f64, t: f64) -> f64 {
        profile_argument(&self.profile, self.s_minus, self.sigma, self.beta, xi, t)
    }

    /// `(V, U)(xi - (s - s_-) t + sigma - beta)`.
    pub fn shifted_profile(&self, xi: f64, t: f64) -> (f64, f64) {
        self.profile.evaluate(self.profile_arg(xi, t))
    }

    pub fn far_field(&self, t: f64) -> (f64, f64) {
        self.shifted_profile(self.grid.length, t)
    }

    /// State sampled from the shifted profile at time `t` (boundary node set to
    /// `(v_-, u_-)`).
    pub fn profile_state(&self, t: f64) -> SimState {
        let mut v = vec![0.0; self.grid.len()];
        self.profile.v_on_grid(self.profile_arg(0.0, t), self.grid.dxi, &mut v);
        let mut u: Vec<f64> = v.iter().map(|&x| self.profile.u_of_v(x)).collect();
        v[0] = self.profile.v_minus;
        u[0] = self.profile.u_minus;
        SimState { t, v, u }
    }

    /// Semi-discrete right-hand side at interior nodes; boundary rows are zero.
    pub fn spatial_residual(&self, state: &SimState, drift: DriftScheme, dv: &mut [f64], du: &mut [f64]) -> Result<()> {
        let n = state.v.len();
        if let Some((j, v)) = state.v.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Positivity {
                t: state.t,
                detail: format!("v = {v} at node {j}"),
            });
        }
        residual_kernel(
            &state.v,
            &state.u,
            self.grid.dxi,
            self.s_minus,
            self.gas.mu,
            PressureLaw::new(self.gas.gamma),
            drift,
            &mut dv[..n],
            &mut du[..n],
        );
        Ok(())
    }

    /// Largest stable step: `cfl * min(dxi / max(|s_-| + lambda_2(v)), dxi^2 min v / (2 mu))`.
    pub fn stable_dt(&self, state: &SimState, cfl: f64) -> Result<f64> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::domain(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        let vmin = state.v.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(vmin > 0.0) {
            return Err(Error::Positivity {
                t: state.t,
                detail: format!("min v = {vmin}"),
            });
        }
        let h = self.grid.dxi;
        // lambda_2 is decreasing in v, so its maximum sits at min v
        let lam = self.gas.gamma.sqrt() * vmin.powf(-(self.gas.gamma + 1.0) / 2.0);
        let advective = h / (self.s_minus.abs() + lam);
        let diffusive = h * h * vmin / (2.0 * self.gas.mu);
        Ok(cfl * advective.min(diffusive))
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn residual_kernel(
    v: &[f64],
    u: &[f64],
    h: f64,
    s_minus: f64,
    mu: f64,
    law: PressureLaw,
    drift: DriftScheme,
    dv: &mut [f64],
    du: &mut [f64],
) {
    let n = v.len();
    let inv2h = 0.5 / h;
    let invh = 1.0 / h;
    let mu_h2 = mu / (h * h);
    dv[0] = 0.0;
    du[0] = 0.0;
    dv[n - 1] = 0.0;
    du[n - 1] = 0.0;
    let mut p_prev = law.eval(v[0]);
    let mut p_mid = law.eval(v[1]);
    // viscous flux u_xi / v on the face j - 1/2, scaled by h
    let mut flux_left = (u[1] - u[0]) / (0.5 * (v[0] + v[1]));
    for j in 1..n - 1 {
        let p_next = law.eval(v[j + 1]);
        let flux_right = (u[j + 1] - u[j]) / (0.5 * (v[j] + v[j + 1]));
        let (v_drift, u_drift) = match drift {
            DriftScheme::Centered => ((v[j + 1] - v[j - 1]) * inv2h, (u[j + 1] - u[j - 1]) * inv2h),
            DriftScheme::Upwind => ((v[j + 1] - v[j]) * invh, (u[j + 1] - u[j]) * invh),
        };
        dv[j] = s_minus * v_drift + (u[j + 1] - u[j - 1]) * inv2h;
        du[j] = s_minus * u_drift - (p_next - p_prev) * inv2h + mu_h2 * (flux_right - flux_left);
        p_prev = p_mid;
        p_mid = p_next;
        flux_left = flux_right;
    }
}

/// Fields on the grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl SimState {
    pub fn constant(grid: &Grid, w: EndState) -> Self {
        Self {
            t: 0.0,
            v: vec![w.v; grid.len()],
            u: vec![w.u; grid.len()],
        }
    }
}

/// What the observer is being told about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// An accepted step (also emitted once for the initial state).
    Step,
    /// A snapshot time was reached; carries the snapshot index.
    Snapshot(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TimedOut,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub t_final: f64,
    pub steps: u64,
    pub rejected_steps: u64,
    pub snapshots: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

/// Owns one evolving state of an [`InflowProblem`].
pub struct Solver<'a> {
    problem: &'a InflowProblem,
    opts: SolverOptions,
    state: SimState,
    law: PressureLaw,
    k: (Vec<f64>, Vec<f64>),
    mid: SimState,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a InflowProblem, initial: SimState, opts: SolverOptions) -> Result<Self> {
        let n = problem.grid.len();
        if initial.v.len() != n || initial.u.len() != n {
            return Err(Error::domain("initial fields do not match the grid"));
        }
        if let Some(v) = initial.v.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::InadmissibleData(format!("initial v = {v} is not positive")));
        }
        let mut state = initial;
        let w = problem.w_minus();
        state.v[0] = w.v;
        state.u[0] = w.u;
        let (vr, ur) = problem.far_field(state.t);
        state.v[n - 1] = vr;
        state.u[n - 1] = ur;
        Ok(Self {
            problem,
            opts,
            law: PressureLaw::new(problem.gas.gamma),
            k: (vec![0.0; n], vec![0.0; n]),
            mid: state.clone(),
            state,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    pub fn problem(&self) -> &InflowProblem {
        self.problem
    }

    pub fn stable_dt(&self) -> Result<f64> {
        self.problem.stable_dt(&self.state, self.opts.cfl)
    }

    fn impose_boundaries(problem: &InflowProblem, s: &mut SimState) {
        let n = s.v.len();
        let w = problem.w_minus();
        s.v[0] = w.v;
        s.u[0] = w.u;
        let (vr, ur) = problem.far_field(s.t);
        s.v[n - 1] = vr;
        s.u[n - 1] = ur;
    }

    /// One explicit midpoint (RK2) step; the state is left untouched on error.
    fn try_step(&mut self, dt: f64) -> Result<()> {
        let p = self.problem;
        let h = p.grid.dxi;
        let (kv, ku) = (&mut self.k.0, &mut self.k.1);
        residual_kernel(&self.state.v, &self.state.u, h, p.s_minus, p.gas.mu, self.law, self.opts.drift, kv, ku);
        self.mid.t = self.state.t + 0.5 * dt;
        for j in 0..kv.len() {
            self.mid.v[j] = self.state.v[j] + 0.5 * dt * kv[j];
            self.mid.u[j] = self.state.u[j] + 0.5 * dt * ku[j];
        }
        Self::impose_boundaries(p, &mut self.mid);
        check_fields(&self.mid)?;
        residual_kernel(&self.mid.v, &self.mid.u, h, p.s_minus, p.gas.mu, self.law, self.opts.drift, kv, ku);
        // write the candidate into `mid`, keep `state` intact until accepted
        self.mid.t = self.state.t + dt;
        for j in 0..kv.len() {
            self.mid.v[j] = self.state.v[j] + dt * kv[j];
            self.mid.u[j] = self.state.u[j] + dt * ku[j];
        }
        Self::impose_boundaries(p, &mut self.mid);
        check_fields(&self.mid)?;
        std::mem::swap(&mut self.state, &mut self.mid);
        Ok(())
    }

    /// Advances by `dt`, halving on positivity loss up to `max_retries` times.
    /// Returns the number of sub-steps actually taken.
    pub fn step(&mut self, dt: f64) -> Result<u32> {
        if dt == 0.0 {
            return Ok(0);
        }
        if !(dt > 0.0) {
            return Err(Error::domain(format!("time step must be non-negative, got {dt}")));
        }
        let mut retries = 0;
        let mut sub = dt;
        loop {
            let pieces = 1u32 << retries;
            let saved = self.state.clone();
            let mut outcome = Ok(());
            for _ in 0..pieces {
                outcome = self.try_step(sub);
                if outcome.is_err() {
                    break;
                }
            }
            match outcome {
                Ok(()) => return Ok(pieces),
                Err(Error::Positivity { .. }) if retries < self.opts.max_retries => {
                    self.state = saved;
                    retries += 1;
                    sub *= 0.5;
                }
                Err(e) => {
                    self.state = saved;
                    return Err(e);
                }
            }
        }
    }

    /// Integrates to `t_end`, emitting [`Event::Step`] after every accepted
    /// step and [`Event::Snapshot`] every `cadence` time units (and at `t_end`).
    pub fn run<F>(&mut self, t_end: f64, cadence: f64, mut observer: F) -> Result<RunSummary>
    where
        F: FnMut(Event, &SimState) -> Result<()>,
    {
        if t_end < self.state.t {
            return Err(Error::domain(format!(
                "t_end = {t_end} precedes the current time {}",
                self.state.t
            )));
        }
        if !(cadence > 0.0) {
            return Err(Error::domain("snapshot cadence must be positive"));
        }
        // no clock unless asked for: wasm32 has none
        let deadline = self.opts.wall_clock_budget.map(|b| (Instant::now(), b));
        let t0 = self.state.t;
        let mut summary = RunSummary {
            status: RunStatus::Completed,
            t_final: t0,
            steps: 0,
            rejected_steps: 0,
            snapshots: 0,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
        };
        observer(Event::Step, &self.state)?;
        observer(Event::Snapshot(0), &self.state)?;
        summary.snapshots = 1;
        let mut next_snap = 1usize;
        let snap_time = |k: usize| (t0 + k as f64 * cadence).min(t_end);
        let eps = 1e-12 * (1.0 + t_end.abs());

        while self.state.t < t_end - eps {
            if let Some((started, budget)) = deadline {
                if started.elapsed() > budget {
                    summary.status = RunStatus::TimedOut;
                    break;
                }
            }
            let target = snap_time(next_snap);
            let mut dt = self.stable_dt()?;
            let remaining = target - self.state.t;
            let lands = dt >= remaining - eps;
            if lands {
                dt = remaining;
            }
            let pieces = self.step(dt)?;
            if lands {
                self.state.t = target;
            }
            if !self.state.t.is_finite() || self.state.v.iter().chain(&self.state.u).any(|x| !x.is_finite()) {
                return Err(Error::BlowUp {
                    t: self.state.t,
                    detail: "non-finite field values".into(),
                });
            }
            summary.steps += pieces as u64;
            summary.rejected_steps += (pieces - 1) as u64;
            let sub = dt / pieces as f64;
            summary.dt_min = summary.dt_min.min(sub);
            summary.dt_max = summary.dt_max.max(sub);
            observer(Event::Step, &self.state)?;
            if lands {
                observer(Event::Snapshot(next_snap), &self.state)?;
                summary.snapshots += 1;
                next_snap += 1;
            }
        }
        summary.t_final = self.state.t;
        if summary.steps == 0 {
            summary.dt_min = 0.0;
        }
        Ok(summary)
    }
}

fn check_fields(s: &SimState) -> Result<()> {
    for (j, (&v, &u)) in s.v.iter().zip(&s.u).enumerate() {
        if !v.is_finite() || !u.is_finite() {
            return Err(Error::BlowUp {
                t: s.t,
                detail: format!("non-finite value at node {j}"),
            });
        }
        if v <= 0.0 {
            return Err(Error::Positivity {
                t: s.t,
                detail: format!("v = {v} at node {j}"),
            });
        }
    }
    Ok(())
}

/// Default domain length: the larger of `max(40/c_-, 40/c_+) + support` and the
/// distance the shock travels by `t_end` plus `20/c_+` of right tail.
pub fn default_domain_length(profile: &ShockProfile, s_minus: f64, beta: f64, sigma: f64, t_end: f64, support: f64) -> f64 {
    let static_len = (40.0 / profile.c_minus).max(40.0 / profile.c_plus) + support;
    let travelled = beta - sigma + (profile.s - s_minus) * t_end + 20.0 / profile.c_plus + support;
    static_len.max(travelled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{build_shock_profile, ProfileOptions};

    fn problem(cells: usize, length: f64, beta: f64) -> InflowProblem {
        let g = GasParams::new(2.0, 1.0).unwrap();
        let p = build_shock_profile(1.0, 0.5, 2.0, &g, &ProfileOptions::default()).unwrap();
        InflowProblem::new(p, 0.0, beta, Grid::new(length, cells).unwrap()).unwrap()
    }

    #[test]
    fn constant_state_has_zero_residual_and_is_steady() {
        let pr = problem(200, 20.0, 10.0);
        let st = SimState::constant(&pr.grid, pr.w_minus());
        let n = pr.grid.len();
        let (mut dv, mut du) = (vec![1.0; n], vec![1.0; n]);
        pr.spatial_residual(&st, DriftScheme::Centered, &mut dv, &mut du).unwrap();
        assert!(dv.iter().chain(&du).all(|x| *x == 0.0));
    }

    #[test]
    fn affine_drift_is_exact() {
        let g = GasParams::new(2.0, 1e-12).unwrap();
        let prof = build_shock_profile(1.0, 0.5, 2.0, &g, &ProfileOptions::default()).unwrap();
        let pr = InflowProblem::new(prof, 0.0, 5.0, Grid::new(10.0, 100).unwrap()).unwrap();
        let slope = 0.03;
        let st = SimState {
            t: 0.0,
            v: pr.grid.nodes().map(|x| 1.0 + slope * x).collect(),
            u: vec![0.5; pr.grid.len()],
        };
        let n = pr.grid.len();
        let (mut dv, mut du) = (vec![0.0; n], vec![0.0; n]);
        pr.spatial_residual(&st, DriftScheme::Centered, &mut dv, &mut du).unwrap();
        for &d in &dv[1..n - 1] {
            assert!((d - pr.s_minus * slope).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_rejects_nonpositive_volume() {
        let pr = problem(50, 10.0, 5.0);
        let mut st = SimState::constant(&pr.grid, pr.w_minus());
        st.v[7] = -0.1;
        let n = pr.grid.len();
        let (mut dv, mut du) = (vec![0.0; n], vec![0.0; n]);
        assert!(matches!(
            pr.spatial_residual(&st, DriftScheme::Centered, &mut dv, &mut du),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn profile_residual_converges_second_order() {
        let err = |cells: usize| {
            let pr = problem(cells, 40.0, 20.0);
            let st = pr.profile_state(0.0);
            let n = pr.grid.len();
            let (mut dv, mut du) = (vec![0.0; n], vec![0.0; n]);
            pr.spatial_residual(&st, DriftScheme::Centered, &mut dv, &mut du).unwrap();
            // the exact solution has v_t = -(s - s_-) V'
            let rel = pr.relative_speed();
            (1..n - 1)
                .map(|j| {
                    let x = pr.grid.node(j);
                    let (vp, up) = pr.profile.slope(pr.profile_arg(x, 0.0));
                    (dv[j] + rel * vp).abs().max((du[j] + rel * up).abs())
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(400), err(800));
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.2, "order {order} ({e1}, {e2})");
    }

    #[test]
    fn stable_dt_formula() {
        let pr = problem(1000, 10.0, 5.0);
        let st = SimState::constant(&pr.grid, EndState { v: 1.0, u: 0.5 });
        // dxi = 0.01: advective 0.01/(0.5 + sqrt 2), diffusive 1e-4 * 1 / 2
        let dt = pr.stable_dt(&st, 0.4).unwrap();
        let expect = 0.4 * (0.01 / (0.5 + 2f64.sqrt())).min(1e-4 / 2.0);
        assert!((dt - expect).abs() < 1e-18);
        assert!((dt - 2e-5).abs() < 1e-15);
        let fine = problem(2000, 10.0, 5.0);
        let st2 = SimState::constant(&fine.grid, EndState { v: 1.0, u: 0.5 });
        assert!((fine.stable_dt(&st2, 0.4).unwrap() - dt / 4.0).abs() < 1e-18);
        assert!(pr.stable_dt(&st, 1.5).is_err());
    }

    #[test]
    fn inviscid_limit_dt_is_advective() {
        let g = GasParams::new(2.0, 1e-9).unwrap();
        let prof = build_shock_profile(1.0, 0.5, 2.0, &g, &ProfileOptions { max_step_decay_lengths: 1.0, ..Default::default() }).unwrap();
        let pr = InflowProblem::new(prof, 0.0, 5.0, Grid::new(10.0, 100).unwrap()).unwrap();
        let st = SimState::constant(&pr.grid, pr.w_minus());
        let dt = pr.stable_dt(&st, 1.0).unwrap();
        assert!((dt - 0.1 / (0.5 + 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn constant_state_steps_to_itself() {
        // with beta large the far field equals v_- to machine precision
        let pr = problem(100, 10.0, 200.0);
        let st = SimState::constant(&pr.grid, pr.w_minus());
        let mut s = Solver::new(&pr, st.clone(), SolverOptions::default()).unwrap();
        let dt = s.stable_dt().unwrap();
        for _ in 0..10 {
            s.step(dt).unwrap();
        }
        assert_eq!(s.state().v, st.v);
        assert_eq!(s.state().u, st.u);
        let before = s.state().clone();
        assert_eq!(s.step(0.0).unwrap(), 0);
        assert_eq!(s.state(), &before);
    }

    #[test]
    fn boundary_node_is_exact_after_every_step() {
        let pr = problem(300, 30.0, 6.0);
        let init = pr.profile_state(0.0);
        let mut s = Solver::new(&pr, init, SolverOptions::default()).unwrap();
        let mut count = 0;
        s.run(0.5, 0.1, |ev, st| {
            if ev == Event::Step {
                assert_eq!(st.v[0].to_bits(), 1.0f64.to_bits());
                assert_eq!(st.u[0].to_bits(), 0.5f64.to_bits());
                count += 1;
            }
            Ok(())
        })
        .unwrap();
        assert!(count > 10);
    }

    #[test]
    fn run_to_current_time_emits_single_snapshot() {
        let pr = problem(100, 20.0, 10.0);
        let mut s = Solver::new(&pr, pr.profile_state(0.0), SolverOptions::default()).unwrap();
        let mut snaps = 0;
        let summary = s
            .run(0.0, 1.0, |ev, _| {
                if let Event::Snapshot(_) = ev {
                    snaps += 1;
                }
                Ok(())
            })
            .unwrap();
        assert_eq!(snaps, 1);
        assert_eq!(summary.steps, 0);
        assert!(s.run(-1.0, 1.0, |_, _| Ok(())).is_err());
    }

    #[test]
    fn snapshots_land_on_cadence() {
        let pr = problem(100, 20.0, 10.0);
        let mut s = Solver::new(&pr, pr.profile_state(0.0), SolverOptions::default()).unwrap();
        let mut times = Vec::new();
        s.run(0.35, 0.1, |ev, st| {
            if let Event::Snapshot(_) = ev {
                times.push(st.t);
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().take(4).enumerate() {
            assert!((t - 0.1 * k as f64).abs() < 1e-12);
        }
        assert!((times[4] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn positivity_failure_is_reported() {
        let pr = problem(100, 20.0, 10.0);
        let mut init = pr.profile_state(0.0);
        // a deep, sharp dip that an oversized step drives negative
        init.v[50] = 1e-3;
        let opts = SolverOptions { max_retries: 0, ..Default::default() };
        let mut s = Solver::new(&pr, init, opts).unwrap();
        let r = s.step(0.05);
        assert!(matches!(r, Err(Error::Positivity { .. }) | Err(Error::BlowUp { .. })), "{r:?}");
    }

    #[test]
    fn timeout_returns_partial_summary() {
        let pr = problem(2000, 40.0, 20.0);
        let opts = SolverOptions { wall_clock_budget: Some(Duration::from_millis(1)), ..Default::default() };
        let mut s = Solver::new(&pr, pr.profile_state(0.0), opts).unwrap();
        let summary = s.run(1000.0, 1.0, |_, _| Ok(())).unwrap();
        assert_eq!(summary.status, RunStatus::TimedOut);
        assert!(summary.t_final < 1000.0);
    }
}
