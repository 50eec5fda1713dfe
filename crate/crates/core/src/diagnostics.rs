//! Per-snapshot stability quantities: antiderivative perturbations, Sobolev
//! norms, the potential `Phi`, boundary integrals, density bounds and the
//! sup-norm decay of the deviation from the shifted profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{p_raw, GasParams};
use crate::perturbation::{boundary_datum_a, min_max};
use crate::profile::{linear_fit_slope, ShockProfile};
use crate::quadrature::{cumulative_from_right, derivative, trapezoid};
use crate::solver::{Event, InflowProblem, SimState};

/// `e^a - 1 - a` without cancellation near `a = 0`.
fn expm1_minus_id(a: f64) -> f64 {
    if a.abs() >= 0.5 {
        return a.exp_m1() - a;
    }
    let mut term = 0.5 * a * a;
    let mut sum = term;
    let mut k = 2.0;
    while term.abs() > 1e-18 * sum.abs() {
        k += 1.0;
        term *= a / k;
        sum += term;
    }
    sum
}

/// `Phi(v, V) = p(V)(v - V) - int_V^v p`, nonnegative by convexity of `p`.
///
/// With `x = ln(v/V)` both terms are `V^(1-gamma)` times `e^x - 1` and
/// `-(e^(-(gamma-1)x) - 1)/(gamma - 1)`; their linear parts cancel exactly, so
/// only the remainders `e^a - 1 - a` are summed.
pub fn phi_potential(v: f64, vv: f64, g: &GasParams) -> Result<f64> {
    if !(v > 0.0) || !(vv > 0.0) {
        return Err(Error::domain(format!("Phi needs positive volumes, got v = {v}, V = {vv}")));
    }
    let gamma = g.gamma;
    let x = (v / vv).ln();
    let weight = p_raw(vv, gamma) * vv;
    if gamma == 1.0 {
        return Ok(weight * expm1_minus_id(x));
    }
    let k = gamma - 1.0;
    Ok(weight * (expm1_minus_id(x) + expm1_minus_id(-k * x) / k))
}

/// `Phi~(r) = r - 1 + (r^(1-gamma) - 1)/(gamma - 1)` (`r - 1 - ln r` when `gamma = 1`).
pub fn phi_tilde(r: f64, gamma: f64) -> f64 {
    let x = r.ln();
    if gamma == 1.0 {
        return expm1_minus_id(x);
    }
    let k = gamma - 1.0;
    if x.abs() >= 0.5 {
        return r - 1.0 + (r.powf(-k) - 1.0) / k;
    }
    expm1_minus_id(x) + expm1_minus_id(-k * x) / k
}

/// `Phi(v, V) = V^(1-gamma) Phi~(v/V)`: the scale-free form of the potential.
pub fn phi_potential_factorized(v: f64, vv: f64, g: &GasParams) -> Result<f64> {
    if !(v > 0.0) || !(vv > 0.0) {
        return Err(Error::domain(format!("Phi needs positive volumes, got v = {v}, V = {vv}")));
    }
    Ok(vv.powf(1.0 - g.gamma) * phi_tilde(v / vv, g.gamma))
}

/// Discrete L2 norm by the trapezoid rule.
pub fn l2_norm(ys: &[f64], h: f64) -> f64 {
    let sq: Vec<f64> = ys.iter().map(|y| y * y).collect();
    trapezoid(&sq, h).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorms {
    pub l2: f64,
    pub l2_d1: f64,
    pub l2_d2: f64,
    pub h1: f64,
    pub h2: f64,
}

/// `||f||`, `||f'||`, `||f''||` and the H1, H2 norms of a uniformly sampled field.
pub fn sobolev_norms(ys: &[f64], h: f64) -> SobolevNorms {
    let d1 = derivative(ys, h);
    let d2 = derivative(&d1, h);
    let (l2, l2_d1, l2_d2) = (l2_norm(ys, h), l2_norm(&d1, h), l2_norm(&d2, h));
    SobolevNorms {
        l2,
        l2_d1,
        l2_d2,
        h1: l2.hypot(l2_d1),
        h2: (l2 * l2 + l2_d1 * l2_d1 + l2_d2 * l2_d2).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    /// Accumulate boundary and dissipation integrals every `stride` steps.
    pub stride: usize,
    /// `|v - V|` allowed near `xi = L`, relative to the strength.
    pub truncation_tol: f64,
    /// Fraction of the domain, adjacent to `xi = L`, checked for truncation.
    pub truncation_band: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self { stride: 1, truncation_tol: 1e-6, truncation_band: 0.05 }
    }
}

/// Deviation from the shifted profile and its antiderivatives
/// `phi(xi) = -int_xi^L (v - V)`, `psi(xi) = -int_xi^L (u - U)`.
///
/// Beyond `L` the closure pins `(v, u)` to the profile, so no tail term enters.
#[derive(Debug, Clone)]
pub struct PerturbationFields {
    pub v_profile: Vec<f64>,
    pub u_profile: Vec<f64>,
    /// `phi_xi = v - V`.
    pub dv: Vec<f64>,
    /// `psi_xi = u - U`.
    pub du: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub truncation_warning: bool,
}

pub fn antiderivative_fields(problem: &InflowProblem, state: &SimState, opts: &DiagnosticsOptions) -> PerturbationFields {
    let n = problem.grid.len();
    let h = problem.grid.dxi;
    let mut v_profile = vec![0.0; n];
    problem.profile.v_on_grid(problem.profile_arg(0.0, state.t), h, &mut v_profile);
    let u_profile: Vec<f64> = v_profile.iter().map(|&v| problem.profile.u_of_v(v)).collect();
    let dv: Vec<f64> = state.v.iter().zip(&v_profile).map(|(a, b)| a - b).collect();
    let du: Vec<f64> = state.u.iter().zip(&u_profile).map(|(a, b)| a - b).collect();
    let phi = cumulative_from_right(&dv, h).into_iter().map(|x| -x).collect();
    let psi = cumulative_from_right(&du, h).into_iter().map(|x| -x).collect();
    let band = ((opts.truncation_band * n as f64).ceil() as usize).clamp(1, n - 1);
    let limit = opts.truncation_tol * problem.profile.delta;
    let truncation_warning = dv[n - 1 - band..n - 1].iter().any(|x| x.abs() > limit);
    PerturbationFields { v_profile, u_profile, dv, du, phi, psi, truncation_warning }
}

/// Order of the six boundary traces everywhere in this module.
pub const BOUNDARY_TRACE_NAMES: [&str; 6] = ["phi", "phi_xi", "psi_xi", "phi_t", "phi_txi", "psi_txi"];

/// Traces at `xi = 0` given `phi(t, 0)`. The remaining five follow from the
/// boundary condition `(v, u)(t, 0) = (v_-, u_-)` and the equation
/// `phi_t = s_- phi_xi + psi_xi`.
pub fn boundary_traces(problem: &InflowProblem, phi_at_0: f64, t: f64) -> [f64; 6] {
    let p = &problem.profile;
    let arg = problem.profile_arg(0.0, t);
    let (vv, uu) = p.evaluate(arg);
    let (dvv, duu) = p.slope(arg);
    let rel = problem.relative_speed();
    let phi_xi = p.v_minus - vv;
    let psi_xi = p.u_minus - uu;
    [
        phi_at_0,
        phi_xi,
        psi_xi,
        problem.s_minus * phi_xi + psi_xi,
        rel * dvv,
        rel * duu,
    ]
}

/// Bound shapes `delta^k e^(-c_- beta)` of the six boundary integrals.
pub fn boundary_bound_shapes(profile: &ShockProfile, beta: f64) -> [f64; 6] {
    let e = (-profile.c_minus * beta).exp();
    let d = profile.delta;
    [e / d, e, e, e, d * e, d * e]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_norm: f64,
    pub l2_phi: f64,
    pub l2_psi: f64,
    pub l2_phi_xi: f64,
    pub l2_psi_xi: f64,
    pub l2_psi_xixi: f64,
    pub sqrt_phi_potential: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub sup_dev: f64,
    pub phi_at_0: f64,
    pub a_t: f64,
    pub cum_boundary_integrals: [f64; 6],
    pub energy_e: f64,
    pub dissipation_cum: f64,
    pub truncation_warning: bool,
}

impl DiagnosticsRecord {
    /// Column names of [`DiagnosticsRecord::csv_row`].
    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = [
            "t", "sup_norm", "l2_phi", "l2_psi", "l2_phi_xi", "l2_psi_xi", "l2_psi_xixi",
            "sqrt_phi_potential", "v_min", "v_max", "sup_dev", "phi_at_0", "a_t",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(BOUNDARY_TRACE_NAMES.iter().map(|n| format!("int_abs_{n}")));
        h.extend(["energy_e", "dissipation_cum", "truncation_warning"].iter().map(|s| s.to_string()));
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut r: Vec<String> = [
            self.t,
            self.sup_norm,
            self.l2_phi,
            self.l2_psi,
            self.l2_phi_xi,
            self.l2_psi_xi,
            self.l2_psi_xixi,
            self.sqrt_phi_potential,
            self.v_min,
            self.v_max,
            self.sup_dev,
            self.phi_at_0,
            self.a_t,
        ]
        .iter()
        .map(|x| format!("{x:.12e}"))
        .collect();
        r.extend(self.cum_boundary_integrals.iter().map(|x| format!("{x:.12e}")));
        r.push(format!("{:.12e}", self.energy_e));
        r.push(format!("{:.12e}", self.dissipation_cum));
        r.push(u8::from(self.truncation_warning).to_string());
        r
    }
}

/// Full record for one state, given the running integrals.
pub fn snapshot_record(
    problem: &InflowProblem,
    state: &SimState,
    cum_boundary_integrals: [f64; 6],
    dissipation_cum: f64,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsRecord> {
    let h = problem.grid.dxi;
    let f = antiderivative_fields(problem, state, opts);
    let mut potential = Vec::with_capacity(state.v.len());
    for (&v, &vv) in state.v.iter().zip(&f.v_profile) {
        potential.push(phi_potential(v, vv, &problem.gas)?.max(0.0));
    }
    let sqrt_phi_potential = trapezoid(&potential, h).max(0.0).sqrt();
    let (l2_phi, l2_psi) = (l2_norm(&f.phi, h), l2_norm(&f.psi, h));
    let (l2_phi_xi, l2_psi_xi) = (l2_norm(&f.dv, h), l2_norm(&f.du, h));
    let l2_psi_xixi = l2_norm(&derivative(&f.du, h), h);
    let sup = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (v_min, v_max) = min_max(&state.v);
    let a_t = boundary_datum_a(state.t, &problem.profile, problem.sigma, problem.beta, problem.s_minus)?;
    Ok(DiagnosticsRecord {
        t: state.t,
        sup_norm: sup(&f.phi).max(sup(&f.psi)),
        l2_phi,
        l2_psi,
        l2_phi_xi,
        l2_psi_xi,
        l2_psi_xixi,
        sqrt_phi_potential,
        v_min,
        v_max,
        sup_dev: sup(&f.dv).max(sup(&f.du)),
        phi_at_0: f.phi[0],
        a_t,
        cum_boundary_integrals,
        energy_e: l2_phi.powi(2) + l2_psi.powi(2) + sqrt_phi_potential.powi(2) + l2_psi_xi.powi(2),
        dissipation_cum,
        truncation_warning: f.truncation_warning,
    })
}

/// Observer for [`crate::solver::Solver::run`]: accumulates the boundary
/// integrals and the dissipation in time (trapezoid over accepted steps) and
/// stores one [`DiagnosticsRecord`] per snapshot.
pub struct Monitor<'a> {
    problem: &'a InflowProblem,
    opts: DiagnosticsOptions,
    records: Vec<DiagnosticsRecord>,
    cum: [f64; 6],
    dissipation: f64,
    last: Option<(f64, [f64; 6], f64)>,
    steps_seen: usize,
    /// `(t, phi(t, 0), A(t))` at every accumulation point.
    boundary_series: Vec<(f64, f64, f64)>,
    scratch: Vec<f64>,
}

impl<'a> Monitor<'a> {
    pub fn new(problem: &'a InflowProblem, opts: DiagnosticsOptions) -> Self {
        Self {
            problem,
            opts: DiagnosticsOptions { stride: opts.stride.max(1), ..opts },
            records: Vec::new(),
            cum: [0.0; 6],
            dissipation: 0.0,
            last: None,
            steps_seen: 0,
            boundary_series: Vec::new(),
            scratch: vec![0.0; problem.grid.len()],
        }
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }

    pub fn boundary_series(&self) -> &[(f64, f64, f64)] {
        &self.boundary_series
    }

    pub fn cumulative_boundary_integrals(&self) -> [f64; 6] {
        self.cum
    }

    /// `phi(t, 0)` and the dissipation density `int (psi_xi^2 + psi_xixi^2 / v)`.
    fn instantaneous(&mut self, state: &SimState) -> (f64, f64) {
        let p = self.problem;
        let h = p.grid.dxi;
        p.profile.v_on_grid(p.profile_arg(0.0, state.t), h, &mut self.scratch);
        let dv: Vec<f64> = state.v.iter().zip(&self.scratch).map(|(a, b)| a - b).collect();
        let du: Vec<f64> = state
            .u
            .iter()
            .zip(&self.scratch)
            .map(|(a, &vv)| a - p.profile.u_of_v(vv))
            .collect();
        let phi0 = -trapezoid(&dv, h);
        let d2 = derivative(&du, h);
        let density: Vec<f64> = du
            .iter()
            .zip(&d2)
            .zip(&state.v)
            .map(|((a, b), v)| a * a + b * b / v)
            .collect();
        (phi0, trapezoid(&density, h))
    }

    fn accumulate(&mut self, state: &SimState) -> Result<()> {
        if matches!(self.last, Some((t, _, _)) if t == state.t) {
            return Ok(());
        }
        let (phi0, diss) = self.instantaneous(state);
        let traces = boundary_traces(self.problem, phi0, state.t);
        if let Some((t_prev, prev, diss_prev)) = self.last {
            let dt = state.t - t_prev;
            for k in 0..6 {
                self.cum[k] += 0.5 * dt * (prev[k].abs() + traces[k].abs());
            }
            self.dissipation += 0.5 * dt * (diss_prev + diss);
        }
        let p = self.problem;
        let a = boundary_datum_a(state.t, &p.profile, p.sigma, p.beta, p.s_minus)?;
        self.boundary_series.push((state.t, phi0, a));
        self.last = Some((state.t, traces, diss));
        Ok(())
    }

    pub fn observe(&mut self, event: Event, state: &SimState) -> Result<()> {
        match event {
            Event::Step => {
                if self.steps_seen.is_multiple_of(self.opts.stride) {
                    self.accumulate(state)?;
                }
                self.steps_seen += 1;
            }
            Event::Snapshot(_) => {
                self.accumulate(state)?;
                let rec = snapshot_record(self.problem, state, self.cum, self.dissipation, &self.opts)?;
                self.records.push(rec);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Decaying,
    Flat,
    Growing,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilityOptions {
    /// `|d log sup_dev / dt|` below this counts as flat.
    pub tol_slope: f64,
    /// Largest acceptable fitted constant in the density-bound template.
    pub c2_max: f64,
    /// Required `peak / final` reduction of `sup_dev`.
    pub min_reduction: f64,
    /// Runs whose `sup_dev` never exceeds `noise_floor * delta` are reported
    /// flat: their deviation is discretization error, not a perturbation.
    #[serde(default = "default_noise_floor")]
    pub noise_floor: f64,
}

fn default_noise_floor() -> f64 {
    1e-3
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { tol_slope: 1e-3, c2_max: 10.0, min_reduction: 10.0, noise_floor: default_noise_floor() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub theta: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// `delta^(2 theta/(gamma - 1))` and `delta^(-2 theta)`.
    pub template_lower: f64,
    pub template_upper: f64,
    /// Smallest `C2` with `C2^-1 lower <= v <= C2 upper` over the run.
    pub fitted_c2: f64,
    pub positivity_ok: bool,
    pub bounds_ok: bool,
    pub peak_sup_dev: f64,
    pub peak_time: f64,
    pub final_sup_dev: f64,
    pub reduction: f64,
    /// Least-squares slope of `ln sup_dev` over the second half of the run.
    pub tail_log_slope: f64,
    pub verdict: Verdict,
    pub reduction_ok: bool,
}

pub fn stability_report(
    records: &[DiagnosticsRecord],
    delta: f64,
    gamma: f64,
    theta: f64,
    opts: &StabilityOptions,
) -> Result<StabilityReport> {
    let last = records.last().ok_or_else(|| Error::domain("no diagnostics records"))?;
    let v_min = records.iter().map(|r| r.v_min).fold(f64::INFINITY, f64::min);
    let v_max = records.iter().map(|r| r.v_max).fold(f64::NEG_INFINITY, f64::max);
    let exponent_low = if gamma > 1.0 { 2.0 * theta / (gamma - 1.0) } else { 0.0 };
    let template_lower = delta.powf(exponent_low);
    let template_upper = delta.powf(-2.0 * theta);
    let fitted_c2 = (template_lower / v_min).max(v_max / template_upper).max(1.0);
    let (peak_time, peak_sup_dev) = records
        .iter()
        .map(|r| (r.t, r.sup_dev))
        .fold((records[0].t, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let final_sup_dev = last.sup_dev;
    let reduction = if final_sup_dev > 0.0 { peak_sup_dev / final_sup_dev } else { f64::INFINITY };
    let t_half = 0.5 * (records[0].t + last.t);
    let tail: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t >= t_half && r.sup_dev > 0.0)
        .map(|r| (r.t, r.sup_dev.ln()))
        .collect();
    let tail_log_slope = if tail.len() >= 2 { linear_fit_slope(&tail) } else { 0.0 };
    let verdict = if peak_sup_dev <= opts.noise_floor * delta {
        Verdict::Flat
    } else if tail_log_slope < -opts.tol_slope {
        Verdict::Decaying
    } else if tail_log_slope > opts.tol_slope {
        Verdict::Growing
    } else {
        Verdict::Flat
    };
    Ok(StabilityReport {
        theta,
        v_min,
        v_max,
        template_lower,
        template_upper,
        fitted_c2,
        positivity_ok: v_min > 0.0,
        bounds_ok: v_min > 0.0 && fitted_c2 <= opts.c2_max,
        peak_sup_dev,
        peak_time,
        final_sup_dev,
        reduction,
        tail_log_slope,
        verdict,
        reduction_ok: reduction >= opts.min_reduction,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergySummary {
    pub e0: f64,
    pub max_e: f64,
    /// `delta^-1 e^(-c_- beta)`.
    pub boundary_term: f64,
    /// `max_t E / (E(0) + delta^-1 e^(-c_- beta))`.
    pub empirical_constant: f64,
    pub dissipation_final: f64,
    pub dissipation_monotone: bool,
}

pub fn energy_summary(records: &[DiagnosticsRecord], profile: &ShockProfile, beta: f64) -> Result<EnergySummary> {
    let first = records.first().ok_or_else(|| Error::domain("no diagnostics records"))?;
    let e0 = first.energy_e;
    let max_e = records.iter().map(|r| r.energy_e).fold(0.0, f64::max);
    let boundary_term = (-profile.c_minus * beta).exp() / profile.delta;
    Ok(EnergySummary {
        e0,
        max_e,
        boundary_term,
        empirical_constant: max_e / (e0 + boundary_term),
        dissipation_final: records.last().map_or(0.0, |r| r.dissipation_cum),
        dissipation_monotone: records.windows(2).all(|w| w[1].dissipation_cum >= w[0].dissipation_cum),
    })
}

/// Boundary integrals at the final snapshot divided by their bound shapes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub integrals: [f64; 6],
    pub shapes: [f64; 6],
    pub ratios: [f64; 6],
    /// `int |phi_t| <= |s_-| int |phi_xi| + int |psi_xi|`.
    pub triangle_ok: bool,
    /// `max_t |phi(t, 0) - A(t)|` over the accumulation points.
    pub max_shift_identity_error: f64,
}

pub fn boundary_report(monitor: &Monitor<'_>) -> BoundaryReport {
    let p = monitor.problem;
    let integrals = monitor.cum;
    let shapes = boundary_bound_shapes(&p.profile, p.beta);
    let mut ratios = [0.0; 6];
    for k in 0..6 {
        ratios[k] = integrals[k] / shapes[k];
    }
    let slack = 1e-12 * (1.0 + integrals[3]);
    BoundaryReport {
        integrals,
        shapes,
        ratios,
        triangle_ok: integrals[3] <= p.s_minus.abs() * integrals[1] + integrals[2] + slack,
        max_shift_identity_error: monitor
            .boundary_series
            .iter()
            .map(|(_, phi, a)| (phi - a).abs())
            .fold(0.0, f64::max),
    }
}
