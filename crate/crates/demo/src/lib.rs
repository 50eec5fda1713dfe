//! Browser bindings: profile, wave curves and a short perturbed run, each
//! returned as a JSON string for the static page in `www/`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use inflow_shock::experiment::{prepare, simulate, ExperimentSpec, PerturbationSpec};
use inflow_shock::gas::{bl_line, classify, r_curve, s2_curve, sonic_intersection, EndState};
use inflow_shock::profile::{build_shock_profile, ProfileOptions};
use inflow_shock::solver::default_domain_length;
use inflow_shock::GasParams;

/// Most nodes sent to the page per curve.
const MAX_PLOT_POINTS: usize = 400;

#[derive(Serialize)]
pub struct ProfileView {
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub u_plus: f64,
    pub s: f64,
    pub delta: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub fitted_c_minus: f64,
    pub fitted_c_plus: f64,
}

pub fn profile_view(gamma: f64, mu: f64, v_minus: f64, u_minus: f64, v_plus: f64, points: usize) -> Result<ProfileView, String> {
    let g = GasParams::new(gamma, mu).map_err(|e| e.to_string())?;
    let p = build_shock_profile(v_minus, u_minus, v_plus, &g, &ProfileOptions::default()).map_err(|e| e.to_string())?;
    let n = points.clamp(2, 4000);
    // the plotted window is a few decay lengths either side of the centre
    let (lo, hi) = (-8.0 / p.c_minus, 8.0 / p.c_plus);
    let xi: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
    let (v, u) = xi.iter().map(|&x| p.evaluate(x)).unzip();
    let (fitted_c_minus, fitted_c_plus) = p.fitted_tail_rates();
    Ok(ProfileView {
        xi,
        v,
        u,
        u_plus: p.u_plus,
        s: p.s,
        delta: p.delta,
        c_minus: p.c_minus,
        c_plus: p.c_plus,
        fitted_c_minus,
        fitted_c_plus,
    })
}

#[derive(Serialize)]
pub struct Curve {
    pub name: &'static str,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Serialize)]
pub struct WaveCurvesView {
    pub region: String,
    pub sonic: EndState,
    /// The sonic curve `u = c(v)` over the plotted range.
    pub sonic_curve: Curve,
    pub curves: Vec<Curve>,
}

fn sample_curve(name: &'static str, lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Option<f64>) -> Curve {
    let (mut v, mut u) = (Vec::new(), Vec::new());
    if hi > lo {
        for j in 0..n {
            let x = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            if let Some(y) = f(x).filter(|y| y.is_finite()) {
                v.push(x);
                u.push(y);
            }
        }
    }
    Curve { name, v, u }
}

pub fn wave_curves_view(gamma: f64, v_minus: f64, u_minus: f64, v_max: f64, points: usize) -> Result<WaveCurvesView, String> {
    let g = GasParams::new(gamma, 1.0).map_err(|e| e.to_string())?;
    let wm = EndState::new(v_minus, u_minus).map_err(|e| e.to_string())?;
    let star = sonic_intersection(&wm, &g).map_err(|e| e.to_string())?;
    let region = format!("{:?}", classify(&wm, &g).map_err(|e| e.to_string())?);
    let n = points.clamp(2, 2000);
    let v_lo = 0.25 * v_minus.min(star.v);
    let v_hi = v_max.max(1.5 * star.v);
    // endpoints are nudged inward where a curve is only defined on an open range
    let eps = 1e-9 * (v_hi - v_lo);
    let curves = vec![
        sample_curve("S2(w-)", v_minus + eps, v_hi, n, |v| s2_curve(&wm, v, &g).ok()),
        sample_curve("BL line", v_lo, star.v, n, |v| bl_line(&wm, v).ok()),
        sample_curve("R1(w*)", star.v, v_hi, n, |v| r_curve(&star, v, 1, &g).ok()),
        sample_curve("R2(w*)", v_lo, star.v, n, |v| r_curve(&star, v, 2, &g).ok()),
        sample_curve("S2(w*)", star.v + eps, v_hi, n, |v| s2_curve(&star, v, &g).ok()),
    ];
    let sonic_curve = sample_curve("u = c(v)", v_lo, v_hi, n, |v| inflow_shock::gas::sound_speed(v, &g).ok());
    Ok(WaveCurvesView { region, sonic: star, sonic_curve, curves })
}

#[derive(Serialize)]
pub struct Frame {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Shifted profile `V` at the same nodes.
    pub v_ref: Vec<f64>,
}

#[derive(Serialize)]
pub struct SimulationView {
    pub xi: Vec<f64>,
    pub frames: Vec<Frame>,
    pub t: Vec<f64>,
    pub sup_dev: Vec<f64>,
    pub l2_phi: Vec<f64>,
    pub sigma: f64,
    pub beta: f64,
    pub length: f64,
    pub verdict: String,
    pub steps: u64,
}

/// Shifted profile plus a Gaussian bump of height `amplitude` in `v` centred
/// on the shock, run to `t_end` with `frames` evenly spaced snapshots.
#[allow(clippy::too_many_arguments)]
pub fn simulation_view(
    gamma: f64,
    mu: f64,
    v_minus: f64,
    u_minus: f64,
    v_plus: f64,
    beta: f64,
    amplitude: f64,
    cells: usize,
    t_end: f64,
    frames: usize,
) -> Result<SimulationView, String> {
    if cells > 20_000 || t_end > 200.0 {
        return Err("demo runs are capped at 20000 cells and t_end = 200".into());
    }
    let g = GasParams::new(gamma, mu).map_err(|e| e.to_string())?;
    let p = build_shock_profile(v_minus, u_minus, v_plus, &g, &ProfileOptions::default()).map_err(|e| e.to_string())?;
    let width = 2.0 / p.c_minus.min(p.c_plus);
    let s_minus = -u_minus / v_minus;
    let length = default_domain_length(&p, s_minus, beta, 0.0, t_end, 6.0 * width);
    let mut spec = ExperimentSpec::unperturbed(g, v_minus, u_minus, v_plus, beta, length, cells);
    spec.t_end = t_end;
    spec.snapshot_cadence = (t_end / frames.max(1) as f64).max(1e-9);

    let base = prepare(&spec).map_err(|e| e.to_string())?;
    let grid = base.problem.grid;
    let mut v0: Vec<f64> = grid
        .nodes()
        .zip(&base.initial.v0)
        .map(|(x, v)| v + amplitude * (-((x - beta) / width).powi(2)).exp())
        .collect();
    // the Gaussian tail must not touch the boundary value
    v0[0] = base.initial.v0[0];
    spec.perturbation = PerturbationSpec::Initial { v0, u0: base.initial.u0.clone() };
    let prepared = prepare(&spec).map_err(|e| e.to_string())?;
    let problem = &prepared.problem;

    let stride = grid.len().div_ceil(MAX_PLOT_POINTS).max(1);
    let thin = |xs: &[f64]| xs.iter().step_by(stride).copied().collect::<Vec<f64>>();
    let xi = thin(&grid.nodes().collect::<Vec<_>>());
    let mut out_frames = Vec::new();
    let outcome = simulate(&prepared, &spec, |_, st| {
        let reference = problem.profile_state(st.t);
        out_frames.push(Frame { t: st.t, v: thin(&st.v), u: thin(&st.u), v_ref: thin(&reference.v) });
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(SimulationView {
        xi,
        frames: out_frames,
        t: outcome.records.iter().map(|r| r.t).collect(),
        sup_dev: outcome.records.iter().map(|r| r.sup_dev).collect(),
        l2_phi: outcome.records.iter().map(|r| r.l2_phi).collect(),
        sigma: problem.sigma,
        beta: problem.beta,
        length: grid.length,
        verdict: format!("{:?}", outcome.stability.verdict),
        steps: outcome.summary.steps,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn profile(gamma: f64, mu: f64, v_minus: f64, u_minus: f64, v_plus: f64, points: usize) -> Result<String, JsError> {
    to_js(profile_view(gamma, mu, v_minus, u_minus, v_plus, points))
}

#[wasm_bindgen]
pub fn wave_curves(gamma: f64, v_minus: f64, u_minus: f64, v_max: f64, points: usize) -> Result<String, JsError> {
    to_js(wave_curves_view(gamma, v_minus, u_minus, v_max, points))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_short(
    gamma: f64,
    mu: f64,
    v_minus: f64,
    u_minus: f64,
    v_plus: f64,
    beta: f64,
    amplitude: f64,
    cells: usize,
    t_end: f64,
    frames: usize,
) -> Result<String, JsError> {
    to_js(simulation_view(gamma, mu, v_minus, u_minus, v_plus, beta, amplitude, cells, t_end, frames))
}
