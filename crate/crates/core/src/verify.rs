//! The acceptance suite as library functions, shared by the test target and
//! the `verify` command.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{phi_potential, phi_potential_factorized, phi_tilde, sobolev_norms};
use crate::error::Result;
use crate::experiment::{prepare, run_experiment, ExperimentSpec, PerturbationSpec, RunOutcome};
use crate::gas::{r_curve, rh_closure, rh_residuals, s2_curve, sonic_intersection, EndState, GasParams};
use crate::perturbation::{check_exponents, family_phi_psi, ExponentSet, Template};
use crate::profile::{build_shock_profile, ProfileOptions};
use crate::grid::Grid;
use crate::quadrature::gauss3;
use crate::solver::{Solver, SolverOptions};
use crate::sweep::{sweep, SweepAxis};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds
        )
    }
}

fn timed(id: u8, title: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, title: title.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn std_gas() -> GasParams {
    GasParams::new(2.0, 1.0).expect("valid gas")
}

/// Profile of the standard example: jump relations, monotonicity, range and tail rates.
pub fn criterion_1() -> CriterionResult {
    timed(1, "profile correctness", || {
        let start = Instant::now();
        let g = std_gas();
        let p = build_shock_profile(1.0, 0.5, 2.0, &g, &ProfileOptions::default())?;
        let elapsed = start.elapsed().as_secs_f64();
        let (rm, rp) = rh_residuals(&p.w_minus(), &p.w_plus(), p.s, &g);
        let monotone = p.samples().windows(2).all(|w| w[1].v > w[0].v && w[1].xi > w[0].xi);
        let in_range = p.samples().iter().all(|q| q.v > 1.0 && q.v < 2.0);
        let (fm, fp) = p.fitted_tail_rates();
        let (em, ep) = ((fm / 1.4434 - 1.0).abs(), (fp / 1.1547 - 1.0).abs());
        let passed = rm.abs() < 1e-12 && rp.abs() < 1e-12 && monotone && in_range && em < 0.05 && ep < 0.05 && elapsed < 1.0;
        Ok((
            passed,
            format!(
                "RH residuals ({rm:.1e}, {rp:.1e}); monotone {monotone}; V in (1,2) {in_range}; \
                 tail fits c- {fm:.4} ({:.2}%), c+ {fp:.4} ({:.2}%); build {elapsed:.3} s",
                100.0 * em,
                100.0 * ep
            ),
        ))
    })
}

/// Sonic point, S2 closure and the closed-form rarefaction curves.
pub fn criterion_2() -> CriterionResult {
    timed(2, "wave-curve algebra", || {
        let g = std_gas();
        let w = EndState::new(1.0, 0.5)?;
        let star = sonic_intersection(&w, &g)?;
        let e_star = (star.v - 2.0).abs().max((star.u - 1.0).abs());
        let (wp, _) = rh_closure(&w, 2.0, &g)?;
        let e_s2 = (s2_curve(&w, 2.0, &g)? - wp.u).abs();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut e_r: f64 = 0.0;
        for _ in 0..200 {
            let gamma = rng.gen_range(1.05..3.0);
            let gg = GasParams::new(gamma, 1.0)?;
            let anchor = EndState::new(rng.gen_range(0.2..5.0), rng.gen_range(-2.0..2.0))?;
            let family = if rng.gen_bool(0.5) { 1 } else { 2 };
            let v = if family == 1 { anchor.v * rng.gen_range(1.0..4.0) } else { anchor.v * rng.gen_range(0.25..1.0) };
            let closed = r_curve(&anchor, v, family, &gg)?;
            let lam = |x: f64| gamma.sqrt() * x.powf(-(gamma + 1.0) / 2.0);
            let panels = 400;
            let h = (v - anchor.v) / panels as f64;
            let integral: f64 = (0..panels).map(|k| gauss3(lam, anchor.v + k as f64 * h, anchor.v + (k + 1) as f64 * h)).sum();
            let numeric = if family == 1 { anchor.u + integral } else { anchor.u - integral };
            e_r = e_r.max((closed - numeric).abs());
        }
        let passed = e_star <= 1e-10 && e_s2 <= 1e-12 && e_r <= 1e-8;
        Ok((passed, format!("sonic point error {e_star:.1e}; S2 vs closure {e_s2:.1e}; R curves vs quadrature {e_r:.1e} over 200 anchors")))
    })
}

/// Max deviation from the exactly advected profile after `t_end`, starting on it.
pub fn traveling_wave_error(cells: usize, length: f64, beta: f64, t_end: f64) -> Result<f64> {
    let spec = ExperimentSpec::unperturbed(std_gas(), 1.0, 0.5, 2.0, beta, length, cells);
    let p = prepare(&spec)?;
    let mut s = Solver::new(&p.problem, p.problem.profile_state(0.0), SolverOptions::default())?;
    s.run(t_end, t_end.max(1e-12), |_, _| Ok(()))?;
    let exact = p.problem.profile_state(s.state().t);
    Ok(s.state()
        .v
        .iter()
        .zip(&exact.v)
        .chain(s.state().u.iter().zip(&exact.u))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Second-order convergence to the traveling wave.
pub fn criterion_3() -> CriterionResult {
    timed(3, "traveling-wave order", || {
        let t0 = Instant::now();
        let e1 = traveling_wave_error(2000, 60.0, 20.0, 1.0)?;
        let coarse_time = t0.elapsed().as_secs_f64();
        let e2 = traveling_wave_error(4000, 60.0, 20.0, 1.0)?;
        let ratio = e1 / e2;
        let passed = (3.2..=4.8).contains(&ratio) && coarse_time < 120.0;
        Ok((passed, format!("max error N=2000 {e1:.3e}, N=4000 {e2:.3e}, ratio {ratio:.3} (order {:.2}); N=2000 took {coarse_time:.2} s", ratio.log2())))
    })
}

/// `max_t |phi(t, 0) - A(t)|` for an unperturbed run with boundary correctors.
pub fn shift_identity_error(cells: usize) -> Result<f64> {
    let mut spec = ExperimentSpec::unperturbed(std_gas(), 1.0, 0.5, 2.0, 3.0, 40.0, cells);
    spec.t_end = 3.0;
    spec.snapshot_cadence = 0.5;
    let (_, out) = run_experiment(&spec)?;
    Ok(out.boundary.max_shift_identity_error)
}

/// The shift identity holds to second order under refinement.
pub fn criterion_4() -> CriterionResult {
    timed(4, "conservation / shift identity", || {
        let e1 = shift_identity_error(1000)?;
        let e2 = shift_identity_error(2000)?;
        let ratio = e1 / e2;
        Ok((
            (3.2..=4.8).contains(&ratio),
            format!("max |phi(t,0) - A(t)|: N=1000 {e1:.3e}, N=2000 {e2:.3e}, ratio {ratio:.3} (order {:.2})", ratio.log2()),
        ))
    })
}

/// Geometric decrease of the saturated boundary integrals in `beta`.
pub fn criterion_5(jobs: usize) -> CriterionResult {
    timed(5, "boundary-integral rates", || {
        let mut base = ExperimentSpec::unperturbed(std_gas(), 1.0, 0.5, 2.0, 4.0, 50.0, 2000);
        base.t_end = 10.0;
        base.snapshot_cadence = 1.0;
        let c = build_shock_profile(1.0, 0.5, 2.0, &base.gas, &base.profile)?.c_minus;
        let delta_beta = 2.0 / c;
        let s = sweep(&base, SweepAxis::Beta, &[4.0, 4.0 + delta_beta], jobs)?;
        if let Some(r) = s.rows.iter().find(|r| !r.ok()) {
            return Ok((false, format!("run failed: {}", r.error.clone().unwrap_or_default())));
        }
        let fit = s.beta_fit.expect("two successful rows");
        let expected = fit.expected_ratios[0];
        let ratios = fit.pair_ratios[0];
        let worst = ratios.iter().map(|r| (r / expected - 1.0).abs()).fold(0.0, f64::max);
        Ok((
            worst <= 0.15,
            format!(
                "ratios {:?} vs e^(-c- Delta) = {expected:.4}; worst deviation {:.2}%",
                ratios.map(|r| (r * 1e4).round() / 1e4),
                100.0 * worst
            ),
        ))
    })
}

/// Scaling of the family's derivative norms and the exponent validator.
pub fn criterion_6() -> CriterionResult {
    timed(6, "perturbation scaling identities", || {
        let f = Template::default_f();
        let (alpha, kappa) = (1.0, 1.02);
        // reference norms of f', f'' on a fine eta grid
        let (a, b) = f.support();
        let m = 200_000;
        let h_eta = (b - a) / m as f64;
        let fv: Vec<f64> = (0..=m).map(|j| f.value(a + j as f64 * h_eta)).collect();
        let fref = sobolev_norms(&fv, h_eta);
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for &delta in &[0.2, 0.1, 0.05] {
            let e = ExponentSet { l: 0.0, alpha, kappa, h: 1.0, delta };
            let scale = delta.powf(kappa + alpha);
            let grid = Grid::new(b * scale, 100_000)?;
            let (phi, _) = family_phi_psi(&f, &f, &e, &grid, 8.0)?;
            let n = sobolev_norms(&phi, grid.dxi);
            let r1 = n.l2_d1 / (delta.powf(alpha) * fref.l2_d1);
            let r2 = n.l2_d2 / (delta.powf(-kappa) * fref.l2_d2);
            worst = worst.max((r1 - 1.0).abs()).max((r2 - 1.0).abs());
            parts.push(format!("delta {delta}: {r1:.5}, {r2:.5}"));
        }
        let g = std_gas();
        let good = ExponentSet { l: 0.0, alpha: 1.0, kappa: 1.02, h: 1.0, delta: 0.1 };
        let bad = ExponentSet { kappa: 1.5, ..good };
        let accepts = check_exponents(&good, &g).valid;
        let rejects = !check_exponents(&bad, &g).valid;
        Ok((
            worst <= 0.01 && accepts && rejects,
            format!(
                "norm ratios (phi'/delta^a f', phi''/delta^-k f'') {}; worst {:.3}%; accepts kappa=1.02 {accepts}; rejects kappa=1.5 {rejects}",
                parts.join("; "),
                100.0 * worst
            ),
        ))
    })
}

/// Pairs drawn for the potential identities.
pub const POTENTIAL_SAMPLES: usize = 10_000;

/// Nonnegativity of `Phi` and the factorization `Phi = V^(gamma+1) Phi~(v/V)`
/// exactly as stated (it only holds at `V = 1`; the scale-free weight is `V^(1-gamma)`).
pub fn criterion_8() -> CriterionResult {
    timed(8, "potential-function identities", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut nonneg = true;
        let mut literal_fail = 0usize;
        let mut corrected_err: f64 = 0.0;
        let mut zero_at_equal: f64 = 0.0;
        for _ in 0..POTENTIAL_SAMPLES {
            let gamma = rng.gen_range(1.1..3.0);
            let g = GasParams::new(gamma, 1.0)?;
            let v = rng.gen_range(0.1..10.0);
            let vv = rng.gen_range(0.1..10.0);
            let phi = phi_potential(v, vv, &g)?;
            if !(phi > 0.0) && v != vv {
                nonneg = false;
            }
            zero_at_equal = zero_at_equal.max(phi_potential(vv, vv, &g)?.abs());
            let literal = vv.powf(gamma + 1.0) * phi_tilde(v / vv, gamma);
            if (literal - phi).abs() > 1e-12 * phi.abs().max(1e-300) {
                literal_fail += 1;
            }
            let corrected = phi_potential_factorized(v, vv, &g)?;
            corrected_err = corrected_err.max((corrected - phi).abs() / phi.abs().max(1e-300));
        }
        let positivity = nonneg && zero_at_equal <= 1e-12;
        Ok((
            positivity && literal_fail == 0,
            format!(
                "Phi > 0 off the diagonal and 0 on it: {positivity}; V^(gamma+1) factorization fails on {literal_fail}/{POTENTIAL_SAMPLES} pairs; \
                 V^(1-gamma) factorization max rel. error {corrected_err:.1e}"
            ),
        ))
    })
}

/// Parameters of the desk-scale stability run: `gamma = 2`, `delta = 0.1`,
/// exponents `(l, alpha, kappa, h) = (0, 0.2, 0.205, 0.3)`, `beta = delta^-0.9`,
/// horizon `50 / (c_- (s - s_-))`.
pub fn long_run_spec(cells: usize) -> Result<ExperimentSpec> {
    let g = std_gas();
    let e = ExponentSet { l: 0.0, alpha: 0.2, kappa: 0.205, h: 0.3, delta: 0.1 };
    let mut spec = ExperimentSpec::unperturbed(g, 1.0, 0.5, 1.1, 1.0, 1.0, cells);
    spec.beta = None;
    spec.length = None;
    spec.perturbation = PerturbationSpec::Family { f: Template::default_f(), g: Template::default_g(), exponents: e };
    let p = build_shock_profile(1.0, 0.5, 1.1, &g, &spec.profile)?;
    spec.t_end = 50.0 / (p.c_minus * (p.s + 0.5));
    spec.snapshot_cadence = spec.t_end / 200.0;
    Ok(spec)
}

fn judge_7(out: &RunOutcome) -> (bool, String) {
    let st = &out.stability;
    let passed = st.positivity_ok && st.bounds_ok && st.reduction_ok && st.tail_log_slope < 0.0;
    (
        passed,
        format!(
            "v in [{:.4}, {:.4}], template [{:.4}, {:.4}], fitted C2 {:.3}; sup_dev peak {:.3e} -> final {:.3e} ({:.0}x), tail log-slope {:.2e}, verdict {:?}",
            st.v_min, st.v_max, st.template_lower, st.template_upper, st.fitted_c2, st.peak_sup_dev, st.final_sup_dev, st.reduction,
            st.tail_log_slope, st.verdict
        ),
    )
}

/// Desk-scale stability run (criterion 7) and energy-constant refinement
/// stability (criterion 9) from runs at `cells` and `2 cells`.
pub fn criteria_7_and_9(cells: usize, jobs: usize) -> (CriterionResult, CriterionResult) {
    let start = Instant::now();
    let runs: Vec<Result<RunOutcome>> = {
        let go = |n: usize| long_run_spec(n).and_then(|s| run_experiment(&s)).map(|(_, o)| o);
        if jobs == 1 {
            vec![go(cells), go(2 * cells)]
        } else {
            let (a, b) = rayon::join(|| go(cells), || go(2 * cells));
            vec![a, b]
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let c7 = match &runs[0] {
        Ok(out) => {
            let (passed, detail) = judge_7(out);
            CriterionResult { id: 7, title: "desk-scale stability".into(), passed: passed && seconds < 1800.0, detail: format!("N={cells}: {detail}"), seconds }
        }
        Err(e) => CriterionResult { id: 7, title: "desk-scale stability".into(), passed: false, detail: format!("error: {e}"), seconds },
    };
    let c9 = match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => {
            let (ra, rb) = (a.energy.empirical_constant, b.energy.empirical_constant);
            let rel = (rb / ra - 1.0).abs();
            CriterionResult {
                id: 9,
                title: "energy boundedness".into(),
                passed: ra.is_finite() && rb.is_finite() && rel <= 0.2,
                detail: format!(
                    "max E / (E(0) + e^(-c- beta)/delta): N={cells} {ra:.4}, N={} {rb:.4}, change {:.2}%; dissipation monotone {}",
                    2 * cells,
                    100.0 * rel,
                    a.energy.dissipation_monotone && b.energy.dissipation_monotone
                ),
                seconds,
            }
        }
        (Err(e), _) | (_, Err(e)) => CriterionResult { id: 9, title: "energy boundedness".into(), passed: false, detail: format!("error: {e}"), seconds },
    };
    (c7, c9)
}

/// Criteria that cannot pass as stated, with the reason.
pub const KNOWN_UNATTAINABLE: [(u8, &str); 1] = [(
    8,
    "the factorization with weight V^(gamma+1) is not an identity; Phi(v,V) = V^(1-gamma) Phi~(v/V), which agrees only at V = 1",
)];

/// Runs all nine criteria; `cells` sets the resolution of criteria 7 and 9.
pub fn run_all(cells: usize, jobs: usize) -> Vec<CriterionResult> {
    let mut out = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(jobs), criterion_6()];
    let (c7, c9) = criteria_7_and_9(cells, jobs);
    out.push(c7);
    out.push(criterion_8());
    out.push(c9);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for c in [criterion_1(), criterion_2(), criterion_6()] {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn potential_criterion_reports_the_literal_identity() {
        let c = criterion_8();
        assert!(!c.passed);
        assert!(c.detail.contains("Phi > 0 off the diagonal and 0 on it: true"), "{}", c.detail);
        assert!(KNOWN_UNATTAINABLE.iter().any(|(id, _)| *id == 8));
    }

    #[test]
    fn long_run_spec_is_admissible() {
        let s = long_run_spec(4000).unwrap();
        let p = prepare(&s).unwrap();
        assert!((p.problem.beta - 0.1f64.powf(-0.9)).abs() < 1e-12);
        assert!(p.sigma_check.abs() < 1e-3);
        assert!(s.t_end > 130.0 && s.t_end < 140.0);
    }
}
