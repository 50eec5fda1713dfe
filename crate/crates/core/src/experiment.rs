//! End-to-end runs: profile, shift, initial data, integration and the
//! diagnostics reports, from one [`ExperimentSpec`].

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    boundary_report, energy_summary, stability_report, BoundaryReport, DiagnosticsOptions, DiagnosticsRecord,
    EnergySummary, Monitor, StabilityOptions, StabilityReport,
};
use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::grid::Grid;
use crate::perturbation::{
    assemble_initial_data, check_exponents, compute_sigma, default_beta, family_phi_psi, family_support,
    AssemblyOptions, ExponentSet, InitialData, SigmaOptions, Template,
};
use crate::profile::{build_shock_profile, ProfileOptions, ShockProfile};
use crate::solver::{default_domain_length, Event, InflowProblem, RunSummary, SimState, Solver, SolverOptions};

/// How the initial state departs from the shifted profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    /// Profile data with boundary correctors only.
    None,
    /// The scaled family built from templates `f`, `g` and the exponents.
    Family { f: Template, g: Template, exponents: ExponentSet },
    /// Explicit `(v0, u0)` on the computational grid; the shift is computed.
    Initial { v0: Vec<f64>, u0: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub gas: GasParams,
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub perturbation: PerturbationSpec,
    /// `None` picks `delta^(-1 + beta_eps)`.
    pub beta: Option<f64>,
    pub beta_eps: f64,
    /// `None` picks [`default_domain_length`].
    pub length: Option<f64>,
    pub cells: usize,
    pub t_end: f64,
    pub snapshot_cadence: f64,
    pub min_points_per_feature: f64,
    pub profile: ProfileOptions,
    pub assembly: AssemblyOptions,
    pub sigma: SigmaOptions,
    pub solver: SolverOptions,
    pub diagnostics: DiagnosticsOptions,
    pub stability: StabilityOptions,
}

impl ExperimentSpec {
    /// Unperturbed run with the given geometry and defaults elsewhere.
    pub fn unperturbed(gas: GasParams, v_minus: f64, u_minus: f64, v_plus: f64, beta: f64, length: f64, cells: usize) -> Self {
        Self {
            gas,
            v_minus,
            u_minus,
            v_plus,
            perturbation: PerturbationSpec::None,
            beta: Some(beta),
            beta_eps: 0.1,
            length: Some(length),
            cells,
            t_end: 1.0,
            snapshot_cadence: 0.1,
            min_points_per_feature: 8.0,
            profile: ProfileOptions::default(),
            assembly: AssemblyOptions::default(),
            sigma: SigmaOptions::default(),
            solver: SolverOptions::default(),
            diagnostics: DiagnosticsOptions::default(),
            stability: StabilityOptions::default(),
        }
    }
}

/// Everything needed to start the integration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: InflowProblem,
    pub initial: InitialData,
    pub exponents: Option<ExponentSet>,
    pub theta: f64,
    /// Shift recomputed from the assembled `v0`.
    pub sigma_check: f64,
}

/// Builds the profile, picks `beta` and `L`, assembles the initial data and
/// the moving-frame problem.
pub fn prepare(spec: &ExperimentSpec) -> Result<Prepared> {
    let profile = build_shock_profile(spec.v_minus, spec.u_minus, spec.v_plus, &spec.gas, &spec.profile)?;
    let s_minus = -spec.u_minus / spec.v_minus;
    let beta = spec.beta.unwrap_or_else(|| default_beta(profile.delta, spec.beta_eps));
    if !(beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let (support, exponents) = match &spec.perturbation {
        PerturbationSpec::Family { f, g, exponents } => {
            if (exponents.delta - profile.delta).abs() > 1e-9 * profile.delta {
                return Err(Error::Config(format!(
                    "exponent delta = {} disagrees with v+ - v- = {}",
                    exponents.delta, profile.delta
                )));
            }
            let report = check_exponents(exponents, &spec.gas);
            if !report.valid {
                let names: Vec<&str> = report.failures().map(|c| c.name).collect();
                return Err(Error::Config(format!("exponents violate: {}", names.join("; "))));
            }
            (family_support(f, g, exponents).1, Some(*exponents))
        }
        _ => (0.0, None),
    };
    let length = spec
        .length
        .unwrap_or_else(|| default_domain_length(&profile, s_minus, beta, 0.0, spec.t_end, support));
    if support > 0.8 * length {
        return Err(Error::Config(format!(
            "perturbation support {support:.3} exceeds 0.8 L = {:.3}",
            0.8 * length
        )));
    }
    let grid = Grid::new(length, spec.cells)?;
    let n = grid.len();
    let assembly = AssemblyOptions { l: exponents.map_or(spec.assembly.l, |e| e.l), ..spec.assembly };

    let initial = match &spec.perturbation {
        PerturbationSpec::None => {
            let zero = vec![0.0; n];
            assemble_initial_data(&zero, &zero, &grid, &profile, 0.0, beta, s_minus, &assembly)?
        }
        PerturbationSpec::Family { f, g, exponents } => {
            let (phi, psi) = family_phi_psi(f, g, exponents, &grid, spec.min_points_per_feature)?;
            assemble_initial_data(&phi, &psi, &grid, &profile, 0.0, beta, s_minus, &assembly)?
        }
        PerturbationSpec::Initial { v0, u0 } => {
            if v0.len() != n || u0.len() != n {
                return Err(Error::Config(format!(
                    "initial data has {} nodes, grid has {n}",
                    v0.len()
                )));
            }
            if v0[0] != profile.v_minus || u0[0] != profile.u_minus {
                return Err(Error::Compatibility(format!(
                    "initial boundary value ({}, {}) differs from (v-, u-) = ({}, {})",
                    v0[0], u0[0], profile.v_minus, profile.u_minus
                )));
            }
            initial_from_fields(v0, u0, &grid, &profile, beta, &spec.sigma)?
        }
    };
    let sigma_check = compute_sigma(&initial.v0, &grid, &profile, beta, &spec.sigma)?;
    let theta = exponents.map_or(0.0, |e| e.theta(spec.gas.gamma));
    let problem = InflowProblem::new(profile, initial.sigma, beta, grid)?;
    Ok(Prepared { problem, initial, exponents, theta, sigma_check })
}

/// Wraps explicit `(v0, u0)` with their shift and antiderivative perturbations.
fn initial_from_fields(
    v0: &[f64],
    u0: &[f64],
    grid: &Grid,
    profile: &ShockProfile,
    beta: f64,
    opts: &SigmaOptions,
) -> Result<InitialData> {
    use crate::quadrature::cumulative_from_right;
    if let Some(v) = v0.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InadmissibleData(format!("v0 = {v} is not positive")));
    }
    let sigma = compute_sigma(v0, grid, profile, beta, opts)?;
    let (mut dv, mut du) = (Vec::with_capacity(v0.len()), Vec::with_capacity(v0.len()));
    for (j, x) in grid.nodes().enumerate() {
        let (vv, uu) = profile.evaluate(x + sigma - beta);
        dv.push(v0[j] - vv);
        du.push(u0[j] - uu);
    }
    let neg = |xs: Vec<f64>| xs.into_iter().map(|x| -x).collect::<Vec<f64>>();
    Ok(InitialData {
        v0: v0.to_vec(),
        u0: u0.to_vec(),
        phi0: neg(cumulative_from_right(&dv, grid.dxi)),
        psi0: neg(cumulative_from_right(&du, grid.dxi)),
        sigma,
        beta,
        corrector_width: 0.0,
        corrector_phi: (0.0, 0.0),
        corrector_psi: (0.0, 0.0),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub boundary: BoundaryReport,
    pub stability: StabilityReport,
    pub energy: EnergySummary,
    pub final_state: SimState,
}

/// Integrates a prepared problem to `t_end`, handing each snapshot to `sink`.
pub fn simulate<F>(prepared: &Prepared, spec: &ExperimentSpec, mut sink: F) -> Result<RunOutcome>
where
    F: FnMut(usize, &SimState) -> Result<()>,
{
    let problem = &prepared.problem;
    let init = SimState { t: 0.0, v: prepared.initial.v0.clone(), u: prepared.initial.u0.clone() };
    let mut monitor = Monitor::new(problem, spec.diagnostics);
    let mut solver = Solver::new(problem, init, spec.solver)?;
    let summary = solver.run(spec.t_end, spec.snapshot_cadence, |ev, st| {
        monitor.observe(ev, st)?;
        if let Event::Snapshot(k) = ev {
            sink(k, st)?;
        }
        Ok(())
    })?;
    let boundary = boundary_report(&monitor);
    let records = monitor.into_records();
    let stability = stability_report(&records, problem.profile.delta, problem.gas.gamma, prepared.theta, &spec.stability)?;
    let energy = energy_summary(&records, &problem.profile, problem.beta)?;
    Ok(RunOutcome { summary, records, boundary, stability, energy, final_state: solver.into_state() })
}

/// [`prepare`] followed by [`simulate`] without a snapshot sink.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(Prepared, RunOutcome)> {
    let prepared = prepare(spec)?;
    let outcome = simulate(&prepared, spec, |_, _| Ok(()))?;
    Ok((prepared, outcome))
}

/// Provenance written next to every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tag: String,
    pub config_sha256: String,
    pub crate_version: String,
    pub gas: GasParams,
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    pub u_plus: f64,
    pub s: f64,
    pub s_minus: f64,
    pub delta: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub sigma: f64,
    pub sigma_check: f64,
    pub beta: f64,
    pub theta: f64,
    pub grid: Grid,
    pub far_field_closure: String,
    pub t_end: f64,
    pub snapshot_cadence: f64,
    pub perturbation: PerturbationSpec,
    pub profile_options: ProfileOptions,
    pub assembly: AssemblyOptions,
    pub corrector_width: f64,
    pub sigma_options: SigmaOptions,
    pub solver: SolverOptions,
    pub wall_clock_budget_seconds: Option<f64>,
    pub diagnostics: DiagnosticsOptions,
    pub stability: StabilityOptions,
    pub min_points_per_feature: f64,
    pub summary: Option<RunSummary>,
    pub snapshot_files: Vec<String>,
}

impl Manifest {
    pub fn new(tag: &str, config_sha256: &str, spec: &ExperimentSpec, prepared: &Prepared) -> Self {
        let p = &prepared.problem;
        let mut perturbation = spec.perturbation.clone();
        if let PerturbationSpec::Initial { v0, u0 } = &mut perturbation {
            // the data lives in the referenced file; keep the manifest small
            v0.clear();
            u0.clear();
        }
        Self {
            tag: tag.to_string(),
            config_sha256: config_sha256.to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            gas: p.gas,
            v_minus: p.profile.v_minus,
            u_minus: p.profile.u_minus,
            v_plus: p.profile.v_plus,
            u_plus: p.profile.u_plus,
            s: p.profile.s,
            s_minus: p.s_minus,
            delta: p.profile.delta,
            c_minus: p.profile.c_minus,
            c_plus: p.profile.c_plus,
            sigma: p.sigma,
            sigma_check: prepared.sigma_check,
            beta: p.beta,
            theta: prepared.theta,
            grid: p.grid,
            far_field_closure: "dirichlet_to_shifted_profile".into(),
            t_end: spec.t_end,
            snapshot_cadence: spec.snapshot_cadence,
            perturbation,
            profile_options: spec.profile,
            assembly: spec.assembly,
            corrector_width: prepared.initial.corrector_width,
            sigma_options: spec.sigma,
            solver: spec.solver,
            wall_clock_budget_seconds: spec.solver.wall_clock_budget.map(|d| d.as_secs_f64()),
            diagnostics: spec.diagnostics,
            stability: spec.stability,
            min_points_per_feature: spec.min_points_per_feature,
            summary: None,
            snapshot_files: Vec::new(),
        }
    }
}

/// Verdicts of one run, written to `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub status: crate::solver::RunStatus,
    pub t_final: f64,
    pub stability: StabilityReport,
    pub energy: EnergySummary,
    pub boundary: BoundaryReport,
    pub sigma: f64,
    pub beta: f64,
    pub any_truncation_warning: bool,
}

impl Report {
    pub fn of(prepared: &Prepared, out: &RunOutcome) -> Self {
        Self {
            status: out.summary.status,
            t_final: out.summary.t_final,
            stability: out.stability.clone(),
            energy: out.energy.clone(),
            boundary: out.boundary.clone(),
            sigma: prepared.problem.sigma,
            beta: prepared.problem.beta,
            any_truncation_warning: out.records.iter().any(|r| r.truncation_warning),
        }
    }
}

/// Which artifacts [`run_to_directory`] writes besides the manifest.
#[derive(Debug, Clone, Copy)]
pub struct ArtifactOptions {
    pub snapshots_and_diagnostics_csv: bool,
    pub report_json: bool,
}

/// Runs an experiment and writes `run_<tag>/` under `root`: `manifest.json`,
/// optionally snapshot CSVs, `diagnostics.csv`, `initial.csv` and `report.json`.
/// The manifest is written before the integration starts and rewritten at the end.
pub fn run_to_directory(
    spec: &ExperimentSpec,
    config_sha256: &str,
    root: &std::path::Path,
    tag: &str,
    artifacts: ArtifactOptions,
) -> Result<(Prepared, RunOutcome, std::path::PathBuf)> {
    use crate::io;
    let prepared = prepare(spec)?;
    let dir = io::run_directory(root, tag)?;
    let mut manifest = Manifest::new(tag, config_sha256, spec, &prepared);
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    let grid = prepared.problem.grid;
    let mut files = Vec::new();
    if artifacts.snapshots_and_diagnostics_csv {
        io::write_initial_csv(&dir.join("initial.csv"), &grid, &prepared.initial, prepared.problem.profile.delta, prepared.exponents)?;
    }
    let outcome = simulate(&prepared, spec, |k, st| {
        if artifacts.snapshots_and_diagnostics_csv {
            let path = io::write_snapshot(&dir, k, &grid, st)?;
            files.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
        Ok(())
    })?;
    if artifacts.snapshots_and_diagnostics_csv {
        io::write_diagnostics_csv(&dir.join("diagnostics.csv"), &outcome.records)?;
    }
    if artifacts.report_json {
        io::write_json(&dir.join("report.json"), &Report::of(&prepared, &outcome))?;
    }
    manifest.summary = Some(outcome.summary.clone());
    manifest.snapshot_files = files;
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok((prepared, outcome, dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas() -> GasParams {
        GasParams::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn unperturbed_preparation_is_consistent() {
        let spec = ExperimentSpec::unperturbed(gas(), 1.0, 0.5, 2.0, 6.0, 40.0, 400);
        let p = prepare(&spec).unwrap();
        assert_eq!(p.initial.sigma, 0.0);
        assert!(p.sigma_check.abs() < 1e-4, "{}", p.sigma_check);
        assert_eq!(p.initial.v0[0], 1.0);
    }

    #[test]
    fn explicit_fields_recover_their_shift() {
        let spec = ExperimentSpec::unperturbed(gas(), 1.0, 0.5, 2.0, 6.0, 40.0, 800);
        let base = prepare(&spec).unwrap();
        let shifted = ExperimentSpec {
            perturbation: PerturbationSpec::Initial { v0: base.initial.v0.clone(), u0: base.initial.u0.clone() },
            ..spec
        };
        let p = prepare(&shifted).unwrap();
        assert!(p.initial.sigma.abs() < 1e-4);
        let mut bad = base.initial.v0.clone();
        bad[0] = 1.1;
        let wrong = ExperimentSpec {
            perturbation: PerturbationSpec::Initial { v0: bad, u0: base.initial.u0.clone() },
            ..shifted
        };
        assert!(matches!(prepare(&wrong), Err(Error::Compatibility(_))));
    }

    #[test]
    fn family_with_wrong_delta_is_a_config_error() {
        let mut spec = ExperimentSpec::unperturbed(gas(), 1.0, 0.5, 1.1, 8.0, 300.0, 4000);
        spec.perturbation = PerturbationSpec::Family {
            f: Template::default_f(),
            g: Template::default_g(),
            exponents: ExponentSet { l: 0.0, alpha: 0.2, kappa: 0.205, h: 0.3, delta: 0.2 },
        };
        assert!(matches!(prepare(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn artifacts_are_written_and_deterministic() {
        let root = tempfile::tempdir().unwrap();
        let mut spec = ExperimentSpec::unperturbed(gas(), 1.0, 0.5, 2.0, 5.0, 30.0, 150);
        spec.t_end = 0.3;
        let all = ArtifactOptions { snapshots_and_diagnostics_csv: true, report_json: true };
        let (_, out, dir) = run_to_directory(&spec, "hash", root.path(), "a", all).unwrap();
        for f in ["manifest.json", "report.json", "diagnostics.csv", "initial.csv", "snap_00000.csv", "snap_00003.csv"] {
            assert!(dir.join(f).exists(), "{f}");
        }
        assert_eq!(out.records.len(), 4);
        let (_, _, dir2) = run_to_directory(&spec, "hash", root.path(), "b", all).unwrap();
        let read = |d: &std::path::Path| std::fs::read(d.join("diagnostics.csv")).unwrap();
        assert_eq!(read(&dir), read(&dir2));
        let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["config_sha256"], "hash");
        assert_eq!(manifest["solver"]["cfl"], 0.4);
        assert_eq!(manifest["profile_options"]["tail_tol"], 1e-8);
    }

    #[test]
    fn zero_horizon_run_has_one_record() {
        let mut spec = ExperimentSpec::unperturbed(gas(), 1.0, 0.5, 2.0, 6.0, 40.0, 200);
        spec.t_end = 0.0;
        let (_, out) = run_experiment(&spec).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.summary.steps, 0);
    }
}
