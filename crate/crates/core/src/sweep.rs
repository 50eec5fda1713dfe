//! One-parameter sweeps over `beta`, the strength `delta` or the cell count,
//! run in parallel. A failing run becomes a row with its error; the sweep
//! itself continues.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentSpec, PerturbationSpec};
use crate::profile::linear_fit_slope;
use crate::solver::RunStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Beta,
    Delta,
    Grid,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(SweepAxis::Beta),
            "delta" => Ok(SweepAxis::Delta),
            "grid" => Ok(SweepAxis::Grid),
            other => Err(Error::Config(format!("unknown sweep axis {other:?} (beta, delta, grid)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub error: Option<String>,
    pub status: Option<RunStatus>,
    pub final_sup_dev: f64,
    pub max_energy_ratio: f64,
    /// Time integrals of the six boundary traces at `t_end`.
    pub boundary_integrals: [f64; 6],
    pub shift_identity_error: f64,
    pub c_minus: f64,
    pub steps: u64,
}

impl SweepRow {
    fn failed(value: f64, e: &Error) -> Self {
        Self {
            value,
            error: Some(e.to_string()),
            status: None,
            final_sup_dev: f64::NAN,
            max_energy_ratio: f64::NAN,
            boundary_integrals: [f64::NAN; 6],
            shift_identity_error: f64::NAN,
            c_minus: f64::NAN,
            steps: 0,
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Geometric decrease of the boundary integrals in `beta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaFit {
    pub c_minus: f64,
    /// Least-squares rate of `-ln int |phi(t, 0)|` against `beta`.
    pub fitted_rate: f64,
    /// Successive ratios of each integral, `I_k(beta_{i+1}) / I_k(beta_i)`.
    pub pair_ratios: Vec<[f64; 6]>,
    /// `e^(-c_- (beta_{i+1} - beta_i))`.
    pub expected_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub beta_fit: Option<BetaFit>,
    /// Observed orders `log(e_i / e_{i+1}) / log(N_{i+1} / N_i)` of the final deviation.
    pub grid_orders: Option<Vec<f64>>,
}

/// Copy of `base` with the swept parameter set to `value`.
pub fn spec_for(base: &ExperimentSpec, axis: SweepAxis, value: f64) -> Result<ExperimentSpec> {
    let mut spec = base.clone();
    match axis {
        SweepAxis::Beta => {
            if !(value > 0.0) {
                return Err(Error::Config(format!("beta values must be positive, got {value}")));
            }
            spec.beta = Some(value);
        }
        SweepAxis::Delta => {
            if !(value > 0.0) {
                return Err(Error::Config(format!("delta values must be positive, got {value}")));
            }
            spec.v_plus = spec.v_minus + value;
            if let PerturbationSpec::Family { exponents, .. } = &mut spec.perturbation {
                exponents.delta = value;
            }
        }
        SweepAxis::Grid => {
            if value.fract() != 0.0 || value < 4.0 {
                return Err(Error::Config(format!("grid values must be integers >= 4, got {value}")));
            }
            if matches!(spec.perturbation, PerturbationSpec::Initial { .. }) {
                return Err(Error::Config("grid sweeps cannot reuse tabulated initial data".into()));
            }
            spec.cells = value as usize;
        }
    }
    Ok(spec)
}

fn run_row(base: &ExperimentSpec, axis: SweepAxis, value: f64) -> SweepRow {
    let outcome = spec_for(base, axis, value).and_then(|spec| run_experiment(&spec));
    match outcome {
        Ok((prepared, out)) => SweepRow {
            value,
            error: None,
            status: Some(out.summary.status),
            final_sup_dev: out.records.last().map_or(f64::NAN, |r| r.sup_dev),
            max_energy_ratio: out.energy.empirical_constant,
            boundary_integrals: out.boundary.integrals,
            shift_identity_error: out.boundary.max_shift_identity_error,
            c_minus: prepared.problem.profile.c_minus,
            steps: out.summary.steps,
        },
        Err(e) => SweepRow::failed(value, &e),
    }
}

/// Runs every value on a pool of `jobs` threads (`0` = all cores).
pub fn sweep(base: &ExperimentSpec, axis: SweepAxis, values: &[f64], jobs: usize) -> Result<SweepSummary> {
    if values.len() < 2 {
        return Err(Error::Config("sweep needs >= 2 values".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| values.par_iter().map(|&v| run_row(base, axis, v)).collect());

    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    let beta_fit = (axis == SweepAxis::Beta && good.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = good
            .iter()
            .filter(|r| r.boundary_integrals[0] > 0.0)
            .map(|r| (r.value, r.boundary_integrals[0].ln()))
            .collect();
        let mut pair_ratios = Vec::new();
        let mut expected_ratios = Vec::new();
        for w in good.windows(2) {
            pair_ratios.push(std::array::from_fn(|k| w[1].boundary_integrals[k] / w[0].boundary_integrals[k]));
            expected_ratios.push((-w[0].c_minus * (w[1].value - w[0].value)).exp());
        }
        BetaFit {
            c_minus: good[0].c_minus,
            fitted_rate: if pts.len() >= 2 { -linear_fit_slope(&pts) } else { f64::NAN },
            pair_ratios,
            expected_ratios,
        }
    });
    let grid_orders = (axis == SweepAxis::Grid && good.len() >= 2).then(|| {
        good.windows(2)
            .map(|w| (w[0].final_sup_dev / w[1].final_sup_dev).ln() / (w[1].value / w[0].value).ln())
            .collect()
    });
    Ok(SweepSummary { axis, rows, beta_fit, grid_orders })
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "value",
    "status",
    "final_sup_dev",
    "max_energy_ratio",
    "int_abs_phi",
    "int_abs_phi_xi",
    "int_abs_psi_xi",
    "int_abs_phi_t",
    "int_abs_phi_txi",
    "int_abs_psi_txi",
    "shift_identity_error",
    "c_minus",
    "steps",
    "error",
];

pub fn write_sweep_csv(path: &Path, summary: &SweepSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_COLUMNS)?;
    for r in &summary.rows {
        let status = match (&r.error, r.status) {
            (Some(_), _) => "failed".to_string(),
            (None, Some(RunStatus::Completed)) => "completed".to_string(),
            (None, Some(RunStatus::TimedOut)) => "timed_out".to_string(),
            (None, None) => "unknown".to_string(),
        };
        let mut rec = vec![format!("{}", r.value), status];
        rec.push(format!("{:e}", r.final_sup_dev));
        rec.push(format!("{:e}", r.max_energy_ratio));
        rec.extend(r.boundary_integrals.iter().map(|x| format!("{x:e}")));
        rec.push(format!("{:e}", r.shift_identity_error));
        rec.push(format!("{:e}", r.c_minus));
        rec.push(r.steps.to_string());
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
