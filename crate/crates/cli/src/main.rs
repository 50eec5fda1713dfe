//! `inflow`: command-line driver for profile construction, state
//! classification, single runs, parameter sweeps and the acceptance suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use inflow_shock::config::{OutputFormat, RunConfig};
use inflow_shock::experiment::{run_to_directory, ArtifactOptions};
use inflow_shock::gas::{classify, curve_memberships, sonic_intersection, sound_speed, EndState, WaveCurve};
use inflow_shock::io::{sha256_hex, write_json, write_profile_csv, ProfileMetadata};
use inflow_shock::profile::{build_shock_profile, ProfileOptions};
use inflow_shock::solver::RunStatus;
use inflow_shock::sweep::{sweep, write_sweep_csv, SweepAxis};
use inflow_shock::verify::{run_all, KNOWN_UNATTAINABLE};
use inflow_shock::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "inflow", version, about = "Viscous 2-shock inflow experiments")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output root; overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and verification (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,
    /// Print nothing except errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the shock profile and write it as CSV.
    Profile {
        /// Number of uniformly spaced samples in the CSV.
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Report flow regions, wave-curve memberships and the sonic point.
    Classify,
    /// Run one experiment and write its run directory.
    Simulate {
        /// Run directory suffix; defaults to a prefix of the config hash.
        #[arg(long)]
        tag: Option<String>,
    },
    /// Run the base config once per value of one parameter.
    Sweep {
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. `4,5,6`.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Cells for the long perturbed runs.
        #[arg(long, default_value_t = 4000)]
        cells: usize,
    },
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit code and the stage that raised it.
struct Failure {
    code: u8,
    stage: &'static str,
    message: String,
    usage: bool,
}

impl Failure {
    fn from_error(stage: &'static str, e: Error) -> Self {
        let code = match &e {
            Error::Resolution(_) => EXIT_CONFIG,
            other => other.exit_code() as u8,
        };
        Self { code, stage, message: e.to_string(), usage: false }
    }
}

struct Context {
    cfg: RunConfig,
    bytes: Vec<u8>,
    base_dir: PathBuf,
    out: PathBuf,
    quiet: bool,
    jobs: usize,
}

impl Context {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn out_dir(&self) -> Result<&Path, Failure> {
        std::fs::create_dir_all(&self.out).map_err(|e| Failure::from_error("output", e.into()))?;
        Ok(&self.out)
    }
}

fn load(cli: &Cli) -> Result<Context, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure {
        code: EXIT_CONFIG,
        stage: "config",
        message: "--config PATH is required for this command".into(),
        usage: true,
    })?;
    let (cfg, bytes) = RunConfig::load(path).map_err(|e| Failure { usage: true, ..Failure::from_error("config", e) })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    Ok(Context { cfg, bytes, base_dir, out, quiet: cli.quiet, jobs: cli.jobs })
}

fn cmd_profile(ctx: &Context, points: usize) -> Result<(), Failure> {
    let g = ctx.cfg.gas_params().map_err(|e| Failure::from_error("config", e))?;
    let st = &ctx.cfg.states;
    let p = build_shock_profile(st.v_minus, st.u_minus, st.v_plus, &g, &ProfileOptions::default())
        .map_err(|e| Failure::from_error("profile", e))?;
    let dir = ctx.out_dir()?;
    let csv = dir.join("profile.csv");
    write_profile_csv(&csv, &p, p.xi_left, p.xi_right, points).map_err(|e| Failure::from_error("output", e))?;
    let meta = dir.join("profile.json");
    write_json(&meta, &ProfileMetadata::of(&p)).map_err(|e| Failure::from_error("output", e))?;

    let monotone = p.samples().windows(2).all(|w| w[1].v > w[0].v);
    let inside = p.samples().iter().all(|s| s.v > p.v_minus && s.v < p.v_plus);
    let (fit_minus, fit_plus) = p.fitted_tail_rates();
    ctx.say(format!("w-        = ({}, {})", p.v_minus, p.u_minus));
    ctx.say(format!("w+        = ({}, {:.10})", p.v_plus, p.u_plus));
    ctx.say(format!("s         = {:.10}", p.s));
    ctx.say(format!("delta     = {}", p.delta));
    ctx.say(format!("c-        = {:.6}   (tail fit {:.6})", p.c_minus, fit_minus));
    ctx.say(format!("c+        = {:.6}   (tail fit {:.6})", p.c_plus, fit_plus));
    ctx.say(format!("monotone  = {monotone}"));
    ctx.say(format!("in range  = {inside}"));
    ctx.say(format!("ode resid = {:.3e}", p.ode_residual()));
    ctx.say(format!("samples   = {}", p.samples().len()));
    ctx.say(format!("wrote {} and {}", csv.display(), meta.display()));
    Ok(())
}

fn curve_name(c: WaveCurve) -> &'static str {
    match c {
        WaveCurve::S2FromMinus => "S2(w-)",
        WaveCurve::BlPlus => "BL+ (v > v-)",
        WaveCurve::BlMinus => "BL- (v < v-)",
        WaveCurve::R1FromSonic => "R1(w*)",
        WaveCurve::R2FromSonic => "R2(w*)",
        WaveCurve::S2FromSonic => "S2(w*)",
    }
}

fn region_text(w: &EndState, g: &inflow_shock::GasParams) -> String {
    if w.u > 0.0 {
        match classify(w, g) {
            Ok(r) => format!("{r:?}"),
            Err(e) => format!("unclassified ({e})"),
        }
    } else {
        let c = sound_speed(w.v, g).unwrap_or(f64::NAN);
        format!("outside the inflow regions (u <= 0, |u|/c = {:.4})", w.u.abs() / c)
    }
}

fn cmd_classify(ctx: &Context) -> Result<(), Failure> {
    let g = ctx.cfg.gas_params().map_err(|e| Failure::from_error("config", e))?;
    let st = &ctx.cfg.states;
    if st.u_minus.is_nan() || st.u_minus <= 0.0 {
        return Err(Failure {
            code: EXIT_CONFIG,
            stage: "classify",
            message: format!("inflow requires u_- > 0, got {}", st.u_minus),
            usage: false,
        });
    }
    let wm = EndState::new(st.v_minus, st.u_minus).map_err(|e| Failure::from_error("classify", e))?;
    let u_plus = match st.u_plus {
        Some(u) => u,
        None => inflow_shock::gas::rh_closure(&wm, st.v_plus, &g)
            .map(|(w, _)| w.u)
            .map_err(|e| Failure::from_error("classify", e))?,
    };
    let wp = EndState::new(st.v_plus, u_plus).map_err(|e| Failure::from_error("classify", e))?;
    let star = sonic_intersection(&wm, &g).map_err(|e| Failure::from_error("classify", e))?;

    ctx.say(format!("w- = ({}, {})  region: {}", wm.v, wm.u, region_text(&wm, &g)));
    ctx.say(format!(
        "w+ = ({}, {:.10}){}  region: {}",
        wp.v,
        wp.u,
        if st.u_plus.is_none() { " [u+ from jump relations]" } else { "" },
        region_text(&wp, &g)
    ));
    ctx.say(format!("sonic point w* = ({:.10}, {:.10})", star.v, star.u));
    if wp == wm {
        ctx.say("w+ coincides with the anchor w-: it lies on every curve through w-");
        return Ok(());
    }
    let tol = 1e-6 * wm.u.abs().max(1.0);
    let members = curve_memberships(&wm, &wp, &g, tol).map_err(|e| Failure::from_error("classify", e))?;
    let mut any = false;
    for m in &members {
        let dist = m.distance.map_or("out of range".to_string(), |d| format!("{d:.3e}"));
        let mark = if m.on_curve { "on" } else { "  " };
        ctx.say(format!("  {mark} {:<14} distance {dist}", curve_name(m.curve)));
        any |= m.on_curve;
    }
    if !any {
        ctx.say(format!("  w+ lies on none of the curves (tolerance {tol:.1e})"));
    }
    Ok(())
}

fn artifacts(cfg: &RunConfig) -> ArtifactOptions {
    ArtifactOptions {
        snapshots_and_diagnostics_csv: cfg.output.formats.contains(&OutputFormat::Csv),
        report_json: cfg.output.formats.contains(&OutputFormat::Json),
    }
}

fn run_stage(e: &Error) -> &'static str {
    match e {
        Error::Config(_) | Error::Resolution(_) => "config",
        Error::Positivity { .. } | Error::BlowUp { .. } | Error::Timeout { .. } => "integration",
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => "output",
        _ => "construction",
    }
}

fn cmd_simulate(ctx: &Context, tag: Option<String>) -> Result<(), Failure> {
    let spec = ctx.cfg.experiment_spec(&ctx.base_dir).map_err(|e| Failure::from_error("config", e))?;
    let hash = sha256_hex(&ctx.bytes);
    let tag = tag.unwrap_or_else(|| hash[..12].to_string());
    let root = ctx.out_dir()?;
    let (prepared, out, dir) =
        run_to_directory(&spec, &hash, root, &tag, artifacts(&ctx.cfg)).map_err(|e| Failure::from_error(run_stage(&e), e))?;
    let p = &prepared.problem;
    ctx.say(format!("run directory  {}", dir.display()));
    ctx.say(format!("grid           L = {:.3}, N = {}, dxi = {:.3e}", p.grid.length, p.grid.cells, p.grid.dxi));
    ctx.say(format!("shift          sigma = {:.6e}, beta = {:.4}", p.sigma, p.beta));
    ctx.say(format!(
        "integration    t = {:.4} in {} steps ({} rejected)",
        out.summary.t_final, out.summary.steps, out.summary.rejected_steps
    ));
    let s = &out.stability;
    ctx.say(format!(
        "stability      {:?}: sup dev {:.3e} -> {:.3e}, tail slope {:.3e}, C2 = {:.3}",
        s.verdict, s.peak_sup_dev, s.final_sup_dev, s.tail_log_slope, s.fitted_c2
    ));
    ctx.say(format!("energy         max E / (E0 + boundary term) = {:.4}", out.energy.empirical_constant));
    ctx.say(format!("shift identity max error {:.3e}", out.boundary.max_shift_identity_error));
    if out.summary.status == RunStatus::TimedOut {
        return Err(Failure {
            code: Error::Timeout { t: out.summary.t_final }.exit_code() as u8,
            stage: "integration",
            message: format!("wall-clock budget exceeded at t = {:.6e}; partial artifacts in {}", out.summary.t_final, dir.display()),
            usage: false,
        });
    }
    Ok(())
}

fn cmd_sweep(ctx: &Context, axis: SweepAxis, values: &[f64]) -> Result<(), Failure> {
    let spec = ctx.cfg.experiment_spec(&ctx.base_dir).map_err(|e| Failure::from_error("config", e))?;
    let summary = sweep(&spec, axis, values, ctx.jobs).map_err(|e| Failure::from_error("sweep", e))?;
    let dir = ctx.out_dir()?;
    let name = format!("sweep_{}", serde_json::to_value(axis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
    let csv = dir.join(format!("{name}.csv"));
    write_sweep_csv(&csv, &summary).map_err(|e| Failure::from_error("output", e))?;
    write_json(&dir.join(format!("{name}.json")), &summary).map_err(|e| Failure::from_error("output", e))?;

    ctx.say(format!("{:>12}  {:>12}  {:>12}  {:>12}  status", "value", "sup_dev", "E ratio", "int|phi(0)|"));
    for r in &summary.rows {
        let status = r.error.as_deref().unwrap_or(match r.status {
            Some(RunStatus::TimedOut) => "timed out",
            _ => "ok",
        });
        ctx.say(format!(
            "{:>12}  {:>12.4e}  {:>12.4}  {:>12.4e}  {status}",
            r.value, r.final_sup_dev, r.max_energy_ratio, r.boundary_integrals[0]
        ));
    }
    if let Some(fit) = &summary.beta_fit {
        ctx.say(format!("beta fit: decay rate {:.4} vs c- = {:.4}", fit.fitted_rate, fit.c_minus));
        for (r, e) in fit.pair_ratios.iter().zip(&fit.expected_ratios) {
            ctx.say(format!("  ratio {:.4e}  expected e^(-c- dbeta) = {:.4e}", r[0], e));
        }
    }
    if let Some(orders) = &summary.grid_orders {
        let text: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
        ctx.say(format!("observed orders: {}", text.join(", ")));
    }
    ctx.say(format!("wrote {}", csv.display()));
    Ok(())
}

fn cmd_verify(cli: &Cli, cells: usize) -> Result<(), Failure> {
    let results = run_all(cells, cli.jobs);
    let mut unexpected = Vec::new();
    for r in &results {
        if !cli.quiet {
            println!("{}", r.line());
        }
        let known = KNOWN_UNATTAINABLE.iter().any(|(id, _)| *id == r.id);
        if !r.passed && !known {
            unexpected.push(r.id);
        }
    }
    if !cli.quiet {
        for (id, why) in KNOWN_UNATTAINABLE {
            println!("note: criterion {id} is expected to fail: {why}");
        }
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::from_error("output", e.into()))?;
        write_json(&dir.join("verify.json"), &results).map_err(|e| Failure::from_error("output", e))?;
    }
    if unexpected.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            stage: "verify",
            message: format!("criteria failed: {unexpected:?}"),
            usage: false,
        })
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Verify { cells } => cmd_verify(cli, *cells),
        Command::Profile { points } => cmd_profile(&load(cli)?, *points),
        Command::Classify => cmd_classify(&load(cli)?),
        Command::Simulate { tag } => cmd_simulate(&load(cli)?, tag.clone()),
        Command::Sweep { axis, values } => cmd_sweep(&load(cli)?, *axis, values),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            if f.usage {
                eprintln!();
                eprintln!("{}", Cli::command().render_usage());
            }
            ExitCode::from(f.code)
        }
    }
}
