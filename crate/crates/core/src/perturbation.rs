//! Initial data around the shifted shock: exponent validation, the scaled
//! large-oscillation perturbation family, the shift `sigma`, the boundary
//! datum `A(t)` and assembly of `(v0, u0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::grid::Grid;
use crate::profile::ShockProfile;
use crate::quadrature::{derivative, simpson};

/// Exponents `(l, alpha, kappa, h)` and strength `delta` of a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub l: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub h: f64,
    pub delta: f64,
}

impl ExponentSet {
    /// `theta = kappa + l - (alpha - (gamma + 1) l / 2)`.
    pub fn theta(&self, gamma: f64) -> f64 {
        self.kappa + self.l - (self.alpha - (gamma + 1.0) * self.l / 2.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub theta: f64,
    pub checks: Vec<InequalityCheck>,
    pub valid: bool,
}

impl ExponentReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Evaluates every strict inequality constraining the exponents.
pub fn check_exponents(e: &ExponentSet, g: &GasParams) -> ExponentReport {
    let gm = g.gamma;
    let theta = e.theta(gm);
    let reduced = e.alpha - (gm + 1.0) * e.l / 2.0;
    let mut checks = Vec::new();
    let mut lt = |name: &'static str, lhs: f64, rhs: f64| {
        checks.push(InequalityCheck { name, lhs, rhs, holds: lhs < rhs });
    };
    lt("-l < 0 (l >= 0)", -e.l, f64::MIN_POSITIVE);
    lt("0 < delta", 0.0, e.delta);
    lt("delta < 1", e.delta, 1.0);
    lt("(gamma+2) l < 1", (gm + 2.0) * e.l, 1.0);
    lt("(6 gamma+4) l < alpha", (6.0 * gm + 4.0) * e.l, e.alpha);
    lt("0 < alpha", 0.0, e.alpha);
    lt("alpha < kappa", e.alpha, e.kappa);
    lt("(gamma+2) l / 2 < h", (gm + 2.0) * e.l / 2.0, e.h);
    lt("0 < h", 0.0, e.h);
    lt("h < 7/4 (alpha - (gamma+1) l / 2)", e.h, 1.75 * reduced);
    lt("0 < theta", 0.0, theta);
    lt(
        "theta < (gamma-1)/(4(gamma^2+3gamma-2)) (alpha - (gamma+1) l / 2)",
        theta,
        (gm - 1.0) / (4.0 * (gm * gm + 3.0 * gm - 2.0)) * reduced,
    );
    lt("theta < (gamma-1)/(gamma^2+gamma+2)", theta, (gm - 1.0) / (gm * gm + gm + 2.0));
    lt("theta < (gamma-1) h / gamma^2", theta, (gm - 1.0) / (gm * gm) * e.h);
    let valid = checks.iter().all(|c| c.holds);
    ExponentReport { theta, checks, valid }
}

/// Shape function `f(eta)` scaled into the perturbation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Template {
    /// `amplitude (1 - r^2)^4 sin(pi waves r + phase)` with
    /// `r = (eta - center)/half_width`, zero for `|r| >= 1`.
    Bump {
        amplitude: f64,
        center: f64,
        half_width: f64,
        waves: f64,
        phase: f64,
    },
    /// Catmull–Rom interpolation of tabulated values on a uniform `eta` grid,
    /// zero outside the table.
    Tabulated { eta0: f64, deta: f64, values: Vec<f64> },
}

impl Template {
    pub fn default_f() -> Self {
        Template::Bump { amplitude: 0.3, center: 5.0, half_width: 4.0, waves: 2.0, phase: 0.0 }
    }

    pub fn default_g() -> Self {
        Template::Bump { amplitude: 0.2, center: 5.0, half_width: 4.0, waves: 2.0, phase: 0.5 }
    }

    pub fn value(&self, eta: f64) -> f64 {
        match self {
            Template::Bump { amplitude, center, half_width, waves, phase } => {
                let r = (eta - center) / half_width;
                if r.abs() >= 1.0 {
                    return 0.0;
                }
                amplitude * (1.0 - r * r).powi(4) * (std::f64::consts::PI * waves * r + phase).sin()
            }
            Template::Tabulated { eta0, deta, values } => {
                let x = (eta - eta0) / deta;
                let n = values.len() as isize;
                if x < 0.0 || x > (n - 1) as f64 {
                    return 0.0;
                }
                let i = (x.floor() as isize).min(n - 2);
                let t = x - i as f64;
                let at = |k: isize| if k < 0 || k >= n { 0.0 } else { values[k as usize] };
                let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
                0.5 * (2.0 * p1
                    + (-p0 + p2) * t
                    + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                    + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
            }
        }
    }

    /// Support `[a, b]` in `eta`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Template::Bump { center, half_width, .. } => (center - half_width, center + half_width),
            Template::Tabulated { eta0, deta, values } => {
                (*eta0, eta0 + deta * (values.len().saturating_sub(1)) as f64)
            }
        }
    }

    /// Shortest length scale the template carries, in `eta`.
    pub fn feature_length(&self) -> f64 {
        match self {
            Template::Bump { half_width, waves, .. } => 2.0 * half_width / waves.max(1.0),
            Template::Tabulated { deta, .. } => 4.0 * deta,
        }
    }
}

/// Windowed random Fourier series on `[center - half_width, center + half_width]`:
/// `(1 - r^2)^4 sum_k a_k sin(pi k r + phase_k)`, `|a_k| <= amplitude / modes`,
/// tabulated at `points` nodes. Identical seeds give identical templates.
pub fn random_template(seed: u64, modes: usize, amplitude: f64, center: f64, half_width: f64, points: usize) -> Result<Template> {
    use rand::{Rng, SeedableRng};
    if modes == 0 || points < 4 || !(half_width > 0.0) {
        return Err(Error::domain("random template needs modes >= 1, points >= 4 and a positive width"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|_| {
            let a = rng.gen_range(-1.0..=1.0) * amplitude / modes as f64;
            let ph = rng.gen_range(0.0..std::f64::consts::TAU);
            (a, ph)
        })
        .collect();
    let deta = 2.0 * half_width / (points - 1) as f64;
    let values = (0..points)
        .map(|j| {
            let r = -1.0 + 2.0 * j as f64 / (points - 1) as f64;
            let w = (1.0 - r * r).powi(4);
            w * coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * (std::f64::consts::PI * (k + 1) as f64 * r + ph).sin())
                .sum::<f64>()
        })
        .collect();
    Ok(Template::Tabulated { eta0: center - half_width, deta, values })
}

/// Spatial scale factor `delta^(kappa + alpha)` mapping `eta` to `xi`.
pub fn family_scale(e: &ExponentSet) -> f64 {
    e.delta.powf(e.kappa + e.alpha)
}

/// Support of the scaled family in `xi`.
pub fn family_support(f: &Template, g: &Template, e: &ExponentSet) -> (f64, f64) {
    let scale = family_scale(e);
    let (fa, fb) = f.support();
    let (ga, gb) = g.support();
    (fa.min(ga).max(0.0) * scale, fb.max(gb) * scale)
}

/// Samples `phi0 = delta^((3 alpha + kappa)/2) f(delta^(-kappa-alpha) xi)` and
/// the same for `psi0` with `g`.
pub fn family_phi_psi(
    f: &Template,
    g: &Template,
    e: &ExponentSet,
    grid: &Grid,
    min_points_per_feature: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let scale = family_scale(e);
    let feature = f.feature_length().min(g.feature_length()) * scale;
    let points = feature / grid.dxi;
    if points < min_points_per_feature {
        return Err(Error::Resolution(format!(
            "perturbation feature length {feature:.3e} spans {points:.2} cells, need {min_points_per_feature}"
        )));
    }
    let amp = e.delta.powf((3.0 * e.alpha + e.kappa) / 2.0);
    let phi = grid.nodes().map(|x| amp * f.value(x / scale)).collect();
    let psi = grid.nodes().map(|x| amp * g.value(x / scale)).collect();
    Ok((phi, psi))
}

/// Default offset `beta = delta^(-1 + eps)`.
pub fn default_beta(delta: f64, eps: f64) -> f64 {
    delta.powf(-1.0 + eps)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SigmaOptions {
    /// Largest admissible `|v0(L) - v_+|` relative to the strength.
    pub far_field_tol: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { far_field_tol: 1e-2 }
    }
}

/// Shift of the asymptotic profile, from the mass of `v0` against `V(. - beta)`
/// and the mass swept through the boundary.
///
/// Beyond the grid `v0` is continued by the exponential tail with rate `c_+`.
/// The boundary-mass term does not depend on the frame speed, so `s_-` is not
/// an argument.
pub fn compute_sigma(
    v0: &[f64],
    grid: &Grid,
    profile: &ShockProfile,
    beta: f64,
    opts: &SigmaOptions,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if v0.len() != grid.len() {
        return Err(Error::domain("v0 does not match the grid"));
    }
    let far = v0[grid.cells];
    if (far - profile.v_plus).abs() > opts.far_field_tol * profile.delta {
        return Err(Error::Divergence(format!(
            "v0(L) = {far} has not decayed to v+ = {}",
            profile.v_plus
        )));
    }
    let diff: Vec<f64> = grid
        .nodes()
        .zip(v0)
        .map(|(x, &v)| v - profile.v_at(x - beta))
        .collect();
    let inner = simpson(&diff, grid.dxi);
    let tail = -(profile.v_plus - far) / profile.c_plus + profile.deficit_above(grid.length - beta);
    // (s - s_-) int_0^inf (V((s_- - s) tau - beta) - v_-) dtau; substituting
    // y = (s_- - s) tau - beta removes the frame speed entirely.
    let swept = profile.mass_below(-beta);
    Ok((inner + tail - swept) / (profile.v_plus - profile.v_minus))
}

/// `|sigma| <= bound / delta`, the expected size of the shift.
pub fn sigma_within_bound(sigma: f64, delta: f64, bound: f64) -> bool {
    sigma.abs() <= bound / delta
}

/// Position of the shifted profile relative to `xi` at time `t`:
/// `xi - (s - s_-) t + sigma - beta`.
pub fn profile_argument(profile: &ShockProfile, s_minus: f64, sigma: f64, beta: f64, xi: f64, t: f64) -> f64 {
    xi - (profile.s - s_minus) * t + sigma - beta
}

/// `A(t) = -(s - s_-) int_t^inf (V(-(s - s_-) tau + sigma - beta) - v_-) dtau`,
/// the boundary value of the antiderivative perturbation.
pub fn boundary_datum_a(t: f64, profile: &ShockProfile, sigma: f64, beta: f64, s_minus: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("A(t) needs t >= 0, got {t}")));
    }
    Ok(-profile.mass_below(profile_argument(profile, s_minus, sigma, beta, 0.0, t)))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Width of the boundary corrector; `None` picks `max(3 dxi, 1/c_-)`.
    pub corrector_width: Option<f64>,
    /// Constant in `C0^-1 delta^l <= v0 <= C0 (1 + delta^-l)`.
    pub c0: f64,
    pub l: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { corrector_width: None, c0: 10.0, l: 0.0 }
    }
}

/// Initial data on the grid together with its antiderivative perturbations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialData {
    pub v0: Vec<f64>,
    pub u0: Vec<f64>,
    pub phi0: Vec<f64>,
    pub psi0: Vec<f64>,
    pub sigma: f64,
    pub beta: f64,
    pub corrector_width: f64,
    /// Amplitudes of the two corrector shapes added to `phi0` and `psi0`.
    pub corrector_phi: (f64, f64),
    pub corrector_psi: (f64, f64),
}

/// `chi1(0) = 1, chi1'(0) = 0`; `chi2(0) = 0, chi2'(0) = 1`; both vanish to
/// third order at `x = w`. Returns `(chi1, chi1', chi2, chi2')`.
fn corrector_shapes(xi: f64, w: f64) -> (f64, f64, f64, f64) {
    if xi >= w {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let x = xi / w;
    let q = 1.0 - x * x;
    let c1 = q * q * q;
    let d1 = -6.0 * x * q * q / w;
    let m = 1.0 - x;
    let c2 = xi * m.powi(4);
    let d2 = m.powi(4) - 4.0 * x * m.powi(3);
    (c1, d1, c2, d2)
}

/// Builds `v0 = phi0' + V(. + sigma - beta)`, `u0 = psi0' + U(. + sigma - beta)`.
///
/// Smooth boundary correctors are added to `(phi0, psi0)` so that
/// `phi0(0) = A(0)` and `(v0, u0)(0) = (v_-, u_-)` hold exactly. With the
/// first condition the supplied `sigma` is the shift of the assembled data.
#[allow(clippy::too_many_arguments)]
pub fn assemble_initial_data(
    phi0: &[f64],
    psi0: &[f64],
    grid: &Grid,
    profile: &ShockProfile,
    sigma: f64,
    beta: f64,
    s_minus: f64,
    opts: &AssemblyOptions,
) -> Result<InitialData> {
    let n = grid.len();
    if phi0.len() != n || psi0.len() != n {
        return Err(Error::domain("perturbation fields do not match the grid"));
    }
    let h = grid.dxi;
    let width = opts
        .corrector_width
        .unwrap_or_else(|| (3.0 * h).max(1.0 / profile.c_minus));
    if width < 2.0 * h {
        return Err(Error::Resolution(format!(
            "corrector width {width} spans fewer than two cells"
        )));
    }
    let dphi = derivative(phi0, h);
    let dpsi = derivative(psi0, h);
    let a0 = boundary_datum_a(0.0, profile, sigma, beta, s_minus)?;
    let (v_b, u_b) = profile.evaluate(sigma - beta);
    let corr_phi = (a0 - phi0[0], (profile.v_minus - v_b) - dphi[0]);
    let corr_psi = (0.0, (profile.u_minus - u_b) - dpsi[0]);

    let mut v0 = Vec::with_capacity(n);
    let mut u0 = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for (j, x) in grid.nodes().enumerate() {
        let (c1, d1, c2, d2) = corrector_shapes(x, width);
        let (vp, up) = profile.evaluate(x + sigma - beta);
        phi.push(phi0[j] + corr_phi.0 * c1 + corr_phi.1 * c2);
        psi.push(psi0[j] + corr_psi.0 * c1 + corr_psi.1 * c2);
        v0.push(vp + dphi[j] + corr_phi.0 * d1 + corr_phi.1 * d2);
        u0.push(up + dpsi[j] + corr_psi.0 * d1 + corr_psi.1 * d2);
    }
    v0[0] = profile.v_minus;
    u0[0] = profile.u_minus;

    if let Some((j, v)) = v0.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InadmissibleData(format!(
            "v0 = {v} <= 0 at xi = {}",
            grid.node(j)
        )));
    }
    let (lo, hi) = h1_bounds(profile.delta, opts.l, opts.c0);
    let (vmin, vmax) = min_max(&v0);
    if vmin < lo || vmax > hi {
        return Err(Error::InadmissibleData(format!(
            "v0 range [{vmin:.4}, {vmax:.4}] violates [{lo:.4}, {hi:.4}]"
        )));
    }
    Ok(InitialData {
        v0,
        u0,
        phi0: phi,
        psi0: psi,
        sigma,
        beta,
        corrector_width: width,
        corrector_phi: corr_phi,
        corrector_psi: corr_psi,
    })
}

/// `(C0^-1 delta^l, C0 (1 + delta^-l))`.
pub fn h1_bounds(delta: f64, l: f64, c0: f64) -> (f64, f64) {
    (delta.powf(l) / c0, c0 * (1.0 + delta.powf(-l)))
}

pub(crate) fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// `sup - inf` of a sampled field.
pub fn oscillation(field: &[f64]) -> Result<f64> {
    if field.is_empty() {
        return Err(Error::domain("oscillation of an empty field"));
    }
    let (lo, hi) = min_max(field);
    Ok(hi - lo)
}

/// Implied exponent `h` from `u_- ~ delta^h`.
pub fn implied_h(u_minus: f64, delta: f64) -> f64 {
    u_minus.ln() / delta.ln()
}
