//! Thermodynamics and wave curves of the gamma-law gas in Lagrangian coordinates.
//!
//! Pressure is `p(v) = v^-gamma` in terms of the specific volume `v = 1/rho`.
//! Everything here is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the band around the sonic curve reported as transonic.
pub const DEFAULT_TRANSONIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub gamma: f64,
    pub mu: f64,
}

impl GasParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("adiabatic exponent must exceed 1, got {gamma}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("viscosity must be positive, got {mu}")));
        }
        Ok(Self { gamma, mu })
    }

    /// Same as [`GasParams::new`] but also admits the isothermal case `gamma = 1`.
    pub fn new_allow_isothermal(gamma: f64, mu: f64) -> Result<Self> {
        if gamma == 1.0 && mu > 0.0 {
            return Ok(Self { gamma, mu });
        }
        Self::new(gamma, mu)
    }
}

/// A point `(v, u)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndState {
    pub v: f64,
    pub u: f64,
}

impl EndState {
    pub fn new(v: f64, u: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("specific volume must be positive, got {v}")));
        }
        Ok(Self { v, u })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowRegion {
    Subsonic,
    Transonic,
    Supersonic,
}

#[inline]
fn check_volume(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("specific volume must be positive, got {v}")))
    }
}

pub fn pressure(v: f64, g: &GasParams) -> Result<f64> {
    check_volume(v)?;
    Ok(v.powf(-g.gamma))
}

pub fn dpressure(v: f64, g: &GasParams) -> Result<f64> {
    check_volume(v)?;
    Ok(-g.gamma * v.powf(-g.gamma - 1.0))
}

/// Unchecked pressure for hot loops where positivity is guaranteed by the caller.
#[inline]
pub(crate) fn p_raw(v: f64, gamma: f64) -> f64 {
    v.powf(-gamma)
}

/// Eulerian sound speed `c(v) = v sqrt(-p'(v))`.
pub fn sound_speed(v: f64, g: &GasParams) -> Result<f64> {
    check_volume(v)?;
    Ok(g.gamma.sqrt() * v.powf(-(g.gamma - 1.0) / 2.0))
}

/// Characteristic speeds `(lambda_1, lambda_2) = (-sqrt(-p'), sqrt(-p'))`.
pub fn char_speeds(v: f64, g: &GasParams) -> Result<(f64, f64)> {
    check_volume(v)?;
    let l2 = g.gamma.sqrt() * v.powf(-(g.gamma + 1.0) / 2.0);
    Ok((-l2, l2))
}

pub fn classify_state(w: &EndState, g: &GasParams, tol: f64) -> Result<FlowRegion> {
    check_volume(w.v)?;
    if !(w.u > 0.0) {
        return Err(Error::domain(format!(
            "flow regions are defined for u > 0 only, got u = {}",
            w.u
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::domain("classification tolerance must be non-negative"));
    }
    let c = sound_speed(w.v, g)?;
    let speed = w.u.abs();
    // a few ulps of slack so exact sonic points survive rounding in c(v)
    let tol = tol + 4.0 * f64::EPSILON * c;
    Ok(if speed < c - tol {
        FlowRegion::Subsonic
    } else if speed > c + tol {
        FlowRegion::Supersonic
    } else {
        FlowRegion::Transonic
    })
}

/// Classification with the default relative transonic band.
pub fn classify(w: &EndState, g: &GasParams) -> Result<FlowRegion> {
    let c = sound_speed(w.v, g)?;
    classify_state(w, g, DEFAULT_TRANSONIC_TOL * c)
}

/// Shock speed `s_i(v_l, v_r)` of family `i` in {1, 2}.
pub fn shock_speed(v_l: f64, v_r: f64, family: u8, g: &GasParams) -> Result<f64> {
    check_volume(v_l)?;
    check_volume(v_r)?;
    if v_l == v_r {
        return Err(Error::DegenerateShock(format!("v_l = v_r = {v_l}")));
    }
    let radicand = (p_raw(v_r, g.gamma) - p_raw(v_l, g.gamma)) / (v_l - v_r);
    let s = radicand.sqrt();
    match family {
        1 => Ok(-s),
        2 => Ok(s),
        other => Err(Error::domain(format!("wave family must be 1 or 2, got {other}"))),
    }
}

/// Closes the 2-shock from `w_minus` to the volume `v_plus`.
///
/// Returns the right state and the shock speed `s = s_2(v_-, v_+)`, with
/// `u_+ = u_- - s (v_+ - v_-)`.
pub fn rh_closure(w_minus: &EndState, v_plus: f64, g: &GasParams) -> Result<(EndState, f64)> {
    let s = shock_speed(w_minus.v, v_plus, 2, g)?;
    let u_plus = w_minus.u - s * (v_plus - w_minus.v);
    Ok((EndState { v: v_plus, u: u_plus }, s))
}

/// Residuals of both jump relations, `s (v+ - v-) - (u- - u+)` and
/// `s (u+ - u-) - (p(v+) - p(v-))`.
pub fn rh_residuals(w_minus: &EndState, w_plus: &EndState, s: f64, g: &GasParams) -> (f64, f64) {
    let mass = s * (w_plus.v - w_minus.v) - (w_minus.u - w_plus.u);
    let momentum =
        s * (w_plus.u - w_minus.u) - (p_raw(w_plus.v, g.gamma) - p_raw(w_minus.v, g.gamma));
    (mass, momentum)
}

/// Lax entropy admissibility `u_r < u_l`.
pub fn entropy_check(u_l: f64, u_r: f64) -> bool {
    u_r < u_l
}

/// Boundary speed `s_- = -u_-/v_-`.
pub fn boundary_speed(w_minus: &EndState) -> f64 {
    -w_minus.u / w_minus.v
}

/// Velocity on the boundary-layer line through `w_minus` at volume `v`.
pub fn bl_line(w_minus: &EndState, v: f64) -> Result<f64> {
    check_volume(v)?;
    check_volume(w_minus.v)?;
    Ok(w_minus.u / w_minus.v * v)
}

/// Intersection `(v*, u*)` of the boundary-layer line with the sonic curve.
pub fn sonic_intersection(w_minus: &EndState, g: &GasParams) -> Result<EndState> {
    check_volume(w_minus.v)?;
    if !(w_minus.u > 0.0) {
        return Err(Error::domain(format!(
            "sonic intersection needs u_- > 0, got {}",
            w_minus.u
        )));
    }
    let slope = w_minus.u / w_minus.v;
    let v_star = (g.gamma.sqrt() / slope).powf(2.0 / (g.gamma + 1.0));
    Ok(EndState {
        v: v_star,
        u: slope * v_star,
    })
}

/// Velocity on the 2-shock curve `S_2(anchor)` at volume `v > anchor.v`.
pub fn s2_curve(anchor: &EndState, v: f64, g: &GasParams) -> Result<f64> {
    check_volume(v)?;
    if !(v > anchor.v) {
        return Err(Error::domain(format!(
            "S2 curve is defined for v > {}, got {v}",
            anchor.v
        )));
    }
    let s = shock_speed(anchor.v, v, 2, g)?;
    Ok(anchor.u - s * (v - anchor.v))
}

/// `int_{a}^{b} lambda_2(v) dv` in closed form.
fn lambda2_integral(a: f64, b: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        return (b / a).ln();
    }
    let k = 2.0 * gamma.sqrt() / (gamma - 1.0);
    let e = -(gamma - 1.0) / 2.0;
    -k * (b.powf(e) - a.powf(e))
}

/// Velocity on the rarefaction curve `R_family(anchor)` at volume `v`.
///
/// `R_1` lives on `v > anchor.v`, `R_2` on `v < anchor.v`; the anchor itself is
/// accepted for both.
pub fn r_curve(anchor: &EndState, v: f64, family: u8, g: &GasParams) -> Result<f64> {
    check_volume(v)?;
    check_volume(anchor.v)?;
    let int_l2 = lambda2_integral(anchor.v, v, g.gamma);
    match family {
        1 if v >= anchor.v => Ok(anchor.u + int_l2),
        2 if v <= anchor.v => Ok(anchor.u - int_l2),
        1 | 2 => Err(Error::domain(format!(
            "R{family} curve through v = {} does not reach v = {v}",
            anchor.v
        ))),
        other => Err(Error::domain(format!("wave family must be 1 or 2, got {other}"))),
    }
}

/// Named wave curves used when locating a right state relative to `w_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveCurve {
    S2FromMinus,
    BlPlus,
    BlMinus,
    R1FromSonic,
    R2FromSonic,
    S2FromSonic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveMembership {
    pub curve: WaveCurve,
    /// `None` when `v_+` lies outside the curve's volume range.
    pub distance: Option<f64>,
    pub on_curve: bool,
}

/// Vertical distances `|u_+ - u_curve(v_+)|` from `w_plus` to each curve of the
/// inflow wave diagram.
pub fn curve_memberships(
    w_minus: &EndState,
    w_plus: &EndState,
    g: &GasParams,
    tol: f64,
) -> Result<Vec<CurveMembership>> {
    let star = sonic_intersection(w_minus, g)?;
    let v = w_plus.v;
    let mut out = Vec::with_capacity(6);
    let mut push = |curve, u: Option<f64>| {
        let distance = u.map(|u| (w_plus.u - u).abs());
        out.push(CurveMembership {
            curve,
            distance,
            on_curve: distance.is_some_and(|d| d <= tol),
        });
    };
    push(
        WaveCurve::S2FromMinus,
        (v > w_minus.v).then(|| s2_curve(w_minus, v, g)).transpose()?,
    );
    push(
        WaveCurve::BlPlus,
        (v > w_minus.v && v <= star.v).then(|| bl_line(w_minus, v)).transpose()?,
    );
    push(
        WaveCurve::BlMinus,
        (v < w_minus.v).then(|| bl_line(w_minus, v)).transpose()?,
    );
    push(
        WaveCurve::R1FromSonic,
        (v >= star.v).then(|| r_curve(&star, v, 1, g)).transpose()?,
    );
    push(
        WaveCurve::R2FromSonic,
        (v <= star.v).then(|| r_curve(&star, v, 2, g)).transpose()?,
    );
    push(
        WaveCurve::S2FromSonic,
        (v > star.v).then(|| s2_curve(&star, v, g)).transpose()?,
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gas(gamma: f64) -> GasParams {
        GasParams::new_allow_isothermal(gamma, 1.0).unwrap()
    }

    #[test]
    fn pressure_values() {
        assert_eq!(pressure(1.0, &gas(2.0)).unwrap(), 1.0);
        assert!((pressure(2.0, &gas(2.0)).unwrap() - 0.25).abs() < 1e-15);
        assert!((pressure(0.5, &gas(1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!(pressure(0.0, &gas(2.0)).is_err());
        assert!(pressure(-1.0, &gas(2.0)).is_err());
    }

    #[test]
    fn dpressure_values() {
        assert!((dpressure(1.0, &gas(2.0)).unwrap() + 2.0).abs() < 1e-15);
        assert!((dpressure(2.0, &gas(2.0)).unwrap() + 0.25).abs() < 1e-15);
        assert!((dpressure(1.0, &gas(1.0)).unwrap() + 1.0).abs() < 1e-15);
        assert!(dpressure(0.0, &gas(2.0)).is_err());
    }

    #[test]
    fn sound_and_characteristic_speeds() {
        for v in [0.3, 1.0, 7.0] {
            assert!((sound_speed(v, &gas(1.0)).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((sound_speed(1.0, &gas(2.0)).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((sound_speed(2.0, &gas(2.0)).unwrap() - 1.0).abs() < 1e-14);
        let (l1, l2) = char_speeds(1.0, &gas(2.0)).unwrap();
        assert!((l1 + 2f64.sqrt()).abs() < 1e-14 && (l2 - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(char_speeds(1.0, &gas(1.0)).unwrap(), (-1.0, 1.0));
    }

    #[test]
    fn classification() {
        let g = gas(2.0);
        let sub = EndState::new(1.0, 0.5).unwrap();
        let sup = EndState::new(1.0, 2.0).unwrap();
        let trans = EndState::new(2.0, 1.0).unwrap();
        assert_eq!(classify_state(&sub, &g, 0.0).unwrap(), FlowRegion::Subsonic);
        assert_eq!(classify_state(&sup, &g, 0.0).unwrap(), FlowRegion::Supersonic);
        assert_eq!(classify_state(&trans, &g, 0.0).unwrap(), FlowRegion::Transonic);
        let bad = EndState { v: 1.0, u: 0.0 };
        assert!(classify_state(&bad, &g, 0.0).is_err());
    }

    #[test]
    fn shock_speed_examples() {
        let g = gas(2.0);
        assert!((shock_speed(1.0, 2.0, 2, &g).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((shock_speed(1.0, 2.0, 1, &g).unwrap() + 0.75f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            shock_speed(1.0, 1.0, 2, &g),
            Err(Error::DegenerateShock(_))
        ));
    }

    #[test]
    fn rh_closure_example() {
        let g = gas(2.0);
        let wm = EndState::new(1.0, 0.5).unwrap();
        let (wp, s) = rh_closure(&wm, 2.0, &g).unwrap();
        assert!((s - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!((wp.u - (0.5 - 0.866_025_403_784_438_6)).abs() < 1e-15);
        let (r1, r2) = rh_residuals(&wm, &wp, s, &g);
        assert!(r1.abs() < 1e-15 && r2.abs() < 1e-15);
        assert!(entropy_check(wm.u, wp.u));
        assert!(rh_closure(&wm, 1.0, &g).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy_check(0.5, -0.366));
        assert!(!entropy_check(1.0, 1.0));
        assert!(!entropy_check(0.0, 1.0));
    }

    #[test]
    fn bl_line_and_sonic_point() {
        let g = gas(2.0);
        let wm = EndState::new(1.0, 0.5).unwrap();
        assert_eq!(bl_line(&wm, 2.0).unwrap(), 1.0);
        assert_eq!(bl_line(&wm, 1.0).unwrap(), 0.5);
        assert_eq!(boundary_speed(&wm), -0.5);
        let star = sonic_intersection(&wm, &g).unwrap();
        assert!((star.v - 2.0).abs() < 1e-14 && (star.u - 1.0).abs() < 1e-14);
        assert_eq!(classify(&star, &g).unwrap(), FlowRegion::Transonic);
        let again = sonic_intersection(&star, &g).unwrap();
        assert!((again.v - star.v).abs() < 1e-14 && (again.u - star.u).abs() < 1e-14);
        assert!(sonic_intersection(&EndState { v: 1.0, u: -0.1 }, &g).is_err());
    }

    #[test]
    fn s2_curve_examples() {
        let g = gas(2.0);
        let a = EndState::new(1.0, 0.5).unwrap();
        let u = s2_curve(&a, 2.0, &g).unwrap();
        assert!((u - (0.5 - 0.75f64.sqrt())).abs() < 1e-15);
        let near = s2_curve(&a, 1.0 + 1e-12, &g).unwrap();
        assert!((near - 0.5).abs() < 1e-11);
        assert!(s2_curve(&a, 1.0, &g).is_err());
        assert!(s2_curve(&a, 0.5, &g).is_err());
    }

    #[test]
    fn r_curve_examples() {
        let g = gas(2.0);
        let a = EndState::new(1.0, 1.0).unwrap();
        assert_eq!(r_curve(&a, 1.0, 1, &g).unwrap(), 1.0);
        assert!((r_curve(&a, 4.0, 1, &g).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(r_curve(&a, 0.5, 1, &g).is_err());
        assert!(r_curve(&a, 2.0, 2, &g).is_err());
        // isothermal: int lambda_2 = ln(v/va)
        let iso = gas(1.0);
        assert!((r_curve(&a, 0.5, 2, &iso).unwrap() - (1.0 - 0.5f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn memberships_locate_rh_state() {
        let g = gas(2.0);
        let wm = EndState::new(1.0, 0.5).unwrap();
        let (wp, _) = rh_closure(&wm, 2.0, &g).unwrap();
        let m = curve_memberships(&wm, &wp, &g, 1e-6).unwrap();
        let s2 = m.iter().find(|c| c.curve == WaveCurve::S2FromMinus).unwrap();
        assert!(s2.on_curve);
        let blm = m.iter().find(|c| c.curve == WaveCurve::BlMinus).unwrap();
        assert!(blm.distance.is_none());
    }

    proptest! {
        #[test]
        fn pressure_decreasing_convex(v in 0.05f64..20.0, gamma in 1.01f64..3.0) {
            let g = gas(gamma);
            prop_assert!(dpressure(v, &g).unwrap() < 0.0);
            let h = 1e-3 * v;
            let second = (pressure(v + h, &g).unwrap() - 2.0 * pressure(v, &g).unwrap()
                + pressure(v - h, &g).unwrap()) / (h * h);
            prop_assert!(second > 0.0);
        }

        #[test]
        fn shock_radicand_positive(a in 0.05f64..20.0, b in 0.05f64..20.0, gamma in 1.01f64..3.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let g = gas(gamma);
            let r = (pressure(b, &g).unwrap() - pressure(a, &g).unwrap()) / (a - b);
            prop_assert!(r > 0.0);
            let s_ab = shock_speed(a, b, 2, &g).unwrap();
            let s_ba = shock_speed(b, a, 2, &g).unwrap();
            prop_assert!((s_ab - s_ba).abs() <= 1e-14 * s_ab.abs());
        }

        #[test]
        fn rh_relations_hold(vm in 0.1f64..5.0, um in -2.0f64..2.0, ratio in 1.001f64..4.0, gamma in 1.01f64..3.0) {
            let g = gas(gamma);
            let wm = EndState::new(vm, um).unwrap();
            let (wp, s) = rh_closure(&wm, vm * ratio, &g).unwrap();
            let (r1, r2) = rh_residuals(&wm, &wp, s, &g);
            let scale = 1.0 + um.abs() + wp.u.abs() + pressure(vm, &g).unwrap();
            prop_assert!(r1.abs() < 1e-12 * scale);
            prop_assert!(r2.abs() < 1e-12 * scale);
            prop_assert!(entropy_check(wm.u, wp.u));
        }

        #[test]
        fn sonic_point_on_both_curves(vm in 0.1f64..5.0, frac in 0.01f64..0.99, gamma in 1.01f64..3.0) {
            let g = gas(gamma);
            let um = frac * sound_speed(vm, &g).unwrap();
            let wm = EndState::new(vm, um).unwrap();
            let star = sonic_intersection(&wm, &g).unwrap();
            prop_assert!((star.u - bl_line(&wm, star.v).unwrap()).abs() < 1e-10 * (1.0 + star.u));
            prop_assert!((star.u - sound_speed(star.v, &g).unwrap()).abs() < 1e-10 * (1.0 + star.u));
            prop_assert!(star.v > vm);
        }

        #[test]
        fn lax_inequalities_along_s2(vm in 0.1f64..5.0, ratio in 1.001f64..5.0, gamma in 1.01f64..3.0) {
            let g = gas(gamma);
            let vp = vm * ratio;
            let s = shock_speed(vm, vp, 2, &g).unwrap();
            prop_assert!(char_speeds(vp, &g).unwrap().1 < s);
            prop_assert!(s < char_speeds(vm, &g).unwrap().1);
        }

        #[test]
        fn classification_stable_under_small_perturbation(v in 0.2f64..5.0, frac in 0.1f64..3.0) {
            let g = gas(2.0);
            let c = sound_speed(v, &g).unwrap();
            let u = frac * c;
            prop_assume!((u - c).abs() > 1e-6);
            let base = classify_state(&EndState { v, u }, &g, 0.0).unwrap();
            let nudged = classify_state(&EndState { v, u: u + 1e-3 * (u - c).abs() }, &g, 0.0).unwrap();
            prop_assert_eq!(base, nudged);
        }

        #[test]
        fn r1_increasing(v1 in 1.0f64..5.0, dv in 0.01f64..5.0) {
            let g = gas(2.0);
            let a = EndState { v: 1.0, u: 0.3 };
            prop_assert!(r_curve(&a, v1 + dv, 1, &g).unwrap() > r_curve(&a, v1, 1, &g).unwrap());
        }
    }
}
