//! Collinear and near-collinear quasi-phase-matching solvers for the type-II
//! process: pump polarized along y, down-converted photons along y (H) and
//! z (V), grating vector along x.
//!
//! Non-collinear solutions are restricted to the two principal planes (xy and
//! xz) under the near-collinear approximation: transverse wavevector
//! components of the pair cancel and Poynting walk-off is neglected. Internal
//! angles are capped at 3 degrees, beyond which the approximation is not
//! trusted.

use serde::{Deserialize, Serialize};

use crate::dispersion::{Axis, CrystalSpec};
use crate::error::{Error, Result};
use crate::solver::{brent, find_bracket};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Maximum internal emission angle for the near-collinear approximation (rad).
const MAX_INTERNAL_ANGLE: f64 = 3.0 * std::f64::consts::PI / 180.0;

/// Pump laser parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Center wavelength (nm).
    pub lambda_nm: f64,
    /// FWHM bandwidth (GHz).
    pub bandwidth_ghz: f64,
    /// Power (mW).
    pub power_mw: f64,
}

impl PumpSpec {
    pub fn new(lambda_nm: f64, bandwidth_ghz: f64, power_mw: f64) -> Self {
        assert!(lambda_nm > 0.0 && bandwidth_ghz >= 0.0 && power_mw >= 0.0);
        Self {
            lambda_nm,
            bandwidth_ghz,
            power_mw,
        }
    }

    /// Degenerate down-converted wavelength 2 lambda_p (nm).
    pub fn degenerate_nm(&self) -> f64 {
        2.0 * self.lambda_nm
    }
}

/// Down-converted photon polarization: H along y, V along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn other(self) -> Self {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }
}

/// Principal plane containing the emission directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Xz,
}

impl std::str::FromStr for Plane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Plane::Xy),
            "xz" => Ok(Plane::Xz),
            other => Err(Error::Config(format!("unknown plane '{other}' (use xy or xz)"))),
        }
    }
}

/// A solved phase-match point. Angles are external, signed, measured from the
/// pump axis; the signal (H) is positive, the partner negative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseMatchPoint {
    pub lambda_h_nm: f64,
    pub lambda_v_nm: f64,
    pub theta_h_deg: f64,
    pub theta_v_deg: f64,
    pub t_c: f64,
    pub plane: Plane,
}

impl PhaseMatchPoint {
    /// Swap H and V labels and negate the plane coordinate; centro-symmetry
    /// makes this an equally valid solution.
    pub fn mirrored(&self) -> Self {
        Self {
            lambda_h_nm: self.lambda_h_nm,
            lambda_v_nm: self.lambda_v_nm,
            theta_h_deg: -self.theta_h_deg,
            theta_v_deg: -self.theta_v_deg,
            t_c: self.t_c,
            plane: self.plane,
        }
    }
}

/// Partner wavelength under exact energy conservation (nm).
pub fn partner_wavelength(lambda_p_nm: f64, lambda_nm: f64) -> f64 {
    1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_nm)
}

/// In-plane effective index for a photon of polarization `pol` propagating at
/// internal angle `theta` (rad) from the x axis within `plane`.
///
/// The polarization orthogonal to the plane sees a principal index exactly;
/// the in-plane polarization samples the index ellipse between n_x and the
/// other principal axis.
pub fn effective_index(
    crystal: &CrystalSpec,
    pol: Pol,
    plane: Plane,
    theta: f64,
    lambda_um: f64,
    t_c: f64,
) -> Result<f64> {
    let s = crystal.sellmeier();
    let in_plane_axis = match (plane, pol) {
        (Plane::Xy, Pol::V) => return s.refractive_index(Axis::Z, lambda_um, t_c),
        (Plane::Xz, Pol::H) => return s.refractive_index(Axis::Y, lambda_um, t_c),
        (Plane::Xy, Pol::H) => Axis::Y,
        (Plane::Xz, Pol::V) => Axis::Z,
    };
    let n_main = s.refractive_index(in_plane_axis, lambda_um, t_c)?;
    let n_x = s.refractive_index(Axis::X, lambda_um, t_c)?;
    let s2 = theta.sin().powi(2);
    Ok(1.0 / (s2 / (n_x * n_x) + (1.0 - s2) / (n_main * n_main)).sqrt())
}

fn wavevector(
    crystal: &CrystalSpec,
    pol: Pol,
    plane: Plane,
    theta: f64,
    lambda_um: f64,
    t_c: f64,
) -> Result<f64> {
    Ok(TWO_PI * effective_index(crystal, pol, plane, theta, lambda_um, t_c)? / lambda_um)
}

fn pump_wavevector(crystal: &CrystalSpec, pump: &PumpSpec, t_c: f64) -> Result<f64> {
    let lp_um = pump.lambda_nm * 1e-3;
    Ok(TWO_PI
        * crystal
            .sellmeier()
            .refractive_index(Axis::Y, lp_um, t_c)?
        / lp_um)
}

/// Collinear longitudinal mismatch dk = k_p - k_H - k_V - K (1/um).
pub fn collinear_mismatch(
    lambda_h_nm: f64,
    t_c: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let lambda_v_nm = partner_wavelength(pump.lambda_nm, lambda_h_nm);
    let s = crystal.sellmeier();
    let lh_um = lambda_h_nm * 1e-3;
    let lv_um = lambda_v_nm * 1e-3;
    let kp = pump_wavevector(crystal, pump, t_c)?;
    let kh = TWO_PI * s.refractive_index(Axis::Y, lh_um, t_c)? / lh_um;
    let kv = TWO_PI * s.refractive_index(Axis::Z, lv_um, t_c)? / lv_um;
    Ok(kp - kh - kv - crystal.grating_k(t_c))
}

/// Temperature of the degenerate collinear phase match (degC).
///
/// Brackets a sign change of the collinear mismatch on [20, 200] degC and
/// refines by Brent to well below 1e-4 degC.
pub fn solve_degenerate_collinear_t(crystal: &CrystalSpec, pump: &PumpSpec) -> Result<f64> {
    let lambda_deg = pump.degenerate_nm();
    let f = |t: f64| collinear_mismatch(lambda_deg, t, crystal, pump).unwrap_or(f64::NAN);
    let (a, b) = find_bracket(f, 20.0, 200.0, 180)
        .ok_or_else(|| Error::NoPhaseMatch("no collinear sign change on [20, 200] degC".into()))?;
    let k = crystal.grating_k((a + b) / 2.0);
    brent(f, a, b, 1e-9, 1e-12 * k)
}

/// Full near-collinear QPM residual at internal signal angle `theta_h` for a
/// pair (lambda_h, partner). Returns the longitudinal residual and the
/// partner's internal angle satisfying transverse momentum cancellation.
fn residual_at_internal_angle(
    theta_h: f64,
    lambda_h_nm: f64,
    t_c: f64,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<(f64, f64)> {
    let lambda_v_nm = partner_wavelength(pump.lambda_nm, lambda_h_nm);
    let lh_um = lambda_h_nm * 1e-3;
    let lv_um = lambda_v_nm * 1e-3;
    let kh = wavevector(crystal, Pol::H, plane, theta_h, lh_um, t_c)?;
    let kt = kh * theta_h.sin();
    // partner internal angle from k_V sin(theta_V) = k_H sin(theta_H)
    let g = |tv: f64| {
        wavevector(crystal, Pol::V, plane, tv, lv_um, t_c)
            .map(|kv| kv * tv.sin() - kt)
            .unwrap_or(f64::NAN)
    };
    let kv0 = wavevector(crystal, Pol::V, plane, 0.0, lv_um, t_c)?;
    if kt >= kv0 {
        return Err(Error::NoPhaseMatch(
            "transverse momentum exceeds partner wavevector".into(),
        ));
    }
    let theta_v = if kt == 0.0 {
        0.0
    } else {
        brent(g, 0.0, 0.3, 1e-15, 0.0)?
    };
    let kv = wavevector(crystal, Pol::V, plane, theta_v, lv_um, t_c)?;
    let kp = pump_wavevector(crystal, pump, t_c)?;
    let long = kp - kh * theta_h.cos() - kv * theta_v.cos() - crystal.grating_k(t_c);
    Ok((long, theta_v))
}

/// Snell refraction at the flat exit face (normal along x): internal to
/// external angle.
fn external_angle(n_eff: f64, theta_int: f64) -> f64 {
    (n_eff * theta_int.sin()).asin()
}

/// Internal angle of a photon collected at fixed external angle, by fixed
/// point iteration on the angle-dependent index.
pub fn internal_angle(
    crystal: &CrystalSpec,
    pol: Pol,
    plane: Plane,
    theta_ext: f64,
    lambda_um: f64,
    t_c: f64,
) -> Result<f64> {
    let sin_ext = theta_ext.sin();
    let mut theta = theta_ext;
    for _ in 0..50 {
        let n = effective_index(crystal, pol, plane, theta, lambda_um, t_c)?;
        let next = (sin_ext / n).asin();
        if (next - theta).abs() < 1e-15 {
            return Ok(next);
        }
        theta = next;
    }
    Ok(theta)
}

/// Solve the near-collinear QPM for a signal (H) photon of wavelength
/// `lambda_signal_nm` at temperature `t_c` on the given principal plane.
pub fn noncollinear_emission_angle(
    lambda_signal_nm: f64,
    t_c: f64,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<PhaseMatchPoint> {
    let f = |t: f64| {
        residual_at_internal_angle(t, lambda_signal_nm, t_c, plane, crystal, pump)
            .map(|(r, _)| r)
            .unwrap_or(f64::NAN)
    };
    let r0 = f(1e-12);
    let r1 = f(MAX_INTERNAL_ANGLE);
    if !r0.is_finite() || !r1.is_finite() {
        return Err(Error::NoPhaseMatch("dispersion evaluation failed".into()));
    }
    // Residuals below the tolerance of the temperature/angle solvers are
    // indistinguishable from an exact collinear match.
    if r0.abs() < 1e-10 {
        // collinear limit
        return Ok(PhaseMatchPoint {
            lambda_h_nm: lambda_signal_nm,
            lambda_v_nm: partner_wavelength(pump.lambda_nm, lambda_signal_nm),
            theta_h_deg: 0.0,
            theta_v_deg: 0.0,
            t_c,
            plane,
        });
    }
    // Opening the emission angle only raises the residual (the longitudinal
    // projections shrink), so a root exists iff the collinear residual is
    // negative and the 3-degree residual positive.
    if r0 > 0.0 {
        return Err(Error::NoPhaseMatch(
            "collinear-only or no emission at this temperature".into(),
        ));
    }
    if r1 < 0.0 {
        return Err(Error::NearCollinearViolated {
            angle_deg: MAX_INTERNAL_ANGLE.to_degrees(),
        });
    }
    let theta_h = brent(f, 1e-12, MAX_INTERNAL_ANGLE, 1e-15, 0.0)?;
    let (_, theta_v) =
        residual_at_internal_angle(theta_h, lambda_signal_nm, t_c, plane, crystal, pump)?;
    let lambda_v_nm = partner_wavelength(pump.lambda_nm, lambda_signal_nm);
    let nh = effective_index(crystal, Pol::H, plane, theta_h, lambda_signal_nm * 1e-3, t_c)?;
    let nv = effective_index(crystal, Pol::V, plane, theta_v, lambda_v_nm * 1e-3, t_c)?;
    Ok(PhaseMatchPoint {
        lambda_h_nm: lambda_signal_nm,
        lambda_v_nm,
        theta_h_deg: external_angle(nh, theta_h).to_degrees(),
        theta_v_deg: -external_angle(nv, theta_v).to_degrees(),
        t_c,
        plane,
    })
}

/// External degenerate emission angle at `t_c` on `plane` (deg, >= 0).
pub fn degenerate_external_angle(
    t_c: f64,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    noncollinear_emission_angle(pump.degenerate_nm(), t_c, plane, crystal, pump)
        .map(|p| p.theta_h_deg)
}

/// Small-separation slope of the H/V external-angle difference against the
/// H/V wavelength difference of a pair, near degeneracy (urad/nm).
///
/// Evaluated symmetrically 0.05 nm either side of the degenerate signal
/// wavelength; the difference ratio is odd in the detuning, so averaging the
/// two one-sided secants cancels the leading even error term.
pub fn partner_angle_slope(
    t_c: f64,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let l0 = pump.degenerate_nm();
    let mut last_err = None;
    for delta in [0.05, 0.02, 0.01, 0.005] {
        let mut slopes = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            match noncollinear_emission_angle(l0 + sign * delta, t_c, plane, crystal, pump) {
                Ok(p) => {
                    let dtheta_rad = (p.theta_h_deg + p.theta_v_deg).to_radians(); // theta_v < 0
                    let dlambda_nm = p.lambda_h_nm - p.lambda_v_nm;
                    slopes.push(dtheta_rad / dlambda_nm * 1e6);
                }
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            }
        }
        if slopes.len() == 2 {
            return Ok((slopes[0] + slopes[1]) / 2.0);
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoPhaseMatch("window fully unsolvable".into())))
}

/// d theta / d lambda of the signal emission angle at the degenerate point
/// (deg/nm), central difference with a 0.5 nm step.
pub fn angle_wavelength_slope(
    t_c: f64,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let l0 = pump.degenerate_nm();
    let mut last_err = None;
    // Close to the collinear point the window loses one side (the slope
    // diverges there); shrink until both sides solve.
    for h in [0.25, 0.1, 0.05, 0.02, 0.01] {
        let sides = (
            noncollinear_emission_angle(l0 + h, t_c, plane, crystal, pump),
            noncollinear_emission_angle(l0 - h, t_c, plane, crystal, pump),
        );
        match sides {
            (Ok(p), Ok(m)) => return Ok((p.theta_h_deg - m.theta_h_deg) / (2.0 * h)),
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoPhaseMatch("window fully unsolvable".into())))
}

/// Momentum residuals of a solved point, by direct substitution (test oracle
/// support): (longitudinal 1/um, transverse 1/um).
pub fn momentum_residuals(
    point: &PhaseMatchPoint,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<(f64, f64)> {
    let lh_um = point.lambda_h_nm * 1e-3;
    let lv_um = point.lambda_v_nm * 1e-3;
    let th = internal_angle(
        crystal,
        Pol::H,
        point.plane,
        point.theta_h_deg.to_radians(),
        lh_um,
        point.t_c,
    )?;
    let tv = internal_angle(
        crystal,
        Pol::V,
        point.plane,
        point.theta_v_deg.to_radians(),
        lv_um,
        point.t_c,
    )?;
    let kh = wavevector(crystal, Pol::H, point.plane, th, lh_um, point.t_c)?;
    let kv = wavevector(crystal, Pol::V, point.plane, tv, lv_um, point.t_c)?;
    let kp = pump_wavevector(crystal, pump, point.t_c)?;
    let long = kp - kh * th.cos() - kv * tv.cos() - crystal.grating_k(point.t_c);
    let trans = kh * th.sin() + kv * tv.sin();
    Ok((long, trans))
}
