//! Spectral intensity, center wavelengths, bandwidths and temperature tuning
//! curves for photons collected in a fixed external mode.
//!
//! The spectral model is the longitudinal-mismatch form
//! sinc^2(dk_long * L_eff / 2) at the fixed collection angle, with the
//! partner direction eliminated through transverse momentum cancellation.

use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalSpec;
use crate::emission::FilterSpec;
use crate::error::{Error, Result};
use crate::phasematch::{
    effective_index, internal_angle, partner_wavelength, Plane, Pol, PumpSpec,
};
use crate::solver::{brent, find_bracket};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Sampled relative spectrum of one polarization at one temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralCurve {
    /// (wavelength nm, relative intensity in [0, 1]) samples.
    pub points: Vec<(f64, f64)>,
    pub pol: Pol,
    pub t_c: f64,
    /// External collection-mode angle (deg).
    pub theta_mode_deg: f64,
}

impl SpectralCurve {
    /// Rescale so the maximum intensity is exactly 1.
    pub fn normalized(mut self) -> Self {
        let max = self
            .points
            .iter()
            .map(|&(_, i)| i)
            .fold(0.0f64, f64::max);
        if max > 0.0 {
            for p in &mut self.points {
                p.1 /= max;
            }
        }
        self
    }
}

/// Longitudinal QPM residual (1/um) for a photon of polarization `pol`
/// collected at fixed external angle `theta_mode` (rad) on `plane`, as a
/// function of its wavelength. `None` when the partner cannot balance the
/// transverse momentum at all.
pub fn longitudinal_mismatch_at_mode(
    lambda_nm: f64,
    t_c: f64,
    theta_mode: f64,
    pol: Pol,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<Option<f64>> {
    let l_um = lambda_nm * 1e-3;
    let partner_nm = partner_wavelength(pump.lambda_nm, lambda_nm);
    if partner_nm <= 0.0 {
        return Err(Error::NoPhaseMatch("partner wavelength unphysical".into()));
    }
    let lp_um = partner_nm * 1e-3;
    let theta_int = internal_angle(crystal, pol, plane, theta_mode, l_um, t_c)?;
    let n_sig = effective_index(crystal, pol, plane, theta_int, l_um, t_c)?;
    let k_sig = TWO_PI * n_sig / l_um;
    let kt = k_sig * theta_int.sin();
    let other = pol.other();
    let k_part0 = TWO_PI * effective_index(crystal, other, plane, 0.0, lp_um, t_c)? / lp_um;
    if kt >= k_part0 {
        return Ok(None);
    }
    let theta_part = if kt == 0.0 {
        0.0
    } else {
        brent(
            |t| {
                effective_index(crystal, other, plane, t, lp_um, t_c)
                    .map(|n| TWO_PI * n / lp_um * t.sin() - kt)
                    .unwrap_or(f64::NAN)
            },
            0.0,
            0.3,
            1e-15,
            0.0,
        )?
    };
    let k_part = TWO_PI * effective_index(crystal, other, plane, theta_part, lp_um, t_c)? / lp_um;
    let s = crystal.sellmeier();
    let lpu = pump.lambda_nm * 1e-3;
    let k_pump = TWO_PI * s.refractive_index(crate::dispersion::Axis::Y, lpu, t_c)? / lpu;
    Ok(Some(
        k_pump - k_sig * theta_int.cos() - k_part * theta_part.cos() - crystal.grating_k(t_c),
    ))
}

/// Relative spectral intensity sinc^2(dk L_eff / 2) in [0, 1].
pub fn spectral_intensity(
    lambda_nm: f64,
    t_c: f64,
    theta_mode_deg: f64,
    pol: Pol,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    spectral_intensity_on_plane(lambda_nm, t_c, theta_mode_deg, pol, Plane::Xy, crystal, pump)
}

pub fn spectral_intensity_on_plane(
    lambda_nm: f64,
    t_c: f64,
    theta_mode_deg: f64,
    pol: Pol,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let dk = longitudinal_mismatch_at_mode(
        lambda_nm,
        t_c,
        theta_mode_deg.to_radians(),
        pol,
        plane,
        crystal,
        pump,
    )?;
    Ok(match dk {
        None => 0.0,
        Some(dk) => {
            let x = dk * crystal.length_um(t_c) / 2.0;
            sinc(x).powi(2)
        }
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Wavelength search window for center/bandwidth solves (nm around 2*lambda_p).
const SEARCH_HALF_WINDOW_NM: f64 = 45.0;

fn search_window(crystal: &CrystalSpec, pump: &PumpSpec) -> (f64, f64) {
    let l0 = pump.degenerate_nm();
    let [min_um, max_um] = crystal.sellmeier().valid_range_um;
    let lo = (l0 - SEARCH_HALF_WINDOW_NM).max(min_um * 1e3 + 1.0);
    let hi = (l0 + SEARCH_HALF_WINDOW_NM).min(max_um * 1e3 - 1.0);
    (lo, hi)
}

/// Center wavelength (nm) of the `pol` photon collected at `theta_mode_deg`:
/// the exactly phase-matched wavelength when one exists in the search window,
/// otherwise the grid argmax of the intensity.
pub fn center_wavelength(
    t_c: f64,
    theta_mode_deg: f64,
    pol: Pol,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let theta = theta_mode_deg.to_radians();
    let (lo, hi) = search_window(crystal, pump);
    let f = |l: f64| {
        longitudinal_mismatch_at_mode(l, t_c, theta, pol, Plane::Xy, crystal, pump)
            .ok()
            .flatten()
            .unwrap_or(f64::NAN)
    };
    if let Some((a, b)) = find_bracket(f, lo, hi, 360) {
        return brent(f, a, b, 1e-7, 0.0);
    }
    // no exact phase match: fall back to the intensity argmax
    let mut best = (0.0f64, lo);
    let n = 2000;
    for i in 0..=n {
        let l = lo + (hi - lo) * i as f64 / n as f64;
        let v = spectral_intensity(l, t_c, theta_mode_deg, pol, crystal, pump)?;
        if v > best.0 {
            best = (v, l);
        }
    }
    if best.0 < 1e-6 {
        return Err(Error::ModeDark { threshold: 1e-6 });
    }
    Ok(best.1)
}

/// Center wavelengths (lambda_H, lambda_V) of a pair with the H photon in the
/// collection mode; the partner follows from exact energy conservation.
pub fn center_wavelengths(
    t_c: f64,
    theta_mode_deg: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<(f64, f64)> {
    let lh = center_wavelength(t_c, theta_mode_deg, Pol::H, crystal, pump)?;
    Ok((lh, partner_wavelength(pump.lambda_nm, lh)))
}

/// FWHM (nm) of the spectral intensity of `pol` at the mode, by bisection on
/// the half-maximum crossings either side of the center.
pub fn bandwidth_fwhm(
    t_c: f64,
    theta_mode_deg: f64,
    pol: Pol,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let lc = center_wavelength(t_c, theta_mode_deg, pol, crystal, pump)?;
    let peak = spectral_intensity(lc, t_c, theta_mode_deg, pol, crystal, pump)?;
    let half = peak / 2.0;
    let g = |l: f64| {
        spectral_intensity(l, t_c, theta_mode_deg, pol, crystal, pump)
            .map(|v| v - half)
            .unwrap_or(f64::NAN)
    };
    let crossing = |dir: f64| -> Result<f64> {
        let mut step = 0.05;
        let mut edge = lc;
        for _ in 0..200 {
            let next = edge + dir * step;
            if g(next) < 0.0 {
                return brent(&g, edge.min(next), edge.max(next), 1e-9, 0.0);
            }
            edge = next;
            step *= 1.3;
        }
        Err(Error::NoPhaseMatch("half-maximum crossing not found".into()))
    };
    let right = crossing(1.0)?;
    let left = crossing(-1.0)?;
    Ok(right - left)
}

/// Linear tuning slopes of the two center-wavelength branches (nm/degC).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningFit {
    pub h_slope_nm_per_c: f64,
    pub v_slope_nm_per_c: f64,
    /// (T, lambda_H, lambda_V) samples behind the fit.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Least-squares linear slope of center wavelength against temperature for
/// both polarizations over `temps`.
pub fn tuning_slope(
    temps: &[f64],
    theta_mode_deg: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<TuningFit> {
    let mut samples = Vec::new();
    for &t in temps {
        if let Ok((lh, lv)) = center_wavelengths(t, theta_mode_deg, crystal, pump) {
            samples.push((t, lh, lv));
        }
    }
    if samples.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "only {} of {} temperatures solvable (need >= 5)",
            samples.len(),
            temps.len()
        )));
    }
    let slope = |sel: fn(&(f64, f64, f64)) -> f64| {
        let n = samples.len() as f64;
        let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
        let ml = samples.iter().map(sel).sum::<f64>() / n;
        let num: f64 = samples.iter().map(|s| (s.0 - mt) * (sel(s) - ml)).sum();
        let den: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
        num / den
    };
    Ok(TuningFit {
        h_slope_nm_per_c: slope(|s| s.1),
        v_slope_nm_per_c: slope(|s| s.2),
        samples,
    })
}

/// Temperature at which the two center-wavelength branches cross (the
/// non-collinear degenerate temperature of the mode).
pub fn branch_crossing_t(
    t_lo: f64,
    t_hi: f64,
    theta_mode_deg: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let f = |t: f64| {
        center_wavelengths(t, theta_mode_deg, crystal, pump)
            .map(|(lh, lv)| lh - lv)
            .unwrap_or(f64::NAN)
    };
    let (a, b) = find_bracket(f, t_lo, t_hi, 40)
        .ok_or_else(|| Error::NoPhaseMatch("branches do not cross in range".into()))?;
    brent(f, a, b, 1e-6, 0.0)
}

/// Temperature at which the degenerate wavelength is exactly phase-matched in
/// the mode (root of the longitudinal mismatch at 2*lambda_p).
pub fn mode_degenerate_t(
    t_lo: f64,
    t_hi: f64,
    theta_mode_deg: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let theta = theta_mode_deg.to_radians();
    let f = |t: f64| {
        longitudinal_mismatch_at_mode(
            pump.degenerate_nm(),
            t,
            theta,
            Pol::H,
            Plane::Xy,
            crystal,
            pump,
        )
        .ok()
        .flatten()
        .unwrap_or(f64::NAN)
    };
    let (a, b) = find_bracket(f, t_lo, t_hi, 80)
        .ok_or_else(|| Error::NoPhaseMatch("mode never degenerate in range".into()))?;
    brent(f, a, b, 1e-8, 0.0)
}

/// Sample a normalized spectral curve on a uniform wavelength grid.
pub fn sample_curve(
    t_c: f64,
    theta_mode_deg: f64,
    pol: Pol,
    lambda_lo_nm: f64,
    lambda_hi_nm: f64,
    step_nm: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<SpectralCurve> {
    let mut points = Vec::new();
    let mut l = lambda_lo_nm;
    while l <= lambda_hi_nm + 1e-12 {
        let v = spectral_intensity(l, t_c, theta_mode_deg, pol, crystal, pump)?;
        points.push((l, v));
        l += step_nm;
    }
    Ok(SpectralCurve {
        points,
        pol,
        t_c,
        theta_mode_deg,
    }
    .normalized())
}

/// Convolve a sampled curve with a transmission filter and renormalize.
///
/// The filter kernel is centered on zero detuning (its center wavelength
/// shifts the whole kernel): what a scanning monochromator of that passband
/// would record.
pub fn convolve_with_filter(curve: &SpectralCurve, filter: &FilterSpec) -> SpectralCurve {
    let n = curve.points.len();
    if n < 2 {
        return curve.clone();
    }
    let step = curve.points[1].0 - curve.points[0].0;
    let half_width = 4.0 * filter.fwhm_nm;
    let m = (half_width / step).ceil() as i64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n as i64 {
        let mut acc = 0.0;
        let mut norm = 0.0;
        for j in -m..=m {
            let idx = i + j;
            if idx < 0 || idx >= n as i64 {
                continue;
            }
            let w = filter.transmission_at_detuning(j as f64 * step);
            acc += w * curve.points[idx as usize].1;
            norm += w;
        }
        out.push((curve.points[i as usize].0, if norm > 0.0 { acc / norm } else { 0.0 }));
    }
    SpectralCurve {
        points: out,
        pol: curve.pol,
        t_c: curve.t_c,
        theta_mode_deg: curve.theta_mode_deg,
    }
    .normalized()
}

/// FWHM (nm) of a sampled curve by linear interpolation at half maximum.
pub fn curve_fwhm(curve: &SpectralCurve) -> Result<f64> {
    let pts = &curve.points;
    let (imax, &(_, peak)) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .ok_or_else(|| Error::InsufficientData("empty curve".into()))?;
    if peak <= 0.0 {
        return Err(Error::InsufficientData("flat curve".into()));
    }
    let half = peak / 2.0;
    let interp = |i0: usize, i1: usize| {
        let (x0, y0) = pts[i0];
        let (x1, y1) = pts[i1];
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut left = None;
    for i in (1..=imax).rev() {
        if pts[i - 1].1 < half && pts[i].1 >= half {
            left = Some(interp(i - 1, i));
            break;
        }
    }
    let mut right = None;
    for i in imax..pts.len() - 1 {
        if pts[i].1 >= half && pts[i + 1].1 < half {
            right = Some(interp(i, i + 1));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::InsufficientData(
            "half-maximum not crossed inside the sampled window".into(),
        )),
    }
}
