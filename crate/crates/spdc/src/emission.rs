//! Ring images on the detection (yz) plane and one-dimensional cross-section
//! scans of the down-converted light through a bandpass filter.

use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::phasematch::{noncollinear_emission_angle, partner_wavelength, Plane, Pol, PumpSpec};
use crate::spectrum::spectral_intensity;

/// Passband shape of an interference filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterShape {
    Gaussian,
    TopHat,
}

/// Bandpass (interference) filter in front of the collection optics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
    pub shape: FilterShape,
}

impl FilterSpec {
    pub fn gaussian(center_nm: f64, fwhm_nm: f64) -> Self {
        Self {
            center_nm,
            fwhm_nm,
            shape: FilterShape::Gaussian,
        }
    }

    /// Transmission at detuning `d` nm from the filter center, peak 1.
    pub fn transmission_at_detuning(&self, d_nm: f64) -> f64 {
        match self.shape {
            FilterShape::Gaussian => {
                (-4.0 * std::f64::consts::LN_2 * (d_nm / self.fwhm_nm).powi(2)).exp()
            }
            FilterShape::TopHat => {
                if d_nm.abs() <= self.fwhm_nm / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Transmission at absolute wavelength (nm).
    pub fn transmission_at(&self, lambda_nm: f64) -> f64 {
        self.transmission_at_detuning(lambda_nm - self.center_nm)
    }
}

/// Closed emission ring of one polarization on the yz detection plane, in
/// external-angle coordinates (deg).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingCurve {
    /// (y, z) angular coordinates (deg), closed (last point repeats first).
    pub points: Vec<(f64, f64)>,
    pub t_c: f64,
    pub lambda_nm: f64,
    pub pol: Pol,
    /// Semi-axis along y (xy-plane solution, deg).
    pub semi_axis_y_deg: f64,
    /// Semi-axis along z (xz-plane solution, deg).
    pub semi_axis_z_deg: f64,
}

/// External emission angle (deg, >= 0) of a photon of polarization `pol` and
/// wavelength `lambda_nm` on a principal plane.
pub fn emission_angle(
    lambda_nm: f64,
    t_c: f64,
    pol: Pol,
    plane: Plane,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    match pol {
        Pol::H => noncollinear_emission_angle(lambda_nm, t_c, plane, crystal, pump)
            .map(|p| p.theta_h_deg),
        Pol::V => noncollinear_emission_angle(
            partner_wavelength(pump.lambda_nm, lambda_nm),
            t_c,
            plane,
            crystal,
            pump,
        )
        .map(|p| p.theta_v_deg.abs()),
    }
}

/// Emission ring of one polarization, interpolated between the two
/// principal-plane solutions with an ellipse through the four crossings.
pub fn ring_curve(
    t_c: f64,
    lambda_nm: f64,
    pol: Pol,
    n_points: usize,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<RingCurve> {
    let a_y = emission_angle(lambda_nm, t_c, pol, Plane::Xy, crystal, pump)?;
    let a_z = emission_angle(lambda_nm, t_c, pol, Plane::Xz, crystal, pump)?;
    let n = n_points.max(8);
    let points = (0..=n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            (a_y * t.cos(), a_z * t.sin())
        })
        .collect();
    Ok(RingCurve {
        points,
        t_c,
        lambda_nm,
        pol,
        semi_axis_y_deg: a_y,
        semi_axis_z_deg: a_z,
    })
}

/// Ellipticity e = sqrt(1 - (b/a)^2) of a ring from an axis-aligned
/// least-squares ellipse fit A y^2 + B z^2 = 1.
pub fn ellipticity(ring: &RingCurve) -> Result<f64> {
    if ring.points.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "ellipse fit needs >= 8 points, got {}",
            ring.points.len()
        )));
    }
    // normal equations of the linear least-squares problem in (A, B)
    let (mut s40, mut s22, mut s04, mut s20, mut s02) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(y, z) in &ring.points {
        let (y2, z2) = (y * y, z * z);
        s40 += y2 * y2;
        s22 += y2 * z2;
        s04 += z2 * z2;
        s20 += y2;
        s02 += z2;
    }
    let det = s40 * s04 - s22 * s22;
    if det.abs() < 1e-30 || s20 < 1e-12 || s02 < 1e-12 {
        return Err(Error::NoEllipse);
    }
    let a_coef = (s20 * s04 - s02 * s22) / det;
    let b_coef = (s02 * s40 - s20 * s22) / det;
    if a_coef <= 0.0 || b_coef <= 0.0 {
        return Err(Error::NoEllipse);
    }
    let (ax_y, ax_z) = (1.0 / a_coef.sqrt(), 1.0 / b_coef.sqrt());
    let (a, b) = if ax_y >= ax_z { (ax_y, ax_z) } else { (ax_z, ax_y) };
    Ok((1.0 - (b / a).powi(2)).sqrt())
}

/// One-dimensional intensity profile against external angle along y.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossSection {
    /// (angle deg, intensity a.u.) samples; unnormalized.
    pub points: Vec<(f64, f64)>,
    pub pol: Pol,
    pub t_c: f64,
    pub filter: FilterSpec,
}

impl CrossSection {
    /// Angle of the maximum-intensity sample.
    pub fn peak_angle(&self) -> Option<f64> {
        self.points
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|&(y, _)| y)
    }

    pub fn peak_intensity(&self) -> f64 {
        self.points.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }
}

/// Scan the filtered intensity of one polarization along the y axis: at each
/// angle, integrate the spectral intensity over the filter passband.
pub fn cross_section_scan(
    t_c: f64,
    filter: &FilterSpec,
    pol: Pol,
    y_lo_deg: f64,
    y_hi_deg: f64,
    step_deg: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<CrossSection> {
    let span = 1.5 * filter.fwhm_nm;
    let dl = (filter.fwhm_nm / 60.0).min(0.05);
    let mut points = Vec::new();
    let mut y = y_lo_deg;
    while y <= y_hi_deg + 1e-12 {
        let mut acc = 0.0;
        let mut l = filter.center_nm - span;
        while l <= filter.center_nm + span {
            let w = filter.transmission_at(l);
            if w > 1e-6 {
                acc += w * spectral_intensity(l, t_c, y.abs(), pol, crystal, pump)? * dl;
            }
            l += dl;
        }
        points.push((y, acc));
        y += step_deg;
    }
    Ok(CrossSection {
        points,
        pol,
        t_c,
        filter: *filter,
    })
}

/// Rescale a set of profiles so the largest sample across the set is 1
/// (relative heights within the set are preserved).
pub fn normalize_across(scans: &mut [CrossSection]) {
    let max = scans
        .iter()
        .map(|s| s.peak_intensity())
        .fold(0.0f64, f64::max);
    if max > 0.0 {
        for s in scans {
            for p in &mut s.points {
                p.1 /= max;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{SetRegistry, DEFAULT_SET};
    use approx::assert_relative_eq;

    fn setup() -> (CrystalSpec, PumpSpec) {
        let set = SetRegistry::builtin().get(DEFAULT_SET).unwrap().clone();
        (
            CrystalSpec::new(10.0, 10.0, set),
            PumpSpec::new(406.2, 0.2, 1.0),
        )
    }

    #[test]
    fn synthetic_ellipse_fit_recovers_closed_form() {
        let (a, b) = (1.0, 0.975);
        let points: Vec<(f64, f64)> = (0..64)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                (a * t.cos(), b * t.sin())
            })
            .collect();
        let ring = RingCurve {
            points,
            t_c: 0.0,
            lambda_nm: 812.4,
            pol: Pol::H,
            semi_axis_y_deg: a,
            semi_axis_z_deg: b,
        };
        let e = ellipticity(&ring).unwrap();
        let expected = (1.0f64 - 0.975f64.powi(2)).sqrt();
        assert_relative_eq!(e, expected, epsilon = 1e-6);
    }

    #[test]
    fn circle_has_zero_ellipticity() {
        let points: Vec<(f64, f64)> = (0..32)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                (t.cos(), t.sin())
            })
            .collect();
        let ring = RingCurve {
            points,
            t_c: 0.0,
            lambda_nm: 812.4,
            pol: Pol::H,
            semi_axis_y_deg: 1.0,
            semi_axis_z_deg: 1.0,
        };
        assert!(ellipticity(&ring).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_ring_near_published_ellipticity() {
        let (crystal, pump) = setup();
        let ring = ring_curve(68.6, pump.degenerate_nm(), Pol::H, 64, &crystal, &pump).unwrap();
        let e = ellipticity(&ring).unwrap();
        assert!((e - 0.22).abs() < 0.03, "e = {e}");
    }

    #[test]
    fn ellipticity_stays_in_band_over_temperature() {
        let (crystal, pump) = setup();
        for t in [60.0, 70.0, 80.0, 90.0] {
            let ring = ring_curve(t, pump.degenerate_nm(), Pol::H, 64, &crystal, &pump).unwrap();
            let e = ellipticity(&ring).unwrap();
            assert!(e > 0.15 && e < 0.30, "e = {e} at T = {t}");
        }
    }

    #[test]
    fn collinear_limit_gives_point_ring() {
        let (crystal, pump) = setup();
        let t_dc = crate::phasematch::solve_degenerate_collinear_t(&crystal, &pump).unwrap();
        let ring = ring_curve(t_dc, pump.degenerate_nm(), Pol::H, 32, &crystal, &pump).unwrap();
        assert!(ring.semi_axis_y_deg.abs() < 1e-6);
        assert!(ring.semi_axis_z_deg.abs() < 1e-6);
        assert!(matches!(ellipticity(&ring), Err(Error::NoEllipse)));
    }

    #[test]
    fn ring_crossings_match_plane_solvers() {
        let (crystal, pump) = setup();
        let l = pump.degenerate_nm();
        let ring = ring_curve(80.0, l, Pol::V, 64, &crystal, &pump).unwrap();
        let xy = emission_angle(l, 80.0, Pol::V, Plane::Xy, &crystal, &pump).unwrap();
        let xz = emission_angle(l, 80.0, Pol::V, Plane::Xz, &crystal, &pump).unwrap();
        assert_relative_eq!(ring.points[0].0, xy, epsilon = 1e-9);
        assert_relative_eq!(ring.points[16].1, xz, epsilon = 1e-9);
        // closed and centro-symmetric
        let n = ring.points.len() - 1;
        assert_relative_eq!(ring.points[0].0, ring.points[n].0, epsilon = 1e-12);
        for i in 0..n / 2 {
            assert_relative_eq!(ring.points[i].0, -ring.points[i + n / 2].0, epsilon = 1e-9);
            assert_relative_eq!(ring.points[i].1, -ring.points[i + n / 2].1, epsilon = 1e-9);
        }
    }

    #[test]
    fn h_peak_angle_exceeds_v_below_collinear_temperature() {
        let (crystal, pump) = setup();
        // filter slightly red of degenerate: lambda_IF - 2 lambda_p = +0.07 nm
        let filter = FilterSpec::gaussian(812.47, 3.0);
        let h = cross_section_scan(48.6, &filter, Pol::H, 2.5, 3.3, 0.005, &crystal, &pump).unwrap();
        let v = cross_section_scan(48.6, &filter, Pol::V, 2.5, 3.3, 0.005, &crystal, &pump).unwrap();
        let (ph, pv) = (h.peak_angle().unwrap(), v.peak_angle().unwrap());
        assert!(ph > pv, "H peak {ph} deg vs V peak {pv} deg");
    }

    #[test]
    fn peak_angles_shrink_toward_collinear_temperature() {
        let (crystal, pump) = setup();
        let filter = FilterSpec::gaussian(812.47, 3.0);
        let mut prev = f64::INFINITY;
        for t in [48.6, 58.6, 68.6, 78.6, 88.6, 98.6] {
            let s =
                cross_section_scan(t, &filter, Pol::H, 0.0, 3.4, 0.02, &crystal, &pump).unwrap();
            let p = s.peak_angle().unwrap();
            assert!(p < prev, "peak not shrinking at T = {t}");
            prev = p;
        }
    }

    #[test]
    fn scan_symmetric_under_y_reflection() {
        let (crystal, pump) = setup();
        let filter = FilterSpec::gaussian(812.47, 3.0);
        let s = cross_section_scan(68.6, &filter, Pol::H, -2.8, 2.8, 0.05, &crystal, &pump).unwrap();
        let n = s.points.len();
        let peak = s.peak_intensity();
        for i in 0..n {
            let d = (s.points[i].1 - s.points[n - 1 - i].1).abs();
            assert!(d < 0.01 * peak, "asymmetry {d} at {}", s.points[i].0);
        }
    }

    #[test]
    fn detuned_filter_gives_dark_profile() {
        let (crystal, pump) = setup();
        let filter = FilterSpec::gaussian(780.0, 1.0);
        let s = cross_section_scan(68.6, &filter, Pol::H, 0.0, 1.5, 0.05, &crystal, &pump).unwrap();
        assert!(s.peak_intensity() < 1e-4);
    }

    #[test]
    fn narrowband_peak_matches_ring_crossing() {
        let (crystal, pump) = setup();
        let step = 0.01;
        let filter = FilterSpec::gaussian(812.07, 0.2);
        let s = cross_section_scan(80.0, &filter, Pol::H, 0.0, 2.2, step, &crystal, &pump).unwrap();
        let ring_y = emission_angle(812.07, 80.0, Pol::H, Plane::Xy, &crystal, &pump).unwrap();
        let peak = s.peak_angle().unwrap();
        assert!(
            (peak - ring_y).abs() <= step + 1e-12,
            "peak {peak} vs ring {ring_y}"
        );
    }

    #[test]
    fn top_hat_filter_transmission() {
        let f = FilterSpec {
            center_nm: 812.0,
            fwhm_nm: 3.0,
            shape: FilterShape::TopHat,
        };
        assert_eq!(f.transmission_at(812.0), 1.0);
        assert_eq!(f.transmission_at(813.49), 1.0);
        assert_eq!(f.transmission_at(813.51), 0.0);
        let g = FilterSpec::gaussian(812.0, 3.0);
        assert_relative_eq!(g.transmission_at(813.5), 0.5, epsilon = 1e-12);
    }
}
