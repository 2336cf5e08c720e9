//! Two-photon polarization state behind the compensator, Hong-Ou-Mandel
//! interference traces and polarization correlation functions.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{Axis, CrystalSpec};
use crate::error::{Error, Result};
use crate::jones::{polarizer, Jones};

/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792458;

/// Spectral envelope model for the interference terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeShape {
    /// Gaussian spectrum of the stated FWHM.
    Gaussian,
    /// Envelope derived from a sinc^2 intensity spectrum (triangular).
    SincDerived,
}

/// Polarization-entangled pair state (|HH> + e^{i phi}|VV>)/sqrt(2) with its
/// spectral labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoPhotonState {
    /// Amplitudes over {HH, HV, VH, VV} of modes (A, B).
    pub amps: [Complex64; 4],
    pub lambda_a_nm: f64,
    pub lambda_b_nm: f64,
    /// Per-photon spectral FWHM (nm).
    pub fwhm_nm: f64,
    /// Relative temporal delay between the photons (fs).
    pub tau_fs: f64,
}

impl TwoPhotonState {
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative phase between the VV and HH amplitudes (rad).
    pub fn phi(&self) -> f64 {
        (self.amps[3] / self.amps[0]).arg()
    }
}

/// The pair state of the source: (|HH> + e^{i phi}|VV>)/sqrt(2).
pub fn output_state(
    phi: f64,
    lambda_a_nm: f64,
    lambda_b_nm: f64,
    fwhm_nm: f64,
    tau_fs: f64,
) -> TwoPhotonState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    TwoPhotonState {
        amps: [
            Complex64::new(r, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(r, phi),
        ],
        lambda_a_nm,
        lambda_b_nm,
        fwhm_nm,
        tau_fs,
    }
}

/// Free-space path (um) the optical delay line must add to cancel the H/V
/// group-delay walk-off accumulated over the crystal:
/// (n_g,y - n_g,z) * L at the given wavelength and temperature.
pub fn compensator_delay(lambda_nm: f64, t_c: f64, crystal: &CrystalSpec) -> Result<f64> {
    let l_um = lambda_nm * 1e-3;
    let s = crystal.sellmeier();
    let ngy = s.group_index(Axis::Y, l_um, t_c)?;
    let ngz = s.group_index(Axis::Z, l_um, t_c)?;
    Ok((ngy - ngz) * crystal.length_um(t_c))
}

/// Beat angular frequency delta-omega = 2 pi c (1/lambda_A - 1/lambda_B)
/// (rad/fs).
pub fn beat_angular_frequency(lambda_a_nm: f64, lambda_b_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_NM_PER_FS * (1.0 / lambda_a_nm - 1.0 / lambda_b_nm)
}

/// Interference-visibility envelope g(tau) in [0, 1], g(0) = 1.
pub fn envelope(tau_fs: f64, lambda_mean_nm: f64, fwhm_nm: f64, shape: EnvelopeShape) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    // FWHM of the angular-frequency spectrum (rad/fs)
    let d_omega =
        2.0 * std::f64::consts::PI * C_NM_PER_FS * fwhm_nm / (lambda_mean_nm * lambda_mean_nm);
    match shape {
        EnvelopeShape::Gaussian => (-tau_fs * tau_fs * d_omega * d_omega / (16.0 * ln2)).exp(),
        EnvelopeShape::SincDerived => {
            // sinc^2 intensity spectrum of this FWHM is the transform of a
            // triangle; the visibility envelope is that triangle
            const SINC2_HALF_POWER: f64 = 1.391_557_377_204_213; // sinc^2(x) = 1/2
            let t_base = 4.0 * SINC2_HALF_POWER / d_omega;
            (1.0 - tau_fs.abs() / t_base).max(0.0)
        }
    }
}

/// Coincidence probability per generated pair behind linear analyzers at
/// `lp_a_deg` and `lp_b_deg`, as a function of the pair delay:
/// P = P_dist + Re[e^{i(phi + d_omega tau)}] g(tau) P_int.
pub fn coincidence_probability(
    state: &TwoPhotonState,
    lp_a_deg: f64,
    lp_b_deg: f64,
    shape: EnvelopeShape,
) -> f64 {
    let (sa, ca) = lp_a_deg.to_radians().sin_cos();
    let (sb, cb) = lp_b_deg.to_radians().sin_cos();
    // projections of the HH and VV amplitudes onto the analyzers
    let a_hh = state.amps[0] * ca * cb;
    let a_vv = state.amps[3] * sa * sb;
    let cross = state.amps[1] * ca * sb + state.amps[2] * sa * cb;
    let p_dist = a_hh.norm_sqr() + a_vv.norm_sqr() + cross.norm_sqr();
    let mean = 0.5 * (state.lambda_a_nm + state.lambda_b_nm);
    let g = envelope(state.tau_fs, mean, state.fwhm_nm, shape);
    let beat = beat_angular_frequency(state.lambda_a_nm, state.lambda_b_nm) * state.tau_fs;
    let rot = Complex64::from_polar(1.0, beat);
    let interference = 2.0 * (a_hh.conj() * a_vv * rot).re * g;
    p_dist + interference
}

/// HOM trace: coincidence probability against pair delay (fs).
#[allow(clippy::too_many_arguments)]
pub fn hom_scan(
    phi: f64,
    lambda_a_nm: f64,
    lambda_b_nm: f64,
    fwhm_nm: f64,
    lp_a_deg: f64,
    lp_b_deg: f64,
    tau_lo_fs: f64,
    tau_hi_fs: f64,
    step_fs: f64,
    shape: EnvelopeShape,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut tau = tau_lo_fs;
    while tau <= tau_hi_fs + 1e-9 {
        let state = output_state(phi, lambda_a_nm, lambda_b_nm, fwhm_nm, tau);
        out.push((
            tau,
            coincidence_probability(&state, lp_a_deg, lp_b_deg, shape),
        ));
        tau += step_fs;
    }
    out
}

/// Polarization correlation function: analyzer A fixed, analyzer B swept.
pub fn correlation_scan(
    state: &TwoPhotonState,
    lp_a_deg: f64,
    lp_b_start_deg: f64,
    lp_b_end_deg: f64,
    step_deg: f64,
    shape: EnvelopeShape,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut b = lp_b_start_deg;
    while b <= lp_b_end_deg + 1e-9 {
        out.push((b, coincidence_probability(state, lp_a_deg, b, shape)));
        b += step_deg;
    }
    out
}

/// Exact linear least-squares fit of a raised sine
/// y = a + b cos(2 theta) + c sin(2 theta) (theta in deg).
pub fn fit_raised_sine(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(
            "raised-sine fit needs >= 3 points".into(),
        ));
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(deg, y) in points {
        let t = 2.0 * deg.to_radians();
        let basis = [1.0, t.cos(), t.sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    let sol = mat
        .lu()
        .solve(&nalgebra::Vector3::from_row_slice(&rhs))
        .ok_or_else(|| Error::FitFailed("singular raised-sine normal equations".into()))?;
    Ok((sol[0], sol[1], sol[2]))
}

/// Visibility (max-min)/(max+min) of a raised-sine correlation curve, from
/// the exact linear fit.
pub fn visibility(points: &[(f64, f64)]) -> Result<f64> {
    let (a, b, c) = fit_raised_sine(points)?;
    let amp = (b * b + c * c).sqrt();
    if a <= 0.0 {
        return Err(Error::FitFailed("non-positive curve mean".into()));
    }
    Ok(amp / a)
}

// --- density-matrix helpers shared with the tomography module ---

pub type DensityMatrix = Matrix4<Complex64>;

/// Kronecker product of two single-qubit operators, ordering {HH, HV, VH, VV}.
pub fn kron(a: &Jones, b: &Jones) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Density matrix of (|HH> + e^{i phi}|VV>)/sqrt(2).
pub fn bell_phi(phi: f64) -> DensityMatrix {
    let state = output_state(phi, 812.4, 812.4, 0.553, 0.0);
    let v = Vector4::from_row_slice(&state.amps);
    &v * v.adjoint()
}

/// Werner state p |Phi+><Phi+| + (1-p) I/4.
pub fn werner(p: f64) -> DensityMatrix {
    let bell = bell_phi(0.0);
    let iso = Matrix4::identity().map(|z: Complex64| z * 0.25);
    bell.map(|z| z * p) + iso.map(|z| z * (1.0 - p))
}

/// Coincidence probability tr(rho P_a x P_b) for linear analyzers.
pub fn coincidence_probability_rho(rho: &DensityMatrix, lp_a_deg: f64, lp_b_deg: f64) -> f64 {
    let proj = kron(&polarizer(lp_a_deg), &polarizer(lp_b_deg));
    (rho * proj).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{SetRegistry, DEFAULT_SET};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn crystal() -> CrystalSpec {
        let set = SetRegistry::builtin().get(DEFAULT_SET).unwrap().clone();
        CrystalSpec::new(10.0, 10.0, set)
    }

    #[test]
    fn output_state_is_bell_like() {
        let plus = output_state(0.0, 812.4, 812.4, 0.553, 0.0);
        assert_relative_eq!(plus.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(plus.amps[0].re, plus.amps[3].re, epsilon = 1e-12);
        let minus = output_state(PI, 812.4, 812.4, 0.553, 0.0);
        let overlap: Complex64 = plus
            .amps
            .iter()
            .zip(minus.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(overlap.norm() < 1e-12, "Phi+ and Phi- not orthogonal");
        for phi in [0.3, 1.7, -2.2] {
            assert_relative_eq!(output_state(phi, 812.4, 812.4, 0.553, 0.0).norm(), 1.0);
        }
    }

    #[test]
    fn compensator_matches_direct_group_index_difference() {
        let crystal = crystal();
        let s = crystal.sellmeier();
        let ngy = s.group_index(Axis::Y, 0.8124, 95.0).unwrap();
        let ngz = s.group_index(Axis::Z, 0.8124, 95.0).unwrap();
        let d = compensator_delay(812.4, 95.0, &crystal).unwrap();
        assert_relative_eq!(d.abs(), (ngy - ngz).abs() * crystal.length_um(95.0));
        assert!(d.abs() > 100.0, "KTP walk-off over 10 mm should be large");
    }

    #[test]
    fn compensator_zero_for_isotropic_crystal() {
        let mut set = SetRegistry::builtin().get(DEFAULT_SET).unwrap().clone();
        set.z = set.y.clone();
        let crystal = CrystalSpec::new(10.0, 10.0, set);
        let d = compensator_delay(812.4, 95.0, &crystal).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn dip_and_peak_at_zero_delay() {
        let dip = output_state(0.0, 812.4, 812.4, 0.553, 0.0);
        let p = coincidence_probability(&dip, 45.0, -45.0, EnvelopeShape::Gaussian);
        assert!(p.abs() < 1e-12, "dip floor {p}");
        let peak = output_state(PI, 812.4, 812.4, 0.553, 0.0);
        let q = coincidence_probability(&peak, 45.0, -45.0, EnvelopeShape::Gaussian);
        assert_relative_eq!(q, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn baseline_quarter_outside_envelope() {
        let far = output_state(0.0, 812.4, 812.4, 0.553, 1e6);
        let p = coincidence_probability(&far, 45.0, -45.0, EnvelopeShape::Gaussian);
        assert_relative_eq!(p, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn mirror_identity_about_baseline() {
        for shape in [EnvelopeShape::Gaussian, EnvelopeShape::SincDerived] {
            let a = hom_scan(0.7, 808.0, 816.9, 0.5, 45.0, -45.0, -4000.0, 4000.0, 50.0, shape);
            let b = hom_scan(
                0.7 + PI,
                808.0,
                816.9,
                0.5,
                45.0,
                -45.0,
                -4000.0,
                4000.0,
                50.0,
                shape,
            );
            for (pa, pb) in a.iter().zip(b.iter()) {
                assert!((pa.1 + pb.1 - 0.5).abs() < 1e-12, "at tau {}", pa.0);
            }
        }
    }

    #[test]
    fn degenerate_trace_symmetric_in_delay() {
        let scan = hom_scan(
            1.1,
            812.4,
            812.4,
            0.553,
            45.0,
            -45.0,
            -3000.0,
            3000.0,
            25.0,
            EnvelopeShape::Gaussian,
        );
        let n = scan.len();
        for i in 0..n {
            assert!((scan[i].1 - scan[n - 1 - i].1).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_is_two_pi_periodic() {
        let a = hom_scan(0.4, 810.0, 814.8, 0.5, 45.0, -45.0, -2000.0, 2000.0, 40.0, EnvelopeShape::Gaussian);
        let b = hom_scan(
            0.4 + 2.0 * PI,
            810.0,
            814.8,
            0.5,
            45.0,
            -45.0,
            -2000.0,
            2000.0,
            40.0,
            EnvelopeShape::Gaussian,
        );
        for (pa, pb) in a.iter().zip(b.iter()) {
            assert!((pa.1 - pb.1).abs() < 1e-12);
        }
    }

    #[test]
    fn beat_period_matches_wavelength_splitting() {
        let (la, lb) = (808.0, 816.9);
        let d_omega = beat_angular_frequency(la, lb).abs();
        let period = 2.0 * PI / d_omega;
        // locate successive minima near zero delay on a fine scan
        let step = period / 2000.0;
        let scan = hom_scan(
            0.0,
            la,
            lb,
            0.1,
            45.0,
            -45.0,
            -1.6 * period,
            1.6 * period,
            step,
            EnvelopeShape::Gaussian,
        );
        let mut minima = Vec::new();
        for i in 1..scan.len() - 1 {
            if scan[i].1 < scan[i - 1].1 && scan[i].1 < scan[i + 1].1 {
                minima.push(scan[i].0);
            }
        }
        assert!(minima.len() >= 2, "found {} minima", minima.len());
        for w in minima.windows(2) {
            let spacing = w[1] - w[0];
            assert!(
                (spacing - period).abs() / period < 0.01,
                "spacing {spacing} vs period {period}"
            );
        }
    }

    #[test]
    fn ideal_bell_state_visibility_one_in_four_bases() {
        let state = output_state(0.0, 812.4, 812.4, 0.553, 0.0);
        for base in [0.0, 45.0, 90.0, 135.0] {
            let curve =
                correlation_scan(&state, base, 0.0, 360.0, 5.0, EnvelopeShape::Gaussian);
            let v = visibility(&curve).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn werner_visibility_equals_p_in_diagonal_basis() {
        let p = 0.95;
        let rho = werner(p);
        let curve: Vec<(f64, f64)> = (0..72)
            .map(|i| {
                let b = 5.0 * i as f64;
                (b, coincidence_probability_rho(&rho, 45.0, b))
            })
            .collect();
        let v = visibility(&curve).unwrap();
        assert_relative_eq!(v, p, epsilon = 1e-9);
    }

    #[test]
    fn pure_state_formula_matches_density_matrix_oracle() {
        let phi = 0.9;
        let state = output_state(phi, 812.4, 812.4, 0.553, 0.0);
        let rho = bell_phi(phi);
        for a in [0.0, 30.0, 45.0, 120.0] {
            for b in [10.0, 75.0, 200.0] {
                let direct = coincidence_probability(&state, a, b, EnvelopeShape::Gaussian);
                let via_rho = coincidence_probability_rho(&rho, a, b);
                assert_relative_eq!(direct, via_rho, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn visibility_invariant_under_global_phase() {
        let mut state = output_state(0.4, 812.4, 812.4, 0.553, 0.0);
        let c1 = correlation_scan(&state, 45.0, 0.0, 360.0, 5.0, EnvelopeShape::Gaussian);
        let g = Complex64::from_polar(1.0, 1.23);
        for a in &mut state.amps {
            *a *= g;
        }
        let c2 = correlation_scan(&state, 45.0, 0.0, 360.0, 5.0, EnvelopeShape::Gaussian);
        assert_relative_eq!(
            visibility(&c1).unwrap(),
            visibility(&c2).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn envelope_shapes_normalized_at_zero() {
        for shape in [EnvelopeShape::Gaussian, EnvelopeShape::SincDerived] {
            assert_relative_eq!(envelope(0.0, 812.4, 0.553, shape), 1.0, epsilon = 1e-12);
            assert!(envelope(1e5, 812.4, 0.553, shape) < 1e-6);
        }
    }
}
