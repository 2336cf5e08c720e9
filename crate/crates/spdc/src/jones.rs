//! Jones calculus for the wave plates, polarizers and the QWP-HWP-QWP
//! geometric phase shifter in the analysis paths.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Jones = Matrix2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Rotation of the lab frame by `angle` rad (real orthogonal Jones matrix).
pub fn rotation(angle: f64) -> Jones {
    let (s, co) = angle.sin_cos();
    Jones::new(c(co), c(-s), c(s), c(co))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveplateKind {
    Hwp,
    Qwp,
}

/// Retarder with its fast axis at `angle_deg` from H: R(a) diag(1, r) R(-a)
/// with r = -1 (half wave) or i (quarter wave).
pub fn waveplate(kind: WaveplateKind, angle_deg: f64) -> Jones {
    let retard = match kind {
        WaveplateKind::Hwp => c(-1.0),
        WaveplateKind::Qwp => Complex64::new(0.0, 1.0),
    };
    let a = angle_deg.to_radians();
    rotation(a) * Jones::new(c(1.0), c(0.0), c(0.0), retard) * rotation(-a)
}

/// Rank-1 projector onto linear polarization at `angle_deg` from H.
pub fn polarizer(angle_deg: f64) -> Jones {
    let a = angle_deg.to_radians();
    let (s, co) = a.sin_cos();
    Jones::new(c(co * co), c(co * s), c(s * co), c(s * s))
}

/// Jones matrix of the QWP(45)-HWP(theta)-QWP(45) phase shifter.
pub fn phase_shifter_matrix(hwp_angle_deg: f64) -> Jones {
    waveplate(WaveplateKind::Qwp, 45.0)
        * waveplate(WaveplateKind::Hwp, hwp_angle_deg)
        * waveplate(WaveplateKind::Qwp, 45.0)
}

/// Relative phase (rad) the QWP-HWP-QWP shifter imparts between H and V.
///
/// The composite is diagonal in {H, V} for every HWP angle; the phase is
/// linear in the HWP rotation with slope 4 (a 22.5-degree turn of the HWP
/// steps the phase by pi/2).
pub fn phase_shifter(hwp_angle_deg: f64) -> f64 {
    let m = phase_shifter_matrix(hwp_angle_deg);
    debug_assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
    (m[(1, 1)] / m[(0, 0)]).arg()
}

/// HWP angle (deg) that sets the phase shifter to `phi` rad.
pub fn hwp_angle_for_phase(phi: f64) -> f64 {
    (phi + std::f64::consts::PI).to_degrees() / 4.0
}
