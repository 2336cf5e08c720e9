//! Temperature- and wavelength-dependent refractive indices for the KTP
//! principal axes, plus thermal expansion of the poled structure.
//!
//! Coefficient sets are loaded from TOML files (one per source); the sets
//! shipped with the crate are embedded at compile time. Published Sellmeier
//! fits diverge badly outside their fit range, so out-of-range wavelengths are
//! a hard error rather than an extrapolation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-difference step for the group-index derivative (um).
const GROUP_INDEX_STEP_UM: f64 = 1e-4;

/// Principal dielectric axis of the biaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One-axis Sellmeier fit: n^2 = a0 + sum B/(1 - C/l^2) + sum B/(l^2 - C) + c_l2*l^2,
/// with an optional additive offset on n itself. Wavelengths in um.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellmeierForm {
    pub a0: f64,
    #[serde(default)]
    pub poles_inv: Vec<[f64; 2]>,
    #[serde(default)]
    pub poles_abs: Vec<[f64; 2]>,
    #[serde(default)]
    pub c_lambda2: f64,
    #[serde(default)]
    pub n_offset: f64,
}

impl SellmeierForm {
    /// Bare (reference-temperature) index at wavelength `lambda_um`.
    pub fn index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let mut n2 = self.a0 + self.c_lambda2 * l2;
        for &[b, c] in &self.poles_inv {
            n2 += b / (1.0 - c / l2);
        }
        for &[b, c] in &self.poles_abs {
            n2 += b / (l2 - c);
        }
        n2.sqrt() + self.n_offset
    }
}

/// Temperature correction: dn = c1(l)*(T - t_ref) + c2(l)*(T - t_ref)^2 where
/// each c_i(l) = a + b/l + c/l^2 + d/l^3 (l in um, T in deg C).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemperatureCorrection {
    pub t_ref_c: f64,
    pub c1: [f64; 4],
    #[serde(default)]
    pub c2: Option<[f64; 4]>,
}

impl TemperatureCorrection {
    pub fn delta_n(&self, lambda_um: f64, t_c: f64) -> f64 {
        let dt = t_c - self.t_ref_c;
        let eval = |c: &[f64; 4]| {
            c[0] + c[1] / lambda_um + c[2] / lambda_um.powi(2) + c[3] / lambda_um.powi(3)
        };
        let mut dn = eval(&self.c1) * dt;
        if let Some(c2) = &self.c2 {
            dn += eval(c2) * dt * dt;
        }
        dn
    }

    fn zeroed(&self) -> Self {
        Self {
            t_ref_c: self.t_ref_c,
            c1: [0.0; 4],
            c2: None,
        }
    }
}

/// Linear + quadratic thermal expansion of the crystal length scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermalExpansion {
    /// Linear coefficient (1/degC).
    pub alpha: f64,
    /// Quadratic coefficient (1/degC^2).
    pub beta: f64,
    pub t_ref_c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisDispersion {
    pub sellmeier: SellmeierForm,
    pub temperature: TemperatureCorrection,
}

/// Complete per-axis dispersion data set with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellmeierSet {
    pub id: String,
    /// Human-readable description of the coefficient sources.
    pub reference: String,
    /// Validity range in um; indices outside are a hard error.
    pub valid_range_um: [f64; 2],
    pub expansion: ThermalExpansion,
    pub x: AxisDispersion,
    pub y: AxisDispersion,
    pub z: AxisDispersion,
}

impl SellmeierSet {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("coefficient set parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn axis(&self, axis: Axis) -> &AxisDispersion {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    fn check_range(&self, lambda_um: f64) -> Result<()> {
        let [min, max] = self.valid_range_um;
        if lambda_um < min || lambda_um > max || !lambda_um.is_finite() {
            return Err(Error::WavelengthOutOfRange {
                lambda_um,
                min_um: min,
                max_um: max,
                set: self.id.clone(),
            });
        }
        Ok(())
    }

    /// Principal refractive index n(lambda, T).
    pub fn refractive_index(&self, axis: Axis, lambda_um: f64, t_c: f64) -> Result<f64> {
        self.check_range(lambda_um)?;
        let ax = self.axis(axis);
        Ok(ax.sellmeier.index(lambda_um) + ax.temperature.delta_n(lambda_um, t_c))
    }

    /// Group index n_g = n - lambda dn/dlambda (central difference).
    pub fn group_index(&self, axis: Axis, lambda_um: f64, t_c: f64) -> Result<f64> {
        let h = GROUP_INDEX_STEP_UM;
        let [min, max] = self.valid_range_um;
        if lambda_um - h < min || lambda_um + h > max {
            return Err(Error::DerivativeAtBoundary {
                lambda_um,
                margin_um: h,
            });
        }
        let n = self.refractive_index(axis, lambda_um, t_c)?;
        let np = self.refractive_index(axis, lambda_um + h, t_c)?;
        let nm = self.refractive_index(axis, lambda_um - h, t_c)?;
        Ok(n - lambda_um * (np - nm) / (2.0 * h))
    }

    /// Multiplicative length-scale factor applied to the poling period and
    /// crystal length at temperature `t_c`.
    pub fn thermal_scale(&self, t_c: f64) -> f64 {
        let dt = t_c - self.expansion.t_ref_c;
        1.0 + self.expansion.alpha * dt + self.expansion.beta * dt * dt
    }

    /// Copy with all temperature-correction coefficients zeroed (test hook).
    pub fn without_temperature_correction(&self) -> Self {
        let mut s = self.clone();
        s.x.temperature = s.x.temperature.zeroed();
        s.y.temperature = s.y.temperature.zeroed();
        s.z.temperature = s.z.temperature.zeroed();
        s
    }
}

/// Crystal geometry: poling period, length and the dispersion set in use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrystalSpec {
    /// Poling period (um) at the expansion reference temperature.
    pub period_um: f64,
    /// Crystal length (mm) at the expansion reference temperature.
    pub length_mm: f64,
    /// Reference temperature (degC) at which period and length are quoted.
    pub t_ref_c: f64,
    #[serde(skip)]
    pub sellmeier: Option<SellmeierSet>,
}

impl CrystalSpec {
    pub fn new(period_um: f64, length_mm: f64, sellmeier: SellmeierSet) -> Self {
        assert!(period_um > 0.0, "poling period must be positive");
        assert!(length_mm > 0.0, "crystal length must be positive");
        let t_ref_c = sellmeier.expansion.t_ref_c;
        Self {
            period_um,
            length_mm,
            t_ref_c,
            sellmeier: Some(sellmeier),
        }
    }

    pub fn sellmeier(&self) -> &SellmeierSet {
        self.sellmeier
            .as_ref()
            .expect("CrystalSpec constructed without a coefficient set")
    }

    /// Grating vector magnitude K = 2 pi / period at temperature `t_c` (1/um).
    pub fn grating_k(&self, t_c: f64) -> f64 {
        let scale = self.sellmeier().thermal_scale(t_c);
        2.0 * std::f64::consts::PI / (self.period_um * scale)
    }

    /// Crystal length in um at temperature `t_c`.
    pub fn length_um(&self, t_c: f64) -> f64 {
        self.length_mm * 1e3 * self.sellmeier().thermal_scale(t_c)
    }
}

/// Registry of named coefficient sets.
#[derive(Debug, Clone, Default)]
pub struct SetRegistry {
    sets: BTreeMap<String, SellmeierSet>,
}

/// The composite set calibrated for 406-nm pumped type-II QPM (default).
pub const COMPOSITE_406: &str = include_str!("../data/composite-406nm.toml");
/// Single-source set: Kato & Takaoka 2002 indices and thermo-optic fits.
pub const KATO_TAKAOKA_2002: &str = include_str!("../data/kato-takaoka-2002.toml");
/// Konig/Fradkin indices with Emanueli thermal data, unadjusted.
pub const KONIG_FRADKIN_EMANUELI: &str = include_str!("../data/konig-fradkin-emanueli.toml");

impl SetRegistry {
    /// Registry preloaded with the embedded coefficient sets.
    pub fn builtin() -> Self {
        let mut reg = Self::default();
        for src in [COMPOSITE_406, KATO_TAKAOKA_2002, KONIG_FRADKIN_EMANUELI] {
            let set = SellmeierSet::from_toml_str(src).expect("embedded set parses");
            reg.insert(set);
        }
        reg
    }

    pub fn insert(&mut self, set: SellmeierSet) {
        self.sets.insert(set.id.clone(), set);
    }

    /// Additionally load every `*.toml` in `dir`.
    pub fn load_dir(&mut self, dir: &Path) -> Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "toml") {
                self.insert(SellmeierSet::load(&path)?);
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&SellmeierSet> {
        self.sets
            .get(name)
            .ok_or_else(|| Error::UnknownCoefficientSet {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.sets.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SellmeierSet> {
        self.sets.values()
    }
}

/// Default set identifier used when a config does not name one.
pub const DEFAULT_SET: &str = "composite-406nm";

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_set() -> SellmeierSet {
        SetRegistry::builtin().get(DEFAULT_SET).unwrap().clone()
    }

    fn kato_set() -> SellmeierSet {
        SetRegistry::builtin().get("kato-takaoka-2002").unwrap().clone()
    }

    // Independent re-evaluation of the published Kato & Takaoka z-axis fit:
    // n_z^2 = 4.59423 + 0.06206/(l^2 - 0.04763) + 110.80672/(l^2 - 86.12171)
    // plus dn_z/dT = (0.9221/l^3 - 2.9220/l^2 + 3.6677/l - 0.1897)e-5 * (T - 20).
    #[test]
    fn z_index_matches_independent_transcription() {
        let l: f64 = 0.8124;
        let l2 = l * l;
        let n20 = (4.59423 + 0.06206 / (l2 - 0.04763) + 110.80672 / (l2 - 86.12171)).sqrt();
        let dndt =
            (0.9221 / l.powi(3) - 2.9220 / l2 + 3.6677 / l - 0.1897) * 1e-5;
        let expected = n20 + dndt * (25.0 - 20.0);
        let got = kato_set().refractive_index(Axis::Z, l, 25.0).unwrap();
        assert_relative_eq!(got, expected, epsilon = 1e-6);
    }

    #[test]
    fn biaxial_ordering_nz_above_ny() {
        for set in SetRegistry::builtin().iter() {
            let nz = set.refractive_index(Axis::Z, 0.812, 25.0).unwrap();
            let ny = set.refractive_index(Axis::Y, 0.812, 25.0).unwrap();
            let nx = set.refractive_index(Axis::X, 0.812, 25.0).unwrap();
            assert!(nz > ny, "{}: nz {nz} <= ny {ny}", set.id);
            assert!(ny >= nx, "{}: ny {ny} < nx {nx}", set.id);
        }
    }

    #[test]
    fn zeroed_temperature_correction_gives_bare_sellmeier() {
        let set = default_set();
        let bare = set.without_temperature_correction();
        let t_ref = set.y.temperature.t_ref_c;
        let with = set.refractive_index(Axis::Y, 0.85, t_ref).unwrap();
        let without = bare.refractive_index(Axis::Y, 0.85, 140.0).unwrap();
        assert_relative_eq!(with, set.y.sellmeier.index(0.85), epsilon = 1e-12);
        assert_relative_eq!(without, set.y.sellmeier.index(0.85), epsilon = 1e-15);
    }

    #[test]
    fn index_above_one_over_transparency_window() {
        for set in SetRegistry::builtin().iter() {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let mut l = 0.4;
                while l <= 1.08 {
                    for t in [20.0, 100.0, 200.0] {
                        let n = set.refractive_index(axis, l, t).unwrap();
                        assert!(n > 1.0, "{} {:?} {l} {t} -> {n}", set.id, axis);
                    }
                    l += 0.02;
                }
            }
        }
    }

    #[test]
    fn normal_dispersion_monotone_decreasing_in_lambda() {
        let set = default_set();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let l = 0.7 + 0.2 * i as f64 / 199.0;
                let n = set.refractive_index(axis, l, 50.0).unwrap();
                assert!(n < prev, "{:?} not decreasing at {l}", axis);
                prev = n;
            }
        }
    }

    #[test]
    fn positive_thermo_optic_on_z() {
        let set = default_set();
        let mut prev = 0.0;
        for i in 0..100 {
            let t = 20.0 + 130.0 * i as f64 / 99.0;
            let n = set.refractive_index(Axis::Z, 0.8124, t).unwrap();
            assert!(n > prev);
            prev = n;
        }
    }

    #[test]
    fn group_index_exceeds_phase_index_in_normal_dispersion() {
        let set = default_set();
        let n = set.refractive_index(Axis::Z, 0.8124, 95.0).unwrap();
        let ng = set.group_index(Axis::Z, 0.8124, 95.0).unwrap();
        assert!(ng > n);
    }

    #[test]
    fn group_index_walkoff_between_axes() {
        let set = default_set();
        let gy = set.group_index(Axis::Y, 0.8124, 95.0).unwrap();
        let gz = set.group_index(Axis::Z, 0.8124, 95.0).unwrap();
        assert!((gy - gz).abs() > 1e-3);
    }

    // Richardson consistency: halving the step changes n - lambda dn/dl by < 1e-6 relative.
    #[test]
    fn group_index_step_consistency() {
        let set = default_set();
        let l = 0.8124;
        let t = 95.0;
        let deriv = |h: f64| {
            let np = set.refractive_index(Axis::Y, l + h, t).unwrap();
            let nm = set.refractive_index(Axis::Y, l - h, t).unwrap();
            (np - nm) / (2.0 * h)
        };
        let n = set.refractive_index(Axis::Y, l, t).unwrap();
        let g1 = n - l * deriv(1e-4);
        let g2 = n - l * deriv(5e-5);
        assert!((g1 - g2).abs() / g1.abs() < 1e-6);
        let api = set.group_index(Axis::Y, l, t).unwrap();
        assert_relative_eq!(api, g1, epsilon = 1e-12);
    }

    #[test]
    fn thermal_scale_identity_at_reference() {
        let set = default_set();
        assert_eq!(set.thermal_scale(set.expansion.t_ref_c), 1.0);
        let mut zeroed = set.clone();
        zeroed.expansion.alpha = 0.0;
        zeroed.expansion.beta = 0.0;
        assert_eq!(zeroed.thermal_scale(173.2), 1.0);
    }

    #[test]
    fn thermal_scale_hand_evaluation() {
        let set = default_set();
        let e = &set.expansion;
        let dt: f64 = 100.0 - e.t_ref_c;
        let expected = 1.0 + e.alpha * dt + e.beta * dt * dt;
        assert!((set.thermal_scale(100.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_hard_error() {
        let set = default_set();
        assert!(matches!(
            set.refractive_index(Axis::Y, 0.2, 25.0),
            Err(Error::WavelengthOutOfRange { .. })
        ));
        assert!(matches!(
            set.group_index(Axis::Y, set.valid_range_um[0], 25.0),
            Err(Error::DerivativeAtBoundary { .. })
        ));
    }

    #[test]
    fn unknown_set_lists_available() {
        let reg = SetRegistry::builtin();
        let err = reg.get("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("composite-406nm"));
        assert!(msg.contains("kato-takaoka-2002"));
    }
}
