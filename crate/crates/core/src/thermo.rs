//! Constitutive laws and transfer coefficients.
//!
//! The state is `(T, P₁)`: temperature in kelvin and vapour pressure in
//! pascal. Relative humidity follows as `φ = P₁ / Psat(T)`.
//!
//! The mass balance reads `c_m ∂P₁/∂t = ∇·(k_m ∇P₁ + k_mq ∇T) + c_mq ∂T/∂t`
//! and the energy balance `c_q ∂T/∂t = ∇·(k_q ∇T) + r₁₂ ∇·(k_qm ∇P₁)`.
//! [`coefficients`] evaluates all seven coefficients at a state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material_db::MaterialProperties;

/// Lower bound of the relative humidity used inside the solver.
pub const PHI_MIN: f64 = 1e-6;
/// Upper bound of the relative humidity used inside the solver.
pub const PHI_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Antoine law scale, Pa.
    pub psat0: f64,
    /// Antoine law offset temperature, K.
    pub ta: f64,
    /// Antoine law temperature scale, K.
    pub tb: f64,
    /// Antoine law exponent.
    pub alpha: f64,
    /// Latent heat of evaporation at `tc`, J/kg.
    pub r12_0: f64,
    /// Specific heat of vapour, J/(kg·K).
    pub c1: f64,
    /// Specific heat of liquid water, J/(kg·K).
    pub c2: f64,
    /// Reference temperature of the latent heat law, K.
    pub tc: f64,
    /// Air pressure, Pa.
    pub p3: f64,
    /// Liquid water density, kg/m³.
    pub rho2: f64,
    /// Gas constant of water vapour, J/(kg·K).
    pub r1: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            psat0: 997.3,
            ta: 159.5,
            tb: 120.6,
            alpha: 8.275,
            r12_0: 2.5e6,
            c1: 1870.0,
            c2: 4180.0,
            tc: 273.15,
            p3: 1e5,
            rho2: 1000.0,
            r1: 461.9,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("psat0", self.psat0),
            ("ta", self.ta),
            ("tb", self.tb),
            ("alpha", self.alpha),
            ("r12_0", self.r12_0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("tc", self.tc),
            ("p3", self.p3),
            ("rho2", self.rho2),
            ("r1", self.r1),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "physical constant {name} must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Parses a TOML table of overrides; missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let pc: PhysicalConstants =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        pc.validate()?;
        Ok(pc)
    }
}

/// Evaluation point `(T, P₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    /// Temperature, K.
    pub temperature: f64,
    /// Vapour pressure, Pa.
    pub vapor_pressure: f64,
}

impl ThermoState {
    pub fn new(temperature: f64, vapor_pressure: f64) -> Self {
        ThermoState {
            temperature,
            vapor_pressure,
        }
    }

    /// Relative humidity; fails outside the Antoine domain.
    pub fn relative_humidity(&self, pc: &PhysicalConstants) -> Result<f64> {
        Ok(self.vapor_pressure / saturation_pressure(pc, self.temperature)?)
    }

    /// Checks `T > Ta` and `0 < φ < 1`; returns `φ`.
    pub fn validate(&self, pc: &PhysicalConstants) -> Result<f64> {
        if !(self.temperature > pc.ta) {
            return Err(Error::domain("T", self.temperature, "T > Ta"));
        }
        let phi = self.relative_humidity(pc)?;
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::domain("phi", phi, "0 < phi < 1"));
        }
        Ok(phi)
    }
}

/// Storage and transfer coefficients at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    /// Mass storage, kg/(m³·Pa).
    pub cm: f64,
    /// Heat storage, J/(m³·K).
    pub cq: f64,
    /// Mass storage due to temperature, kg/(m³·K).
    pub cmq: f64,
    /// Mass permeability, s.
    pub km: f64,
    /// Thermal conductivity, W/(m·K).
    pub kq: f64,
    /// Mass transfer under temperature gradient, kg/(m·s·K); negative for φ < 1.
    pub kmq: f64,
    /// Vapour permeability seen by the latent heat flux, s.
    pub kqm: f64,
    /// Latent heat of evaporation, J/kg.
    pub r12: f64,
}

/// Antoine law `Psat0·((T − Ta)/Tb)^α`.
pub fn saturation_pressure(pc: &PhysicalConstants, temperature: f64) -> Result<f64> {
    if !(temperature >= pc.ta) {
        return Err(Error::domain("T", temperature, "T >= Ta"));
    }
    Ok(pc.psat0 * ((temperature - pc.ta) / pc.tb).powf(pc.alpha))
}

/// `dPsat/dT` of the Antoine law.
pub fn saturation_pressure_slope(pc: &PhysicalConstants, temperature: f64) -> Result<f64> {
    let psat = saturation_pressure(pc, temperature)?;
    Ok(psat * pc.alpha / (temperature - pc.ta))
}

pub fn latent_heat(pc: &PhysicalConstants, temperature: f64) -> f64 {
    pc.r12_0 + (pc.c1 - pc.c2) * (temperature - pc.tc)
}

/// Kelvin equation `P₂ = ρ₂·R₁·T·ln φ`.
pub fn capillary_pressure(pc: &PhysicalConstants, temperature: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::domain("phi", phi, "0 < phi <= 1"));
    }
    Ok(pc.rho2 * pc.r1 * temperature * phi.ln())
}

fn check_open_unit(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("phi", phi, "0 < phi < 1"))
    }
}

/// Oswin isotherm `ω₁·(φ/(1−φ))^α₁`, kg/m³.
pub fn sorption(mat: &MaterialProperties, phi: f64) -> Result<f64> {
    check_open_unit(phi)?;
    Ok(oswin(mat, phi))
}

/// `∂ω/∂φ = α₁·ω/((1−φ)·φ)`, kg/m³.
pub fn sorption_slope(mat: &MaterialProperties, phi: f64) -> Result<f64> {
    check_open_unit(phi)?;
    Ok(oswin_slope(mat, phi, oswin(mat, phi)))
}

fn oswin(mat: &MaterialProperties, phi: f64) -> f64 {
    mat.omega1 * (phi / (1.0 - phi)).powf(mat.alpha1)
}

fn oswin_slope(mat: &MaterialProperties, phi: f64, omega: f64) -> f64 {
    mat.alpha1 * omega / ((1.0 - phi) * phi)
}

/// Vapour permeability `k₁ = 2·10⁻⁷·T^0.81 / (μ·P₃)`, s.
pub fn vapor_permeability(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    temperature: f64,
) -> f64 {
    2e-7 * temperature.powf(0.81) / (mat.mu * pc.p3)
}

/// Liquid transport coefficient
/// `D₂ = 3.8·(A/ω_f)²·exp((3/ω_f)·ln 10·(ω − ω_f))`, m²/s.
pub fn liquid_transport(mat: &MaterialProperties, omega: f64) -> f64 {
    let ratio = mat.a / mat.omegaf;
    3.8 * ratio * ratio * (3.0 / mat.omegaf * std::f64::consts::LN_10 * (omega - mat.omegaf)).exp()
}

/// Liquid permeability `k₂ = D₂·∂ω/∂P₂`, s.
///
/// With the Kelvin equation at fixed `T`, `∂φ/∂P₂ = φ/(ρ₂·R₁·T)`, hence
/// `k₂ = D₂·φ/(ρ₂·R₁·T)·∂ω/∂φ`.
pub fn liquid_permeability(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    state: &ThermoState,
) -> Result<f64> {
    let phi = state.validate(pc)?;
    let omega = oswin(mat, phi);
    let slope = oswin_slope(mat, phi, omega);
    Ok(liquid_permeability_at(
        pc,
        mat,
        state.temperature,
        phi,
        omega,
        slope,
    ))
}

fn liquid_permeability_at(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    temperature: f64,
    phi: f64,
    omega: f64,
    slope: f64,
) -> f64 {
    liquid_transport(mat, omega) * phi / (pc.rho2 * pc.r1 * temperature) * slope
}

/// All coefficients of the governing equations at a valid state.
pub fn coefficients(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    state: &ThermoState,
) -> Result<CoefficientSet> {
    let phi = state.validate(pc)?;
    let psat = saturation_pressure(pc, state.temperature)?;
    Ok(coefficients_at(pc, mat, state.temperature, phi, psat))
}

/// Coefficients at `(T, P₁)` with `φ` clamped to `[PHI_MIN, PHI_MAX]`.
///
/// Returns the coefficients, the (clamped) relative humidity and whether
/// clamping happened. When clamped, the vapour pressure used internally is
/// `φ·Psat(T)`.
pub fn coefficients_clamped(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    temperature: f64,
    vapor_pressure: f64,
) -> Result<(CoefficientSet, f64, bool)> {
    if !(temperature > pc.ta) || !vapor_pressure.is_finite() {
        return Err(Error::domain("T", temperature, "T > Ta"));
    }
    let psat = saturation_pressure(pc, temperature)?;
    let raw = vapor_pressure / psat;
    let phi = raw.clamp(PHI_MIN, PHI_MAX);
    Ok((
        coefficients_at(pc, mat, temperature, phi, psat),
        phi,
        phi != raw,
    ))
}

fn coefficients_at(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    temperature: f64,
    phi: f64,
    psat: f64,
) -> CoefficientSet {
    let vapor_pressure = phi * psat;
    let omega = oswin(mat, phi);
    let slope = oswin_slope(mat, phi, omega);
    let r12 = latent_heat(pc, temperature);
    let k1 = vapor_permeability(pc, mat, temperature);
    let k2 = liquid_permeability_at(pc, mat, temperature, phi, omega, slope);
    let cm = slope / psat;
    CoefficientSet {
        cm,
        cq: mat.rho0 * mat.c0 + pc.c2 * omega,
        cmq: cm * vapor_pressure * r12 / (pc.r1 * temperature * temperature),
        km: k1 + k2 * pc.rho2 * pc.r1 * temperature / vapor_pressure,
        kq: mat.kq0 + mat.beta * omega,
        kmq: k2 * (pc.rho2 * pc.r1 * phi.ln() - pc.rho2 * r12 / temperature),
        kqm: k1,
        r12,
    }
}

/// Moisture content at `(T, P₁)` with the same clamping as
/// [`coefficients_clamped`].
pub fn moisture_content_clamped(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    temperature: f64,
    vapor_pressure: f64,
) -> Result<(f64, f64, bool)> {
    if !(temperature > pc.ta) || !vapor_pressure.is_finite() {
        return Err(Error::domain("T", temperature, "T > Ta"));
    }
    let raw = vapor_pressure / saturation_pressure(pc, temperature)?;
    let phi = raw.clamp(PHI_MIN, PHI_MAX);
    Ok((oswin(mat, phi), phi, phi != raw))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::material_db::MaterialDb;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn pc() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn saturation_pressure_values() {
        let pc = pc();
        assert!((saturation_pressure(&pc, 280.1).unwrap() - 997.3).abs() < 1e-9);
        // mpmath, 40 digits
        assert!(
            rel(
                saturation_pressure(&pc, 293.15).unwrap(),
                2333.834290543836746
            ) < 1e-13
        );
        assert!(
            rel(
                saturation_pressure(&pc, 278.15).unwrap(),
                871.4498843250599308
            ) < 1e-13
        );
        assert!(rel(saturation_pressure(&pc, 293.15).unwrap(), 2.0 * 1166.9) < 1e-3);
        assert!(saturation_pressure(&pc, 150.0).is_err());
    }

    #[test]
    fn saturation_pressure_is_increasing() {
        let pc = pc();
        let mut last = 0.0;
        for i in 0..200 {
            let p = saturation_pressure(&pc, 160.0 + i as f64).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn saturation_slope_matches_finite_difference() {
        let pc = pc();
        let t = 293.15;
        let h = 1e-4;
        let fd = (saturation_pressure(&pc, t + h).unwrap()
            - saturation_pressure(&pc, t - h).unwrap())
            / (2.0 * h);
        assert!(rel(saturation_pressure_slope(&pc, t).unwrap(), fd) < 1e-8);
    }

    #[test]
    fn latent_heat_values() {
        let pc = pc();
        assert_eq!(latent_heat(&pc, 273.15), 2.5e6);
        assert!((latent_heat(&pc, 293.15) - 2.4538e6).abs() < 1e-6);
        assert!((latent_heat(&pc, 303.15) - 2.4307e6).abs() < 1e-6);
        assert!(latent_heat(&pc, 300.0) < latent_heat(&pc, 290.0));
    }

    #[test]
    fn capillary_pressure_values() {
        let pc = pc();
        assert_eq!(capillary_pressure(&pc, 293.15, 1.0).unwrap(), 0.0);
        assert!(
            rel(
                capillary_pressure(&pc, 293.15, 0.5).unwrap(),
                -93_856_276.733692246
            ) < 1e-13
        );
        assert!(
            capillary_pressure(&pc, 293.15, 0.3).unwrap()
                < capillary_pressure(&pc, 293.15, 0.4).unwrap()
        );
        assert!(capillary_pressure(&pc, 293.15, 0.0).is_err());
        assert!(capillary_pressure(&pc, 293.15, -0.1).is_err());
    }

    #[test]
    fn sorption_wood_fiber() {
        let db = MaterialDb::builtin();
        let wf = db.resolve("Wood Fiber 1").unwrap();
        assert_eq!(sorption(wf, 0.5).unwrap(), 9.76);
        assert!((sorption_slope(wf, 0.5).unwrap() - 4.0 * 0.41 * 9.76).abs() < 1e-12);
        assert!(sorption(wf, 1e-12).unwrap() < 1e-3);
        assert!(sorption(wf, 0.0).is_err());
        assert!(sorption(wf, 1.0).is_err());
        assert!(sorption_slope(wf, 1.2).is_err());
    }

    #[test]
    fn sorption_at_half_is_omega1_for_all() {
        for m in MaterialDb::builtin().materials() {
            assert_eq!(sorption(m, 0.5).unwrap(), m.omega1);
        }
    }

    #[test]
    fn vapor_permeability_values() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let mut unit = db.resolve("Wood Fiber 1").unwrap().clone();
        unit.mu = 1.0;
        assert!(
            rel(
                vapor_permeability(&pc, &unit, 293.15),
                1.992382935798953e-10
            ) < 1e-13
        );
        let wf = db.resolve("Wood Fiber 1").unwrap();
        assert!(rel(vapor_permeability(&pc, wf, 293.15), 6.037524047875615e-11) < 1e-13);
        let mut doubled = wf.clone();
        doubled.mu *= 2.0;
        assert!(
            rel(
                vapor_permeability(&pc, &doubled, 293.15),
                0.5 * vapor_permeability(&pc, wf, 293.15)
            ) < 1e-15
        );
    }

    #[test]
    fn liquid_transport_values() {
        let db = MaterialDb::builtin();
        let concrete = db.resolve("Concrete").unwrap();
        let at_free = 3.8 * (0.0125_f64 / 144.0).powi(2);
        assert!(rel(liquid_transport(concrete, 144.0), at_free) < 1e-15);
        assert!(rel(liquid_transport(concrete, 66.47), 6.944968897259638e-10) < 1e-13);
        let w = 40.0;
        assert!(
            rel(
                liquid_transport(concrete, w + 144.0 / 3.0),
                10.0 * liquid_transport(concrete, w)
            ) < 1e-13
        );
    }

    #[test]
    fn liquid_permeability_wood_fiber() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let wf = db.resolve("Wood Fiber 1").unwrap();
        let psat = saturation_pressure(&pc, 293.15).unwrap();
        let state = ThermoState::new(293.15, 0.5 * psat);
        // mpmath composition of D₂, ∂ω/∂φ and ∂φ/∂P₂
        let k2 = liquid_permeability(&pc, wf, &state).unwrap();
        assert!(rel(k2, 1.0049193218204067e-20) < 1e-12);
        let mut dry = wf.clone();
        dry.a = 1e-12;
        assert!(liquid_permeability(&pc, &dry, &state).unwrap() < 1e-38);
    }

    #[test]
    fn liquid_permeability_increases_with_phi() {
        let pc = pc();
        let psat = saturation_pressure(&pc, 293.15).unwrap();
        for m in MaterialDb::builtin().materials() {
            let mut last = 0.0;
            for i in 1..100 {
                let state = ThermoState::new(293.15, i as f64 / 100.0 * psat);
                let k2 = liquid_permeability(&pc, m, &state).unwrap();
                assert!(k2.is_finite() && k2 > last, "{} at phi {}", m.name, i);
                last = k2;
            }
        }
    }

    #[test]
    fn coefficients_wood_fiber() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let wf = db.resolve("Wood Fiber 1").unwrap();
        let c = coefficients(&pc, wf, &ThermoState::new(293.15, 1166.9)).unwrap();
        // phi = 0.49999265 rather than 0.5: mpmath values at the exact state
        assert!(rel(c.cq, 168.0 * 1700.0 + 4180.0 * 9.759882411348411) < 1e-12);
        assert!(rel(c.cq, 3.264e5) < 1e-3);
        assert!(rel(c.cm, 16.006207158066785 / 2333.834290543836746) < 1e-12);
        assert!(rel(c.cm, 6.86e-3) < 1e-3);
        assert_eq!(c.kq, 0.04);
        assert!(c.kmq < 0.0);
        assert_eq!(c.kqm, vapor_permeability(&pc, wf, 293.15));
    }

    #[test]
    fn zero_beta_conductivity_is_constant() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let wf = db.resolve("Wood Fiber 1").unwrap();
        for (t, p) in [(280.0, 300.0), (300.0, 2000.0), (305.0, 4000.0)] {
            assert_eq!(
                coefficients(&pc, wf, &ThermoState::new(t, p)).unwrap().kq,
                wf.kq0
            );
        }
    }

    #[test]
    fn coefficients_reject_invalid_states() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let m = db.resolve("1").unwrap();
        assert!(coefficients(&pc, m, &ThermoState::new(150.0, 10.0)).is_err());
        assert!(coefficients(&pc, m, &ThermoState::new(293.15, 3000.0)).is_err());
        assert!(coefficients(&pc, m, &ThermoState::new(293.15, 0.0)).is_err());
    }

    #[test]
    fn clamping_reports_events() {
        let pc = pc();
        let db = MaterialDb::builtin();
        let m = db.resolve("1").unwrap();
        let (c, phi, clamped) = coefficients_clamped(&pc, m, 293.15, 3000.0).unwrap();
        assert!(clamped);
        assert_eq!(phi, PHI_MAX);
        assert!(c.cm.is_finite() && c.km.is_finite());
        let (_, _, clamped) = coefficients_clamped(&pc, m, 293.15, 1000.0).unwrap();
        assert!(!clamped);
        let (_, phi, clamped) = coefficients_clamped(&pc, m, 293.15, -5.0).unwrap();
        assert!(clamped && phi == PHI_MIN);
    }

    #[test]
    fn constants_override_from_toml() {
        let pc = PhysicalConstants::from_toml("rho2 = 998.0\nr1 = 461.5\n").unwrap();
        assert_eq!(pc.rho2, 998.0);
        assert_eq!(pc.r1, 461.5);
        assert_eq!(pc.psat0, 997.3);
        assert!(PhysicalConstants::from_toml("rho2 = -1.0").is_err());
        assert!(PhysicalConstants::from_toml("bogus = 1.0").is_err());
    }
}
