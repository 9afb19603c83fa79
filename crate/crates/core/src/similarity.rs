//! Kinetic, geometric and dynamic similarity.
//!
//! Two configurations are similar with respect to a number when that number
//! takes the same value in both. Every kind used here is a Fourier number,
//! possibly multiplied by a length-free coupling number, so it scales as
//! `t / L²`. Equivalent lengths and times therefore have closed forms; a
//! bisection on the full number evaluation is kept as a second route.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dimensionless::{
    self, relative_difference, DimensionlessNumbers, ReferenceFrame, SurfaceCoefficients,
};
use crate::error::{Error, Result};
use crate::material_db::MaterialProperties;
use crate::thermo::PhysicalConstants;
use crate::units::DurationValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    FoM,
    FoQ,
    /// `|δ|·Fo^m`
    DeltaFoM,
    /// `γ·Fo^q`
    GammaFoQ,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 4] = [
        SimilarityKind::FoM,
        SimilarityKind::FoQ,
        SimilarityKind::DeltaFoM,
        SimilarityKind::GammaFoQ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::FoM => "fo_m",
            SimilarityKind::FoQ => "fo_q",
            SimilarityKind::DeltaFoM => "delta_fo_m",
            SimilarityKind::GammaFoQ => "gamma_fo_q",
        }
    }

    pub fn evaluate(self, n: &DimensionlessNumbers) -> f64 {
        n.get(self.as_str())
            .expect("kind names are valid number keys")
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimilarityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown similarity kind `{s}` (expected fo_m, fo_q, delta_fo_m or gamma_fo_q)"
                ))
            })
    }
}

fn number(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    kind: SimilarityKind,
    frame: &ReferenceFrame,
) -> Result<f64> {
    let value = kind.evaluate(&dimensionless::numbers(pc, mat, frame)?);
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{kind} of {} is not positive ({value})",
            mat.name
        )));
    }
    Ok(value)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// Thickness of `target` giving the same number as `reference` at
/// `reference_length`. Time and surface data come from `frame`.
pub fn equivalent_length(
    pc: &PhysicalConstants,
    reference: &MaterialProperties,
    reference_length: f64,
    target: &MaterialProperties,
    kind: SimilarityKind,
    frame: &ReferenceFrame,
) -> Result<f64> {
    check_positive("reference length", reference_length)?;
    let n_ref = number(pc, reference, kind, frame)?;
    let n_target = number(pc, target, kind, frame)?;
    Ok(reference_length * (n_target / n_ref).sqrt())
}

/// Time over which `target` reaches the number `reference` reaches over
/// `reference_time`, both at the frame's length.
pub fn equivalent_time(
    pc: &PhysicalConstants,
    reference: &MaterialProperties,
    reference_time: f64,
    target: &MaterialProperties,
    kind: SimilarityKind,
    frame: &ReferenceFrame,
) -> Result<f64> {
    check_positive("reference time", reference_time)?;
    let n_ref = number(pc, reference, kind, frame)?;
    let n_target = number(pc, target, kind, frame)?;
    Ok(reference_time * n_ref / n_target)
}

/// Bisection in `ln L` on `N_target(L) = N_reference(L_ref)`.
pub fn equivalent_length_bisection(
    pc: &PhysicalConstants,
    reference: &MaterialProperties,
    reference_length: f64,
    target: &MaterialProperties,
    kind: SimilarityKind,
    frame: &ReferenceFrame,
) -> Result<f64> {
    check_positive("reference length", reference_length)?;
    let goal = number(pc, reference, kind, &frame.with_length(reference_length))?;
    let f = |ln_l: f64| -> Result<f64> {
        Ok(number(pc, target, kind, &frame.with_length(ln_l.exp()))?.ln() - goal.ln())
    };
    bisect(f, reference_length.ln())
}

/// Bisection in `ln t` on `N_target(t) = N_reference(t_ref)`.
pub fn equivalent_time_bisection(
    pc: &PhysicalConstants,
    reference: &MaterialProperties,
    reference_time: f64,
    target: &MaterialProperties,
    kind: SimilarityKind,
    frame: &ReferenceFrame,
) -> Result<f64> {
    check_positive("reference time", reference_time)?;
    let goal = number(pc, reference, kind, &frame.with_time(reference_time))?;
    let f = |ln_t: f64| -> Result<f64> {
        Ok(number(pc, target, kind, &frame.with_time(ln_t.exp()))?.ln() - goal.ln())
    };
    bisect(f, reference_time.ln())
}

/// Root of a monotone function of a log variable, bracketed by expanding
/// around `start`.
fn bisect(f: impl Fn(f64) -> Result<f64>, start: f64) -> Result<f64> {
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok(start.exp());
    }
    let mut width = 1.0;
    let (mut lo, mut hi);
    loop {
        lo = start - width;
        hi = start + width;
        let (flo, fhi) = (f(lo)?, f(hi)?);
        if flo.signum() != fhi.signum() {
            break;
        }
        width *= 2.0;
        if width > 200.0 {
            return Err(Error::InvalidInput(
                "no equivalent value could be bracketed".into(),
            ));
        }
    }
    let increasing = f(hi)? > f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if (fm > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// A physical configuration: one material slab exposed on one side to a
/// periodic climate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Design {
    /// Material id or name.
    pub material: String,
    /// Thickness, m.
    pub length: f64,
    /// Reference time, s.
    pub time: f64,
    /// Period of the boundary forcing, s.
    pub period: f64,
    pub surface: SurfaceCoefficients,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignFile {
    material: String,
    length: f64,
    time: DurationValue,
    period: DurationValue,
    hq: f64,
    hm: f64,
}

impl Design {
    /// The wood fibre wall of the dynamic scaling example: 20 cm, one year,
    /// daily forcing, inside surface.
    pub fn wood_fiber_example() -> Self {
        Design {
            material: "Wood Fiber 1".into(),
            length: 0.2,
            time: 365.0 * crate::units::DAY,
            period: 24.0 * crate::units::HOUR,
            surface: SurfaceCoefficients::INSIDE,
        }
    }

    /// Parses a TOML design. `time` and `period` accept duration literals.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: DesignFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let design = Design {
            material: raw.material,
            length: raw.length,
            time: raw.time.seconds()?,
            period: raw.period.seconds()?,
            surface: SurfaceCoefficients::new(raw.hq, raw.hm),
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("length", self.length)?;
        check_positive("time", self.time)?;
        check_positive("period", self.period)?;
        check_positive("hq", self.surface.hq)?;
        check_positive("hm", self.surface.hm)
    }

    /// `base` with this design's length, time and surface coefficients.
    pub fn frame(&self, base: &ReferenceFrame) -> ReferenceFrame {
        base.with_length(self.length)
            .with_time(self.time)
            .with_surface(self.surface)
    }

    /// Forcing period in units of the reference time.
    pub fn dimensionless_period(&self) -> f64 {
        self.period / self.time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledDesign {
    pub pi: f64,
    pub design: Design,
}

/// Lengths times `Π`, times times `Π²`, surface coefficients over `Π`.
/// Fourier and Biot numbers and the dimensionless period are unchanged.
pub fn dynamic_scale(design: &Design, pi: f64) -> Result<ScaledDesign> {
    if !(pi.is_finite() && pi > 0.0) {
        return Err(Error::domain("pi", pi, "pi > 0"));
    }
    design.validate()?;
    Ok(ScaledDesign {
        pi,
        design: Design {
            material: design.material.clone(),
            length: design.length * pi,
            time: design.time * pi * pi,
            period: design.period * pi * pi,
            surface: SurfaceCoefficients::new(design.surface.hq / pi, design.surface.hm / pi),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilitudeReport {
    pub a: DimensionlessNumbers,
    pub b: DimensionlessNumbers,
    /// Relative differences in [`DimensionlessNumbers::NAMES`] order.
    pub relative_differences: [f64; 8],
    /// Relative difference of the dimensionless forcing periods.
    pub period_difference: f64,
    pub same_material: bool,
    pub pass: bool,
}

impl SimilitudeReport {
    pub const TOLERANCE: f64 = 1e-9;

    /// Names of the numbers that differ beyond the tolerance.
    pub fn failing(&self) -> Vec<&'static str> {
        DimensionlessNumbers::NAMES
            .iter()
            .zip(self.relative_differences)
            .filter(|(_, d)| *d >= Self::TOLERANCE)
            .map(|(n, _)| *n)
            .collect()
    }
}

/// Compares the dimensionless problems of two designs.
pub fn check_similitude(
    pc: &PhysicalConstants,
    mat_a: &MaterialProperties,
    a: &Design,
    mat_b: &MaterialProperties,
    b: &Design,
    base: &ReferenceFrame,
) -> Result<SimilitudeReport> {
    let na = dimensionless::numbers(pc, mat_a, &a.frame(base))?;
    let nb = dimensionless::numbers(pc, mat_b, &b.frame(base))?;
    let mut relative_differences = [0.0; 8];
    for (d, (x, y)) in relative_differences
        .iter_mut()
        .zip(na.values().into_iter().zip(nb.values()))
    {
        *d = relative_difference(x, y);
    }
    let period_difference = relative_difference(a.dimensionless_period(), b.dimensionless_period());
    let same_material = mat_a == mat_b;
    let pass = same_material
        && period_difference < SimilitudeReport::TOLERANCE
        && relative_differences
            .iter()
            .all(|d| *d < SimilitudeReport::TOLERANCE);
    Ok(SimilitudeReport {
        a: na,
        b: nb,
        relative_differences,
        period_difference,
        same_material,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material_db::MaterialDb;

    fn setup() -> (PhysicalConstants, MaterialDb, ReferenceFrame) {
        (
            PhysicalConstants::default(),
            MaterialDb::builtin(),
            ReferenceFrame::default(),
        )
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in SimilarityKind::ALL {
            assert_eq!(k.as_str().parse::<SimilarityKind>().unwrap(), k);
        }
        assert!("fo".parse::<SimilarityKind>().is_err());
    }

    #[test]
    fn identity_when_target_is_reference() {
        let (pc, db, f) = setup();
        let m = db.resolve("Wood Wool").unwrap();
        for k in SimilarityKind::ALL {
            assert!((equivalent_length(&pc, m, 0.2, m, k, &f).unwrap() - 0.2).abs() < 1e-15);
            assert!((equivalent_time(&pc, m, 36_000.0, m, k, &f).unwrap() - 36_000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn wood_wool_to_cellulose() {
        let (pc, db, f) = setup();
        let ww = db.resolve("Wood Wool").unwrap();
        let cel = db.resolve("Cellulose CPH").unwrap();
        let l = equivalent_length(&pc, ww, 0.2, cel, SimilarityKind::FoM, &f).unwrap();
        assert!((l - 0.48).abs() < 0.02, "{l}");
    }

    #[test]
    fn concrete_to_extruded_brick() {
        let (pc, db, f) = setup();
        let c = db.resolve("Concrete").unwrap();
        let eb = db.resolve("Extruded Brick").unwrap();
        let t = equivalent_time(&pc, c, 36_000.0, eb, SimilarityKind::FoM, &f).unwrap();
        assert!((t / 3600.0 - 0.6).abs() / 0.6 < 0.15, "{t}");
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let (pc, db, f) = setup();
        let ww = db.resolve("Wood Wool").unwrap();
        for target in ["Cellulose CPH", "Aerated Concrete", "Granite"] {
            let t = db.resolve(target).unwrap();
            for k in SimilarityKind::ALL {
                let a = equivalent_length(&pc, ww, 0.2, t, k, &f).unwrap();
                let b = equivalent_length_bisection(&pc, ww, 0.2, t, k, &f).unwrap();
                assert!(relative_difference(a, b) < 1e-10, "{target} {k}: {a} {b}");
                let a = equivalent_time(&pc, ww, 3600.0, t, k, &f).unwrap();
                let b = equivalent_time_bisection(&pc, ww, 3600.0, t, k, &f).unwrap();
                assert!(relative_difference(a, b) < 1e-10, "{target} {k}: {a} {b}");
            }
        }
    }

    #[test]
    fn dynamic_scale_example() {
        let d = Design::wood_fiber_example();
        let s = dynamic_scale(&d, 0.2).unwrap().design;
        assert!((s.length - 0.04).abs() < 1e-15);
        assert!((s.period - 0.96 * 3600.0).abs() < 1e-9);
        assert!((s.time - 14.6 * 86_400.0).abs() < 1e-6);
        assert!((s.surface.hq - 25.0).abs() < 1e-12);
        assert!((s.surface.hm - 2.5e-8).abs() < 1e-22);
        assert!(dynamic_scale(&d, 0.0).is_err());
        assert!(dynamic_scale(&d, -1.0).is_err());
        assert_eq!(dynamic_scale(&d, 1.0).unwrap().design, d);
    }

    #[test]
    fn scaled_design_is_similar() {
        let (pc, db, f) = setup();
        let d = Design::wood_fiber_example();
        let m = db.resolve(&d.material).unwrap();
        let s = dynamic_scale(&d, 0.2).unwrap().design;
        let r = check_similitude(&pc, m, &d, m, &s, &f).unwrap();
        assert!(r.pass);
        assert!(r.relative_differences.iter().all(|x| *x < 1e-12));
    }

    #[test]
    fn doubled_time_fails_on_fourier_only() {
        let (pc, db, f) = setup();
        let d = Design::wood_fiber_example();
        let m = db.resolve(&d.material).unwrap();
        let mut e = d.clone();
        e.time *= 2.0;
        e.period *= 2.0;
        let r = check_similitude(&pc, m, &d, m, &e, &f).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failing(), vec!["fo_m", "fo_q"]);
    }

    #[test]
    fn design_from_toml() {
        let d = Design::from_toml(
            "material = \"Wood Fiber 1\"\nlength = 0.2\ntime = \"365d\"\nperiod = \"24h\"\nhq = 5.0\nhm = 5e-9\n",
        )
        .unwrap();
        assert_eq!(d, Design::wood_fiber_example());
        let d = Design::from_toml(
            "material = \"1\"\nlength = 0.1\ntime = 3600.0\nperiod = 60.0\nhq = 5.0\nhm = 5e-9\n",
        )
        .unwrap();
        assert_eq!(d.time, 3600.0);
        assert!(Design::from_toml(
            "material = \"1\"\nlength = -0.1\ntime = 1.0\nperiod = 1.0\nhq = 5.0\nhm = 5e-9\n"
        )
        .is_err());
        assert!(Design::from_toml("material = \"1\"").is_err());
    }
}
