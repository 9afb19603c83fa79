//! Multi-layer walls: per-layer numbers and directional comparison.
//!
//! Each layer is scaled with its own thickness. Only the outermost layer
//! sees the outside surface coefficients and only the innermost one the
//! inside coefficients; interior layers carry Fourier and coupling numbers.
//!
//! Config files are line based:
//!
//! ```text
//! # outside to inside
//! layer = Concrete, 0.20
//! layer = Wood Fiber 1, 0.20
//! layer = Gypsum Board, 0.0125
//! outside_h = 15, 1e-7
//! inside_h = 5, 5e-9
//! ```

use std::cmp::Ordering;

use serde::Serialize;

use crate::dimensionless::{self, ReferenceFrame, SurfaceCoefficients};
use crate::error::{Error, Result};
use crate::material_db::MaterialDb;
use crate::thermo::PhysicalConstants;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    /// Material id or name.
    pub material: String,
    /// Thickness, m.
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallConfig {
    /// Outside to inside.
    pub layers: Vec<Layer>,
    pub outside: SurfaceCoefficients,
    pub inside: SurfaceCoefficients,
}

fn layer(material: &str, thickness: f64) -> Layer {
    Layer {
        material: material.into(),
        thickness,
    }
}

impl WallConfig {
    /// Concrete / wood fibre / gypsum board.
    pub fn builtin_config1() -> Self {
        WallConfig {
            layers: vec![
                layer("Concrete", 0.20),
                layer("Wood Fiber 1", 0.20),
                layer("Gypsum Board", 0.0125),
            ],
            outside: SurfaceCoefficients::OUTSIDE,
            inside: SurfaceCoefficients::INSIDE,
        }
    }

    /// Extruded brick / cellulose / radial spruce.
    pub fn builtin_config2() -> Self {
        WallConfig {
            layers: vec![
                layer("Extruded Brick", 0.20),
                layer("18", 0.20),
                layer("Radial Spruce", 0.02),
            ],
            outside: SurfaceCoefficients::OUTSIDE,
            inside: SurfaceCoefficients::INSIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("wall has no layers".into()));
        }
        for l in &self.layers {
            if !(l.thickness.is_finite() && l.thickness > 0.0) {
                return Err(Error::Config(format!(
                    "layer `{}`: thickness must be positive, got {}",
                    l.material, l.thickness
                )));
            }
        }
        for (side, s) in [("outside_h", self.outside), ("inside_h", self.inside)] {
            if !(s.hq > 0.0 && s.hm > 0.0 && s.hq.is_finite() && s.hm.is_finite()) {
                return Err(Error::Config(format!("{side} must be positive")));
            }
        }
        Ok(())
    }

    /// Parses the line-based format. Missing surface lines keep the standard
    /// outside and inside coefficients.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = WallConfig {
            layers: Vec::new(),
            outside: SurfaceCoefficients::OUTSIDE,
            inside: SurfaceCoefficients::INSIDE,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`"))?;
            let (first, second) = value
                .rsplit_once(',')
                .ok_or_else(|| err("expected two comma-separated values"))?;
            let number = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|_| err(&format!("cannot parse number `{}`", s.trim())))
            };
            match key.trim() {
                "layer" => {
                    let name = first.trim();
                    if name.is_empty() {
                        return Err(err("missing material"));
                    }
                    config.layers.push(layer(name, number(second)?));
                }
                "outside_h" => {
                    config.outside = SurfaceCoefficients::new(number(first)?, number(second)?)
                }
                "inside_h" => {
                    config.inside = SurfaceCoefficients::new(number(first)?, number(second)?)
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l in &self.layers {
            s.push_str(&format!("layer = {}, {}\n", l.material, l.thickness));
        }
        s.push_str(&format!(
            "outside_h = {}, {}\n",
            self.outside.hq, self.outside.hm
        ));
        s.push_str(&format!(
            "inside_h = {}, {}\n",
            self.inside.hq, self.inside.hm
        ));
        s
    }

    /// Copy with layer `i` thickness multiplied by `factors[i]`.
    pub fn with_thickness_factors(&self, factors: &[f64]) -> Self {
        let mut c = self.clone();
        for (l, f) in c.layers.iter_mut().zip(factors) {
            l.thickness *= f;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiotNumbers {
    pub bi_q: f64,
    pub bi_m: f64,
    pub bi_qm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerNumbers {
    pub material: String,
    pub thickness: f64,
    pub fo_m: f64,
    pub fo_q: f64,
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
    /// Present on the outermost layer.
    pub outside: Option<BiotNumbers>,
    /// Present on the innermost layer.
    pub inside: Option<BiotNumbers>,
}

impl LayerNumbers {
    /// Fourier and coupling numbers by key (see [`COMPARED_KEYS`] and
    /// `delta`, `abs_delta`, `gamma`, `eta`).
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "fo_m" => self.fo_m,
            "fo_q" => self.fo_q,
            "delta" => self.delta,
            "abs_delta" => self.delta.abs(),
            "gamma" => self.gamma,
            "eta" => self.eta,
            "delta_fo_m" => self.delta.abs() * self.fo_m,
            "gamma_fo_q" => self.gamma * self.fo_q,
            _ => return None,
        })
    }
}

/// Per-layer numbers. `base` supplies the reference state and time; its
/// length and surface coefficients are replaced per layer.
pub fn layer_numbers(
    pc: &PhysicalConstants,
    db: &MaterialDb,
    config: &WallConfig,
    base: &ReferenceFrame,
) -> Result<Vec<LayerNumbers>> {
    config.validate()?;
    let last = config.layers.len() - 1;
    config
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mat = db.resolve(&l.material)?;
            let frame = base.with_length(l.thickness);
            let reference = dimensionless::reference_coefficients(pc, mat, &frame)?;
            let biot = |surface: SurfaceCoefficients| {
                let n = dimensionless::numbers_from(&reference, &frame.with_surface(surface));
                BiotNumbers {
                    bi_q: n.bi_q,
                    bi_m: n.bi_m,
                    bi_qm: n.bi_qm,
                }
            };
            let n = dimensionless::numbers_from(&reference, &frame);
            Ok(LayerNumbers {
                material: mat.name.clone(),
                thickness: l.thickness,
                fo_m: n.fo_m,
                fo_q: n.fo_q,
                delta: n.delta,
                gamma: n.gamma,
                eta: n.eta,
                outside: (i == 0).then(|| biot(config.outside)),
                inside: (i == last).then(|| biot(config.inside)),
            })
        })
        .collect()
}

/// Numbers compared layer by layer.
pub const COMPARED_KEYS: [&str; 4] = ["fo_m", "fo_q", "delta_fo_m", "gamma_fo_q"];

/// Relative tolerance under which two values count as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Which configuration has the larger value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Larger {
    A,
    B,
    Tie,
}

impl Larger {
    fn of(a: f64, b: f64) -> Self {
        if dimensionless::relative_difference(a, b) < TIE_TOLERANCE {
            return Larger::Tie;
        }
        match a.partial_cmp(&b) {
            Some(Ordering::Greater) => Larger::A,
            Some(Ordering::Less) => Larger::B,
            _ => Larger::Tie,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Larger::A => Larger::B,
            Larger::B => Larger::A,
            Larger::Tie => Larger::Tie,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Larger::A => "A",
            Larger::B => "B",
            Larger::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberComparison {
    pub key: &'static str,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Per layer, outside to inside.
    pub larger: Vec<Larger>,
    /// False when one configuration is larger in some layer and smaller in
    /// another.
    pub totally_ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallComparison {
    pub layers_a: Vec<LayerNumbers>,
    pub layers_b: Vec<LayerNumbers>,
    pub numbers: Vec<NumberComparison>,
}

impl WallComparison {
    pub const FLAG: &'static str = "not totally ordered - further simulation required";

    pub fn get(&self, key: &str) -> Option<&NumberComparison> {
        self.numbers.iter().find(|n| n.key == key)
    }

    pub fn further_simulation_required(&self) -> bool {
        self.numbers.iter().any(|n| !n.totally_ordered)
    }
}

pub fn compare(
    pc: &PhysicalConstants,
    db: &MaterialDb,
    a: &WallConfig,
    b: &WallConfig,
    base: &ReferenceFrame,
) -> Result<WallComparison> {
    if a.layers.len() != b.layers.len() {
        return Err(Error::InvalidInput(format!(
            "cannot compare walls with {} and {} layers",
            a.layers.len(),
            b.layers.len()
        )));
    }
    let layers_a = layer_numbers(pc, db, a, base)?;
    let layers_b = layer_numbers(pc, db, b, base)?;
    let numbers = COMPARED_KEYS
        .iter()
        .map(|&key| {
            let va: Vec<f64> = layers_a.iter().map(|l| l.get(key).unwrap()).collect();
            let vb: Vec<f64> = layers_b.iter().map(|l| l.get(key).unwrap()).collect();
            let larger: Vec<Larger> = va
                .iter()
                .zip(&vb)
                .map(|(x, y)| Larger::of(*x, *y))
                .collect();
            let totally_ordered = !(larger.contains(&Larger::A) && larger.contains(&Larger::B));
            NumberComparison {
                key,
                a: va,
                b: vb,
                larger,
                totally_ordered,
            }
        })
        .collect();
    Ok(WallComparison {
        layers_a,
        layers_b,
        numbers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensionless::relative_difference;

    fn setup() -> (PhysicalConstants, MaterialDb, ReferenceFrame) {
        (
            PhysicalConstants::default(),
            MaterialDb::builtin(),
            ReferenceFrame::default(),
        )
    }

    #[test]
    fn parse_roundtrip() {
        let c = WallConfig::builtin_config1();
        assert_eq!(WallConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parse_comments_and_defaults() {
        let c = WallConfig::parse("# test\nlayer = Wood Fiber 1, 0.1  # insulation\n\n").unwrap();
        assert_eq!(c.layers, vec![layer("Wood Fiber 1", 0.1)]);
        assert_eq!(c.outside, SurfaceCoefficients::OUTSIDE);
        let c = WallConfig::parse("layer = 1, 0.1\noutside_h = 20, 2e-7\n").unwrap();
        assert_eq!(c.outside, SurfaceCoefficients::new(20.0, 2e-7));
    }

    #[test]
    fn parse_errors() {
        assert!(WallConfig::parse("").is_err());
        assert!(WallConfig::parse("layer = Concrete").is_err());
        assert!(WallConfig::parse("layer = Concrete, -0.1").is_err());
        assert!(WallConfig::parse("layer = Concrete, abc").is_err());
        assert!(WallConfig::parse("floor = Concrete, 0.1").is_err());
        assert!(WallConfig::parse("layer = Concrete, 0.1\ninside_h = 5, 0").is_err());
    }

    #[test]
    fn single_layer_matches_numbers() {
        let (pc, db, f) = setup();
        let c = WallConfig::parse("layer = Wood Fiber 1, 0.2\n").unwrap();
        let l = &layer_numbers(&pc, &db, &c, &f).unwrap()[0];
        let wf = db.resolve("Wood Fiber 1").unwrap();
        let frame = f.with_length(0.2);
        let inside = dimensionless::numbers(&pc, wf, &frame.with_surface(c.inside)).unwrap();
        let outside = dimensionless::numbers(&pc, wf, &frame.with_surface(c.outside)).unwrap();
        assert_eq!(
            (l.fo_m, l.fo_q, l.delta, l.gamma, l.eta),
            (
                inside.fo_m,
                inside.fo_q,
                inside.delta,
                inside.gamma,
                inside.eta
            )
        );
        assert_eq!(l.inside.unwrap().bi_m, inside.bi_m);
        assert_eq!(l.outside.unwrap().bi_q, outside.bi_q);
    }

    #[test]
    fn interior_layers_have_no_biot() {
        let (pc, db, f) = setup();
        let ls = layer_numbers(&pc, &db, &WallConfig::builtin_config1(), &f).unwrap();
        assert!(ls[0].outside.is_some() && ls[0].inside.is_none());
        assert!(ls[1].outside.is_none() && ls[1].inside.is_none());
        assert!(ls[2].outside.is_none() && ls[2].inside.is_some());
    }

    #[test]
    fn splitting_a_layer() {
        let (pc, db, f) = setup();
        let whole = WallConfig::parse("layer = Concrete, 0.2\n").unwrap();
        let split = WallConfig::parse("layer = Concrete, 0.1\nlayer = Concrete, 0.1\n").unwrap();
        let w = &layer_numbers(&pc, &db, &whole, &f).unwrap()[0];
        let s = layer_numbers(&pc, &db, &split, &f).unwrap();
        assert_eq!(
            (s[0].delta, s[0].gamma, s[0].eta),
            (w.delta, w.gamma, w.eta)
        );
        assert!(relative_difference(s[1].fo_m, 4.0 * w.fo_m) < 1e-14);
        assert!(relative_difference(s[0].fo_q, 4.0 * w.fo_q) < 1e-14);
        assert!(
            relative_difference(s[0].outside.unwrap().bi_q, 0.5 * w.outside.unwrap().bi_q) < 1e-14
        );
        assert!(
            relative_difference(s[1].inside.unwrap().bi_m, 0.5 * w.inside.unwrap().bi_m) < 1e-14
        );
    }

    #[test]
    fn self_comparison_ties() {
        let (pc, db, f) = setup();
        let c = WallConfig::builtin_config1();
        let r = compare(&pc, &db, &c, &c, &f).unwrap();
        assert!(r
            .numbers
            .iter()
            .all(|n| n.larger.iter().all(|l| *l == Larger::Tie)));
        assert!(!r.further_simulation_required());
    }

    #[test]
    fn builtin_walls() {
        let (pc, db, f) = setup();
        let (c1, c2) = (WallConfig::builtin_config1(), WallConfig::builtin_config2());
        let r = compare(&pc, &db, &c1, &c2, &f).unwrap();
        use Larger::{A, B};
        assert_eq!(r.get("fo_m").unwrap().larger, vec![B, B, A]);
        assert_eq!(r.get("delta_fo_m").unwrap().larger[2], A);
        assert_eq!(r.get("fo_q").unwrap().larger, vec![A, B, A]);
        assert!(!r.get("fo_q").unwrap().totally_ordered);
        assert_eq!(r.get("gamma_fo_q").unwrap().larger, vec![B, B, A]);
        assert!(r.further_simulation_required());

        let swapped = compare(&pc, &db, &c2, &c1, &f).unwrap();
        for (x, y) in r.numbers.iter().zip(&swapped.numbers) {
            let rev: Vec<Larger> = x.larger.iter().map(|l| l.reversed()).collect();
            assert_eq!(rev, y.larger);
        }
    }

    #[test]
    fn mismatched_layer_counts() {
        let (pc, db, f) = setup();
        let one = WallConfig::parse("layer = Concrete, 0.2\n").unwrap();
        assert!(compare(&pc, &db, &one, &WallConfig::builtin_config1(), &f).is_err());
    }

    #[test]
    fn unknown_material() {
        let (pc, db, f) = setup();
        let c = WallConfig::parse("layer = Unobtainium, 0.2\n").unwrap();
        assert!(matches!(
            layer_numbers(&pc, &db, &c, &f),
            Err(Error::UnknownMaterial(_))
        ));
    }
}
