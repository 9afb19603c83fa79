//! Material property database.
//!
//! Every material is described by nine fitted properties (dry density,
//! specific heat, dry conductivity and its moisture slope, vapour resistance
//! factor, the two Oswin sorption parameters, the water adsorption
//! coefficient and the free water content) plus identity metadata.
//!
//! The built-in dataset ships as `data/materials.csv` and is embedded at
//! compile time. Category membership is stored in the file as data and can be
//! edited there; it only affects grouping in reports.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_CSV: &str = include_str!("../data/materials.csv");

/// Column order of the database CSV.
pub const CSV_HEADER: [&str; 13] = [
    "id",
    "name",
    "category",
    "rho0",
    "c0",
    "kq0",
    "beta",
    "mu",
    "alpha1",
    "omega1",
    "A",
    "omegaf",
    "Lref_default",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Cement,
    Finishing,
    Insulation,
    Masonry,
    Mortar,
    Stone,
    Wood,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Cement,
        Category::Finishing,
        Category::Insulation,
        Category::Masonry,
        Category::Mortar,
        Category::Stone,
        Category::Wood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Cement => "cement",
            Category::Finishing => "finishing",
            Category::Insulation => "insulation",
            Category::Masonry => "masonry",
            Category::Mortar => "mortar",
            Category::Stone => "stone",
            Category::Wood => "wood",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown category `{s}`")))
    }
}

/// Hygrothermal properties of one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialProperties {
    pub id: u32,
    pub name: String,
    pub category: Category,
    /// Dry density, kg/m³.
    pub rho0: f64,
    /// Specific heat, J/(kg·K).
    pub c0: f64,
    /// Dry thermal conductivity, W/(m·K).
    pub kq0: f64,
    /// Slope of conductivity with moisture content, W·m²/(kg·K).
    pub beta: f64,
    /// Vapour resistance factor.
    pub mu: f64,
    /// Oswin exponent.
    pub alpha1: f64,
    /// Oswin scale, kg/m³ (moisture content at φ = 0.5).
    pub omega1: f64,
    /// Water adsorption coefficient, kg/(m²·s^0.5).
    pub a: f64,
    /// Free water content, kg/m³.
    pub omegaf: f64,
    /// Default reference thickness, m.
    pub lref_default: f64,
}

impl MaterialProperties {
    /// Checks the physical admissibility of the properties.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Validation {
                id: self.id,
                message,
            })
        };
        let positive = [
            ("rho0", self.rho0),
            ("c0", self.c0),
            ("kq0", self.kq0),
            ("alpha1", self.alpha1),
            ("omega1", self.omega1),
            ("omegaf", self.omegaf),
            ("Lref_default", self.lref_default),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return fail(format!("{name} must be strictly positive, got {value}"));
            }
        }
        for (name, value) in [("beta", self.beta), ("A", self.a)] {
            if !(value.is_finite() && value >= 0.0) {
                return fail(format!("{name} must be non-negative, got {value}"));
            }
        }
        if !(self.mu.is_finite() && self.mu >= 1.0) {
            return fail(format!("mu must be at least 1, got {}", self.mu));
        }
        if self.name.trim().is_empty() {
            return fail("empty name".to_string());
        }
        Ok(())
    }
}

/// An immutable collection of materials with lookup by id or name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialDb {
    materials: Vec<MaterialProperties>,
}

impl MaterialDb {
    pub fn new(materials: Vec<MaterialProperties>) -> Self {
        MaterialDb { materials }
    }

    /// The embedded 49-material dataset.
    pub fn builtin() -> Self {
        let materials =
            load_database(BUILTIN_CSV.as_bytes()).expect("embedded material dataset is valid");
        MaterialDb { materials }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(MaterialDb {
            materials: load_database(file)?,
        })
    }

    pub fn materials(&self) -> &[MaterialProperties] {
        &self.materials
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn by_id(&self, id: u32) -> Option<&MaterialProperties> {
        self.materials.iter().find(|m| m.id == id)
    }

    /// Case-insensitive exact name match.
    pub fn by_name(&self, name: &str) -> Option<&MaterialProperties> {
        let name = name.trim();
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
    }

    /// Resolves a numeric id or a name.
    pub fn resolve(&self, key: &str) -> Result<&MaterialProperties> {
        let found = match key.trim().parse::<u32>() {
            Ok(id) => self.by_id(id),
            Err(_) => self.by_name(key),
        };
        found.ok_or_else(|| Error::UnknownMaterial(key.to_string()))
    }

    pub fn by_category(&self, category: Category) -> impl Iterator<Item = &MaterialProperties> {
        self.materials
            .iter()
            .filter(move |m| m.category == category)
    }
}

/// Reads a material table in the database CSV format.
///
/// An empty input yields an empty list.
pub fn load_database<R: Read>(reader: R) -> Result<Vec<MaterialProperties>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = csv.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(record) => record.map_err(|e| csv_error(e, 1))?,
    };
    let found: Vec<&str> = header.iter().collect();
    if found != CSV_HEADER {
        return Err(Error::Parse {
            row: 1,
            column: "header".to_string(),
            message: format!(
                "expected `{}`, found `{}`",
                CSV_HEADER.join(","),
                found.join(",")
            ),
        });
    }

    let mut materials = Vec::new();
    for (index, record) in records.enumerate() {
        let row = index as u64 + 2;
        let record = record.map_err(|e| csv_error(e, row))?;
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                row,
                column: "*".to_string(),
                message: format!(
                    "expected {} fields, found {}",
                    CSV_HEADER.len(),
                    record.len()
                ),
            });
        }
        let cell = |col: usize| record.get(col).unwrap_or_default();
        let number = |col: usize| -> Result<f64> {
            cell(col).parse::<f64>().map_err(|e| Error::Parse {
                row,
                column: CSV_HEADER[col].to_string(),
                message: format!("`{}`: {e}", cell(col)),
            })
        };
        let id = cell(0).parse::<u32>().map_err(|e| Error::Parse {
            row,
            column: "id".to_string(),
            message: format!("`{}`: {e}", cell(0)),
        })?;
        let category = cell(2).parse::<Category>().map_err(|e| Error::Parse {
            row,
            column: "category".to_string(),
            message: e.to_string(),
        })?;
        let material = MaterialProperties {
            id,
            name: cell(1).to_string(),
            category,
            rho0: number(3)?,
            c0: number(4)?,
            kq0: number(5)?,
            beta: number(6)?,
            mu: number(7)?,
            alpha1: number(8)?,
            omega1: number(9)?,
            a: number(10)?,
            omegaf: number(11)?,
            lref_default: number(12)?,
        };
        material.validate()?;
        materials.push(material);
    }
    Ok(materials)
}

fn csv_error(e: csv::Error, row: u64) -> Error {
    Error::Parse {
        row,
        column: "*".to_string(),
        message: e.to_string(),
    }
}

/// Writes materials in the database CSV format.
pub fn write_database<W: Write>(writer: W, materials: &[MaterialProperties]) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    csv.write_record(CSV_HEADER).map_err(io)?;
    for m in materials {
        let numbers = [
            m.rho0,
            m.c0,
            m.kq0,
            m.beta,
            m.mu,
            m.alpha1,
            m.omega1,
            m.a,
            m.omegaf,
            m.lref_default,
        ];
        let mut record = vec![m.id.to_string(), m.name.clone(), m.category.to_string()];
        record.extend(numbers.iter().map(f64::to_string));
        csv.write_record(&record).map_err(io)?;
    }
    csv.flush()?;
    Ok(())
}

/// The embedded dataset as shipped.
pub fn builtin_csv() -> &'static str {
    BUILTIN_CSV
}

/// One measured point of a sorption isotherm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorptionPoint {
    pub phi: f64,
    pub omega: f64,
}

/// One measured point of conductivity against moisture content.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductivityPoint {
    pub omega: f64,
    pub kq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorptionFit {
    pub alpha1: f64,
    pub omega1: f64,
    /// Root-mean-square residual of `ln ω`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductivityFit {
    pub kq0: f64,
    pub beta: f64,
    /// Root-mean-square residual of `kq`, W/(m·K).
    pub residual: f64,
}

/// Ordinary least-squares line through `(x, y)`; returns `(intercept, slope)`.
fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (&xi, &yi)| {
        let dx = xi - mean_x;
        (sxy + dx * (yi - mean_y), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    (mean_y - slope * mean_x, slope)
}

fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = residuals.fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
    (sum / n as f64).sqrt()
}

fn count_distinct(values: &mut [f64]) -> usize {
    values.sort_by(f64::total_cmp);
    let mut n = 0;
    let mut last = None;
    for &v in values.iter() {
        if last != Some(v) {
            n += 1;
            last = Some(v);
        }
    }
    n
}

/// Fits the Oswin isotherm `ω = ω₁·(φ/(1−φ))^α₁` by linear least squares on
/// `ln ω = ln ω₁ + α₁·ln(φ/(1−φ))`.
pub fn fit_sorption(points: &[SorptionPoint]) -> Result<SorptionFit> {
    for p in points {
        if !(p.phi > 0.0 && p.phi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "relative humidity {} outside (0, 1)",
                p.phi
            )));
        }
        if !(p.omega > 0.0 && p.omega.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "moisture content {} must be positive",
                p.omega
            )));
        }
    }
    let mut phis: Vec<f64> = points.iter().map(|p| p.phi).collect();
    if count_distinct(&mut phis) < 2 {
        return Err(Error::InsufficientData(
            "sorption fit needs at least 2 distinct relative humidities".to_string(),
        ));
    }

    let x: Vec<f64> = points
        .iter()
        .map(|p| (p.phi / (1.0 - p.phi)).ln())
        .collect();
    let y: Vec<f64> = points.iter().map(|p| p.omega.ln()).collect();
    let (intercept, alpha1) = least_squares_line(&x, &y);
    if !(alpha1 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fitted Oswin exponent {alpha1} is not positive"
        )));
    }
    let residual = rms(x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| yi - intercept - alpha1 * xi));
    Ok(SorptionFit {
        alpha1,
        omega1: intercept.exp(),
        residual,
    })
}

/// Fits `kq = kq0 + β·ω`. A negative unconstrained slope is clipped to zero,
/// in which case `kq0` is the mean conductivity.
pub fn fit_conductivity(points: &[ConductivityPoint]) -> Result<ConductivityFit> {
    let mut omegas: Vec<f64> = points.iter().map(|p| p.omega).collect();
    if count_distinct(&mut omegas) < 2 {
        return Err(Error::InsufficientData(
            "conductivity fit needs at least 2 distinct moisture contents".to_string(),
        ));
    }
    let x: Vec<f64> = points.iter().map(|p| p.omega).collect();
    let y: Vec<f64> = points.iter().map(|p| p.kq).collect();
    let (mut kq0, mut beta) = least_squares_line(&x, &y);
    if beta < 0.0 {
        beta = 0.0;
        kq0 = y.iter().sum::<f64>() / y.len() as f64;
    }
    if !(kq0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fitted dry conductivity {kq0} is not positive"
        )));
    }
    let residual = rms(x.iter().zip(&y).map(|(xi, yi)| yi - kq0 - beta * xi));
    Ok(ConductivityFit {
        kq0,
        beta,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_49_materials() {
        let db = MaterialDb::builtin();
        assert_eq!(db.len(), 49);
        let ids: Vec<u32> = db.materials().iter().map(|m| m.id).collect();
        assert_eq!(ids, (1..=49).collect::<Vec<_>>());
    }

    #[test]
    fn concrete_row() {
        let db = MaterialDb::builtin();
        let c = db.resolve("1").unwrap();
        assert_eq!(c.name, "Concrete");
        assert_eq!(c.category, Category::Cement);
        assert_eq!(
            (c.rho0, c.c0, c.kq0, c.beta, c.mu),
            (2104.0, 776.0, 1.37, 0.005, 76.0)
        );
        assert_eq!(
            (c.alpha1, c.omega1, c.a, c.omegaf),
            (0.38, 66.47, 0.0125, 144.0)
        );
        assert_eq!(c.lref_default, 0.2);
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(load_database("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn header_only_is_empty_list() {
        let text = format!("{}\n", CSV_HEADER.join(","));
        assert!(load_database(text.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn malformed_cell_names_row_and_column() {
        let text = format!(
            "{}\n1,Concrete,cement,2104,776,oops,0.005,76,0.38,66.47,0.0125,144,0.2\n",
            CSV_HEADER.join(",")
        );
        match load_database(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "kq0");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invariant_violation_names_material() {
        let text = format!(
            "{}\n7,Thing,stone,2104,776,1.0,0.005,0.5,0.38,66.47,0.0125,144,0.2\n",
            CSV_HEADER.join(",")
        );
        match load_database(text.as_bytes()) {
            Err(Error::Validation { id, message }) => {
                assert_eq!(id, 7);
                assert!(message.contains("mu"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_category_is_parse_error() {
        let text = format!(
            "{}\n1,Concrete,plastic,2104,776,1.37,0.005,76,0.38,66.47,0.0125,144,0.2\n",
            CSV_HEADER.join(",")
        );
        assert!(matches!(
            load_database(text.as_bytes()),
            Err(Error::Parse { ref column, .. }) if column == "category"
        ));
    }

    #[test]
    fn lookup_by_name_is_case_insensitive() {
        let db = MaterialDb::builtin();
        assert_eq!(db.resolve("wood fiber 1").unwrap().id, 20);
        assert_eq!(db.resolve(" Wood Wool ").unwrap().id, 14);
        assert!(matches!(
            db.resolve("Unobtainium"),
            Err(Error::UnknownMaterial(_))
        ));
        assert!(db.resolve("50").is_err());
    }

    #[test]
    fn sorption_exact_roundtrip() {
        let points: Vec<SorptionPoint> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&phi| SorptionPoint {
                phi,
                omega: 9.76 * (phi / (1.0 - phi)).powf(0.41),
            })
            .collect();
        let fit = fit_sorption(&points).unwrap();
        assert!((fit.alpha1 - 0.41).abs() < 1e-12);
        assert!((fit.omega1 - 9.76).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn sorption_needs_two_distinct_points() {
        let one = [SorptionPoint {
            phi: 0.5,
            omega: 3.0,
        }];
        assert!(matches!(
            fit_sorption(&one),
            Err(Error::InsufficientData(_))
        ));
        let repeated = [one[0], one[0]];
        assert!(matches!(
            fit_sorption(&repeated),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn sorption_rejects_nonpositive_omega() {
        let pts = [
            SorptionPoint {
                phi: 0.3,
                omega: 1.0,
            },
            SorptionPoint {
                phi: 0.6,
                omega: 0.0,
            },
        ];
        assert!(matches!(fit_sorption(&pts), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn conductivity_exact_roundtrip() {
        let points: Vec<ConductivityPoint> = [0.0, 20.0, 66.47, 144.0]
            .iter()
            .map(|&omega| ConductivityPoint {
                omega,
                kq: 1.37 + 0.005 * omega,
            })
            .collect();
        let fit = fit_conductivity(&points).unwrap();
        assert!((fit.kq0 - 1.37).abs() < 1e-12);
        assert!((fit.beta - 0.005).abs() < 1e-14);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn conductivity_constant_gives_zero_slope() {
        let points: Vec<ConductivityPoint> = [0.0, 5.0, 10.0]
            .iter()
            .map(|&omega| ConductivityPoint { omega, kq: 0.04 })
            .collect();
        let fit = fit_conductivity(&points).unwrap();
        assert_eq!(fit.beta, 0.0);
        assert!((fit.kq0 - 0.04).abs() < 1e-15);
    }

    #[test]
    fn conductivity_negative_slope_is_clipped() {
        let points = [
            ConductivityPoint {
                omega: 0.0,
                kq: 0.05,
            },
            ConductivityPoint {
                omega: 10.0,
                kq: 0.04,
            },
        ];
        let fit = fit_conductivity(&points).unwrap();
        assert_eq!(fit.beta, 0.0);
        assert!((fit.kq0 - 0.045).abs() < 1e-15);
    }

    #[test]
    fn conductivity_degenerate_omega() {
        let points = [
            ConductivityPoint {
                omega: 3.0,
                kq: 0.05,
            },
            ConductivityPoint {
                omega: 3.0,
                kq: 0.06,
            },
        ];
        assert!(matches!(
            fit_conductivity(&points),
            Err(Error::InsufficientData(_))
        ));
    }
}
