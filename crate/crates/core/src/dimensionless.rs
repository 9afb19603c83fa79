//! Reference frames, dimensionless numbers and distortion coefficients.
//!
//! Fields are scaled as `u = (P₁ − P₁ʳᵉᶠ)/δP` and `v = (T − Tʳᵉᶠ)/δT`; space
//! and time as `χ = x/Lʳᵉᶠ`, `τ = t/tʳᵉᶠ`. Reference coefficients are the
//! coefficients at the frame's evaluation state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material_db::MaterialProperties;
use crate::thermo::{self, CoefficientSet, PhysicalConstants, ThermoState};

/// Surface transfer coefficients of one wall side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoefficients {
    /// Heat transfer coefficient, W/(m²·K).
    pub hq: f64,
    /// Mass transfer coefficient, s/m.
    pub hm: f64,
}

impl SurfaceCoefficients {
    pub const OUTSIDE: SurfaceCoefficients = SurfaceCoefficients { hq: 15.0, hm: 1e-7 };
    pub const INSIDE: SurfaceCoefficients = SurfaceCoefficients { hq: 5.0, hm: 5e-9 };

    pub fn new(hq: f64, hm: f64) -> Self {
        SurfaceCoefficients { hq, hm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFrame {
    /// Reference temperature Tʳᵉᶠ, K.
    pub t_ref: f64,
    /// Temperature scale δT, K.
    pub delta_t: f64,
    /// Reference vapour pressure P₁ʳᵉᶠ, Pa.
    pub p1_ref: f64,
    /// Vapour pressure scale δP, Pa.
    pub delta_p: f64,
    /// Reference time tʳᵉᶠ, s.
    pub time: f64,
    /// Reference length Lʳᵉᶠ, m.
    pub length: f64,
    pub surface: SurfaceCoefficients,
    /// State at which the reference coefficients are evaluated.
    pub eval_state: ThermoState,
}

impl Default for ReferenceFrame {
    /// 5–35 °C, 5–90 % relative humidity, coefficients at 20 °C and 50 %,
    /// 10 cm, one hour, inside surface.
    fn default() -> Self {
        ReferenceFrame {
            t_ref: 278.15,
            delta_t: 30.0,
            p1_ref: 43.572,
            delta_p: 5021.5,
            time: 3600.0,
            length: 0.1,
            surface: SurfaceCoefficients::INSIDE,
            eval_state: ThermoState::new(293.15, 1166.9),
        }
    }
}

impl ReferenceFrame {
    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn with_surface(mut self, surface: SurfaceCoefficients) -> Self {
        self.surface = surface;
        self
    }

    /// Frame using the material's default reference length.
    pub fn for_material(self, mat: &MaterialProperties) -> Self {
        self.with_length(mat.lref_default)
    }

    pub fn validate(&self, pc: &PhysicalConstants) -> Result<()> {
        let positive = [
            ("delta_t", self.delta_t),
            ("delta_p", self.delta_p),
            ("time", self.time),
            ("length", self.length),
            ("hq", self.surface.hq),
            ("hm", self.surface.hm),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "reference frame: {name} must be positive, got {value}"
                )));
            }
        }
        if !self.t_ref.is_finite() || !self.p1_ref.is_finite() {
            return Err(Error::InvalidInput(
                "reference frame: non-finite reference state".into(),
            ));
        }
        self.eval_state.validate(pc)?;
        Ok(())
    }

    /// `(T, P₁) → (u, v)`.
    pub fn scale_fields(&self, temperature: f64, vapor_pressure: f64) -> (f64, f64) {
        (
            (vapor_pressure - self.p1_ref) / self.delta_p,
            (temperature - self.t_ref) / self.delta_t,
        )
    }

    /// `(u, v) → (T, P₁)`.
    pub fn unscale_fields(&self, u: f64, v: f64) -> (f64, f64) {
        (
            self.t_ref + v * self.delta_t,
            self.p1_ref + u * self.delta_p,
        )
    }
}

/// Reference coefficients: the coefficients at the evaluation state, with the
/// latent heat replaced by `r₁₂⁰`.
pub fn reference_coefficients(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    frame: &ReferenceFrame,
) -> Result<CoefficientSet> {
    frame.validate(pc)?;
    let mut c = thermo::coefficients(pc, mat, &frame.eval_state)?;
    c.r12 = pc.r12_0;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessNumbers {
    pub fo_m: f64,
    pub fo_q: f64,
    /// Signed; negative below saturation.
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub bi_q: f64,
    pub bi_m: f64,
    pub bi_qm: f64,
}

impl DimensionlessNumbers {
    /// Field names in output order.
    pub const NAMES: [&'static str; 8] = [
        "fo_m", "fo_q", "delta", "gamma", "eta", "bi_q", "bi_m", "bi_qm",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.fo_m, self.fo_q, self.delta, self.gamma, self.eta, self.bi_q, self.bi_m,
            self.bi_qm,
        ]
    }

    pub fn delta_magnitude(&self) -> f64 {
        self.delta.abs()
    }

    /// Looks up a number by name. Besides the eight fields this accepts
    /// `abs_delta`, `delta_fo_m` (|δ|·Fo^m) and `gamma_fo_q` (γ·Fo^q).
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "fo_m" => self.fo_m,
            "fo_q" => self.fo_q,
            "delta" => self.delta,
            "abs_delta" => self.delta.abs(),
            "gamma" => self.gamma,
            "eta" => self.eta,
            "bi_q" => self.bi_q,
            "bi_m" => self.bi_m,
            "bi_qm" => self.bi_qm,
            "delta_fo_m" => self.delta.abs() * self.fo_m,
            "gamma_fo_q" => self.gamma * self.fo_q,
            _ => return None,
        })
    }

    /// Largest relative difference over the eight numbers.
    pub fn max_relative_difference(&self, other: &DimensionlessNumbers) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| relative_difference(*a, b))
            .fold(0.0, f64::max)
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Names accepted by [`DimensionlessNumbers::get`].
pub const NUMBER_KEYS: [&str; 11] = [
    "fo_m",
    "fo_q",
    "delta",
    "abs_delta",
    "gamma",
    "eta",
    "bi_q",
    "bi_m",
    "bi_qm",
    "delta_fo_m",
    "gamma_fo_q",
];

pub fn numbers(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    frame: &ReferenceFrame,
) -> Result<DimensionlessNumbers> {
    let c = reference_coefficients(pc, mat, frame)?;
    Ok(numbers_from(&c, frame))
}

/// Numbers from already evaluated reference coefficients.
pub fn numbers_from(c: &CoefficientSet, frame: &ReferenceFrame) -> DimensionlessNumbers {
    let l = frame.length;
    let SurfaceCoefficients { hq, hm } = frame.surface;
    DimensionlessNumbers {
        fo_m: c.km * frame.time / (c.cm * l * l),
        fo_q: c.kq * frame.time / (c.cq * l * l),
        delta: c.kmq * frame.delta_t / (c.km * frame.delta_p),
        gamma: c.kqm * frame.delta_p * c.r12 / (c.kq * frame.delta_t),
        eta: c.cmq * frame.delta_t / (c.cm * frame.delta_p),
        bi_q: hq * l / c.kq,
        bi_m: hm * l / c.km,
        bi_qm: hm * l / c.kqm,
    }
}

/// Coefficients divided by their reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarredCoefficients {
    pub cm: f64,
    pub cq: f64,
    pub cmq: f64,
    pub km: f64,
    pub kq: f64,
    pub kmq: f64,
    pub kqm: f64,
    pub r12: f64,
}

impl StarredCoefficients {
    pub const UNIT: StarredCoefficients = StarredCoefficients {
        cm: 1.0,
        cq: 1.0,
        cmq: 1.0,
        km: 1.0,
        kq: 1.0,
        kmq: 1.0,
        kqm: 1.0,
        r12: 1.0,
    };

    pub fn from_ratio(c: &CoefficientSet, reference: &CoefficientSet) -> Self {
        let ratio = |a: f64, b: f64| if b == 0.0 { 1.0 } else { a / b };
        StarredCoefficients {
            cm: ratio(c.cm, reference.cm),
            cq: ratio(c.cq, reference.cq),
            cmq: ratio(c.cmq, reference.cmq),
            km: ratio(c.km, reference.km),
            kq: ratio(c.kq, reference.kq),
            kmq: ratio(c.kmq, reference.kmq),
            kqm: ratio(c.kqm, reference.kqm),
            r12: ratio(c.r12, reference.r12),
        }
    }

    /// `k_qm*·r₁₂*`, the factor of the latent heat flux.
    pub fn kqm_r12(&self) -> f64 {
        self.kqm * self.r12
    }
}

/// Starred coefficients at `(u, v)` with the relative humidity clamped into
/// the open unit interval. Returns the coefficients, the relative humidity
/// used, and whether clamping happened.
pub fn starred_at(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    frame: &ReferenceFrame,
    reference: &CoefficientSet,
    u: f64,
    v: f64,
) -> Result<(StarredCoefficients, f64, bool)> {
    let (t, p1) = frame.unscale_fields(u, v);
    let (c, phi, clamped) = thermo::coefficients_clamped(pc, mat, t, p1)?;
    Ok((StarredCoefficients::from_ratio(&c, reference), phi, clamped))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionNode {
    pub u: f64,
    pub v: f64,
    /// `None` where the node maps to `φ ≥ 1` (or `φ ≤ 0`).
    pub values: Option<StarredCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionField {
    /// Nodes per axis.
    pub resolution: usize,
    /// Row-major: `v` varies slowest.
    pub nodes: Vec<DistortionNode>,
}

impl DistortionField {
    pub const DEFAULT_RESOLUTION: usize = 101;

    pub fn node(&self, iu: usize, iv: usize) -> &DistortionNode {
        &self.nodes[iv * self.resolution + iu]
    }

    pub fn in_domain(&self) -> impl Iterator<Item = (&DistortionNode, &StarredCoefficients)> {
        self.nodes
            .iter()
            .filter_map(|n| n.values.as_ref().map(|v| (n, v)))
    }
}

/// Evaluates the starred coefficients on a uniform grid over `[0, 1]²`.
pub fn distortion(
    pc: &PhysicalConstants,
    mat: &MaterialProperties,
    frame: &ReferenceFrame,
    resolution: usize,
) -> Result<DistortionField> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!(
            "distortion grid needs at least 2 nodes per axis, got {resolution}"
        )));
    }
    let reference = reference_coefficients(pc, mat, frame)?;
    let step = 1.0 / (resolution - 1) as f64;
    let mut nodes = Vec::with_capacity(resolution * resolution);
    for iv in 0..resolution {
        let v = iv as f64 * step;
        for iu in 0..resolution {
            let u = iu as f64 * step;
            let (t, p1) = frame.unscale_fields(u, v);
            let values = match thermo::coefficients(pc, mat, &ThermoState::new(t, p1)) {
                Ok(c) => Some(StarredCoefficients::from_ratio(&c, &reference)),
                Err(Error::Domain { .. }) => None,
                Err(e) => return Err(e),
            };
            nodes.push(DistortionNode { u, v, values });
        }
    }
    Ok(DistortionField { resolution, nodes })
}
