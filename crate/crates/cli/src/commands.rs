//! Subcommand implementations. Each builds a [`Table`] and writes it.

use std::io::Write;
use std::path::Path;

use anyhow::{Context as _, Result};
use clap::ValueEnum;
use rayon::prelude::*;

use hygrosim::dimensionless::{self, ReferenceFrame, SurfaceCoefficients};
use hygrosim::material_db::{write_database, MaterialProperties};
use hygrosim::similarity::{self, Design, SimilarityKind};
use hygrosim::solver::{self, DimensionlessSolution, FieldSolution, SimulationConfig};
use hygrosim::wall::{self, WallConfig};
use hygrosim::{Category, DimensionlessNumbers};

use crate::table::{Cell, Format, Table};
use crate::Context;

const EXTRA_KEYS: [&str; 3] = ["abs_delta", "delta_fo_m", "gamma_fo_q"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceSide {
    Inside,
    Outside,
}

impl SurfaceSide {
    fn coefficients(self) -> SurfaceCoefficients {
        match self {
            SurfaceSide::Inside => SurfaceCoefficients::INSIDE,
            SurfaceSide::Outside => SurfaceCoefficients::OUTSIDE,
        }
    }
}

pub fn check_key(key: &str) -> std::result::Result<(), String> {
    if DimensionlessNumbers::NAMES.contains(&key) || EXTRA_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(format!(
            "unknown number `{key}` (expected one of {}, {})",
            DimensionlessNumbers::NAMES.join(", "),
            EXTRA_KEYS.join(", ")
        ))
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_materials(
    ctx: &Context,
    materials: &[&MaterialProperties],
    out: &mut dyn Write,
) -> Result<()> {
    match ctx.format {
        Format::Csv => {
            let owned: Vec<MaterialProperties> = materials.iter().map(|m| (*m).clone()).collect();
            write_database(out, &owned)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, materials)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn materials_list(
    ctx: &Context,
    category: Option<Category>,
    out: &mut dyn Write,
) -> Result<()> {
    let list: Vec<&MaterialProperties> = ctx
        .db
        .materials()
        .iter()
        .filter(|m| category.is_none_or(|c| m.category == c))
        .collect();
    write_materials(ctx, &list, out)
}

pub fn materials_show(ctx: &Context, key: &str, out: &mut dyn Write) -> Result<()> {
    let m = ctx.db.resolve(key)?;
    write_materials(ctx, &[m], out)
}

fn number_header() -> Vec<String> {
    let mut h: Vec<String> = ["id", "material", "length", "time"]
        .map(String::from)
        .to_vec();
    h.extend(DimensionlessNumbers::NAMES.map(String::from));
    h
}

pub fn numbers(
    ctx: &Context,
    material: &str,
    length: Option<f64>,
    time: f64,
    side: SurfaceSide,
    out: &mut dyn Write,
) -> Result<()> {
    let m = ctx.db.resolve(material)?;
    let frame = ReferenceFrame::default()
        .with_length(length.unwrap_or(m.lref_default))
        .with_time(time)
        .with_surface(side.coefficients());
    let n = dimensionless::numbers(&ctx.pc, m, &frame)?;
    let mut t = Table::new(number_header());
    let mut row = vec![
        m.id.into(),
        m.name.as_str().into(),
        frame.length.into(),
        time.into(),
    ];
    row.extend(n.values().map(Cell::from));
    t.push(row);
    t.write(out, ctx.format)
}

#[allow(clippy::too_many_arguments)]
pub fn map(
    ctx: &Context,
    x: &str,
    y: &str,
    category: Option<Category>,
    length: Option<f64>,
    time: f64,
    side: SurfaceSide,
    out: &mut dyn Write,
) -> Result<()> {
    let selected: Vec<&MaterialProperties> = ctx
        .db
        .materials()
        .iter()
        .filter(|m| category.is_none_or(|c| m.category == c))
        .collect();
    let base = ReferenceFrame::default()
        .with_time(time)
        .with_surface(side.coefficients());
    let rows: Vec<Vec<Cell>> = selected
        .par_iter()
        .map(|m| -> Result<Vec<Cell>> {
            let frame = base.with_length(length.unwrap_or(m.lref_default));
            let n = dimensionless::numbers(&ctx.pc, m, &frame)?;
            Ok(vec![
                m.id.into(),
                m.name.as_str().into(),
                m.category.as_str().into(),
                frame.length.into(),
                n.get(x).into(),
                n.get(y).into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(["id", "material", "category", "length", x, y]);
    for row in rows {
        t.push(row);
    }
    t.write(out, ctx.format)
}

pub fn distortion(ctx: &Context, material: &str, grid: usize, out: &mut dyn Write) -> Result<()> {
    let m = ctx.db.resolve(material)?;
    let frame = ReferenceFrame::default().for_material(m);
    let field = dimensionless::distortion(&ctx.pc, m, &frame, grid)?;
    let names = ["cm", "cq", "cmq", "km", "kq", "kmq", "kqm", "r12"];
    let mut header = vec!["u".to_string(), "v".to_string()];
    header.extend(names.map(|n| format!("{n}_star")));
    let mut t = Table::new(header);
    for node in &field.nodes {
        let mut row = vec![node.u.into(), node.v.into()];
        match node.values {
            Some(s) => {
                row.extend([s.cm, s.cq, s.cmq, s.km, s.kq, s.kmq, s.kqm, s.r12].map(Cell::from))
            }
            None => row.extend(names.map(|_| Cell::Empty)),
        }
        t.push(row);
    }
    t.write(out, ctx.format)
}

fn load_wall(path: Option<&Path>, fallback: fn() -> WallConfig) -> Result<WallConfig> {
    match path {
        Some(p) => WallConfig::parse(&read(p)?).with_context(|| p.display().to_string()),
        None => Ok(fallback()),
    }
}

pub fn wall_analyze(ctx: &Context, config: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let wall = load_wall(config, WallConfig::builtin_config1)?;
    let layers = wall::layer_numbers(&ctx.pc, &ctx.db, &wall, &ReferenceFrame::default())?;
    let mut t = Table::new([
        "layer",
        "material",
        "thickness",
        "fo_m",
        "fo_q",
        "delta",
        "gamma",
        "eta",
        "outside_bi_q",
        "outside_bi_m",
        "outside_bi_qm",
        "inside_bi_q",
        "inside_bi_m",
        "inside_bi_qm",
    ]);
    for (i, l) in layers.iter().enumerate() {
        let mut row = vec![
            (i + 1).into(),
            l.material.as_str().into(),
            l.thickness.into(),
            l.fo_m.into(),
            l.fo_q.into(),
            l.delta.into(),
            l.gamma.into(),
            l.eta.into(),
        ];
        for b in [l.outside, l.inside] {
            row.extend([b.map(|b| b.bi_q), b.map(|b| b.bi_m), b.map(|b| b.bi_qm)].map(Cell::from));
        }
        t.push(row);
    }
    t.write(out, ctx.format)
}

pub fn wall_compare(
    ctx: &Context,
    configs: &[std::path::PathBuf],
    out: &mut dyn Write,
) -> Result<()> {
    let a = load_wall(
        configs.first().map(|p| p.as_path()),
        WallConfig::builtin_config1,
    )?;
    let b = load_wall(
        configs.get(1).map(|p| p.as_path()),
        WallConfig::builtin_config2,
    )?;
    let r = wall::compare(&ctx.pc, &ctx.db, &a, &b, &ReferenceFrame::default())?;
    let mut t = Table::new(["key", "layer", "a", "b", "larger", "totally_ordered"]);
    for c in &r.numbers {
        for (i, ((x, y), larger)) in c.a.iter().zip(&c.b).zip(&c.larger).enumerate() {
            t.push(vec![
                c.key.into(),
                (i + 1).into(),
                (*x).into(),
                (*y).into(),
                larger.as_str().into(),
                c.totally_ordered.into(),
            ]);
        }
        if !c.totally_ordered {
            eprintln!("{}: {}", c.key, wall::WallComparison::FLAG);
        }
    }
    t.write(out, ctx.format)
}

pub fn similar_length(
    ctx: &Context,
    reference: &str,
    target: &str,
    kind: SimilarityKind,
    length: f64,
    time: f64,
    out: &mut dyn Write,
) -> Result<()> {
    let r = ctx.db.resolve(reference)?;
    let g = ctx.db.resolve(target)?;
    let frame = ReferenceFrame::default().with_time(time);
    let l = similarity::equivalent_length(&ctx.pc, r, length, g, kind, &frame)?;
    let mut t = Table::new([
        "reference",
        "target",
        "kind",
        "reference_length",
        "equivalent_length",
    ]);
    t.push(vec![
        r.name.as_str().into(),
        g.name.as_str().into(),
        kind.as_str().into(),
        length.into(),
        l.into(),
    ]);
    t.write(out, ctx.format)
}

pub fn similar_time(
    ctx: &Context,
    reference: &str,
    target: &str,
    kind: SimilarityKind,
    time: f64,
    length: f64,
    out: &mut dyn Write,
) -> Result<()> {
    let r = ctx.db.resolve(reference)?;
    let g = ctx.db.resolve(target)?;
    let frame = ReferenceFrame::default().with_length(length);
    let s = similarity::equivalent_time(&ctx.pc, r, time, g, kind, &frame)?;
    let mut t = Table::new([
        "reference",
        "target",
        "kind",
        "length",
        "reference_time",
        "equivalent_time",
        "equivalent_time_h",
    ]);
    t.push(vec![
        r.name.as_str().into(),
        g.name.as_str().into(),
        kind.as_str().into(),
        length.into(),
        time.into(),
        s.into(),
        (s / hygrosim::units::HOUR).into(),
    ]);
    t.write(out, ctx.format)
}

pub fn similar_dynamic(
    ctx: &Context,
    pi: f64,
    design: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let original = match design {
        Some(p) => Design::from_toml(&read(p)?).with_context(|| p.display().to_string())?,
        None => Design::wood_fiber_example(),
    };
    let scaled = similarity::dynamic_scale(&original, pi)?.design;
    let m = ctx.db.resolve(&original.material)?;
    let base = ReferenceFrame::default();
    let report = similarity::check_similitude(&ctx.pc, m, &original, m, &scaled, &base)?;
    let mut t = Table::new(["quantity", "original", "scaled", "relative_difference"]);
    let design_rows = [
        ("length", original.length, scaled.length),
        ("time", original.time, scaled.time),
        ("period", original.period, scaled.period),
        ("hq", original.surface.hq, scaled.surface.hq),
        ("hm", original.surface.hm, scaled.surface.hm),
        (
            "dimensionless_period",
            original.dimensionless_period(),
            scaled.dimensionless_period(),
        ),
    ];
    for (name, a, b) in design_rows {
        t.push(vec![name.into(), a.into(), b.into(), Cell::Empty]);
    }
    let a = report.a.values();
    let b = report.b.values();
    for (i, name) in DimensionlessNumbers::NAMES.iter().enumerate() {
        t.push(vec![
            (*name).into(),
            a[i].into(),
            b[i].into(),
            report.relative_differences[i].into(),
        ]);
    }
    t.write(out, ctx.format)?;
    if report.pass {
        eprintln!("similitude: pass");
    } else {
        eprintln!("similitude: FAIL ({})", report.failing().join(", "));
    }
    Ok(())
}

fn probe_table(sol: &FieldSolution, probes: &[f64]) -> Table {
    let mut header = vec!["time".to_string(), "tau".to_string()];
    for chi in probes {
        for q in ["T", "P1", "phi", "omega"] {
            header.push(format!("{q}@{chi}"));
        }
    }
    header.extend(["energy", "moisture"].map(String::from));
    let mut t = Table::new(header);
    for k in 0..sol.seconds.len() {
        let mut row = vec![sol.seconds[k].into(), sol.dimensionless.times[k].into()];
        for &chi in probes {
            for field in [
                &sol.temperature[k],
                &sol.vapor_pressure[k],
                &sol.relative_humidity[k],
                &sol.moisture_content[k],
            ] {
                row.push(DimensionlessSolution::probe(field, chi).into());
            }
        }
        row.push(sol.energy[k].into());
        row.push(sol.moisture[k].into());
        t.push(row);
    }
    t
}

fn profile_table(sol: &FieldSolution) -> Table {
    let mut t = Table::new(["time", "tau", "x", "chi", "T", "P1", "phi", "omega"]);
    for k in 0..sol.seconds.len() {
        for i in 0..sol.positions.len() {
            t.push(vec![
                sol.seconds[k].into(),
                sol.dimensionless.times[k].into(),
                sol.positions[i].into(),
                sol.dimensionless.chi[i].into(),
                sol.temperature[k][i].into(),
                sol.vapor_pressure[k][i].into(),
                sol.relative_humidity[k][i].into(),
                sol.moisture_content[k][i].into(),
            ]);
        }
    }
    t
}

fn note_clamping(sol: &FieldSolution) {
    let n = sol.clamp_events();
    if n > 0 {
        eprintln!("warning: relative humidity clamped {n} times");
    }
}

pub fn simulate(
    ctx: &Context,
    config: &Path,
    verify_pi: Option<f64>,
    profiles: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = SimulationConfig::from_toml(&read(config)?)
        .with_context(|| config.display().to_string())?;
    let Some(pi) = verify_pi else {
        let sol = solver::simulate(&ctx.pc, &ctx.db, &cfg)?;
        note_clamping(&sol);
        let table = if profiles {
            profile_table(&sol)
        } else {
            probe_table(&sol, &cfg.probes)
        };
        return table.write(out, ctx.format);
    };
    let r = solver::verify_dynamic_similarity(&ctx.pc, &ctx.db, &cfg, pi)?;
    note_clamping(&r.original);
    let mut t = Table::new([
        "chi",
        "tau",
        "x",
        "x_scaled",
        "time",
        "time_scaled",
        "T",
        "T_scaled",
        "P1",
        "P1_scaled",
        "relative_difference",
    ]);
    for p in &r.probes {
        t.push(vec![
            p.chi.into(),
            p.tau.into(),
            p.x.0.into(),
            p.x.1.into(),
            p.t.0.into(),
            p.t.1.into(),
            p.temperature.0.into(),
            p.temperature.1.into(),
            p.vapor_pressure.0.into(),
            p.vapor_pressure.1.into(),
            p.relative_difference.into(),
        ]);
    }
    t.write(out, ctx.format)?;
    eprintln!(
        "pi = {pi}: problems match: {}, field difference {:.3e}, max probe difference {:.3e}",
        r.problems_match, r.field_difference, r.max_probe_difference
    );
    Ok(())
}
