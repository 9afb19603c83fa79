//! Acceptance suite. Each test prints one PASS/FAIL line with the measured
//! values and fails when its criterion fails. Lines go straight to stderr so
//! they show without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use hygrosim::dimensionless::{self, relative_difference, ReferenceFrame, SurfaceCoefficients};
use hygrosim::material_db::{fit_sorption, Category, MaterialDb, SorptionPoint};
use hygrosim::similarity::{self, Design, SimilarityKind};
use hygrosim::solver::{
    self, cell_volumes, CoefficientModel, DimensionlessProblem, Forcing, InitialState,
    SimulationConfig, Sinusoid, StepControl,
};
use hygrosim::thermo::{self, PhysicalConstants};
use hygrosim::units::{DAY, HOUR};
use hygrosim::wall::{self, Larger, WallConfig};
use hygrosim::DimensionlessNumbers;

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "[{}] criterion {id}: {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

fn pc() -> PhysicalConstants {
    PhysicalConstants::default()
}

#[test]
fn criterion_1_reference_frame() {
    let pc = pc();
    let p1 = 0.05 * thermo::saturation_pressure(&pc, 278.15).unwrap();
    let dp = 0.90 * thermo::saturation_pressure(&pc, 308.15).unwrap() - p1;
    let pass = within(p1, 43.572, 1e-3) && within(dp, 5021.5, 1e-3);
    report(
        1,
        "reference frame reconstruction",
        pass,
        &format!("P1ref = {p1:.4} Pa, dP = {dp:.2} Pa"),
    );
}

#[test]
fn criterion_2_saturation_consistency() {
    let psat = thermo::saturation_pressure(&pc(), 293.15).unwrap();
    report(
        2,
        "saturation consistency",
        within(psat, 2.0 * 1166.9, 1e-3),
        &format!("Psat(293.15 K) = {psat:.3} Pa vs {:.1}", 2.0 * 1166.9),
    );
}

#[test]
fn criterion_3_number_list() {
    let db = MaterialDb::builtin();
    let wf = db.resolve("Wood Fiber 1").unwrap();
    let frame = ReferenceFrame::default()
        .with_length(0.2)
        .with_time(365.0 * DAY)
        .with_surface(SurfaceCoefficients::INSIDE);
    let n = dimensionless::numbers(&pc(), wf, &frame).unwrap();
    let expected = [
        ("fo_m", n.fo_m, 6.89),
        ("fo_q", n.fo_q, 94.76),
        ("gamma", n.gamma, 0.64),
        ("eta", n.eta, 0.43),
        ("bi_q", n.bi_q, 25.49),
        ("bi_m", n.bi_m, 16.56),
        ("bi_qm", n.bi_qm, 16.56),
    ];
    let pass = expected.iter().all(|(_, x, t)| within(*x, *t, 0.05));
    let detail: Vec<String> = expected
        .iter()
        .map(|(k, x, t)| format!("{k} {x:.4} (target {t})"))
        .collect();
    report(
        3,
        "wood fibre number list",
        pass,
        &format!("{}; delta {:.3e} reported only", detail.join(", "), n.delta),
    );
}

#[test]
fn criterion_4_kinetic_similarity() {
    let pc = pc();
    let db = MaterialDb::builtin();
    let frame = ReferenceFrame::default();
    let ww = db.resolve("Wood Wool").unwrap();
    let targets = ["Cellulose CPH", "Wood Fiber 1", "Aerated Concrete"];
    let expected = [
        (SimilarityKind::FoM, [0.48, 0.30, 0.19]),
        (SimilarityKind::FoQ, [0.31, 0.21, 0.28]),
        (SimilarityKind::GammaFoQ, [0.73, 0.49, 0.28]),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (kind, lengths) in expected {
        for (name, want) in targets.iter().zip(lengths) {
            let target = db.resolve(name).unwrap();
            let l = similarity::equivalent_length(&pc, ww, 0.2, target, kind, &frame).unwrap();
            pass &= (l - want).abs() <= 0.02;
            detail.push(format!(
                "{kind} {name} {:.1} cm (target {:.0})",
                100.0 * l,
                100.0 * want
            ));
        }
    }
    report(
        4,
        "kinetic similarity from 20 cm wood wool",
        pass,
        &detail.join(", "),
    );
}

#[test]
fn criterion_5_geometric_similarity() {
    let pc = pc();
    let db = MaterialDb::builtin();
    let frame = ReferenceFrame::default().with_length(0.1);
    let concrete = db.resolve("Concrete").unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, want) in [
        ("Extruded Brick", 0.6),
        ("Granite", 3.8),
        ("Sandstone", 1.1),
    ] {
        let m = db.resolve(name).unwrap();
        let t =
            similarity::equivalent_time(&pc, concrete, 10.0 * HOUR, m, SimilarityKind::FoM, &frame)
                .unwrap()
                / HOUR;
        pass &= within(t, want, 0.15);
        detail.push(format!("fo_m {name} {t:.3} h (target {want})"));
    }
    let eb = db.resolve("Extruded Brick").unwrap();
    let t = similarity::equivalent_time(
        &pc,
        concrete,
        10.0 * HOUR,
        eb,
        SimilarityKind::GammaFoQ,
        &frame,
    )
    .unwrap()
        / 60.0;
    pass &= within(t, 54.0, 0.15);
    detail.push(format!("gamma_fo_q Extruded Brick {t:.1} min (target 54)"));
    report(
        5,
        "geometric similarity from 10 h of concrete",
        pass,
        &detail.join(", "),
    );
}

#[test]
fn criterion_6_dynamic_scaling() {
    let pc = pc();
    let db = MaterialDb::builtin();
    let d = Design::wood_fiber_example();
    let s = similarity::dynamic_scale(&d, 0.2).unwrap().design;
    let m = db.resolve(&d.material).unwrap();
    let r = similarity::check_similitude(&pc, m, &d, m, &s, &ReferenceFrame::default()).unwrap();
    let max_rel = r.relative_differences.iter().copied().fold(0.0, f64::max);
    let pass = within(s.length, 0.04, 1e-12)
        && within(s.period, 0.96 * HOUR, 1e-12)
        && within(s.time, 14.6 * DAY, 1e-12)
        && within(s.surface.hq, 25.0, 1e-12)
        && within(s.surface.hm, 2.5e-8, 1e-12)
        && max_rel < 1e-12;
    report(
        6,
        "dynamic scaling with pi = 0.2",
        pass,
        &format!(
            "L {} m, period {} h, tref {} d, hq {}, hm {:e}, max number difference {max_rel:.1e}",
            s.length,
            s.period / HOUR,
            s.time / DAY,
            s.surface.hq,
            s.surface.hm
        ),
    );
}

#[test]
fn criterion_7_similitude_simulation() {
    let start = Instant::now();
    let db = MaterialDb::builtin();
    let cfg = SimulationConfig::for_design(Design::wood_fiber_example());
    assert_eq!(cfg.grid_points, 101);
    let r = solver::verify_dynamic_similarity(&pc(), &db, &cfg, 0.2).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = r.problems_match
        && r.field_difference < 1e-10
        && r.max_probe_difference < 0.01
        && elapsed < 120.0;
    let probes: Vec<String> = r
        .probes
        .iter()
        .map(|p| {
            format!(
                "x {:.3}/{:.4} m at t {:.2}/{:.3} d: T {:.3}/{:.3} K",
                p.x.0,
                p.x.1,
                p.t.0 / DAY,
                p.t.1 / DAY,
                p.temperature.0,
                p.temperature.1
            )
        })
        .collect();
    report(
        7,
        "similitude simulation over 10 periods",
        pass,
        &format!(
            "field difference {:.1e}, probe difference {:.1e}, {:.1} s; {}",
            r.field_difference,
            r.max_probe_difference,
            elapsed,
            probes.join("; ")
        ),
    );
}

/// Robin-slab step response, 50 terms.
fn series(chi: f64, tau: f64, bi: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let mut theta = 0.0;
    for n in 0..50 {
        let (mut lo, mut hi) = (n as f64 * PI + 1e-12, n as f64 * PI + FRAC_PI_2 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.tan() < bi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l = 0.5 * (lo + hi);
        theta += 4.0 * l.sin() / (2.0 * l + (2.0 * l).sin())
            * (l * (1.0 - chi)).cos()
            * (-l * l * tau).exp();
    }
    1.0 - theta
}

fn series_oracle_error() -> f64 {
    let bi = 2.0;
    let times = vec![0.05, 0.1, 0.2];
    let p = DimensionlessProblem {
        numbers: DimensionlessNumbers {
            fo_m: 1.0,
            fo_q: 1.0,
            delta: 0.0,
            gamma: 0.0,
            eta: 0.0,
            bi_q: bi,
            bi_m: bi,
            bi_qm: bi,
        },
        model: CoefficientModel::Frozen,
        grid_points: 201,
        end_time: 0.2,
        forcing: Forcing {
            u: Sinusoid::constant(1.0),
            v: Sinusoid::constant(1.0),
        },
        initial: InitialState::Uniform { u: 0.0, v: 0.0 },
        step: StepControl::fixed(1e-5),
        output_times: times.clone(),
    };
    let sol = solver::solve(&p).unwrap();
    let mut err = 0.0_f64;
    for &t in &times {
        let k = sol.time_index(t);
        for (i, chi) in sol.chi.iter().enumerate() {
            err = err.max((sol.u[k][i] - series(*chi, t, bi)).abs());
        }
    }
    err
}

fn worst_conservation_error() -> f64 {
    let db = MaterialDb::builtin();
    let mat = db.resolve("Wood Fiber 1").unwrap();
    let mut cfg = SimulationConfig::for_design(Design {
        material: "Wood Fiber 1".into(),
        length: 0.01,
        time: DAY,
        period: DAY,
        surface: SurfaceCoefficients::INSIDE,
    });
    cfg.grid_points = 41;
    cfg.end_time = 0.5;
    let mut p = cfg.problem(&pc(), mat).unwrap();
    p.numbers.bi_m = 0.0;
    p.numbers.bi_q = 0.0;
    p.numbers.bi_qm = 0.0;
    let chi = p.grid();
    p.initial = InitialState::Profile {
        u: chi
            .iter()
            .map(|x| 0.2 + 0.1 * (std::f64::consts::PI * x).cos())
            .collect(),
        v: chi.iter().map(|x| 0.3 + 0.4 * x).collect(),
    };
    let volumes = cell_volumes(p.grid_points);
    let mut totals = Vec::new();
    solver::solve_with_observer(&p, |_, _, _, w| {
        totals.push(w.iter().zip(&volumes).map(|(w, v)| w * v).sum::<f64>());
    })
    .unwrap();
    totals
        .windows(2)
        .map(|w| ((w[1] - w[0]) / w[0]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_8_property_suite() {
    let pc = pc();
    let db = MaterialDb::builtin();
    let frame = ReferenceFrame::default();

    let start = Instant::now();
    let oracle = series_oracle_error();
    let oracle_secs = start.elapsed().as_secs_f64();

    let conservation = worst_conservation_error();

    let mut slope_err = 0.0_f64;
    let mut fit_err = 0.0_f64;
    for m in db.materials() {
        for k in 1..=9 {
            let phi = k as f64 / 10.0;
            let h = 1e-6;
            let fd = (thermo::sorption(m, phi + h).unwrap()
                - thermo::sorption(m, phi - h).unwrap())
                / (2.0 * h);
            slope_err = slope_err.max(relative_difference(
                fd,
                thermo::sorption_slope(m, phi).unwrap(),
            ));
        }
        let points: Vec<SorptionPoint> = [0.2, 0.5, 0.8]
            .iter()
            .map(|&phi| SorptionPoint {
                phi,
                omega: thermo::sorption(m, phi).unwrap(),
            })
            .collect();
        let fit = fit_sorption(&points).unwrap();
        fit_err = fit_err
            .max(relative_difference(fit.alpha1, m.alpha1))
            .max(relative_difference(fit.omega1, m.omega1));
    }

    let mut involution = 0.0_f64;
    for a in db.materials() {
        for b in db.materials() {
            for kind in SimilarityKind::ALL {
                let l = similarity::equivalent_length(&pc, a, 0.2, b, kind, &frame).unwrap();
                let back = similarity::equivalent_length(&pc, b, l, a, kind, &frame).unwrap();
                involution = involution.max(relative_difference(back, 0.2));
            }
        }
    }

    let pass = oracle < 1e-4
        && oracle_secs < 60.0
        && conservation < 1e-10
        && slope_err < 1e-6
        && fit_err < 1e-10
        && involution < 1e-12;
    report(
        8,
        "property suite",
        pass,
        &format!(
            "series oracle {oracle:.2e} at N = 201 ({oracle_secs:.1} s), conservation {conservation:.1e}/step, \
             slope FD {slope_err:.1e}, sorption fit {fit_err:.1e}, length involution {involution:.1e}"
        ),
    );
}

#[test]
fn criterion_9_qualitative_claims() {
    let pc = pc();
    let db = MaterialDb::builtin();
    let base = ReferenceFrame::default();

    let mut heat_dominates = true;
    let mut exceptions = Vec::new();
    for m in db.materials() {
        let n = dimensionless::numbers(&pc, m, &base.for_material(m)).unwrap();
        heat_dominates &= n.fo_q > n.fo_m;
        if n.gamma * n.fo_q >= n.fo_q {
            exceptions.push(m);
        }
    }
    let exceptions_ok = exceptions.len() <= 5
        && exceptions
            .iter()
            .all(|m| m.category == Category::Insulation);

    let c1 = WallConfig::builtin_config1();
    let c2 = WallConfig::builtin_config2();
    let factors = [0.5, 1.0, 1.5];
    let mut walls_ok = true;
    let mut cases = 0;
    for &f1 in &factors {
        for &f2 in &factors {
            for &f3 in &factors {
                let k = [f1, f2, f3];
                let r = wall::compare(
                    &pc,
                    &db,
                    &c1.with_thickness_factors(&k),
                    &c2.with_thickness_factors(&k),
                    &base,
                )
                .unwrap();
                use Larger::{A, B};
                let get = |key: &str| r.get(key).unwrap();
                walls_ok &= get("fo_m").larger == vec![B, B, A]
                    && get("delta_fo_m").larger[2] == A
                    && get("fo_q").larger[0] == A
                    && get("fo_q").larger[2] == A
                    && !get("fo_q").totally_ordered
                    && get("gamma_fo_q").larger == vec![B, B, A]
                    && r.further_simulation_required();
                cases += 1;
            }
        }
    }
    let names: Vec<&str> = exceptions.iter().map(|m| m.name.as_str()).collect();
    report(
        9,
        "qualitative mapping and wall claims",
        heat_dominates && exceptions_ok && walls_ok,
        &format!(
            "fo_q > fo_m for all 49: {heat_dominates}; gamma >= 1 exceptions: [{}]; wall orderings hold in {} thickness cases: {walls_ok}",
            names.join(", "),
            cases
        ),
    );
}
