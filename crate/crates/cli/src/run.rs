use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anisoreach::curvature::BundleSample;
use anisoreach::linalg::Point;
use anisoreach::measures::{boundary_strata, curvature_measure, disintegration_ratio, fan_measure, phi_perimeter, steiner_predict};
use anisoreach::theorems::{
    alexandrov_classify, heintze_karcher_check, lower_bound_rigidity, mean_convexity_ledger, minkowski_check, minkowski_volume_check,
};
use anisoreach::{Error, Norm, NormKind, Scene, Settings, Shape};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CheckDecl, CheckKind, ExperimentConfig, Expect, Theorem};

const DEFAULT_SAMPLES: usize = 256;
const DEFAULT_REACH_SAMPLES: usize = 512;
const NORM_CHECK_DIRECTIONS: usize = 1000;
const LEDGER_POINTS: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: &'static str,
    pub expect: Expect,
    pub pass: bool,
    /// `pass` agrees with `expect`.
    pub ok: bool,
    pub error: Option<String>,
    pub summary: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub dimension: usize,
    pub checks: Vec<CheckOutcome>,
    pub all_ok: bool,
}

#[derive(Debug)]
pub enum RunError {
    Io(std::io::Error),
    /// Errors that abort the run instead of failing one check.
    Fatal(Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Fatal(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

struct Artifacts {
    details: Value,
    csv: Option<Vec<u8>>,
    pass: bool,
    summary: Value,
}

/// Runs every check of the selected kinds and writes reports to
/// `config.output_dir`.
pub fn run(config: &ExperimentConfig, kinds: Option<&[CheckKind]>) -> Result<Summary, RunError> {
    fs::create_dir_all(&config.output_dir)?;
    let selected: Vec<(usize, &CheckDecl)> = config
        .checks
        .iter()
        .enumerate()
        .filter(|(_, c)| kinds.is_none_or(|k| k.contains(&c.kind)))
        .collect();
    let mut outcomes = Vec::new();
    for (index, check) in selected {
        let seed = config.seed.wrapping_add(index as u64);
        let result = match config.dimension {
            2 => run_check::<2>(config, check, seed),
            _ => run_check::<3>(config, check, seed),
        };
        let outcome = match result {
            Ok(a) => {
                write_json(&config.output_dir.join(format!("{}.json", check.name)), &a.details)?;
                if let Some(csv) = &a.csv {
                    fs::write(config.output_dir.join(format!("{}.csv", check.name)), csv)?;
                }
                outcome(check, a.pass, None, a.summary)
            }
            Err(e @ Error::BudgetExceeded(_)) => return Err(RunError::Fatal(e)),
            Err(e) => outcome(check, false, Some(e.to_string()), Value::Null),
        };
        outcomes.push(outcome);
    }
    let summary = Summary {
        seed: config.seed,
        dimension: config.dimension,
        all_ok: outcomes.iter().all(|o| o.ok),
        checks: outcomes,
    };
    write_json(&config.output_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn outcome(check: &CheckDecl, pass: bool, error: Option<String>, summary: Value) -> CheckOutcome {
    let ok = match check.expect {
        Expect::Pass => pass,
        Expect::Fail => !pass,
        Expect::Report => true,
    };
    CheckOutcome {
        name: check.name.clone(),
        kind: check.kind.as_str(),
        expect: check.expect,
        pass,
        ok,
        error,
        summary,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_check<const D: usize>(config: &ExperimentConfig, check: &CheckDecl, seed: u64) -> anisoreach::Result<Artifacts> {
    let st = &config.settings;
    let norm_decl = config.norm(check.norm.as_deref().unwrap_or_default()).expect("validated");
    let norm = Norm::<D>::new(norm_decl.kind.clone(), st.norm.clone())?;
    if check.kind == CheckKind::NormCheck {
        return norm_check(&norm, check);
    }
    let shape_decl = config.shape(check.shape.as_deref().unwrap_or_default()).expect("validated");
    let shape = Shape::<D>::from_spec(&shape_decl.spec, &st.shape)?;
    let scene = Scene::new(&shape, &norm, st);
    let samples = check.samples.unwrap_or(DEFAULT_SAMPLES);
    match check.kind {
        CheckKind::NormCheck => unreachable!(),
        CheckKind::ShapeInfo => shape_info(&shape, &norm, samples),
        CheckKind::Reach => {
            let est = scene.global_reach(check.samples.unwrap_or(DEFAULT_REACH_SAMPLES), seed)?;
            let summary = json!({ "reach": est.global, "lo": est.lo, "hi": est.hi, "convex": est.convex, "witnesses": est.witnesses.len() });
            Ok(Artifacts {
                pass: est.global > 0.0,
                details: serde_json::to_value(&est).unwrap_or(Value::Null),
                csv: None,
                summary,
            })
        }
        CheckKind::Tube => tube(&scene, check, samples, seed),
        CheckKind::Measures => measures(&shape, &norm, check, &scene.bundle_sample(samples, seed)?),
        CheckKind::Verify => verify(&scene, st, check, samples, seed),
    }
}

/// Evenly spread unit vectors: equiangular in the plane, a Fibonacci
/// lattice on the sphere.
fn directions<const D: usize>(count: usize) -> Vec<Point<D>> {
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            let mut p = Point::<D>::zeros();
            if D == 2 {
                let a = 2.0 * PI * t;
                p[0] = a.cos();
                p[1] = a.sin();
            } else {
                let z = 1.0 - 2.0 * t;
                let s = (1.0 - z * z).sqrt();
                let a = PI * (3.0 - 5f64.sqrt()) * i as f64;
                p[0] = s * a.cos();
                p[1] = s * a.sin();
                p[2] = z;
            }
            p
        })
        .collect()
}

fn norm_check<const D: usize>(norm: &Norm<D>, check: &CheckDecl) -> anisoreach::Result<Artifacts> {
    let mut duality = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut pairing = 0.0f64;
    for u in directions::<D>(NORM_CHECK_DIRECTIONS) {
        let x = u / norm.eval(&u);
        let back = norm.grad_conjugate(&norm.grad(&x)?)?;
        duality = duality.max((back - x).norm());
        round_trip = round_trip.max(norm.round_trip_error(&u)?);
        let eta = norm.gauss_inverse(&u)?;
        pairing = pairing.max((norm.eval(&u) - u.dot(&eta)).abs());
    }
    let default_tol = if matches!(norm.kind(), NormKind::SmoothedLp { .. }) { 1e-6 } else { 1e-8 };
    let tol = check.tolerance.unwrap_or(default_tol);
    let worst = duality.max(round_trip).max(pairing);
    let summary = json!({ "max_error": worst, "tolerance": tol });
    Ok(Artifacts {
        pass: worst <= tol,
        details: json!({
            "directions": NORM_CHECK_DIRECTIONS,
            "duality_error": duality,
            "gauss_round_trip_error": round_trip,
            "support_pairing_error": pairing,
            "gamma": norm.gamma(),
            "wulff_extent": norm.wulff_extent(),
            "tolerance": tol,
        }),
        csv: None,
        summary,
    })
}

fn shape_info<const D: usize>(shape: &Shape<D>, norm: &Norm<D>, samples: usize) -> anisoreach::Result<Artifacts> {
    let perimeter = phi_perimeter(shape, norm, samples)?;
    let (lo, hi) = shape.bounding_box();
    let summary = json!({ "volume": shape.volume(), "phi_perimeter": perimeter });
    Ok(Artifacts {
        pass: true,
        details: json!({
            "strata": boundary_strata(shape),
            "volume": shape.volume(),
            "phi_perimeter": perimeter,
            "diameter": shape.diameter(),
            "bounding_box": [lo.as_slice(), hi.as_slice()],
            "components": shape.component_count(),
            "convex": shape.is_convex(),
            "complement": shape.is_complement(),
        }),
        csv: None,
        summary,
    })
}

fn tube<const D: usize>(scene: &Scene<D>, check: &CheckDecl, samples: usize, seed: u64) -> anisoreach::Result<Artifacts> {
    let rho = check.rho.clone().expect("validated");
    let bundle = scene.bundle_sample(samples, seed)?;
    let truncated = steiner_predict(scene.norm, &bundle, &rho, true);
    let polynomial = steiner_predict(scene.norm, &bundle, &rho, false);
    let vox = scene.voxel_tube_volume(&rho, check.voxel, seed)?;
    let tol = check.tolerance.unwrap_or(0.01);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidShape(format!("csv: {e}"));
    wtr.write_record(["rho", "voxel_volume", "voxel_error", "steiner_prediction", "polynomial", "residual"]).map_err(csv_err)?;
    let mut max_residual = 0.0f64;
    let mut pass = true;
    for k in 0..rho.len() {
        let dev = (truncated[k] - vox.volume[k]).abs();
        let residual = dev / vox.volume[k];
        max_residual = max_residual.max(residual);
        pass &= dev <= tol * vox.volume[k] + 3.0 * vox.error[k];
        wtr.write_record(
            [rho[k], vox.volume[k], vox.error[k], truncated[k], polynomial[k], residual]
                .iter()
                .map(|v| format!("{v:.12e}")),
        )
        .map_err(csv_err)?;
    }
    let csv = wtr.into_inner().map_err(|e| Error::InvalidShape(format!("csv: {e}")))?;
    let summary = json!({ "steiner_residual": max_residual, "tolerance": tol });
    Ok(Artifacts {
        pass,
        details: json!({
            "rho": rho,
            "voxel_volume": vox.volume,
            "voxel_error": vox.error,
            "voxel_size": vox.h,
            "voxels": vox.voxels,
            "steiner_prediction": truncated,
            "polynomial": polynomial,
            "steiner_residual": max_residual,
            "tolerance": tol,
        }),
        csv: Some(csv),
        summary,
    })
}

fn measures<const D: usize>(shape: &Shape<D>, norm: &Norm<D>, check: &CheckDecl, bundle: &[BundleSample<D>]) -> anisoreach::Result<Artifacts> {
    let degrees = check.m.clone().unwrap_or_else(|| (0..D).collect());
    let tol = check.tolerance.unwrap_or(5e-3);
    let fan = shape.polytope().filter(|_| norm.is_euclidean());
    let mut reports = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for &m in &degrees {
        if m >= D {
            return Err(Error::DimensionMismatch { expected: D - 1, got: m });
        }
        let report = curvature_measure(shape, norm, m, &[], bundle)?;
        let mut entry = serde_json::to_value(&report).unwrap_or(Value::Null);
        if let Some(poly) = fan {
            let (total, per_stratum) = fan_measure(poly, m);
            let rel = (report.theta_total - total).abs() / total.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            pass &= rel <= tol;
            entry["fan_total"] = json!(total);
            entry["fan_strata"] = json!(per_stratum);
        }
        if shape.polytope().is_some() {
            entry["disintegration_ratio"] = json!(disintegration_ratio(shape, norm, bundle, m));
        }
        reports.push(entry);
    }
    let totals: Vec<f64> = reports.iter().map(|r| r["theta_total"].as_f64().unwrap_or(f64::NAN)).collect();
    Ok(Artifacts {
        pass,
        details: json!({ "reports": reports, "fan_discrepancy": worst, "tolerance": tol }),
        csv: None,
        summary: json!({ "theta": totals, "fan_discrepancy": worst }),
    })
}

fn verify<const D: usize>(scene: &Scene<D>, st: &Settings, check: &CheckDecl, samples: usize, seed: u64) -> anisoreach::Result<Artifacts> {
    let theorem = check.theorem.expect("validated");
    let r = check.r.unwrap_or(1);
    let volume = || scene.shape.volume().ok_or_else(|| Error::InvalidShape("theorem needs a finite volume".into()));
    let verdict = match theorem {
        Theorem::Minkowski => {
            let b = scene.bundle_sample(samples, seed)?;
            serde_json::to_value(minkowski_check(scene.norm, r, &b, check.tolerance.unwrap_or(st.theorems.tol_identity))?)
        }
        Theorem::MinkowskiVolume => {
            let b = scene.bundle_sample(samples, seed)?;
            serde_json::to_value(minkowski_volume_check(&b, volume()?, check.tolerance.unwrap_or(st.theorems.tol_identity)))
        }
        Theorem::HeintzeKarcher => {
            let complement = scene.shape.complement()?;
            let b = Scene::new(&complement, scene.norm, st).bundle_sample(samples, seed)?;
            let tol = check.tolerance.unwrap_or(st.theorems.tol_equality);
            serde_json::to_value(heintze_karcher_check(scene.norm, &b, volume()?, st.theorems.tol_sign, tol)?)
        }
        Theorem::MeanConvexity => {
            let b = scene.bundle_sample(samples, seed)?;
            serde_json::to_value(mean_convexity_ledger(scene, r, &b, LEDGER_POINTS)?)
        }
        Theorem::Alexandrov => {
            let b = scene.bundle_sample(samples, seed)?;
            let v = alexandrov_classify(scene, r, &b)?;
            serde_json::to_value(&v).map(|mut val| {
                val["pass"] = json!(v.is_bubble_union);
                val
            })
        }
        Theorem::LowerBound => {
            let b = scene.bundle_sample(samples, seed)?;
            serde_json::to_value(lower_bound_rigidity(scene, &b, LEDGER_POINTS)?)
        }
    }
    .unwrap_or(Value::Null);
    let pass = verdict["pass"].as_bool().unwrap_or(false);
    let mut summary = json!({ "theorem": theorem, "r": r });
    for key in ["residual", "tolerance", "failure_reason", "count", "radius"] {
        if let Some(v) = verdict.get(key) {
            summary[key] = v.clone();
        }
    }
    Ok(Artifacts {
        pass,
        details: verdict,
        csv: None,
        summary,
    })
}
