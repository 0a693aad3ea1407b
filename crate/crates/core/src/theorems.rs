//! Numerical verdicts: Maclaurin chains, Minkowski formulas,
//! Heintze–Karcher, mean convexity and the soap-bubble classifier.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::BundleSample;
use crate::error::{Error, Result};
use crate::exec::pairwise_sum_by;
use crate::linalg::{binomial, elementary_symmetric, Point};
use crate::measures::bundle_perimeter;
use crate::norm::Norm;
use crate::projection::Scene;
use crate::shapes::Fiber;

/// Attached to verdicts whose hypotheses hold only almost everywhere.
pub const SAMPLE_QUOTA: &str = "a.e. hypotheses checked on samples";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative error for identities, slack for inequalities.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witnesses: Vec<Vec<f64>>,
    pub flags: Vec<String>,
}

impl TheoremVerdict {
    fn identity(name: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
            witnesses: Vec::new(),
            flags: Vec::new(),
        }
    }
}

fn coords<const D: usize>(p: &Point<D>) -> Vec<f64> {
    p.iter().copied().collect()
}

/// Checks `(S_i/C(n,i))^{1/i} ≥ (S_j/C(n,j))^{1/j}` for `1 ≤ i ≤ j ≤ k`
/// on `x ∈ Γ_k`.
pub fn maclaurin_check(x: &[f64], k: usize) -> Result<TheoremVerdict> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let s = elementary_symmetric(x);
    if let Some(i) = (1..=k).find(|&i| s[i] < 0.0) {
        return Err(Error::PreconditionFailed {
            reason: format!("S_{i} < 0, vector outside Γ_{k}"),
            witnesses: vec![x.to_vec()],
        });
    }
    let q: Vec<f64> = (1..=k).map(|i| (s[i] / binomial(n, i)).powf(1.0 / i as f64)).collect();
    let scale = q[0].max(f64::MIN_POSITIVE);
    let worst = q.windows(2).map(|w| (w[1] - w[0]) / scale).fold(0.0, f64::max);
    let tol = 1e-12;
    Ok(TheoremVerdict {
        name: "maclaurin".into(),
        lhs: q[0],
        rhs: q[k - 1],
        residual: worst,
        tolerance: tol,
        pass: worst <= tol,
        witnesses: if worst > tol { vec![x.to_vec()] } else { Vec::new() },
        flags: Vec::new(),
    })
}

fn accepted<const D: usize>(bundle: &[BundleSample<D>]) -> impl Iterator<Item = &BundleSample<D>> {
    bundle.iter().filter(|s| s.accepted())
}

/// `(n−r+1)∫φ(n^φ)J H_{r−1} = r∫(a·n^φ)J H_r` over the bundle.
pub fn minkowski_check<const D: usize>(norm: &Norm<D>, r: usize, bundle: &[BundleSample<D>], tol: f64) -> Result<TheoremVerdict> {
    let n = D - 1;
    if r == 0 || r > n {
        return Err(Error::DimensionMismatch { expected: n, got: r });
    }
    let lhs = (n - r + 1) as f64 * pairwise_sum_by(accepted(bundle), |s| norm.eval(&s.u) * s.jw * s.spectrum().h[r - 1]);
    let rhs = r as f64 * pairwise_sum_by(accepted(bundle), |s| s.a.dot(&s.u) * s.jw * s.spectrum().h[r]);
    let mut v = TheoremVerdict::identity(&format!("minkowski-r{r}"), lhs, rhs, tol);
    v.flags.push(SAMPLE_QUOTA.into());
    Ok(v)
}

/// `∫(a·n^φ)J H_0 = (n+1)L^{n+1}(C)`.
pub fn minkowski_volume_check<const D: usize>(bundle: &[BundleSample<D>], volume: f64, tol: f64) -> TheoremVerdict {
    let lhs = pairwise_sum_by(accepted(bundle), |s| s.a.dot(&s.u) * s.jw * s.spectrum().h[0]);
    TheoremVerdict::identity("minkowski-volume", lhs, D as f64 * volume, tol)
}

/// Heintze–Karcher slack `n∫φ(n)/h_1 − (n+1)L` from the bundle of the
/// complement, where `h^φ_{C,1} = −H^φ_{K,1}` on its top stratum.
pub fn heintze_karcher_check<const D: usize>(
    norm: &Norm<D>,
    complement_bundle: &[BundleSample<D>],
    volume: f64,
    tol_sign: f64,
    tol_equality: f64,
) -> Result<TheoremVerdict> {
    let n = D - 1;
    let top: Vec<&BundleSample<D>> = accepted(complement_bundle).filter(|s| s.stratum_d == n).collect();
    let h1: Vec<f64> = top.iter().map(|s| -s.spectrum().h[1]).collect();
    let bad: Vec<Vec<f64>> = top.iter().zip(&h1).filter(|(_, h)| **h < -tol_sign).map(|(s, _)| coords(&s.a)).collect();
    if !bad.is_empty() {
        return Err(Error::PreconditionFailed {
            reason: format!("h_1 < 0 at {} sampled Alexandrov points", bad.len()),
            witnesses: bad,
        });
    }
    let rhs = (n + 1) as f64 * volume;
    let mut flags = vec![SAMPLE_QUOTA.to_string()];
    let lhs = if h1.iter().any(|h| *h <= tol_sign) {
        flags.push("INF".into());
        f64::INFINITY
    } else {
        n as f64 * pairwise_sum_by(top.iter().zip(&h1), |(s, h)| norm.eval(&s.u) * s.jw / h)
    };
    let slack = lhs - rhs;
    if slack.abs() <= tol_equality * volume {
        flags.push("equality".into());
    }
    Ok(TheoremVerdict {
        name: "heintze-karcher".into(),
        lhs,
        rhs,
        residual: slack,
        tolerance: tol_equality * volume,
        pass: slack >= -tol_equality * volume,
        witnesses: Vec::new(),
        flags,
    })
}

/// Evenly spread top-stratum samples at which the boundary normal is
/// unique, for pointwise checks.
fn alexandrov_candidates<'b, const D: usize>(scene: &Scene<D>, bundle: &'b [BundleSample<D>], count: usize) -> Vec<&'b BundleSample<D>> {
    let top: Vec<&BundleSample<D>> = accepted(bundle)
        .filter(|s| s.stratum_d == D - 1 && s.boundary_stratum == D - 1)
        .filter(|s| matches!(scene.shape.fiber_at(&s.a), Some(Fiber::Single(_))))
        .collect();
    if top.len() <= count {
        return top;
    }
    (0..count).map(|i| top[i * top.len() / count]).collect()
}

/// `h^φ_{C,i} ≥ 0` for `i < r` at sampled Alexandrov points and
/// `H^φ_{C,r} ≥ 0` on every bundle sample.
pub fn mean_convexity_ledger<const D: usize>(scene: &Scene<D>, r: usize, bundle: &[BundleSample<D>], points: usize) -> Result<TheoremVerdict> {
    let tol = scene.settings.theorems.tol_sign;
    let mut worst = f64::INFINITY;
    let mut witnesses = Vec::new();
    if r > 1 {
        for s in alexandrov_candidates(scene, bundle, points) {
            let h = match scene.pointwise_h(&s.a) {
                Ok(h) => h,
                Err(Error::NotAlexandrov(_)) => continue,
                Err(e) => return Err(e),
            };
            for hi in &h[..r - 1] {
                worst = worst.min(*hi);
                if *hi < -tol {
                    witnesses.push(coords(&s.a));
                }
            }
        }
    }
    for s in accepted(bundle) {
        let h = s.spectrum().h[r];
        worst = worst.min(h);
        if h < -tol {
            witnesses.push(coords(&s.a));
        }
    }
    witnesses.dedup();
    Ok(TheoremVerdict {
        name: format!("mean-convexity-r{r}"),
        lhs: worst,
        rhs: 0.0,
        residual: worst,
        tolerance: tol,
        pass: witnesses.is_empty(),
        witnesses,
        flags: vec![SAMPLE_QUOTA.into()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    NoTopStratum,
    NonConstantCurvature,
    SingularSetBudget,
    NonPositiveLambda,
    RadiusMismatch,
    FitFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleVerdict {
    pub is_bubble_union: bool,
    pub count: usize,
    pub centers: Vec<Vec<f64>>,
    /// Mean of the fitted radii.
    pub radius: f64,
    /// `(n+1)L/P^φ`.
    pub rho_volume: f64,
    /// `C(n,r)^{1/r}(λ(r+1))^{−1/r}`.
    pub rho_lambda: f64,
    pub lambda: f64,
    /// `|ρ − ρ_volume|` and `|ρ − ρ_lambda|`.
    pub radius_consistency: [f64; 2],
    /// Relative spread of `H_r` over the top stratum.
    pub spread: f64,
    /// Bundle-weight fraction carried by strata below `n`.
    pub singular_fraction: f64,
    /// Largest `|φ*(x − c_i) − ρ_i| / ρ_i`.
    pub fit_residual: f64,
    /// Smallest `φ*(c_j − c_i) − 2ρ` between fitted centres.
    pub separation: f64,
    pub failure_reason: Option<FailureReason>,
}

fn clusters<const D: usize>(points: &[Point<D>], link_factor: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut nn = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                nn[i] = nn[i].min((points[i] - points[j]).norm());
            }
        }
    }
    let spacing = nn.iter().sum::<f64>() / n as f64;
    let link = link_factor * spacing;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => g.1.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    groups.into_iter().map(|g| g.1).collect()
}

/// Gauss–Newton fit of `φ*(x − c) = ρ` over `(c, ρ)`.
fn fit_wulff<const D: usize>(norm: &Norm<D>, pts: &[Point<D>]) -> Result<(Point<D>, f64, f64)> {
    let mut c = pts.iter().fold(Point::<D>::zeros(), |a, p| a + p) / pts.len() as f64;
    let mut rho = pts.iter().map(|p| norm.conjugate_eval(&(p - c))).sum::<Result<f64>>()? / pts.len() as f64;
    for _ in 0..50 {
        let mut jac = DMatrix::<f64>::zeros(pts.len(), D + 1);
        let mut res = DVector::<f64>::zeros(pts.len());
        for (k, p) in pts.iter().enumerate() {
            let y = p - c;
            res[k] = norm.conjugate_eval(&y)? - rho;
            let g = norm.grad_conjugate(&y)?;
            for i in 0..D {
                jac[(k, i)] = -g[i];
            }
            jac[(k, D)] = -1.0;
        }
        let step = jac.svd(true, true).solve(&(-res), 1e-14).map_err(|_| Error::NonConvergence {
            what: "centre fit",
            residual: f64::NAN,
        })?;
        for i in 0..D {
            c[i] += step[i];
        }
        rho += step[D];
        if step.norm() < 1e-14 * (1.0 + rho) {
            break;
        }
    }
    let worst = pts
        .iter()
        .map(|p| norm.conjugate_eval(&(p - c)).map(|v| (v - rho).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((c, rho, worst / rho))
}

/// Soap-bubble classifier. The checks run in a fixed order and the first
/// failure is reported: constancy of `H_r`, singular-set budget, sign of
/// λ, agreement of the two radius formulas, geometric fit.
pub fn alexandrov_classify<const D: usize>(scene: &Scene<D>, r: usize, bundle: &[BundleSample<D>]) -> Result<BubbleVerdict> {
    let n = D - 1;
    if r == 0 || r > n {
        return Err(Error::DimensionMismatch { expected: n, got: r });
    }
    let volume = scene
        .shape
        .volume()
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or(Error::precondition("positive finite volume"))?;
    let th = &scene.settings.theorems;
    let mut v = BubbleVerdict {
        is_bubble_union: false,
        count: 0,
        centers: Vec::new(),
        radius: f64::NAN,
        rho_volume: f64::NAN,
        rho_lambda: f64::NAN,
        lambda: f64::NAN,
        radius_consistency: [f64::NAN; 2],
        spread: f64::NAN,
        singular_fraction: f64::NAN,
        fit_residual: f64::NAN,
        separation: f64::NAN,
        failure_reason: None,
    };
    let top: Vec<&BundleSample<D>> = accepted(bundle).filter(|s| s.stratum_d == n).collect();
    if top.is_empty() {
        v.failure_reason = Some(FailureReason::NoTopStratum);
        return Ok(v);
    }
    let hr: Vec<f64> = top.iter().map(|s| s.spectrum().h[r]).collect();
    let lo = hr.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = pairwise_sum_by(top.iter().zip(&hr), |(s, h)| s.jw * h) / pairwise_sum_by(&top, |s| s.jw);
    // flat pieces have H_r ≡ 0, so the spread is relative to the curvature scale as well
    let scale = scene.shape.diameter().powi(-(r as i32));
    v.spread = (hi - lo) / mean.abs().max(scale);
    v.lambda = mean / (r + 1) as f64;
    let perimeter = bundle_perimeter(scene.norm, bundle);
    v.rho_volume = (n + 1) as f64 * volume / perimeter;
    if v.spread > th.tol_const {
        v.failure_reason = Some(FailureReason::NonConstantCurvature);
        return Ok(v);
    }
    let total = pairwise_sum_by(accepted(bundle), |s| s.weight);
    v.singular_fraction = pairwise_sum_by(accepted(bundle).filter(|s| s.stratum_d < n), |s| s.weight) / total;
    if v.singular_fraction > th.tol_sing {
        v.failure_reason = Some(FailureReason::SingularSetBudget);
        return Ok(v);
    }
    if !(v.lambda > 0.0) {
        v.failure_reason = Some(FailureReason::NonPositiveLambda);
        return Ok(v);
    }
    v.rho_lambda = binomial(n, r).powf(1.0 / r as f64) * (v.lambda * (r + 1) as f64).powf(-1.0 / r as f64);
    if (v.rho_lambda - v.rho_volume).abs() > th.tol_rad * v.rho_volume {
        v.failure_reason = Some(FailureReason::RadiusMismatch);
        return Ok(v);
    }
    let pts: Vec<Point<D>> = top.iter().map(|s| s.a).collect();
    let groups = clusters(&pts, th.link_factor);
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let mut worst = 0.0f64;
    for g in &groups {
        let sub: Vec<Point<D>> = g.iter().map(|&i| pts[i]).collect();
        let (c, rho, res) = fit_wulff(scene.norm, &sub)?;
        centers.push(c);
        radii.push(rho);
        worst = worst.max(res);
    }
    let rmin = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    v.count = groups.len();
    v.centers = centers.iter().map(coords).collect();
    v.radius = radii.iter().sum::<f64>() / radii.len() as f64;
    v.radius_consistency = [(v.radius - v.rho_volume).abs(), (v.radius - v.rho_lambda).abs()];
    v.fit_residual = worst;
    let mut sep = f64::INFINITY;
    for i in 0..centers.len() {
        for j in 0..centers.len() {
            if i != j {
                sep = sep.min(scene.norm.conjugate_eval(&(centers[j] - centers[i]))? - 2.0 * v.radius);
            }
        }
    }
    v.separation = sep;
    if worst > th.tol_fit || (rmax - rmin) > th.tol_rad * v.radius || (v.radius - v.rho_volume).abs() > th.tol_rad * v.rho_volume {
        v.failure_reason = Some(FailureReason::FitFailed);
        return Ok(v);
    }
    v.is_bubble_union = true;
    Ok(v)
}

/// If `h^φ_{C,1} ≥ n/ρ` with `ρ = (n+1)L/P^φ` at the sampled Alexandrov
/// points, the classifier must report a union of Wulff shapes.
pub fn lower_bound_rigidity<const D: usize>(scene: &Scene<D>, bundle: &[BundleSample<D>], points: usize) -> Result<TheoremVerdict> {
    let n = D - 1;
    let volume = scene
        .shape
        .volume()
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or(Error::precondition("positive finite volume"))?;
    let rho = (n + 1) as f64 * volume / bundle_perimeter(scene.norm, bundle);
    let bound = n as f64 / rho;
    let tol = scene.settings.theorems.tol_const * bound;
    let mut lowest = f64::INFINITY;
    let mut witnesses = Vec::new();
    for s in alexandrov_candidates(scene, bundle, points) {
        let h1 = match scene.pointwise_h(&s.a) {
            Ok(h) => h[0],
            Err(Error::NotAlexandrov(_)) => continue,
            Err(e) => return Err(e),
        };
        lowest = lowest.min(h1);
        if h1 < bound - tol {
            witnesses.push(coords(&s.a));
        }
    }
    let mut flags = vec![SAMPLE_QUOTA.to_string()];
    let pass = if witnesses.is_empty() {
        let verdict = alexandrov_classify(scene, 1, bundle)?;
        flags.push(format!("hypothesis holds, classifier {}", verdict.is_bubble_union));
        verdict.is_bubble_union
    } else {
        flags.push("hypothesis fails, no implication".into());
        true
    };
    Ok(TheoremVerdict {
        name: "lower-bound-rigidity".into(),
        lhs: lowest,
        rhs: bound,
        residual: lowest - bound,
        tolerance: tol,
        pass,
        witnesses,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::Settings;
    use crate::shapes::catalog::*;
    use std::f64::consts::PI;

    #[test]
    fn maclaurin_examples() {
        assert!(maclaurin_check(&[1.0, 1.0], 2).unwrap().pass);
        let v = maclaurin_check(&[3.0, 1.0], 2).unwrap();
        assert!(v.pass && (v.lhs - 2.0).abs() < 1e-15 && (v.rhs - 3f64.sqrt()).abs() < 1e-15);
        assert!(maclaurin_check(&[4.0, 1.0, 1.0], 3).unwrap().pass);
        assert!(matches!(maclaurin_check(&[1.0, -2.0], 1), Err(Error::PreconditionFailed { .. })));
    }

    #[test]
    fn disk_minkowski_and_volume() {
        let s = ball::<2>(&[0.0, 0.0], 1.5);
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let b = Scene::new(&s, &e, &st).bundle_sample(128, 0).unwrap();
        let m = minkowski_check(&e, 1, &b, 5e-3).unwrap();
        assert!((m.lhs - 3.0 * PI).abs() < 1e-9 && m.residual < 1e-6, "{m:?}");
        let v = minkowski_volume_check(&b, s.volume().unwrap(), 1e-2);
        assert!(v.pass);
    }

    #[test]
    fn square_minkowski() {
        let s = unit_square();
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let b = Scene::new(&s, &e, &st).bundle_sample(64, 0).unwrap();
        let m = minkowski_check(&e, 1, &b, 5e-3).unwrap();
        assert!((m.lhs - 4.0).abs() < 1e-9 && m.residual < 1e-6, "{m:?}");
    }

    #[test]
    fn disk_is_a_bubble_and_square_is_not() {
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let s = ball::<2>(&[0.3, 0.0], 1.0);
        let b = Scene::new(&s, &e, &st).bundle_sample(128, 0).unwrap();
        let v = alexandrov_classify(&Scene::new(&s, &e, &st), 1, &b).unwrap();
        assert!(v.is_bubble_union && v.count == 1, "{v:?}");
        assert!((v.centers[0][0] - 0.3).abs() < 1e-6 && (v.radius - 1.0).abs() < 1e-6);
        let sq = unit_square();
        let b = Scene::new(&sq, &e, &st).bundle_sample(64, 0).unwrap();
        let v = alexandrov_classify(&Scene::new(&sq, &e, &st), 1, &b).unwrap();
        assert_eq!(v.failure_reason, Some(FailureReason::SingularSetBudget));
    }

    #[test]
    fn disk_heintze_karcher_equality() {
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let s = ball::<2>(&[0.0, 0.0], 1.0);
        let k = s.complement().unwrap();
        let b = Scene::new(&k, &e, &st).bundle_sample(128, 0).unwrap();
        let v = heintze_karcher_check(&e, &b, PI, 1e-6, 5e-3).unwrap();
        assert!(v.pass && v.flags.iter().any(|f| f == "equality"), "{v:?}");
        let r = lower_bound_rigidity(&Scene::new(&s, &e, &st), &Scene::new(&s, &e, &st).bundle_sample(128, 0).unwrap(), 16).unwrap();
        assert!(r.pass);
    }
}
