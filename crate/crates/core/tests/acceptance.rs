//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use anisoreach::curvature::{BundleSample, SampleStatus};
use anisoreach::linalg::{point, Point};
use anisoreach::measures::{curvature_measure, fan_measure, fit_polynomial, steiner_predict, volume_derivatives, Window};
use anisoreach::shapes::catalog::*;
use anisoreach::shapes::ShapeSpec;
use anisoreach::theorems::{
    alexandrov_classify, heintze_karcher_check, maclaurin_check, minkowski_check, minkowski_volume_check, FailureReason,
};
use anisoreach::{Error, Norm, NormKind, Scene, Settings, Shape};

type Check = Result<String, String>;

fn q2() -> Norm<2> {
    Norm::ellipsoidal_diag(&[4.0, 1.0]).unwrap()
}

fn q3() -> Norm<3> {
    Norm::ellipsoidal_diag(&[4.0, 1.0, 1.0]).unwrap()
}

fn norms2() -> Vec<(&'static str, Norm<2>)> {
    vec![("euclidean", Norm::euclidean()), ("ellipsoidal", q2())]
}

fn norms3() -> Vec<(&'static str, Norm<3>)> {
    vec![("euclidean", Norm::euclidean()), ("ellipsoidal", q3())]
}

fn wulff_union<const D: usize>(norm: &NormKind, centers: &[Vec<f64>], radius: f64) -> Shape<D> {
    union(
        centers
            .iter()
            .map(|c| ShapeSpec::WulffBody {
                norm: norm.clone(),
                center: c.clone(),
                radius,
            })
            .collect(),
    )
}

fn bundle<const D: usize>(shape: &Shape<D>, norm: &Norm<D>, st: &Settings, n: usize) -> Result<Vec<BundleSample<D>>, String> {
    Scene::new(shape, norm, st).bundle_sample(n, 7).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn duality_errors<const D: usize>(norm: &Norm<D>, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for _ in 0..1000 {
        let v = Point::<D>::from_fn(|_, _| rng.random::<f64>() * 2.0 - 1.0);
        let x = v / norm.eval(&v);
        let back = norm.grad_conjugate(&norm.grad(&x).unwrap()).unwrap();
        e1 = e1.max((back - x).norm());
        let u = v.normalize();
        let round = norm.gauss_map(&norm.gauss_inverse(&u).unwrap()).unwrap();
        e2 = e2.max((round - u).norm());
    }
    (e1, e2)
}

fn criterion_1(_: &Settings) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (_, n) in norms2() {
        let (a, b) = duality_errors(&n, &mut rng);
        worst = worst.max(a).max(b);
    }
    for (_, n) in norms3() {
        let (a, b) = duality_errors(&n, &mut rng);
        worst = worst.max(a).max(b);
    }
    ensure(worst <= 1e-8, || format!("max round-trip error {worst:.2e}"))?;
    Ok(format!("max round-trip error {worst:.2e}"))
}

fn criterion_2(st: &Settings) -> Check {
    let rho: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    let shapes: Vec<(&str, Shape<2>)> = vec![
        ("disk", ball(&[0.0, 0.0], 1.0)),
        ("square", unit_square()),
        ("ellipse", ellipse(2.0, 1.0)),
        ("two-balls", two_balls(1.5, 1.0, 1.0)),
    ];
    let mut worst = 0.0f64;
    let mut fit = Vec::new();
    for (name, s) in &shapes {
        for (nn, n) in norms2() {
            let scene = Scene::new(s, &n, st);
            let b = bundle(s, &n, st, 256)?;
            let pred = steiner_predict(&n, &b, &rho, true);
            let vox = scene.voxel_tube_volume(&rho, None, 11).map_err(|e| e.to_string())?;
            for k in 0..rho.len() {
                let dev = (pred[k] - vox.volume[k]).abs();
                let allowed = 0.01 * vox.volume[k] + 3.0 * vox.error[k];
                worst = worst.max(dev / allowed);
                ensure(dev <= allowed, || {
                    format!("{name}/{nn} at ρ = {:.1}: prediction {:.5} vs voxel {:.5}", rho[k], pred[k], vox.volume[k])
                })?;
            }
            if *name == "square" && nn == "euclidean" {
                fit = fit_polynomial(&rho, &vox.volume, 2);
            }
        }
    }
    ensure(rel(fit[0], 4.0) <= 0.02 && rel(fit[1], PI) <= 0.02, || format!("square fit {fit:?}"))?;
    Ok(format!("worst deviation {:.0}% of allowance, square fit ({:.4}, {:.4})", 100.0 * worst, fit[0], fit[1]))
}

fn criterion_3(st: &Settings) -> Check {
    let s = ellipse(2.0, 1.0);
    let e = Norm::<2>::euclidean();
    let scene = Scene::new(&s, &e, st);
    let mut worst = 0.0f64;
    for k in 0..64 {
        let t = 2.0 * PI * (k as f64 + 0.3) / 64.0;
        let a = point::<2>(&[2.0 * t.cos(), t.sin()]);
        let u = point::<2>(&[t.cos(), 2.0 * t.sin()]).normalize();
        let kappa = scene.curvature_at(&a, &u).map_err(|e| e.to_string())?.kappa[0];
        let exact = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
        worst = worst.max(rel(kappa, exact));
    }
    ensure(worst <= 1e-3, || format!("ellipse max relative error {worst:.2e}"))?;
    let mut wulff_err = 0.0f64;
    for (_, n) in norms2() {
        let w = wulff::<2>(n.kind(), &[0.3, -0.2], 2.0);
        for smp in bundle(&w, &n, st, 128)? {
            wulff_err = wulff_err.max((smp.kappa[0] - 0.5).abs());
        }
    }
    for (_, n) in norms3() {
        let w = wulff::<3>(n.kind(), &[0.3, -0.2, 0.1], 2.0);
        for smp in bundle(&w, &n, st, 256)? {
            for k in &smp.kappa {
                wulff_err = wulff_err.max((k - 0.5).abs());
            }
        }
    }
    ensure(wulff_err <= 1e-5, || format!("Wulff self-test error {wulff_err:.2e}"))?;
    Ok(format!("ellipse max rel error {worst:.2e}, Wulff |κ − 1/ρ| ≤ {wulff_err:.2e}"))
}

fn catalog2(norm: &Norm<2>) -> Vec<(&'static str, Shape<2>)> {
    vec![
        ("disk", ball(&[0.0, 0.0], 1.0)),
        ("square", unit_square()),
        ("ellipse-2-1", ellipse(2.0, 1.0)),
        ("ellipse-1-2", build_ellipse(1.0, 2.0)),
        ("two-balls", two_balls(1.5, 1.0, 1.0)),
        ("mixed-balls", two_balls(1.5, 1.0, 0.5)),
        ("cap-lens-0.25", cap_lens(0.25)),
        ("cap-lens-0.5", cap_lens(0.5)),
        ("segments", parallel_segments(4.0)),
        ("wulff", wulff(norm.kind(), &[0.3, -0.2], 2.0)),
        ("three-wulff", wulff_union(norm.kind(), &[vec![-3.0, 0.0], vec![0.0, 0.0], vec![3.0, 0.0]], 0.5)),
        ("disk-complement", ball::<2>(&[0.0, 0.0], 1.0).complement().unwrap()),
        ("ellipse-complement", ellipse(2.0, 1.0).complement().unwrap()),
    ]
}

fn build_ellipse(a: f64, b: f64) -> Shape<2> {
    Shape::from_spec(
        &ShapeSpec::Ellipsoid {
            center: vec![0.0, 0.0],
            semiaxes: vec![a, b],
        },
        &Default::default(),
    )
    .unwrap()
}

fn catalog3(norm: &Norm<3>) -> Vec<(&'static str, Shape<3>)> {
    vec![
        ("ball", ball(&[0.0, 0.0, 0.0], 1.0)),
        ("cube", unit_cube()),
        ("wulff", wulff(norm.kind(), &[0.0, 0.1, 0.0], 1.5)),
    ]
}

fn audit_counts<const D: usize>(b: &[BundleSample<D>]) -> (usize, usize, usize) {
    let ok = b.iter().filter(|s| s.status == SampleStatus::Ok).count();
    let bad = b.iter().filter(|s| matches!(s.status, SampleStatus::InvarianceViolation(_))).count();
    (ok, bad, b.len() - ok - bad)
}

fn criterion_4(st: &Settings) -> Check {
    let (mut ok, mut bad, mut other) = (0, 0, 0);
    let mut worst = Vec::new();
    for (nn, n) in norms2() {
        for (name, s) in catalog2(&n) {
            let (a, b, c) = audit_counts(&bundle(&s, &n, st, 96).map_err(|e| format!("{name}/{nn}: {e}"))?);
            ok += a;
            bad += b;
            other += c;
            if b > 0 {
                worst.push(format!("{name}/{nn}: {b}"));
            }
        }
    }
    for (nn, n) in norms3() {
        for (name, s) in catalog3(&n) {
            let (a, b, c) = audit_counts(&bundle(&s, &n, st, 48).map_err(|e| format!("{name}/{nn}: {e}"))?);
            ok += a;
            bad += b;
            other += c;
            if b > 0 {
                worst.push(format!("{name}/{nn}: {b}"));
            }
        }
    }
    let frac = ok as f64 / (ok + bad) as f64;
    ensure(frac >= 0.999, || format!("agreement {:.4}% ({bad} violations: {worst:?})", 100.0 * frac))?;
    Ok(format!("{ok}/{} audited samples agree ({other} ambiguous or noisy)", ok + bad))
}

fn criterion_5(st: &Settings) -> Check {
    let e2 = Norm::<2>::euclidean();
    let sq = unit_square();
    let b = bundle(&sq, &e2, st, 64)?;
    let p = sq.polytope().unwrap();
    let mut worst = 0.0f64;
    for m in 0..=1 {
        let quad = curvature_measure(&sq, &e2, m, &[], &b).map_err(|e| e.to_string())?.theta_total;
        let fan = fan_measure(p, m).0;
        let exact = if m == 1 { 4.0 } else { PI };
        ensure(rel(quad, fan) <= 0.005 && rel(fan, exact) <= 1e-12, || format!("square Θ_{m}: bundle {quad}, fan {fan}"))?;
        worst = worst.max(rel(quad, fan));
    }
    let e3 = Norm::<3>::euclidean();
    let cube = unit_cube();
    let b = bundle(&cube, &e3, st, 64)?;
    let p = cube.polytope().unwrap();
    for m in 0..=2 {
        let rep = curvature_measure(&cube, &e3, m, &[Window::stratum("own", m)], &b).map_err(|e| e.to_string())?;
        let fan = fan_measure(p, m).0;
        let quad = rep.theta_on["own"];
        ensure(rel(quad, fan) <= 0.01 && rel(rep.theta_total, fan) <= 0.01, || format!("cube Θ_{m}: bundle {quad}, fan {fan}"))?;
        worst = worst.max(rel(quad, fan));
    }
    ensure(rel(fan_measure(p, 2).0, 6.0) < 1e-12, || "cube face area".into())?;
    Ok(format!("max fan/bundle discrepancy {:.2e}", worst))
}

fn criterion_6(st: &Settings) -> Check {
    let mut worst = 0.0f64;
    let mut worst_vol = 0.0f64;
    for (nn, n) in norms2() {
        let shapes: Vec<(&str, Shape<2>)> = vec![
            ("disk", ball(&[0.2, -0.1], 1.0)),
            ("square", unit_square()),
            ("ellipse", ellipse(2.0, 1.0)),
            ("wulff", wulff(n.kind(), &[0.3, -0.2], 2.0)),
            ("wulff-e", wulff(&NormKind::Euclidean, &[-0.4, 0.0], 0.7)),
        ];
        for (name, s) in shapes {
            let b = bundle(&s, &n, st, 256)?;
            let v = minkowski_check(&n, 1, &b, 5e-3).map_err(|e| e.to_string())?;
            ensure(v.pass, || format!("{name}/{nn}: {} vs {}", v.lhs, v.rhs))?;
            worst = worst.max(v.residual);
            let vol = minkowski_volume_check(&b, s.volume().unwrap(), 1e-2);
            ensure(vol.pass, || format!("{name}/{nn} volume: {} vs {}", vol.lhs, vol.rhs))?;
            worst_vol = worst_vol.max(vol.residual);
        }
    }
    for (nn, n) in norms3() {
        for (name, s) in catalog3(&n) {
            let b = bundle(&s, &n, st, 256)?;
            for r in 1..=2 {
                let v = minkowski_check(&n, r, &b, 5e-3).map_err(|e| e.to_string())?;
                ensure(v.pass, || format!("{name}/{nn} r = {r}: {} vs {}", v.lhs, v.rhs))?;
                worst = worst.max(v.residual);
            }
            let vol = minkowski_volume_check(&b, s.volume().unwrap(), 1e-2);
            ensure(vol.pass, || format!("{name}/{nn} volume: {} vs {}", vol.lhs, vol.rhs))?;
            worst_vol = worst_vol.max(vol.residual);
        }
    }
    Ok(format!("max Minkowski residual {worst:.2e}, volume identity {worst_vol:.2e}"))
}

fn hk<const D: usize>(s: &Shape<D>, n: &Norm<D>, st: &Settings, samples: usize) -> Result<anisoreach::theorems::TheoremVerdict, String> {
    let k = s.complement().map_err(|e| e.to_string())?;
    let b = bundle(&k, n, st, samples)?;
    heintze_karcher_check(n, &b, s.volume().unwrap(), st.theorems.tol_sign, st.theorems.tol_equality).map_err(|e| e.to_string())
}

fn criterion_7(st: &Settings) -> Check {
    let mut worst = 0.0f64;
    for (nn, n) in norms2() {
        let cases: Vec<(&str, Shape<2>)> = vec![
            ("wulff", wulff(n.kind(), &[0.3, -0.2], 1.5)),
            ("two-bodies", wulff_union(n.kind(), &[vec![-2.5, 0.0], vec![2.5, 0.0]], 1.0)),
        ];
        for (name, s) in cases {
            let v = hk(&s, &n, st, 256)?;
            let l = s.volume().unwrap();
            ensure(v.residual.abs() <= 5e-3 * l, || format!("{name}/{nn}: slack {:.3e}", v.residual))?;
            worst = worst.max(v.residual.abs() / l);
        }
    }
    let e = Norm::<2>::euclidean();
    let mut caps = Vec::new();
    for eps in [0.25, 0.5] {
        let v = hk(&cap_lens(eps), &e, st, 256)?;
        let exact = 4.0 * eps * (1.0 - eps * eps).sqrt();
        ensure(v.residual > 0.0 && rel(v.residual, exact) <= 0.01, || format!("cap lens {eps}: slack {} vs {exact}", v.residual))?;
        caps.push(format!("{:.5}/{exact:.5}", v.residual));
    }
    Ok(format!("equality cases within {:.1e}·L, cap-lens slack {}", worst, caps.join(", ")))
}

fn criterion_8(st: &Settings) -> Check {
    let s = parallel_segments(4.0);
    let e = Norm::<2>::euclidean();
    let scene = Scene::new(&s, &e, st);
    let b = bundle(&s, &e, st, 256)?;
    let steps: Vec<f64> = (1..=8).map(|k| 0.01 * k as f64).collect();
    let h = s.diameter() / 2048.0;
    let mut out = Vec::new();
    for rho in [0.5, 1.0, 1.5] {
        let bj = volume_derivatives(&e, &b, rho, st.measures.reach_tie, None).jump;
        let vj = scene.voxel_derivatives(rho, &steps, Some(h), 3).map_err(|e| e.to_string())?.jump;
        if rho == 1.0 {
            ensure(rel(bj, 8.0) <= 0.02 && rel(vj, 8.0) <= 0.02, || format!("jump at 1: bundle {bj}, voxel {vj}"))?;
        } else {
            ensure(bj.abs() <= 0.16 && vj.abs() <= 0.16, || format!("jump at {rho}: bundle {bj}, voxel {vj}"))?;
        }
        out.push(format!("ρ={rho}: {bj:.4}/{vj:.4}"));
    }
    Ok(format!("jumps bundle/voxel {}", out.join(", ")))
}

fn expect_bubble<const D: usize>(name: &str, s: &Shape<D>, n: &Norm<D>, st: &Settings, r: usize, count: usize, radius: f64, samples: usize) -> Result<(), String> {
    let b = bundle(s, n, st, samples)?;
    let v = alexandrov_classify(&Scene::new(s, n, st), r, &b).map_err(|e| e.to_string())?;
    ensure(v.is_bubble_union && v.count == count && rel(v.radius, radius) <= 0.01, || format!("{name} r = {r}: {v:?}"))?;
    ensure(rel(v.radius, v.rho_volume) <= 0.01 && rel(v.radius, v.rho_lambda) <= 0.01, || format!("{name} radii: {v:?}"))
}

fn expect_reject<const D: usize>(name: &str, s: &Shape<D>, n: &Norm<D>, st: &Settings, reason: FailureReason) -> Result<(), String> {
    let b = bundle(s, n, st, 128)?;
    let v = alexandrov_classify(&Scene::new(s, n, st), 1, &b).map_err(|e| e.to_string())?;
    ensure(!v.is_bubble_union && v.failure_reason == Some(reason), || format!("{name}: expected {reason:?}, got {:?}", v.failure_reason))
}

fn criterion_9(st: &Settings) -> Check {
    let mut cases = 0;
    for (nn, n) in norms2() {
        let k = n.kind();
        expect_bubble(&format!("wulff/{nn}"), &wulff(k, &[0.3, -0.2], 2.0), &n, st, 1, 1, 2.0, 128)?;
        expect_bubble(&format!("two-bodies/{nn}"), &wulff_union(k, &[vec![-2.5, 0.0], vec![2.5, 0.0]], 1.0), &n, st, 1, 2, 1.0, 128)?;
        let three = wulff_union(k, &[vec![-3.0, 0.0], vec![0.0, 0.5], vec![3.0, 0.0]], 0.5);
        expect_bubble(&format!("three-bodies/{nn}"), &three, &n, st, 1, 3, 0.5, 128)?;
        expect_reject(&format!("square/{nn}"), &unit_square(), &n, st, FailureReason::SingularSetBudget)?;
        let body = if nn == "euclidean" { ellipse(2.0, 1.0) } else { build_ellipse(1.0, 2.0) };
        expect_reject(&format!("ellipse/{nn}"), &body, &n, st, FailureReason::NonConstantCurvature)?;
        expect_reject(&format!("cap-lens/{nn}"), &cap_lens(0.5), &n, st, if nn == "euclidean" { FailureReason::SingularSetBudget } else { FailureReason::NonConstantCurvature })?;
        expect_reject(&format!("mixed/{nn}"), &mixed(k), &n, st, FailureReason::NonConstantCurvature)?;
        cases += 7;
    }
    for (nn, n) in norms3() {
        let k = n.kind();
        for r in 1..=2 {
            expect_bubble(&format!("wulff3/{nn}"), &wulff::<3>(k, &[0.0, 0.1, 0.0], 1.5), &n, st, r, 1, 1.5, 256)?;
            expect_bubble(&format!("two-bodies3/{nn}"), &wulff_union::<3>(k, &[vec![-2.5, 0.0, 0.0], vec![2.5, 0.0, 0.0]], 1.0), &n, st, r, 2, 1.0, 256)?;
            cases += 2;
        }
    }
    Ok(format!("{cases} classifier cases"))
}

/// `S_k` by enumeration of subsets.
fn subset_sums(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut s = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let mut p = 1.0;
        for (i, xi) in x.iter().enumerate() {
            if mask & (1 << i) != 0 {
                p *= xi;
            }
        }
        s[mask.count_ones() as usize] += p;
    }
    s
}

fn criterion_10(_: &Settings) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut accepted, mut rejected, mut borderline) = (0, 0, 0);
    for _ in 0..100_000 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(1..=n);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        let s = subset_sums(&x);
        if (1..=k).any(|i| s[i].abs() < 1e-9) {
            borderline += 1;
            continue;
        }
        let inside = (1..=k).all(|i| s[i] > 0.0);
        match maclaurin_check(&x, k) {
            Ok(v) => {
                ensure(inside, || format!("accepted {x:?} outside Γ_{k}"))?;
                ensure(v.pass, || format!("chain violated at {x:?}, k = {k}"))?;
                // independent chain from the subset sums
                let q: Vec<f64> = (1..=k).map(|i| (s[i] / binom(n, i)).powf(1.0 / i as f64)).collect();
                ensure(q.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), || format!("oracle chain violated at {x:?}"))?;
                accepted += 1;
            }
            Err(Error::PreconditionFailed { .. }) => {
                ensure(!inside, || format!("rejected {x:?} inside Γ_{k}"))?;
                rejected += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("{accepted} accepted, {rejected} rejected, {borderline} on the cone boundary skipped"))
}

fn binom(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

fn criterion_11(st: &Settings) -> Check {
    let mut worst = 0.0f64;
    for (_, n) in norms2() {
        for c in [ball::<2>(&[0.0, 0.0], 1.0), ellipse(2.0, 1.0)] {
            let k = c.complement().unwrap();
            let sc = Scene::new(&c, &n, st);
            let sk = Scene::new(&k, &n, st);
            for s in bundle(&c, &n, st, 256)? {
                let kk = sk.curvature_at(&s.a, &(-s.eta)).map_err(|e| e.to_string())?.kappa;
                let kc = sc.curvature_at(&s.a, &s.eta).map_err(|e| e.to_string())?.kappa;
                for (i, v) in kk.iter().enumerate() {
                    let want = -kc[kc.len() - 1 - i];
                    worst = worst.max((v - want).abs() / (1.0 + want.abs()));
                }
            }
        }
    }
    ensure(worst <= 1e-4, || format!("max flip error {worst:.2e}"))?;
    Ok(format!("max flip error {worst:.2e}"))
}

fn mixed(norm: &NormKind) -> Shape<2> {
    union(vec![
        ShapeSpec::WulffBody { norm: norm.clone(), center: vec![-2.5, 0.0], radius: 1.0 },
        ShapeSpec::WulffBody { norm: norm.clone(), center: vec![2.5, 0.0], radius: 0.5 },
    ])
}

fn main() {
    let st = Settings::default();
    let criteria: [(&str, fn(&Settings) -> Check); 11] = [
        ("norm duality round-trips", criterion_1),
        ("Steiner formula against voxel volumes", criterion_2),
        ("curvature oracles", criterion_3),
        ("r-invariance of curvatures", criterion_4),
        ("curvature measures on polytopes", criterion_5),
        ("Minkowski formulas", criterion_6),
        ("Heintze–Karcher equality and slack", criterion_7),
        ("volume derivative jump", criterion_8),
        ("soap-bubble classifier", criterion_9),
        ("Maclaurin chains", criterion_10),
        ("complement flip", criterion_11),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let res = f(&st);
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
