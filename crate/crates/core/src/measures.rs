//! Curvature measures, φ-perimeter, voxel parallel volumes, the Steiner
//! tube formula and one-sided volume derivatives.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::BundleSample;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, pairwise_sum, pairwise_sum_by};
use crate::linalg::Point;
use crate::norm::Norm;
use crate::projection::Scene;
use crate::settings::VoxelSampling;
use crate::shapes::{Fiber, Membership, Polytope, Shape};

/// Axis-aligned position box × normal cap × stratum selector. Unset parts
/// select everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Window {
    pub name: String,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    /// Keeps samples whose Euclidean normal `u` has `u·axis ≥ min_cos`.
    pub normal_axis: Option<Vec<f64>>,
    pub min_cos: f64,
    /// Allowed values of the finite-curvature count `d`.
    pub strata: Option<Vec<usize>>,
}

impl Window {
    pub fn all(name: &str) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn boxed(name: &str, lo: &[f64], hi: &[f64]) -> Self {
        Self {
            name: name.into(),
            lo: Some(lo.to_vec()),
            hi: Some(hi.to_vec()),
            ..Self::default()
        }
    }

    pub fn stratum(name: &str, d: usize) -> Self {
        Self {
            name: name.into(),
            strata: Some(vec![d]),
            ..Self::default()
        }
    }

    pub fn contains<const D: usize>(&self, s: &BundleSample<D>) -> bool {
        if let Some(lo) = &self.lo {
            if lo.iter().zip(s.a.iter()).any(|(l, x)| x < l) {
                return false;
            }
        }
        if let Some(hi) = &self.hi {
            if hi.iter().zip(s.a.iter()).any(|(h, x)| x > h) {
                return false;
            }
        }
        if let Some(axis) = &self.normal_axis {
            let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
            let c: f64 = axis.iter().zip(s.u.iter()).map(|(a, u)| a * u).sum::<f64>() / norm;
            if c < self.min_cos {
                return false;
            }
        }
        if let Some(st) = &self.strata {
            if !st.contains(&s.stratum_d) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub m: usize,
    /// Signed total `V^φ_m`.
    pub theta_total: f64,
    /// Total of the absolute integrand.
    pub theta_abs: f64,
    pub theta_on: BTreeMap<String, f64>,
    /// Split-half discrepancy of the quadrature.
    pub quadrature_se: f64,
    /// Contribution of each stratum `Ñ_d`, indexed by `d`.
    pub stratum_breakdown: Vec<f64>,
    /// Bundle weight of samples left out (ambiguous or flagged).
    pub excluded_weight: f64,
}

fn integrand<const D: usize>(norm: &Norm<D>, s: &BundleSample<D>, j: usize) -> f64 {
    norm.eval(&s.u) * s.jw * s.spectrum().h[j]
}

/// `Θ^φ_m` over the bundle, restricted to each window.
pub fn curvature_measure<const D: usize>(
    shape: &Shape<D>,
    norm: &Norm<D>,
    m: usize,
    windows: &[Window],
    bundle: &[BundleSample<D>],
) -> Result<CurvatureReport> {
    let n = D - 1;
    if m > n {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    let present = boundary_strata(shape);
    for &st in &present {
        if !bundle.iter().any(|s| s.accepted() && s.boundary_stratum == st) {
            return Err(Error::StrataCoverageGap(st));
        }
    }
    let j = n - m;
    let pref = 1.0 / (n - m + 1) as f64;
    let ok: Vec<&BundleSample<D>> = bundle.iter().filter(|s| s.accepted()).collect();
    let vals: Vec<f64> = ok.iter().map(|s| pref * integrand(norm, s, j)).collect();
    let theta_total = pairwise_sum(&vals);
    let theta_abs = pairwise_sum_by(&vals, |v| v.abs());
    let even = pairwise_sum_by(vals.iter().step_by(2), |v| 2.0 * v);
    let odd = pairwise_sum_by(vals.iter().skip(1).step_by(2), |v| 2.0 * v);
    let mut theta_on = BTreeMap::new();
    for w in windows {
        let v = pairwise_sum_by(ok.iter().zip(&vals), |(s, v)| if w.contains(s) { *v } else { 0.0 });
        theta_on.insert(w.name.clone(), v);
    }
    let stratum_breakdown = (0..=n)
        .map(|d| pairwise_sum_by(ok.iter().zip(&vals), |(s, v)| if s.stratum_d == d { *v } else { 0.0 }))
        .collect();
    Ok(CurvatureReport {
        m,
        theta_total,
        theta_abs,
        theta_on,
        quadrature_se: 0.5 * (even - odd).abs(),
        stratum_breakdown,
        excluded_weight: pairwise_sum_by(bundle.iter().filter(|s| !s.accepted()), |s| s.weight),
    })
}

/// Boundary strata present in the shape.
pub fn boundary_strata<const D: usize>(shape: &Shape<D>) -> Vec<usize> {
    let mut st: Vec<usize> = shape.sample_boundary(8, 0).iter().map(|s| s.stratum).collect();
    st.sort_unstable();
    st.dedup();
    st
}

/// Face-by-face totals `Θ_m = Σ_F H^m(F)·H^{n−m}(normal fiber of F)/(n−m+1)`
/// for a convex polytope under the Euclidean norm. Also returns the
/// per-face contributions.
pub fn fan_measure<const D: usize>(poly: &Polytope<D>, m: usize) -> (f64, Vec<f64>) {
    let n = D - 1;
    let pref = 1.0 / (n - m + 1) as f64;
    let angle = |a: &Point<D>, b: &Point<D>| a.dot(b).clamp(-1.0, 1.0).acos();
    let parts: Vec<f64> = if m == n {
        poly.faces.iter().map(|f| poly.face_measure(f)).collect()
    } else if D == 2 || m == 1 {
        if D == 2 {
            poly.vertex_faces
                .iter()
                .map(|fs| angle(&poly.faces[fs[0]].normal, &poly.faces[fs[1]].normal))
                .collect()
        } else {
            poly.edges
                .iter()
                .map(|e| {
                    (poly.vertices[e.a] - poly.vertices[e.b]).norm()
                        * angle(&poly.faces[e.faces[0]].normal, &poly.faces[e.faces[1]].normal)
                })
                .collect()
        }
    } else {
        // solid angle of the normal cone: the angular defect
        (0..poly.vertices.len())
            .map(|v| {
                let mut sum = 0.0;
                for &fi in &poly.vertex_faces[v] {
                    let vs = &poly.faces[fi].verts;
                    let k = vs.iter().position(|&w| w == v).expect("vertex on face");
                    let prev = poly.vertices[vs[(k + vs.len() - 1) % vs.len()]];
                    let next = poly.vertices[vs[(k + 1) % vs.len()]];
                    let p = poly.vertices[v];
                    sum += angle(&(prev - p).normalize(), &(next - p).normalize());
                }
                2.0 * PI - sum
            })
            .collect()
    };
    let parts: Vec<f64> = parts.into_iter().map(|p| pref * p).collect();
    (pairwise_sum(&parts), parts)
}

/// `∫_{∂^v A} φ(n(A, x)) dH^n` over the top stratum.
pub fn phi_perimeter<const D: usize>(shape: &Shape<D>, norm: &Norm<D>, n_samples: usize) -> Result<f64> {
    if !shape.has_interior() {
        return Err(Error::EmptyInterior);
    }
    let samples = shape.sample_boundary(n_samples, 0);
    Ok(pairwise_sum_by(samples.iter().filter(|s| s.stratum == D - 1), |s| match &s.fiber {
        Fiber::Single(u) => s.weight * norm.eval(u),
        _ => 0.0,
    }))
}

/// Bundle form of the φ-perimeter, `∫ φ(n^φ) J dH^n` over `Ñ_n`.
pub fn bundle_perimeter<const D: usize>(norm: &Norm<D>, bundle: &[BundleSample<D>]) -> f64 {
    pairwise_sum_by(bundle.iter().filter(|s| s.accepted() && s.stratum_d == D - 1), |s| integrand(norm, s, 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct VoxelVolumes {
    pub rho: Vec<f64>,
    /// `L^d(B^φ(A, ρ) \ A)` per radius.
    pub volume: Vec<f64>,
    /// One-sigma (jittered) or bounding (centred) discretisation error.
    pub error: Vec<f64>,
    pub h: f64,
    pub voxels: usize,
}

impl<'a, const D: usize> Scene<'a, D> {
    /// Default voxel size for the shape.
    pub fn voxel_size(&self) -> f64 {
        let div = if D == 2 { self.settings.measures.voxel_div_2d } else { self.settings.measures.voxel_div_3d };
        self.shape.diameter() / div as f64
    }

    /// Parallel volumes by voxel counting of `0 < δ ≤ ρ`. One pass serves
    /// every radius, so differences between radii share samples.
    pub fn voxel_tube_volume(&self, rho: &[f64], h: Option<f64>, seed: u64) -> Result<VoxelVolumes> {
        let h = h.unwrap_or_else(|| self.voxel_size());
        if !(h > 0.0) || rho.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidShape("voxel size and radii must be positive".into()));
        }
        let rmax = rho.iter().copied().fold(0.0, f64::max);
        let (wmin, wmax) = self.norm.wulff_extent();
        let lip = 1.0 / wmin;
        let (lo, hi) = self.shape.bounding_box();
        let pad = rmax * wmax + h;
        let lo = lo.add_scalar(-pad);
        let dims: Vec<usize> = (0..D).map(|i| ((hi[i] + pad - lo[i]) / h).ceil() as usize).collect();
        let total: usize = dims.iter().product();
        if total > self.settings.measures.voxel_cap {
            return Err(Error::BudgetExceeded(format!("{total} voxels exceed the cap of {}", self.settings.measures.voxel_cap)));
        }
        let (blo, bhi) = self.shape.bounding_box();
        let jitter = self.settings.measures.voxel_sampling == VoxelSampling::Jittered;
        let band = 0.5 * lip * h * (D as f64).sqrt();
        let lines = total / dims[0];
        let k = rho.len();
        let per_line = map_indexed(self.settings.execution, lines, |line| -> Result<(Vec<u64>, Vec<u64>)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (line as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut idx = [0usize; 3];
            let mut rest = line;
            for (i, d) in dims.iter().enumerate().skip(1) {
                idx[i] = rest % d;
                rest /= d;
            }
            let mut count = vec![0u64; k];
            let mut straddle = vec![0u64; k];
            let mut x = Point::<D>::zeros();
            for i0 in 0..dims[0] {
                idx[0] = i0;
                for i in 0..D {
                    let off = if jitter { rng.random::<f64>() } else { 0.5 };
                    x[i] = lo[i] + (idx[i] as f64 + off) * h;
                }
                let mut out = 0.0f64;
                for i in 0..D {
                    let e = (blo[i] - x[i]).max(x[i] - bhi[i]).max(0.0);
                    out += e * e;
                }
                if out.sqrt() / wmax > rmax + band {
                    continue;
                }
                if self.shape.membership(&x) != Membership::Outside {
                    continue;
                }
                let d = self.delta(&x)?;
                for (j, r) in rho.iter().enumerate() {
                    if d <= *r {
                        count[j] += 1;
                    }
                    if (d - r).abs() <= band || d <= band {
                        straddle[j] += 1;
                    }
                }
            }
            Ok((count, straddle))
        });
        let mut count = vec![0u64; k];
        let mut straddle = vec![0u64; k];
        for r in per_line {
            let (c, s) = r?;
            for j in 0..k {
                count[j] += c[j];
                straddle[j] += s[j];
            }
        }
        let cell = h.powi(D as i32);
        Ok(VoxelVolumes {
            rho: rho.to_vec(),
            volume: count.iter().map(|c| *c as f64 * cell).collect(),
            error: straddle
                .iter()
                .map(|s| if jitter { 0.5 * (*s as f64).sqrt() * cell } else { 0.5 * *s as f64 * cell })
                .collect(),
            h,
            voxels: total,
        })
    }

    /// One-sided difference quotients of the voxel volume at `rho`,
    /// extrapolated to zero step with the model `q(Δ) = V' + a√Δ + bΔ`.
    pub fn voxel_derivatives(&self, rho: f64, steps: &[f64], h: Option<f64>, seed: u64) -> Result<VolumeDerivatives> {
        let mut grid = vec![rho];
        for s in steps {
            grid.push(rho + s);
            grid.push(rho - s);
        }
        let v = self.voxel_tube_volume(&grid, h, seed)?;
        let q_plus: Vec<f64> = steps.iter().enumerate().map(|(i, s)| (v.volume[1 + 2 * i] - v.volume[0]) / s).collect();
        let q_minus: Vec<f64> = steps.iter().enumerate().map(|(i, s)| (v.volume[0] - v.volume[2 + 2 * i]) / s).collect();
        let plus = extrapolate(steps, &q_plus);
        let minus = extrapolate(steps, &q_minus);
        Ok(VolumeDerivatives { plus, minus, jump: minus - plus })
    }
}

fn extrapolate(steps: &[f64], q: &[f64]) -> f64 {
    let a = DMatrix::from_fn(steps.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => steps[i].sqrt(),
        _ => steps[i],
    });
    let b = DVector::from_column_slice(q);
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("least squares");
    sol[0]
}

/// `c_j = (1/(j+1)) ∫ φ(n^φ) J H_j`, `j = 0..n`, so that below the reach
/// `V(ρ) = Σ_j c_j ρ^{j+1}`.
pub fn steiner_coefficients<const D: usize>(norm: &Norm<D>, bundle: &[BundleSample<D>]) -> Vec<f64> {
    (0..D)
        .map(|j| pairwise_sum_by(bundle.iter().filter(|s| s.accepted()), |s| integrand(norm, s, j)) / (j + 1) as f64)
        .collect()
}

/// Steiner prediction of `L^d(B^φ(A, ρ) \ A)`, with `min(ρ, r^φ_A)` when
/// `truncate`, else the pure polynomial.
pub fn steiner_predict<const D: usize>(norm: &Norm<D>, bundle: &[BundleSample<D>], rho: &[f64], truncate: bool) -> Vec<f64> {
    let ok: Vec<(&BundleSample<D>, f64, Vec<f64>)> = bundle
        .iter()
        .filter(|s| s.accepted())
        .map(|s| (s, norm.eval(&s.u) * s.jw, s.spectrum().h))
        .collect();
    rho.iter()
        .map(|&r| {
            pairwise_sum_by(&ok, |(s, w, hs)| {
                let t = if truncate { r.min(s.reach) } else { r };
                let mut acc = 0.0;
                for (j, hj) in hs.iter().enumerate() {
                    acc += t.powi(j as i32 + 1) / (j + 1) as f64 * hj;
                }
                w * acc
            })
        })
        .collect()
}

/// Least-squares coefficients of `Σ_{k=1}^{degree} c_k ρ^k`.
pub fn fit_polynomial(rho: &[f64], values: &[f64], degree: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(rho.len(), degree, |i, j| rho[i].powi(j as i32 + 1));
    let b = DVector::from_column_slice(values);
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("least squares");
    sol.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeDerivatives {
    pub plus: f64,
    pub minus: f64,
    pub jump: f64,
}

/// `V'_±(ρ)` from the bundle: `Σ_i ρ^i ∫ φ J H_i` over `{r > ρ}` (right)
/// or `{r ≥ ρ}` (left), optionally restricted to a window.
pub fn volume_derivatives<const D: usize>(
    norm: &Norm<D>,
    bundle: &[BundleSample<D>],
    rho: f64,
    tie: f64,
    window: Option<&Window>,
) -> VolumeDerivatives {
    let sel: Vec<&BundleSample<D>> = bundle
        .iter()
        .filter(|s| s.accepted() && window.is_none_or(|w| w.contains(*s)))
        .collect();
    let poly = |s: &BundleSample<D>| -> f64 {
        let hs = s.spectrum().h;
        let mut acc = 0.0;
        for (i, hi) in hs.iter().enumerate() {
            acc += rho.powi(i as i32) * hi;
        }
        norm.eval(&s.u) * s.jw * acc
    };
    let plus = pairwise_sum_by(&sel, |s| if s.reach > rho * (1.0 + tie) { poly(s) } else { 0.0 });
    let minus = pairwise_sum_by(&sel, |s| if s.reach >= rho * (1.0 - tie) { poly(s) } else { 0.0 });
    VolumeDerivatives { plus, minus, jump: minus - plus }
}

/// Empirical ratio `Θ_m(stratum m) / H^m(A^(m))` per boundary stratum,
/// the disintegration density averaged over each stratum.
pub fn disintegration_ratio<const D: usize>(shape: &Shape<D>, norm: &Norm<D>, bundle: &[BundleSample<D>], m: usize) -> Option<f64> {
    let n = D - 1;
    let hm = pairwise_sum_by(shape.sample_boundary(64, 0).iter().filter(|s| s.stratum == m), |s| s.weight);
    if hm <= 0.0 {
        return None;
    }
    let theta = pairwise_sum_by(bundle.iter().filter(|s| s.accepted() && s.boundary_stratum == m), |s| integrand(norm, s, n - m))
        / (n - m + 1) as f64;
    Some(theta / hm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::settings::Settings;
    use crate::shapes::catalog::*;

    #[test]
    fn square_fan_and_bundle() {
        let s = unit_square();
        let p = s.polytope().unwrap();
        assert!((fan_measure(p, 1).0 - 4.0).abs() < 1e-12);
        assert!((fan_measure(p, 0).0 - PI).abs() < 1e-12);
        let n = Norm::<2>::euclidean();
        let st = Settings::default();
        let b = Scene::new(&s, &n, &st).bundle_sample(64, 0).unwrap();
        let right_edge = Window {
            name: "right-edge".into(),
            normal_axis: Some(vec![1.0, 0.0]),
            min_cos: 0.999,
            strata: Some(vec![1]),
            ..Window::default()
        };
        let w = [Window::all("all"), Window::boxed("right", &[0.4, -1.0], &[1.0, 1.0]), right_edge];
        let t1 = curvature_measure(&s, &n, 1, &w, &b).unwrap();
        let t0 = curvature_measure(&s, &n, 0, &w, &b).unwrap();
        assert!((t1.theta_total - 4.0).abs() < 1e-9);
        assert!((t0.theta_total - PI).abs() < 1e-9, "{}", t0.theta_total);
        assert!((t0.stratum_breakdown[0] - PI).abs() < 1e-9);
        assert!((t1.theta_on["right-edge"] - 1.0).abs() < 1e-9);
        assert!((t0.theta_on["right"] - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn cube_fan_route() {
        let c = unit_cube();
        let p = c.polytope().unwrap();
        assert!((fan_measure(p, 2).0 - 6.0).abs() < 1e-12);
        assert!((fan_measure(p, 1).0 - 3.0 * PI).abs() < 1e-12);
        assert!((fan_measure(p, 0).0 - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perimeters() {
        let e = Norm::<2>::euclidean();
        assert!((phi_perimeter(&ball::<2>(&[0.0, 0.0], 1.0), &e, 256).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((phi_perimeter(&unit_square(), &e, 64).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(phi_perimeter(&parallel_segments(4.0), &e, 16), Err(Error::EmptyInterior)));
        // polygonal refinement of the circle under the ellipsoidal norm
        let q = Norm::<2>::ellipsoidal_diag(&[4.0, 1.0]).unwrap();
        let poly = |k: usize| -> f64 {
            (0..k)
                .map(|i| {
                    let t0 = 2.0 * PI * i as f64 / k as f64;
                    let t1 = 2.0 * PI * (i + 1) as f64 / k as f64;
                    let e = point::<2>(&[t1.cos() - t0.cos(), t1.sin() - t0.sin()]);
                    q.eval(&point::<2>(&[e[1], -e[0]]))
                })
                .sum()
        };
        let richardson = (4.0 * poly(1 << 14) - poly(1 << 13)) / 3.0;
        let p = phi_perimeter(&ball::<2>(&[0.0, 0.0], 1.0), &q, 512).unwrap();
        assert!((p - richardson).abs() < 1e-6, "{p} vs {richardson}");
    }

    #[test]
    fn voxel_annulus_and_square() {
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let v = Scene::new(&disk, &e, &st).voxel_tube_volume(&[0.5], Some(1.0 / 512.0), 1).unwrap();
        assert!((v.volume[0] / (PI * 1.25) - 1.0).abs() < 0.01);
        let sq = unit_square();
        let v = Scene::new(&sq, &e, &st).voxel_tube_volume(&[0.25], None, 1).unwrap();
        assert!((v.volume[0] / (1.0 + PI / 16.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn steiner_polynomials() {
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let sq = unit_square();
        let b = Scene::new(&sq, &e, &st).bundle_sample(32, 0).unwrap();
        let c = steiner_coefficients(&e, &b);
        assert!((c[0] - 4.0).abs() < 1e-9 && (c[1] - PI).abs() < 1e-9);
        let p = steiner_predict(&e, &b, &[0.5, 3.0], true);
        assert!((p[1] - (12.0 + 9.0 * PI)).abs() < 1e-8);
        let fit = fit_polynomial(&[0.1, 0.2, 0.3], &[0.1 * 4.0 + 0.01 * PI, 0.8 + 0.04 * PI, 1.2 + 0.09 * PI], 2);
        assert!((fit[0] - 4.0).abs() < 1e-10 && (fit[1] - PI).abs() < 1e-10);
    }

    #[test]
    fn disk_derivative_has_no_jump() {
        let e = Norm::<2>::euclidean();
        let st = Settings::default();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let b = Scene::new(&disk, &e, &st).bundle_sample(128, 0).unwrap();
        let d = volume_derivatives(&e, &b, 0.7, 1e-6, None);
        assert_eq!(d.jump, 0.0);
        assert!((d.plus - 2.0 * PI * 1.7).abs() < 1e-9);
    }
}
