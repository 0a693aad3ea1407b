//! Generalized φ-principal curvatures from finite differences of the
//! Cahn–Hoffman map, the normal-bundle sample set, mean curvatures and the
//! bundle Jacobian.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::map_slice;
use crate::linalg::{elementary_symmetric, pair, spd_sqrt, tangent_frame, to_dvec, wedge_norm, Point};
use crate::projection::{Candidate, Scene};
use crate::shapes::{Fiber, Membership};

/// Eigen-decomposition of `Dν^φ_A(x)` on the tangent space of the level
/// set through `x`.
#[derive(Debug, Clone)]
pub struct ChiEigen<const D: usize> {
    /// Ascending eigenvalues `χ_1 ≤ … ≤ χ_n`.
    pub chi: Vec<f64>,
    /// Eigenvectors `τ_i`, orthonormal for the inner product of `D²φ(u)⁻¹`
    /// on `u^⊥`.
    pub tau: Vec<Point<D>>,
    pub r: f64,
    pub eta: Point<D>,
    pub u: Point<D>,
}

/// `κ = χ/(1 − rχ)`, `+∞` once `1 − rχ ≤ tol_inf`.
pub fn kappa_from_chi(chi: f64, r: f64, tol_inf: f64) -> f64 {
    let d = 1.0 - r * chi;
    if d <= tol_inf {
        f64::INFINITY
    } else {
        (chi / d).max(-1.0 / r)
    }
}

/// Symmetrises `Hs⁻¹ M Hs` and returns ascending eigenpairs `(χ, Hs v)` in
/// frame coordinates.
fn b_symmetric_eigen(m: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Vec<(f64, Vec<f64>)>> {
    let (hs, hs_inv) = spd_sqrt(h).ok_or_else(|| Error::InvalidNorm("tangential Hessian is not positive definite".into()))?;
    let g = &hs_inv * m * &hs;
    let g = (&g + g.transpose()) * 0.5;
    let eig = g.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..eig.eigenvalues.len())
        .map(|k| {
            let v = &hs * eig.eigenvectors.column(k);
            (eig.eigenvalues[k], v.iter().copied().collect())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

fn frame<const D: usize>(u: &Point<D>) -> Vec<Point<D>> {
    let f = tangent_frame(u);
    f[..D - 1].to_vec()
}

fn tangential_hessian<const D: usize>(scene: &Scene<D>, u: &Point<D>, t: &[Point<D>]) -> Result<DMatrix<f64>> {
    let h = scene.norm.hessian(u)?;
    Ok(DMatrix::from_fn(t.len(), t.len(), |i, j| t[i].dot(&(h * t[j]))))
}

/// Outcome of the probe audit for one bundle sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "value")]
pub enum SampleStatus {
    Ok,
    /// `1 − rχ` within a decade of the infinity threshold at both probes.
    Ambiguous,
    /// κ at probes r and 2r disagree; the worst relative deviation.
    InvarianceViolation(f64),
    /// A stencil point lost uniqueness of its nearest point.
    ProjectionNoise,
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleSample<const D: usize> {
    pub a: Point<D>,
    pub eta: Point<D>,
    /// Euclidean unit normal `n^φ(η)`.
    pub u: Point<D>,
    /// `H^n` quadrature weight on the normal bundle.
    pub weight: f64,
    /// `J · weight`, the measure actually integrated.
    pub jw: f64,
    pub reach: f64,
    /// Number of finite curvatures.
    pub stratum_d: usize,
    /// Dimension of the boundary stratum of `a`.
    pub boundary_stratum: usize,
    /// Ascending, `+∞` entries last.
    pub kappa: Vec<f64>,
    pub tau: Vec<Point<D>>,
    pub jacobian: f64,
    pub probe: f64,
    /// Relative deviation between the probes r and 2r.
    pub audit: f64,
    pub status: SampleStatus,
    pub component: usize,
}

impl<const D: usize> BundleSample<D> {
    pub fn accepted(&self) -> bool {
        self.status == SampleStatus::Ok
    }

    pub fn spectrum(&self) -> CurvatureSpectrum {
        mean_curvatures(&self.kappa)
    }
}

/// `E_0..E_n` and `H_0..H_n` for one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSpectrum {
    pub e: Vec<f64>,
    pub h: Vec<f64>,
}

/// Mean curvatures from an ascending curvature list with `+∞` entries.
pub fn mean_curvatures(kappa: &[f64]) -> CurvatureSpectrum {
    let n = kappa.len();
    let finite: Vec<f64> = kappa.iter().copied().filter(|k| k.is_finite()).collect();
    let d = finite.len();
    let mut e = elementary_symmetric(&finite);
    e.resize(n + 1, 0.0);
    // H_r = Σ_j E_j 1{d = j + n − r}
    let h = (0..=n)
        .map(|r| if d + r >= n && d + r - n <= r { e[d + r - n] } else { 0.0 })
        .collect();
    CurvatureSpectrum { e, h }
}

/// `|τ_1 ∧ … ∧ τ_n| / |ζ_1 ∧ … ∧ ζ_n|` with `ζ_i = (τ_i, κ_i τ_i)` or
/// `(0, τ_i)` for infinite curvature.
pub fn jacobian<const D: usize>(tau: &[Point<D>], kappa: &[f64]) -> f64 {
    let t: Vec<_> = tau.iter().map(to_dvec).collect();
    let z: Vec<_> = tau
        .iter()
        .zip(kappa)
        .map(|(ti, &k)| {
            if k.is_finite() {
                pair(ti, &(ti * k))
            } else {
                pair(&Point::<D>::zeros(), ti)
            }
        })
        .collect();
    wedge_norm(&t) / wedge_norm(&z)
}

/// Curvatures at one probe offset.
#[derive(Debug, Clone)]
pub struct Probe<const D: usize> {
    pub kappa: Vec<f64>,
    pub tau: Vec<Point<D>>,
    pub one_minus_rchi: Vec<f64>,
}

impl<'a, const D: usize> Scene<'a, D> {
    /// Eigenvalues of `Dν^φ_A(x)` on `Tan(S^φ(A, r), x)`.
    pub fn chi_eigen(&self, x: &Point<D>) -> Result<ChiEigen<D>> {
        let p = self.project(x)?;
        if !p.is_unique() || p.delta == 0.0 {
            return Err(Error::ProjectionNoise(x.iter().copied().collect()));
        }
        let r = p.delta;
        let eta = p.nu;
        let u = self.norm.gauss_map(&eta)?;
        let t = frame(&u);
        let h = self.settings.curvature.fd_step_frac * r;
        let n = D - 1;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let dnu = self.normal_derivative(x, &p.nu, &t[j], h, r)?;
            for i in 0..n {
                m[(i, j)] = t[i].dot(&dnu);
            }
        }
        let hm = tangential_hessian(self, &u, &t)?;
        let pairs = b_symmetric_eigen(&m, &hm)?;
        let mut chi = Vec::with_capacity(n);
        let mut tau = Vec::with_capacity(n);
        for (c, v) in pairs {
            chi.push(c);
            tau.push(t.iter().zip(&v).fold(Point::<D>::zeros(), |acc, (ti, vi)| acc + ti * *vi));
        }
        Ok(ChiEigen { chi, tau, r, eta, u })
    }

    /// Central difference of `ν` along `t`. The step is halved while the one-sided
    /// quotients disagree, so the stencil does not straddle a kink of `ν`.
    fn normal_derivative(&self, x: &Point<D>, nu: &Point<D>, t: &Point<D>, h0: f64, r: f64) -> Result<Point<D>> {
        let mut h = h0;
        let mut last = None;
        for _ in 0..24 {
            let plus = self.project(&(x + t * h))?;
            let minus = self.project(&(x - t * h))?;
            if !plus.is_unique() || !minus.is_unique() {
                return Err(Error::ProjectionNoise(x.iter().copied().collect()));
            }
            let fwd = (plus.nu - nu) / h;
            let bwd = (nu - minus.nu) / h;
            let central = (fwd + bwd) * 0.5;
            if (fwd - bwd).norm() <= 1e-3 * (1.0 / r + fwd.norm() + bwd.norm()) {
                return Ok(central);
            }
            last = Some(central);
            h *= 0.5;
        }
        Ok(last.unwrap())
    }

    /// Curvatures of `(a, η)` from the level set at offset `r`.
    pub fn probe(&self, a: &Point<D>, eta: &Point<D>, r: f64) -> Result<Probe<D>> {
        let ce = self.chi_eigen(&(a + eta * r))?;
        let tol_inf = self.settings.curvature.tol_inf;
        let mut items: Vec<(f64, Point<D>, f64)> = ce
            .chi
            .iter()
            .zip(&ce.tau)
            .map(|(&c, t)| (kappa_from_chi(c, ce.r, tol_inf), *t, 1.0 - ce.r * c))
            .collect();
        items.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Probe {
            kappa: items.iter().map(|i| i.0).collect(),
            tau: items.iter().map(|i| i.1).collect(),
            one_minus_rchi: items.iter().map(|i| i.2).collect(),
        })
    }

    /// Probe offset `min(r_frac · reach, r_cap · diameter)`.
    pub fn probe_offset(&self, reach: f64) -> f64 {
        let c = &self.settings.curvature;
        (c.r_frac * reach).min(c.r_cap * self.shape.diameter())
    }

    /// Curvatures of `(a, η)` with the reach-based probe.
    pub fn curvature_at(&self, a: &Point<D>, eta: &Point<D>) -> Result<Probe<D>> {
        let reach = self.reach_along(a, eta)?;
        self.probe(a, eta, self.probe_offset(reach))
    }

    fn bundle_node(&self, a: &Point<D>, eta: &Point<D>, u: &Point<D>, jw: f64, m: usize, component: usize) -> Result<BundleSample<D>> {
        let c = &self.settings.curvature;
        let reach = self.reach_along(a, eta)?;
        let r = self.probe_offset(reach);
        let mut out = BundleSample {
            a: *a,
            eta: *eta,
            u: *u,
            weight: jw,
            jw,
            reach,
            stratum_d: 0,
            boundary_stratum: m,
            kappa: Vec::new(),
            tau: Vec::new(),
            jacobian: 1.0,
            probe: r,
            audit: 0.0,
            status: SampleStatus::Ok,
            component,
        };
        let (p1, p2) = match (self.probe(a, eta, r), self.probe(a, eta, 2.0 * r)) {
            (Ok(p1), Ok(p2)) => (p1, p2),
            (Err(Error::ProjectionNoise(_)), _) | (_, Err(Error::ProjectionNoise(_))) => {
                out.status = SampleStatus::ProjectionNoise;
                return Ok(out);
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let mut dev = 0.0f64;
        for (k1, k2) in p1.kappa.iter().zip(&p2.kappa) {
            let d = match (k1.is_finite(), k2.is_finite()) {
                (true, true) => (k1 - k2).abs() / (1.0 + k1.abs()),
                (false, false) => 0.0,
                _ => f64::INFINITY,
            };
            dev = dev.max(d);
        }
        let borderline = |v: &f64| *v > 0.1 * c.tol_inf && *v < 10.0 * c.tol_inf;
        let ambiguous = p1.one_minus_rchi.iter().any(borderline) && p2.one_minus_rchi.iter().any(borderline);
        out.audit = dev;
        out.stratum_d = p1.kappa.iter().filter(|k| k.is_finite()).count();
        out.jacobian = jacobian(&p1.tau, &p1.kappa);
        out.weight = jw / out.jacobian;
        out.kappa = p1.kappa;
        out.tau = p1.tau;
        out.status = if ambiguous {
            SampleStatus::Ambiguous
        } else if dev > c.tol_kinv {
            SampleStatus::InvarianceViolation(dev)
        } else {
            SampleStatus::Ok
        };
        Ok(out)
    }

    /// Weighted samples of the unit normal bundle with curvatures, reach
    /// and Jacobian. Samples failing the probe audit are kept and flagged.
    pub fn bundle_sample(&self, n_samples: usize, seed: u64) -> Result<Vec<BundleSample<D>>> {
        let nodes = self.shape.settings().fiber_nodes;
        let mut jobs = Vec::new();
        for s in self.shape.sample_boundary(n_samples, seed) {
            for node in s.fiber.nodes(self.norm, &s.tangents, nodes)? {
                jobs.push((s.point, node.eta, node.u, s.weight * node.jw, s.stratum, s.component));
            }
        }
        map_slice(self.settings.execution, &jobs, |(a, eta, u, jw, m, c)| self.bundle_node(a, eta, u, *jw, *m, *c))
            .into_iter()
            .collect()
    }

    /// Pointwise `h^φ_{C,k}(a) = S_k(D(∇φ∘n)(a))`, `k = 1..n`, from
    /// finite differences of the boundary normal field.
    pub fn pointwise_h(&self, a: &Point<D>) -> Result<Vec<f64>> {
        let u = match self.shape.fiber_at(a) {
            Some(Fiber::Single(u)) if self.shape.membership(a) == Membership::Boundary => u,
            _ => return Err(Error::NotAlexandrov("boundary normal is not unique".into())),
        };
        let t = frame(&u);
        let n = D - 1;
        let step = self.settings.curvature.pointwise_step * self.shape.diameter();
        let euclid = crate::norm::Norm::<D>::euclidean();
        let nearest = |y: &Point<D>| -> Result<Point<D>> {
            let c: Vec<Candidate<D>> = crate::projection::cell_candidates(self.shape, &euclid, y, &self.settings.projection)?;
            c.iter()
                .min_by(|p, q| p.delta.total_cmp(&q.delta))
                .map(|c| c.foot)
                .ok_or(Error::NotAlexandrov("no boundary nearby".into()))
        };
        let field = |p: &Point<D>| -> Result<Point<D>> {
            match self.shape.fiber_at(p) {
                Some(Fiber::Single(v)) => self.norm.grad(&v),
                _ => Err(Error::NotAlexandrov("neighbouring boundary point is singular".into())),
            }
        };
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let pp = nearest(&(a + t[j] * step))?;
            let pm = nearest(&(a - t[j] * step))?;
            let ds = (pp - pm).dot(&t[j]);
            let dv = (field(&pp)? - field(&pm)?) / ds;
            for i in 0..n {
                m[(i, j)] = t[i].dot(&dv);
            }
        }
        let hm = tangential_hessian(self, &u, &t)?;
        let ev: Vec<f64> = b_symmetric_eigen(&m, &hm)?.into_iter().map(|p| p.0).collect();
        Ok(elementary_symmetric(&ev)[1..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::norm::Norm;
    use crate::settings::Settings;
    use crate::shapes::catalog::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_from_chi(0.0, 0.3, 1e-6), 0.0);
        assert_eq!(kappa_from_chi(0.5, 1.0, 1e-6), 1.0);
        assert!(kappa_from_chi(1.0 / 0.2, 0.2, 1e-6).is_infinite());
        assert!(kappa_from_chi(-1e9, 0.5, 1e-6) >= -2.0);
    }

    #[test]
    fn mean_curvature_examples() {
        let s = mean_curvatures(&[1.0, 1.0]);
        assert_eq!(s.e, vec![1.0, 2.0, 1.0]);
        assert_eq!(s.h, s.e);
        let s = mean_curvatures(&[f64::INFINITY]);
        assert_eq!(s.h, vec![0.0, 1.0]);
        let s = mean_curvatures(&[1.0, 3.0]);
        assert_eq!(s.e[1..], [4.0, 3.0]);
        // cube edge: one flat direction, one infinite
        let s = mean_curvatures(&[0.0, f64::INFINITY]);
        assert_eq!(s.h, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn euclidean_jacobian_formula() {
        let tau = [point::<3>(&[1.0, 0.0, 0.0]), point::<3>(&[0.0, 1.0, 0.0])];
        let j = jacobian(&tau, &[0.5, 2.0]);
        assert!((j - 1.0 / ((1.25f64) * 5.0).sqrt()).abs() < 1e-14);
        let j = jacobian(&tau[..1], &[1.0]);
        assert!((j - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn jacobian_ignores_frame_normalization() {
        // rescaled, sign-flipped and eigenspace-rotated frames give the same J
        let st = Settings::default();
        let n = Norm::<3>::ellipsoidal_diag(&[4.0, 1.0, 1.0]).unwrap();
        let body = wulff::<3>(n.kind(), &[0.0, 0.0, 0.0], 1.5);
        let cube = unit_cube();
        let e3 = Norm::<3>::euclidean();
        let edge = (Scene::new(&cube, &e3, &st), point::<3>(&[0.5, 0.5, 0.0]), point::<3>(&[1.0, 1.0, 0.0]).normalize());
        let top = n.gauss_inverse(&point::<3>(&[0.3, 0.5, 1.0]).normalize()).unwrap();
        let foot = top * 1.5;
        for (scene, a, eta) in [(Scene::new(&body, &n, &st), foot, top), edge] {
            let p = scene.curvature_at(&a, &eta).unwrap();
            let j0 = jacobian(&p.tau, &p.kappa);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..8 {
                let c: f64 = rng.random_range(0.0..TAU);
                let mut tau = p.tau.clone();
                if p.kappa[0] == p.kappa[1] {
                    let (t0, t1) = (tau[0], tau[1]);
                    tau[0] = t0 * c.cos() + t1 * c.sin();
                    tau[1] = t1 * c.cos() - t0 * c.sin();
                }
                for t in tau.iter_mut() {
                    *t *= rng.random_range(0.2..5.0) * if rng.random::<bool>() { -1.0 } else { 1.0 };
                }
                let j = jacobian(&tau, &p.kappa);
                assert!((j - j0).abs() <= 1e-9 * j0, "{j} vs {j0}");
            }
        }
    }

    #[test]
    fn disk_offset_chi() {
        let s = ball::<2>(&[0.0, 0.0], 2.0);
        let n = Norm::<2>::euclidean();
        let st = Settings::default();
        let ce = Scene::new(&s, &n, &st).chi_eigen(&point::<2>(&[2.5, 0.0])).unwrap();
        assert!((ce.chi[0] - 1.0 / 2.5).abs() < 1e-8);
    }

    #[test]
    fn square_corner_chi_is_one_over_r() {
        let s = unit_square();
        let n = Norm::<2>::euclidean();
        let st = Settings::default();
        let x = point::<2>(&[0.5, 0.5]) + point::<2>(&[1.0, 1.0]).normalize() * 0.3;
        let ce = Scene::new(&s, &n, &st).chi_eigen(&x).unwrap();
        assert!((ce.chi[0] - 1.0 / 0.3).abs() < 1e-6);
    }

    #[test]
    fn ellipse_vertex_curvatures() {
        let s = ellipse(2.0, 1.0);
        let n = Norm::<2>::euclidean();
        let st = Settings::default();
        let sc = Scene::new(&s, &n, &st);
        let k = sc.curvature_at(&point::<2>(&[2.0, 0.0]), &point::<2>(&[1.0, 0.0])).unwrap();
        assert!((k.kappa[0] - 2.0).abs() < 2e-3, "{:?}", k.kappa);
        let k = sc.curvature_at(&point::<2>(&[0.0, 1.0]), &point::<2>(&[0.0, 1.0])).unwrap();
        assert!((k.kappa[0] - 0.25).abs() < 2.5e-4, "{:?}", k.kappa);
    }

    #[test]
    fn circle_bundle() {
        let s = ball::<2>(&[0.0, 0.0], 1.0);
        let n = Norm::<2>::euclidean();
        let st = Settings::default();
        let b = Scene::new(&s, &n, &st).bundle_sample(64, 0).unwrap();
        let mut total = 0.0;
        for x in &b {
            assert!(x.accepted());
            assert!((x.kappa[0] - 1.0).abs() < 1e-6);
            assert!((x.jacobian - 0.5f64.sqrt()).abs() < 1e-6);
            total += x.weight * x.jacobian * x.spectrum().h[0];
        }
        assert!((total - std::f64::consts::TAU).abs() < 1e-9);
    }

    #[test]
    fn pointwise_h_sphere_and_circle() {
        let st = Settings::default();
        let e3 = Norm::<3>::euclidean();
        let s = ball::<3>(&[0.0, 0.0, 0.0], 1.0);
        let h = Scene::new(&s, &e3, &st).pointwise_h(&point::<3>(&[0.0, 0.6, 0.8])).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-5 && (h[1] - 1.0).abs() < 1e-5, "{h:?}");
        let lens = cap_lens(0.5);
        let e2 = Norm::<2>::euclidean();
        let a = point::<2>(&[0.3, -0.5 + (1.0f64 - 0.09).sqrt()]);
        let h = Scene::new(&lens, &e2, &st).pointwise_h(&a).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-5);
    }
}
