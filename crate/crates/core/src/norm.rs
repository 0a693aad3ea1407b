//! Uniformly convex C² norms, their conjugates, and the Gauss map between
//! the Wulff shape boundary and the unit sphere.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{direction_grid, point, sym_eigenvalues, tangent_frame, Mat, Point};
use crate::optimize::sphere_minimize;
use crate::settings::NormSettings;

fn default_eps() -> f64 {
    0.05
}

/// Declarative description of a norm, as found in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormKind {
    Euclidean,
    /// `φ(x) = sqrt(xᵀQx)`; rows of `Q`.
    Ellipsoidal { q: Vec<Vec<f64>> },
    /// `φ(x) = (Σ (x_i² + ε²|x|²)^{p/2})^{1/p}`.
    SmoothedLp {
        p: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

#[derive(Debug, Clone)]
enum Repr<const D: usize> {
    Euclidean,
    Ellipsoidal { q: Mat<D>, q_inv: Mat<D> },
    SmoothedLp { p: f64, eps: f64 },
}

#[derive(Debug, Clone)]
pub struct Norm<const D: usize> {
    kind: NormKind,
    repr: Repr<D>,
    gamma: f64,
    wulff_min: f64,
    wulff_max: f64,
    settings: NormSettings,
}

fn nonzero<const D: usize>(x: &Point<D>) -> Result<()> {
    if x.norm() == 0.0 || !x.iter().all(|v| v.is_finite()) {
        Err(Error::ZeroVector)
    } else {
        Ok(())
    }
}

impl<const D: usize> Norm<D> {
    pub fn euclidean() -> Self {
        Self::new(NormKind::Euclidean, NormSettings::default()).expect("euclidean norm is valid")
    }

    /// Diagonal ellipsoidal norm, `Q = diag(q)`.
    pub fn ellipsoidal_diag(q: &[f64]) -> Result<Self> {
        let rows = (0..D)
            .map(|i| (0..D).map(|j| if i == j { q[i] } else { 0.0 }).collect())
            .collect();
        Self::new(NormKind::Ellipsoidal { q: rows }, NormSettings::default())
    }

    pub fn new(kind: NormKind, settings: NormSettings) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: D });
        }
        let repr = match &kind {
            NormKind::Euclidean => Repr::Euclidean,
            NormKind::Ellipsoidal { q } => {
                if q.len() != D || q.iter().any(|r| r.len() != D) {
                    return Err(Error::InvalidNorm(format!("Q must be {D}x{D}")));
                }
                let m = Mat::<D>::from_fn(|i, j| q[i][j]);
                if (m - m.transpose()).abs().max() > 1e-12 * (1.0 + m.abs().max()) {
                    return Err(Error::InvalidNorm("Q is not symmetric".into()));
                }
                if sym_eigenvalues(&m).iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::InvalidNorm("Q is not positive definite".into()));
                }
                let q_inv = m.try_inverse().ok_or_else(|| Error::InvalidNorm("Q is singular".into()))?;
                Repr::Ellipsoidal { q: m, q_inv }
            }
            NormKind::SmoothedLp { p, eps } => {
                if !(*p > 1.0) || !p.is_finite() {
                    return Err(Error::InvalidNorm(format!("p must lie in (1, inf), got {p}")));
                }
                if !(*eps >= 0.0) {
                    return Err(Error::InvalidNorm(format!("eps must be >= 0, got {eps}")));
                }
                Repr::SmoothedLp { p: *p, eps: *eps }
            }
        };
        let mut norm = Self {
            kind,
            repr,
            gamma: 0.0,
            wulff_min: 1.0,
            wulff_max: 1.0,
            settings,
        };
        norm.calibrate()?;
        Ok(norm)
    }

    /// Samples the sphere to estimate γ and the extent of `∂W^φ`.
    fn calibrate(&mut self) -> Result<()> {
        let dirs = direction_grid::<D>(self.settings.gamma_samples.max(16));
        let mut gamma = f64::INFINITY;
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        for u in &dirs {
            let h = self.hessian(u)?;
            let frame = tangent_frame(u);
            let g = if D == 2 {
                frame[0].dot(&(h * frame[0]))
            } else {
                let a = frame[0].dot(&(h * frame[0]));
                let b = frame[0].dot(&(h * frame[1]));
                let c = frame[1].dot(&(h * frame[1]));
                0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
            };
            gamma = gamma.min(g);
            let r = self.grad(u)?.norm();
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        self.gamma = gamma;
        self.wulff_min = rmin;
        self.wulff_max = rmax;
        Ok(())
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn settings(&self) -> &NormSettings {
        &self.settings
    }

    /// Ellipticity constant: sampled minimum of `D²φ(u)(v,v)` over unit `u`
    /// and unit `v ⟂ u`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Sampled bounds on `|η|` over `∂W^φ`.
    pub fn wulff_extent(&self) -> (f64, f64) {
        (self.wulff_min, self.wulff_max)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.repr, Repr::Euclidean)
    }

    /// `Q` with `φ(x)² = xᵀQx`, for quadratic norms.
    pub fn metric(&self) -> Option<Mat<D>> {
        match &self.repr {
            Repr::Euclidean => Some(Mat::<D>::identity()),
            Repr::Ellipsoidal { q, .. } => Some(*q),
            Repr::SmoothedLp { .. } => None,
        }
    }

    /// `M` with `φ*(y)² = yᵀMy`, for quadratic norms.
    pub fn conjugate_metric(&self) -> Option<Mat<D>> {
        match &self.repr {
            Repr::Euclidean => Some(Mat::<D>::identity()),
            Repr::Ellipsoidal { q_inv, .. } => Some(*q_inv),
            Repr::SmoothedLp { .. } => None,
        }
    }

    pub fn eval(&self, x: &Point<D>) -> f64 {
        match &self.repr {
            Repr::Euclidean => x.norm(),
            Repr::Ellipsoidal { q, .. } => x.dot(&(q * x)).max(0.0).sqrt(),
            Repr::SmoothedLp { p, eps } => {
                let s2 = x.norm_squared();
                if s2 == 0.0 {
                    return 0.0;
                }
                // scale out |x| to keep the powers in range
                let scale = s2.sqrt();
                let e2 = eps * eps;
                let mut s = 0.0;
                for i in 0..D {
                    let xi = x[i] / scale;
                    s += (xi * xi + e2).powf(p / 2.0);
                }
                scale * s.powf(1.0 / p)
            }
        }
    }

    pub fn grad(&self, x: &Point<D>) -> Result<Point<D>> {
        nonzero(x)?;
        Ok(match &self.repr {
            Repr::Euclidean => x / x.norm(),
            Repr::Ellipsoidal { q, .. } => q * x / self.eval(x),
            Repr::SmoothedLp { p, eps } => {
                let scale = x.norm();
                let y = x / scale;
                let e2 = eps * eps;
                let w: Vec<f64> = (0..D).map(|i| y[i] * y[i] + e2).collect();
                let s: f64 = w.iter().map(|wi| wi.powf(p / 2.0)).sum();
                let cross: f64 = w.iter().map(|wi| wi.powf(p / 2.0 - 1.0)).sum();
                let lead = s.powf(1.0 / p - 1.0);
                let mut g = Point::<D>::zeros();
                for k in 0..D {
                    g[k] = lead * (w[k].powf(p / 2.0 - 1.0) * y[k] + e2 * y[k] * cross);
                }
                g
            }
        })
    }

    pub fn hessian(&self, x: &Point<D>) -> Result<Mat<D>> {
        nonzero(x)?;
        Ok(match &self.repr {
            Repr::Euclidean => {
                let r = x.norm();
                let xh = x / r;
                (Mat::<D>::identity() - xh * xh.transpose()) / r
            }
            Repr::Ellipsoidal { q, .. } => {
                let f = self.eval(x);
                let qx = q * x;
                (q - qx * qx.transpose() / (f * f)) / f
            }
            Repr::SmoothedLp { .. } => {
                let h = self.settings.fd_hess_step * x.norm().max(1.0);
                let mut m = Mat::<D>::zeros();
                for j in 0..D {
                    let mut e = Point::<D>::zeros();
                    e[j] = h;
                    let col = (self.grad(&(x + e))? - self.grad(&(x - e))?) / (2.0 * h);
                    m.set_column(j, &col);
                }
                (m + m.transpose()) * 0.5
            }
        })
    }

    /// Direction `u` maximising `y·u/φ(u)` over the unit sphere.
    fn conjugate_argmax(&self, y: &Point<D>) -> Result<Point<D>> {
        let seeds = direction_grid::<D>(self.settings.ascent_seeds.max(8));
        let score = |u: &Point<D>| y.dot(u) / self.eval(u);
        let mut best = seeds[0];
        for s in &seeds {
            if score(s) > score(&best) {
                best = *s;
            }
        }
        let yn = y.norm();
        let obj = |u: &Point<D>| -> (f64, Point<D>) {
            let f = self.eval(u);
            let g = self.grad(u).unwrap_or_else(|_| Point::<D>::zeros());
            let yu = y.dot(u);
            (-(yu / f) / yn, (-(y / f) + g * (yu / (f * f))) / yn)
        };
        let m = sphere_minimize(&best, obj, 1e-14, self.settings.newton_budget);
        if !(m.grad_norm <= self.settings.newton_tol) {
            return Err(Error::NonConvergence {
                what: "conjugate ascent",
                residual: m.grad_norm,
            });
        }
        Ok(m.arg)
    }

    pub fn conjugate_eval(&self, y: &Point<D>) -> Result<f64> {
        Ok(match &self.repr {
            Repr::Euclidean => y.norm(),
            Repr::Ellipsoidal { q_inv, .. } => y.dot(&(q_inv * y)).max(0.0).sqrt(),
            Repr::SmoothedLp { .. } => {
                if y.norm() == 0.0 {
                    return Ok(0.0);
                }
                let u = self.conjugate_argmax(y)?;
                y.dot(&u) / self.eval(&u)
            }
        })
    }

    pub fn grad_conjugate(&self, y: &Point<D>) -> Result<Point<D>> {
        nonzero(y)?;
        Ok(match &self.repr {
            Repr::Euclidean => y / y.norm(),
            Repr::Ellipsoidal { q_inv, .. } => q_inv * y / self.conjugate_eval(y)?,
            Repr::SmoothedLp { .. } => {
                let u = self.conjugate_argmax(y)?;
                u / self.eval(&u)
            }
        })
    }

    pub fn conjugate_hessian(&self, y: &Point<D>) -> Result<Mat<D>> {
        nonzero(y)?;
        Ok(match &self.repr {
            Repr::Euclidean => {
                let r = y.norm();
                let yh = y / r;
                (Mat::<D>::identity() - yh * yh.transpose()) / r
            }
            Repr::Ellipsoidal { q_inv, .. } => {
                let f = self.conjugate_eval(y)?;
                let my = q_inv * y;
                (q_inv - my * my.transpose() / (f * f)) / f
            }
            Repr::SmoothedLp { .. } => {
                let h = self.settings.fd_hess_step * y.norm().max(1.0);
                let mut m = Mat::<D>::zeros();
                for j in 0..D {
                    let mut e = Point::<D>::zeros();
                    e[j] = h;
                    let col = (self.grad_conjugate(&(y + e))? - self.grad_conjugate(&(y - e))?) / (2.0 * h);
                    m.set_column(j, &col);
                }
                (m + m.transpose()) * 0.5
            }
        })
    }

    /// `η = ∇φ(u)` on `∂W^φ` for a unit vector `u`.
    pub fn gauss_inverse(&self, u: &Point<D>) -> Result<Point<D>> {
        self.grad(u)
    }

    /// The Euclidean unit normal `n^φ(η)` of `∂W^φ` at `η`.
    pub fn gauss_map(&self, eta: &Point<D>) -> Result<Point<D>> {
        nonzero(eta)?;
        Ok(match &self.repr {
            Repr::Euclidean => eta.normalize(),
            Repr::Ellipsoidal { q_inv, .. } => (q_inv * eta).normalize(),
            Repr::SmoothedLp { .. } => self.conjugate_argmax(eta)?,
        })
    }

    /// Maps a point of `∂W^φ` to its parameter `u` and back; residual of
    /// `gauss_map ∘ gauss_inverse` at `u`.
    pub fn round_trip_error(&self, u: &Point<D>) -> Result<f64> {
        let eta = self.gauss_inverse(u)?;
        Ok((self.gauss_map(&eta)? - u).norm())
    }
}

/// Unit vector at angle `t` in the plane; convenience for tests and drivers.
pub fn unit2(t: f64) -> Point<2> {
    point::<2>(&[t.cos(), t.sin()])
}

/// Component of `v` along the tangent frame at `u`, used by curvature code.
pub fn frame_coords<const D: usize>(u: &Point<D>, v: &Point<D>) -> Vector2<f64> {
    let f = tangent_frame(u);
    Vector2::new(f[0].dot(v), if D == 3 { f[1].dot(v) } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell() -> Norm<2> {
        Norm::<2>::ellipsoidal_diag(&[4.0, 1.0]).unwrap()
    }

    fn lp4(eps: f64) -> Norm<2> {
        Norm::<2>::new(NormKind::SmoothedLp { p: 4.0, eps }, NormSettings::default()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let e = Norm::<2>::euclidean();
        assert_eq!(e.eval(&point::<2>(&[3.0, 4.0])), 5.0);
        assert!((ell().eval(&point::<2>(&[1.0, 0.0])) - 2.0).abs() < 1e-15);
        let v = lp4(0.0).eval(&point::<2>(&[1.0, 1.0]));
        assert!((v - 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn conjugate_examples() {
        let e = Norm::<2>::euclidean();
        assert_eq!(e.conjugate_eval(&point::<2>(&[0.0, 2.0])).unwrap(), 2.0);
        assert!((ell().conjugate_eval(&point::<2>(&[1.0, 0.0])).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(lp4(0.05).conjugate_eval(&Point::<2>::zeros()).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_matches_brute_force_sup() {
        // brute-force sup of v·y over a dense sample of the unit sphere of φ
        let n = ell();
        let y = point::<2>(&[1.0, 0.0]);
        let mut best = 0.0f64;
        for k in 0..1_000_000 {
            let t = std::f64::consts::TAU * k as f64 / 1e6;
            let u = unit2(t);
            best = best.max(y.dot(&(u / n.eval(&u))));
        }
        assert!((best - 0.5).abs() < 1e-9);
    }

    #[test]
    fn grad_examples() {
        let e = Norm::<2>::euclidean();
        assert_eq!(e.grad(&point::<2>(&[0.0, 3.0])).unwrap(), point::<2>(&[0.0, 1.0]));
        let g = ell().grad(&point::<2>(&[1.0, 0.0])).unwrap();
        assert!((g - point::<2>(&[2.0, 0.0])).norm() < 1e-15);
        assert_eq!(e.grad(&Point::<2>::zeros()), Err(Error::ZeroVector));
    }

    #[test]
    fn grad_matches_finite_differences() {
        for n in [ell(), lp4(0.05)] {
            let x = point::<2>(&[0.7, -0.4]);
            let g = n.grad(&x).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                let mut e = Point::<2>::zeros();
                e[k] = h;
                let fd = (n.eval(&(x + e)) - n.eval(&(x - e))) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn hessian_annihilates_x_and_matches_euclidean_example() {
        let e = Norm::<2>::euclidean();
        let h = e.hessian(&point::<2>(&[1.0, 0.0])).unwrap();
        assert_eq!(h, Mat::<2>::new(0.0, 0.0, 0.0, 1.0));
        for n in [ell(), lp4(0.05)] {
            let x = point::<2>(&[0.3, 1.1]);
            let h = n.hessian(&x).unwrap();
            assert!((h * x).norm() < 1e-6);
        }
    }

    #[test]
    fn round_trips() {
        for n in [Norm::<2>::euclidean(), ell()] {
            for k in 0..100 {
                let u = unit2(0.0628 * k as f64 + 0.01);
                let back = n.grad_conjugate(&n.grad(&u).unwrap()).unwrap();
                assert!((back - u / n.eval(&u)).norm() < 1e-12);
                assert!(n.round_trip_error(&u).unwrap() < 1e-12);
            }
        }
        let n = lp4(0.05);
        for k in 0..20 {
            let u = unit2(0.31 * k as f64 + 0.01);
            assert!(n.round_trip_error(&u).unwrap() < 1e-6);
        }
    }

    #[test]
    fn gamma_is_positive_and_exact_for_euclidean() {
        assert!((Norm::<2>::euclidean().gamma() - 1.0).abs() < 1e-12);
        assert!(ell().gamma() > 0.0);
        assert!(lp4(0.05).gamma() > 0.0);
    }

    #[test]
    fn wulff_extent_for_diag_4_1() {
        let (lo, hi) = ell().wulff_extent();
        assert!((lo - 1.0).abs() < 1e-6 && (hi - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Norm::<2>::ellipsoidal_diag(&[1.0, -1.0]).is_err());
        assert!(Norm::<2>::new(NormKind::SmoothedLp { p: 1.0, eps: 0.1 }, NormSettings::default()).is_err());
        let bad = NormKind::Ellipsoidal {
            q: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
        };
        assert!(Norm::<2>::new(bad, NormSettings::default()).is_err());
    }
}
