//! φ-distance, nearest-point projection, Cahn–Hoffman map, reach along
//! normals and global reach estimation.

use nalgebra::{DMatrix, DVector, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::map_slice;
use crate::linalg::{direction_grid, point, tangent_frame, Point};
use crate::norm::Norm;
use crate::optimize::{affine_minimize, sphere_minimize};
use crate::settings::{ProjectionSettings, Settings};
use crate::shapes::{Cell, Fiber, FlatCell, Membership, Shape, SmoothCell};

/// A shape, a norm and the numerical settings used to query them.
#[derive(Clone, Copy)]
pub struct Scene<'a, const D: usize> {
    pub shape: &'a Shape<D>,
    pub norm: &'a Norm<D>,
    pub settings: &'a Settings,
}

impl<'a, const D: usize> Scene<'a, D> {
    pub fn new(shape: &'a Shape<D>, norm: &'a Norm<D>, settings: &'a Settings) -> Self {
        Self { shape, norm, settings }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity<const D: usize> {
    Unique,
    Multiple(Vec<Point<D>>),
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult<const D: usize> {
    pub delta: f64,
    pub foot: Point<D>,
    /// `(x − ξ)/δ ∈ ∂W^φ`; zero when `δ = 0`.
    pub nu: Point<D>,
    pub multiplicity: Multiplicity<D>,
    pub residual: f64,
}

impl<const D: usize> ProjectionResult<D> {
    pub fn is_unique(&self) -> bool {
        self.multiplicity == Multiplicity::Unique
    }
}

/// A local minimiser of `φ*(x − ·)` on one boundary cell.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<const D: usize> {
    pub foot: Point<D>,
    pub delta: f64,
    pub residual: f64,
    pub cell: usize,
}

fn smooth_candidates<const D: usize>(
    cell: &SmoothCell<D>,
    norm: &Norm<D>,
    x: &Point<D>,
    opts: &ProjectionSettings,
    idx: usize,
    out: &mut Vec<Candidate<D>>,
) -> Result<()> {
    let obj = |u: &Point<D>| -> (f64, Point<D>) {
        let b = match cell.point_at(u) {
            Ok(b) => b,
            Err(_) => return (f64::INFINITY, Point::<D>::zeros()),
        };
        let y = x - b;
        let v = norm.conjugate_eval(&y).unwrap_or(f64::INFINITY);
        let g = match (norm.grad_conjugate(&y), cell.support.hessian(u)) {
            (Ok(gy), Ok(h)) => -(h * gy) * cell.radius,
            _ => Point::<D>::zeros(),
        };
        (v, g)
    };
    let scale = 1.0 + cell.radius + (x - cell.center).norm();
    let tol = 1e-13 * scale;
    let tangential = |u: &Point<D>, g: &Point<D>| (g - u * u.dot(g)).norm();
    let push = |u: &Point<D>, out: &mut Vec<Candidate<D>>| -> Result<bool> {
        let m = sphere_minimize(u, obj, tol, opts.newton_budget);
        let (mut arg, mut value, mut residual) = (m.arg, m.value, m.grad_norm / scale);
        if residual > opts.max_residual {
            if let Some(p) = stationary_polish(cell, norm, x, &arg, scale) {
                let (v, g) = obj(&p);
                let r = tangential(&p, &g) / scale;
                if r < residual && v <= value * (1.0 + 1e-9) + 1e-15 * scale {
                    (arg, value, residual) = (p, v, r);
                }
            }
        }
        if !cell.in_range(&arg) || !value.is_finite() {
            return Ok(false);
        }
        out.push(Candidate {
            foot: cell.point_at(&arg)?,
            delta: value,
            residual,
            cell: idx,
        });
        Ok(true)
    };
    // exterior of a full convex body: the radial seed lies on the visible
    // side, and a stationary point there satisfying the outward KKT sign is
    // the global minimiser
    let y = x - cell.center;
    let hv = cell.support.conjugate_eval(&y)?;
    if cell.range.is_none() && hv > cell.radius {
        let u0 = cell.support.grad_conjugate(&y)?.normalize();
        let before = out.len();
        if push(&u0, out)? {
            let c = out[before];
            let g = norm.grad_conjugate(&(x - c.foot));
            let u = cell.support.grad_conjugate(&(c.foot - cell.center))?.normalize();
            if let Ok(g) = g {
                if g.dot(&u) > 0.0 && c.residual <= opts.max_residual {
                    return Ok(());
                }
            }
            out.truncate(before);
        }
    }
    // multi-start from the best coarse seeds
    let seeds: Vec<Point<D>> = if D == 2 {
        let (t0, t1, cyclic) = match cell.range {
            Some((a, b)) => (a, b, false),
            None => (0.0, std::f64::consts::TAU, true),
        };
        let n = opts.seed_grid.max(8);
        let grid: Vec<(f64, Point<D>)> = (0..n)
            .map(|k| {
                let t = if cyclic {
                    t0 + (t1 - t0) * k as f64 / n as f64
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                };
                let u = point::<D>(&[t.cos(), t.sin()]);
                (obj(&u).0, u)
            })
            .collect();
        let mut minima: Vec<(f64, Point<D>)> = (0..n)
            .filter(|&k| {
                let prev = if k == 0 { if cyclic { n - 1 } else { usize::MAX } } else { k - 1 };
                let next = if k + 1 == n { if cyclic { 0 } else { usize::MAX } } else { k + 1 };
                let v = grid[k].0;
                (prev == usize::MAX || v <= grid[prev].0) && (next == usize::MAX || v <= grid[next].0)
            })
            .map(|k| grid[k])
            .collect();
        minima.sort_by(|a, b| a.0.total_cmp(&b.0));
        minima.into_iter().take(opts.k_seed).map(|(_, u)| u).collect()
    } else {
        let mut grid: Vec<(f64, Point<D>)> = direction_grid::<D>(opts.seed_grid * 8)
            .into_iter()
            .map(|u| (obj(&u).0, u))
            .collect();
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sep = (8.0 / grid.len() as f64).sqrt() * 2.0;
        let mut picked: Vec<Point<D>> = Vec::new();
        for (_, u) in grid {
            if picked.len() >= opts.k_seed {
                break;
            }
            if picked.iter().all(|p| (p - u).norm() > sep) {
                picked.push(u);
            }
        }
        picked
    };
    for u in seeds {
        push(&u, out)?;
    }
    Ok(())
}

/// Newton on `b(u) + s∇φ(u) = x` in a tangent chart at `u0` and the signed
/// offset `s`. Unlike the distance objective this system stays smooth when
/// `x` approaches the cell.
fn stationary_polish<const D: usize>(cell: &SmoothCell<D>, norm: &Norm<D>, x: &Point<D>, u0: &Point<D>, scale: f64) -> Option<Point<D>> {
    let frame = tangent_frame(u0);
    let chart = |p: &DVector<f64>| -> Point<D> {
        let mut w = *u0;
        for i in 0..D - 1 {
            w += frame[i] * p[i];
        }
        w.normalize()
    };
    let residual = |p: &DVector<f64>| -> Option<DVector<f64>> {
        let u = chart(p);
        let f = cell.point_at(&u).ok()? + norm.grad(&u).ok()? * p[D - 1] - x;
        Some(DVector::from_iterator(D, f.iter().copied()))
    };
    let mut p = DVector::<f64>::zeros(D);
    let foot = cell.point_at(u0).ok()?;
    p[D - 1] = norm.conjugate_eval(&(x - foot)).ok()? * (x - foot).dot(u0).signum();
    let mut f = residual(&p)?;
    for _ in 0..30 {
        if f.norm() <= 1e-15 * scale {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::<f64>::zeros(D, D);
        for j in 0..D {
            let mut q = p.clone();
            q[j] += h;
            let mut r = p.clone();
            r[j] -= h;
            jac.set_column(j, &((residual(&q)? - residual(&r)?) / (2.0 * h)));
        }
        let step = jac.lu().solve(&(-&f))?;
        let mut t = 1.0;
        loop {
            let q = &p + &step * t;
            if let Some(fq) = residual(&q) {
                if fq.norm() < f.norm() {
                    p = q;
                    f = fq;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return Some(chart(&p));
            }
        }
    }
    Some(chart(&p))
}

fn flat_candidate<const D: usize>(
    cell: &FlatCell<D>,
    norm: &Norm<D>,
    x: &Point<D>,
    opts: &ProjectionSettings,
    idx: usize,
) -> Result<Option<Candidate<D>>> {
    let k = cell.basis.len();
    let d = x - cell.origin;
    let (s, residual) = if let Some(m) = norm.conjugate_metric() {
        // normal equations (EᵀME) s = EᵀM d
        let mut a = nalgebra::Matrix2::<f64>::identity();
        let mut rhs = Vector2::zeros();
        for i in 0..k {
            rhs[i] = cell.basis[i].dot(&(m * d));
            for j in 0..k {
                a[(i, j)] = cell.basis[i].dot(&(m * cell.basis[j]));
            }
        }
        (a.lu().solve(&rhs).ok_or(Error::NonConvergence {
            what: "face projection",
            residual: f64::INFINITY,
        })?, 0.0)
    } else {
        let mut s0 = Vector2::zeros();
        for i in 0..k {
            s0[i] = cell.basis[i].dot(&d);
        }
        let obj = |p: &Point<D>| {
            let y = x - p;
            let v = norm.conjugate_eval(&y).unwrap_or(f64::INFINITY);
            let g = norm.grad_conjugate(&y).map(|g| -g).unwrap_or_else(|_| Point::<D>::zeros());
            (v, g)
        };
        let m = affine_minimize(&cell.origin, &cell.basis, s0, obj, 1e-13, opts.newton_budget);
        (m.arg, m.grad_norm)
    };
    if !cell.contains(&s, 0.0) {
        return Ok(None);
    }
    let foot = cell.at(&s);
    Ok(Some(Candidate {
        foot,
        delta: norm.conjugate_eval(&(x - foot))?,
        residual,
        cell: idx,
    }))
}

/// Local minimisers of `φ*(x − ·)` over every boundary cell.
pub fn cell_candidates<const D: usize>(
    shape: &Shape<D>,
    norm: &Norm<D>,
    x: &Point<D>,
    opts: &ProjectionSettings,
) -> Result<Vec<Candidate<D>>> {
    let mut out = Vec::new();
    for (i, cell) in shape.cells().iter().enumerate() {
        match cell {
            Cell::Vertex(p) => out.push(Candidate {
                foot: *p,
                delta: norm.conjugate_eval(&(x - p))?,
                residual: 0.0,
                cell: i,
            }),
            Cell::Flat(f) => {
                if let Some(c) = flat_candidate(f, norm, x, opts, i)? {
                    out.push(c);
                }
            }
            Cell::Smooth(s) => smooth_candidates(s, norm, x, opts, i, &mut out)?,
        }
    }
    Ok(out)
}

impl<'a, const D: usize> Scene<'a, D> {
    /// φ-distance, a nearest point, the Cahn–Hoffman vector and the
    /// multiplicity of nearest points.
    pub fn project(&self, x: &Point<D>) -> Result<ProjectionResult<D>> {
        let opts = &self.settings.projection;
        if self.shape.membership(x) != Membership::Outside {
            return Ok(ProjectionResult {
                delta: 0.0,
                foot: *x,
                nu: Point::<D>::zeros(),
                multiplicity: Multiplicity::Unique,
                residual: 0.0,
            });
        }
        let cands: Vec<Candidate<D>> = match self.shape.exact_candidates(self.norm, x) {
            Some(c) => c
                .into_iter()
                .enumerate()
                .map(|(i, (foot, delta))| Candidate {
                    foot,
                    delta,
                    residual: 0.0,
                    cell: i,
                })
                .collect(),
            None => cell_candidates(self.shape, self.norm, x, opts)?,
        };
        let best = cands
            .iter()
            .min_by(|a, b| a.delta.total_cmp(&b.delta))
            .copied()
            .ok_or(Error::NonConvergence {
                what: "projection",
                residual: f64::INFINITY,
            })?;
        if best.residual > opts.max_residual {
            return Err(Error::NonConvergence {
                what: "projection",
                residual: best.residual,
            });
        }
        let tie = opts.tol_eq * (1.0 + best.delta);
        let sep = opts.tol_multi * self.shape.diameter();
        let mut feet: Vec<Point<D>> = vec![best.foot];
        for c in &cands {
            if c.delta <= best.delta + tie && feet.iter().all(|f| (f - c.foot).norm() > sep) {
                feet.push(c.foot);
            }
        }
        let multiplicity = if feet.len() > 1 {
            Multiplicity::Multiple(feet)
        } else {
            Multiplicity::Unique
        };
        Ok(ProjectionResult {
            delta: best.delta,
            foot: best.foot,
            nu: (x - best.foot) / best.delta,
            multiplicity,
            residual: best.residual,
        })
    }

    pub fn delta(&self, x: &Point<D>) -> Result<f64> {
        Ok(self.project(x)?.delta)
    }

    pub fn s_max(&self) -> f64 {
        self.settings.projection.s_max_factor * self.shape.diameter()
    }

    fn reach_predicate(&self, a: &Point<D>, eta: &Point<D>, s: f64) -> Result<bool> {
        let d = self.delta(&(a + eta * s))?;
        Ok(d >= s * (1.0 - self.settings.projection.tol_pred))
    }

    /// Bracket `[lo, hi]` for `r^φ_A(a, η) = sup{s : δ(a + sη) = s}`;
    /// `lo = hi = +∞` when the predicate still holds at `s_max`.
    pub fn reach_bracket(&self, a: &Point<D>, eta: &Point<D>) -> Result<(f64, f64)> {
        let opts = &self.settings.projection;
        let s_max = self.s_max();
        let s_min = opts.s_min_factor * s_max;
        if !self.reach_predicate(a, eta, s_min)? {
            return Err(Error::InvalidNormal {
                s: s_min,
                delta: self.delta(&(a + eta * s_min))?,
            });
        }
        if self.reach_predicate(a, eta, s_max)? {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        let (mut lo, mut hi) = (s_min, s_max);
        while hi - lo > opts.bracket_tol * s_max {
            let mid = 0.5 * (lo + hi);
            if self.reach_predicate(a, eta, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    }

    /// The reach function `r^φ_A(a, η)`, `+∞` if unbounded.
    pub fn reach_along(&self, a: &Point<D>, eta: &Point<D>) -> Result<f64> {
        let (lo, hi) = self.reach_bracket(a, eta)?;
        Ok(if lo.is_infinite() { lo } else { 0.5 * (lo + hi) })
    }

    /// Pairs `(a, η)` of the normal bundle at the boundary samples.
    pub fn normal_pairs(&self, n_samples: usize, seed: u64) -> Result<Vec<(Point<D>, Point<D>)>> {
        let nodes = self.shape.settings().fiber_nodes;
        let mut out = Vec::new();
        for s in self.shape.sample_boundary(n_samples, seed) {
            for node in s.fiber.nodes(self.norm, &s.tangents, nodes)? {
                out.push((s.point, node.eta));
            }
        }
        Ok(out)
    }

    pub fn global_reach(&self, n_samples: usize, seed: u64) -> Result<ReachEstimate<D>> {
        let opts = &self.settings.projection;
        let pairs = self.normal_pairs(n_samples, seed)?;
        let brackets = map_slice(self.settings.execution, &pairs, |(a, eta)| self.reach_bracket(a, eta));
        let mut per_sample = Vec::with_capacity(pairs.len());
        let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
        for ((a, eta), b) in pairs.iter().zip(brackets) {
            let (l, h) = b?;
            let r = if l.is_infinite() { l } else { 0.5 * (l + h) };
            per_sample.push(ReachSample { a: *a, eta: *eta, reach: r });
            if l < lo {
                lo = l;
                hi = h;
            }
        }
        let mut global = if lo.is_infinite() { lo } else { 0.5 * (lo + hi) };

        // Monte-Carlo cross-check: every point closer than the estimate must
        // have a unique nearest point
        let (bl, bh) = self.shape.bounding_box();
        let pad = if global.is_finite() {
            global * self.norm.wulff_extent().1
        } else {
            self.shape.diameter()
        };
        let limit = if global.is_finite() { global * (1.0 - opts.unp_margin) } else { f64::INFINITY };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5ca9);
        let pts: Vec<Point<D>> = (0..opts.unp_scan_points)
            .map(|_| {
                let mut p = Point::<D>::zeros();
                for i in 0..D {
                    p[i] = rng.random_range((bl[i] - pad)..(bh[i] + pad));
                }
                p
            })
            .collect();
        let checks = map_slice(self.settings.execution, &pts, |p| self.project(p));
        let mut witnesses = Vec::new();
        for (p, r) in pts.iter().zip(checks) {
            let r = r?;
            if r.delta > 0.0 && r.delta < limit && !r.is_unique() {
                witnesses.push(p.iter().copied().collect::<Vec<f64>>());
                global = global.min(r.delta);
                lo = lo.min(r.delta);
                hi = hi.min(r.delta);
            }
        }
        Ok(ReachEstimate {
            per_sample,
            global,
            lo,
            hi,
            convex: self.shape.is_convex(),
            witnesses,
        })
    }

    /// Viscosity / non-viscosity / Alexandrov classification of a boundary
    /// point.
    pub fn classify_boundary_point(&self, a: &Point<D>) -> Result<PointClass<D>> {
        if self.shape.membership(a) != Membership::Boundary {
            let euclid = Norm::<D>::euclidean();
            let scene = Scene::new(self.shape, &euclid, self.settings);
            let d = scene.project(a)?.delta;
            return Err(Error::NotOnBoundary(d));
        }
        let fiber = self.shape.fiber_at(a);
        match fiber {
            Some(Fiber::Single(u)) => {
                let eta = self.norm.gauss_inverse(&u)?;
                match self.curvature_at(a, &eta) {
                    Ok(k) if k.kappa.iter().all(|v| v.is_finite()) => Ok(PointClass::Alexandrov { eta, kappa: k.kappa }),
                    _ => Ok(PointClass::Viscosity { eta }),
                }
            }
            other => Ok(PointClass::NonViscosity { fiber: other }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachSample<const D: usize> {
    pub a: Point<D>,
    pub eta: Point<D>,
    pub reach: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachEstimate<const D: usize> {
    pub per_sample: Vec<ReachSample<D>>,
    pub global: f64,
    pub lo: f64,
    pub hi: f64,
    pub convex: bool,
    /// Scan points within the estimate that had several nearest points.
    pub witnesses: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointClass<const D: usize> {
    Viscosity { eta: Point<D> },
    /// `None` when the normal cone is empty.
    NonViscosity { fiber: Option<Fiber<D>> },
    Alexandrov { eta: Point<D>, kappa: Vec<f64> },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::catalog::*;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn disk_projection() {
        let s = ball::<2>(&[0.0, 0.0], 1.0);
        let n = Norm::<2>::euclidean();
        let st = settings();
        let r = Scene::new(&s, &n, &st).project(&point::<2>(&[0.0, 2.0])).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-14);
        assert!((r.foot - point::<2>(&[0.0, 1.0])).norm() < 1e-14);
        assert!(r.is_unique());
    }

    #[test]
    fn midpoint_between_two_balls_has_two_feet() {
        let s = two_balls::<2>(3.0, 1.0, 1.0);
        let n = Norm::<2>::euclidean();
        let st = settings();
        let r = Scene::new(&s, &n, &st).project(&point::<2>(&[0.0, 0.0])).unwrap();
        assert!((r.delta - 2.0).abs() < 1e-14);
        match r.multiplicity {
            Multiplicity::Multiple(f) => {
                assert_eq!(f.len(), 2, "{f:?}");
                assert!(f.iter().any(|p| (p - point::<2>(&[2.0, 0.0])).norm() < 1e-12));
                assert!(f.iter().any(|p| (p - point::<2>(&[-2.0, 0.0])).norm() < 1e-12));
            }
            m => panic!("expected two feet, got {m:?}"),
        }
    }

    #[test]
    fn points_just_outside_a_smooth_cell_converge() {
        let st = settings();
        let n = Norm::<2>::ellipsoidal_diag(&[4.0, 1.0]).unwrap();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let scene = Scene::new(&disk, &n, &st);
        for (t, gap) in [(4.422, 3e-7), (0.165, 2e-7), (1.0, 5e-8), (2.5, 1e-5)] {
            let a = point::<2>(&[f64::cos(t), f64::sin(t)]);
            let x = a * (1.0 + gap);
            let r = scene.project(&x).unwrap();
            // the foot of a near-boundary point is the radial one up to O(gap)
            assert!((r.foot - a).norm() < 10.0 * gap, "t = {t}");
            assert!(r.delta > 0.0 && r.delta <= n.conjugate_eval(&(x - a)).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn numerical_path_matches_exact_path() {
        // a ball under a non-matching norm goes through the cell minimiser
        let st = settings();
        let n = Norm::<2>::ellipsoidal_diag(&[4.0, 1.0]).unwrap();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let wulff = wulff::<2>(n.kind(), &[0.0, 0.0], 1.0);
        let e = Norm::<2>::euclidean();
        for k in 0..20 {
            let t = 0.3 * k as f64;
            let x = point::<2>(&[2.5 * t.cos(), 1.7 * t.sin()]);
            let num = Scene::new(&wulff, &e, &st).project(&x).unwrap();
            let brute = brute_force(&wulff, &e, &x);
            assert!(num.delta <= brute + 1e-12 && brute - num.delta < 1e-6, "{} vs {}", num.delta, brute);
            let num = Scene::new(&disk, &n, &st).project(&x).unwrap();
            let brute = brute_force(&disk, &n, &x);
            assert!(num.delta <= brute + 1e-12 && brute - num.delta < 1e-6);
        }
    }

    fn brute_force(shape: &Shape<2>, norm: &Norm<2>, x: &Point<2>) -> f64 {
        let mut best = f64::INFINITY;
        for s in shape.sample_boundary(20_000, 0) {
            best = best.min(norm.conjugate_eval(&(x - s.point)).unwrap());
        }
        best
    }

    #[test]
    fn reach_examples() {
        let st = settings();
        let e = Norm::<2>::euclidean();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let r = Scene::new(&disk, &e, &st)
            .reach_along(&point::<2>(&[1.0, 0.0]), &point::<2>(&[1.0, 0.0]))
            .unwrap();
        assert!(r.is_infinite());
        let balls = two_balls::<2>(1.5, 1.0, 1.0);
        let r = Scene::new(&balls, &e, &st)
            .reach_along(&point::<2>(&[0.5, 0.0]), &point::<2>(&[-1.0, 0.0]))
            .unwrap();
        assert!((r - 0.5).abs() < 1e-6, "{r}");
        let seg = crate::shapes::catalog::union::<2>(vec![crate::shapes::ShapeSpec::SegmentUnion {
            segments: vec![[vec![0.0, 0.0], vec![2.0, 0.0]]],
        }]);
        let r = Scene::new(&seg, &e, &st)
            .reach_along(&point::<2>(&[1.0, 0.0]), &point::<2>(&[0.0, 1.0]))
            .unwrap();
        assert!(r.is_infinite());
    }

    #[test]
    fn invalid_normal_is_reported() {
        let st = settings();
        let e = Norm::<2>::euclidean();
        let disk = ball::<2>(&[0.0, 0.0], 1.0);
        let r = Scene::new(&disk, &e, &st).reach_along(&point::<2>(&[1.0, 0.0]), &point::<2>(&[0.0, 1.0]));
        assert!(matches!(r, Err(Error::InvalidNormal { .. })));
    }

    #[test]
    fn square_classification() {
        let st = settings();
        let e = Norm::<2>::euclidean();
        let sq = unit_square();
        let sc = Scene::new(&sq, &e, &st);
        match sc.classify_boundary_point(&point::<2>(&[0.5, 0.5])).unwrap() {
            PointClass::NonViscosity { fiber: Some(f) } => {
                assert!((f.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12)
            }
            c => panic!("{c:?}"),
        }
        assert!(matches!(
            sc.classify_boundary_point(&point::<2>(&[0.5, 0.1])).unwrap(),
            PointClass::Alexandrov { .. }
        ));
        assert!(matches!(
            sc.classify_boundary_point(&point::<2>(&[2.0, 0.0])),
            Err(Error::NotOnBoundary(_))
        ));
    }
}
