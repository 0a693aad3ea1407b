//! Catalog of closed test sets: smooth convex bodies given by a support
//! function, convex polytopes, the two-cap lens, unions of segments,
//! disjoint unions and complements.
//!
//! Every shape exposes its boundary as a list of [`Cell`]s (smooth patches,
//! flat faces, vertices). Projection minimises over cells; boundary sampling
//! walks the same cells and attaches the normal fiber to each sample.

mod polytope;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cross3, gauss_legendre, point, tangent_frame, sym_eigenvalues, to_dvec, wedge_norm, Point};
use crate::norm::{Norm, NormKind};
use crate::settings::{NormSettings, ShapeSettings};

pub use polytope::Polytope;

/// Declarative shape description used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    WulffBody { norm: NormKind, center: Vec<f64>, radius: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semiaxes: Vec<f64> },
    ConvexPolytope { vertices: Vec<Vec<f64>> },
    CapLens { eps: f64 },
    SegmentUnion { segments: Vec<[Vec<f64>; 2]> },
    DisjointUnion { components: Vec<ShapeSpec> },
    Complement { of: Box<ShapeSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// The Euclidean normal cone `N(A, a) ∩ S^n` at a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub enum Fiber<const D: usize> {
    Single(Point<D>),
    /// `{u, −u}`, e.g. interior points of a segment.
    Pair(Point<D>),
    /// `cos θ · start + sin θ · tangent` for `θ ∈ [0, angle]`.
    Arc { start: Point<D>, tangent: Point<D>, angle: f64 },
    /// Spherical polygon spanned by unit generators in cyclic order.
    Cone(Vec<Point<D>>),
}

/// A quadrature node on a fiber: Euclidean normal, Wulff normal
/// `η = ∇φ(u)`, and the factor turning the point weight into `J·dH^n` on
/// the bundle.
#[derive(Debug, Clone, Copy)]
pub struct FiberNode<const D: usize> {
    pub u: Point<D>,
    pub eta: Point<D>,
    pub jw: f64,
}

impl<const D: usize> Fiber<D> {
    pub fn is_singleton(&self) -> bool {
        matches!(self, Fiber::Single(_))
    }

    /// Angular measure of an arc fiber (0 for point fibers).
    pub fn angle(&self) -> f64 {
        match self {
            Fiber::Arc { angle, .. } => *angle,
            _ => 0.0,
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            Fiber::Single(u) => Fiber::Single(-u),
            Fiber::Pair(u) => Fiber::Pair(*u),
            Fiber::Arc { start, tangent, angle } => Fiber::Arc {
                start: -start,
                tangent: -tangent,
                angle: *angle,
            },
            Fiber::Cone(g) => Fiber::Cone(g.iter().map(|v| -v).collect()),
        }
    }

    /// Quadrature over the fiber. `tangents` is an orthonormal basis of the
    /// stratum through the base point; `nodes` sets the Gauss–Legendre order.
    pub fn nodes(&self, norm: &Norm<D>, tangents: &[Point<D>], nodes: usize) -> Result<Vec<FiberNode<D>>> {
        let single = |u: &Point<D>| -> Result<FiberNode<D>> {
            Ok(FiberNode {
                u: *u,
                eta: norm.gauss_inverse(u)?,
                jw: 1.0,
            })
        };
        match self {
            Fiber::Single(u) => Ok(vec![single(u)?]),
            Fiber::Pair(u) => Ok(vec![single(u)?, single(&-u)?]),
            Fiber::Arc { start, tangent, angle } => {
                let mut out = Vec::with_capacity(nodes);
                for (x, w) in gauss_legendre(nodes) {
                    let t = angle * x;
                    let u = start * t.cos() + tangent * t.sin();
                    let du = -start * t.sin() + tangent * t.cos();
                    let deta = norm.hessian(&u)? * du;
                    let mut vs: Vec<_> = tangents.iter().map(to_dvec).collect();
                    vs.push(to_dvec(&deta));
                    out.push(FiberNode {
                        u,
                        eta: norm.gauss_inverse(&u)?,
                        jw: wedge_norm(&vs) * angle * w,
                    });
                }
                Ok(out)
            }
            Fiber::Cone(gens) => {
                let k = (nodes / 2).max(4);
                let rule = gauss_legendre(k);
                let g0 = gens[0];
                let mut out = Vec::new();
                for i in 1..gens.len() - 1 {
                    let (gi, gj) = (gens[i], gens[i + 1]);
                    for &(s, ws) in &rule {
                        for &(t, wt) in &rule {
                            // Duffy map of the unit square onto the spherical triangle
                            let w = g0 + (gi - g0) * s + (gj - gi) * (s * t);
                            let ws_ = (gi - g0) + (gj - gi) * t;
                            let wt_ = (gj - gi) * s;
                            let len = w.norm();
                            let u = w / len;
                            let proj = |v: Point<D>| (v - u * u.dot(&v)) / len;
                            let h = norm.hessian(&u)?;
                            let es = h * proj(ws_);
                            let et = h * proj(wt_);
                            let mut vs: Vec<_> = tangents.iter().map(to_dvec).collect();
                            vs.push(to_dvec(&es));
                            vs.push(to_dvec(&et));
                            out.push(FiberNode {
                                u,
                                eta: norm.gauss_inverse(&u)?,
                                jw: wedge_norm(&vs) * ws * wt,
                            });
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A weighted boundary point with its stratum and normal fiber.
#[derive(Debug, Clone)]
pub struct BoundarySample<const D: usize> {
    pub point: Point<D>,
    /// `H^m` quadrature weight on the stratum (1 for isolated points).
    pub weight: f64,
    /// Stratum index `m`: dimension of the stratum through the point.
    pub stratum: usize,
    pub fiber: Fiber<D>,
    /// Orthonormal basis of the stratum's tangent space (`m` vectors).
    pub tangents: Vec<Point<D>>,
    /// Index of the disjoint-union component the sample belongs to.
    pub component: usize,
}

/// Smooth boundary patch `{c + ρ∇h(u)}` of the convex body with support
/// function `ρh(· ) + c·(·)`.
#[derive(Debug, Clone)]
pub struct SmoothCell<const D: usize> {
    pub center: Point<D>,
    pub radius: f64,
    pub support: Arc<Norm<D>>,
    /// Allowed normal angles `[θ0, θ1]` (planar cells only).
    pub range: Option<(f64, f64)>,
}

impl<const D: usize> SmoothCell<D> {
    pub fn point_at(&self, u: &Point<D>) -> Result<Point<D>> {
        Ok(self.center + self.support.grad(u)? * self.radius)
    }

    pub fn in_range(&self, u: &Point<D>) -> bool {
        match self.range {
            None => true,
            Some((t0, t1)) => {
                let mut t = u[1].atan2(u[0]);
                while t < t0 {
                    t += TAU;
                }
                while t >= t0 + TAU {
                    t -= TAU;
                }
                t <= t1
            }
        }
    }
}

/// Relatively open flat cell `origin + Σ s_i basis_i` with `s` in a convex
/// polygon (k = 2) or interval `[0, len]` (k = 1).
#[derive(Debug, Clone)]
pub struct FlatCell<const D: usize> {
    pub origin: Point<D>,
    pub basis: Vec<Point<D>>,
    /// CCW polygon in basis coordinates (k = 2) or `[(0,0), (len,0)]`.
    pub poly: Vec<Vector2<f64>>,
}

impl<const D: usize> FlatCell<D> {
    pub fn contains(&self, s: &Vector2<f64>, tol: f64) -> bool {
        if self.basis.len() == 1 {
            return s[0] > tol && s[0] < self.poly[1][0] - tol;
        }
        let n = self.poly.len();
        (0..n).all(|i| {
            let a = self.poly[i];
            let b = self.poly[(i + 1) % n];
            let e = b - a;
            let len = e.norm();
            (e[0] * (s[1] - a[1]) - e[1] * (s[0] - a[0])) / len > tol
        })
    }

    pub fn at(&self, s: &Vector2<f64>) -> Point<D> {
        let mut p = self.origin;
        for (i, b) in self.basis.iter().enumerate() {
            p += b * s[i];
        }
        p
    }
}

#[derive(Debug, Clone)]
pub enum Cell<const D: usize> {
    Smooth(SmoothCell<D>),
    Flat(FlatCell<D>),
    Vertex(Point<D>),
}

#[derive(Debug, Clone)]
enum Kind<const D: usize> {
    Body {
        center: Point<D>,
        radius: f64,
        support: Arc<Norm<D>>,
    },
    Polytope(Polytope<D>),
    CapLens {
        eps: f64,
    },
    Segments(Vec<(Point<D>, Point<D>)>),
    Union(Vec<Shape<D>>),
    Complement(Box<Shape<D>>),
}

#[derive(Debug, Clone)]
pub struct Shape<const D: usize> {
    kind: Kind<D>,
    spec: ShapeSpec,
    cells: Vec<Cell<D>>,
    cell_component: Vec<usize>,
    bbox: (Point<D>, Point<D>),
    settings: ShapeSettings,
}

fn coords<const D: usize>(v: &[f64], what: &str) -> Result<Point<D>> {
    if v.len() != D {
        return Err(Error::InvalidShape(format!("{what} has {} coordinates, expected {D}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidShape(format!("{what} has non-finite coordinates")));
    }
    Ok(point::<D>(v))
}

fn support_settings() -> NormSettings {
    NormSettings {
        gamma_samples: 2000,
        ..NormSettings::default()
    }
}

impl<const D: usize> Shape<D> {
    pub fn from_spec(spec: &ShapeSpec, settings: &ShapeSettings) -> Result<Self> {
        let kind = match spec {
            ShapeSpec::WulffBody { norm, center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidShape("radius must be positive".into()));
                }
                Kind::Body {
                    center: coords(center, "center")?,
                    radius: *radius,
                    support: Arc::new(Norm::new(norm.clone(), support_settings())?),
                }
            }
            ShapeSpec::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidShape("radius must be positive".into()));
                }
                Kind::Body {
                    center: coords(center, "center")?,
                    radius: *radius,
                    support: Arc::new(Norm::new(NormKind::Euclidean, support_settings())?),
                }
            }
            ShapeSpec::Ellipsoid { center, semiaxes } => {
                let a: Point<D> = coords(semiaxes, "semiaxes")?;
                if a.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::InvalidShape("semiaxes must be positive".into()));
                }
                let q = (0..D)
                    .map(|i| (0..D).map(|j| if i == j { a[i] * a[i] } else { 0.0 }).collect())
                    .collect();
                Kind::Body {
                    center: coords(center, "center")?,
                    radius: 1.0,
                    support: Arc::new(Norm::new(NormKind::Ellipsoidal { q }, support_settings())?),
                }
            }
            ShapeSpec::ConvexPolytope { vertices } => {
                let pts = vertices
                    .iter()
                    .map(|v| coords::<D>(v, "vertex"))
                    .collect::<Result<Vec<_>>>()?;
                Kind::Polytope(Polytope::hull(&pts)?)
            }
            ShapeSpec::CapLens { eps } => {
                if D != 2 {
                    return Err(Error::InvalidShape("the cap lens is planar".into()));
                }
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::InvalidShape(format!("cap lens needs eps in (0,1), got {eps}")));
                }
                Kind::CapLens { eps: *eps }
            }
            ShapeSpec::SegmentUnion { segments } => {
                if D != 2 {
                    return Err(Error::InvalidShape("segment unions are planar".into()));
                }
                let segs = segments
                    .iter()
                    .map(|[a, b]| Ok((coords::<D>(a, "segment end")?, coords::<D>(b, "segment end")?)))
                    .collect::<Result<Vec<_>>>()?;
                if segs.is_empty() || segs.iter().any(|(a, b)| (a - b).norm() == 0.0) {
                    return Err(Error::InvalidShape("segments must be non-degenerate".into()));
                }
                Kind::Segments(segs)
            }
            ShapeSpec::DisjointUnion { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidShape("empty union".into()));
                }
                let comps = components
                    .iter()
                    .map(|c| Shape::from_spec(c, settings))
                    .collect::<Result<Vec<_>>>()?;
                Kind::Union(comps)
            }
            ShapeSpec::Complement { of } => {
                let inner = Shape::from_spec(of, settings)?;
                return inner.complement();
            }
        };
        let shape = Self::assemble(kind, spec.clone(), settings.clone())?;
        if let Kind::Union(comps) = &shape.kind {
            shape.check_disjoint(comps)?;
        }
        Ok(shape)
    }

    fn assemble(kind: Kind<D>, spec: ShapeSpec, settings: ShapeSettings) -> Result<Self> {
        let mut cells = Vec::new();
        let mut cell_component = Vec::new();
        let bbox;
        match &kind {
            Kind::Body { center, radius, support } => {
                cells.push(Cell::Smooth(SmoothCell {
                    center: *center,
                    radius: *radius,
                    support: support.clone(),
                    range: None,
                }));
                // the support function of the body in direction e_i
                let mut ext = Point::<D>::zeros();
                for i in 0..D {
                    let mut e = Point::<D>::zeros();
                    e[i] = 1.0;
                    ext[i] = radius * support.eval(&e);
                }
                bbox = (center - ext, center + ext);
            }
            Kind::Polytope(p) => {
                for f in &p.faces {
                    cells.push(Cell::Flat(face_cell(p, f)));
                }
                for e in &p.edges {
                    let a = p.vertices[e.a];
                    let b = p.vertices[e.b];
                    cells.push(Cell::Flat(segment_cell(&a, &b)));
                }
                for v in &p.vertices {
                    cells.push(Cell::Vertex(*v));
                }
                bbox = points_bbox(&p.vertices);
            }
            Kind::CapLens { eps } => {
                let s = eps.asin();
                let euclid = Arc::new(Norm::new(NormKind::Euclidean, support_settings())?);
                cells.push(Cell::Smooth(SmoothCell {
                    center: point::<D>(&[0.0, -eps]),
                    radius: 1.0,
                    support: euclid.clone(),
                    range: Some((s, PI - s)),
                }));
                cells.push(Cell::Smooth(SmoothCell {
                    center: point::<D>(&[0.0, *eps]),
                    radius: 1.0,
                    support: euclid,
                    range: Some((PI + s, TAU - s)),
                }));
                let c = (1.0 - eps * eps).sqrt();
                cells.push(Cell::Vertex(point::<D>(&[c, 0.0])));
                cells.push(Cell::Vertex(point::<D>(&[-c, 0.0])));
                bbox = (point::<D>(&[-c, -(1.0 - eps)]), point::<D>(&[c, 1.0 - eps]));
            }
            Kind::Segments(segs) => {
                let mut pts = Vec::new();
                for (a, b) in segs {
                    cells.push(Cell::Flat(segment_cell(a, b)));
                    cells.push(Cell::Vertex(*a));
                    cells.push(Cell::Vertex(*b));
                    pts.push(*a);
                    pts.push(*b);
                }
                bbox = points_bbox(&pts);
            }
            Kind::Union(comps) => {
                let mut lo = Point::<D>::repeat(f64::INFINITY);
                let mut hi = Point::<D>::repeat(f64::NEG_INFINITY);
                for (ci, c) in comps.iter().enumerate() {
                    for cell in &c.cells {
                        cells.push(cell.clone());
                        cell_component.push(ci);
                    }
                    lo = lo.inf(&c.bbox.0);
                    hi = hi.sup(&c.bbox.1);
                }
                bbox = (lo, hi);
            }
            Kind::Complement(inner) => {
                cells = inner.cells.clone();
                cell_component = inner.cell_component.clone();
                bbox = inner.bbox;
            }
        }
        if cell_component.is_empty() {
            cell_component = vec![0; cells.len()];
        }
        Ok(Self {
            kind,
            spec,
            cells,
            cell_component,
            bbox,
            settings,
        })
    }

    fn check_disjoint(&self, comps: &[Shape<D>]) -> Result<()> {
        // Euclidean gaps; any norm gap is positive iff the Euclidean one is
        let euclid = Norm::<D>::new(NormKind::Euclidean, support_settings())?;
        for i in 0..comps.len() {
            for j in 0..comps.len() {
                if i == j {
                    continue;
                }
                for s in comps[i].sample_boundary(256, 0) {
                    let d = comps[j].boundary_distance(&euclid, &s.point)?;
                    let inside = comps[j].membership(&s.point) != Membership::Outside;
                    if inside || d < self.settings.disjoint_margin {
                        return Err(Error::InvalidShape(format!(
                            "union components {i} and {j} are closer than the margin {}",
                            self.settings.disjoint_margin
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Smallest φ*-distance from `x` to the boundary cells, by brute force
    /// over dense cell samples refined by the projection machinery.
    fn boundary_distance(&self, norm: &Norm<D>, x: &Point<D>) -> Result<f64> {
        let opts = crate::settings::ProjectionSettings::default();
        let cands = crate::projection::cell_candidates(self, norm, x, &opts)?;
        Ok(cands.iter().map(|c| c.delta).fold(f64::INFINITY, f64::min))
    }

    pub fn spec(&self) -> &ShapeSpec {
        &self.spec
    }

    pub fn settings(&self) -> &ShapeSettings {
        &self.settings
    }

    pub fn cells(&self) -> &[Cell<D>] {
        &self.cells
    }

    pub fn cell_component(&self, i: usize) -> usize {
        self.cell_component[i]
    }

    pub fn bounding_box(&self) -> (Point<D>, Point<D>) {
        self.bbox
    }

    /// Diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        (self.bbox.1 - self.bbox.0).norm()
    }

    /// Convex sets have infinite reach; only primitives known to be convex
    /// report `true`.
    pub fn is_convex(&self) -> bool {
        match &self.kind {
            Kind::Body { .. } | Kind::Polytope(_) | Kind::CapLens { .. } => true,
            Kind::Segments(s) => s.len() == 1,
            Kind::Union(c) => c.len() == 1 && c[0].is_convex(),
            Kind::Complement(_) => false,
        }
    }

    pub fn is_complement(&self) -> bool {
        matches!(self.kind, Kind::Complement(_))
    }

    pub fn has_interior(&self) -> bool {
        match &self.kind {
            Kind::Segments(_) => false,
            Kind::Union(c) => c.iter().all(|s| s.has_interior()),
            _ => true,
        }
    }

    /// Number of disjoint-union components (1 for primitives).
    pub fn component_count(&self) -> usize {
        match &self.kind {
            Kind::Union(c) => c.len(),
            Kind::Complement(inner) => inner.component_count(),
            _ => 1,
        }
    }

    /// The underlying polytope of a convex-polytope shape.
    pub fn polytope(&self) -> Option<&Polytope<D>> {
        match &self.kind {
            Kind::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// Lebesgue measure, when finite and known in closed form (or by
    /// one-dimensional quadrature for smoothed-lp Wulff bodies).
    pub fn volume(&self) -> Option<f64> {
        match &self.kind {
            Kind::Body { radius, support, .. } => Some(radius.powi(D as i32) * wulff_volume(support)),
            Kind::Polytope(p) => Some(p.volume()),
            Kind::CapLens { eps } => {
                let a = eps.acos();
                Some(2.0 * (a - eps * (1.0 - eps * eps).sqrt()))
            }
            Kind::Segments(_) => Some(0.0),
            Kind::Union(c) => c.iter().map(|s| s.volume()).sum(),
            Kind::Complement(_) => None,
        }
    }

    pub fn membership(&self, x: &Point<D>) -> Membership {
        let tol = self.settings.boundary_tol;
        let classify = |excess: f64, scale: f64| {
            let band = tol * (1.0 + scale);
            if excess < -band {
                Membership::Inside
            } else if excess <= band {
                Membership::Boundary
            } else {
                Membership::Outside
            }
        };
        match &self.kind {
            Kind::Body { center, radius, support } => {
                let v = support.conjugate_eval(&(x - center)).unwrap_or(f64::INFINITY);
                classify(v - radius, *radius)
            }
            Kind::Polytope(p) => classify(p.facet_excess(x), p.scale()),
            Kind::CapLens { eps } => {
                let a = (x - point::<D>(&[0.0, -eps])).norm() - 1.0;
                let b = (x - point::<D>(&[0.0, *eps])).norm() - 1.0;
                classify(a.max(b), 1.0)
            }
            Kind::Segments(segs) => {
                let d = segs
                    .iter()
                    .map(|(a, b)| {
                        let t = ((x - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
                        (x - (a + (b - a) * t)).norm()
                    })
                    .fold(f64::INFINITY, f64::min);
                if d <= tol * (1.0 + x.norm()) {
                    Membership::Boundary
                } else {
                    Membership::Outside
                }
            }
            Kind::Union(comps) => {
                let mut best = Membership::Outside;
                for c in comps {
                    match c.membership(x) {
                        Membership::Inside => return Membership::Inside,
                        Membership::Boundary => best = Membership::Boundary,
                        Membership::Outside => {}
                    }
                }
                best
            }
            Kind::Complement(inner) => match inner.membership(x) {
                Membership::Inside => Membership::Outside,
                Membership::Boundary => Membership::Boundary,
                Membership::Outside => Membership::Inside,
            },
        }
    }

    /// Euclidean normal cone at a boundary point; `None` when it is empty.
    pub fn fiber_at(&self, a: &Point<D>) -> Option<Fiber<D>> {
        let tol = 1e-7 * (1.0 + self.diameter());
        let arc = |na: Point<D>, nb: Point<D>| Fiber::Arc {
            start: na,
            tangent: (nb - na * na.dot(&nb)).normalize(),
            angle: na.dot(&nb).clamp(-1.0, 1.0).acos(),
        };
        match &self.kind {
            Kind::Body { center, support, .. } => Some(Fiber::Single(support.grad_conjugate(&(a - center)).ok()?.normalize())),
            Kind::Polytope(p) => {
                let active: Vec<usize> = (0..p.faces.len())
                    .filter(|&f| (p.faces[f].normal.dot(a) - p.faces[f].offset).abs() <= tol)
                    .collect();
                match active.len() {
                    0 => None,
                    1 => Some(Fiber::Single(p.faces[active[0]].normal)),
                    2 => Some(arc(p.faces[active[0]].normal, p.faces[active[1]].normal)),
                    _ => {
                        let v = (0..p.vertices.len()).min_by(|&i, &j| {
                            (p.vertices[i] - a).norm().total_cmp(&(p.vertices[j] - a).norm())
                        })?;
                        Some(Fiber::Cone(p.vertex_faces[v].iter().map(|&f| p.faces[f].normal).collect()))
                    }
                }
            }
            Kind::CapLens { eps } => {
                let c = (1.0 - eps * eps).sqrt();
                for sign in [1.0, -1.0] {
                    if (a - point::<D>(&[sign * c, 0.0])).norm() <= tol {
                        let lower = (point::<D>(&[sign * c, 0.0]) - point::<D>(&[0.0, *eps])).normalize();
                        let upper = (point::<D>(&[sign * c, 0.0]) - point::<D>(&[0.0, -eps])).normalize();
                        return Some(arc(lower, upper));
                    }
                }
                let cy = if a[1] > 0.0 { -eps } else { *eps };
                Some(Fiber::Single((a - point::<D>(&[0.0, cy])).normalize()))
            }
            Kind::Segments(segs) => {
                for (p, q) in segs {
                    let len = (q - p).norm();
                    let t = (q - p) / len;
                    let nrm = point::<D>(&[-t[1], t[0]]);
                    if (a - p).norm() <= tol {
                        return Some(Fiber::Arc { start: nrm, tangent: -t, angle: PI });
                    }
                    if (a - q).norm() <= tol {
                        return Some(Fiber::Arc { start: nrm, tangent: t, angle: PI });
                    }
                    let s = (a - p).dot(&t);
                    if s > 0.0 && s < len && (a - p - t * s).norm() <= tol {
                        return Some(Fiber::Pair(nrm));
                    }
                }
                None
            }
            Kind::Union(comps) => comps
                .iter()
                .find(|c| c.membership(a) == Membership::Boundary)
                .and_then(|c| c.fiber_at(a)),
            Kind::Complement(inner) => match inner.fiber_at(a)? {
                Fiber::Single(u) => Some(Fiber::Single(-u)),
                _ => None,
            },
        }
    }

    /// The closure of the complement of the interior.
    pub fn complement(&self) -> Result<Self> {
        if !self.has_interior() {
            return Err(Error::EmptyInterior);
        }
        if let Kind::Complement(inner) = &self.kind {
            return Ok((**inner).clone());
        }
        let spec = ShapeSpec::Complement {
            of: Box::new(self.spec.clone()),
        };
        Self::assemble(Kind::Complement(Box::new(self.clone())), spec, self.settings.clone())
    }

    /// Closed-form nearest points, one per union component, when every
    /// component is a body whose support function is the active norm.
    pub fn exact_candidates(&self, norm: &Norm<D>, x: &Point<D>) -> Option<Vec<(Point<D>, f64)>> {
        match &self.kind {
            Kind::Body { center, radius, support } if support.kind() == norm.kind() => {
                let y = x - center;
                let r = norm.conjugate_eval(&y).ok()?;
                if r == 0.0 {
                    return None;
                }
                let a = center + y * (radius / r);
                Some(vec![(a, (r - radius).abs())])
            }
            Kind::Union(comps) => {
                let mut out = Vec::new();
                for c in comps {
                    out.extend(c.exact_candidates(norm, x)?);
                }
                Some(out)
            }
            Kind::Complement(inner) => match &inner.kind {
                Kind::Body { .. } => inner.exact_candidates(norm, x),
                _ => None,
            },
            _ => None,
        }
    }

    /// Closed-form φ-nearest point and distance, if available.
    pub fn exact_projection(&self, norm: &Norm<D>, x: &Point<D>) -> Option<(Point<D>, f64)> {
        if self.membership(x) == Membership::Inside {
            return Some((*x, 0.0));
        }
        self.exact_candidates(norm, x)?
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Measure of the top boundary stratum.
    fn top_measure(&self) -> f64 {
        match &self.kind {
            Kind::Body { radius, support, .. } => body_samples(support, *radius, &Point::<D>::zeros(), 512).iter().map(|s| s.1).sum(),
            Kind::Polytope(p) => p.faces.iter().map(|f| p.face_measure(f)).sum(),
            Kind::CapLens { eps } => 4.0 * eps.acos(),
            Kind::Segments(s) => s.iter().map(|(a, b)| (b - a).norm()).sum(),
            Kind::Union(c) => c.iter().map(|s| s.top_measure()).sum(),
            Kind::Complement(inner) => inner.top_measure(),
        }
    }

    /// Quasi-uniform boundary quadrature with strata and fibers. The top
    /// stratum receives about `n_samples` points; lower strata are listed
    /// separately. The quadrature is deterministic; `seed` is accepted for
    /// interface symmetry with the Monte-Carlo routines and does not change
    /// the nodes.
    pub fn sample_boundary(&self, n_samples: usize, seed: u64) -> Vec<BoundarySample<D>> {
        let _ = seed;
        let mut out = Vec::new();
        self.sample_into(n_samples.max(1), 0, &mut out);
        out
    }

    fn sample_into(&self, n: usize, component: usize, out: &mut Vec<BoundarySample<D>>) {
        let top = D - 1;
        match &self.kind {
            Kind::Body { center, radius, support } => {
                for (u, w, p) in body_samples(support, *radius, center, n) {
                    let tangents = if D == 2 { vec![tangent_frame(&u)[0]] } else { tangent_frame(&u).to_vec() };
                    out.push(BoundarySample {
                        point: p,
                        weight: w,
                        stratum: top,
                        fiber: Fiber::Single(u),
                        tangents,
                        component,
                    });
                }
            }
            Kind::Polytope(p) => polytope_samples(p, n, component, out),
            Kind::CapLens { eps } => {
                let s = eps.asin();
                let per = (n / 2).max(4);
                for (c, t0, t1) in [(-eps, s, PI - s), (*eps, PI + s, TAU - s)] {
                    let center = point::<D>(&[0.0, c]);
                    for (x, w) in gauss_legendre(per) {
                        let t = t0 + (t1 - t0) * x;
                        let u = point::<D>(&[t.cos(), t.sin()]);
                        out.push(BoundarySample {
                            point: center + u,
                            weight: (t1 - t0) * w,
                            stratum: 1,
                            fiber: Fiber::Single(u),
                            tangents: vec![tangent_frame(&u)[0]],
                            component,
                        });
                    }
                }
                let c = (1.0 - eps * eps).sqrt();
                for sign in [1.0, -1.0] {
                    // normals from the lower cap to the upper cap at each corner
                    let (start, tangent) = if sign > 0.0 {
                        (point::<D>(&[c, -eps]), point::<D>(&[*eps, c]))
                    } else {
                        (point::<D>(&[-c, *eps]), point::<D>(&[-eps, -c]))
                    };
                    out.push(BoundarySample {
                        point: point::<D>(&[sign * c, 0.0]),
                        weight: 1.0,
                        stratum: 0,
                        fiber: Fiber::Arc {
                            start,
                            tangent,
                            angle: 2.0 * s,
                        },
                        tangents: Vec::new(),
                        component,
                    });
                }
            }
            Kind::Segments(segs) => {
                let total: f64 = segs.iter().map(|(a, b)| (b - a).norm()).sum();
                for (a, b) in segs {
                    let len = (b - a).norm();
                    let t = (b - a) / len;
                    let nrm = point::<D>(&[-t[1], t[0]]);
                    let k = ((n as f64 * len / total).round() as usize).max(4);
                    for (x, w) in gauss_legendre(k) {
                        out.push(BoundarySample {
                            point: a + (b - a) * x,
                            weight: len * w,
                            stratum: 1,
                            fiber: Fiber::Pair(nrm),
                            tangents: vec![t],
                            component,
                        });
                    }
                    for (p, dir) in [(a, -t), (b, t)] {
                        out.push(BoundarySample {
                            point: *p,
                            weight: 1.0,
                            stratum: 0,
                            fiber: Fiber::Arc {
                                start: nrm,
                                tangent: dir,
                                angle: PI,
                            },
                            tangents: Vec::new(),
                            component,
                        });
                    }
                }
            }
            Kind::Union(comps) => {
                let total: f64 = comps.iter().map(|c| c.top_measure()).sum();
                for (ci, c) in comps.iter().enumerate() {
                    let k = ((n as f64 * c.top_measure() / total).round() as usize).max(8);
                    c.sample_into(k, ci, out);
                }
            }
            Kind::Complement(inner) => {
                // normal cones at corners of the inner set are empty for the
                // complement, so only the top stratum carries over (flipped)
                let mut tmp = Vec::new();
                inner.sample_into(n, component, &mut tmp);
                out.extend(tmp.into_iter().filter(|s| s.stratum == top).map(|mut s| {
                    s.fiber = s.fiber.negated();
                    s
                }));
            }
        }
    }
}

fn points_bbox<const D: usize>(pts: &[Point<D>]) -> (Point<D>, Point<D>) {
    let mut lo = Point::<D>::repeat(f64::INFINITY);
    let mut hi = Point::<D>::repeat(f64::NEG_INFINITY);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn segment_cell<const D: usize>(a: &Point<D>, b: &Point<D>) -> FlatCell<D> {
    let len = (b - a).norm();
    FlatCell {
        origin: *a,
        basis: vec![(b - a) / len],
        poly: vec![Vector2::new(0.0, 0.0), Vector2::new(len, 0.0)],
    }
}

fn face_cell<const D: usize>(p: &Polytope<D>, f: &polytope::Face<D>) -> FlatCell<D> {
    let a = p.vertices[f.verts[0]];
    if D == 2 {
        return segment_cell(&a, &p.vertices[f.verts[1]]);
    }
    let e1 = (p.vertices[f.verts[1]] - a).normalize();
    let e2 = cross3(&f.normal, &e1);
    let poly = f
        .verts
        .iter()
        .map(|&i| {
            let d = p.vertices[i] - a;
            Vector2::new(d.dot(&e1), d.dot(&e2))
        })
        .collect();
    FlatCell {
        origin: a,
        basis: vec![e1, e2],
        poly,
    }
}

/// Volume of the unit Wulff shape `{φ* ≤ 1}` of `norm`.
pub fn wulff_volume<const D: usize>(norm: &Norm<D>) -> f64 {
    if let Some(q) = norm.metric() {
        let unit = if D == 2 { PI } else { 4.0 * PI / 3.0 };
        return unit * sym_eigenvalues(&q).iter().product::<f64>().sqrt();
    }
    // (1/d) ∫ η·n over ∂W, parametrised by the normal
    body_samples(norm, 1.0, &Point::<D>::zeros(), 4096)
        .iter()
        .map(|(u, w, p)| p.dot(u) * w)
        .sum::<f64>()
        / D as f64
}

/// `(u, H^n weight, point)` on the boundary of `c + ρ·{h* ≤ 1}`.
fn body_samples<const D: usize>(support: &Norm<D>, radius: f64, center: &Point<D>, n: usize) -> Vec<(Point<D>, f64, Point<D>)> {
    let mut out = Vec::with_capacity(n);
    if D == 2 {
        let n = n.max(8);
        for k in 0..n {
            let t = TAU * (k as f64 + 0.5) / n as f64;
            let u = point::<D>(&[t.cos(), t.sin()]);
            let du = point::<D>(&[-t.sin(), t.cos()]);
            let h = support.hessian(&u).expect("unit vector");
            let w = radius * (h * du).norm() * TAU / n as f64;
            out.push((u, w, center + support.grad(&u).expect("unit vector") * radius));
        }
    } else {
        let nz = ((n as f64 / 2.0).sqrt().round() as usize).max(4);
        let nphi = 2 * nz;
        for (x, wz) in gauss_legendre(nz) {
            let z = 2.0 * x - 1.0;
            let r = (1.0 - z * z).sqrt();
            for j in 0..nphi {
                let t = TAU * (j as f64 + 0.5) / nphi as f64;
                let u = point::<D>(&[r * t.cos(), r * t.sin(), z]);
                let h = support.hessian(&u).expect("unit vector");
                let [t1, t2] = tangent_frame(&u);
                let a = t1.dot(&(h * t1));
                let b = t1.dot(&(h * t2));
                let c = t2.dot(&(h * t2));
                let jac = radius * radius * (a * c - b * b);
                let w = jac * 2.0 * wz * TAU / nphi as f64;
                out.push((u, w, center + support.grad(&u).expect("unit vector") * radius));
            }
        }
    }
    out
}

fn polytope_samples<const D: usize>(p: &Polytope<D>, n: usize, component: usize, out: &mut Vec<BoundarySample<D>>) {
    let total: f64 = p.faces.iter().map(|f| p.face_measure(f)).sum();
    for f in &p.faces {
        let m = p.face_measure(f);
        let share = (n as f64 * m / total).max(1.0);
        if D == 2 {
            let a = p.vertices[f.verts[0]];
            let b = p.vertices[f.verts[1]];
            let t = (b - a) / m;
            for (x, w) in gauss_legendre((share.round() as usize).max(4)) {
                out.push(BoundarySample {
                    point: a + (b - a) * x,
                    weight: m * w,
                    stratum: 1,
                    fiber: Fiber::Single(f.normal),
                    tangents: vec![t],
                    component,
                });
            }
        } else {
            let tris = f.verts.len() - 2;
            let k = ((share / tris as f64).sqrt().round() as usize).max(2);
            let rule = gauss_legendre(k);
            let a = p.vertices[f.verts[0]];
            let cell = face_cell(p, f);
            for w in 1..f.verts.len() - 1 {
                let b = p.vertices[f.verts[w]];
                let c = p.vertices[f.verts[w + 1]];
                let area2 = cross3(&(b - a), &(c - b)).norm();
                for &(s, ws) in &rule {
                    for &(t, wt) in &rule {
                        out.push(BoundarySample {
                            point: a + (b - a) * s + (c - b) * (s * t),
                            weight: area2 * s * ws * wt,
                            stratum: 2,
                            fiber: Fiber::Single(f.normal),
                            tangents: cell.basis.clone(),
                            component,
                        });
                    }
                }
            }
        }
    }
    if D == 3 {
        let avg_len: f64 = p.edges.iter().map(|e| (p.vertices[e.b] - p.vertices[e.a]).norm()).sum::<f64>() / p.edges.len() as f64;
        let spacing = (total / n as f64).sqrt();
        for e in &p.edges {
            let a = p.vertices[e.a];
            let b = p.vertices[e.b];
            let len = (b - a).norm();
            let k = ((len / spacing).round() as usize).max(4);
            let _ = avg_len;
            let na = p.faces[e.faces[0]].normal;
            let nb = p.faces[e.faces[1]].normal;
            let tangent = (nb - na * na.dot(&nb)).normalize();
            let angle = na.dot(&nb).clamp(-1.0, 1.0).acos();
            for (x, w) in gauss_legendre(k) {
                out.push(BoundarySample {
                    point: a + (b - a) * x,
                    weight: len * w,
                    stratum: 1,
                    fiber: Fiber::Arc { start: na, tangent, angle },
                    tangents: vec![(b - a) / len],
                    component,
                });
            }
        }
    }
    for (vi, v) in p.vertices.iter().enumerate() {
        let faces = &p.vertex_faces[vi];
        let fiber = if D == 2 {
            let na = p.faces[faces[0]].normal;
            let nb = p.faces[faces[1]].normal;
            Fiber::Arc {
                start: na,
                tangent: point::<D>(&[-na[1], na[0]]),
                angle: na.dot(&nb).clamp(-1.0, 1.0).acos(),
            }
        } else {
            Fiber::Cone(faces.iter().map(|&f| p.faces[f].normal).collect())
        };
        out.push(BoundarySample {
            point: *v,
            weight: 1.0,
            stratum: 0,
            fiber,
            tangents: Vec::new(),
            component,
        });
    }
}

/// Convenience constructors for the test catalog.
pub mod catalog {
    use super::*;

    fn build<const D: usize>(spec: ShapeSpec) -> Shape<D> {
        Shape::from_spec(&spec, &ShapeSettings::default()).expect("catalog shape is valid")
    }

    pub fn ball<const D: usize>(center: &[f64], radius: f64) -> Shape<D> {
        build(ShapeSpec::Ball {
            center: center.to_vec(),
            radius,
        })
    }

    pub fn ellipse(a: f64, b: f64) -> Shape<2> {
        build(ShapeSpec::Ellipsoid {
            center: vec![0.0, 0.0],
            semiaxes: vec![a, b],
        })
    }

    pub fn wulff<const D: usize>(norm: &NormKind, center: &[f64], radius: f64) -> Shape<D> {
        build(ShapeSpec::WulffBody {
            norm: norm.clone(),
            center: center.to_vec(),
            radius,
        })
    }

    /// Axis-aligned unit square centred at the origin.
    pub fn unit_square() -> Shape<2> {
        build(ShapeSpec::ConvexPolytope {
            vertices: vec![vec![-0.5, -0.5], vec![0.5, -0.5], vec![0.5, 0.5], vec![-0.5, 0.5]],
        })
    }

    /// Unit cube centred at the origin.
    pub fn unit_cube() -> Shape<3> {
        let vertices = (0..8)
            .map(|i| vec![(i & 1) as f64 - 0.5, ((i >> 1) & 1) as f64 - 0.5, ((i >> 2) & 1) as f64 - 0.5])
            .collect();
        build(ShapeSpec::ConvexPolytope { vertices })
    }

    pub fn cap_lens(eps: f64) -> Shape<2> {
        build(ShapeSpec::CapLens { eps })
    }

    /// Segments `[-L/2, L/2] × {±1}`.
    pub fn parallel_segments(len: f64) -> Shape<2> {
        let h = len / 2.0;
        build(ShapeSpec::SegmentUnion {
            segments: vec![[vec![-h, -1.0], vec![h, -1.0]], [vec![-h, 1.0], vec![h, 1.0]]],
        })
    }

    pub fn union<const D: usize>(components: Vec<ShapeSpec>) -> Shape<D> {
        build(ShapeSpec::DisjointUnion { components })
    }

    /// Two balls of radii `r0`, `r1` centred at `(∓c, 0, …)`.
    pub fn two_balls<const D: usize>(c: f64, r0: f64, r1: f64) -> Shape<D> {
        let mut a = vec![0.0; D];
        let mut b = vec![0.0; D];
        a[0] = -c;
        b[0] = c;
        union(vec![
            ShapeSpec::Ball { center: a, radius: r0 },
            ShapeSpec::Ball { center: b, radius: r1 },
        ])
    }
}
