//! Convex hulls of small vertex sets in the plane and in space, with the
//! face, edge and vertex incidence needed for strata and normal fans.

use crate::error::{Error, Result};
use crate::linalg::{cross3, point, Point};

#[derive(Debug, Clone)]
pub struct Face<const D: usize> {
    /// Outward unit normal.
    pub normal: Point<D>,
    /// `normal · x = offset` on the face.
    pub offset: f64,
    /// Vertex indices, counter-clockwise seen from outside (d = 3) or in
    /// edge order (d = 2).
    pub verts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// The two faces meeting along the edge.
    pub faces: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct Polytope<const D: usize> {
    pub vertices: Vec<Point<D>>,
    pub faces: Vec<Face<D>>,
    /// Codimension-two edges (d = 3 only).
    pub edges: Vec<Edge>,
    /// Faces incident to each vertex, in cyclic order around it.
    pub vertex_faces: Vec<Vec<usize>>,
}

impl<const D: usize> Polytope<D> {
    pub fn hull(points: &[Point<D>]) -> Result<Self> {
        match D {
            2 => hull2(points),
            3 => hull3(points),
            _ => Err(Error::DimensionMismatch { expected: 3, got: D }),
        }
    }

    pub fn scale(&self) -> f64 {
        let mut m = 0.0f64;
        for p in &self.vertices {
            for q in &self.vertices {
                m = m.max((p - q).norm());
            }
        }
        m
    }

    /// Largest signed facet distance `max_i (n_i·x − b_i)`.
    pub fn facet_excess(&self, x: &Point<D>) -> f64 {
        self.faces
            .iter()
            .map(|f| f.normal.dot(x) - f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn volume(&self) -> f64 {
        // divergence theorem over facets
        let c = self.centroid();
        let mut v = 0.0;
        for f in &self.faces {
            let h = f.offset - f.normal.dot(&c);
            v += h * self.face_measure(f) / D as f64;
        }
        v
    }

    pub fn centroid(&self) -> Point<D> {
        self.vertices.iter().fold(Point::<D>::zeros(), |a, p| a + p) / self.vertices.len() as f64
    }

    /// Length (d = 2) or area (d = 3) of a facet.
    pub fn face_measure(&self, f: &Face<D>) -> f64 {
        if D == 2 {
            (self.vertices[f.verts[1]] - self.vertices[f.verts[0]]).norm()
        } else {
            let p0 = self.vertices[f.verts[0]];
            let mut a = 0.0;
            for w in 1..f.verts.len() - 1 {
                let p1 = self.vertices[f.verts[w]];
                let p2 = self.vertices[f.verts[w + 1]];
                a += 0.5 * cross3(&(p1 - p0), &(p2 - p0)).dot(&f.normal);
            }
            a
        }
    }
}

fn dedupe<const D: usize>(points: &[Point<D>]) -> Vec<Point<D>> {
    let mut out: Vec<Point<D>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| (p - q).norm() < 1e-12) {
            out.push(*p);
        }
    }
    out
}

fn hull2<const D: usize>(points: &[Point<D>]) -> Result<Polytope<D>> {
    let mut pts = dedupe(points);
    if pts.len() < 3 {
        return Err(Error::InvalidShape("a planar polytope needs 3 affinely independent vertices".into()));
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: &Point<D>, a: &Point<D>, b: &Point<D>| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    // Andrew's monotone chain, dropping collinear points
    let mut lower: Vec<Point<D>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point<D>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let verts = lower;
    if verts.len() < 3 {
        return Err(Error::EmptyInterior);
    }
    let n = verts.len();
    let mut faces = Vec::with_capacity(n);
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let t = (b - a).normalize();
        let normal = point::<D>(&[t[1], -t[0]]);
        faces.push(Face {
            normal,
            offset: normal.dot(&a),
            verts: vec![i, (i + 1) % n],
        });
    }
    let vertex_faces = (0..n).map(|i| vec![(i + n - 1) % n, i]).collect();
    Ok(Polytope {
        vertices: verts,
        faces,
        edges: Vec::new(),
        vertex_faces,
    })
}

fn hull3<const D: usize>(points: &[Point<D>]) -> Result<Polytope<D>> {
    let pts = dedupe(points);
    let m = pts.len();
    if m < 4 {
        return Err(Error::InvalidShape("a solid polytope needs 4 affinely independent vertices".into()));
    }
    let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut planes: Vec<(Point<D>, f64)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let n = cross3(&(pts[j] - pts[i]), &(pts[k] - pts[i]));
                if n.norm() < 1e-12 * scale * scale {
                    continue;
                }
                let mut n = n.normalize();
                let mut b = n.dot(&pts[i]);
                let above = pts.iter().any(|p| n.dot(p) - b > tol);
                let below = pts.iter().any(|p| n.dot(p) - b < -tol);
                if above && below {
                    continue;
                }
                if above {
                    n = -n;
                    b = -b;
                }
                if !planes.iter().any(|(q, c)| (q - n).norm() < 1e-9 && (c - b).abs() < tol) {
                    planes.push((n, b));
                }
            }
        }
    }
    if planes.len() < 4 {
        return Err(Error::EmptyInterior);
    }
    // keep only extreme points: those that are corners of some facet polygon
    let mut faces_pts: Vec<(Point<D>, f64, Vec<usize>)> = Vec::new();
    for (n, b) in &planes {
        let on: Vec<usize> = (0..m).filter(|&i| (n.dot(&pts[i]) - b).abs() <= tol).collect();
        let c = on.iter().fold(Point::<D>::zeros(), |a, &i| a + pts[i]) / on.len() as f64;
        let e1 = (pts[on[0]] - c).normalize();
        let e2 = cross3(n, &e1);
        let mut ang: Vec<(f64, usize)> = on
            .iter()
            .map(|&i| {
                let d = pts[i] - c;
                (d.dot(&e2).atan2(d.dot(&e1)), i)
            })
            .collect();
        ang.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ring: Vec<usize> = ang.into_iter().map(|(_, i)| i).collect();
        // drop points lying on polygon edges
        let mut changed = true;
        while changed && ring.len() > 3 {
            changed = false;
            for w in 0..ring.len() {
                let p0 = pts[ring[(w + ring.len() - 1) % ring.len()]];
                let p1 = pts[ring[w]];
                let p2 = pts[ring[(w + 1) % ring.len()]];
                if cross3(&(p1 - p0), &(p2 - p1)).dot(n) <= 1e-12 * scale * scale {
                    ring.remove(w);
                    changed = true;
                    break;
                }
            }
        }
        faces_pts.push((*n, *b, ring));
    }
    let mut used: Vec<usize> = faces_pts.iter().flat_map(|f| f.2.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let remap = |i: usize| used.iter().position(|&u| u == i).unwrap();
    let vertices: Vec<Point<D>> = used.iter().map(|&i| pts[i]).collect();
    let faces: Vec<Face<D>> = faces_pts
        .into_iter()
        .map(|(normal, offset, ring)| Face {
            normal,
            offset,
            verts: ring.into_iter().map(remap).collect(),
        })
        .collect();
    let mut edges: Vec<Edge> = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        for w in 0..f.verts.len() {
            let a = f.verts[w];
            let b = f.verts[(w + 1) % f.verts.len()];
            let key = (a.min(b), a.max(b));
            if let Some(e) = edges.iter_mut().find(|e| (e.a, e.b) == key) {
                e.faces[1] = fi;
            } else {
                edges.push(Edge {
                    a: key.0,
                    b: key.1,
                    faces: [fi, usize::MAX],
                });
            }
        }
    }
    if edges.iter().any(|e| e.faces[1] == usize::MAX) {
        return Err(Error::InvalidShape("hull facets do not close up".into()));
    }
    let mut vertex_faces = Vec::with_capacity(vertices.len());
    for (vi, v) in vertices.iter().enumerate() {
        let inc: Vec<usize> = (0..faces.len()).filter(|&f| faces[f].verts.contains(&vi)).collect();
        let axis = inc.iter().fold(Point::<D>::zeros(), |a, &f| a + faces[f].normal).normalize();
        let e1 = (faces[inc[0]].normal - axis * axis.dot(&faces[inc[0]].normal)).normalize();
        let e2 = cross3(&axis, &e1);
        let mut ang: Vec<(f64, usize)> = inc
            .iter()
            .map(|&f| {
                let n = faces[f].normal;
                (n.dot(&e2).atan2(n.dot(&e1)), f)
            })
            .collect();
        ang.sort_by(|a, b| a.0.total_cmp(&b.0));
        let _ = v;
        vertex_faces.push(ang.into_iter().map(|(_, f)| f).collect());
    }
    Ok(Polytope {
        vertices,
        faces,
        edges,
        vertex_faces,
    })
}
