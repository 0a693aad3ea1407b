//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};

pub type Point<const D: usize> = SVector<f64, D>;
pub type Mat<const D: usize> = SMatrix<f64, D, D>;

/// Builds a point from a slice; panics if the length is wrong.
pub fn point<const D: usize>(xs: &[f64]) -> Point<D> {
    assert_eq!(xs.len(), D, "expected {D} coordinates");
    Point::<D>::from_column_slice(xs)
}

/// Orthonormal basis of `u⊥` for a unit vector `u`. Entries `0..D-1` are
/// meaningful; the trailing slot is zero when `D = 2`.
pub fn tangent_frame<const D: usize>(u: &Point<D>) -> [Point<D>; 2] {
    match D {
        2 => {
            let t = point::<D>(&[-u[1], u[0]]);
            [t, Point::<D>::zeros()]
        }
        3 => {
            // pick the coordinate axis least aligned with u
            let mut axis = 0;
            for i in 1..3 {
                if u[i].abs() < u[axis].abs() {
                    axis = i;
                }
            }
            let mut e = Point::<D>::zeros();
            e[axis] = 1.0;
            let t1 = (e - u * u.dot(&e)).normalize();
            let t2 = cross3(u, &t1);
            [t1, t2]
        }
        _ => unreachable!("only d = 2, 3 are supported"),
    }
}

pub fn cross3<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    debug_assert_eq!(D, 3);
    point::<D>(&[
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// `|v_1 ∧ … ∧ v_k|`, the square root of the Gram determinant.
pub fn wedge_norm(vs: &[DVector<f64>]) -> f64 {
    let k = vs.len();
    if k == 0 {
        return 1.0;
    }
    let g = DMatrix::from_fn(k, k, |i, j| vs[i].dot(&vs[j]));
    g.determinant().max(0.0).sqrt()
}

/// Square root and inverse square root of a symmetric positive definite
/// matrix.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let v = &eig.eigenvectors;
    let s = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let si = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some((v * s * v.transpose(), v * si * v.transpose()))
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Quasi-uniform points on the unit sphere in R³.
pub fn fibonacci_sphere<const D: usize>(n: usize) -> Vec<Point<D>> {
    debug_assert_eq!(D, 3);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            point::<D>(&[r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

/// Uniform directions: a circle grid in the plane, a Fibonacci sphere in
/// space.
pub fn direction_grid<const D: usize>(n: usize) -> Vec<Point<D>> {
    match D {
        2 => (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                point::<D>(&[t.cos(), t.sin()])
            })
            .collect(),
        _ => fibonacci_sphere::<D>(n),
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues<const D: usize>(m: &Mat<D>) -> Vec<f64> {
    let dm = DMatrix::from_column_slice(D, D, m.as_slice());
    let mut ev: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn to_dvec<const D: usize>(p: &Point<D>) -> DVector<f64> {
    DVector::from_column_slice(p.as_slice())
}

/// Concatenates two points into a vector of `R^{2d}`.
pub fn pair<const D: usize>(a: &Point<D>, b: &Point<D>) -> DVector<f64> {
    DVector::from_iterator(2 * D, a.iter().chain(b.iter()).copied())
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r *= (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Elementary symmetric functions `S_0..S_k` of `xs` (with `S_0 = 1`).
pub fn elementary_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; xs.len() + 1];
    e[0] = 1.0;
    for (m, &x) in xs.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-14);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn elementary_symmetric_small_cases() {
        assert_eq!(elementary_symmetric(&[3.0, 1.0]), vec![1.0, 4.0, 3.0]);
        assert_eq!(elementary_symmetric(&[1.0, 1.0]), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let u = point::<3>(&[0.3, -0.4, 0.2]).normalize();
        let [t1, t2] = tangent_frame(&u);
        assert!(t1.dot(&u).abs() < 1e-14 && t2.dot(&u).abs() < 1e-14);
        assert!(t1.dot(&t2).abs() < 1e-14);
        assert!((t1.norm() - 1.0).abs() < 1e-14 && (t2.norm() - 1.0).abs() < 1e-14);
    }
}
