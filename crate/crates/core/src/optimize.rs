//! Damped Newton minimisation in low-dimensional charts (k ≤ 2), used for
//! conjugate ascent, Gauss-map inversion and boundary projections.
//!
//! Callers supply the objective together with its exact gradient in chart
//! coordinates; the Hessian is a central difference of that gradient.

use nalgebra::{Matrix2, Vector2};

use crate::linalg::{tangent_frame, Point};

#[derive(Debug, Clone, Copy)]
pub struct Minimum<P> {
    pub arg: P,
    pub value: f64,
    pub grad_norm: f64,
    pub iters: usize,
}

/// One damped Newton step from `s = 0` for a chart objective on `R^k`.
/// Returns the accepted step and the new value, or `None` if no decrease
/// could be found.
fn newton_step<F>(k: usize, f: &F, f0: f64, g0: Vector2<f64>, hstep: f64) -> Option<(Vector2<f64>, f64)>
where
    F: Fn(&Vector2<f64>) -> (f64, Vector2<f64>),
{
    let mut h = Matrix2::<f64>::identity();
    for j in 0..k {
        let mut e = Vector2::zeros();
        e[j] = hstep;
        let gp = f(&e).1;
        let gm = f(&(-e)).1;
        for i in 0..k {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * hstep);
        }
    }
    if k == 1 {
        h[(0, 1)] = 0.0;
        h[(1, 0)] = 0.0;
        h[(1, 1)] = 1.0;
    }
    let hs = (h + h.transpose()) * 0.5;
    let pd = if k == 1 {
        hs[(0, 0)] > 0.0
    } else {
        hs[(0, 0)] > 0.0 && hs.determinant() > 0.0
    };
    let mut dir = if pd {
        hs.lu().solve(&(-g0)).unwrap_or(-g0)
    } else {
        -g0
    };
    if k == 1 {
        dir[1] = 0.0;
    }
    if !pd {
        // gradient direction, scaled to a modest chart step
        let n = dir.norm();
        if n > 0.0 {
            dir *= 0.1 / n;
        }
    }
    let slack = 1e-14 * (1.0 + f0.abs());
    let mut t = 1.0;
    for _ in 0..40 {
        let s = dir * t;
        let (fv, _) = f(&s);
        if fv.is_finite() && fv <= f0 + slack {
            return Some((s, fv));
        }
        t *= 0.5;
    }
    None
}

/// Minimises `obj` over the unit sphere `S^{d-1}` starting at `u0`.
/// `obj(u)` returns the value and an ambient gradient at `u`.
pub fn sphere_minimize<const D: usize, F>(
    u0: &Point<D>,
    obj: F,
    tol: f64,
    budget: usize,
) -> Minimum<Point<D>>
where
    F: Fn(&Point<D>) -> (f64, Point<D>),
{
    let k = D - 1;
    let mut u = u0.normalize();
    let (mut val, mut g) = obj(&u);
    let mut iters = 0;
    let mut gnorm = f64::INFINITY;
    while iters < budget {
        iters += 1;
        let frame = tangent_frame(&u);
        let center = u;
        let chart = |s: &Vector2<f64>| -> (f64, Vector2<f64>) {
            let mut w = center;
            for i in 0..k {
                w += frame[i] * s[i];
            }
            let len = w.norm();
            let us = w / len;
            let (v, ga) = obj(&us);
            let mut gs = Vector2::zeros();
            for i in 0..k {
                let du = (frame[i] - us * us.dot(&frame[i])) / len;
                gs[i] = ga.dot(&du);
            }
            (v, gs)
        };
        let mut g0 = Vector2::zeros();
        for i in 0..k {
            g0[i] = g.dot(&frame[i]);
        }
        gnorm = g0.norm();
        if gnorm <= tol {
            break;
        }
        match newton_step(k, &chart, val, g0, 1e-6) {
            Some((s, v)) => {
                let mut w = center;
                for i in 0..k {
                    w += frame[i] * s[i];
                }
                u = w.normalize();
                let (v2, g2) = obj(&u);
                val = v2.min(v).max(v2);
                g = g2;
                if s.norm() < 1e-15 {
                    let mut g1 = Vector2::zeros();
                    for i in 0..k {
                        g1[i] = g.dot(&frame[i]);
                    }
                    gnorm = g1.norm();
                    break;
                }
            }
            None => break,
        }
    }
    Minimum {
        arg: u,
        value: val,
        grad_norm: gnorm,
        iters,
    }
}

/// Minimises `obj(origin + Σ s_i basis_i)` over `s ∈ R^k`, `k = basis.len()`.
/// `obj` returns the value and the ambient gradient.
pub fn affine_minimize<const D: usize, F>(
    origin: &Point<D>,
    basis: &[Point<D>],
    s0: Vector2<f64>,
    obj: F,
    tol: f64,
    budget: usize,
) -> Minimum<Vector2<f64>>
where
    F: Fn(&Point<D>) -> (f64, Point<D>),
{
    let k = basis.len();
    debug_assert!(k <= 2);
    let at = |s: &Vector2<f64>| {
        let mut p = *origin;
        for i in 0..k {
            p += basis[i] * s[i];
        }
        p
    };
    let mut s = s0;
    let (mut val, mut g) = obj(&at(&s));
    let mut iters = 0;
    let mut gnorm = f64::INFINITY;
    let scale = basis.iter().map(|b| b.norm()).fold(0.0, f64::max).max(1e-300);
    while iters < budget {
        iters += 1;
        let mut g0 = Vector2::zeros();
        for i in 0..k {
            g0[i] = g.dot(&basis[i]);
        }
        gnorm = g0.norm();
        if gnorm <= tol * scale {
            break;
        }
        let base = s;
        let chart = |ds: &Vector2<f64>| -> (f64, Vector2<f64>) {
            let (v, ga) = obj(&at(&(base + ds)));
            let mut gs = Vector2::zeros();
            for i in 0..k {
                gs[i] = ga.dot(&basis[i]);
            }
            (v, gs)
        };
        match newton_step(k, &chart, val, g0, 1e-6 / scale) {
            Some((ds, _)) => {
                s = base + ds;
                let (v2, g2) = obj(&at(&s));
                val = v2;
                g = g2;
                if ds.norm() * scale < 1e-16 {
                    break;
                }
            }
            None => break,
        }
    }
    Minimum {
        arg: s,
        value: val,
        grad_norm: gnorm,
        iters,
    }
}
