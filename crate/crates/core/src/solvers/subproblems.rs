//! Inner problems solved by the corrective variants.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{columns, min_norm_lstsq, project_simplex, span_basis, sym_eigen_extremes};
use crate::objectives::SmoothObjective;

/// Stopping threshold on the projected-gradient mapping of the weight problem.
pub const HULL_TOL: f64 = 1e-10;
pub const HULL_MAX_ITER: usize = 100_000;

/// Stopping threshold on the span-restricted gradient.
pub const SPAN_GRAD_TOL: f64 = 1e-10;
pub const SPAN_MAX_ITER: usize = 100_000;

/// Nearest point of `conv(members)` to `b`, with convex weights over `members`.
pub fn project_onto_convex_hull(members: &[&DVector<f64>], b: &DVector<f64>) -> Result<(DVector<f64>, Vec<f64>)> {
    project_onto_convex_hull_from(members, b, None)
}

/// As [`project_onto_convex_hull`], warm-started from `start` when given.
pub fn project_onto_convex_hull_from(
    members: &[&DVector<f64>],
    b: &DVector<f64>,
    start: Option<&[f64]>,
) -> Result<(DVector<f64>, Vec<f64>)> {
    if members.is_empty() {
        return Err(Error::Domain("projection onto an empty hull".into()));
    }
    for m in members {
        crate::error::check_dim(b.len(), m.len())?;
    }
    // identical members share one weight, assigned back to the first occurrence
    let mut rep: Vec<usize> = Vec::with_capacity(members.len());
    let mut unique: Vec<usize> = Vec::new();
    for (i, m) in members.iter().enumerate() {
        match unique.iter().position(|&u| members[u] == *m) {
            Some(k) => rep.push(k),
            None => {
                rep.push(unique.len());
                unique.push(i);
            }
        }
    }
    let cols: Vec<&DVector<f64>> = unique.iter().map(|&i| members[i]).collect();
    let m = columns(&cols, b.len());
    let mut w0 = vec![0.0; unique.len()];
    match start {
        Some(s) if s.len() == members.len() => {
            for (i, v) in s.iter().enumerate() {
                w0[rep[i]] += v.max(0.0);
            }
            project_simplex(&mut w0);
        }
        _ => w0.iter_mut().for_each(|v| *v = 1.0 / unique.len() as f64),
    }
    let w = hull_weights(&m, b, w0)?;
    let point = &m * DVector::from_column_slice(&w);
    let mut out = vec![0.0; members.len()];
    for (k, &i) in unique.iter().enumerate() {
        out[i] = w[k];
    }
    Ok((point, out))
}

fn gradient_mapping(g: &DMatrix<f64>, mtb: &DVector<f64>, w: &[f64], step: f64) -> f64 {
    let wv = DVector::from_column_slice(w);
    let grad = g * &wv - mtb;
    let mut probe: Vec<f64> = w.iter().zip(grad.iter()).map(|(a, d)| a - step * d).collect();
    project_simplex(&mut probe);
    let diff: f64 = w.iter().zip(&probe).map(|(a, p)| (a - p).powi(2)).sum::<f64>().sqrt();
    diff / step
}

/// Wolfe's minimum-norm-point method on the shifted points `m_i − b`.
/// Keeps an affinely independent corral; `None` when it stalls numerically.
fn min_norm_point(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<Vec<f64>> {
    let n = m.ncols();
    let pts: Vec<DVector<f64>> = (0..n).map(|i| m.column(i) - b).collect();
    let scale = pts.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let start = (0..n).min_by(|&a, &c| pts[a].norm_squared().total_cmp(&pts[c].norm_squared()))?;
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = pts[start].clone();
    for _ in 0..(10 * n + 50) {
        let j = (0..n).min_by(|&a, &c| x.dot(&pts[a]).total_cmp(&x.dot(&pts[c])))?;
        if x.norm_squared() - x.dot(&pts[j]) <= 1e-13 * scale || corral.contains(&j) {
            let mut w = vec![0.0; n];
            for (k, &i) in corral.iter().enumerate() {
                w[i] = lambda[k];
            }
            return Some(w);
        }
        corral.push(j);
        lambda.push(0.0);
        loop {
            let k = corral.len();
            // affine minimum-norm point p₀ + D·c, solved on the differences to keep the conditioning
            let p0 = &pts[corral[0]];
            let diffs = DMatrix::from_fn(b.len(), k - 1, |r, c| pts[corral[c + 1]][r] - p0[r]);
            let (_, c, _) = min_norm_lstsq(&diffs, &(-p0));
            let mut alpha = vec![1.0 - c.sum()];
            alpha.extend(c.iter().copied());
            if alpha.iter().any(|v| !v.is_finite()) {
                return None;
            }
            if alpha.iter().all(|&v| v > 1e-14) {
                lambda = alpha;
                break;
            }
            let mut theta: f64 = 1.0;
            for a in 0..k {
                if alpha[a] <= 1e-14 {
                    theta = theta.min(lambda[a] / (lambda[a] - alpha[a]));
                }
            }
            for a in 0..k {
                lambda[a] += theta * (alpha[a] - lambda[a]);
            }
            let mut keep = Vec::new();
            let mut kept = Vec::new();
            for a in 0..k {
                if lambda[a] > 1e-15 {
                    keep.push(corral[a]);
                    kept.push(lambda[a]);
                }
            }
            if keep.is_empty() {
                return None;
            }
            let total: f64 = kept.iter().sum();
            corral = keep;
            lambda = kept.into_iter().map(|v| v / total).collect();
        }
        let next = corral.iter().zip(&lambda).fold(DVector::zeros(b.len()), |acc, (&i, &l)| acc + &pts[i] * l);
        if next.norm_squared() >= x.norm_squared() {
            // no progress left at this precision
            let mut w = vec![0.0; n];
            for (k, &i) in corral.iter().enumerate() {
                w[i] = lambda[k];
            }
            return Some(w);
        }
        x = next;
    }
    None
}

fn hull_weights(m: &DMatrix<f64>, b: &DVector<f64>, w0: Vec<f64>) -> Result<Vec<f64>> {
    let n = m.ncols();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let g = m.transpose() * m;
    let mtb = m.transpose() * b;
    let (_, lmax) = sym_eigen_extremes(&g);
    if lmax <= 0.0 {
        // every member is the origin
        return Ok(w0);
    }
    let step = 1.0 / lmax;
    // the gradient mapping scales like ‖M‖·(‖M‖ + ‖b‖)
    let tol = HULL_TOL * (lmax.sqrt() * (lmax.sqrt() + b.norm())).max(1.0);
    if let Some(p) = min_norm_point(m, b) {
        if gradient_mapping(&g, &mtb, &p, step) <= tol {
            return Ok(p);
        }
    }
    let objective = |w: &[f64]| {
        let wv = DVector::from_column_slice(w);
        0.5 * wv.dot(&(&g * &wv)) - mtb.dot(&wv)
    };
    let mut w = w0;
    let mut y = w.clone();
    let mut momentum = 1.0f64;
    let mut best = (f64::INFINITY, w.clone());
    for _ in 0..HULL_MAX_ITER {
        let res = gradient_mapping(&g, &mtb, &w, step);
        if res < best.0 {
            best = (res, w.clone());
        }
        if res <= tol {
            return Ok(w);
        }
        let yv = DVector::from_column_slice(&y);
        let grad = &g * &yv - &mtb;
        let mut next: Vec<f64> = y.iter().zip(grad.iter()).map(|(a, d)| a - step * d).collect();
        project_simplex(&mut next);
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        if objective(&next) > objective(&w) {
            // adaptive restart
            momentum = 1.0;
            y = w.clone();
            continue;
        }
        let beta = (momentum - 1.0) / next_momentum;
        y = next.iter().zip(&w).map(|(a, p)| a + beta * (a - p)).collect();
        w = next;
        momentum = next_momentum;
    }
    Err(Error::NonConvergence { iterations: HULL_MAX_ITER, residual: best.0 })
}

/// Orthogonal projection of `b` onto `lin(members)`, with minimum-norm coefficients.
pub fn least_squares_over_span(members: &[&DVector<f64>], b: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if members.is_empty() {
        return Err(Error::Domain("least squares over an empty span".into()));
    }
    for m in members {
        crate::error::check_dim(b.len(), m.len())?;
    }
    let cols = columns(members, b.len());
    let (point, coeffs, _) = min_norm_lstsq(&cols, b);
    Ok((point, coeffs))
}

/// Minimizer of `obj` over `lin(members)`, starting from `start` (assumed in the span).
///
/// Quadratics are solved through the normal equations in an orthonormal span
/// basis; other objectives by gradient descent with step `1/L`.
pub fn minimize_over_span(
    obj: &dyn SmoothObjective,
    members: &[&DVector<f64>],
    start: &DVector<f64>,
) -> Result<DVector<f64>> {
    let basis = span_basis(&columns(members, obj.dim()));
    if basis.ncols() == 0 {
        return Ok(DVector::zeros(obj.dim()));
    }
    if let Some(q) = obj.as_quadratic() {
        let reduced = basis.transpose() * q.q() * &basis;
        let rhs = basis.transpose() * q.b();
        let (_, c, _) = min_norm_lstsq(&reduced, &rhs);
        return Ok(&basis * c);
    }
    let step = 1.0 / obj.smoothness();
    let mut c = basis.transpose() * start;
    let mut last = f64::INFINITY;
    for _ in 0..SPAN_MAX_ITER {
        let x = &basis * &c;
        let g = basis.transpose() * obj.gradient(&x);
        last = g.norm();
        if last <= SPAN_GRAD_TOL {
            return Ok(x);
        }
        c.axpy(-step, &g, 1.0);
    }
    Err(Error::NonConvergence { iterations: SPAN_MAX_ITER, residual: last })
}
