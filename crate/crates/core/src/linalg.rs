//! Small dense linear-algebra helpers shared by the solvers and geometry code.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-12;

pub fn columns(vectors: &[&DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Minimum-norm least-squares solution of `cols * c ≈ b`, returned with the fitted point.
pub fn min_norm_lstsq(cols: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>, usize) {
    if cols.ncols() == 0 {
        return (DVector::zeros(b.len()), DVector::zeros(0), 0);
    }
    let svd = cols.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let mut coeffs = DVector::zeros(cols.ncols());
    let mut rank = 0;
    let mut point = DVector::zeros(b.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        rank += 1;
        let uk = u.column(k);
        let proj = uk.dot(b);
        point.axpy(proj, &uk, 1.0);
        coeffs.axpy(proj / s, &v_t.row(k).transpose(), 1.0);
    }
    (point, coeffs, rank)
}

/// Orthonormal basis (as columns) of the span of `cols`.
pub fn span_basis(cols: &DMatrix<f64>) -> DMatrix<f64> {
    if cols.ncols() == 0 {
        return DMatrix::zeros(cols.nrows(), 0);
    }
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > RANK_TOL * smax && s > 0.0)
        .map(|(k, _)| k)
        .collect();
    let mut basis = DMatrix::zeros(cols.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        basis.set_column(j, &u.column(k));
    }
    basis
}

/// Smallest nonzero singular value of `cols` (zero when the matrix is zero).
pub fn smallest_nonzero_singular(cols: &DMatrix<f64>) -> f64 {
    if cols.ncols() == 0 {
        return 0.0;
    }
    let sv = cols.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter()
        .cloned()
        .filter(|&s| s > RANK_TOL * smax && s > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(smax.max(0.0))
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn sym_eigen_extremes(q: &DMatrix<f64>) -> (f64, f64) {
    let eig = q.clone().symmetric_eigen();
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let candidate = (cum - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            tau = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Endpoints are compared against the interior result, winning ties, so a boundary minimum is returned exactly.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx <= best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
