//! Geometric constants of atom sets and the rate bounds built from them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomSet, HalfDictionary};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{golden_section, min_norm_lstsq, smallest_nonzero_singular, span_basis};
use crate::lmo::lmo_exact;
use crate::objectives::{linearization_gap, SmoothObjective};
use crate::solvers::project_onto_convex_hull;

/// `max_z ⟨d/‖d‖, z⟩`.
pub fn directional_width(set: &AtomSet, d: &DVector<f64>) -> Result<f64> {
    check_dim(set.dim(), d.len())?;
    let n = d.norm();
    if n == 0.0 {
        return Err(Error::Domain("direction must be nonzero".into()));
    }
    Ok(set.atoms().iter().map(|a| a.dot(d)).fold(f64::NEG_INFINITY, f64::max) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdwOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for MdwOptions {
    fn default() -> Self {
        MdwOptions { restarts: 200, iterations: 300, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdwMethod {
    /// The span is a line; both directions are enumerated.
    Line,
    /// Planar span: angular sweep refined by golden-section search.
    PlanarSweep,
    /// Multi-start projected subgradient on the sphere (an upper bound).
    MultiStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdwEstimate {
    pub value: f64,
    pub method: MdwMethod,
    pub span_dimension: usize,
    pub restarts: usize,
    /// `[guaranteed lower bound, estimate]`
    pub bracket: [f64; 2],
    /// Spread of the per-start results (multi-start only).
    pub dispersion: f64,
    /// Unit direction in the ambient space attaining `value`.
    pub direction: Vec<f64>,
}

/// Atoms in coordinates of an orthonormal basis of their span.
struct SpanCoords {
    basis: DMatrix<f64>,
    coords: Vec<DVector<f64>>,
}

impl SpanCoords {
    fn new(set: &AtomSet) -> Self {
        let basis = span_basis(&set.matrix());
        let coords = set.atoms().iter().map(|a| basis.transpose() * a.coords()).collect();
        SpanCoords { basis, coords }
    }

    fn width(&self, u: &DVector<f64>) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, c) in self.coords.iter().enumerate() {
            let v = c.dot(u);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Solves `⟨v, c_i⟩ = 1` over the near-active atoms and keeps `v/‖v‖` if it is better.
    fn polish(&self, u: &DVector<f64>) -> (f64, DVector<f64>) {
        let (w, _) = self.width(u);
        let mut best = (w, u.clone());
        if w <= 0.0 {
            return best;
        }
        let k = u.len();
        for tau in [1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9] {
            let active: Vec<&DVector<f64>> =
                self.coords.iter().filter(|c| c.dot(u) >= w - tau * w.max(1e-3)).collect();
            let mut m = DMatrix::zeros(active.len(), k);
            for (r, c) in active.iter().enumerate() {
                m.set_row(r, &c.transpose());
            }
            let (_, v, _) = min_norm_lstsq(&m, &DVector::from_element(active.len(), 1.0));
            let n = v.norm();
            if n > 0.0 && n.is_finite() {
                let cand = v / n;
                let (wc, _) = self.width(&cand);
                if wc < best.0 {
                    best = (wc, cand);
                }
            }
        }
        best
    }
}

fn unit_from_angle(phi: f64) -> DVector<f64> {
    DVector::from_vec(vec![phi.cos(), phi.sin()])
}

/// Minimal directional width over unit directions in `lin(A)`.
pub fn mdw(set: &AtomSet) -> Result<MdwEstimate> {
    mdw_with(set, &MdwOptions::default())
}

pub fn mdw_with(set: &AtomSet, opts: &MdwOptions) -> Result<MdwEstimate> {
    let sc = SpanCoords::new(set);
    let k = sc.basis.ncols();
    if k == 0 {
        return Err(Error::Domain("all atoms are zero; the span is trivial".into()));
    }
    let lower = if set.is_symmetric() {
        smallest_nonzero_singular(&set.matrix()) / (set.len() as f64).sqrt()
    } else {
        -set.radius()
    };
    let finish = |value: f64, u: DVector<f64>, method, restarts, dispersion| MdwEstimate {
        value,
        method,
        span_dimension: k,
        restarts,
        bracket: [lower.min(value), value],
        dispersion,
        direction: (&sc.basis * u).iter().cloned().collect(),
    };
    match k {
        1 => {
            let (up, down) = (DVector::from_element(1, 1.0), DVector::from_element(1, -1.0));
            let (wu, wd) = (sc.width(&up).0, sc.width(&down).0);
            Ok(if wu <= wd { finish(wu, up, MdwMethod::Line, 0, 0.0) } else { finish(wd, down, MdwMethod::Line, 0, 0.0) })
        }
        2 => {
            const SWEEP: usize = 10_000;
            let step = std::f64::consts::TAU / SWEEP as f64;
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..SWEEP {
                let phi = i as f64 * step;
                let w = sc.width(&unit_from_angle(phi)).0;
                if w < best.0 {
                    best = (w, phi);
                }
            }
            let (phi, w) = golden_section(|p| sc.width(&unit_from_angle(p)).0, best.1 - step, best.1 + step, 1e-13);
            let (wp, up) = sc.polish(&unit_from_angle(phi));
            Ok(if wp < w {
                finish(wp, up, MdwMethod::PlanarSweep, 0, 0.0)
            } else {
                finish(w, unit_from_angle(phi), MdwMethod::PlanarSweep, 0, 0.0)
            })
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut starts: Vec<DVector<f64>> = (0..opts.restarts)
                .map(|_| DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng)))
                .collect();
            starts.extend(sc.coords.iter().filter(|c| c.norm() > 0.0).cloned());
            let radius = sc.coords.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let eta0 = 0.5 / radius;
            let mut results: Vec<(f64, DVector<f64>)> = Vec::with_capacity(starts.len());
            for s in starts {
                let n = s.norm();
                if n == 0.0 {
                    continue;
                }
                let mut u = s / n;
                let mut best = (f64::INFINITY, u.clone());
                for it in 0..opts.iterations {
                    let (w, j) = sc.width(&u);
                    if w < best.0 {
                        best = (w, u.clone());
                    }
                    let c = &sc.coords[j];
                    let g = c - &u * c.dot(&u);
                    if g.norm() < 1e-15 {
                        break;
                    }
                    u -= g * (eta0 / ((it + 1) as f64).sqrt());
                    u /= u.norm();
                }
                results.push(sc.polish(&best.1));
            }
            let lo = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            let hi = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
            let count = results.len();
            let best = results.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one start");
            Ok(finish(best.0, best.1, MdwMethod::MultiStart, count, hi - lo))
        }
    }
}

/// Radius of the largest ball around the origin inside `conv(A)` within `lin(A)`.
/// Only symmetric sets are supported, where it equals the minimal directional width.
pub fn effective_inradius(set: &AtomSet) -> Result<f64> {
    if !set.is_symmetric() {
        return Err(Error::Unsupported("non-symmetric inradius".into()));
    }
    Ok(mdw(set)?.value)
}

fn check_unit(half: &HalfDictionary) -> Result<()> {
    for (i, a) in half.atoms().iter().enumerate() {
        if (a.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("atom {i} has norm {} but coherence needs unit atoms", a.norm())));
        }
    }
    Ok(())
}

fn abs_gram(half: &HalfDictionary) -> Vec<Vec<f64>> {
    let atoms = half.atoms();
    atoms.iter().map(|a| atoms.iter().map(|b| a.dot(b.coords()).abs()).collect()).collect()
}

/// Cumulative coherence `μ(B, m)`: for each atom the sum of its `m` largest
/// absolute inner products with other atoms, maximized over atoms.
pub fn cumulative_coherence(half: &HalfDictionary, m: usize) -> Result<f64> {
    check_unit(half)?;
    let n = half.len();
    if m == 0 || m >= n {
        return Err(Error::Domain(format!("coherence order must satisfy 1 ≤ m < {n}, got {m}")));
    }
    let g = abs_gram(half);
    let mut best: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        let mut others: Vec<f64> = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v).collect();
        others.sort_by(|a, b| b.total_cmp(a));
        best = best.max(others[..m].iter().sum());
    }
    Ok(best)
}

/// Largest number of index subsets [`cumulative_coherence_enumerated`] will visit.
pub const COHERENCE_BUDGET: f64 = 1e6;

/// Reference implementation enumerating every subset of size `m`.
pub fn cumulative_coherence_enumerated(half: &HalfDictionary, m: usize) -> Result<f64> {
    check_unit(half)?;
    let n = half.len();
    if m == 0 || m >= n {
        return Err(Error::Domain(format!("coherence order must satisfy 1 ≤ m < {n}, got {m}")));
    }
    let subsets = (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    if subsets > COHERENCE_BUDGET {
        return Err(Error::Domain(format!("C({n}, {m}) subsets exceed the enumeration budget")));
    }
    let g = abs_gram(half);
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: f64 = 0.0;
    loop {
        for i in (0..n).filter(|i| !idx.contains(i)) {
            best = best.max(idx.iter().map(|&j| g[i][j]).sum());
        }
        // next combination in lexicographic order
        let mut k = m;
        while k > 0 && idx[k - 1] == n - m + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return Ok(best);
        }
        idx[k - 1] += 1;
        for j in k..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    pub value: f64,
    /// Computed in closed form rather than sampled.
    pub exact: bool,
    pub samples: usize,
    /// Smoothness-based ceiling the value must not exceed.
    pub ceiling: f64,
}

const DEFAULT_SAMPLES: usize = 2000;

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Curvature constant over `conv(A)`: exact pair maximum for quadratics, sampled otherwise.
pub fn curvature_cf(obj: &dyn SmoothObjective, set: &AtomSet, samples: usize, seed: u64) -> Result<CurvatureEstimate> {
    check_dim(set.dim(), obj.dim())?;
    let ceiling = obj.smoothness() * set.diameter().powi(2);
    if let Some(q) = obj.as_quadratic() {
        let a = set.matrix();
        let g = a.transpose() * q.q() * &a;
        let mut value: f64 = 0.0;
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                value = value.max(g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]);
            }
        }
        return Ok(CurvatureEstimate { value, exact: true, samples: 0, ceiling });
    }
    let samples = if samples == 0 { DEFAULT_SAMPLES } else { samples };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value: f64 = 0.0;
    for _ in 0..samples {
        let x = set.combine(&dirichlet(&mut rng, set.len()));
        let s = set.get(rng.random_range(0..set.len())).coords();
        for k in 0..=8 {
            let gamma = 0.5f64.powi(k);
            let y = &x + (s - &x) * gamma;
            value = value.max(2.0 / (gamma * gamma) * linearization_gap(obj, &x, &y));
        }
    }
    Ok(CurvatureEstimate { value, exact: false, samples, ceiling })
}

/// Matching-pursuit curvature constant over `ρ·conv(A)` with steps along `ρA`.
pub fn curvature_cf_mp(
    obj: &dyn SmoothObjective,
    set: &AtomSet,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<CurvatureEstimate> {
    check_dim(set.dim(), obj.dim())?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let ceiling = obj.smoothness() * rho * rho * set.radius().powi(2);
    if let Some(q) = obj.as_quadratic() {
        let value = set.atoms().iter().map(|a| a.dot(&(q.q() * a.coords()))).fold(0.0, f64::max) * rho * rho;
        return Ok(CurvatureEstimate { value, exact: true, samples: 0, ceiling });
    }
    let samples = if samples == 0 { DEFAULT_SAMPLES } else { samples };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value: f64 = 0.0;
    for _ in 0..samples {
        let x = set.combine(&dirichlet(&mut rng, set.len())) * rho;
        let s = set.get(rng.random_range(0..set.len())).coords() * rho;
        for k in 0..=8 {
            let gamma = 0.5f64.powi(k);
            let y = &x + &s * gamma;
            value = value.max(2.0 / (gamma * gamma) * linearization_gap(obj, &x, &y));
        }
    }
    Ok(CurvatureEstimate { value, exact: false, samples, ceiling })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    /// Smallest sampled value (an upper estimate of the infimum).
    pub sampled: f64,
    /// `μ·ρ²·mdw²`, a guaranteed lower bound over `ρ·conv(A)`.
    pub floor: f64,
    /// `μ·mdw²`, the same bound for the unscaled set.
    pub floor_unscaled: f64,
    pub pairs: usize,
}

/// Sampled affine-invariant strong convexity over `ρ·conv(A)`.
pub fn mu_f_mp(obj: &dyn SmoothObjective, set: &AtomSet, rho: f64, samples: usize, seed: u64) -> Result<MuEstimate> {
    check_dim(set.dim(), obj.dim())?;
    let mu = obj
        .strong_convexity()
        .filter(|m| *m > 0.0)
        .ok_or_else(|| Error::Domain("objective must declare a positive strong convexity".into()))?;
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let scaled = set.scale(rho)?;
    let mdw_value = mdw(set)?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = f64::INFINITY;
    let mut pairs = 0;
    for _ in 0..samples {
        let x = scaled.combine(&dirichlet(&mut rng, set.len()));
        let xs = scaled.combine(&dirichlet(&mut rng, set.len()));
        let grad = obj.gradient(&x);
        let num = -grad.dot(&(&xs - &x));
        if num <= 0.0 {
            continue;
        }
        let s = lmo_exact(&scaled, &grad)?;
        let den = -s.inner;
        if den <= 0.0 {
            continue;
        }
        let gamma = num / den;
        sampled = sampled.min(2.0 / (gamma * gamma) * linearization_gap(obj, &x, &xs));
        pairs += 1;
    }
    if pairs == 0 {
        return Err(Error::Domain("no admissible sample pairs".into()));
    }
    Ok(MuEstimate { sampled, floor: mu * rho * rho * mdw_value.powi(2), floor_unscaled: mu * mdw_value.powi(2), pairs })
}

/// Relative precision of the atomic-norm bisection.
pub const ATOMIC_NORM_TOL: f64 = 1e-9;

/// Gauge of `conv(A)` by bisection on membership; `+∞` outside `lin(A)`.
pub fn atomic_norm(set: &AtomSet, x: &DVector<f64>) -> Result<f64> {
    check_dim(set.dim(), x.len())?;
    if !set.is_symmetric() {
        return Err(Error::Domain("atomic norm bisection needs a symmetric set".into()));
    }
    let nx = x.norm();
    if nx == 0.0 {
        return Ok(0.0);
    }
    let atoms: Vec<&DVector<f64>> = set.atoms().iter().map(|a| a.coords()).collect();
    let (p, _) = crate::solvers::least_squares_over_span(&atoms, x)?;
    if (&p - x).norm() > 1e-8 * nx.max(1.0) {
        return Ok(f64::INFINITY);
    }
    let sigma = smallest_nonzero_singular(&set.matrix());
    let mut hi = nx * (set.len() as f64).sqrt() / sigma;
    let mut lo = 0.0;
    let inside = |c: f64| -> Result<bool> {
        let target = x / c;
        let (q, _) = project_onto_convex_hull(&atoms, &target)?;
        Ok((q - target).norm() <= 1e-9)
    };
    while !inside(hi)? {
        hi *= 2.0;
    }
    while hi - lo > ATOMIC_NORM_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Gauge of `conv(A ∪ {0})` as the linear program `min Σλ` with `Σλ_i a_i = x`, `λ ≥ 0`.
/// Equals [`atomic_norm`] for symmetric sets; `+∞` when infeasible.
pub fn atomic_norm_lp(set: &AtomSet, x: &DVector<f64>) -> Result<f64> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    check_dim(set.dim(), x.len())?;
    let nx = x.norm();
    if nx == 0.0 {
        return Ok(0.0);
    }
    let basis = span_basis(&set.matrix());
    let xc = basis.transpose() * x;
    if (&basis * &xc - x).norm() > 1e-8 * nx.max(1.0) {
        return Ok(f64::INFINITY);
    }
    let coords: Vec<DVector<f64>> = set.atoms().iter().map(|a| basis.transpose() * a.coords()).collect();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = coords.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for r in 0..basis.ncols() {
        let row: Vec<_> = vars.iter().zip(&coords).map(|(v, c)| (*v, c[r])).collect();
        lp.add_constraint(&row[..], ComparisonOp::Eq, xc[r]);
    }
    match lp.solve() {
        Ok(sol) => Ok(sol.objective()),
        Err(minilp::Error::Infeasible) => Ok(f64::INFINITY),
        Err(e) => Err(Error::Domain(format!("atomic norm program failed: {e}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Frank-Wolfe, smoothness form: `2((1/δ)L·diam² + ε₀)/(δt + 2)`.
    #[serde(alias = "sublinear_fw", alias = "thm1")]
    SublinearFw,
    /// Matching pursuit, smoothness form: `2((2/δ)L·ρ²·r² + ε₀)/((δ/2)t + 2)`.
    #[serde(alias = "sublinear_mp")]
    SublinearMp,
    /// Matching pursuit per-step factor `1 − δ²μ·mdw²/(L·r²)`.
    #[serde(alias = "linear_mp")]
    LinearMp,
    /// Per-step floor `1 − (W²/‖z‖²)(2L − μ)/μ`.
    #[serde(alias = "lower_bound")]
    LowerBound,
    /// Frank-Wolfe, curvature form: `2((1/δ)Cf + ε₀)/(δt + 2)`.
    #[serde(alias = "sublinear_affine_fw")]
    SublinearAffineFw,
    /// Matching pursuit, curvature form: `2((2/δ)CfMP + ε₀)/((δ/2)t + 2)`.
    #[serde(alias = "sublinear_affine_mp")]
    SublinearAffineMp,
    /// Matching pursuit, curvature form, per-step factor `1 − δ²·μ_MP/CfMP`.
    #[serde(alias = "linear_affine")]
    LinearAffine,
}

impl BoundKind {
    pub fn is_linear(self) -> bool {
        matches!(self, BoundKind::LinearMp | BoundKind::LinearAffine)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(default, rename = "mu", skip_serializing_if = "Option::is_none")]
    pub strong_convexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdw: Option<f64>,
    #[serde(default, rename = "Cf", skip_serializing_if = "Option::is_none")]
    pub cf: Option<f64>,
    #[serde(default, rename = "CfMP", skip_serializing_if = "Option::is_none")]
    pub cf_mp: Option<f64>,
    #[serde(default, rename = "muFMP", skip_serializing_if = "Option::is_none")]
    pub mu_f_mp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub kind: BoundKind,
    pub params: RateParams,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingParameter(name))
}

/// Validates that `params` carries what `kind` needs.
pub fn rate_bound(kind: BoundKind, params: RateParams) -> Result<RateBound> {
    let delta = params.delta.unwrap_or(1.0);
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    match kind {
        BoundKind::SublinearFw => {
            need(params.smoothness, "L")?;
            need(params.diameter, "diameter")?;
            need(params.epsilon0, "epsilon0")?;
        }
        BoundKind::SublinearMp => {
            need(params.smoothness, "L")?;
            need(params.rho, "rho")?;
            need(params.radius, "radius")?;
            need(params.epsilon0, "epsilon0")?;
        }
        BoundKind::LinearMp => {
            need(params.smoothness, "L")?;
            need(params.strong_convexity, "mu")?;
            need(params.mdw, "mdw")?;
            need(params.radius, "radius")?;
        }
        BoundKind::LowerBound => {
            need(params.smoothness, "L")?;
            need(params.strong_convexity, "mu")?;
        }
        BoundKind::SublinearAffineFw => {
            need(params.cf, "Cf")?;
            need(params.epsilon0, "epsilon0")?;
        }
        BoundKind::SublinearAffineMp => {
            need(params.cf_mp, "CfMP")?;
            need(params.epsilon0, "epsilon0")?;
        }
        BoundKind::LinearAffine => {
            need(params.cf_mp, "CfMP")?;
            need(params.mu_f_mp, "muFMP")?;
        }
    }
    Ok(RateBound { kind, params })
}

impl RateBound {
    fn delta(&self) -> f64 {
        self.params.delta.unwrap_or(1.0)
    }

    /// Bound on `ε_t` for the sublinear kinds.
    pub fn value(&self, t: usize) -> Result<f64> {
        let p = &self.params;
        let d = self.delta();
        let t = t as f64;
        match self.kind {
            BoundKind::SublinearFw => {
                let c = need(p.smoothness, "L")? * need(p.diameter, "diameter")?.powi(2);
                Ok(2.0 * (c / d + need(p.epsilon0, "epsilon0")?) / (d * t + 2.0))
            }
            BoundKind::SublinearMp => {
                let c = need(p.smoothness, "L")? * need(p.rho, "rho")?.powi(2) * need(p.radius, "radius")?.powi(2);
                Ok(2.0 * (2.0 * c / d + need(p.epsilon0, "epsilon0")?) / (0.5 * d * t + 2.0))
            }
            BoundKind::SublinearAffineFw => {
                Ok(2.0 * (need(p.cf, "Cf")? / d + need(p.epsilon0, "epsilon0")?) / (d * t + 2.0))
            }
            BoundKind::SublinearAffineMp => {
                Ok(2.0 * (2.0 * need(p.cf_mp, "CfMP")? / d + need(p.epsilon0, "epsilon0")?) / (0.5 * d * t + 2.0))
            }
            k => Err(Error::Domain(format!("{k:?} is a per-step bound"))),
        }
    }

    /// Contraction factor for the linear kinds.
    pub fn factor(&self) -> Result<f64> {
        let p = &self.params;
        let d2 = self.delta().powi(2);
        match self.kind {
            BoundKind::LinearMp => {
                let num = need(p.strong_convexity, "mu")? * need(p.mdw, "mdw")?.powi(2);
                let den = need(p.smoothness, "L")? * need(p.radius, "radius")?.powi(2);
                Ok(1.0 - d2 * num / den)
            }
            BoundKind::LinearAffine => Ok(1.0 - d2 * need(p.mu_f_mp, "muFMP")? / need(p.cf_mp, "CfMP")?),
            k => Err(Error::Domain(format!("{k:?} has no constant factor"))),
        }
    }

    /// Per-step lower-bound factor from the width along `−∇f(x_t)` and the selected atom's norm.
    pub fn floor(&self, width: f64, atom_norm: f64) -> Result<f64> {
        if self.kind != BoundKind::LowerBound {
            return Err(Error::Domain(format!("{:?} is not a lower bound", self.kind)));
        }
        let l = need(self.params.smoothness, "L")?;
        let mu = need(self.params.strong_convexity, "mu")?;
        Ok(1.0 - (width * width / (atom_norm * atom_norm)) * (2.0 * l - mu) / mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub mdw: MdwOptions,
    pub coherence_m: Vec<usize>,
    pub rho: f64,
    pub samples: usize,
    /// Fail instead of noting it when the inradius is unavailable.
    pub require_inradius: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { mdw: MdwOptions::default(), coherence_m: Vec::new(), rho: 1.0, samples: 10_000, require_inradius: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub mdw: MdwEstimate,
    pub radius: f64,
    pub diameter: f64,
    pub effective_inradius: Option<f64>,
    /// `(m, μ(B, m))` pairs.
    pub coherence_profile: Vec<(usize, f64)>,
    #[serde(rename = "Cf")]
    pub cf: Option<CurvatureEstimate>,
    #[serde(rename = "CfMP")]
    pub cf_mp: Option<CurvatureEstimate>,
    #[serde(rename = "muFMP")]
    pub mu_f_mp: Option<MuEstimate>,
    pub notes: Vec<String>,
}

pub fn geometry_report(set: &AtomSet, obj: Option<&dyn SmoothObjective>, opts: &ReportOptions) -> Result<GeometryReport> {
    let mdw_est = mdw_with(set, &opts.mdw)?;
    let mut notes = Vec::new();
    let effective_inradius = if set.is_symmetric() {
        Some(mdw_est.value)
    } else if opts.require_inradius {
        return Err(Error::Unsupported("non-symmetric inradius".into()));
    } else {
        notes.push("effective inradius omitted: the set is not symmetric".to_string());
        None
    };
    let mut coherence_profile = Vec::new();
    if !opts.coherence_m.is_empty() {
        let half = if set.is_symmetric() {
            HalfDictionary::from_symmetric(set)?
        } else {
            HalfDictionary::new(set.atoms().to_vec())?
        };
        for &m in &opts.coherence_m {
            coherence_profile.push((m, cumulative_coherence(&half, m)?));
        }
    }
    let (cf, cf_mp, mu_f_mp) = match obj {
        Some(f) => {
            let mu = if f.strong_convexity().is_some_and(|m| m > 0.0) && mdw_est.value > 0.0 {
                Some(mu_f_mp(f, set, opts.rho, opts.samples, opts.mdw.seed)?)
            } else {
                notes.push("affine strong convexity omitted: needs μ > 0 and a positive mdw".into());
                None
            };
            (
                Some(curvature_cf(f, set, 0, opts.mdw.seed)?),
                Some(curvature_cf_mp(f, set, opts.rho, 0, opts.mdw.seed)?),
                mu,
            )
        }
        None => (None, None, None),
    };
    Ok(GeometryReport {
        radius: set.radius(),
        diameter: set.diameter(),
        mdw: mdw_est,
        effective_inradius,
        coherence_profile,
        cf,
        cf_mp,
        mu_f_mp,
        notes,
    })
}
