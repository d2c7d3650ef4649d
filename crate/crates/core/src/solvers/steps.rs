//! Single iterations of every algorithm. Each step maps a state to the next
//! state and reports what it did in a [`StepInfo`].

use nalgebra::DVector;

use super::subproblems::{least_squares_over_span, minimize_over_span, project_onto_convex_hull_from};
use crate::atoms::AtomSet;
use crate::error::{check_dim, Error, Result};
use crate::linalg::golden_section;
use crate::lmo::{self, LmoConfig, LmoMode, LmoResult};
use crate::objectives::{Quadratic, SmoothObjective};

/// Golden-section tolerance for the line-search variant.
pub const LINE_SEARCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    /// Index into the atom set; `None` for the initial point.
    pub index: Option<usize>,
    pub point: DVector<f64>,
}

/// Atoms selected so far, with the initial point as member 0. Duplicates are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    members: Vec<Member>,
    /// Convex weights over `members` from the last hull projection.
    weights: Option<Vec<f64>>,
    /// Span coefficients over `members` from the last span solve.
    coeffs: Option<Vec<f64>>,
}

impl ActiveSet {
    pub fn new(x0: &DVector<f64>) -> Self {
        ActiveSet { members: vec![Member { index: None, point: x0.clone() }], weights: Some(vec![1.0]), coeffs: Some(vec![1.0]) }
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    pub fn points(&self) -> Vec<&DVector<f64>> {
        self.members.iter().map(|m| &m.point).collect()
    }

    fn with(&self, set: &AtomSet, index: usize) -> ActiveSet {
        let mut next = self.clone();
        next.members.push(Member { index: Some(index), point: set.get(index).coords().clone() });
        next.weights = next.weights.map(|mut w| {
            w.push(0.0);
            w
        });
        next.coeffs = None;
        next
    }
}

/// What a step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Step size; `None` for updates that re-solve over the active set.
    pub gamma: Option<f64>,
    pub atom_index: usize,
    /// `⟨∇f(x_t), z_t⟩`
    pub inner: f64,
    pub atom_norm: f64,
    /// `⟨−∇f(x_t), z_t − x_t⟩`, Frank-Wolfe family only.
    pub dual_gap: Option<f64>,
    pub certified_delta: Option<f64>,
    /// A zero denominator forced `γ = 0`.
    pub stationary: bool,
}

fn info(res: &LmoResult, gamma: Option<f64>, dual_gap: Option<f64>, stationary: bool) -> StepInfo {
    StepInfo {
        gamma,
        atom_index: res.index,
        inner: res.inner,
        atom_norm: res.atom.norm(),
        dual_gap,
        certified_delta: res.certified_delta,
        stationary,
    }
}

fn check_mode(cfg: &LmoConfig, allowed: LmoMode) -> Result<()> {
    if cfg.mode == LmoMode::Exact || cfg.mode == allowed {
        Ok(())
    } else {
        Err(Error::Domain(format!("oracle mode {:?} does not fit this algorithm", cfg.mode)))
    }
}

fn fw_oracle(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    set: &AtomSet,
    cfg: &LmoConfig,
    t: usize,
) -> Result<(DVector<f64>, LmoResult, f64)> {
    check_dim(set.dim(), x.len())?;
    check_mode(cfg, LmoMode::ApproxFw)?;
    let grad = obj.gradient(x);
    let res = lmo::query(set, &grad, x, &cfg.for_call(t as u64))?;
    let gap = -(res.inner - grad.dot(x));
    Ok((grad, res, gap))
}

fn mp_oracle(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    set: &AtomSet,
    cfg: &LmoConfig,
    t: usize,
) -> Result<(DVector<f64>, LmoResult)> {
    check_dim(set.dim(), x.len())?;
    check_mode(cfg, LmoMode::ApproxMp)?;
    let grad = obj.gradient(x);
    let res = lmo::query(set, &grad, x, &cfg.for_call(t as u64))?;
    if res.atom.norm() == 0.0 {
        return Err(Error::DegenerateAtom(res.index));
    }
    Ok((grad, res))
}

fn least_squares_target(obj: &Quadratic) -> Result<&DVector<f64>> {
    obj.target().ok_or_else(|| Error::Unsupported("matching pursuit needs a least-squares objective".into()))
}

fn symmetric_view(set: &AtomSet) -> std::borrow::Cow<'_, AtomSet> {
    if set.is_symmetric() {
        std::borrow::Cow::Borrowed(set)
    } else {
        std::borrow::Cow::Owned(set.symmetrize())
    }
}

/// Matching pursuit on `½‖y − x‖²` over `A ∪ −A`.
pub fn mp_step(obj: &Quadratic, x: &DVector<f64>, set: &AtomSet) -> Result<(DVector<f64>, StepInfo)> {
    let y = least_squares_target(obj)?;
    let sym = symmetric_view(set);
    let (_, res) = mp_oracle(obj, x, &sym, &LmoConfig::exact(), 0)?;
    let z = res.atom.coords();
    let gamma = (y - x).dot(z) / z.norm_squared();
    Ok((x + z * gamma, info(&res, Some(gamma), None, false)))
}

/// Orthogonal matching pursuit: refit `y` over the span of the selected atoms.
pub fn omp_step(
    obj: &Quadratic,
    _x: &DVector<f64>,
    active: &ActiveSet,
    set: &AtomSet,
) -> Result<(DVector<f64>, ActiveSet, StepInfo)> {
    let y = least_squares_target(obj)?;
    let sym = symmetric_view(set);
    let (_, res) = mp_oracle(obj, _x, &sym, &LmoConfig::exact(), 0)?;
    let mut next = active.with(&sym, res.index);
    let (point, coeffs) = least_squares_over_span(&next.points(), y)?;
    next.coeffs = Some(coeffs.iter().cloned().collect());
    Ok((point, next, info(&res, None, None, false)))
}

fn clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Frank-Wolfe step. Variants: 0 fixed `2/(t+2)`, 1 line search,
/// 2 `gap/(L·diam²)`, 3 `gap/(L‖z − x‖²)`.
pub fn fw_step(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    set: &AtomSet,
    variant: u8,
    t: usize,
    cfg: &LmoConfig,
) -> Result<(DVector<f64>, StepInfo)> {
    let (_, res, gap) = fw_oracle(obj, x, set, cfg, t)?;
    let dir = res.atom.coords() - x;
    let l = obj.smoothness();
    let mut stationary = false;
    let gamma = match variant {
        0 => 2.0 / (t as f64 + 2.0),
        1 => golden_section(|g| obj.value(&(x + &dir * g)), 0.0, 1.0, LINE_SEARCH_TOL).0,
        2 | 3 => {
            let denom = l * if variant == 2 { set.diameter().powi(2) } else { dir.norm_squared() };
            if denom > 0.0 {
                clip(gap / denom)
            } else {
                stationary = true;
                0.0
            }
        }
        v => return Err(Error::Domain(format!("unknown Frank-Wolfe variant {v}"))),
    };
    Ok((x + &dir * gamma, info(&res, Some(gamma), Some(gap), stationary)))
}

/// Norm-corrective Frank-Wolfe. Variant 0 minimizes the surrogate on the
/// segment towards `z_t`, variant 1 over `conv(S ∪ {z_t})`.
pub fn ncfw_step(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    active: &ActiveSet,
    set: &AtomSet,
    variant: u8,
    t: usize,
    cfg: &LmoConfig,
) -> Result<(DVector<f64>, ActiveSet, StepInfo)> {
    let (grad, res, gap) = fw_oracle(obj, x, set, cfg, t)?;
    let l = obj.smoothness();
    let mut next = active.with(set, res.index);
    match variant {
        0 => {
            let dir = res.atom.coords() - x;
            let denom = l * dir.norm_squared();
            let (gamma, stationary) = if denom > 0.0 { (clip(gap / denom), false) } else { (0.0, true) };
            next.weights = next.weights.map(|w| {
                let mut w: Vec<f64> = w.iter().map(|v| v * (1.0 - gamma)).collect();
                *w.last_mut().expect("nonempty") += gamma;
                w
            });
            Ok((x + dir * gamma, next, info(&res, Some(gamma), Some(gap), stationary)))
        }
        1 => {
            let b = x - grad / l;
            let (point, w) = project_onto_convex_hull_from(&next.points(), &b, next.weights.as_deref())?;
            next.weights = Some(w);
            Ok((point, next, info(&res, None, Some(gap), false)))
        }
        v => Err(Error::Domain(format!("unknown norm-corrective Frank-Wolfe variant {v}"))),
    }
}

/// Generalized matching pursuit. Variant 0 takes the closed-form step along
/// `z_t`, variant 1 projects the surrogate target onto `lin(S ∪ {z_t})`.
pub fn gmp_step(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    active: &ActiveSet,
    set: &AtomSet,
    variant: u8,
    t: usize,
    cfg: &LmoConfig,
) -> Result<(DVector<f64>, ActiveSet, StepInfo)> {
    let (grad, res) = mp_oracle(obj, x, set, cfg, t)?;
    let l = obj.smoothness();
    let mut next = active.with(set, res.index);
    let z = res.atom.coords();
    match variant {
        0 => {
            // b − x = −∇f/L, so γ = ⟨b − x, z⟩/‖z‖²
            let gamma = -grad.dot(z) / (l * z.norm_squared());
            next.coeffs = active.coeffs.as_ref().map(|c| {
                let mut c = c.clone();
                c.push(gamma);
                c
            });
            Ok((x + z * gamma, next, info(&res, Some(gamma), None, false)))
        }
        1 => {
            let b = x - grad / l;
            let (point, coeffs) = least_squares_over_span(&next.points(), &b)?;
            next.coeffs = Some(coeffs.iter().cloned().collect());
            Ok((point, next, info(&res, None, None, false)))
        }
        v => Err(Error::Domain(format!("unknown matching-pursuit variant {v}"))),
    }
}

/// Frank-Wolfe with the curvature-constant step `clip[gap / Cf]`.
pub fn affine_fw_step(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    set: &AtomSet,
    cf: f64,
    t: usize,
    cfg: &LmoConfig,
) -> Result<(DVector<f64>, StepInfo)> {
    if !(cf > 0.0) {
        return Err(Error::Domain(format!("curvature constant must be positive, got {cf}")));
    }
    let (_, res, gap) = fw_oracle(obj, x, set, cfg, t)?;
    let gamma = clip(gap / cf);
    let dir = res.atom.coords() - x;
    Ok((x + dir * gamma, info(&res, Some(gamma), Some(gap), false)))
}

/// Matching pursuit with the curvature-constant step. Variant 1 takes
/// `γ = ρ²⟨−∇f, z⟩ / CfMP` along `z`; variant 2 minimizes `f` over `lin(S ∪ {z})`.
#[allow(clippy::too_many_arguments)]
pub fn affine_gmp_step(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    active: &ActiveSet,
    set: &AtomSet,
    rho: f64,
    cf_mp: f64,
    variant: u8,
    t: usize,
    cfg: &LmoConfig,
) -> Result<(DVector<f64>, ActiveSet, StepInfo)> {
    if !(cf_mp > 0.0) {
        return Err(Error::Domain(format!("curvature constant must be positive, got {cf_mp}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let (grad, res) = mp_oracle(obj, x, set, cfg, t)?;
    let mut next = active.with(set, res.index);
    let z = res.atom.coords();
    match variant {
        1 => {
            let gamma = rho * rho * (-grad.dot(z)) / cf_mp;
            next.coeffs = active.coeffs.as_ref().map(|c| {
                let mut c = c.clone();
                c.push(gamma);
                c
            });
            Ok((x + z * gamma, next, info(&res, Some(gamma), None, false)))
        }
        2 => {
            let point = minimize_over_span(obj, &next.points(), x)?;
            let (_, coeffs) = least_squares_over_span(&next.points(), &point)?;
            next.coeffs = Some(coeffs.iter().cloned().collect());
            Ok((point, next, info(&res, None, None, false)))
        }
        v => Err(Error::Domain(format!("unknown affine matching-pursuit variant {v}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionFlavor {
    Fw,
    Mp,
}

/// Re-solves the surrogate over the current active set without adding an atom.
pub fn atom_correction(
    obj: &dyn SmoothObjective,
    x: &DVector<f64>,
    active: &ActiveSet,
    flavor: CorrectionFlavor,
) -> Result<(DVector<f64>, ActiveSet)> {
    if active.is_empty() {
        return Err(Error::Domain("atom correction needs a nonempty active set".into()));
    }
    let b = x - obj.gradient(x) / obj.smoothness();
    let mut next = active.clone();
    let point = match flavor {
        CorrectionFlavor::Fw => {
            let (p, w) = project_onto_convex_hull_from(&active.points(), &b, active.weights.as_deref())?;
            next.weights = Some(w);
            p
        }
        CorrectionFlavor::Mp => {
            let (p, c) = least_squares_over_span(&active.points(), &b)?;
            next.coeffs = Some(c.iter().cloned().collect());
            p
        }
    };
    // the surrogate minimum can only lose to x itself by rounding
    if obj.value(&point) > obj.value(x) {
        return Ok((x.clone(), active.clone()));
    }
    Ok((point, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{l1_vertices, random_unit_sphere};
    use crate::objectives::LogSumExp;
    use nalgebra::DMatrix;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn ls(y: &[f64]) -> Quadratic {
        Quadratic::least_squares(v(y)).unwrap()
    }

    #[test]
    fn mp_examples() {
        let f = ls(&[1.0, 1.0]);
        let set = l1_vertices(2).unwrap();
        let (x1, s) = mp_step(&f, &v(&[0.0, 0.0]), &set).unwrap();
        assert_eq!((s.atom_index, s.gamma), (0, Some(1.0)));
        assert_eq!(x1, v(&[1.0, 0.0]));
        assert_eq!(f.value(&x1), 0.5);
        let (x, s) = mp_step(&f, &v(&[1.0, 1.0]), &set).unwrap();
        assert_eq!(s.gamma, Some(0.0));
        assert_eq!(x, v(&[1.0, 1.0]));

        let f = ls(&[1.0, 1.0, 1.0]);
        let set = l1_vertices(3).unwrap();
        let mut x = DVector::zeros(3);
        let mut eps = vec![f.value(&x)];
        for _ in 0..3 {
            x = mp_step(&f, &x, &set).unwrap().0;
            eps.push(f.value(&x));
        }
        assert_eq!(eps, vec![1.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn mp_residual_orthogonal_to_atom() {
        let set = random_unit_sphere(4, 6, 1).unwrap();
        let f = ls(&[0.3, -1.0, 2.0, 0.5]);
        let (x, s) = mp_step(&f, &DVector::zeros(4), &set).unwrap();
        let z = set.symmetrize().get(s.atom_index).coords().clone();
        assert!((f.target().unwrap() - x).dot(&z).abs() < 1e-14);
    }

    #[test]
    fn omp_examples() {
        let f = ls(&[1.0, 2.0]);
        let e1 = AtomSet::from_rows(&[vec![1.0, 0.0]], false).unwrap();
        let x0 = DVector::zeros(2);
        let (x1, _, _) = omp_step(&f, &x0, &ActiveSet::new(&x0), &e1).unwrap();
        assert!((x1 - v(&[1.0, 0.0])).norm() < 1e-14);

        let set = l1_vertices(2).unwrap();
        let (mp, _) = mp_step(&f, &x0, &set).unwrap();
        let (omp, act, _) = omp_step(&f, &x0, &ActiveSet::new(&x0), &set).unwrap();
        assert!((mp - &omp).norm() < 1e-14);
        let (x2, _, _) = omp_step(&f, &omp, &act, &set).unwrap();
        assert!((x2 - v(&[1.0, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn fw_examples() {
        let f = ls(&[1.0, 1.0]);
        let set = l1_vertices(2).unwrap();
        let x0 = DVector::zeros(2);
        let cfg = LmoConfig::exact();
        let (x1, s) = fw_step(&f, &x0, &set, 0, 0, &cfg).unwrap();
        assert_eq!((x1.clone(), s.gamma), (v(&[1.0, 0.0]), Some(1.0)));
        let (x1, s) = fw_step(&f, &x0, &set, 3, 0, &cfg).unwrap();
        assert_eq!((x1, s.gamma, s.dual_gap), (v(&[1.0, 0.0]), Some(1.0), Some(1.0)));
        let (x1, s) = fw_step(&f, &x0, &set, 2, 0, &cfg).unwrap();
        assert_eq!((x1, s.gamma), (v(&[0.25, 0.0]), Some(0.25)));
        let (x1, _) = fw_step(&f, &x0, &set, 1, 0, &cfg).unwrap();
        assert!((x1 - v(&[1.0, 0.0])).norm() < 1e-9);
        assert!(fw_step(&f, &x0, &set, 7, 0, &cfg).is_err());
    }

    #[test]
    fn fw_v3_at_selected_atom_is_stationary() {
        let f = ls(&[2.0, 0.0]);
        let set = l1_vertices(2).unwrap();
        let (x, s) = fw_step(&f, &v(&[1.0, 0.0]), &set, 3, 4, &LmoConfig::exact()).unwrap();
        assert!(s.stationary);
        assert_eq!((x, s.gamma), (v(&[1.0, 0.0]), Some(0.0)));
    }

    #[test]
    fn ncfw_examples() {
        let f = ls(&[0.4, -0.9, 0.3]);
        let set = l1_vertices(3).unwrap();
        let x0 = v(&[0.0, 0.0, 1.0]);
        let act = ActiveSet::new(&x0);
        let cfg = LmoConfig::exact();
        let (a, _, _) = ncfw_step(&f, &x0, &act, &set, 0, 0, &cfg).unwrap();
        let (b, _) = fw_step(&f, &x0, &set, 3, 0, &cfg).unwrap();
        assert!((a - b).norm() < 1e-12);

        // b = (0.3, 0.3) with S = {e1, e2}
        let g = ls(&[0.3, 0.3]);
        let set = AtomSet::from_rows(&[vec![0.0, 1.0]], false).unwrap();
        let x0 = v(&[1.0, 0.0]);
        let (x1, act, s) = ncfw_step(&g, &x0, &ActiveSet::new(&x0), &set, 1, 0, &cfg).unwrap();
        assert!(s.gamma.is_none());
        assert!((x1 - v(&[0.5, 0.5])).norm() < 1e-12);
        assert_eq!(act.len(), 2);

        // interior target is reached exactly
        let h = ls(&[0.1, -0.2, 0.05]);
        let set = l1_vertices(3).unwrap();
        let mut x = v(&[1.0, 0.0, 0.0]);
        let mut act = ActiveSet::new(&x);
        for t in 0..6 {
            let (nx, na, _) = ncfw_step(&h, &x, &act, &set, 1, t, &cfg).unwrap();
            x = nx;
            act = na;
        }
        assert!((x - v(&[0.1, -0.2, 0.05])).norm() < 1e-10);
    }

    #[test]
    fn gmp_matches_mp_and_omp_on_least_squares() {
        let f = ls(&[0.3, -1.2, 0.8, 2.0]);
        let set = random_unit_sphere(4, 7, 11).unwrap().symmetrize();
        let cfg = LmoConfig::exact();
        let x0 = DVector::zeros(4);
        let (mut xm, mut xg) = (x0.clone(), x0.clone());
        let (mut xo, mut xg1) = (x0.clone(), x0.clone());
        let (mut ao, mut ag) = (ActiveSet::new(&x0), ActiveSet::new(&x0));
        let mut ag0 = ActiveSet::new(&x0);
        for t in 0..10 {
            xm = mp_step(&f, &xm, &set).unwrap().0;
            let r = gmp_step(&f, &xg, &ag0, &set, 0, t, &cfg).unwrap();
            xg = r.0;
            ag0 = r.1;
            assert!((&xm - &xg).norm() <= 1e-12);
            let r = omp_step(&f, &xo, &ao, &set).unwrap();
            xo = r.0;
            ao = r.1;
            let r = gmp_step(&f, &xg1, &ag, &set, 1, t, &cfg).unwrap();
            xg1 = r.0;
            ag = r.1;
            assert!((&xo - &xg1).norm() <= 1e-12);
        }
    }

    #[test]
    fn gmp_descends_on_log_sum_exp() {
        let f = LogSumExp::new(vec![v(&[1.0, 0.5]), v(&[-0.3, 2.0]), v(&[0.0, -1.0])], 0.1).unwrap();
        let set = l1_vertices(2).unwrap();
        let mut x = DVector::zeros(2);
        let mut act = ActiveSet::new(&x);
        for t in 0..30 {
            let (nx, na, _) = gmp_step(&f, &x, &act, &set, (t % 2) as u8, t, &LmoConfig::exact()).unwrap();
            assert!(f.value(&nx) <= f.value(&x) + 1e-12);
            x = nx;
            act = na;
        }
    }

    #[test]
    fn degenerate_atom_is_an_error() {
        let f = ls(&[1.0, 0.0]);
        let set = AtomSet::from_rows(&[vec![0.0, 0.0]], false).unwrap();
        let x0 = DVector::zeros(2);
        let r = gmp_step(&f, &x0, &ActiveSet::new(&x0), &set, 0, 0, &LmoConfig::exact());
        assert!(matches!(r, Err(Error::DegenerateAtom(0))));
    }

    #[test]
    fn affine_fw_examples() {
        let f = ls(&[1.0, 1.0]);
        let set = l1_vertices(2).unwrap();
        let x0 = DVector::zeros(2);
        let cfg = LmoConfig::exact();
        let (x1, s) = affine_fw_step(&f, &x0, &set, 4.0, 0, &cfg).unwrap();
        assert_eq!((x1, s.gamma), (v(&[0.25, 0.0]), Some(0.25)));
        let (x, s) = affine_fw_step(&f, &v(&[1.0, 1.0]), &l1_vertices(2).unwrap().scale(2.0).unwrap(), 16.0, 0, &cfg).unwrap();
        assert_eq!((x, s.gamma), (v(&[1.0, 1.0]), Some(0.0)));
        assert!(affine_fw_step(&f, &x0, &set, 0.0, 0, &cfg).is_err());
    }

    #[test]
    fn affine_gmp_examples() {
        let f = ls(&[0.7, -0.4]);
        let set = l1_vertices(2).unwrap();
        let x0 = DVector::zeros(2);
        let act = ActiveSet::new(&x0);
        let cfg = LmoConfig::exact();
        let rho = 2.0;
        let (a, _, s) = affine_gmp_step(&f, &x0, &act, &set, rho, rho * rho, 1, 0, &cfg).unwrap();
        let (b, _) = mp_step(&f, &x0, &set).unwrap();
        assert!((a - b).norm() < 1e-15);
        assert_eq!(s.gamma, Some(0.7));
        let (a, _, _) = affine_gmp_step(&f, &x0, &act, &set, rho, 4.0, 2, 0, &cfg).unwrap();
        let (b, _, _) = omp_step(&f, &x0, &act, &set).unwrap();
        assert!((a - b).norm() < 1e-14);
        let q = Quadratic::new(DMatrix::identity(2, 2), DVector::zeros(2), 0.0).unwrap();
        let (x, _, s) = affine_gmp_step(&q, &x0, &act, &set, 1.0, 1.0, 1, 0, &cfg).unwrap();
        assert_eq!((x, s.gamma), (x0.clone(), Some(0.0)));
        assert!(affine_gmp_step(&q, &x0, &act, &set, 1.0, -1.0, 1, 0, &cfg).is_err());
    }

    #[test]
    fn atom_correction_properties() {
        let f = LogSumExp::new(vec![v(&[1.0, 0.5, 0.0]), v(&[-0.3, 2.0, 1.0]), v(&[0.0, -1.0, 0.2])], 0.2).unwrap();
        let set = l1_vertices(3).unwrap();
        let cfg = LmoConfig::exact();
        let x0 = v(&[0.0, 0.0, 1.0]);
        let mut x = x0.clone();
        let mut act = ActiveSet::new(&x0);
        for t in 0..4 {
            let r = ncfw_step(&f, &x, &act, &set, 0, t, &cfg).unwrap();
            x = r.0;
            act = r.1;
        }
        let (xc, ac) = atom_correction(&f, &x, &act, CorrectionFlavor::Fw).unwrap();
        assert!(f.value(&xc) <= f.value(&x) + 1e-12);
        let w = ac.weights().unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12 && w.iter().all(|&v| v >= 0.0));

        let mut x = DVector::zeros(3);
        let mut act = ActiveSet::new(&x);
        for t in 0..2 {
            let r = gmp_step(&f, &x, &act, &set, 0, t, &cfg).unwrap();
            x = r.0;
            act = r.1;
        }
        let (xc, _) = atom_correction(&f, &x, &act, CorrectionFlavor::Mp).unwrap();
        assert!(f.value(&xc) <= f.value(&x) + 1e-12);
        let resid = &x - f.gradient(&x) / f.smoothness() - &xc;
        for m in act.members() {
            assert!(resid.dot(&m.point).abs() <= 1e-10);
        }
    }
}
