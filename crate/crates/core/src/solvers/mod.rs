//! Greedy solvers over atom sets and the run driver that records traces.

mod steps;
mod subproblems;

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use steps::{
    affine_fw_step, affine_gmp_step, atom_correction, fw_step, gmp_step, mp_step, ncfw_step, omp_step, ActiveSet,
    CorrectionFlavor, Member, StepInfo, LINE_SEARCH_TOL,
};
pub use subproblems::{
    least_squares_over_span, minimize_over_span, project_onto_convex_hull, project_onto_convex_hull_from, HULL_MAX_ITER,
    HULL_TOL, SPAN_GRAD_TOL, SPAN_MAX_ITER,
};

use crate::atoms::AtomSet;
use crate::error::{check_dim, Error, Result};
use crate::geometry;
use crate::lmo::LmoConfig;
use crate::objectives::SmoothObjective;

/// Residual allowed when checking that `x0` lies in the feasible region.
pub const START_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Mp,
    Omp,
    Fw,
    Ncfw,
    Gmp,
    AffineFw,
    AffineGmp,
}

impl Algorithm {
    /// Frank-Wolfe family: iterates stay in `conv(A)`.
    pub fn is_fw_family(self) -> bool {
        matches!(self, Algorithm::Fw | Algorithm::Ncfw | Algorithm::AffineFw)
    }

    fn check_variant(self, variant: u8) -> Result<()> {
        let ok = match self {
            Algorithm::Mp | Algorithm::Omp | Algorithm::AffineFw => variant == 0,
            Algorithm::Fw => variant <= 3,
            Algorithm::Ncfw | Algorithm::Gmp => variant <= 1,
            Algorithm::AffineGmp => variant == 1 || variant == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("variant {variant} is not defined for {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(rename = "Cf", default, skip_serializing_if = "Option::is_none")]
    pub cf: Option<f64>,
    #[serde(rename = "CfMP", default, skip_serializing_if = "Option::is_none")]
    pub cf_mp: Option<f64>,
}

/// Solver configuration as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub variant: u8,
    #[serde(default)]
    pub lmo: LmoConfig,
    #[serde(rename = "T")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default)]
    pub constants: Constants,
    /// Re-solve over the active set after each step (norm-corrective and matching-pursuit variants).
    #[serde(default)]
    pub correction: bool,
}

impl SolverSpec {
    pub fn new(algorithm: Algorithm, variant: u8, iterations: usize) -> Self {
        SolverSpec {
            algorithm,
            variant,
            lmo: LmoConfig::exact(),
            iterations,
            seed: 0,
            rho: None,
            constants: Constants::default(),
            correction: false,
        }
    }

    pub fn with_lmo(mut self, lmo: LmoConfig) -> Self {
        self.lmo = lmo;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }
}

/// State of the run at iteration `t`, plus the step taken from it (absent on the last record).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub f_value: f64,
    pub subopt: Option<f64>,
    pub grad_norm: f64,
    /// Directional width of the atom set along `−∇f(x_t)`.
    pub width: Option<f64>,
    pub gamma: Option<f64>,
    pub atom_index: Option<usize>,
    pub atom_norm: Option<f64>,
    pub dual_gap: Option<f64>,
    pub certified_delta: Option<f64>,
    #[serde(default)]
    pub stationary: bool,
    /// Running upper bound on the atomic norm of `x_t`.
    pub rho_bound: f64,
    /// Convex weights over the atoms reproducing `x_t` (Frank-Wolfe family).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub point: Vec<f64>,
    /// Obtained from a long reference run rather than an exact solve.
    pub approximate: bool,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConstants {
    pub smoothness: f64,
    pub strong_convexity: Option<f64>,
    pub diameter: f64,
    pub radius: f64,
    #[serde(rename = "Cf", default, skip_serializing_if = "Option::is_none")]
    pub cf: Option<f64>,
    #[serde(rename = "CfMP", default, skip_serializing_if = "Option::is_none")]
    pub cf_mp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub spec: SolverSpec,
    pub x0: Vec<f64>,
    pub records: Vec<StepRecord>,
    pub final_x: Vec<f64>,
    pub reference: Option<Reference>,
    pub constants: TraceConstants,
    /// Largest atomic norm over the reference point and all iterates.
    pub rho_posthoc: Option<f64>,
    /// Set when a supplied `rho` is below `rho_posthoc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_violation: Option<String>,
}

impl Trace {
    pub fn subopts(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.subopt).collect()
    }

    pub fn epsilon0(&self) -> Option<f64> {
        self.records.first().and_then(|r| r.subopt)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Per-step table with columns `t,f,subopt,gamma,atom,dual_gap`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "f", "subopt", "gamma", "atom", "dual_gap"])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                format!("{:e}", r.f_value),
                opt(r.subopt),
                opt(r.gamma),
                r.atom_index.map(|i| i.to_string()).unwrap_or_default(),
                opt(r.dual_gap),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn resolve_constants(
    spec: &SolverSpec,
    obj: &dyn SmoothObjective,
    set: &AtomSet,
) -> Result<(Option<f64>, Option<f64>)> {
    match spec.algorithm {
        Algorithm::AffineFw => {
            let cf = match spec.constants.cf {
                Some(c) => c,
                None if obj.as_quadratic().is_some() => geometry::curvature_cf(obj, set, 0, 0)?.value,
                None => return Err(Error::MissingParameter("Cf")),
            };
            Ok((Some(cf), None))
        }
        Algorithm::AffineGmp => {
            let rho = spec.rho.ok_or(Error::MissingParameter("rho"))?;
            let cf_mp = match spec.constants.cf_mp {
                Some(c) => c,
                None if obj.as_quadratic().is_some() => geometry::curvature_cf_mp(obj, set, rho, 0, 0)?.value,
                None => return Err(Error::MissingParameter("CfMP")),
            };
            Ok((None, Some(cf_mp)))
        }
        _ => Ok((spec.constants.cf, spec.constants.cf_mp)),
    }
}

/// Minimizer used for suboptimality: over `conv(A)` for the Frank-Wolfe family, `lin(A)` otherwise.
fn reference_point(
    spec: &SolverSpec,
    obj: &dyn SmoothObjective,
    set: &AtomSet,
    x0: &DVector<f64>,
) -> Result<Reference> {
    let atoms: Vec<&DVector<f64>> = set.atoms().iter().map(|a| a.coords()).collect();
    let make = |point: DVector<f64>, approximate: bool, source: &str| Reference {
        value: obj.value(&point),
        point: point.iter().cloned().collect(),
        approximate,
        source: source.into(),
    };
    if spec.algorithm.is_fw_family() {
        if let Some(y) = obj.as_quadratic().and_then(|q| q.target()) {
            let (p, _) = project_onto_convex_hull(&atoms, y)?;
            return Ok(make(p, false, "projection of the target onto conv(A)"));
        }
        if let Some(h) = obj.minimizer_hint() {
            let (p, _) = project_onto_convex_hull(&atoms, &h.point)?;
            if (&p - &h.point).norm() <= START_TOL {
                return Ok(make(h.point, false, "objective minimizer"));
            }
        }
        let horizon = 10 * spec.iterations.max(100);
        let long = SolverSpec::new(Algorithm::Fw, 1, horizon).with_lmo(LmoConfig::exact());
        let x = run_steps(&long, obj, set, x0, None)?.0;
        Ok(make(x, true, "long line-search Frank-Wolfe run"))
    } else {
        let sym;
        let used = if matches!(spec.algorithm, Algorithm::Mp | Algorithm::Omp) {
            sym = set.symmetrize();
            &sym
        } else {
            set
        };
        let atoms: Vec<&DVector<f64>> = used.atoms().iter().map(|a| a.coords()).collect();
        match minimize_over_span(obj, &atoms, x0) {
            Ok(p) => Ok(make(p, false, "minimizer over lin(A)")),
            Err(Error::NonConvergence { .. }) => {
                let horizon = 10 * spec.iterations.max(100);
                let long = SolverSpec::new(Algorithm::Gmp, 1, horizon);
                let x = run_steps(&long, obj, used, x0, None)?.0;
                Ok(make(x, true, "long corrective matching-pursuit run"))
            }
            Err(e) => Err(e),
        }
    }
}

fn compose_weights(active: &ActiveSet, x0_weights: &[f64], n: usize) -> Option<Vec<f64>> {
    let lambda = active.weights()?;
    let mut w = vec![0.0; n];
    for (m, l) in active.members().iter().zip(lambda) {
        match m.index {
            None => w.iter_mut().zip(x0_weights).for_each(|(a, b)| *a += l * b),
            Some(i) => w[i] += l,
        }
    }
    Some(w)
}

/// Executes the iterations and returns the final point with the raw records
/// (no suboptimality yet).
fn run_steps(
    spec: &SolverSpec,
    obj: &dyn SmoothObjective,
    set: &AtomSet,
    x0: &DVector<f64>,
    constants: Option<(Option<f64>, Option<f64>)>,
) -> Result<(DVector<f64>, Vec<StepRecord>)> {
    spec.algorithm.check_variant(spec.variant)?;
    spec.lmo.check()?;
    let alg = spec.algorithm;
    let (cf, cf_mp) = match constants {
        Some(c) => c,
        None => resolve_constants(spec, obj, set)?,
    };
    let cfg = spec.lmo.for_call(spec.seed);
    let sym_storage;
    let used: &AtomSet = if matches!(alg, Algorithm::Mp | Algorithm::Omp) && !set.is_symmetric() {
        sym_storage = set.symmetrize();
        &sym_storage
    } else {
        set
    };
    let n = used.len();
    let atoms: Vec<&DVector<f64>> = used.atoms().iter().map(|a| a.coords()).collect();

    // feasibility of the start and its decomposition
    let mut weights: Option<Vec<f64>> = None;
    let mut x0_weights: Vec<f64> = Vec::new();
    if alg.is_fw_family() {
        let w0 = match used.position(x0) {
            Some(i) => {
                let mut w = vec![0.0; n];
                w[i] = 1.0;
                w
            }
            None => {
                let (p, w) = project_onto_convex_hull(&atoms, x0)?;
                if (&p - x0).norm() > START_TOL {
                    return Err(Error::Domain(format!(
                        "initial point is not in conv(A) (distance {:e})",
                        (&p - x0).norm()
                    )));
                }
                w
            }
        };
        x0_weights = w0.clone();
        weights = Some(w0);
    } else {
        let (p, _) = least_squares_over_span(&atoms, x0)?;
        if (&p - x0).norm() > START_TOL {
            return Err(Error::Domain(format!("initial point is not in lin(A) (distance {:e})", (&p - x0).norm())));
        }
    }
    let q = obj.as_quadratic();
    let need_quadratic = || q.ok_or_else(|| Error::Unsupported("matching pursuit needs a least-squares objective".into()));

    let mut rho_bound = if alg.is_fw_family() {
        1.0
    } else {
        geometry::atomic_norm_lp(used, x0).unwrap_or(f64::INFINITY)
    };
    let rho0 = rho_bound;
    let mut x = x0.clone();
    let mut active = ActiveSet::new(x0);
    let mut records = Vec::with_capacity(spec.iterations + 1);
    let flavor = if alg.is_fw_family() { CorrectionFlavor::Fw } else { CorrectionFlavor::Mp };
    for t in 0..=spec.iterations {
        let grad = obj.gradient(&x);
        let f_value = obj.value(&x);
        if !f_value.is_finite() {
            return Err(Error::Domain(format!("objective is not finite at iteration {t}")));
        }
        let width = if grad.norm() > 0.0 { Some(geometry::directional_width(used, &(-&grad))?) } else { None };
        let mut rec = StepRecord {
            t,
            x: x.iter().cloned().collect(),
            f_value,
            subopt: None,
            grad_norm: grad.norm(),
            width,
            gamma: None,
            atom_index: None,
            atom_norm: None,
            dual_gap: None,
            certified_delta: None,
            stationary: false,
            rho_bound,
            weights: weights.clone(),
        };
        if t == spec.iterations {
            records.push(rec);
            break;
        }
        let v = spec.variant;
        let (next, info) = match alg {
            Algorithm::Mp => mp_step(need_quadratic()?, &x, used)?,
            Algorithm::Omp => {
                let (nx, na, s) = omp_step(need_quadratic()?, &x, &active, used)?;
                active = na;
                (nx, s)
            }
            Algorithm::Fw => fw_step(obj, &x, used, v, t, &cfg)?,
            Algorithm::Ncfw => {
                let (nx, na, s) = ncfw_step(obj, &x, &active, used, v, t, &cfg)?;
                active = na;
                (nx, s)
            }
            Algorithm::Gmp => {
                let (nx, na, s) = gmp_step(obj, &x, &active, used, v, t, &cfg)?;
                active = na;
                (nx, s)
            }
            Algorithm::AffineFw => affine_fw_step(obj, &x, used, cf.expect("resolved"), t, &cfg)?,
            Algorithm::AffineGmp => {
                let rho = spec.rho.ok_or(Error::MissingParameter("rho"))?;
                let (nx, na, s) = affine_gmp_step(obj, &x, &active, used, rho, cf_mp.expect("resolved"), v, t, &cfg)?;
                active = na;
                (nx, s)
            }
        };
        let mut next = next;
        if spec.correction && matches!(alg, Algorithm::Ncfw | Algorithm::Gmp) {
            let (cx, ca) = atom_correction(obj, &next, &active, flavor)?;
            active = ca;
            next = cx;
        }

        // bookkeeping for the next record
        if alg.is_fw_family() {
            let corrective = info.gamma.is_none() || (spec.correction && alg == Algorithm::Ncfw);
            weights = if corrective {
                compose_weights(&active, &x0_weights, n)
            } else {
                let g = info.gamma.expect("step size");
                weights.map(|w| {
                    let mut w: Vec<f64> = w.iter().map(|a| a * (1.0 - g)).collect();
                    w[info.atom_index] += g;
                    w
                })
            };
        } else {
            rho_bound = match (alg, active.coeffs()) {
                (Algorithm::Mp, _) | (_, None) => rho_bound + info.gamma.unwrap_or(0.0).abs(),
                (_, Some(c)) => rho0 * c[0].abs() + c[1..].iter().map(|v| v.abs()).sum::<f64>(),
            };
        }
        rec.gamma = info.gamma;
        rec.atom_index = Some(info.atom_index);
        rec.atom_norm = Some(info.atom_norm);
        rec.dual_gap = info.dual_gap;
        rec.certified_delta = info.certified_delta;
        rec.stationary = info.stationary;
        records.push(rec);
        x = next;
    }
    Ok((x, records))
}

/// Runs `spec.iterations` steps of the configured algorithm from `x0`.
pub fn run(spec: &SolverSpec, obj: &dyn SmoothObjective, set: &AtomSet, x0: &DVector<f64>) -> Result<Trace> {
    check_dim(set.dim(), x0.len())?;
    check_dim(obj.dim(), x0.len())?;
    let (cf, cf_mp) = resolve_constants(spec, obj, set)?;
    let (x, mut records) = run_steps(spec, obj, set, x0, Some((cf, cf_mp)))?;

    let mut reference = reference_point(spec, obj, set, x0)?;
    if reference.approximate {
        let best = records.iter().map(|r| r.f_value).fold(f64::INFINITY, f64::min);
        reference.value = reference.value.min(best);
    }
    for r in &mut records {
        r.subopt = Some(r.f_value - reference.value);
    }

    let used = if matches!(spec.algorithm, Algorithm::Mp | Algorithm::Omp) { set.symmetrize() } else { set.clone() };
    let rho_posthoc = if used.is_symmetric() && !spec.algorithm.is_fw_family() {
        let mut worst = geometry::atomic_norm_lp(&used, &DVector::from_column_slice(&reference.point))?;
        for r in &records {
            worst = worst.max(geometry::atomic_norm_lp(&used, &DVector::from_column_slice(&r.x))?);
        }
        worst.is_finite().then_some(worst)
    } else if used.is_symmetric() {
        // iterates lie in conv(A); only the reference point needs measuring
        let xs = geometry::atomic_norm_lp(&used, &DVector::from_column_slice(&reference.point))?;
        xs.is_finite().then_some(xs.max(1.0))
    } else {
        None
    };
    let rho_violation = match (spec.rho, rho_posthoc) {
        (Some(r), Some(p)) if r < p * (1.0 - 1e-9) => {
            Some(format!("supplied rho {r} is below the largest observed atomic norm {p}"))
        }
        _ => None,
    };

    Ok(Trace {
        spec: spec.clone(),
        x0: x0.iter().cloned().collect(),
        records,
        final_x: x.iter().cloned().collect(),
        reference: Some(reference),
        constants: TraceConstants {
            smoothness: obj.smoothness(),
            strong_convexity: obj.strong_convexity(),
            diameter: set.diameter(),
            radius: set.radius(),
            cf,
            cf_mp,
        },
        rho_posthoc,
        rho_violation,
    })
}
