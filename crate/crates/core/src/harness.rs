//! Replay experiments and rate-envelope checks over solver traces.
//!
//! Every experiment is a pure function of its [`ExperimentSpec`]. Independent
//! runs may execute on a thread pool, results are always collected in run order.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{l1_vertices, random_unit_sphere, theta_pair, AtomSet, HalfDictionary};
use crate::error::{Error, Result};
use crate::geometry::{self, rate_bound, BoundKind, MdwOptions, RateBound, RateParams};
use crate::linalg::fit_slope;
use crate::lmo::{LmoConfig, LmoMode};
use crate::objectives::{Quadratic, SmoothObjective};
use crate::solvers::{self, fw_step, gmp_step, ActiveSet, Algorithm, SolverSpec, Trace};

/// Suboptimality below which a run counts as converged.
pub const CONVERGED: f64 = 1e-14;
/// Relative slack granted to every envelope comparison.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    #[serde(rename = "appendix-a")]
    TwoAtomTightness,
    #[serde(rename = "corollary2")]
    OrthantDecay,
    FwToMp,
    Envelope,
    LinearRate,
    CoherenceMdw,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::TwoAtomTightness,
        ExperimentName::OrthantDecay,
        ExperimentName::FwToMp,
        ExperimentName::Envelope,
        ExperimentName::LinearRate,
        ExperimentName::CoherenceMdw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::TwoAtomTightness => "appendix-a",
            ExperimentName::OrthantDecay => "corollary2",
            ExperimentName::FwToMp => "fw-to-mp",
            ExperimentName::Envelope => "envelope",
            ExperimentName::LinearRate => "linear-rate",
            ExperimentName::CoherenceMdw => "coherence-mdw",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Schema(format!("unknown experiment {s:?}")))
    }
}

/// Knobs shared by the experiments; each experiment reads the ones it needs
/// and falls back to its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Size of the half dictionary for the matching-pursuit instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mp_dimension: Option<usize>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mp_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionaries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(default)]
    pub params: ExperimentParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(name: ExperimentName, seed: u64) -> Self {
        ExperimentSpec { name, params: ExperimentParams::default(), seed, output: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub observed: f64,
    pub relation: Relation,
    pub limit: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn at_most(check: impl Into<String>, observed: f64, limit: f64) -> Self {
        Verdict { check: check.into(), observed, relation: Relation::AtMost, limit, pass: observed <= limit }
    }

    pub fn at_least(check: impl Into<String>, observed: f64, limit: f64) -> Self {
        Verdict { check: check.into(), observed, relation: Relation::AtLeast, limit, pass: observed >= limit }
    }
}

/// One run's scalars and raw per-step series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub values: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
}

impl RunSummary {
    fn new(label: impl Into<String>) -> Self {
        RunSummary { label: label.into(), ..Default::default() }
    }

    fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    fn series(mut self, key: &str, v: Vec<f64>) -> Self {
        self.series.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: ExperimentName,
    pub seed: u64,
    pub params: ExperimentParams,
    pub runs: Vec<RunSummary>,
    pub aggregates: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    fn new(name: ExperimentName, seed: u64, params: &ExperimentParams) -> Self {
        ExperimentReport {
            name,
            seed,
            params: params.clone(),
            runs: Vec::new(),
            aggregates: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn aggregate(&self, key: &str) -> Option<f64> {
        self.aggregates.get(key).copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Long-format table `run,series,index,value` of every raw series.
    pub fn write_series_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run", "series", "index", "value"])?;
        for run in &self.runs {
            for (key, values) in &run.series {
                for (i, v) in values.iter().enumerate() {
                    w.write_record([run.label.as_str(), key.as_str(), &i.to_string(), &format!("{v:e}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Maps `f` over `items` on `jobs` threads, keeping input order.
fn par_map<T, R, F>(jobs: usize, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    if jobs <= 1 {
        return items.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| items.into_par_iter().map(f).collect())
}

fn sub_seed(seed: u64, a: u64, b: u64) -> u64 {
    seed ^ a.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_add(1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        Err(Error::Domain(format!("{what} must be nonempty")))
    } else {
        Ok(())
    }
}

/// Default angle grid for the two-atom study: `0.1, 0.2, …, 1.5` and `π/2`.
pub fn default_theta_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=15).map(|k| k as f64 / 10.0).collect();
    g.push(FRAC_PI_2);
    g
}

pub fn default_alpha_grid() -> Vec<f64> {
    (4..=14).map(|k| 2f64.powi(k)).collect()
}

/// Point of `conv(set)` with Dirichlet(1, …, 1) weights.
pub fn random_hull_point(set: &AtomSet, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..set.len()).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    set.combine(&w)
}

/// `½xᵀQx − bᵀx` with `Q = MᵀM/(2d) + ½I` and Gaussian `M`, `b`.
pub fn random_quadratic(dim: usize, seed: u64) -> Result<Quadratic> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let q = m.transpose() * &m / (2.0 * dim as f64) + DMatrix::identity(dim, dim) * 0.5;
    let q = (&q + q.transpose()) * 0.5;
    let b = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
    Quadratic::new(q, b, 0.0)
}

/// Symmetric dictionary `B ∪ −B` of `count` random unit vectors in `ℝ^dim`.
pub fn random_symmetric_dictionary(dim: usize, count: usize, seed: u64) -> Result<AtomSet> {
    Ok(HalfDictionary::new(random_unit_sphere(dim, count, seed)?.atoms().to_vec())?.to_atom_set())
}

/// Runs the experiment named in `spec` with up to `jobs` concurrent runs.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentReport> {
    let p = &spec.params;
    let mut report = match spec.name {
        ExperimentName::TwoAtomTightness => {
            let grid = p.theta_grid.clone().unwrap_or_else(default_theta_grid);
            run_two_atom_tightness(&grid, p.inits.unwrap_or(20), p.iterations.unwrap_or(200), spec.seed, jobs)?
        }
        ExperimentName::OrthantDecay => run_orthant_decay(p.dimension.unwrap_or(10), spec.seed)?,
        ExperimentName::FwToMp => {
            let grid = p.alpha_grid.clone().unwrap_or_else(default_alpha_grid);
            run_fw_to_mp(&grid, &FwToMpInstance::default(), spec.seed)?
        }
        ExperimentName::Envelope => run_envelope(p, spec.seed, jobs)?,
        ExperimentName::LinearRate => run_linear_rate(p, spec.seed, jobs)?,
        ExperimentName::CoherenceMdw => {
            run_coherence_mdw(p.dictionaries.unwrap_or(50), spec.seed, jobs)?
        }
    };
    report.params = p.clone();
    Ok(report)
}

/// Tightness study on `{(1,0), (cos θ, sin θ)}` and its negation with
/// `f(x) = ½‖x − (−1, 1)‖²`: matching pursuit from random starts against the
/// linear-rate bound.
pub fn run_two_atom_tightness(
    theta_grid: &[f64],
    n_inits: usize,
    iterations: usize,
    seed: u64,
    jobs: usize,
) -> Result<ExperimentReport> {
    nonempty(theta_grid, "theta grid")?;
    if n_inits == 0 {
        return Err(Error::Domain("number of random starts must be positive".into()));
    }
    for &th in theta_grid {
        if !(th > 0.0 && th <= FRAC_PI_2 + 1e-12) {
            return Err(Error::Domain(format!("theta must lie in (0, π/2], got {th}")));
        }
    }
    let target = DVector::from_vec(vec![-1.0, 1.0]);
    let f = Quadratic::least_squares(target.clone())?;
    let jobs_list: Vec<(usize, usize)> =
        (0..theta_grid.len()).flat_map(|i| (0..n_inits).map(move |k| (i, k))).collect();
    let mdws: Vec<f64> = theta_grid
        .iter()
        .map(|&th| Ok(geometry::mdw(&theta_pair(th)?)?.value))
        .collect::<Result<_>>()?;

    let runs = par_map(jobs, jobs_list, |(i, k)| {
        let th = theta_grid[i];
        let set = theta_pair(th)?;
        let params = RateParams {
            smoothness: Some(f.smoothness()),
            strong_convexity: f.strong_convexity(),
            mdw: Some(mdws[i]),
            radius: Some(set.radius()),
            ..Default::default()
        };
        let factor = rate_bound(BoundKind::LinearMp, params)?.factor()?;
        let mut x = random_hull_point(&set, sub_seed(seed, i as u64, k as u64));
        let mut active = ActiveSet::new(&x);
        let eps = |x: &DVector<f64>| 0.5 * (x - &target).norm_squared();
        let mut errors = vec![eps(&x)];
        let mut ratios = Vec::new();
        let mut empirical = Vec::new();
        for t in 0..iterations {
            let e = *errors.last().expect("nonempty");
            if e < CONVERGED {
                break;
            }
            let (nx, na, _) = gmp_step(&f, &x, &active, &set, 0, t, &LmoConfig::exact())?;
            x = nx;
            active = na;
            let next = eps(&x);
            errors.push(next);
            let observed = next / e;
            empirical.push(observed);
            ratios.push((1.0 - observed) / (1.0 - factor));
        }
        let steps = empirical.len();
        let whole = if steps > 0 {
            let last = *errors.last().expect("nonempty");
            // a converged last step has no finite geometric mean; fall back to the per-step mean
            if last > 0.0 {
                let g = (last / errors[0]).powf(1.0 / steps as f64);
                (1.0 - g) / (1.0 - factor)
            } else {
                mean(&ratios)
            }
        } else {
            f64::NAN
        };
        Ok(RunSummary::new(format!("theta={th:.4}/init={k}"))
            .value("theta", th)
            .value("mdw", mdws[i])
            .value("bound_factor", factor)
            .value("steps", steps as f64)
            .value("min_ratio", ratios.iter().cloned().fold(f64::INFINITY, f64::min))
            .value("mean_ratio", if ratios.is_empty() { f64::NAN } else { mean(&ratios) })
            .value("max_ratio", ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .value("geometric_ratio", whole)
            .series("epsilon", errors)
            .series("empirical_factor", empirical)
            .series("ratio", ratios))
    })?;

    let mut report = ExperimentReport::new(ExperimentName::TwoAtomTightness, seed, &ExperimentParams::default());
    let mut theta_means = Vec::new();
    let mut geo = Vec::new();
    for (i, chunk) in runs.chunks(n_inits).enumerate() {
        let per: Vec<f64> = chunk.iter().map(|r| r.values["mean_ratio"]).filter(|v| v.is_finite()).collect();
        let m = mean(&per);
        report.aggregates.insert(format!("mean_ratio[theta={:.4}]", theta_grid[i]), m);
        theta_means.push(m);
        geo.extend(chunk.iter().map(|r| r.values["geometric_ratio"]).filter(|v| v.is_finite()));
    }
    let all = |key: &str, fold: fn(f64, f64) -> f64, init: f64| runs.iter().map(|r| r.values[key]).fold(init, fold);
    let min_ratio = all("min_ratio", f64::min, f64::INFINITY);
    let max_ratio = all("max_ratio", f64::max, f64::NEG_INFINITY);
    let grand = mean(&theta_means);
    report.aggregates.insert("min_ratio".into(), min_ratio);
    report.aggregates.insert("mean_ratio".into(), grand);
    report.aggregates.insert("max_ratio".into(), max_ratio);
    report.aggregates.insert("geometric_mean_ratio".into(), mean(&geo));
    report.verdicts.push(Verdict::at_least("every per-step ratio", min_ratio, 1.0 - 1e-9));
    report.verdicts.push(Verdict::at_most("mean per-step ratio", grand, 3.0));
    report.runs = runs;
    Ok(report)
}

/// Matching pursuit on `±e_i` with `y = 1`, `x₀ = 0`: the error loses exactly
/// `1/(d − t)` of itself per step and vanishes after `d` steps.
pub fn run_orthant_decay(d: usize, seed: u64) -> Result<ExperimentReport> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    let f = Quadratic::least_squares(DVector::from_element(d, 1.0))?;
    let set = l1_vertices(d)?;
    let spec = SolverSpec { seed, ..SolverSpec::new(Algorithm::Mp, 0, d) };
    let trace = solvers::run(&spec, &f, &set, &DVector::zeros(d))?;
    let eps = trace.subopts().ok_or(Error::MissingParameter("suboptimality"))?;
    let (l, mu) = (f.smoothness(), f.strong_convexity().unwrap_or(0.0));
    let lower = rate_bound(BoundKind::LowerBound, RateParams { smoothness: Some(l), strong_convexity: Some(mu), ..Default::default() })?;

    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut floors = Vec::new();
    let mut uppers = Vec::new();
    for t in 0..d - 1 {
        observed.push(eps[t + 1] / eps[t]);
        expected.push(1.0 - 1.0 / (d - t) as f64);
        let r = &trace.records[t];
        let (w, z) = (r.width.unwrap_or(0.0), r.atom_norm.unwrap_or(1.0));
        floors.push(lower.floor(w, z)?);
        uppers.push(1.0 - (mu / l) * (w * w) / (z * z));
    }
    let max_dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let factor_err = max_dev(&observed, &expected);
    let floor_err = max_dev(&observed, &floors);
    let upper_err = max_dev(&observed, &uppers);
    let last = eps[d];

    let mut report = ExperimentReport::new(ExperimentName::OrthantDecay, seed, &ExperimentParams::default());
    report.runs.push(
        RunSummary::new(format!("d={d}"))
            .value("dimension", d as f64)
            .value("final_epsilon", last)
            .series("epsilon", eps)
            .series("observed_factor", observed)
            .series("expected_factor", expected)
            .series("lower_floor", floors)
            .series("upper_factor", uppers),
    );
    report.aggregates.insert("max_factor_error".into(), factor_err);
    report.aggregates.insert("max_floor_gap".into(), floor_err);
    report.aggregates.insert("max_upper_gap".into(), upper_err);
    report.aggregates.insert("final_epsilon".into(), last);
    report.verdicts.push(Verdict::at_most("per-step factor matches 1 − 1/(d − t)", factor_err, 1e-12));
    report.verdicts.push(Verdict::at_most("final error", last, 1e-12));
    report.verdicts.push(Verdict::at_most("observed factor equals the lower floor", floor_err, 1e-10));
    report.verdicts.push(Verdict::at_most("observed factor equals the upper factor", upper_err, 1e-10));
    Ok(report)
}

/// One-step instance for the Frank-Wolfe to matching pursuit limit.
#[derive(Debug, Clone, PartialEq)]
pub struct FwToMpInstance {
    pub atoms: AtomSet,
    pub target: Vec<f64>,
    pub x_t: Vec<f64>,
}

impl Default for FwToMpInstance {
    /// The `θ = 0.1` pair with `x_t = −60 z⊥` and `y = 10 z + 60 z⊥`, where
    /// `z = (cos θ, sin θ)` is the atom the oracle selects at `x_t`. Scales up
    /// to about 65 clip the Frank-Wolfe step.
    fn default() -> Self {
        let th: f64 = 0.1;
        let z = [th.cos(), th.sin()];
        let perp = [-th.sin(), th.cos()];
        FwToMpInstance {
            atoms: theta_pair(th).expect("valid angle"),
            target: vec![10.0 * z[0] + 60.0 * perp[0], 10.0 * z[1] + 60.0 * perp[1]],
            x_t: vec![-60.0 * perp[0], -60.0 * perp[1]],
        }
    }
}

/// Compares one Frank-Wolfe step (curvature-free variant 3) on `αA` with one
/// matching-pursuit step on `A` from the same point, across `alpha_grid`.
pub fn run_fw_to_mp(alpha_grid: &[f64], instance: &FwToMpInstance, seed: u64) -> Result<ExperimentReport> {
    nonempty(alpha_grid, "alpha grid")?;
    if alpha_grid.iter().any(|&a| !(a >= 16.0)) {
        return Err(Error::Domain("alpha grid values must be at least 16".into()));
    }
    if alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("alpha grid must be increasing".into()));
    }
    let f = Quadratic::least_squares(DVector::from_column_slice(&instance.target))?;
    let x = DVector::from_column_slice(&instance.x_t);
    let set = &instance.atoms;
    let l = f.smoothness();
    let (mp_x, _, mp_info) = gmp_step(&f, &x, &ActiveSet::new(&x), set, 0, 0, &LmoConfig::exact())?;
    let grad = f.gradient(&x);

    let mut diffs = Vec::new();
    let mut conditions = Vec::new();
    for &alpha in alpha_grid {
        let scaled = set.scale(alpha)?;
        let (fw_x, info) = fw_step(&f, &x, &scaled, 3, 0, &LmoConfig::exact())?;
        if info.atom_index != mp_info.atom_index {
            return Err(Error::Domain("oracles disagree on the selected atom".into()));
        }
        let dir = scaled.get(info.atom_index).coords() - &x;
        conditions.push(-grad.dot(&dir) / (l * dir.norm_squared()));
        diffs.push((fw_x - &mp_x).norm());
    }
    let admissible: Vec<usize> = (0..alpha_grid.len()).filter(|&i| (0.0..=1.0).contains(&conditions[i])).collect();
    if admissible.is_empty() {
        return Err(Error::Domain("no admissible alpha in the grid".into()));
    }
    let clipped: Vec<usize> = (0..alpha_grid.len()).filter(|i| !admissible.contains(i)).collect();
    let logs = |idx: &[usize], v: &[f64]| idx.iter().map(|&i| v[i].ln()).collect::<Vec<_>>();
    let slope = if admissible.len() >= 2 {
        fit_slope(&logs(&admissible, alpha_grid), &logs(&admissible, &diffs))
    } else {
        f64::NAN
    };
    let non_decreasing = admissible.windows(2).filter(|w| diffs[w[1]] >= diffs[w[0]]).count();
    let non_growing = clipped.windows(2).filter(|w| diffs[w[1]] <= diffs[w[0]]).count();

    let mut report = ExperimentReport::new(ExperimentName::FwToMp, seed, &ExperimentParams::default());
    report.runs.push(
        RunSummary::new("alpha-sweep")
            .series("alpha", alpha_grid.to_vec())
            .series("difference", diffs)
            .series("admissibility", conditions)
            .series("admissible", (0..alpha_grid.len()).map(|i| admissible.contains(&i) as u8 as f64).collect()),
    );
    report.aggregates.insert("slope".into(), slope);
    report.aggregates.insert("admissible_count".into(), admissible.len() as f64);
    report.aggregates.insert("clipped_count".into(), clipped.len() as f64);
    report.verdicts.push(Verdict::at_least("slope lower", slope, -1.2));
    report.verdicts.push(Verdict::at_most("slope upper", slope, -0.8));
    report.verdicts.push(Verdict::at_most("admissible differences not decreasing", non_decreasing as f64, 0.0));
    report.verdicts.push(Verdict::at_most("clipped differences not growing", non_growing as f64, 0.0));
    Ok(report)
}

/// Absolute slack for comparisons near the optimum.
pub fn noise_floor(trace: &Trace) -> f64 {
    let fstar = trace.reference.as_ref().map(|r| r.value.abs()).unwrap_or(0.0);
    1e-13 * (1.0 + fstar)
}

/// Checks a trace against `bound`. Sublinear kinds bound `ε_t`, linear kinds
/// bound `ε_{t+1}/ε_t` from above, the lower-bound kind from below.
pub fn check_envelope(trace: &Trace, bound: &RateBound) -> Result<ExperimentReport> {
    let eps = trace.subopts().ok_or(Error::MissingParameter("suboptimality"))?;
    let noise = noise_floor(trace);
    let mut limits = Vec::new();
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    match bound.kind {
        BoundKind::LinearMp | BoundKind::LinearAffine => {
            let q = bound.factor()?;
            for t in 0..eps.len().saturating_sub(1) {
                let lim = q * eps[t] * (1.0 + ENVELOPE_SLACK) + noise;
                limits.push(lim);
                worst = worst.max(eps[t + 1] - lim);
                violations += (eps[t + 1] > lim) as usize;
            }
        }
        BoundKind::LowerBound => {
            for t in 0..eps.len().saturating_sub(1) {
                let r = &trace.records[t];
                let (Some(w), Some(z)) = (r.width, r.atom_norm) else { continue };
                let lim = bound.floor(w, z)? * eps[t] * (1.0 - ENVELOPE_SLACK) - noise;
                limits.push(lim);
                worst = worst.max(lim - eps[t + 1]);
                violations += (eps[t + 1] < lim) as usize;
            }
        }
        _ => {
            for (t, &e) in eps.iter().enumerate() {
                let lim = bound.value(t)? * (1.0 + ENVELOPE_SLACK) + noise;
                limits.push(lim);
                worst = worst.max(e - lim);
                violations += (e > lim) as usize;
            }
        }
    }
    let mut report = ExperimentReport::new(ExperimentName::Envelope, trace.spec.seed, &ExperimentParams::default());
    let kind = serde_json::to_value(bound.kind)?.as_str().unwrap_or_default().to_string();
    report.runs.push(
        RunSummary::new(format!("{:?}-v{}/{kind}", trace.spec.algorithm, trace.spec.variant).to_lowercase())
            .value("violations", violations as f64)
            .value("worst_excess", worst)
            .series("epsilon", eps)
            .series("limit", limits),
    );
    report.aggregates.insert("violations".into(), violations as f64);
    report.aggregates.insert("worst_excess".into(), worst);
    report.verdicts.push(Verdict::at_most(format!("{kind} violations"), violations as f64, 0.0));
    Ok(report)
}

/// Fills the rate parameters a trace can supply on its own.
pub fn params_from_trace(trace: &Trace) -> RateParams {
    RateParams {
        smoothness: Some(trace.constants.smoothness),
        strong_convexity: trace.constants.strong_convexity,
        delta: Some(trace.spec.lmo.delta),
        rho: trace.spec.rho.or(trace.rho_posthoc),
        diameter: Some(trace.constants.diameter),
        radius: Some(trace.constants.radius),
        cf: trace.constants.cf,
        cf_mp: trace.constants.cf_mp,
        epsilon0: trace.epsilon0(),
        ..Default::default()
    }
}

fn merge(into: &mut ExperimentReport, label_prefix: &str, part: ExperimentReport) {
    for mut r in part.runs {
        r.label = format!("{label_prefix}/{}", r.label);
        into.runs.push(r);
    }
    for mut v in part.verdicts {
        v.check = format!("{label_prefix}: {}", v.check);
        into.verdicts.push(v);
    }
}

/// The two matching-pursuit instances: least squares and a random strongly
/// convex quadratic over a random symmetric dictionary.
fn mp_instances(p: &ExperimentParams, seed: u64) -> Result<(AtomSet, Vec<(&'static str, Quadratic)>)> {
    let d = p.mp_dimension.unwrap_or(20);
    let n = p.atoms.unwrap_or(40);
    let set = random_symmetric_dictionary(d, n, sub_seed(seed, 100, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 101, 0));
    let y = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let ls = Quadratic::least_squares(y)?;
    let quad = random_quadratic(d, sub_seed(seed, 102, 0))?;
    Ok((set, vec![("least-squares", ls), ("quadratic", quad)]))
}

/// Sublinear envelopes: Frank-Wolfe variants 0–3 over L1 vertices, and
/// generalized matching pursuit variants 0–1 with `ρ` taken post hoc.
pub fn run_envelope(p: &ExperimentParams, seed: u64, jobs: usize) -> Result<ExperimentReport> {
    let d = p.dimension.unwrap_or(50);
    let t_fw = p.iterations.unwrap_or(200);
    let t_mp = p.mp_iterations.unwrap_or(300);
    let l1 = l1_vertices(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 200, 0));
    let y = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
    let fw_obj = Quadratic::least_squares(y)?;
    let (dict, objectives) = mp_instances(p, seed)?;
    let x0_fw = l1.get(0).coords().clone();
    let x0_mp = DVector::zeros(dict.dim());

    enum Job<'a> {
        Fw(u8),
        Mp(u8, &'a str, &'a Quadratic),
    }
    let mut jobs_list: Vec<Job> = (0..=3).map(Job::Fw).collect();
    for (name, obj) in &objectives {
        for v in 0..=1 {
            jobs_list.push(Job::Mp(v, name, obj));
        }
    }
    let parts = par_map(jobs, jobs_list, |job| match job {
        Job::Fw(v) => {
            let spec = SolverSpec { seed, ..SolverSpec::new(Algorithm::Fw, v, t_fw) };
            let trace = solvers::run(&spec, &fw_obj, &l1, &x0_fw)?;
            let bound = rate_bound(BoundKind::SublinearFw, params_from_trace(&trace))?;
            Ok((format!("fw-v{v}/l1-d{d}"), check_envelope(&trace, &bound)?))
        }
        Job::Mp(v, name, obj) => {
            let spec = SolverSpec { seed, ..SolverSpec::new(Algorithm::Gmp, v, t_mp) };
            let trace = solvers::run(&spec, obj, &dict, &x0_mp)?;
            let mut params = params_from_trace(&trace);
            params.rho = trace.rho_posthoc;
            let bound = rate_bound(BoundKind::SublinearMp, params)?;
            Ok((format!("gmp-v{v}/{name}"), check_envelope(&trace, &bound)?))
        }
    })?;
    let mut report = ExperimentReport::new(ExperimentName::Envelope, seed, p);
    let mut total = 0.0;
    for (label, part) in parts {
        total += part.aggregate("violations").unwrap_or(0.0);
        merge(&mut report, &label, part);
    }
    report.aggregates.insert("violations".into(), total);
    Ok(report)
}

/// Per-step linear-rate envelope for generalized matching pursuit with an
/// exact oracle and with certified `δ`-approximate oracles.
pub fn run_linear_rate(p: &ExperimentParams, seed: u64, jobs: usize) -> Result<ExperimentReport> {
    let t_mp = p.mp_iterations.unwrap_or(300);
    let deltas = p.deltas.clone().unwrap_or_else(|| vec![1.0, 0.5]);
    nonempty(&deltas, "delta list")?;
    let (dict, objectives) = mp_instances(p, seed)?;
    let width = geometry::mdw_with(&dict, &MdwOptions { seed, ..Default::default() })?.value;
    let x0 = DVector::zeros(dict.dim());
    let mut jobs_list = Vec::new();
    for (name, obj) in &objectives {
        for v in 0..=1u8 {
            for &delta in &deltas {
                jobs_list.push((*name, obj, v, delta));
            }
        }
    }
    let parts = par_map(jobs, jobs_list, |(name, obj, v, delta)| {
        let lmo = if delta < 1.0 {
            LmoConfig::subsample(LmoMode::ApproxMp, delta, 0.25, sub_seed(seed, 300, v as u64))
        } else {
            LmoConfig::exact()
        };
        let spec = SolverSpec { seed, ..SolverSpec::new(Algorithm::Gmp, v, t_mp).with_lmo(lmo) };
        let trace = solvers::run(&spec, obj, &dict, &x0)?;
        let uncertified = trace
            .records
            .iter()
            .filter(|r| r.atom_index.is_some())
            .filter(|r| r.certified_delta.is_some_and(|c| c < delta * (1.0 - 1e-12)))
            .count();
        let mut params = params_from_trace(&trace);
        params.mdw = Some(width);
        params.delta = Some(delta);
        let bound = rate_bound(BoundKind::LinearMp, params)?;
        let mut part = check_envelope(&trace, &bound)?;
        part.verdicts.push(Verdict::at_most("steps below the requested oracle quality", uncertified as f64, 0.0));
        Ok((format!("gmp-v{v}/{name}/delta={delta}"), bound.factor()?, part))
    })?;
    let mut report = ExperimentReport::new(ExperimentName::LinearRate, seed, p);
    report.aggregates.insert("mdw".into(), width);
    let mut total = 0.0;
    for (label, factor, part) in parts {
        total += part.aggregate("violations").unwrap_or(0.0);
        report.aggregates.insert(format!("factor[{label}]"), factor);
        merge(&mut report, &label, part);
    }
    report.aggregates.insert("violations".into(), total);
    Ok(report)
}

/// Random symmetric unit-norm dictionaries: `μ(B, n − 1) ≥ 1 − n·mdw²`.
pub fn run_coherence_mdw(count: usize, seed: u64, jobs: usize) -> Result<ExperimentReport> {
    if count == 0 {
        return Err(Error::Domain("dictionary count must be positive".into()));
    }
    let runs = par_map(jobs, (0..count).collect(), |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 400, k as u64));
        let d = rand::Rng::random_range(&mut rng, 2..=8usize);
        let n = rand::Rng::random_range(&mut rng, 2..=12usize);
        let half = HalfDictionary::new(random_unit_sphere(d, n, sub_seed(seed, 401, k as u64))?.atoms().to_vec())?;
        let set = half.to_atom_set();
        let width = geometry::mdw_with(&set, &MdwOptions { seed: sub_seed(seed, 402, k as u64), ..Default::default() })?;
        let coherence = geometry::cumulative_coherence(&half, n - 1)?;
        let rhs = 1.0 - n as f64 * width.value * width.value;
        Ok(RunSummary::new(format!("dict={k}"))
            .value("dimension", d as f64)
            .value("atoms", n as f64)
            .value("mdw", width.value)
            .value("coherence", coherence)
            .value("lower_bound", rhs)
            .value("slack", coherence - rhs))
    })?;
    let violations = runs.iter().filter(|r| r.values["slack"] < -1e-9).count();
    let min_slack = runs.iter().map(|r| r.values["slack"]).fold(f64::INFINITY, f64::min);
    let mut report = ExperimentReport::new(ExperimentName::CoherenceMdw, seed, &ExperimentParams::default());
    report.runs = runs;
    report.aggregates.insert("violations".into(), violations as f64);
    report.aggregates.insert("min_slack".into(), min_slack);
    report.verdicts.push(Verdict::at_most("coherence below 1 − n·mdw²", violations as f64, 0.0));
    Ok(report)
}
