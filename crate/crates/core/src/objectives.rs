//! Smooth convex objectives.
//!
//! `L` and `μ` are declared by the caller for general objectives and computed
//! from eigenvalues for quadratics. An over-declared `L` is always legal.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::sym_eigen_extremes;

/// A known minimizer and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerHint {
    pub point: DVector<f64>,
    pub value: f64,
}

pub trait SmoothObjective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Declared smoothness constant (an upper bound).
    fn smoothness(&self) -> f64;
    fn strong_convexity(&self) -> Option<f64>;

    fn minimizer_hint(&self) -> Option<MinimizerHint> {
        None
    }

    /// Quadratic form, when the objective has one.
    fn as_quadratic(&self) -> Option<&Quadratic> {
        None
    }
}

/// `f(x) = ½ xᵀQx − bᵀx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    q: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    smooth: f64,
    strong: f64,
    target: Option<DVector<f64>>,
    hint: Option<MinimizerHint>,
}

impl Quadratic {
    pub fn new(q: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = q.nrows();
        if n == 0 {
            return Err(Error::Domain("quadratic needs positive dimension".into()));
        }
        check_dim(n, q.ncols())?;
        check_dim(n, b.len())?;
        if q.iter().chain(b.iter()).any(|v| !v.is_finite()) || !c.is_finite() {
            return Err(Error::Domain("quadratic coefficients must be finite".into()));
        }
        let asym = (&q - q.transpose()).amax();
        if asym > 1e-10 * q.amax().max(1.0) {
            return Err(Error::Domain(format!("Q is not symmetric (max asymmetry {asym:e})")));
        }
        let (lo, hi) = sym_eigen_extremes(&q);
        if lo < -1e-10 * hi.abs().max(1.0) {
            return Err(Error::Domain(format!("Q is not positive semidefinite (eigenvalue {lo:e})")));
        }
        let strong = lo.max(0.0);
        if hi <= 0.0 {
            return Err(Error::Domain("Q must have a positive eigenvalue".into()));
        }
        let hint = if strong > 0.0 {
            q.clone().cholesky().map(|ch| {
                let point = ch.solve(&b);
                let value = 0.5 * point.dot(&(&q * &point)) - b.dot(&point) + c;
                MinimizerHint { point, value }
            })
        } else {
            None
        };
        Ok(Quadratic { q, b, c, smooth: hi, strong, target: None, hint })
    }

    /// `½‖y − x‖²`, with `L = μ = 1` and minimizer `y`.
    pub fn least_squares(y: DVector<f64>) -> Result<Self> {
        let n = y.len();
        let c = 0.5 * y.norm_squared();
        let mut quad = Quadratic::new(DMatrix::identity(n, n), y.clone(), c)?;
        quad.hint = Some(MinimizerHint { point: y.clone(), value: 0.0 });
        quad.target = Some(y);
        Ok(quad)
    }

    /// Replaces the smoothness constant by a larger declared bound.
    pub fn with_declared_smoothness(mut self, l: f64) -> Result<Self> {
        if !(l >= self.smooth * (1.0 - 1e-10)) {
            return Err(Error::Domain(format!("declared L = {l} is below the largest eigenvalue {}", self.smooth)));
        }
        self.smooth = l;
        Ok(self)
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The target `y` of a least-squares objective.
    pub fn target(&self) -> Option<&DVector<f64>> {
        self.target.as_ref()
    }
}

impl SmoothObjective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) - self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x - &self.b
    }

    fn smoothness(&self) -> f64 {
        self.smooth
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.strong)
    }

    fn minimizer_hint(&self) -> Option<MinimizerHint> {
        self.hint.clone()
    }

    fn as_quadratic(&self) -> Option<&Quadratic> {
        Some(self)
    }
}

/// `log Σ_i exp(⟨a_i, x⟩) + (μ₀/2)‖x‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    rows: Vec<DVector<f64>>,
    mu0: f64,
    smooth: f64,
}

impl LogSumExp {
    pub fn new(rows: Vec<DVector<f64>>, mu0: f64) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Domain("log-sum-exp needs at least one row".into()))?;
        let n = first.len();
        for r in &rows {
            check_dim(n, r.len())?;
        }
        if !(mu0 >= 0.0 && mu0.is_finite()) {
            return Err(Error::Domain(format!("regularization must be nonnegative, got {mu0}")));
        }
        let smooth = rows.iter().map(|r| r.norm_squared()).fold(0.0, f64::max) + mu0;
        if smooth <= 0.0 {
            return Err(Error::Domain("log-sum-exp with zero rows and no regularization is not smooth-positive".into()));
        }
        Ok(LogSumExp { rows, mu0, smooth })
    }

    fn softmax(&self, x: &DVector<f64>) -> (f64, Vec<f64>) {
        let s: Vec<f64> = self.rows.iter().map(|r| r.dot(x)).collect();
        let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = w.iter().sum();
        (m + z.ln(), w.into_iter().map(|v| v / z).collect())
    }
}

impl SmoothObjective for LogSumExp {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.softmax(x).0 + 0.5 * self.mu0 * x.norm_squared()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, p) = self.softmax(x);
        let mut g = x * self.mu0;
        for (pi, r) in p.iter().zip(&self.rows) {
            g.axpy(*pi, r, 1.0);
        }
        g
    }

    fn smoothness(&self) -> f64 {
        self.smooth
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.mu0)
    }
}

/// `f(x_t) + ⟨∇f(x_t), x − x_t⟩ + (L/2)‖x − x_t‖²`.
pub fn surrogate(obj: &dyn SmoothObjective, x_t: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let d = x - x_t;
    obj.value(x_t) + obj.gradient(x_t).dot(&d) + 0.5 * obj.smoothness() * d.norm_squared()
}

/// `f(y) − f(x) − ⟨y − x, ∇f(x)⟩`.
pub fn linearization_gap(obj: &dyn SmoothObjective, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    obj.value(y) - obj.value(x) - (y - x).dot(&obj.gradient(x))
}

/// Central-difference gradient error `‖g_fd − g‖ / max(‖g‖, 1)` at `x`.
pub fn gradient_check(obj: &dyn SmoothObjective, x: &DVector<f64>, h: f64) -> f64 {
    let g = obj.gradient(x);
    let mut fd = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = obj.value(&probe);
        probe[i] = orig - h;
        let down = obj.value(&probe);
        probe[i] = orig;
        fd[i] = (up - down) / (2.0 * h);
    }
    (fd - &g).norm() / g.norm().max(1.0)
}

/// Midpoint convexity on `samples` random pairs in `[-scale, scale]^n`; returns the worst violation.
pub fn convexity_violation(obj: &dyn SmoothObjective, samples: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = obj.dim();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = DVector::from_fn(n, |_, _| rng.random_range(-scale..scale));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-scale..scale));
        let mid = (&x + &y) * 0.5;
        worst = worst.max(obj.value(&mid) - 0.5 * (obj.value(&x) + obj.value(&y)));
    }
    worst
}

/// JSON objective document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveDoc {
    LeastSquares {
        target: Vec<f64>,
    },
    Quadratic {
        q: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
        #[serde(default)]
        declared_l: Option<f64>,
    },
    LogSumExp {
        rows: Vec<Vec<f64>>,
        mu0: f64,
    },
}

impl ObjectiveDoc {
    pub fn build(&self) -> Result<Box<dyn SmoothObjective>> {
        Ok(match self {
            ObjectiveDoc::LeastSquares { target } => {
                Box::new(Quadratic::least_squares(DVector::from_column_slice(target))?)
            }
            ObjectiveDoc::Quadratic { q, b, c, declared_l } => {
                let n = b.len();
                if q.len() != n || q.iter().any(|r| r.len() != n) {
                    return Err(Error::Schema(format!("q must be a {n}×{n} matrix")));
                }
                let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
                let quad = Quadratic::new(m, DVector::from_column_slice(b), *c)?;
                match declared_l {
                    Some(l) => Box::new(quad.with_declared_smoothness(*l)?),
                    None => Box::new(quad),
                }
            }
            ObjectiveDoc::LogSumExp { rows, mu0 } => {
                Box::new(LogSumExp::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect(), *mu0)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn lse() -> LogSumExp {
        LogSumExp::new(vec![v(&[1.0, 0.5]), v(&[-0.3, 2.0]), v(&[0.0, -1.0])], 0.1).unwrap()
    }

    #[test]
    fn surrogate_examples() {
        let f = Quadratic::least_squares(v(&[1.0, 1.0])).unwrap();
        let xt = v(&[0.0, 0.0]);
        assert_eq!(surrogate(&f, &xt, &xt), f.value(&xt));
        let x = v(&[1.0, 0.0]);
        assert!((surrogate(&f, &xt, &x) - 0.5).abs() < 1e-15);
        assert!((f.value(&x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn linearization_gap_examples() {
        let f = Quadratic::least_squares(v(&[1.0, 0.0])).unwrap();
        let x = v(&[0.0, 0.0]);
        assert_eq!(linearization_gap(&f, &x, &x), 0.0);
        assert!((linearization_gap(&f, &x, &v(&[1.0, 0.0])) - 0.5).abs() < 1e-15);

        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = Quadratic::new(q.clone(), v(&[0.3, -0.2]), 1.0).unwrap();
        let (x, y) = (v(&[0.4, -1.0]), v(&[2.0, 0.7]));
        let d = &y - &x;
        assert!((linearization_gap(&f, &x, &y) - 0.5 * d.dot(&(&q * &d))).abs() < 1e-12);
    }

    #[test]
    fn least_squares_constants() {
        let f = Quadratic::least_squares(v(&[1.0, -2.0, 3.0])).unwrap();
        assert!((f.smoothness() - 1.0).abs() < 1e-10);
        assert!((f.strong_convexity().unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(f.minimizer_hint().unwrap().value, 0.0);
        assert!((f.value(&v(&[0.0, 0.0, 0.0])) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_eigen_constants() {
        let q = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]);
        let f = Quadratic::new(q, v(&[0.0, 0.0]), 0.0).unwrap();
        assert!((f.smoothness() - 4.0).abs() < 1e-10);
        assert!((f.strong_convexity().unwrap() - 2.0).abs() < 1e-10);
        let f = f.with_declared_smoothness(10.0).unwrap();
        assert_eq!(f.smoothness(), 10.0);
        assert!(f.clone().with_declared_smoothness(1.0).is_err());
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(Quadratic::new(bad, v(&[0.0, 0.0]), 0.0).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(Quadratic::new(asym, v(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let f = lse();
        let q = Quadratic::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]), v(&[0.3, -0.2]), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            assert!(gradient_check(&f, &x, 1e-5) < 1e-6);
            assert!(gradient_check(&q, &x, 1e-5) < 1e-6);
        }
    }

    #[test]
    fn convexity_spot_check() {
        assert!(convexity_violation(&lse(), 200, 3.0, 1) <= 1e-10);
        let f = Quadratic::least_squares(v(&[1.0, 2.0])).unwrap();
        assert!(convexity_violation(&f, 200, 3.0, 2) <= 1e-10);
    }

    #[test]
    fn doc_parsing() {
        let doc: ObjectiveDoc = serde_json::from_str(r#"{"kind":"least-squares","target":[1.0,2.0]}"#).unwrap();
        let f = doc.build().unwrap();
        assert_eq!(f.dim(), 2);
        let doc: ObjectiveDoc =
            serde_json::from_str(r#"{"kind":"quadratic","q":[[2,0],[0,1]],"b":[1,1],"declared_l":5}"#).unwrap();
        assert_eq!(doc.build().unwrap().smoothness(), 5.0);
        let doc: ObjectiveDoc = serde_json::from_str(r#"{"kind":"log-sum-exp","rows":[[1,0]],"mu0":0.5}"#).unwrap();
        assert_eq!(doc.build().unwrap().smoothness(), 1.5);
        assert!(serde_json::from_str::<ObjectiveDoc>(r#"{"kind":"cubic"}"#).is_err());
    }

    proptest! {
        #[test]
        fn gap_sandwiched_by_curvature(x in proptest::collection::vec(-3.0f64..3.0, 2),
                                      y in proptest::collection::vec(-3.0f64..3.0, 2)) {
            let (x, y) = (v(&x), v(&y));
            let dist = (&y - &x).norm_squared();
            for f in [Box::new(lse()) as Box<dyn SmoothObjective>,
                      Box::new(Quadratic::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]), v(&[0.3, -0.2]), 1.0).unwrap())] {
                let gap = linearization_gap(f.as_ref(), &x, &y);
                let mu = f.strong_convexity().unwrap();
                prop_assert!(gap >= 0.5 * mu * dist - 1e-10);
                prop_assert!(gap <= 0.5 * f.smoothness() * dist + 1e-10);
                prop_assert!(surrogate(f.as_ref(), &x, &y) >= f.value(&y) - 1e-10);
            }
        }
    }
}
