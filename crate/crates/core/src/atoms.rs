//! Finite atom dictionaries.
//!
//! An [`AtomSet`] stores its atoms densely and in a fixed order; every
//! tie-break elsewhere in the crate refers to the stored index. Scaling is
//! applied eagerly, the cumulative factor is kept for bookkeeping and for the
//! JSON document form.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate tolerance for set-membership comparisons.
pub const SET_TOL: f64 = 1e-12;

/// A single dictionary element.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom(DVector<f64>);

impl Atom {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("atom coordinates must be finite".into()));
        }
        Ok(Atom(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn negated(&self) -> Atom {
        Atom(-&self.0)
    }

    /// Coordinate-wise equality within [`SET_TOL`].
    pub fn approx_eq(&self, other: &DVector<f64>) -> bool {
        self.0.len() == other.len() && self.0.iter().zip(other.iter()).all(|(a, b)| (a - b).abs() <= SET_TOL)
    }
}

impl Deref for Atom {
    type Target = DVector<f64>;
    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// An ordered, nonempty dictionary of equal-dimension atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSet {
    atoms: Vec<Atom>,
    symmetric: bool,
    scale: f64,
}

impl AtomSet {
    /// Builds a set; a `symmetric` claim is verified against the atoms.
    pub fn new(atoms: Vec<Atom>, symmetric: bool) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::Domain("atom set must contain at least one atom".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::Domain("atoms must have positive dimension".into()));
        }
        for a in &atoms {
            crate::error::check_dim(dim, a.len())?;
        }
        let set = AtomSet { atoms, symmetric, scale: 1.0 };
        if symmetric && !set.is_closed_under_negation() {
            return Err(Error::Domain("set is flagged symmetric but is not closed under negation".into()));
        }
        Ok(set)
    }

    pub fn from_rows(rows: &[Vec<f64>], symmetric: bool) -> Result<Self> {
        let atoms = rows.iter().map(|r| Atom::from_slice(r)).collect::<Result<Vec<_>>>()?;
        Self::new(atoms, symmetric)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn get(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Cumulative scale factor applied to the underlying atoms.
    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    pub fn position(&self, v: &DVector<f64>) -> Option<usize> {
        self.atoms.iter().position(|a| a.approx_eq(v))
    }

    fn is_closed_under_negation(&self) -> bool {
        self.atoms.iter().all(|a| self.position(&-a.coords()).is_some())
    }

    /// `A ∪ −A`: every distinct atom followed by its negation, each exactly once.
    pub fn symmetrize(&self) -> AtomSet {
        let mut out: Vec<Atom> = Vec::with_capacity(2 * self.atoms.len());
        let present = |out: &[Atom], v: &DVector<f64>| out.iter().any(|a| a.approx_eq(v));
        for a in &self.atoms {
            if !present(&out, a.coords()) {
                out.push(a.clone());
            }
            let neg = a.negated();
            if !present(&out, neg.coords()) {
                out.push(neg);
            }
        }
        AtomSet { atoms: out, symmetric: true, scale: self.scale }
    }

    /// `αA`; the cumulative scale factor is multiplied by `alpha`.
    pub fn scale(&self, alpha: f64) -> Result<AtomSet> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {alpha}")));
        }
        Ok(AtomSet {
            atoms: self.atoms.iter().map(|a| Atom(a.coords() * alpha)).collect(),
            symmetric: self.symmetric,
            scale: self.scale * alpha,
        })
    }

    /// Largest Euclidean atom norm.
    pub fn radius(&self) -> f64 {
        self.atoms.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest pairwise distance between atoms.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                best = best.max((a.coords() - b.coords()).norm());
            }
        }
        best
    }

    /// Atoms as the columns of a `dim × len` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let refs: Vec<&DVector<f64>> = self.atoms.iter().map(|a| a.coords()).collect();
        crate::linalg::columns(&refs, self.dim())
    }

    /// Convex combination `Σ w_i a_i`.
    pub fn combine(&self, weights: &[f64]) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (w, a) in weights.iter().zip(&self.atoms) {
            if *w != 0.0 {
                x.axpy(*w, a.coords(), 1.0);
            }
        }
        x
    }

    pub fn to_doc(&self) -> AtomSetDoc {
        AtomSetDoc {
            dimension: self.dim(),
            symmetric: self.symmetric,
            scale: self.scale,
            atoms: self.atoms.iter().map(|a| a.iter().map(|c| c / self.scale).collect()).collect(),
        }
    }

    pub fn from_doc(doc: &AtomSetDoc) -> Result<Self> {
        for row in &doc.atoms {
            if row.len() != doc.dimension {
                return Err(Error::Schema(format!(
                    "atom has {} coordinates but the document declares dimension {}",
                    row.len(),
                    doc.dimension
                )));
            }
        }
        let set = AtomSet::from_rows(&doc.atoms, doc.symmetric)?;
        if (doc.scale - 1.0).abs() > 0.0 {
            set.scale(doc.scale)
        } else {
            Ok(set)
        }
    }
}

/// JSON form: `{ "dimension": d, "symmetric": bool, "scale": α, "atoms": [[...], ...] }`.
/// `atoms` holds the unscaled coordinates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomSetDoc {
    pub dimension: usize,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default = "one")]
    pub scale: f64,
    pub atoms: Vec<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

/// Named dictionary generators usable from configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    /// `±e_i` in the order `e1, −e1, e2, −e2, …`.
    L1Vertices { dimension: usize },
    /// `{(1,0), (cos θ, sin θ)}` symmetrized.
    ThetaPair { theta: f64 },
    /// `count` seeded Gaussian directions normalized to the unit sphere.
    RandomUnitSphere {
        dimension: usize,
        count: usize,
        seed: u64,
        #[serde(default)]
        symmetric: bool,
    },
    /// Standard basis vectors `e_1 … e_d`.
    SimplexVertices { dimension: usize },
}

impl Generator {
    pub fn build(&self) -> Result<AtomSet> {
        match *self {
            Generator::L1Vertices { dimension } => l1_vertices(dimension),
            Generator::ThetaPair { theta } => theta_pair(theta),
            Generator::RandomUnitSphere { dimension, count, seed, symmetric } => {
                let set = random_unit_sphere(dimension, count, seed)?;
                Ok(if symmetric { set.symmetrize() } else { set })
            }
            Generator::SimplexVertices { dimension } => simplex_vertices(dimension),
        }
    }
}

pub fn l1_vertices(dim: usize) -> Result<AtomSet> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut atoms = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        atoms.push(Atom(e.clone()));
        atoms.push(Atom(-e));
    }
    AtomSet::new(atoms, true)
}

pub fn simplex_vertices(dim: usize) -> Result<AtomSet> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let atoms = (0..dim)
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            Atom(e)
        })
        .collect();
    AtomSet::new(atoms, false)
}

/// The two-atom family `{(1,0), (cos θ, sin θ)}` together with its negation.
pub fn theta_pair(theta: f64) -> Result<AtomSet> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::Domain(format!("theta must lie in (0, π/2], got {theta}")));
    }
    let half = AtomSet::from_rows(&[vec![1.0, 0.0], vec![theta.cos(), theta.sin()]], false)?;
    Ok(half.symmetrize())
}

pub fn random_unit_sphere(dim: usize, count: usize, seed: u64) -> Result<AtomSet> {
    if dim == 0 || count == 0 {
        return Err(Error::Domain("dimension and count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..count)
        .map(|_| loop {
            let v: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            let n = v.norm();
            if n > 1e-8 {
                break Atom(v / n);
            }
        })
        .collect();
    AtomSet::new(atoms, false)
}

/// A set `B` whose union with `−B` is symmetric and whose intersection with `−B` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfDictionary {
    atoms: Vec<Atom>,
}

impl HalfDictionary {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("half dictionary must be nonempty".into()));
        }
        let dim = atoms[0].len();
        for (i, a) in atoms.iter().enumerate() {
            crate::error::check_dim(dim, a.len())?;
            let neg = -a.coords();
            if atoms.iter().enumerate().any(|(j, b)| (j != i || a.norm() <= SET_TOL) && b.approx_eq(&neg)) {
                return Err(Error::Domain(format!("atom {i} has its negation in the half dictionary")));
            }
        }
        Ok(HalfDictionary { atoms })
    }

    /// Keeps the first member of every `±a` pair of a symmetric set.
    pub fn from_symmetric(set: &AtomSet) -> Result<Self> {
        if !set.is_symmetric() {
            return Err(Error::Domain("expected a symmetric atom set".into()));
        }
        let mut kept: Vec<Atom> = Vec::new();
        for a in set.atoms() {
            let neg = -a.coords();
            if !kept.iter().any(|k| k.approx_eq(a.coords()) || k.approx_eq(&neg)) {
                kept.push(a.clone());
            }
        }
        Self::new(kept)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn to_atom_set(&self) -> AtomSet {
        AtomSet { atoms: self.atoms.clone(), symmetric: false, scale: 1.0 }.symmetrize()
    }
}
