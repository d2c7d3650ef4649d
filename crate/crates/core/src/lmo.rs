//! Linear minimization oracles over an [`AtomSet`].
//!
//! Approximate oracles are realized by subsampled enumeration. A subsampled
//! answer is checked against full enumeration and replaced by the exact atom
//! when it misses the requested quality.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, AtomSet};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmoMode {
    Exact,
    /// `⟨d, z̃ − x⟩ ≤ δ · min_z ⟨d, z − x⟩`
    ApproxFw,
    /// `⟨d, z̃⟩ ≤ δ · ⟨d, z*⟩`
    ApproxMp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LmoImpl {
    FullEnumeration,
    Subsample { fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmoConfig {
    pub mode: LmoMode,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(rename = "impl", default = "full")]
    pub implementation: LmoImpl,
    /// Re-check approximate answers against full enumeration.
    #[serde(default = "yes")]
    pub validate: bool,
}

fn one() -> f64 {
    1.0
}
fn full() -> LmoImpl {
    LmoImpl::FullEnumeration
}
fn yes() -> bool {
    true
}

impl Default for LmoConfig {
    fn default() -> Self {
        LmoConfig::exact()
    }
}

impl LmoConfig {
    pub fn exact() -> Self {
        LmoConfig { mode: LmoMode::Exact, delta: 1.0, implementation: LmoImpl::FullEnumeration, validate: true }
    }

    pub fn subsample(mode: LmoMode, delta: f64, fraction: f64, seed: u64) -> Self {
        LmoConfig { mode, delta, implementation: LmoImpl::Subsample { fraction, seed }, validate: true }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if let LmoImpl::Subsample { fraction, .. } = self.implementation {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::Domain(format!("subsample fraction must lie in (0, 1], got {fraction}")));
            }
        }
        if self.mode == LmoMode::Exact && self.delta != 1.0 {
            return Err(Error::Domain("exact oracle requires delta = 1".into()));
        }
        Ok(())
    }

    /// Same configuration with the subsample seed mixed with a call counter,
    /// so successive iterations draw different subsets.
    pub fn for_call(&self, call: u64) -> Self {
        let mut cfg = *self;
        if let LmoImpl::Subsample { fraction, seed } = self.implementation {
            let mixed = seed ^ call.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            cfg.implementation = LmoImpl::Subsample { fraction, seed: mixed };
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmoResult {
    pub index: usize,
    pub atom: Atom,
    /// `⟨query, atom⟩`
    pub inner: f64,
    /// Quality actually delivered, when known.
    pub certified_delta: Option<f64>,
}

fn result(set: &AtomSet, query: &DVector<f64>, index: usize, certified_delta: Option<f64>) -> LmoResult {
    let atom = set.get(index).clone();
    LmoResult { index, inner: query.dot(atom.coords()), atom, certified_delta }
}

fn argmin(set: &AtomSet, query: &DVector<f64>, indices: impl Iterator<Item = usize>) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for i in indices {
        let v = query.dot(set.get(i).coords());
        // strict comparison keeps the lowest index on ties when indices ascend
        if v < best.1 || best.0 == usize::MAX {
            best = (i, v);
        }
    }
    best.0
}

/// `argmin_z ⟨query, z⟩`, ties broken by lowest stored index.
pub fn lmo_exact(set: &AtomSet, query: &DVector<f64>) -> Result<LmoResult> {
    check_dim(set.dim(), query.len())?;
    Ok(result(set, query, argmin(set, query, 0..set.len()), Some(1.0)))
}

fn subsample_index(set: &AtomSet, query: &DVector<f64>, fraction: f64, seed: u64) -> usize {
    let n = set.len();
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    argmin(set, query, picked.into_iter())
}

/// Which approximation inequality a candidate is judged by.
#[derive(Debug, Clone, Copy)]
pub enum Contract<'a> {
    Fw { anchor: &'a DVector<f64> },
    Mp,
}

fn approx(set: &AtomSet, query: &DVector<f64>, contract: Contract<'_>, cfg: &LmoConfig) -> Result<LmoResult> {
    check_dim(set.dim(), query.len())?;
    if let Contract::Fw { anchor } = contract {
        check_dim(set.dim(), anchor.len())?;
    }
    cfg.check()?;
    let index = match cfg.implementation {
        LmoImpl::FullEnumeration => return lmo_exact(set, query),
        LmoImpl::Subsample { fraction, seed } => subsample_index(set, query, fraction, seed),
    };
    if !cfg.validate {
        return Ok(result(set, query, index, None));
    }
    let exact = lmo_exact(set, query)?;
    if index == exact.index {
        return Ok(exact);
    }
    let achieved = match measure_delta(set, query, set.get(index), contract) {
        Ok(d) => d,
        // no meaningful multiplicative quality: fall back to the exact answer
        Err(Error::GapSignDegenerate(_)) => return Ok(exact),
        Err(e) => return Err(e),
    };
    if achieved >= cfg.delta {
        Ok(result(set, query, index, Some(achieved)))
    } else {
        Ok(exact)
    }
}

/// δ-approximate oracle in the Frank-Wolfe sense, anchored at `x_t`.
pub fn lmo_approx_fw(set: &AtomSet, query: &DVector<f64>, anchor: &DVector<f64>, cfg: &LmoConfig) -> Result<LmoResult> {
    if cfg.mode != LmoMode::ApproxFw {
        return Err(Error::Domain("lmo_approx_fw requires mode approx_fw".into()));
    }
    approx(set, query, Contract::Fw { anchor }, cfg)
}

/// δ-approximate oracle in the matching-pursuit sense.
pub fn lmo_approx_mp(set: &AtomSet, query: &DVector<f64>, cfg: &LmoConfig) -> Result<LmoResult> {
    if cfg.mode != LmoMode::ApproxMp {
        return Err(Error::Domain("lmo_approx_mp requires mode approx_mp".into()));
    }
    approx(set, query, Contract::Mp, cfg)
}

/// Dispatches on `cfg.mode`; `anchor` is only read by the Frank-Wolfe contract.
pub fn query(set: &AtomSet, q: &DVector<f64>, anchor: &DVector<f64>, cfg: &LmoConfig) -> Result<LmoResult> {
    match cfg.mode {
        LmoMode::Exact => lmo_exact(set, q),
        LmoMode::ApproxFw => lmo_approx_fw(set, q, anchor, cfg),
        LmoMode::ApproxMp => lmo_approx_mp(set, q, cfg),
    }
}

/// Largest δ in `(0, 1]` for which `candidate` meets the contract.
///
/// Returns 0 when the candidate meets it for no positive δ. In the MP sense a
/// nonnegative exact optimum is reported as [`Error::GapSignDegenerate`].
pub fn measure_delta(set: &AtomSet, query: &DVector<f64>, candidate: &Atom, contract: Contract<'_>) -> Result<f64> {
    check_dim(set.dim(), query.len())?;
    check_dim(set.dim(), candidate.len())?;
    let exact = lmo_exact(set, query)?;
    let (best, got) = match contract {
        Contract::Fw { anchor } => {
            let shift = query.dot(anchor);
            (exact.inner - shift, query.dot(candidate.coords()) - shift)
        }
        Contract::Mp => {
            if exact.inner >= 0.0 {
                return Err(Error::GapSignDegenerate(exact.inner));
            }
            (exact.inner, query.dot(candidate.coords()))
        }
    };
    if best >= 0.0 {
        // zero Frank-Wolfe gap: every atom satisfies the inequality
        return Ok(1.0);
    }
    Ok((got / best).clamp(0.0, 1.0))
}
