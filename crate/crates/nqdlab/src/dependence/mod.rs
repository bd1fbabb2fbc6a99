//! Pairwise NQD sample-path generators and exact small-instance oracles.
//!
//! Continuous models share one pipeline: per-index standard normals
//! (independent, sign-flipped in pairs, or correlated through a banded
//! nonpositive Toeplitz factor), mapped through the normal cdf and the
//! marginal quantile. Nonpositive correlation makes every pair negatively
//! quadrant dependent; the discrete layer carries the rigorous burden on
//! exact cases. Streams are keyed by `(master_seed, path)`, so regeneration
//! is deterministic under any scheduling.

pub mod corpus;
pub mod discrete;

use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::marginals::{domination_audit, DominationCheck, Marginal};
pub use discrete::DiscreteJoint;

/// Marginal assignment along the path: one law for every index, or an
/// explicit per-index list (mostly for domination audits).
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalSpec {
    Identical(Marginal),
    PerIndex(Vec<Marginal>),
}

impl MarginalSpec {
    pub fn at(&self, index: u64) -> Result<&Marginal> {
        match self {
            MarginalSpec::Identical(m) => Ok(m),
            MarginalSpec::PerIndex(v) => v.get(index as usize).ok_or(Error::Overflow {
                what: "per-index marginal list",
                index,
            }),
        }
    }

    pub fn identical(&self) -> Option<&Marginal> {
        match self {
            MarginalSpec::Identical(m) => Some(m),
            MarginalSpec::PerIndex(_) => None,
        }
    }

    fn check_horizon(&self, horizon: u64) -> Result<()> {
        if let MarginalSpec::PerIndex(v) = self {
            if (v.len() as u64) < horizon {
                return Err(Error::invalid(
                    "horizon",
                    format!("per-index marginal list has {} entries, horizon is {horizon}", v.len()),
                ));
            }
        }
        Ok(())
    }
}

/// A recipe for pairwise NQD paths with prescribed marginals.
#[derive(Debug, Clone)]
pub enum DependenceModel {
    /// Independent draws.
    Iid { marginal: MarginalSpec },
    /// Consecutive pairs `(Q(u), Q(1-u))`: countermonotone within a pair,
    /// independent across pairs.
    AntitheticPairs { marginal: MarginalSpec },
    /// Normal copula with a banded Toeplitz correlation; every band entry
    /// must be nonpositive.
    GaussianCopula {
        marginal: MarginalSpec,
        bands: Vec<f64>,
        factor: Arc<BandedCholesky>,
    },
    /// Independent copies of a finite-support joint laid out block by block
    /// along the path.
    DiscreteJoint { joint: Arc<DiscreteJoint> },
}

/// Depth to which a correlation spec is checked for positive definiteness
/// at construction; generation re-validates out to the actual horizon.
const CONSTRUCTION_VALIDATION_DEPTH: usize = 4096;

impl DependenceModel {
    pub fn iid(marginal: Marginal) -> Self {
        DependenceModel::Iid {
            marginal: MarginalSpec::Identical(marginal),
        }
    }

    pub fn antithetic_pairs(marginal: Marginal) -> Self {
        DependenceModel::AntitheticPairs {
            marginal: MarginalSpec::Identical(marginal),
        }
    }

    /// Build a normal-copula model; fails right here when a band entry is
    /// positive or the truncated correlation matrix is not PSD.
    pub fn gaussian_copula(marginal: Marginal, bands: Vec<f64>) -> Result<Self> {
        Self::gaussian_copula_spec(MarginalSpec::Identical(marginal), bands)
    }

    pub fn gaussian_copula_spec(marginal: MarginalSpec, bands: Vec<f64>) -> Result<Self> {
        for (i, &b) in bands.iter().enumerate() {
            if !(b <= 0.0) || b < -1.0 {
                return Err(Error::invalid(
                    "bands",
                    format!("band {i} correlation {b} must lie in [-1, 0]"),
                ));
            }
        }
        let factor = BandedCholesky::build(&bands, CONSTRUCTION_VALIDATION_DEPTH)?;
        Ok(DependenceModel::GaussianCopula {
            marginal,
            bands,
            factor: Arc::new(factor),
        })
    }

    pub fn discrete(joint: DiscreteJoint) -> Self {
        DependenceModel::DiscreteJoint { joint: Arc::new(joint) }
    }

    /// The single marginal when the model is exchangeable in law.
    pub fn identical_marginal(&self) -> Option<&Marginal> {
        match self {
            DependenceModel::Iid { marginal }
            | DependenceModel::AntitheticPairs { marginal }
            | DependenceModel::GaussianCopula { marginal, .. } => marginal.identical(),
            DependenceModel::DiscreteJoint { .. } => None,
        }
    }

    /// Exact mean of `X_index` (0-based).
    pub fn mean_at(&self, index: u64) -> Result<f64> {
        match self {
            DependenceModel::Iid { marginal }
            | DependenceModel::AntitheticPairs { marginal }
            | DependenceModel::GaussianCopula { marginal, .. } => Ok(marginal.at(index)?.mean()),
            DependenceModel::DiscreteJoint { joint } => {
                Ok(joint.coordinate_mean(index as usize % joint.dim()))
            }
        }
    }

    /// Exact means for the first `horizon` indices.
    pub fn means(&self, horizon: u64) -> Result<Vec<f64>> {
        (0..horizon).map(|i| self.mean_at(i)).collect()
    }

    /// Resolve everything horizon-dependent (factor depth, per-index list
    /// length) once, so per-path streams are cheap to spawn.
    pub fn prepare(&self, horizon: u64) -> Result<PreparedModel> {
        if horizon < 1 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        let inner = match self {
            DependenceModel::Iid { marginal } => {
                marginal.check_horizon(horizon)?;
                PreparedInner::Copula {
                    marginal: marginal.clone(),
                    factor: None,
                }
            }
            DependenceModel::GaussianCopula { marginal, bands, factor } => {
                marginal.check_horizon(horizon)?;
                let factor = if horizon as usize > factor.validated_depth() {
                    Arc::new(BandedCholesky::build(bands, horizon as usize)?)
                } else {
                    factor.clone()
                };
                PreparedInner::Copula {
                    marginal: marginal.clone(),
                    factor: Some(factor),
                }
            }
            DependenceModel::AntitheticPairs { marginal } => {
                marginal.check_horizon(horizon)?;
                PreparedInner::Antithetic {
                    marginal: marginal.clone(),
                }
            }
            DependenceModel::DiscreteJoint { joint } => PreparedInner::Discrete {
                joint: joint.clone(),
            },
        };
        Ok(PreparedModel { inner, horizon })
    }

    /// Deterministic stream of `X_1, X_2, ...` for one path; convenience
    /// wrapper over [`DependenceModel::prepare`].
    pub fn stream(&self, master_seed: u64, path: u64, horizon: u64) -> Result<PathStream> {
        Ok(self.prepare(horizon)?.stream(master_seed, path))
    }

    /// Materialize `path_count` paths of length `horizon` with exact means.
    pub fn generate(&self, master_seed: u64, path_count: u64, horizon: u64) -> Result<PathBatch> {
        let cells = path_count.checked_mul(horizon).ok_or(Error::EnumerationTooLarge {
            size: u64::MAX,
            cap: PathBatch::MAX_CELLS,
        })?;
        if cells > PathBatch::MAX_CELLS {
            return Err(Error::EnumerationTooLarge {
                size: cells,
                cap: PathBatch::MAX_CELLS,
            });
        }
        let prepared = self.prepare(horizon)?;
        let means = self.means(horizon)?;
        let mut values = Vec::with_capacity(path_count as usize);
        for path in 0..path_count {
            let stream = prepared.stream(master_seed, path);
            values.push(stream.take(horizon as usize).collect::<Vec<f64>>());
        }
        Ok(PathBatch {
            master_seed,
            path_count,
            horizon,
            values,
            means,
        })
    }

    /// Stochastic-domination audit of this model's marginals against a
    /// dominating law.
    pub fn domination_audit(
        &self,
        horizon: u64,
        dominator: &Marginal,
        constant_c: f64,
        t_grid: &[f64],
    ) -> Result<DominationCheck> {
        let per_index: Vec<Marginal> = match self {
            DependenceModel::Iid { marginal }
            | DependenceModel::AntitheticPairs { marginal }
            | DependenceModel::GaussianCopula { marginal, .. } => match marginal {
                MarginalSpec::Identical(m) => vec![*m],
                MarginalSpec::PerIndex(v) => {
                    marginal.check_horizon(horizon)?;
                    v[..horizon as usize].to_vec()
                }
            },
            DependenceModel::DiscreteJoint { .. } => {
                return Err(Error::invalid(
                    "model",
                    "domination audit needs analytic per-index marginals",
                ))
            }
        };
        domination_audit(&per_index, dominator, constant_c, t_grid)
    }
}

/// Per-path generator keyed by `(master_seed, path)`.
fn path_rng(master_seed: u64, path: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(path);
    rng
}

/// A model with all horizon-dependent state resolved; spawning a path
/// stream is O(bandwidth).
pub struct PreparedModel {
    inner: PreparedInner,
    horizon: u64,
}

enum PreparedInner {
    Copula {
        marginal: MarginalSpec,
        factor: Option<Arc<BandedCholesky>>,
    },
    Antithetic {
        marginal: MarginalSpec,
    },
    Discrete {
        joint: Arc<DiscreteJoint>,
    },
}

impl PreparedModel {
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn stream(&self, master_seed: u64, path: u64) -> PathStream {
        let rng = path_rng(master_seed, path);
        match &self.inner {
            PreparedInner::Copula { marginal, factor } => {
                let ring = factor
                    .as_ref()
                    .map(|f| vec![0.0; f.bandwidth() + 1])
                    .unwrap_or_default();
                PathStream::Copula(CopulaStream {
                    rng,
                    normal: Normal::new(0.0, 1.0).unwrap(),
                    marginal: marginal.clone(),
                    factor: factor.clone(),
                    ring,
                    index: 0,
                })
            }
            PreparedInner::Antithetic { marginal } => PathStream::Antithetic(AntitheticStream {
                rng,
                marginal: marginal.clone(),
                pending: None,
                index: 0,
            }),
            PreparedInner::Discrete { joint } => PathStream::Discrete(DiscreteStream {
                rng,
                joint: joint.clone(),
                block: Vec::new(),
                pos: 0,
            }),
        }
    }
}

/// A batch of materialized paths; immutable after construction.
#[derive(Debug, Clone)]
pub struct PathBatch {
    pub master_seed: u64,
    pub path_count: u64,
    pub horizon: u64,
    /// `values[path][index]`.
    pub values: Vec<Vec<f64>>,
    /// Exact `E X_index` from the marginal layer.
    pub means: Vec<f64>,
}

impl PathBatch {
    /// Cap on materialized cells (~0.5 GiB); larger runs must stream.
    pub const MAX_CELLS: u64 = 1 << 26;
}

/// Streaming view over one path.
pub enum PathStream {
    Copula(CopulaStream),
    Antithetic(AntitheticStream),
    Discrete(DiscreteStream),
}

impl Iterator for PathStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        match self {
            PathStream::Copula(s) => s.next(),
            PathStream::Antithetic(s) => s.next(),
            PathStream::Discrete(s) => s.next(),
        }
    }
}

/// Normal-pipeline stream: `x = Q(Phi(z))` with `z` independent (no factor)
/// or banded-correlated.
pub struct CopulaStream {
    rng: ChaCha12Rng,
    normal: Normal,
    marginal: MarginalSpec,
    factor: Option<Arc<BandedCholesky>>,
    ring: Vec<f64>,
    index: u64,
}

impl Iterator for CopulaStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let xi: f64 = self.rng.sample(StandardNormal);
        let z = match &self.factor {
            None => xi,
            Some(factor) => {
                let w = factor.bandwidth();
                let i = self.index as usize;
                self.ring[i % (w + 1)] = xi;
                let row = factor.row(i);
                let lo = i.saturating_sub(w);
                let mut z = 0.0;
                for j in lo..=i {
                    z += row[w - (i - j)] * self.ring[j % (w + 1)];
                }
                z
            }
        };
        // Phi(z) lands exactly on 0.0 or 1.0 only beyond |z| ~ 8.3; clamp so
        // the quantile stays finite.
        let u = self
            .normal
            .cdf(z)
            .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        let m = self.marginal.at(self.index).ok()?;
        self.index += 1;
        Some(m.quantile(u))
    }
}

/// Antithetic stream: draws `u` on odd steps and replays `1 - u` on even
/// ones, so a pair is exactly `(Q(u), Q(1-u))`.
pub struct AntitheticStream {
    rng: ChaCha12Rng,
    marginal: MarginalSpec,
    pending: Option<f64>,
    index: u64,
}

impl Iterator for AntitheticStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let u = match self.pending.take() {
            Some(partner) => partner,
            None => {
                let u: f64 = self.rng.sample(Open01);
                self.pending = Some(1.0 - u);
                u
            }
        };
        let m = self.marginal.at(self.index).ok()?;
        self.index += 1;
        Some(m.quantile(u))
    }
}

/// Discrete stream: independent copies of the joint, one coordinate at a
/// time.
pub struct DiscreteStream {
    rng: ChaCha12Rng,
    joint: Arc<DiscreteJoint>,
    block: Vec<f64>,
    pos: usize,
}

impl Iterator for DiscreteStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.pos == self.block.len() {
            let u: f64 = self.rng.gen();
            self.block = self.joint.sample_row(u).to_vec();
            self.pos = 0;
        }
        let v = self.block[self.pos];
        self.pos += 1;
        Some(v)
    }
}

/// Lower-triangular factor of a banded Toeplitz correlation matrix with
/// unit diagonal, computed row by row.
///
/// Rows converge to a fixed point; once two consecutive rows agree bitwise
/// the factor is frozen and reused, so arbitrarily long horizons cost O(1)
/// memory past the transient.
#[derive(Debug)]
pub struct BandedCholesky {
    /// `rows[i]` holds the coefficients for columns `i-w ..= i` (leading
    /// entries unused while `i < w`).
    rows: Vec<Vec<f64>>,
    frozen_from: Option<usize>,
    validated_depth: usize,
    bandwidth: usize,
}

impl BandedCholesky {
    pub fn build(bands: &[f64], depth: usize) -> Result<Self> {
        let w = bands.len();
        let cov = |lag: usize| -> f64 {
            if lag == 0 {
                1.0
            } else if lag <= w {
                bands[lag - 1]
            } else {
                0.0
            }
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut frozen_from = None;
        for i in 0..depth.max(w + 1) {
            let lo = i.saturating_sub(w);
            let mut row = vec![0.0; w + 1];
            // Solve L[i][j] for j = lo..i, then the diagonal. Offsets put
            // column m at slot w - (i - m), diagonal at w.
            for j in lo..i {
                let mut s = cov(i - j);
                for m in lo..j {
                    let lim = row[w - (i - m)];
                    let ljm = rows[j][w - (j - m)];
                    s -= lim * ljm;
                }
                let ljj = rows[j][w];
                row[w - (i - j)] = s / ljj;
            }
            let mut diag2 = cov(0);
            for m in lo..i {
                let v = row[w - (i - m)];
                diag2 -= v * v;
            }
            if !(diag2 > 0.0) {
                return Err(Error::NotPositiveSemidefinite { index: i });
            }
            row[w] = diag2.sqrt();
            if i > w && rows.last().map_or(false, |prev| prev == &row) {
                frozen_from = Some(i - 1);
                break;
            }
            rows.push(row);
        }
        Ok(BandedCholesky {
            rows,
            frozen_from,
            validated_depth: if frozen_from.is_some() { usize::MAX } else { depth },
            bandwidth: w,
        })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Depth to which positive definiteness is established. A frozen factor
    /// extends to any depth.
    pub fn validated_depth(&self) -> usize {
        self.validated_depth
    }

    /// Coefficient row for index `i` (offsets aligned so the diagonal sits
    /// at position `bandwidth`).
    pub fn row(&self, i: usize) -> &[f64] {
        match self.frozen_from {
            Some(f) if i >= f => &self.rows[f],
            _ => &self.rows[i.min(self.rows.len() - 1)],
        }
    }
}
