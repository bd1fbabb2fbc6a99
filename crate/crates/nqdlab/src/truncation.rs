//! Three-way sample decomposition and its block-sum bookkeeping.
//!
//! Each nonnegative sample `x` splits against thresholds `c <= d` into a
//! bounded core (capped at `c`), a middle band (the part between `c` and
//! `d`, capped at `d - c`) and the excess above `d`. The components always
//! recombine to `x` within one ulp; analytic marginals give the component
//! means exactly, which is what keeps the series verdicts noise-free.

use crate::dependence::PathBatch;
use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::numerics::KahanSum;
use crate::scaling::{BlockGrid, ScalingFamily};

/// The split of one sample: `core + band + excess == x` (up to 1 ulp).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationTriple {
    /// `x I{x <= c} + c I{x > c}` — in `[0, c]`.
    pub core: f64,
    /// `x I{c < x <= d} - c I{x > c} + d I{x > d}` — in `[0, d - c]`.
    pub band: f64,
    /// `(x - d)^+`.
    pub excess: f64,
}

/// Split `x >= 0` at `0 <= c <= d`.
///
/// For `x > d` the excess is computed as the residual against the rounded
/// sum of the first two parts, which pins the reconstruction error to a
/// single rounding.
pub fn decompose(x: f64, c: f64, d: f64) -> Result<TruncationTriple> {
    if !(c >= 0.0) || !(d >= c) {
        return Err(Error::invalid("thresholds", format!("need 0 <= c <= d, got c={c} d={d}")));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid("x", "sample must be nonnegative"));
    }
    if x <= c {
        Ok(TruncationTriple { core: x, band: 0.0, excess: 0.0 })
    } else if x <= d {
        Ok(TruncationTriple { core: c, band: x - c, excess: 0.0 })
    } else {
        let band = d - c;
        let excess = (x - (c + band)).max(0.0);
        Ok(TruncationTriple { core: c, band, excess })
    }
}

/// Exact means of the three components for an analytic marginal:
/// `E core = E X I{X<=c} + c P{X>c}`, and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentMeans {
    pub core: f64,
    pub band: f64,
    pub excess: f64,
}

pub fn component_means(m: &Marginal, c: f64, d: f64) -> Result<ComponentMeans> {
    if !(c >= 0.0) || !(d >= c) {
        return Err(Error::invalid("thresholds", format!("need 0 <= c <= d, got c={c} d={d}")));
    }
    let tail_c = m.tail(c);
    let tail_d = m.tail(d);
    let core = m.truncated_moment(1.0, c) + c * tail_c;
    let band = m.banded_moment(1.0, c, d) - c * tail_c + d * tail_d;
    let excess = m.upper_mean(d)? - d * tail_d;
    Ok(ComponentMeans { core, band, excess })
}

/// A batch split into component paths, with exact per-index means.
#[derive(Debug, Clone)]
pub struct DecomposedBatch {
    pub thresholds: Vec<(f64, f64)>,
    pub means: Vec<ComponentMeans>,
    /// `core[path][index]`, etc.
    pub core: Vec<Vec<f64>>,
    pub band: Vec<Vec<f64>>,
    pub excess: Vec<Vec<f64>>,
}

/// Apply the decomposition at `(c_k, d_k)` along every path of a batch.
///
/// Component means come from the marginal closed forms; empirical centering
/// would corrupt the series checks downstream.
pub fn decompose_batch(
    batch: &PathBatch,
    marginal: &Marginal,
    fam: &ScalingFamily,
) -> Result<DecomposedBatch> {
    let horizon = batch.horizon;
    let mut thresholds = Vec::with_capacity(horizon as usize);
    let mut means = Vec::with_capacity(horizon as usize);
    for k in 1..=horizon {
        let c = fam.threshold_c(k);
        let d = fam.threshold_d(k);
        thresholds.push((c, d));
        means.push(component_means(marginal, c, d)?);
    }
    let mut core = Vec::with_capacity(batch.values.len());
    let mut band = Vec::with_capacity(batch.values.len());
    let mut excess = Vec::with_capacity(batch.values.len());
    for path in &batch.values {
        let mut pc = Vec::with_capacity(path.len());
        let mut pb = Vec::with_capacity(path.len());
        let mut pe = Vec::with_capacity(path.len());
        for (x, &(c, d)) in path.iter().zip(&thresholds) {
            let t = decompose(*x, c, d)?;
            pc.push(t.core);
            pb.push(t.band);
            pe.push(t.excess);
        }
        core.push(pc);
        band.push(pb);
        excess.push(pe);
    }
    Ok(DecomposedBatch { thresholds, means, core, band, excess })
}

/// Centered sum of one block `(lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct BlockSum {
    /// Original block index `k` (the block is `(l_{k-1}, l_k]`).
    pub orig_k: u64,
    pub lo: u64,
    pub hi: u64,
    pub sum: f64,
}

/// Block sums of a centered path plus the running boundary maxima
/// `M_k = max_{n <= k+1} |S_{l_n}|` that drive the blockwise event
/// frequencies.
#[derive(Debug, Clone)]
pub struct BlockStatistics {
    pub block_sums: Vec<BlockSum>,
    /// `max_stat[k]` is the maximum of `|S_{l_n}|` over `n <= k+2` when that
    /// boundary lies inside the horizon, aligned with `block_sums[k]`.
    pub max_stat: Vec<f64>,
}

/// Compute centered block sums and boundary prefix maxima over the
/// deduplicated block grid.
///
/// `values[i]` is the sample at index `i + 1`; `mean(i)` its exact mean.
pub fn block_sums(
    values: &[f64],
    mean: &dyn Fn(u64) -> f64,
    grid: &BlockGrid,
) -> Result<BlockStatistics> {
    let horizon = values.len() as u64;
    let first = grid
        .blocks()
        .first()
        .ok_or_else(|| Error::invalid("grid", "empty block grid"))?;
    if horizon < first.hi {
        return Err(Error::invalid(
            "horizon",
            format!("path of length {horizon} shorter than first block edge {}", first.hi),
        ));
    }

    let mut prefix = KahanSum::new();
    let mut boundary_abs: Vec<f64> = Vec::new();
    let mut block_sums = Vec::new();
    let mut idx = 0u64;
    let mut prev_boundary_value = 0.0f64;
    for b in grid.blocks() {
        if b.hi > horizon {
            break;
        }
        while idx < b.hi {
            let x = values[idx as usize];
            prefix.add(x - mean(idx + 1));
            idx += 1;
        }
        let s = prefix.value();
        block_sums.push(BlockSum {
            orig_k: b.orig_k,
            lo: b.lo,
            hi: b.hi,
            sum: s - prev_boundary_value,
        });
        boundary_abs.push(s.abs());
        prev_boundary_value = s;
    }

    // Running maxima over boundaries 1..=k+1 for each block position k
    // (0-based): max_stat[k] = max(boundary_abs[0..=k+1]) clipped to what
    // the horizon provides.
    let mut max_stat = Vec::with_capacity(block_sums.len());
    let mut running = 0.0f64;
    for (k, &b) in boundary_abs.iter().enumerate() {
        running = running.max(b);
        if k >= 1 {
            max_stat.push(running);
        }
    }
    // Align: max_stat[k] uses boundaries up to k+1, so position k gets the
    // running max after seeing boundary k+1; the last block has no k+1
    // boundary inside the horizon and reuses the final running max.
    max_stat.push(running);

    Ok(BlockStatistics { block_sums, max_stat })
}
