//! Constructive corpus of exactly-NQD discrete joints for property tests.
//!
//! Rejection sampling would starve (random pmfs are rarely NQD), so each
//! joint is built NQD by construction: a mixture `t W + (1-t) Π` of the
//! countermonotone coupling `W` and the independent coupling `Π` of one
//! common pair of marginals. Sharing marginals is what makes mixtures safe:
//! `W(x,y) <= F(x) G(y)` pointwise and mixing cannot cross the product of
//! the (unchanged) marginals.
//!
//! All weights are dyadic rationals chosen so every probability is an exact
//! `f64`; the oracle layer then certifies the inequalities with zero
//! arithmetic slack.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::discrete::DiscreteJoint;

/// Denominator exponent for marginal weights: probabilities are multiples
/// of 2^-12.
const WEIGHT_BITS: u32 = 12;
/// Mixture weight resolution: t is a multiple of 2^-6.
const MIX_BITS: u32 = 6;

/// One corpus entry: the joint plus the mixture weight used to build it.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub joint: DiscreteJoint,
    /// Countermonotone fraction in [0, 1].
    pub mix_t: f64,
}

/// Deterministic corpus of `count` exactly-NQD joints (bivariate, with a
/// sprinkling of trivariate product extensions).
pub fn nqd_corpus(count: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        // Force the two pure cases early, then sample the mixture freely.
        let t_num: u64 = match i {
            0 => 1 << MIX_BITS,
            1 => 0,
            _ => rng.gen_range(0..=(1u64 << MIX_BITS)),
        };
        let m1 = rng.gen_range(2..=6usize);
        let m2 = rng.gen_range(2..=6usize);
        let xs = support_values(&mut rng, m1);
        let ys = support_values(&mut rng, m2);
        let wx = dyadic_weights(&mut rng, m1);
        let wy = dyadic_weights(&mut rng, m2);
        let mut entry = mixture_joint(&xs, &ys, &wx, &wy, t_num);
        if i % 5 == 4 {
            let m3 = rng.gen_range(2..=3usize);
            let zs = support_values(&mut rng, m3);
            let wz = dyadic_weights(&mut rng, m3);
            entry = extend_independent(&entry, &zs, &wz);
        }
        out.push(CorpusEntry {
            joint: entry,
            mix_t: t_num as f64 / (1u64 << MIX_BITS) as f64,
        });
    }
    out
}

/// A random nondecreasing transform with exact dyadic values on a sorted
/// support; returned as a lookup closure.
pub fn random_monotone_transform(
    rng: &mut ChaCha12Rng,
    support: &[f64],
) -> impl Fn(f64) -> f64 + Send + Sync {
    let xs: Vec<f64> = support.to_vec();
    let mut y = rng.gen_range(-8i64..=8) as f64 * 0.25;
    let ys: Vec<f64> = xs
        .iter()
        .map(|_| {
            let v = y;
            y += rng.gen_range(0..=8) as f64 * 0.125;
            v
        })
        .collect();
    move |x: f64| {
        let idx = xs.partition_point(|&v| v < x);
        ys[idx.min(ys.len() - 1)]
    }
}

/// Sorted distinct multiples of 1/8 in [0, 8]: exact in f64.
fn support_values(rng: &mut ChaCha12Rng, m: usize) -> Vec<f64> {
    let mut picks = std::collections::BTreeSet::new();
    while picks.len() < m {
        picks.insert(rng.gen_range(0..=64u32));
    }
    picks.into_iter().map(|k| k as f64 * 0.125).collect()
}

/// Positive integer weights summing to exactly 2^WEIGHT_BITS.
fn dyadic_weights(rng: &mut ChaCha12Rng, m: usize) -> Vec<u64> {
    let total = 1u64 << WEIGHT_BITS;
    loop {
        let mut cuts: Vec<u64> = (0..m - 1).map(|_| rng.gen_range(1..total)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() != m - 1 {
            continue;
        }
        let mut w = Vec::with_capacity(m);
        let mut prev = 0;
        for &c in &cuts {
            w.push(c - prev);
            prev = c;
        }
        w.push(total - prev);
        if w.iter().all(|&x| x > 0) {
            return w;
        }
    }
}

/// `t W + (1-t) Π` built on integer mass, emitted as exact f64 probabilities
/// with denominator 2^(MIX_BITS + 2 WEIGHT_BITS).
fn mixture_joint(xs: &[f64], ys: &[f64], wx: &[u64], wy: &[u64], t_num: u64) -> DiscreteJoint {
    let m1 = xs.len();
    let m2 = ys.len();
    let total = 1u64 << WEIGHT_BITS;
    let t_den = 1u64 << MIX_BITS;

    // Countermonotone coupling by greedy mass matching: smallest x with
    // largest y. Integer masses make it exact.
    let mut w_mass = vec![vec![0u64; m2]; m1];
    {
        let mut px = wx.to_vec();
        let mut py = wy.to_vec();
        let mut i = 0usize;
        let mut j = m2 - 1;
        loop {
            let d = px[i].min(py[j]);
            w_mass[i][j] += d;
            px[i] -= d;
            py[j] -= d;
            if px[i] == 0 && i + 1 < m1 {
                i += 1;
            }
            if py[j] == 0 {
                if j == 0 {
                    break;
                }
                j -= 1;
            }
            if px.iter().all(|&v| v == 0) && py.iter().all(|&v| v == 0) {
                break;
            }
        }
    }

    // joint numerator over denominator t_den * total^2:
    //   t_num * w_mass * total + (t_den - t_num) * wx * wy
    let mut points = Vec::new();
    let mut probs = Vec::new();
    let denom = (t_den as f64) * (total as f64) * (total as f64);
    for i in 0..m1 {
        for j in 0..m2 {
            let num = t_num * w_mass[i][j] * total + (t_den - t_num) * wx[i] * wy[j];
            if num > 0 {
                points.push(vec![xs[i], ys[j]]);
                probs.push(num as f64 / denom);
            }
        }
    }
    DiscreteJoint::new(points, probs).expect("dyadic construction is a valid pmf")
}

/// Product extension by an independent coordinate (preserves pairwise NQD).
fn extend_independent(joint: &DiscreteJoint, zs: &[f64], wz: &[u64]) -> DiscreteJoint {
    let total = (1u64 << WEIGHT_BITS) as f64;
    let mut points = Vec::new();
    let mut probs = Vec::new();
    for (pt, p) in joint.rows() {
        for (z, &w) in zs.iter().zip(wz) {
            let mut row = pt.to_vec();
            row.push(*z);
            points.push(row);
            probs.push(p * (w as f64 / total));
        }
    }
    DiscreteJoint::new(points, probs).expect("product of valid pmfs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::discrete::{covariance_sign_oracle, nqd_check_exact};

    #[test]
    fn corpus_members_are_exactly_nqd() {
        for entry in nqd_corpus(60, 71) {
            let rep = nqd_check_exact(&entry.joint).unwrap();
            assert!(
                rep.pass,
                "corpus joint (t = {}) failed with gap {:+e}",
                entry.mix_t, rep.worst_gap
            );
        }
    }

    #[test]
    fn corpus_covers_mixture_range_and_dimensions() {
        let corpus = nqd_corpus(50, 5);
        assert!(corpus.iter().any(|e| e.mix_t == 1.0));
        assert!(corpus.iter().any(|e| e.mix_t == 0.0));
        assert!(corpus.iter().any(|e| e.joint.dim() == 3));
        assert!(corpus.iter().filter(|e| e.joint.dim() == 2).count() > 30);
    }

    #[test]
    fn monotone_transforms_give_nonpositive_covariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for entry in nqd_corpus(25, 3) {
            if entry.joint.dim() != 2 {
                continue;
            }
            let sx = entry.joint.support(0);
            let sy = entry.joint.support(1);
            for _ in 0..10 {
                let f = random_monotone_transform(&mut rng, &sx);
                let g = random_monotone_transform(&mut rng, &sy);
                let cov = covariance_sign_oracle(&entry.joint, &f, &g).unwrap();
                assert!(cov <= 0.0, "cov = {cov} at t = {}", entry.mix_t);
            }
        }
    }
}
