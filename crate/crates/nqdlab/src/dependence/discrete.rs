//! Finite-support joints and the exact oracle suite.
//!
//! All oracle decisions happen in exact rational arithmetic: every finite
//! `f64` is a rational, so converting the table once makes the NQD
//! inequality, covariance signs and the second-moment inequality free of
//! rounding. Returned summaries are converted back to `f64` at the end.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scaling::{g_trunc, TruncationWindow};

/// Cap on `rows * dim` for exact enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// A joint pmf over finitely many support points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    dim: usize,
    points: Vec<Vec<f64>>,
    probs: Vec<f64>,
    /// Cumulative probabilities for sampling, normalized to end at 1.
    cdf: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(points: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::invalid("joint", "need matching nonempty points and probs"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::invalid("joint", "dimension must be >= 1"));
        }
        let size = (points.len() as u64) * (dim as u64);
        if size > ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge { size, cap: ENUMERATION_CAP });
        }
        let mut total = 0.0f64;
        for (i, (pt, &p)) in points.iter().zip(&probs).enumerate() {
            if pt.len() != dim {
                return Err(Error::invalid("joint", format!("row {i} has wrong dimension")));
            }
            if pt.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("joint", format!("row {i} has a non-finite value")));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::invalid("joint", format!("row {i} has a bad probability")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "joint",
                format!("probabilities sum to {total}, not 1 within 1e-12"),
            ));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc / total);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(DiscreteJoint { dim, points, probs, cdf })
    }

    /// Parse `x_1, ..., x_d, probability` rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 2 {
                return Err(Error::config(
                    format!("joint csv line {}", lineno + 1),
                    "need at least one support column and a probability",
                ));
            }
            let mut row = Vec::with_capacity(fields.len() - 1);
            for f in &fields[..fields.len() - 1] {
                row.push(f.parse::<f64>().map_err(|_| {
                    Error::config(format!("joint csv line {}", lineno + 1), "bad support value")
                })?);
            }
            probs.push(fields[fields.len() - 1].parse::<f64>().map_err(|_| {
                Error::config(format!("joint csv line {}", lineno + 1), "bad probability")
            })?);
            points.push(row);
        }
        DiscreteJoint::new(points, probs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(|p| p.as_slice()).zip(self.probs.iter().copied()).map(|(p, q)| (p, q))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact mean of one coordinate (up to the final f64 conversion).
    pub fn coordinate_mean(&self, coord: usize) -> f64 {
        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for (pt, p) in self.rows() {
            let pr = big(p);
            num += big(pt[coord]) * &pr;
            den += pr;
        }
        (num / den).to_f64().unwrap_or(f64::NAN)
    }

    /// Row selected by a uniform draw in `[0, 1)`.
    pub fn sample_row(&self, u: f64) -> &[f64] {
        let idx = self.cdf.partition_point(|&c| c <= u).min(self.points.len() - 1);
        &self.points[idx]
    }

    /// Distinct sorted values of one coordinate.
    pub fn support(&self, coord: usize) -> Vec<f64> {
        let mut vals: Vec<f64> = self.points.iter().map(|p| p[coord]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        vals
    }
}

fn big(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite by validation")
}

/// Verdict of the exact pairwise NQD check.
#[derive(Debug, Clone)]
pub struct NqdReport {
    pub pass: bool,
    /// Largest value of `P{X<=x, Y<=y} - P{X<=x} P{Y<=y}` over all pairs
    /// and support corners (nonpositive exactly when the joint is NQD).
    pub worst_gap: f64,
    pub worst_pair: (usize, usize),
    pub worst_point: (f64, f64),
}

/// Evaluate the defining NQD inequality at every support corner for every
/// coordinate pair, in exact arithmetic.
pub fn nqd_check_exact(joint: &DiscreteJoint) -> Result<NqdReport> {
    let d = joint.dim();
    let mut worst_gap = BigRational::from_integer(BigInt::from(-1_000_000));
    let mut worst_pair = (0, 0);
    let mut worst_point = (0.0, 0.0);
    let mut any = false;

    let total: BigRational = joint.rows().map(|(_, p)| big(p)).sum();
    if total.is_zero() {
        return Err(Error::invalid("joint", "zero total mass"));
    }

    for a in 0..d {
        for b in (a + 1)..d {
            let va = joint.support(a);
            let vb = joint.support(b);
            let grid = (va.len() as u64) * (vb.len() as u64);
            if grid > ENUMERATION_CAP {
                return Err(Error::EnumerationTooLarge { size: grid, cap: ENUMERATION_CAP });
            }
            let index_of = |vals: &[f64], x: f64| vals.partition_point(|&v| v < x);
            // Joint mass on the (a, b) grid.
            let mut mass: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
            for (pt, p) in joint.rows() {
                let key = (index_of(&va, pt[a]), index_of(&vb, pt[b]));
                *mass.entry(key).or_insert_with(BigRational::zero) += big(p);
            }
            // 2D cumulative and the two marginals, scanned in order.
            let mut cum = vec![vec![BigRational::zero(); vb.len() + 1]; va.len() + 1];
            for i in 0..va.len() {
                for j in 0..vb.len() {
                    let cell = mass.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero);
                    let up = cum[i][j + 1].clone();
                    let left = cum[i + 1][j].clone();
                    let diag = cum[i][j].clone();
                    cum[i + 1][j + 1] = up + left - diag + cell;
                }
            }
            // The top row/column is excluded: with one marginal cdf at 1 the
            // inequality is an identity, so the informative corners are the
            // strict interior.
            for i in 1..va.len() {
                for j in 1..vb.len() {
                    let f_ab = &cum[i][j];
                    let f_a = &cum[i][vb.len()];
                    let f_b = &cum[va.len()][j];
                    // F_ab/S - (F_a/S)(F_b/S) <= 0  <=>  F_ab * S <= F_a * F_b.
                    let gap = f_ab * &total - f_a * f_b;
                    if gap > worst_gap || !any {
                        worst_gap = gap.clone();
                        worst_pair = (a, b);
                        worst_point = (va[i - 1], vb[j - 1]);
                        any = true;
                    }
                }
            }
        }
    }
    if d < 2 {
        return Err(Error::invalid("joint", "need at least two coordinates for an NQD check"));
    }
    if !any {
        // Every coordinate pair had a degenerate interior; the inequality
        // holds identically.
        return Ok(NqdReport {
            pass: true,
            worst_gap: 0.0,
            worst_pair: (0, 1),
            worst_point: (0.0, 0.0),
        });
    }
    // The reported gap is the unnormalized S^2-scaled value divided back.
    let scaled = &worst_gap / (&total * &total);
    Ok(NqdReport {
        pass: !worst_gap.is_positive(),
        worst_gap: scaled.to_f64().unwrap_or(f64::NAN),
        worst_pair,
        worst_point,
    })
}

/// Exact covariance `Cov(f(X), g(Y))` of a bivariate joint under
/// nondecreasing transforms; the sign is decided in rational arithmetic.
///
/// Preconditions are enforced: the joint must be bivariate and pass the
/// exact NQD check, and both transforms must be nondecreasing on the
/// respective supports.
pub fn covariance_sign_oracle(
    joint: &DiscreteJoint,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if joint.dim() != 2 {
        return Err(Error::invalid("joint", "covariance oracle needs a bivariate joint"));
    }
    let report = nqd_check_exact(joint)?;
    if !report.pass {
        return Err(Error::invalid(
            "joint",
            format!("not NQD: worst gap {:+e}", report.worst_gap),
        ));
    }
    for (coord, t) in [(0usize, f as &dyn Fn(f64) -> f64), (1, g)] {
        let vals = joint.support(coord);
        let mut prev = f64::NEG_INFINITY;
        for (i, &x) in vals.iter().enumerate() {
            let y = t(x);
            if !y.is_finite() {
                return Err(Error::NonMonotoneTransform { index: i });
            }
            if y < prev {
                return Err(Error::NonMonotoneTransform { index: i });
            }
            prev = y;
        }
    }
    let mut s = BigRational::zero();
    let mut sf = BigRational::zero();
    let mut sg = BigRational::zero();
    let mut sfg = BigRational::zero();
    for (pt, p) in joint.rows() {
        let pr = big(p);
        let fx = big(f(pt[0]));
        let gy = big(g(pt[1]));
        sf += &fx * &pr;
        sg += &gy * &pr;
        sfg += fx * gy * &pr;
        s += pr;
    }
    let cov = (&sfg * &s - &sf * &sg) / (&s * &s);
    Ok(cov.to_f64().unwrap_or(f64::NAN))
}

/// Both sides of the second-moment block inequality, evaluated exactly.
#[derive(Debug, Clone)]
pub struct MomentInequality {
    /// `E | Σ_blocks Σ_j (g(X_j) - E g(X_j)) |^2`.
    pub lhs: f64,
    /// `Σ_blocks E | Σ_j (g(X_j) - E g(X_j)) |^2`.
    pub rhs: f64,
    /// `lhs <= rhs`, decided on the exact rationals.
    pub holds: bool,
}

/// Evaluate the `r = 2` moment inequality for the truncated-and-centered
/// variables over the block layout `(ξ, η)`: blocks are
/// `(ξ_{k-1}, ξ_k]` for `k = η+1 .. ξ.len()-1` (coordinates are 1-based
/// positions in the joint).
pub fn moment_inequality_exact(
    joint: &DiscreteJoint,
    window: TruncationWindow,
    xi: &[usize],
    eta: usize,
) -> Result<MomentInequality> {
    if xi.len() < 2 || xi.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("xi", "need a strictly increasing block sequence"));
    }
    if *xi.last().unwrap() > joint.dim() {
        return Err(Error::invalid("xi", "block bounds exceed the joint dimension"));
    }
    if eta + 1 >= xi.len() {
        return Err(Error::invalid("eta", "offset leaves no blocks"));
    }
    let size = (joint.len() as u64) * (joint.dim() as u64);
    if size > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { size, cap: ENUMERATION_CAP });
    }

    let blocks: Vec<std::ops::Range<usize>> = xi
        .windows(2)
        .skip(eta)
        .map(|w| w[0]..w[1])
        .collect();

    // Truncated values and total mass.
    let total: BigRational = joint.rows().map(|(_, p)| big(p)).sum();
    let truncated: Vec<Vec<BigRational>> = joint
        .rows()
        .map(|(pt, _)| pt.iter().map(|&x| big(g_trunc(x, window))).collect())
        .collect();

    // Exact means of each coordinate's truncated value.
    let dim = joint.dim();
    let mut means = vec![BigRational::zero(); dim];
    for ((_, p), tv) in joint.rows().zip(&truncated) {
        let pr = big(p);
        for (m, v) in means.iter_mut().zip(tv) {
            *m += v * &pr;
        }
    }
    for m in means.iter_mut() {
        *m /= &total;
    }

    let mut lhs = BigRational::zero();
    let mut rhs_blocks = vec![BigRational::zero(); blocks.len()];
    for ((_, p), tv) in joint.rows().zip(&truncated) {
        let pr = big(p);
        let mut grand = BigRational::zero();
        for (bi, block) in blocks.iter().enumerate() {
            let mut bsum = BigRational::zero();
            for j in block.clone() {
                bsum += &tv[j] - &means[j];
            }
            rhs_blocks[bi] += &bsum * &bsum * &pr;
            grand += bsum;
        }
        lhs += &grand * &grand * &pr;
    }
    lhs /= &total;
    let mut rhs = BigRational::zero();
    for b in rhs_blocks {
        rhs += b;
    }
    rhs /= &total;

    Ok(MomentInequality {
        holds: lhs <= rhs,
        lhs: lhs.to_f64().unwrap_or(f64::NAN),
        rhs: rhs.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(p00: f64, p01: f64, p10: f64, p11: f64) -> DiscreteJoint {
        DiscreteJoint::new(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![p00, p01, p10, p11],
        )
        .unwrap()
    }

    #[test]
    fn product_pmf_passes_with_zero_gap() {
        // Independent fair coins: equality case.
        let joint = square(0.25, 0.25, 0.25, 0.25);
        let rep = nqd_check_exact(&joint).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_gap, 0.0);
    }

    #[test]
    fn negatively_dependent_square_passes() {
        let joint = square(0.1, 0.4, 0.4, 0.1);
        let rep = nqd_check_exact(&joint).unwrap();
        assert!(rep.pass);
        // Gap at (0,0): 0.1 - 0.25 = -0.15, and that is the largest.
        assert_eq!(rep.worst_gap, -0.15);
        assert_eq!(rep.worst_point, (0.0, 0.0));
    }

    #[test]
    fn positively_dependent_square_fails() {
        let joint = square(0.4, 0.1, 0.1, 0.4);
        let rep = nqd_check_exact(&joint).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_gap, 0.15);
    }

    #[test]
    fn covariance_identity_on_nqd_square() {
        let joint = square(0.1, 0.4, 0.4, 0.1);
        let id = |x: f64| x;
        let cov = covariance_sign_oracle(&joint, &id, &id).unwrap();
        assert_eq!(cov, -0.15);
    }

    #[test]
    fn covariance_zero_for_independent() {
        let joint = square(0.25, 0.25, 0.25, 0.25);
        let f = |x: f64| 2.0 * x + 1.0;
        let g = |x: f64| x * x;
        let cov = covariance_sign_oracle(&joint, &f, &g).unwrap();
        assert_eq!(cov, 0.0);
    }

    #[test]
    fn covariance_rejects_non_monotone() {
        let joint = square(0.1, 0.4, 0.4, 0.1);
        let bad = |x: f64| -x;
        assert!(matches!(
            covariance_sign_oracle(&joint, &bad, &(|x: f64| x)),
            Err(Error::NonMonotoneTransform { .. })
        ));
    }

    #[test]
    fn covariance_rejects_non_nqd_joint() {
        let joint = square(0.4, 0.1, 0.1, 0.4);
        assert!(covariance_sign_oracle(&joint, &(|x: f64| x), &(|x: f64| x)).is_err());
    }

    #[test]
    fn truncated_covariance_on_antithetic_discretization() {
        // Antithetic uniform on 64 dyadic atoms: exactly countermonotone.
        let n = 64u32;
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for i in 0..n {
            let u = (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
            points.push(vec![u, 1.0 - u]);
            probs.push(1.0 / n as f64);
        }
        let joint = DiscreteJoint::new(points, probs).unwrap();
        let w = TruncationWindow::new(0.0, 1.0).unwrap();
        let f = move |x: f64| g_trunc(x, w);
        let cov = covariance_sign_oracle(&joint, &f, &f).unwrap();
        assert!(cov <= 0.0, "cov = {cov}");
    }

    #[test]
    fn moment_inequality_independent_blocks_equality() {
        let joint = square(0.25, 0.25, 0.25, 0.25);
        let w = TruncationWindow::new(0.0, 10.0).unwrap();
        let mi = moment_inequality_exact(&joint, w, &[0, 1, 2], 0).unwrap();
        assert!(mi.holds);
        assert_eq!(mi.lhs, mi.rhs);
    }

    #[test]
    fn moment_inequality_antithetic_midpoints() {
        // 100 midpoint atoms of (U, 1-U); the grand sum is constant so the
        // lhs vanishes, and the rhs is 2 Var(U_n) = (n^2-1)/(6 n^2).
        let n = 100usize;
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for i in 0..n {
            let u = (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
            points.push(vec![u, 1.0 - u]);
            probs.push(1.0 / n as f64);
        }
        let joint = DiscreteJoint::new(points, probs).unwrap();
        let w = TruncationWindow::new(0.0, 1.0).unwrap();
        let mi = moment_inequality_exact(&joint, w, &[0, 1, 2], 0).unwrap();
        assert!(mi.holds);
        assert!(mi.lhs <= 1e-30, "lhs = {}", mi.lhs);
        let nf = n as f64;
        let expect = (nf * nf - 1.0) / (6.0 * nf * nf);
        assert!((mi.rhs - expect).abs() < 1e-12, "rhs = {} vs {expect}", mi.rhs);
    }

    #[test]
    fn moment_inequality_three_variable_gap() {
        // Three coordinates: an NQD pair extended by an independent third.
        // Blocks {1}, {2,3}: the gap is minus twice the cross-block
        // covariance sum.
        let pair = [
            (0.0, 0.0, 0.1),
            (0.0, 1.0, 0.4),
            (1.0, 0.0, 0.4),
            (1.0, 1.0, 0.1),
        ];
        let third = [(0.0, 0.5), (2.0, 0.5)];
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for &(x, y, p) in &pair {
            for &(z, q) in &third {
                points.push(vec![x, y, z]);
                probs.push(p * q);
            }
        }
        let joint = DiscreteJoint::new(points, probs).unwrap();
        let w = TruncationWindow::new(0.0, 5.0).unwrap();
        let mi = moment_inequality_exact(&joint, w, &[0, 1, 3], 0).unwrap();
        assert!(mi.holds);
        // Cross-block covariance: Cov(X1, X2) + Cov(X1, X3) = -0.15 + 0.
        let gap = mi.rhs - mi.lhs;
        assert!((gap - 0.3).abs() < 1e-12, "gap = {gap}");
    }

    #[test]
    fn eta_offset_selects_trailing_blocks() {
        let joint = square(0.1, 0.4, 0.4, 0.1);
        let w = TruncationWindow::new(0.0, 5.0).unwrap();
        // With eta = 1 only the block {2} remains: lhs == rhs.
        let mi = moment_inequality_exact(&joint, w, &[0, 1, 2], 1).unwrap();
        assert_eq!(mi.lhs, mi.rhs);
    }

    #[test]
    fn csv_roundtrip() {
        let text = "# x, y, p\n0, 0, 0.1\n0, 1, 0.4\n1, 0, 0.4\n1, 1, 0.1\n";
        let joint = DiscreteJoint::from_csv(text).unwrap();
        assert_eq!(joint.dim(), 2);
        assert_eq!(joint.len(), 4);
        assert!(nqd_check_exact(&joint).unwrap().pass);
        assert!(DiscreteJoint::from_csv("0,0\n").is_err());
        assert!(DiscreteJoint::from_csv("0, 0, 0.5\n0, 1, 0.6\n").is_err());
    }

    #[test]
    fn sampling_matches_pmf() {
        let joint = square(0.1, 0.4, 0.4, 0.1);
        let mut counts = [0usize; 4];
        let n = 40_000;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let row = joint.sample_row(u);
            let idx = (row[0] as usize) * 2 + row[1] as usize;
            counts[idx] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        for (f, p) in freqs.iter().zip([0.1, 0.4, 0.4, 0.1]) {
            assert!((f - p).abs() < 1e-3);
        }
    }
}
