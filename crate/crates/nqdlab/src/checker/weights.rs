//! Outer weights of the summability conditions and their tail brackets.
//!
//! Triangle conditions carry a weight `f(n) = [Λ_n^r] · ψ(n)` with ψ a
//! smooth power-log term; block conditions carry `(1/n)` times a blocky
//! coefficient evaluated at the block containing `n`. With unit `λ` the
//! maximal constants collapse to `floor(log2 n) + 1`, constant on dyadic
//! blocks, so tails are summed block-exactly with only the smooth factor
//! bracketed by integrals.

use crate::error::{Error, Result};
use crate::numerics::powlog::{log_floor, loglog_floor, Pll, PowLog};
use crate::numerics::quad::integrate_with_breakpoints;
use crate::scaling::ScalingFamily;

/// Nonnegative interval with saturating arithmetic; all certificate math
/// runs through these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iv {
    pub lo: f64,
    pub hi: f64,
}

impl Iv {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi * (1.0 + 1e-9) + 1e-300, "bad interval [{lo}, {hi}]");
        Iv { lo: lo.max(0.0).min(hi), hi }
    }

    pub fn point(v: f64) -> Self {
        Iv { lo: v, hi: v }
    }

    pub fn zero() -> Self {
        Iv { lo: 0.0, hi: 0.0 }
    }

    pub fn add(self, o: Iv) -> Iv {
        Iv { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    pub fn mul(self, o: Iv) -> Iv {
        Iv { lo: self.lo * o.lo, hi: self.hi * o.hi }
    }

    pub fn scale(self, c: f64) -> Iv {
        debug_assert!(c >= 0.0);
        Iv { lo: self.lo * c, hi: self.hi * c }
    }

    /// Widen symmetrically by a nonnegative error term.
    pub fn pad(self, e: f64) -> Iv {
        Iv { lo: (self.lo - e).max(0.0), hi: self.hi + e }
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// `∫_a^b ψ` with a rigorous-enough error pad: adaptive quadrature, error
/// estimates scaled by a safety factor.
pub(crate) fn smooth_integral(psi: &Pll, a: f64, b: f64) -> Result<Iv> {
    if b <= a {
        return Ok(Iv::zero());
    }
    // Subnormal band: quadrature error estimates break down, but the crude
    // decreasing-integrand bound is the right order of magnitude.
    let va = psi.eval(a);
    if va < 1e-285 {
        return Ok(Iv::new(0.0, va * (b - a)));
    }
    // Log-spaced seed segments keep the adaptive pass cheap on huge ranges.
    let mut breaks = Vec::new();
    let mut x = a * 8.0;
    while x < b {
        breaks.push(x);
        x *= 8.0;
        if breaks.len() > 400 {
            break;
        }
    }
    let q = integrate_with_breakpoints(&|u: f64| psi.eval(u), a, b, &breaks, 0.0, 1e-11, 8192)?;
    Ok(Iv::point(q.value).pad(4.0 * q.error))
}

/// Triangle-condition weight `f(n) = [Λ_n^r] · ψ(n)`.
#[derive(Debug, Clone)]
pub struct TriangleWeight {
    pub psi: Pll,
    /// `Some(r)` multiplies by `(floor(log2 n) + 1)^r` (unit-λ maximal
    /// constants); `None` leaves ψ alone.
    pub lambda_pow: Option<f64>,
}

const LOG2_RELAX: f64 = 1.0 + std::f64::consts::LOG2_E; // log2(2n) <= this * Log n

impl TriangleWeight {
    pub fn eval(&self, n: u64) -> f64 {
        let base = self.psi.eval(n as f64);
        match self.lambda_pow {
            None => base,
            Some(r) => {
                let lam = (63 - n.leading_zeros()) as f64 + 1.0;
                lam.powf(r) * base
            }
        }
    }

    /// Bracket `Σ_{n >= u} f(n)` for real `u >= 16`.
    pub fn tail_bracket(&self, u: f64) -> Result<Iv> {
        debug_assert!(u >= 16.0);
        match self.lambda_pow {
            None => {
                // ψ decreasing from here (dominant power < -1); integral
                // sandwich with a first-term pad.
                debug_assert!(self.psi.dlog(u) < 0.0);
                let v_far = far_start(u);
                let near = smooth_integral(&self.psi, u, v_far)?;
                let far_hi = self.psi.upper_powlog(v_far).tail_integral(v_far)?;
                let first = self.psi.eval(u);
                // Σ_{n >= ceil(u)} ψ(n) ∈ [∫_{u+1}^∞, ψ(u) + ∫_u^∞].
                let lo = (near.lo - first).max(0.0);
                let hi = near.hi + far_hi + first;
                Ok(Iv::new(lo, hi))
            }
            Some(r) => {
                // Dyadic blocks where the maximal constant is flat.
                let mut acc = Iv::zero();
                let mut j = u.log2().floor() as i32;
                let mut guard = 0;
                loop {
                    let lo_edge = (2f64.powi(j)).max(u);
                    let hi_edge = 2f64.powi(j + 1);
                    if lo_edge >= hi_edge {
                        j += 1;
                        continue;
                    }
                    let lam = ((j + 1) as f64).powf(r);
                    // Integer points in [lo_edge, hi_edge): sandwich by the
                    // integral with a one-term pad.
                    let integral = smooth_integral(&self.psi, lo_edge, hi_edge)?;
                    let pad = self.psi.eval(lo_edge);
                    let block = Iv::new(
                        (integral.lo - pad).max(0.0) * lam,
                        (integral.hi + pad) * lam,
                    );
                    acc = acc.add(block);
                    // Stop once the remaining mass is negligible.
                    let rest_scale = lam * self.psi.eval(hi_edge) * hi_edge;
                    if rest_scale < 1e-17 * acc.hi.max(1e-280) || guard > 900 {
                        // Cap everything past hi_edge with the log-relaxed
                        // closed form (upper side only).
                        let env = self
                            .psi
                            .upper_powlog(hi_edge)
                            .mul(&PowLog::new(LOG2_RELAX.powf(r), 0.0, r));
                        let far = env.tail_integral(hi_edge)? + env.eval(hi_edge);
                        acc = Iv::new(acc.lo, acc.hi + far);
                        break;
                    }
                    j += 1;
                    guard += 1;
                }
                Ok(acc)
            }
        }
    }

    /// Upper power-log envelope of `f` as a real function on `[u0, ∞)`.
    pub fn far_powlog(&self, u0: f64) -> PowLog {
        let base = self.psi.upper_powlog(u0);
        match self.lambda_pow {
            None => base,
            Some(r) => base.mul(&PowLog::new(LOG2_RELAX.powf(r), 0.0, r)),
        }
    }

    /// Lower power-log envelope on `[u0, ∞)` (for divergence minorants).
    pub fn tail_lower_powlog(&self, u0: f64) -> PowLog {
        // Λ_n >= 1 always, so the ψ lower envelope suffices.
        self.psi.lower_powlog(u0)
    }
}

/// Where quadrature hands over to closed-form caps: far enough that the
/// capped mass is a vanishing fraction of the tail.
fn far_start(u: f64) -> f64 {
    (u * 2f64.powi(48)).min(1e280)
}

/// Blocky coefficient of the block conditions, as a function of the path
/// index `n` through the block containing it.
#[derive(Debug, Clone)]
pub struct BlockWeight {
    pub fam: ScalingFamily,
    pub kind: BlockWeightKind,
}

#[derive(Debug, Clone)]
pub enum BlockWeightKind {
    /// `Λ_{k+1}^r / b_{l_k}^r` (unit λ).
    MaximalOverNormalizer { r: f64 },
    /// `Log^r k / denom(l_k)` with a power-log denominator in `l_k`.
    LogOverDenom { r: f64, denom: Pll },
}

impl BlockWeight {
    /// Exact value for a known block (original index `k`, lower edge `l_k`).
    pub fn eval_exact(&self, orig_k: u64, l_k: u64) -> f64 {
        match &self.kind {
            BlockWeightKind::MaximalOverNormalizer { r } => {
                let lam = (63 - (orig_k + 1).leading_zeros()) as f64 + 1.0;
                lam.powf(*r) / self.fam.normalizer_b(l_k).powf(*r)
            }
            BlockWeightKind::LogOverDenom { r, denom } => {
                log_floor(orig_k as f64).powf(*r) / denom.eval(l_k as f64)
            }
        }
    }

    /// Bracket of the coefficient at real path position `u` in the
    /// analytic region: the block index is `phi_s(u)` up to ±1 and the
    /// lower edge lies in `[u / ratio_bound, u)`.
    pub fn bracket(&self, u: f64) -> Iv {
        let fam = &self.fam;
        let phi = u.ln().powf(1.0 / fam.s());
        let k_lo = (phi - 1.5).max(1.0);
        let k_hi = phi + 1.5;
        let rho = fam.block_ratio_bound((k_lo - 1.0).max(1.0));
        let l_lo = u / rho;
        let l_hi = u;
        match &self.kind {
            BlockWeightKind::MaximalOverNormalizer { r } => {
                // floor(log2(k+1)) + 1 is constant across the short index
                // bracket except when a dyadic boundary slices through it.
                let lam_lo = (k_lo + 1.0).log2().floor().max(0.0) + 1.0;
                let lam_hi = (k_hi + 1.0).log2().floor() + 1.0;
                let b_lo = fam.b_at(l_lo);
                let b_hi = fam.b_at(l_hi);
                Iv::new(
                    lam_lo.powf(*r) / b_hi.powf(*r),
                    lam_hi.powf(*r) / b_lo.powf(*r),
                )
            }
            BlockWeightKind::LogOverDenom { r, denom } => {
                let log_lo = log_floor(k_lo).powf(*r);
                let log_hi = log_floor(k_hi).powf(*r);
                // denom is increasing in l for our shapes.
                Iv::new(log_lo / denom.eval(l_hi), log_hi / denom.eval(l_lo))
            }
        }
    }

    /// Dominant power decay of the coefficient in the path index; drives
    /// the sensitivity of brackets to the block-edge ratio.
    pub fn u_decay(&self) -> f64 {
        match &self.kind {
            BlockWeightKind::MaximalOverNormalizer { r } => r / self.fam.p(),
            BlockWeightKind::LogOverDenom { denom, .. } => denom.u_exp,
        }
    }

    /// Upper power-log envelope of the coefficient on `[u0, ∞)`.
    ///
    /// Uses `Log k(u) <= (1/s) LLog u + margin` and relaxes iterated logs
    /// upward; returns an error when the anchor is too small for the
    /// margins to be monotone.
    pub fn far_powlog(&self, u0: f64) -> Result<PowLog> {
        let fam = &self.fam;
        if u0 < 1e4 {
            return Err(Error::invalid("anchor", "block far envelope needs u0 >= 1e4"));
        }
        let phi0 = u0.ln().powf(1.0 / fam.s());
        let rho = fam.block_ratio_bound((phi0 - 2.0).max(1.0));
        match &self.kind {
            BlockWeightKind::MaximalOverNormalizer { r } => {
                // Λ_{k(u)+1} <= C(u0) LLog u with the ratio checked at the
                // anchor (it decreases in u).
                let c_at = |u: f64| {
                    let k = u.ln().powf(1.0 / fam.s()) + 2.5;
                    ((k.log2() + 2.0) / loglog_floor(u)).max(1.0)
                };
                let c0 = c_at(u0);
                for m in 1..6 {
                    let probe = u0 * 10f64.powi(12 * m);
                    if probe > 1e280 {
                        break;
                    }
                    if c_at(probe) > c0 * (1.0 + 1e-9) {
                        return Err(Error::invalid(
                            "anchor",
                            "maximal-constant ratio not settled at this anchor",
                        ));
                    }
                }
                // b(l_k)^{-r} <= rho^{r/p} u^{-r/p} (iterated-log factor >= 1).
                let coeff = c0.powf(*r) * rho.powf(r / fam.p());
                // LLog^r relaxed into Log^r.
                Ok(PowLog::new(coeff, -r / fam.p(), *r))
            }
            BlockWeightKind::LogOverDenom { r, denom } => {
                // Log k(u) <= (1/s)(LLog u)(1 + margin at the anchor).
                let margin = (log_floor(phi0 + 2.5) * fam.s() / loglog_floor(u0)).max(1.0);
                let num = (margin / fam.s()).powf(*r);
                // denom(l) >= denom evaluated with l >= u/rho and its
                // nonnegative log powers dropped where they only help.
                let denom_lo = Pll::new(
                    denom.coeff / rho.powf(denom.u_exp),
                    denom.u_exp,
                    0.0,
                    0.0,
                );
                let inv = PowLog::new(1.0 / denom_lo.coeff, -denom_lo.u_exp, 0.0);
                Ok(inv.mul(&PowLog::new(num, 0.0, *r)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::KahanSum;

    fn psi_c(p: f64, r: f64) -> Pll {
        // 1/(n b_n^r) = n^{-1-r/p} (LLog n)^{-2r(p-1)/p}
        Pll::new(1.0, -1.0 - r / p, 0.0, -2.0 * r * (p - 1.0) / p)
    }

    #[test]
    fn triangle_tail_bracket_covers_brute_force() {
        for lambda_pow in [None, Some(2.0)] {
            let w = TriangleWeight { psi: psi_c(1.5, 2.0), lambda_pow };
            let u = 512.0;
            let bracket = w.tail_bracket(u).unwrap();
            let mut acc = KahanSum::new();
            for n in 512u64..40_000_000 {
                acc.add(w.eval(n));
            }
            // The rest is far below the bracket resolution here.
            let brute = acc.value();
            assert!(
                bracket.lo <= brute * 1.0000001,
                "lo {} > brute {brute} (lambda={lambda_pow:?})",
                bracket.lo
            );
            assert!(
                bracket.hi >= brute * 0.9999999,
                "hi {} < brute {brute} (lambda={lambda_pow:?})",
                bracket.hi
            );
            // And tight: the first-term pad dominates the width.
            assert!(bracket.half_width() / brute < 0.02, "width {}", bracket.half_width() / brute);
        }
    }

    #[test]
    fn triangle_far_envelope_dominates() {
        let w = TriangleWeight { psi: psi_c(1.8, 2.0), lambda_pow: Some(2.0) };
        let env = w.far_powlog(1e6);
        for i in 0..40 {
            let u = 1e6 * 3f64.powi(i);
            let n = u as u64;
            assert!(w.eval(n) <= env.eval(n as f64) * (1.0 + 1e-9), "at n={n}");
        }
    }

    #[test]
    fn block_weight_bracket_contains_exact_values() {
        let fam = ScalingFamily::sharp(1.5).unwrap();
        let grid = crate::scaling::BlockGrid::build(&fam, 300_000).unwrap();
        let w = BlockWeight {
            fam,
            kind: BlockWeightKind::MaximalOverNormalizer { r: 2.0 },
        };
        for b in grid.blocks().iter().skip(3) {
            let exact = w.eval_exact(b.orig_k, b.lo.max(2));
            // Any n inside the block must be bracketed.
            let n = b.lo + 1 + (b.hi - b.lo) / 2;
            if n < 64 {
                continue;
            }
            let br = w.bracket(n as f64);
            assert!(
                br.lo <= exact * 1.000001 && exact <= br.hi * 1.000001,
                "block k={} n={n}: exact {exact} not in [{}, {}]",
                b.orig_k,
                br.lo,
                br.hi
            );
        }
    }

    #[test]
    fn block_weight_bracket_dense_regime() {
        let fam = ScalingFamily::sharp(1.8).unwrap(); // s = 1/9: dense blocks
        let grid = crate::scaling::BlockGrid::build(&fam, 100_000).unwrap();
        let w = BlockWeight {
            fam,
            kind: BlockWeightKind::MaximalOverNormalizer { r: 2.0 },
        };
        for b in grid.blocks().iter().skip(10).step_by(97) {
            let exact = w.eval_exact(b.orig_k, b.lo.max(2));
            let n = b.hi;
            if n < 100 {
                continue;
            }
            let br = w.bracket(n as f64);
            assert!(
                br.lo <= exact * 1.00001 && exact <= br.hi * 1.00001,
                "dense block k={} n={n}: exact {exact} not in [{}, {}]",
                b.orig_k,
                br.lo,
                br.hi
            );
        }
    }

    #[test]
    fn block_far_envelope_dominates_bracket() {
        let fam = ScalingFamily::sharp(1.5).unwrap();
        let w = BlockWeight {
            fam,
            kind: BlockWeightKind::MaximalOverNormalizer { r: 2.0 },
        };
        let env = w.far_powlog(1e7).unwrap();
        for i in 0..30 {
            let u = 1e7 * 10f64.powi(i);
            if u > 1e200 {
                break;
            }
            let br = w.bracket(u);
            assert!(br.hi <= env.eval(u) * (1.0 + 1e-9), "at u={u}");
        }
    }
}
