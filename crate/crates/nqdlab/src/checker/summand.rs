//! Per-index summands of the summability conditions.
//!
//! Every condition's inner term is one of three shapes evaluated at a
//! deterministic threshold `T(u)`: a truncated moment below `T`, a scaled
//! tail probability `T^r P{X > T}`, or an upper mean above `T`. The exact
//! closed forms come from the marginal layer; what this module adds is the
//! structure the tail machinery needs — monotone-piece breakpoints and
//! far power-log envelopes.

use crate::marginals::Marginal;
use crate::numerics::powlog::{exp_power_domination, Pll, PowLog};

/// Which functional of the marginal the summand takes at the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HKind {
    /// `E X^order I{X <= T(u)}`.
    TruncMoment { order: f64 },
    /// `T(u)^order P{X > T(u)}`.
    PowTail { order: f64 },
    /// `E X I{X > T(u)}`.
    UpperMean,
    /// `E X^order I{T2(u) < X <= T(u)}` — the middle band between a lower
    /// curve and `T`.
    BandedMoment { order: f64 },
}

/// A summand: a shape, a threshold curve and a marginal.
#[derive(Debug, Clone)]
pub struct HSpec {
    pub kind: HKind,
    pub threshold: Pll,
    /// Lower band edge for [`HKind::BandedMoment`].
    pub lower_threshold: Option<Pll>,
    pub marginal: Marginal,
}

/// Far envelope of a summand on `[anchor, ∞)`.
#[derive(Debug, Clone, Copy)]
pub enum FarUpper {
    /// Identically zero from the anchor on.
    Zero,
    /// Dominated by a power-log term.
    Env(PowLog),
}

const NEAR_EXPONENT: f64 = 1e-8;

impl HSpec {
    pub fn new(kind: HKind, threshold: Pll, marginal: Marginal) -> Self {
        HSpec { kind, threshold, lower_threshold: None, marginal }
    }

    pub fn banded(order: f64, lower: Pll, upper: Pll, marginal: Marginal) -> Self {
        HSpec {
            kind: HKind::BandedMoment { order },
            threshold: upper,
            lower_threshold: Some(lower),
            marginal,
        }
    }

    /// Exact value at real `u >= 1`.
    pub fn eval(&self, u: f64) -> f64 {
        let t = self.threshold.eval(u).max(0.0);
        match self.kind {
            HKind::TruncMoment { order } => self.marginal.truncated_moment(order, t),
            HKind::PowTail { order } => {
                let tail = self.marginal.tail(t);
                if tail == 0.0 || t == 0.0 {
                    0.0
                } else {
                    let v = t.powf(order) * tail;
                    if v.is_finite() {
                        v
                    } else {
                        // Huge thresholds overflow the direct product; the
                        // log-space form stays finite.
                        (order * t.ln() + tail.ln()).exp()
                    }
                }
            }
            HKind::UpperMean => self.marginal.upper_mean(t).unwrap_or(f64::INFINITY),
            HKind::BandedMoment { order } => {
                let t2 = self
                    .lower_threshold
                    .as_ref()
                    .map(|c| c.eval(u).max(0.0))
                    .unwrap_or(0.0);
                self.marginal.banded_moment(order, t2.min(t), t)
            }
        }
    }

    /// `u`-locations in `[lo, hi]` where the summand can change monotone
    /// direction or kink: the threshold's own turning point plus every
    /// crossing of a critical threshold level.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let flip = self.threshold_flip();
        if let Some(f) = flip {
            if f > lo && f < hi {
                out.push(f);
            }
        }
        let mut curves: Vec<&Pll> = vec![&self.threshold];
        if let Some(c) = &self.lower_threshold {
            curves.push(c);
            if let Some(f) = curve_flip(c) {
                if f > lo && f < hi {
                    out.push(f);
                }
            }
        }
        for curve in curves {
            let cflip = curve_flip(curve);
            for level in self.critical_levels() {
                for piece in pieces_of(lo, hi, cflip) {
                    if let Some(x) = solve_threshold(curve, level, piece.0, piece.1) {
                        if x > lo && x < hi {
                            out.push(x);
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * b.abs().max(1.0));
        out
    }

    /// `u` beyond which the summand is identically zero, if any.
    pub fn zero_beyond(&self, search_from: f64) -> Option<f64> {
        match self.kind {
            HKind::TruncMoment { .. } => None,
            HKind::BandedMoment { .. } => {
                // Zero once the lower edge clears the support top.
                let top = self.marginal.support_max()?;
                let lower = self.lower_threshold.as_ref()?;
                let flip = curve_flip(lower).unwrap_or(1.0).max(search_from);
                let mut hi = flip.max(4.0);
                for _ in 0..4000 {
                    if lower.eval(hi) > top {
                        break;
                    }
                    hi *= 2.0;
                }
                solve_threshold(lower, top, flip, hi).map(|x| x * (1.0 + 1e-12) + 1.0)
            }
            HKind::PowTail { .. } | HKind::UpperMean => {
                let top = self.marginal.support_max()?;
                // T(u) eventually increases past the support top.
                let flip = self.threshold_flip().unwrap_or(1.0).max(search_from);
                let mut hi = flip.max(4.0);
                for _ in 0..4000 {
                    if self.threshold.eval(hi) > top {
                        break;
                    }
                    hi *= 2.0;
                }
                solve_threshold(&self.threshold, top, flip, hi).map(|x| x * (1.0 + 1e-12) + 1.0)
            }
        }
    }

    /// Upper power-log envelope valid on `[anchor, ∞)`.
    ///
    /// The anchor must lie beyond every breakpoint (threshold increasing,
    /// above the support-related levels); callers get that from
    /// [`HSpec::breakpoints`].
    pub fn far_upper(&self, anchor: f64) -> FarUpper {
        let p_inv = self.threshold.u_exp; // 1/p for all our thresholds
        debug_assert!(p_inv > 0.0);
        let t_up = self.threshold.upper_powlog(anchor);
        let t_lo = self.threshold.lower_powlog(anchor);
        let pow_up = |e: f64| -> PowLog {
            // T^e <= (upper T)^e for e >= 0, (lower T)^e for e < 0.
            if e >= 0.0 {
                t_up.powf_term(e)
            } else {
                t_lo.powf_term(e)
            }
        };
        match (&self.kind, &self.marginal) {
            (HKind::TruncMoment { order }, Marginal::Pareto { alpha, xm }) => {
                if *order > *alpha + NEAR_EXPONENT {
                    let a = alpha * xm.powf(*alpha) / (order - alpha);
                    FarUpper::Env(pow_up(order - alpha).scaled(a))
                } else if (*order - *alpha).abs() <= NEAR_EXPONENT {
                    // Log branch: h = alpha xm^alpha ln(T/xm) <= C Log u.
                    let c = ln_threshold_slope(&self.threshold, anchor);
                    FarUpper::Env(PowLog::new(alpha * xm.powf(*alpha) * c, 0.0, 1.0))
                } else {
                    FarUpper::Env(PowLog::constant(self.marginal.moment(*order)))
                }
            }
            (HKind::TruncMoment { order }, _) => {
                FarUpper::Env(PowLog::constant(self.marginal.moment(*order)))
            }
            (HKind::BandedMoment { order }, Marginal::Pareto { alpha, xm }) => {
                // Bounded by the truncated moment at the upper curve.
                let trunc = HSpec::new(
                    HKind::TruncMoment { order: *order },
                    self.threshold,
                    Marginal::Pareto { alpha: *alpha, xm: *xm },
                );
                trunc.far_upper(anchor)
            }
            (HKind::BandedMoment { order }, _) => {
                FarUpper::Env(PowLog::constant(self.marginal.moment(*order)))
            }
            (HKind::PowTail { order }, Marginal::Pareto { alpha, xm }) => {
                FarUpper::Env(pow_up(order - alpha).scaled(xm.powf(*alpha)))
            }
            (HKind::PowTail { order }, Marginal::Exponential { rate }) => {
                // e^{-rate T} <= K T^{-m} turns the tail into power decay.
                let m = order + 2.0 / p_inv + 1.0;
                let k = exp_power_domination(*rate, 1.0, m);
                FarUpper::Env(pow_up(*order).mul(&pow_up(-m).scaled(k)))
            }
            (HKind::UpperMean, Marginal::Pareto { alpha, xm }) => {
                let a = alpha * xm.powf(*alpha) / (alpha - 1.0);
                FarUpper::Env(pow_up(1.0 - alpha).scaled(a))
            }
            (HKind::UpperMean, Marginal::Exponential { rate }) => {
                // (T + 1/rate) e^{-rate T} <= (1 + 1/(rate T0)) T e^{-rate T}.
                let t0 = self.threshold.eval(anchor);
                let c = 1.0 + 1.0 / (rate * t0);
                let m = 1.0 + 2.0 / p_inv + 1.0;
                let k = exp_power_domination(*rate, 1.0, m);
                FarUpper::Env(pow_up(1.0).mul(&pow_up(-m)).scaled(c * k))
            }
            (HKind::PowTail { .. } | HKind::UpperMean, _) => {
                // Bounded support: zero once the threshold clears the top.
                FarUpper::Zero
            }
        }
    }

    /// Lower power-log envelope on `[anchor, ∞)` for divergence minorants;
    /// only the heavy-tail kinds provide one.
    pub fn far_lower(&self, anchor: f64) -> Option<PowLog> {
        let t_up = self.threshold.upper_powlog(anchor);
        let t_lo = self.threshold.lower_powlog(anchor);
        let pow_lo = |e: f64| -> PowLog {
            if e >= 0.0 {
                t_lo.powf_term(e)
            } else {
                t_up.powf_term(e)
            }
        };
        match (&self.kind, &self.marginal) {
            (HKind::TruncMoment { order }, Marginal::Pareto { alpha, xm }) => {
                if *order <= *alpha + NEAR_EXPONENT {
                    return None;
                }
                // A (T^{o-a} - xm^{o-a}) >= A (1 - eps) T_lo^{o-a}.
                let t0 = self.threshold.eval(anchor);
                if t0 <= *xm * 1.5 {
                    return None;
                }
                let eps = (xm / t0).powf(order - alpha);
                let a = alpha * xm.powf(*alpha) / (order - alpha) * (1.0 - eps);
                Some(pow_lo(order - alpha).scaled(a))
            }
            (HKind::PowTail { order }, Marginal::Pareto { alpha, xm }) => {
                let t0 = self.threshold.eval(anchor);
                if t0 <= *xm {
                    return None;
                }
                Some(pow_lo(order - alpha).scaled(xm.powf(*alpha)))
            }
            (HKind::UpperMean, Marginal::Pareto { alpha, xm }) => {
                if *alpha <= 1.0 {
                    return None;
                }
                let a = alpha * xm.powf(*alpha) / (alpha - 1.0);
                Some(pow_lo(1.0 - alpha).scaled(a))
            }
            _ => None,
        }
    }

    /// The threshold's single turning point (it dips before climbing when
    /// the log powers bite early), if inside the increasing-forever regime.
    pub fn threshold_flip(&self) -> Option<f64> {
        curve_flip(&self.threshold)
    }

    fn critical_levels(&self) -> Vec<f64> {
        match (&self.kind, &self.marginal) {
            (_, Marginal::Pareto { xm, .. }) => vec![*xm],
            (HKind::PowTail { order }, Marginal::Exponential { rate }) => vec![order / rate],
            (_, Marginal::Exponential { .. }) => vec![],
            (HKind::PowTail { order }, Marginal::BoundedUniform { lo, hi }) => {
                vec![*lo, *hi, order * hi / (order + 1.0)]
            }
            (_, Marginal::BoundedUniform { lo, hi }) => vec![*lo, *hi],
            (_, Marginal::TwoPoint { v1, v2, .. }) => vec![*v1, *v2],
        }
    }
}

fn curve_flip(t: &Pll) -> Option<f64> {
    if t.u_exp <= 0.0 {
        return None;
    }
    let lo = 16.0f64;
    let hi = 1e120f64;
    if t.dlog(lo) >= 0.0 {
        return None; // increasing from the start of the range
    }
    if t.dlog(hi) <= 0.0 {
        return None; // never turns (not our thresholds, but be safe)
    }
    Some(bisect(|u| t.dlog(u), lo, hi))
}

fn pieces_of(lo: f64, hi: f64, flip: Option<f64>) -> Vec<(f64, f64)> {
    match flip {
        Some(f) if f > lo && f < hi => vec![(lo, f), (f, hi)],
        _ => vec![(lo, hi)],
    }
}

/// Upper bound on `ln T(u) / Log u` over `[anchor, ∞)` for an eventually
/// increasing threshold.
fn ln_threshold_slope(t: &Pll, anchor: f64) -> f64 {
    let l0 = anchor.max(16.0).ln();
    t.u_exp + t.coeff.ln().max(0.0) / l0 + t.log_exp.max(0.0) * l0.ln() / l0
}

/// Solve `T(u) = level` on a monotone piece by bisection; `None` when the
/// level is not crossed there.
fn solve_threshold(t: &Pll, level: f64, lo: f64, hi: f64) -> Option<f64> {
    if !(level > 0.0) || lo >= hi {
        return None;
    }
    let f = |u: f64| t.eval(u) - level;
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    Some(bisect(f, lo, hi))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let rising = f(hi) > f(lo);
    for _ in 0..400 {
        // Log-space midpoint: the bracket can span hundreds of decades.
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        let v = f(mid);
        if (v > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `PowLog` raised to a real power (component-wise on the exponents).
pub trait PowLogPow {
    fn powf_term(&self, e: f64) -> PowLog;
}

impl PowLogPow for PowLog {
    fn powf_term(&self, e: f64) -> PowLog {
        PowLog::new(self.coeff.powf(e), self.u_exp * e, self.log_exp * e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_threshold(p: f64) -> Pll {
        // c_u = u^{1/p} (Log u)^{-2/(2-p)}
        Pll::new(1.0, 1.0 / p, -2.0 / (2.0 - p), 0.0)
    }

    fn d_threshold(p: f64) -> Pll {
        // d_u = u^{1/p} (LLog u)^{-2/p}
        Pll::new(1.0, 1.0 / p, 0.0, -2.0 / p)
    }

    #[test]
    fn threshold_flip_found_for_c_family() {
        let h = HSpec::new(
            HKind::TruncMoment { order: 2.0 },
            c_threshold(1.5),
            Marginal::pareto(1.8, 1.0).unwrap(),
        );
        let flip = h.threshold_flip().expect("c has a dip");
        // c increasing iff Log u > 2p/(2-p) = 6 for p = 1.5.
        assert!((flip.ln() - 6.0).abs() < 1e-6, "flip at ln u = {}", flip.ln());
        // d with LLog barely moves; dips too but much earlier in Log terms.
        let hd = HSpec::new(
            HKind::PowTail { order: 2.0 },
            d_threshold(1.5),
            Marginal::pareto(1.8, 1.0).unwrap(),
        );
        let _ = hd.threshold_flip();
    }

    #[test]
    fn far_upper_dominates_pareto_summands() {
        let m = Marginal::pareto(1.8, 1.0).unwrap();
        for kind in [
            HKind::TruncMoment { order: 2.0 },
            HKind::PowTail { order: 2.0 },
            HKind::UpperMean,
        ] {
            let h = HSpec::new(kind, c_threshold(1.5), m);
            let bps = h.breakpoints(16.0, 1e60);
            let anchor = bps.last().copied().unwrap_or(16.0).max(1e8) * 4.0;
            let FarUpper::Env(env) = h.far_upper(anchor) else {
                panic!("pareto envelopes are never zero")
            };
            for i in 0..60 {
                let u = anchor * 10f64.powi(i / 2) * (1.0 + 0.37 * (i % 2) as f64);
                if u > 1e280 {
                    break;
                }
                assert!(
                    h.eval(u) <= env.eval(u) * (1.0 + 1e-9),
                    "envelope fails for {kind:?} at u={u}: {} > {}",
                    h.eval(u),
                    env.eval(u)
                );
            }
        }
    }

    #[test]
    fn far_upper_dominates_exponential_summands() {
        let m = Marginal::exponential(0.7).unwrap();
        for kind in [
            HKind::TruncMoment { order: 2.0 },
            HKind::PowTail { order: 2.0 },
            HKind::UpperMean,
        ] {
            let h = HSpec::new(kind, c_threshold(1.5), m);
            let bps = h.breakpoints(16.0, 1e60);
            let anchor = bps.last().copied().unwrap_or(16.0).max(1e9) * 4.0;
            let FarUpper::Env(env) = h.far_upper(anchor) else {
                panic!("exponential envelopes are never zero")
            };
            for i in 0..40 {
                let u = anchor * 10f64.powi(i);
                if u > 1e250 {
                    break;
                }
                assert!(
                    h.eval(u) <= env.eval(u) * (1.0 + 1e-9),
                    "envelope fails for {kind:?} at u={u}"
                );
            }
        }
    }

    #[test]
    fn bounded_support_summands_vanish() {
        let m = Marginal::bounded_uniform(0.0, 2.0).unwrap();
        let h = HSpec::new(HKind::UpperMean, c_threshold(1.5), m);
        let z = h.zero_beyond(16.0).expect("threshold outgrows the support");
        assert_eq!(h.eval(z), 0.0);
        assert_eq!(h.eval(z * 10.0), 0.0);
        assert!(matches!(h.far_upper(z), FarUpper::Zero));
        // And it is genuinely positive somewhere before.
        assert!(h.eval(2.0) > 0.0);
    }

    #[test]
    fn far_lower_is_a_lower_bound() {
        let m = Marginal::pareto(1.3, 1.0).unwrap();
        let h = HSpec::new(HKind::UpperMean, c_threshold(1.5), m);
        let bps = h.breakpoints(16.0, 1e60);
        let anchor = bps.last().copied().unwrap_or(16.0).max(1e10) * 4.0;
        let env = h.far_lower(anchor).expect("pareto has a minorant");
        for i in 0..30 {
            let u = anchor * 10f64.powi(i);
            if u > 1e200 {
                break;
            }
            assert!(
                h.eval(u) >= env.eval(u) * (1.0 - 1e-9),
                "minorant fails at u={u}"
            );
        }
    }

    #[test]
    fn breakpoints_cover_support_crossings() {
        let m = Marginal::pareto(1.8, 1.0).unwrap();
        let h = HSpec::new(HKind::TruncMoment { order: 2.0 }, c_threshold(1.5), m);
        let bps = h.breakpoints(16.0, 1e60);
        // c dips below xm = 1 and climbs back: flip plus one crossing at
        // least (c starts above 1 only for tiny u, so in [16, 1e60] we see
        // the upward crossing).
        assert!(!bps.is_empty());
        let crossing = bps.last().unwrap();
        let t = c_threshold(1.5);
        assert!((t.eval(*crossing) - 1.0).abs() < 1e-6);
    }
}
