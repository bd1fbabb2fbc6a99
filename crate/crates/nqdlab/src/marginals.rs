//! Analytic marginal distributions.
//!
//! Every kind carries closed forms for the survival function, the quantile,
//! full moments and the truncated moments the summability conditions
//! consume. Divergent moments are reported through the `f64::INFINITY`
//! sentinel, never by overflow. Only distributions with closed-form
//! truncated moments belong here; anything else would make the series
//! conditions unverifiable analytically.

use crate::error::{Error, Result};
use statrs::function::gamma::{gamma, gamma_li};

/// A nonnegative marginal with closed-form tail and truncated moments.
///
/// Signed demonstrations are built downstream as differences of two
/// nonnegative constructions, so the marginal layer itself stays on the
/// half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// Power-law tail `P{X > t} = (xm/t)^alpha` on `[xm, ∞)`.
    Pareto { alpha: f64, xm: f64 },
    /// `P{X > t} = e^{-rate t}` on `[0, ∞)`.
    Exponential { rate: f64 },
    /// Uniform on `[lo, hi]`, `0 <= lo < hi`.
    BoundedUniform { lo: f64, hi: f64 },
    /// Two atoms `v1 < v2` with `P{X = v1} = p1`.
    TwoPoint { v1: f64, p1: f64, v2: f64 },
}

/// Tolerance under which a pareto moment order is treated as equal to the
/// tail exponent and routed to the logarithmic branch; the generic branch
/// would divide two near-zero quantities there.
const PARETO_LOG_BRANCH: f64 = 1e-8;

impl Marginal {
    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", "pareto exponent must be positive"));
        }
        if !(xm > 0.0) || !xm.is_finite() {
            return Err(Error::invalid("xm", "pareto scale must be positive"));
        }
        Ok(Marginal::Pareto { alpha, xm })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid("rate", "rate must be positive"));
        }
        Ok(Marginal::Exponential { rate })
    }

    pub fn bounded_uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::invalid("lo/hi", "need 0 <= lo < hi < infinity"));
        }
        Ok(Marginal::BoundedUniform { lo, hi })
    }

    pub fn two_point(v1: f64, p1: f64, v2: f64) -> Result<Self> {
        if !(v1 >= 0.0) || !(v2 > v1) || !v2.is_finite() {
            return Err(Error::invalid("v1/v2", "need 0 <= v1 < v2 < infinity"));
        }
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::invalid("p1", "probability must lie in [0, 1]"));
        }
        Ok(Marginal::TwoPoint { v1, p1, v2 })
    }

    /// Point mass at `v`, as a degenerate two-point law.
    pub fn degenerate(v: f64) -> Result<Self> {
        Self::two_point(v, 1.0, v + 1.0)
    }

    /// Survival probability `P{X > t}` for `t >= 0`.
    pub fn tail(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match *self {
            Marginal::Pareto { alpha, xm } => {
                if t <= xm {
                    1.0
                } else {
                    (xm / t).powf(alpha)
                }
            }
            Marginal::Exponential { rate } => (-rate * t).exp(),
            Marginal::BoundedUniform { lo, hi } => {
                if t < lo {
                    1.0
                } else if t >= hi {
                    0.0
                } else {
                    (hi - t) / (hi - lo)
                }
            }
            Marginal::TwoPoint { v1, p1, v2 } => {
                let mut p = 0.0;
                if v1 > t {
                    p += p1;
                }
                if v2 > t {
                    p += 1.0 - p1;
                }
                p
            }
        }
    }

    /// `P{X <= t}`.
    pub fn cdf(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            Marginal::Pareto { alpha, xm } => {
                if t <= xm {
                    0.0
                } else {
                    1.0 - (xm / t).powf(alpha)
                }
            }
            Marginal::Exponential { rate } => -(-rate * t).exp_m1(),
            Marginal::BoundedUniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            Marginal::TwoPoint { v1, p1, v2 } => {
                let mut p = 0.0;
                if v1 <= t {
                    p += p1;
                }
                if v2 <= t {
                    p += 1.0 - p1;
                }
                p
            }
        }
    }

    /// Exact quantile (generalized inverse of the cdf) on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match *self {
            Marginal::Pareto { alpha, xm } => xm * (1.0 - u).powf(-1.0 / alpha),
            Marginal::Exponential { rate } => -(-u).ln_1p() / rate,
            Marginal::BoundedUniform { lo, hi } => lo + u * (hi - lo),
            Marginal::TwoPoint { v1, p1, v2 } => {
                if u <= p1 {
                    v1
                } else {
                    v2
                }
            }
        }
    }

    /// `E X^order`, or the infinity sentinel when divergent.
    pub fn moment(&self, order: f64) -> f64 {
        debug_assert!(order > 0.0);
        match *self {
            Marginal::Pareto { alpha, xm } => {
                if order >= alpha {
                    f64::INFINITY
                } else {
                    alpha * xm.powf(order) / (alpha - order)
                }
            }
            Marginal::Exponential { rate } => gamma(order + 1.0) / rate.powf(order),
            Marginal::BoundedUniform { lo, hi } => {
                (hi.powf(order + 1.0) - lo.powf(order + 1.0)) / ((order + 1.0) * (hi - lo))
            }
            Marginal::TwoPoint { v1, p1, v2 } => p1 * v1.powf(order) + (1.0 - p1) * v2.powf(order),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    /// `E X^order I{X <= cap}`; zero below the support, with the pareto
    /// `order == alpha` singularity routed through the log branch.
    pub fn truncated_moment(&self, order: f64, cap: f64) -> f64 {
        debug_assert!(order > 0.0 && cap >= 0.0);
        match *self {
            Marginal::Pareto { alpha, xm } => {
                if cap <= xm {
                    return 0.0;
                }
                if (order - alpha).abs() < PARETO_LOG_BRANCH {
                    alpha * xm.powf(alpha) * (cap / xm).ln()
                } else {
                    alpha * xm.powf(alpha) * (cap.powf(order - alpha) - xm.powf(order - alpha))
                        / (order - alpha)
                }
            }
            Marginal::Exponential { rate } => {
                if cap <= 0.0 {
                    0.0
                } else {
                    gamma_li(order + 1.0, rate * cap) / rate.powf(order)
                }
            }
            Marginal::BoundedUniform { lo, hi } => {
                if cap <= lo {
                    return 0.0;
                }
                let m = cap.min(hi);
                (m.powf(order + 1.0) - lo.powf(order + 1.0)) / ((order + 1.0) * (hi - lo))
            }
            Marginal::TwoPoint { v1, p1, v2 } => {
                let mut s = 0.0;
                if v1 <= cap {
                    s += p1 * v1.powf(order);
                }
                if v2 <= cap {
                    s += (1.0 - p1) * v2.powf(order);
                }
                s
            }
        }
    }

    /// `E X I{X > floor}`; rejected for infinite-mean marginals, and
    /// nonincreasing in `floor` with limit 0.
    pub fn upper_mean(&self, floor: f64) -> Result<f64> {
        debug_assert!(floor >= 0.0);
        match *self {
            Marginal::Pareto { alpha, xm } => {
                if alpha <= 1.0 {
                    return Err(Error::MeansUnavailable {
                        reason: format!("pareto mean diverges for alpha = {alpha} <= 1"),
                    });
                }
                let d = floor.max(xm);
                Ok(alpha * xm.powf(alpha) * d.powf(1.0 - alpha) / (alpha - 1.0))
            }
            Marginal::Exponential { rate } => Ok((floor + 1.0 / rate) * (-rate * floor).exp()),
            Marginal::BoundedUniform { lo, hi } => {
                if floor >= hi {
                    return Ok(0.0);
                }
                let m = floor.max(lo);
                Ok((hi * hi - m * m) / (2.0 * (hi - lo)))
            }
            Marginal::TwoPoint { v1, p1, v2 } => {
                let mut s = 0.0;
                if v1 > floor {
                    s += p1 * v1;
                }
                if v2 > floor {
                    s += (1.0 - p1) * v2;
                }
                Ok(s)
            }
        }
    }

    /// `E X^order I{lo < X <= hi}` — the middle band of the decomposition.
    pub fn banded_moment(&self, order: f64, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        (self.truncated_moment(order, hi) - self.truncated_moment(order, lo)).max(0.0)
    }

    /// Top of the support when bounded; `None` for heavy/exponential tails.
    pub fn support_max(&self) -> Option<f64> {
        match *self {
            Marginal::Pareto { .. } | Marginal::Exponential { .. } => None,
            Marginal::BoundedUniform { hi, .. } => Some(hi),
            Marginal::TwoPoint { v1, p1, v2 } => Some(if p1 == 1.0 { v1 } else { v2 }),
        }
    }

    /// Infimum of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            Marginal::Pareto { xm, .. } => xm,
            Marginal::Exponential { .. } => 0.0,
            Marginal::BoundedUniform { lo, .. } => lo,
            Marginal::TwoPoint { v1, p1, v2 } => {
                if p1 == 0.0 {
                    v2
                } else {
                    v1
                }
            }
        }
    }

    /// Parse a marginal spec in the config call grammar, e.g.
    /// `pareto(alpha = 1.8, xm = 1.0)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = parse_call(spec)?;
        let get = |key: &str| -> Result<f64> {
            args.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::config(format!("marginal.{key}"), "missing argument"))
        };
        let known = |keys: &[&str]| -> Result<()> {
            for (k, _) in &args {
                if !keys.contains(&k.as_str()) {
                    return Err(Error::config(
                        format!("marginal.{k}"),
                        format!("unknown argument for {name}"),
                    ));
                }
            }
            Ok(())
        };
        match name.as_str() {
            "pareto" => {
                known(&["alpha", "xm"])?;
                Marginal::pareto(get("alpha")?, get("xm")?)
            }
            "exponential" => {
                known(&["rate"])?;
                Marginal::exponential(get("rate")?)
            }
            "bounded_uniform" | "uniform" => {
                known(&["lo", "hi"])?;
                Marginal::bounded_uniform(get("lo")?, get("hi")?)
            }
            "two_point" => {
                known(&["v1", "p1", "v2"])?;
                Marginal::two_point(get("v1")?, get("p1")?, get("v2")?)
            }
            "degenerate" => {
                known(&["v"])?;
                Marginal::degenerate(get("v")?)
            }
            other => Err(Error::config(
                "marginal.kind",
                format!("unknown marginal kind `{other}`"),
            )),
        }
    }
}

/// Parse `name(key = value, ...)` with numeric values.
pub(crate) fn parse_call(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        // Bare name, no arguments.
        if spec.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !spec.is_empty() {
            return Ok((spec.to_string(), Vec::new()));
        }
        return Err(Error::config(spec, "expected `name(key = value, ...)`"));
    };
    if !spec.ends_with(')') {
        return Err(Error::config(spec, "unbalanced parentheses"));
    }
    let name = spec[..open].trim().to_string();
    let body = &spec[open + 1..spec.len() - 1];
    let mut args = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some(eq) = part.find('=') else {
            return Err(Error::config(part, "expected `key = value`"));
        };
        let key = part[..eq].trim().to_string();
        let value: f64 = part[eq + 1..]
            .trim()
            .parse()
            .map_err(|_| Error::config(part, "value is not a number"))?;
        args.push((key, value));
    }
    Ok((name, args))
}

/// Outcome of a stochastic-domination audit: the worst observed ratio
/// `P{X_n > t} / P{X > t}` over all indices and grid points.
#[derive(Debug, Clone)]
pub struct DominationCheck {
    pub constant_c: f64,
    pub worst_ratio: f64,
    pub worst_index: usize,
    pub worst_t: f64,
    pub skipped_zero_denominator: u64,
    pub pass: bool,
}

/// Audit `sup_n P{X_n > t} <= C P{X > t}` over a finite `t`-grid.
///
/// Grid points where the dominator's tail vanishes are skipped and counted;
/// if any per-index tail is positive there, the audit fails outright.
pub fn domination_audit(
    per_index: &[Marginal],
    dominator: &Marginal,
    constant_c: f64,
    t_grid: &[f64],
) -> Result<DominationCheck> {
    if per_index.is_empty() {
        return Err(Error::invalid("per_index", "no marginals to audit"));
    }
    if !(constant_c > 0.0) {
        return Err(Error::invalid("C", "domination constant must be positive"));
    }
    let mut worst_ratio = 0.0f64;
    let mut worst_index = 0usize;
    let mut worst_t = 0.0f64;
    let mut skipped = 0u64;
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::invalid("t_grid", "grid points must be >= 0"));
        }
        let denom = dominator.tail(t);
        for (i, m) in per_index.iter().enumerate() {
            let num = m.tail(t);
            if denom == 0.0 {
                if num > 0.0 {
                    // Unbounded ratio: fail with an infinite witness.
                    return Ok(DominationCheck {
                        constant_c,
                        worst_ratio: f64::INFINITY,
                        worst_index: i,
                        worst_t: t,
                        skipped_zero_denominator: skipped,
                        pass: false,
                    });
                }
                skipped += 1;
                continue;
            }
            let ratio = num / denom;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_index = i;
                worst_t = t;
            }
        }
    }
    Ok(DominationCheck {
        constant_c,
        worst_ratio,
        worst_index,
        worst_t,
        skipped_zero_denominator: skipped,
        pass: worst_ratio <= constant_c * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate, integrate_with_breakpoints};
    use approx::assert_relative_eq;

    fn pareto18() -> Marginal {
        Marginal::pareto(1.8, 1.0).unwrap()
    }

    #[test]
    fn tail_examples() {
        assert_relative_eq!(pareto18().tail(2.0), 2f64.powf(-1.8), epsilon = 1e-15);
        assert_eq!(pareto18().tail(0.5), 1.0);
        assert_eq!(Marginal::exponential(1.0).unwrap().tail(0.0), 1.0);
    }

    #[test]
    fn moment_examples() {
        assert_relative_eq!(pareto18().moment(1.0), 2.25, epsilon = 1e-13);
        assert_relative_eq!(pareto18().moment(1.5), 6.0, epsilon = 1e-12);
        assert_eq!(pareto18().moment(2.0), f64::INFINITY);
    }

    #[test]
    fn truncated_moment_examples() {
        // order 2, cap 4: 9 (4^{0.2} - 1)
        let expect = 9.0 * (4f64.powf(0.2) - 1.0);
        assert_relative_eq!(pareto18().truncated_moment(2.0, 4.0), expect, epsilon = 1e-12);
        assert_eq!(pareto18().truncated_moment(2.0, 0.0), 0.0);
        assert_eq!(
            Marginal::exponential(2.0).unwrap().truncated_moment(1.5, 0.0),
            0.0
        );
        // Log branch exactly at the exponent: 1.8 ln e = 1.8.
        assert_relative_eq!(
            pareto18().truncated_moment(1.8, std::f64::consts::E),
            1.8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn upper_mean_examples() {
        let expect = 2.25 * 4f64.powf(-0.8);
        assert_relative_eq!(pareto18().upper_mean(4.0).unwrap(), expect, epsilon = 1e-12);
        assert_relative_eq!(pareto18().upper_mean(0.0).unwrap(), 2.25, epsilon = 1e-13);
        let e1 = Marginal::exponential(1.0).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert_relative_eq!(e1.upper_mean(t).unwrap(), (t + 1.0) * (-t).exp(), epsilon = 1e-13);
        }
        // Infinite mean rejected.
        assert!(Marginal::pareto(0.9, 1.0).unwrap().upper_mean(1.0).is_err());
    }

    /// Density of the continuous kinds, for the quadrature oracle.
    fn density(m: &Marginal, x: f64) -> f64 {
        match *m {
            Marginal::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    alpha * xm.powf(alpha) * x.powf(-alpha - 1.0)
                }
            }
            Marginal::Exponential { rate } => rate * (-rate * x).exp(),
            Marginal::BoundedUniform { lo, hi } => {
                if x < lo || x > hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Marginal::TwoPoint { .. } => unreachable!("discrete"),
        }
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        // Independent oracle: integrate x^q * density directly.
        let cases: Vec<(Marginal, f64, f64)> = vec![
            (pareto18(), 2.0, 4.0),
            (pareto18(), 1.0, 7.5),
            (pareto18(), 1.8, 19.0),
            (Marginal::pareto(1.4, 2.0).unwrap(), 1.3, 11.0),
            (Marginal::exponential(1.0).unwrap(), 2.0, 5.0),
            (Marginal::exponential(0.5).unwrap(), 1.7, 9.0),
            (Marginal::bounded_uniform(0.0, 1.0).unwrap(), 2.0, 0.7),
            (Marginal::bounded_uniform(0.5, 3.0).unwrap(), 1.5, 2.2),
        ];
        for (m, order, cap) in cases {
            let lo = m.support_min();
            let f = |x: f64| x.powf(order) * density(&m, x);
            let q = integrate_with_breakpoints(
                &f,
                0.0,
                cap,
                &[lo],
                1e-13,
                1e-11,
                2048,
            )
            .unwrap();
            let closed = m.truncated_moment(order, cap);
            assert!(
                (closed - q.value).abs() <= 1e-9 * q.value.abs().max(1e-12),
                "truncated moment mismatch for {m:?} order {order} cap {cap}: {closed} vs {}",
                q.value
            );
        }
    }

    #[test]
    fn upper_mean_agrees_with_quadrature() {
        let m = pareto18();
        for floor in [1.0, 2.5, 10.0] {
            let f = |x: f64| x * density(&m, x);
            // Truncate far out; the neglected mass is ~T^{-0.8} relative.
            let t_end = 1e16;
            let breaks: Vec<f64> = (1..16).map(|j| 10f64.powi(j)).collect();
            let q = integrate_with_breakpoints(&f, floor, t_end, &breaks, 0.0, 1e-10, 4096).unwrap();
            let closed = m.upper_mean(floor).unwrap();
            assert!(
                (closed - q.value).abs() <= 1e-8 * closed,
                "upper mean mismatch at {floor}: {closed} vs {}",
                q.value
            );
        }
    }

    #[test]
    fn truncated_plus_upper_reconstructs_moment() {
        // E X^1 I{X<=c} + E X I{X>c} = E X whenever finite.
        let kinds = [
            pareto18(),
            Marginal::exponential(1.3).unwrap(),
            Marginal::bounded_uniform(0.2, 4.0).unwrap(),
            Marginal::two_point(0.5, 0.3, 2.0).unwrap(),
        ];
        for m in kinds {
            for c in [0.0, 0.4, 1.0, 3.7, 50.0] {
                let lhs = m.truncated_moment(1.0, c) + m.upper_mean(c).unwrap();
                assert_relative_eq!(lhs, m.mean(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn quantile_cdf_identity() {
        let continuous = [
            pareto18(),
            Marginal::exponential(0.7).unwrap(),
            Marginal::bounded_uniform(0.0, 2.5).unwrap(),
        ];
        for m in continuous {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let x = m.quantile(u);
                assert!(
                    (m.cdf(x) - u).abs() < 1e-12,
                    "cdf(quantile(u)) != u for {m:?} at u={u}"
                );
            }
        }
        // Discrete: the generalized inverse round-trips the atoms.
        let tp = Marginal::two_point(0.5, 0.3, 2.0).unwrap();
        assert_eq!(tp.quantile(tp.cdf(0.5)), 0.5);
        assert_eq!(tp.quantile(0.999), 2.0);
        assert_eq!(tp.quantile(0.29), 0.5);
    }

    #[test]
    fn upper_mean_monotone_nonincreasing() {
        let kinds = [
            pareto18(),
            Marginal::exponential(2.0).unwrap(),
            Marginal::bounded_uniform(0.0, 1.0).unwrap(),
            Marginal::two_point(0.1, 0.6, 5.0).unwrap(),
        ];
        for m in kinds {
            let mut prev = f64::INFINITY;
            for i in 0..600 {
                let d = i as f64 * 0.02;
                let v = m.upper_mean(d).unwrap();
                assert!(v <= prev + 1e-12);
                assert!(v <= m.mean() + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn domination_self_is_tight() {
        let m = pareto18();
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.5).collect();
        let check = domination_audit(&[m], &m, 1.0, &grid).unwrap();
        assert!(check.pass);
        assert_relative_eq!(check.worst_ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn domination_scaled_family_passes() {
        // Scaling a pareto by factors in (0, 1] scales xm; ratio = scale^alpha <= 1.
        let dominator = pareto18();
        let scaled: Vec<Marginal> = [0.5, 0.7, 0.9, 1.0]
            .iter()
            .map(|&s| Marginal::pareto(1.8, s).unwrap())
            .collect();
        let grid: Vec<f64> = (2..200).map(|i| i as f64 * 0.25).collect();
        let check = domination_audit(&scaled, &dominator, 1.0, &grid).unwrap();
        assert!(check.pass, "worst ratio {}", check.worst_ratio);
    }

    #[test]
    fn domination_heavier_tail_fails() {
        let dominator = pareto18();
        let heavy = Marginal::pareto(1.4, 1.0).unwrap();
        let grid: Vec<f64> = (1..60).map(|i| (i as f64 * 0.3).exp()).collect();
        let check = domination_audit(&[heavy], &dominator, 1.0, &grid).unwrap();
        assert!(!check.pass);
        assert!(check.worst_ratio > 1e3);
    }

    #[test]
    fn domination_skips_zero_denominator() {
        let dominator = Marginal::bounded_uniform(0.0, 1.0).unwrap();
        let inner = Marginal::bounded_uniform(0.0, 0.5).unwrap();
        let check = domination_audit(&[inner], &dominator, 1.0, &[0.0, 0.25, 1.0, 2.0]).unwrap();
        assert!(check.pass);
        assert_eq!(check.skipped_zero_denominator, 2);
    }

    #[test]
    fn parse_roundtrip() {
        let m = Marginal::parse("pareto(alpha = 1.8, xm = 1.0)").unwrap();
        assert_eq!(m, pareto18());
        assert!(Marginal::parse("pareto(alpha = 1.8)").is_err());
        assert!(Marginal::parse("pareto(alpha = 1.8, xm = 1.0, junk = 2)").is_err());
        assert!(Marginal::parse("cauchy(x0 = 0)").is_err());
        let u = Marginal::parse("uniform(lo = 0, hi = 1)").unwrap();
        assert_eq!(u, Marginal::bounded_uniform(0.0, 1.0).unwrap());
        let d = Marginal::parse("degenerate(v = 3.0)").unwrap();
        assert_eq!(d.mean(), 3.0);
        assert_eq!(d.support_max(), Some(3.0));
    }

    #[test]
    fn quadrature_moment_full_range_exponential() {
        // Full moment against quadrature with a negligible truncation.
        let m = Marginal::exponential(1.0).unwrap();
        let f = |x: f64| x.powf(2.5) * density(&m, x);
        let q = integrate(&f, 0.0, 250.0, 1e-12, 1e-11, 2048).unwrap();
        assert_relative_eq!(m.moment(2.5), q.value, max_relative = 1e-9);
    }
}
