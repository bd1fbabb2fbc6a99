//! Closed forms and rigorous bounds for log-power sums and integrals.
//!
//! Everything the series checker pushes past its last exact checkpoint has
//! the shape `coeff · u^{e} · (Log u)^{g}` (possibly after relaxing
//! iterated-log factors). For `e < -1` the tail integral has an exact
//! incomplete-gamma form, and monotonicity turns it into a two-sided bound
//! on the corresponding tail sum.

use crate::error::{Error, Result};
use statrs::function::gamma::{digamma, gamma, gamma_ur};

/// `Log x` from the notation layer: natural log clamped below at 1.
#[inline]
pub fn log_floor(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

/// One term `coeff · u^{u_exp} · (Log u)^{log_exp}`.
///
/// Products of terms compose by adding exponents, which is how per-factor
/// envelopes combine into an envelope for a whole summand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowLog {
    pub coeff: f64,
    pub u_exp: f64,
    pub log_exp: f64,
}

impl PowLog {
    pub fn new(coeff: f64, u_exp: f64, log_exp: f64) -> Self {
        PowLog { coeff, u_exp, log_exp }
    }

    pub fn constant(c: f64) -> Self {
        PowLog::new(c, 0.0, 0.0)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.coeff * u.powf(self.u_exp) * log_floor(u).powf(self.log_exp)
    }

    pub fn mul(&self, other: &PowLog) -> PowLog {
        PowLog {
            coeff: self.coeff * other.coeff,
            u_exp: self.u_exp + other.u_exp,
            log_exp: self.log_exp + other.log_exp,
        }
    }

    pub fn scaled(&self, c: f64) -> PowLog {
        PowLog { coeff: self.coeff * c, ..*self }
    }

    /// Smallest `u` from which the term is nonincreasing.
    ///
    /// `u^{e} Log^{g} u` with `e < 0` decreases once `Log u >= g / (-e)`;
    /// below `e` the term is never eventually decreasing.
    pub fn monotone_from(&self) -> Option<f64> {
        if self.u_exp >= 0.0 {
            if self.u_exp == 0.0 && self.log_exp <= 0.0 {
                return Some(std::f64::consts::E);
            }
            return None;
        }
        let t = (self.log_exp / -self.u_exp).max(1.0);
        Some(t.exp() * 1.000_000_1)
    }

    /// Exact tail integral `∫_{u0}^{∞} coeff · u^{e} Log^{g} u du`.
    ///
    /// Requires `e < -1` and `g >= 0`; negative `g` callers freeze the log
    /// factor at `u0` first (upper bound) via [`PowLog::relax_neg_log`].
    pub fn tail_integral(&self, u0: f64) -> Result<f64> {
        let sigma = -self.u_exp;
        if sigma <= 1.0 {
            return Err(Error::invalid(
                "powlog tail",
                format!("u-exponent {} does not decay (needs < -1)", self.u_exp),
            ));
        }
        if self.log_exp < 0.0 {
            return Err(Error::invalid(
                "powlog tail",
                "negative log exponent: relax it before integrating",
            ));
        }
        if u0 < 1.0 {
            return Err(Error::invalid("powlog tail", "u0 must be >= 1"));
        }
        // Piece below e, where Log == 1.
        let e = std::f64::consts::E;
        let mut total = 0.0;
        let lo = u0.max(e);
        if u0 < e {
            // ∫_{u0}^{e} u^{-σ} du
            total += (u0.powf(1.0 - sigma) - e.powf(1.0 - sigma)) / (sigma - 1.0);
        }
        // ∫_{lo}^{∞} u^{-σ} ln^g u du = Γ(g+1, (σ-1) ln lo) / (σ-1)^{g+1}
        total += upper_gamma(self.log_exp + 1.0, (sigma - 1.0) * lo.ln())
            / (sigma - 1.0).powf(self.log_exp + 1.0);
        Ok(self.coeff * total)
    }

    /// Upper/lower bounds for the tail sum `Σ_{n >= ceil(u0)} term(n)`.
    ///
    /// Valid when the term is nonincreasing from `u0` on; returns an error
    /// otherwise so callers cannot silently misuse it.
    pub fn tail_sum_bounds(&self, u0: f64) -> Result<(f64, f64)> {
        match self.monotone_from() {
            Some(m) if m <= u0 => {}
            _ => {
                return Err(Error::invalid(
                    "powlog tail sum",
                    format!("term not monotone from {u0}"),
                ))
            }
        }
        let hi = self.eval(u0) + self.tail_integral(u0)?;
        let lo = self.tail_integral(u0 + 1.0)?;
        Ok((lo, hi))
    }

    /// Replace a negative log power by its value at `u0`, which upper-bounds
    /// the term on `[u0, ∞)`.
    pub fn relax_neg_log(&self, u0: f64) -> PowLog {
        if self.log_exp >= 0.0 {
            *self
        } else {
            PowLog::new(
                self.coeff * log_floor(u0).powf(self.log_exp),
                self.u_exp,
                0.0,
            )
        }
    }
}

/// `LLog x`: iterated natural log clamped below at 1 (duplicated from the
/// notation layer to keep this module self-contained).
#[inline]
pub fn loglog_floor(x: f64) -> f64 {
    const E_TO_E: f64 = 15.154_262_241_479_262;
    x.max(E_TO_E).ln().ln()
}

/// One term `coeff · u^{u_exp} · (Log u)^{log_exp} · (LLog u)^{llog_exp}`.
///
/// This is the shape of every deterministic weight in the summability
/// conditions. Iterated-log factors have no closed-form tail, so bounds
/// relax them: `1 <= LLog u <= Log u` lets either direction be absorbed
/// into the plain-log exponent or frozen at the anchor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pll {
    pub coeff: f64,
    pub u_exp: f64,
    pub log_exp: f64,
    pub llog_exp: f64,
}

impl Pll {
    pub fn new(coeff: f64, u_exp: f64, log_exp: f64, llog_exp: f64) -> Self {
        Pll { coeff, u_exp, log_exp, llog_exp }
    }

    pub fn constant(c: f64) -> Self {
        Pll::new(c, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let mut v = self.coeff * u.powf(self.u_exp);
        if self.log_exp != 0.0 {
            v *= log_floor(u).powf(self.log_exp);
        }
        if self.llog_exp != 0.0 {
            v *= loglog_floor(u).powf(self.llog_exp);
        }
        v
    }

    pub fn mul(&self, other: &Pll) -> Pll {
        Pll {
            coeff: self.coeff * other.coeff,
            u_exp: self.u_exp + other.u_exp,
            log_exp: self.log_exp + other.log_exp,
            llog_exp: self.llog_exp + other.llog_exp,
        }
    }

    pub fn scaled(&self, c: f64) -> Pll {
        Pll { coeff: self.coeff * c, ..*self }
    }

    pub fn powf(&self, e: f64) -> Pll {
        Pll {
            coeff: self.coeff.powf(e),
            u_exp: self.u_exp * e,
            log_exp: self.log_exp * e,
            llog_exp: self.llog_exp * e,
        }
    }

    /// Log-derivative `d ln term / du`, defined for `u > e^e`.
    pub fn dlog(&self, u: f64) -> f64 {
        let l = u.ln();
        let ll = l.ln();
        self.u_exp / u + self.log_exp / (u * l) + self.llog_exp / (u * l * ll)
    }

    /// A [`PowLog`] upper bound valid on `[u0, ∞)` (requires `u0 >= e^e` so
    /// the log factors are in their smooth regime).
    pub fn upper_powlog(&self, u0: f64) -> PowLog {
        debug_assert!(self.coeff >= 0.0);
        let mut coeff = self.coeff;
        let mut log_exp = self.log_exp;
        if self.llog_exp > 0.0 {
            // LLog^c <= Log^c.
            log_exp += self.llog_exp;
        } else if self.llog_exp < 0.0 {
            // LLog^c decreasing in LLog; freeze at the anchor.
            coeff *= loglog_floor(u0).powf(self.llog_exp);
        }
        PowLog::new(coeff, self.u_exp, log_exp)
    }

    /// A [`PowLog`] lower bound valid on `[u0, ∞)`.
    pub fn lower_powlog(&self, u0: f64) -> PowLog {
        debug_assert!(self.coeff >= 0.0);
        let mut coeff = self.coeff;
        let mut log_exp = self.log_exp;
        if self.llog_exp > 0.0 {
            // LLog^c >= LLog(u0)^c frozen at the anchor.
            coeff *= loglog_floor(u0).powf(self.llog_exp);
        } else if self.llog_exp < 0.0 {
            // LLog^c >= Log^c for c < 0.
            log_exp += self.llog_exp;
        }
        PowLog::new(coeff, self.u_exp, log_exp)
    }
}

/// Upper incomplete gamma `Γ(a, x)` for `a > 0`, with a rigorous
/// integration-by-parts fallback when the regularized form underflows.
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return gamma(a);
    }
    let q = gamma_ur(a, x);
    if q > 0.0 && q.is_finite() {
        return q * gamma(a);
    }
    // Γ(a, x) <= x^{a-1} e^{-x} / (1 - (a-1)/x) for x > a - 1.
    if x > a - 1.0 && x > 0.0 {
        let log_bound = (a - 1.0) * x.ln() - x - (1.0 - (a - 1.0) / x).ln();
        return log_bound.exp().max(f64::MIN_POSITIVE);
    }
    f64::MIN_POSITIVE
}

/// `sup_{x >= 0} x^m e^{-c x^q}` for `c, q, m > 0`.
///
/// Turns an exponentially small factor into an explicit power-decay
/// domination: `x^m e^{-c x^q} <= K` implies `e^{-c x^q} <= K x^{-m}`.
pub fn exp_power_domination(c: f64, q: f64, m: f64) -> f64 {
    debug_assert!(c > 0.0 && q > 0.0 && m > 0.0);
    ((m / (c * q * std::f64::consts::E)).powf(m / q)).max(f64::MIN_POSITIVE)
}

/// `H(b) - H(a)` — the harmonic sum over `(a, b]` — via digamma.
pub fn harmonic_between(a: u64, b: u64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b - a <= 64 {
        let mut s = 0.0;
        for j in (a + 1)..=b {
            s += 1.0 / j as f64;
        }
        return s;
    }
    digamma(b as f64 + 1.0) - digamma(a as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate;
    use crate::numerics::KahanSum;

    #[test]
    fn tail_integral_matches_quadrature() {
        // ∫_{10}^{1e9} u^{-2.3} ln^2 u du as a difference of two tail
        // evaluations, checked against adaptive quadrature.
        let term = PowLog::new(1.0, -2.3, 2.0);
        let exact = term.tail_integral(10.0).unwrap() - term.tail_integral(1e9).unwrap();
        let q = integrate(&|u: f64| u.powf(-2.3) * u.ln() * u.ln(), 10.0, 1e9, 1e-14, 1e-12, 512)
            .unwrap();
        assert!((exact - q.value).abs() / exact < 1e-9, "exact={exact} quad={}", q.value);
    }

    #[test]
    fn tail_integral_handles_sub_e_start() {
        // Below e the Log factor clamps to 1.
        let term = PowLog::new(2.0, -2.0, 1.0);
        let exact = term.tail_integral(1.0).unwrap() - term.tail_integral(1e8).unwrap();
        let f = |u: f64| 2.0 * u.powf(-2.0) * log_floor(u).powf(1.0);
        let q = integrate(&f, 1.0, 1e8, 1e-13, 1e-12, 512).unwrap();
        assert!((exact - q.value).abs() / exact < 1e-8);
    }

    #[test]
    fn tail_sum_bounds_bracket_brute_force() {
        let term = PowLog::new(1.0, -1.7, 1.0);
        let (lo, hi) = term.tail_sum_bounds(50.0).unwrap();
        let mut acc = KahanSum::new();
        for n in 50u64..60_000_000 {
            acc.add(term.eval(n as f64));
        }
        // Remaining mass beyond the brute-force window.
        let rest = term.tail_integral(60_000_000.0).unwrap();
        let brute = acc.value() + rest;
        assert!(lo <= brute && brute <= hi, "lo={lo} brute={brute} hi={hi}");
        assert!((hi - lo) / brute < 0.05);
    }

    #[test]
    fn upper_gamma_underflow_fallback_is_positive() {
        let g = upper_gamma(3.0, 900.0);
        assert!(g > 0.0);
        assert!(g < 1e-300);
    }

    #[test]
    fn exp_power_domination_is_a_sup() {
        let k = exp_power_domination(0.5, 1.0, 3.0);
        for i in 0..2000 {
            let x = i as f64 * 0.05;
            assert!(x.powi(3) * (-0.5 * x).exp() <= k * 1.0000001);
        }
    }

    #[test]
    fn harmonic_between_matches_direct() {
        let direct: f64 = (101..=10_000u64).map(|j| 1.0 / j as f64).sum();
        let viadigamma = harmonic_between(100, 10_000);
        assert!((direct - viadigamma).abs() < 1e-12);
    }
}
