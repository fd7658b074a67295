//! Weighted transfer matrices of the shortlex structure of `F_k`.
//!
//! For per-letter costs `c`, the matrix indexed by letters has entry
//! `exp(-c(m))` in position `(l, m)` unless `m = l^-1`. Its spectral radius
//! governs the convergence of `sum_x exp(-c(x))` over reduced words.

use crate::error::{Error, Result};
use crate::group::GroupContext;
use crate::perron::{perron_root, DenseMatrix, PowerIteration};

#[derive(Clone, Copy, Debug)]
pub struct LogRadius {
    pub log_rho: f64,
    /// Relative Perron residual of the scaled matrix.
    pub residual: f64,
}

/// `log rho` of the transfer matrix with the given per-generator costs
/// (inverse letters share their generator's cost).
pub fn log_spectral_radius(ctx: &GroupContext, costs: &[f64]) -> Result<LogRadius> {
    debug_assert_eq!(costs.len(), ctx.rank());
    let m = ctx.alphabet_size();
    let floor = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut mat = DenseMatrix::zeros(m);
    for l in 0..m {
        for k in 0..m {
            if k != (l ^ 1) {
                mat.set(l, k, (-(costs[k >> 1] - floor)).exp());
            }
        }
    }
    let r = perron_root(&mat, PowerIteration::default())?;
    Ok(LogRadius { log_rho: r.value.ln() - floor, residual: r.residual / r.value })
}

#[derive(Clone, Copy, Debug)]
pub struct CriticalExponent {
    pub s: f64,
    /// `|rho - 1|` at the returned exponent.
    pub residual: f64,
}

/// Finds `s` with `rho(base + s * slope) = 1` by bisection. `slope` must be
/// positive so that `rho` is strictly decreasing in `s`. The initial bracket
/// is expanded geometrically up to 60 times.
pub fn critical_exponent(
    ctx: &GroupContext,
    base: &[f64],
    slope: &[f64],
    bracket: (f64, f64),
) -> Result<CriticalExponent> {
    if slope.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput("transfer weights must be positive".into()));
    }
    let eval = |s: f64| -> Result<f64> {
        let costs: Vec<f64> = base.iter().zip(slope).map(|(b, w)| b + s * w).collect();
        Ok(log_spectral_radius(ctx, &costs)?.log_rho)
    };
    let (mut lo, mut hi) = bracket;
    let mut width = (hi - lo).abs().max(1.0);
    let mut f_lo = eval(lo)?;
    let mut f_hi = eval(hi)?;
    let mut expansions = 0;
    while !(f_lo >= 0.0 && f_hi <= 0.0) {
        if expansions == 60 || !width.is_finite() {
            return Err(Error::BracketFailure { lo, hi });
        }
        width *= 2.0;
        if f_lo < 0.0 {
            lo -= width;
            f_lo = eval(lo)?;
        }
        if f_hi > 0.0 {
            hi += width;
            f_hi = eval(hi)?;
        }
        expansions += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = eval(mid)?;
        if f == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let residual = eval(s)?.exp_m1().abs();
    Ok(CriticalExponent { s, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_growth_is_log3() {
        let ctx = GroupContext::new(2).unwrap();
        let r = critical_exponent(&ctx, &[0.0, 0.0], &[1.0, 1.0], (0.0, 2.0)).unwrap();
        assert!((r.s - 3f64.ln()).abs() < 1e-12);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn closed_form_for_letter_weights() {
        // sum over generators of 2x/(1+x) = 1 at the critical exponent.
        let ctx = GroupContext::new(2).unwrap();
        let w = [2.0, 1.0];
        let r = critical_exponent(&ctx, &[0.0, 0.0], &w, (0.0, 1.0)).unwrap();
        let total: f64 = w
            .iter()
            .map(|wi| {
                let x = (-r.s * wi).exp();
                2.0 * x / (1.0 + x)
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-11);
    }

    #[test]
    fn bracket_expands() {
        let ctx = GroupContext::new(3).unwrap();
        let r = critical_exponent(&ctx, &[0.0; 3], &[1.0; 3], (10.0, 11.0)).unwrap();
        assert!((r.s - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_slope() {
        let ctx = GroupContext::new(2).unwrap();
        assert!(critical_exponent(&ctx, &[0.0, 0.0], &[1.0, 0.0], (0.0, 1.0)).is_err());
    }
}
