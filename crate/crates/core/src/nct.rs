//! Noncentral t distribution CDF and log-moment helpers.
//!
//! The CDF is evaluated by the Poisson-weighted series over regularized
//! incomplete beta functions, summed outward from the Poisson mode. Large
//! noncentrality, or a series that fails to converge, switches to adaptive
//! quadrature of the defining integral
//!
//! ```text
//! P(T < x) = E[ Phi(x * S - ncp) ],   S = sqrt(chi2_df / df)
//! ```

#![allow(clippy::excessive_precision)]

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};
use crate::special::{beta_reg, integrate_panels, ln_gamma, normal_cdf};

const SERIES_MAX_TERMS: usize = 10_000;
const SERIES_TOL: f64 = 1e-12;
/// Above this |ncp| the CDF goes straight to quadrature.
pub const SERIES_MAX_NCP: f64 = 37.0;
const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NctParams {
    df: f64,
    ncp: f64,
}

impl NctParams {
    pub fn new(df: f64, ncp: f64) -> Result<Self> {
        if !(df.is_finite() && df > 0.0) {
            return Err(Error::InvalidParams(format!(
                "degrees of freedom must be positive and finite, got {df}"
            )));
        }
        if !ncp.is_finite() {
            return Err(Error::InvalidParams(format!(
                "noncentrality must be finite, got {ncp}"
            )));
        }
        Ok(Self { df, ncp })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn ncp(&self) -> f64 {
        self.ncp
    }
}

/// `P(Z < x)` for `Z` noncentral t with the given parameters.
pub fn noncentral_t_cdf(x: f64, params: NctParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParams(format!("x must be finite, got {x}")));
    }
    let NctParams { df, ncp } = params;
    let value = if ncp.abs() > SERIES_MAX_NCP {
        quadrature_cdf(x, df, ncp)
    } else if x >= 0.0 {
        series_cdf(x, df, ncp).unwrap_or_else(|| quadrature_cdf(x, df, ncp))
    } else {
        match series_cdf(-x, df, -ncp) {
            Some(upper) => 1.0 - upper,
            None => quadrature_cdf(x, df, ncp),
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Series for `x >= 0`.
fn series_cdf(x: f64, df: f64, ncp: f64) -> Option<f64> {
    let x2 = x * x;
    let (y, y1) = if x2.is_finite() {
        (x2 / (x2 + df), df / (x2 + df))
    } else {
        (1.0, 0.0)
    };
    let half_df = 0.5 * df;
    let base = normal_cdf(-ncp);
    if x == 0.0 {
        return Some(base);
    }
    let lambda = 0.5 * ncp * ncp;
    if lambda == 0.0 {
        return Some(base + 0.5 * beta_reg(0.5, half_df, y, y1)?);
    }
    let ln_lambda = lambda.ln();
    // p_j = e^-l l^j / j!,  q_j = ncp/sqrt2 * e^-l l^j / Gamma(j + 3/2)
    let term = |j: usize| -> Option<(f64, f64)> {
        let jf = j as f64;
        let ln_common = -lambda + jf * ln_lambda;
        let p = (ln_common - ln_gamma(jf + 1.0)).exp();
        let q = ncp / SQRT_2 * (ln_common - ln_gamma(jf + 1.5)).exp();
        let ip = beta_reg(jf + 0.5, half_df, y, y1)?;
        let iq = beta_reg(jf + 1.0, half_df, y, y1)?;
        Some((p * ip + q * iq, p + q.abs()))
    };

    let mode = lambda.floor() as usize;
    let mut sum = 0.0;
    let mut used = 0usize;

    let mut j = mode;
    loop {
        let (contrib, bound) = term(j)?;
        sum += contrib;
        used += 1;
        let ratio = lambda / (j as f64 + 1.0);
        if ratio < 1.0 && bound * ratio / (1.0 - ratio) < SERIES_TOL {
            break;
        }
        if used >= SERIES_MAX_TERMS {
            return None;
        }
        j += 1;
    }
    let mut j = mode;
    while j > 0 {
        j -= 1;
        let (contrib, bound) = term(j)?;
        sum += contrib;
        used += 1;
        let ratio = (j as f64 + 0.5) / lambda;
        if ratio < 1.0 && bound * ratio / (1.0 - ratio) < SERIES_TOL {
            break;
        }
        if used >= SERIES_MAX_TERMS {
            return None;
        }
    }
    Some(base + 0.5 * sum)
}

/// Quadrature of the defining integral over the density of `sqrt(chi2_df / df)`.
fn quadrature_cdf(x: f64, df: f64, ncp: f64) -> f64 {
    let half_df = 0.5 * df;
    let ln_norm = LN_2 + half_df * half_df.ln() - ln_gamma(half_df);
    let density = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        (ln_norm + (df - 1.0) * s.ln() - half_df * s * s).exp()
    };
    let integrand = |s: f64| normal_cdf(x * s - ncp) * density(s);

    let mode = if df > 1.0 {
        ((df - 1.0) / df).sqrt()
    } else {
        0.0
    };
    let sd = (1.0 / (2.0 * df)).sqrt();
    let lo = (mode - 40.0 * sd).max(0.0);
    let hi = mode + 40.0 * sd + 1.0 / df.sqrt();
    let mut breaks = vec![lo, hi];
    for m in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        breaks.push(mode - m * sd);
        breaks.push(mode + m * sd);
    }
    breaks.push(mode);
    if x != 0.0 {
        // the normal factor switches on near s = ncp / x over a width ~ 1/|x|
        let step = ncp / x;
        let width = 1.0 / x.abs();
        for m in [-8.0, -2.0, 0.0, 2.0, 8.0] {
            breaks.push(step + m * width);
        }
    }
    breaks.retain(|b| *b >= lo && *b <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    integrate_panels(integrand, &breaks, QUAD_TOL)
}

/// Mean and unbiased sample variance of `ln(values)`.
pub fn log_mean_var(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            found: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::NonPositiveValue { index });
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(mean_var(&logs))
}

/// Mean and unbiased sample variance (divisor `m - 1`) of at least two values.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (m - 1.0))
}
