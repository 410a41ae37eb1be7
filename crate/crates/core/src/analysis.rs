//! Memory and longitudinal-speedup regions of the damped qubit.
//!
//! All times are dimensionless `γ₀t`.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::models::{coherence_factor_with_rate, ModelError, OpenSystemParams, CRITICAL_TOL};

/// Residual target for the transcendental speedup boundary.
pub const ROOT_TOL: f64 = 1e-10;
/// Offset from the `tan` pole at the right end of the bracket.
pub const POLE_OFFSET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("Gamma/gamma0 must be positive (got {0})")]
    NonPositiveRatio(f64),
    #[error("memory regions exist only in the non-Markovian regime (regime is {0})")]
    NotNonMarkovian(Regime),
    #[error("no root of Gamma tan(kappa t/2) - kappa tanh(Gamma t/2) in [{lo}, {hi}] (g = {g_lo}, {g_hi})")]
    RootNotFound { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Markovian,
    NonMarkovian,
    Critical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Markovian => "markovian",
            Regime::NonMarkovian => "non_markovian",
            Regime::Critical => "critical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Γ/γ₀ > 2` is memoryless, `< 2` has memory, `≈ 2` is critical.
pub fn regime_classify(gamma_ratio: f64) -> Result<Regime, AnalysisError> {
    if !(gamma_ratio > 0.0) {
        return Err(AnalysisError::NonPositiveRatio(gamma_ratio));
    }
    Ok(if (gamma_ratio - 2.0).abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if gamma_ratio > 2.0 {
        Regime::Markovian
    } else {
        Regime::NonMarkovian
    })
}

/// Regime of a parameter set; the Markovian limit counts as Markovian.
pub fn regime_of(p: &OpenSystemParams) -> Result<Regime, AnalysisError> {
    let r = p.gamma_ratio();
    if r.is_infinite() {
        return Ok(Regime::Markovian);
    }
    regime_classify(r)
}

/// `√P_t`; memory is present wherever it increases.
pub fn memory_witness(p: &OpenSystemParams, t: f64) -> Result<f64, AnalysisError> {
    let (g, _) = coherence_factor_with_rate(p, t)?;
    Ok(g.abs().min(1.0))
}

/// `d√P_t/dt`.
pub fn memory_witness_rate(p: &OpenSystemParams, t: f64) -> Result<f64, AnalysisError> {
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    Ok(if g < 0.0 { -gd } else { gd })
}

/// `(Γ/γ₀, κ/γ₀)` for non-Markovian parameters.
fn scaled_rates(p: &OpenSystemParams) -> Result<(f64, f64), AnalysisError> {
    let regime = regime_of(p)?;
    if regime != Regime::NonMarkovian {
        return Err(AnalysisError::NotNonMarkovian(regime));
    }
    let r = p.gamma_ratio();
    Ok((r, (r * (2.0 - r)).sqrt()))
}

/// Closed-form memory intervals `(τ_n, τ_n′)`, `n = 1..=n_max`:
/// `τ_n = 2[nπ − arctan(κ/Γ)]/κ`, `τ_n′ = 2nπ/κ`.
pub fn memory_boundaries(p: &OpenSystemParams, n_max: usize) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let (gamma, kappa) = scaled_rates(p)?;
    let phase = (kappa / gamma).atan();
    Ok((1..=n_max)
        .map(|n| {
            let npi = n as f64 * PI;
            (2.0 * (npi - phase) / kappa, 2.0 * npi / kappa)
        })
        .collect())
}

/// A longitudinal-speedup interval `(τ_n′, τ_n″)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupInterval {
    pub start: f64,
    pub end: f64,
    /// `|Γ tan(κτ″/2) − κ tanh(Γτ″/2)|` at the returned root.
    pub residual: f64,
}

fn speedup_residual(gamma: f64, kappa: f64, t: f64) -> f64 {
    gamma * (kappa * t / 2.0).tan() - kappa * (gamma * t / 2.0).tanh()
}

/// Bisection for `Γ tan(κt/2) = κ tanh(Γt/2)` on the continuous `tan` branch
/// `(2nπ/κ, (2n+1)π/κ)`.
pub fn speedup_boundaries(p: &OpenSystemParams, n_max: usize) -> Result<Vec<SpeedupInterval>, AnalysisError> {
    let (gamma, kappa) = scaled_rates(p)?;
    let g = |t: f64| speedup_residual(gamma, kappa, t);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let start = 2.0 * n as f64 * PI / kappa;
        let (mut lo, mut hi) = (start, (2 * n + 1) as f64 * PI / kappa - POLE_OFFSET);
        let (g_lo, g_hi) = (g(lo), g(hi));
        if !(g_lo < 0.0 && g_hi > 0.0) {
            return Err(AnalysisError::RootNotFound { lo, hi, g_lo, g_hi });
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let gm = g(mid);
            if gm.abs() <= ROOT_TOL * 1e-2 || hi - lo <= f64::EPSILON * mid {
                break;
            }
            if gm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let residual = g(mid).abs();
        if residual > ROOT_TOL {
            return Err(AnalysisError::RootNotFound { lo, hi, g_lo: g(lo), g_hi: g(hi) });
        }
        out.push(SpeedupInterval { start, end: mid, residual });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub regime: Regime,
    pub memory_intervals: Vec<(f64, f64)>,
    pub speedup_intervals: Vec<SpeedupInterval>,
    pub n_max: usize,
}

/// Regime and, for memory environments, the first `n_max` memory and speedup intervals.
pub fn region_report(p: &OpenSystemParams, n_max: usize) -> Result<RegionReport, AnalysisError> {
    let regime = regime_of(p)?;
    let (memory_intervals, speedup_intervals) = if regime == Regime::NonMarkovian && n_max > 0 {
        (memory_boundaries(p, n_max)?, speedup_boundaries(p, n_max)?)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(RegionReport { regime, memory_intervals, speedup_intervals, n_max })
}
