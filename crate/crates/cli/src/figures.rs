//! Preset figure data sets with fixed model parameters.

use std::f64::consts::FRAC_1_SQRT_2;

use qspeed_core::analysis::memory_witness;
use qspeed_core::models::{Bath, ModelKind, ModelSpec};
use qspeed_core::speed::speed_curve;
use qspeed_core::MetricKind;

use crate::commands::{new_table, sweep};
use crate::config::linspace;
use crate::error::CliError;
use crate::table::{fmt_num, Cell, Row, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FigureKind {
    /// `t, S/S₀, √P_t, ∂_tS/(γ₀S₀)`
    SingleQubitTime,
    /// `Ω, S, ∂_ΩS, markovian_band`
    OmegaSweep,
    /// `t, S/S₀, ∂_tS/(γ₀S₀)`
    PairTime,
    /// `C, S/γ₀, ∂_CS/γ₀`
    ConcurrenceSweep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSpec {
    pub id: &'static str,
    pub kind: FigureKind,
    pub model: ModelKind,
    /// Initial excited amplitude; unused for concurrence sweeps.
    pub alpha: f64,
    /// `Γ/γ₀`; `None` is the Markovian limit.
    pub gamma_ratio: Option<f64>,
    /// Fixed `γ₀t` for parameter sweeps.
    pub time: Option<f64>,
    /// Default abscissa grid `(min, max, points)`.
    pub grid: (f64, f64, usize),
}

const TIME_GRID: (f64, f64, usize) = (1e-4, 30.0, 400);
const OMEGA_GRID: (f64, f64, usize) = (0.02, 3.0, 300);
const C_GRID: (f64, f64, usize) = (0.005, 0.999, 200);

const fn time_fig(id: &'static str, kind: FigureKind, model: ModelKind, alpha: f64, ratio: f64) -> FigureSpec {
    FigureSpec { id, kind, model, alpha, gamma_ratio: Some(ratio), time: None, grid: TIME_GRID }
}

const fn omega_fig(id: &'static str, t: f64) -> FigureSpec {
    FigureSpec {
        id,
        kind: FigureKind::OmegaSweep,
        model: ModelKind::Open1q,
        alpha: 1.0,
        gamma_ratio: None,
        time: Some(t),
        grid: OMEGA_GRID,
    }
}

const fn c_fig(id: &'static str, t: f64) -> FigureSpec {
    FigureSpec {
        id,
        kind: FigureKind::ConcurrenceSweep,
        model: ModelKind::Open2qAligned,
        alpha: FRAC_1_SQRT_2,
        gamma_ratio: None,
        time: Some(t),
        grid: C_GRID,
    }
}

pub const FIGURES: [FigureSpec; 10] = [
    time_fig("fig1a", FigureKind::SingleQubitTime, ModelKind::Open1q, 1.0, 10.0),
    time_fig("fig1b", FigureKind::SingleQubitTime, ModelKind::Open1q, 1.0, 0.1),
    omega_fig("fig2a", 0.0),
    omega_fig("fig2b", 1.0),
    omega_fig("fig2c", 5.0),
    omega_fig("fig2d", 10.0),
    time_fig("fig3a", FigureKind::PairTime, ModelKind::Open2qAligned, FRAC_1_SQRT_2, 10.0),
    time_fig("fig3b", FigureKind::PairTime, ModelKind::Open2qAligned, FRAC_1_SQRT_2, 0.1),
    c_fig("fig4a", 1.0),
    c_fig("fig4b", 10.0),
];

pub fn figure_ids() -> Vec<&'static str> {
    FIGURES.iter().map(|f| f.id).collect()
}

pub fn lookup(id: &str) -> Result<&'static FigureSpec, CliError> {
    FIGURES
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| CliError::usage(format!("unknown figure '{id}'; valid: {}", figure_ids().join(", "))))
}

impl FigureSpec {
    pub fn model_spec(&self) -> ModelSpec {
        let mut spec = ModelSpec::new(self.model);
        spec.alpha = self.alpha;
        spec.bath = match self.gamma_ratio {
            Some(r) => Bath::Lorentzian { gamma: r * spec.gamma0 },
            None => Bath::MarkovianLimit,
        };
        spec
    }
}

/// Emits the curves of figure `id` on its default grid, or `points` samples of it.
pub fn cmd_figure(id: &str, metric: MetricKind, points: Option<usize>) -> Result<Table, CliError> {
    let fig = lookup(id)?;
    let (lo, hi, n) = fig.grid;
    let n = points.unwrap_or(n);
    if n < 2 {
        return Err(CliError::usage(format!("grid needs at least 2 points (got {n})")));
    }
    let grid = linspace(lo, hi, n);
    let spec = fig.model_spec();
    let columns: &[&str] = match fig.kind {
        FigureKind::SingleQubitTime => &["t", "S_over_S0", "sqrtP", "dS_dt_over_gamma0_S0"],
        FigureKind::PairTime => &["t", "S_over_S0", "dS_dt_over_gamma0_S0"],
        FigureKind::OmegaSweep => &["Omega", "S", "dS_dOmega", "markovian_band"],
        FigureKind::ConcurrenceSweep => &["C", "S_over_gamma0", "dS_dC_over_gamma0"],
    };
    let mut table = new_table("figure", columns);
    table.meta("figure", fig.id).meta("model", fig.model).meta("metric", metric);
    if fig.kind != FigureKind::ConcurrenceSweep {
        table.meta("alpha", fmt_num(fig.alpha));
    }
    table.meta(
        "bath",
        match (fig.kind, fig.gamma_ratio) {
            (FigureKind::OmegaSweep, _) => "lorentzian, Gamma/gamma0 = 1/Omega".to_string(),
            (_, Some(r)) => format!("lorentzian, Gamma/gamma0 = {}", fmt_num(r)),
            (_, None) => "markovian-limit".to_string(),
        },
    );
    if let Some(t) = fig.time {
        table.meta("t", fmt_num(t));
    }
    table.meta("grid", format!("{} in [{lo}, {hi}], {n} points", columns[0]));

    match fig.kind {
        FigureKind::SingleQubitTime | FigureKind::PairTime => {
            let traj = spec.trajectory()?;
            let s0 = spec.initial_speed().expect("finite spectral width");
            table.meta("S0", fmt_num(s0));
            let curve = speed_curve(&traj, &grid, metric).map_err(|e| CliError::from_speed(e, "t", lo))?;
            let p = spec.open_params()?;
            for sample in &curve.samples {
                let mut cells = vec![Cell::Num(sample.t), Cell::Num(sample.speed / s0)];
                if fig.kind == FigureKind::SingleQubitTime {
                    cells.push(Cell::Num(memory_witness(&p, sample.t)?));
                }
                cells.push(Cell::Num(sample.rate / (spec.gamma0 * s0)));
                table.rows.push(Row::new(cells));
            }
        }
        FigureKind::OmegaSweep | FigureKind::ConcurrenceSweep => {
            let param = if fig.kind == FigureKind::OmegaSweep { "Omega" } else { "C" };
            let t = fig.time.expect("sweep figures fix the time");
            for (&xi, r) in grid.iter().zip(sweep(&spec, param, &grid, t, metric)) {
                let (s, d) = r?;
                let mut cells = vec![Cell::Num(xi)];
                if fig.kind == FigureKind::OmegaSweep {
                    cells.extend([Cell::Num(s), Cell::Num(d), Cell::Bool(xi < 0.5)]);
                } else {
                    cells.extend([Cell::Num(s / spec.gamma0), Cell::Num(d / spec.gamma0)]);
                }
                table.rows.push(Row::new(cells));
            }
        }
    }
    Ok(table)
}
