//! Instantaneous speed of a density-operator trajectory and the speedup detector.
//!
//! The primary evaluator works in the eigenbasis of `ρ_t`:
//!
//! ```text
//! S = ½ √( Σ_{k,l} c(p_k, p_l) |⟨Φ_k|ρ̇_t|Φ_l⟩|² )
//! ```
//!
//! [`speed_spectral_form`] evaluates the same quantity from eigenvalue and
//! eigenvector velocities only, and serves as an independent cross-check.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, eigh, inner, ComplexMatrix, HermitianEigenSystem, LinalgError, C64};
use crate::metrics::{pure_state_speed, MetricError, MetricKind};

/// Eigenvalue pairs summing below this sit on the boundary of the state space.
pub const RANK_TOL: f64 = 1e-12;
/// A boundary matrix element larger than this means the rank is increasing.
pub const ELEM_TOL: f64 = 1e-8;
/// A state is pure when its second-largest eigenvalue is below this.
pub const PURE_TOL: f64 = 1e-12;
/// Default time step for finite-difference `ρ̇`.
pub const DEFAULT_TIME_STEP: f64 = 1e-5;
/// Evaluation time used at `t = 0` for boundary trajectories without a known limit.
pub const ORIGIN_OFFSET: f64 = 1e-8;

/// Default finite-difference step for a parameter `ξ` near `xi0`.
pub fn default_param_step(xi0: f64) -> f64 {
    1e-5 * xi0.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpeedError {
    #[error("time {t} outside trajectory range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("finite-difference step must be positive (got {h})")]
    InvalidStep { h: f64 },
    #[error(
        "rank-increase singularity at t = {t}: |<Φ_{k}|ρ̇|Φ_{l}>| = {element:e} on a vanishing \
         eigenvalue pair"
    )]
    RankIncrease { t: f64, k: usize, l: usize, element: f64 },
    #[error("degenerate spectrum at t = {t}; use the eigenbasis evaluator instead")]
    DegenerateSpectrum { t: f64 },
    #[error("eigendecomposition failed at t = {t}: {source}")]
    Linalg { t: f64, source: LinalgError },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid state at t = {t}: {reason}")]
    InvalidState { t: f64, reason: String },
}

impl SpeedError {
    /// Time at which the failure occurred, when known.
    pub fn time(&self) -> Option<f64> {
        match *self {
            SpeedError::OutOfRange { t, .. }
            | SpeedError::RankIncrease { t, .. }
            | SpeedError::DegenerateSpectrum { t }
            | SpeedError::Linalg { t, .. }
            | SpeedError::InvalidState { t, .. } => Some(t),
            _ => None,
        }
    }
}

pub type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// A curve `t ↦ ρ_t` on `[0, horizon]`, optionally with its analytic derivative.
#[derive(Clone)]
pub struct Trajectory {
    dim: usize,
    horizon: f64,
    state: MatrixFn,
    derivative: Option<MatrixFn>,
    params: BTreeMap<String, f64>,
    initial_speed: Option<f64>,
    boundary_at_origin: bool,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("dim", &self.dim)
            .field("horizon", &self.horizon)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("params", &self.params)
            .field("initial_speed", &self.initial_speed)
            .field("boundary_at_origin", &self.boundary_at_origin)
            .finish()
    }
}

impl Trajectory {
    pub fn new(
        dim: usize,
        state: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            horizon: f64::INFINITY,
            state: Arc::new(state),
            derivative: None,
            params: BTreeMap::new(),
            initial_speed: None,
            boundary_at_origin: false,
        }
    }

    /// A trajectory that never moves.
    pub fn stationary(rho: ComplexMatrix) -> Self {
        let dim = rho.dim();
        let zero = ComplexMatrix::zeros(dim);
        Self::new(dim, move |_| rho.clone()).with_derivative(move |_| zero.clone())
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Drops the analytic derivative so `ρ̇` falls back to finite differences.
    pub fn without_derivative(mut self) -> Self {
        self.derivative = None;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Marks `t = 0` as a boundary point where the speed is a limit rather than
    /// a direct evaluation. `limit` is that limit, if known in closed form.
    pub fn with_origin_limit(mut self, limit: Option<f64>) -> Self {
        self.boundary_at_origin = true;
        self.initial_speed = limit;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// Closed-form `lim_{t→0} S`, if the trajectory advertises one.
    pub fn initial_speed(&self) -> Option<f64> {
        self.initial_speed
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn state_at(&self, t: f64) -> ComplexMatrix {
        (self.state)(t)
    }

    pub fn derivative_at(&self, t: f64) -> Option<ComplexMatrix> {
        self.derivative.as_ref().map(|d| d(t))
    }

    /// The trajectory `t ↦ U ρ_t U†` for a fixed unitary `U`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Trajectory {
        let u1 = u.clone();
        let state = self.state.clone();
        let mut out = self.clone();
        out.state = Arc::new(move |t| state(t).conjugate_by(&u1));
        if let Some(d) = self.derivative.clone() {
            let u2 = u.clone();
            out.derivative = Some(Arc::new(move |t| d(t).conjugate_by(&u2)));
        }
        out
    }

    fn check_time(&self, t: f64) -> Result<(), SpeedError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(SpeedError::OutOfRange { t, horizon: self.horizon });
        }
        Ok(())
    }

    /// Verifies that `ρ_t` is a density operator and `ρ̇_t` (if analytic) is traceless.
    pub fn check_at(&self, t: f64) -> Result<(), SpeedError> {
        self.check_time(t)?;
        let rho = self.state_at(t);
        linalg::check_density(&rho, 1e-10)
            .map_err(|e| SpeedError::InvalidState { t, reason: e.to_string() })?;
        if let Some(d) = self.derivative_at(t) {
            let tr = d.trace();
            if tr.norm() > 1e-10 {
                return Err(SpeedError::InvalidState {
                    t,
                    reason: format!("derivative trace {tr}"),
                });
            }
        }
        Ok(())
    }
}

/// Finite-difference stencil `(time, weight)`; derivative = Σ w f(time) / h.
fn stencil(t: f64, h: f64, horizon: f64) -> Vec<(f64, f64)> {
    if t - h < 0.0 {
        vec![(t, -1.5), (t + h, 2.0), (t + 2.0 * h, -0.5)]
    } else if t + h > horizon {
        vec![(t, 1.5), (t - h, -2.0), (t - 2.0 * h, 0.5)]
    } else {
        vec![(t - h, -0.5), (t + h, 0.5)]
    }
}

/// `ρ̇_t`: analytic when available, otherwise a central difference with step
/// `h` (second-order one-sided near the ends). Always Hermitian-symmetrized.
pub fn rho_dot(traj: &Trajectory, t: f64, h: f64) -> Result<ComplexMatrix, SpeedError> {
    if !(h > 0.0) {
        return Err(SpeedError::InvalidStep { h });
    }
    traj.check_time(t)?;
    if let Some(d) = traj.derivative_at(t) {
        return Ok(d.hermitian_part());
    }
    let mut acc = ComplexMatrix::zeros(traj.dim());
    for (s, w) in stencil(t, h, traj.horizon()) {
        acc = &acc + &traj.state_at(s).scale_real(w / h);
    }
    Ok(acc.hermitian_part())
}

/// Speed of a state `ρ` moving with velocity `ρ̇`. `t` is only used for diagnostics.
pub fn speed_of_state(
    rho: &ComplexMatrix,
    rho_dot: &ComplexMatrix,
    metric: MetricKind,
    t: f64,
) -> Result<f64, SpeedError> {
    let es = eigh(rho).map_err(|source| SpeedError::Linalg { t, source })?;
    speed_in_eigenbasis(&es, rho_dot, metric, t)
}

fn speed_in_eigenbasis(
    es: &HermitianEigenSystem,
    rho_dot: &ComplexMatrix,
    metric: MetricKind,
    t: f64,
) -> Result<f64, SpeedError> {
    let n = es.dim();
    let p: Vec<f64> = es.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let m = es.to_eigenbasis(rho_dot);

    for k in 0..n {
        for l in k..n {
            if p[k] + p[l] < RANK_TOL {
                let element = m[(k, l)].norm();
                if element >= ELEM_TOL {
                    return Err(SpeedError::RankIncrease { t, k, l, element });
                }
            }
        }
    }

    // Eigenvalues ascending: the second-largest is at n - 2.
    if n == 1 {
        return Ok(0.0);
    }
    if p[n - 2] < PURE_TOL {
        let psi = &es.eigenvectors[n - 1];
        let v = rho_dot.mat_vec(psi);
        return Ok(pure_state_speed(psi, &v, metric)?);
    }

    let mut sum = 0.0;
    for k in 0..n {
        for l in 0..n {
            if p[k] + p[l] < RANK_TOL {
                continue;
            }
            sum += metric.mc_function(p[k], p[l])? * m[(k, l)].norm_sqr();
        }
    }
    Ok(0.5 * sum.max(0.0).sqrt())
}

/// Instantaneous speed `S(t)` under `metric`.
///
/// At `t = 0` on a trajectory flagged with [`Trajectory::with_origin_limit`],
/// returns the advertised limit, or evaluates at [`ORIGIN_OFFSET`] instead.
pub fn speed_at(traj: &Trajectory, t: f64, metric: MetricKind) -> Result<f64, SpeedError> {
    traj.check_time(t)?;
    let t = if t == 0.0 && traj.boundary_at_origin {
        match traj.initial_speed {
            Some(s0) => return Ok(s0),
            None => ORIGIN_OFFSET,
        }
    } else {
        t
    };
    let rho = traj.state_at(t);
    let rd = rho_dot(traj, t, DEFAULT_TIME_STEP)?;
    speed_of_state(&rho, &rd, metric, t)
}

/// Speed from eigenvalue and eigenvector velocities:
///
/// ```text
/// S = √( Σ_k q̇_k² + Σ_{k≠l} c(p_k, p_l) p_k (p_k − p_l)/2 |⟨Φ_l|Φ̇_k⟩|² ),   q_k = √p_k
/// ```
///
/// Velocities come from finite differences of phase-aligned eigensystems, so
/// this never touches the analytic `ρ̇`. Fails on degenerate spectra.
pub fn speed_spectral_form(
    traj: &Trajectory,
    t: f64,
    metric: MetricKind,
    h: f64,
) -> Result<f64, SpeedError> {
    if !(h > 0.0) {
        return Err(SpeedError::InvalidStep { h });
    }
    traj.check_time(t)?;
    let eig = |s: f64| -> Result<HermitianEigenSystem, SpeedError> {
        let es = eigh(&traj.state_at(s)).map_err(|source| SpeedError::Linalg { t: s, source })?;
        if es.degenerate {
            return Err(SpeedError::DegenerateSpectrum { t: s });
        }
        Ok(es)
    };
    let base = eig(t)?;
    let n = base.dim();
    let clamp = |p: f64| if p < RANK_TOL { 0.0 } else { p };
    let p: Vec<f64> = base.eigenvalues.iter().map(|&x| clamp(x)).collect();

    let mut q_dot = vec![0.0; n];
    let mut phi_dot = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (s, w) in stencil(t, h, traj.horizon()) {
        let es = eig(s)?;
        for k in 0..n {
            q_dot[k] += w / h * clamp(es.eigenvalues[k]).sqrt();
            let v = &es.eigenvectors[k];
            let ov = inner(&base.eigenvectors[k], v);
            let align = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { C64::new(1.0, 0.0) };
            for (acc, z) in phi_dot[k].iter_mut().zip(v) {
                *acc += z * align * (w / h);
            }
        }
    }

    let mut sum: f64 = q_dot.iter().map(|x| x * x).sum();
    for k in 0..n {
        for l in 0..n {
            if k == l || p[k] == 0.0 {
                continue;
            }
            let overlap = inner(&base.eigenvectors[l], &phi_dot[k]).norm_sqr();
            sum += metric.mc_function(p[k], p[l])? * p[k] * (p[k] - p[l]) / 2.0 * overlap;
        }
    }
    Ok(sum.max(0.0).sqrt())
}

/// Central-difference `∂_ξ S` at `xi0`. Positive means speedup.
pub fn speedup_measure<E>(
    s_of_xi: impl Fn(f64) -> Result<f64, E>,
    xi0: f64,
    h: f64,
) -> Result<f64, E>
where
    E: From<SpeedError>,
{
    if !(h > 0.0) {
        return Err(SpeedError::InvalidStep { h }.into());
    }
    let plus = s_of_xi(xi0 + h)?;
    let minus = s_of_xi(xi0 - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// [`speedup_measure`] for a parameter confined to `[lo, hi]`: central where the
/// stencil fits, second-order one-sided otherwise.
pub fn speedup_measure_bounded<E>(
    s_of_xi: impl Fn(f64) -> Result<f64, E>,
    xi0: f64,
    h: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, E>
where
    E: From<SpeedError>,
{
    if !(h > 0.0) {
        return Err(SpeedError::InvalidStep { h }.into());
    }
    if !(xi0 >= lo && xi0 <= hi) || hi - lo < 2.0 * h {
        return Err(SpeedError::Grid(format!("parameter {xi0} outside [{lo}, {hi}] or range shorter than 2h")).into());
    }
    if xi0 - h >= lo && xi0 + h <= hi {
        return speedup_measure(s_of_xi, xi0, h);
    }
    let sign = if xi0 - h < lo { 1.0 } else { -1.0 };
    let f0 = s_of_xi(xi0)?;
    let f1 = s_of_xi(xi0 + sign * h)?;
    let f2 = s_of_xi(xi0 + sign * 2.0 * h)?;
    Ok(sign * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
}

/// Whether a detector value signals speedup along `ξ`.
pub fn is_speedup(measure: f64) -> bool {
    measure > 0.0
}

/// Longitudinal detection varies time; transverse varies an initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedupKind {
    Longitudinal,
    Transverse,
}

impl SpeedupKind {
    pub fn for_parameter(name: &str) -> Self {
        if name == "t" {
            SpeedupKind::Longitudinal
        } else {
            SpeedupKind::Transverse
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeedupKind::Longitudinal => "longitudinal",
            SpeedupKind::Transverse => "transverse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSample {
    pub t: f64,
    pub speed: f64,
    /// `dS/dt` from differences on the sampled speeds.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedCurve {
    pub metric: MetricKind,
    pub samples: Vec<SpeedSample>,
}

impl SpeedCurve {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.speed).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rate).collect()
    }

    /// Curve length `l(t_i)` accumulated with the trapezoid rule from the first sample.
    pub fn cumulative_length(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.samples.len());
        let mut acc = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                let prev = &self.samples[i - 1];
                acc += 0.5 * (s.speed + prev.speed) * (s.t - prev.t);
            }
            out.push(acc);
        }
        out
    }
}

fn validate_grid(grid: &[f64], horizon: f64) -> Result<(), SpeedError> {
    if grid.len() < 2 {
        return Err(SpeedError::Grid(format!("need at least 2 points, got {}", grid.len())));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(SpeedError::Grid(format!("not strictly increasing at {} -> {}", w[0], w[1])));
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if lo < 0.0 || hi > horizon {
        return Err(SpeedError::Grid(format!("[{lo}, {hi}] not inside [0, {horizon}]")));
    }
    Ok(())
}

/// Derivative of sampled values: three-point (non-uniform) in the interior,
/// one-sided at the ends.
pub fn grid_derivative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    assert_eq!(n, ys.len());
    if n < 2 {
        return vec![0.0; n];
    }
    let mut out = vec![0.0; n];
    out[0] = (ys[1] - ys[0]) / (ts[1] - ts[0]);
    out[n - 1] = (ys[n - 1] - ys[n - 2]) / (ts[n - 1] - ts[n - 2]);
    for i in 1..n - 1 {
        let hm = ts[i] - ts[i - 1];
        let hp = ts[i + 1] - ts[i];
        out[i] = (hm * hm * ys[i + 1] - hp * hp * ys[i - 1] + (hp * hp - hm * hm) * ys[i])
            / (hm * hp * (hm + hp));
    }
    out
}

/// Speed at each grid point, evaluated in parallel and returned in grid order.
pub fn speed_samples(
    traj: &Trajectory,
    grid: &[f64],
    metric: MetricKind,
) -> Vec<Result<f64, SpeedError>> {
    grid.par_iter().map(|&t| speed_at(traj, t, metric)).collect()
}

/// Samples `S(t)` and `dS/dt` over `grid`.
pub fn speed_curve(
    traj: &Trajectory,
    grid: &[f64],
    metric: MetricKind,
) -> Result<SpeedCurve, SpeedError> {
    validate_grid(grid, traj.horizon())?;
    let speeds = speed_samples(traj, grid, metric).into_iter().collect::<Result<Vec<_>, _>>()?;
    let rates = grid_derivative(grid, &speeds);
    let samples = grid
        .iter()
        .zip(speeds)
        .zip(rates)
        .map(|((&t, speed), rate)| SpeedSample { t, speed, rate })
        .collect();
    Ok(SpeedCurve { metric, samples })
}
