//! Closed spin-precession and open amplitude-damping models.
//!
//! Open-model times are dimensionless `γ₀t` and rates are in units of `γ₀`;
//! closed-model times are `ωt`. Qubit basis order is excited-first (see
//! [`crate::linalg`]).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{self, eigh, tensor, tensor_vec, ComplexMatrix, LinalgError, C64};
use crate::speed::Trajectory;

/// Window around `Γ/γ₀ = 2` treated as critical damping.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("amplitudes not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),
    #[error("time must be non-negative (got {0})")]
    NegativeTime(f64),
    #[error("population factor must lie in [0, 1] (got {0})")]
    PopulationOutOfRange(f64),
    #[error("local damping supports 1 or 2 qubits (got {0})")]
    UnsupportedQubitCount(usize),
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("speed diverges: {0}")]
    Divergence(String),
    #[error(
        "unknown model '{0}'; valid keys: closed-1q, closed-2q-aligned, closed-2q-anti, \
         open-1q, open-2q-aligned, open-2q-anti"
    )]
    UnknownModel(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// Closed systems

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedQubitParams {
    /// Level splitting.
    pub omega: f64,
    /// Amplitude on the excited state `|1⟩` (or `|11⟩`, `|10⟩`).
    pub alpha: C64,
    pub beta: C64,
}

impl ClosedQubitParams {
    pub fn new(omega: f64, alpha: C64, beta: C64) -> Result<Self, ModelError> {
        let n2 = alpha.norm_sqr() + beta.norm_sqr();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(ModelError::NotNormalized(n2));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(ModelError::InvalidParameter(format!("omega must be positive (got {omega})")));
        }
        Ok(Self { omega, alpha, beta })
    }

    /// Real amplitudes `α` and `√(1 − α²)`.
    pub fn real(omega: f64, alpha: f64) -> Result<Self, ModelError> {
        check_unit_interval("alpha", alpha)?;
        Self::new(omega, c(alpha), c((1.0 - alpha * alpha).max(0.0).sqrt()))
    }

    /// Amplitudes with `2|αβ| = C` and `α ≤ 1/√2`.
    pub fn from_concurrence(omega: f64, concurrence: f64) -> Result<Self, ModelError> {
        Self::real(omega, alpha_from_concurrence(concurrence)?)
    }

    pub fn concurrence(&self) -> f64 {
        2.0 * (self.alpha * self.beta).norm()
    }
}

/// `α = √((1 − √(1 − C²))/2)`, the branch with `α ≤ 1/√2`.
pub fn alpha_from_concurrence(concurrence: f64) -> Result<f64, ModelError> {
    check_unit_interval("C", concurrence)?;
    Ok(((1.0 - (1.0 - concurrence * concurrence).sqrt()) / 2.0).sqrt())
}

fn check_unit_interval(name: &str, x: f64) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ModelError::InvalidParameter(format!("{name} must lie in [0, 1] (got {x})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// `α|11⟩ + β|00⟩`
    Aligned,
    /// `α|10⟩ + β|01⟩`
    Anti,
}

/// Pure-state evolution under a Hamiltonian diagonal in the computational basis.
fn diagonal_hamiltonian_trajectory(psi0: Vec<C64>, energies: Vec<f64>) -> Trajectory {
    let dim = psi0.len();
    let (psi_a, en_a) = (psi0.clone(), energies.clone());
    let state = move |t: f64| -> Vec<C64> {
        psi_a.iter().zip(&en_a).map(|(&a, &e)| a * C64::from_polar(1.0, -e * t)).collect()
    };
    let state_b = state.clone();
    let velocity = move |t: f64| -> Vec<C64> {
        state_b(t).iter().zip(&energies).map(|(&a, &e)| a * C64::new(0.0, -e)).collect()
    };
    let state_c = state.clone();
    Trajectory::new(dim, move |t| ComplexMatrix::outer(&state(t))).with_derivative(move |t| {
        let psi = state_c(t);
        let dpsi = velocity(t);
        ComplexMatrix::from_fn(dim, |i, j| dpsi[i] * psi[j].conj() + psi[i] * dpsi[j].conj())
    })
}

/// Spin precessing under `H = (ω/2)σ_z` from `α|1⟩ + β|0⟩`.
pub fn precession_trajectory(p: &ClosedQubitParams) -> Trajectory {
    diagonal_hamiltonian_trajectory(vec![p.alpha, p.beta], vec![p.omega / 2.0, -p.omega / 2.0])
        .with_param("omega", p.omega)
        .with_param("alpha", p.alpha.norm())
}

/// Two non-interacting spins under `H = H^A ⊗ I + I ⊗ H^B`.
pub fn two_qubit_closed_trajectory(p: &ClosedQubitParams, kind: Alignment) -> Trajectory {
    let zero = c(0.0);
    let psi0 = match kind {
        Alignment::Aligned => vec![p.alpha, zero, zero, p.beta],
        Alignment::Anti => vec![zero, p.alpha, p.beta, zero],
    };
    // Energies of |11⟩, |10⟩, |01⟩, |00⟩.
    let energies = vec![p.omega, 0.0, 0.0, -p.omega];
    diagonal_hamiltonian_trajectory(psi0, energies)
        .with_param("omega", p.omega)
        .with_param("alpha", p.alpha.norm())
        .with_param("C", p.concurrence())
}

/// `|αβ|ω` for the single precessing spin.
pub fn closed_qubit_speed_analytic(p: &ClosedQubitParams) -> f64 {
    (p.alpha * p.beta).norm() * p.omega
}

/// `2|αβ|ω = Cω` (aligned) or `0` (anti-aligned).
pub fn closed_two_qubit_speed_analytic(p: &ClosedQubitParams, kind: Alignment) -> f64 {
    match kind {
        Alignment::Aligned => 2.0 * (p.alpha * p.beta).norm() * p.omega,
        Alignment::Anti => 0.0,
    }
}

// ---------------------------------------------------------------------------
// Open systems

/// Reservoir spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bath {
    /// Lorentzian of width `gamma` (same units as `γ₀`).
    Lorentzian { gamma: f64 },
    /// `Γ → ∞`: `P_t = e^{−γ₀t}`.
    MarkovianLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingBranch {
    /// `2γ₀Γ > Γ²`, `κ = √(2γ₀Γ − Γ²)`.
    Oscillatory { kappa: f64 },
    Critical,
    /// `2γ₀Γ < Γ²`, `κ̃ = √(Γ² − 2γ₀Γ)`.
    Hyperbolic { kappa: f64 },
    Markovian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenSystemParams {
    /// Markovian-limit decay rate.
    pub gamma0: f64,
    pub bath: Bath,
    /// Initial excited amplitude, in `[0, 1]`.
    pub alpha: f64,
}

impl OpenSystemParams {
    pub fn lorentzian(gamma0: f64, gamma: f64, alpha: f64) -> Result<Self, ModelError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(ModelError::InvalidParameter(format!("Gamma must be positive (got {gamma})")));
        }
        Self::build(gamma0, Bath::Lorentzian { gamma }, alpha)
    }

    /// Lorentzian bath given `Γ/γ₀`, with `γ₀ = 1`.
    pub fn with_ratio(gamma_ratio: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::lorentzian(1.0, gamma_ratio, alpha)
    }

    pub fn markovian(gamma0: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::build(gamma0, Bath::MarkovianLimit, alpha)
    }

    fn build(gamma0: f64, bath: Bath, alpha: f64) -> Result<Self, ModelError> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(ModelError::InvalidParameter(format!("gamma0 must be positive (got {gamma0})")));
        }
        check_unit_interval("alpha", alpha)?;
        Ok(Self { gamma0, bath, alpha })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, ModelError> {
        check_unit_interval("alpha", alpha)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.bath {
            Bath::Lorentzian { gamma } => Some(gamma),
            Bath::MarkovianLimit => None,
        }
    }

    /// `Γ/γ₀` (infinite in the Markovian limit).
    pub fn gamma_ratio(&self) -> f64 {
        self.gamma().map_or(f64::INFINITY, |g| g / self.gamma0)
    }

    /// `Ω = γ₀/Γ` (zero in the Markovian limit).
    pub fn omega_ratio(&self) -> f64 {
        self.gamma().map_or(0.0, |g| self.gamma0 / g)
    }

    pub fn branch(&self) -> DampingBranch {
        match self.bath {
            Bath::MarkovianLimit => DampingBranch::Markovian,
            Bath::Lorentzian { gamma } => {
                if (gamma / self.gamma0 - 2.0).abs() <= CRITICAL_TOL {
                    DampingBranch::Critical
                } else if gamma < 2.0 * self.gamma0 {
                    DampingBranch::Oscillatory { kappa: (gamma * (2.0 * self.gamma0 - gamma)).sqrt() }
                } else {
                    DampingBranch::Hyperbolic { kappa: (gamma * (gamma - 2.0 * self.gamma0)).sqrt() }
                }
            }
        }
    }

    /// `κ` of the oscillatory branch.
    pub fn kappa(&self) -> Option<f64> {
        match self.branch() {
            DampingBranch::Oscillatory { kappa } => Some(kappa),
            _ => None,
        }
    }
}

fn check_time(t: f64) -> Result<(), ModelError> {
    if !(t >= 0.0) {
        return Err(ModelError::NegativeTime(t));
    }
    Ok(())
}

/// Signed excited-state amplitude factor `G_t` with `P_t = G_t²` and its time
/// derivative `Ġ_t`.
pub fn coherence_factor_with_rate(p: &OpenSystemParams, t: f64) -> Result<(f64, f64), ModelError> {
    check_time(t)?;
    let g0 = p.gamma0;
    Ok(match (p.branch(), p.bath) {
        (DampingBranch::Markovian, _) => {
            let g = (-g0 * t / 2.0).exp();
            (g, -g0 / 2.0 * g)
        }
        (DampingBranch::Critical, Bath::Lorentzian { gamma }) => {
            let e = (-gamma * t / 2.0).exp();
            (e * (1.0 + gamma * t / 2.0), -e * gamma * gamma * t / 4.0)
        }
        (DampingBranch::Oscillatory { kappa }, Bath::Lorentzian { gamma }) => {
            let e = (-gamma * t / 2.0).exp();
            let (s, co) = (kappa * t / 2.0).sin_cos();
            (e * (co + gamma / kappa * s), -(g0 * gamma / kappa) * e * s)
        }
        (DampingBranch::Hyperbolic { kappa }, Bath::Lorentzian { gamma }) => {
            let x = kappa * t / 2.0;
            let (cosh_part, sinh_part) = if x < 20.0 {
                let e = (-gamma * t / 2.0).exp();
                (e * x.cosh(), e * x.sinh())
            } else {
                // e^{−Γt/2}cosh(x) overflows as a product; combine exponents first.
                let up = ((kappa - gamma) * t / 2.0).exp();
                let down = ((-kappa - gamma) * t / 2.0).exp();
                (0.5 * (up + down), 0.5 * (up - down))
            };
            (cosh_part + gamma / kappa * sinh_part, -(g0 * gamma / kappa) * sinh_part)
        }
        (_, Bath::MarkovianLimit) => unreachable!("Markovian bath always has the Markovian branch"),
    })
}

/// Excited-state population factor `P_t ∈ [0, 1]`.
pub fn population_factor(p: &OpenSystemParams, t: f64) -> Result<f64, ModelError> {
    let (g, _) = coherence_factor_with_rate(p, t)?;
    Ok((g * g).min(1.0))
}

/// `Ṗ_t = 2 G_t Ġ_t`.
pub fn population_factor_dot(p: &OpenSystemParams, t: f64) -> Result<f64, ModelError> {
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    Ok(2.0 * g * gd)
}

/// `√P_t = |G_t|` and its (right) time derivative.
fn sqrt_population_with_rate(p: &OpenSystemParams, t: f64) -> Result<(f64, f64), ModelError> {
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    let sign = if g > 0.0 || (g == 0.0 && gd >= 0.0) { 1.0 } else { -1.0 };
    Ok((g.abs().min(1.0), sign * gd))
}

fn check_population(pop: f64) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&pop) {
        return Err(ModelError::PopulationOutOfRange(pop));
    }
    Ok(())
}

/// Single-qubit amplitude damping: excited population scaled by `P`, coherences by `√P`.
pub fn amplitude_damping_evolve(rho0: &ComplexMatrix, pop: f64) -> Result<ComplexMatrix, ModelError> {
    if rho0.dim() != 2 {
        return Err(ModelError::DimensionMismatch { expected: 2, got: rho0.dim() });
    }
    check_population(pop)?;
    let s = pop.sqrt();
    let r11 = rho0[(0, 0)];
    Ok(ComplexMatrix::from_rows(&[
        vec![r11 * pop, rho0[(0, 1)] * s],
        vec![rho0[(1, 0)] * s, c(1.0) - r11 * pop],
    ]))
}

/// Operation elements `{diag(√P, 1), √(1−P)|0⟩⟨1|}` of the damping channel.
fn damping_kraus(pop: f64) -> [ComplexMatrix; 2] {
    let k0 = ComplexMatrix::diag(&[pop.sqrt(), 1.0]);
    let mut k1 = ComplexMatrix::zeros(2);
    k1[(1, 0)] = c((1.0 - pop).sqrt());
    [k0, k1]
}

/// Independent amplitude damping of each of `n` qubits with the same `P`.
pub fn local_damping_evolve(
    rho0: &ComplexMatrix,
    pop: f64,
    n: usize,
) -> Result<ComplexMatrix, ModelError> {
    if !(1..=2).contains(&n) {
        return Err(ModelError::UnsupportedQubitCount(n));
    }
    let dim = 1 << n;
    if rho0.dim() != dim {
        return Err(ModelError::DimensionMismatch { expected: dim, got: rho0.dim() });
    }
    check_population(pop)?;
    let single = damping_kraus(pop);
    let ops: Vec<ComplexMatrix> = if n == 1 {
        single.to_vec()
    } else {
        single.iter().flat_map(|a| single.iter().map(move |b| tensor(a, b))).collect()
    };
    let mut out = ComplexMatrix::zeros(dim);
    for k in &ops {
        out = &out + &rho0.conjugate_by(k);
    }
    Ok(out)
}

/// Applies `c0·B0 + c1·B1 + c2·B2` to one qubit of an `n`-qubit operator, where the
/// damping channel with amplitude `s = √P` is `E = B0 + s·B1 + s²·B2`.
fn apply_damping_component(x: &ComplexMatrix, qubit: usize, n: usize, coeff: [f64; 3]) -> ComplexMatrix {
    let dim = 1 << n;
    let shift = n - 1 - qubit;
    let bit = 1 << shift;
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        if i & bit != 0 {
            continue;
        }
        for j in 0..dim {
            if j & bit != 0 {
                continue;
            }
            // Local 2x2 block; local index 0 = excited (bit clear), 1 = ground.
            let idx = |a: usize| if a == 0 { 0 } else { bit };
            let blk = |a: usize, b: usize| x[(i | idx(a), j | idx(b))];
            let (x00, x01, x10, x11) = (blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1));
            let y00 = x00 * coeff[2];
            let y01 = x01 * coeff[1];
            let y10 = x10 * coeff[1];
            let y11 = (x11 + x00) * coeff[0] - x00 * coeff[2];
            out[(i, j)] += y00;
            out[(i, j | bit)] += y01;
            out[(i | bit, j)] += y10;
            out[(i | bit, j | bit)] += y11;
        }
    }
    out
}

/// `d/dt` of the locally damped state, given `√P` and its rate.
fn local_damping_rate(rho0: &ComplexMatrix, n: usize, s: f64, s_dot: f64) -> ComplexMatrix {
    let channel = [1.0, s, s * s];
    let rate = [0.0, s_dot, 2.0 * s * s_dot];
    let mut total = ComplexMatrix::zeros(rho0.dim());
    for q in 0..n {
        let mut x = rho0.clone();
        for k in 0..n {
            x = apply_damping_component(&x, k, n, if k == q { rate } else { channel });
        }
        total = &total + &x;
    }
    total
}

fn open_trajectory(p: &OpenSystemParams, psi0: Vec<C64>, n: usize, s0: Option<f64>) -> Trajectory {
    let rho0 = ComplexMatrix::outer(&psi0);
    let (pa, pb) = (*p, *p);
    let (ra, rb) = (rho0.clone(), rho0);
    let traj = Trajectory::new(1 << n, move |t| {
        let pop = population_factor(&pa, t.max(0.0)).expect("valid params");
        local_damping_evolve(&ra, pop.clamp(0.0, 1.0), n).expect("valid dimensions")
    })
    .with_derivative(move |t| {
        let (s, sd) = sqrt_population_with_rate(&pb, t.max(0.0)).expect("valid params");
        local_damping_rate(&rb, n, s, sd)
    })
    .with_param("gamma0", p.gamma0)
    .with_param("alpha", p.alpha)
    .with_origin_limit(s0);
    match p.bath {
        Bath::Lorentzian { gamma } => traj.with_param("Gamma_over_gamma0", gamma / p.gamma0),
        Bath::MarkovianLimit => traj.with_param("markovian_limit", 1.0),
    }
}

/// One atom in a leaky cavity, starting from `α|1⟩ + √(1−α²)|0⟩`.
pub fn open_qubit_trajectory(p: &OpenSystemParams) -> Trajectory {
    let psi0 = vec![c(p.alpha), c((1.0 - p.alpha * p.alpha).sqrt())];
    open_trajectory(p, psi0, 1, open_qubit_initial_speed(p))
}

/// Two atoms, each in its own leaky cavity. `α` weights `|11⟩` (aligned) or `|10⟩` (anti).
pub fn open_two_qubit_trajectory(p: &OpenSystemParams, kind: Alignment) -> Trajectory {
    let (a, b, z) = (c(p.alpha), c((1.0 - p.alpha * p.alpha).sqrt()), c(0.0));
    let psi0 = match kind {
        Alignment::Aligned => vec![a, z, z, b],
        Alignment::Anti => vec![z, a, b, z],
    };
    open_trajectory(p, psi0, 2, open_two_qubit_initial_speed(p, kind))
}

/// `S₀ = α²√(Γγ₀/2)`; `None` in the Markovian limit where it diverges.
pub fn open_qubit_initial_speed(p: &OpenSystemParams) -> Option<f64> {
    p.gamma().map(|g| p.alpha * p.alpha * (g * p.gamma0 / 2.0).sqrt())
}

/// `S₀ = α√(Γγ₀)` (aligned) or `√(Γγ₀/2)` (anti-aligned).
pub fn open_two_qubit_initial_speed(p: &OpenSystemParams, kind: Alignment) -> Option<f64> {
    p.gamma().map(|g| match kind {
        Alignment::Aligned => p.alpha * (g * p.gamma0).sqrt(),
        Alignment::Anti => (g * p.gamma0 / 2.0).sqrt(),
    })
}

/// Closed-form SLD speed of the damped single qubit,
/// `S = (α|Ṗ|/2)·√((1 − (1−α²)P)/(P(1−P)))`, with boundary limits.
pub fn open_qubit_speed_analytic(p: &OpenSystemParams, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    let a = p.alpha;
    if a == 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(open_qubit_initial_speed(p).unwrap_or(f64::INFINITY));
    }
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    let pop = g * g;
    // |Ṗ|/(2√P) = |Ġ| removes the 0/0 at P = 0.
    Ok(a * gd.abs() * ((1.0 - (1.0 - a * a) * pop) / (1.0 - pop)).sqrt())
}

/// Closed-form SLD speed of the damped aligned pair,
/// `S = α|Ṗ|·√((1−2P+2P²)/(2P(1−P)(1−2α²P+2α²P²)))`, with boundary limits.
pub fn open_two_qubit_speed_analytic(p: &OpenSystemParams, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    let a = p.alpha;
    if a == 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(open_two_qubit_initial_speed(p, Alignment::Aligned).unwrap_or(f64::INFINITY));
    }
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    let pop = g * g;
    let num = 1.0 - 2.0 * pop + 2.0 * pop * pop;
    let den = 2.0 * (1.0 - pop) * (1.0 - 2.0 * a * a * pop * (1.0 - pop));
    Ok(2.0 * a * gd.abs() * (num / den).sqrt())
}

/// `S = |Ṗ|/(2√(P(1−P)))` for the anti-aligned pair, independent of `α`.
pub fn open_two_qubit_anti_speed_analytic(p: &OpenSystemParams, t: f64) -> Result<f64, ModelError> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(open_two_qubit_initial_speed(p, Alignment::Anti).unwrap_or(f64::INFINITY));
    }
    let (g, gd) = coherence_factor_with_rate(p, t)?;
    Ok(gd.abs() / (1.0 - g * g).sqrt())
}

/// Markovian-limit speed of the aligned pair in terms of its initial concurrence:
///
/// `S/γ₀ = ½√( x·P(1−2P+2P²) / ((1−P)[1 − x·P(1−P)]) )`, `x = 1 − √(1−C²)`, `P = e^{−γ₀t}`.
pub fn markovian_two_qubit_speed(concurrence: f64, t: f64) -> Result<f64, ModelError> {
    check_unit_interval("C", concurrence)?;
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    if t == 0.0 {
        return Err(ModelError::Divergence(
            "initial speed is unbounded in the Markovian limit".to_string(),
        ));
    }
    let x = 1.0 - (1.0 - concurrence * concurrence).sqrt();
    let pop = (-t).exp();
    let num = x * pop * (1.0 - 2.0 * pop + 2.0 * pop * pop);
    let den = (1.0 - pop) * (1.0 - x * pop * (1.0 - pop));
    Ok(0.5 * (num / den).sqrt())
}

// ---------------------------------------------------------------------------
// Entanglement

/// Wootters concurrence of a two-qubit density operator.
///
/// The `λ_i` (square roots of the eigenvalues of `ρ ρ̃`) are computed as singular
/// values of `τ_ij = ⟨v_i|σ_y⊗σ_y|v_j*⟩` over the weighted eigenvectors
/// `v_i = √p_i Φ_i`; for pure states this is exact rather than a square root of
/// rounding noise.
pub fn concurrence(rho: &ComplexMatrix) -> Result<f64, ModelError> {
    if rho.dim() != 4 {
        return Err(ModelError::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    let es = linalg::check_density(rho, 1e-10).map_err(|e| match e {
        LinalgError::NotDensity(msg) => ModelError::NotDensity(msg),
        other => ModelError::Linalg(other),
    })?;
    let yy = tensor(&linalg::pauli::y(), &linalg::pauli::y());
    let weighted: Vec<Vec<C64>> = es
        .eigenvalues
        .iter()
        .zip(&es.eigenvectors)
        .filter(|(&p, _)| p > 1e-12)
        .map(|(&p, v)| v.iter().map(|z| z * p.sqrt()).collect())
        .collect();
    let r = weighted.len();
    if r == 0 {
        return Ok(0.0);
    }
    let flipped: Vec<Vec<C64>> =
        weighted.iter().map(|v| yy.mat_vec(&v.iter().map(|z| z.conj()).collect::<Vec<_>>())).collect();
    let tau = ComplexMatrix::from_fn(r, |i, j| linalg::inner(&weighted[i], &flipped[j]));
    let mut lambdas: Vec<f64> = if r == 1 {
        vec![tau[(0, 0)].norm()]
    } else {
        eigh(&(&tau * &tau.adjoint()).hermitian_part())?
            .eigenvalues
            .iter()
            .map(|&x| x.max(0.0).sqrt())
            .collect()
    };
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    Ok(c.clamp(0.0, 1.0))
}

/// `α|11⟩ + β|00⟩` or `α|10⟩ + β|01⟩` as a state vector.
pub fn two_qubit_state(alpha: C64, beta: C64, kind: Alignment) -> Vec<C64> {
    let one = [c(1.0), c(0.0)];
    let zero = [c(0.0), c(1.0)];
    let (a, b) = match kind {
        Alignment::Aligned => (tensor_vec(&one, &one), tensor_vec(&zero, &zero)),
        Alignment::Anti => (tensor_vec(&one, &zero), tensor_vec(&zero, &one)),
    };
    a.iter().zip(&b).map(|(&x, &y)| alpha * x + beta * y).collect()
}

// ---------------------------------------------------------------------------
// Model registry

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Closed1q,
    Closed2qAligned,
    Closed2qAnti,
    Open1q,
    Open2qAligned,
    Open2qAnti,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Closed1q,
        ModelKind::Closed2qAligned,
        ModelKind::Closed2qAnti,
        ModelKind::Open1q,
        ModelKind::Open2qAligned,
        ModelKind::Open2qAnti,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ModelKind::Closed1q => "closed-1q",
            ModelKind::Closed2qAligned => "closed-2q-aligned",
            ModelKind::Closed2qAnti => "closed-2q-anti",
            ModelKind::Open1q => "open-1q",
            ModelKind::Open2qAligned => "open-2q-aligned",
            ModelKind::Open2qAnti => "open-2q-anti",
        }
    }

    pub fn is_open(self) -> bool {
        matches!(self, ModelKind::Open1q | ModelKind::Open2qAligned | ModelKind::Open2qAnti)
    }

    pub fn qubits(self) -> usize {
        match self {
            ModelKind::Closed1q | ModelKind::Open1q => 1,
            _ => 2,
        }
    }

    fn alignment(self) -> Option<Alignment> {
        match self {
            ModelKind::Closed2qAligned | ModelKind::Open2qAligned => Some(Alignment::Aligned),
            ModelKind::Closed2qAnti | ModelKind::Open2qAnti => Some(Alignment::Anti),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.key() == s.trim())
            .ok_or_else(|| ModelError::UnknownModel(s.to_string()))
    }
}

/// A model key plus its parameters (`γ₀ = 1` unless changed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub alpha: f64,
    pub omega: f64,
    pub gamma0: f64,
    pub bath: Bath,
}

/// Parameter names accepted by [`ModelSpec::set_param`].
pub const MODEL_PARAMS: &[&str] = &["alpha", "C", "omega", "Omega", "Gamma_over_gamma0"];

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            alpha: FRAC_1_SQRT_2,
            omega: 1.0,
            gamma0: 1.0,
            bath: Bath::Lorentzian { gamma: 0.1 },
        }
    }

    /// Sets a named parameter. `C` maps to `α ≤ 1/√2` on two-qubit models and
    /// `Omega` to `Γ = γ₀/Ω`.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        if !value.is_finite() {
            return Err(ModelError::InvalidParameter(format!("{name} must be finite")));
        }
        match name {
            "alpha" => {
                check_unit_interval("alpha", value)?;
                self.alpha = value;
            }
            "C" => {
                if self.kind.qubits() != 2 {
                    return Err(ModelError::InvalidParameter(format!(
                        "C (concurrence) is not defined for single-qubit model {}",
                        self.kind
                    )));
                }
                self.alpha = alpha_from_concurrence(value)?;
            }
            "omega" => {
                if !(value > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("omega must be positive (got {value})")));
                }
                self.omega = value;
            }
            "Omega" | "Gamma_over_gamma0" => {
                if !self.kind.is_open() {
                    return Err(ModelError::InvalidParameter(format!(
                        "{name} only applies to open models, not {}",
                        self.kind
                    )));
                }
                if !(value > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("{name} must be positive (got {value})")));
                }
                let ratio = if name == "Omega" { 1.0 / value } else { value };
                self.bath = Bath::Lorentzian { gamma: ratio * self.gamma0 };
            }
            other => {
                return Err(ModelError::InvalidParameter(format!(
                    "unknown parameter '{other}'; valid: {}",
                    MODEL_PARAMS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn closed_params(&self) -> Result<ClosedQubitParams, ModelError> {
        ClosedQubitParams::real(self.omega, self.alpha)
    }

    pub fn open_params(&self) -> Result<OpenSystemParams, ModelError> {
        OpenSystemParams::build(self.gamma0, self.bath, self.alpha)
    }

    pub fn trajectory(&self) -> Result<Trajectory, ModelError> {
        let traj = match (self.kind, self.kind.alignment()) {
            (ModelKind::Closed1q, _) => precession_trajectory(&self.closed_params()?),
            (ModelKind::Open1q, _) => open_qubit_trajectory(&self.open_params()?),
            (k, Some(al)) if k.is_open() => open_two_qubit_trajectory(&self.open_params()?, al),
            (_, Some(al)) => two_qubit_closed_trajectory(&self.closed_params()?, al),
            (_, None) => unreachable!("two-qubit models carry an alignment"),
        };
        Ok(traj)
    }

    /// `lim_{t→0} S` for open models with a finite spectral width.
    pub fn initial_speed(&self) -> Option<f64> {
        if !self.kind.is_open() {
            return None;
        }
        let p = self.open_params().ok()?;
        match self.kind.alignment() {
            None => open_qubit_initial_speed(&p),
            Some(al) => open_two_qubit_initial_speed(&p, al),
        }
    }

    /// Closed-form SLD speed at `t`.
    pub fn analytic_speed(&self, t: f64) -> Result<f64, ModelError> {
        match self.kind {
            ModelKind::Closed1q => Ok(closed_qubit_speed_analytic(&self.closed_params()?)),
            ModelKind::Closed2qAligned => {
                Ok(closed_two_qubit_speed_analytic(&self.closed_params()?, Alignment::Aligned))
            }
            ModelKind::Closed2qAnti => {
                Ok(closed_two_qubit_speed_analytic(&self.closed_params()?, Alignment::Anti))
            }
            ModelKind::Open1q => open_qubit_speed_analytic(&self.open_params()?, t),
            ModelKind::Open2qAligned => open_two_qubit_speed_analytic(&self.open_params()?, t),
            ModelKind::Open2qAnti => open_two_qubit_anti_speed_analytic(&self.open_params()?, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricKind;
    use crate::speed::{rho_dot, speed_at};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn precession_examples() {
        let p = ClosedQubitParams::real(1.3, 1.0).unwrap();
        let traj = precession_trajectory(&p);
        for t in [0.0, 0.7, 3.1] {
            assert!((&traj.state_at(t) - &ComplexMatrix::diag(&[1.0, 0.0])).max_abs() < 1e-15);
        }
        let p = ClosedQubitParams::real(1.0, FRAC_1_SQRT_2).unwrap();
        let rho = precession_trajectory(&p).state_at(0.0);
        assert!(rho.as_slice().iter().all(|z| close(z.re, 0.5, 1e-15) && z.im == 0.0));
    }

    #[test]
    fn closed_params_validation() {
        assert!(matches!(
            ClosedQubitParams::new(1.0, c(0.6), c(0.6)),
            Err(ModelError::NotNormalized(_))
        ));
        assert!(ClosedQubitParams::new(1.0, C64::new(0.0, 0.6), c(0.8)).is_ok());
        assert!(ClosedQubitParams::real(-1.0, 0.5).is_err());
        let p = ClosedQubitParams::from_concurrence(1.0, 0.96).unwrap();
        assert!(close(p.concurrence(), 0.96, 1e-14));
        assert!(p.alpha.re <= FRAC_1_SQRT_2);
    }

    #[test]
    fn two_qubit_closed_examples() {
        let p = ClosedQubitParams::real(1.0, FRAC_1_SQRT_2).unwrap();
        let aligned = two_qubit_closed_trajectory(&p, Alignment::Aligned);
        assert!(close(speed_at(&aligned, 0.4, MetricKind::Sld).unwrap(), 1.0, 1e-10));
        let anti = two_qubit_closed_trajectory(&p, Alignment::Anti);
        assert!(speed_at(&anti, 0.4, MetricKind::Sld).unwrap() <= 1e-10);
        let basis = two_qubit_closed_trajectory(&ClosedQubitParams::real(1.0, 0.0).unwrap(), Alignment::Aligned);
        assert_eq!(speed_at(&basis, 0.4, MetricKind::Sld).unwrap(), 0.0);
    }

    #[test]
    fn population_factor_examples() {
        let osc = OpenSystemParams::with_ratio(0.1, 1.0).unwrap();
        let markov = OpenSystemParams::markovian(1.0, 1.0).unwrap();
        for p in [osc, markov, OpenSystemParams::with_ratio(2.0, 1.0).unwrap(), OpenSystemParams::with_ratio(10.0, 1.0).unwrap()] {
            assert_eq!(population_factor(&p, 0.0).unwrap(), 1.0);
        }
        assert!(close(population_factor(&markov, 1.0).unwrap(), (-1f64).exp(), 1e-15));
        assert!(close(population_factor_dot(&markov, 1.0).unwrap(), -(-1f64).exp(), 1e-15));

        // First zero of the bracket: τ₁ = 2(π − arctan(κ/Γ))/κ.
        let kappa = 0.19f64.sqrt();
        let tau1 = 2.0 * (std::f64::consts::PI - (kappa / 0.1).atan()) / kappa;
        assert!(population_factor(&osc, tau1).unwrap() < 1e-9);
        let tau1p = 2.0 * std::f64::consts::PI / kappa;
        assert!(population_factor_dot(&osc, tau1p).unwrap().abs() < 1e-9);

        assert!(matches!(population_factor(&osc, -1.0), Err(ModelError::NegativeTime(_))));
        assert!(matches!(population_factor_dot(&osc, -1.0), Err(ModelError::NegativeTime(_))));
    }

    #[test]
    fn population_factor_dot_vanishes_at_origin() {
        for ratio in [0.1, 1.0, 2.0, 10.0] {
            let p = OpenSystemParams::with_ratio(ratio, 1.0).unwrap();
            assert_eq!(population_factor_dot(&p, 0.0).unwrap(), 0.0);
            let h = 1e-8;
            let fd = (population_factor(&p, 2.0 * h).unwrap() - population_factor(&p, 0.0).unwrap()) / (2.0 * h);
            assert!(fd.abs() < 1e-5);
        }
    }

    #[test]
    fn branches() {
        assert!(matches!(OpenSystemParams::with_ratio(0.1, 1.0).unwrap().branch(), DampingBranch::Oscillatory { .. }));
        assert!(matches!(OpenSystemParams::with_ratio(10.0, 1.0).unwrap().branch(), DampingBranch::Hyperbolic { .. }));
        assert_eq!(OpenSystemParams::with_ratio(2.0, 1.0).unwrap().branch(), DampingBranch::Critical);
        let p = OpenSystemParams::with_ratio(0.1, 1.0).unwrap();
        let k = p.kappa().unwrap();
        assert!(close(k * k + 0.01, 2.0 * 0.1, 1e-12));
        assert!(close(p.omega_ratio() * p.gamma().unwrap(), p.gamma0, 1e-12));
    }

    #[test]
    fn hyperbolic_branch_survives_long_times() {
        let p = OpenSystemParams::with_ratio(100.0, 1.0).unwrap();
        let pop = population_factor(&p, 50.0).unwrap();
        assert!(pop.is_finite() && pop > 0.0);
        assert!(close(pop.ln(), -50.0, 1.0));
    }

    #[test]
    fn amplitude_damping_examples() {
        let rho0 = ComplexMatrix::from_real_rows(&[vec![0.36, 0.3], vec![0.3, 0.64]]);
        assert_eq!(amplitude_damping_evolve(&rho0, 1.0).unwrap(), rho0);
        let excited = ComplexMatrix::diag(&[1.0, 0.0]);
        assert_eq!(amplitude_damping_evolve(&excited, 0.5).unwrap(), ComplexMatrix::diag(&[0.5, 0.5]));
        let out = amplitude_damping_evolve(&rho0, 0.25).unwrap();
        assert!(close(out[(0, 1)].re, 0.15, 1e-15));
        assert!(matches!(amplitude_damping_evolve(&rho0, 1.5), Err(ModelError::PopulationOutOfRange(_))));
        assert!(matches!(amplitude_damping_evolve(&rho0, -0.1), Err(ModelError::PopulationOutOfRange(_))));
    }

    #[test]
    fn local_damping_examples() {
        let a = FRAC_1_SQRT_2;
        let rho0 = ComplexMatrix::outer(&two_qubit_state(c(a), c(a), Alignment::Aligned));
        let out = local_damping_evolve(&rho0, 0.5, 2).unwrap();
        for (i, expect) in [0.125, 0.125, 0.125, 0.625].into_iter().enumerate() {
            assert!(close(out[(i, i)].re, expect, 1e-15));
        }
        assert!(close(out[(0, 3)].re, 0.25, 1e-15));
        assert_eq!(local_damping_evolve(&rho0, 1.0, 2).unwrap(), rho0);

        let anti = two_qubit_state(c(0.6), c(0.8), Alignment::Anti);
        let out = local_damping_evolve(&ComplexMatrix::outer(&anti), 0.3, 2).unwrap();
        let es = eigh(&out).unwrap();
        assert!(close(es.eigenvalues[2], 0.3, 1e-14) && close(es.eigenvalues[3], 0.7, 1e-14));
        let expected = &ComplexMatrix::outer(&anti).scale_real(0.3) + &ComplexMatrix::diag(&[0.0, 0.0, 0.0, 0.7]);
        assert!((&out - &expected).max_abs() < 1e-15);

        assert!(matches!(local_damping_evolve(&rho0, 0.5, 3), Err(ModelError::UnsupportedQubitCount(3))));
        assert!(matches!(local_damping_evolve(&rho0, 0.5, 1), Err(ModelError::DimensionMismatch { .. })));
        assert!(matches!(local_damping_evolve(&rho0, 1.2, 2), Err(ModelError::PopulationOutOfRange(_))));
    }

    #[test]
    fn local_damping_single_qubit_matches_direct_formula() {
        let rho0 = ComplexMatrix::from_rows(&[
            vec![c(0.3), C64::new(0.1, -0.2)],
            vec![C64::new(0.1, 0.2), c(0.7)],
        ]);
        for pop in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let a = amplitude_damping_evolve(&rho0, pop).unwrap();
            let b = local_damping_evolve(&rho0, pop, 1).unwrap();
            assert!((&a - &b).max_abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_rho_dot_matches_finite_difference() {
        for kind in [Alignment::Aligned, Alignment::Anti] {
            let p = OpenSystemParams::with_ratio(0.1, 0.6).unwrap();
            let traj = open_two_qubit_trajectory(&p, kind);
            let fd = traj.clone().without_derivative();
            for t in [0.5, 3.0, 11.0, 17.0] {
                let a = rho_dot(&traj, t, 1e-5).unwrap();
                let b = rho_dot(&fd, t, 1e-5).unwrap();
                assert!((&a - &b).max_abs() < 1e-8, "t = {t}");
            }
        }
    }

    #[test]
    fn open_qubit_population_rate_matches_fd() {
        // d/dt of ρ₁₁P_t is ρ₁₁Ṗ_t.
        let p = OpenSystemParams::with_ratio(0.1, 0.6).unwrap();
        let traj = open_qubit_trajectory(&p);
        for t in [0.3, 4.0, 12.0] {
            let h = 1e-5;
            let fd = (population_factor(&p, t + h).unwrap() - population_factor(&p, t - h).unwrap()) / (2.0 * h);
            let rd = rho_dot(&traj, t, h).unwrap();
            assert!(close(rd[(0, 0)].re, 0.36 * fd, 1e-8));
        }
    }

    #[test]
    fn analytic_speeds_edge_cases() {
        let p = OpenSystemParams::with_ratio(10.0, 1.0).unwrap();
        assert!(close(open_qubit_speed_analytic(&p, 0.0).unwrap(), 5f64.sqrt(), 1e-14));
        let p0 = p.with_alpha(0.0).unwrap();
        for t in [0.0, 1.0, 5.0] {
            assert_eq!(open_qubit_speed_analytic(&p0, t).unwrap(), 0.0);
            assert_eq!(open_two_qubit_speed_analytic(&p0, t).unwrap(), 0.0);
        }
        let m = OpenSystemParams::markovian(1.0, 1.0).unwrap();
        let expect = 0.5 / (1f64.exp() - 1.0).sqrt();
        assert!(close(open_qubit_speed_analytic(&m, 1.0).unwrap(), expect, 1e-14));

        let p2 = OpenSystemParams::with_ratio(0.1, FRAC_1_SQRT_2).unwrap();
        assert!(close(open_two_qubit_speed_analytic(&p2, 0.0).unwrap(), 0.05f64.sqrt(), 1e-14));
        let m2 = OpenSystemParams::markovian(1.0, FRAC_1_SQRT_2).unwrap();
        let s = open_two_qubit_speed_analytic(&m2, 1.0).unwrap();
        assert!(close(s, markovian_two_qubit_speed(1.0, 1.0).unwrap(), 1e-12));

        // P = 0 exactly: finite α|Ġ|.
        let osc = OpenSystemParams::with_ratio(0.1, 0.8).unwrap();
        let kappa = osc.kappa().unwrap();
        let tau1 = 2.0 * (std::f64::consts::PI - (kappa / 0.1).atan()) / kappa;
        let s = open_qubit_speed_analytic(&osc, tau1).unwrap();
        let (_, gd) = coherence_factor_with_rate(&osc, tau1).unwrap();
        assert!(close(s, 0.8 * gd.abs(), 1e-9));
        let prefactor = 0.8 * 0.1 / kappa * (-0.05 * tau1).exp() * (kappa * tau1 / 2.0).sin().abs();
        assert!(close(s, prefactor, 1e-12));
        let traj = open_qubit_trajectory(&osc);
        for dt in [-1e-3, 1e-3] {
            let generic = speed_at(&traj, tau1 + dt, MetricKind::Sld).unwrap();
            assert!((generic / s - 1.0).abs() < 1e-2, "{generic} vs {s}");
        }
    }

    #[test]
    fn markovian_two_qubit_examples() {
        for t in [0.5, 1.0, 10.0] {
            assert_eq!(markovian_two_qubit_speed(0.0, t).unwrap(), 0.0);
        }
        assert!(matches!(markovian_two_qubit_speed(0.5, 0.0), Err(ModelError::Divergence(_))));
        assert!(markovian_two_qubit_speed(1.5, 1.0).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let bell = two_qubit_state(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), Alignment::Aligned);
        assert!(close(concurrence(&ComplexMatrix::outer(&bell)).unwrap(), 1.0, 1e-12));
        let product = ComplexMatrix::diag(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(concurrence(&product).unwrap(), 0.0);
        let psi = two_qubit_state(c(0.6), c(0.8), Alignment::Aligned);
        assert!(close(concurrence(&ComplexMatrix::outer(&psi)).unwrap(), 0.96, 1e-12));
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(concurrence(&mixed).unwrap() < 1e-12);
        assert!(matches!(concurrence(&ComplexMatrix::identity(4)), Err(ModelError::NotDensity(_))));
        assert!(matches!(concurrence(&ComplexMatrix::identity(2)), Err(ModelError::DimensionMismatch { .. })));
    }

    #[test]
    fn concurrence_of_werner_states() {
        // Werner state F|Φ⁺⟩⟨Φ⁺| + (1−F)I/4 has C = max(0, (3F − 1)/2).
        let bell = ComplexMatrix::outer(&two_qubit_state(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), Alignment::Aligned));
        for f in [0.2, 0.5, 0.8, 0.95] {
            let rho = &bell.scale_real(f) + &ComplexMatrix::identity(4).scale_real((1.0 - f) / 4.0);
            let expect = ((3.0 * f - 1.0) / 2.0).max(0.0);
            assert!(close(concurrence(&rho).unwrap(), expect, 1e-7), "F = {f}");
        }
    }

    #[test]
    fn model_registry() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.key().parse::<ModelKind>().unwrap(), kind);
            let spec = ModelSpec::new(kind);
            let traj = spec.trajectory().unwrap();
            assert_eq!(traj.dim(), 1 << kind.qubits());
            traj.check_at(1.0).unwrap();
        }
        assert!(matches!("open-3q".parse::<ModelKind>(), Err(ModelError::UnknownModel(_))));

        let mut spec = ModelSpec::new(ModelKind::Open1q);
        spec.set_param("Omega", 4.0).unwrap();
        assert!(close(spec.open_params().unwrap().gamma_ratio(), 0.25, 1e-15));
        assert!(spec.set_param("C", 0.5).is_err());
        assert!(spec.set_param("alpha", 1.5).is_err());
        assert!(spec.set_param("beta", 0.5).is_err());
        let mut closed = ModelSpec::new(ModelKind::Closed2qAligned);
        assert!(closed.set_param("Omega", 1.0).is_err());
        closed.set_param("C", 0.6).unwrap();
        assert!(close(closed.analytic_speed(0.0).unwrap(), 0.6, 1e-14));
    }
}
