//! Boundary-extendable monotone metrics and their Morozova–Chentsov functions.
//!
//! Only the symmetric-logarithmic-derivative (SLD) and Wigner–Yanase (WY)
//! metrics can be constructed. Metrics whose kernel `c(x, y)` blows up when an
//! eigenvalue reaches zero (RLD, BKM, ...) are rejected at parse time.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{inner, norm, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("Morozova-Chentsov function is singular at x = y = 0")]
    BoundarySingularity,
    #[error("Morozova-Chentsov arguments must be non-negative (got x = {x}, y = {y})")]
    NegativeArgument { x: f64, y: f64 },
    #[error(
        "metric '{name}' cannot be continuously extended to the boundary of the state \
         manifold; use one of: sld, wy"
    )]
    NotBoundaryExtendable { name: String },
    #[error("unknown metric '{name}'; valid keys: sld, wy")]
    Unknown { name: String },
    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("state and tangent vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

/// A monotone Riemannian metric that extends continuously to pure states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Symmetric logarithmic derivative, `c(x, y) = 2 / (x + y)`.
    Sld,
    /// Wigner–Yanase, `c(x, y) = 4 / (√x + √y)²`.
    Wy,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::Sld, MetricKind::Wy];

    /// Pure-state prefactor relative to the Fubini–Study line element.
    pub fn epsilon(self) -> f64 {
        match self {
            MetricKind::Sld => 1.0,
            MetricKind::Wy => std::f64::consts::SQRT_2,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            MetricKind::Sld => "sld",
            MetricKind::Wy => "wy",
        }
    }

    /// Morozova–Chentsov function `c(x, y)`.
    pub fn mc_function(self, x: f64, y: f64) -> Result<f64, MetricError> {
        mc_function(self, x, y)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sld" => Ok(MetricKind::Sld),
            "wy" => Ok(MetricKind::Wy),
            _ => Err(reject_nonextendable(s)),
        }
    }
}

const NON_EXTENDABLE: &[&str] = &["rld", "bkm"];

/// Diagnostic for a metric identifier that is not SLD or WY.
pub fn reject_nonextendable(name: &str) -> MetricError {
    let key = name.trim().to_ascii_lowercase();
    if NON_EXTENDABLE.contains(&key.as_str()) {
        MetricError::NotBoundaryExtendable { name: name.trim().to_string() }
    } else {
        MetricError::Unknown { name: name.trim().to_string() }
    }
}

/// Morozova–Chentsov function of the given metric.
///
/// Symmetric in its arguments and satisfies `c(p, p) = 1 / p`.
pub fn mc_function(kind: MetricKind, x: f64, y: f64) -> Result<f64, MetricError> {
    if x < 0.0 || y < 0.0 || x.is_nan() || y.is_nan() {
        return Err(MetricError::NegativeArgument { x, y });
    }
    if x + y == 0.0 {
        return Err(MetricError::BoundarySingularity);
    }
    Ok(match kind {
        MetricKind::Sld => 2.0 / (x + y),
        MetricKind::Wy => {
            // (√x + √y)² rather than x + y + 2√(xy): no cancellation near 0.
            let s = x.sqrt() + y.sqrt();
            4.0 / (s * s)
        }
    })
}

/// Speed of a pure state `|ψ⟩` moving with velocity `|ψ̇⟩`:
/// `ε · ‖ψ̇ − ⟨ψ|ψ̇⟩ψ‖`.
pub fn pure_state_speed(psi: &[C64], psi_dot: &[C64], kind: MetricKind) -> Result<f64, MetricError> {
    if psi.len() != psi_dot.len() {
        return Err(MetricError::DimensionMismatch(psi.len(), psi_dot.len()));
    }
    let n = norm(psi);
    if (n - 1.0).abs() > 1e-10 {
        return Err(MetricError::NotNormalized { norm: n });
    }
    let overlap = inner(psi, psi_dot);
    // Orthogonal component computed explicitly; ⟨ψ̇|ψ̇⟩ − |⟨ψ|ψ̇⟩|² cancels badly.
    let perp: Vec<C64> = psi_dot.iter().zip(psi).map(|(&d, &p)| d - overlap * p).collect();
    Ok(kind.epsilon() * norm(&perp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn mc_function_examples() {
        assert_eq!(mc_function(MetricKind::Sld, 0.5, 0.5).unwrap(), 2.0);
        assert_eq!(mc_function(MetricKind::Wy, 1.0, 0.0).unwrap(), 4.0);
        assert_eq!(mc_function(MetricKind::Sld, 0.2, 0.8).unwrap(), 2.0);
        assert_eq!(mc_function(MetricKind::Wy, 0.25, 0.25).unwrap(), 4.0);
    }

    #[test]
    fn mc_function_boundary_errors() {
        assert_eq!(mc_function(MetricKind::Sld, 0.0, 0.0), Err(MetricError::BoundarySingularity));
        assert_eq!(mc_function(MetricKind::Wy, 0.0, 0.0), Err(MetricError::BoundarySingularity));
        assert!(matches!(
            mc_function(MetricKind::Sld, -0.1, 0.5),
            Err(MetricError::NegativeArgument { .. })
        ));
    }

    #[test]
    fn grid_properties() {
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        for kind in MetricKind::ALL {
            for &x in &grid {
                assert!((mc_function(kind, x, x).unwrap() * x - 1.0).abs() <= 1e-14);
                for &y in &grid {
                    assert_eq!(mc_function(kind, x, y).unwrap(), mc_function(kind, y, x).unwrap());
                }
            }
        }
        for &x in &grid {
            for &y in &grid {
                if x != y {
                    let wy = mc_function(MetricKind::Wy, x, y).unwrap();
                    let sld = mc_function(MetricKind::Sld, x, y).unwrap();
                    assert!(wy >= sld, "c_WY < c_SL at ({x}, {y})");
                }
            }
        }
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!("sld".parse::<MetricKind>().unwrap(), MetricKind::Sld);
        assert_eq!("SLD".parse::<MetricKind>().unwrap(), MetricKind::Sld);
        assert_eq!("wy".parse::<MetricKind>().unwrap(), MetricKind::Wy);
        for name in ["RLD", "BKM", "rld"] {
            let err = name.parse::<MetricKind>().unwrap_err();
            assert!(matches!(err, MetricError::NotBoundaryExtendable { .. }));
            assert!(err.to_string().contains("boundary"));
        }
        assert!(matches!("bures2".parse::<MetricKind>(), Err(MetricError::Unknown { .. })));
        assert_eq!(MetricKind::Sld.epsilon(), 1.0);
        assert_eq!(MetricKind::Wy.epsilon(), 2f64.sqrt());
    }

    /// State and velocity of the precessing spin α e^{-iωt/2}|1⟩ + β e^{iωt/2}|0⟩.
    fn precession(alpha: f64, beta: f64, omega: f64, t: f64) -> (Vec<C64>, Vec<C64>) {
        let e = C64::from_polar(1.0, -omega * t / 2.0);
        let psi = vec![e * alpha, e.conj() * beta];
        let i = C64::new(0.0, 1.0);
        let dot = vec![-i * omega / 2.0 * psi[0], i * omega / 2.0 * psi[1]];
        (psi, dot)
    }

    #[test]
    fn pure_state_speed_examples() {
        let (psi, dot) = precession(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 2.0, 0.37);
        assert!((pure_state_speed(&psi, &dot, MetricKind::Sld).unwrap() - 1.0).abs() < 1e-14);
        assert!(
            (pure_state_speed(&psi, &dot, MetricKind::Wy).unwrap() - 2f64.sqrt()).abs() < 1e-14
        );
        let (psi, dot) = precession(0.0, 1.0, 2.0, 0.37);
        assert_eq!(pure_state_speed(&psi, &dot, MetricKind::Sld).unwrap(), 0.0);
    }

    #[test]
    fn pure_state_speed_rejects_unnormalized() {
        let psi = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let dot = vec![C64::new(0.0, 0.0); 2];
        assert!(matches!(
            pure_state_speed(&psi, &dot, MetricKind::Sld),
            Err(MetricError::NotNormalized { .. })
        ));
    }

    #[test]
    fn wy_to_sld_ratio_on_pure_states() {
        for k in 1..20 {
            let a = k as f64 / 20.0;
            let (psi, dot) = precession(a, (1.0 - a * a).sqrt(), 1.3, 0.1 * k as f64);
            let sld = pure_state_speed(&psi, &dot, MetricKind::Sld).unwrap();
            let wy = pure_state_speed(&psi, &dot, MetricKind::Wy).unwrap();
            assert!(sld > 1e-8);
            assert!((wy / sld - 2f64.sqrt()).abs() <= 1e-12);
        }
    }
}
