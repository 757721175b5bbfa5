//! Independent bit-flip and phase error channels and the couplings they induce.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::code::LoopKind;
use crate::error::{invalid, Result};

/// Error rates `(p_x, p_z)` of the single-qubit bit-flip and phase channels.
///
/// Phase errors (`Z`) damp `X` loops, bit flips damp `Z` loops:
/// `μ_x = -ln(1 - 2 p_z)`, `μ_z = -ln(1 - 2 p_x)`, and the spin coupling is
/// `J = μ / 2`. At `p = 1/2` both are `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    p_x: f64,
    p_z: f64,
}

fn check_rate(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is outside [0, 1/2]")))
    }
}

impl ErrorModel {
    pub fn new(p_x: f64, p_z: f64) -> Result<Self> {
        check_rate("p_x", p_x)?;
        check_rate("p_z", p_z)?;
        Ok(ErrorModel { p_x, p_z })
    }

    /// Bit flips only.
    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::new(p, 0.0)
    }

    /// Phase errors only.
    pub fn phase(p: f64) -> Result<Self> {
        Self::new(0.0, p)
    }

    /// Equal bit-flip and phase rates.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p_x(&self) -> f64 {
        self.p_x
    }

    pub fn p_z(&self) -> f64 {
        self.p_z
    }

    /// The error rate that damps loops of `kind`.
    pub fn rate_for(&self, kind: LoopKind) -> f64 {
        match kind {
            LoopKind::X => self.p_z,
            LoopKind::Z => self.p_x,
        }
    }

    /// `e^{-μ} = 1 - 2p` for loops of `kind`.
    pub fn loop_base(&self, kind: LoopKind) -> f64 {
        1.0 - 2.0 * self.rate_for(kind)
    }

    /// Line tension `μ` of loops of `kind`.
    pub fn tension(&self, kind: LoopKind) -> f64 {
        tension_from_rate(self.rate_for(kind))
    }

    /// Spin coupling `J = μ / 2` of loops of `kind`.
    pub fn coupling(&self, kind: LoopKind) -> f64 {
        self.tension(kind) / 2.0
    }

    pub fn mu_x(&self) -> f64 {
        self.tension(LoopKind::X)
    }

    pub fn mu_z(&self) -> f64 {
        self.tension(LoopKind::Z)
    }

    pub fn j_x(&self) -> f64 {
        self.coupling(LoopKind::X)
    }

    pub fn j_z(&self) -> f64 {
        self.coupling(LoopKind::Z)
    }
}

/// `μ = -ln(1 - 2p)`; `+∞` at `p = 1/2`.
pub fn tension_from_rate(p: f64) -> f64 {
    if p >= 0.5 {
        f64::INFINITY
    } else {
        -libm::log1p(-2.0 * p)
    }
}

/// Inverse of [`tension_from_rate`] applied to `J = μ/2`.
pub fn rate_from_coupling(j: f64) -> f64 {
    if j.is_infinite() {
        0.5
    } else {
        (1.0 - libm::exp(-2.0 * j)) / 2.0
    }
}

/// Nishimori coupling of the random-bond Ising model, `e^{-2J} = p / (1 - p)`.
pub fn nishimori_coupling(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!(
            "Nishimori coupling needs 0 < p < 1/2, got {p}"
        )));
    }
    Ok(0.5 * libm::log((1.0 - p) / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensions_and_couplings() {
        let m = ErrorModel::new(0.1, 0.2).unwrap();
        assert!((m.mu_z() + libm::log(0.8)).abs() < 1e-15);
        assert!((m.mu_x() + libm::log(0.6)).abs() < 1e-15);
        assert_eq!(m.j_x() * 2.0, m.mu_x());
        assert_eq!(m.loop_base(LoopKind::X), 1.0 - 0.4);
    }

    #[test]
    fn limits() {
        let clean = ErrorModel::symmetric(0.0).unwrap();
        assert_eq!(clean.j_x(), 0.0);
        assert!(clean.j_x().is_sign_positive());
        let dead = ErrorModel::symmetric(0.5).unwrap();
        assert!(dead.j_z().is_infinite());
        assert_eq!(rate_from_coupling(f64::INFINITY), 0.5);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(ErrorModel::new(-0.1, 0.0).is_err());
        assert!(ErrorModel::new(0.0, 0.51).is_err());
        assert!(ErrorModel::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn coupling_round_trip() {
        for p in [0.0, 0.01, 0.178, 0.3, 0.49] {
            let j = tension_from_rate(p) / 2.0;
            assert!((rate_from_coupling(j) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn nishimori_value() {
        let j = nishimori_coupling(0.109).unwrap();
        assert!((j - 1.0505).abs() < 5e-5, "{j}");
        assert!(nishimori_coupling(0.5).is_err());
        assert!(nishimori_coupling(0.0).is_err());
    }
}
